"""The five orthographic match-value calculators.

Absolute and BinaryOB follow closed-form definitions.  SpatialCoding,
OverlapOB, and SeriolOB carry parameter tables (bundled in
``data/scheme_params.json``) calibrated against the 28-row reference
table; a regression test enforces agreement within +/-0.01 on every row.

Scheme sketches:

* Absolute — fraction of left-aligned positions where prime and target
  agree.
* SpatialCoding — each target letter found in the prime contributes a
  graded credit by its displacement from the best-fitting global
  alignment offset; two end-letter units grade on distance from the
  string edges; normalized by ``len(target) + 2``.
* BinaryOB — unweighted shared open bigrams (up to 2 intervening
  letters) over the target's 12 bigrams.
* OverlapOB — shared letter pairs earn a weight read from a table
  indexed by (target gap, prime gap); pairs found in reversed order use
  a second table; normalized by target self-match.
* SeriolOB — letter pairs carry positional activation products
  (target-side and prime-side profiles), plus two edge units graded on
  the first/last letter's displacement; normalized by target self-match.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from importlib import resources
from typing import Callable, Mapping, Sequence

from .lexicon import PrimeCondition

BINARY_OB_MAX_GAP = 2


class Scheme(Enum):
    ABSOLUTE = "absolute"
    SPATIAL_CODING = "spatial_coding"
    BINARY_OB = "binary_ob"
    OVERLAP_OB = "overlap_ob"
    SERIOL_OB = "seriol_ob"


@dataclass(frozen=True)
class WeightedBigram:
    first: str
    second: str
    weight: float
    gap: int

    def __post_init__(self) -> None:
        if self.weight <= 0:
            raise ValueError("bigram weight must be positive")


@dataclass(frozen=True)
class MatchValue:
    scheme: Scheme
    value: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.value <= 1.0:
            raise ValueError(f"match value {self.value} outside [0, 1]")


@dataclass(frozen=True)
class SchemeParams:
    """Calibrated parameter tables for the three non-closed-form schemes."""

    sc_displacement: tuple[float, ...]
    sc_edge: tuple[float, ...]
    oob_forward: tuple[tuple[float, ...], ...]
    oob_reversed: tuple[tuple[float, ...], ...]
    sob_target_pairs: tuple[float, ...]   # upper-triangle over target_span
    sob_prime_pairs: tuple[float, ...]    # upper-triangle over prime_span
    sob_edge1: tuple[float, ...]
    sob_edge2: tuple[float, ...]
    sob_target_span: int
    sob_prime_span: int


@lru_cache(maxsize=1)
def default_params() -> SchemeParams:
    raw = json.loads(
        resources.files("orthoprime").joinpath("data/scheme_params.json").read_text()
    )
    sc = raw["spatial_coding"]
    oob = raw["overlap_ob"]
    sob = raw["seriol_ob"]
    return SchemeParams(
        sc_displacement=tuple(sc["displacement_credits"]),
        sc_edge=tuple(sc["edge_credits"]),
        oob_forward=tuple(tuple(r) for r in oob["forward"]),
        oob_reversed=tuple(tuple(r) for r in oob["reversed"]),
        sob_target_pairs=tuple(sob["target_pair_weights"]),
        sob_prime_pairs=tuple(sob["prime_pair_weights"]),
        sob_edge1=tuple(sob["edge1_credits"]),
        sob_edge2=tuple(sob["edge2_credits"]),
        sob_target_span=int(sob["target_span"]),
        sob_prime_span=int(sob["prime_span"]),
    )


def _norm(s) -> str:
    return str(s).upper()


def open_bigrams(s, max_gap: int = BINARY_OB_MAX_GAP) -> set[WeightedBigram]:
    """All ordered letter pairs with at most max_gap intervening letters."""
    s = _norm(s)
    out: set[WeightedBigram] = set()
    for i in range(len(s)):
        for j in range(i + 1, min(len(s), i + max_gap + 2)):
            out.add(WeightedBigram(first=s[i], second=s[j], weight=1.0, gap=j - i - 1))
    return out


def match_absolute(prime, target) -> float:
    """Fraction of left-aligned positions at which prime matches target."""
    prime, target = _norm(prime), _norm(target)
    if not prime or not target:
        raise ValueError("strings must be non-empty")
    hits = sum(
        1 for i, ch in enumerate(target) if i < len(prime) and prime[i] == ch
    )
    return hits / len(target)


def match_binary_ob(prime, target) -> float:
    """Unweighted shared open-bigram fraction (pair identity only)."""
    prime, target = _norm(prime), _norm(target)
    tb = {(b.first, b.second) for b in open_bigrams(target)}
    pb = {(b.first, b.second) for b in open_bigrams(prime)}
    if not tb:
        raise ValueError("target too short for bigrams")
    return len(tb & pb) / len(tb)


def match_spatial_coding(prime, target, params: SchemeParams | None = None) -> float:
    """Superposition alignment match with graded end-letter units."""
    prime, target = _norm(prime), _norm(target)
    if not prime or not target:
        raise ValueError("strings must be non-empty")
    p = params or default_params()

    def credit(table: Sequence[float], d: int) -> float:
        d = abs(d)
        return table[d] if d < len(table) else 0.0

    pos = {ch: i for i, ch in enumerate(prime)}
    disp = [pos[ch] - i for i, ch in enumerate(target) if ch in pos]
    base = 0.0
    if disp:
        best: tuple[int, float] | None = None
        for offset in set(disp):
            aligned = sum(1 for d in disp if d == offset)
            total = sum(credit(p.sc_displacement, d - offset) for d in disp)
            key = (aligned, total)
            if best is None or key > best:
                best = key
        base = best[1]
    num = base
    if target[0] in pos:
        num += credit(p.sc_edge, pos[target[0]])
    if target[-1] in pos:
        num += credit(p.sc_edge, len(prime) - 1 - pos[target[-1]])
    return min(1.0, num / (len(target) + 2))


def _pair_table_value(table: Sequence[Sequence[float]], tg: int, pg: int) -> float:
    if tg < len(table) and pg < len(table[tg]):
        return table[tg][pg]
    return 0.0


def match_overlap_ob(prime, target, params: SchemeParams | None = None) -> float:
    """Gap-weighted shared pairs; (target gap, prime gap) weight tables."""
    prime, target = _norm(prime), _norm(target)
    if len(prime) < 2 or len(target) < 2:
        raise ValueError("strings must have length >= 2")
    p = params or default_params()
    fwd, rev = p.oob_forward, p.oob_reversed
    positions: dict[str, list[int]] = {}
    for i, ch in enumerate(prime):
        positions.setdefault(ch, []).append(i)
    num = 0.0
    den = 0.0
    for i in range(len(target)):
        for j in range(i + 1, len(target)):
            tg = j - i - 1
            den += _pair_table_value(fwd, tg, tg)
            best = 0.0
            for pi in positions.get(target[i], ()):
                for pj in positions.get(target[j], ()):
                    if pi < pj:
                        cand = _pair_table_value(fwd, tg, pj - pi - 1)
                    elif pi > pj:
                        cand = _pair_table_value(rev, tg, pi - pj - 1)
                    else:
                        continue
                    best = max(best, cand)
            num += best
    if den <= 0:
        raise ValueError("degenerate target for overlap bigrams")
    return min(1.0, num / den)


def _upper_pairs(span: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(span) for j in range(i + 1, span)]


def match_seriol_ob(prime, target, params: SchemeParams | None = None) -> float:
    """Target-pair weights combined with prime-position-pair weights.

    A preserved target pair (i, j) found at prime positions (p, q) earns
    W[i, j] * B[p, q]; two edge units grade on the displacement of the
    first/last target letters.  Normalized by the target self-match.
    """
    prime, target = _norm(prime), _norm(target)
    if len(prime) < 2 or len(target) < 2:
        raise ValueError("strings must have length >= 2")
    p = params or default_params()
    widx = {pr: k for k, pr in enumerate(_upper_pairs(p.sob_target_span))}
    bidx = {pr: k for k, pr in enumerate(_upper_pairs(p.sob_prime_span))}

    def wval(i: int, j: int) -> float:
        k = widx.get((i, j))
        return p.sob_target_pairs[k] if k is not None else 0.0

    def bval(i: int, j: int) -> float:
        k = bidx.get((i, j))
        return p.sob_prime_pairs[k] if k is not None else 0.0

    def edge(table: Sequence[float], d: int) -> float:
        return table[d] if d < len(table) else 0.0

    positions: dict[str, list[int]] = {}
    for i, ch in enumerate(prime):
        positions.setdefault(ch, []).append(i)
    num = 0.0
    den = edge(p.sob_edge1, 0) + edge(p.sob_edge2, 0)
    for i in range(len(target)):
        for j in range(i + 1, len(target)):
            tw = wval(i, j)
            den += tw * bval(i, j)
            best = 0.0
            for pi in positions.get(target[i], ()):
                for pj in positions.get(target[j], ()):
                    if pi < pj:
                        best = max(best, tw * bval(pi, pj))
            num += best
    first = positions.get(target[0])
    if first:
        num += edge(p.sob_edge1, min(abs(pi - 0) for pi in first))
    last = positions.get(target[-1])
    if last:
        num += edge(p.sob_edge2, min(abs(pj - (len(target) - 1)) for pj in last))
    if den <= 0:
        raise ValueError("degenerate SERIOL denominator")
    return min(1.0, num / den)


MATCHERS: Mapping[Scheme, Callable[..., float]] = {
    Scheme.ABSOLUTE: match_absolute,
    Scheme.SPATIAL_CODING: match_spatial_coding,
    Scheme.BINARY_OB: match_binary_ob,
    Scheme.OVERLAP_OB: match_overlap_ob,
    Scheme.SERIOL_OB: match_seriol_ob,
}


def match_value(scheme: Scheme, prime, target) -> MatchValue:
    return MatchValue(scheme=scheme, value=MATCHERS[scheme](prime, target))


# Canonical instantiation used for target-independent condition values: any
# six distinct letters work for the target; the policy slots get letters
# guaranteed to be outside it.
_CANONICAL_TARGET = "ABCDEF"
_OUTSIDE_LETTERS = "XYZWVU"


def instantiate_code(code: str, target: str = _CANONICAL_TARGET) -> str:
    """Turn a transformation code into a concrete prime string.

    Digits copy target letters; each 'd' becomes a distinct letter outside
    the target; every 'D' shares one reused outside letter.
    """
    target = _norm(target)
    outside = [ch for ch in _OUTSIDE_LETTERS if ch not in target]
    fresh = iter(outside)
    reused = outside[-1]
    out = []
    for ch in code:
        if ch.isdigit():
            idx = int(ch) - 1
            if not 0 <= idx < len(target):
                raise ValueError(f"code digit {ch} out of range for {target!r}")
            out.append(target[idx])
        elif ch == "d":
            out.append(next(fresh))
        elif ch == "D":
            out.append(reused)
        else:
            raise ValueError(f"bad code character {ch!r}")
    return "".join(out)


def condition_match(scheme: Scheme, condition: PrimeCondition) -> MatchValue:
    """Mean match value over a condition's codes; target-independent."""
    matcher = MATCHERS[scheme]
    values = [
        matcher(instantiate_code(code), _CANONICAL_TARGET)
        for code in condition.codes
    ]
    return MatchValue(scheme=scheme, value=sum(values) / len(values))


def scheme_table(conditions: Sequence[PrimeCondition]) -> dict[str, dict[str, float]]:
    """Per-condition match values for all five schemes, keyed by short code."""
    return {
        cond.short_code: {
            scheme.value: condition_match(scheme, cond).value for scheme in Scheme
        }
        for cond in conditions
    }
