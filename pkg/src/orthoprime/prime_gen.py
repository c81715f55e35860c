"""Prime generation: apply transformation codes to targets deterministically.

Randomness contract: every record draws from its own stream seeded by
``sha256(global_seed, target, condition_index)`` truncated to 64 bits, so
generation order and parallel scheduling cannot change outputs.
"""

from __future__ import annotations

import csv
import hashlib
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .lexicon import (
    ALPHABET,
    ConditionCatalog,
    LetterString,
    TargetLexicon,
    catalog,
)

RNG_SCHEME = "sha256-stream-v1"

VOWELS = "AEIOU"
CONSONANTS = "".join(c for c in ALPHABET if c not in VOWELS)

# Two-consonant clusters allowed at a syllable boundary or word edge when
# filling pseudoword templates.
CONSONANT_CLUSTERS = frozenset({
    "BL", "BR", "CL", "CR", "CT", "DR", "FL", "FR", "GL", "GR", "LD", "LK",
    "LM", "LP", "LT", "MP", "ND", "NK", "NT", "PL", "PR", "RB", "RD", "RK",
    "RM", "RN", "RP", "RT", "SC", "SK", "SL", "SM", "SN", "SP", "ST", "SW",
    "TR", "TW",
})

PSEUDOWORD_TEMPLATES = ("CVCCVC", "CVCVCC", "CCVCVC")


class PrimeGenError(ValueError):
    """Raised for malformed codes or unsatisfiable generation requests."""


@dataclass(frozen=True)
class PrimeRecord:
    target: str
    condition_index: int
    short_code: str
    subcondition_code: str
    prime: str
    seed_used: int


@dataclass(frozen=True)
class PrimeSet:
    records: tuple[PrimeRecord, ...]
    seed: int
    lexicon_fingerprint: str


def stream_seed(global_seed: int, target: str, condition_index: int) -> int:
    """64-bit per-record seed; independent of generation order."""
    payload = f"{RNG_SCHEME}|{global_seed}|{target.upper()}|{condition_index}"
    digest = hashlib.sha256(payload.encode("ascii")).digest()
    return int.from_bytes(digest[:8], "little")


def apply_code(target: LetterString | str, code: str, rng: random.Random) -> str:
    """Apply one transformation code to a six-distinct-letter target."""
    tgt = target.chars if isinstance(target, LetterString) else target.upper()
    if len(set(tgt)) != len(tgt):
        raise PrimeGenError(f"target {tgt!r} has repeated letters")
    if not code or any(ch not in "123456789dD" for ch in code):
        raise PrimeGenError(f"malformed code {code!r}")

    outside = [c for c in ALPHABET if c not in tgt]
    n_fresh = sum(1 for ch in code if ch == "d")
    fresh = rng.sample(outside, n_fresh) if n_fresh else []
    repeated = rng.choice([c for c in outside if c not in fresh]) if "D" in code else ""

    out: list[str] = []
    fresh_iter = iter(fresh)
    for ch in code:
        if ch.isdigit():
            idx = int(ch) - 1
            if idx >= len(tgt):
                raise PrimeGenError(
                    f"code {code!r} references position {ch} beyond target length {len(tgt)}"
                )
            out.append(tgt[idx])
        elif ch == "d":
            out.append(next(fresh_iter))
        else:  # 'D'
            out.append(repeated)
    return "".join(out)


def assign_subconditions(n_targets: int, codes: Sequence[str]) -> list[str]:
    """Round-robin code assignment by sorted-target index; exact balance."""
    k = len(codes)
    if k == 0:
        raise PrimeGenError("no codes to assign")
    if n_targets % k != 0:
        raise PrimeGenError(
            f"{n_targets} targets not divisible by {k} sub-conditions "
            f"(remainder {n_targets % k})"
        )
    return [codes[i % k] for i in range(n_targets)]


def gen_arbitrary(target: LetterString | str, rng: random.Random) -> str:
    """Six distinct letters, none appearing in the target."""
    tgt = target.chars if isinstance(target, LetterString) else target.upper()
    outside = [c for c in ALPHABET if c not in tgt]
    return "".join(rng.sample(outside, 6))


def _fill_template(template: str, letters_out: Sequence[str], rng: random.Random) -> str | None:
    """Fill one template with distinct available letters, or None if impossible.

    Each template contains exactly one adjacent consonant pair; that pair is
    drawn from the cluster allowlist directly so sparse letter pools still
    succeed, then the remaining slots are filled without replacement.
    """
    vowels = [c for c in VOWELS if c in letters_out]
    consonants = [c for c in letters_out if c not in VOWELS]
    need_v = template.count("V")
    need_c = template.count("C")
    if len(vowels) < need_v or len(consonants) < need_c:
        return None
    cc_at = next(
        (i for i in range(len(template) - 1) if template[i : i + 2] == "CC"), None
    )
    cluster = ""
    if cc_at is not None:
        pool = set(consonants)
        options = [
            cl for cl in CONSONANT_CLUSTERS
            if cl[0] in pool and cl[1] in pool and cl[0] != cl[1]
        ]
        if not options:
            return None
        cluster = rng.choice(sorted(options))
        consonants = [c for c in consonants if c not in cluster]
        need_c -= 2
    if len(consonants) < need_c:
        return None
    vs = iter(rng.sample(vowels, need_v))
    cs = iter(rng.sample(consonants, need_c))
    out: list[str] = []
    i = 0
    while i < len(template):
        if i == cc_at:
            out.append(cluster)
            i += 2
        elif template[i] == "V":
            out.append(next(vs))
            i += 1
        else:
            out.append(next(cs))
            i += 1
    return "".join(out)


def gen_pseudoword(target: LetterString | str, rng: random.Random, max_attempts: int = 100) -> str:
    """Pronounceable six-letter string sharing no letters with the target."""
    tgt = target.chars if isinstance(target, LetterString) else target.upper()
    outside = [c for c in ALPHABET if c not in tgt]
    for _ in range(max_attempts):
        template = rng.choice(PSEUDOWORD_TEMPLATES)
        word = _fill_template(template, outside, rng)
        if word is not None:
            return word
    raise PrimeGenError(
        f"could not fill a pseudoword template for target {tgt!r} "
        f"after {max_attempts} attempts"
    )


def generate_prime_set(
    lexicon: TargetLexicon,
    seed: int,
    conditions: ConditionCatalog | None = None,
) -> PrimeSet:
    """Generate the full |targets| x 28 prime set, deterministic under seed."""
    cat = conditions or catalog()
    words = [t.chars for t in lexicon.targets]
    order = sorted(range(len(words)), key=lambda i: words[i])

    # sub-condition assignment keyed by sorted-target rank
    assignment: dict[int, dict[int, str]] = {}
    for cond in cat:
        codes = assign_subconditions(len(words), cond.codes)
        assignment[cond.index] = {
            target_idx: codes[rank] for rank, target_idx in enumerate(order)
        }

    records: list[PrimeRecord] = []
    for target_idx, word in enumerate(words):
        for cond in cat:
            code = assignment[cond.index][target_idx]
            seed_used = stream_seed(seed, word, cond.index)
            rng = random.Random(seed_used)
            if cond.short_code == "ALD-PW":
                prime = gen_pseudoword(word, rng)
            elif cond.short_code == "ALD-ARB":
                prime = gen_arbitrary(word, rng)
            else:
                prime = apply_code(word, code, rng)
            records.append(
                PrimeRecord(
                    target=word,
                    condition_index=cond.index,
                    short_code=cond.short_code,
                    subcondition_code=code,
                    prime=prime,
                    seed_used=seed_used,
                )
            )

    fingerprint = hashlib.sha256("\n".join(words).encode("ascii")).hexdigest()[:16]
    return PrimeSet(records=tuple(records), seed=seed, lexicon_fingerprint=fingerprint)


CSV_HEADER = ["target", "condition_index", "short_code", "subcondition_code", "prime", "seed"]


def write_prime_csv(prime_set: PrimeSet, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for r in prime_set.records:
            writer.writerow(
                [r.target, r.condition_index, r.short_code, r.subcondition_code, r.prime, r.seed_used]
            )


def read_prime_csv(path: str | Path) -> list[PrimeRecord]:
    records: list[PrimeRecord] = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            records.append(
                PrimeRecord(
                    target=row["target"],
                    condition_index=int(row["condition_index"]),
                    short_code=row["short_code"],
                    subcondition_code=row["subcondition_code"],
                    prime=row["prime"],
                    seed_used=int(row["seed"]),
                )
            )
    return records
