"""Similarity and correlation statistics for the priming pipeline.

Covers cosine similarity, pixel-level cosine, per-condition aggregation,
tie-corrected Kendall's tau with a normal-approximation p-value, paired
bootstrap standard errors, Pearson correlation, the letter-similarity
analysis for the substitution conditions, and the pairwise correlation
matrix over named 28-row columns.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy import special, stats as sps


class StatsError(ValueError):
    """Raised for degenerate statistical inputs."""


@dataclass(frozen=True)
class ActivationVector:
    values: np.ndarray
    stimulus_id: str
    model_name: str = ""
    layer_label: str = ""

    def __post_init__(self) -> None:
        arr = np.asarray(self.values)
        if arr.dtype not in (np.float32, np.float64):
            arr = arr.astype(np.float64)
        if arr.ndim != 1 or arr.size < 1:
            raise StatsError(f"{self.stimulus_id}: activation must be a 1-D vector")
        if not np.all(np.isfinite(arr)):
            raise StatsError(f"{self.stimulus_id}: activation contains NaN/Inf")
        object.__setattr__(self, "values", arr)


def cosine(a: np.ndarray | ActivationVector, b: np.ndarray | ActivationVector) -> float:
    """Cosine similarity A.B / (|A||B|), in [-1, 1]."""
    va = a.values if isinstance(a, ActivationVector) else np.asarray(a, dtype=np.float64)
    vb = b.values if isinstance(b, ActivationVector) else np.asarray(b, dtype=np.float64)
    if va.shape != vb.shape:
        raise StatsError(f"dimension mismatch: {va.shape} vs {vb.shape}")
    na, nb = np.linalg.norm(va), np.linalg.norm(vb)
    if na == 0.0 or nb == 0.0:
        raise StatsError("cosine undefined for a zero vector")
    if np.array_equal(va, vb):
        return 1.0
    return float(np.clip(np.dot(va, vb) / (na * nb), -1.0, 1.0))


def pixel_cs(img1, img2) -> float:
    """Cosine similarity over flattened pixel buffers."""
    p1 = np.asarray(getattr(img1, "pixels", img1), dtype=np.float64).ravel()
    p2 = np.asarray(getattr(img2, "pixels", img2), dtype=np.float64).ravel()
    if p1.shape != p2.shape:
        raise StatsError("image dimension mismatch")
    return cosine(p1, p2)


@dataclass(frozen=True)
class ConditionSummary:
    condition_index: int
    values: tuple[float, ...]
    mean: float = field(init=False)
    count: int = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "mean", float(np.mean(self.values)))
        object.__setattr__(self, "count", len(self.values))


def aggregate_by_condition(
    pairs: Sequence[tuple[int, float]], n_conditions: int = 28
) -> list[ConditionSummary]:
    """Group (condition_index, similarity) pairs into per-condition summaries."""
    buckets: dict[int, list[float]] = {}
    for idx, value in pairs:
        if not 1 <= idx <= n_conditions:
            raise StatsError(f"unknown condition index {idx}")
        buckets.setdefault(idx, []).append(float(value))
    return [
        ConditionSummary(condition_index=i, values=tuple(buckets[i]))
        for i in sorted(buckets)
    ]


@dataclass(frozen=True)
class CorrelationReport:
    name_x: str
    name_y: str
    tau: float
    p_value: float
    n: int
    bootstrap_se: float | None = None

    @property
    def stars(self) -> str:
        if self.p_value < 0.001:
            return "***"
        if self.p_value < 0.01:
            return "**"
        if self.p_value < 0.05:
            return "*"
        return ""


def kendall_tau(
    x: Sequence[float],
    y: Sequence[float],
    name_x: str = "x",
    name_y: str = "y",
) -> CorrelationReport:
    """Tie-corrected Kendall tau-b with two-sided normal-approximation p."""
    xs = np.asarray(x, dtype=np.float64)
    ys = np.asarray(y, dtype=np.float64)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise StatsError("inputs must be equal-length 1-D sequences")
    n = xs.size
    if n < 3:
        raise StatsError("need at least 3 observations")
    if np.all(xs == xs[0]) or np.all(ys == ys[0]):
        raise StatsError("tau undefined for constant input")

    concordant = discordant = 0
    for i in range(n):
        for j in range(i + 1, n):
            s = np.sign(xs[i] - xs[j]) * np.sign(ys[i] - ys[j])
            if s > 0:
                concordant += 1
            elif s < 0:
                discordant += 1

    def tie_terms(v: np.ndarray) -> tuple[float, float, float]:
        _, counts = np.unique(v, return_counts=True)
        t1 = float(np.sum(counts * (counts - 1) / 2))
        t2 = float(np.sum(counts * (counts - 1) * (counts - 2)))
        t3 = float(np.sum(counts * (counts - 1) * (2 * counts + 5)))
        return t1, t2, t3

    n0 = n * (n - 1) / 2
    tx, vx2, vx3 = tie_terms(xs)
    ty, vy2, vy3 = tie_terms(ys)
    denom = math.sqrt((n0 - tx) * (n0 - ty))
    tau = (concordant - discordant) / denom

    # tie-adjusted variance of S = concordant - discordant (normal approximation)
    v0 = n * (n - 1) * (2 * n + 5)
    var_s = (
        (v0 - vx3 - vy3) / 18
        + vx2 * vy2 / (9 * n * (n - 1) * (n - 2))
        + (2 * tx * ty) / (n * (n - 1))
    )
    s = concordant - discordant
    if var_s <= 0:
        p = 1.0
    else:
        z = s / math.sqrt(var_s)
        p = float(special.erfc(abs(z) / math.sqrt(2)))
    p = min(max(p, np.nextafter(0, 1)), 1.0)
    return CorrelationReport(name_x=name_x, name_y=name_y, tau=float(tau), p_value=p, n=n)


def bootstrap_se(
    x: Sequence[float],
    y: Sequence[float],
    n_resamples: int = 1000,
    seed: int = 0,
    max_redraws: int = 100_000,
) -> float:
    """SD of tau over paired index resamples with replacement; deterministic."""
    xs = np.asarray(x, dtype=np.float64)
    ys = np.asarray(y, dtype=np.float64)
    if xs.shape != ys.shape:
        raise StatsError("length mismatch")
    n = xs.size
    rng = random.Random(seed)
    taus: list[float] = []
    redraws = 0
    while len(taus) < n_resamples:
        idx = [rng.randrange(n) for _ in range(n)]
        rx, ry = xs[idx], ys[idx]
        if np.all(rx == rx[0]) or np.all(ry == ry[0]):
            redraws += 1
            if redraws > max_redraws:
                raise StatsError("too many degenerate bootstrap resamples")
            continue
        taus.append(kendall_tau(rx, ry).tau)
    return float(np.std(taus))


def pearson_r(x: Sequence[float], y: Sequence[float]) -> tuple[float, float]:
    """Product-moment r with two-sided t-test p-value."""
    xs = np.asarray(x, dtype=np.float64)
    ys = np.asarray(y, dtype=np.float64)
    if xs.shape != ys.shape or xs.size < 3:
        raise StatsError("need equal-length inputs of at least 3")
    if np.all(xs == xs[0]) or np.all(ys == ys[0]):
        raise StatsError("pearson undefined for constant input")
    r, p = sps.pearsonr(xs, ys)
    return float(r), float(p)


def letter_similarity_analysis(
    records: Mapping[str, Sequence[tuple[str, str, float]]],
    ratings: np.ndarray,
) -> dict[str, tuple[float, float]]:
    """Per substitution condition, correlate letter-pair ratings with similarity.

    ``records`` maps a substitution condition short code (SN-I/SN-M/SN-F) to
    (original_letter, substituted_letter, similarity) triples; ``ratings`` is
    a symmetric 26 x 26 matrix indexed by A=0..Z=25.
    """
    ratings = np.asarray(ratings, dtype=np.float64)
    if ratings.shape != (26, 26):
        raise StatsError("ratings must be 26x26")
    if not np.allclose(ratings, ratings.T, atol=1e-9):
        raise StatsError("ratings matrix must be symmetric")
    out: dict[str, tuple[float, float]] = {}
    for code, triples in records.items():
        rating_vals = []
        sim_vals = []
        for orig, sub, sim in triples:
            i, j = ord(orig.upper()) - 65, ord(sub.upper()) - 65
            if not (0 <= i < 26 and 0 <= j < 26):
                raise StatsError(f"missing rating pair {orig!r}/{sub!r}")
            rating_vals.append(ratings[i, j])
            sim_vals.append(sim)
        out[code] = pearson_r(rating_vals, sim_vals)
    return out


# Columns holding model response times rather than similarities; their sign is
# flipped before correlating so that larger always means more priming.
RT_LIKE_COLUMNS = frozenset({"SCM", "IA"})


def correlation_matrix(
    columns: Mapping[str, Sequence[float]],
    negate: frozenset[str] = RT_LIKE_COLUMNS,
) -> dict[tuple[str, str], CorrelationReport]:
    """Pairwise tau matrix over named equal-length columns."""
    names = list(columns)
    if len(names) < 2:
        raise StatsError("need at least two columns")
    lengths = {len(columns[n]) for n in names}
    if len(lengths) != 1:
        raise StatsError("column length mismatch")
    prepared = {
        n: (-np.asarray(columns[n], dtype=np.float64)
            if n in negate else np.asarray(columns[n], dtype=np.float64))
        for n in names
    }
    out: dict[tuple[str, str], CorrelationReport] = {}
    for i, a in enumerate(names):
        for b in names[i:]:
            if a == b:
                rep = CorrelationReport(a, b, 1.0, np.nextafter(0, 1), len(prepared[a]))
            else:
                rep = kendall_tau(prepared[a], prepared[b], a, b)
            out[(a, b)] = rep
            out[(b, a)] = CorrelationReport(b, a, rep.tau, rep.p_value, rep.n)
    return out


def condition_distributions(
    summaries: Sequence[ConditionSummary],
    ordering: Sequence[int],
) -> list[tuple[int, tuple[float, ...]]]:
    """Per-condition value lists ordered by the given condition-index order."""
    by_index = {s.condition_index: s for s in summaries}
    return [(i, by_index[i].values) for i in ordering if i in by_index]
