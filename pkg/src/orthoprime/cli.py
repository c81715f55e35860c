"""Command-line interface orchestrating the priming pipeline.

Subcommands: gen-primes, render-train, render-primes, match, analyze,
ingest-check.  Every generative verb requires --seed and is deterministic
given its flags.  Exit codes: 0 success, 1 runtime error, 2 validation or
usage error.
"""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click
import numpy as np

from . import ingest as ingest_mod
from .coding_schemes import MATCHERS, Scheme, condition_match
from .lexicon import LexiconError, catalog, load_lexicon, bundled_lexicon_path
from .prime_gen import PrimeGenError, generate_prime_set, write_prime_csv, read_prime_csv
from .renderer import RenderConfig, RenderError, render_prime_image, render_training_set
from .similarity_stats import (
    RT_LIKE_COLUMNS,
    StatsError,
    bootstrap_se,
    correlation_matrix,
    cosine,
    kendall_tau,
    letter_similarity_analysis,
    pixel_cs,
)

_HANDLED = (LexiconError, PrimeGenError, RenderError, StatsError,
            ingest_mod.IngestError)


def _fail(exc: Exception, code: int) -> None:
    click.echo(f"error: {exc}", err=True)
    sys.exit(code)


@click.group()
def main() -> None:
    """Masked form-priming pipeline tools."""


def _load_words(lexicon: str | None):
    path = Path(lexicon) if lexicon else bundled_lexicon_path()
    return load_lexicon(path)


@main.command("gen-primes")
@click.option("--seed", type=int, required=True, help="Generation seed.")
@click.option("--lexicon", type=click.Path(), default=None,
              help="Target word list (default: bundled).")
@click.option("--out", type=click.Path(), required=True, help="Output CSV.")
def gen_primes(seed: int, lexicon: str | None, out: str) -> None:
    """Generate the full 28-condition prime set as CSV."""
    try:
        words = _load_words(lexicon)
        prime_set = generate_prime_set(words, seed=seed)
        write_prime_csv(prime_set, out)
    except _HANDLED as exc:
        _fail(exc, 2)
    except OSError as exc:
        _fail(exc, 1)
    click.echo(f"wrote {len(prime_set.records)} prime records to {out} (seed {seed})")


@main.command("render-train")
@click.option("--seed", type=int, required=True)
@click.option("--lexicon", type=click.Path(), default=None)
@click.option("--out", type=click.Path(), required=True, help="Output directory.")
@click.option("--per-word", type=int, default=6, show_default=True)
@click.option("--limit", type=int, default=None,
              help="Render only the first N words (smoke runs).")
def render_train(seed: int, lexicon: str | None, out: str, per_word: int,
                 limit: int | None) -> None:
    """Render augmented training images plus a manifest."""
    try:
        words = [str(w) for w in _load_words(lexicon)]
        if limit is not None:
            words = words[:limit]
        manifest = render_training_set(words, per_word, RenderConfig(), seed, out)
    except _HANDLED as exc:
        _fail(exc, 2)
    except OSError as exc:
        _fail(exc, 1)
    click.echo(f"rendered {len(manifest['images'])} training images into {out}")


@main.command("render-primes")
@click.option("--seed", type=int, required=True)
@click.option("--lexicon", type=click.Path(), default=None)
@click.option("--primes", type=click.Path(), default=None,
              help="Existing prime CSV (default: regenerate from seed).")
@click.option("--out", type=click.Path(), required=True, help="Output directory.")
@click.option("--limit", type=int, default=None,
              help="Render only primes of the first N targets.")
def render_primes(seed: int, lexicon: str | None, primes: str | None, out: str,
                  limit: int | None) -> None:
    """Render deterministic prime and target images."""
    try:
        if primes:
            records = read_prime_csv(primes)
        else:
            records = list(generate_prime_set(_load_words(lexicon), seed=seed).records)
        targets = []
        for r in records:
            if r.target not in targets:
                targets.append(r.target)
        if limit is not None:
            targets = targets[:limit]
            keep = set(targets)
            records = [r for r in records if r.target in keep]
        out_dir = Path(out)
        out_dir.mkdir(parents=True, exist_ok=True)
        n = 0
        for r in records:
            img = render_prime_image(r.prime)
            d = out_dir / r.target
            d.mkdir(exist_ok=True)
            img.save_png(d / f"{r.target}_{r.condition_index:02d}.png")
            n += 1
        for t in targets:
            img = render_prime_image(t)
            (out_dir / t).mkdir(exist_ok=True)
            img.save_png(out_dir / t / f"{t}_TARGET.png")
            n += 1
    except _HANDLED as exc:
        _fail(exc, 2)
    except OSError as exc:
        _fail(exc, 1)
    click.echo(f"rendered {n} prime/target images into {out}")


def _parse_schemes(schemes: str | None) -> list[Scheme]:
    if not schemes:
        return list(Scheme)
    out = []
    for name in schemes.split(","):
        name = name.strip().lower()
        try:
            out.append(Scheme(name))
        except ValueError:
            raise StatsError(
                f"unknown scheme {name!r}; choose from "
                + ", ".join(s.value for s in Scheme)
            )
    return out


@main.command("match")
@click.option("--schemes", type=str, default=None,
              help="Comma-separated scheme subset (default: all five).")
@click.option("--out", type=click.Path(), default=None, help="Output CSV (default: stdout).")
@click.option("--prime", type=str, default=None, help="Score one prime string instead.")
@click.option("--target", type=str, default=None, help="Target for --prime.")
def match_cmd(schemes: str | None, out: str | None, prime: str | None,
              target: str | None) -> None:
    """Per-condition (or single-pair) match values per coding scheme."""
    try:
        chosen = _parse_schemes(schemes)
        rows: list[list] = []
        if prime is not None or target is not None:
            if not (prime and target):
                raise StatsError("--prime and --target must be used together")
            rows.append(["pair"] + [MATCHERS[s](prime, target) for s in chosen])
            header = ["short_code"] + [s.value for s in chosen]
        else:
            header = ["short_code"] + [s.value for s in chosen]
            for cond in catalog():
                rows.append(
                    [cond.short_code]
                    + [condition_match(s, cond).value for s in chosen]
                )
    except _HANDLED as exc:
        _fail(exc, 2)
    lines = [",".join(header)]
    lines += [",".join(f"{v:.4f}" if isinstance(v, float) else str(v) for v in row)
              for row in rows]
    text = "\n".join(lines) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
        click.echo(f"wrote {len(rows)} rows to {out}")
    else:
        click.echo(text, nl=False)


@main.command("analyze")
@click.option("--fixtures", "use_fixtures", is_flag=True,
              help="Correlate the bundled reference columns.")
@click.option("--activations", type=click.Path(), default=None,
              help="OACT1 file of model activations to score.")
@click.option("--ratings", type=click.Path(), default=None,
              help="26x26 letter-similarity CSV for the substitution analysis.")
@click.option("--seed", type=int, default=0, show_default=True,
              help="Bootstrap seed.")
@click.option("--bootstrap", "n_boot", type=int, default=1000, show_default=True)
@click.option("--out", type=click.Path(), default=None, help="JSON report path.")
def analyze(use_fixtures: bool, activations: str | None, ratings: str | None,
            seed: int, n_boot: int, out: str | None) -> None:
    """Correlate similarity metrics against the human priming column."""
    try:
        if not use_fixtures and not activations:
            raise StatsError("nothing to analyze: pass --fixtures and/or --activations")
        table = ingest_mod.load_fixtures()
        human = table.column(ingest_mod.HUMAN_COLUMN)
        report: dict = {"baseline": ingest_mod.HUMAN_COLUMN, "metrics": {}}
        columns: dict[str, tuple[float, ...]] = {}
        if use_fixtures:
            for name in ingest_mod.ALL_COLUMNS:
                if name != ingest_mod.HUMAN_COLUMN:
                    columns[name] = table.column(name)
        if activations:
            acts = ingest_mod.read_activations(activations)
            columns["activations"] = _activation_condition_means(acts, table)
        for name, vals in columns.items():
            x = [-v for v in vals] if name in RT_LIKE_COLUMNS else list(vals)
            rep = kendall_tau(x, list(human), name, ingest_mod.HUMAN_COLUMN)
            se = bootstrap_se(x, list(human), n_resamples=n_boot, seed=seed)
            report["metrics"][name] = {
                "tau": rep.tau, "p": rep.p_value, "se": se,
                "stars": rep.stars, "n": rep.n,
                "negated": name in RT_LIKE_COLUMNS,
            }
        full = correlation_matrix(
            {ingest_mod.HUMAN_COLUMN: human, **columns}
        )
        report["matrix"] = {
            f"{a}|{b}": {"tau": r.tau, "p": r.p_value, "stars": r.stars}
            for (a, b), r in full.items()
        }
        if ratings:
            matrix = ingest_mod.load_letter_ratings(ratings)
            records = _substitution_records(table)
            report["letter_similarity"] = {
                code: {"r": r, "p": p}
                for code, (r, p) in letter_similarity_analysis(records, matrix).items()
            }
        report["seed"] = seed
    except _HANDLED as exc:
        _fail(exc, 2)
    except OSError as exc:
        _fail(exc, 1)
    text = json.dumps(report, indent=1, sort_keys=True)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
        click.echo(f"wrote report to {out}")
    else:
        click.echo(text)


def _activation_condition_means(acts, table) -> tuple[float, ...]:
    """Mean prime-target cosine per condition from named activation vectors."""
    sums = {code: [] for code in table.row_order}
    targets = {}
    for name, vec in acts.items():
        if name.endswith("_TARGET"):
            targets[name[: -len("_TARGET")]] = vec
    if not targets:
        raise ingest_mod.IngestError("no *_TARGET vectors in activation file")
    for name, vec in acts.items():
        if name.endswith("_TARGET"):
            continue
        target, _, code = name.partition("_")
        if code not in sums:
            raise ingest_mod.IngestError(f"unknown condition suffix in {name!r}")
        if target not in targets:
            raise ingest_mod.IngestError(f"missing target vector for {name!r}")
        sums[code].append(cosine(vec, targets[target]))
    missing = [c for c, v in sums.items() if not v]
    if missing:
        raise ingest_mod.IngestError(f"no activations for conditions {missing}")
    return tuple(float(np.mean(sums[c])) for c in table.row_order)


def _substitution_records(table) -> dict[str, list[tuple[str, str, float]]]:
    """Letter-pair similarity records for the single-substitution conditions.

    Uses pixel cosine between rendered single-substitution primes and their
    targets over the bundled lexicon's first words, paired with the letters
    swapped.  Kept small for CLI latency.
    """
    from .lexicon import TargetLexicon

    # 48 words: small enough for CLI latency, divisible by every
    # sub-condition count (2, 3, 4)
    full = load_lexicon(bundled_lexicon_path())
    words = TargetLexicon(targets=full.targets[:48], source=full.source)
    records = generate_prime_set(words, seed=0).records
    wanted = {"SN-I": [], "SN-M": [], "SN-F": []}
    for r in records:
        if r.short_code in wanted:
            for i, (p_ch, t_ch) in enumerate(zip(r.prime, r.target)):
                if p_ch != t_ch:
                    sim = pixel_cs(
                        render_prime_image(r.prime), render_prime_image(r.target)
                    )
                    wanted[r.short_code].append((t_ch, p_ch, sim))
                    break
    return wanted


@main.command("ingest-check")
@click.option("--activations", type=click.Path(), required=True)
def ingest_check(activations: str) -> None:
    """Validate an OACT1 activation file."""
    try:
        acts = ingest_mod.read_activations(activations)
    except _HANDLED as exc:
        _fail(exc, 2)
    except OSError as exc:
        _fail(exc, 1)
    dim = next(iter(acts.values())).values.size if acts else 0
    click.echo(f"ok: {len(acts)} records, dimension {dim}")


if __name__ == "__main__":
    main()
