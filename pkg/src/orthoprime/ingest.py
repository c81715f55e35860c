"""Reading activation files, bundled reference fixtures, and letter ratings.

The activation container is a small binary format ("OACT1"): a magic string,
record count, vector dimension, then per-record a length-prefixed UTF-8 name
followed by the vector as 32-bit little-endian floats.  Fixtures are the
bundled 28-row reference table (human priming sizes, network similarities,
coding-scheme match values, simulator predictions, pixel similarity).
"""

from __future__ import annotations

import csv
import hashlib
import struct
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .similarity_stats import ActivationVector

MAGIC = b"OACT1"

# Fixture column groups, in file order.
HUMAN_COLUMN = "Priming-ARB"
NETWORK_COLUMNS = (
    "AlexNet", "DenseNet169", "EfficientNet-B1", "ResNet50", "ResNet101",
    "VGG16", "VGG19", "ViT-B/16", "ViT-B/32", "ViT-L/16", "ViT-L/32",
)
SCHEME_COLUMNS = ("Absolute", "SpatialCoding", "BinaryOB", "OverlapOB", "SeriolOB")
SIMULATOR_COLUMNS = ("SCM", "IA", "LTRS")
PIXEL_COLUMN = "PixCS"
ALL_COLUMNS = (
    (HUMAN_COLUMN,) + NETWORK_COLUMNS + SCHEME_COLUMNS + SIMULATOR_COLUMNS
    + (PIXEL_COLUMN,)
)

# Columns holding simulated response times; larger means slower, so they are
# negated at the source table and must not be flipped again on load.
RT_NEGATED_COLUMNS = frozenset({"SCM", "IA"})

# SHA-256 of the bundled fixture file; guards against accidental edits.
FIXTURES_SHA256 = "12a99fc05caff66bf13019c38a89b08f5b15f7e10a7489abb001e797e5875cb3"


class IngestError(ValueError):
    """Raised for malformed activation files, fixtures, or ratings."""


def write_activations(
    path: str | Path,
    vectors: Sequence[ActivationVector] | Mapping[str, np.ndarray],
) -> None:
    """Write named vectors in the OACT1 binary layout."""
    if isinstance(vectors, Mapping):
        items = [(name, np.asarray(v, dtype=np.float32)) for name, v in vectors.items()]
    else:
        items = [(v.stimulus_id, v.values.astype(np.float32)) for v in vectors]
    if not items:
        raise IngestError("refusing to write an empty activation file")
    names = [name for name, _ in items]
    if len(set(names)) != len(names):
        raise IngestError("duplicate stimulus names")
    dim = items[0][1].size
    for name, vec in items:
        if vec.ndim != 1 or vec.size != dim:
            raise IngestError(f"{name}: expected 1-D vector of dimension {dim}")
        if not np.all(np.isfinite(vec)):
            raise IngestError(f"{name}: vector contains NaN/Inf")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", len(items), dim))
        for name, vec in items:
            encoded = name.encode("utf-8")
            if len(encoded) > 0xFFFF:
                raise IngestError(f"name too long: {name[:40]}...")
            fh.write(struct.pack("<H", len(encoded)))
            fh.write(encoded)
            fh.write(vec.astype("<f4").tobytes())


def read_activations(path: str | Path) -> dict[str, ActivationVector]:
    """Read an OACT1 file back into named activation vectors, bit-exactly."""
    data = Path(path).read_bytes()
    offset = 0

    def take(n: int, what: str) -> bytes:
        nonlocal offset
        if offset + n > len(data):
            raise IngestError(f"truncated file: needed {n} bytes for {what} at byte {offset}")
        chunk = data[offset:offset + n]
        offset += n
        return chunk

    if take(len(MAGIC), "magic") != MAGIC:
        raise IngestError(f"bad magic; not an {MAGIC.decode()} file")
    count, dim = struct.unpack("<II", take(8, "header"))
    out: dict[str, ActivationVector] = {}
    for _ in range(count):
        (name_len,) = struct.unpack("<H", take(2, "name length"))
        name = take(name_len, "name").decode("utf-8")
        vec = np.frombuffer(take(4 * dim, f"vector {name!r}"), dtype="<f4").copy()
        if name in out:
            raise IngestError(f"duplicate stimulus name {name!r}")
        if not np.all(np.isfinite(vec)):
            raise IngestError(f"{name}: vector contains NaN/Inf")
        out[name] = ActivationVector(values=vec, stimulus_id=name)
    if offset != len(data):
        raise IngestError(f"trailing garbage after record {count} at byte {offset}")
    return out


@dataclass(frozen=True)
class FixtureTable:
    """The bundled 28-row reference table, keyed by condition short code."""

    row_order: tuple[str, ...]
    columns: dict[str, tuple[float, ...]]

    def row(self, short_code: str) -> dict[str, float]:
        if short_code not in self.row_order:
            raise IngestError(f"unknown condition {short_code!r}")
        i = self.row_order.index(short_code)
        return {name: vals[i] for name, vals in self.columns.items()}

    def value(self, short_code: str, column: str) -> float:
        return self.row(short_code)[column]

    def column(self, name: str) -> tuple[float, ...]:
        if name not in self.columns:
            raise IngestError(f"unknown fixture column {name!r}")
        return self.columns[name]


def fixtures_path() -> Path:
    return Path(resources.files("orthoprime").joinpath("data/reference_fixtures.csv"))


def load_fixtures(path: str | Path | None = None, verify_checksum: bool = True) -> FixtureTable:
    """Load the bundled (or an explicit) fixture CSV."""
    src = Path(path) if path is not None else fixtures_path()
    raw = src.read_bytes()
    if path is None and verify_checksum:
        digest = hashlib.sha256(raw).hexdigest()
        if digest != FIXTURES_SHA256:
            raise IngestError(
                f"bundled fixture checksum mismatch ({digest}); file was modified"
            )
    rows = list(csv.DictReader(raw.decode("utf-8").splitlines()))
    if not rows:
        raise IngestError("fixture file is empty")
    header = list(rows[0])
    if header[0] != "short_code" or tuple(header[1:]) != ALL_COLUMNS:
        raise IngestError(f"unexpected fixture columns: {header}")
    order = tuple(r["short_code"] for r in rows)
    if len(set(order)) != len(order):
        raise IngestError("duplicate fixture rows")
    columns = {
        name: tuple(float(r[name]) for r in rows) for name in ALL_COLUMNS
    }
    return FixtureTable(row_order=order, columns=columns)


def load_letter_ratings(path: str | Path) -> np.ndarray:
    """Load a 26x26 letter-similarity matrix from a headered CSV.

    Layout: header row of letters A-Z, then one row per letter with its
    label in the first cell.  The matrix must be symmetric and its diagonal
    must hold the maximum rating.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise IngestError("ratings file is empty")
    letters = [c.strip().upper() for c in rows[0][1:]]
    expected = [chr(65 + i) for i in range(26)]
    if letters != expected:
        missing = sorted(set(expected) - set(letters))
        raise IngestError(f"ratings header must list A-Z in order; missing {missing}")
    if len(rows) != 27:
        raise IngestError(f"expected 26 data rows, found {len(rows) - 1}")
    matrix = np.empty((26, 26), dtype=np.float64)
    for r, row in enumerate(rows[1:]):
        if row[0].strip().upper() != expected[r]:
            raise IngestError(f"row {r + 1} labelled {row[0]!r}, expected {expected[r]!r}")
        if len(row) != 27:
            raise IngestError(f"row {expected[r]} has {len(row) - 1} values, expected 26")
        matrix[r] = [float(v) for v in row[1:]]
    if not np.all(np.isfinite(matrix)):
        raise IngestError("ratings contain NaN/Inf")
    if not np.allclose(matrix, matrix.T, atol=1e-9):
        bad = np.argwhere(~np.isclose(matrix, matrix.T, atol=1e-9))[0]
        a, b = expected[bad[0]], expected[bad[1]]
        raise IngestError(f"ratings asymmetric at ({a}, {b})")
    diag = np.diag(matrix)
    if not np.all(diag >= matrix.max(axis=1) - 1e-9):
        raise IngestError("diagonal must hold the maximum rating per letter")
    return matrix


def stimulus_name(target: str, short_code: str) -> str:
    """Naming convention binding activation vectors to prime records."""
    return f"{target.upper()}_{short_code}"


def target_name(target: str) -> str:
    return f"{target.upper()}_TARGET"
