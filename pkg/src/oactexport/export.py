"""Batch export of penultimate-layer activations to OACT1 files."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import torch
from PIL import Image

from orthoprime.ingest import write_activations
from orthoprime.lexicon import catalog

from .models import PenultimateExtractor, build_model, model_registry, ExportModelError

IMAGE_SIZE = 224

_PRIME_FILE = re.compile(r"^(?P<target>[A-Z]+)_(?P<suffix>\d{2}|TARGET)\.png$")


class ExportError(RuntimeError):
    """Raised for missing images or malformed manifests."""


@dataclass(frozen=True)
class ExportJob:
    model_name: str
    manifest: str | Path          # prime-image directory or manifest.json
    out_path: str | Path
    weights_mode: str = "pretrained-only"   # or "finetuned"
    weights_path: str | Path | None = None
    batch_size: int = 32
    seed: int = 0


def collect_prime_stimuli(image_dir: str | Path) -> list[tuple[str, Path]]:
    """(stimulus name, path) pairs from a prime-image directory.

    Files ``{target}/{target}_{NN}.png`` map to ``{target}_{short_code}``
    via the condition catalog; ``{target}_TARGET.png`` to ``{target}_TARGET``.
    """
    image_dir = Path(image_dir)
    if not image_dir.is_dir():
        raise ExportError(f"{image_dir} is not a directory")
    cat = catalog()
    out: list[tuple[str, Path]] = []
    for sub in sorted(p for p in image_dir.iterdir() if p.is_dir()):
        for png in sorted(sub.glob("*.png")):
            m = _PRIME_FILE.match(png.name)
            if not m or m.group("target") != sub.name:
                raise ExportError(f"unrecognized prime image name {png}")
            target, suffix = m.group("target"), m.group("suffix")
            if suffix == "TARGET":
                name = f"{target}_TARGET"
            else:
                idx = int(suffix)
                if not 1 <= idx <= len(cat):
                    raise ExportError(f"condition index {idx} out of range in {png}")
                name = f"{target}_{cat[idx].short_code}"
            out.append((name, png))
    if not out:
        raise ExportError(f"no prime images found under {image_dir}")
    return out


def collect_manifest_stimuli(manifest_path: str | Path) -> list[tuple[str, Path]]:
    """(stimulus name, path) pairs from a training-set manifest.json."""
    manifest_path = Path(manifest_path)
    data = json.loads(manifest_path.read_text(encoding="utf-8"))
    root = manifest_path.parent
    out = []
    for entry in data.get("images", []):
        rel = Path(entry["path"])
        out.append((rel.stem, root / rel))
    if not out:
        raise ExportError(f"manifest {manifest_path} lists no images")
    return out


def load_image_tensor(path: Path, channels: int) -> torch.Tensor:
    """PNG -> float tensor (channels, 224, 224) in [0, 1]."""
    if not path.is_file():
        raise ExportError(f"missing image {path}")
    with Image.open(path) as img:
        img = img.convert("L")
        if img.size != (IMAGE_SIZE, IMAGE_SIZE):
            img = img.resize((IMAGE_SIZE, IMAGE_SIZE), resample=Image.BILINEAR)
        arr = np.asarray(img, dtype=np.float32) / 255.0
    t = torch.from_numpy(arr).unsqueeze(0)
    return t.expand(channels, -1, -1).clone() if channels > 1 else t


def _input_channels(model_name: str) -> int:
    return 1 if model_registry()[model_name]["builder"] == "smallcnn" else 3


def export_activations(
    job: ExportJob,
    model: torch.nn.Module | None = None,
    stimuli: Sequence[tuple[str, Path]] | None = None,
) -> int:
    """Run the model over all stimuli and write one OACT1 record each.

    Returns the record count.  Deterministic: the model is put in eval
    mode and inference runs under ``no_grad``.
    """
    torch.manual_seed(job.seed)
    if stimuli is None:
        src = Path(job.manifest)
        stimuli = (
            collect_manifest_stimuli(src) if src.is_file() else collect_prime_stimuli(src)
        )
    if model is None:
        model = build_model(
            job.model_name,
            num_classes=2,
            pretrained=job.weights_mode == "pretrained-only"
            and model_registry()[job.model_name]["pretrained_available"],
        )
        if job.weights_path is not None:
            state = torch.load(job.weights_path, map_location="cpu")
            model.load_state_dict(state)
    model.eval()
    channels = _input_channels(job.model_name)
    extractor = PenultimateExtractor(model, job.model_name)
    vectors: dict[str, np.ndarray] = {}
    try:
        for start in range(0, len(stimuli), job.batch_size):
            chunk = stimuli[start : start + job.batch_size]
            batch = torch.stack([load_image_tensor(p, channels) for _, p in chunk])
            feats = extractor(batch)
            if feats.ndim != 2:
                feats = feats.flatten(1)
            arr = feats.cpu().numpy().astype(np.float32)
            for (name, _), vec in zip(chunk, arr):
                vectors[name] = vec
    finally:
        extractor.close()
    write_activations(job.out_path, vectors)
    return len(vectors)
