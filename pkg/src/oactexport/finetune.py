"""Desk-scale fine-tuning: word classification with early loss-based stopping.

Training uses Adam and cross-entropy; it stops once the average epoch loss
stops improving by more than the configured threshold (default 0.0025).
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from pathlib import Path

import torch
from torch import nn
from torch.utils.data import DataLoader, Dataset

from .export import load_image_tensor, _input_channels, ExportError
from .models import build_model, model_registry


@dataclass(frozen=True)
class FinetuneConfig:
    model_name: str = "smallcnn"
    lr: float = 1e-5
    loss_threshold: float = 0.0025
    max_epochs: int = 50
    # epochs always run before the plateau rule may stop training; useful
    # for from-scratch runs whose loss is flat before it starts dropping
    min_epochs: int = 2
    batch_size: int = 32
    seed: int = 0
    freeze_backbone: bool = False
    pretrained: bool = False


@dataclass
class FinetuneResult:
    model: nn.Module
    classes: tuple[str, ...]
    epochs_run: int
    train_losses: list[float]
    val_accuracy: float


class ManifestDataset(Dataset):
    """Images listed in a renderer manifest, labelled by word class."""

    def __init__(self, manifest_path: str | Path, split: str, channels: int) -> None:
        manifest_path = Path(manifest_path)
        data = json.loads(manifest_path.read_text(encoding="utf-8"))
        self.root = manifest_path.parent
        self.entries = [e for e in data.get("images", []) if e["split"] == split]
        if not self.entries:
            raise ExportError(f"manifest has no images in split {split!r}")
        self.classes = tuple(sorted({e["word"] for e in data["images"]}))
        self.class_index = {w: i for i, w in enumerate(self.classes)}
        self.channels = channels

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, i: int):
        e = self.entries[i]
        return (
            load_image_tensor(self.root / e["path"], self.channels),
            self.class_index[e["word"]],
        )


def finetune(manifest_path: str | Path, config: FinetuneConfig = FinetuneConfig()) -> FinetuneResult:
    """Train a word classifier from a renderer manifest; report val accuracy."""
    torch.manual_seed(config.seed)
    random.seed(config.seed)
    channels = _input_channels(config.model_name)
    train_ds = ManifestDataset(manifest_path, "train", channels)
    val_ds = ManifestDataset(manifest_path, "val", channels)
    if len(train_ds.classes) < 2:
        raise ExportError(
            f"need at least 2 word classes, got {len(train_ds.classes)}"
        )
    model = build_model(
        config.model_name, num_classes=len(train_ds.classes), pretrained=config.pretrained
    )
    if config.freeze_backbone:
        head_path = model_registry()[config.model_name]["head"]
        head_prefix = head_path.split(".")[0]
        for name, param in model.named_parameters():
            if not name.startswith(head_prefix):
                param.requires_grad_(False)
    params = [p for p in model.parameters() if p.requires_grad]
    optimizer = torch.optim.Adam(params, lr=config.lr)
    loss_fn = nn.CrossEntropyLoss()
    loader = DataLoader(
        train_ds, batch_size=config.batch_size, shuffle=True,
        generator=torch.Generator().manual_seed(config.seed),
    )

    losses: list[float] = []
    for epoch in range(config.max_epochs):
        model.train()
        total, count = 0.0, 0
        for images, labels in loader:
            optimizer.zero_grad()
            loss = loss_fn(model(images), labels)
            if not math.isfinite(loss.item()):
                raise ExportError(
                    f"training diverged: non-finite loss at epoch {epoch + 1} "
                    f"(lr={config.lr}, batch_size={config.batch_size})"
                )
            loss.backward()
            optimizer.step()
            total += loss.item() * images.size(0)
            count += images.size(0)
        losses.append(total / count)
        if (
            len(losses) >= max(2, config.min_epochs)
            and losses[-2] - losses[-1] < config.loss_threshold
        ):
            break

    model.eval()
    correct = 0
    with torch.no_grad():
        for images, labels in DataLoader(val_ds, batch_size=config.batch_size):
            correct += int((model(images).argmax(dim=1) == labels).sum())
    return FinetuneResult(
        model=model,
        classes=train_ds.classes,
        epochs_run=len(losses),
        train_losses=losses,
        val_accuracy=correct / len(val_ds),
    )
