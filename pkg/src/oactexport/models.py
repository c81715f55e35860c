"""Model construction and penultimate-layer activation capture.

The penultimate layer is defined per model family in
``data/model_registry.json``: the entry names the classification head
module whose *input* is the feature vector to export (post-pooling vector
for convolutional nets, pre-head class token for transformer nets).
"""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources

import torch
from torch import nn


class ExportModelError(RuntimeError):
    """Raised for unknown models or registry/layer mismatches."""


@lru_cache(maxsize=1)
def model_registry() -> dict[str, dict]:
    raw = resources.files("oactexport").joinpath("data/model_registry.json").read_text()
    return json.loads(raw)


class SmallCNN(nn.Module):
    """Desk-scale grayscale word classifier.

    Input: (N, 1, 224, 224) in [0, 1].  ``features`` ends in a pool over a
    1 x 4 horizontal grid (words are left-to-right structures, so the
    feature keeps coarse position information) producing a 512-dimensional
    vector; ``head`` is the word-class linear layer whose input is the
    exported activation.
    """

    FEATURE_DIM = 512

    def __init__(self, num_classes: int) -> None:
        super().__init__()
        if num_classes < 1:
            raise ExportModelError("num_classes must be >= 1")
        self.features = nn.Sequential(
            nn.Conv2d(1, 32, kernel_size=7, stride=4, padding=3),
            nn.BatchNorm2d(32),
            nn.ReLU(inplace=True),
            nn.Conv2d(32, 64, kernel_size=3, stride=2, padding=1),
            nn.BatchNorm2d(64),
            nn.ReLU(inplace=True),
            nn.Conv2d(64, 128, kernel_size=3, stride=2, padding=1),
            nn.BatchNorm2d(128),
            nn.ReLU(inplace=True),
            nn.Conv2d(128, 128, kernel_size=3, stride=1, padding=1),
            nn.BatchNorm2d(128),
            nn.ReLU(inplace=True),
            nn.AdaptiveAvgPool2d((1, 4)),
            nn.Flatten(),
        )
        self.head = nn.Linear(self.FEATURE_DIM, num_classes)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.head(self.features(x))


def _get_module(model: nn.Module, dotted: str) -> nn.Module:
    mod: nn.Module = model
    for part in dotted.split("."):
        children = dict(mod.named_children())
        if part not in children:
            raise ExportModelError(f"module path {dotted!r} not found at {part!r}")
        mod = children[part]
    return mod


def build_model(name: str, num_classes: int, pretrained: bool = False) -> nn.Module:
    """Build a registry model; torchvision families need torchvision installed."""
    reg = model_registry()
    if name not in reg:
        raise ExportModelError(
            f"unknown model {name!r}; registry has {sorted(reg)}"
        )
    entry = reg[name]
    if entry["builder"] == "smallcnn":
        return SmallCNN(num_classes=num_classes)
    try:
        from torchvision import models as tvm
    except ImportError as exc:  # pragma: no cover
        raise ExportModelError("torchvision required for pretrained families") from exc
    weights = "DEFAULT" if pretrained else None
    model = tvm.get_model(entry["builder"], weights=weights)
    head = _get_module(model, entry["head"])
    if not isinstance(head, nn.Linear):
        raise ExportModelError(f"registry head {entry['head']!r} is not a linear layer")
    if head.out_features != num_classes:
        replace_head(model, entry["head"], num_classes)
    return model


def replace_head(model: nn.Module, dotted: str, num_classes: int) -> None:
    """Swap the final linear layer for a fresh one with num_classes outputs."""
    *parents, leaf = dotted.split(".")
    parent: nn.Module = model
    for part in parents:
        parent = _get_module(parent, part)
    old = _get_module(parent, leaf)
    if not isinstance(old, nn.Linear):
        raise ExportModelError(f"{dotted!r} is not a linear layer")
    setattr(parent, leaf, nn.Linear(old.in_features, num_classes))


class PenultimateExtractor:
    """Capture the input of a model's classification head during forward."""

    def __init__(self, model: nn.Module, model_name: str) -> None:
        reg = model_registry()
        if model_name not in reg:
            raise ExportModelError(f"unknown model {model_name!r}")
        self.model = model
        self._captured: torch.Tensor | None = None
        head = _get_module(model, reg[model_name]["head"])
        self._handle = head.register_forward_hook(self._hook)

    def _hook(self, module, inputs, output) -> None:
        self._captured = inputs[0].detach()

    def __call__(self, batch: torch.Tensor) -> torch.Tensor:
        self._captured = None
        with torch.no_grad():
            self.model(batch)
        if self._captured is None:
            raise ExportModelError("head module was never reached during forward")
        return self._captured

    def close(self) -> None:
        self._handle.remove()
