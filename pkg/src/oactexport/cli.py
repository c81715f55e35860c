"""CLI for exporting activations and running desk-scale fine-tunes."""

from __future__ import annotations

import sys
from pathlib import Path

import click
import torch

from .export import ExportError, ExportJob, export_activations
from .finetune import FinetuneConfig, finetune
from .models import ExportModelError, model_registry


def _fail(exc: Exception, code: int) -> None:
    click.echo(f"error: {exc}", err=True)
    sys.exit(code)


@click.group()
def main() -> None:
    """Penultimate-layer activation export tools."""


@main.command("export")
@click.option("--model", "model_name", default="smallcnn", show_default=True,
              help="Registry model name.")
@click.option("--images", required=True, type=click.Path(),
              help="Prime-image directory or a training manifest.json.")
@click.option("--out", required=True, type=click.Path(), help="OACT1 output path.")
@click.option("--weights", type=click.Path(), default=None,
              help="State-dict file from a fine-tune run.")
@click.option("--pretrained/--no-pretrained", default=False, show_default=True)
@click.option("--batch-size", type=int, default=32, show_default=True)
def export_cmd(model_name: str, images: str, out: str, weights: str | None,
               pretrained: bool, batch_size: int) -> None:
    """Write one activation record per stimulus image."""
    job = ExportJob(
        model_name=model_name,
        manifest=images,
        out_path=out,
        weights_mode="pretrained-only" if pretrained else "finetuned",
        weights_path=weights,
        batch_size=batch_size,
    )
    try:
        n = export_activations(job)
    except (ExportError, ExportModelError, ValueError) as exc:
        _fail(exc, 2)
    except OSError as exc:
        _fail(exc, 1)
    click.echo(f"wrote {n} activation records to {out}")


@main.command("finetune")
@click.option("--model", "model_name", default="smallcnn", show_default=True)
@click.option("--manifest", required=True, type=click.Path(),
              help="Training manifest.json from the renderer.")
@click.option("--out", required=True, type=click.Path(), help="State-dict output path.")
@click.option("--lr", type=float, default=None,
              help="Learning rate (default: registry per-model value).")
@click.option("--threshold", type=float, default=0.0025, show_default=True,
              help="Stop when epoch loss improves by less than this.")
@click.option("--max-epochs", type=int, default=50, show_default=True)
@click.option("--batch-size", type=int, default=32, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--freeze-backbone", is_flag=True, default=False)
@click.option("--pretrained/--no-pretrained", default=False, show_default=True)
def finetune_cmd(model_name: str, manifest: str, out: str, lr: float | None,
                 threshold: float, max_epochs: int, batch_size: int, seed: int,
                 freeze_backbone: bool, pretrained: bool) -> None:
    """Train a word classifier and save its weights."""
    if lr is None:
        try:
            lr = float(model_registry()[model_name]["default_lr"])
        except KeyError:
            _fail(ExportModelError(f"unknown model {model_name!r}"), 2)
    config = FinetuneConfig(
        model_name=model_name, lr=lr, loss_threshold=threshold,
        max_epochs=max_epochs, batch_size=batch_size, seed=seed,
        freeze_backbone=freeze_backbone, pretrained=pretrained,
    )
    try:
        result = finetune(manifest, config)
        torch.save(result.model.state_dict(), Path(out))
    except (ExportError, ExportModelError, ValueError) as exc:
        _fail(exc, 2)
    except OSError as exc:
        _fail(exc, 1)
    click.echo(
        f"trained {model_name} on {len(result.classes)} classes for "
        f"{result.epochs_run} epochs; val accuracy {result.val_accuracy:.3f}; "
        f"weights -> {out}"
    )


if __name__ == "__main__":
    main()
