"""Activation exporter: runs vision models over rendered stimulus images and
writes penultimate-layer activations in the OACT1 binary format, plus a
desk-scale fine-tuning loop for the bundled small CNN."""

from .models import SmallCNN, build_model, model_registry, PenultimateExtractor
from .export import ExportJob, export_activations, collect_prime_stimuli, collect_manifest_stimuli
from .finetune import FinetuneConfig, FinetuneResult, finetune

__all__ = [
    "SmallCNN",
    "build_model",
    "model_registry",
    "PenultimateExtractor",
    "ExportJob",
    "export_activations",
    "collect_prime_stimuli",
    "collect_manifest_stimuli",
    "FinetuneConfig",
    "FinetuneResult",
    "finetune",
]
