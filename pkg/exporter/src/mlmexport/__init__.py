"""Masked-LM feature exporter for the activepool selection engine."""

from .export import (
    ExportError,
    ExportJob,
    export_embeddings,
    export_pet_probs,
    export_surprisal,
    load_model,
)

__version__ = "0.1.0"
