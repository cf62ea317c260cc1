"""Produce the three matrix inputs the selection engine consumes.

All three exports run a pretrained masked language model in inference mode
(no fine-tuning, CPU is fine) and write the engine's binary matrix format:
kind 1 sentence embeddings, kind 2 per-token surprisal rows, kind 3 cloze
verbalizer-token probabilities.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
import torch
from transformers import AutoModelForMaskedLM, AutoTokenizer

from activepool import (
    KIND_EMBEDDING,
    KIND_PROBABILITY,
    KIND_SURPRISAL,
    MASK_TOKEN,
    Pattern,
    Verbalizer,
    build_cloze,
    read_sentences,
    write_matrix,
)

DEFAULT_MODEL = "bert-base-multilingual-cased"


class ExportError(RuntimeError):
    pass


@dataclass
class ExportJob:
    input_path: str
    output_path: str
    mode: str  # embed | surprisal | pet-probs
    model_name: str = DEFAULT_MODEL
    max_length: int = 256
    surprisal_length: int = 128
    batch_size: int = 16

    def __post_init__(self) -> None:
        if self.mode not in ("embed", "surprisal", "pet-probs"):
            raise ValueError(f"unknown export mode {self.mode!r}")
        if self.max_length < 2 or self.surprisal_length < 1:
            raise ValueError("max_length and surprisal_length must be positive")


def load_model(model_name: str):
    """Tokenizer and masked-LM model in eval mode."""
    try:
        tokenizer = AutoTokenizer.from_pretrained(model_name)
        model = AutoModelForMaskedLM.from_pretrained(model_name)
    except Exception as exc:
        raise ExportError(f"could not load model {model_name!r}: {exc}") from exc
    model.eval()
    return tokenizer, model


def _read_texts(path: str) -> list[str]:
    records = read_sentences(path)
    if not records:
        raise ExportError(f"{path}: no sentences to export")
    texts = [str(r.get("text", "")) for r in records]
    if any(not t for t in texts):
        raise ExportError(f"{path}: every record needs a non-empty text field")
    return texts


def _warn_truncation(tokenizer, texts, max_length) -> None:
    for i, text in enumerate(texts):
        if len(tokenizer(text)["input_ids"]) > max_length:
            warnings.warn(f"sentence {i} exceeds {max_length} tokens, truncating")
            break


@torch.no_grad()
def _hidden_states(model, encoded) -> torch.Tensor:
    out = model(**encoded, output_hidden_states=True)
    return out.hidden_states[-1]


@torch.no_grad()
def export_embeddings(job: ExportJob, model_pair=None) -> np.ndarray:
    """Mean-pooled final-layer hidden states, one row per input sentence."""
    tokenizer, model = model_pair or load_model(job.model_name)
    texts = _read_texts(job.input_path)
    _warn_truncation(tokenizer, texts, job.max_length)
    rows = []
    for start in range(0, len(texts), job.batch_size):
        batch = texts[start : start + job.batch_size]
        encoded = tokenizer(
            batch,
            padding=True,
            truncation=True,
            max_length=job.max_length,
            return_tensors="pt",
        )
        hidden = _hidden_states(model, encoded)
        mask = encoded["attention_mask"].unsqueeze(-1).to(hidden.dtype)
        pooled = (hidden * mask).sum(dim=1) / mask.sum(dim=1)
        rows.append(pooled.numpy())
    matrix = np.vstack(rows).astype("<f4")
    write_matrix(job.output_path, KIND_EMBEDDING, matrix)
    return matrix


@torch.no_grad()
def export_surprisal(job: ExportJob, model_pair=None) -> np.ndarray:
    """Per-token masked-LM loss rows, padded/truncated to a fixed length.

    The loss of each token is evaluated with the full sentence as context
    (no mask substitution). Rows are l2-normalized; an all-zero row stays
    zero.
    """
    tokenizer, model = model_pair or load_model(job.model_name)
    texts = _read_texts(job.input_path)
    _warn_truncation(tokenizer, texts, job.max_length)
    special_ids = set(tokenizer.all_special_ids)
    s = job.surprisal_length
    matrix = np.zeros((len(texts), s), dtype=np.float64)
    for i, text in enumerate(texts):
        encoded = tokenizer(
            text, truncation=True, max_length=job.max_length, return_tensors="pt"
        )
        logits = model(**encoded).logits[0]
        log_probs = torch.log_softmax(logits, dim=-1)
        ids = encoded["input_ids"][0]
        losses = [
            float(-log_probs[pos, tok])
            for pos, tok in enumerate(ids.tolist())
            if tok not in special_ids
        ]
        row = np.asarray(losses[:s])
        norm = np.linalg.norm(row)
        if norm > 0:
            row = row / norm
        matrix[i, : len(row)] = row
    matrix = matrix.astype("<f4")
    write_matrix(job.output_path, KIND_SURPRISAL, matrix)
    return matrix


def _verbalizer_token_id(tokenizer, token: str) -> int:
    ids = tokenizer.convert_tokens_to_ids([token])
    if ids[0] is None or ids[0] == tokenizer.unk_token_id:
        raise ExportError(f"verbalizer token {token!r} is not in the model vocabulary")
    return int(ids[0])


@torch.no_grad()
def export_pet_probs(
    job: ExportJob,
    pattern: Pattern,
    verbalizer: Verbalizer,
    model_pair=None,
) -> np.ndarray:
    """Normalized mask-slot probabilities of the two verbalizer tokens.

    Column order is (label 0 token, label 1 token). Each cloze maps the
    engine's literal "[mask]" marker to the model's own mask token.
    """
    tokenizer, model = model_pair or load_model(job.model_name)
    texts = _read_texts(job.input_path)
    token_ids = [_verbalizer_token_id(tokenizer, t) for t in verbalizer.tokens]
    matrix = np.zeros((len(texts), 2), dtype=np.float64)
    for i, text in enumerate(texts):
        cloze = build_cloze(pattern, text).replace(MASK_TOKEN, tokenizer.mask_token)
        encoded = tokenizer(
            cloze, truncation=True, max_length=job.max_length, return_tensors="pt"
        )
        ids = encoded["input_ids"][0]
        mask_pos = (ids == tokenizer.mask_token_id).nonzero(as_tuple=True)[0]
        if len(mask_pos) != 1:
            raise ExportError(
                f"sentence {i}: cloze must contain exactly one mask token "
                f"(found {len(mask_pos)}; it may have been truncated away)"
            )
        logits = model(**encoded).logits[0, int(mask_pos[0])]
        probs = torch.softmax(logits, dim=-1)
        pair = np.array([float(probs[tid]) for tid in token_ids])
        matrix[i] = pair / pair.sum()
    matrix = matrix.astype("<f4")
    write_matrix(job.output_path, KIND_PROBABILITY, matrix)
    return matrix
