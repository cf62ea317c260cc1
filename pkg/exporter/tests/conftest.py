import string

import pytest
import torch
from transformers import BertConfig, BertForMaskedLM, BertTokenizer

from activepool import write_sentences

VERBALIZER_TOKENS = ["pa", "me", "sense", "amb", "gabe", "barne"]


def build_tiny_model(target_dir):
    """Small randomly initialized masked-LM checkpoint with a vocabulary that
    covers the verbalizer tokens and tokenizes any ascii word into pieces."""
    specials = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]
    letters = list(string.ascii_lowercase) + list(string.digits)
    vocab = (
        specials
        + VERBALIZER_TOKENS
        + letters
        + [f"##{c}" for c in letters]
        + [".", ",", "?"]
    )
    vocab_file = target_dir / "vocab.txt"
    vocab_file.write_text("\n".join(vocab) + "\n", encoding="utf-8")
    tokenizer = BertTokenizer(vocab=str(vocab_file), do_lower_case=True)
    tokenizer.save_pretrained(target_dir)

    config = BertConfig(
        vocab_size=len(vocab),
        hidden_size=32,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=64,
        max_position_embeddings=512,
    )
    torch.manual_seed(1234)
    model = BertForMaskedLM(config)
    model.save_pretrained(target_dir)
    return target_dir


@pytest.fixture(scope="session")
def tiny_model_dir(tmp_path_factory):
    return str(build_tiny_model(tmp_path_factory.mktemp("tinybert")))


@pytest.fixture
def sentences_file(tmp_path):
    path = tmp_path / "sentences.jsonl"
    write_sentences(
        path,
        [
            {"id": "a", "text": "the river rises early", "language": "synthetic"},
            {"id": "b", "text": "me citim dhe burim", "language": "sq"},
            {"id": "c", "text": "the river rises early", "language": "synthetic"},
            {"id": "d", "text": "erreferentzia gabe idatzi", "language": "eu"},
        ],
    )
    return path


@pytest.fixture
def trilingual_50(tmp_path):
    """50-sentence fixture cycling through the three target languages."""
    langs = ["ca", "eu", "sq"]
    words = ["cita", "frase", "erreferentzia", "esaldi", "fjali", "burim", "dades"]
    records = []
    for i in range(50):
        text = f"{words[i % len(words)]} {words[(i * 3 + 1) % len(words)]} numero {i}"
        records.append({"id": f"t{i}", "text": text, "language": langs[i % 3]})
    path = tmp_path / "trilingual.jsonl"
    write_sentences(path, records)
    return path
