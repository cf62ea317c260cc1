"""Pattern-Verbalizer Pair mechanics: cloze construction and label scoring.

Classification is reformulated as fill-in-the-blank: a pattern turns the
input sentence into a cloze with one mask slot, and a verbalizer maps each
label to a single vocabulary token. A pluggable provider supplies token
scores for the cloze; this module stays model-agnostic and uses the literal
"[mask]" token (downstream exporters map it to their model's mask token).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from typing import Callable, Sequence

MASK_TOKEN = "[mask]"

PVP_LANGUAGES = ("ca", "eu", "sq")

# provider: (cloze text, candidate tokens) -> non-negative score per token
TokenProbProvider = Callable[[str, Sequence[str]], Sequence[float]]


@dataclass(frozen=True)
class Pattern:
    language: str
    pattern_id: int
    template: str

    def __post_init__(self) -> None:
        if self.language not in PVP_LANGUAGES:
            raise ValueError(f"unknown pattern language {self.language!r}")
        if not 1 <= self.pattern_id <= 5:
            raise ValueError(f"pattern_id must be 1-5, got {self.pattern_id}")
        if self.template.count("{text_a}") != 1:
            raise ValueError("template must contain exactly one {text_a} placeholder")
        if self.template.count("{mask}") != 1:
            raise ValueError("template must contain exactly one {mask} placeholder")


@dataclass(frozen=True)
class Verbalizer:
    language: str
    tokens: tuple[str, str]  # (label 0 token, label 1 token)

    def __post_init__(self) -> None:
        if self.tokens[0] == self.tokens[1]:
            raise ValueError("verbalizer tokens must be distinct")


def _catalog() -> dict:
    with resources.files("activepool").joinpath("data/patterns.json").open(
        "r", encoding="utf-8"
    ) as fh:
        return json.load(fh)


def load_pattern(language: str, pattern_id: int) -> Pattern:
    catalog = _catalog()
    try:
        template = catalog["patterns"][language][str(pattern_id)]
    except KeyError as exc:
        raise KeyError(f"no pattern ({language!r}, {pattern_id})") from exc
    return Pattern(language=language, pattern_id=pattern_id, template=template)


def load_verbalizer(language: str) -> Verbalizer:
    catalog = _catalog()
    try:
        mapping = catalog["verbalizers"][language]
    except KeyError as exc:
        raise KeyError(f"no verbalizer for language {language!r}") from exc
    return Verbalizer(language=language, tokens=(mapping["0"], mapping["1"]))


def all_patterns() -> list[Pattern]:
    catalog = _catalog()
    return [
        Pattern(language=lang, pattern_id=int(pid), template=template)
        for lang, patterns in sorted(catalog["patterns"].items())
        for pid, template in sorted(patterns.items(), key=lambda kv: int(kv[0]))
    ]


def build_cloze(pattern: Pattern, text: str) -> str:
    """Realize the pattern for one sentence, inserting the literal mask token."""
    if not text:
        raise ValueError("input text must be non-empty")
    return pattern.template.replace("{text_a}", text).replace("{mask}", MASK_TOKEN)


def score_labels(
    pattern: Pattern,
    verbalizer: Verbalizer,
    text: str,
    provider: TokenProbProvider,
) -> tuple[float, float]:
    """Distribution over {0, 1} from the provider's verbalizer-token scores."""
    cloze = build_cloze(pattern, text)
    scores = list(provider(cloze, list(verbalizer.tokens)))
    if len(scores) != 2:
        raise ValueError("provider must return one score per verbalizer token")
    s0, s1 = float(scores[0]), float(scores[1])
    for s in (s0, s1):
        if not math.isfinite(s) or s < 0.0:
            raise ValueError(f"provider score must be finite and >= 0, got {s}")
    total = s0 + s1
    if total == 0.0:
        return (0.5, 0.5)
    return (s0 / total, s1 / total)


def predict_label(
    pattern: Pattern,
    verbalizer: Verbalizer,
    text: str,
    provider: TokenProbProvider,
) -> int:
    """Argmax of score_labels; an exact tie resolves to label 0."""
    p0, p1 = score_labels(pattern, verbalizer, text, provider)
    return 1 if p1 > p0 else 0
