"""Input validation helpers used by the estimator-style entry points."""

from __future__ import annotations

from collections.abc import Iterable, Sequence

from .errors import DegenerateInputError


def check_text(text) -> str:
    if not isinstance(text, str):
        raise TypeError(f"expected a string, got {type(text).__name__}")
    return text


def check_corpus(texts: Sequence[str], labels: Sequence[str],
                 min_per_class: int = 1) -> tuple[list[str], list[str]]:
    """Validate a labeled text corpus and return it as parallel lists."""
    texts = list(texts)
    labels = [str(label) for label in labels]
    if len(texts) != len(labels):
        raise ValueError(
            f"texts and labels differ in length ({len(texts)} vs {len(labels)})")
    if not texts:
        raise DegenerateInputError("corpus is empty")
    for i, t in enumerate(texts):
        check_text(t)
        if not t.strip():
            raise ValueError(f"corpus record {i} has an empty text")
    counts: dict[str, int] = {}
    for label in labels:
        counts[label] = counts.get(label, 0) + 1
    if len(counts) < 2:
        raise DegenerateInputError(
            f"corpus has a single class {sorted(counts)}; need at least 2")
    thin = sorted(c for c, n in counts.items() if n < min_per_class)
    if thin:
        raise DegenerateInputError(
            f"classes {thin} have fewer than {min_per_class} examples")
    return texts, labels


def check_positive(name: str, value, *, strict: bool = True) -> float:
    v = float(value)
    if strict and not v > 0:
        raise ValueError(f"{name} must be > 0, got {value!r}")
    if not strict and v < 0:
        raise ValueError(f"{name} must be >= 0, got {value!r}")
    return v


def check_unit_interval(name: str, value, *, open_ends: bool = True) -> float:
    v = float(value)
    if open_ends and not 0.0 < v < 1.0:
        raise ValueError(f"{name} must lie in (0, 1), got {value!r}")
    if not open_ends and not 0.0 <= v <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value!r}")
    return v


def check_phrases(name: str, phrases: Iterable[str]) -> list[str]:
    """Normalize a phrase list: lowercase, stripped, no empties."""
    out = []
    for p in phrases:
        p = check_text(p).strip().lower()
        if not p:
            raise ValueError(f"{name} contains an empty phrase")
        out.append(p)
    if not out:
        raise ValueError(f"{name} is empty")
    return out
