"""Deterministic tokenization, sentence segmentation, and positional distance.

Everything here is rule based on purpose: the same text and stopword set
always produce byte-identical results, which the sampling, anchor search,
and evaluation layers rely on.

Positions come in two flavors per sentence:

* ``word_idx`` counts every token;
* ``content_idx`` counts only non-stopword tokens and is what the
  in-sentence distance uses.

The distance between two spans is the absolute difference of the
content positions of their first non-stopword tokens, and is infinite
across sentence boundaries.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import FormatError

INFINITE = math.inf

# Word-character runs, allowing internal apostrophes and hyphens so that
# "don't" and "drug-abuse" stay single tokens.  Underscore is excluded.
_TOKEN_RE = re.compile(r"[^\W_]+(?:['’\-][^\W_]+)*", re.UNICODE)

# A sentence ends at `.`, `!`, or `?` runs followed by whitespace or EOT.
_SENT_END_RE = re.compile(r"[.!?]+(?=\s|$)")

_WS_RUN_RE = re.compile(r"\s+")


@dataclass(frozen=True)
class Token:
    surface: str
    norm: str
    sent_idx: int
    word_idx: int
    content_idx: int | None
    char_span: tuple[int, int]

    @property
    def is_stopword(self) -> bool:
        return self.content_idx is None


@dataclass(frozen=True)
class TokenizedDoc:
    text: str
    tokens: tuple[Token, ...]
    sentence_count: int

    def sentence_token_ids(self, sent_idx: int) -> list[int]:
        return [i for i, t in enumerate(self.tokens) if t.sent_idx == sent_idx]

    def norms(self) -> list[str]:
        return [t.norm for t in self.tokens]

    def to_json(self) -> str:
        """Canonical serialization; byte-identical for identical inputs."""
        payload = {
            "text": self.text,
            "sentence_count": self.sentence_count,
            "tokens": [
                {
                    "surface": t.surface,
                    "norm": t.norm,
                    "sent_idx": t.sent_idx,
                    "word_idx": t.word_idx,
                    "content_idx": t.content_idx,
                    "char_span": list(t.char_span),
                }
                for t in self.tokens
            ],
        }
        return json.dumps(payload, sort_keys=True, ensure_ascii=False)


@dataclass(frozen=True)
class UnitSpan:
    """A contiguous, nonempty token range inside one sentence.

    ``start``/``stop`` are doc-relative token indices, half open.
    """

    start: int
    stop: int
    sent_idx: int
    phrase: str

    def token_ids(self) -> range:
        return range(self.start, self.stop)

    def __len__(self) -> int:
        return self.stop - self.start


def make_span(doc: TokenizedDoc, start: int, stop: int) -> UnitSpan:
    """Build a UnitSpan over ``doc.tokens[start:stop]``, validating bounds."""
    if not 0 <= start < stop <= len(doc.tokens):
        raise ValueError(f"empty or out-of-range span [{start}, {stop})")
    sents = {doc.tokens[i].sent_idx for i in range(start, stop)}
    if len(sents) != 1:
        raise ValueError(f"span [{start}, {stop}) crosses a sentence boundary")
    phrase = " ".join(doc.tokens[i].norm for i in range(start, stop))
    return UnitSpan(start=start, stop=stop, sent_idx=sents.pop(), phrase=phrase)


def load_stopwords(path: str | Path | None = None) -> frozenset[str]:
    """Read a stopword list: one lowercase token per line, `#` comments.

    With no path, the packaged English list is used.  That list is part
    of the reproducibility contract: in-sentence distances change with it.
    """
    if path is None:
        text = (resources.files("ontoexplain.data") / "stopwords_en.txt").read_text("utf-8")
        src = "<packaged stopwords_en.txt>"
    else:
        text = Path(path).read_text("utf-8")
        src = str(path)
    words = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if " " in line or line != line.lower():
            raise FormatError("stopword entries must be single lowercase tokens",
                              path=src, line=lineno)
        words.add(line)
    return frozenset(words)


def word_norms(text: str) -> list[str]:
    """Normalized word tokens, ignoring sentence structure.

    Cheap path for bag-of-words consumers (feature vectors, kernels).
    """
    return [m.group(0).lower() for m in _TOKEN_RE.finditer(text)]


def _sentence_ranges(text: str) -> list[tuple[int, int]]:
    ranges = []
    prev = 0
    for m in _SENT_END_RE.finditer(text):
        ranges.append((prev, m.end()))
        prev = m.end()
    if text[prev:].strip():
        ranges.append((prev, len(text)))
    return ranges


def tokenize(text: str, stopwords: frozenset[str] | set[str] = frozenset()) -> TokenizedDoc:
    """Segment into sentences and tokens; empty text yields an empty doc.

    Sentences split on terminal punctuation followed by whitespace or end
    of text.  Segments with no word tokens (stray punctuation) do not
    count as sentences.
    """
    tokens: list[Token] = []
    sent_idx = 0
    for seg_start, seg_end in _sentence_ranges(text):
        matches = list(_TOKEN_RE.finditer(text, seg_start, seg_end))
        if not matches:
            continue
        content_counter = 0
        for word_idx, m in enumerate(matches):
            norm = m.group(0).lower()
            if norm in stopwords:
                content_idx = None
            else:
                content_idx = content_counter
                content_counter += 1
            tokens.append(Token(
                surface=m.group(0),
                norm=norm,
                sent_idx=sent_idx,
                word_idx=word_idx,
                content_idx=content_idx,
                char_span=(m.start(), m.end()),
            ))
        sent_idx += 1
    return TokenizedDoc(text=text, tokens=tuple(tokens), sentence_count=sent_idx)


def lambda_distance(doc: TokenizedDoc, a: UnitSpan, b: UnitSpan) -> float:
    """In-sentence positional distance between two spans.

    Infinite when the spans sit in different sentences; otherwise the
    absolute difference of the content positions of each span's first
    non-stopword token.  All-stopword spans cannot anchor a distance.
    """
    if a.sent_idx != b.sent_idx:
        return INFINITE
    pos = []
    for span in (a, b):
        anchor = next(
            (doc.tokens[i].content_idx for i in span.token_ids()
             if doc.tokens[i].content_idx is not None),
            None,
        )
        if anchor is None:
            raise ValueError(f"span {span.phrase!r} contains only stopwords")
        pos.append(anchor)
    return abs(pos[0] - pos[1])


def match_terms(doc: TokenizedDoc, ontology) -> list[tuple[UnitSpan, str]]:
    """Find ontology lexicon phrases in the doc, longest match first.

    The scan is greedy left to right within each sentence over normalized
    token sequences and is concept agnostic: at each position the longest
    phrase known to any concept wins, and the matched span is paired with
    every concept whose lexicon contains it.  Matched spans never overlap.
    """
    out: list[tuple[UnitSpan, str]] = []
    max_len = ontology.max_term_tokens
    if max_len == 0:
        return out
    for s in range(doc.sentence_count):
        ids = doc.sentence_token_ids(s)
        i = 0
        while i < len(ids):
            hit_len = 0
            hit_concepts: tuple[str, ...] = ()
            for length in range(min(max_len, len(ids) - i), 0, -1):
                phrase = " ".join(doc.tokens[ids[i + k]].norm for k in range(length))
                concepts = ontology.concepts_of_term(phrase)
                if concepts:
                    hit_len = length
                    hit_concepts = tuple(sorted(concepts))
                    break
            if hit_len:
                span = make_span(doc, ids[i], ids[i] + hit_len)
                out.extend((span, cid) for cid in hit_concepts)
                i += hit_len
            else:
                i += 1
    return out


def delete_tokens(doc: TokenizedDoc, token_ids) -> str:
    """Text with the given tokens' character spans removed.

    Whitespace runs created by the removal collapse to single spaces.
    Deleting nothing returns the original text unchanged.
    """
    drop = sorted(set(token_ids))
    if not drop:
        return doc.text
    if drop[0] < 0 or drop[-1] >= len(doc.tokens):
        raise IndexError(f"token id out of range: {drop[-1] if drop[-1] >= len(doc.tokens) else drop[0]}")
    pieces = []
    cursor = 0
    for i in drop:
        start, end = doc.tokens[i].char_span
        pieces.append(doc.text[cursor:start])
        cursor = end
    pieces.append(doc.text[cursor:])
    return _WS_RUN_RE.sub(" ", "".join(pieces)).strip()
