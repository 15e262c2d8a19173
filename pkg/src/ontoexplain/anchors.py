"""Anchor learning: grow a phrase rightward from a seed word, keep the best.

For every sentence containing a seed occurrence, the candidates are the
cumulative prefixes seed, seed + w1, seed + w1 + w2, ... out to the
sentence end.  Each candidate is scored with the surrogate-backed
importance score and the sentence keeps its single best candidate.
Ties break toward the earliest occurrence, then the shortest phrase.

Anchors capture constructs the ontology misses, negation above all:
"not sending information" matters even though "not" is no concept term.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .blackbox import TextModel
from .errors import FormatError
from .surrogate import SurrogateModel, importance_score
from .textproc import TokenizedDoc, UnitSpan, make_span
from .validation import check_phrases

DEFAULT_SEEDS = ("not", "no", "illegal", "against", "without")


@dataclass(frozen=True)
class Anchor:
    sent_idx: int
    span: UnitSpan
    score: float

    def text_in(self, doc: TokenizedDoc) -> str:
        start = doc.tokens[self.span.start].char_span[0]
        end = doc.tokens[self.span.stop - 1].char_span[1]
        return doc.text[start:end]


def load_seeds(path: str | Path | None = None) -> list[str]:
    """Seed phrases, one per line, `#` comments; default packaged set."""
    if path is None:
        text = (resources.files("ontoexplain.data") / "anchor_seeds.txt").read_text("utf-8")
        src = "<packaged anchor_seeds.txt>"
    else:
        text = Path(path).read_text("utf-8")
        src = str(path)
    phrases = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if line:
            phrases.append(line)
    if not phrases:
        raise FormatError("seed file declares no phrases", path=src)
    return check_phrases("seeds", phrases)


def _occurrences(doc: TokenizedDoc, sentence_ids: list[int], seed_tokens: list[str]) -> list[int]:
    hits = []
    k = len(seed_tokens)
    for offset in range(len(sentence_ids) - k + 1):
        if all(doc.tokens[sentence_ids[offset + j]].norm == seed_tokens[j]
               for j in range(k)):
            hits.append(sentence_ids[offset])
    return hits


def learn_anchors(doc: TokenizedDoc, seeds, model: TextModel,
                  g: SurrogateModel) -> list[Anchor]:
    """At most one anchor per sentence; sentences without seeds yield none.

    When a sentence holds several seed occurrences, every occurrence's
    prefix chain competes and the sentence-wide argmax wins.
    """
    seeds = check_phrases("seeds", seeds)
    seed_token_lists = [s.split() for s in seeds]
    original = model.predict_one(doc.text).scores[g.target_class]

    anchors: list[Anchor] = []
    for s in range(doc.sentence_count):
        ids = doc.sentence_token_ids(s)
        if not ids:
            continue
        # start position -> shortest seed matching there; chains from a
        # longer seed at the same spot are a suffix of the shorter one's
        starts: dict[int, int] = {}
        for toks in seed_token_lists:
            for p in _occurrences(doc, ids, toks):
                starts[p] = min(starts.get(p, len(ids)), len(toks))
        best: tuple[float, UnitSpan] | None = None
        for p in sorted(starts):
            for stop in range(p + starts[p], ids[-1] + 2):
                span = make_span(doc, p, stop)
                score = importance_score(doc, span, model, g,
                                         original_score=original)
                if best is None or score > best[0]:
                    best = (score, span)
        if best is not None:
            anchors.append(Anchor(sent_idx=s, span=best[1], score=best[0]))
    return anchors
