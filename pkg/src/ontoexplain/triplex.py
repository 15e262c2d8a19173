"""(subject, predicate, object) triplexes with confidence scores.

The expected source is an external open information extraction run whose
output is ingested from a JSON-lines file; only records above the
confidence threshold survive.  A naive built-in extractor exists so the
end-to-end demo works with nothing external, and its fixed confidence
of 0.5 keeps it below the default threshold on purpose: using it is an
explicit choice.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path

from .errors import FormatError
from .textproc import TokenizedDoc, UnitSpan, make_span, word_norms
from .validation import check_unit_interval

log = logging.getLogger(__name__)

DEFAULT_MIN_CONFIDENCE = 0.7


@dataclass(frozen=True)
class Triplex:
    subject: str
    predicate: str
    obj: str
    confidence: float
    doc_id: str = ""
    spans: tuple[UnitSpan, UnitSpan, UnitSpan] | None = None

    def __post_init__(self):
        check_unit_interval("confidence", self.confidence, open_ends=False)

    def arguments(self) -> tuple[str, str, str]:
        return (self.subject, self.predicate, self.obj)

    @property
    def sent_idx(self) -> int | None:
        return self.spans[0].sent_idx if self.spans else None


def load_triplexes(path: str | Path,
                   min_confidence: float = DEFAULT_MIN_CONFIDENCE) -> dict[str, list[Triplex]]:
    """Read a triplex JSONL file, keeping confidence strictly above the bar.

    One object per line: {"doc_id":, "subject":, "predicate":, "object":,
    "confidence":}.  A record at exactly the threshold is dropped.
    """
    out: dict[str, list[Triplex]] = {}
    src = str(path)
    for lineno, raw in enumerate(Path(path).read_text("utf-8").splitlines(), start=1):
        if not raw.strip():
            continue
        try:
            rec = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise FormatError(f"invalid JSON: {exc.msg}", path=src, line=lineno) from exc
        if not isinstance(rec, dict):
            raise FormatError("each line must hold a JSON object", path=src, line=lineno)
        missing = {"doc_id", "subject", "predicate", "object", "confidence"} - set(rec)
        if missing:
            raise FormatError(f"missing keys: {sorted(missing)}", path=src, line=lineno)
        try:
            t = Triplex(subject=str(rec["subject"]), predicate=str(rec["predicate"]),
                        obj=str(rec["object"]), confidence=float(rec["confidence"]),
                        doc_id=str(rec["doc_id"]))
        except (TypeError, ValueError) as exc:
            raise FormatError(str(exc), path=src, line=lineno) from exc
        if t.confidence > min_confidence:
            out.setdefault(t.doc_id, []).append(t)
    return out


def _find_in_sentence(doc: TokenizedDoc, ids: list[int], norm_seq: list[str]) -> UnitSpan | None:
    k = len(norm_seq)
    if k == 0:
        return None
    for offset in range(len(ids) - k + 1):
        if all(doc.tokens[ids[offset + j]].norm == norm_seq[j] for j in range(k)):
            return make_span(doc, ids[offset], ids[offset] + k)
    return None


def align_triplex(doc: TokenizedDoc, t: Triplex) -> Triplex | None:
    """Locate all three arguments inside one sentence of the doc.

    Each argument matches at its first occurrence, per sentence, as a
    run of consecutive normalized tokens; the first sentence where all
    three land wins.  Unalignable triplexes return None and are logged.
    """
    arg_norms = [word_norms(a) for a in t.arguments()]
    for s in range(doc.sentence_count):
        ids = doc.sentence_token_ids(s)
        spans = [_find_in_sentence(doc, ids, norms) for norms in arg_norms]
        if all(sp is not None for sp in spans):
            return replace(t, spans=(spans[0], spans[1], spans[2]))
    log.warning("triplex %r does not align with any single sentence; dropped",
                t.arguments())
    return None


def load_verbs(path: str | Path | None = None) -> frozenset[str]:
    """Verb lexicon for the built-in extractor; same format as stopwords."""
    if path is None:
        text = (resources.files("ontoexplain.data") / "verbs_en.txt").read_text("utf-8")
        src = "<packaged verbs_en.txt>"
    else:
        text = Path(path).read_text("utf-8")
        src = str(path)
    words = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if " " in line or line != line.lower():
            raise FormatError("verb entries must be single lowercase tokens",
                              path=src, line=lineno)
        words.add(line)
    return frozenset(words)


def extract_builtin(doc: TokenizedDoc, verbs: frozenset[str] | None = None,
                    doc_id: str = "") -> list[Triplex]:
    """Heuristic extraction: <chunk before> <verb run> <chunk after>.

    Within each sentence, the first verb-lexicon token that has at least
    one non-stopword before it and anything after it splits the sentence
    into subject / predicate / object, all verbatim substrings.  At most
    one triplex per sentence, always at confidence 0.5.
    """
    if verbs is None:
        verbs = load_verbs()
    out = []
    for s in range(doc.sentence_count):
        ids = doc.sentence_token_ids(s)
        for k, tid in enumerate(ids):
            if doc.tokens[tid].norm not in verbs:
                continue
            before = ids[:k]
            if not any(doc.tokens[i].content_idx is not None for i in before):
                continue
            run_end = k
            while run_end + 1 < len(ids) and doc.tokens[ids[run_end + 1]].norm in verbs:
                run_end += 1
            after = ids[run_end + 1:]
            if not after:
                continue

            def verbatim(token_ids):
                a = doc.tokens[token_ids[0]].char_span[0]
                b = doc.tokens[token_ids[-1]].char_span[1]
                return doc.text[a:b]

            out.append(Triplex(
                subject=verbatim(before),
                predicate=verbatim(ids[k:run_end + 1]),
                obj=verbatim(after),
                confidence=0.5,
                doc_id=doc_id,
            ))
            break
    return out
