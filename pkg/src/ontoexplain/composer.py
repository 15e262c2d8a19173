"""Fuse tuples, anchors, and triplexes into final explanation spans.

Composition is rule driven and per sentence.  Tuples in a sentence merge
into ontology explanations (shared words collapse, same-concept
alternatives join with "and/or", chains and closed triangles flatten),
causal connectives caught between explanation words are pulled in, and
then everything known about the sentence is collapsed to one contiguous
span running from the first to the last involved word.  A sentence with
no tuples but a learned anchor is explained by the anchor alone; a
sentence with neither stays silent, whatever triplexes it may have.

Every emitted explanation is a verbatim substring of its sentence and
never crosses sentence boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

from .anchors import Anchor
from .blackbox import TextModel
from .surrogate import SurrogateModel, importance_score
from .textproc import TokenizedDoc, UnitSpan, make_span
from .triplex import Triplex
from .tuples import OntologyTuple

# Discourse connectives preserved inside explanations when they sit
# between two explanation words.
CAUSAL_WORDS = (
    "because", "since", "therefore", "while", "whereas", "thus", "thereby",
    "meanwhile", "however", "hence", "otherwise", "consequently", "when",
    "whenever",
)
_CAUSAL_SET = frozenset(CAUSAL_WORDS)


@dataclass(frozen=True)
class OntologyExplanation:
    sent_idx: int
    spans: tuple[UnitSpan, ...]            # text order
    alt_links: tuple[tuple[UnitSpan, UnitSpan], ...]
    tuples: tuple[OntologyTuple, ...]

    def token_ids(self) -> list[int]:
        return sorted({i for s in self.spans for i in s.token_ids()})

    def word_list(self) -> list[str]:
        """Phrases in text order with "and/or" between linked alternatives."""
        cls = _alt_classes(self.spans, self.alt_links)
        out: list[str] = []
        for i, span in enumerate(self.spans):
            if i > 0 and cls[self.spans[i - 1]] == cls[span]:
                out.append("and/or")
            out.append(span.phrase)
        return out


@dataclass(frozen=True)
class Explanation:
    sent_idx: int
    text: str
    score: float
    rank: int
    token_start: int
    token_stop: int  # inclusive
    onto_explanations: tuple[OntologyExplanation, ...]
    anchor: Anchor | None
    triplexes: tuple[Triplex, ...]


def _alt_classes(spans, links) -> dict[UnitSpan, int]:
    # tiny union-find over span list indices
    parent = list(range(len(spans)))

    def root(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    index = {s: i for i, s in enumerate(spans)}
    for a, b in links:
        if a in index and b in index:
            ra, rb = root(index[a]), root(index[b])
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    return {s: root(index[s]) for s in spans}


def _canon(tuples: Sequence[OntologyTuple]) -> list[OntologyTuple]:
    return sorted(tuples, key=lambda t: (t.first.start, t.second.start,
                                         t.source_concept, t.target_concept))


def _rule_a(t1: OntologyTuple, t2: OntologyTuple) -> bool:
    return (t1.first == t2.first and t1.second != t2.second
            and t1.target_concept == t2.target_concept)


def _rule_b(t1: OntologyTuple, t2: OntologyTuple) -> bool:
    return (t1.second == t2.second and t1.first != t2.first
            and t1.source_concept == t2.source_concept)


def _rule_c(t1: OntologyTuple, t2: OntologyTuple) -> bool:
    return t1.second == t2.first or t2.second == t1.first


def _rule_d(group: list[OntologyTuple], other: list[OntologyTuple]) -> bool:
    # closed triangle: (a,b),(b,c) on one side, (a,c) on the other
    for side1, side2 in ((group, other), (other, group)):
        for t in side2:
            for u in side1:
                for v in side1:
                    if u.second == v.first and t.first == u.first and t.second == v.second:
                        return True
    return False


def _groups_merge(g1: list[OntologyTuple], g2: list[OntologyTuple], rule: str) -> bool:
    if rule == "d":
        return _rule_d(g1, g2)
    pred = {"a": _rule_a, "b": _rule_b, "c": _rule_c}[rule]
    return any(pred(t1, t2) for t1 in g1 for t2 in g2)


def merge_tuples(tuples: Sequence[OntologyTuple]) -> list[OntologyExplanation]:
    """Collapse one sentence's tuples into ontology explanations.

    Rules, applied to a fixpoint in a fixed order over canonically
    sorted tuples (which makes the result independent of input order):
    shared first word with same-concept seconds, shared second word with
    same-concept firsts, chains, and closed triangles.  Tuples no rule
    touches pass through as two-word explanations.
    """
    if not tuples:
        return []
    if len({t.first.sent_idx for t in tuples}) != 1:
        raise ValueError("merge_tuples expects tuples from a single sentence")
    groups: list[list[OntologyTuple]] = [[t] for t in _canon(tuples)]

    merged = True
    while merged:
        merged = False
        for rule in ("a", "b", "c", "d"):
            hit = None
            for i in range(len(groups)):
                for j in range(i + 1, len(groups)):
                    if _groups_merge(groups[i], groups[j], rule):
                        hit = (i, j)
                        break
                if hit:
                    break
            if hit:
                i, j = hit
                groups[i] = _canon(groups[i] + groups[j])
                del groups[j]
                merged = True
                break

    out = []
    for group in groups:
        spans = sorted({s for t in group for s in (t.first, t.second)},
                       key=lambda s: s.start)
        links = []
        for t1 in group:
            for t2 in group:
                if _rule_a(t1, t2):
                    links.append(tuple(sorted((t1.second, t2.second), key=lambda s: s.start)))
                if _rule_b(t1, t2):
                    links.append(tuple(sorted((t1.first, t2.first), key=lambda s: s.start)))
        uniq_links = tuple(sorted(set(links), key=lambda p: (p[0].start, p[1].start)))
        out.append(OntologyExplanation(
            sent_idx=group[0].first.sent_idx,
            spans=tuple(spans),
            alt_links=uniq_links,
            tuples=tuple(group),
        ))
    out.sort(key=lambda e: e.spans[0].start)
    return out


def insert_causal(doc: TokenizedDoc, expl: OntologyExplanation) -> OntologyExplanation:
    """Pull causal connectives lying between explanation words into the list.

    Only strictly-between positions qualify; a causal word before the
    first or after the last explanation word is left out.
    """
    ids = expl.token_ids()
    covered = set(ids)
    extra = [i for i in range(ids[0] + 1, ids[-1])
             if i not in covered and doc.tokens[i].norm in _CAUSAL_SET]
    if not extra:
        return expl
    spans = list(expl.spans) + [make_span(doc, i, i + 1) for i in extra]
    spans.sort(key=lambda s: s.start)
    return replace(expl, spans=tuple(spans))


def compose(doc: TokenizedDoc, onto_expls: Sequence[OntologyExplanation],
            anchors: Sequence[Anchor], triplexes: Sequence[Triplex],
            model: TextModel, g: SurrogateModel) -> list[Explanation]:
    """Emit one scored contiguous explanation span per covered sentence.

    Sentences with ontology explanations take the span from the least to
    the greatest position over explanation words, anchor words, and
    aligned triplex words.  Anchor-only sentences emit the anchor
    verbatim.  Output is sorted by descending score and ranked from 1.
    """
    onto_by_sent: dict[int, list[OntologyExplanation]] = {}
    for oe in onto_expls:
        onto_by_sent.setdefault(oe.sent_idx, []).append(oe)
    anchor_by_sent = {a.sent_idx: a for a in anchors}
    trip_by_sent: dict[int, list[Triplex]] = {}
    for t in triplexes:
        if t.spans is not None:
            trip_by_sent.setdefault(t.sent_idx, []).append(t)

    results = []
    for s in range(doc.sentence_count):
        onto_s = onto_by_sent.get(s, [])
        anchor = anchor_by_sent.get(s)
        trips = trip_by_sent.get(s, [])
        if onto_s:
            ids = set()
            for oe in onto_s:
                ids.update(oe.token_ids())
            if anchor is not None:
                ids.update(anchor.span.token_ids())
            for t in trips:
                for sp in t.spans:
                    ids.update(sp.token_ids())
            used_trips = tuple(trips)
        elif anchor is not None:
            ids = set(anchor.span.token_ids())
            used_trips = ()
            trips = []
        else:
            continue
        lo, hi = min(ids), max(ids)
        text = doc.text[doc.tokens[lo].char_span[0]:doc.tokens[hi].char_span[1]]
        score = importance_score(doc, range(lo, hi + 1), model, g)
        results.append(Explanation(
            sent_idx=s, text=text, score=score, rank=0,
            token_start=lo, token_stop=hi,
            onto_explanations=tuple(onto_s),
            anchor=anchor,
            triplexes=used_trips,
        ))
    results.sort(key=lambda e: (-e.score, e.sent_idx))
    return [replace(e, rank=i + 1) for i, e in enumerate(results)]
