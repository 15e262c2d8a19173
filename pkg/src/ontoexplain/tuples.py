"""Ontology-based tuple extraction.

A tuple pairs two matched term spans (x_k, x_l) whose concepts are
connected by a directed relation A↦B and which sit close together in the
same sentence: distance ≤ gamma.  Ordering is by edge direction, not
text position, and the relation is deliberately asymmetric: (a, b) being
a tuple says nothing about (b, a).
"""

from __future__ import annotations

from dataclasses import dataclass

from .ontology import Ontology
from .textproc import TokenizedDoc, UnitSpan, lambda_distance, match_terms
from .validation import check_positive


@dataclass(frozen=True)
class OntologyTuple:
    first: UnitSpan
    second: UnitSpan
    source_concept: str
    target_concept: str
    distance: float

    def words(self) -> tuple[str, ...]:
        return (self.first.phrase, self.second.phrase)


def extract_tuples(doc: TokenizedDoc, ontology: Ontology, gamma: float) -> list[OntologyTuple]:
    """All span/concept pairs satisfying the tuple conditions.

    gamma = 0 admits only co-positioned spans and is legal, if useless.
    Spans containing only stopwords cannot anchor a distance and never
    participate.  Output is deduplicated and deterministically sorted by
    (sentence, first span, second span, concept pair).
    """
    check_positive("gamma", gamma, strict=False)
    matches = match_terms(doc, ontology)
    by_sentence: dict[int, list[tuple[UnitSpan, str]]] = {}
    for span, cid in matches:
        if all(doc.tokens[i].content_idx is None for i in span.token_ids()):
            continue
        by_sentence.setdefault(span.sent_idx, []).append((span, cid))

    seen = set()
    out: list[OntologyTuple] = []
    for entries in by_sentence.values():
        for a, concept_a in entries:
            for b, concept_b in entries:
                if a == b:
                    continue
                if not ontology.has_edge(concept_a, concept_b):
                    continue
                dist = lambda_distance(doc, a, b)
                if dist > gamma:
                    continue
                key = (a, b, concept_a, concept_b)
                if key in seen:
                    continue
                seen.add(key)
                out.append(OntologyTuple(first=a, second=b,
                                         source_concept=concept_a,
                                         target_concept=concept_b,
                                         distance=dist))
    out.sort(key=lambda t: (t.first.sent_idx, t.first.start, t.second.start,
                            t.source_concept, t.target_concept))
    return out
