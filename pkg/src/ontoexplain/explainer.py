"""End-to-end explanation pipeline behind one estimator-style object.

`OntologyTextExplainer` wires the stages together: tokenize, extract
tuples, fuse sampling units, perturb, fit the surrogate, learn anchors,
align triplexes, compose.  Construction only stores parameters (so
`get_params` / `set_params` / clone behave as expected); all work
happens in `explain`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from sklearn.base import BaseEstimator

from .anchors import DEFAULT_SEEDS, Anchor, learn_anchors
from .blackbox import ScoreVector, TextModel
from .composer import Explanation, OntologyExplanation, compose, insert_causal, merge_tuples
from .errors import DegenerateInputError
from .ontology import Ontology, load_ontology
from .surrogate import (InterpretableUnits, SurrogateModel, build_units,
                        evaluate_masks, fit_surrogate, sample_perturbations)
from .textproc import TokenizedDoc, load_stopwords, tokenize
from .triplex import Triplex, align_triplex
from .tuples import OntologyTuple, extract_tuples


@dataclass(frozen=True)
class ExplanationResult:
    doc: TokenizedDoc
    original_scores: ScoreVector
    target_class: int
    target_label: str
    tuples: tuple[OntologyTuple, ...]
    units: InterpretableUnits
    surrogate: SurrogateModel
    onto_explanations: tuple[OntologyExplanation, ...]
    anchors: tuple[Anchor, ...]
    triplexes: tuple[Triplex, ...]
    explanations: tuple[Explanation, ...]
    config: dict = field(default_factory=dict)

    def important_words(self) -> list[tuple[str, float]]:
        """Selected surrogate units with coefficients, largest magnitude first."""
        g = self.surrogate
        pairs = [(g.units[u].label, g.coefficients[u]) for u in g.selected_units]
        return sorted(pairs, key=lambda p: (-abs(p[1]), p[0]))

    def to_dict(self) -> dict:
        """Plain-data view for serialization; key order is fixed."""
        g = self.surrogate
        return {
            "text": self.doc.text,
            "predicted_label": self.target_label,
            "predicted_score": self.original_scores.scores[self.target_class],
            "scores": {lab: s for lab, s in
                       zip(self.original_scores.labels, self.original_scores.scores)},
            "config": dict(sorted(self.config.items())),
            "units": [u.label for u in self.units],
            "selected_units": [
                {"label": g.units[u].label, "coefficient": g.coefficients[u]}
                for u in g.selected_units],
            "intercept": g.intercept,
            "tuples": [
                {"first": t.first.phrase, "second": t.second.phrase,
                 "source_concept": t.source_concept,
                 "target_concept": t.target_concept,
                 "distance": t.distance, "sentence": t.first.sent_idx}
                for t in self.tuples],
            "ontology_explanations": [
                {"sentence": oe.sent_idx, "words": oe.word_list()}
                for oe in self.onto_explanations],
            "anchors": [
                {"sentence": a.sent_idx, "text": a.text_in(self.doc), "score": a.score}
                for a in self.anchors],
            "triplexes": [
                {"subject": t.subject, "predicate": t.predicate, "object": t.obj,
                 "confidence": t.confidence, "sentence": t.sent_idx}
                for t in self.triplexes],
            "explanations": [
                {"rank": e.rank, "sentence": e.sent_idx, "text": e.text,
                 "score": e.score}
                for e in self.explanations],
        }


class OntologyTextExplainer(BaseEstimator):
    """Local explanations for one prediction of any text classifier.

    Parameters mirror the CLI flags; `ontology` may be an Ontology, a
    path to an ontology file, or None (which degrades to independent
    word sampling, as does `lime_mode=True`).
    """

    def __init__(self, ontology=None, gamma: float = 3, samples: int = 1000,
                 sigma: float = 0.25, threshold: float = 0.5, top_k: int = 5,
                 ridge: float = 1e-3, seed: int = 0, lime_mode: bool = False,
                 use_anchors: bool = True, anchor_seeds: Sequence[str] | None = None,
                 stopwords: Sequence[str] | None = None):
        self.ontology = ontology
        self.gamma = gamma
        self.samples = samples
        self.sigma = sigma
        self.threshold = threshold
        self.top_k = top_k
        self.ridge = ridge
        self.seed = seed
        self.lime_mode = lime_mode
        self.use_anchors = use_anchors
        self.anchor_seeds = anchor_seeds
        self.stopwords = stopwords

    def _resolved_ontology(self) -> Ontology | None:
        if self.ontology is None or isinstance(self.ontology, Ontology):
            return self.ontology
        return load_ontology(Path(self.ontology))

    def _resolved_stopwords(self) -> frozenset[str]:
        if self.stopwords is None:
            return load_stopwords()
        return frozenset(s.lower() for s in self.stopwords)

    def explain(self, model: TextModel, text: str,
                triplexes: Sequence[Triplex] = ()) -> ExplanationResult:
        """Run the full pipeline on one document.

        `triplexes` should already be confidence-filtered; they are
        aligned here and the unalignable ones dropped.  In lime mode the
        ontology, anchors, and triplexes are all ignored and the result
        carries only the word-level surrogate.
        """
        stopwords = self._resolved_stopwords()
        doc = tokenize(text, stopwords)
        if not doc.tokens:
            raise DegenerateInputError("document has no word tokens")

        original = model.predict_one(text)
        target = original.predicted_index
        target_label = original.predicted_label

        ontology = None if self.lime_mode else self._resolved_ontology()
        tuples: list[OntologyTuple] = []
        if ontology is not None:
            tuples = extract_tuples(doc, ontology, self.gamma)

        units = build_units(doc, tuples)
        if len(units) == 0:
            raise DegenerateInputError(
                "document contains only stopwords; no units to perturb")
        masks = sample_perturbations(units, self.samples, self.threshold, self.seed)
        perturbations = evaluate_masks(doc, units, masks, model, self.sigma)
        g = fit_surrogate(perturbations, units, target, target_label,
                          ridge=self.ridge, top_k=self.top_k, sigma=self.sigma)

        anchors: list[Anchor] = []
        aligned: list[Triplex] = []
        onto_expls: list[OntologyExplanation] = []
        if not self.lime_mode:
            if self.use_anchors:
                seeds = self.anchor_seeds if self.anchor_seeds is not None else DEFAULT_SEEDS
                anchors = learn_anchors(doc, seeds, model, g)
            aligned = [a for a in (align_triplex(doc, t) for t in triplexes)
                       if a is not None]
            by_sent: dict[int, list[OntologyTuple]] = {}
            for t in tuples:
                by_sent.setdefault(t.first.sent_idx, []).append(t)
            for s in sorted(by_sent):
                for oe in merge_tuples(by_sent[s]):
                    onto_expls.append(insert_causal(doc, oe))

        explanations = compose(doc, onto_expls, anchors, aligned, model, g)

        return ExplanationResult(
            doc=doc,
            original_scores=original,
            target_class=target,
            target_label=target_label,
            tuples=tuple(tuples),
            units=units,
            surrogate=g,
            onto_explanations=tuple(onto_expls),
            anchors=tuple(anchors),
            triplexes=tuple(aligned),
            explanations=tuple(explanations),
            config={
                "gamma": self.gamma, "samples": self.samples, "sigma": self.sigma,
                "threshold": self.threshold, "top_k": self.top_k,
                "ridge": self.ridge, "seed": self.seed,
                "lime_mode": self.lime_mode, "use_anchors": self.use_anchors,
                "ontology": getattr(ontology, "name", None),
            },
        )
