"""Ontology-guided local explanations for black-box text classifiers.

The pipeline in one breath: extract concept-pair tuples from the
document using a domain ontology, sample perturbations that keep tuple
words together, fit a kernel-weighted linear surrogate to the black
box's scores, grow anchor phrases from seed words, align externally
extracted triplexes, and compose everything into per-sentence verbatim
explanation spans ranked by importance.

Most callers want `OntologyTextExplainer` plus either a trained
`TfidfTextClassifier` or an `ExternalProcessModel`.
"""

from .anchors import DEFAULT_SEEDS, Anchor, learn_anchors, load_seeds
from .blackbox import (ExternalProcessModel, ScoreVector, TextModel,
                       TfidfTextClassifier, loss_and_gradient, train_builtin)
from .composer import (CAUSAL_WORDS, Explanation, OntologyExplanation, compose,
                       insert_causal, merge_tuples)
from .corpus import SyntheticCorpus, make_pairs_corpus, make_singles_corpus, pair_ontology
from .errors import (AdapterProtocolError, DegenerateInputError, FormatError,
                     OntoExplainError, OntologyValidationError)
from .evaluate import VARIANTS, EvalConfig, EvalReport, emit_report, load_report, run_eval
from .explainer import ExplanationResult, OntologyTextExplainer
from .ontology import (Concept, Ontology, Relation, convert_csv, load_ontology,
                       parse_ontology, save_ontology)
from .surrogate import (InterpretableUnits, Perturbation, SurrogateModel, Unit,
                        build_units, evaluate_masks, fit_surrogate,
                        importance_score, kernel_weight, perturbation_text,
                        sample_perturbations)
from .textproc import (INFINITE, Token, TokenizedDoc, UnitSpan, delete_tokens,
                       lambda_distance, load_stopwords, make_span, match_terms,
                       tokenize, word_norms)
from .triplex import (Triplex, align_triplex, extract_builtin, load_triplexes,
                      load_verbs)
from .tuples import OntologyTuple, extract_tuples

__version__ = "0.1.0"

__all__ = [
    "AdapterProtocolError", "Anchor", "CAUSAL_WORDS", "Concept",
    "DEFAULT_SEEDS", "DegenerateInputError", "EvalConfig", "EvalReport",
    "Explanation", "ExplanationResult", "ExternalProcessModel", "FormatError",
    "INFINITE", "InterpretableUnits", "Ontology", "OntologyExplanation",
    "OntoExplainError", "OntologyTextExplainer", "OntologyTuple",
    "OntologyValidationError", "Perturbation", "Relation", "ScoreVector",
    "SurrogateModel", "SyntheticCorpus", "TextModel", "TfidfTextClassifier",
    "Token", "TokenizedDoc", "Triplex", "Unit", "UnitSpan", "VARIANTS",
    "align_triplex", "build_units", "compose", "convert_csv", "delete_tokens",
    "emit_report", "evaluate_masks", "extract_builtin", "extract_tuples",
    "fit_surrogate", "importance_score", "insert_causal", "kernel_weight",
    "lambda_distance", "learn_anchors", "load_ontology", "load_report",
    "load_seeds", "load_stopwords", "load_triplexes", "load_verbs",
    "loss_and_gradient",
    "make_pairs_corpus", "make_singles_corpus", "make_span", "match_terms",
    "merge_tuples", "pair_ontology", "parse_ontology", "perturbation_text",
    "run_eval", "sample_perturbations", "save_ontology", "tokenize",
    "train_builtin", "word_norms",
]
