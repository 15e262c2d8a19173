"""Perturbation sampling, kernel-weighted linear surrogate, importance score.

The surrogate explains one prediction: perturb the document by dropping
interpretable units, ask the black box to score each perturbation, then
fit a ridge-regularized weighted linear model over the units' presence
bits.  Units are either single content words or fused tuples whose words
are always sampled together; that fusion is the ontology's entry point
into an otherwise standard local-surrogate recipe.

Complexity control is top-K selection: fit on all units, keep the K
largest coefficients by magnitude, refit on those alone.  Unselected
units carry coefficient 0 afterwards.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .blackbox import ScoreVector, TextModel
from .errors import DegenerateInputError
from .textproc import TokenizedDoc, UnitSpan, delete_tokens, word_norms
from .tuples import OntologyTuple
from .validation import check_positive, check_unit_interval


@dataclass(frozen=True)
class Unit:
    kind: str  # "word" | "tuple"
    token_ids: tuple[int, ...]
    spans: tuple[UnitSpan, ...]
    tuples: tuple[OntologyTuple, ...]
    label: str


@dataclass(frozen=True)
class InterpretableUnits:
    units: tuple[Unit, ...]

    def __len__(self) -> int:
        return len(self.units)

    def __iter__(self):
        return iter(self.units)

    def __getitem__(self, i: int) -> Unit:
        return self.units[i]

    def unit_of_token(self) -> dict[int, int]:
        """token id -> unit index; tokens outside every unit are absent."""
        return {tid: ui for ui, u in enumerate(self.units) for tid in u.token_ids}


@dataclass(frozen=True)
class Perturbation:
    mask: tuple[int, ...]
    text: str
    weight: float
    scores: ScoreVector


@dataclass(frozen=True)
class SurrogateModel:
    coefficients: tuple[float, ...]      # post-selection; 0 outside selected_units
    intercept: float
    target_class: int
    target_label: str
    kernel_sigma: float
    sample_count: int
    selected_units: tuple[int, ...]
    raw_coefficients: tuple[float, ...]  # full fit before selection, diagnostics
    units: InterpretableUnits


def build_units(doc: TokenizedDoc, tuples: Sequence[OntologyTuple]) -> InterpretableUnits:
    """Partition the doc's content tokens into sampling units.

    Each tuple fuses its two spans into one unit; tuples sharing a word
    chain into a single unit so every word's presence bit stays well
    defined.  Content tokens not touched by any tuple become singletons.
    Stopwords are never independent units, but ride along inside a fused
    span's token range.
    """
    content = [i for i, t in enumerate(doc.tokens) if t.content_idx is not None]
    parent = {i: i for i in content}

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i: int, j: int) -> None:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)

    extra_tokens: dict[int, set[int]] = {}
    group_tuples: dict[int, list[OntologyTuple]] = {}
    for tup in tuples:
        member_ids = list(tup.first.token_ids()) + list(tup.second.token_ids())
        member_content = [i for i in member_ids if i in parent]
        if not member_content:
            continue
        for i in member_content[1:]:
            union(member_content[0], i)
        root = find(member_content[0])
        extra_tokens.setdefault(root, set()).update(member_ids)
        group_tuples.setdefault(root, []).append(tup)

    groups: dict[int, list[int]] = {}
    for i in content:
        groups.setdefault(find(i), []).append(i)

    units = []
    for root in sorted(groups):
        toks = sorted(set(groups[root]) | extra_tokens.get(root, set()))
        tups = tuple(sorted(group_tuples.get(root, []),
                            key=lambda t: (t.first.start, t.second.start,
                                           t.source_concept, t.target_concept)))
        if tups:
            spans = sorted({s for t in tups for s in (t.first, t.second)},
                           key=lambda s: s.start)
            label = " + ".join(s.phrase for s in spans)
            units.append(Unit(kind="tuple", token_ids=tuple(toks),
                              spans=tuple(spans), tuples=tups, label=label))
        else:
            assert len(toks) == 1
            units.append(Unit(kind="word", token_ids=tuple(toks), spans=(),
                              tuples=(), label=doc.tokens[toks[0]].norm))
    return InterpretableUnits(units=tuple(units))


def sample_perturbations(units: InterpretableUnits, n: int, threshold: float,
                         seed: int) -> np.ndarray:
    """(n, d') presence-bit matrix; row 0 is always all ones.

    Each unit is kept iff its uniform draw exceeds the threshold, so the
    expected inclusion rate is 1 - threshold.
    """
    if n < 1:
        raise ValueError(f"need n >= 1 samples, got {n}")
    check_unit_interval("threshold", threshold)
    d = len(units)
    masks = np.ones((n, d), dtype=np.int8)
    if n > 1 and d > 0:
        rng = np.random.default_rng(seed)
        draws = rng.random((n - 1, d))
        masks[1:] = (draws > threshold).astype(np.int8)
    return masks


def perturbation_text(doc: TokenizedDoc, units: InterpretableUnits, mask) -> str:
    """Doc text with every absent unit's tokens deleted."""
    if len(mask) != len(units):
        raise ValueError(f"mask length {len(mask)} != unit count {len(units)}")
    drop: list[int] = []
    for bit, unit in zip(mask, units):
        if not bit:
            drop.extend(unit.token_ids)
    return delete_tokens(doc, drop)


def _tf(text: str) -> dict[str, float]:
    counts: dict[str, float] = {}
    for w in word_norms(text):
        counts[w] = counts.get(w, 0.0) + 1.0
    return counts


def kernel_weight(x_text: str, z_text: str, sigma: float) -> float:
    """exp(-D^2 / sigma^2) with D the cosine distance of raw TF vectors.

    An empty perturbation has no direction to compare, so its distance
    is pinned to the maximum, 1.
    """
    check_positive("sigma", sigma)
    tx, tz = _tf(x_text), _tf(z_text)
    nx = math.sqrt(sum(v * v for v in tx.values()))
    nz = math.sqrt(sum(v * v for v in tz.values()))
    if nx == 0.0 or nz == 0.0:
        dist = 1.0
    else:
        dot = sum(v * tz.get(w, 0.0) for w, v in tx.items())
        dist = 1.0 - dot / (nx * nz)
        dist = min(max(dist, 0.0), 1.0)
    return math.exp(-(dist * dist) / (sigma * sigma))


def evaluate_masks(doc: TokenizedDoc, units: InterpretableUnits, masks,
                   model: TextModel, sigma: float) -> list[Perturbation]:
    """Realize masks as texts, weight them, and score them with the model."""
    texts = [perturbation_text(doc, units, m) for m in masks]
    scores = model.predict_many(texts)
    return [
        Perturbation(mask=tuple(int(b) for b in mask), text=text,
                     weight=kernel_weight(doc.text, text, sigma), scores=sv)
        for mask, text, sv in zip(masks, texts, scores)
    ]


def _weighted_ridge(X: np.ndarray, y: np.ndarray, w: np.ndarray,
                    ridge: float) -> np.ndarray:
    """Solve the weighted ridge problem; intercept is the last, unpenalized
    column.  Built as a least-squares system on sqrt-weighted rows plus
    sqrt(ridge) rows, which keeps the solve well conditioned."""
    n, d = X.shape
    sw = np.sqrt(w)
    top = np.hstack([X * sw[:, None], sw[:, None]])
    if ridge > 0 and d > 0:
        reg = np.hstack([math.sqrt(ridge) * np.eye(d), np.zeros((d, 1))])
        A = np.vstack([top, reg])
        b = np.concatenate([sw * y, np.zeros(d)])
    else:
        A, b = top, sw * y
    theta, _, rank, _ = np.linalg.lstsq(A, b, rcond=None)
    if rank < d + 1:
        raise DegenerateInputError(
            f"surrogate system is singular (rank {rank} < {d + 1}); "
            "sampling did not vary enough units")
    return theta


def fit_surrogate(perturbations: Sequence[Perturbation], units: InterpretableUnits,
                  target_class: int, target_label: str = "",
                  ridge: float = 1e-3, top_k: int = 5,
                  sigma: float = 0.25) -> SurrogateModel:
    """Kernel-weighted ridge fit over presence bits, then top-K refit.

    Needs at least two distinct masks; a single repeated mask carries no
    contrast to regress on.
    """
    check_positive("ridge", ridge, strict=False)
    if top_k < 1:
        raise ValueError(f"top_k must be >= 1, got {top_k}")
    d = len(units)
    if d == 0:
        raise DegenerateInputError("no interpretable units; nothing to explain")
    if len({p.mask for p in perturbations}) < 2:
        raise DegenerateInputError("need at least 2 distinct perturbation masks")

    X = np.array([p.mask for p in perturbations], dtype=float)
    y = np.array([p.scores.scores[target_class] for p in perturbations])
    w = np.array([p.weight for p in perturbations])

    theta = _weighted_ridge(X, y, w, ridge)
    raw = theta[:-1]

    order = sorted(range(d), key=lambda j: (-abs(raw[j]), j))
    selected = tuple(sorted(order[:min(top_k, d)]))
    theta_sel = _weighted_ridge(X[:, selected], y, w, ridge)

    coef = np.zeros(d)
    coef[list(selected)] = theta_sel[:-1]
    return SurrogateModel(
        coefficients=tuple(float(c) for c in coef),
        intercept=float(theta_sel[-1]),
        target_class=target_class,
        target_label=target_label,
        kernel_sigma=sigma,
        sample_count=len(perturbations),
        selected_units=selected,
        raw_coefficients=tuple(float(c) for c in raw),
        units=units,
    )


def _token_ids_of(doc: TokenizedDoc, r) -> list[int]:
    if isinstance(r, UnitSpan):
        return list(r.token_ids())
    ids = []
    for item in r:
        if isinstance(item, UnitSpan):
            ids.extend(item.token_ids())
        else:
            ids.append(int(item))
    return ids

def importance_score(doc: TokenizedDoc, r, model: TextModel, g: SurrogateModel,
                     original_score: float | None = None) -> float:
    """Mean unit coefficient over r, times the score drop when r is deleted.

    r may be a UnitSpan, an iterable of UnitSpans, or an iterable of
    token ids.  The mean runs over the distinct units r intersects;
    words belonging to no unit add nothing, and a region touching no
    unit at all scores 0.  Both model scores are for the class the
    surrogate was fit against.
    """
    ids = sorted(set(_token_ids_of(doc, r)))
    if not ids:
        raise ValueError("cannot score an empty word region")
    if ids[0] < 0 or ids[-1] >= len(doc.tokens):
        raise IndexError("word region outside the document")

    tok2unit = g.units.unit_of_token()
    touched = sorted({tok2unit[i] for i in ids if i in tok2unit})
    if not touched:
        return 0.0
    mean_coef = sum(g.coefficients[u] for u in touched) / len(touched)

    if original_score is None:
        original_score = model.predict_one(doc.text).scores[g.target_class]
    reduced = model.predict_one(delete_tokens(doc, ids)).scores[g.target_class]
    return mean_coef * (original_score - reduced)
