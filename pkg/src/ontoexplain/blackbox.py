"""Black-box prediction interface: f maps text to a class-score vector.

Two implementations ship here.  `TfidfTextClassifier` is a desk-scale
trainable model (TF-IDF features, one-vs-rest logistic regression, plain
full-batch gradient descent) with binary-free JSON persistence.
`ExternalProcessModel` adapts any classifier that speaks the
line-delimited JSON protocol over stdin/stdout, so heavier models can
plug in without being linked here.

Both honor the same contract: identical text yields identical scores,
scores are nonnegative and sum to 1, and batch prediction is elementwise
identical to single prediction (the batch path literally loops the
single path).
"""

from __future__ import annotations

import json
import math
import queue
import subprocess
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol, Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.exceptions import NotFittedError

from .errors import AdapterProtocolError, DegenerateInputError, FormatError
from .textproc import word_norms
from .validation import check_corpus, check_text

_PERSIST_FORMAT = "tfidf-ovr-logistic"
_PERSIST_VERSION = 1


@dataclass(frozen=True)
class ScoreVector:
    scores: tuple[float, ...]
    labels: tuple[str, ...]

    def __post_init__(self):
        if len(self.scores) != len(self.labels):
            raise ValueError("scores and labels differ in length")
        if len(self.labels) < 2:
            raise ValueError("need at least 2 classes")
        if any(s < 0 for s in self.scores):
            raise ValueError("negative score")
        total = sum(self.scores)
        if not math.isclose(total, 1.0, abs_tol=1e-6):
            raise ValueError(f"scores sum to {total}, not 1")

    @property
    def predicted_index(self) -> int:
        return max(range(len(self.scores)), key=lambda i: (self.scores[i], -i))

    @property
    def predicted_label(self) -> str:
        return self.labels[self.predicted_index]

    def score_of(self, label: str) -> float:
        return self.scores[self.labels.index(label)]


class TextModel(Protocol):
    """What the explanation pipeline needs from a classifier."""

    @property
    def class_labels(self) -> tuple[str, ...]: ...

    def predict_one(self, text: str) -> ScoreVector: ...

    def predict_many(self, texts: Sequence[str]) -> list[ScoreVector]: ...


def loss_and_gradient(weights: np.ndarray, intercept: float,
                      features: np.ndarray, targets: np.ndarray,
                      l2: float) -> tuple[float, np.ndarray, float]:
    """Binary logistic loss with L2 on weights (not the intercept).

    Returns (loss, d_loss/d_weights, d_loss/d_intercept).  The loss is
    the mean over samples plus 0.5*l2*||w||^2; kept as a standalone
    function so the analytic gradient can be checked against finite
    differences directly.
    """
    margin = features @ weights + intercept
    # log(1+e^m) - t*m, computed stably for large |m|
    loss = float(np.mean(np.logaddexp(0.0, margin) - targets * margin))
    loss += 0.5 * l2 * float(weights @ weights)
    prob = 1.0 / (1.0 + np.exp(-margin))
    residual = (prob - targets) / len(targets)
    grad_w = features.T @ residual + l2 * weights
    grad_b = float(np.sum(residual))
    return loss, grad_w, grad_b


class TfidfTextClassifier(BaseEstimator, ClassifierMixin):
    """TF-IDF + one-vs-rest logistic regression, trained by gradient descent.

    Training is full batch from a zero start, so results are exactly
    reproducible with no random state.  Feature values are raw term
    counts scaled by smoothed IDF and L2-normalized per document.
    """

    def __init__(self, learning_rate: float = 1.0, epochs: int = 300,
                 l2: float = 1e-4, min_df: int = 1):
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.l2 = l2
        self.min_df = min_df

    # sklearn surface -------------------------------------------------

    def fit(self, X: Sequence[str], y: Sequence[str]) -> "TfidfTextClassifier":
        texts, labels = check_corpus(X, y)
        self.classes_ = tuple(sorted(set(labels)))

        docs = [word_norms(t) for t in texts]
        df: dict[str, int] = {}
        for toks in docs:
            for w in set(toks):
                df[w] = df.get(w, 0) + 1
        vocab = sorted(w for w, c in df.items() if c >= self.min_df)
        if not vocab:
            raise DegenerateInputError("training corpus has an empty vocabulary")
        self.vocabulary_ = {w: i for i, w in enumerate(vocab)}
        n_docs = len(texts)
        self.idf_ = np.array(
            [math.log((1 + n_docs) / (1 + df[w])) + 1.0 for w in vocab])

        features = np.zeros((n_docs, len(vocab)))
        for row, toks in enumerate(docs):
            features[row] = self._vector(toks)

        self.coef_ = np.zeros((len(self.classes_), len(vocab)))
        self.intercept_ = np.zeros(len(self.classes_))
        for ci, cls in enumerate(self.classes_):
            targets = np.array([1.0 if lab == cls else 0.0 for lab in labels])
            w = np.zeros(len(vocab))
            b = 0.0
            for _ in range(self.epochs):
                _, gw, gb = loss_and_gradient(w, b, features, targets, self.l2)
                w -= self.learning_rate * gw
                b -= self.learning_rate * gb
            self.coef_[ci] = w
            self.intercept_[ci] = b
        return self

    def predict(self, X: Sequence[str]) -> np.ndarray:
        return np.array([sv.predicted_label for sv in self.predict_many(X)])

    def predict_proba(self, X: Sequence[str]) -> np.ndarray:
        return np.array([sv.scores for sv in self.predict_many(X)])

    # explanation-pipeline surface ------------------------------------

    @property
    def class_labels(self) -> tuple[str, ...]:
        self._require_fitted()
        return self.classes_

    def predict_one(self, text: str) -> ScoreVector:
        self._require_fitted()
        check_text(text)
        counts: dict[int, float] = {}
        for w in word_norms(text):
            idx = self.vocabulary_.get(w)
            if idx is not None:
                counts[idx] = counts.get(idx, 0.0) + 1.0
        norm_sq = 0.0
        for idx in counts:
            counts[idx] *= self.idf_[idx]
            norm_sq += counts[idx] * counts[idx]
        scale = 1.0 / math.sqrt(norm_sq) if norm_sq > 0 else 0.0
        raw = []
        for ci in range(len(self.classes_)):
            margin = self.intercept_[ci]
            row = self.coef_[ci]
            for idx, val in counts.items():
                margin += row[idx] * val * scale
            raw.append(1.0 / (1.0 + math.exp(-margin)))
        total = sum(raw)
        return ScoreVector(scores=tuple(s / total for s in raw),
                           labels=self.classes_)

    def predict_many(self, texts: Sequence[str]) -> list[ScoreVector]:
        # a loop on purpose: batch/single equivalence must be exact
        return [self.predict_one(t) for t in texts]

    # persistence -----------------------------------------------------

    def save(self, path: str | Path) -> None:
        self._require_fitted()
        payload = {
            "format": _PERSIST_FORMAT,
            "version": _PERSIST_VERSION,
            "labels": list(self.classes_),
            "vocabulary": sorted(self.vocabulary_, key=self.vocabulary_.get),
            "idf": self.idf_.tolist(),
            "coef": self.coef_.tolist(),
            "intercept": self.intercept_.tolist(),
            "params": self.get_params(),
        }
        Path(path).write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", "utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "TfidfTextClassifier":
        try:
            payload = json.loads(Path(path).read_text("utf-8"))
        except json.JSONDecodeError as exc:
            raise FormatError(f"not a model file: {exc}", path=str(path)) from exc
        if payload.get("format") != _PERSIST_FORMAT:
            raise FormatError(f"unknown model format {payload.get('format')!r}", path=str(path))
        if payload.get("version") != _PERSIST_VERSION:
            raise FormatError(f"unsupported model version {payload.get('version')!r}", path=str(path))
        model = cls(**payload["params"])
        model.classes_ = tuple(payload["labels"])
        model.vocabulary_ = {w: i for i, w in enumerate(payload["vocabulary"])}
        model.idf_ = np.array(payload["idf"])
        model.coef_ = np.array(payload["coef"])
        model.intercept_ = np.array(payload["intercept"])
        return model

    # internals -------------------------------------------------------

    def _vector(self, toks: list[str]) -> np.ndarray:
        vec = np.zeros(len(self.vocabulary_))
        for w in toks:
            idx = self.vocabulary_.get(w)
            if idx is not None:
                vec[idx] += 1.0
        vec *= self.idf_
        norm = np.linalg.norm(vec)
        if norm > 0:
            vec /= norm
        return vec

    def _require_fitted(self) -> None:
        if not hasattr(self, "classes_"):
            raise NotFittedError("classifier is not fitted; call fit() or load()")


def train_builtin(texts: Sequence[str], labels: Sequence[str],
                  min_per_class: int = 10, **params) -> TfidfTextClassifier:
    """Train the built-in classifier with corpus sanity checks."""
    check_corpus(texts, labels, min_per_class=min_per_class)
    return TfidfTextClassifier(**params).fit(texts, labels)


class ExternalProcessModel:
    """Adapter for classifiers running as a child process.

    Wire protocol, one JSON object per line over stdin/stdout:

    * handshake (child -> us, first line): {"labels": [..], "max_inflight": N}
    * request (us -> child): {"id": <int>, "text": <string>}
    * response (child -> us): {"id": <int>, "scores": [..], "labels": [..]}

    Responses may arrive out of order; at most max_inflight requests are
    outstanding.  The child owns the determinism contract: same text,
    same scores.
    """

    def __init__(self, command: Sequence[str], timeout: float = 30.0):
        self.command = list(command)
        self.timeout = timeout
        self._next_id = 0
        self._proc = subprocess.Popen(
            self.command, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
            text=True, bufsize=1)
        self._lines: queue.Queue = queue.Queue()
        self._reader = threading.Thread(target=self._pump, daemon=True)
        self._reader.start()
        handshake = self._read_obj()
        labels = handshake.get("labels")
        if not isinstance(labels, list) or len(labels) < 2:
            raise AdapterProtocolError(
                f"handshake must declare at least 2 labels, got {labels!r}")
        self._labels = tuple(str(l) for l in labels)
        self.max_inflight = int(handshake.get("max_inflight", 1))
        if self.max_inflight < 1:
            raise AdapterProtocolError("max_inflight must be >= 1")

    def _pump(self) -> None:
        assert self._proc.stdout is not None
        for line in self._proc.stdout:
            self._lines.put(line)
        self._lines.put(None)  # EOF marker

    def _read_obj(self) -> dict:
        try:
            line = self._lines.get(timeout=self.timeout)
        except queue.Empty:
            raise AdapterProtocolError(
                f"adapter silent for {self.timeout}s") from None
        if line is None:
            code = self._proc.poll()
            raise AdapterProtocolError(f"adapter closed its stdout (exit code {code})")
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise AdapterProtocolError(f"adapter sent invalid JSON: {line!r}") from exc
        if not isinstance(obj, dict):
            raise AdapterProtocolError(f"adapter sent a non-object: {obj!r}")
        return obj

    def _send(self, obj: dict) -> None:
        assert self._proc.stdin is not None
        try:
            self._proc.stdin.write(json.dumps(obj) + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise AdapterProtocolError("adapter stdin closed") from exc

    @property
    def class_labels(self) -> tuple[str, ...]:
        return self._labels

    def predict_one(self, text: str) -> ScoreVector:
        return self.predict_many([text])[0]

    def predict_many(self, texts: Sequence[str]) -> list[ScoreVector]:
        results: dict[int, ScoreVector] = {}
        ids = []
        sent = 0
        pending: set[int] = set()
        for text in texts:
            check_text(text)
        while len(results) < len(texts):
            while sent < len(texts) and len(pending) < self.max_inflight:
                req_id = self._next_id
                self._next_id += 1
                ids.append(req_id)
                self._send({"id": req_id, "text": texts[sent]})
                pending.add(req_id)
                sent += 1
            obj = self._read_obj()
            resp_id = obj.get("id")
            if resp_id not in pending:
                raise AdapterProtocolError(f"response for unknown id {resp_id!r}")
            pending.discard(resp_id)
            try:
                results[resp_id] = ScoreVector(
                    scores=tuple(float(s) for s in obj["scores"]),
                    labels=tuple(str(l) for l in obj["labels"]))
            except (KeyError, TypeError, ValueError) as exc:
                idx = ids.index(resp_id)
                raise AdapterProtocolError(
                    f"bad response for input {idx}: {exc}") from exc
        return [results[i] for i in ids]

    def close(self) -> None:
        if self._proc.poll() is None:
            if self._proc.stdin is not None:
                try:
                    self._proc.stdin.close()
                except OSError:
                    pass
            try:
                self._proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()

    def __enter__(self) -> "ExternalProcessModel":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
