"""Word-deletion faithfulness evaluation and report emission.

Four explainer variants compete on the same corpus and model:

* ``full``     - tuples, anchors (if enabled), and supplied triplexes;
* ``words``    - independent-word surrogate only (the LIME-style baseline);
* ``ontology`` - tuples and anchors but no triplexes;
* ``triplex``  - aligned triplexes alone, scored with the word surrogate.

For each document the variant's top-k explanations are deleted and the
model re-queried.  AC is the drop in accuracy against the true labels;
SC is the mean importance score of what was deleted.  The ``words``
variant gets a per-document budget of exactly as many tokens as ``full``
deleted, which keeps the comparison word-for-word fair.

Reports are byte-stable: same corpus, model, config, and seed give the
same file, byte for byte.
"""

from __future__ import annotations

import html as html_mod
import json
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Sequence

from .blackbox import TextModel
from .errors import DegenerateInputError
from .explainer import ExplanationResult, OntologyTextExplainer
from .ontology import Ontology
from .surrogate import importance_score
from .textproc import delete_tokens
from .triplex import Triplex
from .validation import check_corpus

VARIANTS = ("full", "words", "ontology", "triplex")


@dataclass(frozen=True)
class EvalConfig:
    top_k: int = 1
    variants: tuple[str, ...] = VARIANTS
    seed: int = 0
    gamma: float = 3.0
    samples: int = 300
    sigma: float = 0.25
    threshold: float = 0.5
    select_k: int = 5
    ridge: float = 1e-3
    use_anchors: bool = False
    min_confidence: float = 0.7

    def __post_init__(self):
        if self.top_k < 1:
            raise ValueError(f"top_k must be >= 1, got {self.top_k}")
        unknown = set(self.variants) - set(VARIANTS)
        if unknown:
            raise ValueError(f"unknown variants {sorted(unknown)}; "
                             f"choose from {list(VARIANTS)}")

    def as_dict(self) -> dict:
        return {f.name: (list(v) if isinstance(v := getattr(self, f.name), tuple) else v)
                for f in fields(self)}


@dataclass(frozen=True)
class EvalReport:
    data: dict = field(default_factory=dict)

    @property
    def aggregates(self) -> dict:
        return self.data["aggregates"]

    @property
    def per_doc(self) -> list:
        return self.data["per_doc"]

    def to_json(self) -> str:
        return json.dumps(self.data, sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "EvalReport":
        return cls(data=json.loads(text))


def _explainer(ontology, config: EvalConfig, seed: int, lime: bool,
               anchors: bool) -> OntologyTextExplainer:
    return OntologyTextExplainer(
        ontology=ontology, gamma=config.gamma, samples=config.samples,
        sigma=config.sigma, threshold=config.threshold, top_k=config.select_k,
        ridge=config.ridge, seed=seed, lime_mode=lime, use_anchors=anchors)


def _deletion_full(res: ExplanationResult, top_k: int) -> list[int]:
    ids: set[int] = set()
    for e in res.explanations:
        if e.rank <= top_k:
            ids.update(range(e.token_start, e.token_stop + 1))
    return sorted(ids)


def _deletion_words(res: ExplanationResult, budget: int) -> list[int]:
    if budget <= 0:
        return []
    g = res.surrogate
    raw = g.raw_coefficients
    order = sorted(range(len(g.units)),
                   key=lambda j: (-g.coefficients[j], -raw[j], j))
    ids: list[int] = []
    for j in order:
        if len(ids) >= budget:
            break
        ids.extend(g.units[j].token_ids)
    return sorted(ids[:budget])


def _deletion_triplex(res: ExplanationResult, trips: Sequence[Triplex],
                      model: TextModel, top_k: int) -> list[int]:
    scored = []
    for t in trips:
        span_ids = sorted({i for sp in t.spans for i in sp.token_ids()})
        ic = importance_score(res.doc, span_ids, model, res.surrogate)
        scored.append((ic, span_ids))
    scored.sort(key=lambda x: (-x[0], x[1]))
    return sorted({i for _, span_ids in scored[:top_k] for i in span_ids})


def run_eval(texts: Sequence[str], labels: Sequence[str], model: TextModel,
             ontology: Ontology | None, config: EvalConfig | None = None,
             triplexes: dict[str, list[Triplex]] | None = None) -> EvalReport:
    """Evaluate every configured variant over the corpus.

    `triplexes` maps doc ids (the stringified corpus index) to
    confidence-filtered triplex lists.  Per-document work is seeded with
    config.seed + index, so reports are reproducible end to end.
    """
    texts, labels = check_corpus(texts, labels)
    config = config or EvalConfig()
    if triplexes is None:
        triplexes = {}
    label_set = set(model.class_labels)
    foreign = sorted(set(labels) - label_set)
    if foreign:
        raise DegenerateInputError(
            f"corpus labels {foreign} unknown to the model (knows {sorted(label_set)})")

    per_doc = []
    correct_orig = 0
    variant_correct = {v: 0 for v in config.variants}
    variant_ic = {v: 0.0 for v in config.variants}

    for i, (text, gold) in enumerate(zip(texts, labels)):
        doc_id = str(i)
        doc_seed = config.seed + i
        doc_trips = triplexes.get(doc_id, [])

        res_full = _explainer(ontology, config, doc_seed, False,
                              config.use_anchors).explain(model, text, doc_trips)
        res_words = _explainer(None, config, doc_seed, True, False).explain(model, text)
        if doc_trips:
            res_onto = _explainer(ontology, config, doc_seed, False,
                                  config.use_anchors).explain(model, text, [])
        else:
            res_onto = res_full

        original_label = res_full.target_label
        if original_label == gold:
            correct_orig += 1

        full_ids = _deletion_full(res_full, config.top_k)
        record: dict = {
            "doc_id": doc_id, "label": gold, "text": text,
            "original_label": original_label,
            "original_score": res_full.original_scores.scores[res_full.target_class],
            "variants": {},
        }
        for variant in config.variants:
            if variant == "full":
                res, ids = res_full, full_ids
            elif variant == "words":
                res, ids = res_words, _deletion_words(res_words, len(full_ids))
            elif variant == "ontology":
                res, ids = res_onto, _deletion_full(res_onto, config.top_k)
            else:
                res = res_words
                ids = _deletion_triplex(res_words, res_full.triplexes,
                                        model, config.top_k)
            if ids:
                ic = importance_score(res.doc, ids, model, res.surrogate)
                updated_text = delete_tokens(res.doc, ids)
                updated = model.predict_one(updated_text)
                updated_label = updated.predicted_label
                updated_score = updated.scores[res.surrogate.target_class]
            else:
                ic = 0.0
                updated_label = original_label
                updated_score = record["original_score"]
            if updated_label == gold:
                variant_correct[variant] += 1
            variant_ic[variant] += ic
            record["variants"][variant] = {
                "deleted_token_ids": ids,
                "deleted_words": [res.doc.tokens[j].surface for j in ids],
                "deleted_char_spans": [list(res.doc.tokens[j].char_span) for j in ids],
                "updated_label": updated_label,
                "updated_score": updated_score,
                "ic": ic,
            }
        per_doc.append(record)

    n = len(texts)
    original_accuracy = correct_orig / n
    aggregates = {}
    for v in config.variants:
        ac = original_accuracy - variant_correct[v] / n
        sc = variant_ic[v] / n
        aggregates[v] = {"ac": ac, "ac_pct": 100.0 * ac,
                         "sc": sc, "sc_x100": 100.0 * sc}
    return EvalReport(data={
        "config": config.as_dict(),
        "n_docs": n,
        "original_accuracy": original_accuracy,
        "aggregates": aggregates,
        "per_doc": per_doc,
    })


def _render_table(report: EvalReport) -> str:
    rows = [f"{'variant':<10} {'AC%':>8} {'SC':>12} {'SC x100':>10}"]
    rows.append("-" * len(rows[0]))
    for v, agg in sorted(report.aggregates.items()):
        rows.append(f"{v:<10} {agg['ac_pct']:>8.2f} {agg['sc']:>12.6f} "
                    f"{agg['sc_x100']:>10.2f}")
    rows.append("")
    rows.append(f"docs: {report.data['n_docs']}   "
                f"original accuracy: {report.data['original_accuracy']:.4f}")
    return "\n".join(rows) + "\n"


def _render_html(report: EvalReport) -> str:
    esc = html_mod.escape
    out = ["<!doctype html>", "<html><head><meta charset='utf-8'>",
           "<title>deletion evaluation</title>",
           "<style>body{font-family:sans-serif;max-width:60em;margin:2em auto}"
           "mark{background:#ffd54d}table{border-collapse:collapse}"
           "td,th{border:1px solid #999;padding:0.3em 0.8em}"
           "details{margin:0.6em 0}</style></head><body>",
           "<h1>Word-deletion evaluation</h1>", "<table><tr><th>variant</th>"
           "<th>AC%</th><th>SC</th><th>SC&times;100</th></tr>"]
    for v, agg in sorted(report.aggregates.items()):
        out.append(f"<tr><td>{esc(v)}</td><td>{agg['ac_pct']:.2f}</td>"
                   f"<td>{agg['sc']:.6f}</td><td>{agg['sc_x100']:.2f}</td></tr>")
    out.append("</table>")
    for rec in report.per_doc:
        out.append(f"<details><summary>doc {esc(rec['doc_id'])} "
                   f"(label {esc(rec['label'])}, predicted "
                   f"{esc(rec['original_label'])})</summary>")
        for v, vr in sorted(rec["variants"].items()):
            spans = [tuple(sp) for sp in vr["deleted_char_spans"]]
            out.append(f"<p><b>{esc(v)}</b> (IC {vr['ic']:.6f}, after deletion: "
                       f"{esc(vr['updated_label'])})<br>")
            text = rec["text"]
            cursor = 0
            parts = []
            for a, b in spans:
                parts.append(esc(text[cursor:a]))
                parts.append(f"<mark>{esc(text[a:b])}</mark>")
                cursor = b
            parts.append(esc(text[cursor:]))
            out.append("".join(parts) + "</p>")
        out.append("</details>")
    out.append("</body></html>")
    return "\n".join(out) + "\n"


def emit_report(report: EvalReport, format: str, out_path: str | Path) -> Path:
    """Write the report in the requested format; returns the path written."""
    out_path = Path(out_path)
    if format == "structured":
        content = report.to_json()
    elif format == "table":
        content = _render_table(report)
    elif format == "html":
        content = _render_html(report)
    else:
        raise ValueError(f"unknown format {format!r}; "
                         "choose structured, table, or html")
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text(content, "utf-8")
    return out_path


def load_report(path: str | Path) -> EvalReport:
    return EvalReport.from_json(Path(path).read_text("utf-8"))
