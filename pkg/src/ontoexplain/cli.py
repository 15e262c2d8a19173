"""Command-line interface.

Subcommands: train, explain, tuples, eval, ontology validate,
convert-ontology.  A JSON config file (via --config or the
ONTOEXPLAIN_CONFIG environment variable) can pre-set any flag, keyed by
subcommand name; explicit flags always win.
"""

from __future__ import annotations

import json
import shlex
import sys
from pathlib import Path

import click

from .anchors import load_seeds
from .blackbox import ExternalProcessModel, TfidfTextClassifier, train_builtin
from .errors import OntoExplainError
from .evaluate import VARIANTS, EvalConfig, emit_report, run_eval
from .explainer import OntologyTextExplainer
from .ontology import convert_csv, load_ontology, save_ontology
from .textproc import load_stopwords, tokenize
from .triplex import load_triplexes
from .tuples import extract_tuples


def _fail(exc: Exception) -> None:
    raise click.ClickException(str(exc))


def _read_corpus(path: str) -> tuple[list[str], list[str]]:
    """JSONL corpus: one {"text": ..., "label": ...} object per line."""
    texts, labels = [], []
    for lineno, raw in enumerate(Path(path).read_text("utf-8").splitlines(), start=1):
        if not raw.strip():
            continue
        try:
            rec = json.loads(raw)
            texts.append(str(rec["text"]))
            labels.append(str(rec["label"]))
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise click.ClickException(f"{path}:{lineno}: bad corpus record ({exc})")
    return texts, labels


def _load_model(model_path: str | None, adapter: str | None):
    if (model_path is None) == (adapter is None):
        raise click.ClickException("provide exactly one of --model or --adapter")
    if model_path is not None:
        return TfidfTextClassifier.load(model_path)
    return ExternalProcessModel(shlex.split(adapter))


def _read_text_arg(text: str | None, file: str | None) -> str:
    if (text is None) == (file is None):
        raise click.ClickException("provide exactly one of --text or --file")
    if text is not None:
        return text
    if file == "-":
        return sys.stdin.read()
    return Path(file).read_text("utf-8")


def _resolve_seed(ctx: click.Context, seed: int | None) -> int:
    if seed is not None:
        return seed
    group_seed = (ctx.obj or {}).get("seed")
    return group_seed if group_seed is not None else 0


@click.group()
@click.option("--seed", type=int, default=None,
              help="Default seed for subcommands that accept one.")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              envvar="ONTOEXPLAIN_CONFIG",
              help="JSON config file; keys are subcommand names mapping to flag defaults.")
@click.pass_context
def main(ctx: click.Context, seed: int | None, config_path: str | None) -> None:
    """Ontology-guided local explanations for text classifiers."""
    ctx.obj = {"seed": seed}
    if config_path:
        try:
            defaults = json.loads(Path(config_path).read_text("utf-8"))
        except json.JSONDecodeError as exc:
            raise click.ClickException(f"{config_path}: not valid JSON ({exc})")
        if not isinstance(defaults, dict):
            raise click.ClickException(f"{config_path}: config must be a JSON object")
        if "seed" in defaults and seed is None:
            ctx.obj["seed"] = defaults["seed"]
        ctx.default_map = {k: v for k, v in defaults.items() if isinstance(v, dict)}


@main.command()
@click.option("--corpus", "corpus_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="JSONL corpus of {'text':, 'label':} records.")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False),
              help="Where to write the trained model (JSON).")
@click.option("--learning-rate", type=float, default=1.0, show_default=True)
@click.option("--epochs", type=int, default=300, show_default=True)
@click.option("--l2", type=float, default=1e-4, show_default=True)
@click.option("--min-df", type=int, default=1, show_default=True)
def train(corpus_path: str, out_path: str, learning_rate: float, epochs: int,
          l2: float, min_df: int) -> None:
    """Train the built-in TF-IDF classifier on a labeled corpus."""
    texts, labels = _read_corpus(corpus_path)
    try:
        model = train_builtin(texts, labels, learning_rate=learning_rate,
                              epochs=epochs, l2=l2, min_df=min_df)
    except (OntoExplainError, ValueError) as exc:
        _fail(exc)
    model.save(out_path)
    acc = sum(p == l for p, l in zip(model.predict(texts), labels)) / len(labels)
    click.echo(f"trained on {len(texts)} docs, {len(model.classes_)} classes; "
               f"training accuracy {acc:.4f}")
    click.echo(f"model written to {out_path}")


@main.command()
@click.option("--model", "model_path", type=click.Path(exists=True, dir_okay=False),
              help="Built-in model file from `train`.")
@click.option("--adapter", help="Command line of an external model process.")
@click.option("--ontology", "ontology_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--text", help="Document to explain.")
@click.option("--file", "file_path", help="Read the document from this file ('-' = stdin).")
@click.option("--triplexes", "triplex_path", type=click.Path(exists=True, dir_okay=False),
              help="Triplex JSONL file.")
@click.option("--doc-id", default=None,
              help="Use only triplexes with this doc_id (default: all in the file).")
@click.option("--min-confidence", type=float, default=0.7, show_default=True)
@click.option("--samples", type=int, default=1000, show_default=True)
@click.option("--sigma", type=float, default=0.25, show_default=True)
@click.option("--threshold", type=float, default=0.5, show_default=True)
@click.option("--gamma", type=float, default=3, show_default=True)
@click.option("--top-k", type=int, default=5, show_default=True,
              help="Units kept in the surrogate refit.")
@click.option("--ridge", type=float, default=1e-3, show_default=True)
@click.option("--seed", type=int, default=None)
@click.option("--lime-mode", is_flag=True, help="Independent-word sampling, no ontology.")
@click.option("--anchors-file", type=click.Path(exists=True, dir_okay=False),
              help="Anchor seed phrases, one per line.")
@click.option("--no-anchors", is_flag=True, help="Skip anchor learning.")
@click.option("--stopwords", "stopwords_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--json", "as_json", is_flag=True, help="Emit the full result as JSON.")
@click.pass_context
def explain(ctx, model_path, adapter, ontology_path, text, file_path, triplex_path,
            doc_id, min_confidence, samples, sigma, threshold, gamma, top_k,
            ridge, seed, lime_mode, anchors_file, no_anchors, stopwords_path,
            as_json) -> None:
    """Explain one prediction of a classifier."""
    doc_text = _read_text_arg(text, file_path)
    model = _load_model(model_path, adapter)
    try:
        ontology = load_ontology(ontology_path) if ontology_path else None
        seeds = load_seeds(anchors_file) if anchors_file else None
        stop = sorted(load_stopwords(stopwords_path)) if stopwords_path else None
        trips = []
        if triplex_path:
            by_doc = load_triplexes(triplex_path, min_confidence)
            if doc_id is not None:
                trips = by_doc.get(doc_id, [])
            else:
                trips = [t for lst in by_doc.values() for t in lst]
        explainer = OntologyTextExplainer(
            ontology=ontology, gamma=gamma, samples=samples, sigma=sigma,
            threshold=threshold, top_k=top_k, ridge=ridge,
            seed=_resolve_seed(ctx, seed), lime_mode=lime_mode,
            use_anchors=not no_anchors, anchor_seeds=seeds, stopwords=stop)
        res = explainer.explain(model, doc_text, trips)
    except (OntoExplainError, ValueError, KeyError) as exc:
        _fail(exc)
    finally:
        if isinstance(model, ExternalProcessModel):
            model.close()

    if as_json:
        click.echo(json.dumps(res.to_dict(), sort_keys=True, indent=2))
        return
    click.echo(f"predicted: {res.target_label} "
               f"({res.original_scores.scores[res.target_class]:.4f})")
    if res.tuples:
        click.echo("tuples:")
        for t in res.tuples:
            click.echo(f"  s{t.first.sent_idx}: ({t.first.phrase}, {t.second.phrase})"
                       f"  {t.source_concept}->{t.target_concept}  distance {t.distance:g}")
    if res.onto_explanations:
        click.echo("ontology explanations:")
        for oe in res.onto_explanations:
            click.echo(f"  s{oe.sent_idx}: {{{', '.join(oe.word_list())}}}")
    if res.anchors:
        click.echo("anchors:")
        for a in res.anchors:
            click.echo(f"  s{a.sent_idx}: \"{a.text_in(res.doc)}\" (score {a.score:.6f})")
    if res.triplexes:
        click.echo("triplexes:")
        for t in res.triplexes:
            click.echo(f"  s{t.sent_idx}: ({t.subject}; {t.predicate}; {t.obj})"
                       f" conf {t.confidence:g}")
    if res.explanations:
        click.echo("explanations:")
        for e in res.explanations:
            click.echo(f"  {e.rank}. [s{e.sent_idx}] \"{e.text}\" (score {e.score:.6f})")
    click.echo("important units:")
    for label, coef in res.important_words():
        click.echo(f"  {coef:+.6f}  {label}")


@main.command()
@click.option("--ontology", "ontology_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--text", help="Document to scan.")
@click.option("--file", "file_path", help="Read the document from this file ('-' = stdin).")
@click.option("--gamma", type=float, default=3, show_default=True)
@click.option("--stopwords", "stopwords_path", type=click.Path(exists=True, dir_okay=False))
def tuples(ontology_path, text, file_path, gamma, stopwords_path) -> None:
    """List the ontology-based tuples found in a document."""
    doc_text = _read_text_arg(text, file_path)
    try:
        ontology = load_ontology(ontology_path)
        stop = load_stopwords(stopwords_path)
        doc = tokenize(doc_text, stop)
        found = extract_tuples(doc, ontology, gamma)
    except (OntoExplainError, ValueError) as exc:
        _fail(exc)
    if not found:
        click.echo("no tuples found")
        return
    for t in found:
        click.echo(f"s{t.first.sent_idx}: ({t.first.phrase}, {t.second.phrase})"
                   f"  {t.source_concept}->{t.target_concept}  distance {t.distance:g}")


@main.command("eval")
@click.option("--corpus", "corpus_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--model", "model_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--adapter", help="Command line of an external model process.")
@click.option("--ontology", "ontology_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--triplexes", "triplex_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--min-confidence", type=float, default=0.7, show_default=True)
@click.option("--top-k", type=int, default=1, show_default=True,
              help="Explanations deleted per document.")
@click.option("--variants", multiple=True, type=click.Choice(VARIANTS),
              help="Variants to evaluate (default: all).")
@click.option("--samples", type=int, default=300, show_default=True)
@click.option("--sigma", type=float, default=0.25, show_default=True)
@click.option("--threshold", type=float, default=0.5, show_default=True)
@click.option("--gamma", type=float, default=3, show_default=True)
@click.option("--select-k", type=int, default=5, show_default=True,
              help="Units kept in each surrogate refit.")
@click.option("--ridge", type=float, default=1e-3, show_default=True)
@click.option("--use-anchors", is_flag=True, help="Learn anchors inside the eval variants.")
@click.option("--seed", type=int, default=None)
@click.option("--format", "formats", multiple=True,
              type=click.Choice(["structured", "table", "html"]),
              help="Output formats (default: table to stdout).")
@click.option("--out", "out_dir", type=click.Path(file_okay=False),
              help="Directory for report files (required for structured/html).")
@click.pass_context
def eval_cmd(ctx, corpus_path, model_path, adapter, ontology_path, triplex_path,
             min_confidence, top_k, variants, samples, sigma, threshold, gamma,
             select_k, ridge, use_anchors, seed, formats, out_dir) -> None:
    """Run the word-deletion evaluation over a labeled corpus."""
    texts, labels = _read_corpus(corpus_path)
    model = _load_model(model_path, adapter)
    try:
        ontology = load_ontology(ontology_path) if ontology_path else None
        trips = load_triplexes(triplex_path, min_confidence) if triplex_path else None
        config = EvalConfig(
            top_k=top_k, variants=tuple(variants) or VARIANTS,
            seed=_resolve_seed(ctx, seed), gamma=gamma, samples=samples,
            sigma=sigma, threshold=threshold, select_k=select_k, ridge=ridge,
            use_anchors=use_anchors, min_confidence=min_confidence)
        report = run_eval(texts, labels, model, ontology, config, trips)
    except (OntoExplainError, ValueError) as exc:
        _fail(exc)
    finally:
        if isinstance(model, ExternalProcessModel):
            model.close()

    formats = formats or ("table",)
    ext = {"structured": "json", "table": "txt", "html": "html"}
    for fmt in formats:
        if out_dir is None:
            if fmt == "table":
                from .evaluate import _render_table
                click.echo(_render_table(report), nl=False)
                continue
            raise click.ClickException(f"--out is required for format {fmt!r}")
        path = emit_report(report, fmt, Path(out_dir) / f"report.{ext[fmt]}")
        click.echo(f"wrote {path}")


@main.group()
def ontology() -> None:
    """Ontology file utilities."""


@ontology.command("validate")
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
def ontology_validate(path: str) -> None:
    """Parse and validate an ontology file."""
    try:
        ont = load_ontology(path)
    except OntoExplainError as exc:
        _fail(exc)
    click.echo(f"ok: {ont.name}: {len(ont.concepts)} concepts, "
               f"{ont.term_count()} terms, {len(ont.relations)} relations")


@main.command("convert-ontology")
@click.option("--concepts", "concepts_csv", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="CSV with columns id,label,term (one row per term).")
@click.option("--relations", "relations_csv", type=click.Path(exists=True, dir_okay=False),
              help="CSV with columns source,label,target.")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--name", default="converted", show_default=True)
def convert_ontology(concepts_csv, relations_csv, out_path, name) -> None:
    """Convert exported concept/relation CSVs into an ontology file."""
    try:
        ont = convert_csv(concepts_csv, relations_csv, name=name)
    except OntoExplainError as exc:
        _fail(exc)
    save_ontology(ont, out_path)
    click.echo(f"wrote {out_path}: {len(ont.concepts)} concepts, "
               f"{ont.term_count()} terms, {len(ont.relations)} relations")


if __name__ == "__main__":
    main()
