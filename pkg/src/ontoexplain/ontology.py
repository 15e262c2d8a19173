"""Domain ontologies: directed concept graphs with term lexicons.

The on-disk format is a small structured-text schema (see `parse_ontology`
docstring and the README).  Ontologies are immutable after load and safe
to share across threads.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

from .errors import FormatError, OntologyValidationError


@dataclass(frozen=True)
class Concept:
    id: str
    label: str
    terms: frozenset[str]


@dataclass(frozen=True)
class Relation:
    source: str
    label: str
    target: str


@dataclass(frozen=True)
class Ontology:
    name: str
    concepts: dict[str, Concept]
    relations: frozenset[Relation]
    meta: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        # the name rides in meta so it survives save/load under any
        # filename; the field stays canonical on conflict
        if self.meta.get("name") != self.name:
            object.__setattr__(self, "meta", {**self.meta, "name": self.name})
        index: dict[str, set[str]] = {}
        for c in self.concepts.values():
            for t in c.terms:
                index.setdefault(t, set()).add(c.id)
        object.__setattr__(self, "_term_index",
                           {t: frozenset(ids) for t, ids in index.items()})
        object.__setattr__(self, "_edges",
                           frozenset((r.source, r.target) for r in self.relations))
        object.__setattr__(self, "max_term_tokens",
                           max((t.count(" ") + 1 for t in self._term_index), default=0))

    def concepts_of_term(self, phrase: str) -> frozenset[str]:
        """Ids of every concept whose lexicon contains `phrase` exactly."""
        return self._term_index.get(phrase, frozenset())

    def has_edge(self, a: str, b: str) -> bool:
        """True iff a directed relation a↦b is declared.  Asymmetric."""
        for cid in (a, b):
            if cid not in self.concepts:
                raise KeyError(f"unknown concept id: {cid!r}")
        return (a, b) in self._edges

    def term_count(self) -> int:
        return sum(len(c.terms) for c in self.concepts.values())

    def __eq__(self, other):
        if not isinstance(other, Ontology):
            return NotImplemented
        return (self.name == other.name
                and self.concepts == other.concepts
                and self.relations == other.relations
                and self.meta == other.meta)


def _check(ont: Ontology, path: str) -> None:
    problems = []
    for cid, c in ont.concepts.items():
        if not c.terms:
            problems.append(f"concept {cid!r} has an empty lexicon")
        if any(t != t.strip() or not t for t in c.terms):
            problems.append(f"concept {cid!r} has a blank or unstripped term")
    declared = set(ont.concepts)
    for r in ont.relations:
        for endpoint in (r.source, r.target):
            if endpoint not in declared:
                problems.append(
                    f"relation {r.source!r} -> {r.target!r} references "
                    f"undeclared concept id {endpoint!r}")
    if problems:
        raise OntologyValidationError(
            f"{path}: " + "; ".join(sorted(problems)))


def parse_ontology(text: str, name: str = "ontology", path: str = "<string>") -> Ontology:
    """Parse the structured-text ontology format.

    Three sections, each introduced by a bracketed header line:

        [concepts]
        id|label|term1;term2;...
        [relations]
        source_id|label|target_id
        [meta]
        key=value

    `#` starts a comment.  Terms are lowercased and stripped.  Relations
    may only reference declared concepts, concept ids must be unique, and
    every concept needs at least one term.
    """
    concepts: dict[str, Concept] = {}
    relations: set[Relation] = set()
    meta: dict[str, str] = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip().lower()
            if section not in ("concepts", "relations", "meta"):
                raise FormatError(f"unknown section [{section}]", path=path, line=lineno)
            continue
        if section is None:
            raise FormatError("content before any section header", path=path, line=lineno)
        if section == "concepts":
            parts = [p.strip() for p in line.split("|")]
            if len(parts) != 3:
                raise FormatError("expected id|label|term1;term2;...", path=path, line=lineno)
            cid, label, terms_field = parts
            if not cid:
                raise FormatError("empty concept id", path=path, line=lineno)
            if cid in concepts:
                raise FormatError(f"duplicate concept id {cid!r}", path=path, line=lineno)
            terms = frozenset(t.strip().lower() for t in terms_field.split(";") if t.strip())
            concepts[cid] = Concept(id=cid, label=label or cid, terms=terms)
        elif section == "relations":
            parts = [p.strip() for p in line.split("|")]
            if len(parts) != 3:
                raise FormatError("expected source_id|label|target_id", path=path, line=lineno)
            src, label, dst = parts
            if not src or not dst:
                raise FormatError("empty relation endpoint", path=path, line=lineno)
            relations.add(Relation(source=src, label=label, target=dst))
        else:
            key, sep, value = line.partition("=")
            if not sep or not key.strip():
                raise FormatError("expected key=value", path=path, line=lineno)
            meta[key.strip()] = value.strip()
    ont = Ontology(name=meta.get("name", name), concepts=concepts,
                   relations=frozenset(relations), meta=meta)
    _check(ont, path)
    return ont


def load_ontology(path: str | Path) -> Ontology:
    p = Path(path)
    return parse_ontology(p.read_text("utf-8"), name=p.stem, path=str(p))


def save_ontology(ont: Ontology, path: str | Path) -> None:
    """Write the format back out; load(save(o)) reproduces o exactly."""
    lines = ["[concepts]"]
    for cid in sorted(ont.concepts):
        c = ont.concepts[cid]
        lines.append(f"{c.id}|{c.label}|{';'.join(sorted(c.terms))}")
    lines.append("")
    lines.append("[relations]")
    for r in sorted(ont.relations, key=lambda r: (r.source, r.target, r.label)):
        lines.append(f"{r.source}|{r.label}|{r.target}")
    if ont.meta:
        lines.append("")
        lines.append("[meta]")
        for k in sorted(ont.meta):
            lines.append(f"{k}={ont.meta[k]}")
    Path(path).write_text("\n".join(lines) + "\n", "utf-8")


def convert_csv(concepts_csv: str | Path, relations_csv: str | Path | None,
                name: str = "converted") -> Ontology:
    """Build an ontology from exported CSVs.

    concepts CSV columns: id, label, term (one row per term; label may
    repeat).  relations CSV columns: source, label, target.
    """
    acc: dict[str, tuple[str, set[str]]] = {}
    cpath = str(concepts_csv)
    with open(concepts_csv, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        required = {"id", "label", "term"}
        if reader.fieldnames is None or not required <= set(reader.fieldnames):
            raise FormatError(f"concept CSV needs columns {sorted(required)}", path=cpath, line=1)
        for lineno, row in enumerate(reader, start=2):
            cid = (row["id"] or "").strip()
            if not cid:
                raise FormatError("empty concept id", path=cpath, line=lineno)
            label = (row["label"] or "").strip() or cid
            entry = acc.setdefault(cid, (label, set()))
            term = (row["term"] or "").strip().lower()
            if term:
                entry[1].add(term)
    relations: set[Relation] = set()
    if relations_csv is not None:
        rpath = str(relations_csv)
        with open(relations_csv, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            required = {"source", "label", "target"}
            if reader.fieldnames is None or not required <= set(reader.fieldnames):
                raise FormatError(f"relation CSV needs columns {sorted(required)}", path=rpath, line=1)
            for lineno, row in enumerate(reader, start=2):
                src = (row["source"] or "").strip()
                dst = (row["target"] or "").strip()
                if not src or not dst:
                    raise FormatError("empty relation endpoint", path=rpath, line=lineno)
                relations.add(Relation(source=src, label=(row["label"] or "").strip(), target=dst))
    ont = Ontology(
        name=name,
        concepts={cid: Concept(id=cid, label=label, terms=frozenset(terms))
                  for cid, (label, terms) in acc.items()},
        relations=frozenset(relations),
    )
    _check(ont, cpath)
    return ont
