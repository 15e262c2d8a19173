"""Synthetic corpora with known structure, for tests and the eval demo.

Two generators:

* `make_singles_corpus` plants single class keywords, yielding a corpus
  any bag-of-words classifier separates almost perfectly.
* `make_pairs_corpus` plants co-occurring keyword PAIRS: a document is
  positive only when both members appear side by side in one sentence,
  while negatives carry exactly one member.  Single-word evidence is
  therefore ambiguous by construction, and the companion ontology (one
  concept per pair side, one relation) is what lets tuple fusion see
  the pair as a single explanatory element.

Everything is driven by one integer seed and is fully deterministic.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .ontology import Concept, Ontology, Relation

_FILLERS = (
    "table window garden river mountain cloud paper bottle street lamp "
    "market corner bridge station bakery library museum harbor meadow "
    "forest valley island castle tower mirror carpet blanket pillow "
    "kettle spoon ladder hammer pencil folder basket candle curtain "
    "drawer shelf cabinet doormat fence gate pathway tunnel archway "
    "fountain statue bench kiosk tram ferry wagon trolley scooter "
    "helmet jacket scarf glove pocket button zipper collar sleeve"
).split()

_POS_SINGLES = "sparrow falcon heron osprey kestrel".split()
_NEG_SINGLES = "walnut almond hazel pecan chestnut".split()

_PAIR_FIRSTS = "ember frost quartz cedar raven lotus".split()
_PAIR_SECONDS = "glow chill shard grove wing bloom".split()


@dataclass(frozen=True)
class SyntheticCorpus:
    texts: tuple[str, ...]
    labels: tuple[str, ...]
    ontology: Ontology | None = None
    positive_label: str = "pos"


def _sentence(rng: random.Random, words: list[str]) -> str:
    return " ".join(words) + "."


def _filler_words(rng: random.Random, n: int) -> list[str]:
    return [rng.choice(_FILLERS) for _ in range(n)]


def make_singles_corpus(n: int = 200, seed: int = 0) -> SyntheticCorpus:
    """Separable-by-construction corpus: one planted keyword decides."""
    rng = random.Random(seed)
    texts, labels = [], []
    for i in range(n):
        label = "pos" if i % 2 == 0 else "neg"
        pool = _POS_SINGLES if label == "pos" else _NEG_SINGLES
        sentences = []
        planted = rng.randint(0, 1)
        for s in range(2):
            words = _filler_words(rng, rng.randint(4, 7))
            if s == planted or rng.random() < 0.3:
                words.insert(rng.randrange(len(words) + 1), rng.choice(pool))
            sentences.append(_sentence(rng, words))
        texts.append(" ".join(sentences))
        labels.append(label)
    return SyntheticCorpus(texts=tuple(texts), labels=tuple(labels))


def pair_ontology() -> Ontology:
    """Ontology matching the pairs corpus: trigger words point at effect words."""
    return Ontology(
        name="planted-pairs",
        concepts={
            "trigger": Concept(id="trigger", label="Trigger",
                               terms=frozenset(_PAIR_FIRSTS)),
            "effect": Concept(id="effect", label="Effect",
                              terms=frozenset(_PAIR_SECONDS)),
        },
        relations=frozenset({Relation(source="trigger", label="produces",
                                      target="effect")}),
    )


def make_pairs_corpus(n: int = 400, seed: int = 0) -> SyntheticCorpus:
    """Corpus where only an adjacent keyword pair makes a doc positive.

    Positive docs embed "first second" for one of the planted pairs in a
    random sentence; negative docs carry exactly one member of a pair.
    Each pair index is used evenly so no single word separates the
    classes on its own.
    """
    rng = random.Random(seed)
    texts, labels = [], []
    for i in range(n):
        label = "pos" if i % 2 == 0 else "neg"
        pair = i // 2 % len(_PAIR_FIRSTS)
        n_sent = rng.randint(2, 3)
        target_sent = rng.randrange(n_sent)
        sentences = []
        for s in range(n_sent):
            words = _filler_words(rng, rng.randint(5, 8))
            if s == target_sent:
                at = rng.randrange(len(words) + 1)
                if label == "pos":
                    words[at:at] = [_PAIR_FIRSTS[pair], _PAIR_SECONDS[pair]]
                else:
                    member = _PAIR_FIRSTS[pair] if rng.random() < 0.5 else _PAIR_SECONDS[pair]
                    words.insert(at, member)
            sentences.append(_sentence(rng, words))
        texts.append(" ".join(sentences))
        labels.append(label)
    return SyntheticCorpus(texts=tuple(texts), labels=tuple(labels),
                           ontology=pair_ontology(), positive_label="pos")
