import random

import pytest

from ontoexplain import (DEFAULT_SEEDS, FormatError, build_units,
                         learn_anchors, load_seeds, tokenize)

from .conftest import flat_surrogate, surrogate_for
from .oracles import exhaustive_best_anchor, importance_by_hand

SEED_SUBSET = ("not", "no", "without")


class TestLearnAnchors:
    def test_matches_exhaustive_search(self, singles_model, stop):
        fillers = ["table", "window", "garden", "river", "cloud", "paper",
                   "street", "corner", "sparrow", "walnut"]
        rng = random.Random(42)
        checked = 0
        for trial in range(40):
            words = [rng.choice(fillers) for _ in range(rng.randint(4, 7))]
            for _ in range(rng.randint(1, 2)):
                words.insert(rng.randrange(len(words) + 1),
                             rng.choice(SEED_SUBSET))
            doc = tokenize(" ".join(words) + ".", stop)
            g = surrogate_for(doc, singles_model, seed=trial)
            anchors = learn_anchors(doc, SEED_SUBSET, singles_model, g)
            assert len(anchors) == 1
            got = anchors[0]
            (start, stop_), score = exhaustive_best_anchor(
                doc, 0, SEED_SUBSET,
                lambda a, b: importance_by_hand(doc, range(a, b),
                                                singles_model, g))
            assert (got.span.start, got.span.stop) == (start, stop_)
            assert got.score == pytest.approx(score, abs=1e-12)
            checked += 1
        assert checked == 40

    def test_no_seed_no_anchor(self, singles_model, stop):
        doc = tokenize("table by the window.", stop)
        g = surrogate_for(doc, singles_model)
        assert learn_anchors(doc, SEED_SUBSET, singles_model, g) == []

    def test_one_anchor_per_sentence(self, singles_model, stop):
        doc = tokenize("not a sparrow here. without the walnut table.", stop)
        g = surrogate_for(doc, singles_model)
        anchors = learn_anchors(doc, SEED_SUBSET, singles_model, g)
        assert [a.sent_idx for a in anchors] == [0, 1]

    def test_bare_seed_sentence(self, singles_model):
        doc = tokenize("No.")
        units = build_units(doc, [])
        g = flat_surrogate(units)
        anchors = learn_anchors(doc, ("no",), singles_model, g)
        assert len(anchors) == 1
        assert anchors[0].span.phrase == "no"
        assert anchors[0].text_in(doc) == "No"

    def test_all_ties_keep_earliest_shortest(self, singles_model, stop):
        doc = tokenize("table not window no corner.", stop)
        units = build_units(doc, [])
        g = flat_surrogate(units)
        anchors = learn_anchors(doc, SEED_SUBSET, singles_model, g)
        assert len(anchors) == 1
        span = anchors[0].span
        # every candidate scores 0, so the first scanned candidate wins:
        # earliest seed, seed-length span
        assert (span.start, span.stop) == (1, 2)
        assert span.phrase == "not"
        assert anchors[0].score == 0.0

    def test_multiword_seed(self, singles_model, stop):
        doc = tokenize("sparrow not good today.", stop)
        units = build_units(doc, [])
        g = flat_surrogate(units)
        anchors = learn_anchors(doc, ("not good",), singles_model, g)
        assert len(anchors) == 1
        # candidates start at the full seed, never inside it
        assert anchors[0].span.start == 1
        assert anchors[0].span.stop >= 3

    def test_seed_normalization(self, singles_model, stop):
        doc = tokenize("not here.", stop)
        units = build_units(doc, [])
        g = flat_surrogate(units)
        a = learn_anchors(doc, ("NOT",), singles_model, g)
        b = learn_anchors(doc, ("not",), singles_model, g)
        assert a == b

    def test_empty_seed_list_rejected(self, singles_model, stop):
        doc = tokenize("not here.", stop)
        g = flat_surrogate(build_units(doc, []))
        with pytest.raises(ValueError):
            learn_anchors(doc, (), singles_model, g)

    def test_text_in_is_verbatim(self, singles_model, stop):
        doc = tokenize("Not THE sparrow, window!", stop)
        units = build_units(doc, [])
        g = flat_surrogate(units)
        anchors = learn_anchors(doc, ("not",), singles_model, g)
        assert anchors[0].text_in(doc) == "Not"


class TestSeedFiles:
    def test_packaged_defaults(self):
        assert tuple(load_seeds()) == DEFAULT_SEEDS

    def test_custom_file(self, tmp_path):
        p = tmp_path / "seeds.txt"
        p.write_text("# negation\nnot\nnever again\n")
        assert load_seeds(p) == ["not", "never again"]

    def test_empty_file_rejected(self, tmp_path):
        p = tmp_path / "seeds.txt"
        p.write_text("# nothing\n\n")
        with pytest.raises(FormatError):
            load_seeds(p)
