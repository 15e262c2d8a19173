import math
import random

import numpy as np
import pytest

from ontoexplain import (DegenerateInputError, Perturbation, ScoreVector,
                         SurrogateModel, UnitSpan, build_units, delete_tokens,
                         evaluate_masks, extract_tuples, fit_surrogate,
                         importance_score, kernel_weight, perturbation_text,
                         sample_perturbations, tokenize, word_norms)

from .conftest import DRUG_TEXT, tiny_ontology
from .oracles import importance_by_hand, ridge_normal_equations


def fake_perturbations(masks, weights, ys):
    """Perturbation records with fabricated scores; target class 1 sees y."""
    out = []
    for m, w, y in zip(masks, weights, ys):
        out.append(Perturbation(
            mask=tuple(int(b) for b in m), text="unused",
            weight=float(w),
            scores=ScoreVector(scores=(1.0 - y, y), labels=("neg", "pos"))))
    return out


def random_fit_problem(rng, n=40, dmax=8):
    d = rng.randint(1, dmax)
    while True:
        masks = [[rng.randint(0, 1) for _ in range(d)] for _ in range(n)]
        masks[0] = [1] * d
        if len({tuple(m) for m in masks}) >= 2:
            break
    weights = [rng.uniform(0.05, 1.0) for _ in range(n)]
    ys = [rng.uniform(0.05, 0.95) for _ in range(n)]
    return d, masks, weights, ys


class TestBuildUnits:
    def test_drug_example_fuses_shared_word(self, drug_ont, stop):
        doc = tokenize(DRUG_TEXT, stop)
        tuples = extract_tuples(doc, drug_ont, 3)
        units = build_units(doc, tuples)
        fused = [u for u in units if u.kind == "tuple"]
        assert len(fused) == 1
        words = {doc.tokens[i].norm for i in fused[0].token_ids}
        assert words == {"smoke", "addiction", "headache"}
        assert len(fused[0].tuples) == 2
        # every other content token is its own word unit
        singles = [u for u in units if u.kind == "word"]
        assert len(singles) == 10
        assert all(len(u.token_ids) == 1 for u in singles)

    def test_no_tuples_gives_singletons(self, stop):
        doc = tokenize("sparrow by the window.", stop)
        units = build_units(doc, [])
        assert [u.label for u in units] == ["sparrow", "window"]
        assert all(u.kind == "word" for u in units)

    def test_chained_tuples_collapse_to_one_unit(self):
        ont = tiny_ontology([("a", "b"), ("b", "c")],
                            a={"ta"}, b={"tb"}, c={"tc"})
        doc = tokenize("ta tb tc.")
        units = build_units(doc, extract_tuples(doc, ont, 5))
        fused = [u for u in units if u.kind == "tuple"]
        assert len(fused) == 1
        assert fused[0].token_ids == (0, 1, 2)

    def test_stopword_inside_span_rides_along(self, stop):
        ont = tiny_ontology([("a", "b")], a={"of weed"}, b={"smoke"})
        doc = tokenize("smoke of weed.", stop)
        tuples = extract_tuples(doc, ont, 5)
        assert len(tuples) == 1
        units = build_units(doc, tuples)
        fused = [u for u in units if u.kind == "tuple"][0]
        # the stopword "of" is not a content token but belongs to the span
        assert fused.token_ids == (0, 1, 2)
        assert units.unit_of_token()[1] == list(units.units).index(fused)

    def test_stopword_only_doc_has_no_units(self, stop):
        doc = tokenize("the of and.", stop)
        assert len(build_units(doc, [])) == 0

    def test_unit_of_token_covers_exactly_unit_tokens(self, drug_ont, stop):
        doc = tokenize(DRUG_TEXT, stop)
        units = build_units(doc, extract_tuples(doc, drug_ont, 3))
        mapping = units.unit_of_token()
        from_units = {tid for u in units for tid in u.token_ids}
        assert set(mapping) == from_units


class TestSampling:
    def test_first_row_all_ones(self):
        doc = tokenize("a b c d e.")
        units = build_units(doc, [])
        masks = sample_perturbations(units, 50, 0.5, seed=3)
        assert masks.shape == (50, 5)
        assert masks.dtype == np.int8
        assert (masks[0] == 1).all()
        assert set(np.unique(masks)) <= {0, 1}

    def test_deterministic_per_seed(self):
        doc = tokenize("a b c d e f.")
        units = build_units(doc, [])
        m1 = sample_perturbations(units, 200, 0.5, seed=11)
        m2 = sample_perturbations(units, 200, 0.5, seed=11)
        m3 = sample_perturbations(units, 200, 0.5, seed=12)
        assert np.array_equal(m1, m2)
        assert not np.array_equal(m1, m3)

    def test_single_sample_is_the_original(self):
        doc = tokenize("a b c.")
        units = build_units(doc, [])
        masks = sample_perturbations(units, 1, 0.9, seed=0)
        assert masks.shape == (1, 3)
        assert (masks == 1).all()

    def test_inclusion_rate_tracks_threshold(self):
        doc = tokenize("a b c d e f g h i j.")
        units = build_units(doc, [])
        for threshold in (0.3, 0.5, 0.7):
            masks = sample_perturbations(units, 10000, threshold, seed=5)
            rate = float(masks[1:].mean())
            assert abs(rate - (1.0 - threshold)) < 0.02

    def test_bad_arguments(self):
        doc = tokenize("a b.")
        units = build_units(doc, [])
        with pytest.raises(ValueError):
            sample_perturbations(units, 0, 0.5, seed=0)
        for bad in (0.0, 1.0, -0.2, 1.3):
            with pytest.raises(ValueError):
                sample_perturbations(units, 10, bad, seed=0)

    def test_tuple_words_move_jointly_in_realized_texts(self, drug_ont, stop):
        doc = tokenize(DRUG_TEXT, stop)
        units = build_units(doc, extract_tuples(doc, drug_ont, 3))
        fused_idx = next(i for i, u in enumerate(units) if u.kind == "tuple")
        fused_words = {"smoke", "addiction", "headache"}
        masks = sample_perturbations(units, 80, 0.5, seed=2)
        for mask in masks:
            present = set(word_norms(perturbation_text(doc, units, mask)))
            if mask[fused_idx]:
                assert fused_words <= present
            else:
                assert not (fused_words & present)


class TestPerturbationText:
    def test_identity_mask(self):
        doc = tokenize("a b c.")
        units = build_units(doc, [])
        assert perturbation_text(doc, units, [1, 1, 1]) == doc.text

    def test_zero_mask_leaves_only_stopwords(self, stop):
        doc = tokenize("the sparrow flew.", stop)
        units = build_units(doc, [])
        assert word_norms(perturbation_text(doc, units, [0] * len(units))) == ["the"]

    def test_mask_length_checked(self):
        doc = tokenize("a b.")
        units = build_units(doc, [])
        with pytest.raises(ValueError):
            perturbation_text(doc, units, [1])


class TestKernel:
    def test_identical_text_weighs_one(self):
        assert kernel_weight("a b c.", "a b c.", 0.25) == pytest.approx(1.0)

    def test_empty_perturbation_pinned_to_max_distance(self):
        sigma = 0.25
        assert kernel_weight("a b.", "", sigma) == \
            pytest.approx(math.exp(-1.0 / sigma ** 2))

    def test_hand_computed_value(self):
        # tf x = {a,b,c}, z = {a,b}: cos = 2/sqrt(6)
        sigma = 0.5
        dist = 1.0 - 2.0 / math.sqrt(6.0)
        expect = math.exp(-(dist * dist) / (sigma * sigma))
        assert kernel_weight("a b c", "a b", sigma) == pytest.approx(expect, abs=1e-12)

    def test_repeated_words_are_counted(self):
        # tf x = {a:2, b:1}, z = {a:1, b:1}: cos = 3/sqrt(10)
        dist = 1.0 - 3.0 / math.sqrt(10.0)
        expect = math.exp(-(dist * dist) / 0.25 ** 2)
        assert kernel_weight("a a b", "a b", 0.25) == pytest.approx(expect, abs=1e-12)

    def test_bounds(self):
        rng = random.Random(0)
        vocab = ["u", "v", "w", "x"]
        for _ in range(50):
            x = " ".join(rng.choice(vocab) for _ in range(rng.randint(1, 6)))
            z = " ".join(rng.choice(vocab) for _ in range(rng.randint(0, 6)))
            w = kernel_weight(x, z, 0.25)
            assert 0.0 < w <= 1.0

    def test_wider_sigma_weighs_more(self):
        assert kernel_weight("a b c", "a", 0.5) < kernel_weight("a b c", "a", 1.0)

    def test_sigma_validated(self):
        with pytest.raises(ValueError):
            kernel_weight("a", "a", 0.0)


class TestFit:
    def test_matches_normal_equations_oracle(self):
        rng = random.Random(99)
        for _ in range(100):
            d, masks, weights, ys = random_fit_problem(rng)
            perts = fake_perturbations(masks, weights, ys)
            doc = tokenize(" ".join(f"w{i}" for i in range(d)) + ".")
            units = build_units(doc, [])
            model = fit_surrogate(perts, units, target_class=1, ridge=1e-3,
                                  top_k=d)
            coef, intercept = ridge_normal_equations(
                np.array(masks, float), np.array(ys), np.array(weights), 1e-3)
            assert np.allclose(model.coefficients, coef, atol=1e-8)
            assert model.intercept == pytest.approx(intercept, abs=1e-8)
            assert np.allclose(model.raw_coefficients, coef, atol=1e-8)

    def test_top_k_selection_and_zeroing(self):
        rng = random.Random(4)
        d = 5
        masks = [[rng.randint(0, 1) for _ in range(d)] for _ in range(60)]
        masks[0] = [1] * d
        # unit 2 dominates the signal
        ys = [0.1 + 0.7 * m[2] + 0.02 * m[0] for m in masks]
        perts = fake_perturbations(masks, [1.0] * len(masks), ys)
        doc = tokenize("a b c d e.")
        units = build_units(doc, [])
        model = fit_surrogate(perts, units, target_class=1, top_k=1)
        assert model.selected_units == (2,)
        for j in range(d):
            if j != 2:
                assert model.coefficients[j] == 0.0
        assert model.coefficients[2] == pytest.approx(0.7, abs=0.05)

    def test_selected_refit_differs_from_truncation(self):
        # refitting on the kept units re-estimates them, it does not just
        # copy the raw values, so intercept absorbs the dropped signal
        rng = random.Random(8)
        d = 4
        masks = [[rng.randint(0, 1) for _ in range(d)] for _ in range(80)]
        masks[0] = [1] * d
        ys = [0.1 + 0.4 * m[0] + 0.3 * m[1] + 0.05 * m[2] for m in masks]
        perts = fake_perturbations(masks, [1.0] * len(masks), ys)
        doc = tokenize("a b c d.")
        units = build_units(doc, [])
        model = fit_surrogate(perts, units, target_class=1, top_k=2)
        assert set(model.selected_units) == {0, 1}
        assert model.coefficients[0] == pytest.approx(0.4, abs=0.05)

    def test_constant_target_gives_flat_model(self):
        masks = [[1, 1], [0, 1], [1, 0], [0, 0]]
        perts = fake_perturbations(masks, [1.0] * 4, [0.4] * 4)
        doc = tokenize("a b.")
        units = build_units(doc, [])
        model = fit_surrogate(perts, units, target_class=1, top_k=2)
        assert model.intercept == pytest.approx(0.4, abs=1e-3)
        assert np.allclose(model.coefficients, 0.0, atol=1e-3)

    def test_needs_two_distinct_masks(self):
        masks = [[1, 1]] * 5
        perts = fake_perturbations(masks, [1.0] * 5, [0.5] * 5)
        doc = tokenize("a b.")
        units = build_units(doc, [])
        with pytest.raises(DegenerateInputError):
            fit_surrogate(perts, units, target_class=1)

    def test_no_units_rejected(self, stop):
        doc = tokenize("the of.", stop)
        units = build_units(doc, [])
        with pytest.raises(DegenerateInputError):
            fit_surrogate([], units, target_class=1)

    def test_unpenalized_singular_system_reported(self):
        # second column never varies, so without ridge it collides with
        # the intercept
        masks = [[1, 1], [0, 1], [1, 1], [0, 1]]
        perts = fake_perturbations(masks, [1.0] * 4, [0.6, 0.3, 0.6, 0.3])
        doc = tokenize("a b.")
        units = build_units(doc, [])
        with pytest.raises(DegenerateInputError):
            fit_surrogate(perts, units, target_class=1, ridge=0.0)

    def test_parameter_validation(self):
        masks = [[1], [0]]
        perts = fake_perturbations(masks, [1.0, 1.0], [0.6, 0.4])
        doc = tokenize("a.")
        units = build_units(doc, [])
        with pytest.raises(ValueError):
            fit_surrogate(perts, units, target_class=1, top_k=0)
        with pytest.raises(ValueError):
            fit_surrogate(perts, units, target_class=1, ridge=-1.0)

    def test_fit_is_deterministic(self):
        rng = random.Random(12)
        d, masks, weights, ys = random_fit_problem(rng, n=30, dmax=5)
        perts = fake_perturbations(masks, weights, ys)
        doc = tokenize(" ".join(f"w{i}" for i in range(d)) + ".")
        units = build_units(doc, [])
        a = fit_surrogate(perts, units, target_class=1)
        b = fit_surrogate(perts, units, target_class=1)
        assert a.coefficients == b.coefficients
        assert a.intercept == b.intercept


class TestEvaluateMasks:
    def test_records_are_consistent(self, singles_model, stop):
        doc = tokenize("sparrow under the window by the garden.", stop)
        units = build_units(doc, [])
        masks = sample_perturbations(units, 6, 0.5, seed=1)
        perts = evaluate_masks(doc, units, masks, singles_model, sigma=0.25)
        assert len(perts) == 6
        for p, mask in zip(perts, masks):
            assert p.mask == tuple(int(b) for b in mask)
            assert p.text == perturbation_text(doc, units, mask)
            assert p.weight == pytest.approx(
                kernel_weight(doc.text, p.text, 0.25))
            assert p.scores == singles_model.predict_one(p.text)


class TestImportance:
    def make_surrogate(self, units, coefs):
        return SurrogateModel(
            coefficients=tuple(coefs), intercept=0.1, target_class=0,
            target_label="neg", kernel_sigma=0.25, sample_count=10,
            selected_units=tuple(j for j, c in enumerate(coefs) if c != 0.0),
            raw_coefficients=tuple(coefs), units=units)

    def test_hand_computed(self, singles_model, stop):
        doc = tokenize("sparrow under the window by the garden.", stop)
        units = build_units(doc, [])  # sparrow, window, garden
        # class_labels is sorted, so index 0 is "neg"
        g = self.make_surrogate(units, [0.5, 0.3, 0.0])
        span = UnitSpan(start=0, stop=4, sent_idx=0,
                        phrase="sparrow under the window")
        fx = singles_model.predict_one(doc.text).scores[0]
        fr = singles_model.predict_one(
            delete_tokens(doc, range(0, 4))).scores[0]
        want = ((0.5 + 0.3) / 2) * (fx - fr)
        got = importance_score(doc, span, singles_model, g)
        assert got == pytest.approx(want, abs=1e-15)

    def test_matches_independent_recompute(self, singles_model, stop):
        doc = tokenize("falcon by the bridge. walnut under the table.", stop)
        units = build_units(doc, [])
        g = self.make_surrogate(units, [0.4, -0.2, 0.1, 0.05])
        rng = random.Random(3)
        for _ in range(20):
            a = rng.randrange(len(doc.tokens))
            b = rng.randrange(a + 1, len(doc.tokens) + 1)
            ids = [i for i in range(a, b)
                   if doc.tokens[i].sent_idx == doc.tokens[a].sent_idx]
            got = importance_score(doc, ids, singles_model, g)
            want = importance_by_hand(doc, ids, singles_model, g)
            assert got == pytest.approx(want, abs=1e-12)

    def test_region_without_units_scores_zero(self, singles_model, stop):
        doc = tokenize("the sparrow.", stop)
        units = build_units(doc, [])
        g = self.make_surrogate(units, [0.9])
        assert importance_score(doc, [0], singles_model, g) == 0.0

    def test_span_and_token_id_forms_agree(self, singles_model, stop):
        doc = tokenize("sparrow under the window.", stop)
        units = build_units(doc, [])
        g = self.make_surrogate(units, [0.5, 0.25])
        span = UnitSpan(start=0, stop=2, sent_idx=0, phrase="sparrow under")
        a = importance_score(doc, span, singles_model, g)
        b = importance_score(doc, [0, 1], singles_model, g)
        c = importance_score(doc, [span], singles_model, g)
        assert a == b == c

    def test_precomputed_original_score_matches(self, singles_model, stop):
        doc = tokenize("sparrow under the window.", stop)
        units = build_units(doc, [])
        g = self.make_surrogate(units, [0.5, 0.25])
        fx = singles_model.predict_one(doc.text).scores[g.target_class]
        assert importance_score(doc, [0], singles_model, g) == \
            importance_score(doc, [0], singles_model, g, original_score=fx)

    def test_bad_regions(self, singles_model):
        doc = tokenize("a b.")
        units = build_units(doc, [])
        g = self.make_surrogate(units, [0.5, 0.25])
        with pytest.raises(ValueError):
            importance_score(doc, [], singles_model, g)
        with pytest.raises(IndexError):
            importance_score(doc, [99], singles_model, g)
