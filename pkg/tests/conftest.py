import pytest

from ontoexplain import (SurrogateModel, build_units, evaluate_masks,
                         fit_surrogate, load_ontology, load_stopwords,
                         make_pairs_corpus, make_singles_corpus,
                         sample_perturbations, train_builtin)
from ontoexplain.ontology import Concept, Ontology, Relation

# the two-sentence running examples used across the suite
DRUG_TEXT = ("She uses orange juice and does not like weed. "
             "She knows that smoke causes addiction and headache.")
COMPLAINT_TEXT = ("We were filling out all the forms in the application. "
                  "However, there is a letter in saying loss mitigation "
                  "application denied for not sending information to us.")


@pytest.fixture(scope="session")
def stop():
    return load_stopwords()


@pytest.fixture(scope="session")
def drug_ont():
    from importlib import resources
    with resources.as_file(resources.files("ontoexplain.data") / "drug_abuse.onto") as p:
        return load_ontology(p)


@pytest.fixture(scope="session")
def complaint_ont():
    from importlib import resources
    with resources.as_file(resources.files("ontoexplain.data") / "consumer_complaint.onto") as p:
        return load_ontology(p)


@pytest.fixture(scope="session")
def singles_model():
    corpus = make_singles_corpus(200, seed=1)
    return train_builtin(corpus.texts, corpus.labels)


@pytest.fixture(scope="session")
def pairs_corpus():
    return make_pairs_corpus(400, seed=1)


@pytest.fixture(scope="session")
def pairs_model(pairs_corpus):
    return train_builtin(pairs_corpus.texts, pairs_corpus.labels)


def surrogate_for(doc, model, seed=0, samples=60):
    """Word-unit surrogate fit for a doc, for tests that need a real one."""
    units = build_units(doc, [])
    masks = sample_perturbations(units, samples, 0.5, seed=seed)
    perts = evaluate_masks(doc, units, masks, model, sigma=0.25)
    target = model.predict_one(doc.text).predicted_index
    return fit_surrogate(perts, units, target_class=target,
                         target_label=model.class_labels[target],
                         top_k=len(units))


def flat_surrogate(units, target_class=0):
    """All-zero coefficients: every region scores exactly 0."""
    zeros = (0.0,) * len(units)
    return SurrogateModel(coefficients=zeros, intercept=0.5,
                          target_class=target_class, target_label="",
                          kernel_sigma=0.25, sample_count=2,
                          selected_units=(), raw_coefficients=zeros,
                          units=units)


def tiny_ontology(edges, **concept_terms) -> Ontology:
    """Helper for tests that need a throwaway ontology.

    tiny_ontology([("A", "B")], A={"x"}, B={"y"}) gives concepts A, B
    with those term sets and a directed A->B relation.
    """
    return Ontology(
        name="tiny",
        concepts={cid: Concept(id=cid, label=cid, terms=frozenset(terms))
                  for cid, terms in concept_terms.items()},
        relations=frozenset(Relation(source=a, label="rel", target=b)
                            for a, b in edges),
    )
