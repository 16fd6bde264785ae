import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import seq
from oracles import gini

from ibts.classify import (
    BACKENDS,
    Encoding,
    ForestParams,
    bootstrap_sample,
    cross_validate,
    fit_forest,
    one_hot_encode,
    stratified_folds,
)
from ibts.classify import _tree_py
from ibts.core import Relation
from ibts.errors import ParameterError, PredictionError, TrainingError
from ibts.features import build_combined_matrix, build_relfreq_matrix, build_temporal_matrix
from ibts.ingest import ColumnKind, Dataset, FeatureMatrix
from ibts.synth import PresenceRule, SynthSpec, generate

needs_compiled = pytest.mark.skipif("compiled" not in BACKENDS, reason="extension not built")


def numeric_matrix(X, y):
    names = tuple(f"f{j}" for j in range(len(X[0])))
    return FeatureMatrix(
        names, (ColumnKind.NUMERIC,) * len(names), tuple(str(i) for i in range(len(X))), X, tuple(y)
    )


@pytest.fixture(scope="module")
def planted():
    d = generate(SynthSpec(PresenceRule("F"), sequence_count=100, seed=5))
    return build_combined_matrix(d)


# -- encoding -------------------------------------------------------------------------


def test_one_hot_first_appearance_order(toy):
    X, enc = one_hot_encode(build_temporal_matrix(toy))
    ab = [n for n in enc.names if n.startswith("A:B=")]
    assert ab == ["A:B=c", "A:B=0", "A:B=si"]
    col = enc.names.index("A:B=c")
    assert X[:, col].tolist() == [1.0, 0.0, 0.0, 1.0]


def test_numeric_columns_pass_through(toy):
    m = build_relfreq_matrix(toy)
    X, enc = one_hot_encode(m)
    assert enc.names == m.feature_names
    assert X.tolist() == [list(r) for r in m.values]


def test_constant_relation_column_single_indicator(toy):
    X, enc = one_hot_encode(build_temporal_matrix(toy))
    assert [n for n in enc.names if n.startswith("A:E=")] == ["A:E=c"]


def test_encoding_decodes_back(toy):
    m = build_combined_matrix(toy)
    X, enc = one_hot_encode(m)
    assert enc.decode(X) == [list(r) for r in m.values]
    assert np.array_equal(enc.transform_rows(enc.decode(X)), X)


def test_unseen_token_encodes_as_zeros(toy):
    m = build_temporal_matrix(toy)
    enc = Encoding.fit(m)
    row = list(m.values[0])
    row[0] = Relation.OVERLAPS
    x = enc.transform_rows([row])[0]
    assert all(x[q] == 0 for q, n in enumerate(enc.names) if n.startswith("A:B="))


# -- trees -----------------------------------------------------------------------------


def check_tree(tree, X, y, n_classes):
    for node in range(tree.node_count):
        c = tree.counts[node]
        if tree.feature[node] < 0:
            continue
        l, r = tree.left[node], tree.right[node]
        assert np.array_equal(tree.counts[l] + tree.counts[r], c)
        n, nl, nr = c.sum(), tree.counts[l].sum(), tree.counts[r].sum()
        assert nl > 0 and nr > 0
        assert (nl * gini(tree.counts[l]) + nr * gini(tree.counts[r])) / n < gini(c)
    for node in range(tree.node_count):
        if np.count_nonzero(tree.counts[node]) == 1:
            assert tree.feature[node] < 0


def test_trees_reduce_impurity(planted):
    model = fit_forest(planted, ForestParams(tree_count=20, seed=3))
    X = model.encoding.transform(planted)
    for t in model.trees:
        check_tree(t, X, None, 2)


def test_planted_training_accuracy(planted):
    model = fit_forest(planted, ForestParams(tree_count=50, seed=1))
    assert model.predict_labels(planted) == list(planted.classes)


def test_vote_fractions(planted):
    model = fit_forest(planted, ForestParams(tree_count=25, seed=1))
    for p in model.predict_matrix(planted):
        assert math.isclose(sum(p.fractions.values()), 1.0)
        assert p.fractions[p.label] == max(p.fractions.values())
        assert all(v * 25 == round(v * 25) for v in p.fractions.values())


def test_identical_rows_with_different_classes():
    m = numeric_matrix([[0.5], [0.5]], ["x", "y"])
    model = fit_forest(m, ForestParams(tree_count=1, seed=0))
    t = model.trees[0]
    assert t.node_count == 1
    p = model.predict([0.5])
    assert p.label in ("x", "y")


def test_vote_tie_goes_to_smallest_class():
    m = numeric_matrix([[0.1], [0.9]], ["y", "x"])
    model = fit_forest(m, ForestParams(tree_count=2, seed=0))
    assert model.classes == ("x", "y")
    assert model._predictions(np.array([[1, 1]]))[0].label == "x"


def test_toy_single_tree_fits_its_bootstrap(toy):
    m = build_relfreq_matrix(toy)
    at_least_three = 0
    for s in range(100):
        model = fit_forest(m, ForestParams(tree_count=1, seed=s))
        got = model.predict_labels(m)
        bag = set(bootstrap_sample(4, s, 0)[0].tolist())
        assert all(got[i] == m.classes[i] for i in bag)
        at_least_three += sum(a == b for a, b in zip(got, m.classes)) >= 3
    assert at_least_three >= 90


def test_toy_single_tree_all_negative_bag(toy):
    # a bag holding only the negative row forces an all-negative tree, so no
    # per-seed bound above 1/4 can hold
    m = build_relfreq_matrix(toy)
    seed = next(s for s in range(1000) if set(bootstrap_sample(4, s, 0)[0].tolist()) == {1})
    assert fit_forest(m, ForestParams(tree_count=1, seed=seed)).predict_labels(m) == ["-"] * 4


def test_bootstrap_inclusion_rate():
    n = 200
    rates = [len(set(bootstrap_sample(n, 7, t)[0].tolist())) / n for t in range(200)]
    assert abs(np.mean(rates) - (1 - 1 / math.e)) < 0.05
    s1, seed1 = bootstrap_sample(n, 7, 0)
    s2, seed2 = bootstrap_sample(n, 7, 0)
    assert np.array_equal(s1, s2) and seed1 == seed2


def test_single_class_rejected():
    with pytest.raises(TrainingError):
        fit_forest(numeric_matrix([[0.1], [0.2]], ["x", "x"]))


def test_no_features_rejected():
    m = FeatureMatrix((), (), ("1", "2"), [[], []], ("x", "y"))
    with pytest.raises(TrainingError):
        fit_forest(m)


def test_schema_mismatch(planted, toy):
    model = fit_forest(planted, ForestParams(tree_count=3))
    with pytest.raises(PredictionError):
        model.predict([0.5])
    with pytest.raises(PredictionError):
        model.predict_matrix(build_relfreq_matrix(toy))


def test_unseen_token_still_predicts(toy):
    m = build_temporal_matrix(toy)
    model = fit_forest(m, ForestParams(tree_count=10))
    row = list(m.values[0])
    row[0] = Relation.MET_BY
    assert model.predict(row).label in ("+", "-")


def test_params_validation():
    for kw in ({"tree_count": 0}, {"max_depth": 0}, {"min_leaf": 0}, {"candidate_features": 0}, {"seed": -1}):
        with pytest.raises(ParameterError):
            ForestParams(**kw)
    assert ForestParams().resolved_candidates(21) == 4
    with pytest.raises(ParameterError):
        ForestParams(candidate_features=5).resolved_candidates(4)


def test_depth_limit(planted):
    model = fit_forest(planted, ForestParams(tree_count=5, max_depth=1))
    assert all(t.node_count <= 3 for t in model.trees)


def test_worker_count_does_not_change_forest(planted):
    p = ForestParams(tree_count=30, seed=11)
    a = fit_forest(planted, p, workers=1)
    b = fit_forest(planted, p, workers=4)
    assert all(x.same_as(y) for x, y in zip(a.trees, b.trees))


@needs_compiled
def test_backends_agree(planted):
    p = ForestParams(tree_count=20, seed=2)
    a = fit_forest(planted, p, backend="compiled")
    b = fit_forest(planted, p, backend="python")
    assert all(x.same_as(y) for x, y in zip(a.trees, b.trees))


@needs_compiled
@settings(max_examples=30, deadline=None)
@given(
    st.integers(2, 40).flatmap(
        lambda n: st.tuples(
            st.lists(st.lists(st.sampled_from([0.0, 0.25, 0.5, 1.0]), min_size=3, max_size=3), min_size=n, max_size=n),
            st.lists(st.sampled_from("xyz"), min_size=n, max_size=n),
        )
    ),
    st.integers(0, 2**32),
)
def test_backends_agree_on_random_data(data, seed):
    X, y = data
    if len(set(y)) < 2:
        y[0], y[1] = "x", "y"
    m = numeric_matrix(X, y)
    p = ForestParams(tree_count=3, seed=seed, candidate_features=2)
    a = fit_forest(m, p, backend="compiled")
    b = fit_forest(m, p, backend="python")
    assert all(t.same_as(u) for t, u in zip(a.trees, b.trees))


def test_splitmix64_reference():
    # first outputs for seed 0 of the published SplitMix64 generator
    g = _tree_py.SplitMix64(0)
    assert [g.next() for _ in range(3)] == [
        0xE220A8397B1DCDAF,
        0x6E789E6AA1B965F4,
        0x06C45D188009454F,
    ]


# -- folds and cross-validation -----------------------------------------------------------


def test_folds_partition_and_balance():
    y = ["a"] * 37 + ["b"] * 13
    folds = stratified_folds(y, 10, seed=1)
    flat = sorted(i for f in folds for i in f)
    assert flat == list(range(50))
    sizes = [len(f) for f in folds]
    assert max(sizes) - min(sizes) <= 1
    for f in folds:
        c = Counter(y[i] for i in f)
        assert abs(c["a"] - 3.7) < 1 and abs(c["b"] - 1.3) < 1
    assert folds == stratified_folds(y, 10, seed=1)


@pytest.mark.parametrize("k", [1, 0, 11])
def test_fold_count_bounds(k):
    with pytest.raises(ParameterError):
        stratified_folds(["a", "b"] * 5, k)


def test_two_row_two_fold_degenerate():
    m = numeric_matrix([[0.1], [0.9]], ["x", "y"])
    r = cross_validate(m, ForestParams(tree_count=5), k=2)
    assert r.degenerate_folds == (0, 1)
    assert r.mean_accuracy == 0.0
    assert "degenerate" in r.to_text()


def test_cv_planted(planted):
    r = cross_validate(planted, ForestParams(tree_count=50), k=5)
    assert r.mean_accuracy >= 0.95
    assert sum(r.fold_sizes) == len(planted)
    assert sum(map(sum, r.confusion)) == len(planted)


def test_cv_deterministic_across_workers(planted):
    p = ForestParams(tree_count=20, seed=9)
    a = cross_validate(planted, p, k=4, workers=1)
    b = cross_validate(planted, p, k=4, workers=3)
    assert a.to_csv() == b.to_csv() and a.to_text() == b.to_text()


def test_cv_chance_level():
    rng = np.random.default_rng(0)
    n = 200
    X = rng.random((n, 5)).tolist()
    y = ["x", "y"] * (n // 2)
    r = cross_validate(numeric_matrix(X, y), ForestParams(tree_count=50), k=10)
    assert abs(r.mean_accuracy - 0.5) <= 3 * math.sqrt(0.25 / n)


def test_relation_only_dataset_classifies():
    seqs, cls = [], {}
    for i in range(40):
        rows = [("A", 0, 4), ("B", 2, 6)] if i % 2 else [("A", 0, 4), ("B", 5, 7)]
        seqs.append(seq(i, rows))
        cls[str(i)] = "o" if i % 2 else "b"
    m = build_temporal_matrix(Dataset(seqs, cls))
    r = cross_validate(m, ForestParams(tree_count=10), k=4)
    assert r.mean_accuracy == 1.0
