import numpy as np
import pytest
from scipy import stats

from oracles import random_stepwise_dataset, stepwise_bruteforce
from tactile_bci.dsp import FeatureVector
from tactile_bci.swlda import (Dataset, SwldaModel, partial_f_pvalue, score, score_matrix,
                               stepwise_select, train, training_accuracy)


def separable(n=120, p=160, seed=0, informative=7):
    rng = np.random.default_rng(seed)
    y = np.where(np.arange(n) % 6 == 0, 1.0, -1.0)
    X = rng.standard_normal((n, p))
    X[:, informative] = y
    return Dataset(X, y)


# F(1, d) upper tails computed by adaptive quadrature of the F density, frozen here
@pytest.mark.parametrize("f, df, expected", [
    (4.0, 40, 0.05232234321502338),
    (0.1, 10, 0.7583315357111746),
    (1.0, 5, 0.36321746764911367),
    (10.0, 100, 0.002072872580538454),
])
def test_pvalue_matches_quadrature(f, df, expected):
    ss_full = 1.0
    ss_reduced = ss_full + f * ss_full / df
    assert partial_f_pvalue(ss_reduced, ss_full, df) == pytest.approx(expected, rel=1e-8)


def test_pvalue_examples_rounded():
    # the printed 0.0522 is 0.052322 truncated, so allow one unit in the last digit
    assert partial_f_pvalue(1.1, 1.0, 40) == pytest.approx(0.0522, abs=1.5e-4)
    assert partial_f_pvalue(1.01, 1.0, 10) == pytest.approx(0.758, abs=5e-4)


def test_pvalue_agrees_with_f_distribution_on_grid():
    rng = np.random.default_rng(0)
    for _ in range(200):
        df = int(rng.integers(1, 600))
        ss_full = float(rng.uniform(0.1, 100))
        ss_reduced = ss_full * (1 + rng.exponential(0.05))
        f = (ss_reduced - ss_full) / (ss_full / df)
        assert partial_f_pvalue(ss_reduced, ss_full, df) == pytest.approx(
            stats.f.sf(f, 1, df), rel=1e-9, abs=1e-300)


def test_pvalue_edge_cases():
    assert partial_f_pvalue(3.0, 3.0, 10) == 1.0
    assert partial_f_pvalue(3.0, 0.0, 10) == 0.0
    assert partial_f_pvalue(0.0, 0.0, 10) == 1.0


@pytest.mark.parametrize("args", [(1.0, 2.0, 5), (1.0, -0.5, 5), (2.0, 1.0, 0)])
def test_pvalue_domain_errors(args):
    with pytest.raises(ValueError):
        partial_f_pvalue(*args)


def test_separable_feature_selected_first_and_perfect():
    data = separable()
    model = train(data)
    assert model.selected[0] == 7
    assert training_accuracy(model, data) == 1.0
    scores = score_matrix(model, data.features)
    assert scores[data.labels > 0].min() > scores[data.labels < 0].max()


def test_identical_features_across_classes_is_chance():
    # each feature vector occurs once as a target and once as a non-target
    rng = np.random.default_rng(1)
    X = rng.standard_normal((100, 160))
    data = Dataset(np.vstack([X, X]), np.r_[np.ones(100), -np.ones(100)])
    model = train(data)
    assert len(model.selected) <= 2
    assert 0.4 <= training_accuracy(model, data) <= 0.6


def test_constant_features_give_empty_model():
    y = np.r_[np.ones(20), -np.ones(40)]
    model = train(Dataset(np.full((60, 160), 3.0), y))
    assert model.selected == ()
    assert model.intercept == pytest.approx(y.mean())


def test_single_class_rejected():
    with pytest.raises(ValueError):
        train(Dataset(np.random.default_rng(0).standard_normal((30, 5)), np.ones(30)))


@pytest.mark.parametrize("kwargs", [{"p_enter": 0.2, "p_remove": 0.1}, {"p_enter": 0.0},
                                    {"p_remove": 1.0}])
def test_threshold_validation(kwargs):
    with pytest.raises(ValueError):
        train(separable(), **kwargs)


def test_too_few_observations():
    with pytest.raises(ValueError):
        train(Dataset(np.eye(11), np.r_[1.0, -np.ones(10)]))


@pytest.mark.parametrize("features, labels", [
    (np.full((20, 3), np.inf), np.r_[1.0, -np.ones(19)]),
    (np.zeros((20, 3)), np.r_[2.0, -np.ones(19)]),
    (np.zeros((20, 3)), np.ones(19)),
])
def test_dataset_validation(features, labels):
    with pytest.raises(ValueError):
        Dataset(features, labels)


def test_max_features_cap():
    rng = np.random.default_rng(2)
    y = np.where(rng.random(300) < 0.5, 1.0, -1.0)
    X = rng.standard_normal((300, 40)) + 0.5 * y[:, None]
    model = train(Dataset(X, y), max_features=5)
    assert len(model.selected) == 5


def test_training_is_deterministic():
    data = separable(seed=4)
    assert train(data) == train(data)


def test_lowest_index_wins_exact_ties():
    y = np.where(np.arange(60) % 3 == 0, 1.0, -1.0)
    noise = np.random.default_rng(5).standard_normal((60, 6))
    X = np.column_stack([noise[:, :2], y, y, noise[:, 2:]])
    assert stepwise_select(X, y)[0] == 2


def test_model_invariants():
    with pytest.raises(ValueError):
        SwldaModel((1, 1), (0.1, 0.2), 0.0)
    with pytest.raises(ValueError):
        SwldaModel((160,), (0.1,), 0.0)
    with pytest.raises(ValueError):
        SwldaModel((1,), (np.nan,), 0.0)


def test_score_empty_model_is_intercept():
    assert score(SwldaModel((), (), 0.0), np.random.default_rng(0).standard_normal(160)) == 0.0


def test_score_arithmetic(toy_model):
    fv = np.zeros(160)
    fv[2] = 2.0
    assert score(toy_model, fv) == 3.5
    assert score(toy_model, FeatureVector(fv)) == 3.5


def test_score_length_mismatch(toy_model):
    with pytest.raises(ValueError):
        score(toy_model, np.zeros(159))


def test_score_matrix_matches_score():
    data = separable(seed=6)
    model = train(data)
    expected = [score(model, row) for row in data.features]
    assert np.allclose(score_matrix(model, data.features), expected, rtol=1e-12)


def test_score_linearity():
    model = train(separable(seed=7))
    rng = np.random.default_rng(8)
    u, v = rng.standard_normal(160), rng.standard_normal(160)
    a, b = 1.7, -0.4
    score0 = lambda x: score(model, x) - model.intercept  # noqa: E731
    combined = score(model, a * u + b * v)
    assert combined == pytest.approx(a * score0(u) + b * score0(v) + model.intercept, rel=1e-10)


def test_decisions_invariant_under_feature_rescaling():
    rng = np.random.default_rng(9)
    y = np.where(np.arange(240) % 6 == 0, 1.0, -1.0)
    X = rng.standard_normal((240, 30)) + 0.8 * np.outer(y, rng.random(30) < 0.3)
    scale = rng.uniform(0.2, 5.0, 30) * rng.choice([-1, 1], 30)
    shift = rng.uniform(-10, 10, 30)
    m1 = train(Dataset(X, y))
    m2 = train(Dataset(X * scale + shift, y))
    assert m1.selected == m2.selected
    for _ in range(20):
        candidates = rng.standard_normal((6, 30))
        assert (np.argmax(score_matrix(m1, candidates))
                == np.argmax(score_matrix(m2, candidates * scale + shift)))


def test_model_dict_round_trip():
    model = train(separable(seed=10))
    assert SwldaModel.from_dict(model.to_dict()) == model


@pytest.mark.parametrize("seed", range(10))
def test_matches_bruteforce_stepwise(seed):
    X, y = random_stepwise_dataset(np.random.default_rng(1000 + seed))
    assert stepwise_select(X, y, 0.05, 0.05) == stepwise_bruteforce(X, y, 0.05, 0.05)


def test_matches_bruteforce_with_default_thresholds():
    rng = np.random.default_rng(77)
    for _ in range(10):
        X, y = random_stepwise_dataset(rng, n=80, p=6)
        assert stepwise_select(X, y) == stepwise_bruteforce(X, y, 0.10, 0.15)
