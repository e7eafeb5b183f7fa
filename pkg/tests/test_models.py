import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hgx import (
    ModelParams,
    NumericalError,
    TrainConfig,
    ValidationError,
    build_hypergraph,
    clique_graph,
    forward,
    gradient_check,
    init_params,
    propagation_operator,
    readout_mean_pool,
    train,
)
from hgx import fixtures as F
from hgx.models import VARIANTS, cross_entropy, softmax, ssgc_features

import oracles


def _setup(seed=0, n_features=3, n_classes=3):
    h = F.r5(seed)
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(h.n_vertices, n_features))
    labels = rng.integers(0, n_classes, size=h.n_vertices)
    return h, X, labels


def _wc(h):
    return clique_graph(h).Wc.toarray()


# the hypergraph model equals the plain graph model run on the clique graph

def test_gcn_equals_graph_gcn_on_clique_graph():
    h, X, _ = _setup()
    p = init_params("h_gcn", 3, 3, hidden=4, num_layers=3, seed=1)
    Z = forward("h_gcn", p, propagation_operator(h), X)
    np.testing.assert_allclose(Z, oracles.gcn_reference(_wc(h), X, p.weights), atol=1e-12)


def test_ssgc_equals_reference():
    h, X, _ = _setup()
    p = init_params("h_ssgc", 3, 3, K=4, alpha=0.2, seed=1)
    Z = forward("h_ssgc", p, propagation_operator(h), X)
    np.testing.assert_allclose(Z, oracles.ssgc_reference(_wc(h), X, p.weights[0], 4, 0.2),
                               atol=1e-12)


def test_appnp_equals_reference():
    h, X, _ = _setup()
    p = init_params("h_appnp", 3, 3, hidden=5, K=7, alpha=0.15, seed=2)
    Z = forward("h_appnp", p, propagation_operator(h), X)
    np.testing.assert_allclose(Z, oracles.appnp_reference(_wc(h), X, p.weights, 7, 0.15),
                               atol=1e-12)


def test_chebnet_equals_reference():
    h, X, _ = _setup()
    p = init_params("h_chebnet", 3, 3, hidden=4, num_layers=2, K=3, seed=3)
    Z = forward("h_chebnet", p, propagation_operator(h), X)
    np.testing.assert_allclose(Z, oracles.cheb_reference(_wc(h), X, p.weights, 3, 2), atol=1e-12)


@pytest.mark.parametrize("schedule", ["fixed", "log"])
def test_gcnii_equals_reference(schedule):
    h, X, _ = _setup()
    p = init_params("h_gcnii", 3, 3, hidden=4, num_layers=3, seed=4, alpha=0.2,
                    beta=0.3, beta_schedule=schedule, lam=0.7)
    Z = forward("h_gcnii", p, propagation_operator(h), X)
    ref = oracles.gcnii_reference(_wc(h), X, p.weights, 0.2, p.betas())
    np.testing.assert_allclose(Z, ref, atol=1e-12)


def test_log_beta_schedule():
    p = init_params("h_gcnii", 2, 2, num_layers=3, beta_schedule="log", lam=0.5)
    np.testing.assert_allclose(p.betas(), np.log(0.5 / np.arange(1, 4) + 1))


def test_ssgc_features_k_zero():
    X = np.arange(6.0).reshape(3, 2)
    np.testing.assert_array_equal(ssgc_features(np.eye(3), X, 0, 0.1), X)


# gradients

@pytest.mark.parametrize("variant", VARIANTS)
@pytest.mark.parametrize("fixture", [F.t1, F.tri, F.r5])
def test_gradient_check(variant, fixture):
    h = fixture()
    rng = np.random.default_rng(0)
    X = rng.normal(size=(h.n_vertices, 3))
    labels = rng.integers(0, 2, size=h.n_vertices)
    p = init_params(variant, 3, 2, hidden=4, num_layers=2, seed=5)
    assert gradient_check(variant, p, h, X, labels) < 1e-6


@settings(max_examples=10)
@given(st.sampled_from(VARIANTS), st.integers(0, 1000))
def test_gradient_check_property(variant, seed):
    h = F.random_condition2(seed, n_max=12)
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(h.n_vertices, 2))
    labels = rng.integers(0, 2, size=h.n_vertices)
    mask = rng.random(h.n_vertices) < 0.6
    mask[0] = True
    p = init_params(variant, 2, 2, hidden=3, num_layers=2, seed=seed, activation="identity")
    assert gradient_check(variant, p, h, X, labels, mask) < 1e-6


def test_cross_entropy_gradient():
    rng = np.random.default_rng(0)
    Z = rng.normal(size=(4, 3))
    y = np.array([0, 2, 1, 1])
    m = np.array([True, False, True, True])
    loss, dZ = cross_entropy(Z, y, m)
    ref = -np.mean(np.log(softmax(Z)[m][np.arange(3), y[m]]))
    assert loss == pytest.approx(ref, rel=1e-14)
    assert np.all(dZ[~m] == 0)
    eps = 1e-6
    Zp = Z.copy()
    Zp[0, 1] += eps
    Zm = Z.copy()
    Zm[0, 1] -= eps
    num = (cross_entropy(Zp, y, m)[0] - cross_entropy(Zm, y, m)[0]) / (2 * eps)
    assert dZ[0, 1] == pytest.approx(num, abs=1e-9)


# isolated vertices

def test_isolated_vertex_renormalization():
    h = build_hypergraph([("a", "e", 1, 1), ("b", "e", 1, 1), ("b", "f", 1, 1), ("c", "f", 1, 1)],
                         vertices=["a", "b", "c", "z"])
    X = np.arange(8.0).reshape(4, 2) + 1
    plain = propagation_operator(h, use_renormalization=False) @ X
    renorm = propagation_operator(h, use_renormalization=True) @ X
    np.testing.assert_array_equal(plain[3], 0.0)
    np.testing.assert_array_equal(renorm[3], X[3])


# parameters and validation

def test_init_shapes():
    assert [W.shape for W in init_params("h_gcn", 5, 3, hidden=7, num_layers=3).weights] == \
        [(5, 7), (7, 7), (7, 3)]
    assert len(init_params("h_chebnet", 5, 3, num_layers=2, K=2).weights) == 6
    assert len(init_params("h_gcnii", 5, 3, num_layers=4).weights) == 6
    assert init_params("h_appnp", 5, 3).K == 10
    assert not init_params("hgnn_baseline", 5, 3).use_renormalization


def test_init_is_seeded():
    a = init_params("h_gcn", 4, 2, seed=3)
    b = init_params("h_gcn", 4, 2, seed=3)
    assert all(np.array_equal(x, y) for x, y in zip(a.weights, b.weights))


@pytest.mark.parametrize("kwargs", [
    {"dropout_rate": 1.0}, {"alpha": 1.5}, {"beta": -0.1}, {"beta_schedule": "cosine"},
    {"activation": "tanh"},
])
def test_params_validation(kwargs):
    with pytest.raises(ValidationError):
        init_params("h_gcn", 3, 2, **kwargs)


def test_params_shape_validation():
    with pytest.raises(ValidationError, match="chain"):
        ModelParams("h_gcn", [np.zeros((3, 4)), np.zeros((5, 2))])
    with pytest.raises(ValidationError, match="needs"):
        ModelParams("h_gcn", [np.zeros((3, 4))])
    with pytest.raises(ValidationError):
        init_params("gat", 3, 2)


def test_forward_validation():
    h, X, _ = _setup()
    p = init_params("h_gcn", 3, 3)
    T = propagation_operator(h)
    with pytest.raises(ValidationError):
        forward("h_ssgc", p, T, X)
    with pytest.raises(ValidationError):
        forward("h_gcn", p, T, X[:, :2])
    with pytest.raises(ValidationError):
        forward("h_gcn", p, T, X[:4])


def test_readout_mean_pool():
    E = np.array([[1.0, 2.0], [3.0, 4.0], [10.0, 0.0]])
    np.testing.assert_array_equal(readout_mean_pool(E, [0, 0, 1]), [[2, 3], [10, 0]])
    with pytest.raises(ValidationError):
        readout_mean_pool(E, [0, 2, 2])
    with pytest.raises(ValidationError):
        readout_mean_pool(E, [0, 1])


# training

def test_train_small_dataset():
    ds = F.two_block_dataset()
    res = train("h_gcn", ds.h, ds.X, ds.labels, ds, TrainConfig(max_epochs=60, patience=60),
                dropout_rate=0.5)
    params, metrics = res
    assert params is res.params
    assert metrics["accuracy"]["test"] >= 0.8
    assert len(res.train_loss) == res.epochs_run
    assert 1 <= res.best_epoch <= res.epochs_run


def test_train_is_deterministic():
    ds = F.two_block_dataset()
    cfg = TrainConfig(max_epochs=20, patience=20)
    a = train("h_appnp", ds.h, ds.X, ds.labels, ds, cfg, dropout_rate=0.5)
    b = train("h_appnp", ds.h, ds.X, ds.labels, ds, cfg, dropout_rate=0.5)
    assert a.val_loss == b.val_loss


def test_train_sgd_and_early_stop():
    ds = F.two_block_dataset()
    res = train("h_ssgc", ds.h, ds.X, ds.labels, ds,
                TrainConfig(optimizer="sgd", learning_rate=0.05, max_epochs=50, patience=3))
    assert res.epochs_run <= 50


@pytest.mark.parametrize("kwargs", [
    {"learning_rate": 0}, {"weight_decay": -1}, {"max_epochs": 0}, {"patience": 500},
    {"optimizer": "rmsprop"},
])
def test_train_config_validation(kwargs):
    with pytest.raises(ValidationError):
        TrainConfig(**kwargs)


def test_train_split_validation():
    ds = F.two_block_dataset()
    split = {"train": ds.train, "val": ds.val | ds.train, "test": ds.test}
    with pytest.raises(ValidationError, match="overlap"):
        train("h_gcn", ds.h, ds.X, ds.labels, split)
    with pytest.raises(ValidationError, match="missing"):
        train("h_gcn", ds.h, ds.X, ds.labels, {"train": ds.train})
    only0 = ds.train & (ds.labels == 0)
    with pytest.raises(ValidationError, match="no training"):
        train("h_gcn", ds.h, ds.X, ds.labels, {"train": only0, "val": ds.val, "test": ds.test})


def test_train_reports_divergence():
    ds = F.two_block_dataset()
    with pytest.raises(NumericalError):
        train("h_gcn", ds.h, ds.X * 1e150, ds.labels, ds,
              TrainConfig(optimizer="sgd", learning_rate=1e3, max_epochs=5, patience=5))


def test_train_rejects_non_finite_features():
    ds = F.two_block_dataset()
    X = ds.X.copy()
    X[0, 0] = np.nan
    with pytest.raises(ValidationError, match="finite"):
        train("h_gcn", ds.h, X, ds.labels, ds)


# closed-form collapses

def test_ssgc_single_step_is_propagation():
    h = F.r5()
    X = np.random.default_rng(0).normal(size=(5, 3))
    T = propagation_operator(h)
    p = ModelParams("h_ssgc", [np.eye(3)], K=1, alpha=0.0)
    np.testing.assert_allclose(forward("h_ssgc", p, T, X), T @ X, atol=1e-15)


def test_appnp_alpha_one_ignores_graph():
    h = F.r5()
    X = np.random.default_rng(0).normal(size=(5, 3))
    p = init_params("h_appnp", 3, 2, alpha=1.0, K=5)
    a = forward("h_appnp", p, propagation_operator(h), X)
    b = forward("h_appnp", p, np.eye(5), X)
    np.testing.assert_array_equal(a, b)


def test_gcn_on_t1_is_operator_squared():
    X = np.array([[1.0, 0.0], [0.0, 2.0]])
    p = ModelParams("h_gcn", [np.eye(2), np.eye(2)], activation="identity")
    Z = forward("h_gcn", p, propagation_operator(F.t1()), X)
    np.testing.assert_allclose(Z, np.array([[5, 3], [3, 5]]) / 8 @ X, atol=1e-15)


def test_two_uniform_hypergraph_matches_graph_models():
    # a plain graph as a 2-uniform hypergraph; its clique graph adds degree self-loops
    edges = [("a", "b"), ("b", "c"), ("c", "d"), ("a", "c")]
    h = build_hypergraph([(u, f"{u}{v}", 1, 1) for u, v in edges] +
                         [(v, f"{u}{v}", 1, 1) for u, v in edges])
    Wc = _wc(h)
    X = np.random.default_rng(1).normal(size=(4, 3))
    p = init_params("h_gcn", 3, 2, hidden=4, seed=0)
    np.testing.assert_allclose(forward("h_gcn", p, propagation_operator(h), X),
                               oracles.gcn_reference(Wc, X, p.weights), atol=1e-12)
    A = np.zeros((4, 4))
    for u, v in edges:
        i, j = h.vertex_index(u), h.vertex_index(v)
        A[i, j] = A[j, i] = 1
    np.testing.assert_allclose(Wc, 0.5 * (A + np.diag(A.sum(axis=1))), atol=1e-15)


@settings(max_examples=20)
@given(st.integers(0, 1000))
def test_ssgc_is_permutation_equivariant(seed):
    h = F.random_condition2(seed, n_max=10)
    rng = np.random.default_rng(seed)
    n = h.n_vertices
    X = rng.normal(size=(n, 3))
    perm = rng.permutation(n)
    p = init_params("h_ssgc", 3, 2, K=3, seed=seed)
    T = propagation_operator(h).toarray()
    Z = forward("h_ssgc", p, T, X)
    Zp = forward("h_ssgc", p, T[np.ix_(perm, perm)], X[perm])
    np.testing.assert_allclose(Zp, Z[perm], atol=1e-12)


def test_gradient_check_ssgc_t1_seed_7():
    h = F.t1()
    p = init_params("h_ssgc", 2, 2, seed=7)
    X = np.random.default_rng(7).normal(size=(2, 2))
    assert gradient_check("h_ssgc", p, h, X, np.array([0, 1])) < 1e-6


def test_readout_identities():
    E = np.tile([1.5, -2.0], (4, 1))
    np.testing.assert_array_equal(readout_mean_pool(E, [0, 0, 0, 0]), [[1.5, -2.0]])
    F2 = np.array([[1.0, 2.0], [3.0, 4.0]])
    np.testing.assert_array_equal(readout_mean_pool(F2, [0, 1]), F2)
    rng = np.random.default_rng(0)
    G = rng.normal(size=(6, 2))
    g = np.array([0, 1, 0, 2, 1, 2])
    perm = rng.permutation(6)
    np.testing.assert_allclose(readout_mean_pool(G[perm], g[perm]), readout_mean_pool(G, g),
                               atol=1e-15)
