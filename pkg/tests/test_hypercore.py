import threading

import numpy as np
import pytest
from hypothesis import given, settings

from hgx import (
    GeneralizedHypergraph,
    RhoSpec,
    ValidationError,
    build_hypergraph,
    degree_profile,
    validate,
)
from hgx import fixtures as F
from hgx.hypergraph import check_dense_size

from strategies import hypergraphs


def test_t1_degrees():
    prof = degree_profile(F.t1())
    np.testing.assert_array_equal(prof.delta, [2.0])
    np.testing.assert_array_equal(prof.d, [1.0, 1.0])
    np.testing.assert_array_equal(prof.d_hat, [1.0, 1.0])
    np.testing.assert_array_equal(prof.d_nl, [1.0, 1.0])


@pytest.mark.parametrize("sigma", [-2, -1, -0.5, 0, 1, 2])
def test_tri_degree_is_two_to_sigma_plus_two(sigma):
    prof = degree_profile(F.tri(sigma))
    np.testing.assert_allclose(prof.d, 2.0 ** (sigma + 2), rtol=1e-15)


def test_isolated_vertex_has_zero_degree():
    h = build_hypergraph([("a", "e", 1, 1), ("b", "e", 1, 1)], vertices=["a", "b", "c"])
    prof = degree_profile(h)
    assert prof.d[2] == 0 and prof.d_hat[2] == 0 and prof.d_nl[2] == 0
    assert validate(h).isolated == ("c",)


def test_build_preserves_first_appearance_order():
    h = build_hypergraph([("z", "e2", 1, 1), ("a", "e1", 1, 1), ("z", "e1", 2, 3)])
    assert h.vertex_ids == ("z", "a")
    assert h.edge_ids == ("e2", "e1")
    assert h.Q2[0, 1] == 3.0 and h.Q1[0, 1] == 2.0


def test_build_applies_edge_weights_and_default():
    h = build_hypergraph([("a", "e1", 1, 1), ("b", "e2", 1, 1)], {"e1": 2.5})
    np.testing.assert_array_equal(h.w, [2.5, 1.0])


@pytest.mark.parametrize("records, weights, kwargs", [
    ([("a", "e", 1, 1), ("a", "e", 1, 1)], None, {}),
    ([("a", "e", 0, 1)], None, {}),
    ([("a", "e", 1, -1)], None, {}),
    ([("a", "e", 1, 1)], {"e": 0.0}, {}),
    ([("a", "e", 1, 1)], {"e": -2.0}, {}),
    ([("a", "e", 1, 1)], None, {"default_weight": None}),
    ([("a", "e", 1, 1)], {"ghost": 1.0}, {}),
])
def test_build_rejects_bad_input(records, weights, kwargs):
    with pytest.raises(ValidationError):
        build_hypergraph(records, weights, **kwargs)


def test_empty_edge_rejected():
    Q = np.array([[1.0, 0.0], [1.0, 0.0]])
    with pytest.raises(ValidationError, match="no members"):
        GeneralizedHypergraph.from_matrices(Q)


def test_mismatched_patterns_rejected():
    with pytest.raises(ValidationError, match="sparsity"):
        GeneralizedHypergraph.from_matrices(np.array([[1.0], [1.0]]), np.array([[1.0], [0.0]]))


def test_matrices_are_read_only():
    h = F.r5()
    with pytest.raises(ValueError):
        h.Q1.data[0] = 5.0
    with pytest.raises(ValueError):
        h.w[0] = 5.0


def test_rho_kinds_evaluate_positive():
    x = np.array([1.0, 2.0, 3.5])
    np.testing.assert_allclose(RhoSpec("power", -1)(x), 1 / x)
    np.testing.assert_allclose(RhoSpec("exp")(x), np.exp(x))
    np.testing.assert_allclose(RhoSpec("neg_exp")(x), np.exp(-x))
    np.testing.assert_allclose(RhoSpec("sigmoid")(x), 1 / (1 + np.exp(-x)))
    np.testing.assert_allclose(RhoSpec("gaussian_pdf")(x), np.exp(-x * x / 2) / np.sqrt(2 * np.pi))
    np.testing.assert_allclose(RhoSpec("custom_table", table=((1.0, 4.0), (2.0, 5.0), (3.5, 6.0)))(x),
                               [4, 5, 6])


def test_rho_rejects_nonpositive_result():
    # log(1) = 0
    with pytest.raises(ValidationError):
        RhoSpec("log")(np.array([1.0, 2.0]))
    h = F.t1().with_rho(RhoSpec("log"))
    # delta = 2 is fine for the lazy degrees, but the non-lazy degree needs log(1)
    np.testing.assert_array_equal(degree_profile(h, nonlazy=False).d, [2 * np.log(2)] * 2)
    with pytest.raises(ValidationError):
        degree_profile(h)


def test_rho_table_requires_exact_key():
    with pytest.raises(ValidationError, match="exact"):
        RhoSpec("custom_table", table=((2.0, 1.0),))(np.array([2.0000001]))


def test_rho_spec_validation():
    with pytest.raises(ValidationError):
        RhoSpec("cubic")
    with pytest.raises(ValidationError):
        RhoSpec("custom_table")


def test_validate_t1():
    rep = validate(F.t1())
    assert rep.connected and rep.edge_independent_q1 and rep.edge_independent_q2
    assert rep.uniform_degree


def test_validate_two_disjoint_edges_disconnected():
    assert not validate(F.two_disjoint_edges()).connected


def test_validate_r5_edge_dependent():
    h = F.r5()
    rep = validate(h)
    assert rep.connected
    assert not rep.edge_independent_q2
    # by construction every vertex has entries differing across its edges
    Q2 = h.Q2.toarray()
    assert any(len(set(row[row > 0])) > 1 for row in Q2)


def test_r5_shape():
    h = F.r5()
    assert h.n_vertices == 5
    assert sorted(np.diff(h.Q2.indptr)) == [3, 3, 4]
    np.testing.assert_array_equal(h.Q1.toarray(), 2 * h.Q2.toarray())
    assert h.rho == RhoSpec("power", 1.0)
    assert np.all((h.Q2.data >= 0.5) & (h.Q2.data < 1.5))


def test_uniform_degree_flips_when_adding_size_three_edge():
    assert validate(F.tri()).uniform_degree
    recs = [(u, e, 1, 1) for e, pair in (("ab", "ab"), ("bc", "bc"), ("ac", "ac")) for u in pair]
    recs += [(u, "abc", 1, 1) for u in "abc"]
    assert not validate(build_hypergraph(recs)).uniform_degree


def test_dense_limit():
    check_dense_size(5000)
    with pytest.raises(ValidationError):
        check_dense_size(5001)


@given(hypergraphs("any"))
def test_patterns_match_and_delta_is_column_sum(h):
    assert np.array_equal(h.Q1.indptr, h.Q2.indptr)
    assert np.array_equal(h.Q1.indices, h.Q2.indices)
    # equal up to summation order (one rounding)
    np.testing.assert_allclose(degree_profile(h).delta, h.Q2.toarray().sum(axis=0), rtol=5e-16)


@given(hypergraphs("equal"))
def test_d_equals_d_hat_when_q1_equals_q2(h):
    prof = degree_profile(h)
    np.testing.assert_allclose(prof.d, prof.d_hat, rtol=1e-12)


def test_d_equals_d_hat_on_100_seeds():
    for seed in range(100):
        h = F.random_condition2(seed)
        h = h.with_q1(h.Q2)
        prof = degree_profile(h)
        np.testing.assert_allclose(prof.d, prof.d_hat, rtol=1e-12)


@settings(max_examples=30)
@given(hypergraphs("any"))
def test_degree_formulas_match_dense_sums(h):
    Q1, Q2 = h.Q1.toarray(), h.Q2.toarray()
    delta = Q2.sum(axis=0)
    r = delta ** h.rho.sigma
    prof = degree_profile(h)
    np.testing.assert_allclose(prof.d, Q1 @ (h.w * delta * r), rtol=1e-12)
    np.testing.assert_allclose(prof.d_hat, Q2 @ (h.w * delta * r), rtol=1e-12)


def test_equality_and_immutability_are_thread_safe():
    h = F.r5()
    results = []

    def work():
        results.append(degree_profile(h).d.copy())

    threads = [threading.Thread(target=work) for _ in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    for r in results:
        np.testing.assert_array_equal(r, results[0])
    assert h == F.r5()
    assert h != F.r5(seed=1)
