import warnings

import numpy as np
import pytest
from hypothesis import given, settings

from hgx import (
    ValidationError,
    convergence_bound_check,
    digraph_laplacian,
    oversmoothing_energy,
    rayleigh_quotient,
    renormalized_operator,
    spectrum,
    stationary_distribution,
    transition_matrix,
    unified_laplacian,
    validate,
)
from hgx import fixtures as F
from hgx.spectral import adjacency_operator, normalized_adjacency

import oracles
from strategies import hypergraphs


def test_t1_operators():
    b = unified_laplacian(F.t1())
    np.testing.assert_array_equal(b.L.toarray(), [[0.5, -0.5], [-0.5, 0.5]])
    np.testing.assert_array_equal(b.T_tilde.toarray(), [[0.75, 0.25], [0.25, 0.75]])
    s = spectrum(b)
    np.testing.assert_allclose(s.eigenvalues, [0, 1], atol=1e-15)
    assert s.lambda_H == pytest.approx(1.0)


def test_tri_spectrum():
    s = spectrum(unified_laplacian(F.tri()).L)
    np.testing.assert_allclose(s.eigenvalues, [0, 0.75, 0.75], atol=1e-14)


def test_warns_outside_conditions():
    with pytest.warns(UserWarning, match="equivalence"):
        unified_laplacian(F.non_equivalent())
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        unified_laplacian(F.non_equivalent(), check=False)
        unified_laplacian(F.r5())


@settings(max_examples=40)
@given(hypergraphs("proportional"))
def test_spectrum_in_unit_interval(h):
    s = spectrum(unified_laplacian(h, check=False))
    assert s.lambda_min >= -1e-9 and s.lambda_max <= 1 + 1e-9


@settings(max_examples=40)
@given(hypergraphs("any"))
def test_laplacian_is_exactly_symmetric(h):
    L = unified_laplacian(h, check=False).L
    assert (L != L.T).nnz == 0


@settings(max_examples=40)
@given(hypergraphs("proportional"))
def test_null_vector_is_sqrt_degree(h):
    if not validate(h).connected:
        return
    b = unified_laplacian(h, check=False)
    s = spectrum(b)
    assert abs(s.lambda_min) < 1e-10
    x = np.sqrt(b.d_hat)
    cos = abs(s.u1 @ x) / np.linalg.norm(x)
    assert cos > 1 - 1e-8
    assert rayleigh_quotient(b.L, x) == pytest.approx(0.0, abs=1e-12)


@settings(max_examples=40)
@given(hypergraphs("proportional"))
def test_laplacian_similar_to_walk_laplacian(h):
    # I - P = D^{-1/2} L D^{1/2} under condition (2)
    b = unified_laplacian(h, check=False)
    P = transition_matrix(h).toarray()
    s = np.sqrt(b.d_hat)
    np.testing.assert_allclose(np.eye(len(s)) - P, (b.L.toarray() * s) / s[:, None], atol=1e-12)


@pytest.mark.parametrize("seed", range(10))
def test_zhou_reduction(seed):
    h = F.random_plain(seed, sigma=-1.0)
    H, w = h.H.toarray(), h.w
    np.testing.assert_allclose(unified_laplacian(h).L.toarray(), oracles.zhou_laplacian(H, w),
                               atol=1e-12)


@pytest.mark.parametrize("sigma", [-2.0, 0.0, 1.0])
@pytest.mark.parametrize("seed", range(5))
def test_carletti_reduction(seed, sigma):
    h = F.random_plain(seed, sigma=sigma)
    H, w = h.H.toarray(), h.w
    np.testing.assert_allclose(unified_laplacian(h).L.toarray(),
                               oracles.carletti_laplacian(H, w, sigma), atol=1e-12)


def test_renormalized_operator_matches_reference():
    h = F.r5()
    K = h.Q2.toarray() @ np.diag(h.w * h.Q2.toarray().sum(axis=0)) @ h.Q2.toarray().T  # rho(x) = x
    np.testing.assert_allclose(renormalized_operator(h).toarray(), oracles.renorm_adjacency(K),
                               atol=1e-14)


def test_adjacency_operator_is_identity_minus_laplacian():
    h = F.r5()
    np.testing.assert_allclose(adjacency_operator(h).toarray(),
                               np.eye(5) - unified_laplacian(h).L.toarray(), atol=1e-15)


def test_normalized_adjacency_zero_degree():
    A = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
    M = normalized_adjacency(A).toarray()
    np.testing.assert_array_equal(M, A)


def test_spectrum_validation():
    with pytest.raises(ValidationError, match="symmetric"):
        spectrum(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(ValidationError):
        spectrum(np.ones((2, 3)))
    with pytest.raises(ValidationError):
        rayleigh_quotient(np.eye(2), [0, 0])


def test_dense_size_guard():
    import scipy.sparse as sp

    with pytest.raises(ValidationError):
        spectrum(sp.identity(5001, format="csr"))


# diffusion

@pytest.mark.parametrize("fixture", [F.t1, F.tri, F.r5])
def test_convergence_bound_on_fixtures(fixture):
    h = fixture()
    for i in range(h.n_vertices):
        trace, ok = convergence_bound_check(h, i, 50)
        assert ok, trace.max_excess


@settings(max_examples=30)
@given(hypergraphs("proportional"))
def test_convergence_bound_property(h):
    if not validate(h).connected:
        with pytest.raises(ValidationError):
            convergence_bound_check(h, 0, 5)
        return
    _, ok = convergence_bound_check(h, 0, 30)
    assert ok


def test_energy_grows_geometrically():
    h = F.r5()
    trace, _ = convergence_bound_check(h, 0, 20)
    ratio = trace.energy_lower_bound[1:] / trace.energy_lower_bound[:-1]
    np.testing.assert_allclose(ratio, 1 / (1 - trace.lambda_H), rtol=1e-12)
    assert np.all(trace.energy >= trace.energy_lower_bound * (1 - 1e-12))
    l1, e, e_low = oversmoothing_energy(h, 0, 20)
    assert e == trace.energy[-1] and e_low == trace.energy_lower_bound[-1]
    assert l1 == trace.l1_error[-1]


def test_t1_energy_infinite_after_one_step():
    l1, e, e_low = oversmoothing_energy(F.t1(), "a", 1)
    assert l1 == 0 and e == np.inf and e_low == np.inf


def test_diffusion_rejects_non_equivalent():
    with pytest.raises(ValidationError):
        convergence_bound_check(F.non_equivalent(), 0, 3)
    with pytest.raises(ValidationError):
        convergence_bound_check(F.two_disjoint_edges(), 0, 3)


def test_trace_rows():
    trace, _ = convergence_bound_check(F.tri(), 0, 3)
    rows = list(trace.rows())
    assert len(rows) == 4 and rows[0][0] == 0


# digraph Laplacian

def test_digraph_laplacian_on_cx4():
    T = F.cx4_transition()
    pi = stationary_distribution(T, mode="power").pi
    L = digraph_laplacian(T, pi).toarray()
    np.testing.assert_array_equal(L, L.T)
    vals = np.linalg.eigvalsh(L)
    assert vals[0] == pytest.approx(0.0, abs=1e-12)
    np.testing.assert_allclose(L @ np.sqrt(pi), 0.0, atol=1e-12)


def test_digraph_laplacian_reduces_on_reversible_walk():
    h = F.r5()
    T = transition_matrix(h)
    pi = stationary_distribution(h).pi
    np.testing.assert_allclose(digraph_laplacian(T, pi).toarray(),
                               unified_laplacian(h).L.toarray(), atol=1e-12)


def test_digraph_laplacian_validation():
    T = F.cx4_transition()
    with pytest.raises(ValidationError):
        digraph_laplacian(T, np.full(4, 0.25))
    with pytest.raises(ValidationError):
        digraph_laplacian(T, np.array([1.0, 0, 0, 0]))
    with pytest.raises(ValidationError):
        digraph_laplacian(T, np.ones(3) / 3)


def test_check_all_sources_matches_single():
    from hgx import convergence_bound_check_all

    h = F.r5()
    traces, ok = convergence_bound_check_all(h, 10)
    assert ok and len(traces) == 5
    for i, t in enumerate(traces):
        single, _ = convergence_bound_check(h, i, 10)
        np.testing.assert_array_equal(t.l1_error, single.l1_error)


def test_rounding_noise_counts_as_converged():
    # lambda_H = 1: the walk mixes in one step, so p(1) - pi is pure rounding
    h = F.t1().with_q1(F.t1().Q1 * 1.3)
    for sigma in (-2.0, 0.5):
        trace, ok = convergence_bound_check(h.with_rho(h.rho.__class__("power", sigma)), 0, 5)
        assert ok and np.all(trace.l1_error[1:] == 0) and np.all(trace.energy[1:] == np.inf)


def test_negative_steps_rejected():
    with pytest.raises(ValidationError):
        convergence_bound_check(F.r5(), 0, -1)
    with pytest.raises(ValidationError):
        oversmoothing_energy(F.r5(), 0, -1)
