"""Unified hypergraph Laplacian, propagation operators and spectral checks.

With ``K = Q2 W rho(D_e) Q2^T`` and ``D_hat = diag(K 1)``:

* ``L = I - D_hat^{-1/2} K D_hat^{-1/2}`` (zero degrees use a zero inverse),
* ``T~ = D~^{-1/2} (K + I) D~^{-1/2}`` with ``D~ = diag((K + I) 1)``.

Because ``K`` is positive semidefinite the spectrum of ``L`` lies in
``[0, 1]``, inside the general ``[0, 2]`` range.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .equiv import _symmetric, check_equivalence_conditions, clique_weights
from .errors import ValidationError
from .hypergraph import GeneralizedHypergraph, check_dense_size, degree_profile, validate
from .walk import _as_csr, _residual, step_distributions, transition_matrix

LAMBDA_H_THRESHOLD = 1e-10


@dataclass(frozen=True, eq=False)
class LaplacianBundle:
    """Unified Laplacian together with the matrices it is built from."""

    K: sp.csr_matrix
    L: sp.csr_matrix
    T_tilde: sp.csr_matrix
    d_hat: np.ndarray
    vertex_ids: tuple = ()


def _inv_sqrt(d: np.ndarray) -> np.ndarray:
    out = np.zeros_like(d, dtype=float)
    pos = d > 0
    out[pos] = 1.0 / np.sqrt(d[pos])
    return out


def normalized_adjacency(A, d=None) -> sp.csr_matrix:
    """``D^{-1/2} A D^{-1/2}``; ``d`` defaults to the row sums of ``A``."""
    A = sp.csr_matrix(A, dtype=float)
    if d is None:
        d = np.asarray(A.sum(axis=1)).ravel()
    d = np.asarray(d, dtype=float)
    C = A.tocoo()
    # A(u,v) / sqrt(d(u) d(v)) keeps exact values like 1.5/sqrt(4)
    prod = d[C.row] * d[C.col]
    keep = prod > 0
    data = np.zeros_like(C.data)
    data[keep] = C.data[keep] / np.sqrt(prod[keep])
    M = sp.csr_matrix((data, (C.row, C.col)), shape=A.shape)
    M.eliminate_zeros()
    return _symmetric(M)


def renormalized_adjacency(A) -> sp.csr_matrix:
    """Renormalization trick on a plain weighted adjacency: ``D~^{-1/2}(A + I)D~^{-1/2}``."""
    A = sp.csr_matrix(A, dtype=float)
    return normalized_adjacency(A + sp.identity(A.shape[0], format="csr"))


def unified_laplacian(h: GeneralizedHypergraph, check: bool = True) -> LaplacianBundle:
    """Build ``K``, ``L`` and ``T~`` for ``h``.

    When ``check`` is true and neither equivalence condition holds, a
    ``UserWarning`` is emitted: ``L`` is still computable but no longer the
    Laplacian of an equivalent clique graph.
    """
    if check:
        rep = check_equivalence_conditions(h)
        if not (rep.condition1 or rep.condition2.holds):
            warnings.warn("equivalence conditions (1)/(2) fail; L does not describe the walk",
                          UserWarning, stacklevel=2)
    K = clique_weights(h)
    d_hat = degree_profile(h, nonlazy=False).d_hat
    n = h.n_vertices
    L = _symmetric(sp.identity(n, format="csr") - normalized_adjacency(K, d_hat))
    L.eliminate_zeros()
    return LaplacianBundle(K, L, renormalized_adjacency(K), d_hat, h.vertex_ids)


def renormalized_operator(h: GeneralizedHypergraph) -> sp.csr_matrix:
    """``T~ = D~^{-1/2} (K + I) D~^{-1/2}``; isolated vertices keep a unit self-loop."""
    return renormalized_adjacency(clique_weights(h))


def adjacency_operator(h: GeneralizedHypergraph) -> sp.csr_matrix:
    """Un-renormalized operator ``D_hat^{-1/2} K D_hat^{-1/2} = I - L`` (HGNN style)."""
    return normalized_adjacency(clique_weights(h), degree_profile(h, nonlazy=False).d_hat)


@dataclass(frozen=True, eq=False)
class SpectrumReport:
    """Eigen-decomposition of a symmetric matrix, ascending order.

    ``lambda_H`` is the smallest eigenvalue above 1e-10 (``None`` if none).
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    lambda_min: float
    lambda_H: float | None
    lambda_max: float
    u1: np.ndarray

    def to_dict(self) -> dict:
        return {
            "eigenvalues": self.eigenvalues.tolist(),
            "lambda_min": self.lambda_min,
            "lambda_H": self.lambda_H,
            "lambda_max": self.lambda_max,
            "u1": self.u1.tolist(),
        }


def _dense(M) -> np.ndarray:
    if isinstance(M, LaplacianBundle):
        M = M.L
    if sp.issparse(M):
        check_dense_size(M.shape[0])
        return M.toarray()
    M = np.asarray(M, dtype=float)
    check_dense_size(M.shape[0])
    return M


def spectrum(M) -> SpectrumReport:
    """Full symmetric eigendecomposition of ``M`` (a matrix or a ``LaplacianBundle``).

    Raises
    ------
    ValidationError
        If ``M`` is not square or is asymmetric beyond 1e-9.
    """
    A = _dense(M)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValidationError("spectrum needs a square matrix")
    asym = float(np.abs(A - A.T).max()) if A.size else 0.0
    if asym > 1e-9:
        raise ValidationError(f"matrix is not symmetric (max asymmetry {asym:.3e})")
    vals, vecs = sla.eigh((A + A.T) / 2)
    pos = vals[vals > LAMBDA_H_THRESHOLD]
    u1 = vecs[:, 0].copy()
    if u1[np.argmax(np.abs(u1))] < 0:
        u1 = -u1
    return SpectrumReport(vals, vecs, float(vals[0]), float(pos[0]) if pos.size else None,
                          float(vals[-1]), u1)


def rayleigh_quotient(M, x) -> float:
    """``x^T M x / x^T x``."""
    x = np.asarray(x, dtype=float)
    xx = float(x @ x)
    if xx == 0:
        raise ValidationError("Rayleigh quotient of the zero vector")
    Mx = M @ x
    return float(x @ np.asarray(Mx).ravel()) / xx


@dataclass(frozen=True, eq=False)
class DiffusionTrace:
    """Per-step diffusion diagnostics from one source vertex.

    Arrays are indexed by step ``k = 0..k_max``.  ``energy`` and
    ``energy_lower_bound`` are ``inf`` where their denominators vanish.
    """

    source: int
    lambda_H: float
    k: np.ndarray
    l1_error: np.ndarray
    bound: np.ndarray
    energy: np.ndarray
    energy_lower_bound: np.ndarray
    max_excess: float

    def rows(self):
        for i in range(self.k.size):
            yield (int(self.k[i]), float(self.l1_error[i]), float(self.bound[i]),
                   float(self.energy[i]), float(self.energy_lower_bound[i]))


def _safe_ratio(num: float, den: np.ndarray) -> np.ndarray:
    out = np.full(den.shape, np.inf)
    nz = den > 0
    with np.errstate(over="ignore"):
        out[nz] = num / den[nz]
    return out


# |p - pi| entries at this level are rounding noise and count as zero
ROUNDING_FLOOR = 64 * np.finfo(float).eps


def _diffusion_setup(h: GeneralizedHypergraph):
    if not validate(h).connected:
        raise ValidationError("diffusion diagnostics need a connected hypergraph")
    rep = check_equivalence_conditions(h)
    if not (rep.condition1 or rep.condition2.holds):
        raise ValidationError("diffusion bound needs equivalence condition (1) or (2)")
    bundle = unified_laplacian(h, check=False)
    lam_H = spectrum(bundle.L).lambda_H
    if lam_H is None:
        raise ValidationError("Laplacian has no positive eigenvalue")
    return bundle.d_hat, lam_H, transition_matrix(h)


def _trace(setup, i: int, k_max: int) -> tuple[DiffusionTrace, np.ndarray]:
    d_hat, lam_H, T = setup
    # K is PSD so lambda_H <= 1; clip rounding noise
    rate = max(1.0 - lam_H, 0.0)
    pi = d_hat / d_hat.sum()
    p = step_distributions(T, i, k_max)
    ks = np.arange(k_max + 1)
    decay = rate ** ks.astype(float)
    scale = np.sqrt(d_hat / d_hat[i])
    err = np.abs(p - pi)
    err[err <= ROUNDING_FLOOR] = 0.0
    per_j = np.outer(decay, scale)
    l1 = err.sum(axis=1)
    bound = per_j.sum(axis=1)
    n = d_hat.size
    trace = DiffusionTrace(
        source=i,
        lambda_H=lam_H,
        k=ks,
        l1_error=l1,
        bound=bound,
        energy=_safe_ratio(n, l1),
        energy_lower_bound=_safe_ratio(n, bound),
        max_excess=float((err - per_j).max()),
    )
    return trace, err - per_j


def convergence_bound_check(h: GeneralizedHypergraph, source, k_max: int = 50,
                            slack: float = 1e-9) -> tuple[DiffusionTrace, bool]:
    """Check ``|p^(k)(j) - pi(j)| <= sqrt(d_hat(j)/d_hat(i)) (1 - lambda_H)^k``.

    Every target ``j`` and step ``k <= k_max`` is tested with additive
    ``slack``.  Errors below ``ROUNDING_FLOOR`` are treated as zero.
    """
    if k_max < 0:
        raise ValidationError("k_max must be nonnegative")
    trace, excess = _trace(_diffusion_setup(h), h.vertex_index(source), k_max)
    return trace, bool(np.all(excess <= slack))


def convergence_bound_check_all(h: GeneralizedHypergraph, k_max: int = 50,
                                slack: float = 1e-9) -> tuple[list, bool]:
    """:func:`convergence_bound_check` for every source, sharing one eigendecomposition."""
    if k_max < 0:
        raise ValidationError("k_max must be nonnegative")
    setup = _diffusion_setup(h)
    traces, passed = [], True
    for i in range(h.n_vertices):
        trace, excess = _trace(setup, i, k_max)
        traces.append(trace)
        passed = passed and bool(np.all(excess <= slack))
    return traces, passed


def oversmoothing_energy(h: GeneralizedHypergraph, source, t: int) -> tuple[float, float, float]:
    """``(l1_error, e, e_low)`` after ``t`` diffusion steps from ``source``.

    ``e = N / ||f P^t - pi||_1`` and
    ``e_low = N sqrt(d_hat(i)) / ((1 - lambda_H)^t sum_j sqrt(d_hat(j)))``;
    either is ``inf`` when its denominator is zero.
    """
    if t < 0:
        raise ValidationError("t must be nonnegative")
    trace, _ = _trace(_diffusion_setup(h), h.vertex_index(source), t)
    return float(trace.l1_error[-1]), float(trace.energy[-1]), float(trace.energy_lower_bound[-1])


def digraph_laplacian(P, pi, tol: float = 1e-9) -> sp.csr_matrix:
    """Random-walk Laplacian of a (possibly irreversible) chain.

    ``L_rw = I - (Phi^{1/2} P Phi^{-1/2} + Phi^{-1/2} P^T Phi^{1/2}) / 2``
    with ``Phi = diag(pi)``.
    """
    P = _as_csr(P)
    pi = np.asarray(pi, dtype=float)
    if pi.shape != (P.shape[0],):
        raise ValidationError("pi length does not match P")
    if np.any(pi <= 0):
        raise ValidationError("pi must be strictly positive")
    res = _residual(pi, P)
    if res > tol:
        raise ValidationError(f"pi is not stationary for P (residual {res:.3e})")
    r = np.sqrt(pi)
    S = sp.diags(r) @ P @ sp.diags(1.0 / r)
    L = _symmetric(sp.identity(P.shape[0], format="csr") - _symmetric(S))
    return L

