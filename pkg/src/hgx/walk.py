"""Unified random walks on generalized hypergraphs.

The lazy walk first picks an incident hyperedge ``e`` with probability
proportional to ``w(e) delta(e) rho(delta(e)) Q1(u, e)`` and then a member
``v`` of ``e`` proportionally to ``Q2(v, e)``; in matrix form

    P = D_v^{-1} Q1 W rho(D_e) Q2^T.

The non-lazy walk excludes the current vertex from the second step and
re-weights hyperedges by ``rho(delta(e) - Q2(u, e))`` accordingly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import NumericalError, ValidationError
from .hypergraph import (
    GeneralizedHypergraph,
    degree_profile,
    edge_factor,
    nonlazy_remainders,
)

WALK_KINDS = ("lazy", "non_lazy", "clique_walk")


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    """Row-stochastic transition matrix.

    Attributes
    ----------
    P : scipy.sparse.csr_matrix
        ``P[u, v]`` is the probability of stepping from ``u`` to ``v``.
    kind : {'lazy', 'non_lazy', 'clique_walk'}
    vertex_ids : tuple of str
    isolated : tuple of int
        Indices of vertices whose rows are all zero.
    """

    P: sp.csr_matrix
    kind: str
    vertex_ids: tuple = ()
    isolated: tuple = ()

    def __post_init__(self):
        if self.kind not in WALK_KINDS:
            raise ValidationError(f"unknown walk kind {self.kind!r}")
        P = sp.csr_matrix(self.P, dtype=float)
        if P.shape[0] != P.shape[1]:
            raise ValidationError("transition matrix must be square")
        object.__setattr__(self, "P", P)
        if not self.vertex_ids:
            object.__setattr__(self, "vertex_ids", tuple(str(i) for i in range(P.shape[0])))

    @property
    def n(self) -> int:
        return self.P.shape[0]

    def toarray(self) -> np.ndarray:
        return self.P.toarray()


def _row_scale(M: sp.spmatrix, d: np.ndarray) -> tuple[sp.csr_matrix, np.ndarray]:
    """Divide row ``u`` by ``d[u]``; rows with ``d[u] == 0`` stay zero."""
    zero = d <= 0
    inv = np.zeros_like(d, dtype=float)
    inv[~zero] = 1.0 / d[~zero]
    return sp.csr_matrix(sp.diags(inv) @ M), np.flatnonzero(zero)


def _check_isolated(h, isolated, allow_isolated, what="degree"):
    if isolated.size and not allow_isolated:
        raise ValidationError(
            f"vertex {h.vertex_ids[isolated[0]]!r} has zero {what}; pass allow_isolated=True"
        )


def walk_numerator(h: GeneralizedHypergraph) -> sp.csr_matrix:
    """``F = Q1 W rho(D_e) Q2^T`` (unnormalized lazy transition weights)."""
    c = edge_factor(h)
    return sp.csr_matrix(h.Q1 @ sp.diags(c) @ h.Q2.T)


def transition_matrix(h: GeneralizedHypergraph, allow_isolated: bool = False) -> TransitionMatrix:
    """Lazy unified random-walk transition matrix.

    Raises
    ------
    ValidationError
        If a vertex has no incident hyperedge and ``allow_isolated`` is false.
    """
    d = degree_profile(h, nonlazy=False).d
    P, isolated = _row_scale(walk_numerator(h), d)
    _check_isolated(h, isolated, allow_isolated)
    return TransitionMatrix(P, "lazy", h.vertex_ids, tuple(int(i) for i in isolated))


def transition_matrix_nonlazy(h: GeneralizedHypergraph,
                              allow_isolated: bool = False) -> TransitionMatrix:
    """Non-lazy walk: the second step never returns to the current vertex.

    ``P_nl(u, v) = sum_e w(e) rho(delta(e) - Q2(u, e)) Q1(u, e) Q2(v, e) / d_nl(u)``
    for ``u != v`` and zero on the diagonal.
    """
    R = nonlazy_remainders(h)
    if np.any(R.data <= 0):
        p = int(np.flatnonzero(R.data <= 0)[0])
        e = int(np.searchsorted(R.indptr, p, side="right") - 1)
        raise ValidationError(
            f"vertex {h.vertex_ids[R.indices[p]]!r} carries all Q2 mass of edge "
            f"{h.edge_ids[e]!r}; the non-lazy walk is undefined"
        )
    col = np.repeat(np.arange(h.n_edges), np.diff(R.indptr))
    A = h.Q1.copy()
    A.data = h.w[col] * h.rho(R.data) * h.Q1.data
    F = sp.csr_matrix(A @ h.Q2.T)
    F.setdiag(0.0)
    F.eliminate_zeros()
    P, isolated = _row_scale(F, degree_profile(h).d_nl)
    _check_isolated(h, isolated, allow_isolated, "non-lazy degree")
    return TransitionMatrix(P, "non_lazy", h.vertex_ids, tuple(int(i) for i in isolated))


def _oracle_row(h: GeneralizedHypergraph, u: int) -> dict[int, float]:
    # plain-Python walk over the incidence lists, no matrix algebra
    edges = []
    for j in range(h.n_edges):
        mem = h.members(j)
        q1u = next((q1 for v, q1, _ in mem if v == u), None)
        if q1u is None:
            continue
        delta = sum(q2 for _, _, q2 in mem)
        rho = float(h.rho([delta])[0])
        edges.append((h.w[j] * delta * rho * q1u, delta, mem))
    d_u = sum(weight for weight, _, _ in edges)
    if d_u <= 0:
        raise ValidationError(f"vertex {h.vertex_ids[u]!r} is isolated")
    row: dict[int, float] = {}
    for weight, delta, mem in edges:
        p1 = weight / d_u
        for v, _, q2 in mem:
            row[v] = row.get(v, 0.0) + p1 * (q2 / delta)
    return row


def two_step_oracle(h: GeneralizedHypergraph, u, v) -> float:
    """Brute-force ``sum_e p1(u, e) p2(e, v)`` for one vertex pair."""
    return _oracle_row(h, h.vertex_index(u)).get(h.vertex_index(v), 0.0)


def oracle_matrix(h: GeneralizedHypergraph) -> np.ndarray:
    """Dense transition matrix assembled pair by pair from the two-step oracle."""
    n = h.n_vertices
    out = np.zeros((n, n))
    for u in range(n):
        for v, p in _oracle_row(h, u).items():
            out[u, v] = p
    return out


@dataclass(frozen=True)
class StationaryDistribution:
    """Stationary distribution with provenance.

    ``pi`` is zero on isolated vertices, which are listed in ``isolated``.
    """

    pi: np.ndarray
    method: str
    residual: float
    isolated: tuple = ()


def _as_csr(P) -> sp.csr_matrix:
    if isinstance(P, TransitionMatrix):
        return P.P
    return sp.csr_matrix(P, dtype=float)


def _residual(pi, P) -> float:
    return float(np.abs(P.T @ pi - pi).sum())


def _closed_form(h: GeneralizedHypergraph, tol: float) -> StationaryDistribution:
    from .equiv import check_equivalence_conditions

    rep = check_equivalence_conditions(h)
    if not (rep.condition1 or rep.condition2.holds):
        raise ValidationError(
            "closed-form stationary distribution requires equivalence condition (1) or (2)"
        )
    d_hat = degree_profile(h, nonlazy=False).d_hat
    pi = d_hat / d_hat.sum()
    T = transition_matrix(h, allow_isolated=True)
    res = _residual(pi, T.P)
    if res > max(tol, 1e-12):
        raise NumericalError(f"closed-form distribution has residual {res:.3e}")
    return StationaryDistribution(pi, "closed_form", res, T.isolated)


def _power_iteration(P: sp.csr_matrix, tol: float, max_iters: int,
                     block: int = 100) -> StationaryDistribution:
    n = P.shape[0]
    live = np.flatnonzero(np.diff(P.indptr) > 0)
    isolated = tuple(int(i) for i in np.setdiff1d(np.arange(n), live))
    if live.size == 0:
        raise ValidationError("transition matrix has no non-isolated vertex")
    Ps = P[live][:, live].tocsr()
    n_comp, _ = connected_components(Ps, directed=True, connection="strong")
    if n_comp != 1:
        raise ValidationError("power iteration requires an irreducible chain (connected input)")
    PT = Ps.T.tocsr()
    x = np.full(live.size, 1.0 / live.size)
    acc = np.zeros_like(x)
    for it in range(1, max_iters + 1):
        y = PT @ x
        y /= y.sum()
        res = float(np.abs(y - x).sum())
        x = y
        if res <= tol:
            break
        # Cesaro averaging over blocks handles periodic chains
        acc += x
        if it % block == 0:
            avg = acc / block
            avg /= avg.sum()
            if _residual(avg, Ps) <= tol:
                x = avg
                break
            acc[:] = 0.0
    else:
        raise NumericalError(f"power iteration did not converge in {max_iters} iterations")
    pi = np.zeros(n)
    pi[live] = x
    return StationaryDistribution(pi, "power_iteration", _residual(pi, P), isolated)


def stationary_distribution(target, mode: str = "auto", tol: float = 1e-12,
                            max_iters: int = 100000) -> StationaryDistribution:
    """Stationary distribution of a hypergraph walk or of a transition matrix.

    Parameters
    ----------
    target : GeneralizedHypergraph, TransitionMatrix or matrix
        Hypergraphs use the lazy walk.
    mode : {'auto', 'closed', 'power'}
        ``closed`` returns ``pi = d_hat / sum(d_hat)`` and needs a hypergraph
        meeting condition (1) or (2); ``power`` iterates on ``P^T``;
        ``auto`` picks ``closed`` whenever possible.
    tol : float
        Target residual ``||pi P - pi||_1``.
    max_iters : int

    Raises
    ------
    ValidationError
        Closed form requested on a non-qualifying input, or reducible chain.
    NumericalError
        Power iteration failed to converge.
    """
    if mode not in ("auto", "closed", "power"):
        raise ValidationError(f"unknown mode {mode!r}")
    if isinstance(target, GeneralizedHypergraph):
        if mode == "closed":
            return _closed_form(target, tol)
        if mode == "auto":
            from .equiv import check_equivalence_conditions

            rep = check_equivalence_conditions(target)
            if rep.condition1 or rep.condition2.holds:
                return _closed_form(target, tol)
        P = transition_matrix(target, allow_isolated=True).P
    else:
        if mode == "closed":
            raise ValidationError("closed form needs a hypergraph, not a bare matrix")
        P = _as_csr(target)
    return _power_iteration(P, tol, max_iters)


@dataclass(frozen=True)
class ReversibilityReport:
    """Detailed-balance check.

    ``worst_violation`` is ``(u, v, |pi(u)P(u,v) - pi(v)P(v,u)|)`` with
    ``u < v`` (0-based), or ``None`` if every pair balances exactly.
    ``forward`` and ``backward`` are the two fluxes of that pair.
    """

    reversible: bool
    worst_violation: tuple | None
    forward: float = 0.0
    backward: float = 0.0


def is_reversible(P, pi, tol: float = 1e-9) -> ReversibilityReport:
    """Test detailed balance ``pi(u) P(u, v) = pi(v) P(v, u)`` over all pairs.

    Ties for the largest violation (within a relative 1e-9) resolve to the
    first pair in row-major order.
    """
    P = _as_csr(P)
    pi = np.asarray(pi, dtype=float)
    if pi.shape != (P.shape[0],):
        raise ValidationError("pi length does not match P")
    res = _residual(pi, P)
    if res > tol:
        raise ValidationError(f"pi is not stationary for P (residual {res:.3e})")
    M = sp.csr_matrix(sp.diags(pi) @ P)
    V = sp.triu(M - M.T, k=1).tocoo()
    mag = np.abs(V.data)
    if mag.size == 0 or mag.max() == 0:
        return ReversibilityReport(True, None)
    m = mag.max()
    cand = np.flatnonzero(mag >= m * (1 - 1e-9))
    k = cand[np.lexsort((V.col[cand], V.row[cand]))[0]]
    u, v = int(V.row[k]), int(V.col[k])
    return ReversibilityReport(bool(m <= tol), (u, v, float(mag[k])),
                               float(M[u, v]), float(M[v, u]))


def _source_index(P, source, vertex_ids) -> int:
    n = P.shape[0]
    ids = vertex_ids or ()
    if isinstance(source, (int, np.integer)) and not isinstance(source, bool):
        if 0 <= source < n:
            return int(source)
        raise ValidationError(f"vertex index {source} out of range")
    try:
        return list(ids).index(str(source))
    except ValueError:
        raise ValidationError(f"unknown vertex {source!r}") from None


def step_distributions(P, source, k_max: int, vertex_ids=None) -> np.ndarray:
    """Rows ``p^(0), ..., p^(k_max)`` of the walk started at ``source``."""
    if k_max < 0:
        raise ValidationError("k must be nonnegative")
    if vertex_ids is None and isinstance(P, TransitionMatrix):
        vertex_ids = P.vertex_ids
    P = _as_csr(P)
    i = _source_index(P, source, vertex_ids)
    PT = P.T.tocsr()
    out = np.zeros((k_max + 1, P.shape[0]))
    out[0, i] = 1.0
    for k in range(1, k_max + 1):
        out[k] = PT @ out[k - 1]
    return out


def step_distribution(P, source, k: int, vertex_ids=None) -> np.ndarray:
    """``p^(k) = f P^k`` with ``f`` the indicator of ``source``."""
    return step_distributions(P, source, k, vertex_ids)[-1]
