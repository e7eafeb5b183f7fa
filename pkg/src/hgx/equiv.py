"""Equivalence between hypergraph walks and walks on undirected clique graphs.

A lazy hypergraph walk is reproduced by a random walk on a weighted clique
graph whenever

* condition (1): ``Q1`` and ``Q2`` are both edge-independent, or
* condition (2): ``Q1 = k Q2`` for a scalar ``k``,

and more generally whenever ``T2(u) T1(v) F(u, v) = T2(v) T1(u) F(v, u)``
for all vertex pairs, with ``F = Q1 W rho(D_e) Q2^T`` and ``T1``, ``T2`` the
degrees built from ``Q1`` and ``Q2``.  Under (1) or (2) the clique weights
are ``K = Q2 W rho(D_e) Q2^T``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import NotEquivalentError, ValidationError
from .hypergraph import GeneralizedHypergraph, degree_profile, edge_factor, rows_constant
from .walk import TransitionMatrix, _row_scale, walk_numerator


@dataclass(frozen=True)
class Condition2:
    holds: bool
    k: float | None


@dataclass(frozen=True)
class ConditionReport:
    """Which equivalence conditions a hypergraph satisfies.

    ``worst_pair`` is the vertex pair with the largest relative violation of
    the general equation, or ``None`` when it holds.
    """

    condition1: bool
    condition2: Condition2
    general_equation_holds: bool
    tolerance: float
    worst_pair: tuple | None = None

    @property
    def equivalent(self) -> bool:
        return self.general_equation_holds

    def to_dict(self) -> dict:
        return {
            "condition1": self.condition1,
            "condition2": {"holds": self.condition2.holds, "k": self.condition2.k},
            "general_equation_holds": self.general_equation_holds,
            "tolerance": self.tolerance,
        }


def _symmetric(M: sp.spmatrix) -> sp.csr_matrix:
    # (M + M^T)/2 is bitwise symmetric because addition commutes
    M = sp.csr_matrix(M)
    S = sp.csr_matrix((M + M.T) * 0.5)
    S.sort_indices()
    return S


def clique_weights(h: GeneralizedHypergraph) -> sp.csr_matrix:
    """``K = Q2 W rho(D_e) Q2^T``, exactly symmetric."""
    c = edge_factor(h)
    return _symmetric(h.Q2 @ sp.diags(c) @ h.Q2.T)


def _estimate_k(h: GeneralizedHypergraph, tol: float) -> Condition2:
    ratios = h.Q1.data / h.Q2.data
    if ratios.size == 0:
        return Condition2(True, 1.0)
    k = float(np.median(ratios))
    holds = bool(np.all(np.abs(ratios - k) <= tol * abs(k)))
    return Condition2(holds, k if holds else None)


def _general_equation(h: GeneralizedHypergraph, tol: float) -> tuple[bool, tuple | None]:
    prof = degree_profile(h, nonlazy=False)
    F = walk_numerator(h)
    G = sp.csr_matrix(sp.diags(prof.d_hat) @ F @ sp.diags(prof.d))
    D = abs(G - G.T).tocsr()
    S = (abs(G) + abs(G.T)).tocsr()
    excess = (D - tol * S).tocoo()
    bad = excess.data > 0
    if not np.any(bad):
        return True, None
    # report the pair with the largest relative violation
    rel = D.multiply(S.power(-1)).tocoo()
    k = int(np.argmax(rel.data))
    u, v = sorted((int(rel.row[k]), int(rel.col[k])))
    return False, (u, v)


def check_equivalence_conditions(h: GeneralizedHypergraph, tol: float = 1e-9) -> ConditionReport:
    """Evaluate conditions (1), (2) and the general pairwise equation.

    The general equation is checked on every nonzero of ``F`` (pairs outside
    the pattern satisfy it trivially), so no sampling is needed.
    """
    if tol <= 0:
        raise ValidationError("tol must be positive")
    cond1 = bool(rows_constant(h.Q1, tol).all() and rows_constant(h.Q2, tol).all())
    cond2 = _estimate_k(h, tol)
    general, worst = _general_equation(h, tol)
    return ConditionReport(cond1, cond2, general, tol, worst)


@dataclass(frozen=True, eq=False)
class CliqueGraph:
    """Weighted undirected clique graph.

    Attributes
    ----------
    vertex_ids : tuple of str
    Wc : scipy.sparse.csr_matrix
        Symmetric weights; self-loops are kept.
    source : {'condition1', 'condition2', 'general'}
        Which construction produced the weights.
    """

    vertex_ids: tuple
    Wc: sp.csr_matrix
    source: str = "condition2"

    def without_self_loops(self) -> "CliqueGraph":
        W = self.Wc.tolil(copy=True)
        W.setdiag(0.0)
        W = W.tocsr()
        W.eliminate_zeros()
        return CliqueGraph(self.vertex_ids, W, self.source)


def clique_graph(h: GeneralizedHypergraph, tol: float = 1e-9) -> CliqueGraph:
    """Equivalent clique graph of ``h``.

    Raises
    ------
    NotEquivalentError
        If the general equation fails; use ``spectral.digraph_laplacian``
        on the walk instead.
    """
    rep = check_equivalence_conditions(h, tol)
    if not rep.general_equation_holds:
        raise NotEquivalentError(
            f"no undirected clique graph reproduces this walk (pair {rep.worst_pair}); "
            "use the digraph Laplacian instead"
        )
    if rep.condition2.holds:
        return CliqueGraph(h.vertex_ids, clique_weights(h), "condition2")
    if rep.condition1:
        return CliqueGraph(h.vertex_ids, clique_weights(h), "condition1")
    prof = degree_profile(h, nonlazy=False)
    ratio = np.zeros(h.n_vertices)
    nz = prof.d > 0
    ratio[nz] = prof.d_hat[nz] / prof.d[nz]
    W = sp.csr_matrix(sp.diags(ratio) @ walk_numerator(h))
    gap = abs(W - W.T)
    scale = max(float(abs(W).max()), 1.0) if W.nnz else 1.0
    if gap.nnz and gap.max() > 1e-12 * scale:
        raise NotEquivalentError("general-equation clique weights are not symmetric within 1e-12")
    return CliqueGraph(h.vertex_ids, _symmetric(W), "general")


def clique_walk_matrix(g: CliqueGraph, allow_isolated: bool = False) -> TransitionMatrix:
    """Random walk ``P(u, v) = Wc(u, v) / sum_b Wc(u, b)`` on the clique graph."""
    deg = np.asarray(g.Wc.sum(axis=1)).ravel()
    P, isolated = _row_scale(g.Wc, deg)
    if isolated.size and not allow_isolated:
        raise ValidationError(f"vertex {g.vertex_ids[isolated[0]]!r} is isolated")
    return TransitionMatrix(P, "clique_walk", g.vertex_ids, tuple(int(i) for i in isolated))
