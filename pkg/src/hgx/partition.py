"""Normalized-cut objective for generalized hypergraphs.

For a vertex set ``S`` with complement ``S^c``

    vol(S)  = sum_{u in S} d_hat(u) / vol(V)
    vol(dS) = sum_{e crossing} w(e) rho(delta(e)) m(e & S) m(e & S^c) / vol(V)
    c(S)    = vol(dS) * (1 / vol(S) + 1 / vol(S^c))

where ``m(A) = sum_{v in A} Q2(v, e)``.  With ``Q2 = H`` and
``rho(x) = 1/x`` this is Zhou's hypergraph normalized cut.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .equiv import check_equivalence_conditions
from .errors import ValidationError
from .hypergraph import GeneralizedHypergraph, degree_profile, edge_factor
from .spectral import _inv_sqrt, spectrum, unified_laplacian
from .walk import stationary_distribution


@dataclass(frozen=True)
class CutReport:
    S: tuple
    vol_S: float
    vol_Sc: float
    vol_boundary: float
    c: float
    boundary_edges: tuple = ()

    def to_dict(self) -> dict:
        return {"S": list(self.S), "vol_S": self.vol_S, "vol_Sc": self.vol_Sc,
                "vol_boundary": self.vol_boundary, "c": self.c,
                "boundary_edges": list(self.boundary_edges)}


def _mask(h: GeneralizedHypergraph, S: Iterable) -> np.ndarray:
    mask = np.zeros(h.n_vertices, dtype=bool)
    for v in S:
        mask[h.vertex_index(v)] = True
    if not mask.any() or mask.all():
        raise ValidationError("S must be a non-empty proper subset of the vertices")
    return mask


def _cut(h: GeneralizedHypergraph, mask: np.ndarray, pi: np.ndarray, vol_V: float) -> CutReport:
    Q2 = h.Q2
    H = h.H
    m_S = Q2.T @ mask.astype(float)
    m_Sc = Q2.T @ (~mask).astype(float)
    crossing = ((H.T @ mask.astype(float)) > 0) & ((H.T @ (~mask).astype(float)) > 0)
    c_e = edge_factor(h)
    vol_b = float(np.sum(c_e[crossing] * m_S[crossing] * m_Sc[crossing]) / vol_V)
    vol_S = float(pi[mask].sum())
    vol_Sc = float(pi[~mask].sum())
    if vol_S <= 0 or vol_Sc <= 0:
        raise ValidationError("both sides of the cut need positive volume")
    c = 0.0 if vol_b == 0 else vol_b * (1.0 / vol_S + 1.0 / vol_Sc)
    return CutReport(
        tuple(v for v, s in zip(h.vertex_ids, mask) if s),
        vol_S, vol_Sc, vol_b, c,
        tuple(e for e, x in zip(h.edge_ids, crossing) if x),
    )


def _volumes(h: GeneralizedHypergraph, use_power_iteration: bool):
    d_hat = degree_profile(h, nonlazy=False).d_hat
    vol_V = float(d_hat.sum())
    if use_power_iteration:
        return stationary_distribution(h, mode="power").pi, vol_V
    rep = check_equivalence_conditions(h)
    if not (rep.condition1 or rep.condition2.holds):
        raise ValidationError(
            "cut objective needs condition (1) or (2); pass use_power_iteration=True to "
            "use an iterated stationary distribution instead"
        )
    return d_hat / vol_V, vol_V


def cut_objective(h: GeneralizedHypergraph, S: Iterable,
                  use_power_iteration: bool = False) -> CutReport:
    """Evaluate ``c(S)``.

    Parameters
    ----------
    S : iterable of vertex labels or indices
    use_power_iteration : bool
        Take volumes from a power-iterated stationary distribution, which
        allows hypergraphs outside conditions (1)/(2).  The objective then has
        no clique-graph interpretation.
    """
    pi, vol_V = _volumes(h, use_power_iteration)
    return _cut(h, _mask(h, S), pi, vol_V)


def cut_sweep(h: GeneralizedHypergraph) -> tuple[CutReport, np.ndarray]:
    """Heuristic spectral sweep.

    Vertices are ordered by ``D_hat^{-1/2} u_2`` (``u_2`` the eigenvector of
    the second-smallest eigenvalue of ``L``) and every prefix cut is scored.
    Returns the best cut and the objective along the sweep.
    """
    if h.n_vertices < 2:
        raise ValidationError("need at least two vertices to cut")
    pi, vol_V = _volumes(h, False)
    bundle = unified_laplacian(h, check=False)
    vec = spectrum(bundle.L).eigenvectors[:, 1] * _inv_sqrt(bundle.d_hat)
    order = np.lexsort((np.arange(h.n_vertices), vec))
    scores = np.full(h.n_vertices - 1, np.inf)
    best = None
    mask = np.zeros(h.n_vertices, dtype=bool)
    for i, v in enumerate(order[:-1]):
        mask[v] = True
        try:
            rep = _cut(h, mask, pi, vol_V)
        except ValidationError:
            continue
        scores[i] = rep.c
        if best is None or rep.c < best.c:
            best = rep
    if best is None:
        raise ValidationError("no prefix cut has positive volume on both sides")
    return best, scores
