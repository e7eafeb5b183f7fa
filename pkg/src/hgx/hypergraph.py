"""Generalized hypergraphs with edge-dependent vertex weights.

A generalized hypergraph carries two weighted incidence matrices ``Q1`` and
``Q2`` (|V| x |E|) with a shared sparsity pattern, a positive edge-weight
vector ``w`` and a degree-shaping function ``rho`` applied to hyperedge
degrees.  ``Q1`` weights the first step of the two-step walk (vertex ->
hyperedge), ``Q2`` the second step (hyperedge -> vertex).

Vertex and edge labels are strings; internally everything is indexed by the
order of first appearance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import ValidationError

RHO_KINDS = ("power", "log", "exp", "neg_exp", "sigmoid", "gaussian_pdf", "custom_table")

# dense conversions are refused above this many vertices
DENSE_LIMIT = 5000


@dataclass(frozen=True)
class RhoSpec:
    """Degree-shaping function applied to hyperedge degrees.

    ``power`` evaluates ``x ** sigma``; ``custom_table`` requires every
    evaluated degree to be an exact key of ``table``.
    """

    kind: str = "power"
    sigma: float = -1.0
    table: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        if self.kind not in RHO_KINDS:
            raise ValidationError(f"unknown rho kind {self.kind!r}")
        if not math.isfinite(self.sigma):
            raise ValidationError("rho sigma must be finite")
        if self.kind == "custom_table":
            if not self.table:
                raise ValidationError("custom_table rho needs a non-empty table")
            keys = [k for k, _ in self.table]
            if len(set(keys)) != len(keys):
                raise ValidationError("custom_table rho has duplicate keys")

    def _raw(self, x: np.ndarray) -> np.ndarray:
        if self.kind == "power":
            return np.power(x, self.sigma)
        if self.kind == "log":
            return np.log(x)
        if self.kind == "exp":
            return np.exp(x)
        if self.kind == "neg_exp":
            return np.exp(-x)
        if self.kind == "sigmoid":
            return 1.0 / (1.0 + np.exp(-x))
        if self.kind == "gaussian_pdf":
            return np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
        lookup = dict(self.table)
        out = np.empty_like(x)
        for i, xi in enumerate(x):
            try:
                out[i] = lookup[float(xi)]
            except KeyError:
                raise ValidationError(f"rho table has no exact entry for degree {xi!r}") from None
        return out

    def __call__(self, x) -> np.ndarray:
        """Evaluate on an array of positive degrees.

        Each distinct degree value is evaluated once.  Raises
        ``ValidationError`` if any result is not finite and strictly positive.
        """
        x = np.asarray(x, dtype=float)
        if x.size == 0:
            return x.copy()
        if np.any(x <= 0):
            raise ValidationError("rho is only defined on positive degrees")
        uniq, inverse = np.unique(x, return_inverse=True)
        with np.errstate(all="ignore"):
            vals = self._raw(uniq)
        bad = ~np.isfinite(vals) | (vals <= 0)
        if np.any(bad):
            raise ValidationError(
                f"rho ({self.kind}) is not finite and positive at degree {uniq[bad][0]!r}"
            )
        return vals[inverse].reshape(x.shape)

    def to_dict(self) -> dict:
        if self.kind == "power":
            return {"kind": "power", "sigma": self.sigma}
        if self.kind == "custom_table":
            return {"kind": "custom_table", "table": [[k, v] for k, v in self.table]}
        return {"kind": self.kind}


def _canonical(Q, shape) -> sp.csc_matrix:
    Q = sp.csc_matrix(Q, dtype=float, shape=shape, copy=True)
    Q.sum_duplicates()
    Q.eliminate_zeros()
    Q.sort_indices()
    return Q


def _freeze(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class GeneralizedHypergraph:
    """Immutable generalized hypergraph.

    Attributes
    ----------
    vertex_ids, edge_ids : tuple of str
        Labels; positions define the internal indices.
    w : (|E|,) ndarray
        Positive hyperedge weights.
    Q1, Q2 : (|V|, |E|) scipy.sparse.csc_matrix
        Weighted incidence matrices with an identical sparsity pattern.
    rho : RhoSpec
        Degree-shaping function.
    meta : dict
        Free-form builder metadata (not part of equality).
    """

    vertex_ids: tuple
    edge_ids: tuple
    w: np.ndarray
    Q1: sp.csc_matrix
    Q2: sp.csc_matrix
    rho: RhoSpec = RhoSpec()
    meta: Mapping = field(default_factory=dict)

    def __post_init__(self):
        vids = tuple(str(v) for v in self.vertex_ids)
        eids = tuple(str(e) for e in self.edge_ids)
        if len(set(vids)) != len(vids):
            raise ValidationError("duplicate vertex id")
        if len(set(eids)) != len(eids):
            raise ValidationError("duplicate edge id")
        shape = (len(vids), len(eids))
        Q1 = _canonical(self.Q1, shape)
        Q2 = _canonical(self.Q2, shape)
        w = np.array(self.w, dtype=float).reshape(-1)
        if w.shape != (shape[1],):
            raise ValidationError(f"expected {shape[1]} edge weights, got {w.size}")
        if np.any(~np.isfinite(w)) or np.any(w <= 0):
            raise ValidationError("edge weights must be finite and > 0")
        for name, Q in (("Q1", Q1), ("Q2", Q2)):
            if np.any(~np.isfinite(Q.data)) or np.any(Q.data < 0):
                raise ValidationError(f"{name} entries must be finite and nonnegative")
        if not (np.array_equal(Q1.indptr, Q2.indptr) and np.array_equal(Q1.indices, Q2.indices)):
            raise ValidationError("Q1 and Q2 must share the same sparsity pattern")
        sizes = np.diff(Q2.indptr)
        if np.any(sizes == 0):
            empty = eids[int(np.flatnonzero(sizes == 0)[0])]
            raise ValidationError(f"edge {empty!r} has no members")
        for Q in (Q1, Q2):
            for arr in (Q.data, Q.indices, Q.indptr):
                _freeze(arr)
        object.__setattr__(self, "vertex_ids", vids)
        object.__setattr__(self, "edge_ids", eids)
        object.__setattr__(self, "w", _freeze(w))
        object.__setattr__(self, "Q1", Q1)
        object.__setattr__(self, "Q2", Q2)
        object.__setattr__(self, "meta", dict(self.meta))
        object.__setattr__(self, "_vindex", {v: i for i, v in enumerate(vids)})
        object.__setattr__(self, "_eindex", {e: i for i, e in enumerate(eids)})

    @classmethod
    def from_matrices(cls, Q1, Q2=None, w=None, rho: RhoSpec | None = None,
                      vertex_ids: Sequence | None = None, edge_ids: Sequence | None = None,
                      meta: Mapping | None = None) -> "GeneralizedHypergraph":
        """Build from (dense or sparse) incidence matrices; ``Q2`` defaults to ``Q1``."""
        Q1 = sp.csc_matrix(Q1, dtype=float)
        Q2 = Q1 if Q2 is None else sp.csc_matrix(Q2, dtype=float)
        n, m = Q1.shape
        return cls(
            vertex_ids=tuple(vertex_ids) if vertex_ids is not None else tuple(f"v{i}" for i in range(n)),
            edge_ids=tuple(edge_ids) if edge_ids is not None else tuple(f"e{j}" for j in range(m)),
            w=np.ones(m) if w is None else w,
            Q1=Q1,
            Q2=Q2,
            rho=rho or RhoSpec(),
            meta=meta or {},
        )

    @property
    def n_vertices(self) -> int:
        return len(self.vertex_ids)

    @property
    def n_edges(self) -> int:
        return len(self.edge_ids)

    @property
    def H(self) -> sp.csc_matrix:
        """Binary incidence matrix."""
        H = self.Q2.copy()
        H.data = np.ones_like(H.data)
        return H

    def vertex_index(self, v) -> int:
        if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
            if not 0 <= v < self.n_vertices:
                raise ValidationError(f"vertex index {v} out of range")
            return int(v)
        try:
            return self._vindex[str(v)]
        except KeyError:
            raise ValidationError(f"unknown vertex {v!r}") from None

    def edge_index(self, e) -> int:
        try:
            return self._eindex[str(e)]
        except KeyError:
            raise ValidationError(f"unknown edge {e!r}") from None

    def members(self, e) -> list[tuple[int, float, float]]:
        """``(vertex index, q1, q2)`` triples of edge ``e`` (label or index)."""
        j = e if isinstance(e, (int, np.integer)) else self.edge_index(e)
        lo, hi = self.Q2.indptr[j], self.Q2.indptr[j + 1]
        return [
            (int(self.Q2.indices[p]), float(self.Q1.data[p]), float(self.Q2.data[p]))
            for p in range(lo, hi)
        ]

    def with_q1(self, Q1) -> "GeneralizedHypergraph":
        """Copy with ``Q1`` replaced (pattern must match)."""
        return GeneralizedHypergraph(self.vertex_ids, self.edge_ids, self.w, Q1, self.Q2,
                                     self.rho, self.meta)

    def with_rho(self, rho: RhoSpec) -> "GeneralizedHypergraph":
        return GeneralizedHypergraph(self.vertex_ids, self.edge_ids, self.w, self.Q1, self.Q2,
                                     rho, self.meta)

    def __eq__(self, other):
        if not isinstance(other, GeneralizedHypergraph):
            return NotImplemented
        if (self.vertex_ids, self.edge_ids, self.rho) != (other.vertex_ids, other.edge_ids, other.rho):
            return False
        if not np.array_equal(self.w, other.w):
            return False
        for a, b in ((self.Q1, other.Q1), (self.Q2, other.Q2)):
            if not (np.array_equal(a.indptr, b.indptr) and np.array_equal(a.indices, b.indices)
                    and np.array_equal(a.data, b.data)):
                return False
        return True

    __hash__ = None

    def __repr__(self):
        return (f"GeneralizedHypergraph(|V|={self.n_vertices}, |E|={self.n_edges}, "
                f"rho={self.rho})")


def build_hypergraph(records: Iterable[tuple], edge_weights: Mapping | None = None,
                     rho: RhoSpec | None = None, *, vertices: Sequence | None = None,
                     default_weight: float | None = 1.0) -> GeneralizedHypergraph:
    """Build a hypergraph from an incidence list.

    Parameters
    ----------
    records : iterable of (vertex, edge, q1, q2)
        One entry per incidence; ``q1`` and ``q2`` must be positive.
    edge_weights : mapping edge -> float, optional
        Missing edges get ``default_weight``; pass ``default_weight=None`` to
        make a missing weight an error.
    rho : RhoSpec, optional
        Defaults to ``x ** -1``.
    vertices : sequence, optional
        Vertex labels listed first (this is how isolated vertices enter).

    Returns
    -------
    GeneralizedHypergraph
        Vertex and edge indices follow order of first appearance.
    """
    vindex: dict[str, int] = {}
    eindex: dict[str, int] = {}
    for v in vertices or ():
        v = str(v)
        if v in vindex:
            raise ValidationError(f"duplicate vertex {v!r}")
        vindex[v] = len(vindex)
    rows, cols, q1s, q2s = [], [], [], []
    seen = set()
    for rec in records:
        if len(rec) != 4:
            raise ValidationError(f"record {rec!r} is not (vertex, edge, q1, q2)")
        v, e, q1, q2 = str(rec[0]), str(rec[1]), float(rec[2]), float(rec[3])
        if (v, e) in seen:
            raise ValidationError(f"duplicate incidence ({v!r}, {e!r})")
        seen.add((v, e))
        if not (q1 > 0 and q2 > 0 and math.isfinite(q1) and math.isfinite(q2)):
            raise ValidationError(f"incidence ({v!r}, {e!r}) needs q1, q2 > 0")
        rows.append(vindex.setdefault(v, len(vindex)))
        cols.append(eindex.setdefault(e, len(eindex)))
        q1s.append(q1)
        q2s.append(q2)
    edge_weights = {str(k): float(x) for k, x in (edge_weights or {}).items()}
    unknown = set(edge_weights) - set(eindex)
    if unknown:
        raise ValidationError(f"weight given for edge(s) without members: {sorted(unknown)}")
    w = np.empty(len(eindex))
    for e, j in eindex.items():
        if e in edge_weights:
            w[j] = edge_weights[e]
        elif default_weight is None:
            raise ValidationError(f"missing weight for edge {e!r}")
        else:
            w[j] = default_weight
    shape = (len(vindex), len(eindex))
    Q1 = sp.csc_matrix((q1s, (rows, cols)), shape=shape)
    Q2 = sp.csc_matrix((q2s, (rows, cols)), shape=shape)
    return GeneralizedHypergraph(tuple(vindex), tuple(eindex), w, Q1, Q2, rho or RhoSpec())


@dataclass(frozen=True)
class DegreeProfile:
    """Degree vectors of a generalized hypergraph.

    ``delta`` are hyperedge degrees (column sums of Q2), ``d`` the walk
    degrees (built from Q1), ``d_hat`` the Laplacian degrees (built from Q2)
    and ``d_nl`` the degrees of the non-lazy walk.
    """

    delta: np.ndarray
    d: np.ndarray
    d_hat: np.ndarray
    d_nl: np.ndarray | None


def edge_degrees(h: GeneralizedHypergraph) -> np.ndarray:
    return np.asarray(h.Q2.sum(axis=0)).ravel()


def edge_factor(h: GeneralizedHypergraph) -> np.ndarray:
    """Per-edge multiplier ``w(e) * rho(delta(e))``."""
    return h.w * h.rho(edge_degrees(h))


def nonlazy_remainders(h: GeneralizedHypergraph) -> sp.csc_matrix:
    """Sparse ``delta(e) - Q2(v, e)`` on the incidence pattern (stored zeros allowed)."""
    delta = edge_degrees(h)
    R = h.Q2.copy()
    col = np.repeat(np.arange(h.n_edges), np.diff(R.indptr))
    rem = delta[col] - R.data
    # a vertex holding (numerically) all of an edge's mass leaves nothing to step to
    rem[rem <= 1e-12 * delta[col]] = 0.0
    R.data = rem
    return R


def degree_profile(h: GeneralizedHypergraph, nonlazy: bool = True) -> DegreeProfile:
    """All degree vectors of ``h``.

    With ``nonlazy=False`` the non-lazy degrees are skipped (``d_nl`` is
    ``None``), so ``rho`` only has to be valid at the hyperedge degrees.
    """
    delta = edge_degrees(h)
    coef = h.w * delta * h.rho(delta)
    d = np.asarray(h.Q1 @ coef)
    d_hat = np.asarray(h.Q2 @ coef)
    if not nonlazy:
        return DegreeProfile(delta=delta, d=d, d_hat=d_hat, d_nl=None)

    R = nonlazy_remainders(h)
    col = np.repeat(np.arange(h.n_edges), np.diff(R.indptr))
    contrib = np.zeros_like(R.data)
    live = R.data > 0
    if np.any(live):
        x = R.data[live]
        contrib[live] = h.w[col[live]] * x * h.rho(x) * h.Q1.data[live]
    d_nl = np.bincount(R.indices, weights=contrib, minlength=h.n_vertices)
    return DegreeProfile(delta=delta, d=d, d_hat=d_hat, d_nl=d_nl)


def rows_constant(Q: sp.spmatrix, rtol: float = 1e-9) -> np.ndarray:
    """Per-row flag: are all stored entries of the row equal within ``rtol``?"""
    R = sp.csr_matrix(Q)
    out = np.ones(R.shape[0], dtype=bool)
    for i in range(R.shape[0]):
        vals = R.data[R.indptr[i]:R.indptr[i + 1]]
        if vals.size > 1:
            out[i] = vals.max() - vals.min() <= rtol * abs(vals).max()
    return out


@dataclass(frozen=True)
class StructureReport:
    connected: bool
    edge_independent_q1: bool
    edge_independent_q2: bool
    uniform_degree: bool
    isolated: tuple = ()

    def to_dict(self) -> dict:
        return {
            "connected": self.connected,
            "edge_independent_q1": self.edge_independent_q1,
            "edge_independent_q2": self.edge_independent_q2,
            "uniform_degree": self.uniform_degree,
            "isolated": list(self.isolated),
        }


def clique_pattern(h: GeneralizedHypergraph) -> sp.csr_matrix:
    """Unweighted clique graph adjacency (with self-loops on covered vertices)."""
    H = h.H
    A = sp.csr_matrix(H @ H.T)
    A.data = np.ones_like(A.data)
    return A


def validate(h: GeneralizedHypergraph) -> StructureReport:
    n_comp, _ = connected_components(clique_pattern(h), directed=False)
    covered = np.diff(sp.csr_matrix(h.Q2).indptr) > 0
    delta = edge_degrees(h)
    uniform = bool(delta.size == 0 or np.ptp(delta) <= 1e-12 * max(1.0, delta.max()))
    return StructureReport(
        connected=bool(h.n_vertices > 0 and n_comp == 1),
        edge_independent_q1=bool(rows_constant(h.Q1).all()),
        edge_independent_q2=bool(rows_constant(h.Q2).all()),
        uniform_degree=uniform,
        isolated=tuple(v for v, c in zip(h.vertex_ids, covered) if not c),
    )


def check_dense_size(n: int) -> None:
    if n > DENSE_LIMIT:
        raise ValidationError(f"dense operation refused for |V|={n} > {DENSE_LIMIT}")
