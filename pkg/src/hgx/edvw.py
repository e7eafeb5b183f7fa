"""Builders for hypergraphs with edge-dependent vertex weights.

All builders set ``Q1 = Q2 = Q`` so the result satisfies equivalence
condition (2) with ``k = 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.spatial.distance import pdist, squareform

from .errors import ValidationError
from .hypergraph import GeneralizedHypergraph, RhoSpec

_TINY = np.finfo(float).tiny


@dataclass(frozen=True, eq=False)
class FeatureTable:
    """Object ids with one feature vector each."""

    ids: tuple
    X: np.ndarray
    modality: str | None = None

    def __post_init__(self):
        X = np.array(self.X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        if X.ndim != 2:
            raise ValidationError("features must be a 2-D array")
        ids = tuple(str(i) for i in self.ids)
        if len(ids) != X.shape[0]:
            raise ValidationError(f"{len(ids)} ids for {X.shape[0]} feature rows")
        if len(set(ids)) != len(ids):
            raise ValidationError("duplicate object id")
        if not np.all(np.isfinite(X)):
            raise ValidationError("features must be finite")
        X.flags.writeable = False
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "X", X)

    @classmethod
    def from_array(cls, X, modality: str | None = None) -> "FeatureTable":
        X = np.asarray(X, dtype=float)
        return cls(tuple(str(i) for i in range(len(X))), X, modality)


@dataclass(frozen=True, eq=False)
class ProteinChain:
    """Residues in sequence order with 3-D coordinates in angstrom."""

    indices: tuple
    aa_codes: tuple
    coords: np.ndarray
    features: np.ndarray | None = field(default=None)

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        coords = np.array(self.coords, dtype=float)
        if coords.shape != (len(idx), 3):
            raise ValidationError(f"expected coordinates of shape ({len(idx)}, 3)")
        if not np.all(np.isfinite(coords)):
            raise ValidationError("residue coordinates must be finite")
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValidationError("residue indices must be strictly increasing")
        if len(self.aa_codes) != len(idx):
            raise ValidationError("one amino-acid code per residue required")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "aa_codes", tuple(str(a) for a in self.aa_codes))
        object.__setattr__(self, "coords", coords)

    def __len__(self):
        return len(self.indices)


def _gaussian(d: np.ndarray, gamma: float, scale: float) -> np.ndarray:
    if scale == 0:
        return np.ones_like(d)
    q = np.exp(-d / (gamma * scale * scale))
    # keep far members incident instead of letting them underflow to zero
    return np.maximum(q, _TINY)


def knn_gaussian_hypergraph(features: FeatureTable, k: int, gamma: float,
                            rho: RhoSpec | None = None) -> GeneralizedHypergraph:
    """One hyperedge per object: the object and its ``k`` nearest neighbours.

    ``Q(v, e) = exp(-d(v, v_c) / (gamma * d_hat**2))`` where ``d`` is the
    Euclidean distance to the centroid ``v_c`` and ``d_hat`` the mean
    distance over all unordered object pairs.  Distance ties are broken by
    ascending row index.  If ``d_hat == 0`` every weight is set to 1 and
    ``meta['degenerate']`` is true.
    """
    if isinstance(features, np.ndarray):
        features = FeatureTable.from_array(features)
    n = features.X.shape[0]
    if k < 1:
        raise ValidationError("k must be at least 1")
    if gamma <= 0:
        raise ValidationError("gamma must be positive")
    if n < k + 1:
        raise ValidationError(f"need at least k+1={k + 1} objects, got {n}")
    condensed = pdist(features.X)
    D = squareform(condensed)
    d_hat = float(condensed.mean())
    rows, cols, vals = [], [], []
    order_key = np.arange(n)
    for c in range(n):
        others = np.delete(order_key, c)
        nearest = others[np.lexsort((others, D[c, others]))[:k]]
        members = np.concatenate(([c], nearest))
        rows.extend(members)
        cols.extend([c] * members.size)
        vals.extend(_gaussian(D[c, members], gamma, d_hat))
    Q = sp.csc_matrix((vals, (rows, cols)), shape=(n, n))
    meta = {"builder": "knn_gaussian", "k": int(k), "gamma": float(gamma),
            "d_hat": d_hat, "degenerate": d_hat == 0}
    if features.modality is not None:
        meta["modality"] = features.modality
    return GeneralizedHypergraph(features.ids, tuple(f"knn:{i}" for i in features.ids),
                                 np.ones(n), Q, Q, rho or RhoSpec(), meta)


def concat_modalities(hs: Sequence[GeneralizedHypergraph],
                      prefixes: Sequence[str] | None = None) -> GeneralizedHypergraph:
    """Stack hyperedges of several hypergraphs over the same vertices.

    ``Q = [Q_1, Q_2, ...]`` column-wise and ``W`` likewise.  Edge ids get the
    prefixes ``m0/``, ``m1/``, ... unless ``prefixes`` is given.  A single
    hypergraph is returned unchanged.
    """
    hs = list(hs)
    if not hs:
        raise ValidationError("nothing to concatenate")
    if len(hs) == 1:
        return hs[0]
    first = hs[0]
    for h in hs[1:]:
        if h.vertex_ids != first.vertex_ids:
            raise ValidationError("modalities must share the same vertex list")
        if h.rho != first.rho:
            raise ValidationError("modalities use different rho")
    if prefixes is None:
        prefixes = [f"m{i}/" for i in range(len(hs))]
    if len(prefixes) != len(hs):
        raise ValidationError("one prefix per hypergraph required")
    edge_ids = tuple(f"{p}{e}" for p, h in zip(prefixes, hs) for e in h.edge_ids)
    if len(set(edge_ids)) != len(edge_ids):
        raise ValidationError("edge ids collide after prefixing")
    return GeneralizedHypergraph(
        first.vertex_ids,
        edge_ids,
        np.concatenate([h.w for h in hs]),
        sp.hstack([h.Q1 for h in hs], format="csc"),
        sp.hstack([h.Q2 for h in hs], format="csc"),
        first.rho,
        {"builder": "concat", "modalities": [dict(h.meta) for h in hs]},
    )


def protein_hypergraph(chain: ProteinChain, tau: int = 6, epsilon: float = 8.0,
                       gamma: float = 0.1, rho: RhoSpec | None = None) -> GeneralizedHypergraph:
    """Sequence and spatial hyperedges for one protein chain.

    * ``|S| - tau + 1`` sequence hyperedges over ``tau`` consecutive
      residues, all weights 1.
    * One spatial hyperedge per residue ``c`` over residues with
      ``d(v, c) < epsilon`` (``c`` included), weighted by
      ``exp(-d(v, c) / (gamma * d_c**2))`` with ``d_c`` the mean distance from
      ``c`` to the other members.  Edges holding only ``c`` are dropped.
    """
    n = len(chain)
    if tau < 1:
        raise ValidationError("tau must be at least 1")
    if n < tau:
        raise ValidationError(f"chain of {n} residues is shorter than tau={tau}")
    if epsilon <= 0 or gamma <= 0:
        raise ValidationError("epsilon and gamma must be positive")
    rows, cols, vals, edge_ids = [], [], [], []
    for i in range(n - tau + 1):
        rows.extend(range(i, i + tau))
        cols.extend([len(edge_ids)] * tau)
        vals.extend([1.0] * tau)
        edge_ids.append(f"seq:{chain.indices[i]}")
    D = squareform(pdist(chain.coords))
    degenerate = []
    for c in range(n):
        members = np.flatnonzero(D[c] < epsilon)
        others = members[members != c]
        if others.size == 0:
            continue
        d_c = float(D[c, others].mean())
        if d_c == 0:
            degenerate.append(chain.indices[c])
        rows.extend(members)
        cols.extend([len(edge_ids)] * members.size)
        vals.extend(_gaussian(D[c, members], gamma, d_c))
        edge_ids.append(f"sp:{chain.indices[c]}")
    Q = sp.csc_matrix((vals, (rows, cols)), shape=(n, len(edge_ids)))
    meta = {"builder": "protein", "tau": int(tau), "epsilon": float(epsilon),
            "gamma": float(gamma), "n_sequence_edges": n - tau + 1,
            "degenerate_centroids": degenerate}
    return GeneralizedHypergraph(tuple(str(i) for i in chain.indices), tuple(edge_ids),
                                 np.ones(len(edge_ids)), Q, Q, rho or RhoSpec(), meta)
