"""Small reference hypergraphs, random generators and a synthetic dataset.

These are used by the test-suite, the demos and the CLI examples.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.sparse as sp

from .edvw import FeatureTable, knn_gaussian_hypergraph
from .hypergraph import GeneralizedHypergraph, RhoSpec, build_hypergraph, validate
from .walk import TransitionMatrix


def t1() -> GeneralizedHypergraph:
    """Two vertices joined by one hyperedge."""
    return build_hypergraph([("a", "e", 1, 1), ("b", "e", 1, 1)])


def tri(sigma: float = -1.0) -> GeneralizedHypergraph:
    """Triangle graph as a 2-uniform hypergraph."""
    recs = []
    for e, (u, v) in (("ab", "ab"), ("bc", "bc"), ("ac", "ac")):
        recs += [(u, e, 1, 1), (v, e, 1, 1)]
    return build_hypergraph(recs, rho=RhoSpec("power", sigma))


def two_disjoint_edges() -> GeneralizedHypergraph:
    return build_hypergraph([("a", "e1", 1, 1), ("b", "e1", 1, 1),
                             ("c", "e2", 1, 1), ("d", "e2", 1, 1)])


def r5(seed: int = 0) -> GeneralizedHypergraph:
    """Seeded 5-vertex hypergraph with edges of sizes 3, 3, 4 and ``Q1 = 2 Q2``.

    ``Q2`` entries are uniform on [0.5, 1.5), ``w = 1`` and ``rho(x) = x``.
    Memberships are redrawn until every vertex is covered and the
    hypergraph is connected.
    """
    rng = np.random.default_rng(seed)
    while True:
        H = np.zeros((5, 3))
        for j, size in enumerate((3, 3, 4)):
            H[rng.choice(5, size=size, replace=False), j] = 1.0
        Q2 = H * rng.uniform(0.5, 1.5, size=H.shape)
        h = GeneralizedHypergraph.from_matrices(2 * Q2, Q2, rho=RhoSpec("power", 1.0),
                                                meta={"fixture": "r5", "seed": seed})
        if H.sum(axis=1).min() > 0 and validate(h).connected:
            return h


_CX4_ROWS = [
    ["1/3", "1/3", "1/3", "0"],
    ["1/6", "5/12", "7/24", "1/8"],
    ["1/6", "5/12", "7/24", "1/8"],
]
CX4_ROW4 = ["0", "1/2", "1/4", "1/4"]
# as printed; sums to 7/6
CX4_ROW4_PRINTED = ["0", "1/2", "1/3", "1/3"]
CX4_PI = [Fraction(3, 17), Fraction(7, 17), Fraction(5, 17), Fraction(2, 17)]


def cx4_fractions(printed: bool = False) -> list[list[Fraction]]:
    last = CX4_ROW4_PRINTED if printed else CX4_ROW4
    return [[Fraction(x) for x in row] for row in _CX4_ROWS + [last]]


def cx4_transition(printed: bool = False) -> TransitionMatrix:
    """Irreversible 4-state chain of the counterexample (1-based states 1..4)."""
    P = np.array([[float(x) for x in row] for row in cx4_fractions(printed)])
    return TransitionMatrix(sp.csr_matrix(P), "lazy", ("1", "2", "3", "4"))


def _cover(rng, H: np.ndarray) -> np.ndarray:
    # put every uncovered vertex into some random edge
    for v in np.flatnonzero(H.sum(axis=1) == 0):
        H[v, rng.integers(H.shape[1])] = 1.0
    return H


def random_incidence(rng: np.random.Generator, n: int, m: int, min_size: int = 2,
                     max_size: int = 5) -> np.ndarray:
    """Binary ``n x m`` incidence covering every vertex."""
    H = np.zeros((n, m))
    for j in range(m):
        size = int(rng.integers(min_size, min(max_size, n) + 1))
        H[rng.choice(n, size=size, replace=False), j] = 1.0
    return _cover(rng, H)


def _random_shape(rng, n_max):
    n = int(rng.integers(3, n_max + 1))
    m = int(rng.integers(2, max(3, n) + 1))
    return n, m


def _random_rho(rng) -> RhoSpec:
    return RhoSpec("power", float(rng.choice([-2.0, -1.0, -0.5, 0.0, 1.0])))


def random_condition1(seed: int, n_max: int = 30) -> GeneralizedHypergraph:
    """``Q1`` and ``Q2`` edge-independent (per-vertex constants), not proportional."""
    rng = np.random.default_rng(seed)
    n, m = _random_shape(rng, n_max)
    H = random_incidence(rng, n, m)
    q1 = rng.uniform(0.2, 2.0, size=n)
    q2 = rng.uniform(0.2, 2.0, size=n)
    w = rng.uniform(0.5, 2.0, size=m)
    return GeneralizedHypergraph.from_matrices(H * q1[:, None], H * q2[:, None], w,
                                               _random_rho(rng))


def random_condition2(seed: int, n_max: int = 30) -> GeneralizedHypergraph:
    """Edge-dependent ``Q2`` with ``Q1 = k Q2``."""
    rng = np.random.default_rng(seed)
    n, m = _random_shape(rng, n_max)
    H = random_incidence(rng, n, m)
    Q2 = H * rng.uniform(0.2, 2.0, size=H.shape)
    k = float(rng.uniform(0.5, 3.0))
    w = rng.uniform(0.5, 2.0, size=m)
    return GeneralizedHypergraph.from_matrices(k * Q2, Q2, w, _random_rho(rng))


def random_plain(seed: int, n_max: int = 30, sigma: float = -1.0, uniform: int | None = None,
                 weighted: bool = True) -> GeneralizedHypergraph:
    """``Q1 = Q2 = H``; ``uniform`` fixes every edge size."""
    rng = np.random.default_rng(seed)
    n, m = _random_shape(rng, n_max)
    if uniform is not None:
        n = max(n, uniform)
        H = random_incidence(rng, n, m, uniform, uniform)
        # covering may have grown an edge; rebuild those columns
        for j in np.flatnonzero(H.sum(axis=0) != uniform):
            H[:, j] = 0
            H[rng.choice(n, size=uniform, replace=False), j] = 1.0
        extra = []
        for v in np.flatnonzero(H.sum(axis=1) == 0):
            col = np.zeros(n)
            col[v] = 1.0
            others = np.setdiff1d(np.arange(n), [v])
            col[rng.choice(others, size=uniform - 1, replace=False)] = 1.0
            extra.append(col)
        if extra:
            H = np.column_stack([H] + extra)
    else:
        H = random_incidence(rng, n, m)
    w = rng.uniform(0.5, 2.0, size=H.shape[1]) if weighted else np.ones(H.shape[1])
    return GeneralizedHypergraph.from_matrices(H, H, w, RhoSpec("power", sigma))


def general_only(seed: int = 0, n: int = 6, m: int = 4) -> GeneralizedHypergraph:
    """``Q1 = diag(k_u) Q2`` with non-constant ``k_u``.

    Satisfies the general pairwise equation without meeting condition (1)
    or (2).
    """
    rng = np.random.default_rng(seed)
    H = random_incidence(rng, n, m, 2, 4)
    Q2 = H * rng.uniform(0.5, 1.5, size=H.shape)
    ku = rng.uniform(0.5, 3.0, size=n)
    return GeneralizedHypergraph.from_matrices(ku[:, None] * Q2, Q2)


def non_equivalent() -> GeneralizedHypergraph:
    """``Q1 = H`` with edge-dependent ``Q2``: the walk is irreversible."""
    H = np.array([[1, 0], [1, 1], [1, 1], [0, 1]], dtype=float)
    Q2 = np.array([[1, 0], [2, 1], [1, 2], [0, 1]], dtype=float)
    return GeneralizedHypergraph.from_matrices(H, Q2, vertex_ids=("1", "2", "3", "4"))


@dataclass(frozen=True, eq=False)
class Dataset:
    """Node-classification data: hypergraph, features, labels and split masks."""

    h: GeneralizedHypergraph
    X: np.ndarray
    labels: np.ndarray
    train: np.ndarray
    val: np.ndarray
    test: np.ndarray


def two_block_dataset(seed: int = 0, block_size: int = 30, k: int = 4, gamma: float = 1.0,
                      n_features: int = 8, noise: float = 3.0) -> Dataset:
    """Two communities with within-community k-NN Gaussian hyperedges.

    Hyperedges come from latent 2-D positions; features are noisy class
    means.  Each block contributes 10 training, 5 validation and the
    remaining test vertices.
    """
    rng = np.random.default_rng(seed)
    n = 2 * block_size
    labels = np.repeat([0, 1], block_size)
    blocks = []
    for b in range(2):
        ids = [f"v{b * block_size + i}" for i in range(block_size)]
        latent = rng.normal(size=(block_size, 2))
        blocks.append(knn_gaussian_hypergraph(FeatureTable(ids, latent), k, gamma))
    recs = []
    for hb in blocks:
        for j, e in enumerate(hb.edge_ids):
            for v, q1, q2 in hb.members(j):
                recs.append((hb.vertex_ids[v], e.replace("knn:", f"knn{hb is blocks[1]:d}:"),
                             q1, q2))
    h = build_hypergraph(recs, vertices=[f"v{i}" for i in range(n)])
    means = rng.normal(size=(2, n_features))
    X = means[labels] + noise * rng.normal(size=(n, n_features))
    train = np.zeros(n, dtype=bool)
    val = np.zeros(n, dtype=bool)
    for b in range(2):
        perm = b * block_size + rng.permutation(block_size)
        train[perm[:10]] = True
        val[perm[10:15]] = True
    test = ~(train | val)
    return Dataset(h, X, labels, train, val, test)
