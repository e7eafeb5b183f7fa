"""Spectral convolution models on the unified hypergraph operator.

Every variant is a standard graph network whose propagation matrix is the
renormalized hypergraph operator ``T~`` (or, for the HGNN baseline, the
un-renormalized ``D_hat^{-1/2} K D_hat^{-1/2}``):

``h_gcn``
    ``H_{l+1} = relu(T~ drop(H_l) Theta_l)``, linear last layer.
``h_ssgc``
    ``Z = drop(S) Theta`` with
    ``S = (1 - alpha) / K sum_{k=1..K} T~^k X + alpha X``.
``h_appnp``
    ``H = MLP(X)``, ``Z_{k+1} = (1 - alpha) T~ Z_k + alpha H``, ``K`` steps.
``h_chebnet``
    layers ``sum_{k=0..K} T~^k drop(H) Theta^(k)``, relu between layers.
``h_gcnii``
    ``Z0 = relu(drop(X) Theta_in)``, then per layer
    ``S = (1 - alpha) T~ drop(H) + alpha Z0`` and
    ``H = relu((1 - beta_l) S + beta_l S Theta_l)``; output ``drop(H) Theta_out``.
``hgnn_baseline``
    ``h_gcn`` layers on the un-renormalized operator.

Gradients are written out by hand; no bias terms are used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp

from .errors import ValidationError
from .hypergraph import GeneralizedHypergraph
from .spectral import adjacency_operator, renormalized_operator

VARIANTS = ("h_gcn", "h_ssgc", "h_appnp", "h_chebnet", "h_gcnii", "hgnn_baseline")


@dataclass(eq=False)
class ModelParams:
    """Weights and hyperparameters of one model.

    ``num_layers`` counts propagation layers (``h_gcn``, ``h_chebnet``,
    ``h_gcnii``, ``hgnn_baseline``) or MLP layers (``h_appnp``); ``K`` is the
    number of diffusion steps (``h_ssgc``, ``h_appnp``) or the polynomial
    order (``h_chebnet``).
    """

    variant: str
    weights: list
    num_layers: int = 2
    K: int = 2
    alpha: float = 0.1
    beta: float = 0.5
    beta_schedule: str = "fixed"
    lam: float = 0.5
    dropout_rate: float = 0.0
    use_renormalization: bool = True
    activation: str = "relu"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValidationError(f"unknown variant {self.variant!r}")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValidationError("dropout_rate must lie in [0, 1)")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValidationError("alpha must lie in [0, 1]")
        if not 0.0 <= self.beta <= 1.0:
            raise ValidationError("beta must lie in [0, 1]")
        if self.beta_schedule not in ("fixed", "log"):
            raise ValidationError("beta_schedule must be 'fixed' or 'log'")
        if self.activation not in ("relu", "identity"):
            raise ValidationError("activation must be 'relu' or 'identity'")
        if self.num_layers < 1 or self.K < 0:
            raise ValidationError("num_layers must be >= 1 and K >= 0")
        self.weights = [np.array(W, dtype=float) for W in self.weights]
        expected = _n_weights(self.variant, self.num_layers, self.K)
        if len(self.weights) != expected:
            raise ValidationError(f"{self.variant} needs {expected} weight matrices, "
                                  f"got {len(self.weights)}")
        for a, b in _chain(self):
            if a.shape[1] != b.shape[0]:
                raise ValidationError(f"weight shapes {a.shape} and {b.shape} do not chain")

    @property
    def in_dim(self) -> int:
        return self.weights[0].shape[0]

    @property
    def out_dim(self) -> int:
        return self.weights[-1].shape[1]

    def copy(self) -> "ModelParams":
        return replace(self, weights=[W.copy() for W in self.weights], meta=dict(self.meta))

    def betas(self) -> np.ndarray:
        if self.beta_schedule == "fixed":
            return np.full(self.num_layers, self.beta)
        return np.log(self.lam / np.arange(1, self.num_layers + 1) + 1.0)


def _n_weights(variant: str, num_layers: int, K: int) -> int:
    if variant == "h_ssgc":
        return 1
    if variant == "h_chebnet":
        return num_layers * (K + 1)
    if variant == "h_gcnii":
        return num_layers + 2
    return num_layers


def _chain(p: ModelParams):
    """Consecutive weight pairs that must agree on the inner dimension."""
    W = p.weights
    if p.variant != "h_chebnet":
        yield from zip(W[:-1], W[1:])
        return
    K1 = p.K + 1
    heads = W[::K1]
    for l, head in enumerate(heads):
        for other in W[l * K1 + 1:(l + 1) * K1]:
            if other.shape != head.shape:
                raise ValidationError("all polynomial terms of a layer need the same shape")
    yield from zip(heads[:-1], heads[1:])


def glorot(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    a = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-a, a, size=(fan_in, fan_out))


def init_params(variant: str, in_dim: int, out_dim: int, hidden: int = 16,
                num_layers: int = 2, K: int | None = None, seed: int = 0,
                **hyper) -> ModelParams:
    """Glorot-uniform initialised parameters.

    ``K`` defaults to 2 for ``h_ssgc`` and ``h_chebnet`` and 10 for
    ``h_appnp``.  ``use_renormalization`` defaults to false only for
    ``hgnn_baseline``.
    """
    if variant not in VARIANTS:
        raise ValidationError(f"unknown variant {variant!r}")
    if K is None:
        K = 10 if variant == "h_appnp" else 2
    hyper.setdefault("use_renormalization", variant != "hgnn_baseline")
    rng = np.random.default_rng(seed)
    if variant == "h_ssgc":
        dims = [(in_dim, out_dim)]
    elif variant == "h_gcnii":
        dims = [(in_dim, hidden)] + [(hidden, hidden)] * num_layers + [(hidden, out_dim)]
    else:
        sizes = [in_dim] + [hidden] * (num_layers - 1) + [out_dim]
        dims = list(zip(sizes[:-1], sizes[1:]))
        if variant == "h_chebnet":
            dims = [d for d in dims for _ in range(K + 1)]
    weights = [glorot(rng, a, b) for a, b in dims]
    return ModelParams(variant, weights, num_layers=num_layers, K=K, **hyper)


def propagation_operator(h: GeneralizedHypergraph, use_renormalization: bool = True) -> sp.csr_matrix:
    """``T~`` when renormalizing, else ``D_hat^{-1/2} K D_hat^{-1/2}``."""
    return renormalized_operator(h) if use_renormalization else adjacency_operator(h)


def operator_for(params: ModelParams, h) -> sp.csr_matrix:
    """Operator for ``params`` from a hypergraph, or ``h`` itself if it is a matrix."""
    if isinstance(h, GeneralizedHypergraph):
        return propagation_operator(h, params.use_renormalization)
    return sp.csr_matrix(h, dtype=float)


class _Dropout:
    """Inverted dropout with masks drawn from a shared generator."""

    def __init__(self, rate: float, rng: np.random.Generator | None):
        self.rate = rate
        self.rng = rng if rate > 0 else None

    def __call__(self, x):
        if self.rng is None:
            return x, None
        keep = (self.rng.random(x.shape) >= self.rate) / (1.0 - self.rate)
        return x * keep, keep

    @staticmethod
    def back(g, keep):
        return g if keep is None else g * keep


def _act(params: ModelParams, x):
    return np.maximum(x, 0.0) if params.activation == "relu" else x


def _act_grad(params: ModelParams, pre, g):
    return g * (pre > 0) if params.activation == "relu" else g


def ssgc_features(T: sp.spmatrix, X: np.ndarray, K: int, alpha: float) -> np.ndarray:
    """``(1 - alpha) / K sum_{k=1..K} T^k X + alpha X``."""
    if K == 0:
        return X.copy()
    acc = np.zeros_like(X, dtype=float)
    cur = X
    for _ in range(K):
        cur = T @ cur
        acc += cur
    return (1.0 - alpha) * acc / K + alpha * X


# Each variant has a forward that records what its backward needs.

def _fwd_gcn(p, T, X, drop):
    cache = []
    h = X
    last = len(p.weights) - 1
    for l, W in enumerate(p.weights):
        a, keep = drop(h)
        c = T @ (a @ W)
        cache.append((a, keep, c))
        h = c if l == last else _act(p, c)
    return h, cache


def _bwd_gcn(p, T, cache, g):
    grads = [None] * len(p.weights)
    last = len(p.weights) - 1
    for l in range(last, -1, -1):
        a, keep, c = cache[l]
        if l != last:
            g = _act_grad(p, c, g)
        db = T.T @ g
        grads[l] = a.T @ db
        g = _Dropout.back(db @ p.weights[l].T, keep)
    return grads


def _fwd_ssgc(p, T, X, drop):
    S = ssgc_features(T, X, p.K, p.alpha)
    a, keep = drop(S)
    return a @ p.weights[0], a


def _bwd_ssgc(p, T, a, g):
    return [a.T @ g]


def _fwd_mlp(p, X, drop):
    cache = []
    h = X
    last = len(p.weights) - 1
    for l, W in enumerate(p.weights):
        a, keep = drop(h)
        c = a @ W
        cache.append((a, keep, c))
        h = c if l == last else np.maximum(c, 0.0)
    return h, cache


def _bwd_mlp(p, cache, g):
    grads = [None] * len(p.weights)
    last = len(p.weights) - 1
    for l in range(last, -1, -1):
        a, keep, c = cache[l]
        if l != last:
            g = g * (c > 0)
        grads[l] = a.T @ g
        g = _Dropout.back(g @ p.weights[l].T, keep)
    return grads


def _fwd_appnp(p, T, X, drop):
    H, mlp_cache = _fwd_mlp(p, X, drop)
    Z = H
    for _ in range(p.K):
        Z = (1.0 - p.alpha) * (T @ Z) + p.alpha * H
    return Z, mlp_cache


def _bwd_appnp(p, T, mlp_cache, g):
    dH = np.zeros_like(g)
    for _ in range(p.K):
        dH += p.alpha * g
        g = (1.0 - p.alpha) * (T.T @ g)
    dH += g
    return _bwd_mlp(p, mlp_cache, dH)


def _fwd_cheb(p, T, X, drop):
    K1 = p.K + 1
    cache = []
    h = X
    for l in range(p.num_layers):
        a, keep = drop(h)
        powers = [a]
        for _ in range(p.K):
            powers.append(T @ powers[-1])
        c = sum(P @ W for P, W in zip(powers, p.weights[l * K1:(l + 1) * K1]))
        cache.append((powers, keep, c))
        h = c if l == p.num_layers - 1 else _act(p, c)
    return h, cache


def _bwd_cheb(p, T, cache, g):
    K1 = p.K + 1
    grads = [None] * len(p.weights)
    TT = T.T
    for l in range(p.num_layers - 1, -1, -1):
        powers, keep, c = cache[l]
        if l != p.num_layers - 1:
            g = _act_grad(p, c, g)
        Ws = p.weights[l * K1:(l + 1) * K1]
        for k in range(K1):
            grads[l * K1 + k] = powers[k].T @ g
        # Horner: sum_k (T^T)^k g W_k^T
        acc = g @ Ws[-1].T
        for k in range(K1 - 2, -1, -1):
            acc = TT @ acc + g @ Ws[k].T
        g = _Dropout.back(acc, keep)
    return grads


def _fwd_gcnii(p, T, X, drop):
    W_in, layers, W_out = p.weights[0], p.weights[1:-1], p.weights[-1]
    betas = p.betas()
    a0, keep0 = drop(X)
    c0 = a0 @ W_in
    z0 = np.maximum(c0, 0.0)
    h = z0
    cache = []
    for l, W in enumerate(layers):
        a, keep = drop(h)
        s = (1.0 - p.alpha) * (T @ a) + p.alpha * z0
        m = (1.0 - betas[l]) * s + betas[l] * (s @ W)
        cache.append((keep, s, m))
        h = _act(p, m)
    a_out, keep_out = drop(h)
    return a_out @ W_out, (a0, keep0, c0, cache, a_out, keep_out)


def _bwd_gcnii(p, T, cache, g):
    a0, keep0, c0, layer_cache, a_out, keep_out = cache
    W_in, layers, W_out = p.weights[0], p.weights[1:-1], p.weights[-1]
    betas = p.betas()
    grads = [None] * len(p.weights)
    grads[-1] = a_out.T @ g
    dh = _Dropout.back(g @ W_out.T, keep_out)
    dz0 = np.zeros_like(c0)
    for l in range(len(layers) - 1, -1, -1):
        keep, s, m = layer_cache[l]
        dm = _act_grad(p, m, dh)
        W = layers[l]
        grads[l + 1] = betas[l] * (s.T @ dm)
        ds = (1.0 - betas[l]) * dm + betas[l] * (dm @ W.T)
        dz0 += p.alpha * ds
        dh = _Dropout.back((1.0 - p.alpha) * (T.T @ ds), keep)
    dz0 += dh
    dc0 = dz0 * (c0 > 0)
    grads[0] = a0.T @ dc0
    return grads


_FORWARD = {
    "h_gcn": (_fwd_gcn, _bwd_gcn),
    "hgnn_baseline": (_fwd_gcn, _bwd_gcn),
    "h_ssgc": (_fwd_ssgc, _bwd_ssgc),
    "h_appnp": (_fwd_appnp, _bwd_appnp),
    "h_chebnet": (_fwd_cheb, _bwd_cheb),
    "h_gcnii": (_fwd_gcnii, _bwd_gcnii),
}


def _check_inputs(params: ModelParams, T, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValidationError("features must be a 2-D array")
    if T.shape != (X.shape[0], X.shape[0]):
        raise ValidationError(f"operator of shape {T.shape} does not match {X.shape[0]} rows")
    if X.shape[1] != params.in_dim:
        raise ValidationError(f"features have {X.shape[1]} columns, model expects {params.in_dim}")
    return X


def forward_with_cache(params: ModelParams, T, X, rng: np.random.Generator | None = None,
                       training: bool = False):
    """Logits plus the cache consumed by :func:`backward`."""
    T = sp.csr_matrix(T, dtype=float) if not sp.issparse(T) else T.tocsr()
    X = _check_inputs(params, T, X)
    drop = _Dropout(params.dropout_rate if training else 0.0, rng)
    fwd, _ = _FORWARD[params.variant]
    return fwd(params, T, X, drop)


def forward(variant: str, params: ModelParams, T_tilde, X) -> np.ndarray:
    """Logits ``Z`` (no softmax) with dropout disabled.

    ``T_tilde`` is the propagation matrix; pass ``propagation_operator(h,
    params.use_renormalization)`` to honour the renormalization flag.
    """
    if variant != params.variant:
        raise ValidationError(f"params are for {params.variant!r}, not {variant!r}")
    return forward_with_cache(params, T_tilde, X)[0]


def backward(params: ModelParams, T, cache, dZ: np.ndarray) -> list:
    """Gradients of a scalar loss w.r.t. every weight, given ``dZ = dloss/dZ``."""
    T = sp.csr_matrix(T, dtype=float) if not sp.issparse(T) else T.tocsr()
    _, bwd = _FORWARD[params.variant]
    return bwd(params, T, cache, dZ)


def softmax(Z: np.ndarray) -> np.ndarray:
    E = np.exp(Z - Z.max(axis=1, keepdims=True))
    return E / E.sum(axis=1, keepdims=True)


def cross_entropy(Z: np.ndarray, labels: np.ndarray, mask: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean softmax cross-entropy over ``mask`` and its gradient w.r.t. ``Z``."""
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        raise ValidationError("empty mask")
    Zm = Z[idx]
    shifted = Zm - Zm.max(axis=1, keepdims=True)
    logp = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    y = labels[idx]
    loss = float(-logp[np.arange(idx.size), y].mean())
    dZ = np.zeros_like(Z)
    G = np.exp(logp)
    G[np.arange(idx.size), y] -= 1.0
    dZ[idx] = G / idx.size
    return loss, dZ


def readout_mean_pool(node_embeddings, graph_assignment) -> np.ndarray:
    """Per-graph mean of node rows; ``graph_assignment[i]`` is row ``i``'s graph (0-based)."""
    E = np.asarray(node_embeddings, dtype=float)
    g = np.asarray(graph_assignment)
    if g.shape != (E.shape[0],):
        raise ValidationError("one graph index per node row required")
    if g.size == 0:
        raise ValidationError("no nodes to pool")
    if not np.issubdtype(g.dtype, np.integer) or g.min() < 0:
        raise ValidationError("graph indices must be nonnegative integers")
    counts = np.bincount(g)
    if np.any(counts == 0):
        raise ValidationError(f"graph {int(np.flatnonzero(counts == 0)[0])} has no nodes")
    out = np.zeros((counts.size,) + E.shape[1:])
    np.add.at(out, g, E)
    return out / counts.reshape((-1,) + (1,) * (E.ndim - 1))
