"""Full-batch training and gradient checking for the models in :mod:`hgx.models`."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError, ValidationError
from .models import (
    ModelParams,
    backward,
    cross_entropy,
    forward_with_cache,
    init_params,
    operator_for,
)


@dataclass(frozen=True)
class TrainConfig:
    """Optimizer and stopping settings.

    Weight decay is added to the gradient of every weight matrix.  Training
    stops after ``patience`` epochs without a new best validation loss.
    """

    learning_rate: float = 0.01
    weight_decay: float = 5e-4
    max_epochs: int = 300
    patience: int = 100
    seed: int = 0
    optimizer: str = "adam"
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValidationError("learning_rate must be positive")
        if self.weight_decay < 0:
            raise ValidationError("weight_decay must be nonnegative")
        if self.max_epochs < 1 or self.patience < 1:
            raise ValidationError("max_epochs and patience must be positive")
        if self.patience > self.max_epochs:
            raise ValidationError("patience cannot exceed max_epochs")
        if self.optimizer not in ("adam", "sgd"):
            raise ValidationError(f"unknown optimizer {self.optimizer!r}")


@dataclass
class TrainResult:
    params: ModelParams
    accuracy: dict
    train_loss: list = field(default_factory=list)
    val_loss: list = field(default_factory=list)
    best_epoch: int = 0
    epochs_run: int = 0

    @property
    def metrics(self) -> dict:
        return {"accuracy": self.accuracy, "best_epoch": self.best_epoch,
                "epochs_run": self.epochs_run, "train_loss": self.train_loss,
                "val_loss": self.val_loss}

    def __iter__(self):
        # allows ``params, metrics = train(...)``
        yield self.params
        yield self.metrics


def _masks(split, n: int) -> dict:
    if hasattr(split, "train"):
        split = {"train": split.train, "val": split.val, "test": split.test}
    out = {}
    for name in ("train", "val", "test"):
        if name not in split:
            raise ValidationError(f"split is missing the {name!r} mask")
        m = np.asarray(split[name], dtype=bool)
        if m.shape != (n,):
            raise ValidationError(f"{name} mask has wrong length")
        if not m.any():
            raise ValidationError(f"{name} mask is empty")
        out[name] = m
    if (out["train"] & out["val"]).any() or (out["train"] & out["test"]).any() \
            or (out["val"] & out["test"]).any():
        raise ValidationError("split masks overlap")
    return out


class _Adam:
    def __init__(self, shapes, cfg: TrainConfig):
        self.cfg = cfg
        self.m = [np.zeros(s) for s in shapes]
        self.v = [np.zeros(s) for s in shapes]
        self.t = 0

    def step(self, weights, grads):
        c = self.cfg
        self.t += 1
        for W, g, m, v in zip(weights, grads, self.m, self.v):
            m *= c.beta1
            m += (1 - c.beta1) * g
            v *= c.beta2
            v += (1 - c.beta2) * g * g
            mhat = m / (1 - c.beta1 ** self.t)
            vhat = v / (1 - c.beta2 ** self.t)
            W -= c.learning_rate * mhat / (np.sqrt(vhat) + c.eps)


class _SGD:
    def __init__(self, shapes, cfg: TrainConfig):
        self.lr = cfg.learning_rate

    def step(self, weights, grads):
        for W, g in zip(weights, grads):
            W -= self.lr * g


def accuracy(Z: np.ndarray, labels: np.ndarray, mask: np.ndarray) -> float:
    return float(np.mean(Z[mask].argmax(axis=1) == labels[mask]))


def train(variant: str, h, X, labels, split, config: TrainConfig = TrainConfig(),
          params: ModelParams | None = None, **model_options) -> TrainResult:
    """Train one model full-batch with early stopping on validation loss.

    Parameters
    ----------
    variant : str
        One of :data:`hgx.models.VARIANTS`.
    h : GeneralizedHypergraph or matrix
        Hypergraph (the operator follows ``use_renormalization``) or a
        ready-made propagation matrix.
    X : (n, d) array
    labels : (n,) int array
    split : mapping with boolean ``train``, ``val`` and ``test`` masks
    config : TrainConfig
    params : ModelParams, optional
        Initial parameters; otherwise built by ``init_params`` with
        ``model_options`` and ``config.seed``.

    Returns
    -------
    TrainResult
        Parameters of the epoch with the lowest validation loss.  Unpacks as
        ``(params, metrics)``.

    Raises
    ------
    NumericalError
        If the training loss becomes non-finite.
    """
    X = np.asarray(X, dtype=float)
    if not np.all(np.isfinite(X)):
        raise ValidationError("features must be finite")
    labels = np.asarray(labels)
    if not np.issubdtype(labels.dtype, np.integer) or labels.min() < 0:
        raise ValidationError("labels must be nonnegative integers")
    n = X.shape[0]
    masks = _masks(split, n)
    n_classes = int(labels.max()) + 1
    missing = set(range(n_classes)) - set(labels[masks["train"]].tolist())
    if missing:
        raise ValidationError(f"classes {sorted(missing)} have no training example")
    if params is None:
        params = init_params(variant, X.shape[1], n_classes, seed=config.seed, **model_options)
    elif params.variant != variant:
        raise ValidationError(f"params are for {params.variant!r}, not {variant!r}")
    params = params.copy()
    T = operator_for(params, h)
    rng = np.random.default_rng(config.seed + 1)
    # overflow is reported below as a non-finite loss
    with np.errstate(over="ignore", invalid="ignore"):
        best, train_curve, val_curve, epoch = _fit(params, T, X, labels, masks, config, rng)
    final = best[1]
    Z, _ = forward_with_cache(final, T, X)
    acc = {name: accuracy(Z, labels, m) for name, m in masks.items()}
    return TrainResult(final, acc, train_curve, val_curve, best[2], epoch)


def _fit(params, T, X, labels, masks, config, rng):
    opt_cls = _Adam if config.optimizer == "adam" else _SGD
    opt = opt_cls([W.shape for W in params.weights], config)
    best = (np.inf, params.copy(), 0)
    train_curve, val_curve = [], []
    stale = 0
    epoch = 0
    for epoch in range(1, config.max_epochs + 1):
        Z, cache = forward_with_cache(params, T, X, rng, training=True)
        loss, dZ = cross_entropy(Z, labels, masks["train"])
        if not np.isfinite(loss):
            raise NumericalError(f"non-finite training loss at epoch {epoch}")
        grads = backward(params, T, cache, dZ)
        if config.weight_decay:
            grads = [g + config.weight_decay * W for g, W in zip(grads, params.weights)]
        opt.step(params.weights, grads)

        Zeval, _ = forward_with_cache(params, T, X)
        val_loss, _ = cross_entropy(Zeval, labels, masks["val"])
        if not np.isfinite(val_loss):
            raise NumericalError(f"non-finite validation loss at epoch {epoch}")
        train_curve.append(loss)
        val_curve.append(val_loss)
        if val_loss < best[0]:
            best = (val_loss, params.copy(), epoch)
            stale = 0
        else:
            stale += 1
            if stale >= config.patience:
                break
    return best, train_curve, val_curve, epoch


def loss_and_grads(params: ModelParams, T, X, labels, mask) -> tuple[float, list]:
    Z, cache = forward_with_cache(params, T, X)
    loss, dZ = cross_entropy(Z, labels, mask)
    return loss, backward(params, T, cache, dZ)


def gradient_check(variant: str, params: ModelParams, h, X, labels, mask=None,
                   step: float = 1e-5) -> float:
    """Compare manual gradients with central finite differences.

    Every weight entry is perturbed by ``+-step``.  Dropout is disabled.
    Returns ``max |analytic - numeric| / max(1, |numeric|)``.
    """
    if params.variant != variant:
        raise ValidationError(f"params are for {params.variant!r}, not {variant!r}")
    p = params.copy()
    p.dropout_rate = 0.0
    X = np.asarray(X, dtype=float)
    labels = np.asarray(labels)
    mask = np.ones(X.shape[0], dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
    T = operator_for(p, h)
    _, grads = loss_and_grads(p, T, X, labels, mask)
    worst = 0.0
    for W, G in zip(p.weights, grads):
        for idx in np.ndindex(W.shape):
            orig = W[idx]
            W[idx] = orig + step
            up = cross_entropy(forward_with_cache(p, T, X)[0], labels, mask)[0]
            W[idx] = orig - step
            down = cross_entropy(forward_with_cache(p, T, X)[0], labels, mask)[0]
            W[idx] = orig
            num = (up - down) / (2 * step)
            worst = max(worst, abs(G[idx] - num) / max(1.0, abs(num)))
    return worst
