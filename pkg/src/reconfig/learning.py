"""Per-configuration training: full-batch gradient descent with backprop.

Training under a one-hot gate touches exactly one weight bank, so every
other bank is untouched by construction; the tests verify this on the
serialized bytes.
"""

from dataclasses import dataclass

import numpy as np

from . import nonlin
from .pathway import ShapeError

SQUARED_ERROR = "squared-error"
XENT_SIGMOID = "cross-entropy-with-sigmoid"
LOSSES = (SQUARED_ERROR, XENT_SIGMOID)


class DivergenceError(RuntimeError):
    def __init__(self, epoch):
        super().__init__(f"non-finite loss at epoch {epoch}")
        self.epoch = epoch


@dataclass
class TrainingBatch:
    inputs: np.ndarray   # (N, input_dim)
    targets: np.ndarray  # (N, output_dim)

    def __post_init__(self):
        self.inputs = np.atleast_2d(np.asarray(self.inputs, dtype=float))
        self.targets = np.atleast_2d(np.asarray(self.targets, dtype=float))
        if self.inputs.shape[0] != self.targets.shape[0]:
            raise ValueError("inputs and targets must have equal length")


@dataclass
class TrainSpec:
    learning_rate: float
    epochs: int
    loss: str = SQUARED_ERROR
    halve_on_increase: bool = False

    def __post_init__(self):
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be nonnegative")
        if self.epochs < 0:
            raise ValueError("epochs must be nonnegative")
        if self.loss not in LOSSES:
            raise ValueError(f"unknown loss {self.loss!r}")


def _forward_cache(net, X):
    """Batch forward pass keeping (pre-activation, activation) per layer."""
    A = X
    cache = []
    for m, kind in zip(net.layers, net.sigma):
        Z = A @ m.T
        if kind == nonlin.NORMALIZE:
            A = np.stack([nonlin.apply(kind, z) for z in Z])
        else:
            A = nonlin.apply(kind, Z)
        cache.append((Z, A))
    return cache


def batch_loss(net, batch, loss_kind):
    X, T = batch.inputs, batch.targets
    Y = _forward_cache(net, X)[-1][1]
    N = X.shape[0]
    with np.errstate(over="ignore"):  # divergence shows up as inf loss
        if loss_kind == SQUARED_ERROR:
            return 0.5 * np.sum((Y - T) ** 2) / N
        # cross-entropy with sigmoid output
        return float(-np.sum(T * np.log(Y) + (1.0 - T) * np.log(1.0 - Y)) / N)


def loss_and_gradients(net, batch, loss_kind):
    """Full-batch loss plus analytic gradient for every layer matrix."""
    if loss_kind not in LOSSES:
        raise ValueError(f"unknown loss {loss_kind!r}")
    X, T = batch.inputs, batch.targets
    if X.shape[1] != net.input_dim:
        raise ShapeError(f"batch input dim {X.shape[1]} != {net.input_dim}")
    if T.shape[1] != net.output_dim:
        raise ShapeError(f"batch target dim {T.shape[1]} != {net.output_dim}")
    N = X.shape[0]
    cache = _forward_cache(net, X)
    Y = cache[-1][1]

    if loss_kind == SQUARED_ERROR:
        loss = 0.5 * np.sum((Y - T) ** 2) / N
        dA = (Y - T) / N
        dZ = None
    else:
        if net.sigma[-1] != nonlin.SIGMOID:
            raise ValueError("cross-entropy-with-sigmoid needs a sigmoid final layer")
        loss = float(-np.sum(T * np.log(Y) + (1.0 - T) * np.log(1.0 - Y)) / N)
        dA = None
        dZ = (Y - T) / N  # combined sigmoid + cross-entropy gradient

    grads = [None] * len(net.layers)
    for k in range(len(net.layers) - 1, -1, -1):
        Z, A = cache[k]
        if dZ is None:
            kind = net.sigma[k]
            if kind == nonlin.NORMALIZE:
                dZ = np.stack([
                    nonlin.derivative(kind, z, a) @ da
                    for z, a, da in zip(Z, A, dA)
                ])
            else:
                dZ = dA * nonlin.derivative(kind, Z, A)
        A_prev = cache[k - 1][1] if k > 0 else X
        grads[k] = dZ.T @ A_prev
        dA = dZ @ net.layers[k]
        dZ = None
    return loss, grads


def gradient_check(net, batch, loss_kind, h=1e-5):
    """Max relative error of analytic vs. central-difference gradients."""
    if h <= 0:
        raise ValueError("h must be positive")
    _, grads = loss_and_gradients(net, batch, loss_kind)
    worst = 0.0
    for k, m in enumerate(net.layers):
        for idx in np.ndindex(m.shape):
            orig = m[idx]
            m[idx] = orig + h
            lp = batch_loss(net, batch, loss_kind)
            m[idx] = orig - h
            lm = batch_loss(net, batch, loss_kind)
            m[idx] = orig
            g_num = (lp - lm) / (2.0 * h)
            g_ana = grads[k][idx]
            err = abs(g_ana - g_num) / max(abs(g_ana), abs(g_num), 1e-8)
            worst = max(worst, err)
    return worst


def train_configuration(path, r, batch, spec):
    """Full-batch gradient descent on bank r only; returns the loss curve.

    The curve has length epochs + 1: the initial loss followed by the loss
    after each epoch. With halve_on_increase, an epoch whose update raises
    the loss is rolled back and retried at half the step size.
    """
    net = path.banks[r]
    lr = spec.learning_rate
    losses = [batch_loss(net, batch, spec.loss)]
    if not np.isfinite(losses[0]):
        raise DivergenceError(0)
    for epoch in range(1, spec.epochs + 1):
        while True:
            loss, grads = loss_and_gradients(net, batch, spec.loss)
            for m, g in zip(net.layers, grads):
                m -= lr * g
            new_loss = batch_loss(net, batch, spec.loss)
            if not np.isfinite(new_loss):
                raise DivergenceError(epoch)
            if spec.halve_on_increase and new_loss > loss and lr > 0:
                for m, g in zip(net.layers, grads):
                    m += lr * g
                lr *= 0.5
                continue
            break
        losses.append(new_loss)
    return np.array(losses)


def write_loss_curve(filename, losses):
    with open(filename, "w") as f:
        f.write("epoch,loss\n")
        for epoch, loss in enumerate(losses):
            f.write(f"{epoch},{float(loss)!r}\n")
