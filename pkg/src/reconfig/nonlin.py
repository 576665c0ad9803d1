"""Element-wise nonlinearities shared by the forward kernels."""

import numpy as np

IDENTITY = "identity"
SIGMOID = "logistic-sigmoid"
RECTIFIER = "rectifier"
NORMALIZE = "euclidean-normalize"

KINDS = (IDENTITY, SIGMOID, RECTIFIER, NORMALIZE)

# integer codes used by the compiled kernel
CODES = {kind: i for i, kind in enumerate(KINDS)}


def validate_kind(kind):
    if kind not in CODES:
        raise ValueError(f"unknown nonlinearity {kind!r}; expected one of {KINDS}")
    return kind


def apply(kind, z):
    """Apply nonlinearity `kind` to pre-activation vector `z`."""
    if kind == IDENTITY:
        return z
    if kind == SIGMOID:
        return 1.0 / (1.0 + np.exp(-z))
    if kind == RECTIFIER:
        return np.maximum(z, 0.0)
    if kind == NORMALIZE:
        norm = np.sqrt(np.dot(z, z))
        if norm == 0.0:
            return np.zeros_like(z)
        return z / norm
    raise ValueError(f"unknown nonlinearity {kind!r}")


def derivative(kind, z, a):
    """d(activation)/d(pre-activation) given pre-activation z and activation a.

    Returns either a vector (element-wise derivative) or a full Jacobian
    matrix for the normalization nonlinearity.
    """
    if kind == IDENTITY:
        return np.ones_like(z)
    if kind == SIGMOID:
        return a * (1.0 - a)
    if kind == RECTIFIER:
        # subgradient at 0 is 0
        return (z > 0.0).astype(float)
    if kind == NORMALIZE:
        norm = np.sqrt(np.dot(z, z))
        if norm == 0.0:
            return np.zeros((z.size, z.size))
        u = z / norm
        return (np.eye(z.size) - np.outer(u, u)) / norm
    raise ValueError(f"unknown nonlinearity {kind!r}")
