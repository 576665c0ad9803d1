"""Pure-Python (numpy) forward kernel; fallback when the compiled one is absent."""

import numpy as np

from . import nonlin

BACKEND = "python"


def forward(mats, kinds, x):
    """Run x through layers (matrix, nonlinearity) pairs; return final activation."""
    a = x
    for m, kind in zip(mats, kinds):
        a = nonlin.apply(kind, m @ a)
    return a


def forward_collect(mats, kinds, x):
    """Like forward, but returns the post-nonlinearity activation of every layer."""
    acts = []
    a = x
    for m, kind in zip(mats, kinds):
        a = nonlin.apply(kind, m @ a)
        acts.append(np.asarray(a, dtype=float))
    return acts
