# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled forward kernel: dense matvec plus element-wise nonlinearity per layer."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, sqrt

cnp.import_array()

BACKEND = "cython"

# must match nonlin.CODES ordering
DEF K_IDENTITY = 0
DEF K_SIGMOID = 1
DEF K_RECTIFIER = 2
DEF K_NORMALIZE = 3


cdef void _layer(double[:, ::1] m, double[::1] x, double[::1] out, int kind) noexcept:
    cdef Py_ssize_t i, j
    cdef Py_ssize_t rows = m.shape[0]
    cdef Py_ssize_t cols = m.shape[1]
    cdef double acc, norm

    for i in range(rows):
        acc = 0.0
        for j in range(cols):
            acc += m[i, j] * x[j]
        out[i] = acc

    if kind == K_SIGMOID:
        for i in range(rows):
            out[i] = 1.0 / (1.0 + exp(-out[i]))
    elif kind == K_RECTIFIER:
        for i in range(rows):
            if out[i] < 0.0:
                out[i] = 0.0
    elif kind == K_NORMALIZE:
        norm = 0.0
        for i in range(rows):
            norm += out[i] * out[i]
        norm = sqrt(norm)
        if norm == 0.0:
            for i in range(rows):
                out[i] = 0.0
        else:
            for i in range(rows):
                out[i] /= norm


def forward(mats, kinds, x):
    """Run x through layers (matrix, nonlinearity) pairs; return final activation."""
    from .nonlin import CODES
    cdef cnp.ndarray a = np.ascontiguousarray(x, dtype=np.float64)
    cdef cnp.ndarray m_arr, out
    for m, kind in zip(mats, kinds):
        m_arr = np.ascontiguousarray(m, dtype=np.float64)
        out = np.empty(m_arr.shape[0], dtype=np.float64)
        _layer(m_arr, a, out, CODES[kind])
        a = out
    return a


def forward_collect(mats, kinds, x):
    """Like forward, but returns the post-nonlinearity activation of every layer."""
    from .nonlin import CODES
    cdef cnp.ndarray a = np.ascontiguousarray(x, dtype=np.float64)
    cdef cnp.ndarray m_arr, out
    acts = []
    for m, kind in zip(mats, kinds):
        m_arr = np.ascontiguousarray(m, dtype=np.float64)
        out = np.empty(m_arr.shape[0], dtype=np.float64)
        _layer(m_arr, a, out, CODES[kind])
        a = out
        acts.append(a)
    return acts
