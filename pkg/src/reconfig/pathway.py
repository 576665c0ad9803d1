"""Feed-forward networks, gate vectors, and the multiplexed pathway.

A pathway holds R weight banks with identical architecture. A gate vector
selects (or blends) banks; the effective per-layer matrix is the
gate-weighted sum of the banks' matrices, applied before the nonlinearity.
"""

import json

import numpy as np

from . import kernels, nonlin

SIMPLEX_ATOL = 1e-12


class ShapeError(ValueError):
    """Dimension mismatch between layers or between input and network."""


class GateVector:
    """Simplex weights over R configurations; optionally constrained one-hot."""

    def __init__(self, lam, one_hot=False):
        lam = np.asarray(lam, dtype=float)
        if lam.ndim != 1 or lam.size < 1:
            raise ValueError("gate must be a nonempty 1-d vector")
        if np.any(lam < 0.0):
            raise ValueError(f"gate entries must be nonnegative, got {lam}")
        if abs(lam.sum() - 1.0) > SIMPLEX_ATOL:
            raise ValueError(f"gate entries must sum to 1, got sum {lam.sum()!r}")
        if one_hot and not np.all((lam == 0.0) | (lam == 1.0)):
            raise ValueError(f"one-hot gate requires entries in {{0,1}}, got {lam}")
        self.lam = lam
        self.one_hot = bool(one_hot)

    def __len__(self):
        return self.lam.size

    def __eq__(self, other):
        return isinstance(other, GateVector) and np.array_equal(self.lam, other.lam)

    def __repr__(self):
        return f"GateVector({self.lam.tolist()})"

    def active_index(self):
        """Index of the single active configuration; requires a one-hot gate."""
        if not np.all((self.lam == 0.0) | (self.lam == 1.0)):
            raise ValueError("gate is not one-hot")
        return int(np.argmax(self.lam))


def make_one_hot(r, R):
    """Gate vector e_r of length R."""
    if not 0 <= r < R:
        raise ValueError(f"configuration index {r} out of range [0, {R})")
    lam = np.zeros(R)
    lam[r] = 1.0
    return GateVector(lam, one_hot=True)


class FeedForwardNetwork:
    """Ordered dense layers, each a weight matrix followed by a nonlinearity."""

    def __init__(self, layers, sigma):
        layers = [np.ascontiguousarray(m, dtype=float) for m in layers]
        if not layers:
            raise ValueError("network needs at least one layer")
        if isinstance(sigma, str):
            sigma = [sigma] * len(layers)
        if len(sigma) != len(layers):
            raise ValueError("need one nonlinearity per layer")
        for kind in sigma:
            nonlin.validate_kind(kind)
        for k, m in enumerate(layers):
            if m.ndim != 2:
                raise ShapeError(f"layer {k} weight matrix must be 2-d")
            if not np.all(np.isfinite(m)):
                raise ValueError(f"layer {k} has non-finite weights")
        for k in range(len(layers) - 1):
            if layers[k + 1].shape[1] != layers[k].shape[0]:
                raise ShapeError(
                    f"layer {k} outputs {layers[k].shape[0]} units but "
                    f"layer {k + 1} expects {layers[k + 1].shape[1]}"
                )
        self.layers = layers
        self.sigma = list(sigma)

    @property
    def input_dim(self):
        return self.layers[0].shape[1]

    @property
    def output_dim(self):
        return self.layers[-1].shape[0]

    @property
    def layer_shapes(self):
        return [m.shape for m in self.layers]


def _check_input(net, x, what="input"):
    x = np.ascontiguousarray(x, dtype=float)
    if x.ndim != 1 or x.size != net.input_dim:
        raise ShapeError(
            f"{what} has dim {x.size} but layer 0 expects {net.input_dim}"
        )
    return x


def forward_standalone(net, x):
    """Evaluate a plain feed-forward network on a single input vector."""
    x = _check_input(net, x)
    return kernels.forward(net.layers, net.sigma, x)


def forward_standalone_collect(net, x):
    """Evaluate and return the per-layer post-nonlinearity activations."""
    x = _check_input(net, x)
    return kernels.forward_collect(net.layers, net.sigma, x)


class MultiplexedPathway:
    """R feed-forward banks with identical architecture, selected by a gate."""

    def __init__(self, banks):
        if not banks:
            raise ValueError("pathway needs at least one bank")
        ref = banks[0]
        for r, net in enumerate(banks):
            if net.layer_shapes != ref.layer_shapes:
                raise ShapeError(
                    f"bank {r} shapes {net.layer_shapes} differ from bank 0 "
                    f"{ref.layer_shapes}"
                )
            if net.sigma != ref.sigma:
                raise ValueError(f"bank {r} nonlinearities differ from bank 0")
        self.banks = list(banks)

    @property
    def R(self):
        return len(self.banks)

    @property
    def input_dim(self):
        return self.banks[0].input_dim

    @property
    def output_dim(self):
        return self.banks[0].output_dim

    @property
    def sigma(self):
        return self.banks[0].sigma

    def blended_layers(self, gate):
        """Per-layer gate-weighted matrices sum_r lambda_r M^(k,r)."""
        if len(gate) != self.R:
            raise ShapeError(f"gate length {len(gate)} != R = {self.R}")
        out = []
        for k in range(len(self.banks[0].layers)):
            stack = np.stack([net.layers[k] for net in self.banks])
            out.append(np.tensordot(gate.lam, stack, axes=1))
        return out


def forward_multiplexed(path, gate, x):
    """Evaluate the pathway under gate lambda: per layer sigma(sum_r lambda_r M^(k,r) x).

    Realized by blending the banks' matrices before the matvec, which is
    algebraically identical and keeps one-hot gates exactly equivalent to
    the selected bank.
    """
    x = _check_input(path.banks[0], x)
    return kernels.forward(path.blended_layers(gate), path.sigma, x)


def forward_multiplexed_collect(path, gate, x):
    """forward_multiplexed plus per-layer activations (for activation masks)."""
    x = _check_input(path.banks[0], x)
    return kernels.forward_collect(path.blended_layers(gate), path.sigma, x)


def random_network(rng, dims, sigma, scale=1.0):
    """Gaussian-initialized network with layer sizes dims[0] -> ... -> dims[-1]."""
    layers = [scale * rng.standard_normal((dims[k + 1], dims[k]))
              for k in range(len(dims) - 1)]
    return FeedForwardNetwork(layers, sigma)


def random_pathway(rng, R, dims, sigma, scale=1.0):
    return MultiplexedPathway([random_network(rng, dims, sigma, scale)
                               for _ in range(R)])


# --- serialization ---------------------------------------------------------
#
# JSON round-trips Python floats through repr (shortest decimal that
# recovers the exact double), so dumping/loading is bit-exact for finite
# values.

def pathway_to_dict(path):
    return {
        "R": path.R,
        "layers": [list(m.shape) for m in path.banks[0].layers],
        "sigma": list(path.sigma),
        "banks": [[m.ravel().tolist() for m in net.layers] for net in path.banks],
    }


def pathway_from_dict(obj):
    shapes = [tuple(s) for s in obj["layers"]]
    sigma = list(obj["sigma"])
    banks = []
    for flat_layers in obj["banks"]:
        layers = [np.asarray(flat, dtype=float).reshape(shape)
                  for flat, shape in zip(flat_layers, shapes)]
        banks.append(FeedForwardNetwork(layers, sigma))
    if len(banks) != obj["R"]:
        raise ValueError(f"bank count {len(banks)} != declared R {obj['R']}")
    return MultiplexedPathway(banks)


def save_pathway(path, filename):
    with open(filename, "w") as f:
        json.dump(pathway_to_dict(path), f)
        f.write("\n")


def load_pathway(filename):
    with open(filename) as f:
        return pathway_from_dict(json.load(f))
