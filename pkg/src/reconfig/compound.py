"""Sequential compound classifiers assembled from a pathway and a control policy.

Covers decision lists (first accepting configuration answers), decision
trees (interior configurations route to the next one), cycled ensembles
(temporal averaging of scores), and style models (mixture weights from
group evidence with an optional sliding-window approximation).

Conventions shared by all of them: a configuration's raw output vector is
read as (y_0, y_1, ..., y_n) where y_0 is the reject flag and y_1..y_n are
class scores; every argmax breaks ties toward the lowest index.
"""

from collections import deque
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import logsumexp

from .control import ComponentOutput, ControlState, trial_step
from .pathway import forward_standalone, make_one_hot

COMBINERS = ("first-accept", "tree-route", "temporal-average", "style-weighted")


class DegenerateEvidenceError(ValueError):
    """Every mixture component assigns -inf log-likelihood to the evidence."""


def component_output(pathway, r, x):
    """Run bank r and split its output into (reject, class scores)."""
    out = forward_standalone(pathway.banks[r], x)
    return ComponentOutput(reject=float(out[0]), scores=out[1:])


@dataclass
class SequentialCompoundClassifier:
    pathway: object
    policy: object
    combiner: str
    routing: Optional["TreeRouting"] = None

    def __post_init__(self):
        if self.combiner not in COMBINERS:
            raise ValueError(f"unknown combiner {self.combiner!r}")
        needs = {
            "first-accept": "trial",
            "temporal-average": "cycle",
            "style-weighted": "cycle",
        }
        if self.combiner in needs and self.policy.kind != needs[self.combiner]:
            raise ValueError(
                f"{self.combiner} combiner requires a {needs[self.combiner]} policy"
            )
        if self.combiner == "tree-route" and self.routing is None:
            raise ValueError("tree-route combiner requires a TreeRouting")


@dataclass
class DecisionListResult:
    class_index: Optional[int]  # None = no-answer
    configurations_tried: int


def classify_decision_list(clf, x):
    """Try configurations in policy order; the first accepting one answers."""
    policy = clf.policy
    state = ControlState.at(policy.order[0], len(policy.order))
    tried = 0
    while True:
        r = policy.order[state.step_count % len(policy.order)]
        out = component_output(clf.pathway, r, x)
        tried += 1
        step = trial_step(state, out, policy)
        if step.done:
            if step.no_answer:
                return DecisionListResult(None, tried)
            return DecisionListResult(int(np.argmax(out.scores)), tried)


class TreeRouting:
    """Routing table for decision trees over configuration indices.

    node_map[r][c] is the configuration visited after interior
    configuration r outputs class c. The graph must be a rooted tree whose
    every path from the root ends at a leaf, and every interior node must
    route all n_classes outcomes.
    """

    def __init__(self, root, node_map, leaves, n_classes):
        self.root = root
        self.node_map = {int(k): {int(c): int(v) for c, v in m.items()}
                         for k, m in node_map.items()}
        self.leaves = set(int(v) for v in leaves)
        self.n_classes = int(n_classes)
        self._validate()

    def _validate(self):
        interior = set(self.node_map)
        if interior & self.leaves:
            raise ValueError("a configuration cannot be both interior and leaf")
        nodes = interior | self.leaves
        if self.root not in nodes:
            raise ValueError("root is not a known node")
        for r, edges in self.node_map.items():
            if sorted(edges) != list(range(self.n_classes)):
                raise ValueError(
                    f"interior node {r} must route classes 0..{self.n_classes - 1}"
                )
            for child in edges.values():
                if child not in nodes:
                    raise ValueError(f"edge {r} -> {child} leaves the node set")
        # single root / acyclicity: every non-root has in-degree exactly 1,
        # the root in-degree 0, and everything is reachable from the root
        indeg = {n: 0 for n in nodes}
        for edges in self.node_map.values():
            for child in edges.values():
                indeg[child] += 1
        if indeg[self.root] != 0:
            raise ValueError("root has incoming edges")
        bad = [n for n in nodes if n != self.root and indeg[n] != 1]
        if bad:
            raise ValueError(f"nodes {bad} violate the tree property")
        seen = set()
        stack = [self.root]
        while stack:
            n = stack.pop()
            if n in seen:
                raise ValueError("routing graph contains a cycle")
            seen.add(n)
            stack.extend(self.node_map.get(n, {}).values())
        if seen != nodes:
            raise ValueError(f"unreachable nodes: {sorted(nodes - seen)}")


@dataclass
class DecisionTreeResult:
    class_index: int
    path: list


def classify_decision_tree(clf, routing, x):
    """Route from the root by interior argmax classes; answer at a leaf."""
    r = routing.root
    visited = []
    while True:
        visited.append(r)
        out = component_output(clf.pathway, r, x)
        c = int(np.argmax(out.scores))
        if r in routing.leaves:
            return DecisionTreeResult(c, visited)
        r = routing.node_map[r][c]


def classify_ensemble(clf, x, decay=1.0, uniform=False):
    """Cycle once through all configurations, temporally averaging scores.

    Exponential average a <- (1 - decay) * a + decay * scores; with
    uniform=True the step size is 1/t, which makes the result the exact
    arithmetic mean over configurations.
    """
    if not 0.0 < decay <= 1.0:
        raise ValueError("decay must be in (0, 1]")
    order = clf.policy.order
    avg = None
    for t, r in enumerate(order, start=1):
        out = component_output(clf.pathway, r, x)
        step = 1.0 / t if uniform else decay
        if avg is None:
            avg = out.scores.copy()
        else:
            avg = (1.0 - step) * avg + step * out.scores
    return avg


# --- style models ----------------------------------------------------------

@dataclass
class SampleGroup:
    samples: list
    group_id: object = None

    def __post_init__(self):
        if not self.samples:
            raise ValueError("sample group must be nonempty")


class DiagonalGaussianComponent:
    """Class-conditional diagonal Gaussians with a class prior.

    Provides the class posterior p(c|x) and the marginal log-density
    log p(x) = logsumexp_c [log prior_c + log p(x|c)].
    """

    kind = "gaussian"

    def __init__(self, means, variances, class_prior=None):
        self.means = np.asarray(means, dtype=float)
        self.variances = np.asarray(variances, dtype=float)
        if self.means.shape != self.variances.shape or self.means.ndim != 2:
            raise ValueError("means and variances must both be (classes, dims)")
        if np.any(self.variances <= 0.0):
            raise ValueError("variances must be positive")
        C = self.means.shape[0]
        if class_prior is None:
            class_prior = np.full(C, 1.0 / C)
        self.class_prior = np.asarray(class_prior, dtype=float)
        if abs(self.class_prior.sum() - 1.0) > 1e-9 or np.any(self.class_prior < 0):
            raise ValueError("class prior must lie on the simplex")

    def _log_joint(self, x):
        x = np.asarray(x, dtype=float)
        ll = -0.5 * np.sum(
            (x - self.means) ** 2 / self.variances
            + np.log(2.0 * np.pi * self.variances),
            axis=1,
        )
        with np.errstate(divide="ignore"):
            return np.log(self.class_prior) + ll

    def log_density(self, x):
        return float(logsumexp(self._log_joint(x)))

    def class_posterior(self, x):
        lj = self._log_joint(x)
        return np.exp(lj - logsumexp(lj))

    def to_dict(self):
        return {
            "kind": self.kind,
            "means": self.means.tolist(),
            "variances": self.variances.tolist(),
            "class_prior": self.class_prior.tolist(),
        }


class HistogramComponent:
    """Per-class product-of-per-dimension histogram densities.

    probs has shape (classes, dims, bins); edges has shape (dims, bins+1).
    Samples outside the binned range get -inf log-density.
    """

    kind = "histogram"

    def __init__(self, edges, probs, class_prior=None):
        self.edges = np.asarray(edges, dtype=float)
        self.probs = np.asarray(probs, dtype=float)
        if self.edges.ndim != 2 or self.probs.ndim != 3:
            raise ValueError("edges must be (dims, bins+1), probs (classes, dims, bins)")
        if self.probs.shape[2] != self.edges.shape[1] - 1:
            raise ValueError("probs bin count does not match edges")
        if np.any(self.probs < 0) or np.any(np.abs(self.probs.sum(axis=2) - 1) > 1e-9):
            raise ValueError("per-dimension bin probabilities must lie on the simplex")
        C = self.probs.shape[0]
        if class_prior is None:
            class_prior = np.full(C, 1.0 / C)
        self.class_prior = np.asarray(class_prior, dtype=float)
        if abs(self.class_prior.sum() - 1.0) > 1e-9 or np.any(self.class_prior < 0):
            raise ValueError("class prior must lie on the simplex")

    def _log_joint(self, x):
        x = np.asarray(x, dtype=float)
        C, D, _ = self.probs.shape
        widths = np.diff(self.edges, axis=1)
        out = np.zeros(C)
        for d in range(D):
            idx = np.searchsorted(self.edges[d], x[d], side="right") - 1
            if idx < 0 or idx >= self.probs.shape[2]:
                return np.full(C, -np.inf)
            with np.errstate(divide="ignore"):
                out += np.log(self.probs[:, d, idx]) - np.log(widths[d, idx])
        with np.errstate(divide="ignore"):
            return np.log(self.class_prior) + out

    def log_density(self, x):
        return float(logsumexp(self._log_joint(x)))

    def class_posterior(self, x):
        lj = self._log_joint(x)
        z = logsumexp(lj)
        if z == -np.inf:
            raise DegenerateEvidenceError("sample outside histogram support")
        return np.exp(lj - z)

    def to_dict(self):
        return {
            "kind": self.kind,
            "edges": self.edges.tolist(),
            "probs": self.probs.tolist(),
            "class_prior": self.class_prior.tolist(),
        }


@dataclass
class StyleModel:
    """Finite mixture of density-classifier components with a component prior."""

    components: list
    prior: np.ndarray
    mode: str = "bayesian"  # or "maximum-likelihood"

    def __post_init__(self):
        self.prior = np.asarray(self.prior, dtype=float)
        if self.prior.size != len(self.components):
            raise ValueError("prior length must match component count")
        if np.any(self.prior < 0) or abs(self.prior.sum() - 1.0) > 1e-9:
            raise ValueError("prior must lie on the simplex")
        if self.mode not in ("bayesian", "maximum-likelihood"):
            raise ValueError(f"unknown mode {self.mode!r}")

    @property
    def R(self):
        return len(self.components)


def style_group_posterior(model, group):
    """Posterior over components given a whole group of samples.

    Works in log space: log prior_i + sum_j log p_i(x_j), normalized with
    logsumexp. Maximum-likelihood mode returns a one-hot at the argmax.
    """
    with np.errstate(divide="ignore"):
        totals = np.log(model.prior)
    for x in group.samples:
        totals = totals + np.array([c.log_density(x) for c in model.components])
    if np.all(totals == -np.inf):
        raise DegenerateEvidenceError("all components have -inf log-likelihood")
    if model.mode == "maximum-likelihood":
        lam = np.zeros(model.R)
        lam[int(np.argmax(totals))] = 1.0
        return lam
    return np.exp(totals - logsumexp(totals))


class SlidingWindowEstimator:
    """Rolling per-component sums of the last W log-density observations.

    Components absent from `active` on a push are skipped: their buffer,
    and hence their windowed sum, stays frozen.
    """

    def __init__(self, window, R):
        if window < 1:
            raise ValueError("window must be positive")
        self.window = int(window)
        self.R = int(R)
        self.buffers = [deque(maxlen=self.window) for _ in range(self.R)]

    @property
    def empty(self):
        return all(len(b) == 0 for b in self.buffers)

    def push(self, log_densities, active=None):
        log_densities = np.asarray(log_densities, dtype=float)
        if log_densities.size != self.R:
            raise ValueError(f"expected {self.R} log-densities")
        if active is None:
            active = range(self.R)
        for i in active:
            self.buffers[i].append(float(log_densities[i]))
        return self.windowed()

    def windowed(self):
        return np.array([sum(b) for b in self.buffers])


def style_window_update(est, per_component_log_density):
    """Push one observation vector and return the windowed per-component sums."""
    return est.push(per_component_log_density)


def skip_low_evidence(est, margin):
    """Components whose windowed log-likelihood is within `margin` of the best."""
    if est.empty:
        raise ValueError("estimator buffer is empty")
    w = est.windowed()
    return {i for i in range(est.R) if w[i] >= w.max() - margin}


def style_model_to_dict(model):
    return {
        "prior": model.prior.tolist(),
        "mode": model.mode,
        "components": [c.to_dict() for c in model.components],
    }


def style_model_from_dict(obj):
    comps = []
    for c in obj["components"]:
        kind = c.get("kind")
        if kind == "gaussian":
            comps.append(DiagonalGaussianComponent(
                c["means"], c["variances"], c.get("class_prior")))
        elif kind == "histogram":
            comps.append(HistogramComponent(
                c["edges"], c["probs"], c.get("class_prior")))
        else:
            raise ValueError(f"unknown component kind {kind!r}")
    return StyleModel(comps, obj["prior"], obj.get("mode", "bayesian"))


def load_grouped_csv(filename):
    """Read a grouped dataset: columns group_id, feature_1..feature_d, label.

    Returns (groups, labels): SampleGroups in order of first appearance and
    the per-group list of integer labels.
    """
    import csv

    by_group = {}
    labels = {}
    with open(filename, newline="") as f:
        reader = csv.DictReader(f)
        feat_cols = [c for c in reader.fieldnames if c.startswith("feature_")]
        if "group_id" not in reader.fieldnames or "label" not in reader.fieldnames:
            raise ValueError("grouped CSV needs group_id, feature_*, label columns")
        for row in reader:
            g = row["group_id"]
            x = np.array([float(row[c]) for c in feat_cols])
            by_group.setdefault(g, []).append(x)
            labels.setdefault(g, []).append(int(row["label"]))
    groups = [SampleGroup(samples, group_id=g) for g, samples in by_group.items()]
    return groups, [labels[g.group_id] for g in groups]


def style_classify(model, est, x, margin=None):
    """Mixture class posterior p(c|x) = sum_i lambda_i p_i(c|x).

    Cycles the components gathering p_i(c|x) and log p_i(x), updates the
    sliding window, then weights the class posteriors by the exponentiated
    windowed log-likelihoods (bayesian) or a one-hot at their argmax
    (maximum-likelihood). With `margin` set, low-evidence components are
    skipped on this cycle and their windowed values stay frozen; weights
    are renormalized over the active set.
    """
    if margin is not None and not est.empty:
        active = sorted(skip_low_evidence(est, margin))
    else:
        active = list(range(model.R))

    posts = {}
    logds = np.zeros(model.R)
    for i in active:
        posts[i] = model.components[i].class_posterior(x)
        logds[i] = model.components[i].log_density(x)
    est.push(logds, active=active)

    w = est.windowed()
    w_active = np.array([w[i] for i in active])
    if np.all(w_active == -np.inf):
        raise DegenerateEvidenceError("all active components have -inf evidence")
    if model.mode == "maximum-likelihood":
        lam_active = np.zeros(len(active))
        lam_active[int(np.argmax(w_active))] = 1.0
    else:
        lam_active = np.exp(w_active - logsumexp(w_active))

    posterior = np.zeros_like(posts[active[0]])
    for lam_i, i in zip(lam_active, active):
        posterior = posterior + lam_i * posts[i]
    return posterior
