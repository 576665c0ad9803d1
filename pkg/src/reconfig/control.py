"""Control automata choosing the gate sequence.

Policy kinds: fixed (one configuration for the whole task), hierarchical
(a selector network's argmax picks the configuration), cycle (round-robin
through a fixed order), trial (try configurations in order until one
accepts), and lambda_recurrent (caller-supplied pure update of the gate
from the previous gate and the latest component output).
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .pathway import GateVector, forward_standalone, make_one_hot

DEFAULT_THRESHOLD = 0.5


class ControlAmbiguityError(ValueError):
    """Thresholded gate update did not yield a one-hot vector (noisy y_0)."""


@dataclass
class ControlState:
    """Unary configuration label plus a step counter."""

    labels: np.ndarray
    step_count: int = 0

    def __post_init__(self):
        labels = np.asarray(self.labels)
        if labels.ndim != 1 or not np.all((labels == 0) | (labels == 1)):
            raise ValueError("labels must be a 0/1 vector")
        if labels.sum() != 1:
            raise ValueError("exactly one label must be active")
        if self.step_count < 0:
            raise ValueError("step_count must be nonnegative")
        self.labels = labels.astype(float)

    @classmethod
    def at(cls, j, R, step_count=0):
        labels = np.zeros(R)
        labels[j] = 1.0
        return cls(labels, step_count)

    @property
    def active(self):
        return int(np.argmax(self.labels))


@dataclass
class ComponentOutput:
    """One configuration's output: reject flag y_0, class scores, optional log-density."""

    reject: float
    scores: np.ndarray
    log_density: Optional[float] = None

    def __post_init__(self):
        self.scores = np.asarray(self.scores, dtype=float)
        if not np.isfinite(self.reject):
            raise ValueError("reject flag must be finite")
        if not np.all(np.isfinite(self.scores)):
            raise ValueError("scores must be finite")


@dataclass
class ControlPolicy:
    kind: str  # fixed | hierarchical | cycle | trial | lambda_recurrent
    r: Optional[int] = None
    selector: object = None
    order: Optional[list] = None
    max_sweeps: int = 1
    update: Optional[Callable] = None
    threshold_enabled: bool = False
    threshold: float = DEFAULT_THRESHOLD

    def __post_init__(self):
        kinds = ("fixed", "hierarchical", "cycle", "trial", "lambda_recurrent")
        if self.kind not in kinds:
            raise ValueError(f"unknown policy kind {self.kind!r}")
        if self.kind == "fixed" and self.r is None:
            raise ValueError("fixed policy needs a configuration index")
        if self.kind == "hierarchical" and self.selector is None:
            raise ValueError("hierarchical policy needs a selector network")
        if self.kind in ("cycle", "trial"):
            if self.order is None:
                raise ValueError(f"{self.kind} policy needs an order")
            if sorted(self.order) != list(range(len(self.order))):
                raise ValueError(f"order {self.order} is not a permutation")
        if self.kind == "lambda_recurrent" and self.update is None:
            raise ValueError("lambda_recurrent policy needs an update callable")
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be >= 1")
        if not 0.0 < self.threshold < 1.0:
            raise ValueError("threshold must be in (0, 1)")


def cycle_next(state, R):
    """Round-robin gate update: active label j maps to e_{(j+1) mod R}."""
    return make_one_hot((state.active + 1) % R, R)


def decision_list_next(state, out, R, threshold_enabled=False,
                       threshold=DEFAULT_THRESHOLD):
    """Gate update for a decision list.

    lambda_k = (1 - y_0) * l_j * [k == (j+1) mod R] + y_0 * [k == 0]

    y_0 = 0 advances the cycle; y_0 = 1 resets the gate to e_0. With
    thresholding, each lambda_k is stepped at `threshold` and the result
    must come out one-hot.
    """
    y0 = float(out.reject)
    lam = np.zeros(R)
    lam[(state.active + 1) % R] += (1.0 - y0) * state.labels[state.active]
    lam[0] += y0
    if threshold_enabled:
        lam = (lam > threshold).astype(float)
        if lam.sum() != 1.0:
            raise ControlAmbiguityError(
                f"thresholded gate {lam.tolist()} is not one-hot (y_0 = {y0})"
            )
        return GateVector(lam, one_hot=True)
    return GateVector(lam)


def hierarchical_gate(selector, x):
    """One-hot gate at the argmax of the selector network's output.

    Ties break toward the lowest index.
    """
    out = forward_standalone(selector, x)
    return make_one_hot(int(np.argmax(out)), out.size)


@dataclass
class TrialStepResult:
    gate: GateVector
    done: bool
    no_answer: bool = False


def trial_step(state, out, policy):
    """One step of trial-until-accept control (mutates state).

    The active configuration's output decides: reject < 0.5 means it
    accepted, the task is done and the gate resets to the first
    configuration in order. Otherwise advance; after max_sweeps full
    sweeps with no acceptance, stop with a no-answer marker.
    """
    if policy.kind != "trial":
        raise ValueError("trial_step requires a trial policy")
    R = len(policy.order)
    first = make_one_hot(policy.order[0], R)
    if out.reject < 0.5:
        state.step_count += 1
        return TrialStepResult(gate=first, done=True)
    state.step_count += 1
    if state.step_count >= R * policy.max_sweeps:
        return TrialStepResult(gate=first, done=True, no_answer=True)
    nxt = policy.order[state.step_count % R]
    state.labels = np.zeros(R)
    state.labels[nxt] = 1.0
    return TrialStepResult(gate=make_one_hot(nxt, R), done=False)


def lambda_recurrent_next(policy, prev_gate, out):
    """Type-V update: only the gate flows recurrently, via a pure callable."""
    if policy.kind != "lambda_recurrent":
        raise ValueError("lambda_recurrent_next requires a lambda_recurrent policy")
    gate = policy.update(prev_gate, out)
    if not isinstance(gate, GateVector):
        gate = GateVector(gate)
    return gate
