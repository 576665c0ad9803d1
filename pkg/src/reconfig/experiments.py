"""Desk-scale timing and activation experiments.

Time is counted in configurations tried per stimulus; a priming schedule
reorders the configurations tried first for stimuli of a matching
category. Activation masks record which units cross a threshold during a
trial, so union fractions can be compared across trial lengths.
"""

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .control import ComponentOutput, ControlPolicy
from .pathway import (FeedForwardNetwork, MultiplexedPathway,
                      forward_standalone_collect)


@dataclass
class Stimulus:
    input: np.ndarray
    true_class: int
    category: object = None


@dataclass
class Task:
    stimuli: list
    deadline: Optional[int] = None  # max configurations per stimulus

    def __post_init__(self):
        if not self.stimuli:
            raise ValueError("task must carry at least one stimulus")
        if self.deadline is not None and self.deadline < 1:
            raise ValueError("deadline must be positive")


@dataclass
class PrimingSchedule:
    """Per-category priority ordering of configuration indices."""

    affinity: dict

    def validate(self, R):
        for tag, order in self.affinity.items():
            if sorted(order) != list(range(R)):
                raise ValueError(
                    f"priming order for {tag!r} is not a permutation of 0..{R - 1}"
                )

    def order_for(self, category, default):
        return self.affinity.get(category, default)


@dataclass
class TrialRecord:
    stimulus_index: int
    true_class: int
    response: Optional[int]  # None = no-answer
    configurations_tried: int
    masks: list = field(repr=False, default_factory=list)

    def union_fraction(self):
        if not self.masks:
            return 0.0
        union = np.zeros_like(self.masks[0], dtype=bool)
        for m in self.masks:
            union |= m
        return union.sum() / union.size


def activation_mask(activations, threshold):
    """Boolean mask over all post-nonlinearity units of one forward pass."""
    return np.concatenate([a > threshold for a in activations])


def run_task(pathway, policy, task, priming=None, seed=0,
             activation_threshold=0.5):
    """Run every stimulus under trial-until-accept control.

    Deterministic given the weights and the task; `seed` is recorded into
    derived artifacts but introduces no randomness here.
    """
    if policy.kind != "trial":
        raise ValueError("run_task requires a trial policy")
    if priming is not None:
        priming.validate(pathway.R)
    R = pathway.R
    limit = R * policy.max_sweeps
    if task.deadline is not None:
        limit = min(limit, task.deadline)
    records = []
    for idx, stim in enumerate(task.stimuli):
        order = policy.order
        if priming is not None:
            order = priming.order_for(stim.category, policy.order)
        masks = []
        response = None
        tried = 0
        for step in range(limit):
            r = order[step % R]
            acts = forward_standalone_collect(pathway.banks[r], stim.input)
            masks.append(activation_mask(acts, activation_threshold))
            out = ComponentOutput(reject=float(acts[-1][0]), scores=acts[-1][1:])
            tried += 1
            if out.reject < 0.5:
                response = int(np.argmax(out.scores))
                break
        records.append(TrialRecord(idx, stim.true_class, response, tried, masks))
    return records


@dataclass
class ActivationReport:
    overall: Optional[float]          # union fraction across all records
    per_count: dict                   # configurations_tried -> mean union fraction

    def curve(self):
        return sorted(self.per_count.items())


def measure_activation_fraction(records):
    """Union activation fractions, overall and grouped by configurations tried."""
    if not records:
        return ActivationReport(None, {})
    units = records[0].masks[0].size
    total = np.zeros(units, dtype=bool)
    by_count = {}
    for rec in records:
        for m in rec.masks:
            total |= m
        by_count.setdefault(rec.configurations_tried, []).append(rec.union_fraction())
    per_count = {c: float(np.mean(v)) for c, v in by_count.items()}
    return ActivationReport(total.sum() / units, per_count)


def deadline_sweep(pathway, policy, task, deadlines, priming=None,
                   activation_threshold=0.5):
    """Accuracy and mean configurations tried under each deadline."""
    rows = []
    for deadline in deadlines:
        if deadline < 1:
            raise ValueError("deadlines must be positive")
        truncated = replace(task, deadline=deadline)
        records = run_task(pathway, policy, truncated, priming=priming,
                           activation_threshold=activation_threshold)
        correct = sum(1 for r in records if r.response == r.true_class)
        rows.append({
            "deadline": int(deadline),
            "accuracy": correct / len(records),
            "mean_configurations_tried": float(
                np.mean([r.configurations_tried for r in records])
            ),
        })
    return rows


def make_priming_pathway(categories):
    """Hand-built pathway for the synthetic priming task.

    One configuration per category; configuration r outputs
    (1 - x_r, x_0..x_{C-1}, signature block) under identity nonlinearity,
    so it accepts exactly the stimuli of category r and lights a
    configuration-specific signature unit.
    """
    C = categories
    banks = []
    for r in range(C):
        m = np.zeros((1 + C + C, C))
        # reject row sums every input except x_r: near 0 for category r
        # stimuli (which are ~e_r), near 1 for everything else
        m[0, :] = 1.0
        m[0, r] = 0.0
        # class scores get gain 2 so they dominate the signature unit in argmax
        m[1:1 + C, :] = 2.0 * np.eye(C)
        m[1 + C + r, :] = 1.0
        banks.append(FeedForwardNetwork([m], ["identity"]))
    return MultiplexedPathway(banks)


def make_priming_fixture(seed=21, categories=3, stimuli_per_category=10,
                         noise=0.05):
    """Synthetic multi-category task with deterministic accepts.

    Returns (pathway, policy, task, priming). Unprimed order is
    0..C-1, so category c needs c+1 configurations; the priming schedule
    puts each category's accepting configuration first.
    """
    rng = np.random.default_rng(seed)
    C = categories
    pathway = make_priming_pathway(C)
    stimuli = []
    for c in range(C):
        for _ in range(stimuli_per_category):
            x = noise * rng.uniform(0.0, 1.0, C)
            x[c] += 1.0
            stimuli.append(Stimulus(x, true_class=c, category=c))
    policy = ControlPolicy(kind="trial", order=list(range(C)), max_sweeps=1)
    priming = PrimingSchedule({
        c: [c] + [r for r in range(C) if r != c] for c in range(C)
    })
    return pathway, policy, Task(stimuli), priming
