"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line (run with `pytest -s tests/test_acceptance.py` to see them).
"""

import json
import os
import time

import numpy as np
import pytest
from scipy.special import logsumexp

from reconfig.cli import main as cli_main
from reconfig.compound import (DiagonalGaussianComponent, SampleGroup,
                               SequentialCompoundClassifier,
                               SlidingWindowEstimator, StyleModel, TreeRouting,
                               classify_decision_list, classify_decision_tree,
                               classify_ensemble, style_classify,
                               style_group_posterior)
from reconfig.control import (ComponentOutput, ControlPolicy, ControlState,
                              cycle_next, decision_list_next)
from reconfig.learning import (TrainingBatch, TrainSpec, gradient_check,
                               train_configuration)
from reconfig.pathway import (forward_multiplexed, forward_standalone,
                              make_one_hot, pathway_to_dict, random_network,
                              random_pathway)

CONFIG = os.path.join(os.path.dirname(__file__), "..", "configs",
                      "priming_demo.json")


def report(n, name, ok, elapsed, budget):
    status = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE {n} ({name}): {status} [{elapsed:.2f}s / {budget:.0f}s]")
    assert ok, f"criterion {n} ({name}) failed"
    assert elapsed < budget, f"criterion {n} exceeded {budget}s ({elapsed:.2f}s)"


def test_criterion_1_one_hot_equivalence():
    start = time.monotonic()
    rng = np.random.default_rng(1001)
    ok = True
    for _ in range(50):
        R = int(rng.integers(1, 9))
        n_layers = int(rng.integers(1, 5))
        dims = [int(d) for d in rng.integers(1, 33, n_layers + 1)]
        path = random_pathway(rng, R, dims, "logistic-sigmoid")
        for _ in range(20):
            x = rng.standard_normal(dims[0])
            r = int(rng.integers(R))
            got = forward_multiplexed(path, make_one_hot(r, R), x)
            want = forward_standalone(path.banks[r], x)
            if not np.allclose(got, want, rtol=1e-12, atol=0):
                ok = False
    report(1, "one-hot equivalence", ok, time.monotonic() - start, 5.0)


def test_criterion_2_control_formula_fidelity():
    start = time.monotonic()
    ok = True
    for R in range(1, 11):
        for j in range(R):
            state = ControlState.at(j, R)
            for y0 in (0.0, 1.0):
                out = ComponentOutput(reject=y0, scores=np.zeros(2))
                gate = decision_list_next(state, out, R)
                # formula evaluated independently, term by term
                want = np.array([
                    (1.0 - y0) * (1.0 if k == (j + 1) % R else 0.0)
                    + y0 * (1.0 if k == 0 else 0.0)
                    for k in range(R)
                ])
                if not np.array_equal(gate.lam, want):
                    ok = False
                if y0 == 0.0 and gate != cycle_next(state, R):
                    ok = False
    report(2, "control formula fidelity", ok, time.monotonic() - start, 1.0)


def test_criterion_3_compound_oracle_equivalence():
    start = time.monotonic()
    rng = np.random.default_rng(1003)
    ok = True

    def raw_forward(net, x):
        a = x
        for m in net.layers:
            a = 1.0 / (1.0 + np.exp(-(m @ a)))
        return a

    # decision list
    path = random_pathway(rng, 5, [4, 6, 3], "logistic-sigmoid")
    policy = ControlPolicy(kind="trial", order=[0, 1, 2, 3, 4])
    clf = SequentialCompoundClassifier(path, policy, "first-accept")
    for _ in range(100):
        x = rng.standard_normal(4)
        res = classify_decision_list(clf, x)
        want_class, tried = None, 0
        for r in range(5):
            out = raw_forward(path.banks[r], x)
            tried += 1
            if out[0] < 0.5:
                want_class = int(np.argmax(out[1:]))
                break
        ok &= res.class_index == want_class and res.configurations_tried == tried

    # decision tree
    path_t = random_pathway(rng, 7, [3, 5, 3], "logistic-sigmoid")
    routing = TreeRouting(
        root=0, node_map={0: {0: 1, 1: 2}, 1: {0: 3, 1: 4}, 2: {0: 5, 1: 6}},
        leaves={3, 4, 5, 6}, n_classes=2)
    clf_t = SequentialCompoundClassifier(
        path_t, ControlPolicy(kind="cycle", order=list(range(7))),
        "tree-route", routing=routing)
    for _ in range(100):
        x = rng.standard_normal(3)
        res = classify_decision_tree(clf_t, routing, x)
        r, want_path = 0, [0]
        while r not in routing.leaves:
            c = int(np.argmax(raw_forward(path_t.banks[r], x)[1:]))
            r = routing.node_map[r][c]
            want_path.append(r)
        want_class = int(np.argmax(raw_forward(path_t.banks[r], x)[1:]))
        ok &= res.class_index == want_class and res.path == want_path

    # uniform ensemble
    path_e = random_pathway(rng, 4, [3, 4, 3], "logistic-sigmoid")
    clf_e = SequentialCompoundClassifier(
        path_e, ControlPolicy(kind="cycle", order=[0, 1, 2, 3]),
        "temporal-average")
    for _ in range(100):
        x = rng.standard_normal(3)
        got = classify_ensemble(clf_e, x, uniform=True)
        want = np.mean([raw_forward(path_e.banks[r], x)[1:] for r in range(4)],
                       axis=0)
        ok &= np.allclose(got, want, rtol=1e-12, atol=1e-15)

    report(3, "compound oracle equivalence", ok, time.monotonic() - start, 10.0)


def test_criterion_4_style_model_exactness():
    start = time.monotonic()
    rng = np.random.default_rng(1004)
    ok = True
    for _ in range(20):
        comps = [
            DiagonalGaussianComponent(
                means=rng.standard_normal((2, 2)),
                variances=rng.uniform(0.5, 2.0, (2, 2)))
            for _ in range(3)
        ]
        model = StyleModel(comps, np.full(3, 1.0 / 3.0))
        n = int(rng.integers(2, 7))
        samples = [rng.standard_normal(2) for _ in range(n)]
        # full window, uniform prior
        est = SlidingWindowEstimator(window=n, R=3)
        for x in samples:
            w = est.push([c.log_density(x) for c in comps])
        weights = np.exp(w - logsumexp(w))
        want = style_group_posterior(model, SampleGroup(samples))
        ok &= np.allclose(weights, want, rtol=1e-9)
        # class posteriors normalize
        est2 = SlidingWindowEstimator(window=n, R=3)
        for x in samples:
            post = style_classify(model, est2, x)
            ok &= abs(post.sum() - 1.0) < 1e-9
    report(4, "style-model exactness", ok, time.monotonic() - start, 5.0)


def test_criterion_5_gradient_correctness():
    start = time.monotonic()
    rng = np.random.default_rng(1005)
    worst = 0.0
    for _ in range(20):
        n_layers = int(rng.integers(1, 5))
        dims = [int(d) for d in rng.integers(2, 7, n_layers + 1)]
        net = random_network(rng, dims, "logistic-sigmoid", scale=0.8)
        batch = TrainingBatch(rng.standard_normal((4, dims[0])),
                              rng.uniform(0.1, 0.9, (4, dims[-1])))
        worst = max(worst, gradient_check(net, batch, "squared-error", h=1e-5))
    report(5, "gradient correctness", worst < 1e-5, time.monotonic() - start, 30.0)


def test_criterion_6_learning_isolation():
    start = time.monotonic()
    rng = np.random.default_rng(1006)
    ok = True
    for _ in range(10):
        R = int(rng.integers(2, 6))
        dims = [int(d) for d in rng.integers(2, 8, 3)]
        path = random_pathway(rng, R, dims, "logistic-sigmoid")
        r = int(rng.integers(R))
        batch = TrainingBatch(rng.standard_normal((6, dims[0])),
                              rng.uniform(0.1, 0.9, (6, dims[-1])))
        before = [json.dumps(b) for b in pathway_to_dict(path)["banks"]]
        train_configuration(path, r, batch,
                            TrainSpec(learning_rate=0.2, epochs=15))
        after = [json.dumps(b) for b in pathway_to_dict(path)["banks"]]
        for rr in range(R):
            if rr == r:
                ok &= after[rr] != before[rr]
            else:
                ok &= after[rr] == before[rr]
    report(6, "learning isolation", ok, time.monotonic() - start, 30.0)


def test_criterion_7_priming_prediction():
    start = time.monotonic()
    from reconfig.experiments import (deadline_sweep, make_priming_fixture,
                                      run_task)
    pathway, policy, task, priming = make_priming_fixture(seed=21)
    unprimed = run_task(pathway, policy, task)
    primed = run_task(pathway, policy, task, priming=priming)
    ok = all(p.configurations_tried <= u.configurations_tried
             for p, u in zip(primed, unprimed))
    ok &= (np.mean([r.configurations_tried for r in primed])
           < np.mean([r.configurations_tried for r in unprimed]))
    accs = [row["accuracy"]
            for row in deadline_sweep(pathway, policy, task, [1, 2, 3])]
    ok &= all(a <= b for a, b in zip(accs, accs[1:]))
    report(7, "priming prediction", ok, time.monotonic() - start, 10.0)


def test_criterion_8_activation_prediction():
    start = time.monotonic()
    from reconfig.experiments import (make_priming_fixture,
                                      measure_activation_fraction, run_task)
    pathway, policy, task, _ = make_priming_fixture(seed=21)
    records = run_task(pathway, policy, task)
    curve = measure_activation_fraction(records).curve()
    fractions = [f for _, f in curve]
    ok = len(curve) >= 2 and all(a <= b for a, b in
                                 zip(fractions, fractions[1:]))
    # exact set-theoretic check within each trial
    for rec in records:
        union = np.zeros_like(rec.masks[0], dtype=bool)
        prev = -1
        for m in rec.masks:
            union |= m
            ok &= union.sum() >= prev
            prev = union.sum()
    report(8, "activation prediction", ok, time.monotonic() - start, 5.0)


def test_criterion_9_cli_determinism(tmp_path):
    start = time.monotonic()
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    ok = True
    for out in (out_a, out_b):
        ok &= cli_main(["run", "--config", CONFIG, "--out-dir", str(out)]) == 0
    names = sorted(os.listdir(out_a))
    ok &= names == sorted(os.listdir(out_b))
    for name in names:
        ok &= (out_a / name).read_bytes() == (out_b / name).read_bytes()
    report(9, "CLI determinism", ok, time.monotonic() - start, 10.0)
