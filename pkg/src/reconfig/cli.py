"""Command-line front end: validate / run / train, driven by one JSON config.

Exit codes: 0 success, 1 runtime failure, 2 invalid config. All randomness
derives from the master seed; outputs are byte-deterministic given the
config and seed.
"""

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import learning, nonlin
from .control import ControlPolicy
from .experiments import (PrimingSchedule, Stimulus, Task, deadline_sweep,
                          make_priming_fixture, make_priming_pathway,
                          measure_activation_fraction, run_task)
from .pathway import load_pathway, random_pathway, save_pathway

log = logging.getLogger("reconfig")

PATHWAY_KINDS = ("random", "file", "priming-fixture")
TASK_KINDS = ("synthetic-priming", "csv")
POLICY_KINDS = ("fixed", "hierarchical", "cycle", "trial", "lambda_recurrent")


class ConfigError(ValueError):
    """Invalid configuration; carries per-field diagnostics."""

    def __init__(self, diagnostics):
        super().__init__("; ".join(diagnostics))
        self.diagnostics = list(diagnostics)


def _pathway_R(cfg):
    pw = cfg.get("pathway", {})
    if pw.get("kind") == "priming-fixture":
        return pw.get("categories")
    if pw.get("kind") == "random":
        return pw.get("R")
    return None  # file-backed: unknown until loaded


def validate_config(cfg, base_dir="."):
    """Collect all diagnostics; raise ConfigError if any."""
    diags = []

    def bad(field, msg):
        diags.append(f"{field}: {msg}")

    seed = cfg.get("seed")
    if not isinstance(seed, int) or seed < 0:
        bad("seed", "must be a nonnegative integer")

    pw = cfg.get("pathway")
    if not isinstance(pw, dict):
        bad("pathway", "section missing")
        pw = {}
    kind = pw.get("kind")
    if kind not in PATHWAY_KINDS:
        bad("pathway.kind", f"must be one of {PATHWAY_KINDS}")
    elif kind == "random":
        if not isinstance(pw.get("R"), int) or pw["R"] < 1:
            bad("pathway.R", "must be a positive integer")
        dims = pw.get("dims")
        if (not isinstance(dims, list) or len(dims) < 2
                or any(not isinstance(d, int) or d < 1 for d in dims)):
            bad("pathway.dims", "must list at least two positive layer widths")
        sigma = pw.get("sigma")
        kinds = sigma if isinstance(sigma, list) else [sigma]
        for s in kinds:
            if s not in nonlin.CODES:
                bad("pathway.sigma", f"unknown nonlinearity {s!r}")
    elif kind == "file":
        path = pw.get("path")
        if not path or not os.path.exists(os.path.join(base_dir, path)):
            bad("pathway.path", f"weight file {path!r} not found")
    elif kind == "priming-fixture":
        if not isinstance(pw.get("categories"), int) or pw["categories"] < 1:
            bad("pathway.categories", "must be a positive integer")

    R = _pathway_R(cfg)

    pol = cfg.get("policy")
    if isinstance(pol, dict):
        if pol.get("kind") not in POLICY_KINDS:
            bad("policy.kind", f"must be one of {POLICY_KINDS}")
        order = pol.get("order")
        if pol.get("kind") in ("cycle", "trial"):
            if not isinstance(order, list) or sorted(order) != list(range(len(order))):
                bad("policy.order", "must be a permutation of 0..R-1")
            elif R is not None and len(order) != R:
                bad("policy.order", f"length {len(order)} != R = {R}")
        if pol.get("max_sweeps", 1) < 1:
            bad("policy.max_sweeps", "must be >= 1")
    elif "task" in cfg:
        bad("policy", "section missing")

    gate = cfg.get("gate")
    if gate is not None:
        if not isinstance(gate, list) or any(g < 0 for g in gate):
            bad("gate", "must be a list of nonnegative weights")
        elif R is not None and len(gate) != R:
            bad("gate", f"length {len(gate)} != R = {R}")
        elif abs(sum(gate) - 1.0) > 1e-12:
            bad("gate", "weights must sum to 1")

    task = cfg.get("task")
    if task is not None:
        if task.get("kind") not in TASK_KINDS:
            bad("task.kind", f"must be one of {TASK_KINDS}")
        elif task["kind"] == "csv":
            path = task.get("path")
            if not path or not os.path.exists(os.path.join(base_dir, path)):
                bad("task.path", f"task file {path!r} not found")
        elif task["kind"] == "synthetic-priming":
            if not isinstance(task.get("categories"), int) or task["categories"] < 1:
                bad("task.categories", "must be a positive integer")
            if R is not None and task.get("categories") != R:
                bad("task.categories", f"categories {task.get('categories')} != R = {R}")

    priming = cfg.get("priming")
    if priming is not None:
        if not isinstance(priming, dict):
            bad("priming", "must map category tags to orderings")
        else:
            for tag, order in priming.items():
                if (not isinstance(order, list)
                        or sorted(order) != list(range(len(order)))
                        or (R is not None and len(order) != R)):
                    bad(f"priming.{tag}", "must be a permutation of 0..R-1")

    for i, d in enumerate(cfg.get("deadlines", [])):
        if not isinstance(d, int) or d < 1:
            bad(f"deadlines[{i}]", "must be a positive integer")

    tr = cfg.get("training")
    if tr is not None:
        if not isinstance(tr.get("configurations"), list) or not tr["configurations"]:
            bad("training.configurations", "must list configuration indices")
        elif R is not None and any(
                not isinstance(r, int) or not 0 <= r < R
                for r in tr["configurations"]):
            bad("training.configurations", f"indices must lie in [0, {R})")
        if tr.get("learning_rate", 0.0) < 0:
            bad("training.learning_rate", "must be nonnegative")
        if not isinstance(tr.get("epochs"), int) or tr["epochs"] < 0:
            bad("training.epochs", "must be a nonnegative integer")
        if tr.get("loss", learning.SQUARED_ERROR) not in learning.LOSSES:
            bad("training.loss", f"must be one of {learning.LOSSES}")
        data = tr.get("data", {})
        if data.get("kind") not in ("xor", "csv"):
            bad("training.data.kind", "must be 'xor' or 'csv'")
        elif data["kind"] == "csv":
            path = data.get("path")
            if not path or not os.path.exists(os.path.join(base_dir, path)):
                bad("training.data.path", f"data file {path!r} not found")

    if diags:
        raise ConfigError(diags)


# --- builders ---------------------------------------------------------------

def build_pathway(cfg, seed, base_dir="."):
    pw = cfg["pathway"]
    if pw["kind"] == "file":
        return load_pathway(os.path.join(base_dir, pw["path"]))
    if pw["kind"] == "priming-fixture":
        return make_priming_pathway(pw["categories"])
    rng = np.random.default_rng([seed, 0])
    sigma = pw["sigma"]
    if isinstance(sigma, str):
        sigma = [sigma] * (len(pw["dims"]) - 1)
    return random_pathway(rng, pw["R"], pw["dims"], sigma,
                          scale=pw.get("scale", 1.0))


def build_policy(cfg):
    pol = cfg["policy"]
    return ControlPolicy(
        kind=pol["kind"],
        r=pol.get("r"),
        order=pol.get("order"),
        max_sweeps=pol.get("max_sweeps", 1),
    )


def build_task(cfg, seed):
    task = cfg["task"]
    if task["kind"] == "synthetic-priming":
        _, _, built, _ = make_priming_fixture(
            seed=[seed, 1],
            categories=task["categories"],
            stimuli_per_category=task.get("stimuli_per_category", 10),
            noise=task.get("noise", 0.05),
        )
        return built
    import csv as _csv
    stimuli = []
    with open(task["path"], newline="") as f:
        reader = _csv.DictReader(f)
        feats = [c for c in reader.fieldnames if c.startswith("feature_")]
        for row in reader:
            stimuli.append(Stimulus(
                np.array([float(row[c]) for c in feats]),
                true_class=int(row["label"]),
                category=row.get("category", row["label"]),
            ))
    return Task(stimuli)


def build_priming(cfg):
    table = cfg.get("priming")
    if table is None:
        return None
    # category tags arrive as JSON strings; the fixture uses int tags
    return PrimingSchedule({_maybe_int(k): v for k, v in table.items()})


def _maybe_int(tag):
    try:
        return int(tag)
    except (TypeError, ValueError):
        return tag


# --- output writers ---------------------------------------------------------

RESULT_COLUMNS = ("stimulus_index", "true_class", "response",
                  "configurations_tried", "pseudo_latency_ms",
                  "union_activation_fraction")


def write_results_csv(filename, records, seed, latency_ms):
    with open(filename, "w") as f:
        f.write(f"# seed={seed}\n")
        f.write(",".join(RESULT_COLUMNS) + "\n")
        for rec in records:
            resp = "no-answer" if rec.response is None else rec.response
            f.write(
                f"{rec.stimulus_index},{rec.true_class},{resp},"
                f"{rec.configurations_tried},"
                f"{rec.configurations_tried * latency_ms!r},"
                f"{float(rec.union_fraction())!r}\n"
            )


def _condition_summary(records, latency_ms):
    counts = [r.configurations_tried for r in records]
    correct = sum(1 for r in records if r.response == r.true_class)
    report = measure_activation_fraction(records)
    return {
        "accuracy": correct / len(records),
        "mean_configurations_tried": float(np.mean(counts)),
        "mean_pseudo_latency_ms": float(np.mean(counts)) * latency_ms,
        "union_activation_fraction": report.overall,
        "activation_fraction_by_count": {
            str(c): v for c, v in report.per_count.items()
        },
    }


# --- subcommands ------------------------------------------------------------

def cmd_validate(cfg, base_dir, out_dir, seed):
    validate_config(cfg, base_dir)
    print("config valid")
    return 0


def cmd_run(cfg, base_dir, out_dir, seed):
    validate_config(cfg, base_dir)
    if "task" not in cfg:
        raise ConfigError(["task: section required by run"])
    pathway = build_pathway(cfg, seed, base_dir)
    policy = build_policy(cfg)
    task = build_task(cfg, seed)
    priming = build_priming(cfg)
    latency_ms = cfg.get("latency_ms_per_configuration", 1.0)
    threshold = cfg.get("activation_threshold", 0.5)
    outputs = cfg.get("outputs", {})
    results_name = outputs.get("results_csv", "results.csv")
    summary_name = outputs.get("summary_json", "summary.json")

    conditions = {"unprimed": None}
    if priming is not None:
        conditions["primed"] = priming

    written = []
    try:
        summary = {"seed": seed, "conditions": {}, "deadline_sweep": {}}
        stem, ext = os.path.splitext(results_name)
        for name, sched in conditions.items():
            records = run_task(pathway, policy, task, priming=sched,
                               seed=seed, activation_threshold=threshold)
            summary["conditions"][name] = _condition_summary(records, latency_ms)
            fname = results_name if len(conditions) == 1 else f"{stem}_{name}{ext}"
            fpath = os.path.join(out_dir, fname)
            write_results_csv(fpath, records, seed, latency_ms)
            written.append(fpath)
            log.info("wrote %s", fpath)
            if cfg.get("deadlines"):
                summary["deadline_sweep"][name] = deadline_sweep(
                    pathway, policy, task, cfg["deadlines"], priming=sched,
                    activation_threshold=threshold)
        spath = os.path.join(out_dir, summary_name)
        with open(spath, "w") as f:
            json.dump(summary, f, indent=2, sort_keys=True)
            f.write("\n")
        written.append(spath)
        log.info("wrote %s", spath)
    except Exception:
        for path in written:
            if os.path.exists(path):
                os.remove(path)
        raise
    return 0


def cmd_train(cfg, base_dir, out_dir, seed):
    validate_config(cfg, base_dir)
    tr = cfg.get("training")
    if tr is None:
        raise ConfigError(["training: section required by train"])
    pathway = build_pathway(cfg, seed, base_dir)
    batch = _training_batch(tr, pathway, base_dir)
    spec = learning.TrainSpec(
        learning_rate=tr.get("learning_rate", 0.1),
        epochs=tr["epochs"],
        loss=tr.get("loss", learning.SQUARED_ERROR),
        halve_on_increase=tr.get("halve_on_increase", False),
    )
    weights_out = os.path.join(out_dir, tr.get("weights_out", "trained.json"))
    written = []
    try:
        for r in tr["configurations"]:
            losses = learning.train_configuration(pathway, r, batch, spec)
            curve_path = os.path.join(out_dir, f"loss_config{r}.csv")
            learning.write_loss_curve(curve_path, losses)
            written.append(curve_path)
            print(f"configuration {r}: final loss {float(losses[-1])!r}")
        save_pathway(pathway, weights_out)
        written.append(weights_out)
        log.info("wrote %s", weights_out)
    except Exception:
        for path in written:
            if os.path.exists(path):
                os.remove(path)
        raise
    return 0


def _training_batch(tr, pathway, base_dir):
    data = tr["data"]
    if data["kind"] == "xor":
        X = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
        labels = [0, 1, 1, 0]
    else:
        import csv as _csv
        X, labels = [], []
        with open(os.path.join(base_dir, data["path"]), newline="") as f:
            reader = _csv.DictReader(f)
            feats = [c for c in reader.fieldnames if c.startswith("feature_")]
            for row in reader:
                X.append([float(row[c]) for c in feats])
                labels.append(int(row["label"]))
        X = np.array(X)
    T = np.zeros((len(labels), pathway.output_dim))
    for i, c in enumerate(labels):
        T[i, c] = 1.0
    return learning.TrainingBatch(X, T)


COMMANDS = {"validate": cmd_validate, "run": cmd_run, "train": cmd_train}


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="reconfig",
        description="Reconfigurable-pathway experiments and training",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to JSON config")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config's master seed")
        p.add_argument("--out-dir", default=".", help="directory for outputs")
    args = parser.parse_args(argv)

    level = {"error": logging.ERROR, "info": logging.INFO,
             "debug": logging.DEBUG}.get(
        os.environ.get("RECONFIG_LOG", "error").lower(), logging.ERROR)
    logging.basicConfig(level=level, format="%(levelname)s %(message)s")

    try:
        with open(args.config) as f:
            cfg = json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return 2
    if args.seed is not None:
        cfg["seed"] = args.seed
    base_dir = os.path.dirname(os.path.abspath(args.config))
    os.makedirs(args.out_dir, exist_ok=True)

    try:
        return COMMANDS[args.command](cfg, base_dir, args.out_dir, cfg.get("seed", 0))
    except ConfigError as exc:
        for d in exc.diagnostics:
            print(f"invalid config: {d}", file=sys.stderr)
        return 2
    except Exception as exc:
        log.debug("runtime failure", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
