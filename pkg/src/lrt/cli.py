"""Command-line interface: ``lrt synth | learn | cluster | classify | angles``.

Exit status is 0 on success, 2 for usage, configuration or input-format
errors and 1 for numerical failures. All CSV outputs have one header row and
a fixed column order; floats are written with 17 significant digits.

CSV columns
  learn --trace-csv       iteration, objective, spectral_norm_T
  cluster --report-csv    iteration, misclassification, lrsc_objective,
                          nuclear_norm_<c> per cluster, angle_<a>_<b> per pair
  classify --out-report   index, true, predicted, residual
  angles --out-csv        stage, class_a, class_b, smallest_angle,
                          mean_cosine, nuclear_norm_a, nuclear_norm_b
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import os
import sys
from contextlib import nullcontext

import numpy as np

from .classify import evaluate_accuracy, predict, train_classifier
from .cluster import (
    ClustererSpec,
    lrsc,
    lrsc_objective,
    make_clusterer,
    misclassification_rate,
    pairwise_smallest_angles,
)
from .config import ConfigError, RunConfig, load_config, parse_config, read_config_doc
from .data import (
    generate_synthetic,
    load_dataset,
    load_labels,
    load_matrix,
    save_labels,
    save_matrix,
    write_text_atomic,
)
from .errors import LRTError, NumericalError
from .learn import identity_transform, learn, per_class_nuclear_norms
from .linalg import (
    fit_subspace_basis,
    mean_cosine_principal_angles,
    singular_values,
    smallest_principal_angle,
)
from .persist import load_transform, save_classifier, save_transform


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def _write_csv(path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    write_text_atomic(path, buf.getvalue())


def _thread_limit():
    raw = os.environ.get("LRT_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"LRT_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise ConfigError("LRT_THREADS must be >= 0")
    if n == 0:
        return nullcontext()
    from threadpoolctl import threadpool_limits
    return threadpool_limits(limits=n)


def _config(args) -> RunConfig:
    return load_config(getattr(args, "config", None), getattr(args, "seed", None))


def _apply_learn_flags(cfg: RunConfig, args):
    for flag, attr in (("iterations", "iterations"), ("step_size", "step_size"), ("gamma", "gamma"),
                       ("out_dim", "out_dim"), ("minibatches", "minibatches"), ("lam", "lam"),
                       ("online_mode", "online_mode"), ("dc_outer", "dc_outer_iterations")):
        value = getattr(args, flag, None)
        if value is not None:
            setattr(cfg.learn, attr, value)
    cfg.learn.validate()


# ----------------------------------------------------------------- synth

def cmd_synth(args) -> int:
    doc = read_config_doc(args.spec)
    cfg = parse_config({"synth": doc, "seed": args.seed})
    spec = cfg.synthetic_spec()
    data, bases = generate_synthetic(spec, cfg.derived_seed("synth"))
    save_matrix(args.out_matrix, data.Y)
    save_labels(args.out_labels, data.labels)
    if args.out_bases:
        save_matrix(args.out_bases, np.hstack([b.basis for b in bases]))
    print(f"wrote {data.num_points} points in R^{data.dim}, {data.num_classes} classes")
    return 0


# ----------------------------------------------------------------- learn

def cmd_learn(args) -> int:
    cfg = _config(args)
    _apply_learn_flags(cfg, args)
    data = load_dataset(args.data, args.labels)
    model = learn(data, cfg.learn, args.mode)
    if args.out_model:
        save_transform(args.out_model, model)
    if args.trace_csv:
        rows = [(i, obj, nrm) for i, (obj, nrm) in enumerate(zip(model.objective_trace, model.norm_trace, strict=False))]
        _write_csv(args.trace_csv, ["iteration", "objective", "spectral_norm_T"], rows)
    print(f"objective {model.objective_trace[0]:.6g} -> {model.objective_trace[-1]:.6g}")
    return 0


# --------------------------------------------------------------- cluster

def _report_rows(history, C):
    pairs = list(itertools.combinations(range(C), 2))
    header = (["iteration", "misclassification", "lrsc_objective"]
              + [f"nuclear_norm_{c}" for c in range(C)]
              + [f"angle_{a}_{b}" for a, b in pairs])
    rows = []
    for rec in history:
        angles = rec["pairwise_angles"]
        rows.append([rec["iteration"], rec.get("misclassification", float("nan")), rec["lrsc_objective"]]
                    + list(rec["per_cluster_nuclear_norms"])
                    + [angles.get(p, float("nan")) for p in pairs])
    return header, rows


def cmd_cluster(args) -> int:
    cfg = _config(args)
    _apply_learn_flags(cfg, args)
    spec = ClustererSpec(args.method or cfg.cluster.method,
                         args.K if args.K is not None else cfg.cluster.K,
                         args.beta if args.beta is not None else cfg.cluster.beta,
                         dict(cfg.cluster.params))
    Y = load_matrix(args.data)
    truth = load_labels(args.truth) if args.truth else None
    if truth is not None and truth.size != Y.shape[1]:
        raise ConfigError(f"{args.truth}: {truth.size} labels for {Y.shape[1]} points")
    if args.C < 1 or args.C > Y.shape[1]:
        raise ConfigError(f"-C must be in [1, {Y.shape[1]}], got {args.C}")
    if spec.K >= Y.shape[1]:
        raise ConfigError(f"K={spec.K} must be smaller than the number of points ({Y.shape[1]})")
    seed = cfg.derived_seed("cluster")

    if args.lrsc:
        if args.model:
            raise ConfigError("--model cannot be combined with --lrsc (LRSC learns its own transform)")
        result, _ = lrsc(Y, args.C, spec, cfg.learn, args.max_outer, truth, seed,
                         warm_restart=not args.cold_restart)
        history, labels = result.history, result.assignments
    else:
        T = load_transform(args.model).T if args.model else np.eye(Y.shape[0])
        if T.shape[1] != Y.shape[0]:
            raise ConfigError(f"model expects dimension {T.shape[1]}, data has {Y.shape[0]}")
        TY = T @ Y
        labels = make_clusterer(spec)(TY, args.C, seed)
        rec = {"iteration": 1, "lrsc_objective": lrsc_objective(T, labels, Y, cfg.learn.lam),
               "per_cluster_nuclear_norms": per_class_nuclear_norms(T, Y, labels, args.C),
               "pairwise_angles": pairwise_smallest_angles(TY, labels, args.C)}
        if truth is not None:
            rec["misclassification"] = misclassification_rate(labels, truth)
        history = [rec]

    if args.out_assignments:
        save_labels(args.out_assignments, labels)
    if args.report_csv:
        header, rows = _report_rows(history, args.C)
        _write_csv(args.report_csv, header, rows)
    if truth is not None:
        print(f"misclassification {history[-1]['misclassification']:.6g} after {len(history)} iteration(s)")
    return 0


# -------------------------------------------------------------- classify

def cmd_classify(args) -> int:
    cfg = _config(args)
    _apply_learn_flags(cfg, args)
    mode = args.mode or cfg.classify.mode
    sparsity = args.sparsity if args.sparsity is not None else cfg.classify.sparsity
    beta = args.beta if args.beta is not None else cfg.classify.beta
    kind = args.transform or cfg.classify.transform

    train = load_dataset(args.train_data, args.train_labels)
    test = load_dataset(args.test_data, args.test_labels)
    if args.model:
        transform = load_transform(args.model)
    elif kind == "none":
        transform = identity_transform(train.dim)
    else:
        transform = learn(train, cfg.learn, kind)
    model = train_classifier(train, transform, mode, sparsity, beta)
    if args.save_classifier:
        save_classifier(args.save_classifier, model)

    pred, score = predict(model, test.Y)
    acc = evaluate_accuracy(model, test)
    if args.out_report:
        rows = [(i, int(t), int(p), s) for i, (t, p, s) in enumerate(zip(test.labels, pred, score, strict=False))]
        _write_csv(args.out_report, ["index", "true", "predicted", "residual"], rows)
    print(f"accuracy {acc:.6f}")
    return 0


# ---------------------------------------------------------------- angles

def _energy_dim(A, energy: float) -> int:
    s2 = singular_values(A) ** 2
    if s2.size == 0 or s2[0] == 0:
        return 1
    k = int(np.searchsorted(np.cumsum(s2) / s2.sum(), energy) + 1)
    return max(1, min(k, A.shape[0] - 1 if A.shape[0] > 1 else 1, min(A.shape)))


def _angle_rows(stage, TY, labels, C, dim, energy):
    bases, nuc = {}, {}
    for c in range(C):
        A = TY[:, labels == c]
        k = dim if dim is not None else _energy_dim(A, energy)
        bases[c] = fit_subspace_basis(A, min(k, min(A.shape)))
        nuc[c] = float(np.sum(singular_values(A)))
    return [(stage, a, b, smallest_principal_angle(bases[a], bases[b]),
             mean_cosine_principal_angles(bases[a], bases[b]), nuc[a], nuc[b])
            for a, b in itertools.combinations(range(C), 2)]


def cmd_angles(args) -> int:
    data = load_dataset(args.data, args.labels)
    if data.num_classes < 2:
        raise ConfigError("angles needs at least two classes")
    rows = _angle_rows("before", data.Y, data.labels, data.num_classes, args.dim, args.energy)
    if args.model:
        model = load_transform(args.model)
        if model.kind != "global":
            raise ConfigError(f"{args.model}: angles needs a global transform")
        if model.in_dim != data.dim:
            raise ConfigError(f"{args.model}: model expects dimension {model.in_dim}, data has {data.dim}")
        rows += _angle_rows("after", model.T @ data.Y, data.labels, data.num_classes, args.dim, args.energy)
    header = ["stage", "class_a", "class_b", "smallest_angle", "mean_cosine", "nuclear_norm_a", "nuclear_norm_b"]
    if args.out_csv:
        _write_csv(args.out_csv, header, rows)
    else:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(header)
        w.writerows([[_fmt(v) for v in r] for r in rows])
    return 0


# ---------------------------------------------------------------- parser

def _add_learn_flags(p):
    g = p.add_argument_group("transform learning (override --config)")
    g.add_argument("--iterations", type=int)
    g.add_argument("--step-size", type=float)
    g.add_argument("--gamma", type=float)
    g.add_argument("--out-dim", type=int)
    g.add_argument("--minibatches", type=int)
    g.add_argument("--lam", type=float)
    g.add_argument("--online-mode", choices=["sequential", "summed"])
    g.add_argument("--dc-outer", type=int, help="D.C. outer iterations")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lrt", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a union-of-subspaces dataset")
    p.add_argument("spec", help="JSON file with SyntheticSpec fields")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out-matrix", required=True)
    p.add_argument("--out-labels", required=True)
    p.add_argument("--out-bases")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("learn", help="learn a low-rank transform")
    p.add_argument("--data", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--config")
    p.add_argument("--seed", type=int)
    p.add_argument("--mode", choices=["global", "per-class", "online"], default="global")
    p.add_argument("--out-model")
    p.add_argument("--trace-csv")
    _add_learn_flags(p)
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("cluster", help="R-SSC clustering, optionally inside LRSC")
    p.add_argument("--data", required=True)
    p.add_argument("--model")
    p.add_argument("--method")
    p.add_argument("-C", type=int, required=True, help="number of clusters")
    p.add_argument("-K", type=int, help="nearest neighbours per point")
    p.add_argument("--beta", type=float)
    p.add_argument("--lrsc", action="store_true")
    p.add_argument("--max-outer", type=int, default=20)
    p.add_argument("--cold-restart", action="store_true", help="relearn T from identity every LRSC step")
    p.add_argument("--truth")
    p.add_argument("--config")
    p.add_argument("--seed", type=int)
    p.add_argument("--out-assignments")
    p.add_argument("--report-csv")
    _add_learn_flags(p)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("classify", help="train and evaluate a classifier")
    p.add_argument("--train-data", required=True)
    p.add_argument("--train-labels", required=True)
    p.add_argument("--test-data", required=True)
    p.add_argument("--test-labels", required=True)
    p.add_argument("--config")
    p.add_argument("--seed", type=int)
    p.add_argument("--mode", choices=["nn", "omp"])
    p.add_argument("--transform", choices=["global", "per-class", "none"])
    p.add_argument("--model", help="pre-learned transform directory")
    p.add_argument("--sparsity", type=int)
    p.add_argument("--beta", type=float)
    p.add_argument("--save-classifier")
    p.add_argument("--out-report")
    _add_learn_flags(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("angles", help="principal-angle and nuclear-norm diagnostics")
    p.add_argument("--data", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--model")
    p.add_argument("--dim", type=int, help="subspace dimension per class (default: energy threshold)")
    p.add_argument("--energy", type=float, default=0.99)
    p.add_argument("--out-csv")
    p.set_defaults(func=cmd_angles)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with _thread_limit():
            return args.func(args)
    except NumericalError as exc:
        print(f"lrt {args.command}: numerical failure: {exc}", file=sys.stderr)
        return 1
    except (LRTError, ValueError, OSError) as exc:
        print(f"lrt {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
