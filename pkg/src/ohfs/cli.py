"""Command-line surface: run, sweep, generate, regret, oracle-check.

Reports are emitted as JSON; curve data (sweep points, regret trajectories)
additionally as CSV for plotting.  Exit codes: 0 success, 2 validation
error, 3 numerical failure.
"""

import argparse
import csv
import json
import sys

import numpy as np
import scipy.linalg

from . import checks
from .backend import active_backend
from .evaluate import evaluate, sweep
from .learner import LearnerParams, OnlineLearner, run_stream
from .metric import EuclideanMetric, FaceMetric
from .oracles import WalkCutoffError, regret_decompose
from .solver import ABSTAIN
from .streams import DriftStreamSpec, generate_drift_stream, load_stream, save_stream

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


def _add_learner_args(parser):
    parser.add_argument("--sigma", type=float, default=0.025,
                        help="heat parameter of the similarity kernel")
    parser.add_argument("--epsilon", type=float, default=1e-5,
                        help="edge sparsification threshold (probes worth trying: 1e-5, 1e-8)")
    parser.add_argument("--gamma", type=float, default=None,
                        help="sink regularization; defaults to 10 * epsilon")
    parser.add_argument("--budget", type=int, default=500,
                        help="maximum number of representative vertices")
    parser.add_argument("--metric", choices=("euclidean", "face"), default="euclidean")
    parser.add_argument("--face-side", type=int, default=0,
                        help="image side for radial center weights (face metric only; 0 = uniform)")


def _learner_from_args(args):
    params = LearnerParams(sigma=args.sigma, epsilon=args.epsilon,
                           gamma=args.gamma, budget=args.budget)
    if args.metric == "face":
        weights = None
        if args.face_side:
            from .metric import radial_center_weights
            weights = radial_center_weights(args.face_side)
        metric = FaceMetric(weights)
    else:
        metric = EuclideanMetric()
    return params, metric


def _add_spec_args(parser):
    parser.add_argument("--n", type=int, default=200)
    parser.add_argument("--classes", type=int, default=2)
    parser.add_argument("--drift", choices=("none", "rotate", "shift", "relocate"),
                        default="relocate")
    parser.add_argument("--noise", type=float, default=0.15)
    parser.add_argument("--outlier-fraction", type=float, default=0.0)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--dim", type=int, default=2)
    parser.add_argument("--labeled-per-class", type=int, default=2)
    parser.add_argument("--segments", type=int, default=2)
    parser.add_argument("--separation", type=float, default=2.0)
    parser.add_argument("--drift-magnitude", type=float, default=2.0)
    parser.add_argument("--outlier-distance", type=float, default=50.0)


def _spec_from_args(args):
    return DriftStreamSpec(
        n=args.n, n_classes=args.classes, drift=args.drift, noise=args.noise,
        outlier_fraction=args.outlier_fraction, seed=args.seed, dim=args.dim,
        labeled_per_class=args.labeled_per_class, segments=args.segments,
        separation=args.separation, drift_magnitude=args.drift_magnitude,
        outlier_distance=args.outlier_distance)


def _write_json(path, payload):
    if path == "-":
        json.dump(payload, sys.stdout, indent=2)
        sys.stdout.write("\n")
    else:
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2)


def _cmd_generate(args):
    spec = _spec_from_args(args)
    records, seeds = generate_drift_stream(spec)
    save_stream(args.out, records, n_classes=spec.n_classes)
    print(f"wrote {len(records)} records ({len(seeds)} supervised) to {args.out}")
    return EXIT_OK


def _cmd_run(args):
    records = load_stream(args.stream)
    params, metric = _learner_from_args(args)
    learner = OnlineLearner(params, metric=metric)
    predictions = run_stream(learner, records)
    report = evaluate(records, predictions)

    if args.predictions:
        with open(args.predictions, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["step", "frame_id", "prediction", "confidence",
                             "score", "outlier", "solve_seconds", "graph_size"])
            for rec, pred in zip(records, predictions):
                label = "ABSTAIN" if pred.prediction is ABSTAIN else pred.prediction
                writer.writerow([pred.step, rec.frame_id, label,
                                 f"{pred.confidence:.12g}", f"{pred.score:.12g}",
                                 int(pred.outlier), f"{pred.solve_seconds:.6g}",
                                 pred.graph_size])
    _write_json(args.report, report.to_dict())
    print(f"precision={report.precision:.4f} recall={report.recall:.4f} "
          f"f1={report.f1:.4f} abstention={report.abstention_rate:.4f} "
          f"backend={active_backend()}")
    return EXIT_OK


def _cmd_sweep(args):
    if args.stream:
        source = load_stream(args.stream)
    else:
        source = _spec_from_args(args)
    params, metric = _learner_from_args(args)
    values = [float(v) if args.axis == "epsilon" else int(v) for v in args.values]
    reports = sweep(args.axis, values, source, params, metric=metric)

    _write_json(args.report, [r.to_dict() for r in reports])
    if args.curve:
        with open(args.curve, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow([args.axis, "precision", "recall", "f1",
                             "abstention_rate", "latency_mean", "latency_p95", "fps"])
            for r in reports:
                writer.writerow([r.axis_value, r.precision, r.recall, r.f1,
                                 r.abstention_rate, r.latency_mean, r.latency_p95, r.fps])
    for r in reports:
        print(f"{args.axis}={r.axis_value:g} precision={r.precision:.4f} "
              f"recall={r.recall:.4f} f1={r.f1:.4f}")
    return EXIT_OK


def _cmd_regret(args):
    records = load_stream(args.stream)
    params, metric = _learner_from_args(args)
    report = regret_decompose(records, params, metric=metric, max_stream=args.cap)
    _write_json(args.report, report.to_dict())
    if args.trajectory:
        with open(args.trajectory, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["step", "sq_hfs", "sq_online", "sq_quant", "sq_total"])
            rows = zip(report.sq_hfs, report.sq_online, report.sq_quant, report.sq_total)
            for t, row in enumerate(rows, start=1):
                writer.writerow([t, *row])
    lhs = report.total_lhs
    rhs = report.term_hfs + report.term_online + report.term_quant
    print(f"total_lhs={lhs:.6f} <= {rhs:.6f} "
          f"(hfs={report.term_hfs:.6f} online={report.term_online:.6f} "
          f"quant={report.term_quant:.6f}) bound_holds={report.bound_holds}")
    if not report.bound_holds:
        return EXIT_NUMERICAL
    return EXIT_OK


def _cmd_oracle_check(args):
    results = checks.run_all(seed=args.seed, n_walks=args.walks, backend=args.backend)
    for result in results:
        print(result.line())
    if all(r.passed for r in results):
        print("all oracle checks passed")
        return EXIT_OK
    return EXIT_NUMERICAL


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ohfs",
        description="streaming semi-supervised classification on a quantized "
                    "data-adjacency graph")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic drift stream")
    _add_spec_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("run", help="run the online learner over a stream file")
    p.add_argument("--stream", required=True)
    _add_learner_args(p)
    p.add_argument("--predictions", default=None, help="per-step CSV output")
    p.add_argument("--report", default="-", help="JSON report path ('-' = stdout)")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("sweep", help="evaluate along an epsilon or n_g grid")
    p.add_argument("--axis", choices=("epsilon", "n_g"), required=True)
    p.add_argument("--values", nargs="+", required=True)
    p.add_argument("--stream", default=None, help="stream file (default: synthetic)")
    _add_learner_args(p)
    _add_spec_args(p)
    p.add_argument("--report", default="-")
    p.add_argument("--curve", default=None, help="CSV curve output")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("regret", help="decompose the streaming squared error")
    p.add_argument("--stream", required=True)
    _add_learner_args(p)
    p.add_argument("--cap", type=int, default=500)
    p.add_argument("--report", default="-")
    p.add_argument("--trajectory", default=None, help="per-step CSV output")
    p.set_defaults(func=_cmd_regret)

    p = sub.add_parser("oracle-check",
                       help="randomized exactness and random-walk suites")
    p.add_argument("--seed", type=int, default=1337)
    p.add_argument("--walks", type=int, default=1_000_000)
    p.add_argument("--backend", choices=("auto", "compiled", "python"), default="auto")
    p.set_defaults(func=_cmd_oracle_check)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError, WalkCutoffError) as exc:
        # LinAlgError subclasses ValueError, so this clause must come first
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
