"""Command-line front end: one subcommand per pipeline stage.

Exit codes: 0 success, 1 usage error, 2 data/config error, 3 numeric or
convergence error. Seeds default to 42; the SYN_SEED environment variable
overrides that default whenever --seed is not given explicitly.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from typing import Optional

import numpy as np

from . import classifiers, framing, metrics, model_io, pipeline, regressors, traffic
from .classifiers import TrainConfig
from .errors import ConfigError, NumericError
from .pipeline import ExperimentConfig
from .regressors import GridSpec
from .scaling import Scaler

DEFAULT_SEED = 42


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _resolve_seed(value: Optional[int]) -> int:
    if value is not None:
        return value
    env = os.environ.get("SYN_SEED")
    if env is None:
        return DEFAULT_SEED
    try:
        return int(env)
    except ValueError:
        raise ConfigError(f"SYN_SEED must be an integer, got {env!r}") from None


def _echo_config(subcommand: str, pairs: dict) -> None:
    text = " ".join(f"{k}={v}" for k, v in pairs.items())
    print(f"config: subcommand={subcommand} {text}")


def _build_parser() -> _Parser:
    parser = _Parser(prog="synwatch", description=__doc__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("generate", help="synthesize a labeled interval series")
    p.add_argument("--intervals", type=int, required=True)
    p.add_argument("--rate", type=float, required=True)
    p.add_argument("--attack-fraction", type=float, default=0.2)
    p.add_argument("--multiplier", type=float, default=10.0)
    p.add_argument("--burst", type=int, default=6)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)

    p = sub.add_parser("ingest", help="bucket a packet log into an interval series")
    p.add_argument("--log", required=True)
    p.add_argument("--interval", type=int, default=10)
    p.add_argument("--dst", default=None)
    p.add_argument("--out", required=True)

    p = sub.add_parser("inject", help="inject attack bursts into a clean series")
    p.add_argument("--series", required=True)
    p.add_argument("--attack-fraction", type=float, default=0.2)
    p.add_argument("--multiplier", type=float, default=10.0)
    p.add_argument("--burst", type=int, default=6)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)

    p = sub.add_parser("frame", help="cut a series into 12-interval frames")
    p.add_argument("--series", required=True)
    p.add_argument("--sigma", action="store_true")
    p.add_argument("--out", required=True)

    p = sub.add_parser("elbow", help="wcss elbow curve over k = 1..kmax")
    p.add_argument("--series", required=True)
    p.add_argument("--kmax", type=int, required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)

    p = sub.add_parser("train", help="fit a model and save it")
    p.add_argument("--model", required=True, choices=pipeline.MODEL_KINDS)
    p.add_argument("--series", required=True)
    p.add_argument("--grid", action="store_true")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)

    p = sub.add_parser("evaluate", help="run an experiment or score a saved model")
    p.add_argument("--model", required=True, choices=pipeline.MODEL_KINDS)
    p.add_argument("--series", required=True)
    p.add_argument("--model-file", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--report", required=True)

    p = sub.add_parser("predict", help="forecast attack status for the series tail")
    p.add_argument("--model", required=True, choices=pipeline.PREDICTION_KINDS)
    p.add_argument("--series", required=True)
    p.add_argument("--grid", action="store_true")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--report", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("report", help="pretty-print one or more report files")
    p.add_argument("reports", nargs="+")

    return parser


# --------------------------------------------------------------------------
# subcommand bodies


def _cmd_generate(args) -> int:
    seed = _resolve_seed(args.seed)
    cfg = traffic.SynthesisConfig(n_intervals=args.intervals, baseline_rate=args.rate,
                                  attack_fraction=args.attack_fraction,
                                  attack_multiplier=args.multiplier,
                                  burst_length=args.burst, seed=seed)
    _echo_config("generate", {"intervals": args.intervals, "rate": args.rate,
                              "attack_fraction": args.attack_fraction,
                              "multiplier": args.multiplier, "burst": args.burst,
                              "seed": seed, "out": args.out})
    series = traffic.inject_attacks(traffic.generate_baseline(cfg), cfg)
    traffic.write_series(series, args.out)
    return 0


def _cmd_ingest(args) -> int:
    _echo_config("ingest", {"log": args.log, "interval": args.interval,
                            "dst": args.dst or "-", "out": args.out})
    with open(args.log, "r", encoding="utf-8") as fh:
        records = traffic.parse_packet_log(fh)
    series = traffic.bucketize(records, args.interval, dst_filter=args.dst)
    traffic.write_series(series, args.out)
    return 0


def _cmd_inject(args) -> int:
    seed = _resolve_seed(args.seed)
    series = traffic.read_series(args.series)
    if len(series) == 0 or series.counts.mean() <= 0:
        raise ConfigError("cannot infer a baseline rate from an empty or all-zero series")
    cfg = traffic.SynthesisConfig(n_intervals=len(series),
                                  baseline_rate=float(series.counts.mean()),
                                  attack_fraction=args.attack_fraction,
                                  attack_multiplier=args.multiplier,
                                  burst_length=args.burst, seed=seed)
    _echo_config("inject", {"series": args.series, "attack_fraction": args.attack_fraction,
                            "multiplier": args.multiplier, "burst": args.burst,
                            "seed": seed, "baseline_rate": round(cfg.baseline_rate, 6),
                            "out": args.out})
    traffic.write_series(traffic.inject_attacks(series, cfg), args.out)
    return 0


def _cmd_frame(args) -> int:
    _echo_config("frame", {"series": args.series, "sigma": args.sigma, "out": args.out})
    series = traffic.read_series(args.series)
    frames = framing.make_frames(series, framing.FramingConfig(with_sigma=args.sigma))
    framing.write_frames(frames, args.out)
    return 0


def _cmd_elbow(args) -> int:
    seed = _resolve_seed(args.seed)
    _echo_config("elbow", {"series": args.series, "kmax": args.kmax,
                           "seed": seed, "out": args.out})
    series = traffic.read_series(args.series)
    X = series.counts.astype(np.float64).reshape(-1, 1)
    curve, chosen = classifiers.elbow_curve(X, args.kmax, TrainConfig(seed=seed))
    with open(args.out, "w", encoding="utf-8") as fh:
        for k, wcss in curve:
            fh.write(f"{k},{format(wcss, '.17g')}\n")
        fh.write(f"chosen={chosen}\n")
    print(f"chosen k = {chosen}")
    return 0


def _prediction_features(series) -> np.ndarray:
    return np.column_stack([series.times_s().astype(np.float64),
                            series.counts.astype(np.float64)])


def _cmd_train(args) -> int:
    seed = _resolve_seed(args.seed)
    kind = args.model
    if args.grid and kind not in ("krr", "svr"):
        raise ConfigError(f"--grid only applies to krr and svr, not {kind!r}")
    _echo_config("train", {"model": kind, "series": args.series, "grid": args.grid,
                           "seed": seed, "out": args.out})
    series = traffic.read_series(args.series)
    scaler = None
    if kind in pipeline.SUPERVISED_KINDS or kind in pipeline.SEMI_KINDS:
        sub_kind = kind.split("+", 1)[1] if "+" in kind else kind
        labels = (pipeline.auto_label_series(series, pipeline.default_train_cfg("kmeans", seed))
                  if "+" in kind else series.labels)
        labeled = traffic.IntervalSeries(series.counts.copy(), labels,
                                         interval_seconds=series.interval_seconds,
                                         origin_s=series.origin_s)
        data = pipeline.build_detection_dataset(labeled, pipeline._VARIANT_OF[sub_kind])
        balanced = pipeline.smote_balance(data, 5, seed + 1)
        family = "lgr" if sub_kind == "lgr" else "mlp"
        model, _ = pipeline._fit_kind(sub_kind, balanced.X, balanced.y,
                                      pipeline.default_train_cfg(family, seed))
    elif kind == "kmeans":
        data = pipeline.build_detection_dataset(series, "per_interval")
        model = classifiers.map_clusters_to_labels(
            classifiers.kmeans_fit(data.X, 2, pipeline.default_train_cfg("kmeans", seed)))
    elif kind == "lgr_reg":
        X = _prediction_features(series)
        model = classifiers.lgr_fit(X, series.labels, pipeline.default_train_cfg("lgr", seed))
    else:  # krr / svr on the full series
        X_raw = _prediction_features(series)
        scaler = Scaler.fit(X_raw)
        X = scaler.transform(X_raw)
        y = series.labels.astype(np.float64)
        if args.grid:
            best, table = regressors.grid_search(X, y, kind, GridSpec(), seed=seed)
            print(regressors.format_cv_table(table))
        elif kind == "krr":
            best = {"lam": 1.0, "gamma": regressors.default_gamma(X)}
        else:
            best = {"C": 1.0, "epsilon": 0.1, "gamma": regressors.default_gamma(X)}
        if kind == "krr":
            model = regressors.krr_fit(X, y, best["lam"], best["gamma"])
        else:
            model = regressors.svr_fit(X, y, best["C"], best["epsilon"], best["gamma"])
            if not model.converged:
                raise NumericError(
                    f"SVR failed to converge (KKT violation {model.violation:.3e})")
    model_io.save_model(model, args.out, scaler=scaler)
    return 0


_FILE_KIND_OF = {
    "lgr": "lgr", "ann": "mlp", "ann_frames": "mlp", "ann_frames_sigma": "mlp",
    "kmeans": "kmeans", "kmeans+lgr": "lgr", "kmeans+ann": "mlp",
    "kmeans+ann_frames": "mlp", "kmeans+ann_frames_sigma": "mlp",
    "krr": "krr", "svr": "svr", "lgr_reg": "lgr",
}


def _evaluate_model_file(args, seed: int) -> int:
    """Score a saved model over every row a series provides."""
    series = traffic.read_series(args.series)
    model, bundled_scaler = model_io.load_model(args.model_file)
    kind = args.model
    expected = _FILE_KIND_OF[kind]
    actual = {"LgrModel": "lgr", "MlpModel": "mlp", "KMeansModel": "kmeans",
              "KrrModel": "krr", "SvrModel": "svr"}[type(model).__name__]
    if actual != expected:
        raise ConfigError(f"model file holds a {actual} model; {kind} needs {expected}")
    r2 = err = None
    if kind in pipeline.PREDICTION_KINDS:
        X = _prediction_features(series)
        y_true = series.labels
        t0 = time.perf_counter()
        if kind == "lgr_reg":
            raw, y_pred = classifiers.lgr_predict(model, X)
        else:
            if bundled_scaler is not None:
                X = bundled_scaler.transform(X)
            predict = regressors.krr_predict if kind == "krr" else regressors.svr_predict
            raw = predict(model, X)
            y_pred = (raw >= 0.5).astype(np.int64)
        infer_seconds = time.perf_counter() - t0
        r2 = metrics.r_squared(y_true.astype(np.float64), raw)
        err = metrics.rmse(y_true.astype(np.float64), raw)
    elif kind == "kmeans":
        data = pipeline.build_detection_dataset(series, "per_interval")
        y_true = data.y
        if model.label_map is None:
            model = classifiers.map_clusters_to_labels(model)
        t0 = time.perf_counter()
        mapping = np.array([model.label_map[0], model.label_map[1]])
        y_pred = mapping[classifiers.kmeans_assign(model, data.X)]
        infer_seconds = time.perf_counter() - t0
    else:
        sub_kind = kind.split("+", 1)[1] if "+" in kind else kind
        data = pipeline.build_detection_dataset(series, pipeline._VARIANT_OF[sub_kind])
        y_true = data.y
        predict = classifiers.lgr_predict if expected == "lgr" else classifiers.mlp_predict
        t0 = time.perf_counter()
        _, y_pred = predict(model, data.X)
        infer_seconds = time.perf_counter() - t0
    conf = metrics.confusion(y_true, y_pred)
    acc, fp, fn, f1 = metrics.classification_scores(conf)
    report = pipeline.EvalReport(kind, conf, acc, fp, fn, f1,
                                 train_seconds=0.0, infer_seconds=infer_seconds,
                                 r2=r2, rmse=err,
                                 config={"model_kind": kind, "seed": seed,
                                         "model_file": args.model_file, "grid": "no"})
    pipeline.write_report(report, args.report)
    return 0


def _cmd_evaluate(args) -> int:
    seed = _resolve_seed(args.seed)
    _echo_config("evaluate", {"model": args.model, "series": args.series,
                              "model_file": args.model_file or "-", "seed": seed,
                              "report": args.report})
    if args.model_file is not None:
        return _evaluate_model_file(args, seed)
    series = traffic.read_series(args.series)
    cfg = ExperimentConfig(model_kind=args.model, seed=seed)
    report = pipeline.run_experiment(series, cfg)
    pipeline.write_report(report, args.report)
    print(f"accuracy_pct={report.accuracy_pct:.3f} f1={report.f1:.6f}")
    return 0


def _cmd_predict(args) -> int:
    seed = _resolve_seed(args.seed)
    _echo_config("predict", {"model": args.model, "series": args.series,
                             "grid": args.grid, "seed": seed,
                             "report": args.report, "out": args.out})
    series = traffic.read_series(args.series)
    cfg = ExperimentConfig(model_kind=args.model, seed=seed,
                           grid=GridSpec() if args.grid else None)
    report, pred = pipeline.run_prediction(series, cfg)
    pipeline.write_report(report, args.report)
    pipeline.write_predictions(pred, args.out)
    print(f"accuracy_pct={report.accuracy_pct:.3f} r2={report.r2:.6f} "
          f"rmse={report.rmse:.6f}")
    return 0


def _cmd_report(args) -> int:
    columns = ["model_kind", "accuracy_pct", "fp_pct", "fn_pct", "f1", "r2", "rmse",
               "train_seconds", "infer_seconds"]
    rows = []
    for path in args.reports:
        data = pipeline.read_report(path)
        rows.append([data.get(col, "-") for col in columns])
    widths = [max(len(col), *(len(r[i]) for r in rows)) for i, col in enumerate(columns)]
    print("  ".join(col.ljust(w) for col, w in zip(columns, widths)))
    for row in rows:
        print("  ".join(val.ljust(w) for val, w in zip(row, widths)))
    return 0


_COMMANDS = {
    "generate": _cmd_generate,
    "ingest": _cmd_ingest,
    "inject": _cmd_inject,
    "frame": _cmd_frame,
    "elbow": _cmd_elbow,
    "train": _cmd_train,
    "evaluate": _cmd_evaluate,
    "predict": _cmd_predict,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    try:
        return _COMMANDS[args.subcommand](args)
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    sys.exit(main())
