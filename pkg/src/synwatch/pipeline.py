"""Experiment orchestration: the four run families and their reports.

Detection runs (supervised, unsupervised, semi-supervised) classify
intervals or frames; the prediction run forecasts the 0/1 attack status
over the chronological tail of the series. Every run is deterministic per
(series, config seeds) except its two wall-clock timing fields.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import classifiers, framing, metrics, regressors
from .classifiers import TrainConfig
from .errors import (BalancingError, ConfigError, ContractViolation,
                     DegenerateClusteringError, EmptyDatasetError, NumericError, ParseError)
from .metrics import Confusion
from .regressors import GridSpec
from .scaling import Scaler
from .traffic import IntervalSeries

SUPERVISED_KINDS = ("lgr", "ann", "ann_frames", "ann_frames_sigma")
SEMI_KINDS = ("kmeans+lgr", "kmeans+ann", "kmeans+ann_frames", "kmeans+ann_frames_sigma")
PREDICTION_KINDS = ("krr", "svr", "lgr_reg")
MODEL_KINDS = SUPERVISED_KINDS + ("kmeans",) + SEMI_KINDS + PREDICTION_KINDS

_VARIANT_OF = {
    "lgr": "per_interval",
    "ann": "per_interval",
    "ann_frames": "frames",
    "ann_frames_sigma": "frames_sigma",
}


# Logistic fits are cheap full-batch solves of a convex problem, so they run
# to (near) optimality; the network keeps the short mini-batch schedule.
_FAMILY_TRAIN_DEFAULTS = {
    "lgr": TrainConfig(learning_rate=0.1, max_epochs=5000),
    "mlp": TrainConfig(),
    "kmeans": TrainConfig(),
}


def default_train_cfg(family: str, seed: int) -> TrainConfig:
    return replace(_FAMILY_TRAIN_DEFAULTS[family], seed=seed)


@dataclass(frozen=True)
class ExperimentConfig:
    model_kind: str
    split_ratio: float = 0.8
    smote_k: int = 5
    seed: int = 42
    train_cfg: Optional[TrainConfig] = None  # None -> per-family default, cfg.seed
    grid: Optional[GridSpec] = None

    def __post_init__(self):
        if self.model_kind not in MODEL_KINDS:
            raise ConfigError(f"unknown model kind {self.model_kind!r}")
        if not 0.0 < self.split_ratio < 1.0:
            raise ConfigError("split_ratio must be in (0, 1)")
        if self.smote_k < 1:
            raise ConfigError("smote_k must be >= 1")

    def resolve_train(self, family: str) -> TrainConfig:
        if self.train_cfg is not None:
            return self.train_cfg
        return default_train_cfg(family, self.seed)

    def echo(self, train_cfg: TrainConfig) -> dict:
        items = {
            "model_kind": self.model_kind,
            "split_ratio": self.split_ratio,
            "smote_k": self.smote_k,
            "seed": self.seed,
            "learning_rate": train_cfg.learning_rate,
            "max_epochs": train_cfg.max_epochs,
            "tolerance": train_cfg.tolerance,
            "l2": train_cfg.l2,
            "train_seed": train_cfg.seed,
            "grid": "yes" if self.grid is not None else "no",
        }
        return items


@dataclass
class DataSet:
    X: np.ndarray
    y: np.ndarray
    feature_names: list[str]

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.float64)
        self.y = np.asarray(self.y)
        if self.X.ndim != 2 or len(self.y) != self.X.shape[0]:
            raise ContractViolation("DataSet X must be 2-D with one label per row")
        if len(self.feature_names) != self.X.shape[1]:
            raise ContractViolation("feature_names must match the column count")
        if not np.isfinite(self.X).all():
            raise ContractViolation("DataSet contains non-finite values")


@dataclass
class PredictionSeries:
    times_s: np.ndarray
    actual: np.ndarray
    predicted_raw: np.ndarray
    predicted_label: np.ndarray


@dataclass
class EvalReport:
    model_kind: str
    confusion: Confusion
    accuracy_pct: float
    fp_pct: float
    fn_pct: float
    f1: float
    train_seconds: float
    infer_seconds: float
    r2: Optional[float] = None
    rmse: Optional[float] = None
    config: dict = field(default_factory=dict)


# --------------------------------------------------------------------------
# dataset assembly, splitting, balancing


def build_detection_dataset(series: IntervalSeries, variant: str) -> DataSet:
    """per_interval -> n x 1 counts; frames -> n/12 x 12; frames_sigma -> +sigma column."""
    if variant == "per_interval":
        if len(series) == 0:
            raise EmptyDatasetError("series has no intervals")
        X = series.counts.astype(np.float64).reshape(-1, 1)
        return DataSet(X, series.labels.copy(), ["count"])
    if variant in ("frames", "frames_sigma"):
        with_sigma = variant == "frames_sigma"
        frames = framing.make_frames(series, framing.FramingConfig(with_sigma=with_sigma))
        if not frames:
            raise EmptyDatasetError("series too short for a single 12-interval frame")
        rows = []
        for f in frames:
            row = list(f.values)
            if with_sigma:
                row.append(f.sigma)
            rows.append(row)
        names = [f"c{i}" for i in range(framing.FRAME_WIDTH)]
        if with_sigma:
            names.append("sigma")
        y = np.array([f.label for f in frames], dtype=np.int64)
        return DataSet(np.array(rows, dtype=np.float64), y, names)
    raise ConfigError(f"unknown dataset variant {variant!r}")


def split_indices(y, ratio: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Stratified index split: per class, seeded shuffle then ceil(ratio*n) to train."""
    y = np.asarray(y)
    rng = np.random.default_rng(seed)
    train_parts, test_parts = [], []
    for cls in (0, 1):
        idx = np.flatnonzero(y == cls)
        if len(idx) < 2:
            raise ConfigError(f"class {cls} has {len(idx)} samples; need at least 2")
        perm = rng.permutation(idx)
        n_train = math.ceil(ratio * len(idx) - 1e-9)
        train_parts.append(perm[:n_train])
        test_parts.append(perm[n_train:])
    return np.concatenate(train_parts), np.concatenate(test_parts)


def split_train_test(data: DataSet, ratio: float, seed: int) -> tuple[DataSet, DataSet]:
    """Stratified 2-way split of a labeled dataset."""
    if not 0.0 < ratio < 1.0:
        raise ConfigError("ratio must be in (0, 1)")
    tr, te = split_indices(data.y, ratio, seed)
    return (DataSet(data.X[tr], data.y[tr], list(data.feature_names)),
            DataSet(data.X[te], data.y[te], list(data.feature_names)))


def smote_balance(train: DataSet, k: int, seed: int) -> DataSet:
    """Oversample the minority class to parity with synthetic interpolants.

    Each synthetic point sits on the segment between a random minority
    sample and one of its k nearest minority neighbours. Majority rows and
    the original minority rows pass through untouched.
    """
    y = np.asarray(train.y)
    counts = {cls: int(np.sum(y == cls)) for cls in (0, 1)}
    if counts[0] == counts[1]:
        return train
    minority = 0 if counts[0] < counts[1] else 1
    n_min, n_maj = counts[minority], counts[1 - minority]
    if n_min < 2:
        raise BalancingError(f"minority class has {n_min} sample(s); need at least 2")
    k_eff = min(k, n_min - 1)
    min_idx = np.flatnonzero(y == minority)
    Xm = train.X[min_idx]
    d2 = ((Xm[:, None, :] - Xm[None, :, :]) ** 2).sum(axis=2)
    np.fill_diagonal(d2, np.inf)
    neighbours = np.argsort(d2, axis=1, kind="stable")[:, :k_eff]
    rng = np.random.default_rng(seed)
    n_new = n_maj - n_min
    base = rng.integers(0, n_min, size=n_new)
    picks = neighbours[base, rng.integers(0, k_eff, size=n_new)]
    u = rng.random(size=n_new)
    synth = Xm[base] + u[:, None] * (Xm[picks] - Xm[base])
    X_out = np.vstack([train.X, synth])
    y_out = np.concatenate([y, np.full(n_new, minority, dtype=y.dtype)])
    return DataSet(X_out, y_out, list(train.feature_names))


def auto_label_series(series: IntervalSeries, train_cfg: TrainConfig) -> np.ndarray:
    """K-Means (k=2) pseudo-labels for every interval of the series."""
    if len(series) == 0:
        raise EmptyDatasetError("series has no intervals")
    if np.all(series.counts == series.counts[0]):
        raise DegenerateClusteringError("all counts identical; cluster mapping undefined")
    X = series.counts.astype(np.float64).reshape(-1, 1)
    model = classifiers.map_clusters_to_labels(classifiers.kmeans_fit(X, 2, train_cfg))
    mapping = np.array([model.label_map[0], model.label_map[1]])
    return mapping[classifiers.kmeans_assign(model, X)]


# --------------------------------------------------------------------------
# experiment runners


def _fit_kind(kind: str, X, y, train_cfg: TrainConfig):
    if kind == "lgr":
        return classifiers.lgr_fit(X, y, train_cfg), classifiers.lgr_predict
    with_sigma = {"ann": None, "ann_frames": False, "ann_frames_sigma": True}[kind]
    model = classifiers.mlp_fit(X, y, train_cfg, with_sigma=with_sigma)
    return model, classifiers.mlp_predict


def _detection_report(series: IntervalSeries, cfg: ExperimentConfig, kind: str,
                      train_labels: np.ndarray) -> EvalReport:
    """Shared supervised core: train on train_labels, score against ground truth."""
    variant = _VARIANT_OF[kind]
    train_cfg = cfg.resolve_train("lgr" if kind == "lgr" else "mlp")
    labeled = IntervalSeries(series.counts.copy(), np.asarray(train_labels, dtype=np.int64),
                             interval_seconds=series.interval_seconds, origin_s=series.origin_s)
    working = build_detection_dataset(labeled, variant)
    truth = build_detection_dataset(series, variant).y
    tr_idx, te_idx = split_indices(working.y, cfg.split_ratio, cfg.seed)
    train = DataSet(working.X[tr_idx], working.y[tr_idx], list(working.feature_names))
    t0 = time.perf_counter()
    balanced = smote_balance(train, cfg.smote_k, cfg.seed + 1)
    model, predict = _fit_kind(kind, balanced.X, balanced.y, train_cfg)
    train_seconds = time.perf_counter() - t0
    t0 = time.perf_counter()
    _, y_pred = predict(model, working.X[te_idx])
    infer_seconds = time.perf_counter() - t0
    conf = metrics.confusion(truth[te_idx], y_pred)
    acc, fp, fn, f1 = metrics.classification_scores(conf)
    return EvalReport(cfg.model_kind, conf, acc, fp, fn, f1,
                      train_seconds, infer_seconds, config=cfg.echo(train_cfg))


def run_supervised(series: IntervalSeries, cfg: ExperimentConfig) -> EvalReport:
    """Detection from ground-truth labels: split, SMOTE, fit, score on the test split."""
    if cfg.model_kind not in SUPERVISED_KINDS:
        raise ConfigError(f"run_supervised cannot run {cfg.model_kind!r}")
    return _detection_report(series, cfg, cfg.model_kind, series.labels)


def run_unsupervised(series: IntervalSeries, cfg: ExperimentConfig) -> EvalReport:
    """K-Means over every interval; cluster labels scored against ground truth."""
    if cfg.model_kind != "kmeans":
        raise ConfigError(f"run_unsupervised cannot run {cfg.model_kind!r}")
    data = build_detection_dataset(series, "per_interval")
    if np.all(series.counts == series.counts[0]):
        raise DegenerateClusteringError("all counts identical; cluster mapping undefined")
    train_cfg = cfg.resolve_train("kmeans")
    t0 = time.perf_counter()
    model = classifiers.map_clusters_to_labels(
        classifiers.kmeans_fit(data.X, 2, train_cfg))
    train_seconds = time.perf_counter() - t0
    t0 = time.perf_counter()
    mapping = np.array([model.label_map[0], model.label_map[1]])
    y_pred = mapping[classifiers.kmeans_assign(model, data.X)]
    infer_seconds = time.perf_counter() - t0
    conf = metrics.confusion(series.labels, y_pred)
    acc, fp, fn, f1 = metrics.classification_scores(conf)
    return EvalReport(cfg.model_kind, conf, acc, fp, fn, f1,
                      train_seconds, infer_seconds, config=cfg.echo(train_cfg))


def run_semi_supervised(series: IntervalSeries, cfg: ExperimentConfig) -> EvalReport:
    """K-Means pseudo-labels feed the supervised path; scoring stays on ground truth."""
    if cfg.model_kind not in SEMI_KINDS:
        raise ConfigError(f"run_semi_supervised cannot run {cfg.model_kind!r}")
    auto = auto_label_series(series, cfg.resolve_train("kmeans"))
    if auto.min() == auto.max():
        raise DegenerateClusteringError("pseudo-labelling produced a single class")
    sub_kind = cfg.model_kind.split("+", 1)[1]
    return _detection_report(series, cfg, sub_kind, auto)


def run_prediction(series: IntervalSeries, cfg: ExperimentConfig
                   ) -> tuple[EvalReport, PredictionSeries]:
    """Forecast attack status over the chronological tail of the series.

    Features are interval start time and packet count, standardized on the
    training head. Continuous outputs are thresholded at 0.5 for status
    decisions; r2/rmse are computed on the raw outputs.
    """
    if cfg.model_kind not in PREDICTION_KINDS:
        raise ConfigError(f"run_prediction cannot run {cfg.model_kind!r}")
    n = len(series)
    if n < 2:
        raise EmptyDatasetError("need at least 2 intervals to forecast")
    times = series.times_s().astype(np.float64)
    X_raw = np.column_stack([times, series.counts.astype(np.float64)])
    y = series.labels.astype(np.float64)
    n_train = int(cfg.split_ratio * n)
    if n_train < 1 or n_train >= n:
        raise ConfigError(f"split_ratio={cfg.split_ratio} leaves an empty side for n={n}")
    X_tr_raw, X_te_raw = X_raw[:n_train], X_raw[n_train:]
    y_tr, y_te = y[:n_train], y[n_train:]

    train_cfg = cfg.resolve_train("lgr")
    echo = cfg.echo(train_cfg)
    if cfg.model_kind == "lgr_reg":
        if cfg.grid is not None:
            raise ConfigError("grid search does not apply to lgr_reg")
        t0 = time.perf_counter()
        model = classifiers.lgr_fit(X_tr_raw, y_tr.astype(np.int64), train_cfg)
        train_seconds = time.perf_counter() - t0
        t0 = time.perf_counter()
        raw, y_pred = classifiers.lgr_predict(model, X_te_raw)
        infer_seconds = time.perf_counter() - t0
    else:
        scaler = Scaler.fit(X_tr_raw)
        X_tr, X_te = scaler.transform(X_tr_raw), scaler.transform(X_te_raw)
        t0 = time.perf_counter()
        if cfg.grid is not None:
            best, _ = regressors.grid_search(X_tr, y_tr, cfg.model_kind, cfg.grid,
                                             seed=cfg.seed)
        elif cfg.model_kind == "krr":
            best = {"lam": 1.0, "gamma": regressors.default_gamma(X_tr)}
        else:
            best = {"C": 1.0, "epsilon": 0.1, "gamma": regressors.default_gamma(X_tr)}
        echo.update({f"chosen_{k}": v for k, v in sorted(best.items())})
        if cfg.model_kind == "krr":
            model = regressors.krr_fit(X_tr, y_tr, best["lam"], best["gamma"])
            predict = regressors.krr_predict
        else:
            model = regressors.svr_fit(X_tr, y_tr, best["C"], best["epsilon"], best["gamma"])
            if not model.converged:
                raise NumericError(
                    f"SVR failed to converge (KKT violation {model.violation:.3e})")
            predict = regressors.svr_predict
        train_seconds = time.perf_counter() - t0
        t0 = time.perf_counter()
        raw = predict(model, X_te)
        infer_seconds = time.perf_counter() - t0
        y_pred = (raw >= 0.5).astype(np.int64)

    conf = metrics.confusion(y_te.astype(np.int64), y_pred)
    acc, fp, fn, f1 = metrics.classification_scores(conf)
    r2 = metrics.r_squared(y_te, raw)
    err = metrics.rmse(y_te, raw)
    report = EvalReport(cfg.model_kind, conf, acc, fp, fn, f1,
                        train_seconds, infer_seconds, r2=r2, rmse=err, config=echo)
    pred_series = PredictionSeries(times_s=times[n_train:].astype(np.int64),
                                   actual=y_te.astype(np.int64),
                                   predicted_raw=np.asarray(raw, dtype=np.float64),
                                   predicted_label=np.asarray(y_pred, dtype=np.int64))
    return report, pred_series


def run_experiment(series: IntervalSeries, cfg: ExperimentConfig):
    """Dispatch to the run family that owns cfg.model_kind."""
    if cfg.model_kind in SUPERVISED_KINDS:
        return run_supervised(series, cfg)
    if cfg.model_kind == "kmeans":
        return run_unsupervised(series, cfg)
    if cfg.model_kind in SEMI_KINDS:
        return run_semi_supervised(series, cfg)
    return run_prediction(series, cfg)[0]


# --------------------------------------------------------------------------
# report and prediction files


def write_report(report: EvalReport, path) -> None:
    """Flat key=value metric lines plus the config echo block."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"model_kind={report.model_kind}\n")
        c = report.confusion
        fh.write(f"tp={c.tp}\ntn={c.tn}\nfp={c.fp}\nfn={c.fn}\n")
        fh.write(f"accuracy_pct={report.accuracy_pct:.3f}\n")
        fh.write(f"fp_pct={report.fp_pct:.3f}\n")
        fh.write(f"fn_pct={report.fn_pct:.3f}\n")
        fh.write(f"f1={report.f1:.6f}\n")
        if report.r2 is not None:
            fh.write(f"r2={report.r2:.6f}\n")
        if report.rmse is not None:
            fh.write(f"rmse={report.rmse:.6f}\n")
        fh.write(f"train_seconds={report.train_seconds:.6f}\n")
        fh.write(f"infer_seconds={report.infer_seconds:.6f}\n")
        fh.write("[config]\n")
        for key, value in report.config.items():
            fh.write(f"{key}={value}\n")


def read_report(path) -> dict:
    """Parse a report file back into a flat dict (config keys prefixed config.)."""
    out = {}
    section = ""
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh.read().splitlines(), start=1):
            if not line.strip():
                continue
            if line.startswith("["):
                section = line.strip("[]") + "."
                continue
            if "=" not in line:
                raise ParseError(line_no, f"expected key=value, got {line!r}")
            key, _, value = line.partition("=")
            out[section + key] = value
    return out


def write_predictions(pred: PredictionSeries, path) -> None:
    """One `t_s,actual,predicted_raw,predicted_label` line per forecast interval."""
    with open(path, "w", encoding="utf-8") as fh:
        for t, a, raw, lab in zip(pred.times_s, pred.actual,
                                  pred.predicted_raw, pred.predicted_label):
            fh.write(f"{t},{a},{format(raw, '.17g')},{lab}\n")
