"""Offline what-if evaluation of recommendation quality.

For every test prefix, recommendations are generated and then judged on
the complete trace: whole-trace fitness against the chosen path decides
whether the advice was "followed" (threshold inclusive), and the true
outcome label turns that into a confusion-matrix cell. Results accumulate
per prefix length; cumulative counts avoid noisy long-prefix bins.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dtree import DecisionTree
from .errors import NoPositivePath, ValidationError
from .logio import PrefixLog
from .recommender import (
    DEFAULT_MIN_PATH_SAMPLES,
    LambdaWeights,
    fitness,
    generate,
    positive_paths,
)

TH_FIT_GRID = [0.55, 0.65, 0.75, 0.85]


@dataclass
class EvalConfig:
    th_fit: float = 0.75
    th_fit_grid: list = field(default_factory=lambda: list(TH_FIT_GRID))
    prefix_cap: int = 40
    min_path_samples: int = DEFAULT_MIN_PATH_SAMPLES


@dataclass
class ConfusionMatrix:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    def add(self, outcome: str) -> None:
        setattr(self, outcome.lower(), getattr(self, outcome.lower()) + 1)

    def __iadd__(self, other: "ConfusionMatrix"):
        self.tp += other.tp
        self.fp += other.fp
        self.tn += other.tn
        self.fn += other.fn
        return self

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def to_json(self) -> dict:
        return {"tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn}


def whatif_classify(full_trace_fitness: float, label: int, th_fit: float) -> str:
    """Confusion-matrix outcome: fitness at or above the threshold counts as followed."""
    followed = full_trace_fitness >= th_fit
    if followed:
        return "TP" if label == 1 else "FP"
    return "FN" if label == 1 else "TN"


def metrics(cm: ConfusionMatrix) -> tuple[float, float, float]:
    precision = cm.tp / (cm.tp + cm.fp) if cm.tp + cm.fp else 0.0
    recall = cm.tp / (cm.tp + cm.fn) if cm.tp + cm.fn else 0.0
    f_score = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f_score


@dataclass
class MetricsReport:
    per_k: dict[int, ConfusionMatrix]
    timings: list[tuple[int, float]]  # (prefix length, seconds per generation)
    config: dict = field(default_factory=dict)

    def cumulative_per_k(self) -> dict[int, ConfusionMatrix]:
        out: dict[int, ConfusionMatrix] = {}
        running = ConfusionMatrix()
        for k in sorted(self.per_k):
            running += self.per_k[k]
            out[k] = ConfusionMatrix(running.tp, running.fp, running.tn, running.fn)
        return out

    def fscore_curve(self) -> list[tuple[int, float, float, float]]:
        return [(k, *metrics(cm)) for k, cm in self.cumulative_per_k().items()]

    def average_f(self) -> float:
        curve = self.fscore_curve()
        if not curve:
            return 0.0
        return float(np.mean([row[3] for row in curve]))

    def timing_by_k(self) -> dict[int, dict]:
        grouped: dict[int, list[float]] = {}
        for k, seconds in self.timings:
            grouped.setdefault(k, []).append(seconds)
        return {
            k: {
                "mean_ms": 1e3 * float(np.mean(v)),
                "p95_ms": 1e3 * float(np.percentile(v, 95)),
                "median_ms": 1e3 * float(np.median(v)),
                "count": len(v),
            }
            for k, v in sorted(grouped.items())
        }

    def to_json(self) -> dict:
        # timings are excluded: the metrics file must be run-to-run reproducible
        cumulative = {}
        for k, cm in self.cumulative_per_k().items():
            precision, recall, f_score = metrics(cm)
            cumulative[str(k)] = {
                **cm.to_json(),
                "precision": precision,
                "recall": recall,
                "f_score": f_score,
            }
        return {
            "per_k": {str(k): cm.to_json() for k, cm in sorted(self.per_k.items())},
            "cumulative": cumulative,
            "average_f_score": self.average_f(),
            "config": self.config,
        }


def run_evaluation(
    test_prefixes: PrefixLog,
    tree: DecisionTree,
    weights: LambdaWeights,
    cfg: EvalConfig | None = None,
) -> MetricsReport:
    """Generate recommendations for every prefix and score them on the full trace.

    Prefixes whose tree offers no recoverable positive path score fitness 0
    (nothing can be followed) and classify by the true label alone.
    """
    cfg = cfg or EvalConfig()
    per_k: dict[int, ConfusionMatrix] = {}
    timings: list[tuple[int, float]] = []
    for entry in test_prefixes.entries:
        if entry.k > cfg.prefix_cap:
            continue
        if entry.full_trace_label is None or entry.source is None:
            raise ValidationError(f"prefix {entry.case_id}#{entry.k} lacks label or source trace")
        started = time.perf_counter()
        try:
            result = generate(entry.prefix.activities, tree, weights, cfg.min_path_samples)
        except NoPositivePath:
            result = None
        finally:
            timings.append((entry.k, time.perf_counter() - started))
        if result is None:
            full_fitness = 0.0
        else:
            full_fitness = fitness(entry.source.activities, result.chosen_path, done=True)
        outcome = whatif_classify(full_fitness, entry.full_trace_label, cfg.th_fit)
        per_k.setdefault(entry.k, ConfusionMatrix()).add(outcome)
    return MetricsReport(
        per_k=per_k,
        timings=timings,
        config={
            "th_fit": cfg.th_fit,
            "prefix_cap": cfg.prefix_cap,
            "min_path_samples": cfg.min_path_samples,
            "lambda": list(weights.as_tuple()),
        },
    )


def lambda_grid(step: float = 0.1) -> list[LambdaWeights]:
    """All weight triples on the 0.1-step simplex, in lexicographic order."""
    ticks = round(1.0 / step)
    grid = []
    for i in range(ticks + 1):
        for j in range(ticks - i + 1):
            k = ticks - i - j
            grid.append(LambdaWeights(i / ticks, j / ticks, k / ticks))
    return grid


def tune_thresholds(
    val_prefixes: PrefixLog,
    tree: DecisionTree,
    weight_grid: list[LambdaWeights] | None = None,
    th_grid: list[float] | None = None,
    min_path_samples: int = DEFAULT_MIN_PATH_SAMPLES,
) -> tuple[LambdaWeights, float]:
    """Joint grid search maximizing average cumulative F-score on validation prefixes.

    Ties prefer the lower threshold, then the lexicographically smaller
    weights. Path fitness values are independent of the grid point, so they
    are precomputed once.
    """
    weight_grid = weight_grid or lambda_grid()
    th_grid = sorted(th_grid or TH_FIT_GRID)
    entries = [e for e in val_prefixes.entries if e.full_trace_label is not None and e.source is not None]
    if not entries:
        raise ValidationError("validation prefix log is empty")
    paths = positive_paths(tree, min_path_samples)
    if not paths:
        raise NoPositivePath(f"no positive path with >= {min_path_samples} samples")
    # tie order for equal scores: shorter rule first, then traversal order
    paths = sorted(paths, key=lambda p: len(p.steps))
    pos_total = sum(p.pos_samples for p in paths)

    purity = np.array([1.0 - p.impurity for p in paths])
    mass = np.array([p.pos_samples / pos_total for p in paths])
    pre_fit = np.empty((len(entries), len(paths)))
    done_fit = np.empty((len(entries), len(paths)))
    done_cache: dict[tuple[str, int], list[float]] = {}
    for i, entry in enumerate(entries):
        rv_cache: dict = {}
        for j, path in enumerate(paths):
            pre_fit[i, j] = fitness(entry.prefix.activities, path, done=False, _rv_cache=rv_cache)
        key = (entry.case_id, id(entry.source))
        if key not in done_cache:
            done_rv: dict = {}
            done_cache[key] = [
                fitness(entry.source.activities, p, done=True, _rv_cache=done_rv) for p in paths
            ]
        done_fit[i] = done_cache[key]
    ks = np.array([e.k for e in entries])
    labels = np.array([e.full_trace_label for e in entries])

    best_score, best = -1.0, None
    for th in th_grid:
        for weights in weight_grid:
            l1, l2, l3 = weights.as_tuple()
            scores = l1 * pre_fit + l2 * purity + l3 * mass
            chosen = scores.argmax(axis=1)  # first max: shortest rule wins ties
            followed = done_fit[np.arange(len(entries)), chosen] >= th
            avg = _average_cumulative_f(ks, labels, followed)
            if avg > best_score:
                best_score, best = avg, (weights, th)
    return best


def _average_cumulative_f(ks, labels, followed) -> float:
    f_scores = []
    tp = fp = tn = fn = 0
    for k in np.unique(ks):
        mask = ks == k
        tp += int(np.count_nonzero(followed[mask] & (labels[mask] == 1)))
        fp += int(np.count_nonzero(followed[mask] & (labels[mask] == 0)))
        fn += int(np.count_nonzero(~followed[mask] & (labels[mask] == 1)))
        tn += int(np.count_nonzero(~followed[mask] & (labels[mask] == 0)))
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f_scores.append(2 * precision * recall / (precision + recall) if precision + recall else 0.0)
    return float(np.mean(f_scores))


def emit_report(report: MetricsReport, directory) -> list[Path]:
    """Write metrics.json, cumulative_fscore.csv, timings.csv, and summary.txt."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []

    metrics_path = directory / "metrics.json"
    with open(metrics_path, "w", encoding="utf-8") as fh:
        json.dump(report.to_json(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    written.append(metrics_path)

    curve_path = directory / "cumulative_fscore.csv"
    with open(curve_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "precision", "recall", "f_score"])
        for k, precision, recall, f_score in report.fscore_curve():
            writer.writerow([k, f"{precision:.6f}", f"{recall:.6f}", f"{f_score:.6f}"])
    written.append(curve_path)

    timings_path = directory / "timings.csv"
    with open(timings_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "count", "mean_ms", "p95_ms"])
        for k, row in report.timing_by_k().items():
            writer.writerow([k, row["count"], f"{row['mean_ms']:.3f}", f"{row['p95_ms']:.3f}"])
    written.append(timings_path)

    summary_path = directory / "summary.txt"
    with open(summary_path, "w", encoding="utf-8") as fh:
        fh.write(f"{'k':>4} {'tp':>6} {'fp':>6} {'tn':>6} {'fn':>6} {'cum F':>8}\n")
        cumulative = report.cumulative_per_k()
        for k in sorted(report.per_k):
            cm = report.per_k[k]
            f_score = metrics(cumulative[k])[2]
            fh.write(f"{k:>4} {cm.tp:>6} {cm.fp:>6} {cm.tn:>6} {cm.fn:>6} {100 * f_score:>8.2f}\n")
        fh.write(f"\naverage cumulative F-score: {100 * report.average_f():.2f}\n")
    written.append(summary_path)
    return written
