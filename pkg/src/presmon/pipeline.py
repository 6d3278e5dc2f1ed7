"""End-to-end wiring: label, split, encode, select, train, tune, evaluate.

The training side consumes a complete labeled event log and produces a
self-contained model bundle; the evaluation side replays the same
preprocessing on a log and scores the what-if protocol on its test part.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .declare import Family
from .dtree import grid_search_cv
from .encoder import apriori_filter, build_universe, encode, mutual_info_order
from .errors import ValidationError
from .evaluator import TH_FIT_GRID, EvalConfig, MetricsReport, lambda_grid, run_evaluation, tune_thresholds
from .logio import (
    EventLog,
    LabelSpec,
    SplitConfig,
    chronological_split,
    cut_traces_before,
    label_traces,
    make_prefix_log,
    prefix_cap_for,
)
from .model import ModelBundle
from .recommender import DEFAULT_MIN_PATH_SAMPLES

log = logging.getLogger(__name__)

FAMILY_CODES = {
    "E": {Family.E},
    "C": {Family.E, Family.C},
    "PR": {Family.E, Family.PR},
    "NR": {Family.E, Family.NR},
    "A": {Family.E, Family.C, Family.PR, Family.NR},
}


def family_set(code: str) -> set[Family]:
    try:
        return FAMILY_CODES[code.upper()]
    except KeyError:
        raise ValidationError(f"families must be one of {'|'.join(FAMILY_CODES)}") from None


@dataclass
class TrainConfig:
    families: str = "E"
    dataset_name: str = "dataset"
    apriori_support: float = 0.05
    existence_ns: tuple = (1,)
    split: SplitConfig = field(default_factory=SplitConfig)
    grids: dict | None = None
    th_grid: list = field(default_factory=lambda: list(TH_FIT_GRID))
    lambda_step: float = 0.1
    min_path_samples: int = DEFAULT_MIN_PATH_SAMPLES
    prefix_cap: int | None = None
    seed: int = 2023


def preprocess(event_log: EventLog, label: LabelSpec, cfg: TrainConfig):
    """Label on complete traces, cut leaky activities, split chronologically."""
    labeled = label_traces(event_log, label)
    cut = cut_traces_before(labeled, label.cut_activities or ())
    cap = cfg.prefix_cap or prefix_cap_for(cfg.dataset_name, [len(t) for t in cut.traces])
    train, val, test = chronological_split(cut, cfg.split)
    return train, val, test, cap


def train_model(event_log: EventLog, label: LabelSpec, cfg: TrainConfig | None = None) -> ModelBundle:
    cfg = cfg or TrainConfig()
    train, val, _, cap = preprocess(event_log, label, cfg)
    log.info("split: %d train / %d val traces, prefix cap %d", len(train), len(val), cap)

    universe = build_universe(train.alphabet, family_set(cfg.families), cfg.existence_ns)
    universe = apriori_filter(universe, train, cfg.apriori_support)
    log.info("universe after support filter: %d constraints", len(universe))

    encoded = encode(train, universe, done=True)
    ranked = encoded.select_columns(mutual_info_order(encoded))
    hp, tree = grid_search_cv(ranked, cfg.grids, seed=cfg.seed)
    log.info("selected %s over %d features", hp, len(tree.universe))

    val_prefixes = make_prefix_log(val, cap)
    weights, th_fit = tune_thresholds(
        val_prefixes,
        tree,
        weight_grid=lambda_grid(cfg.lambda_step),
        th_grid=cfg.th_grid,
        min_path_samples=cfg.min_path_samples,
    )
    log.info("tuned lambda=%s th_fit=%.2f", weights.as_tuple(), th_fit)

    trained_at = max(e.timestamp for t in event_log.traces for e in t.events).isoformat()
    return ModelBundle(
        tree=tree,
        weights=weights,
        th_fit=th_fit,
        alphabet=sorted(train.alphabet),
        families=[cfg.families.upper()],
        min_path_samples=cfg.min_path_samples,
        metadata={
            "dataset": cfg.dataset_name,
            "trained_at": trained_at,
            "label_spec": label_spec_json(label),
            "prefix_cap": cap,
            "seed": cfg.seed,
            "apriori_support": cfg.apriori_support,
            "train_traces": len(train),
            "val_traces": len(val),
            "hyperparameters": hp.to_json(),
        },
    )


def label_spec_json(label: LabelSpec) -> dict:
    data = {"kind": label.kind}
    if label.attribute_name:
        data["attribute_name"] = label.attribute_name
    if label.formula is not None:
        data["formula"] = str(label.formula)
    if label.cut_activities:
        data["cut_activities"] = sorted(label.cut_activities)
    return data


def evaluate_model(
    event_log: EventLog,
    bundle: ModelBundle,
    label: LabelSpec | None = None,
    split: bool = True,
    split_config: SplitConfig | None = None,
) -> MetricsReport:
    """Score the bundle's what-if quality on the test part of a labeled log."""
    if label is None:
        spec_data = bundle.metadata.get("label_spec")
        if not spec_data:
            raise ValidationError("no label spec given and none stored in the model")
        label = LabelSpec.from_json(spec_data)
    labeled = label_traces(event_log, label)
    cut = cut_traces_before(labeled, label.cut_activities or ())
    cap = bundle.metadata.get("prefix_cap") or prefix_cap_for(
        bundle.metadata.get("dataset", ""), [len(t) for t in cut.traces]
    )
    if split:
        _, _, test = chronological_split(cut, split_config or SplitConfig())
    else:
        test = cut
    prefixes = make_prefix_log(test, cap)
    cfg = EvalConfig(th_fit=bundle.th_fit, prefix_cap=cap, min_path_samples=bundle.min_path_samples)
    return run_evaluation(prefixes, bundle.tree, bundle.weights, cfg)
