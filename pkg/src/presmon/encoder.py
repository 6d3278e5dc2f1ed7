"""Constraint universe construction and trace encoding into RV-value matrices.

The universe instantiates the chosen template families over an alphabet in
a fixed canonical order (template order, then lexicographic activities),
which defines the column order of every encoded matrix. Filtering keeps
only constraints over frequent activities (Apriori co-presence counts) and
the most label-informative ones (mutual information ranking).
"""

from __future__ import annotations

import csv
import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .declare import TEMPLATE_ORDER, Constraint, Family, Template, count_stats, parse_constraint, rv_state
from .errors import EmptyUniverse, ValidationError
from .logio import EventLog, PrefixLog


@dataclass
class ConstraintUniverse:
    constraints: list[Constraint]
    families_used: set[Family] = field(default_factory=set)
    source_alphabet: set[str] = field(default_factory=set)

    def __post_init__(self):
        if len(set(self.constraints)) != len(self.constraints):
            raise ValidationError("duplicate constraints in universe")

    def __len__(self):
        return len(self.constraints)

    def texts(self) -> list[str]:
        return [c.text() for c in self.constraints]

    def subset(self, indices) -> "ConstraintUniverse":
        return ConstraintUniverse(
            [self.constraints[i] for i in indices],
            set(self.families_used),
            set(self.source_alphabet),
        )

    def to_json(self) -> dict:
        return {
            "constraints": self.texts(),
            "families": sorted(f.value for f in self.families_used),
            "alphabet": sorted(self.source_alphabet),
        }

    @classmethod
    def from_json(cls, data: dict) -> "ConstraintUniverse":
        return cls(
            [parse_constraint(t) for t in data["constraints"]],
            {Family(f) for f in data.get("families", [])},
            set(data.get("alphabet", [])),
        )


@dataclass
class FeatureSelectionConfig:
    apriori_support: float = 0.05
    top_h: str = "50%"  # one of "50%", "30%", "sqrt"

    def __post_init__(self):
        if not 0 < self.apriori_support <= 1:
            raise ValidationError("apriori_support must be in (0, 1]")
        resolve_top_h(self.top_h, 10)  # validate the rule shape


def resolve_top_h(rule: str, feature_count: int) -> int:
    """Number of features kept by a selection rule over ``feature_count`` features."""
    rule = str(rule).strip().lower()
    if rule == "sqrt":
        return max(1, round(math.sqrt(feature_count)))
    if rule.endswith("%"):
        fraction = float(rule[:-1]) / 100.0
        if not 0 < fraction <= 1:
            raise ValidationError(f"bad selection rule {rule!r}")
        return max(1, math.ceil(feature_count * fraction))
    raise ValidationError(f"unknown selection rule {rule!r}")


@dataclass
class EncodedDataset:
    """Rows are (prefix) traces, columns constraints, entries RV codes 0..3."""

    matrix: np.ndarray
    labels: np.ndarray | None
    universe: ConstraintUniverse
    row_index: list

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=np.int8)
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=np.int8)

    @property
    def n_rows(self):
        return self.matrix.shape[0]

    @property
    def n_features(self):
        return self.matrix.shape[1]

    def select_columns(self, indices) -> "EncodedDataset":
        indices = list(indices)
        return EncodedDataset(
            self.matrix[:, indices], self.labels, self.universe.subset(indices), self.row_index
        )


def build_universe(alphabet, families, existence_ns=(1,)) -> ConstraintUniverse:
    """Instantiate every template of the chosen families over the alphabet."""
    families = {Family(f) for f in families}
    ns = sorted(set(existence_ns))
    if not ns or min(ns) < 1:
        raise ValidationError("existence_ns must be positive integers")
    activities = sorted(alphabet)
    constraints = []
    for template in TEMPLATE_ORDER:
        if template.family not in families:
            continue
        if template.arity == 1:
            if template.takes_n:
                for n in ns:
                    written = n + 1 if template is Template.ABSENCE else n
                    constraints.extend(Constraint(template, a, n=written) for a in activities)
            else:
                constraints.extend(Constraint(template, a) for a in activities)
        else:
            constraints.extend(
                Constraint(template, a, b) for a, b in itertools.permutations(activities, 2)
            )
    return ConstraintUniverse(constraints, families, set(activities))


def frequent_items(event_log: EventLog, support: float):
    """Classic two-level Apriori: frequent activities and frequent unordered pairs."""
    transactions = [set(t.activities) for t in event_log.traces]
    threshold = support * len(transactions)
    counts: dict[str, int] = {}
    for items in transactions:
        for item in items:
            counts[item] = counts.get(item, 0) + 1
    frequent1 = {item for item, c in counts.items() if c >= threshold}
    pair_counts: dict[frozenset, int] = {}
    for items in transactions:
        kept = sorted(items & frequent1)  # candidate pruning: both members frequent
        for a, b in itertools.combinations(kept, 2):
            key = frozenset((a, b))
            pair_counts[key] = pair_counts.get(key, 0) + 1
    frequent2 = {pair for pair, c in pair_counts.items() if c >= threshold}
    return frequent1, frequent2


def apriori_filter(universe: ConstraintUniverse, event_log: EventLog, support: float) -> ConstraintUniverse:
    """Keep constraints whose activities (pairs: co-presence, any order) are frequent."""
    if not 0 < support <= 1:
        raise ValidationError("support must be in (0, 1]")
    frequent1, frequent2 = frequent_items(event_log, support)
    kept = []
    for constraint in universe.constraints:
        if constraint.target is None:
            if constraint.activation in frequent1:
                kept.append(constraint)
        elif frozenset((constraint.activation, constraint.target)) in frequent2:
            kept.append(constraint)
    if not kept:
        raise EmptyUniverse(f"no constraint survives support {support}")
    return ConstraintUniverse(kept, set(universe.families_used), set(universe.source_alphabet))


def encode(data: EventLog | PrefixLog, universe: ConstraintUniverse, done: bool) -> EncodedDataset:
    """RV-encode every (prefix) trace of the input against the universe columns."""
    if isinstance(data, PrefixLog):
        rows = [(entry.prefix.activities, entry.full_trace_label, (entry.case_id, entry.k)) for entry in data.entries]
    else:
        rows = [(trace.activities, trace.label, trace.case_id) for trace in data.traces]
    matrix = np.empty((len(rows), len(universe)), dtype=np.int8)
    labels = []
    row_index = []
    for i, (activities, label, key) in enumerate(rows):
        for j, constraint in enumerate(universe.constraints):
            matrix[i, j] = int(rv_state(constraint, count_stats(constraint, activities, done)))
        labels.append(label)
        row_index.append(key)
    has_labels = all(l is not None for l in labels) and labels
    return EncodedDataset(matrix, np.array(labels, dtype=np.int8) if has_labels else None, universe, row_index)


def mutual_info_scores(dataset: EncodedDataset) -> np.ndarray:
    """Plug-in mutual information (natural log) between each column and the label."""
    if dataset.labels is None:
        raise ValidationError("mutual information needs labels")
    y = dataset.labels
    n = len(y)
    scores = np.zeros(dataset.n_features)
    p_y = {v: np.count_nonzero(y == v) / n for v in np.unique(y)}
    for j in range(dataset.n_features):
        col = dataset.matrix[:, j]
        total = 0.0
        for xv in np.unique(col):
            mask = col == xv
            p_x = np.count_nonzero(mask) / n
            for yv, py in p_y.items():
                p_xy = np.count_nonzero(mask & (y == yv)) / n
                if p_xy > 0:
                    total += p_xy * math.log(p_xy / (p_x * py))
        scores[j] = total
    return scores


def mutual_info_order(dataset: EncodedDataset) -> np.ndarray:
    """Column indices sorted by descending MI; ties keep original column order."""
    scores = mutual_info_scores(dataset)
    return np.argsort(-scores, kind="stable")


def mutual_info_rank(dataset: EncodedDataset, top_h: str) -> ConstraintUniverse:
    """The ``top_h`` most label-informative constraints, in rank order."""
    order = mutual_info_order(dataset)
    h = resolve_top_h(top_h, dataset.n_features)
    return dataset.universe.subset(order[:h])


def write_dataset_csv(dataset: EncodedDataset, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        header = ["row"] + dataset.universe.texts()
        if dataset.labels is not None:
            header.append("label")
        writer.writerow(header)
        for i in range(dataset.n_rows):
            key = dataset.row_index[i]
            row = [key if isinstance(key, str) else f"{key[0]}#{key[1]}"]
            row += [int(v) for v in dataset.matrix[i]]
            if dataset.labels is not None:
                row.append(int(dataset.labels[i]))
            writer.writerow(row)


def write_dataset_cache(dataset: EncodedDataset, path) -> None:
    np.savez_compressed(
        path,
        matrix=dataset.matrix,
        labels=dataset.labels if dataset.labels is not None else np.array([]),
        universe=json.dumps(dataset.universe.to_json()),
        row_index=json.dumps([list(k) if isinstance(k, tuple) else k for k in dataset.row_index]),
    )


def load_dataset_cache(path) -> EncodedDataset:
    data = np.load(path, allow_pickle=False)
    labels = data["labels"]
    row_index = [tuple(k) if isinstance(k, list) else k for k in json.loads(str(data["row_index"]))]
    return EncodedDataset(
        data["matrix"],
        labels if labels.size else None,
        ConstraintUniverse.from_json(json.loads(str(data["universe"]))),
        row_index,
    )
