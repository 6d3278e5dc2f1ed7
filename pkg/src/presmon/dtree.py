"""Decision-tree induction over binary constraint features.

Splits are equality tests "constraint satisfied (1)" with the satisfied
branch first; training encodings are binary so threshold and equality
splits coincide. Leaves store raw (unweighted) sample counts even when
balanced class weights drive the split selection, because downstream
scoring uses the counts as sample masses.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .declare import Constraint, parse_constraint
from .encoder import ConstraintUniverse, EncodedDataset, resolve_top_h
from .errors import DegenerateData, ValidationError, WidthMismatch

LearnedValue = Literal["satisfied", "violated"]

# hyperparameter grids used by the benchmark runs
DEFAULT_GRIDS = {
    "criterion": ["gini", "entropy"],
    "max_depth": [4, 6, 8, 10, None],
    "class_weight": [None, "balanced"],
    "min_samples_split": [0.1, 0.2, 0.3, 2],
    "min_samples_leaf": [1, 10, 16],
    "top_h_rule": ["50%", "30%", "sqrt"],
}


@dataclass(frozen=True)
class Hyperparameters:
    criterion: str = "gini"
    max_depth: int | None = None
    class_weight: str | None = None
    min_samples_split: float | int = 2
    min_samples_leaf: int = 1
    top_h_rule: str = "50%"

    def __post_init__(self):
        if self.criterion not in ("gini", "entropy"):
            raise ValidationError(f"unknown criterion {self.criterion!r}")
        if self.class_weight not in (None, "balanced"):
            raise ValidationError(f"unknown class_weight {self.class_weight!r}")

    def to_json(self) -> dict:
        return {
            "criterion": self.criterion,
            "max_depth": self.max_depth,
            "class_weight": self.class_weight,
            "min_samples_split": self.min_samples_split,
            "min_samples_leaf": self.min_samples_leaf,
            "top_h_rule": self.top_h_rule,
        }

    @classmethod
    def from_json(cls, data: dict) -> "Hyperparameters":
        return cls(**data)


@dataclass
class Leaf:
    polarity: int
    impurity: float
    pos_samples: int
    neg_samples: int

    @property
    def is_leaf(self):
        return True


@dataclass
class Split:
    column: int
    constraint: Constraint
    satisfied: "Leaf | Split"
    violated: "Leaf | Split"

    @property
    def is_leaf(self):
        return False


@dataclass
class DtPath:
    steps: list[tuple[Constraint, LearnedValue]]
    polarity: int
    impurity: float
    pos_samples: int
    neg_samples: int

    @property
    def samples(self):
        return self.pos_samples + self.neg_samples

    def to_json(self) -> dict:
        return {
            "steps": [[c.text(), v] for c, v in self.steps],
            "polarity": self.polarity,
            "impurity": self.impurity,
            "pos_samples": self.pos_samples,
            "neg_samples": self.neg_samples,
        }


@dataclass
class DecisionTree:
    root: Leaf | Split
    universe: ConstraintUniverse
    hyperparameters: Hyperparameters

    @property
    def depth(self) -> int:
        def walk(node):
            return 0 if node.is_leaf else 1 + max(walk(node.satisfied), walk(node.violated))

        return walk(self.root)

    def leaf_count(self) -> int:
        return len(self.paths())

    def paths(self) -> "list[DtPath]":
        """Root-to-leaf paths, cached: a trained tree is immutable."""
        cached = getattr(self, "_paths", None)
        if cached is None:
            cached = extract_paths(self)
            object.__setattr__(self, "_paths", cached)
        return cached


def _impurity(criterion: str, pos: float, neg: float) -> float:
    total = pos + neg
    if total <= 0:
        return 0.0
    p, q = pos / total, neg / total
    if criterion == "gini":
        return 1.0 - p * p - q * q
    bits = 0.0
    for v in (p, q):
        if v > 0:
            bits -= v * math.log2(v)
    return bits


def induce(dataset: EncodedDataset, hp: Hyperparameters) -> DecisionTree:
    """Greedy CART induction on a binary-encoded training set."""
    if dataset.labels is None:
        raise ValidationError("training data needs labels")
    X = (dataset.matrix == 1).astype(np.float64)
    y = dataset.labels.astype(np.int64)
    n, p = X.shape
    if n == 0:
        raise ValidationError("empty training data")
    if len(np.unique(y)) < 2:
        # single-leaf tree still predicts the majority class
        logging.getLogger(__name__).warning("%s", DegenerateData("training data has one class"))

    if hp.class_weight == "balanced":
        counts = np.bincount(y, minlength=2).astype(np.float64)
        class_w = np.where(counts > 0, n / (2.0 * np.maximum(counts, 1)), 0.0)
    else:
        class_w = np.ones(2)
    weights = class_w[y]
    w_pos_all = weights * (y == 1)

    if isinstance(hp.min_samples_split, float) and 0 < hp.min_samples_split < 1:
        min_split = max(2, math.ceil(hp.min_samples_split * n))
    else:
        min_split = max(2, int(hp.min_samples_split))
    min_leaf = max(1, int(hp.min_samples_leaf))
    max_depth = math.inf if hp.max_depth is None else hp.max_depth

    def make_leaf(idx):
        pos = int(np.count_nonzero(y[idx] == 1))
        neg = len(idx) - pos
        w_pos = float(w_pos_all[idx].sum())
        w_neg = float(weights[idx].sum()) - w_pos
        polarity = 1 if w_pos >= w_neg else 0
        return Leaf(polarity, _impurity(hp.criterion, pos, neg), pos, neg)

    def build(idx, depth):
        w_node = weights[idx]
        w_total = float(w_node.sum())
        w_pos = float(w_pos_all[idx].sum())
        node_impurity = _impurity(hp.criterion, w_pos, w_total - w_pos)
        if depth >= max_depth or len(idx) < min_split or node_impurity <= 0.0:
            return make_leaf(idx)
        Xs = X[idx]
        cnt_true = Xs.sum(axis=0)
        cnt_false = len(idx) - cnt_true
        t_all = w_node @ Xs
        t_pos = w_pos_all[idx] @ Xs
        decreases = np.full(p, -np.inf)
        for j in range(p):
            if cnt_true[j] < min_leaf or cnt_false[j] < min_leaf:
                continue
            imp_t = _impurity(hp.criterion, t_pos[j], t_all[j] - t_pos[j])
            imp_f = _impurity(hp.criterion, w_pos - t_pos[j], (w_total - t_all[j]) - (w_pos - t_pos[j]))
            decreases[j] = node_impurity - (t_all[j] * imp_t + (w_total - t_all[j]) * imp_f) / w_total
        best = int(np.argmax(decreases))  # ties resolve to the lowest column
        if not decreases[best] > 1e-12:
            return make_leaf(idx)
        mask = Xs[:, best] == 1
        return Split(
            column=best,
            constraint=dataset.universe.constraints[best],
            satisfied=build(idx[mask], depth + 1),
            violated=build(idx[~mask], depth + 1),
        )

    root = build(np.arange(n), 0)
    return DecisionTree(root, dataset.universe, hp)


def predict(tree: DecisionTree, row) -> int:
    row = np.asarray(row)
    if row.shape[-1] != len(tree.universe):
        raise WidthMismatch(f"row width {row.shape[-1]} != {len(tree.universe)} features")
    node = tree.root
    while not node.is_leaf:
        node = node.satisfied if row[node.column] == 1 else node.violated
    return node.polarity


def extract_paths(tree: DecisionTree) -> list[DtPath]:
    """One root-to-leaf path per leaf, depth-first with the satisfied branch first."""
    paths: list[DtPath] = []

    def walk(node, steps):
        if node.is_leaf:
            paths.append(DtPath(list(steps), node.polarity, node.impurity, node.pos_samples, node.neg_samples))
            return
        walk(node.satisfied, steps + [(node.constraint, "satisfied")])
        walk(node.violated, steps + [(node.constraint, "violated")])

    walk(tree.root, [])
    return paths


def stratified_folds(labels, folds: int, seed: int) -> list[np.ndarray]:
    """Deterministic stratified fold assignment (round-robin after a seeded shuffle)."""
    labels = np.asarray(labels)
    rng = np.random.default_rng(seed)
    assignment = np.empty(len(labels), dtype=np.int64)
    for cls in np.unique(labels):
        members = np.flatnonzero(labels == cls)
        rng.shuffle(members)
        for i, idx in enumerate(members):
            assignment[idx] = i % folds
    return [np.flatnonzero(assignment == f) for f in range(folds)]


def f1_score(y_true, y_pred) -> float:
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    tp = int(np.count_nonzero((y_pred == 1) & (y_true == 1)))
    fp = int(np.count_nonzero((y_pred == 1) & (y_true == 0)))
    fn = int(np.count_nonzero((y_pred == 0) & (y_true == 1)))
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    return 2 * precision * recall / (precision + recall) if precision + recall else 0.0


def grid_search_cv(dataset: EncodedDataset, grids: dict | None = None, folds: int = 5, seed: int = 2023):
    """Grid search with stratified cross-validation; returns (best hp, retrained tree).

    The dataset columns must already be ranked by informativeness: the
    ``top_h_rule`` grid axis keeps the first h columns.
    """
    grids = {**DEFAULT_GRIDS, **(grids or {})}
    if dataset.labels is None:
        raise ValidationError("grid search needs labels")
    counts = np.bincount(dataset.labels, minlength=2)
    effective_folds = folds
    if counts.min() < folds:
        effective_folds = max(2, int(counts.min()))
    fold_indices = stratified_folds(dataset.labels, effective_folds, seed)

    subsets: dict[str, EncodedDataset] = {}
    for rule in grids["top_h_rule"]:
        h = resolve_top_h(rule, dataset.n_features)
        subsets[rule] = dataset.select_columns(range(h))

    best_score, best_hp = -1.0, None
    for values in itertools.product(
        grids["criterion"],
        grids["max_depth"],
        grids["class_weight"],
        grids["min_samples_split"],
        grids["min_samples_leaf"],
        grids["top_h_rule"],
    ):
        hp = Hyperparameters(*values)
        data = subsets[hp.top_h_rule]
        scores = []
        for f in range(effective_folds):
            val_idx = fold_indices[f]
            train_idx = np.concatenate([fold_indices[g] for g in range(effective_folds) if g != f])
            fold_train = EncodedDataset(
                data.matrix[train_idx], data.labels[train_idx], data.universe, [data.row_index[i] for i in train_idx]
            )
            tree = induce(fold_train, hp)
            preds = [predict(tree, data.matrix[i]) for i in val_idx]
            scores.append(f1_score(data.labels[val_idx], preds))
        mean_score = float(np.mean(scores))
        if mean_score > best_score:
            best_score, best_hp = mean_score, hp
    tree = induce(subsets[best_hp.top_h_rule], best_hp)
    return best_hp, tree


# --- serialization ------------------------------------------------------------


def _node_to_json(node) -> dict:
    if node.is_leaf:
        return {
            "leaf": {
                "polarity": node.polarity,
                "impurity": node.impurity,
                "pos_samples": node.pos_samples,
                "neg_samples": node.neg_samples,
            }
        }
    return {
        "split": {
            "column": node.column,
            "constraint": node.constraint.text(),
            "satisfied": _node_to_json(node.satisfied),
            "violated": _node_to_json(node.violated),
        }
    }


def _node_from_json(data: dict, universe: ConstraintUniverse):
    if "leaf" in data:
        return Leaf(**data["leaf"])
    split = data["split"]
    constraint = parse_constraint(split["constraint"])
    column = split["column"]
    if column >= len(universe) or universe.constraints[column] != constraint:
        raise ValidationError(f"tree column {column} does not match the universe")
    return Split(
        column=column,
        constraint=constraint,
        satisfied=_node_from_json(split["satisfied"], universe),
        violated=_node_from_json(split["violated"], universe),
    )


def tree_to_json(tree: DecisionTree) -> dict:
    return {
        "hyperparameters": tree.hyperparameters.to_json(),
        "columns": tree.universe.to_json(),
        "root": _node_to_json(tree.root),
    }


def tree_from_json(data: dict) -> DecisionTree:
    universe = ConstraintUniverse.from_json(data["columns"])
    return DecisionTree(
        root=_node_from_json(data["root"], universe),
        universe=universe,
        hyperparameters=Hyperparameters.from_json(data["hyperparameters"]),
    )
