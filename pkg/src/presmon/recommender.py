"""Recommendation generation: best positive path selection and advice rules.

Given a trained tree and an ongoing prefix, the positive paths compete on a
weighted score of prefix/path fitness, leaf purity, and positive-sample
mass; the winner's steps are compared against the prefix's RV states to
emit prioritized "satisfy / do not violate / violate / do not satisfy"
recommendations.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .declare import Constraint, RVState, rv_state_of
from .dtree import DecisionTree, DtPath, LearnedValue
from .errors import NoPositivePath, ValidationError

DEFAULT_MIN_PATH_SAMPLES = 3


@dataclass(frozen=True)
class LambdaWeights:
    fitness: float = 0.4
    purity: float = 0.4
    probability: float = 0.2

    def __post_init__(self):
        values = (self.fitness, self.purity, self.probability)
        if any(v < 0 for v in values):
            raise ValidationError("lambda weights must be non-negative")
        if abs(sum(values) - 1.0) > 1e-9:
            raise ValidationError("lambda weights must sum to 1")

    def as_tuple(self):
        return (self.fitness, self.purity, self.probability)


class RecCondition(str, Enum):
    SHOULD_BECOME_SATISFIED = "SHOULD BECOME SATISFIED"
    SHOULD_NOT_BE_VIOLATED = "SHOULD NOT BE VIOLATED"
    SHOULD_NOT_BE_SATISFIED = "SHOULD NOT BE SATISFIED"
    SHOULD_BECOME_VIOLATED = "SHOULD BECOME VIOLATED"


# (learned value, unresolved RV state) -> advice; resolved states emit nothing
_CONDITION_RULES = {
    ("satisfied", RVState.POSSIBLY_VIOLATED): RecCondition.SHOULD_BECOME_SATISFIED,
    ("satisfied", RVState.POSSIBLY_SATISFIED): RecCondition.SHOULD_NOT_BE_VIOLATED,
    ("violated", RVState.POSSIBLY_VIOLATED): RecCondition.SHOULD_NOT_BE_SATISFIED,
    ("violated", RVState.POSSIBLY_SATISFIED): RecCondition.SHOULD_BECOME_VIOLATED,
}


@dataclass
class Recommendation:
    constraint: Constraint
    condition: RecCondition
    priority: int  # 1 = highest

    def to_json(self) -> dict:
        return {
            "constraint": self.constraint.text(),
            "condition": self.condition.value,
            "priority": self.priority,
        }


@dataclass
class RecommendationResult:
    recommendations: list[Recommendation]
    chosen_path: DtPath
    rho: float
    fitness: float
    rv_snapshot: dict[Constraint, RVState]

    def to_json(self) -> dict:
        return {
            "recommendations": [r.to_json() for r in self.recommendations],
            "chosen_path": self.chosen_path.to_json(),
            "rho": self.rho,
            "fitness": self.fitness,
            "rv_snapshot": {c.text(): s.label() for c, s in self.rv_snapshot.items()},
        }


def compliance(learned: LearnedValue, rv: RVState) -> float:
    """Agreement between a learned satisfaction value and an RV state."""
    if learned == "violated":
        if rv in (RVState.VIOLATED, RVState.POSSIBLY_VIOLATED):
            return 1.0
        if rv is RVState.POSSIBLY_SATISFIED:
            return 0.5
        return 0.0
    if learned == "satisfied":
        if rv in (RVState.SATISFIED, RVState.POSSIBLY_SATISFIED):
            return 1.0
        if rv is RVState.POSSIBLY_VIOLATED:
            return 0.5
        return 0.0
    raise ValidationError(f"unknown learned value {learned!r}")


def fitness(prefix: Sequence[str], path: DtPath, done: bool, _rv_cache: dict | None = None) -> float:
    """Mean step compliance between the path's rule and the prefix's RV states.

    A zero-step path (single-leaf tree) is vacuously fit: 1.
    """
    if not path.steps:
        return 1.0
    cache = _rv_cache if _rv_cache is not None else {}
    total = 0.0
    for constraint, learned in path.steps:
        rv = cache.get(constraint)
        if rv is None:
            rv = rv_state_of(constraint, prefix, done)
            cache[constraint] = rv
        total += compliance(learned, rv)
    return total / len(path.steps)


def rho(prefix: Sequence[str], path: DtPath, weights: LambdaWeights, universe_pos_total: int,
        done: bool = False, _rv_cache: dict | None = None) -> float:
    """Recommendation score: weighted fitness, leaf purity, and positive mass.

    Binary-class impurities (gini, entropy in bits) already lie in [0, 1],
    so purity is simply their complement.
    """
    if universe_pos_total <= 0:
        raise ValidationError("universe_pos_total must be positive")
    fit = fitness(prefix, path, done, _rv_cache)
    purity = 1.0 - path.impurity
    mass = path.pos_samples / universe_pos_total
    return weights.fitness * fit + weights.purity * purity + weights.probability * mass


def positive_paths(tree: DecisionTree, min_path_samples: int = DEFAULT_MIN_PATH_SAMPLES) -> list[DtPath]:
    return [
        p
        for p in tree.paths()
        if p.polarity == 1 and p.samples >= min_path_samples
    ]


def best_positive_path(
    prefix: Sequence[str],
    tree: DecisionTree,
    weights: LambdaWeights,
    min_path_samples: int = DEFAULT_MIN_PATH_SAMPLES,
    _rv_cache: dict | None = None,
) -> tuple[DtPath, float]:
    """Highest-scoring positive path; ties go to shorter paths, then traversal order."""
    candidates = positive_paths(tree, min_path_samples)
    if not candidates:
        raise NoPositivePath(f"no positive path with >= {min_path_samples} samples")
    pos_total = sum(p.pos_samples for p in candidates)
    if pos_total <= 0:
        raise NoPositivePath("positive paths carry no positive samples")
    cache = _rv_cache if _rv_cache is not None else {}
    best, best_score = None, float("-inf")
    for path in candidates:
        score = rho(prefix, path, weights, pos_total, done=False, _rv_cache=cache)
        if score > best_score or (score == best_score and len(path.steps) < len(best.steps)):
            best, best_score = path, score
    return best, best_score


def generate(
    prefix: Sequence[str],
    tree: DecisionTree,
    weights: LambdaWeights,
    min_path_samples: int = DEFAULT_MIN_PATH_SAMPLES,
) -> RecommendationResult:
    """Recommendations for an ongoing prefix from the best positive path."""
    rv_cache: dict[Constraint, RVState] = {}
    path, score = best_positive_path(prefix, tree, weights, min_path_samples, rv_cache)
    snapshot: dict[Constraint, RVState] = {}
    recommendations = []
    for constraint, learned in path.steps:
        rv = rv_cache.get(constraint)
        if rv is None:
            rv = rv_state_of(constraint, prefix, done=False)
            rv_cache[constraint] = rv
        snapshot[constraint] = rv
        condition = _CONDITION_RULES.get((learned, rv))
        if condition is not None:
            recommendations.append(Recommendation(constraint, condition, priority=len(recommendations) + 1))
    return RecommendationResult(
        recommendations=recommendations,
        chosen_path=path,
        rho=score,
        fitness=fitness(prefix, path, done=False, _rv_cache=rv_cache),
        rv_snapshot=snapshot,
    )
