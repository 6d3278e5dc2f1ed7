"""Trained-model bundle: tree, score weights, threshold, and metadata."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .dtree import DecisionTree, tree_from_json, tree_to_json
from .errors import ValidationError
from .recommender import DEFAULT_MIN_PATH_SAMPLES, LambdaWeights

FORMAT = "presmon-model/1"


@dataclass
class ModelBundle:
    tree: DecisionTree
    weights: LambdaWeights
    th_fit: float
    alphabet: list[str]
    families: list[str]
    min_path_samples: int = DEFAULT_MIN_PATH_SAMPLES
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0 < self.th_fit <= 1:
            raise ValidationError("th_fit must be in (0, 1]")
        self.alphabet = sorted(self.alphabet)

    @property
    def universe(self):
        return self.tree.universe

    def to_json(self) -> dict:
        return {
            "format": FORMAT,
            "tree": tree_to_json(self.tree),
            "lambda": list(self.weights.as_tuple()),
            "th_fit": self.th_fit,
            "alphabet": self.alphabet,
            "families": sorted(self.families),
            "min_path_samples": self.min_path_samples,
            "metadata": self.metadata,
        }

    @classmethod
    def from_json(cls, data: dict) -> "ModelBundle":
        if data.get("format") != FORMAT:
            raise ValidationError(f"not a presmon model file (format={data.get('format')!r})")
        l1, l2, l3 = data["lambda"]
        return cls(
            tree=tree_from_json(data["tree"]),
            weights=LambdaWeights(l1, l2, l3),
            th_fit=data["th_fit"],
            alphabet=data["alphabet"],
            families=data["families"],
            min_path_samples=data.get("min_path_samples", DEFAULT_MIN_PATH_SAMPLES),
            metadata=data.get("metadata", {}),
        )

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "ModelBundle":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))
