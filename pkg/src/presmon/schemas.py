"""Pydantic request/response models for the HTTP service."""

from __future__ import annotations

from pydantic import BaseModel, Field


class RecommendRequest(BaseModel):
    activities: list[str]


class AppendEventRequest(BaseModel):
    activity: str = Field(min_length=1)


class RecommendationOut(BaseModel):
    constraint: str
    condition: str
    priority: int


class PathOut(BaseModel):
    steps: list[tuple[str, str]]
    polarity: int
    impurity: float
    pos_samples: int
    neg_samples: int


class RecommendationResultOut(BaseModel):
    recommendations: list[RecommendationOut]
    chosen_path: PathOut
    rho: float
    fitness: float
    rv_snapshot: dict[str, str]


class SessionView(BaseModel):
    id: str
    prefix: list[str]
    created_at: str
    updated_at: str
    result: RecommendationResultOut | None = None
    error: str | None = None
    unknown_activities: list[str] = Field(default_factory=list)


class ModelInfo(BaseModel):
    dataset: str
    trained_at: str
    alphabet: list[str]
    families: list[str]
    lambda_weights: list[float]
    th_fit: float
    tree_depth: int
    path_count: int
    positive_path_count: int
    min_path_samples: int
