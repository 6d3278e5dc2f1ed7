// Wire types mirroring the service JSON contract. The UI performs no
// temporal-logic computation: everything rendered comes from these fields.

export interface Recommendation {
  constraint: string;
  condition: string;
  priority: number;
}

export interface ChosenPath {
  steps: [string, string][];
  polarity: number;
  impurity: number;
  pos_samples: number;
  neg_samples: number;
}

export interface RecommendationResult {
  recommendations: Recommendation[];
  chosen_path: ChosenPath;
  rho: number;
  fitness: number;
  rv_snapshot: Record<string, string>;
  unknown_activities?: string[];
  warning?: string;
}

export interface SessionView {
  id: string;
  prefix: string[];
  created_at: string;
  updated_at: string;
  result: RecommendationResult | null;
  error: string | null;
  unknown_activities: string[];
}

export interface ModelInfo {
  dataset: string;
  trained_at: string;
  alphabet: string[];
  families: string[];
  lambda_weights: number[];
  th_fit: number;
  tree_depth: number;
  path_count: number;
  positive_path_count: number;
  min_path_samples: number;
}

export type ProbeClassification = "would-resolve" | "would-appear" | "may-become-unrecoverable";

export interface WhatIfProbe {
  candidateActivity: string;
  result: RecommendationResult;
  deltas: { constraint: string; kind: ProbeClassification }[];
  flaggedUnknown: boolean;
}
