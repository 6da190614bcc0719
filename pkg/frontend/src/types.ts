// Response shapes of the /api/v1 endpoints this dashboard consumes.

export type Readiness =
  | "Excellent"
  | "Good"
  | "Moderate"
  | "Poor"
  | "Unusable";

export interface AggregateRow {
  algorithm: string;
  scenario: string;
  count: number;
  basic_mean: number;
  basic_median: number;
  tuned_mean: number;
  tuned_median: number;
  fusion_mean: number;
  fusion_median: number;
  readiness: Readiness;
  ml_mean: number;
  ml_lo_mean: number;
  ml_hi_mean: number;
  smoothed_last: number;
}

export interface ScoresResponse {
  rows: AggregateRow[];
  count: number;
  recomputed: boolean;
}

export interface PreviewResponse {
  rows: AggregateRow[];
  count: number;
  preview: true;
  preset: string;
}

export interface BasicPresetDict {
  name: string;
  kind: "basic";
  alpha: number;
  beta: number;
  gamma: number;
}

export interface TunedPresetDict {
  name: string;
  kind: "tuned";
  alpha: number;
  beta: number;
  gamma: number;
  delta: number;
  epsilon: number;
  zeta: number;
  eta: number;
}

export interface FusionPresetDict {
  name: string;
  kind: "fusion";
  performance_weights: Record<string, number>;
  security_weights: Record<string, number>;
  performance_share: number;
  security_share: number;
  security_directions?: Record<string, "cost" | "benefit">;
}

export type PresetDict = BasicPresetDict | TunedPresetDict | FusionPresetDict;

export interface PresetsResponse {
  presets: PresetDict[];
  active: { basic: string; tuned: string; fusion: string };
}

export interface PreviewRequest {
  preset: string | PresetDict;
  algorithm?: string;
  scenario?: string;
  window?: number;
  metric_overrides?: Record<string, number>;
}

export interface HeatmapRow {
  algorithm: string;
  count: number;
  normalized_means: Record<string, number>;
  qers_basic: number;
  qers_tuned: number;
  qers_fusion: number;
}

export interface HeatmapResponse {
  criteria: string[];
  rows: HeatmapRow[];
  ms: number;
}

export interface DistributionRow {
  algorithm: string;
  variant: "basic" | "tuned" | "fusion";
  count: number;
  min: number;
  q1: number;
  median: number;
  q3: number;
  max: number;
}

export interface DistributionResponse {
  rows: DistributionRow[];
}

// One row of the scores.csv export; numbers the trend view plots.
export interface ScoreCsvRow {
  ts_ms: number;
  device_id: string;
  algorithm: string;
  scenario: string;
  qers_fusion: number;
  smoothed_fusion: number;
  ml_fusion: number;
  ml_lo: number;
  ml_hi: number;
  readiness: Readiness;
}

// data: payload of an SSE "score" event.
export interface StreamScore {
  record_id: number;
  sample: {
    ts_ms: number;
    device_id: string;
    algorithm: string;
    scenario: string;
    [metric: string]: number | string;
  };
  qers_basic: number;
  qers_tuned: number;
  qers_fusion: number;
  readiness: Readiness;
  smoothed_fusion: number;
  ml_fusion: number;
  ml_lo: number;
  ml_hi: number;
  preset: string;
}
