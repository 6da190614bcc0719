// Client-side preset validation mirroring the service's 422 rules, so
// obviously invalid slider states never leave the browser.

import type { PresetDict } from "./types.js";

// matches the service's weight-sum tolerance
export const WEIGHT_SUM_TOL = 1e-9;

export function validatePreset(preset: PresetDict): string | null {
  if (!preset.name) return "preset name must be non-empty";
  if (preset.kind === "basic" || preset.kind === "tuned") {
    const pairs: [string, number][] =
      preset.kind === "basic"
        ? [
            ["alpha", preset.alpha],
            ["beta", preset.beta],
            ["gamma", preset.gamma],
          ]
        : [
            ["alpha", preset.alpha],
            ["beta", preset.beta],
            ["gamma", preset.gamma],
            ["delta", preset.delta],
            ["epsilon", preset.epsilon],
            ["zeta", preset.zeta],
            ["eta", preset.eta],
          ];
    for (const [label, value] of pairs) {
      const bad = checkCoefficient(label, value);
      if (bad) return bad;
    }
    return null;
  }
  for (const [label, weights] of [
    ["performance_weights", preset.performance_weights],
    ["security_weights", preset.security_weights],
  ] as const) {
    let total = 0;
    for (const [criterion, value] of Object.entries(weights)) {
      const bad = checkCoefficient(criterion, value);
      if (bad) return bad;
      total += value;
    }
    if (Math.abs(total - 1) > WEIGHT_SUM_TOL) {
      return `${label} sums to ${round6(total)}, expected 1`;
    }
  }
  const shares = preset.performance_share + preset.security_share;
  if (preset.performance_share < 0 || preset.security_share < 0) {
    return "shares must be non-negative";
  }
  if (Math.abs(shares - 1) > WEIGHT_SUM_TOL) {
    return `shares sum to ${round6(shares)}, expected 1`;
  }
  return null;
}

function checkCoefficient(label: string, value: number): string | null {
  if (!Number.isFinite(value)) return `${label} must be a finite number`;
  if (value < 0) return `${label} must be non-negative`;
  return null;
}

function round6(value: number): string {
  return String(Math.round(value * 1e6) / 1e6);
}
