// Display mapping for server-assigned readiness labels. The label itself
// always comes from the API; the client never re-derives it from scores.

import type { Readiness } from "./types.js";

export const READINESS_ORDER: Readiness[] = [
  "Excellent",
  "Good",
  "Moderate",
  "Poor",
  "Unusable",
];

const CLASSES: Record<Readiness, string> = {
  Excellent: "band-excellent",
  Good: "band-good",
  Moderate: "band-moderate",
  Poor: "band-poor",
  Unusable: "band-unusable",
};

export function readinessClass(label: Readiness): string {
  return CLASSES[label] ?? "band-unknown";
}
