import { describe, expect, it } from "vitest";
import { ApiClient } from "../src/api.js";
import { parseScoresCsv } from "../src/csv.js";
import { DistributionPanel, HeatmapPanel, TrendPanel } from "../src/views.js";
import {
  FixtureServer,
  fixture,
  fixtureText,
  recordedApi,
} from "./helpers.js";
import type { HeatmapResponse } from "../src/types.js";

function panelRoot(): HTMLElement {
  return document.createElement("div");
}

describe("HeatmapPanel", () => {
  it("renders one row per algorithm with a cell per criterion", async () => {
    const root = panelRoot();
    const api = new ApiClient("", recordedApi().fetch);
    await new HeatmapPanel(root, api).load();

    const view = fixture<HeatmapResponse>("heatmap.json");
    const rows = root.querySelectorAll("table.heatmap tr");
    expect(rows.length).toBe(1 + view.rows.length);
    const cells = root.querySelectorAll(".heat-cell");
    expect(cells.length).toBe(view.rows.length * view.criteria.length);
  });

  it("shades cells by normalized value on the configured scale", async () => {
    const root = panelRoot();
    const api = new ApiClient("", recordedApi().fetch);
    await new HeatmapPanel(root, api).load();

    expect(root.querySelector(".scale-legend")?.textContent).toBe(
      "scale 0 to 100",
    );
    const view = fixture<HeatmapResponse>("heatmap.json");
    const firstValue = view.rows[0].normalized_means[view.criteria[0]];
    const cell = root.querySelector<HTMLElement>(".heat-cell")!;
    const alpha = Number(
      cell.style.backgroundColor.match(/[\d.]+(?=\))/)?.[0],
    );
    expect(alpha).toBeCloseTo(firstValue / view.ms, 2);
    expect(cell.title).toContain(view.criteria[0]);
  });

  it("shows an empty state when the service has no samples", async () => {
    const server = new FixtureServer().json(
      "GET",
      /\/report\/heatmap(\?|$)/,
      "heatmap_empty.json",
      404,
    );
    const root = panelRoot();
    await new HeatmapPanel(root, new ApiClient("", server.fetch)).load();
    expect(root.querySelector(".empty")?.textContent).toBe(
      "No samples to map yet.",
    );
    expect(root.querySelector("table")).toBeNull();
  });
});

describe("DistributionPanel", () => {
  it("shows a five number summary for every algorithm", async () => {
    const root = panelRoot();
    const api = new ApiClient("", recordedApi().fetch);
    await new DistributionPanel(root, api).load();

    const names = [...root.querySelectorAll(".dist-row th")].map(
      (cell) => cell.textContent,
    );
    for (const algorithm of [
      "dilithium",
      "falcon",
      "kyber",
      "ntru",
      "sphincsplus",
    ]) {
      expect(names).toContain(algorithm);
    }
    const firstRow = root.querySelector(".dist-row")!;
    // variant plus min/q1/median/q3/max
    expect(firstRow.querySelectorAll("td").length).toBe(6);
  });

  it("shows an empty state on 404", async () => {
    const server = new FixtureServer().json(
      "GET",
      /\/report\/distribution(\?|$)/,
      "heatmap_empty.json",
      404,
    );
    const root = panelRoot();
    await new DistributionPanel(root, new ApiClient("", server.fetch)).load();
    expect(root.querySelector(".empty")).not.toBeNull();
  });
});

describe("TrendPanel", () => {
  it("draws band and series lines from the scores export", async () => {
    const root = panelRoot();
    const api = new ApiClient("", recordedApi().fetch);
    await new TrendPanel(root, api).load();

    const svg = root.querySelector("svg.trend-svg")!;
    expect(svg).not.toBeNull();
    expect(svg.querySelector("polygon.trend-band")).not.toBeNull();
    for (const cls of ["trend-fusion", "trend-smoothed", "trend-ml"]) {
      const line = svg.querySelector(`polyline.${cls}`)!;
      expect(line).not.toBeNull();
      expect(line.getAttribute("points")!.length).toBeGreaterThan(0);
    }
  });

  it("offers one selector entry per algorithm and redraws on change", async () => {
    const root = panelRoot();
    const api = new ApiClient("", recordedApi().fetch);
    await new TrendPanel(root, api).load();

    const select = root.querySelector<HTMLSelectElement>(".trend-algorithm")!;
    const rows = parseScoresCsv(fixtureText("scores_csv.csv"));
    const algorithms = [...new Set(rows.map((r) => r.algorithm))].sort();
    expect([...select.options].map((o) => o.value)).toEqual(algorithms);

    const before = root
      .querySelector("polyline.trend-fusion")!
      .getAttribute("points");
    select.value = algorithms[1];
    select.dispatchEvent(new Event("change"));
    const after = root
      .querySelector("polyline.trend-fusion")!
      .getAttribute("points");
    expect(after).not.toBe(before);
  });

  it("keeps every plotted point inside the 0..100 frame", async () => {
    const root = panelRoot();
    const api = new ApiClient("", recordedApi().fetch);
    await new TrendPanel(root, api).load();
    const points = root
      .querySelector("polyline.trend-fusion")!
      .getAttribute("points")!
      .split(" ")
      .map((pair) => pair.split(",").map(Number));
    for (const [px, py] of points) {
      expect(px).toBeGreaterThanOrEqual(0);
      expect(px).toBeLessThanOrEqual(800);
      expect(py).toBeGreaterThanOrEqual(0);
      expect(py).toBeLessThanOrEqual(240);
    }
  });

  it("shows an empty state when the export has no rows", async () => {
    const headerOnly = fixtureText("scores_csv.csv").split("\n")[0] + "\n";
    const headerFetch = (async () =>
      new Response(headerOnly, {
        status: 200,
        headers: { "content-type": "text/csv" },
      })) as typeof globalThis.fetch;
    const root = panelRoot();
    await new TrendPanel(root, new ApiClient("", headerFetch)).load();
    expect(root.querySelector(".empty")?.textContent).toBe(
      "No scores recorded yet.",
    );
  });
});

describe("scores csv parser", () => {
  it("reads the recorded export into typed rows", () => {
    const rows = parseScoresCsv(fixtureText("scores_csv.csv"));
    expect(rows.length).toBe(200);
    const first = rows[0];
    expect(first.device_id).toMatch(/^dev-/);
    expect(Number.isFinite(first.qers_fusion)).toBe(true);
    expect(Number.isFinite(first.ml_lo)).toBe(true);
    expect(first.ml_lo).toBeLessThanOrEqual(first.ml_hi);
    expect(["Excellent", "Good", "Moderate", "Poor", "Unusable"]).toContain(
      first.readiness,
    );
  });

  it("handles quoted fields with embedded separators", () => {
    const rows = parseScoresCsv(
      [
        "ts_ms,device_id,algorithm,scenario,qers_basic,qers_tuned,qers_fusion,smoothed_fusion,ml_fusion,ml_lo,ml_hi,readiness",
        '5,"dev,1",kyber,near,1,2,3,3,4,2,6,Poor',
      ].join("\n"),
    );
    expect(rows.length).toBe(1);
    expect(rows[0].device_id).toBe("dev,1");
    expect(rows[0].qers_fusion).toBe(3);
  });
});
