// Report panels: heatmap, score distributions, and fusion trend. Each
// renders straight from one API response and shows an empty state when
// the service has nothing yet (404 on reports, empty csv for the trend).

import { ApiClient, ApiError } from "./api.js";
import { parseScoresCsv } from "./csv.js";
import { clear, el, fmt } from "./dom.js";
import type { ScoreCsvRow } from "./types.js";

function emptyState(root: HTMLElement, message: string): void {
  clear(root);
  root.append(el("p", { class: "empty" }, [message]));
}

export class HeatmapPanel {
  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
  ) {}

  async load(scenario?: string): Promise<void> {
    let view;
    try {
      view = await this.api.heatmap(scenario);
    } catch (error) {
      if (error instanceof ApiError && error.status === 404) {
        emptyState(this.root, "No samples to map yet.");
        return;
      }
      throw error;
    }
    clear(this.root);
    const head = el("tr", {}, [
      el("th", {}, ["algorithm"]),
      ...view.criteria.map((c) => el("th", {}, [c])),
    ]);
    const body = view.rows.map((row) =>
      el("tr", {}, [
        el("th", {}, [row.algorithm]),
        ...view.criteria.map((criterion) => {
          const value = row.normalized_means[criterion];
          const cell = el("td", {
            class: "heat-cell",
            title: `${criterion}: ${fmt(value, 2)}`,
          });
          // intensity is value/ms so the scale always spans the full range
          const intensity = Math.max(0, Math.min(1, value / view.ms));
          cell.style.backgroundColor = `rgba(31, 111, 235, ${intensity})`;
          cell.textContent = fmt(value, 0);
          return cell;
        }),
      ]),
    );
    this.root.append(
      el("h2", {}, ["Normalized criteria by algorithm"]),
      el("div", { class: "table-scroll" }, [
        el("table", { class: "heatmap" }, [head, ...body]),
      ]),
      el("p", { class: "scale-legend" }, [
        `scale 0 to ${fmt(view.ms, 0)}`,
      ]),
    );
  }
}

export class DistributionPanel {
  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
  ) {}

  async load(scenario?: string): Promise<void> {
    let view;
    try {
      view = await this.api.distribution(scenario);
    } catch (error) {
      if (error instanceof ApiError && error.status === 404) {
        emptyState(this.root, "No scores recorded yet.");
        return;
      }
      throw error;
    }
    clear(this.root);
    const head = el("tr", {}, [
      ...["algorithm", "variant", "min", "q1", "median", "q3", "max"].map(
        (name) => el("th", {}, [name]),
      ),
    ]);
    const body = view.rows.map((row) =>
      el("tr", { class: `dist-row dist-${row.algorithm}` }, [
        el("th", {}, [row.algorithm]),
        el("td", {}, [row.variant]),
        el("td", {}, [fmt(row.min)]),
        el("td", {}, [fmt(row.q1)]),
        el("td", {}, [fmt(row.median)]),
        el("td", {}, [fmt(row.q3)]),
        el("td", {}, [fmt(row.max)]),
      ]),
    );
    this.root.append(
      el("h2", {}, ["Score distributions"]),
      el("div", { class: "table-scroll" }, [
        el("table", { class: "distribution" }, [head, ...body]),
      ]),
    );
  }
}

const SVG_NS = "http://www.w3.org/2000/svg";
const WIDTH = 800;
const HEIGHT = 240;

export class TrendPanel {
  private rows: ScoreCsvRow[] = [];

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
  ) {}

  async load(): Promise<void> {
    const text = await this.api.scoresCsv();
    this.rows = parseScoresCsv(text);
    if (this.rows.length === 0) {
      emptyState(this.root, "No scores recorded yet.");
      return;
    }
    const algorithms = [...new Set(this.rows.map((r) => r.algorithm))].sort();
    clear(this.root);
    const select = el("select", { class: "trend-algorithm" });
    for (const name of algorithms) {
      select.append(el("option", { value: name }, [name]));
    }
    const chart = el("div", { class: "trend-chart" });
    select.addEventListener("change", () => this.draw(chart, select.value));
    this.root.append(
      el("h2", {}, ["Fusion trend"]),
      select,
      chart,
      el("p", { class: "trend-legend" }, [
        "analytic fusion, smoothed fusion, and the model estimate with its interval",
      ]),
    );
    this.draw(chart, algorithms[0]);
  }

  private draw(target: HTMLElement, algorithm: string): void {
    const series = this.rows.filter((r) => r.algorithm === algorithm);
    clear(target);
    if (series.length === 0) {
      target.append(el("p", { class: "empty" }, ["No rows."]));
      return;
    }
    const t0 = series[0].ts_ms;
    const t1 = series[series.length - 1].ts_ms;
    const spanMs = Math.max(1, t1 - t0);
    const x = (ts: number): number => ((ts - t0) / spanMs) * WIDTH;
    const y = (score: number): number =>
      HEIGHT - (Math.max(0, Math.min(100, score)) / 100) * HEIGHT;
    const path = (pick: (row: ScoreCsvRow) => number): string =>
      series.map((r) => `${x(r.ts_ms)},${y(pick(r))}`).join(" ");

    const svg = document.createElementNS(SVG_NS, "svg");
    svg.setAttribute("viewBox", `0 0 ${WIDTH} ${HEIGHT}`);
    svg.setAttribute("class", "trend-svg");

    // interval band: ml_hi forward, ml_lo backwards
    const band = document.createElementNS(SVG_NS, "polygon");
    const forward = series.map((r) => `${x(r.ts_ms)},${y(r.ml_hi)}`);
    const back = [...series]
      .reverse()
      .map((r) => `${x(r.ts_ms)},${y(r.ml_lo)}`);
    band.setAttribute("points", [...forward, ...back].join(" "));
    band.setAttribute("class", "trend-band");
    svg.append(band);

    for (const [cls, pick] of [
      ["trend-fusion", (r: ScoreCsvRow): number => r.qers_fusion],
      ["trend-smoothed", (r: ScoreCsvRow): number => r.smoothed_fusion],
      ["trend-ml", (r: ScoreCsvRow): number => r.ml_fusion],
    ] as const) {
      const line = document.createElementNS(SVG_NS, "polyline");
      line.setAttribute("points", path(pick));
      line.setAttribute("class", cls);
      line.setAttribute("fill", "none");
      svg.append(line);
    }
    target.append(svg);
  }
}
