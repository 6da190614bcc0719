// What-if weight console: pick a preset, drag coefficients, see the
// hypothetical aggregates next to the active ones, promote when happy.
// Previews are debounced and never sent while the weights are invalid.

import { ApiClient, ApiError } from "./api.js";
import { clear, el, fmt } from "./dom.js";
import type {
  AggregateRow,
  FusionPresetDict,
  PresetDict,
  PresetsResponse,
} from "./types.js";
import { validatePreset } from "./validation.js";

// UI contract: at least 250 ms of slider silence before a request
export const PREVIEW_DEBOUNCE_MS = 300;

// ["", field] for top-level coefficients, [vector, criterion] for
// fusion weight entries
type Path = ["" | "performance_weights" | "security_weights", string];

function coefficientPaths(preset: PresetDict): Path[] {
  if (preset.kind === "basic") {
    return [["", "alpha"], ["", "beta"], ["", "gamma"]];
  }
  if (preset.kind === "tuned") {
    return [
      ["", "alpha"], ["", "beta"], ["", "gamma"], ["", "delta"],
      ["", "epsilon"], ["", "zeta"], ["", "eta"],
    ];
  }
  return [
    ...Object.keys(preset.performance_weights).sort().map(
      (c): Path => ["performance_weights", c],
    ),
    ...Object.keys(preset.security_weights).sort().map(
      (c): Path => ["security_weights", c],
    ),
    ["", "performance_share"],
    ["", "security_share"],
  ];
}

function getAt(preset: PresetDict, path: Path): number {
  const [group, key] = path;
  if (group === "") {
    return (preset as unknown as Record<string, number>)[key];
  }
  return (preset as FusionPresetDict)[group][key];
}

function setAt(preset: PresetDict, path: Path, value: number): void {
  const [group, key] = path;
  if (group === "") {
    (preset as unknown as Record<string, number>)[key] = value;
  } else {
    (preset as FusionPresetDict)[group][key] = value;
  }
}

function pathLabel(path: Path): string {
  const [group, key] = path;
  if (group === "") return key;
  return `${group === "performance_weights" ? "perf" : "sec"}.${key}`;
}

export class WhatIfConsole {
  private catalog = new Map<string, PresetDict>();
  private active: PresetsResponse["active"] | null = null;
  private activeRows: AggregateRow[] = [];
  private working: PresetDict | null = null;
  private modified = false;
  private debounceTimer: ReturnType<typeof setTimeout> | null = null;

  private readonly select: HTMLSelectElement;
  private readonly activeBadge: HTMLSpanElement;
  private readonly sliders: HTMLDivElement;
  private readonly error: HTMLDivElement;
  private readonly comparison: HTMLDivElement;
  private readonly promote: HTMLButtonElement;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
  ) {
    this.select = el("select", { class: "console-preset" });
    this.activeBadge = el("span", { class: "active-badge" });
    this.sliders = el("div", { class: "console-sliders" });
    this.error = el("div", { class: "console-error", hidden: "" });
    this.comparison = el("div", { class: "console-comparison" });
    this.promote = el("button", { class: "console-promote" }, ["Promote"]);
    this.promote.disabled = true;
    this.promote.addEventListener("click", () => void this.promoteActive());
    this.select.addEventListener("change", () =>
      this.selectPreset(this.select.value),
    );
    this.root.append(
      el("div", { class: "panel-header" }, [
        el("h2", {}, ["What-if console"]),
        this.activeBadge,
      ]),
      el("div", { class: "console-controls" }, [this.select, this.promote]),
      this.sliders,
      this.error,
      this.comparison,
    );
  }

  async init(): Promise<void> {
    const [presets, scores] = await Promise.all([
      this.api.presets(),
      this.api.scores(),
    ]);
    this.catalog = new Map(presets.presets.map((p) => [p.name, p]));
    this.active = presets.active;
    this.activeRows = scores.rows;
    clear(this.select);
    for (const preset of presets.presets) {
      this.select.append(el("option", { value: preset.name }, [preset.name]));
    }
    this.renderActiveBadge();
    this.selectPreset(presets.active.fusion);
  }

  selectPreset(name: string): void {
    const preset = this.catalog.get(name);
    if (!preset) return;
    this.select.value = name;
    this.working = structuredClone(preset);
    this.modified = false;
    this.hideError();
    this.renderSliders();
    this.updatePromote();
    this.schedulePreview();
  }

  private renderSliders(): void {
    clear(this.sliders);
    if (!this.working) return;
    for (const path of coefficientPaths(this.working)) {
      const value = getAt(this.working, path);
      const input = el("input", {
        type: "range",
        min: "0",
        max: "1",
        step: "0.005",
        "data-key": pathLabel(path),
        class: "coef-slider",
      });
      input.value = String(value);
      const readout = el("span", { class: "coef-value" }, [fmt(value, 3)]);
      input.addEventListener("input", () => {
        const next = Number(input.value);
        readout.textContent = fmt(next, 3);
        this.onSliderChange(path, next);
      });
      this.sliders.append(
        el("label", { class: "coef-row" }, [
          el("span", { class: "coef-name" }, [pathLabel(path)]),
          input,
          readout,
        ]),
      );
    }
  }

  private onSliderChange(path: Path, value: number): void {
    if (!this.working) return;
    setAt(this.working, path, value);
    const original = this.catalog.get(this.working.name);
    this.modified =
      !original || JSON.stringify(original) !== JSON.stringify(this.working);
    this.updatePromote();
    const problem = validatePreset(this.working);
    if (problem) {
      // invalid states never reach the network
      this.showError(problem);
      if (this.debounceTimer) {
        clearTimeout(this.debounceTimer);
        this.debounceTimer = null;
      }
      return;
    }
    this.hideError();
    this.schedulePreview();
  }

  private schedulePreview(): void {
    if (this.debounceTimer) clearTimeout(this.debounceTimer);
    this.debounceTimer = setTimeout(() => {
      this.debounceTimer = null;
      void this.runPreview();
    }, PREVIEW_DEBOUNCE_MS);
  }

  private async runPreview(): Promise<void> {
    if (!this.working) return;
    let body;
    try {
      body = await this.api.preview({ preset: this.working });
    } catch (error) {
      if (error instanceof ApiError && error.status === 422) {
        this.showError(error.detail);
        return;
      }
      throw error;
    }
    this.renderComparison(body.rows, body.preset);
  }

  private renderComparison(previewRows: AggregateRow[], preset: string): void {
    clear(this.comparison);
    const activeByKey = new Map(
      this.activeRows.map((row) => [`${row.algorithm}/${row.scenario}`, row]),
    );
    const head = el("tr", {}, [
      ...["algorithm", "scenario", "active", preset, "delta"].map((name) =>
        el("th", {}, [name]),
      ),
    ]);
    const body = previewRows.map((row) => {
      const key = `${row.algorithm}/${row.scenario}`;
      const activeRow = activeByKey.get(key);
      const active = activeRow ? activeRow.fusion_mean : NaN;
      const delta = row.fusion_mean - active;
      const deltaCell = el(
        "td",
        {
          class: Math.abs(delta) < 0.05 ? "delta delta-zero" : "delta",
        },
        [Number.isNaN(delta) ? "n/a" : fmt(delta)],
      );
      return el("tr", {}, [
        el("th", {}, [row.algorithm]),
        el("td", {}, [row.scenario]),
        el("td", {}, [Number.isNaN(active) ? "n/a" : fmt(active)]),
        el("td", {}, [fmt(row.fusion_mean)]),
        deltaCell,
      ]);
    });
    this.comparison.append(
      el("div", { class: "table-scroll" }, [
        el("table", { class: "comparison" }, [head, ...body]),
      ]),
    );
  }

  private async promoteActive(): Promise<void> {
    if (!this.working || this.modified) return;
    const body = await this.api.activatePreset(this.working.name);
    this.active = body.active as PresetsResponse["active"];
    this.renderActiveBadge();
    const scores = await this.api.scores();
    this.activeRows = scores.rows;
    this.schedulePreview();
  }

  private updatePromote(): void {
    // the activation endpoint takes catalog names, so edited weights
    // cannot be promoted until they are saved as a config preset
    this.promote.disabled = this.modified || !this.working;
    this.promote.title = this.modified
      ? "edited weights cannot be promoted; pick an unmodified preset"
      : "make this preset active";
  }

  private renderActiveBadge(): void {
    if (!this.active) return;
    this.activeBadge.textContent =
      `active: ${this.active.basic} + ${this.active.tuned} + ${this.active.fusion}`;
  }

  private showError(message: string): void {
    this.error.textContent = message;
    this.error.removeAttribute("hidden");
  }

  private hideError(): void {
    this.error.textContent = "";
    this.error.setAttribute("hidden", "");
  }
}
