// Single-page shell: one tab strip, five panels, one shared API client.

import { ApiClient } from "./api.js";
import { LiveBoard } from "./board.js";
import { WhatIfConsole } from "./console.js";
import { el } from "./dom.js";
import { DistributionPanel, HeatmapPanel, TrendPanel } from "./views.js";

declare global {
  interface Window {
    QERS_API_BASE?: string;
  }
}

interface Tab {
  label: string;
  mount: (root: HTMLElement) => void | Promise<void>;
}

export function buildApp(root: HTMLElement, api: ApiClient): void {
  const strip = el("nav", { class: "tab-strip" });
  const body = el("main", { class: "tab-body" });
  root.append(strip, body);

  const tabs: Tab[] = [
    {
      label: "Live board",
      mount: (panel) => new LiveBoard(panel, api).start(),
    },
    {
      label: "Heatmap",
      mount: (panel) => new HeatmapPanel(panel, api).load(),
    },
    {
      label: "Distribution",
      mount: (panel) => new DistributionPanel(panel, api).load(),
    },
    {
      label: "Trend",
      mount: (panel) => new TrendPanel(panel, api).load(),
    },
    {
      label: "What-if",
      mount: (panel) => new WhatIfConsole(panel, api).init(),
    },
  ];

  const buttons = tabs.map((tab, index) => {
    const button = el("button", { class: "tab-button" }, [tab.label]);
    button.addEventListener("click", () => show(index));
    strip.append(button);
    return button;
  });

  const panels = tabs.map(() => {
    const panel = el("section", { class: "tab-panel", hidden: "" });
    body.append(panel);
    return panel;
  });
  const mounted = tabs.map(() => false);

  function show(index: number): void {
    buttons.forEach((button, i) => {
      button.className = i === index ? "tab-button selected" : "tab-button";
    });
    panels.forEach((panel, i) => {
      if (i === index) panel.removeAttribute("hidden");
      else panel.setAttribute("hidden", "");
    });
    if (!mounted[index]) {
      mounted[index] = true;
      void tabs[index].mount(panels[index]);
    }
  }

  show(0);
}

const appRoot = document.getElementById("app");
if (appRoot) {
  buildApp(appRoot, new ApiClient(window.QERS_API_BASE ?? ""));
}
