// Live score board: aggregate bars per algorithm/scenario, fed by the
// SSE stream. Numbers are rendered verbatim from /scores responses.

import type { ApiClient } from "./api.js";
import { clear, el, fmt } from "./dom.js";
import { readinessClass } from "./readiness.js";
import type { AggregateRow } from "./types.js";

export interface EventSourceLike {
  addEventListener(type: string, listener: (event: MessageEvent) => void): void;
  close(): void;
  onerror: ((event: Event) => void) | null;
  onopen: ((event: Event) => void) | null;
  readyState: number;
}

export type StreamFactory = (url: string) => EventSourceLike;

const CLOSED = 2;
// collapse bursts of score events into one aggregate refetch
export const REFRESH_THROTTLE_MS = 250;
const RECONNECT_BASE_MS = 1000;
const RECONNECT_CAP_MS = 30_000;

export class LiveBoard {
  private stream: EventSourceLike | null = null;
  private refreshTimer: ReturnType<typeof setTimeout> | null = null;
  private reconnectTimer: ReturnType<typeof setTimeout> | null = null;
  private reconnectDelay = RECONNECT_BASE_MS;
  private readonly status: HTMLSpanElement;
  private readonly table: HTMLDivElement;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
    private readonly streamFactory: StreamFactory = (url) =>
      new EventSource(url),
  ) {
    this.status = el("span", { class: "stream-status", role: "status" });
    this.table = el("div", { class: "board-rows" });
    const header = el("div", { class: "panel-header" }, [
      el("h2", {}, ["Live scores"]),
      this.status,
    ]);
    this.root.append(header, this.table);
  }

  async start(): Promise<void> {
    this.connect();
    await this.refresh();
  }

  stop(): void {
    if (this.stream) this.stream.close();
    this.stream = null;
    if (this.refreshTimer) clearTimeout(this.refreshTimer);
    if (this.reconnectTimer) clearTimeout(this.reconnectTimer);
  }

  private connect(): void {
    this.stream = this.streamFactory(this.api.streamUrl());
    this.stream.onopen = () => this.markLive();
    this.stream.onerror = () => {
      // the browser keeps retrying while CONNECTING; only a closed
      // stream needs a manual reconnect with backoff
      this.markStale();
      if (this.stream && this.stream.readyState === CLOSED) {
        this.scheduleReconnect();
      }
    };
    this.stream.addEventListener("score", () => {
      this.markLive();
      this.scheduleRefresh();
    });
  }

  private scheduleReconnect(): void {
    if (this.reconnectTimer) return;
    this.reconnectTimer = setTimeout(() => {
      this.reconnectTimer = null;
      this.reconnectDelay = Math.min(
        this.reconnectDelay * 2,
        RECONNECT_CAP_MS,
      );
      this.connect();
    }, this.reconnectDelay);
  }

  private scheduleRefresh(): void {
    if (this.refreshTimer) return;
    this.refreshTimer = setTimeout(() => {
      this.refreshTimer = null;
      void this.refresh();
    }, REFRESH_THROTTLE_MS);
  }

  private markLive(): void {
    this.reconnectDelay = RECONNECT_BASE_MS;
    this.status.textContent = "live";
    this.status.className = "stream-status live";
  }

  private markStale(): void {
    this.status.textContent = "stale";
    this.status.className = "stream-status stale";
  }

  async refresh(): Promise<void> {
    const body = await this.api.scores();
    this.render(body.rows);
  }

  render(rows: AggregateRow[]): void {
    clear(this.table);
    if (rows.length === 0) {
      this.table.append(el("p", { class: "empty" }, ["No samples yet."]));
      return;
    }
    for (const row of rows) {
      const group = el("div", { class: "board-row" }, [
        el("div", { class: "board-label" }, [
          el("strong", {}, [row.algorithm]),
          el("span", { class: "scenario" }, [row.scenario]),
          el(
            "span",
            { class: `readiness ${readinessClass(row.readiness)}` },
            [row.readiness],
          ),
          el("span", { class: "count" }, [`${row.count} samples`]),
        ]),
        bar("basic", row.basic_mean),
        bar("tuned", row.tuned_mean),
        bar("fusion", row.fusion_mean, readinessClass(row.readiness)),
      ]);
      this.table.append(group);
    }
  }
}

function bar(label: string, value: number, bandClass = ""): HTMLElement {
  const width = Math.max(0, Math.min(100, value));
  const fill = el("div", { class: `bar-fill ${bandClass}`.trim() });
  fill.style.width = `${width}%`;
  return el("div", { class: `bar bar-${label}` }, [
    el("span", { class: "bar-name" }, [label]),
    el("div", { class: "bar-track" }, [fill]),
    el("span", { class: "bar-value" }, [fmt(value)]),
  ]);
}
