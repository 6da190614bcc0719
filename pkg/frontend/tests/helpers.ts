// Test doubles: a fetch stub that serves recorded API responses and a
// hand-cranked EventSource. No live backend is involved anywhere.

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import type { EventSourceLike } from "../src/board.js";

const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), "fixtures");

export function fixture<T>(name: string): T {
  return JSON.parse(readFileSync(join(FIXTURES, name), "utf8")) as T;
}

export function fixtureText(name: string): string {
  return readFileSync(join(FIXTURES, name), "utf8");
}

interface Route {
  method: string;
  path: RegExp;
  status: number;
  body: string;
  contentType: string;
}

export interface LoggedRequest {
  method: string;
  url: string;
  body: unknown;
}

export class FixtureServer {
  private routes: Route[] = [];
  readonly requests: LoggedRequest[] = [];

  json(method: string, path: RegExp, name: string, status = 200): this {
    this.routes.push({
      method,
      path,
      status,
      body: fixtureText(name),
      contentType: "application/json",
    });
    return this;
  }

  text(method: string, path: RegExp, name: string, contentType: string): this {
    this.routes.push({
      method,
      path,
      status: 200,
      body: fixtureText(name),
      contentType,
    });
    return this;
  }

  get fetch(): typeof globalThis.fetch {
    return async (input, init) => {
      const url = String(input);
      const method = (init?.method ?? "GET").toUpperCase();
      let body: unknown = null;
      if (typeof init?.body === "string") {
        try {
          body = JSON.parse(init.body);
        } catch {
          body = init.body;
        }
      }
      this.requests.push({ method, url, body });
      // first match wins so tests can shadow a default route
      const route = this.routes.find(
        (r) => r.method === method && r.path.test(url),
      );
      if (!route) {
        return new Response(JSON.stringify({ detail: "not found" }), {
          status: 404,
          headers: { "content-type": "application/json" },
        });
      }
      return new Response(route.body, {
        status: route.status,
        headers: { "content-type": route.contentType },
      });
    };
  }

  requestsTo(pathPart: string): LoggedRequest[] {
    return this.requests.filter((r) => r.url.includes(pathPart));
  }
}

// standard wiring for tests that want the whole recorded API surface
export function recordedApi(): FixtureServer {
  return new FixtureServer()
    .json("GET", /\/api\/v1\/scores(\?|$)/, "scores.json")
    .json("POST", /\/api\/v1\/score\/preview$/, "preview_active.json")
    .json("GET", /\/api\/v1\/presets$/, "presets.json")
    .json("PUT", /\/api\/v1\/presets\/active$/, "activate_tuned_ec.json")
    .json("GET", /\/api\/v1\/report\/heatmap(\?|$)/, "heatmap.json")
    .json("GET", /\/api\/v1\/report\/distribution(\?|$)/, "distribution.json")
    .text("GET", /\/api\/v1\/scores\.csv$/, "scores_csv.csv", "text/csv");
}

type Listener = (event: MessageEvent) => void;

export class FakeEventSource implements EventSourceLike {
  static instances: FakeEventSource[] = [];

  readyState = 0;
  onerror: ((event: Event) => void) | null = null;
  onopen: ((event: Event) => void) | null = null;
  private listeners = new Map<string, Listener[]>();

  constructor(readonly url: string) {
    FakeEventSource.instances.push(this);
  }

  static reset(): void {
    FakeEventSource.instances = [];
  }

  static get latest(): FakeEventSource {
    const last = FakeEventSource.instances.at(-1);
    if (!last) throw new Error("no event source was opened");
    return last;
  }

  addEventListener(type: string, listener: Listener): void {
    const bucket = this.listeners.get(type) ?? [];
    bucket.push(listener);
    this.listeners.set(type, bucket);
  }

  close(): void {
    this.readyState = 2;
  }

  open(): void {
    this.readyState = 1;
    this.onopen?.(new Event("open"));
  }

  emit(type: string, data: string): void {
    const event = new MessageEvent(type, { data });
    for (const listener of this.listeners.get(type) ?? []) {
      listener(event);
    }
  }

  fail(terminal: boolean): void {
    this.readyState = terminal ? 2 : 0;
    this.onerror?.(new Event("error"));
  }
}
