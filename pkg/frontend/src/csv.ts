// Minimal RFC-4180 reader for the scores.csv export. Device ids may be
// quoted (commas, quotes), so naive splitting is not safe.

import type { Readiness, ScoreCsvRow } from "./types.js";

export function parseCsv(text: string): string[][] {
  const rows: string[][] = [];
  let field = "";
  let row: string[] = [];
  let quoted = false;
  let i = 0;
  while (i < text.length) {
    const ch = text[i];
    if (quoted) {
      if (ch === '"') {
        if (text[i + 1] === '"') {
          field += '"';
          i += 2;
          continue;
        }
        quoted = false;
        i += 1;
        continue;
      }
      field += ch;
      i += 1;
      continue;
    }
    if (ch === '"' && field === "") {
      quoted = true;
      i += 1;
      continue;
    }
    if (ch === ",") {
      row.push(field);
      field = "";
      i += 1;
      continue;
    }
    if (ch === "\n" || ch === "\r") {
      if (ch === "\r" && text[i + 1] === "\n") i += 1;
      row.push(field);
      rows.push(row);
      field = "";
      row = [];
      i += 1;
      continue;
    }
    field += ch;
    i += 1;
  }
  if (field !== "" || row.length) {
    row.push(field);
    rows.push(row);
  }
  return rows;
}

export function parseScoresCsv(text: string): ScoreCsvRow[] {
  const rows = parseCsv(text);
  if (rows.length === 0) return [];
  const header = rows[0];
  const col = (name: string): number => {
    const index = header.indexOf(name);
    if (index < 0) throw new Error(`scores csv is missing column ${name}`);
    return index;
  };
  const ts = col("ts_ms");
  const device = col("device_id");
  const algorithm = col("algorithm");
  const scenario = col("scenario");
  const fusion = col("qers_fusion");
  const smoothed = col("smoothed_fusion");
  const ml = col("ml_fusion");
  const mlLo = col("ml_lo");
  const mlHi = col("ml_hi");
  const readiness = col("readiness");
  return rows.slice(1).map((fields) => ({
    ts_ms: Number(fields[ts]),
    device_id: fields[device],
    algorithm: fields[algorithm],
    scenario: fields[scenario],
    qers_fusion: Number(fields[fusion]),
    smoothed_fusion: Number(fields[smoothed]),
    ml_fusion: Number(fields[ml]),
    ml_lo: Number(fields[mlLo]),
    ml_hi: Number(fields[mlHi]),
    readiness: fields[readiness] as Readiness,
  }));
}
