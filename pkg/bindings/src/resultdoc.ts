/** Parsed form of the engine's ordered-key JSON result document. */

export interface GridDims {
  height: number;
  width: number;
  frames: number;
}

export interface EngineConfig {
  retain: number;
  pivots: number;
  channels: number;
  bss_strength: number;
  tau0: number;
  dtau: number;
  batch: number;
  blend: number;
  eps: number;
  raw_swa_weights: boolean;
}

export interface TraceEntry {
  index: number;
  order: number;
  stage: "pivot" | "greedy";
  loop: number;
  tau_at_accept: number | null;
}

export interface ResultDocument {
  format: string;
  format_version: number;
  engine_version: string;
  grid: GridDims;
  config: EngineConfig;
  trace: TraceEntry[];
  clusters: Record<string, number[]>;
  metrics: Record<string, unknown> | null;
}

export const RESULT_FORMAT = "centriprune/result";

export function parseResultDocument(text: string): ResultDocument {
  const doc = JSON.parse(text) as ResultDocument;
  if (doc.format !== RESULT_FORMAT) {
    throw new Error(`not a result document (format=${String(doc.format)})`);
  }
  if (doc.format_version !== 1) {
    throw new Error(`unsupported format_version ${String(doc.format_version)}`);
  }
  return doc;
}

/** Retained token ids in selection order. */
export function traceIndices(doc: ResultDocument): number[] {
  return doc.trace.map((e) => e.index);
}
