/**
 * Node entry points for the token pruning engine.
 *
 * `prune` is the buffer-level call: flat float32 hidden/key buffers with
 * explicit dims plus a config struct mirroring the engine's tunables
 * field-for-field. Transport is the engine's file protocol (temp tensor
 * files and one CLI invocation); outputs come back as caller-owned copies,
 * with the cluster map encoded as two parallel index arrays.
 *
 * `pruneViaFiles` is the caller-managed-file variant: point it at existing
 * tensor files and get the parsed result document back.
 */

import { mkdtempSync, readFileSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import path from "node:path";

import { runEngine } from "./engine.js";
import {
  parseResultDocument,
  ResultDocument,
  TraceEntry,
  traceIndices,
} from "./resultdoc.js";
import { readTensor, writeTensor } from "./tensor.js";

export * from "./errors.js";
export { discoverEngine, engineVersion, resetEngineCache } from "./engine.js";
export { parseResultDocument, traceIndices } from "./resultdoc.js";
export type { EngineConfig, GridDims, ResultDocument, TraceEntry } from "./resultdoc.js";
export { readTensor, writeTensor } from "./tensor.js";

/** Engine tunables, mirrored field-for-field in declaration order. */
export interface PruneConfig {
  retain: number;
  pivots?: number;
  channels?: number;
  bssStrength?: number;
  tau0?: number;
  dtau?: number;
  batch?: number;
  blend?: number;
  eps?: number;
  rawSwaWeights?: boolean;
}

export interface PruneRequest {
  hidden: Float32Array;
  keys: Float32Array;
  n: number;
  d: number;
  dk: number;
  grid: { height: number; width: number; frames?: number };
  config: PruneConfig;
}

/** Discarded-to-retained ownership as two parallel index arrays. */
export interface ClusterArrays {
  owners: Int32Array;
  members: Int32Array;
}

export interface PruneOutput {
  /** Retained token ids in selection order. */
  indices: number[];
  trace: TraceEntry[];
  clusters: ClusterArrays;
  /** Blended hidden states, trace order, length indices.length * d. */
  updatedHidden: Float32Array;
  document: ResultDocument;
}

function gridFlag(grid: PruneRequest["grid"]): string {
  const frames = grid.frames ?? 1;
  return frames > 1
    ? `${grid.height}x${grid.width}x${frames}`
    : `${grid.height}x${grid.width}`;
}

function configFlags(config: PruneConfig): string[] {
  const flags: string[] = ["--retain", String(config.retain)];
  const push = (flag: string, value: number | undefined) => {
    if (value !== undefined) flags.push(flag, String(value));
  };
  push("--pivots", config.pivots);
  push("--q", config.channels);
  push("--lambda", config.bssStrength);
  push("--tau0", config.tau0);
  push("--dtau", config.dtau);
  push("--batch", config.batch);
  push("--beta", config.blend);
  push("--eps", config.eps);
  if (config.rawSwaWeights) flags.push("--raw-swa-weights");
  return flags;
}

function toClusterArrays(doc: ResultDocument): ClusterArrays {
  const owners: number[] = [];
  const members: number[] = [];
  for (const entry of doc.trace) {
    for (const u of doc.clusters[String(entry.index)] ?? []) {
      owners.push(entry.index);
      members.push(u);
    }
  }
  return { owners: Int32Array.from(owners), members: Int32Array.from(members) };
}

/** Expand the parallel-array encoding into a Map. */
export function clustersToMap(clusters: ClusterArrays): Map<number, number[]> {
  const map = new Map<number, number[]>();
  for (let i = 0; i < clusters.owners.length; i++) {
    const owner = clusters.owners[i];
    const bucket = map.get(owner);
    if (bucket) {
      bucket.push(clusters.members[i]);
    } else {
      map.set(owner, [clusters.members[i]]);
    }
  }
  return map;
}

export function prune(request: PruneRequest): PruneOutput {
  const { hidden, keys, n, d, dk } = request;
  if (hidden.length !== n * d) {
    throw new RangeError(`hidden buffer has ${hidden.length} values, expected ${n * d}`);
  }
  if (keys.length !== n * dk) {
    throw new RangeError(`keys buffer has ${keys.length} values, expected ${n * dk}`);
  }
  const frames = request.grid.frames ?? 1;
  if (request.grid.height * request.grid.width * frames !== n) {
    throw new RangeError(
      `grid ${gridFlag(request.grid)} declares ` +
        `${request.grid.height * request.grid.width * frames} tokens, buffers carry ${n}`,
    );
  }

  const dir = mkdtempSync(path.join(tmpdir(), "centriprune-"));
  try {
    const hiddenPath = path.join(dir, "hidden.ctp");
    const keysPath = path.join(dir, "keys.ctp");
    const outPath = path.join(dir, "result.json");
    const updatedPath = path.join(dir, "updated.ctp");
    writeTensor(hiddenPath, hidden, [n, d]);
    writeTensor(keysPath, keys, [n, dk]);

    runEngine([
      "prune",
      "--hidden", hiddenPath,
      "--keys", keysPath,
      "--grid", gridFlag(request.grid),
      ...configFlags(request.config),
      "--out", outPath,
      "--updated-hidden", updatedPath,
    ]);

    const doc = parseResultDocument(readFileSync(outPath, "utf-8"));
    const updated = readTensor(updatedPath);
    return {
      indices: traceIndices(doc),
      trace: doc.trace,
      clusters: toClusterArrays(doc),
      updatedHidden: Float32Array.from(updated.data),
      document: doc,
    };
  } finally {
    rmSync(dir, { recursive: true, force: true });
  }
}

export interface PruneFilePaths {
  hidden: string;
  keys: string;
}

export interface PruneViaFilesOptions {
  /** Keep the result document here instead of a temp file. */
  outPath?: string;
  /** Also write the blended hidden states here. */
  updatedHiddenPath?: string;
}

export function pruneViaFiles(
  paths: PruneFilePaths,
  grid: PruneRequest["grid"],
  config: PruneConfig,
  options: PruneViaFilesOptions = {},
): ResultDocument {
  const dir = options.outPath ? null : mkdtempSync(path.join(tmpdir(), "centriprune-"));
  const outPath = options.outPath ?? path.join(dir as string, "result.json");
  try {
    const args = [
      "prune",
      "--hidden", paths.hidden,
      "--keys", paths.keys,
      "--grid", gridFlag(grid),
      ...configFlags(config),
      "--out", outPath,
    ];
    if (options.updatedHiddenPath) {
      args.push("--updated-hidden", options.updatedHiddenPath);
    }
    runEngine(args);
    return parseResultDocument(readFileSync(outPath, "utf-8"));
  } finally {
    if (dir) rmSync(dir, { recursive: true, force: true });
  }
}
