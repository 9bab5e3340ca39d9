/**
 * Engine process discovery and invocation.
 *
 * Discovery order: the CENTRIPRUNE_BIN environment variable, the
 * `centriprune` executable on PATH, then `python3 -m centriprune`.
 * The first candidate that answers the version handshake wins and is
 * cached for the process lifetime.
 */

import { spawnSync } from "node:child_process";

import { EngineNotFoundError, mapExitCode } from "./errors.js";

export interface EngineCommand {
  cmd: string;
  prefixArgs: string[];
}

export interface RunResult {
  exitCode: number;
  stdout: string;
  stderr: string;
}

let cached: EngineCommand | null = null;

function candidates(): EngineCommand[] {
  const out: EngineCommand[] = [];
  const env = process.env.CENTRIPRUNE_BIN;
  if (env) {
    out.push({ cmd: env, prefixArgs: [] });
    return out; // explicit override: no silent fallback
  }
  out.push({ cmd: "centriprune", prefixArgs: [] });
  out.push({ cmd: "python3", prefixArgs: ["-m", "centriprune"] });
  return out;
}

function tryVersion(command: EngineCommand): string | null {
  const res = spawnSync(command.cmd, [...command.prefixArgs, "--version"], {
    encoding: "utf-8",
  });
  if (res.error || res.status !== 0) return null;
  const m = /centriprune (\d+\.\d+\.\d+)/.exec(res.stdout);
  return m ? m[1] : null;
}

export function discoverEngine(): EngineCommand {
  if (cached) return cached;
  for (const candidate of candidates()) {
    if (tryVersion(candidate) !== null) {
      cached = candidate;
      return candidate;
    }
  }
  throw new EngineNotFoundError(
    "no working engine found (tried CENTRIPRUNE_BIN, `centriprune`, `python3 -m centriprune`)",
  );
}

/** Reset discovery (used by tests that play with CENTRIPRUNE_BIN). */
export function resetEngineCache(): void {
  cached = null;
}

/** Version handshake: the engine's semver string. */
export function engineVersion(): string {
  const command = discoverEngine();
  const version = tryVersion(command);
  if (version === null) {
    throw new EngineNotFoundError("engine stopped answering the version handshake");
  }
  return version;
}

/** Run one engine invocation; throws a typed error on nonzero exit. */
export function runEngine(args: string[]): RunResult {
  const command = discoverEngine();
  const res = spawnSync(command.cmd, [...command.prefixArgs, ...args], {
    encoding: "utf-8",
    maxBuffer: 64 * 1024 * 1024,
  });
  if (res.error) {
    throw new EngineNotFoundError(`failed to spawn engine: ${res.error.message}`);
  }
  const exitCode = res.status ?? 1;
  if (exitCode !== 0) {
    throw mapExitCode(exitCode, res.stderr ?? "");
  }
  return { exitCode, stdout: res.stdout ?? "", stderr: res.stderr ?? "" };
}
