import { mkdtempSync, readFileSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import path from "node:path";

import { afterAll, describe, expect, it } from "vitest";

import { readTensor, writeTensor } from "../src/tensor.js";

const FIXTURES = path.resolve(__dirname, "../../tests/fixtures");
const dir = mkdtempSync(path.join(tmpdir(), "ctpnode-"));

afterAll(() => rmSync(dir, { recursive: true, force: true }));

describe("tensor container", () => {
  it("round-trips float32 buffers bit-exactly", () => {
    const data = Float32Array.from({ length: 24 }, (_, i) => Math.sin(i) * 3.7);
    const file = path.join(dir, "rt.ctp");
    writeTensor(file, data, [4, 6]);
    const back = readTensor(file);
    expect(back.shape).toEqual([4, 6]);
    expect(Buffer.from((back.data as Float32Array).buffer)).toEqual(
      Buffer.from(data.buffer),
    );
  });

  it("reads the committed engine-written fixture", () => {
    const hidden = readTensor(path.join(FIXTURES, "scene-24x24", "hidden.ctp"));
    expect(hidden.shape).toEqual([576, 64]);
    expect(hidden.data).toBeInstanceOf(Float32Array);
    expect(Number.isFinite(hidden.data[0])).toBe(true);
  });

  it("reads float64 tensors", () => {
    // committed golden updated-hidden is float32; craft a float64 one by header
    const f64 = path.join(dir, "f64.ctp");
    const header = Buffer.alloc(8 + 16);
    header.write("CTP1", 0, "ascii");
    header.writeUInt8(1, 4);
    header.writeUInt8(1, 5); // float64
    header.writeUInt8(2, 6);
    header.writeBigUInt64LE(2n, 8);
    header.writeBigUInt64LE(2n, 16);
    const payload = Buffer.alloc(32);
    [1.5, -2.25, 3.125, 0.5].forEach((v, i) => payload.writeDoubleLE(v, 8 * i));
    writeFileSync(f64, Buffer.concat([header, payload]));
    const back = readTensor(f64);
    expect(back.data).toBeInstanceOf(Float64Array);
    expect(Array.from(back.data)).toEqual([1.5, -2.25, 3.125, 0.5]);
  });

  it("rejects mismatched shapes on write", () => {
    expect(() => writeTensor(path.join(dir, "x.ctp"), new Float32Array(5), [2, 3]))
      .toThrow(/needs 6 values/);
  });

  it("rejects truncated files on read", () => {
    const file = path.join(dir, "trunc.ctp");
    writeTensor(file, new Float32Array(8), [8]);
    const raw = readFileSync(file);
    writeFileSync(file, raw.subarray(0, raw.length - 4));
    expect(() => readTensor(file)).toThrow(/payload mismatch/);
  });

  it("rejects foreign magic", () => {
    const file = path.join(dir, "bad.ctp");
    writeFileSync(file, Buffer.from("JUNKJUNKJUNK"));
    expect(() => readTensor(file)).toThrow(/not a CTP1/);
  });
});
