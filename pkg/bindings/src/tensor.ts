/**
 * The engine's binary tensor container (magic "CTP1"): 4-byte magic,
 * u8 version (=1), u8 dtype (0 = float32, 1 = float64), u8 ndim (1..4),
 * one zero byte, ndim little-endian u64 dims, row-major little-endian
 * payload. The binding writes float32 only (the engine's exchange
 * precision) but reads both dtypes.
 */

import { readFileSync, writeFileSync } from "node:fs";

const MAGIC = "CTP1";

export interface Tensor {
  data: Float32Array | Float64Array;
  shape: number[];
}

export function writeTensor(path: string, data: Float32Array, shape: number[]): void {
  if (shape.length < 1 || shape.length > 4) {
    throw new RangeError(`ndim must be 1..4, got ${shape.length}`);
  }
  const count = shape.reduce((a, b) => a * b, 1);
  if (count !== data.length) {
    throw new RangeError(
      `shape [${shape.join(", ")}] needs ${count} values, buffer has ${data.length}`,
    );
  }
  const header = Buffer.alloc(8 + 8 * shape.length);
  header.write(MAGIC, 0, "ascii");
  header.writeUInt8(1, 4); // version
  header.writeUInt8(0, 5); // dtype float32
  header.writeUInt8(shape.length, 6);
  header.writeUInt8(0, 7); // reserved
  shape.forEach((dim, i) => header.writeBigUInt64LE(BigInt(dim), 8 + 8 * i));

  const payload = Buffer.alloc(4 * data.length);
  for (let i = 0; i < data.length; i++) {
    payload.writeFloatLE(data[i], 4 * i);
  }
  writeFileSync(path, Buffer.concat([header, payload]));
}

export function readTensor(path: string): Tensor {
  const raw = readFileSync(path);
  if (raw.length < 8 || raw.toString("ascii", 0, 4) !== MAGIC) {
    throw new Error(`${path}: not a ${MAGIC} tensor file`);
  }
  const version = raw.readUInt8(4);
  const dtype = raw.readUInt8(5);
  const ndim = raw.readUInt8(6);
  if (version !== 1) throw new Error(`${path}: unsupported version ${version}`);
  if (dtype !== 0 && dtype !== 1) throw new Error(`${path}: unsupported dtype ${dtype}`);
  if (ndim < 1 || ndim > 4) throw new Error(`${path}: bad ndim ${ndim}`);
  const shape: number[] = [];
  for (let i = 0; i < ndim; i++) {
    shape.push(Number(raw.readBigUInt64LE(8 + 8 * i)));
  }
  const offset = 8 + 8 * ndim;
  const count = shape.reduce((a, b) => a * b, 1);
  const itemSize = dtype === 0 ? 4 : 8;
  if (raw.length - offset !== count * itemSize) {
    throw new Error(
      `${path}: payload mismatch, expected ${count * itemSize} bytes, got ${raw.length - offset}`,
    );
  }
  const data = dtype === 0 ? new Float32Array(count) : new Float64Array(count);
  for (let i = 0; i < count; i++) {
    data[i] = dtype === 0
      ? raw.readFloatLE(offset + 4 * i)
      : raw.readDoubleLE(offset + 8 * i);
  }
  return { data, shape };
}
