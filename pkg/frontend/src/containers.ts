/** Minimal readers for the .xmrc container and P5 graymaps.
 *
 * The client only ever needs to display things, so this parses just enough:
 * the 20-byte header for any kind, magnitudes of kind-1 images, mask cells,
 * and binary PGM error maps. No numerical processing happens here beyond
 * |z| per pixel.
 */

export const KIND_IMAGE = 1;
export const KIND_KSPACE = 2;
export const KIND_MULTICOIL_KSPACE = 3;
export const KIND_MASK = 4;
export const KIND_COILMAPS = 5;

export const HEADER_SIZE = 20;

const KIND_NAMES: Record<number, string> = {
  [KIND_IMAGE]: "image",
  [KIND_KSPACE]: "k-space",
  [KIND_MULTICOIL_KSPACE]: "multi-coil k-space",
  [KIND_MASK]: "mask",
  [KIND_COILMAPS]: "coil maps",
};

export function kindName(kind: number): string {
  return KIND_NAMES[kind] ?? `kind ${kind}`;
}

export interface ContainerHeader {
  kind: number;
  nc: number;
  ny: number;
  nx: number;
}

export function parseHeader(bytes: ArrayBuffer): ContainerHeader {
  if (bytes.byteLength < HEADER_SIZE) {
    throw new Error("container too short for a header");
  }
  const view = new DataView(bytes);
  const magic = String.fromCharCode(
    view.getUint8(0), view.getUint8(1), view.getUint8(2), view.getUint8(3),
  );
  if (magic !== "XMRC") {
    throw new Error(`bad magic ${JSON.stringify(magic)}`);
  }
  const version = view.getUint16(4, true);
  if (version !== 1) {
    throw new Error(`unsupported container version ${version}`);
  }
  return {
    kind: view.getUint8(6),
    nc: view.getUint32(8, true),
    ny: view.getUint32(12, true),
    nx: view.getUint32(16, true),
  };
}

export interface MagnitudeImage {
  ny: number;
  nx: number;
  values: Float64Array; // |z| per pixel, row-major
}

export function parseImageMagnitude(bytes: ArrayBuffer): MagnitudeImage {
  const header = parseHeader(bytes);
  if (header.kind !== KIND_IMAGE) {
    throw new Error(`expected an image container, got ${kindName(header.kind)}`);
  }
  const n = header.ny * header.nx;
  if (bytes.byteLength !== HEADER_SIZE + n * 8) {
    throw new Error("image payload length mismatch");
  }
  const samples = new Float32Array(bytes, HEADER_SIZE, n * 2);
  const values = new Float64Array(n);
  for (let i = 0; i < n; i++) {
    const re = samples[2 * i];
    const im = samples[2 * i + 1];
    values[i] = Math.hypot(re, im);
  }
  return { ny: header.ny, nx: header.nx, values };
}

export interface MaskCells {
  ny: number;
  nx: number;
  cells: Uint8Array;
}

export function parseMask(bytes: ArrayBuffer): MaskCells {
  const header = parseHeader(bytes);
  if (header.kind !== KIND_MASK) {
    throw new Error(`expected a mask container, got ${kindName(header.kind)}`);
  }
  const n = header.ny * header.nx;
  if (bytes.byteLength !== HEADER_SIZE + n) {
    throw new Error("mask payload length mismatch");
  }
  return { ny: header.ny, nx: header.nx, cells: new Uint8Array(bytes, HEADER_SIZE, n) };
}

export interface PgmImage {
  ny: number;
  nx: number;
  pixels: Uint8Array;
}

/** Binary PGM (P5), maxval 255, as produced by the service's error maps. */
export function parsePgm(bytes: ArrayBuffer): PgmImage {
  const raw = new Uint8Array(bytes);
  const headerText = new TextDecoder("ascii").decode(raw.subarray(0, 64));
  const match = /^P5\s+(\d+)\s+(\d+)\s+(\d+)\s/.exec(headerText);
  if (!match) {
    throw new Error("not a binary P5 graymap");
  }
  const [, w, h, maxval] = match;
  if (Number(maxval) !== 255) {
    throw new Error(`unsupported maxval ${maxval}`);
  }
  const nx = Number(w);
  const ny = Number(h);
  const offset = match[0].length;
  if (raw.length !== offset + ny * nx) {
    throw new Error("graymap payload length mismatch");
  }
  return { ny, nx, pixels: raw.subarray(offset) };
}
