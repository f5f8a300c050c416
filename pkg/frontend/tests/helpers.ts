/** Byte builders mirroring the server's container layout, for parser tests. */

export function buildHeader(kind: number, nc: number, ny: number, nx: number): DataView {
  const bytes = new ArrayBuffer(20);
  const view = new DataView(bytes);
  view.setUint8(0, "X".charCodeAt(0));
  view.setUint8(1, "M".charCodeAt(0));
  view.setUint8(2, "R".charCodeAt(0));
  view.setUint8(3, "C".charCodeAt(0));
  view.setUint16(4, 1, true);
  view.setUint8(6, kind);
  view.setUint8(7, 0);
  view.setUint32(8, nc, true);
  view.setUint32(12, ny, true);
  view.setUint32(16, nx, true);
  return view;
}

export function buildImageContainer(ny: number, nx: number, re: number[], im: number[]): ArrayBuffer {
  const n = ny * nx;
  const out = new ArrayBuffer(20 + n * 8);
  new Uint8Array(out).set(new Uint8Array(buildHeader(1, 1, ny, nx).buffer), 0);
  const samples = new Float32Array(out, 20, n * 2);
  for (let i = 0; i < n; i++) {
    samples[2 * i] = re[i];
    samples[2 * i + 1] = im[i];
  }
  return out;
}

export function buildMaskContainer(ny: number, nx: number, cells: number[]): ArrayBuffer {
  const out = new ArrayBuffer(20 + ny * nx);
  new Uint8Array(out).set(new Uint8Array(buildHeader(4, 1, ny, nx).buffer), 0);
  new Uint8Array(out, 20).set(cells);
  return out;
}

export function buildPgm(ny: number, nx: number, pixels: number[]): ArrayBuffer {
  const header = new TextEncoder().encode(`P5\n${nx} ${ny}\n255\n`);
  const out = new Uint8Array(header.length + pixels.length);
  out.set(header, 0);
  out.set(pixels, header.length);
  return out.buffer;
}

export function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}
