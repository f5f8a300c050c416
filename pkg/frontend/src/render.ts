/** Display helpers: grayscale conversion and the iterate-change sparkline.
 *
 * The only arithmetic allowed here is display scaling (per-image max to
 * 255); all quality numbers shown in the UI come from the server.
 */

export function toGrayscaleRgba(values: ArrayLike<number>): Uint8ClampedArray {
  let peak = 0;
  for (let i = 0; i < values.length; i++) {
    const v = values[i];
    if (v > peak) peak = v;
  }
  const scale = peak > 0 ? 255 / peak : 0;
  const rgba = new Uint8ClampedArray(values.length * 4);
  for (let i = 0; i < values.length; i++) {
    const g = Math.round(values[i] * scale);
    rgba[4 * i] = g;
    rgba[4 * i + 1] = g;
    rgba[4 * i + 2] = g;
    rgba[4 * i + 3] = 255;
  }
  return rgba;
}

export function drawGray(
  canvas: HTMLCanvasElement,
  ny: number,
  nx: number,
  values: ArrayLike<number>,
): void {
  canvas.width = nx;
  canvas.height = ny;
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const image = ctx.createImageData(nx, ny);
  image.data.set(toGrayscaleRgba(values));
  ctx.putImageData(image, 0, 0);
}

/** SVG polyline points for a log-scaled convergence sparkline. */
export function sparklinePoints(
  changes: readonly number[],
  width = 120,
  height = 24,
): string {
  const usable = changes.filter((c) => Number.isFinite(c) && c > 0);
  if (usable.length === 0) return "";
  const logs = changes.map((c) => (Number.isFinite(c) && c > 0 ? Math.log10(c) : null));
  const present = logs.filter((v): v is number => v !== null);
  const lo = Math.min(...present);
  const hi = Math.max(...present);
  const span = hi - lo || 1;
  const step = changes.length > 1 ? width / (changes.length - 1) : 0;
  const points: string[] = [];
  logs.forEach((v, i) => {
    if (v === null) return;
    const x = (i * step).toFixed(1);
    const y = (height - ((v - lo) / span) * height).toFixed(1);
    points.push(`${x},${y}`);
  });
  return points.join(" ");
}
