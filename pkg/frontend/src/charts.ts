/** Tiny canvas chart helpers for the loss and OPI panels.
 *
 * Geometry is computed by pure functions so tests can check the plotted
 * positions without a DOM; drawing is a thin loop over those points.
 */

import { OPI_THRESHOLD } from "./state";
import type { RunSeries } from "./state";

export interface ChartFrame {
  width: number;
  height: number;
  xMin: number;
  xMax: number;
  yMin: number;
  yMax: number;
}

/** Map a data point into pixel space (y axis flipped, origin top-left). */
export function toPixel(frame: ChartFrame, x: number, y: number): [number, number] {
  const sx = frame.xMax > frame.xMin ? (x - frame.xMin) / (frame.xMax - frame.xMin) : 0.5;
  const sy = frame.yMax > frame.yMin ? (y - frame.yMin) / (frame.yMax - frame.yMin) : 0.5;
  return [sx * frame.width, (1 - sy) * frame.height];
}

/** Frame for the OPI panel: fixed 0..2 range so the 0.8 line is stable. */
export function opiFrame(width: number, height: number, maxIter: number): ChartFrame {
  return { width, height, xMin: 0, xMax: Math.max(maxIter, 1), yMin: 0, yMax: 2 };
}

export function lossFrame(width: number, height: number, series: RunSeries): ChartFrame {
  const values = series.j_total;
  const top = values.length ? Math.max(...values) : 1;
  const maxIter = values.length ? series.iters[series.iters.length - 1] : 1;
  return { width, height, xMin: 0, xMax: Math.max(maxIter, 1), yMin: 0, yMax: top };
}

export function opiPoints(frame: ChartFrame, series: RunSeries): [number, number][] {
  return series.opi.map(([iter, value]) => toPixel(frame, iter, value));
}

export function thresholdY(frame: ChartFrame): number {
  return toPixel(frame, frame.xMin, OPI_THRESHOLD)[1];
}

const SERIES_COLORS = ["#2266cc", "#cc6622", "#22aa55", "#aa22aa"];

export function drawLossChart(
  ctx: CanvasRenderingContext2D,
  runs: RunSeries[],
  width: number,
  height: number,
): void {
  ctx.clearRect(0, 0, width, height);
  runs.forEach((series, runIndex) => {
    if (!series.iters.length) return;
    const frame = lossFrame(width, height, series);
    ctx.strokeStyle = SERIES_COLORS[runIndex % SERIES_COLORS.length];
    ctx.beginPath();
    series.iters.forEach((iter, i) => {
      const [px, py] = toPixel(frame, iter, series.j_total[i]);
      if (i === 0) ctx.moveTo(px, py);
      else ctx.lineTo(px, py);
    });
    ctx.stroke();
  });
}

export function drawOpiChart(
  ctx: CanvasRenderingContext2D,
  runs: RunSeries[],
  width: number,
  height: number,
): void {
  ctx.clearRect(0, 0, width, height);
  const maxIter = Math.max(
    1,
    ...runs.map((s) => (s.iters.length ? s.iters[s.iters.length - 1] : 0)),
  );
  const frame = opiFrame(width, height, maxIter);
  // threshold line at 0.8
  const ty = thresholdY(frame);
  ctx.strokeStyle = "#cc2222";
  ctx.setLineDash([4, 3]);
  ctx.beginPath();
  ctx.moveTo(0, ty);
  ctx.lineTo(width, ty);
  ctx.stroke();
  ctx.setLineDash([]);
  runs.forEach((series, runIndex) => {
    const points = opiPoints(frame, series);
    if (!points.length) return;
    ctx.strokeStyle = SERIES_COLORS[runIndex % SERIES_COLORS.length];
    ctx.beginPath();
    points.forEach(([px, py], i) => {
      if (i === 0) ctx.moveTo(px, py);
      else ctx.lineTo(px, py);
    });
    ctx.stroke();
  });
}
