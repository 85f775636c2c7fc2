/** Canvas <-> image coordinate mapping and knot hit-testing.
 *
 * The image occupies the canvas under a uniform zoom plus a pan offset:
 * canvas = image * zoom + pan. The mapping is exact arithmetic, so integer
 * pixel corners round-trip exactly under any zoom.
 */

import type { Knot } from "./types";

export interface Viewport {
  zoom: number; // canvas px per image px
  panX: number;
  panY: number;
}

export const KNOT_HIT_RADIUS_PX = 6; // screen px, per the handle spec

export function imageToCanvas(
  view: Viewport,
  x: number,
  y: number,
): [number, number] {
  return [x * view.zoom + view.panX, y * view.zoom + view.panY];
}

export function canvasToImage(
  view: Viewport,
  cx: number,
  cy: number,
): [number, number] {
  return [(cx - view.panX) / view.zoom, (cy - view.panY) / view.zoom];
}

/** Index of the knot whose handle lies within 6 screen px, or -1. */
export function hitTestKnot(
  view: Viewport,
  knots: Knot[],
  cx: number,
  cy: number,
): number {
  let best = -1;
  let bestDist = KNOT_HIT_RADIUS_PX;
  for (let i = 0; i < knots.length; i++) {
    const [hx, hy] = imageToCanvas(view, knots[i][0], knots[i][1]);
    const d = Math.hypot(hx - cx, hy - cy);
    if (d <= bestDist) {
      best = i;
      bestDist = d;
    }
  }
  return best;
}

/** Viewport that fits a width x height image into the canvas, centred. */
export function fitImage(
  imageWidth: number,
  imageHeight: number,
  canvasWidth: number,
  canvasHeight: number,
): Viewport {
  const zoom = Math.min(canvasWidth / imageWidth, canvasHeight / imageHeight);
  return {
    zoom,
    panX: (canvasWidth - imageWidth * zoom) / 2,
    panY: (canvasHeight - imageHeight * zoom) / 2,
  };
}
