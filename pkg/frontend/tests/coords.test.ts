import { describe, expect, it } from "vitest";

import {
  canvasToImage,
  fitImage,
  hitTestKnot,
  imageToCanvas,
} from "../src/coords";
import type { Knot } from "../src/types";

describe("coordinate mapping", () => {
  it("is exact at integer pixel corners under assorted zooms", () => {
    for (const zoom of [0.25, 0.5, 1, 2, 3.75, 8]) {
      const view = { zoom, panX: 17.5, panY: -3.25 };
      for (const [x, y] of [
        [0, 0],
        [1, 0],
        [64, 64],
        [127, 1],
        [33, 99],
      ]) {
        const [cx, cy] = imageToCanvas(view, x, y);
        const [bx, by] = canvasToImage(view, cx, cy);
        expect(bx).toBe(x);
        expect(by).toBe(y);
      }
    }
  });

  it("scales a configured radius r into r * zoom canvas px", () => {
    const view = { zoom: 4, panX: 10, panY: 20 };
    const [cx0, cy0] = imageToCanvas(view, 24, 24);
    const [cx1] = imageToCanvas(view, 24 + 5, 24); // 5 px circle radius
    expect(Math.hypot(cx1 - cx0, cy0 - cy0)).toBe(5 * 4);
  });

  it("fits and centres the image in the canvas", () => {
    const view = fitImage(128, 64, 512, 512);
    expect(view.zoom).toBe(4);
    const [left, top] = imageToCanvas(view, 0, 0);
    const [right, bottom] = imageToCanvas(view, 128, 64);
    expect(right - left).toBe(512);
    expect(bottom - top).toBe(256);
    expect(top).toBe((512 - 256) / 2);
  });
});

describe("hitTestKnot", () => {
  const knots: Knot[] = [
    [10, 10],
    [20, 10],
    [20, 20],
    [10, 20],
  ];

  it("selects the knot within 6 screen px", () => {
    const view = { zoom: 2, panX: 0, panY: 0 };
    expect(hitTestKnot(view, knots, 20 * 2 + 5, 10 * 2)).toBe(1);
  });

  it("misses beyond the 6 px radius", () => {
    const view = { zoom: 2, panX: 0, panY: 0 };
    expect(hitTestKnot(view, knots, 20 * 2 + 7, 10 * 2)).toBe(-1);
  });

  it("prefers the nearest of overlapping handles", () => {
    const view = { zoom: 0.25, panX: 0, panY: 0 }; // knots 2.5 px apart on screen
    const near = hitTestKnot(view, knots, 10 * 0.25 + 1, 10 * 0.25);
    expect(near).toBe(0);
  });

  it("respects pan offsets", () => {
    const view = { zoom: 1, panX: 100, panY: 50 };
    expect(hitTestKnot(view, knots, 110, 60)).toBe(0);
    expect(hitTestKnot(view, knots, 10, 10)).toBe(-1);
  });
});
