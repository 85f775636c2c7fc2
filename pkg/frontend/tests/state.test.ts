import { describe, expect, it } from "vitest";

import type { ApiClient } from "../src/api";
import { ApiError } from "../src/api";
import { PRESET_WEIGHTS, ViewState, validateWeights } from "../src/state";
import type { IterEvent, Knot } from "../src/types";

/** Transport stub that records every call; no numerics happen client-side,
 * so whatever the stub returns is what the state must mirror. */
function stubApi(overrides: Partial<Record<string, unknown>> = {}) {
  const calls: { method: string; args: unknown[] }[] = [];
  const circle: Knot[] = [
    [29, 24],
    [24, 29],
    [19, 24],
    [24, 19],
  ];
  const api = {
    calls,
    createSession: async (...args: unknown[]) => {
      calls.push({ method: "createSession", args });
      return { id: "s1", n_slices: 2, width: 48, height: 48 };
    },
    init: async (...args: unknown[]) => {
      calls.push({ method: "init", args });
      return { knots: circle, pinned: [false, false, false, false] };
    },
    run: async (...args: unknown[]) => {
      calls.push({ method: "run", args });
      return { state: "running" };
    },
    pause: async (...args: unknown[]) => {
      calls.push({ method: "pause", args });
      return { state: "paused" };
    },
    patchKnots: async (...args: unknown[]) => {
      calls.push({ method: "patchKnots", args });
      return { knots: circle, pinned: [true, false, false, false] };
    },
    nextSlice: async (...args: unknown[]) => {
      calls.push({ method: "nextSlice", args });
      return { state: "idle", slice_index: 1, knots: circle, pinned: [false, false, false, false] };
    },
    ...overrides,
  };
  return api as typeof api & ApiClient;
}

function event(partial: Partial<IterEvent>): IterEvent {
  return {
    iter: 0,
    knots: null,
    j_int: 1,
    j_ext: 2,
    j_shape: 0,
    j_total: 3,
    opi: null,
    mu: 1000,
    ...partial,
  };
}

describe("session and init", () => {
  it("mirrors the server-acknowledged knot circle", async () => {
    const api = stubApi();
    const state = new ViewState(api);
    await state.openSession([{ name: "a.pgm", data: new Uint8Array([80, 53]) }]);
    expect(state.sessionId).toBe("s1");
    expect([state.imageWidth, state.imageHeight]).toEqual([48, 48]);
    await state.clickToInit(24, 24, 5, 4);
    expect(state.knots).toHaveLength(4);
    expect(state.knots[0]).toEqual([29, 24]);
    expect(state.pinned).toEqual([false, false, false, false]);
  });

  it("surfaces a validation error for an out-of-image click", async () => {
    const api = stubApi({
      init: async () => {
        throw new ApiError(422, "click (500, 24) outside 48x48 image");
      },
    });
    const state = new ViewState(api);
    await state.openSession([{ name: "a.pgm", data: new Uint8Array() }]);
    await expect(state.clickToInit(500, 24, 5, 8)).rejects.toThrow("outside");
    expect(state.lastError).toContain("outside");
    expect(state.knots).toHaveLength(0);
  });
});

describe("live rendering", () => {
  it("plots an event with opi=1 at exactly 1", () => {
    const state = new ViewState(stubApi());
    state.handleEvent(event({ iter: 12, opi: 1.0 }));
    expect(state.currentRun!.opi).toEqual([[12, 1.0]]);
  });

  it("uses event knots verbatim for the contour", () => {
    const state = new ViewState(stubApi());
    const knots: Knot[] = [
      [1.25, 2.5],
      [3, 4],
      [5, 6],
      [7, 8],
    ];
    state.handleEvent(event({ knots }));
    expect(state.knots).toEqual(knots);
    // a later event without knots leaves the contour untouched
    state.handleEvent(event({ iter: 1, knots: null }));
    expect(state.knots).toEqual(knots);
  });

  it("appends chart samples in order and never rewrites them", () => {
    const state = new ViewState(stubApi());
    for (let i = 0; i < 5; i++) state.handleEvent(event({ iter: i, j_total: 100 - i }));
    expect(state.currentRun!.iters).toEqual([0, 1, 2, 3, 4]);
    expect(state.currentRun!.j_total).toEqual([100, 99, 98, 97, 96]);
  });

  it("flips run state to done when the stream ends", async () => {
    const api = stubApi({
      streamEvents: async (_id: string, onEvent: (e: IterEvent) => void) => {
        onEvent(event({ iter: 0 }));
        onEvent(event({ iter: 1 }));
      },
    });
    const state = new ViewState(api);
    await state.openSession([{ name: "a.pgm", data: new Uint8Array() }]);
    await state.startRun();
    await state.streamCurrentRun();
    expect(state.runState).toBe("done");
    expect(state.currentRun!.iters).toEqual([0, 1]);
  });
});

describe("knot editing", () => {
  it("applies optimistically and reconciles with the server reply", async () => {
    const api = stubApi();
    const state = new ViewState(api);
    await state.openSession([{ name: "a.pgm", data: new Uint8Array() }]);
    await state.clickToInit(24, 24, 5, 4);
    await state.editKnots([{ index: 0, pinned: true }]);
    expect(state.pinned[0]).toBe(true); // server ack mirrored
    expect(api.calls.at(-1)!.method).toBe("patchKnots");
  });

  it("reverts the optimistic change when the server rejects", async () => {
    const api = stubApi({
      patchKnots: async () => {
        throw new ApiError(422, "knot outside image");
      },
    });
    const state = new ViewState(api);
    await state.openSession([{ name: "a.pgm", data: new Uint8Array() }]);
    await state.clickToInit(24, 24, 5, 4);
    const before = state.knots.map((k) => [...k]);
    await expect(
      state.editKnots([{ index: 1, x: 500, y: 500 }]),
    ).rejects.toThrow("outside");
    expect(state.knots).toEqual(before);
    expect(state.lastError).toContain("outside");
  });
});

describe("tune and rerun", () => {
  it("fills the acdc-normal preset weights", () => {
    const state = new ViewState(stubApi());
    state.applyPreset("acdc-normal");
    expect(state.weights).toEqual({
      alpha: 1e-1,
      beta: 1e-2,
      mu: 1e4,
      gamma: 1e-5,
      sigma: 1e7,
    });
  });

  it("blocks negative weights client-side", async () => {
    const state = new ViewState(stubApi());
    state.weights.mu = -5;
    await expect(state.startRun()).rejects.toThrow("mu must be >= 0");
    expect(validateWeights(state.weights)).toContain("mu");
    expect(state.runs).toHaveLength(0); // no run started
  });

  it("a rerun appends a fresh chart series", async () => {
    const state = new ViewState(stubApi());
    await state.openSession([{ name: "a.pgm", data: new Uint8Array() }]);
    await state.startRun();
    state.handleEvent(event({ iter: 0 }));
    state.handleDone();
    await state.startRun();
    state.handleEvent(event({ iter: 0, j_total: 7 }));
    expect(state.runs).toHaveLength(2);
    expect(state.runs[0].j_total).toEqual([3]);
    expect(state.runs[1].j_total).toEqual([7]);
  });

  it("knows every service preset", () => {
    expect(Object.keys(PRESET_WEIGHTS).sort()).toEqual([
      "acdc-indistinct",
      "acdc-normal",
      "acdc-thin-myocardium",
      "distorted-disk",
      "distorted-disk-shape",
      "hydrocephalus",
      "lv-ed",
      "lv-ed-shape",
    ]);
  });
});

describe("slices", () => {
  it("advances and keeps the warm-started contour", async () => {
    const state = new ViewState(stubApi());
    await state.openSession([{ name: "a.pgm", data: new Uint8Array() }]);
    await state.clickToInit(24, 24, 5, 4);
    await state.nextSlice();
    expect(state.sliceIndex).toBe(1);
    expect(state.runState).toBe("idle");
    expect(state.knots).toHaveLength(4);
  });
});
