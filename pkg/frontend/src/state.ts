/** View state for the annotation workbench.
 *
 * All numbers shown in the UI originate from server responses or stream
 * events; this module only mirrors, buffers, and validates them. Knot
 * edits are optimistic: the local copy updates immediately and is reverted
 * if the server rejects the batch.
 */

import type { ApiClient, KnotEdit } from "./api";
import type { IterEvent, Knot, KnotPayload, RunState, Weights } from "./types";

export const OPI_THRESHOLD = 0.8;

/** Client-side copy of the service's preset weight table, used only to
 * fill the hyperparameter form; the run request still names the preset so
 * the server stays authoritative. */
export const PRESET_WEIGHTS: Record<string, Weights> = {
  hydrocephalus: { alpha: 5e-1, beta: 5e-2, mu: 1e3, gamma: 0, sigma: 0 },
  "distorted-disk": { alpha: 5e-1, beta: 1e-2, mu: 1e4, gamma: 0, sigma: 0 },
  "distorted-disk-shape": { alpha: 5e-1, beta: 1e-2, mu: 1e4, gamma: 0, sigma: 1e8 },
  "lv-ed": { alpha: 5e-1, beta: 1e-3, mu: 1e4, gamma: 0, sigma: 0 },
  "lv-ed-shape": { alpha: 5e-1, beta: 1e-3, mu: 1e4, gamma: 0, sigma: 1e8 },
  "acdc-normal": { alpha: 1e-1, beta: 1e-2, mu: 1e4, gamma: 1e-5, sigma: 1e7 },
  "acdc-indistinct": { alpha: 1e-1, beta: 1e-2, mu: 1e4, gamma: 1e-5, sigma: 1e8 },
  "acdc-thin-myocardium": { alpha: 1e-1, beta: 1e-2, mu: 1e4, gamma: 1e-3, sigma: 1e7 },
};

/** Chart samples for one run; append-only while the run lasts. */
export interface RunSeries {
  iters: number[];
  j_int: number[];
  j_ext: number[];
  j_shape: number[];
  j_total: number[];
  mu: number[];
  /** [iteration, value] pairs; sparse because early iterations have none. */
  opi: [number, number][];
}

function emptySeries(): RunSeries {
  return { iters: [], j_int: [], j_ext: [], j_shape: [], j_total: [], mu: [], opi: [] };
}

export function validateWeights(w: Weights): string | null {
  for (const [name, value] of Object.entries(w)) {
    if (!Number.isFinite(value)) return `${name} must be a number`;
    if (value < 0) return `${name} must be >= 0`;
  }
  return null;
}

export class ViewState {
  sessionId = "";
  imageWidth = 0;
  imageHeight = 0;
  nSlices = 0;
  sliceIndex = 0;
  runState: RunState = "idle";
  knots: Knot[] = [];
  pinned: boolean[] = [];
  weights: Weights = { alpha: 0.5, beta: 0.01, mu: 1000, gamma: 0, sigma: 0 };
  /** One series per run; tune-and-rerun appends a fresh one. */
  runs: RunSeries[] = [];
  lastError: string | null = null;

  constructor(private readonly api: ApiClient) {}

  get currentRun(): RunSeries | null {
    return this.runs.length ? this.runs[this.runs.length - 1] : null;
  }

  /** Mirror a server-acknowledged knot list. */
  acceptKnots(payload: KnotPayload): void {
    this.knots = payload.knots.map((k) => [k[0], k[1]]);
    this.pinned = payload.pinned.slice();
  }

  async openSession(files: { name: string; data: Uint8Array }[]): Promise<void> {
    const info = await this.api.createSession(files);
    this.sessionId = info.id;
    this.imageWidth = info.width;
    this.imageHeight = info.height;
    this.nSlices = info.n_slices;
    this.sliceIndex = 0;
    this.runState = "idle";
    this.runs = [];
    this.knots = [];
    this.pinned = [];
  }

  async clickToInit(x: number, y: number, radius: number, nKnots: number): Promise<void> {
    this.lastError = null;
    try {
      this.acceptKnots(
        await this.api.init(this.sessionId, { x, y, radius, n_knots: nKnots }),
      );
    } catch (err) {
      this.lastError = err instanceof Error ? err.message : String(err);
      throw err;
    }
  }

  applyPreset(name: string): void {
    const preset = PRESET_WEIGHTS[name];
    if (!preset) throw new Error(`unknown preset ${name}`);
    this.weights = { ...preset };
  }

  /** Start a fresh run (new chart series) with the current form weights. */
  async startRun(maxIters?: number): Promise<void> {
    const problem = validateWeights(this.weights);
    if (problem) {
      this.lastError = problem;
      throw new Error(problem);
    }
    await this.api.run(this.sessionId, {
      weights: { ...this.weights },
      ...(maxIters !== undefined ? { max_iters: maxIters } : {}),
    });
    this.runs.push(emptySeries());
    this.runState = "running";
  }

  async pause(): Promise<void> {
    await this.api.pause(this.sessionId);
    this.runState = "paused";
  }

  /** Resume a paused run; the chart series continues. */
  async resume(): Promise<void> {
    await this.api.run(this.sessionId, {});
    this.runState = "running";
  }

  /** Consume the SSE stream until "done", invoking onUpdate per event. */
  async streamCurrentRun(onUpdate?: () => void): Promise<void> {
    await this.api.streamEvents(this.sessionId, (event) => {
      this.handleEvent(event);
      if (onUpdate) onUpdate();
    });
    this.handleDone();
    if (onUpdate) onUpdate();
  }

  /** One streamed iteration: charts append, contour mirrors event knots. */
  handleEvent(event: IterEvent): void {
    let series = this.currentRun;
    if (!series) {
      series = emptySeries();
      this.runs.push(series);
    }
    series.iters.push(event.iter);
    series.j_int.push(event.j_int);
    series.j_ext.push(event.j_ext);
    series.j_shape.push(event.j_shape);
    series.j_total.push(event.j_total);
    series.mu.push(event.mu);
    if (event.opi !== null) series.opi.push([event.iter, event.opi]);
    if (event.knots !== null) {
      this.knots = event.knots.map((k) => [k[0], k[1]]);
    }
  }

  handleDone(): void {
    this.runState = "done";
  }

  /** Optimistic batch edit; local state reverts if the server rejects. */
  async editKnots(edits: KnotEdit[]): Promise<void> {
    const savedKnots = this.knots.map((k) => [k[0], k[1]] as Knot);
    const savedPinned = this.pinned.slice();
    for (const e of edits) {
      if (e.x !== undefined && e.y !== undefined) this.knots[e.index] = [e.x, e.y];
      if (e.pinned !== undefined) this.pinned[e.index] = e.pinned;
    }
    try {
      this.acceptKnots(await this.api.patchKnots(this.sessionId, edits));
    } catch (err) {
      this.knots = savedKnots;
      this.pinned = savedPinned;
      this.lastError = err instanceof Error ? err.message : String(err);
      throw err;
    }
  }

  async nextSlice(): Promise<void> {
    const body = await this.api.nextSlice(this.sessionId);
    this.sliceIndex = body.slice_index;
    this.runState = "idle";
    if (body.knots && body.pinned) {
      this.acceptKnots({ knots: body.knots, pinned: body.pinned });
    }
  }
}
