/** Shared shapes of the service's JSON payloads. */

export interface SessionInfo {
  id: string;
  n_slices: number;
  width: number;
  height: number;
}

/** One [u, v] knot in image pixel coordinates. */
export type Knot = [number, number];

export interface KnotPayload {
  knots: Knot[];
  pinned: boolean[];
}

/** One server-sent iteration event, field names as streamed. */
export interface IterEvent {
  iter: number;
  knots: Knot[] | null;
  j_int: number;
  j_ext: number;
  j_shape: number;
  j_total: number;
  opi: number | null;
  mu: number;
}

export interface Weights {
  alpha: number;
  beta: number;
  mu: number;
  gamma: number;
  sigma: number;
}

export interface ExportResult {
  annotation: Record<string, unknown>;
  mask_png_base64: string;
}

export type RunState = "idle" | "running" | "paused" | "done";
