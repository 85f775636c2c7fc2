/** DOM wiring for the annotation workbench.
 *
 * Layout (see index.html): an image canvas with the contour overlay, two
 * chart canvases (loss, OPI), a hyperparameter form with a preset picker,
 * and the session controls. All numerics come from the server.
 */

import { ApiClient } from "./api";
import {
  drawLossChart,
  drawOpiChart,
} from "./charts";
import {
  Viewport,
  canvasToImage,
  fitImage,
  hitTestKnot,
  imageToCanvas,
} from "./coords";
import { decodePgm, isPgm } from "./pgm";
import { PRESET_WEIGHTS, ViewState } from "./state";
import type { Weights } from "./types";

const WEIGHT_NAMES: (keyof Weights)[] = ["alpha", "beta", "mu", "gamma", "sigma"];

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

export function boot(): void {
  const api = new ApiClient("");
  const state = new ViewState(api);

  const imageCanvas = el<HTMLCanvasElement>("image-canvas");
  const lossCanvas = el<HTMLCanvasElement>("loss-canvas");
  const opiCanvas = el<HTMLCanvasElement>("opi-canvas");
  const statusLine = el<HTMLDivElement>("status");
  const fileInput = el<HTMLInputElement>("file-input");
  const presetSelect = el<HTMLSelectElement>("preset");
  const radiusInput = el<HTMLInputElement>("init-radius");
  const knotsInput = el<HTMLInputElement>("init-knots");

  let view: Viewport = { zoom: 1, panX: 0, panY: 0 };
  let bitmap: ImageData | null = null;
  let sliceBytes: Uint8Array[] = [];
  let dragIndex = -1;

  for (const name of Object.keys(PRESET_WEIGHTS)) {
    const option = document.createElement("option");
    option.value = name;
    option.textContent = name;
    presetSelect.appendChild(option);
  }

  function setStatus(text: string): void {
    statusLine.textContent = text;
  }

  function readWeightsForm(): void {
    for (const name of WEIGHT_NAMES) {
      const value = parseFloat(el<HTMLInputElement>(`w-${name}`).value);
      state.weights[name] = value;
    }
  }

  function fillWeightsForm(): void {
    for (const name of WEIGHT_NAMES) {
      el<HTMLInputElement>(`w-${name}`).value = String(state.weights[name]);
    }
  }

  function loadBitmap(index: number): void {
    const bytes = sliceBytes[index];
    if (!bytes || !isPgm(bytes)) {
      bitmap = null; // PNG uploads could be drawn via createImageBitmap
      return;
    }
    const { width, height, gray } = decodePgm(bytes);
    const rgba = new Uint8ClampedArray(width * height * 4);
    for (let i = 0; i < width * height; i++) {
      rgba[4 * i] = rgba[4 * i + 1] = rgba[4 * i + 2] = gray[i];
      rgba[4 * i + 3] = 255;
    }
    bitmap = new ImageData(rgba, width, height);
  }

  function redraw(): void {
    const ctx = imageCanvas.getContext("2d")!;
    ctx.clearRect(0, 0, imageCanvas.width, imageCanvas.height);
    if (bitmap) {
      const off = new OffscreenCanvas(bitmap.width, bitmap.height);
      off.getContext("2d")!.putImageData(bitmap, 0, 0);
      ctx.imageSmoothingEnabled = false;
      ctx.drawImage(
        off,
        view.panX,
        view.panY,
        bitmap.width * view.zoom,
        bitmap.height * view.zoom,
      );
    }
    if (state.knots.length) {
      ctx.strokeStyle = "#ffd024";
      ctx.beginPath();
      state.knots.forEach(([x, y], i) => {
        const [cx, cy] = imageToCanvas(view, x, y);
        if (i === 0) ctx.moveTo(cx, cy);
        else ctx.lineTo(cx, cy);
      });
      ctx.closePath();
      ctx.stroke();
      state.knots.forEach(([x, y], i) => {
        const [cx, cy] = imageToCanvas(view, x, y);
        ctx.beginPath();
        ctx.arc(cx, cy, 4, 0, 2 * Math.PI);
        if (state.pinned[i]) {
          ctx.fillStyle = "#ff5533"; // pinned: filled
          ctx.fill();
        } else {
          ctx.strokeStyle = "#ff5533"; // free: hollow
          ctx.stroke();
        }
      });
    }
    drawLossChart(lossCanvas.getContext("2d")!, state.runs, lossCanvas.width, lossCanvas.height);
    drawOpiChart(opiCanvas.getContext("2d")!, state.runs, opiCanvas.width, opiCanvas.height);
    setStatus(
      `slice ${state.sliceIndex + 1}/${state.nSlices} | ${state.runState}` +
        (state.lastError ? ` | ${state.lastError}` : ""),
    );
  }

  el<HTMLButtonElement>("btn-upload").addEventListener("click", async () => {
    const files = fileInput.files;
    if (!files || files.length === 0) return setStatus("choose slice files first");
    const payload: { name: string; data: Uint8Array }[] = [];
    for (const file of Array.from(files)) {
      payload.push({ name: file.name, data: new Uint8Array(await file.arrayBuffer()) });
    }
    try {
      await state.openSession(payload);
      sliceBytes = payload.map((p) => p.data);
      view = fitImage(state.imageWidth, state.imageHeight, imageCanvas.width, imageCanvas.height);
      loadBitmap(0);
      redraw();
    } catch (err) {
      setStatus(String(err));
    }
  });

  imageCanvas.addEventListener("mousedown", (evt) => {
    const rect = imageCanvas.getBoundingClientRect();
    const cx = evt.clientX - rect.left;
    const cy = evt.clientY - rect.top;
    const hit = hitTestKnot(view, state.knots, cx, cy);
    if (hit >= 0 && evt.shiftKey) {
      // shift-click toggles the pin
      void state
        .editKnots([{ index: hit, pinned: !state.pinned[hit] }])
        .then(redraw)
        .catch(redraw);
      return;
    }
    if (hit >= 0) {
      dragIndex = hit;
      return;
    }
    // empty canvas: click-to-init
    const [ix, iy] = canvasToImage(view, cx, cy);
    void state
      .clickToInit(ix, iy, parseFloat(radiusInput.value), parseInt(knotsInput.value, 10))
      .then(redraw)
      .catch(redraw);
  });

  imageCanvas.addEventListener("mousemove", (evt) => {
    if (dragIndex < 0) return;
    const rect = imageCanvas.getBoundingClientRect();
    const [ix, iy] = canvasToImage(view, evt.clientX - rect.left, evt.clientY - rect.top);
    state.knots[dragIndex] = [ix, iy]; // optimistic; PATCH on release
    redraw();
  });

  imageCanvas.addEventListener("mouseup", () => {
    if (dragIndex < 0) return;
    const [x, y] = state.knots[dragIndex];
    const index = dragIndex;
    dragIndex = -1;
    void state.editKnots([{ index, x, y }]).then(redraw).catch(redraw);
  });

  presetSelect.addEventListener("change", () => {
    if (presetSelect.value) {
      state.applyPreset(presetSelect.value);
      fillWeightsForm();
    }
  });

  el<HTMLButtonElement>("btn-run").addEventListener("click", async () => {
    readWeightsForm();
    try {
      if (state.runState === "paused") {
        await state.resume();
      } else {
        await state.startRun();
        void state.streamCurrentRun(redraw);
      }
      redraw();
    } catch (err) {
      setStatus(String(err));
    }
  });

  el<HTMLButtonElement>("btn-pause").addEventListener("click", async () => {
    try {
      await state.pause();
      redraw();
    } catch (err) {
      setStatus(String(err));
    }
  });

  el<HTMLButtonElement>("btn-export").addEventListener("click", async () => {
    try {
      const result = await api.exportAnnotation(state.sessionId);
      const blob = new Blob([JSON.stringify(result.annotation, null, 2)], {
        type: "application/json",
      });
      const link = document.createElement("a");
      link.href = URL.createObjectURL(blob);
      link.download = "annotation.json";
      link.click();
    } catch (err) {
      setStatus(String(err));
    }
  });

  el<HTMLButtonElement>("btn-next-slice").addEventListener("click", async () => {
    try {
      await state.nextSlice();
      loadBitmap(state.sliceIndex);
      redraw();
    } catch (err) {
      setStatus(String(err));
    }
  });

  fillWeightsForm();
  redraw();
}

if (typeof document !== "undefined" && document.getElementById("image-canvas")) {
  boot();
}
