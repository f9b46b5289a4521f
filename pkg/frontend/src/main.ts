// DOM wiring for the interactive session. All logic with behavior worth
// testing lives in the imported modules; this file only moves data between
// them and the page.

import { ApiClient } from "./api.js";
import { boxOverlays, hitTest, saliencyLayer, type OverlayMode } from "./overlay.js";
import { axesFromRecord, buildRadar, radarSvg, type RadarMode } from "./radar.js";
import { Session } from "./state.js";
import type { MethodName } from "./types.js";

const api = new ApiClient("");
const session = new Session(api);

const el = <T extends HTMLElement>(id: string): T => {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
};

const fileInput = el<HTMLInputElement>("file");
const detectButton = el<HTMLButtonElement>("detect");
const explainButton = el<HTMLButtonElement>("explain");
const evaluateButton = el<HTMLButtonElement>("evaluate");
const methodSelect = el<HTMLSelectElement>("method");
const opacitySlider = el<HTMLInputElement>("opacity");
const grayToggle = el<HTMLInputElement>("grayscale");
const modeToggle = el<HTMLSelectElement>("radar-mode");
const statusLine = el<HTMLDivElement>("status");
const radarHost = el<HTMLDivElement>("radar");
const rawsHost = el<HTMLDivElement>("raws");
const canvas = el<HTMLCanvasElement>("canvas");
const ctx = canvas.getContext("2d");

let image: HTMLImageElement | null = null;

function setStatus(text: string, isError = false): void {
  statusLine.textContent = text;
  statusLine.className = isError ? "status error" : "status";
}

function refreshButtons(): void {
  detectButton.disabled = session.imageId === null;
  explainButton.disabled = !session.canExplain();
  evaluateButton.disabled = !session.canEvaluate();
}

function redraw(): void {
  if (!ctx || !image) return;
  canvas.width = image.naturalWidth;
  canvas.height = image.naturalHeight;
  ctx.drawImage(image, 0, 0);
  if (session.saliency) {
    const mode: OverlayMode = grayToggle.checked ? "grayscale" : "heatmap";
    const rgba = saliencyLayer(session.saliency, Number(opacitySlider.value) / 100, mode);
    const layer = new ImageData(
      new Uint8ClampedArray(rgba),
      session.saliency.width,
      session.saliency.height,
    );
    void createImageBitmap(layer).then((bitmap) => {
      ctx.drawImage(bitmap, 0, 0);
      drawBoxes();
    });
    return;
  }
  drawBoxes();
}

function drawBoxes(): void {
  if (!ctx) return;
  for (const box of boxOverlays(session.detections, session.selectedTargetIndex)) {
    ctx.strokeStyle = box.selected ? "#fde725" : "#4c78a8";
    ctx.lineWidth = box.selected ? 3 : 2;
    ctx.strokeRect(box.x, box.y, box.width, box.height);
    ctx.fillStyle = ctx.strokeStyle;
    ctx.font = "12px sans-serif";
    ctx.fillText(box.label, box.x + 2, Math.max(10, box.y - 4));
  }
}

function renderRadar(): void {
  if (!session.record) return;
  const mode = modeToggle.value as RadarMode;
  const axes =
    mode === "three_axis" && session.axes ? session.axes : axesFromRecord(session.record, mode);
  radarHost.innerHTML = radarSvg(buildRadar(axes));
  rawsHost.innerHTML = axes
    .map((axis) => {
      const raw = axis.raw === null ? "—" : axis.raw.toFixed(4);
      const direction = axis.higher_better ? "↑" : "↓";
      return `<span class="chip" title="${axis.name}">${axis.name} ${direction} ${raw}</span>`;
    })
    .join(" ");
}

fileInput.addEventListener("change", () => {
  const file = fileInput.files?.[0];
  if (!file) return;
  void (async () => {
    try {
      await session.upload(file);
      image = new Image();
      image.src = URL.createObjectURL(file);
      await image.decode();
      setStatus(`uploaded ${session.imageId?.slice(0, 12)}…; run detection`);
      redraw();
    } catch (error) {
      setStatus(String(error), true);
    }
    refreshButtons();
  })();
});

detectButton.addEventListener("click", () => {
  void (async () => {
    try {
      const detections = await session.detect();
      setStatus(
        detections.length === 0
          ? "no detections in this image"
          : `${detections.length} detection(s); click a box to select the target`,
      );
      redraw();
    } catch (error) {
      setStatus(String(error), true);
    }
    refreshButtons();
  })();
});

canvas.addEventListener("click", (event) => {
  const rect = canvas.getBoundingClientRect();
  const x = ((event.clientX - rect.left) / rect.width) * canvas.width;
  const y = ((event.clientY - rect.top) / rect.height) * canvas.height;
  const hit = hitTest(session.detections, x, y);
  if (hit !== null) {
    session.selectTarget(hit);
    setStatus(`target: detection #${hit}`);
    redraw();
    refreshButtons();
  }
});

methodSelect.addEventListener("change", () => {
  session.selectMethod(methodSelect.value as MethodName);
});

explainButton.addEventListener("click", () => {
  void (async () => {
    refreshButtons();
    try {
      setStatus("explaining…");
      await session.explain(
        session.selectedMethod === "drise" ? { n_masks: 500 } : { n_masks: 400 },
      );
      setStatus(`explanation ready (${session.explainJob?.result_ref?.["elapsed_s"] ?? "?"}s)`);
      redraw();
    } catch (error) {
      setStatus(String(error), true);
    }
    refreshButtons();
  })();
});

evaluateButton.addEventListener("click", () => {
  void (async () => {
    refreshButtons();
    try {
      setStatus("evaluating…");
      await session.evaluate({ steps: 50 });
      setStatus("evaluation done");
      renderRadar();
    } catch (error) {
      setStatus(String(error), true);
    }
    refreshButtons();
  })();
});

opacitySlider.addEventListener("input", redraw);
grayToggle.addEventListener("change", redraw);
modeToggle.addEventListener("change", renderRadar);

refreshButtons();
setStatus("upload a PNG to begin");
