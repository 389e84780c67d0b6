import { HttpApiClient } from "./api.js";
import { StudioController } from "./controller.js";
import type { GeometrySpec } from "./types.js";

// static hosting may sit on another origin than the API; the service enables
// CORS, so "?api=http://127.0.0.1:8000" points the client elsewhere
const apiBase = new URLSearchParams(window.location.search).get("api") ?? "";
const api = new HttpApiClient(apiBase);
const canvas = document.getElementById("scatter") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;

const controller = new StudioController(api, { onChange: render });

function el<T extends HTMLElement>(id: string): T {
  return document.getElementById(id) as T;
}

function fmt(v: number | undefined | null, digits = 4): string {
  return v === undefined || v === null ? "-" : v.toFixed(digits);
}

function renderReadouts(): void {
  const r = controller.report;
  el("measure-i").textContent = fmt(r?.measure_i);
  el("measure-ii").textContent = fmt(r?.measure_ii);
  el("measure-iii").textContent = r
    ? `${fmt(r.measure_iii.accuracy)} (k=${r.measure_iii.k})` : "-";
  el("measure-iv").textContent = fmt(r?.measure_iv);
  el("status").textContent =
    (controller.busy ? "computing... " : "") + controller.status;
  el("revision").textContent = String(controller.revision);
}

function sliderRow(labelText: string, value: number, min: number, max: number,
                   step: number, fieldKey: string,
                   onInput: (v: number) => void): HTMLElement {
  const wrap = document.createElement("div");
  wrap.className = "slider-row";
  const label = document.createElement("label");
  label.textContent = labelText;
  const slider = document.createElement("input");
  slider.type = "range";
  slider.min = String(min);
  slider.max = String(max);
  slider.step = String(step);
  slider.value = String(value);
  const num = document.createElement("span");
  num.className = "value";
  num.textContent = value.toFixed(2);
  slider.addEventListener("input", () => {
    num.textContent = Number(slider.value).toFixed(2);
    onInput(Number(slider.value));
  });
  const err = document.createElement("span");
  err.className = "field-error";
  err.textContent = controller.fieldErrors.get(fieldKey) ?? "";
  wrap.append(label, slider, num, err);
  return wrap;
}

function renderEditor(): void {
  const host = el("clusters");
  host.replaceChildren();
  const specError = controller.fieldErrors.get("spec");
  el("spec-error").textContent = specError ?? "";
  for (const row of controller.model.rows) {
    const card = document.createElement("div");
    card.className = "cluster-card";
    const title = document.createElement("h3");
    title.textContent = row.name
      + (controller.model.defaultCluster === row.name ? " (default)" : "");
    const rowError = document.createElement("div");
    rowError.className = "field-error";
    rowError.textContent = controller.fieldErrors.get(`cluster:${row.name}`)
      ?? controller.fieldErrors.get(`cluster:${row.name}:words`) ?? "";
    card.append(title, rowError);
    card.append(sliderRow("rho_self", row.rhoSelf, 0, 2, 0.01,
                          `cluster:${row.name}:rho_self`,
                          (v) => controller.editRhoSelf(row.name, v)));
    card.append(sliderRow("importance", row.importance, 0, 10, 0.1,
                          `cluster:${row.name}:importance`,
                          (v) => controller.editImportance(row.name, v)));
    const words = document.createElement("textarea");
    words.value = row.words.join(" ");
    words.rows = 2;
    words.addEventListener("change", () => {
      row.words = words.value.split(/\s+/).filter(Boolean);
      row.dirty.words = true;
    });
    card.append(words);
    host.append(card);
  }

  const pairHost = el("pairs");
  pairHost.replaceChildren();
  const names = controller.model.rows.map((r) => r.name);
  for (let i = 0; i < names.length; i++) {
    for (let j = i; j < names.length; j++) {
      pairHost.append(sliderRow(`rho(${names[i]}, ${names[j]})`,
                                controller.model.pair(names[i], names[j]),
                                0, 1, 0.01, `pair:${names[i]}|${names[j]}`,
                                (v) => controller.editPair(names[i], names[j], v)));
    }
  }
}

function renderAlpha(): void {
  const host = el("alpha-sliders");
  host.replaceChildren();
  if (!controller.alphaAvailable) {
    const note = document.createElement("div");
    note.className = "muted";
    note.title = "serve a combine-mode config to enable weight mixing";
    note.textContent = "no component geometries configured";
    host.append(note);
    return;
  }
  const weights = controller.alpha
    ?? controller.components!.map(() => 1 / controller.components!.length);
  controller.components!.forEach((name, i) => {
    host.append(sliderRow(name, weights[i], 0, 1, 0.01, "alpha",
                          (v) => controller.setAlphaSlider(i, v)));
  });
  const err = controller.fieldErrors.get("alpha");
  if (err) {
    const div = document.createElement("div");
    div.className = "field-error";
    div.textContent = err;
    host.append(div);
  }
}

function renderScatter(): void {
  const vm = controller.scatter;
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  if (!vm) {
    ctx.fillStyle = "#888";
    ctx.fillText("no embedding yet — press Apply", 20, 30);
    return;
  }
  for (const p of vm.points) {
    const [sx, sy] = vm.toScreen(p.x, p.y, width, height);
    ctx.beginPath();
    ctx.arc(sx, sy, p === vm.hovered ? 6 : 3.2, 0, Math.PI * 2);
    ctx.fillStyle = p.color;
    ctx.globalAlpha = p === vm.hovered ? 1.0 : 0.75;
    ctx.fill();
  }
  ctx.globalAlpha = 1.0;
  const hover = el("hover-info");
  hover.textContent = vm.hovered
    ? `${vm.hovered.id}${vm.hovered.label ? " [" + vm.hovered.label + "]" : ""} `
      + `(${vm.hovered.x.toFixed(3)}, ${vm.hovered.y.toFixed(3)})`
    : "";
  el("point-count").textContent = `${vm.points.length} points`;
}

function render(): void {
  renderReadouts();
  renderEditor();
  renderAlpha();
  renderScatter();
}

function wireCanvas(): void {
  let dragging = false;
  let last: [number, number] = [0, 0];
  canvas.addEventListener("wheel", (e) => {
    e.preventDefault();
    controller.scatter?.zoomAt(e.deltaY > 0 ? 0.9 : 1.1, e.offsetX, e.offsetY,
                               canvas.width, canvas.height);
    renderScatter();
  });
  canvas.addEventListener("mousedown", (e) => {
    dragging = true;
    last = [e.offsetX, e.offsetY];
  });
  canvas.addEventListener("mousemove", (e) => {
    const vm = controller.scatter;
    if (!vm) return;
    if (dragging) {
      vm.panByPixels(e.offsetX - last[0], e.offsetY - last[1],
                     canvas.width, canvas.height);
      last = [e.offsetX, e.offsetY];
    } else {
      vm.hovered = vm.hitTest(e.offsetX, e.offsetY, canvas.width, canvas.height);
    }
    renderScatter();
  });
  window.addEventListener("mouseup", () => { dragging = false; });
}

function wireControls(): void {
  el("apply").addEventListener("click", () => void controller.applyNow());
  el("reducer").addEventListener("change", () => {
    const select = el<HTMLSelectElement>("reducer");
    controller.reducerRequest = { reducer: select.value as "pca" | "tsne" };
  });
  el("export").addEventListener("click", () => {
    const blob = new Blob([JSON.stringify(controller.exportSpec(), null, 2)],
                          { type: "application/json" });
    const a = document.createElement("a");
    a.href = URL.createObjectURL(blob);
    a.download = "geometry_spec.json";
    a.click();
    URL.revokeObjectURL(a.href);
  });
  el("import").addEventListener("change", async () => {
    const input = el<HTMLInputElement>("import");
    const file = input.files?.[0];
    if (!file) return;
    controller.loadSpec(JSON.parse(await file.text()) as GeometrySpec);
    input.value = "";
  });
}

wireCanvas();
wireControls();
void controller.init().then(render);
