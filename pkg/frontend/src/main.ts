/** DOM wiring: uploads, the parameter panel, preview, and stroke inspector. */

import { StudioApi } from "./api.js";
import { describeStroke, hitTest } from "./hittest.js";
import { PANEL_FIELDS, type FieldSpec } from "./panel.js";
import { SessionState } from "./session.js";
import type { JobView, PlanDoc } from "./types.js";
import { getByPointer, pointerPatch, type Violation } from "./validate.js";

const api = new StudioApi("");
let session: SessionState;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function renderPreview(png: ArrayBuffer, job: JobView): void {
  const blob = new Blob([png], { type: "image/png" });
  const url = URL.createObjectURL(blob);
  const img = el<HTMLImageElement>("preview");
  const previous = img.src;
  img.onload = () => {
    if (previous.startsWith("blob:")) URL.revokeObjectURL(previous);
  };
  img.src = url;
  el("spinner").style.display = "none";
  el("stats").textContent = job.result
    ? `${job.result.stroke_count} strokes | ` +
      Object.entries(job.result.timings)
        .map(([k, v]) => `${k}: ${(v * 1000).toFixed(0)} ms`)
        .join(" | ")
    : "";
}

function showValidation(violations: Violation[]): void {
  const box = el("validation");
  box.textContent = violations.map((v) => `${v.pointer}: ${v.message}`).join("\n");
  box.style.display = violations.length ? "block" : "none";
}

function buildPanel(): void {
  const panel = el("panel");
  const groups = new Map<string, HTMLElement>();
  for (const spec of PANEL_FIELDS) {
    let group = groups.get(spec.group);
    if (!group) {
      const details = document.createElement("details");
      details.open = spec.group === "Hybrid";
      const summary = document.createElement("summary");
      summary.textContent = spec.group;
      details.appendChild(summary);
      panel.appendChild(details);
      groups.set(spec.group, details);
      group = details;
    }
    group.appendChild(buildField(spec));
  }
}

function buildField(spec: FieldSpec): HTMLElement {
  const row = document.createElement("label");
  row.className = "field";
  const caption = document.createElement("span");
  caption.textContent = spec.label;
  row.appendChild(caption);

  const current = getByPointer(session.config, spec.pointer);
  let input: HTMLElement;
  if (spec.kind === "choice") {
    const select = document.createElement("select");
    for (const choice of spec.choices ?? []) {
      const option = document.createElement("option");
      option.value = choice;
      option.textContent = choice;
      option.selected = choice === current;
      select.appendChild(option);
    }
    select.addEventListener("change", () => {
      session.edit(pointerPatch(spec.pointer, select.value));
    });
    input = select;
  } else if (spec.kind === "toggle") {
    const box = document.createElement("input");
    box.type = "checkbox";
    box.checked = Boolean(current);
    box.addEventListener("change", () => {
      session.edit(pointerPatch(spec.pointer, box.checked));
    });
    input = box;
  } else {
    const box = document.createElement("input");
    box.type = spec.kind === "slider" ? "range" : "number";
    if (spec.min !== undefined) box.min = String(spec.min);
    if (spec.max !== undefined) box.max = String(spec.max);
    if (spec.step !== undefined) box.step = String(spec.step);
    box.value = current === null || current === undefined ? "" : String(current);
    const value = document.createElement("output");
    value.textContent = box.value;
    box.addEventListener("input", () => {
      value.textContent = box.value;
      if (box.value === "" && spec.group === "Post-processing") {
        session.edit(pointerPatch(spec.pointer, null));
        return;
      }
      const parsed = spec.kind === "int" ? parseInt(box.value, 10) : parseFloat(box.value);
      if (Number.isNaN(parsed)) {
        showValidation([{ pointer: spec.pointer, message: "must be a number" }]);
        return;
      }
      session.edit(pointerPatch(spec.pointer, parsed));
    });
    row.appendChild(box);
    row.appendChild(value);
    return row;
  }
  row.appendChild(input);
  return row;
}

function renderInspector(plan: PlanDoc, index: number | null): void {
  const card = el("inspector");
  if (index === null) {
    card.innerHTML = "<em>click a stroke to inspect it</em>";
    return;
  }
  const stroke = plan.strokes[index];
  const attrs = describeStroke(stroke);
  const rows = Object.entries(attrs)
    .map(([k, v]) => `<tr><td>${k}</td><td>${v}</td></tr>`)
    .join("");
  const excluded = session.excluded.has(index);
  card.innerHTML =
    `<h3>stroke ${index}${excluded ? " (hidden)" : ""}</h3>` +
    `<table>${rows}</table>` +
    `<button id="toggle-stroke">${excluded ? "show" : "hide"} this stroke</button>`;
  el("toggle-stroke").addEventListener("click", () => {
    session.toggleStroke(index);
    renderInspector(plan, index);
  });
}

function wirePreviewClicks(): void {
  const img = el<HTMLImageElement>("preview");
  img.addEventListener("click", (event) => {
    if (!session.plan) return;
    const rect = img.getBoundingClientRect();
    const x = ((event.clientX - rect.left) / rect.width) * session.plan.image.w;
    const y = ((event.clientY - rect.top) / rect.height) * session.plan.image.h;
    const hit = hitTest(session.plan, x, y);
    session.selection.clear();
    if (hit !== null) session.selection.add(hit);
    renderInspector(session.plan, hit);
  });
}

function boot(): void {
  session = new SessionState(api, {
    onPreview: renderPreview,
    onPlan: (plan) => renderInspector(plan, null),
    onStatus: (text) => {
      el("status").textContent = text;
      el("spinner").style.display = text === "running" ? "inline-block" : "none";
    },
    onError: (message) => {
      el("status").textContent = `error: ${message}`;
      el("spinner").style.display = "none";
    },
    onValidation: showValidation,
  });
  buildPanel();
  wirePreviewClicks();
  el<HTMLInputElement>("upload").addEventListener("change", (event) => {
    const file = (event.target as HTMLInputElement).files?.[0];
    if (file) void session.start(file);
  });
}

document.addEventListener("DOMContentLoaded", boot);
