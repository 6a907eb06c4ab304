// Studio page wiring. All state/transport logic lives in the imported
// modules; this file only binds it to the DOM.

import { ApiError, GenerateResponse, InterpolateFrame, StudioClient } from "./api.js";
import { DebouncedPreview } from "./preview.js";
import { InterpolationScrubber, LAMBDA_STEPS } from "./scrubber.js";
import { SliderPanel } from "./state.js";

const API_BASE =
  new URLSearchParams(location.search).get("api") ?? "http://127.0.0.1:8000";

const el = <T extends HTMLElement>(id: string): T => {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
};

const banner = el<HTMLDivElement>("banner");
const sliderBox = el<HTMLDivElement>("sliders");
const grid = el<HTMLDivElement>("grid");
const gridMeta = el<HTMLDivElement>("grid-meta");
const sweepRow = el<HTMLDivElement>("sweep-row");
const scrubImg = el<HTMLDivElement>("scrub-frame");
const scrubLabel = el<HTMLSpanElement>("scrub-label");

const client = new StudioClient(API_BASE);
let panel: SliderPanel; // built once the schema arrives

function showBanner(text: string, retry?: () => void): void {
  banner.textContent = text;
  banner.style.display = "block";
  if (retry) {
    const btn = document.createElement("button");
    btn.textContent = "retry";
    btn.onclick = () => {
      banner.style.display = "none";
      retry();
    };
    banner.append(" ", btn);
  }
}

function hideBanner(): void {
  banner.style.display = "none";
}

function glyphTiles(target: HTMLElement, frame: { glyphs: { char: string; image: string }[] }): void {
  target.replaceChildren(
    ...frame.glyphs.map((g) => {
      const tile = document.createElement("figure");
      tile.className = "tile";
      const img = document.createElement("img");
      img.src = "data:image/png;base64," + g.image;
      img.alt = g.char;
      const cap = document.createElement("figcaption");
      cap.textContent = g.char;
      tile.append(img, cap);
      return tile;
    }),
  );
}

function renderPreview(res: GenerateResponse): void {
  hideBanner();
  markOffending([]);
  glyphTiles(grid, res);
  gridMeta.textContent = `source font: ${res.source_font} · ${res.glyphs.length} glyphs`;
}

function markOffending(names: string[]): void {
  const bad = new Set(names);
  for (const row of sliderBox.querySelectorAll<HTMLElement>(".slider-row")) {
    row.classList.toggle("offending", bad.has(row.dataset.name ?? ""));
  }
}

function previewError(err: ApiError): void {
  markOffending(err.offending);
  showBanner(
    err.offending.length ? `${err.message}: ${err.offending.join(", ")}` : err.message,
  );
}

const preview = new DebouncedPreview(client, renderPreview, previewError);

function fastChar(): string {
  const v = el<HTMLInputElement>("fast-char").value;
  return v.length ? v[0] : "a";
}

// Drag: single-char preview to keep latency low. Release: full charset.
function commitFast(): void {
  preview.commit({ attributes: panel.snapshot(), text: fastChar() });
}
function commitFull(): void {
  preview.commit({ attributes: panel.snapshot() });
  preview.flush();
  panel.dirty = false;
}

function buildSliders(names: string[]): void {
  panel = new SliderPanel(names);
  sliderBox.replaceChildren(
    ...names.map((name) => {
      const row = document.createElement("div");
      row.className = "slider-row";
      row.dataset.name = name;

      const label = document.createElement("label");
      label.textContent = name;

      const value = document.createElement("span");
      value.className = "value";
      value.textContent = "0.50";

      const input = document.createElement("input");
      input.type = "range";
      input.min = "0";
      input.max = "1";
      input.step = "0.01";
      input.value = "0.5";
      input.addEventListener("input", () => {
        if (panel.set(name, Number(input.value))) {
          value.textContent = panel.get(name).toFixed(2);
          commitFast();
        }
      });
      input.addEventListener("change", commitFull);

      row.append(label, input, value);
      return row;
    }),
  );
}

function syncSliders(): void {
  for (const row of sliderBox.querySelectorAll<HTMLElement>(".slider-row")) {
    const name = row.dataset.name!;
    const input = row.querySelector("input")!;
    const value = row.querySelector<HTMLSpanElement>(".value")!;
    input.value = String(panel.get(name));
    value.textContent = panel.get(name).toFixed(2);
  }
}

// ---- presets ----------------------------------------------------------

let presetA: Record<string, number> | null = null;
let presetB: Record<string, number> | null = null;

function savePresetFile(): void {
  // same JSON shape the CLI accepts with --attributes @file
  const blob = new Blob([JSON.stringify(panel.snapshot(), null, 2)], {
    type: "application/json",
  });
  const a = document.createElement("a");
  a.href = URL.createObjectURL(blob);
  a.download = "preset.json";
  a.click();
  URL.revokeObjectURL(a.href);
}

function loadPresetFile(file: File): void {
  file.text().then((text) => {
    try {
      panel.applyPreset(file.name, JSON.parse(text) as Record<string, number>);
    } catch {
      showBanner(`could not parse ${file.name} as a JSON attribute map`);
      return;
    }
    syncSliders();
    commitFull();
  });
}

// ---- edit sweep -------------------------------------------------------

async function runSweep(): Promise<void> {
  const name = el<HTMLSelectElement>("sweep-attr").value;
  const values = [0, 0.25, 0.5, 0.75, 1];
  sweepRow.replaceChildren();
  const base = panel.snapshot();
  for (const v of values) {
    const res = await client.generate({
      attributes: { ...base, [name]: v },
      text: fastChar(),
    });
    const fig = document.createElement("figure");
    fig.className = "tile";
    const img = document.createElement("img");
    img.src = "data:image/png;base64," + res.glyphs[0].image;
    const cap = document.createElement("figcaption");
    cap.textContent = `${name}=${v}`;
    fig.append(img, cap);
    sweepRow.append(fig);
  }
}

// ---- interpolation scrubber -------------------------------------------

const scrubber = new InterpolationScrubber(client, (frame: InterpolateFrame) => {
  glyphTiles(scrubImg, frame);
  scrubLabel.textContent = `λ = ${frame.lam.toFixed(1)} · source ${frame.source_font}`;
});

async function loadScrubber(): Promise<void> {
  if (!presetA || !presetB) {
    showBanner("set presets A and B first");
    return;
  }
  try {
    await scrubber.load(presetA, presetB, { steps: LAMBDA_STEPS, text: fastChar() });
    el<HTMLInputElement>("scrub").value = "0";
  } catch (err) {
    previewError(err as ApiError);
  }
}

// ---- boot -------------------------------------------------------------

async function boot(): Promise<void> {
  let names: string[];
  try {
    await client.health();
    names = (await client.attributes()).names;
  } catch (err) {
    showBanner(`service not reachable at ${API_BASE} (${(err as Error).message})`, () => void boot());
    return;
  }
  buildSliders(names);

  const sweepSel = el<HTMLSelectElement>("sweep-attr");
  sweepSel.replaceChildren(
    ...names.map((n) => {
      const o = document.createElement("option");
      o.value = n;
      o.textContent = n;
      return o;
    }),
  );

  el<HTMLButtonElement>("random").onclick = () => {
    panel.randomize();
    syncSliders();
    commitFull();
  };
  el<HTMLButtonElement>("reset").onclick = () => {
    panel.applyPreset(null, {});
    syncSliders();
    commitFull();
  };
  el<HTMLButtonElement>("save-preset").onclick = savePresetFile;
  el<HTMLInputElement>("load-preset").onchange = (e) => {
    const file = (e.target as HTMLInputElement).files?.[0];
    if (file) loadPresetFile(file);
  };
  el<HTMLButtonElement>("set-a").onclick = () => {
    presetA = panel.snapshot();
    el<HTMLSpanElement>("ab-state").textContent = presetB ? "A and B set" : "A set";
  };
  el<HTMLButtonElement>("set-b").onclick = () => {
    presetB = panel.snapshot();
    el<HTMLSpanElement>("ab-state").textContent = presetA ? "A and B set" : "B set";
  };
  el<HTMLButtonElement>("scrub-load").onclick = () => void loadScrubber();
  el<HTMLInputElement>("scrub").oninput = (e) => {
    if (!scrubber.loaded) return;
    scrubber.seek(Number((e.target as HTMLInputElement).value));
  };
  el<HTMLButtonElement>("sweep-go").onclick = () =>
    runSweep().catch((err) => previewError(err as ApiError));

  commitFull(); // first render: all sliders at 0.5
}

void boot();
