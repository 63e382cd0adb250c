// UI wiring: preset pickers, interpolation slider, waveform display, looped
// playback, and the live-vs-prerendered data source toggle.

import { ApiError, BankInfo, SynthApi, TableResponse } from "./api.js";
import { LoopPlayer } from "./audio.js";
import { clamp, nearestBankIndex } from "./mapping.js";
import { drawWaveform } from "./plot.js";
import { LatestRequestScheduler } from "./scheduler.js";

type Source = "live" | "prerendered";

interface UiState {
  presetA: string;
  presetB: string;
  t: number;
  source: Source;
  table: number[] | null; // current 514-sample table
  liveTable: number[] | null;
  prerenderedTable: number[] | null;
}

const api = new SynthApi();
const player = new LoopPlayer();

const state: UiState = {
  presetA: "sine",
  presetB: "saw",
  t: 0,
  source: "live",
  table: null,
  liveTable: null,
  prerenderedTable: null,
};

let banks: BankInfo[] = [];

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function notice(message: string | null): void {
  const box = el<HTMLDivElement>("notice");
  box.textContent = message ?? "";
  box.style.display = message ? "block" : "none";
}

function bankFor(a: string, b: string): BankInfo | undefined {
  return banks.find((info) => info.labels[0] === a && info.labels[1] === b);
}

function redraw(): void {
  const canvas = el<HTMLCanvasElement>("waveform");
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  // Overlay both sources when both are known, so toggling compares them.
  drawWaveform(ctx, state.table, canvas.width, canvas.height);
  const other = state.source === "live" ? state.prerenderedTable : state.liveTable;
  if (other && other !== state.table) {
    drawWaveform(ctx, other, canvas.width, canvas.height, "#ee9a5b55", false);
  }
}

function applyTable(body: TableResponse, from: Source): void {
  if (from === "live") state.liveTable = body.samples;
  else state.prerenderedTable = body.samples;
  state.table = body.samples;
  player.setTable(body.samples);
  el<HTMLButtonElement>("play").disabled = false;
  redraw();
  notice(null);
}

const scheduler = new LatestRequestScheduler<number, TableResponse>(
  (t) => fetchTable(t),
  (body) => applyTable(body, state.source),
  (err) => {
    // Non-blocking: the last table keeps looping while the notice shows.
    const detail = err instanceof ApiError ? `${err.status}: ${err.message}` : String(err);
    notice(`request failed (${detail})`);
  },
  100, // at most 10 requests/s from slider bursts
);

async function fetchTable(t: number): Promise<TableResponse> {
  if (state.source === "prerendered") {
    const info = bankFor(state.presetA, state.presetB);
    if (!info) throw new ApiError(404, "no pre-rendered bank for this pair");
    return api.bankTable(info.name, nearestBankIndex(t, info.step_count));
  }
  return api.interp(state.presetA, state.presetB, t);
}

function requestCurrent(): void {
  scheduler.request(state.t);
}

function syncSourceToggle(): void {
  const toggle = el<HTMLInputElement>("source-toggle");
  const available = bankFor(state.presetA, state.presetB) !== undefined;
  toggle.disabled = !available;
  if (!available && state.source === "prerendered") {
    state.source = "live";
    toggle.checked = false;
  }
}

function bindControls(): void {
  const slider = el<HTMLInputElement>("t-slider");
  slider.addEventListener("input", () => {
    state.t = clamp(Number(slider.value), 0, 1);
    el<HTMLSpanElement>("t-value").textContent = state.t.toFixed(2);
    requestCurrent();
  });

  for (const which of ["a", "b"] as const) {
    const select = el<HTMLSelectElement>(`preset-${which}`);
    select.addEventListener("change", () => {
      if (which === "a") state.presetA = select.value;
      else state.presetB = select.value;
      state.liveTable = null;
      state.prerenderedTable = null;
      syncSourceToggle();
      requestCurrent();
    });
  }

  const toggle = el<HTMLInputElement>("source-toggle");
  toggle.addEventListener("change", () => {
    state.source = toggle.checked ? "prerendered" : "live";
    requestCurrent();
  });

  const note = el<HTMLInputElement>("note");
  note.addEventListener("input", () => {
    const value = Math.round(clamp(Number(note.value), 0, 127));
    el<HTMLSpanElement>("note-value").textContent = String(value);
    player.setNote(value);
  });

  el<HTMLButtonElement>("play").addEventListener("click", () => {
    player.play(Math.round(clamp(Number(note.value), 0, 127)));
  });
  el<HTMLButtonElement>("stop").addEventListener("click", () => player.stop());

  const bind = (id: string, apply: (v: number) => void, lo: number, hi: number) => {
    const input = el<HTMLInputElement>(id);
    input.addEventListener("input", () => apply(clamp(Number(input.value), lo, hi)));
  };
  bind("attack", (v) => (player.envelope.attackS = v), 0, 5);
  bind("decay", (v) => (player.envelope.decayS = v), 0, 5);
  bind("sustain", (v) => (player.envelope.sustainLevel = v), 0, 1);
  bind("release", (v) => (player.envelope.releaseS = v), 0, 5);
  bind("cutoff", (v) => player.setFilterCutoff(v), 20, 20000);
}

async function start(): Promise<void> {
  bindControls();
  el<HTMLButtonElement>("play").disabled = true;
  try {
    const presets = await api.presets();
    for (const which of ["a", "b"] as const) {
      const select = el<HTMLSelectElement>(`preset-${which}`);
      select.innerHTML = "";
      for (const preset of presets) {
        const option = document.createElement("option");
        option.value = preset.name;
        option.textContent = preset.name;
        select.appendChild(option);
      }
    }
    el<HTMLSelectElement>("preset-a").value = state.presetA;
    el<HTMLSelectElement>("preset-b").value = state.presetB;
    banks = await api.banks();
  } catch (err) {
    notice(`service unreachable: ${String(err)}`);
    return;
  }
  syncSourceToggle();
  requestCurrent();
}

void start();
