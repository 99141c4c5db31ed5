/**
 * Studio wiring: one session against the local service.
 *
 * Left pane edits the design (dims, architecture file, budget, skip
 * toggles), the center canvas shows the current floorplan, the right
 * pane shows metrics and the history scatter. All numbers on screen
 * are service responses; this file only moves them around.
 */

import {
  ApiError, StudioClient,
  type ArchDoc, type EvalRequest, type LayoutDoc, type SpecDoc,
} from "./api.js";
import { markFront } from "./pareto.js";
import {
  drawFloorplan, pickLink, renderBudget, renderMetrics, renderPareto,
  type LinkHit,
} from "./render.js";
import { EvalQueue, SessionState, specKey } from "./state.js";

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

const client = new StudioClient("");
const archives = new Map<string, ArchDoc>();

let session: SessionState | null = null;
let layoutDoc: LayoutDoc | null = null;
let hits: LinkHit[] = [];
let stepToken = 0;

const canvas = $<HTMLCanvasElement>("canvas");
const tooltip = $("tooltip");
const banner = $("banner");

function showBanner(msg: string | null): void {
  banner.textContent = msg ?? "";
  banner.classList.toggle("hidden", msg === null);
}

function setStatus(msg: string): void {
  $("status").textContent = msg;
}

function request(spec: SpecDoc, evaluator: "analytic" | "simulated" = "analytic"): EvalRequest {
  if (!session) throw new Error("no active session");
  return {
    dims: session.dims,
    arch: session.arch,
    spec,
    budget: session.budget,
    evaluator,
  };
}

const queue = new EvalQueue(async (spec) => {
  if (!session) return;
  setStatus("scoring...");
  const [evalRes, layoutRes] = await Promise.all([
    client.evaluate(request(spec)),
    client.layout(request(spec)),
  ]);
  session.record({
    spec, candidate: evalRes.candidate, display: evalRes.display,
    evaluator: "analytic",
  });
  layoutDoc = layoutRes.layout;
  showBanner(null);
  redraw();
  setStatus(evalRes.candidate.feasible ? "ready" : "infeasible design");
  void refreshSuggestion(spec);
});

async function refreshSuggestion(spec: SpecDoc): Promise<void> {
  if (!session) return;
  const token = ++stepToken;
  try {
    const res = await client.exploreStep(request(spec));
    if (token !== stepToken || !session) return;
    const el = $("suggest");
    if (res.suggested === null) {
      el.textContent = "no feasible next toggle";
      return;
    }
    el.textContent = `suggested next: s_r=[${res.suggested.s_r}] s_c=[${res.suggested.s_c}]`;
  } catch {
    // Suggestions are advisory; losing one never disturbs the session.
  }
}

function submitCurrent(): void {
  if (!session) return;
  queue.submit(session.currentSpec()).catch((err) => {
    showBanner(err instanceof ApiError
      ? `service rejected the request: ${err.message}`
      : `service unreachable: ${err}`);
    setStatus("idle");
  });
}

function rebuildToggles(): void {
  if (!session) return;
  for (const axis of ["row", "col"] as const) {
    const host = $(axis === "row" ? "row-toggles" : "col-toggles");
    host.textContent = "";
    for (const x of session.offsetRange(axis)) {
      const label = document.createElement("label");
      const box = document.createElement("input");
      box.type = "checkbox";
      box.checked = session.has(x, axis);
      box.addEventListener("change", () => {
        session?.toggle(x, axis);
        submitCurrent();
      });
      label.append(box, String(x));
      host.append(label);
    }
  }
}

function redraw(): void {
  if (!session) return;
  const spec = session.currentSpec();
  $("current-spec").textContent =
    `s_r=[${spec.s_r}] s_c=[${spec.s_c}] on ${session.dims.rows}x${session.dims.cols}`;

  const latest = session.latestFor(specKey(spec));
  if (latest) {
    renderMetrics($("metrics"), latest);
    renderBudget($("budget-bar"), latest.candidate.cost?.area_overhead ?? null,
                 session.budget);
    $("budget-label").textContent = latest.candidate.cost
      ? `${latest.display["area_overhead"]} of ${session.budget}`
      : latest.candidate.error ?? "no report";
  }

  hits = layoutDoc ? drawFloorplan(canvas, layoutDoc) : [];
  if (!layoutDoc) {
    const ctx = canvas.getContext("2d");
    ctx?.clearRect(0, 0, canvas.width, canvas.height);
  }

  const cands = session.history.map((e) => e.candidate);
  const marks = markFront(cands);
  renderPareto($<HTMLElement>("pareto") as unknown as SVGSVGElement,
               session.history, marks);
  $("history-count").textContent =
    `${session.history.length} evaluated, ${marks.filter(Boolean).length} on front`;
  renderPins();
}

function renderPins(): void {
  if (!session) return;
  const ul = $("pins");
  ul.textContent = "";
  for (const key of session.pinned) {
    const entry = session.latestFor(key);
    const li = document.createElement("li");
    const [, sr, sc] = JSON.parse(key) as [string, number[], number[]];
    li.textContent = `s_r=[${sr}] s_c=[${sc}]`
      + (entry ? ` sat=${entry.display["saturation_throughput"] ?? "?"}`
        + ` zl=${entry.display["zero_load_latency_cycles"] ?? "?"}` : "");
    li.title = "click to unpin";
    li.addEventListener("click", () => {
      session?.togglePin(key);
      renderPins();
    });
    ul.append(li);
  }
}

function newSession(): void {
  const name = $<HTMLSelectElement>("arch-select").value;
  const arch = archives.get(name);
  if (!arch) {
    showBanner("load an architecture file first");
    return;
  }
  const dims = {
    rows: Number($<HTMLInputElement>("rows").value),
    cols: Number($<HTMLInputElement>("cols").value),
  };
  const budget = Number($<HTMLInputElement>("budget").value);
  try {
    session = new SessionState(dims, arch, name, budget);
  } catch (err) {
    showBanner(String(err));
    return;
  }
  layoutDoc = null;
  showBanner(null);
  rebuildToggles();
  redraw();
  submitCurrent();
}

function addArch(name: string, doc: ArchDoc): void {
  archives.set(name, doc);
  const select = $<HTMLSelectElement>("arch-select");
  select.textContent = "";
  for (const key of archives.keys()) {
    const opt = document.createElement("option");
    opt.value = key;
    opt.textContent = key;
    select.append(opt);
  }
  select.value = name;
}

function bindControls(): void {
  $("new-session").addEventListener("click", newSession);

  $<HTMLInputElement>("arch-file").addEventListener("change", async (ev) => {
    const input = ev.target as HTMLInputElement;
    for (const file of input.files ?? []) {
      try {
        addArch(file.name.replace(/\.json$/, ""), JSON.parse(await file.text()));
      } catch (err) {
        showBanner(`could not read ${file.name}: ${err}`);
      }
    }
  });

  $("deep-eval").addEventListener("click", async () => {
    if (!session) return;
    const spec = session.currentSpec();
    setStatus("simulating (this sweeps the full load range)...");
    try {
      const res = await client.evaluate(request(spec, "simulated"));
      session.record({
        spec, candidate: res.candidate, display: res.display,
        evaluator: "simulated",
      });
      redraw();
      setStatus("ready");
    } catch (err) {
      showBanner(`deep evaluate failed: ${err}`);
      setStatus("idle");
    }
  });

  $("pin").addEventListener("click", () => {
    if (!session) return;
    session.togglePin(specKey(session.currentSpec()));
    renderPins();
  });

  $("export").addEventListener("click", () => {
    if (!session) return;
    const blob = new Blob([session.exportJson()], { type: "application/json" });
    const a = document.createElement("a");
    a.href = URL.createObjectURL(blob);
    a.download = "studio-session.json";
    a.click();
    URL.revokeObjectURL(a.href);
  });

  $<HTMLInputElement>("import-file").addEventListener("change", async (ev) => {
    const input = ev.target as HTMLInputElement;
    const file = input.files?.[0];
    if (!file) return;
    try {
      session = SessionState.importJson(await file.text());
      addArch(session.archName, session.arch);
      $<HTMLInputElement>("rows").value = String(session.dims.rows);
      $<HTMLInputElement>("cols").value = String(session.dims.cols);
      $<HTMLInputElement>("budget").value = String(session.budget);
      layoutDoc = null;
      rebuildToggles();
      redraw();
      // Redrawing the floorplan needs fresh geometry; metrics and the
      // scatter come straight from the imported history.
      submitCurrent();
    } catch (err) {
      showBanner(`could not import session: ${err}`);
    }
  });

  canvas.addEventListener("mousemove", (ev) => {
    const box = canvas.getBoundingClientRect();
    const label = pickLink(hits, ev.clientX - box.left, ev.clientY - box.top);
    tooltip.classList.toggle("hidden", label === null);
    if (label !== null) {
      tooltip.textContent = label;
      tooltip.style.left = `${ev.clientX - box.left + 12}px`;
      tooltip.style.top = `${ev.clientY - box.top + 12}px`;
    }
  });
  canvas.addEventListener("mouseleave", () => tooltip.classList.add("hidden"));
}

async function boot(): Promise<void> {
  bindControls();
  try {
    const schema = await client.schema();
    $("service-info").textContent =
      `${schema.tool} ${schema.version}, objective: ${schema.objective.join(", ")}`;
    $<HTMLInputElement>("budget").value = String(schema.defaults.budget);
  } catch {
    showBanner("service not reachable; start it with: python3 -m nocforge serve --static <this directory>");
  }
  // Convenience: pick up an architecture file placed next to the app.
  try {
    const res = await fetch("arch_example.json");
    if (res.ok) {
      addArch("arch_example", (await res.json()) as ArchDoc);
      newSession();
    }
  } catch {
    // Nothing bundled; the designer loads a file by hand.
  }
}

void boot();
