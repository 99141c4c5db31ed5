/**
 * Typed client for the local evaluation service.
 *
 * The wire shapes below mirror the service responses field for field.
 * Every number the studio shows comes out of these responses; the
 * `display` map in particular carries each headline metric already
 * rendered to a string, so panels can show it verbatim and stay
 * byte-identical to the command-line reports.
 */

export interface Dims {
  rows: number;
  cols: number;
}

export interface SpecDoc {
  name: string;
  s_r: number[];
  s_c: number[];
}

/** Architecture file contents, passed through untouched. */
export type ArchDoc = Record<string, unknown>;

export interface EvalRequest {
  dims: Dims;
  arch: ArchDoc;
  spec: SpecDoc;
  budget?: number;
  evaluator?: "analytic" | "simulated";
}

export interface CostDoc {
  a_tot_mm2: number;
  a_nonoc_mm2: number;
  area_overhead: number;
  p_tot_w: number;
  p_nonoc_w: number;
  p_noc_w: number;
  link_latencies: number[];
  cell_counts: Record<string, number>;
}

export interface PerfDoc {
  zero_load_latency_cycles: number;
  saturation_throughput: number;
  analytic_bound: number;
  curve: [number, number, number][];
}

export interface CandidateDoc {
  spec: SpecDoc;
  cost: CostDoc | null;
  perf: PerfDoc | null;
  feasible: boolean;
  pipeline_digest: string;
  error: string | null;
}

/** Metric name to the exact string the reports print for it. */
export type Display = Record<string, string>;

export interface EvaluateResponse {
  candidate: CandidateDoc;
  display: Display;
}

export interface StepResponse {
  current: CandidateDoc;
  neighbors: CandidateDoc[];
  suggested: SpecDoc | null;
}

/** [kind, index, first cell, cell count] along one axis. */
export type BandRow = [string, number, number, number];

export interface LayoutLink {
  a: [number, number];
  b: [number, number];
  kind: string;
  span: number;
  latency_cycles: number;
  length_mm: number;
  points: [number, number][];
}

export interface LayoutDoc {
  dims: Dims;
  cell_mm: { height: number; width: number };
  n_rows: number;
  n_cols: number;
  row_bands: BandRow[];
  col_bands: BandRow[];
  links: LayoutLink[];
}

export interface LayoutResponse {
  layout: LayoutDoc | null;
  error: string | null;
}

export interface SchemaDoc {
  tool: string;
  version: string;
  objective: string[];
  topology_names: string[];
  defaults: { budget: number; evaluator: string; rc: Record<string, unknown> };
  endpoints: Record<string, string>;
}

/** A 400 from the service; anything else surfaces as a plain Error. */
export class ApiError extends Error {
  constructor(
    readonly code: string,
    readonly field: string | null,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export class StudioClient {
  constructor(readonly base: string) {}

  async schema(): Promise<SchemaDoc> {
    const res = await fetch(`${this.base}/api/schema`);
    if (!res.ok) throw new Error(`schema request failed: ${res.status}`);
    return (await res.json()) as SchemaDoc;
  }

  evaluate(req: EvalRequest): Promise<EvaluateResponse> {
    return this.post("/api/evaluate", req);
  }

  exploreStep(req: EvalRequest): Promise<StepResponse> {
    return this.post("/api/explore/step", req);
  }

  layout(req: EvalRequest): Promise<LayoutResponse> {
    return this.post("/api/layout", req);
  }

  private async post<T>(path: string, body: unknown): Promise<T> {
    const res = await fetch(`${this.base}${path}`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    const doc = await res.json();
    if (res.status === 400) {
      const err = doc as { code: string; field: string | null; message: string };
      throw new ApiError(err.code, err.field, err.message);
    }
    if (!res.ok) throw new Error(`${path} failed: ${res.status}`);
    return doc as T;
  }
}
