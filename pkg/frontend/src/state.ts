/**
 * Session state: the designer's working memory.
 *
 * Holds the grid dimensions, the chosen architecture document, the
 * current skip-set toggle state, and an append-only history of every
 * candidate the service has scored. Exporting and re-importing the
 * session reproduces the panels exactly, because panels only ever read
 * what is stored here.
 */

import type { ArchDoc, CandidateDoc, Dims, Display, SpecDoc } from "./api.js";

/** Canonical identity of a spec; sorted so set order never matters. */
export function specKey(spec: SpecDoc): string {
  const sr = [...spec.s_r].sort((a, b) => a - b);
  const sc = [...spec.s_c].sort((a, b) => a - b);
  return JSON.stringify([spec.name, sr, sc]);
}

export interface HistoryEntry {
  spec: SpecDoc;
  candidate: CandidateDoc;
  display: Display;
  /** Which engine scored it; "analytic" unless a deep evaluate ran. */
  evaluator: string;
}

export interface SessionDoc {
  dims: Dims;
  archName: string;
  arch: ArchDoc;
  budget: number;
  s_r: number[];
  s_c: number[];
  history: HistoryEntry[];
  pinned: string[];
}

export class SessionState {
  readonly dims: Dims;
  readonly arch: ArchDoc;
  readonly archName: string;
  budget: number;
  private readonly sR = new Set<number>();
  private readonly sC = new Set<number>();
  private readonly entries: HistoryEntry[] = [];
  private readonly pins = new Set<string>();

  constructor(dims: Dims, arch: ArchDoc, archName: string, budget = 0.4) {
    if (!Number.isInteger(dims.rows) || !Number.isInteger(dims.cols)
        || dims.rows < 2 || dims.cols < 2) {
      throw new Error(`grid needs at least 2x2 tiles, got ${dims.rows}x${dims.cols}`);
    }
    this.dims = { ...dims };
    this.arch = arch;
    this.archName = archName;
    this.budget = budget;
  }

  /** Valid row skip offsets span 2..cols-1, column skips 2..rows-1. */
  offsetRange(axis: "row" | "col"): number[] {
    const limit = axis === "row" ? this.dims.cols : this.dims.rows;
    const out: number[] = [];
    for (let x = 2; x < limit; x++) out.push(x);
    return out;
  }

  has(x: number, axis: "row" | "col"): boolean {
    return (axis === "row" ? this.sR : this.sC).has(x);
  }

  /** Flip one offset and return the resulting spec. */
  toggle(x: number, axis: "row" | "col"): SpecDoc {
    if (!this.offsetRange(axis).includes(x)) {
      throw new Error(`offset ${x} is outside the ${axis} range for ${this.dims.rows}x${this.dims.cols}`);
    }
    const set = axis === "row" ? this.sR : this.sC;
    if (set.has(x)) set.delete(x);
    else set.add(x);
    return this.currentSpec();
  }

  currentSpec(): SpecDoc {
    return {
      name: "sparse_hamming",
      s_r: [...this.sR].sort((a, b) => a - b),
      s_c: [...this.sC].sort((a, b) => a - b),
    };
  }

  get history(): readonly HistoryEntry[] {
    return this.entries;
  }

  record(entry: HistoryEntry): void {
    this.entries.push(entry);
  }

  /** Latest history entry for a spec, preferring the requested engine. */
  latestFor(key: string, evaluator?: string): HistoryEntry | undefined {
    for (let i = this.entries.length - 1; i >= 0; i--) {
      const e = this.entries[i];
      if (specKey(e.spec) !== key) continue;
      if (evaluator === undefined || e.evaluator === evaluator) return e;
    }
    return undefined;
  }

  get pinned(): ReadonlySet<string> {
    return this.pins;
  }

  togglePin(key: string): void {
    if (this.pins.has(key)) this.pins.delete(key);
    else this.pins.add(key);
  }

  exportJson(): string {
    const doc: SessionDoc = {
      dims: this.dims,
      archName: this.archName,
      arch: this.arch,
      budget: this.budget,
      s_r: [...this.sR].sort((a, b) => a - b),
      s_c: [...this.sC].sort((a, b) => a - b),
      history: this.entries,
      pinned: [...this.pins].sort(),
    };
    return JSON.stringify(doc, null, 2);
  }

  static importJson(text: string): SessionState {
    const doc = JSON.parse(text) as SessionDoc;
    const s = new SessionState(doc.dims, doc.arch, doc.archName, doc.budget);
    for (const x of doc.s_r) s.sR.add(x);
    for (const x of doc.s_c) s.sC.add(x);
    for (const e of doc.history) s.entries.push(e);
    for (const k of doc.pinned) s.pins.add(k);
    return s;
  }
}

/**
 * Single-lane evaluation queue. At most one request is in flight; a
 * burst of toggles collapses to its newest spec, so the service never
 * sees work the designer already clicked past.
 */
export class EvalQueue {
  private pending: SpecDoc | null = null;
  private draining: Promise<void> | null = null;

  constructor(private readonly run: (spec: SpecDoc) => Promise<void>) {}

  /** Resolves when the queue is empty again. */
  submit(spec: SpecDoc): Promise<void> {
    this.pending = spec;
    if (!this.draining) this.draining = this.drain();
    return this.draining;
  }

  get busy(): boolean {
    return this.draining !== null;
  }

  private async drain(): Promise<void> {
    try {
      while (this.pending) {
        const next = this.pending;
        this.pending = null;
        await this.run(next);
      }
    } finally {
      this.draining = null;
    }
  }
}
