/**
 * Non-dominated filtering for the history panel.
 *
 * The rule is the same one the search backend applies: area overhead,
 * network power, negated saturation throughput, and zero-load latency,
 * all minimized. A candidate with an identical metric vector never
 * dominates, repeated specs only compete through their first
 * appearance, and failed evaluations stay off the front entirely.
 */

import type { CandidateDoc } from "./api.js";
import { specKey } from "./state.js";

export type Metrics = [number, number, number, number];

export function metrics(c: CandidateDoc): Metrics | null {
  if (c.cost === null || c.perf === null) return null;
  return [
    c.cost.area_overhead,
    c.cost.p_noc_w,
    -c.perf.saturation_throughput,
    c.perf.zero_load_latency_cycles,
  ];
}

export function dominates(a: Metrics, b: Metrics): boolean {
  let strict = false;
  for (let i = 0; i < 4; i++) {
    if (a[i] > b[i]) return false;
    if (a[i] < b[i]) strict = true;
  }
  return strict;
}

/**
 * One flag per input candidate: true when it sits on the front.
 * Later duplicates and failures are always false.
 */
export function markFront(cands: CandidateDoc[]): boolean[] {
  const seen = new Set<string>();
  const competing: { i: number; m: Metrics }[] = [];
  for (let i = 0; i < cands.length; i++) {
    const m = metrics(cands[i]);
    if (m === null) continue;
    const key = specKey(cands[i].spec);
    if (seen.has(key)) continue;
    seen.add(key);
    competing.push({ i, m });
  }
  const out = new Array<boolean>(cands.length).fill(false);
  for (const a of competing) {
    out[a.i] = !competing.some((b) => dominates(b.m, a.m));
  }
  return out;
}
