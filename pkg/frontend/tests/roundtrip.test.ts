/**
 * Studio round trip: a session that toggles its way to s_r={4},
 * s_c={2,5} on the 8x8 example grid must display the exact bytes the
 * predict and simulate commands print for the same design.
 */

import { afterAll, beforeAll, describe, expect, it } from "vitest";
import { join } from "node:path";

import { StudioClient, type ArchDoc, type Display } from "../src/api.js";
import { EvalQueue, SessionState } from "../src/state.js";
import {
  archPath, makeWorkDir, rawToken, readText, removeWorkDir, runCli,
  startServer, type ServerHandle,
} from "./helpers.js";

const AREA_POWER_KEYS = [
  "a_tot_mm2", "a_nonoc_mm2", "area_overhead",
  "p_tot_w", "p_nonoc_w", "p_noc_w",
] as const;

describe("session display vs command-line reports", () => {
  let server: ServerHandle;
  let work: string;
  let display: Display;
  let session: SessionState;

  beforeAll(async () => {
    server = await startServer();
    work = makeWorkDir();

    const arch = JSON.parse(readText(archPath)) as ArchDoc;
    session = new SessionState({ rows: 8, cols: 8 }, arch, "arch_example");
    const client = new StudioClient(server.base);
    const queue = new EvalQueue(async (spec) => {
      const res = await client.evaluate({
        dims: session.dims, arch: session.arch, spec, budget: session.budget,
      });
      session.record({
        spec, candidate: res.candidate, display: res.display,
        evaluator: "analytic",
      });
    });

    // Three clicks, each scored through the coalescing queue like the UI.
    for (const [x, axis] of [[4, "row"], [2, "col"], [5, "col"]] as const) {
      session.toggle(x, axis);
      await queue.submit(session.currentSpec());
    }
    const last = session.history[session.history.length - 1];
    expect(last.spec).toEqual({ name: "sparse_hamming", s_r: [4], s_c: [2, 5] });
    expect(last.candidate.feasible).toBe(false); // rich design, over 0.40
    expect(last.candidate.cost).not.toBeNull();
    display = last.display;

    runCli(["generate", "--topo", "shg", "--rows", "8", "--cols", "8",
            "--sr", "4", "--sc", "2,5", "--out", join(work, "topo.json")], work);
  });

  afterAll(() => {
    server?.stop();
    if (work) removeWorkDir(work);
  });

  it("shows area and power figures byte-equal to the predict report", () => {
    runCli(["predict", "--topology", join(work, "topo.json"),
            "--arch", archPath, "--out", join(work, "cost.json")], work);
    const report = readText(join(work, "cost.json"));
    for (const key of AREA_POWER_KEYS) {
      expect(display[key], key).toBe(rawToken(report, key));
    }
  });

  it("shows latency and throughput figures byte-equal to the simulate report", () => {
    runCli(["simulate", "--topology", join(work, "topo.json"),
            "--arch", archPath, "--load", "0.01", "--seed", "3",
            "--warmup", "200", "--window", "500", "--drain", "200",
            "--out", join(work, "point.json")], work);
    const report = readText(join(work, "point.json"));
    expect(display["zero_load_latency_cycles"])
      .toBe(rawToken(report, "zero_load_latency_cycles"));
    expect(display["analytic_bound"]).toBe(rawToken(report, "analytic_bound"));
    // The interactive evaluator reports the bound as its throughput.
    expect(display["saturation_throughput"]).toBe(display["analytic_bound"]);
  });

  it("reproduces identical panel contents after export and import", () => {
    const copy = SessionState.importJson(session.exportJson());
    expect(copy.exportJson()).toBe(session.exportJson());
    const last = copy.history[copy.history.length - 1];
    expect(last.display).toEqual(display);
  });
});
