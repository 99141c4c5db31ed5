/**
 * Test fixtures that talk to the real backend: a spawned service
 * process, command-line runs, and raw-token extraction from report
 * files for byte-level comparisons.
 */

import { execFileSync, spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { dirname, join, resolve } from "node:path";
import { fileURLToPath } from "node:url";

export const repoRoot = resolve(dirname(fileURLToPath(import.meta.url)), "..", "..");
export const archPath = join(repoRoot, "configs", "arch_example.json");

// The studio never depends on the ambient seed; neither may its tests.
const cleanEnv = { ...process.env };
delete cleanEnv.HW_SEED;

export interface ServerHandle {
  base: string;
  stop(): void;
}

/** Start the service on an ephemeral port and wait for its address. */
export function startServer(): Promise<ServerHandle> {
  const proc: ChildProcess = spawn(
    "python3", ["-u", "-m", "nocforge", "serve", "--port", "0"],
    { cwd: repoRoot, env: cleanEnv, stdio: ["ignore", "pipe", "pipe"] },
  );
  return new Promise((resolveP, rejectP) => {
    let out = "";
    const timer = setTimeout(
      () => rejectP(new Error(`service never reported its address:\n${out}`)),
      30_000,
    );
    proc.stdout!.on("data", (chunk: Buffer) => {
      out += chunk.toString();
      const m = out.match(/serving on (http:\/\/[\d.]+:\d+)/);
      if (m) {
        clearTimeout(timer);
        resolveP({ base: m[1], stop: () => void proc.kill("SIGTERM") });
      }
    });
    proc.stderr!.on("data", (chunk: Buffer) => { out += chunk.toString(); });
    proc.once("exit", (code) => {
      clearTimeout(timer);
      rejectP(new Error(`service exited with ${code}:\n${out}`));
    });
  });
}

export function runCli(args: string[], cwd: string): string {
  return execFileSync("python3", ["-m", "nocforge", ...args], {
    cwd, env: cleanEnv, encoding: "utf8",
  });
}

export function makeWorkDir(): string {
  return mkdtempSync(join(tmpdir(), "studio-test-"));
}

export function removeWorkDir(dir: string): void {
  rmSync(dir, { recursive: true, force: true });
}

export function readText(path: string): string {
  return readFileSync(path, "utf8");
}

/**
 * The exact character sequence a report file prints for one key.
 * Reports are indent-2 JSON, so every scalar sits alone on its line.
 */
export function rawToken(reportText: string, key: string): string {
  const m = reportText.match(new RegExp(`"${key}": (.*?),?\\n`));
  if (!m) throw new Error(`key ${key} not found in report`);
  return m[1];
}
