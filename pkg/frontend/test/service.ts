// Spawns the routing service on the corridor fixture for contract tests.

import { type ChildProcess, spawn } from "node:child_process";
import { cp, mkdtemp, readFile } from "node:fs/promises";
import net from "node:net";
import os from "node:os";
import path from "node:path";
import { fileURLToPath } from "node:url";

const here = path.dirname(fileURLToPath(import.meta.url)); // frontend/dist/test
const frontendRoot = path.resolve(here, "..", "..");
const repoRoot = path.resolve(frontendRoot, "..");
const fixturesDir = path.join(frontendRoot, "test", "fixtures");

export interface RunningService {
  base: string;
  stop(): Promise<void>;
}

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const probe = net.createServer();
    probe.once("error", reject);
    probe.listen(0, "127.0.0.1", () => {
      const address = probe.address();
      if (address === null || typeof address === "string") {
        reject(new Error("no port assigned"));
        return;
      }
      probe.close(() => resolve(address.port));
    });
  });
}

async function waitForHealth(base: string, child: ChildProcess): Promise<void> {
  const deadline = Date.now() + 15_000;
  while (Date.now() < deadline) {
    if (child.exitCode !== null) {
      throw new Error(`service exited early with code ${child.exitCode}`);
    }
    try {
      const resp = await fetch(`${base}/health`);
      if (resp.ok) return;
    } catch {
      // not listening yet
    }
    await new Promise((r) => setTimeout(r, 100));
  }
  throw new Error("service did not become healthy in time");
}

export async function startService(): Promise<RunningService> {
  const work = await mkdtemp(path.join(os.tmpdir(), "cctvaware-ui-"));
  await cp(path.join(fixturesDir, "registry.geojson"), path.join(work, "registry.geojson"));
  await cp(path.join(fixturesDir, "graph.json"), path.join(work, "graph.json"));
  const port = await freePort();
  const child = spawn(
    "python3",
    [
      "-m", "cctvaware.cli",
      "--registry", path.join(work, "registry.geojson"),
      "--graph", path.join(work, "graph.json"),
      "serve", "--port", String(port),
    ],
    {
      env: { ...process.env, PYTHONPATH: path.join(repoRoot, "src") },
      stdio: ["ignore", "ignore", "pipe"],
    }
  );
  let stderr = "";
  child.stderr?.on("data", (chunk) => (stderr += String(chunk)));
  const base = `http://127.0.0.1:${port}`;
  try {
    await waitForHealth(base, child);
  } catch (err) {
    child.kill("SIGKILL");
    throw new Error(`${(err as Error).message}\nservice stderr:\n${stderr}`);
  }
  return {
    base,
    stop: () =>
      new Promise<void>((resolve) => {
        child.once("exit", () => resolve());
        child.kill("SIGTERM");
        setTimeout(() => child.kill("SIGKILL"), 2_000).unref();
      }),
  };
}

export interface FixtureEndpoints {
  start: { lat: number; lon: number };
  end: { lat: number; lon: number };
}

export async function fixtureEndpoints(): Promise<FixtureEndpoints> {
  const raw = JSON.parse(await readFile(path.join(fixturesDir, "endpoints.json"), "utf-8"));
  const parse = (s: string) => {
    const [lat, lon] = s.split(",").map(Number);
    return { lat, lon };
  };
  return { start: parse(raw.start), end: parse(raw.end) };
}
