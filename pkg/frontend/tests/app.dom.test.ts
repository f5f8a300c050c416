/** DOM smoke test: the real index.html driven by App against a faked API.
 * @vitest-environment jsdom
 */

import { readFileSync } from "node:fs";
import { join } from "node:path";
import { beforeEach, describe, expect, it, vi } from "vitest";

import { ApiClient } from "../src/api.js";
import { App } from "../src/app.js";
import { SessionStore } from "../src/state.js";
import { buildImageContainer, buildMaskContainer, jsonResponse } from "./helpers.js";

const INDEX_HTML = readFileSync(join(__dirname, "..", "index.html"), "utf-8");

function kspaceBytes(): ArrayBuffer {
  // kind-2 container: reuse the image builder and patch the kind byte
  const bytes = buildImageContainer(4, 4, Array(16).fill(1), Array(16).fill(0));
  new Uint8Array(bytes)[6] = 2;
  return bytes;
}

/** Tiny in-memory fake of the service endpoints the app touches. */
function fakeService() {
  const uploads = new Map<string, { kind: number; bytes: ArrayBuffer }>();
  let jobCounter = 0;
  const jobs = new Map<string, any>();
  let nextId = 0;

  const fetchImpl = vi.fn(async (url: any, init: RequestInit = {}): Promise<Response> => {
    const path = String(url);
    const method = (init.method ?? "GET").toUpperCase();
    const authed = (init.headers as Record<string, string>)?.["Authorization"] === "Bearer tok1";
    if (path.endsWith("/api/login") && method === "POST") {
      const body = JSON.parse(String(init.body));
      if (body.password !== "EMBC2021") {
        return jsonResponse(401, { code: "Unauthorized", message: "invalid credentials" });
      }
      return jsonResponse(200, { token: "tok1", expires_in: 86400 });
    }
    if (!authed) return jsonResponse(401, { code: "Unauthorized", message: "missing bearer token" });

    if (path.endsWith("/api/demo") && method === "GET") {
      return jsonResponse(200, {
        fixtures: [
          { name: "kspace_single", kind: 2, nc: 1, ny: 4, nx: 4, size_bytes: 148, url: "/api/demo/kspace_single" },
          { name: "mask_radial_30", kind: 4, nc: 1, ny: 4, nx: 4, size_bytes: 36, url: "/api/demo/mask_radial_30" },
        ],
      });
    }
    if (path.includes("/api/demo/") && method === "GET") {
      const payload = path.endsWith("kspace_single")
        ? kspaceBytes()
        : buildMaskContainer(4, 4, [1, 0, 0, 1, 1, 1, 1, 1, 0, 1, 0, 1, 1, 0, 1, 0]);
      return new Response(payload, { status: 200 });
    }
    if (path.endsWith("/api/data") && method === "POST") {
      const raw = init.body as Uint8Array;
      const view = new DataView(raw.buffer, raw.byteOffset, raw.byteLength);
      const id = `d${nextId++}`;
      uploads.set(id, { kind: view.getUint8(6), bytes: raw.slice().buffer });
      return jsonResponse(200, {
        data_id: id, kind: view.getUint8(6), nc: 1, ny: 4, nx: 4, size_bytes: raw.byteLength,
      });
    }
    if (path.includes("/api/data/") && method === "DELETE") {
      const id = path.split("/").pop()!;
      if (!uploads.delete(id)) return jsonResponse(404, { code: "UnknownDataId", message: "gone" });
      return jsonResponse(200, { deleted: id });
    }
    if (path.endsWith("/api/jobs") && method === "POST") {
      const body = JSON.parse(String(init.body));
      if (body.params.gamma > 1) {
        return jsonResponse(400, { code: "InvalidParams", message: "gamma must be in (0, 1]" });
      }
      const id = `job${jobCounter++}`;
      jobs.set(id, {
        job_id: id, method: body.method, status: "done", params: body.params,
        refs: { data_id: body.data_id, mask_id: body.mask_id, maps_id: null, truth_id: null },
        progress: { iteration: 5, iterate_change: 1e-4 },
        result: { recon_id: "r1", errmap_id: null, rlne: 0.1234 },
      });
      return jsonResponse(200, { job_id: id, status: "queued" });
    }
    if (path.includes("/api/jobs/") && path.endsWith("/result")) {
      return new Response(buildImageContainer(4, 4, Array(16).fill(2), Array(16).fill(0)), { status: 200 });
    }
    if (path.includes("/api/jobs/") && method === "GET") {
      const id = path.split("/").pop()!;
      const job = jobs.get(id);
      if (!job) return jsonResponse(404, { code: "UnknownJob", message: "gone" });
      return jsonResponse(200, job);
    }
    if (path.includes("/api/jobs/") && method === "DELETE") {
      const id = path.split("/").pop()!;
      if (!jobs.delete(id)) return jsonResponse(404, { code: "UnknownJob", message: "gone" });
      return jsonResponse(200, { deleted: id });
    }
    return jsonResponse(404, { code: "HttpError", message: `unhandled ${method} ${path}` });
  });
  return { fetchImpl, uploads, jobs };
}

function bootApp() {
  document.documentElement.innerHTML = INDEX_HTML;
  const service = fakeService();
  const store = new SessionStore();
  const app = new App(
    document,
    new ApiClient("", () => app.onUnauthorized(), service.fetchImpl as any),
    store,
  );
  app.start();
  return { app, store, service };
}

const flush = () => new Promise((r) => setTimeout(r, 0));

async function login(app: App) {
  (document.getElementById("login-username") as HTMLInputElement).value = "EMBC";
  (document.getElementById("login-password") as HTMLInputElement).value = "EMBC2021";
  (document.getElementById("login-form") as HTMLFormElement).dispatchEvent(
    new Event("submit", { bubbles: true, cancelable: true }),
  );
  await flush();
}

describe("App over the real index.html", () => {
  beforeEach(() => {
    vi.stubGlobal("confirm", vi.fn(() => true));
    // jsdom has no object-URL support; the app only needs a href for the link
    URL.createObjectURL = vi.fn(() => "blob:fake") as any;
    URL.revokeObjectURL = vi.fn() as any;
  });

  it("shows login first, workspace after a successful login", async () => {
    const { app, store } = bootApp();
    expect(document.getElementById("login-view")!.hidden).toBe(false);
    expect(document.getElementById("workspace")!.hidden).toBe(true);
    await login(app);
    expect(store.token).toBe("tok1");
    expect(document.getElementById("workspace")!.hidden).toBe(false);
    expect(document.getElementById("session-user")!.textContent).toBe("EMBC");
  });

  it("surfaces a wrong password verbatim and stays on login", async () => {
    const { app } = bootApp();
    (document.getElementById("login-username") as HTMLInputElement).value = "EMBC";
    (document.getElementById("login-password") as HTMLInputElement).value = "nope";
    (document.getElementById("login-form") as HTMLFormElement).dispatchEvent(
      new Event("submit", { bubbles: true, cancelable: true }),
    );
    await flush();
    const error = document.getElementById("login-error")!;
    expect(error.hidden).toBe(false);
    expect(error.textContent).toContain("Unauthorized");
    expect(document.getElementById("workspace")!.hidden).toBe(true);
    void app;
  });

  it("loads demo data into the uploads table and the job form selects", async () => {
    const { app } = bootApp();
    await login(app);
    await app.loadDemoData();
    const rows = document.querySelectorAll("#uploads-table tbody tr");
    expect(rows.length).toBe(2);
    expect(rows[0].textContent).toContain("demo:kspace_single");
    expect(rows[0].textContent).toContain("k-space");
    const dataSelect = document.getElementById("data-select") as HTMLSelectElement;
    const maskSelect = document.getElementById("mask-select") as HTMLSelectElement;
    expect(dataSelect.options.length).toBe(1);
    expect(maskSelect.options.length).toBe(1);
  });

  it("disables submission for gamma > 1 before any network call", async () => {
    const { app, service } = bootApp();
    await login(app);
    await app.loadDemoData();
    const gamma = document.getElementById("param-gamma") as HTMLInputElement;
    gamma.value = "2";
    gamma.dispatchEvent(new Event("input", { bubbles: true }));
    const button = document.getElementById("submit-btn") as HTMLButtonElement;
    expect(button.disabled).toBe(true);
    expect(document.getElementById("param-problems")!.textContent).toContain("gamma");
    const callsBefore = service.fetchImpl.mock.calls.length;
    (document.getElementById("job-form") as HTMLFormElement).dispatchEvent(
      new Event("submit", { bubbles: true, cancelable: true }),
    );
    await flush();
    expect(service.fetchImpl.mock.calls.length).toBe(callsBefore); // no request left the form
  });

  it("submits a job, lists it with the server RLNE, renders results, deletes it", async () => {
    const { app } = bootApp();
    await login(app);
    await app.loadDemoData();
    (document.getElementById("job-form") as HTMLFormElement).dispatchEvent(
      new Event("submit", { bubbles: true, cancelable: true }),
    );
    await flush();
    await flush();
    const jobRows = document.querySelectorAll("#jobs-table tbody tr");
    expect(jobRows.length).toBe(1);
    expect(jobRows[0].textContent).toContain("done");
    expect(jobRows[0].textContent).toContain("0.123400");

    await app.showResults(app.store.jobs[0].jobId);
    expect(document.getElementById("results-view")!.hidden).toBe(false);
    expect(document.getElementById("result-rlne")!.textContent).toContain("0.123400");

    const deleteButtons = document.querySelectorAll("#jobs-table tbody button");
    (deleteButtons[deleteButtons.length - 1] as HTMLButtonElement).click();
    await flush();
    expect(document.querySelectorAll("#jobs-table tbody tr").length).toBe(0);
    expect(app.store.jobs).toEqual([]);
  });
});
