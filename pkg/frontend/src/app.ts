/** View wiring: login, uploads, job submission, polling, results.
 *
 * All state sits in SessionStore; this class only moves data between the
 * API client and the DOM. Deletion always goes through a confirmation
 * dialog that spells out its permanence.
 */

import { ApiClient, ApiError, type JobView } from "./api.js";
import {
  KIND_COILMAPS,
  KIND_IMAGE,
  KIND_KSPACE,
  KIND_MULTICOIL_KSPACE,
  KIND_MASK,
  kindName,
  parseImageMagnitude,
  parsePgm,
} from "./containers.js";
import { toRequestParams, validateParams, type SolverFormParams } from "./params.js";
import { JobPoller } from "./poll.js";
import { drawGray, sparklinePoints } from "./render.js";
import { SessionStore } from "./state.js";

const DELETE_WARNING =
  "Deletion is permanent: the server removes the data immediately and keeps no copy. Continue?";

export class App {
  readonly poller: JobPoller;

  constructor(
    private readonly doc: Document,
    readonly api: ApiClient,
    readonly store: SessionStore,
  ) {
    this.poller = new JobPoller(
      (jobId) => this.api.jobStatus(jobId),
      (view) => this.onJobUpdate(view),
      (jobId, error) => this.onJobPollError(jobId, error),
    );
  }

  private el<T extends HTMLElement>(id: string): T {
    const node = this.doc.getElementById(id);
    if (!node) throw new Error(`missing element #${id}`);
    return node as T;
  }

  start(): void {
    this.bindLogin();
    this.bindUploads();
    this.bindJobForm();
    this.el<HTMLButtonElement>("logout-btn").addEventListener("click", () => this.logout());
    if (this.store.token) {
      this.api.token = this.store.token;
      this.showWorkspace();
    } else {
      this.showLogin();
    }
  }

  // ------------------------------------------------------------------ views

  showLogin(): void {
    this.el("login-view").hidden = false;
    this.el("workspace").hidden = true;
    this.el("session-box").hidden = true;
  }

  showWorkspace(): void {
    this.el("login-view").hidden = true;
    this.el("workspace").hidden = false;
    this.el("session-box").hidden = false;
    this.el("session-user").textContent = this.store.username ?? "";
    this.refreshUploads();
    this.refreshJobs();
    this.refreshJobForm();
  }

  onUnauthorized(): void {
    this.store.clear();
    this.poller.stopAll();
    this.showLogin();
  }

  private logout(): void {
    this.api.logout();
    this.onUnauthorized();
  }

  private showError(id: string, error: unknown): void {
    const box = this.el(id);
    box.hidden = false;
    box.textContent =
      error instanceof ApiError ? `${error.code}: ${error.message}` : String(error);
  }

  private clearError(id: string): void {
    const box = this.el(id);
    box.hidden = true;
    box.textContent = "";
  }

  // ------------------------------------------------------------------ login

  private bindLogin(): void {
    this.el<HTMLFormElement>("login-form").addEventListener("submit", (event) => {
      event.preventDefault();
      void this.login();
    });
  }

  private async login(): Promise<void> {
    const username = this.el<HTMLInputElement>("login-username").value;
    const password = this.el<HTMLInputElement>("login-password").value;
    this.clearError("login-error");
    try {
      await this.api.login(username, password);
    } catch (error) {
      this.showError("login-error", error);
      return;
    }
    this.store.token = this.api.token;
    this.store.username = username;
    this.showWorkspace();
  }

  // ------------------------------------------------------------------ uploads

  private bindUploads(): void {
    this.el<HTMLInputElement>("file-input").addEventListener("change", (event) => {
      const input = event.target as HTMLInputElement;
      void this.uploadFiles(input.files).finally(() => (input.value = ""));
    });
    this.el<HTMLButtonElement>("demo-btn").addEventListener("click", () => void this.loadDemoData());
  }

  private async uploadFiles(files: FileList | null): Promise<void> {
    if (!files) return;
    this.clearError("upload-error");
    for (const file of Array.from(files)) {
      try {
        const meta = await this.api.uploadData(await file.arrayBuffer());
        this.store.addUpload(meta, file.name);
      } catch (error) {
        this.showError("upload-error", error);
        break;
      }
    }
    this.refreshUploads();
    this.refreshJobForm();
  }

  async loadDemoData(): Promise<void> {
    this.clearError("upload-error");
    try {
      for (const fixture of await this.api.demoManifest()) {
        const bytes = await this.api.demoFixture(fixture.name);
        const meta = await this.api.uploadData(bytes);
        this.store.addUpload(meta, `demo:${fixture.name}`);
      }
    } catch (error) {
      this.showError("upload-error", error);
    }
    this.refreshUploads();
    this.refreshJobForm();
  }

  private async deleteUpload(dataId: string): Promise<void> {
    if (!this.doc.defaultView?.confirm(DELETE_WARNING)) return;
    try {
      await this.api.deleteData(dataId);
    } catch (error) {
      if (!(error instanceof ApiError && error.code === "UnknownDataId")) {
        this.showError("upload-error", error);
        return;
      }
      // already gone server-side; treat as removed
    }
    this.store.removeUpload(dataId);
    this.refreshUploads();
    this.refreshJobForm();
  }

  refreshUploads(): void {
    const tbody = this.el<HTMLTableSectionElement>("uploads-table").querySelector("tbody")!;
    tbody.textContent = "";
    for (const upload of this.store.uploads) {
      const row = this.doc.createElement("tr");
      const dims = upload.kind === KIND_MULTICOIL_KSPACE || upload.kind === KIND_COILMAPS
        ? `${upload.nc}x${upload.ny}x${upload.nx}`
        : `${upload.ny}x${upload.nx}`;
      row.innerHTML =
        `<td>${upload.name}</td><td>${kindName(upload.kind)}</td>` +
        `<td>${dims}</td><td>${upload.sizeBytes}</td>`;
      const cell = this.doc.createElement("td");
      const btn = this.doc.createElement("button");
      btn.type = "button";
      btn.textContent = "Delete";
      btn.addEventListener("click", () => void this.deleteUpload(upload.dataId));
      cell.appendChild(btn);
      row.appendChild(cell);
      tbody.appendChild(row);
    }
  }

  // ------------------------------------------------------------------ job form

  private bindJobForm(): void {
    this.el<HTMLSelectElement>("method-select").addEventListener("change", () => this.refreshJobForm());
    for (const id of ["param-lambda", "param-gamma", "param-iters", "param-tol", "param-levels"]) {
      this.el(id).addEventListener("input", () => this.refreshValidation());
    }
    for (const id of ["param-lambda-mode", "param-frame"]) {
      this.el(id).addEventListener("change", () => this.refreshValidation());
    }
    this.el<HTMLFormElement>("job-form").addEventListener("submit", (event) => {
      event.preventDefault();
      void this.submitJob();
    });
  }

  formParams(): SolverFormParams {
    return {
      lambda: Number(this.el<HTMLInputElement>("param-lambda").value),
      lambda_mode: this.el<HTMLSelectElement>("param-lambda-mode").value as SolverFormParams["lambda_mode"],
      gamma: Number(this.el<HTMLInputElement>("param-gamma").value),
      max_iter: Number(this.el<HTMLInputElement>("param-iters").value),
      tol: Number(this.el<HTMLInputElement>("param-tol").value),
      frame: this.el<HTMLSelectElement>("param-frame").value as SolverFormParams["frame"],
      levels: Number(this.el<HTMLInputElement>("param-levels").value),
    };
  }

  private fillSelect(id: string, kind: number, optional: boolean): void {
    const select = this.el<HTMLSelectElement>(id);
    const current = select.value;
    select.textContent = "";
    if (optional) {
      const none = this.doc.createElement("option");
      none.value = "";
      none.textContent = "(none)";
      select.appendChild(none);
    }
    for (const upload of this.store.uploadsOfKind(kind)) {
      const option = this.doc.createElement("option");
      option.value = upload.dataId;
      option.textContent = `${upload.name} (${upload.ny}x${upload.nx})`;
      select.appendChild(option);
    }
    if ([...select.options].some((o) => o.value === current)) select.value = current;
  }

  refreshJobForm(): void {
    const method = this.el<HTMLSelectElement>("method-select").value;
    const parallel = method === "pfista_parallel";
    this.fillSelect("data-select", parallel ? KIND_MULTICOIL_KSPACE : KIND_KSPACE, false);
    this.fillSelect("mask-select", KIND_MASK, false);
    this.fillSelect("maps-select", KIND_COILMAPS, true);
    this.fillSelect("truth-select", KIND_IMAGE, true);
    this.el("maps-label").hidden = !parallel;
    this.refreshValidation();
  }

  refreshValidation(): string[] {
    const problems = validateParams(this.formParams());
    if (!this.el<HTMLSelectElement>("data-select").value) problems.push("choose k-space data");
    if (!this.el<HTMLSelectElement>("mask-select").value) problems.push("choose a mask");
    const list = this.el<HTMLUListElement>("param-problems");
    list.textContent = "";
    for (const problem of problems) {
      const item = this.doc.createElement("li");
      item.textContent = problem;
      list.appendChild(item);
    }
    this.el<HTMLButtonElement>("submit-btn").disabled = problems.length > 0;
    return problems;
  }

  async submitJob(): Promise<void> {
    this.clearError("submit-error");
    if (this.refreshValidation().length > 0) return; // blocked before any network call
    const method = this.el<HTMLSelectElement>("method-select").value;
    const mapsId = this.el<HTMLSelectElement>("maps-select").value;
    const truthId = this.el<HTMLSelectElement>("truth-select").value;
    try {
      const out = await this.api.submitJob({
        method,
        data_id: this.el<HTMLSelectElement>("data-select").value,
        mask_id: this.el<HTMLSelectElement>("mask-select").value,
        maps_id: method === "pfista_parallel" && mapsId ? mapsId : undefined,
        truth_id: truthId || undefined,
        params: toRequestParams(this.formParams()),
      });
      this.onJobUpdate(await this.api.jobStatus(out.job_id));
      this.poller.watch(out.job_id);
    } catch (error) {
      this.showError("submit-error", error);
    }
  }

  // ------------------------------------------------------------------ jobs

  onJobUpdate(view: JobView): void {
    this.store.upsertJob(view);
    this.refreshJobs();
  }

  private onJobPollError(jobId: string, error: unknown): void {
    if (error instanceof ApiError && (error.code === "UnknownJob" || error.status === 401)) {
      this.store.removeJob(jobId);
      this.refreshJobs();
      return;
    }
    this.showError("submit-error", error);
  }

  private async deleteJob(jobId: string): Promise<void> {
    if (!this.doc.defaultView?.confirm(DELETE_WARNING)) return;
    this.poller.stop(jobId);
    try {
      await this.api.deleteJob(jobId);
    } catch (error) {
      if (!(error instanceof ApiError && error.code === "UnknownJob")) {
        this.showError("submit-error", error);
        return;
      }
    }
    this.store.removeJob(jobId);
    this.el("results-view").hidden = true;
    this.refreshJobs();
  }

  refreshJobs(): void {
    const tbody = this.el<HTMLTableSectionElement>("jobs-table").querySelector("tbody")!;
    tbody.textContent = "";
    for (const job of this.store.jobs) {
      const row = this.doc.createElement("tr");
      const shortId = job.jobId.slice(0, 8);
      const rlne = job.rlne !== null ? job.rlne.toFixed(6) : "";
      const spark = job.iterateChanges.length
        ? `<svg class="sparkline" width="120" height="24"><polyline points="${sparklinePoints(job.iterateChanges)}"/></svg>`
        : "";
      const statusText = job.status === "failed" && job.failureReason
        ? `failed: ${job.failureReason}`
        : job.status;
      row.innerHTML =
        `<td><code>${shortId}</code></td><td>${job.method}</td>` +
        `<td class="status-${job.status}">${statusText}</td>` +
        `<td>${job.iteration || ""}</td><td>${spark}</td><td>${rlne}</td>`;
      const cell = this.doc.createElement("td");
      if (job.status === "done") {
        const view = this.doc.createElement("button");
        view.type = "button";
        view.textContent = "Results";
        view.addEventListener("click", () => void this.showResults(job.jobId));
        cell.appendChild(view);
      }
      const del = this.doc.createElement("button");
      del.type = "button";
      del.textContent = "Delete";
      del.addEventListener("click", () => void this.deleteJob(job.jobId));
      cell.appendChild(del);
      row.appendChild(cell);
      tbody.appendChild(row);
    }
  }

  // ------------------------------------------------------------------ results

  async showResults(jobId: string): Promise<void> {
    const job = this.store.jobs.find((j) => j.jobId === jobId);
    if (!job) return;
    try {
      const bytes = await this.api.jobResult(jobId);
      const image = parseImageMagnitude(bytes);
      drawGray(this.el<HTMLCanvasElement>("magnitude-canvas"), image.ny, image.nx, image.values);

      const link = this.el<HTMLAnchorElement>("download-link");
      const url = URL.createObjectURL(new Blob([bytes], { type: "application/octet-stream" }));
      if (link.href.startsWith("blob:")) URL.revokeObjectURL(link.href);
      link.href = url;

      const errFigure = this.el("errmap-figure");
      if (job.errmapId) {
        const pgm = parsePgm(await this.api.jobErrormap(jobId));
        drawGray(this.el<HTMLCanvasElement>("errmap-canvas"), pgm.ny, pgm.nx, pgm.pixels);
        errFigure.hidden = false;
      } else {
        errFigure.hidden = true;
      }
      this.el("result-job").textContent = jobId.slice(0, 8);
      this.el("result-rlne").textContent =
        job.rlne !== null ? `RLNE (server): ${job.rlne.toFixed(6)}` : "No ground truth supplied.";
      this.el("results-view").hidden = false;
    } catch (error) {
      this.showError("submit-error", error);
    }
  }
}
