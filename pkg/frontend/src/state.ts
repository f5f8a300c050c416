/** In-memory session state.
 *
 * Everything lives per tab except the bearer token, which sits in
 * sessionStorage so a reload keeps the session but closing the tab leaks
 * nothing. Upload/job lists are rebuilt from server responses as the user
 * works; there is no client-side persistence of data.
 */

import type { JobView, UploadMeta } from "./api.js";

const TOKEN_KEY = "xmrc.token";

export interface TokenStorage {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
  removeItem(key: string): void;
}

export interface UploadEntry {
  dataId: string;
  name: string;
  kind: number;
  nc: number;
  ny: number;
  nx: number;
  sizeBytes: number;
}

export interface JobEntry {
  jobId: string;
  method: string;
  status: JobView["status"];
  iteration: number;
  iterateChanges: number[];
  rlne: number | null;
  errmapId: string | null;
  failureReason: string | null;
}

const memoryStorage = (): TokenStorage => {
  const bag = new Map<string, string>();
  return {
    getItem: (k) => bag.get(k) ?? null,
    setItem: (k, v) => void bag.set(k, v),
    removeItem: (k) => void bag.delete(k),
  };
};

export class SessionStore {
  uploads: UploadEntry[] = [];
  jobs: JobEntry[] = [];
  username: string | null = null;

  private readonly storage: TokenStorage;

  constructor(storage?: TokenStorage) {
    this.storage = storage ?? memoryStorage();
  }

  get token(): string | null {
    return this.storage.getItem(TOKEN_KEY);
  }

  set token(value: string | null) {
    if (value === null) {
      this.storage.removeItem(TOKEN_KEY);
    } else {
      this.storage.setItem(TOKEN_KEY, value);
    }
  }

  addUpload(meta: UploadMeta, name: string): UploadEntry {
    const entry: UploadEntry = {
      dataId: meta.data_id,
      name,
      kind: meta.kind,
      nc: meta.nc,
      ny: meta.ny,
      nx: meta.nx,
      sizeBytes: meta.size_bytes,
    };
    this.uploads = [...this.uploads.filter((u) => u.dataId !== entry.dataId), entry];
    return entry;
  }

  removeUpload(dataId: string): void {
    this.uploads = this.uploads.filter((u) => u.dataId !== dataId);
  }

  uploadsOfKind(kind: number): UploadEntry[] {
    return this.uploads.filter((u) => u.kind === kind);
  }

  /** Merge a status poll into the job list, accumulating the change trace. */
  upsertJob(view: JobView): JobEntry {
    const existing = this.jobs.find((j) => j.jobId === view.job_id);
    const entry: JobEntry = existing ?? {
      jobId: view.job_id,
      method: view.method,
      status: view.status,
      iteration: 0,
      iterateChanges: [],
      rlne: null,
      errmapId: null,
      failureReason: null,
    };
    entry.status = view.status;
    entry.failureReason = view.failure_reason ?? null;
    if (view.progress.iteration > entry.iteration && view.progress.iterate_change !== null) {
      entry.iterateChanges = [...entry.iterateChanges, view.progress.iterate_change];
    }
    entry.iteration = Math.max(entry.iteration, view.progress.iteration);
    if (view.result) {
      entry.rlne = view.result.rlne;
      entry.errmapId = view.result.errmap_id;
    }
    if (!existing) {
      this.jobs = [...this.jobs, entry];
    }
    return entry;
  }

  removeJob(jobId: string): void {
    this.jobs = this.jobs.filter((j) => j.jobId !== jobId);
  }

  clear(): void {
    this.token = null;
    this.username = null;
    this.uploads = [];
    this.jobs = [];
  }
}
