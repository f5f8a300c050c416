/** Typed client for the reconstruction service API.
 *
 * Every call except login requires the bearer token; a 401 clears the token
 * and notifies the app so it can fall back to the login view. Server errors
 * arrive as JSON {code, message} and are rethrown as ApiError with the code
 * kept verbatim for display.
 */

export interface UploadMeta {
  data_id: string;
  kind: number;
  nc: number;
  ny: number;
  nx: number;
  size_bytes: number;
}

export interface JobProgress {
  iteration: number;
  iterate_change: number | null;
}

export interface JobResultRefs {
  recon_id: string;
  errmap_id: string | null;
  rlne: number | null;
}

export interface JobView {
  job_id: string;
  method: string;
  status: "queued" | "running" | "done" | "failed";
  params: Record<string, unknown>;
  refs: { data_id: string; mask_id: string; maps_id: string | null; truth_id: string | null };
  progress: JobProgress;
  result?: JobResultRefs;
  failure_reason?: string;
}

export interface DemoFixture {
  name: string;
  kind: number;
  nc: number;
  ny: number;
  nx: number;
  size_bytes: number;
  url: string;
}

export interface SubmitJobRequest {
  method: string;
  data_id: string;
  mask_id: string;
  maps_id?: string;
  truth_id?: string;
  params: Record<string, unknown>;
}

export class ApiError extends Error {
  constructor(
    public readonly code: string,
    message: string,
    public readonly status: number,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

type FetchLike = typeof fetch;

export class ApiClient {
  token: string | null = null;

  constructor(
    private readonly baseUrl = "",
    private readonly onUnauthorized: () => void = () => {},
    private readonly fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request(
    method: string,
    path: string,
    body?: BodyInit | null,
    opts: { json?: unknown; raw?: boolean; auth?: boolean } = {},
  ): Promise<unknown> {
    const { json, raw = false, auth = true } = opts;
    const headers: Record<string, string> = {};
    if (auth) {
      if (!this.token) {
        this.onUnauthorized();
        throw new ApiError("Unauthorized", "not logged in", 401);
      }
      headers["Authorization"] = `Bearer ${this.token}`;
    }
    let payload: BodyInit | null | undefined = body;
    if (json !== undefined) {
      headers["Content-Type"] = "application/json";
      payload = JSON.stringify(json);
    } else if (body !== undefined && body !== null) {
      headers["Content-Type"] = "application/octet-stream";
    }
    const response = await this.fetchImpl(this.baseUrl + path, {
      method,
      headers,
      body: payload ?? null,
    });
    if (!response.ok) {
      let code = "HttpError";
      let message = `${response.status}`;
      try {
        const detail = (await response.json()) as { code?: string; message?: string };
        code = detail.code ?? code;
        message = detail.message ?? message;
      } catch {
        /* non-JSON error body; keep the status text */
      }
      if (response.status === 401) {
        this.token = null;
        this.onUnauthorized();
      }
      throw new ApiError(code, message, response.status);
    }
    return raw ? response.arrayBuffer() : response.json();
  }

  async login(username: string, password: string): Promise<string> {
    const out = (await this.request("POST", "/api/login", undefined, {
      json: { username, password },
      auth: false,
    })) as { token: string };
    this.token = out.token;
    return out.token;
  }

  logout(): void {
    this.token = null;
  }

  async demoManifest(): Promise<DemoFixture[]> {
    const out = (await this.request("GET", "/api/demo")) as { fixtures: DemoFixture[] };
    return out.fixtures;
  }

  demoFixture(name: string): Promise<ArrayBuffer> {
    return this.request("GET", `/api/demo/${name}`, undefined, { raw: true }) as Promise<ArrayBuffer>;
  }

  uploadData(bytes: ArrayBuffer | Uint8Array): Promise<UploadMeta> {
    const body = bytes instanceof Uint8Array ? bytes : new Uint8Array(bytes);
    return this.request("POST", "/api/data", body as unknown as BodyInit) as Promise<UploadMeta>;
  }

  fetchData(dataId: string): Promise<ArrayBuffer> {
    return this.request("GET", `/api/data/${dataId}`, undefined, { raw: true }) as Promise<ArrayBuffer>;
  }

  deleteData(dataId: string): Promise<unknown> {
    return this.request("DELETE", `/api/data/${dataId}`);
  }

  submitJob(request: SubmitJobRequest): Promise<{ job_id: string }> {
    return this.request("POST", "/api/jobs", undefined, { json: request }) as Promise<{ job_id: string }>;
  }

  jobStatus(jobId: string): Promise<JobView> {
    return this.request("GET", `/api/jobs/${jobId}`) as Promise<JobView>;
  }

  jobResult(jobId: string): Promise<ArrayBuffer> {
    return this.request("GET", `/api/jobs/${jobId}/result`, undefined, { raw: true }) as Promise<ArrayBuffer>;
  }

  jobErrormap(jobId: string): Promise<ArrayBuffer> {
    return this.request("GET", `/api/jobs/${jobId}/errormap`, undefined, { raw: true }) as Promise<ArrayBuffer>;
  }

  deleteJob(jobId: string): Promise<unknown> {
    return this.request("DELETE", `/api/jobs/${jobId}`);
  }
}
