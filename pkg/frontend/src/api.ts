/** Typed client for the personaforge HTTP service.
 *
 * The workbench is a thin client: every number it shows comes from one of
 * these response payloads. The client itself only moves JSON around.
 */

export interface ParamsPreview {
  r: number;
  m: number | null;
  cap: number;
  over_cap: boolean;
  beta_warning: boolean;
}

export interface DatasetInfo {
  id: string;
  subjects: number;
  dimensions: number;
}

export interface DatasetDoc {
  subjects: { id: string; label: string }[];
  dimensions: { id: string; label: string; left: string; right: string }[];
  values: (number | null)[][];
}

export interface RunParams {
  w: number | "auto";
  alpha: number;
  beta: number;
  seed: number;
}

export interface Cluster {
  id: string;
  members: string[];
  subspace: string[];
  means: Record<string, number>;
  quality: number;
}

export interface RunStatus {
  run: string;
  status: "queued" | "running" | "done" | "error";
  params: RunParams;
  result?: { params: RunParams; clusters: Cluster[]; warnings: string[] };
  error?: string;
}

export interface DendrogramDoc {
  leaves: string[];
  merges: { left: number; right: number; height: number }[];
}

export interface CutResult {
  height: number;
  sets: string[][];
}

export interface PersonaDim {
  dim: string;
  mean: number;
  std: number;
  support: number;
  conflicting: boolean;
}

export interface Persona {
  name: string;
  sources: string[];
  members: string[];
  dims: PersonaDim[];
  description?: string;
}

export interface RadarDoc {
  axes: { dim: string; label: string; rim: string; centre: string }[];
  series: { id: string; values: (number | null)[]; greyed: boolean[] }[];
}

export interface PerceptualMapDoc {
  rows: { id: string; coords: number[] }[];
  cols: { id: string; coords: number[] }[];
  eigenvalues: number[];
  inertia_pct: number[];
  total_inertia: number;
  warnings: string[];
}

export interface CooccurrenceDoc {
  subjects: string[];
  counts: number[][];
  excluded: string[];
}

export class ApiError extends Error {
  constructor(public status: number, public payload: unknown) {
    super(`service error ${status}: ${JSON.stringify(payload)}`);
  }
}

type Fetcher = typeof fetch;

export class ForgeClient {
  constructor(private base: string = "", private fetcher: Fetcher = fetch) {}

  private async request<T>(method: string, path: string, body?: unknown,
                           raw = false): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      if (typeof body === "string") {
        init.body = body;
      } else {
        init.body = JSON.stringify(body);
        init.headers = { "content-type": "application/json" };
      }
    }
    const resp = await this.fetcher(this.base + path, init);
    const text = await resp.text();
    if (!resp.ok) {
      let payload: unknown = text;
      try { payload = JSON.parse(text); } catch { /* plain-text error */ }
      throw new ApiError(resp.status, payload);
    }
    return (raw ? text : JSON.parse(text)) as T;
  }

  paramsPreview(dims: number, beta: number, alpha: number): Promise<ParamsPreview> {
    return this.request("GET", `/params/preview?dims=${dims}&beta=${beta}&alpha=${alpha}`);
  }

  uploadDataset(csvOrJson: string): Promise<DatasetInfo> {
    return this.request("POST", "/datasets", csvOrJson);
  }

  dataset(id: string): Promise<DatasetDoc> {
    return this.request("GET", `/datasets/${id}`);
  }

  createSession(datasetId: string): Promise<{ id: string }> {
    return this.request("POST", "/sessions", { dataset: datasetId });
  }

  startRun(sid: string, params: RunParams): Promise<{ run: string }> {
    return this.request("POST", `/sessions/${sid}/runs`, params);
  }

  runStatus(sid: string, runId: string): Promise<RunStatus> {
    return this.request("GET", `/sessions/${sid}/runs/${runId}`);
  }

  clusters(sid: string): Promise<{ clusters: Cluster[] }> {
    return this.request("GET", `/sessions/${sid}/clusters`);
  }

  similarity(sid: string, linkage = "average"):
      Promise<{ ids: string[]; matrix: number[][]; linkage: string }> {
    return this.request("POST", `/sessions/${sid}/similarity`, { linkage });
  }

  dendrogram(sid: string): Promise<DendrogramDoc> {
    return this.request("GET", `/sessions/${sid}/dendrogram`);
  }

  cut(sid: string, height: number): Promise<CutResult> {
    return this.request("POST", `/sessions/${sid}/cut`, { height });
  }

  createProto(sid: string, set: string[], vetoedDims: string[],
              name: string): Promise<Persona> {
    return this.request("POST", `/sessions/${sid}/protos`,
                        { set, vetoed_dims: vetoedDims, name });
  }

  /** Merge stats for a set without storing anything (drives the merge grid). */
  previewProto(sid: string, set: string[], vetoedDims: string[] = []): Promise<Persona> {
    return this.request("POST", `/sessions/${sid}/protos`,
                        { set, vetoed_dims: vetoedDims, name: "", preview: true });
  }

  radar(sid: string, a: string, b: string): Promise<RadarDoc> {
    return this.request(
      "GET", `/sessions/${sid}/radar?a=${encodeURIComponent(a)}&b=${encodeURIComponent(b)}`);
  }

  cooccurrence(sid: string, exclude: string[] = []): Promise<CooccurrenceDoc> {
    const q = exclude.length ? `?exclude=${exclude.join(",")}` : "";
    return this.request("GET", `/sessions/${sid}/cooccurrence${q}`);
  }

  ca(sid: string, exclude: string[] = []): Promise<PerceptualMapDoc> {
    const q = exclude.length ? `?exclude=${exclude.join(",")}` : "";
    return this.request("GET", `/sessions/${sid}/ca${q}`);
  }

  mca(sid: string): Promise<PerceptualMapDoc> {
    return this.request("GET", `/sessions/${sid}/mca`);
  }

  report(sid: string): Promise<string> {
    return this.request("GET", `/sessions/${sid}/report`, undefined, true);
  }
}
