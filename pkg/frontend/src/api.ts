/** Typed client for the humor-detection inference service. */

export interface Prediction {
  probabilities: { non_humor: number; humor: number };
  predicted_label: "humor" | "non_humor";
  latency_ms: number;
  demux_ms: number;
  extract_ms: number;
  model_ms: number;
  model_id: string;
}

export interface ModelInfo {
  model_id: string;
  arch: string;
  extractor_pair: string;
}

export interface Health {
  status: string;
  model_id: string;
  uptime_s: number;
}

export interface ServiceErrorBody {
  error_code: string;
  message: string;
  detail: string;
}

/** Structured error from the service, carrying its documented error_code. */
export class ApiError extends Error {
  constructor(readonly status: number, readonly body: ServiceErrorBody) {
    super(body.message);
  }
}

/** Network failure or timeout; the UI offers a retry for these. */
export class NetworkError extends Error {}

async function parseError(resp: Response): Promise<ApiError> {
  let body: ServiceErrorBody;
  try {
    body = (await resp.json()) as ServiceErrorBody;
  } catch {
    body = { error_code: "unknown", message: `HTTP ${resp.status}`, detail: "" };
  }
  return new ApiError(resp.status, body);
}

async function request(url: string, init?: RequestInit): Promise<Response> {
  let resp: Response;
  try {
    resp = await fetch(url, init);
  } catch (err) {
    throw new NetworkError(String(err));
  }
  if (!resp.ok) throw await parseError(resp);
  return resp;
}

export async function predict(base: string, file: File): Promise<Prediction> {
  const form = new FormData();
  form.append("video", file, file.name);
  const resp = await request(`${base}/v1/predict`, { method: "POST", body: form });
  return (await resp.json()) as Prediction;
}

export async function getModel(base: string): Promise<ModelInfo> {
  const resp = await request(`${base}/v1/model`);
  return (await resp.json()) as ModelInfo;
}

export async function getHealth(base: string): Promise<Health> {
  const resp = await request(`${base}/v1/health`);
  return (await resp.json()) as Health;
}
