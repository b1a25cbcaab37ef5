/** DOM rendering and session state for the upload-and-predict page.
 *
 * Every number on screen comes from a service response field; this
 * module does no inference arithmetic beyond percentage formatting.
 */
import {
  ApiError,
  ModelInfo,
  NetworkError,
  Prediction,
  getHealth,
  getModel,
  predict,
} from "./api.js";

export type RequestState = "idle" | "uploading" | "extracting" | "done" | "error";

export interface HistoryEntry {
  clipName: string;
  verdict: string;
  nonHumor: number;
  humor: number;
  latencyMs: number;
}

/** Human-readable banner text for each documented service error code. */
export const ERROR_TEXT: Record<string, string> = {
  undecodable_media: "The file could not be decoded as a video.",
  missing_audio_track: "The video has no usable audio track.",
  invalid_embedding: "The embedding payload was rejected.",
  payload_too_large: "The file exceeds the service upload limit.",
  extractor_failed: "The embedding extractor failed.",
  embedding_dim_mismatch: "The extractor returned the wrong embedding size.",
  demux_failed: "The media tool failed while splitting the upload.",
};

export function formatPercent(p: number): string {
  return `${(p * 100).toFixed(1)}%`;
}

export function modelHeaderText(info: ModelInfo | null): string {
  if (!info) return "unknown model";
  const pair = info.extractor_pair
    .split("+")
    .map((part) => (part === "ast" ? "AST" : part === "videomae" ? "VideoMAE" : part))
    .join("+");
  return `${info.arch.toUpperCase()} · ${pair}`;
}

export class UiSession {
  state: RequestState = "idle";
  lastPrediction: Prediction | null = null;
  history: HistoryEntry[] = [];
  modelInfo: ModelInfo | null = null;
  serviceStatus: "ok" | "degraded" | "unreachable" = "unreachable";

  constructor(readonly root: HTMLElement, readonly baseUrl: string) {
    root.innerHTML = `
      <header>
        <span id="model-header">unknown model</span>
        <span id="status-dot" class="dot red" title="service status"></span>
      </header>
      <div id="banner" hidden></div>
      <label>
        <input type="file" id="file-input" accept="video/mp4" disabled>
      </label>
      <button id="retry" hidden>Retry</button>
      <section id="result" hidden>
        <div class="bar-row">
          <span class="bar-label" id="label-non-humor"></span>
          <div class="bar" id="bar-non-humor"></div>
        </div>
        <div class="bar-row">
          <span class="bar-label" id="label-humor"></span>
          <div class="bar" id="bar-humor"></div>
        </div>
        <p id="verdict"></p>
        <p id="latency"></p>
      </section>
      <table id="history">
        <thead><tr>
          <th>Clip</th><th>Verdict</th><th>Non-humor</th><th>Humor</th><th>Latency</th>
        </tr></thead>
        <tbody></tbody>
      </table>`;
  }

  private el<T extends HTMLElement>(id: string): T {
    return this.root.querySelector(`#${id}`) as T;
  }

  async refreshStatus(): Promise<void> {
    try {
      const health = await getHealth(this.baseUrl);
      this.serviceStatus = health.status === "ok" ? "ok" : "degraded";
    } catch {
      this.serviceStatus = "unreachable";
    }
    const dot = this.el<HTMLSpanElement>("status-dot");
    const color =
      this.serviceStatus === "ok" ? "green"
      : this.serviceStatus === "degraded" ? "amber" : "red";
    dot.className = `dot ${color}`;
    this.el<HTMLInputElement>("file-input").disabled =
      this.serviceStatus === "unreachable" || this.state === "uploading";
  }

  async refreshModelHeader(): Promise<void> {
    try {
      this.modelInfo = await getModel(this.baseUrl);
    } catch {
      this.modelInfo = null;
    }
    this.el("model-header").textContent = modelHeaderText(this.modelInfo);
  }

  showBanner(text: string): void {
    const banner = this.el("banner");
    banner.textContent = text;
    banner.hidden = false;
  }

  clearBanner(): void {
    const banner = this.el("banner");
    banner.textContent = "";
    banner.hidden = true;
  }

  renderPrediction(prediction: Prediction, clipName: string): void {
    this.lastPrediction = prediction;
    const { non_humor, humor } = prediction.probabilities;
    const section = this.el("result");
    section.hidden = false;
    // bar lengths proportional to the probabilities
    this.el("bar-non-humor").style.width = `${non_humor * 100}%`;
    this.el("bar-humor").style.width = `${humor * 100}%`;
    this.el("label-non-humor").textContent = `Non-humor (${formatPercent(non_humor)})`;
    this.el("label-humor").textContent = `Humor (${formatPercent(humor)})`;
    const verdict = prediction.predicted_label === "humor" ? "Humor" : "Non-humor";
    this.el("verdict").textContent =
      `${verdict} (${formatPercent(Math.max(non_humor, humor))})`;
    this.el("latency").textContent =
      `demux ${prediction.demux_ms} ms · extract ${prediction.extract_ms} ms ` +
      `· model ${prediction.model_ms} ms · total ${prediction.latency_ms} ms`;

    this.history.push({
      clipName,
      verdict,
      nonHumor: non_humor,
      humor,
      latencyMs: prediction.latency_ms,
    });
    this.renderHistory();
  }

  private renderHistory(): void {
    const tbody = this.el<HTMLTableSectionElement>("history")
      .querySelector("tbody") as HTMLTableSectionElement;
    tbody.innerHTML = "";
    for (const entry of this.history) {
      const row = tbody.insertRow();
      row.insertCell().textContent = entry.clipName;
      row.insertCell().textContent = entry.verdict;
      row.insertCell().textContent = formatPercent(entry.nonHumor);
      row.insertCell().textContent = formatPercent(entry.humor);
      row.insertCell().textContent = `${entry.latencyMs} ms`;
    }
  }

  async uploadAndPredict(file: File): Promise<void> {
    if (this.state === "uploading") return; // one in-flight request
    this.clearBanner();
    this.el<HTMLButtonElement>("retry").hidden = true;
    if (!file.name.toLowerCase().endsWith(".mp4") && file.type !== "video/mp4") {
      this.showBanner("Please select an .mp4 video file.");
      return;
    }
    this.state = "uploading";
    this.el<HTMLInputElement>("file-input").disabled = true;
    try {
      const prediction = await predict(this.baseUrl, file);
      this.state = "done";
      this.renderPrediction(prediction, file.name);
    } catch (err) {
      this.state = "error";
      if (err instanceof ApiError) {
        const friendly = ERROR_TEXT[err.body.error_code] ?? "Request failed.";
        this.showBanner(`${friendly} (${err.body.message})`);
      } else if (err instanceof NetworkError) {
        this.showBanner("Network error: the service did not respond.");
        this.el<HTMLButtonElement>("retry").hidden = false;
      } else {
        this.showBanner(`Unexpected error: ${String(err)}`);
      }
    } finally {
      this.el<HTMLInputElement>("file-input").disabled =
        this.serviceStatus === "unreachable";
    }
  }
}

export async function bootstrap(root: HTMLElement, baseUrl: string): Promise<UiSession> {
  const session = new UiSession(root, baseUrl);
  await session.refreshModelHeader();
  await session.refreshStatus();
  const input = session.root.querySelector("#file-input") as HTMLInputElement;
  input.addEventListener("change", () => {
    const file = input.files?.[0];
    if (file) void session.uploadAndPredict(file);
  });
  const retry = session.root.querySelector("#retry") as HTMLButtonElement;
  retry.addEventListener("click", () => {
    const file = input.files?.[0];
    if (file) void session.uploadAndPredict(file);
  });
  return session;
}
