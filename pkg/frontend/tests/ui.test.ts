/** Contract tests against a mocked service: every rendered number must
 * trace to a response field, and every documented error code must
 * surface as a banner. */
import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { ERROR_TEXT, UiSession, bootstrap, formatPercent, modelHeaderText } from "../src/ui.js";

const BASE = "http://service.test";

const MODEL_INFO = {
  model_id: "cnn-abc123",
  arch: "cnn",
  extractor_pair: "videomae+ast",
};

const PREDICTION = {
  probabilities: { non_humor: 0.25, humor: 0.75 },
  predicted_label: "humor",
  latency_ms: 321,
  demux_ms: 100,
  extract_ms: 200,
  model_ms: 21,
  model_id: "cnn-abc123",
};

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

type Routes = Record<string, () => Response | Promise<Response>>;

function mockService(routes: Routes): ReturnType<typeof vi.fn> {
  const mock = vi.fn(async (input: RequestInfo | URL) => {
    const url = String(input);
    for (const [suffix, handler] of Object.entries(routes)) {
      if (url.endsWith(suffix)) return handler();
    }
    return jsonResponse({ error_code: "unknown", message: "no route", detail: "" }, 404);
  });
  vi.stubGlobal("fetch", mock);
  return mock;
}

function healthyRoutes(extra: Routes = {}): Routes {
  return {
    "/v1/health": () => jsonResponse({ status: "ok", model_id: "cnn-abc123", uptime_s: 1 }),
    "/v1/model": () => jsonResponse(MODEL_INFO),
    "/v1/predict": () => jsonResponse(PREDICTION),
    ...extra,
  };
}

function mp4File(name = "clip.mp4"): File {
  return new File([new Uint8Array([0, 1, 2])], name, { type: "video/mp4" });
}

let root: HTMLElement;

beforeEach(() => {
  root = document.createElement("div");
  document.body.appendChild(root);
});

afterEach(() => {
  vi.unstubAllGlobals();
  document.body.innerHTML = "";
});

describe("formatPercent", () => {
  it("renders one decimal", () => {
    expect(formatPercent(0.75)).toBe("75.0%");
    expect(formatPercent(0.2549)).toBe("25.5%");
  });
});

describe("model header", () => {
  it("formats arch and pair", () => {
    expect(modelHeaderText(MODEL_INFO)).toBe("CNN · VideoMAE+AST");
  });

  it("falls back to unknown model", () => {
    expect(modelHeaderText(null)).toBe("unknown model");
  });

  it("renders unknown model when the fetch fails", async () => {
    mockService({
      "/v1/model": () => Promise.reject(new TypeError("unreachable")),
      "/v1/health": () => Promise.reject(new TypeError("unreachable")),
    });
    const session = await bootstrap(root, BASE);
    expect(root.querySelector("#model-header")!.textContent).toBe("unknown model");
    expect(session.modelInfo).toBeNull();
  });
});

describe("status dot", () => {
  it("is green when healthy and enables upload", async () => {
    mockService(healthyRoutes());
    await bootstrap(root, BASE);
    expect(root.querySelector("#status-dot")!.className).toBe("dot green");
    expect((root.querySelector("#file-input") as HTMLInputElement).disabled).toBe(false);
  });

  it("is amber when degraded", async () => {
    mockService(healthyRoutes({
      "/v1/health": () => jsonResponse({ status: "degraded", model_id: "m", uptime_s: 1 }),
    }));
    await bootstrap(root, BASE);
    expect(root.querySelector("#status-dot")!.className).toBe("dot amber");
  });

  it("is red with controls disabled when unreachable", async () => {
    mockService({
      "/v1/model": () => Promise.reject(new TypeError("unreachable")),
      "/v1/health": () => Promise.reject(new TypeError("unreachable")),
    });
    await bootstrap(root, BASE);
    expect(root.querySelector("#status-dot")!.className).toBe("dot red");
    expect((root.querySelector("#file-input") as HTMLInputElement).disabled).toBe(true);
  });
});

describe("prediction rendering", () => {
  it("renders 25.0%/75.0% bars proportional to the response", async () => {
    mockService(healthyRoutes());
    const session = await bootstrap(root, BASE);
    await session.uploadAndPredict(mp4File());

    expect(root.querySelector("#label-non-humor")!.textContent)
      .toBe("Non-humor (25.0%)");
    expect(root.querySelector("#label-humor")!.textContent)
      .toBe("Humor (75.0%)");
    const nonHumorBar = root.querySelector("#bar-non-humor") as HTMLElement;
    const humorBar = root.querySelector("#bar-humor") as HTMLElement;
    expect(nonHumorBar.style.width).toBe("25%");
    expect(humorBar.style.width).toBe("75%");
    // humor bar is 3x the non-humor bar
    expect(parseFloat(humorBar.style.width) / parseFloat(nonHumorBar.style.width))
      .toBeCloseTo(3, 10);
    expect(root.querySelector("#verdict")!.textContent).toBe("Humor (75.0%)");
  });

  it("displayed percentages sum to 100.0 within 0.1", async () => {
    mockService(healthyRoutes({
      "/v1/predict": () => jsonResponse({
        ...PREDICTION,
        probabilities: { non_humor: 0.333333, humor: 0.666667 },
      }),
    }));
    const session = await bootstrap(root, BASE);
    await session.uploadAndPredict(mp4File());
    const shown = ["#label-non-humor", "#label-humor"].map((sel) =>
      parseFloat(root.querySelector(sel)!.textContent!.match(/\(([\d.]+)%\)/)![1]));
    expect(Math.abs(shown[0] + shown[1] - 100.0)).toBeLessThanOrEqual(0.1);
  });

  it("shows per-stage latency from the response", async () => {
    mockService(healthyRoutes());
    const session = await bootstrap(root, BASE);
    await session.uploadAndPredict(mp4File());
    expect(root.querySelector("#latency")!.textContent)
      .toBe("demux 100 ms · extract 200 ms · model 21 ms · total 321 ms");
  });

  it("appends each prediction to the session history", async () => {
    mockService(healthyRoutes());
    const session = await bootstrap(root, BASE);
    await session.uploadAndPredict(mp4File("a.mp4"));
    await session.uploadAndPredict(mp4File("b.mp4"));
    const rows = root.querySelectorAll("#history tbody tr");
    expect(rows.length).toBe(2);
    expect(rows[0].cells[0].textContent).toBe("a.mp4");
    expect(rows[1].cells[0].textContent).toBe("b.mp4");
    expect(rows[1].cells[1].textContent).toBe("Humor");
    expect(rows[1].cells[4].textContent).toBe("321 ms");
  });
});

describe("client-side validation", () => {
  it("rejects non-mp4 files with no network call", async () => {
    const mock = mockService(healthyRoutes());
    const session = await bootstrap(root, BASE);
    const callsAfterBootstrap = mock.mock.calls.length;
    await session.uploadAndPredict(
      new File([new Uint8Array([1])], "notes.txt", { type: "text/plain" }));
    expect(mock.mock.calls.length).toBe(callsAfterBootstrap);
    expect(root.querySelector("#banner")!.textContent)
      .toContain("select an .mp4");
  });
});

describe("error banners", () => {
  const cases: Array<[string, number]> = [
    ["undecodable_media", 400],
    ["missing_audio_track", 400],
    ["invalid_embedding", 400],
    ["payload_too_large", 413],
    ["extractor_failed", 502],
    ["embedding_dim_mismatch", 502],
    ["demux_failed", 502],
  ];

  for (const [code, status] of cases) {
    it(`renders a banner for ${code}`, async () => {
      mockService(healthyRoutes({
        "/v1/predict": () => jsonResponse(
          { error_code: code, message: `boom ${code}`, detail: "" }, status),
      }));
      const session = await bootstrap(root, BASE);
      await session.uploadAndPredict(mp4File());
      const banner = root.querySelector("#banner") as HTMLElement;
      expect(banner.hidden).toBe(false);
      expect(banner.textContent).toContain(ERROR_TEXT[code]);
      expect(banner.textContent).toContain(`boom ${code}`);
    });
  }

  it("offers retry on network failure", async () => {
    mockService(healthyRoutes({
      "/v1/predict": () => Promise.reject(new TypeError("socket hangup")),
    }));
    const session = await bootstrap(root, BASE);
    await session.uploadAndPredict(mp4File());
    expect((root.querySelector("#retry") as HTMLButtonElement).hidden).toBe(false);
    expect(root.querySelector("#banner")!.textContent).toContain("Network error");
  });
});

describe("single in-flight request", () => {
  it("ignores a second upload while one is pending", async () => {
    let release: (value: Response) => void = () => {};
    const gate = new Promise<Response>((resolve) => { release = resolve; });
    const mock = mockService(healthyRoutes({ "/v1/predict": () => gate }));
    const session = await bootstrap(root, BASE);
    const callsAfterBootstrap = mock.mock.calls.length;

    const first = session.uploadAndPredict(mp4File("first.mp4"));
    expect((root.querySelector("#file-input") as HTMLInputElement).disabled).toBe(true);
    await session.uploadAndPredict(mp4File("second.mp4"));
    expect(mock.mock.calls.length).toBe(callsAfterBootstrap + 1);

    release(jsonResponse(PREDICTION));
    await first;
    expect(session.history.length).toBe(1);
    expect(session.history[0].clipName).toBe("first.mp4");
  });
});
