import { NoPositivePathError, ServiceClient } from "./api.js";
import { renderConnectionLost, renderProbe, renderSession } from "./render.js";
import type { ProbeClassification, RecommendationResult, SessionView, WhatIfProbe } from "./types.js";

/** Session workflow: all state lives on the server; every mutation re-fetches. */
export class WhatIfController {
  client: ServiceClient;
  view: SessionView | null = null;

  constructor(client: ServiceClient) {
    this.client = client;
  }

  async start(): Promise<SessionView> {
    this.view = await this.client.createSession();
    return this.view;
  }

  private sessionId(): string {
    if (this.view === null) throw new Error("session not started");
    return this.view.id;
  }

  /** Commit the next event, then re-fetch the authoritative state. */
  async commit(activity: string): Promise<SessionView> {
    const id = this.sessionId();
    try {
      await this.client.appendEvent(id, activity);
      this.view = await this.client.getSession(id);
    } catch (err) {
      if (err instanceof NoPositivePathError && err.view) {
        this.view = err.view; // state is still returned alongside the 409
      } else {
        throw err;
      }
    }
    return this.view as SessionView;
  }

  /** Ask what would change if `activity` happened next, without committing. */
  async probe(activity: string): Promise<WhatIfProbe> {
    if (this.view === null) throw new Error("session not started");
    const candidate = [...this.view.prefix, activity];
    const result = await this.client.recommend(candidate);
    return {
      candidateActivity: activity,
      result,
      deltas: probeDeltas(this.view.result, result),
      flaggedUnknown: (result.unknown_activities ?? []).includes(activity),
    };
  }
}

/** Classify recommendation changes between the current and the probed result.
 *  Derived purely by comparing the two service responses. */
export function probeDeltas(
  current: RecommendationResult | null,
  probed: RecommendationResult
): { constraint: string; kind: ProbeClassification }[] {
  const before = new Map((current?.recommendations ?? []).map((r) => [r.constraint, r]));
  const after = new Map(probed.recommendations.map((r) => [r.constraint, r]));
  const deltas: { constraint: string; kind: ProbeClassification }[] = [];
  const probedSteps = new Map(probed.chosen_path.steps);
  for (const constraint of before.keys()) {
    if (after.has(constraint)) continue;
    const state = probed.rv_snapshot[constraint];
    const learned = probedSteps.get(constraint);
    // still part of the chosen rule but resolved against the advice: lost;
    // resolved in its favor, or no longer part of the chosen rule: settled
    const kind: ProbeClassification =
      state !== undefined && learned !== undefined && state !== learned
        ? "may-become-unrecoverable"
        : "would-resolve";
    deltas.push({ constraint, kind });
  }
  for (const constraint of after.keys()) {
    if (!before.has(constraint)) deltas.push({ constraint, kind: "would-appear" });
  }
  return deltas;
}

// --- browser bootstrap (no-op under tests) -----------------------------------

export async function boot(root: HTMLElement, baseUrl: string): Promise<void> {
  const client = new ServiceClient(baseUrl);
  const controller = new WhatIfController(client);

  const redraw = (extra = "") => {
    root.innerHTML = (controller.view ? renderSession(controller.view) : "") + extra;
  };

  try {
    await controller.start();
  } catch {
    root.innerHTML = renderConnectionLost();
    return;
  }
  redraw();

  const input = document.getElementById("activity") as HTMLInputElement | null;
  const commitButton = document.getElementById("commit");
  const probeButton = document.getElementById("probe");

  commitButton?.addEventListener("click", async () => {
    if (!input?.value) return;
    try {
      await controller.commit(input.value);
      redraw();
    } catch {
      root.innerHTML = renderConnectionLost();
    }
  });

  probeButton?.addEventListener("click", async () => {
    if (!input?.value) return;
    try {
      const probe = await controller.probe(input.value);
      redraw(renderProbe(probe));
    } catch {
      root.innerHTML = renderConnectionLost();
    }
  });
}

declare global {
  interface Window {
    PRESMON_API?: string;
  }
}

if (typeof document !== "undefined" && document.getElementById("whatif-root")) {
  const api =
    new URLSearchParams(location.search).get("api") ??
    window.PRESMON_API ??
    "http://127.0.0.1:8000";
  void boot(document.getElementById("whatif-root") as HTMLElement, api);
}
