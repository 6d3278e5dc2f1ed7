// Controller logic against a stubbed fetch: commit always re-fetches, probe
// never mutates, and probe deltas are derived only from the two responses.

import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { ServiceClient } from "../src/api.js";
import { WhatIfController, probeDeltas } from "../src/app.js";
import type { RecommendationResult, SessionView } from "../src/types.js";

const FIXTURES = join(__dirname, "..", "fixtures");

function fixture<T>(name: string): T {
  return JSON.parse(readFileSync(join(FIXTURES, name), "utf-8")) as T;
}

function jsonResponse(payload: unknown, status = 200): Response {
  return new Response(JSON.stringify(payload), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

/** Minimal scripted service: replays canned responses and records calls. */
function scriptedClient(script: Record<string, unknown>) {
  const calls: string[] = [];
  const client = new ServiceClient("http://stub", async (url, init) => {
    const key = `${init?.method ?? "GET"} ${url.replace("http://stub", "")}`;
    calls.push(key);
    if (!(key in script)) throw new Error(`unscripted call ${key}`);
    const entry = script[key] as { status?: number; body: unknown } | unknown;
    if (entry && typeof entry === "object" && "body" in (entry as object)) {
      const { status = 200, body } = entry as { status?: number; body: unknown };
      return jsonResponse(body, status);
    }
    return jsonResponse(entry);
  });
  return { client, calls };
}

const sessionView = fixture<SessionView>("session_admission_nc.json");
const emptySession: SessionView = {
  ...sessionView,
  prefix: [],
  result: null,
  error: null,
  unknown_activities: [],
};

describe("WhatIfController.commit", () => {
  it("appends then re-fetches; no optimistic state", async () => {
    const { client, calls } = scriptedClient({
      "POST /sessions": { status: 201, body: emptySession },
      [`POST /sessions/${sessionView.id}/events`]: sessionView,
      [`GET /sessions/${sessionView.id}`]: sessionView,
    });
    const controller = new WhatIfController(client);
    await controller.start();
    const view = await controller.commit("Admission NC");
    expect(calls).toEqual([
      "POST /sessions",
      `POST /sessions/${sessionView.id}/events`,
      `GET /sessions/${sessionView.id}`,
    ]);
    expect(view.prefix).toEqual(sessionView.prefix);
  });

  it("keeps the returned state on a 409", async () => {
    const starved = fixture<SessionView>("session_no_positive_path_409.json");
    const { client } = scriptedClient({
      "POST /sessions": { status: 201, body: { ...starved, prefix: [], error: null, result: null } },
      [`POST /sessions/${starved.id}/events`]: { status: 409, body: starved },
    });
    const controller = new WhatIfController(client);
    await controller.start();
    const view = await controller.commit("CRP");
    expect(view.error).toBe("no recoverable positive path");
    expect(view.prefix).toEqual(starved.prefix);
  });
});

describe("WhatIfController.probe", () => {
  it("calls /recommend with prefix plus candidate and never mutates", async () => {
    const probeResult = fixture<RecommendationResult>("recommend_admission_nc_probe_release_b.json");
    const { client, calls } = scriptedClient({
      "POST /sessions": { status: 201, body: sessionView },
      "POST /recommend": probeResult,
    });
    const controller = new WhatIfController(client);
    await controller.start();
    const probe = await controller.probe("Release B");
    expect(calls).toEqual(["POST /sessions", "POST /recommend"]);
    expect(controller.view!.prefix).toEqual(sessionView.prefix); // unchanged
    expect(probe.result.recommendations.length).toBe(2);
  });

  it("flags a candidate outside the alphabet", async () => {
    const unknownBody = fixture<RecommendationResult>("recommend_unknown_422.json");
    const { client } = scriptedClient({
      "POST /sessions": { status: 201, body: emptySession },
      "POST /recommend": { status: 422, body: unknownBody },
    });
    const controller = new WhatIfController(client);
    await controller.start();
    const probe = await controller.probe("Zumba Class");
    expect(probe.flaggedUnknown).toBe(true);
  });
});

describe("probeDeltas", () => {
  const current = sessionView.result!;

  it("classifies a newly triggered advice as would-appear", () => {
    const probed = fixture<RecommendationResult>("recommend_admission_nc_probe_release_b.json");
    const deltas = probeDeltas(current, probed);
    expect(deltas).toContainEqual({ constraint: "exactly(Release B)", kind: "would-appear" });
  });

  it("classifies fulfilled advice as would-resolve", () => {
    const fifteen = fixture<SessionView>("session_sigma15.json").result!;
    const afterReleaseB = fixture<RecommendationResult>("recommend_sigma15_probe_release_b.json");
    const deltas = probeDeltas(fifteen, afterReleaseB);
    expect(deltas).toContainEqual({ constraint: "exactly(Release B)", kind: "would-resolve" });
  });

  it("classifies advice resolved against its learned value as unrecoverable", () => {
    // synthetic payloads: the probed chosen path still tests the constraint,
    // whose RV state settled on the opposite of the learned value
    const before: RecommendationResult = {
      recommendations: [{ constraint: "response(a, b)", condition: "SHOULD NOT BE VIOLATED", priority: 1 }],
      chosen_path: { steps: [["response(a, b)", "satisfied"]], polarity: 1, impurity: 0, pos_samples: 5, neg_samples: 0 },
      rho: 0.9,
      fitness: 1,
      rv_snapshot: { "response(a, b)": "possibly satisfied" },
    };
    const probed: RecommendationResult = {
      ...before,
      recommendations: [],
      rv_snapshot: { "response(a, b)": "violated" },
    };
    expect(probeDeltas(before, probed)).toEqual([
      { constraint: "response(a, b)", kind: "may-become-unrecoverable" },
    ]);
  });

  it("is empty when nothing changes", () => {
    expect(probeDeltas(current, current)).toEqual([]);
  });
});
