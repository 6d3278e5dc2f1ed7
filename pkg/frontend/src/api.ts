import type { ModelInfo, RecommendationResult, SessionView } from "./types.js";

export class ConnectionLostError extends Error {
  constructor(cause: unknown) {
    super("connection to the recommendation service lost");
    this.cause = cause;
  }
}

export class NoPositivePathError extends Error {
  view: SessionView | null;
  constructor(view: SessionView | null = null) {
    super("no recoverable positive path");
    this.view = view;
  }
}

export class ServiceError extends Error {
  status: number;
  constructor(status: number, detail: string) {
    super(`service responded ${status}: ${detail}`);
    this.status = status;
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ServiceClient {
  private base: string;
  private fetchImpl: FetchLike;

  constructor(baseUrl: string, fetchImpl: FetchLike = (...args) => fetch(...args)) {
    this.base = baseUrl.replace(/\/+$/, "");
    this.fetchImpl = fetchImpl;
  }

  private async request(path: string, init?: RequestInit): Promise<Response> {
    try {
      return await this.fetchImpl(this.base + path, init);
    } catch (err) {
      throw new ConnectionLostError(err);
    }
  }

  private async json<T>(response: Response): Promise<T> {
    return (await response.json()) as T;
  }

  async getModel(): Promise<ModelInfo> {
    const response = await this.request("/model");
    if (!response.ok) throw new ServiceError(response.status, await response.text());
    return this.json(response);
  }

  async createSession(): Promise<SessionView> {
    const response = await this.request("/sessions", { method: "POST" });
    if (response.status !== 201) throw new ServiceError(response.status, await response.text());
    return this.json(response);
  }

  async getSession(id: string): Promise<SessionView> {
    const response = await this.request(`/sessions/${id}`);
    if (response.status === 409) throw new NoPositivePathError(await this.json(response));
    if (!response.ok) throw new ServiceError(response.status, await response.text());
    return this.json(response);
  }

  async appendEvent(id: string, activity: string): Promise<SessionView> {
    const response = await this.request(`/sessions/${id}/events`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ activity }),
    });
    if (response.status === 409) throw new NoPositivePathError(await this.json(response));
    if (!response.ok) throw new ServiceError(response.status, await response.text());
    return this.json(response);
  }

  /** Stateless recommendation call; 422 means unknown activities but the
   *  body still carries the processed result. */
  async recommend(activities: string[]): Promise<RecommendationResult> {
    const response = await this.request("/recommend", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ activities }),
    });
    if (response.status === 409) throw new NoPositivePathError();
    if (response.status !== 200 && response.status !== 422) {
      throw new ServiceError(response.status, await response.text());
    }
    return this.json(response);
  }
}
