// Typed client for the draft service. The UI never mutates anything locally:
// every write goes through here with an expected version, and every view is
// re-fetched from the server afterwards.

import type {
  AdaptReply,
  AttributionShares,
  DraftView,
  RevisionOp,
} from "./types.js";

export type FetchLike = (
  url: string,
  init?: {
    method?: string;
    headers?: Record<string, string>;
    body?: string;
  },
) => Promise<{ status: number; json(): Promise<unknown>; text(): Promise<string> }>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function raiseFor(response: {
  status: number;
  json(): Promise<unknown>;
}): Promise<never> {
  let detail = `HTTP ${response.status}`;
  try {
    const body = (await response.json()) as { detail?: string };
    if (body && typeof body.detail === "string") detail = body.detail;
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiError(response.status, detail);
}

export class ApiClient {
  constructor(
    readonly baseUrl: string,
    readonly authorId: string,
    private readonly fetchFn: FetchLike = (url, init) =>
      fetch(url, init) as ReturnType<FetchLike>,
  ) {}

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, {
      method,
      headers: {
        "Content-Type": "application/json",
        "X-Author-Id": this.authorId,
      },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (response.status >= 400) await raiseFor(response);
    return (await response.json()) as T;
  }

  getDraft(draftId: string): Promise<DraftView> {
    return this.request("GET", `/drafts/${draftId}`);
  }

  async postRevision(
    draftId: string,
    expectedVersion: number,
    ops: RevisionOp[],
  ): Promise<number> {
    const body = await this.request<{ version: number }>(
      "POST",
      `/drafts/${draftId}/revisions`,
      { expected_version: expectedVersion, ops },
    );
    return body.version;
  }

  nudgeEvent(
    draftId: string,
    expectedVersion: number,
    eventId: string,
    frames: number,
  ): Promise<{ start_time: number; version: number }> {
    return this.request("POST", `/drafts/${draftId}/events/${eventId}/nudge`, {
      expected_version: expectedVersion,
      frames,
    });
  }

  async getAttribution(draftId: string): Promise<AttributionShares> {
    const body = await this.request<{ shares: AttributionShares }>(
      "GET",
      `/drafts/${draftId}/attribution`,
    );
    return body.shares;
  }

  setCollab(draftId: string, enabled: boolean): Promise<{ collab_enabled: boolean }> {
    return this.request("POST", `/drafts/${draftId}/collab`, { enabled });
  }

  publish(draftId: string): Promise<{ published: boolean }> {
    return this.request("POST", `/drafts/${draftId}/publish`);
  }

  unpublish(draftId: string): Promise<{ published: boolean }> {
    return this.request("DELETE", `/drafts/${draftId}/publish`);
  }

  adaptDescribe(assetId: string, time: number): Promise<AdaptReply> {
    return this.request("POST", "/adapt/describe", {
      asset_id: assetId,
      time,
    });
  }

  adaptQuestion(
    assetId: string,
    time: number,
    question: string,
  ): Promise<AdaptReply> {
    return this.request("POST", "/adapt/question", {
      asset_id: assetId,
      time,
      question,
    });
  }

  exportUrl(draftId: string, format: "vtt" | "track"): string {
    return `${this.baseUrl}/drafts/${draftId}/export?format=${format}`;
  }
}
