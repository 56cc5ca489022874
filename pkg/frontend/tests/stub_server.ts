// In-memory stand-in for the draft service, exposed as a fetch-compatible
// function. Implements just enough behavior to verify the UI contract:
// optimistic versioning (409 on stale writes), frame-accurate nudging, and
// the adapt endpoints.

import type { FetchLike } from "../src/api.js";
import type { DraftView, EventView, RevisionOp } from "../src/types.js";

export interface StubOptions {
  fps?: number;
  describeReply?: string;
  questionReply?: string;
  adaptUnavailable?: boolean;
}

export class StubServer {
  draft: DraftView;
  readonly fps: number;
  readonly calls: string[] = [];
  readonly bodies: unknown[] = [];
  private readonly describeReply: string;
  private readonly questionReply: string;
  private readonly adaptUnavailable: boolean;

  constructor(events: EventView[], options: StubOptions = {}) {
    this.fps = options.fps ?? 25;
    this.describeReply = options.describeReply ?? "Olaf the snowman.";
    this.questionReply =
      options.questionReply ?? "Gombe National Park, Tanzania.";
    this.adaptUnavailable = options.adaptUnavailable ?? false;
    this.draft = {
      draft_id: "d-fixture",
      asset_id: "gombe-doc",
      version: 1,
      collab_enabled: true,
      published: false,
      authors: ["AI"],
      track: {
        track_id: "gombe-doc-baseline",
        schema_version: 1,
        events: [...events],
      },
    };
  }

  /** Simulate another editor writing a revision behind this client's back. */
  externalEdit(): void {
    this.draft.version += 1;
  }

  fetch: FetchLike = async (url, init) => {
    const method = init?.method ?? "GET";
    const path = url.replace(/^https?:\/\/[^/]+/, "");
    this.calls.push(`${method} ${path}`);
    const body = init?.body ? JSON.parse(init.body) : undefined;
    this.bodies.push(body);
    return this.route(method, path, body);
  };

  private respond(status: number, payload: unknown) {
    // deep-copy so clients never share live references with the store
    return {
      status,
      json: async () => JSON.parse(JSON.stringify(payload)),
      text: async () => JSON.stringify(payload),
    };
  }

  private route(method: string, path: string, body: any) {
    if (method === "GET" && path === `/drafts/${this.draft.draft_id}`) {
      return this.respond(200, this.draft);
    }
    if (
      method === "GET" &&
      path === `/drafts/${this.draft.draft_id}/attribution`
    ) {
      return this.respond(200, { shares: { AI: 0.75, alice: 0.25 } });
    }
    if (
      method === "POST" &&
      path === `/drafts/${this.draft.draft_id}/revisions`
    ) {
      if (body.expected_version !== this.draft.version) {
        return this.respond(409, {
          detail: `expected version ${body.expected_version}, draft is at ${this.draft.version}`,
        });
      }
      for (const op of body.ops as RevisionOp[]) {
        const ev = this.draft.track.events.find(
          (e) => e.event_id === op.event_id,
        );
        if (!ev) return this.respond(404, { detail: "no such event" });
        if (op.kind === "edit_text") ev.text = op.after as string;
        if (op.kind === "retime") ev.start_time = op.after as number;
        if (op.kind === "change_delivery")
          ev.delivery = op.after as EventView["delivery"];
      }
      this.draft.version += 1;
      return this.respond(200, { version: this.draft.version });
    }
    const nudgeMatch = path.match(
      new RegExp(`^/drafts/${this.draft.draft_id}/events/([^/]+)/nudge$`),
    );
    if (method === "POST" && nudgeMatch) {
      if (body.expected_version !== this.draft.version) {
        return this.respond(409, { detail: "stale version" });
      }
      const ev = this.draft.track.events.find(
        (e) => e.event_id === nudgeMatch[1],
      );
      if (!ev) return this.respond(404, { detail: "no such event" });
      ev.start_time = Math.max(0, ev.start_time + body.frames / this.fps);
      this.draft.version += 1;
      return this.respond(200, {
        start_time: ev.start_time,
        version: this.draft.version,
      });
    }
    if (method === "POST" && path === `/drafts/${this.draft.draft_id}/collab`) {
      this.draft.collab_enabled = body.enabled;
      return this.respond(200, { collab_enabled: this.draft.collab_enabled });
    }
    if (method === "POST" && path === "/adapt/describe") {
      if (this.adaptUnavailable)
        return this.respond(503, { detail: "provider offline" });
      return this.respond(200, {
        text: this.describeReply,
        audio_uri: "mock://tts/describe.wav",
      });
    }
    if (method === "POST" && path === "/adapt/question") {
      if (this.adaptUnavailable)
        return this.respond(503, { detail: "provider offline" });
      return this.respond(200, {
        text: this.questionReply,
        audio_uri: "mock://tts/question.wav",
      });
    }
    return this.respond(404, { detail: `no route for ${method} ${path}` });
  }
}

/** The four-event track produced by the bundled pipeline fixture. */
export function fixtureEvents(): EventView[] {
  return [
    {
      event_id: "s000e00",
      start_time: 0.0,
      event_type: "text_on_screen",
      delivery: "inline",
      text: "Gombe National Park, 1965.",
      voice: "male",
      estimated_duration: 1.6,
      source: "ai",
      audio_uri: "mock://tts/a.wav",
    },
    {
      event_id: "s000e01",
      start_time: 4.4,
      event_type: "visual",
      delivery: "inline",
      text: "Jane Goodall crouches on a ridge above the canopy.",
      voice: "female",
      estimated_duration: 3.6,
      source: "ai",
      audio_uri: "mock://tts/b.wav",
    },
    {
      event_id: "s001e01",
      start_time: 33.0,
      event_type: "visual",
      delivery: "extended",
      text: "A chimpanzee swings through lush palm treetops",
      voice: "female",
      estimated_duration: 2.8,
      source: "ai",
      audio_uri: "mock://tts/c.wav",
    },
    {
      event_id: "s002e00",
      start_time: 42.2,
      event_type: "visual",
      delivery: "inline",
      text: "A butterfly flutters across the frame.",
      voice: "female",
      estimated_duration: 2.4,
      source: "ai",
      audio_uri: "mock://tts/d.wav",
    },
  ];
}
