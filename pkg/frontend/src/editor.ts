// Editing session state. The server is the single source of truth: every
// mutation carries the last seen version, a 409 refetches and raises the
// conflict banner, a 403 drops the session into read-only mode.

import { ApiClient, ApiError } from "./api.js";
import { layoutTimeline, type MarkerLayout } from "./timeline.js";
import type {
  AttributionShares,
  Delivery,
  DraftView,
  EventView,
  RevisionOp,
} from "./types.js";

export class EditorController {
  draft: DraftView | null = null;
  attribution: AttributionShares = {};
  conflict = false;
  readOnly = false;
  lastError: string | null = null;

  constructor(
    private readonly api: ApiClient,
    readonly draftId: string,
  ) {}

  async load(): Promise<void> {
    this.draft = await this.api.getDraft(this.draftId);
    this.attribution = await this.api.getAttribution(this.draftId);
  }

  dismissConflict(): void {
    this.conflict = false;
  }

  event(eventId: string): EventView {
    const found = this.draft?.track.events.find((e) => e.event_id === eventId);
    if (!found) throw new Error(`unknown event ${eventId}`);
    return found;
  }

  markers(playhead: number, pixelsPerSecond: number): MarkerLayout[] {
    if (!this.draft) return [];
    return layoutTimeline(this.draft.track.events, playhead, pixelsPerSecond);
  }

  private async mutate<T>(action: (version: number) => Promise<T>): Promise<T | null> {
    if (!this.draft) throw new Error("draft not loaded");
    try {
      const result = await action(this.draft.version);
      this.conflict = false;
      this.lastError = null;
      await this.load();
      return result;
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        // Someone else edited meanwhile: surface the banner and refetch so
        // the next save starts from the current version.
        this.conflict = true;
        await this.load();
        return null;
      }
      if (error instanceof ApiError && error.status === 403) {
        this.readOnly = true;
        this.lastError = error.message;
        return null;
      }
      if (error instanceof ApiError) {
        this.lastError = error.message;
        return null;
      }
      throw error;
    }
  }

  save(ops: RevisionOp[]): Promise<number | null> {
    return this.mutate((version) =>
      this.api.postRevision(this.draftId, version, ops),
    );
  }

  editText(eventId: string, newText: string): Promise<number | null> {
    const current = this.event(eventId);
    return this.save([
      {
        event_id: eventId,
        kind: "edit_text",
        before: current.text,
        after: newText,
      },
    ]);
  }

  switchDelivery(eventId: string, delivery: Delivery): Promise<number | null> {
    const current = this.event(eventId);
    return this.save([
      {
        event_id: eventId,
        kind: "change_delivery",
        before: current.delivery,
        after: delivery,
      },
    ]);
  }

  removeEvent(eventId: string): Promise<number | null> {
    const current = this.event(eventId);
    return this.save([
      { event_id: eventId, kind: "remove", before: { ...current } },
    ]);
  }

  /** Shift an event by whole frames; returns the new start time. */
  async nudge(eventId: string, frames: number): Promise<number | null> {
    const result = await this.mutate((version) =>
      this.api.nudgeEvent(this.draftId, version, eventId, frames),
    );
    return result ? result.start_time : null;
  }

  setCollab(enabled: boolean): Promise<{ collab_enabled: boolean } | null> {
    return this.mutate(() => this.api.setCollab(this.draftId, enabled));
  }

  publish(): Promise<{ published: boolean } | null> {
    return this.mutate(() => this.api.publish(this.draftId));
  }

  unpublish(): Promise<{ published: boolean } | null> {
    return this.mutate(() => this.api.unpublish(this.draftId));
  }
}
