// Wire types mirrored from the draft service API.

export type EventType = "visual" | "text_on_screen";
export type Delivery = "inline" | "extended";

export interface EventView {
  event_id: string;
  start_time: number;
  event_type: EventType;
  delivery: Delivery | null;
  text: string;
  voice: "female" | "male";
  estimated_duration: number;
  source: "ai" | "human";
  audio_uri: string | null;
}

export interface TrackView {
  track_id: string;
  schema_version: number;
  events: EventView[];
}

export interface DraftView {
  draft_id: string;
  asset_id: string;
  version: number;
  collab_enabled: boolean;
  published: boolean;
  authors: string[];
  track: TrackView;
}

export type OpKind =
  | "edit_text"
  | "retime"
  | "change_delivery"
  | "add"
  | "remove"
  | "replace_audio";

export interface RevisionOp {
  event_id: string;
  kind: OpKind;
  before?: unknown;
  after?: unknown;
}

/** author id -> fraction in [0, 1]; fractions sum to 1 */
export type AttributionShares = Record<string, number>;

export interface AdaptReply {
  text: string;
  audio_uri: string | null;
}
