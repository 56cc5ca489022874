// DOM shell: timeline, banners, nudge buttons, attribution bar, adapt keys,
// and the high-contrast toggle. All state lives server-side; this layer only
// renders the controller's latest snapshot.

import { ApiClient } from "./api.js";
import { AdaptKeys, type VideoSurface } from "./adapt.js";
import { EditorController } from "./editor.js";
import { renderAttribution } from "./attribution.js";
import { renderTimeline } from "./timeline.js";

export interface AppOptions {
  baseUrl: string;
  authorId: string;
  draftId: string;
  assetId: string;
  pixelsPerSecond?: number;
  video: VideoSurface;
  askQuestion?: () => Promise<string | null>;
}

export interface AppHandles {
  editor: EditorController;
  adaptKeys: AdaptKeys;
  refresh: (playhead?: number) => void;
  selectedEventId: () => string | null;
}

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className: string,
  text = "",
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  node.className = className;
  if (text) node.textContent = text;
  return node;
}

export function createApp(root: HTMLElement, options: AppOptions): AppHandles {
  const doc = root.ownerDocument;
  const pps = options.pixelsPerSecond ?? 10;
  const api = new ApiClient(options.baseUrl, options.authorId);
  const editor = new EditorController(api, options.draftId);
  const adaptKeys = new AdaptKeys(
    api,
    options.assetId,
    options.video,
    options.askQuestion ?? (async () => null),
    () => editor.draft !== null,
  );

  let selected: string | null = null;

  const conflictBanner = el(
    doc,
    "div",
    "banner banner-conflict",
    "This draft changed on the server. Your view was refreshed; review and save again.",
  );
  conflictBanner.setAttribute("role", "alert");
  conflictBanner.hidden = true;

  const readOnlyBanner = el(
    doc,
    "div",
    "banner banner-readonly",
    "Collaborative editing is off for this draft; your account can only view it.",
  );
  readOnlyBanner.setAttribute("role", "alert");
  readOnlyBanner.hidden = true;

  const timeline = el(doc, "div", "timeline");
  const attribution = el(doc, "div", "attribution-bar");

  const nudgeBack = el(doc, "button", "nudge nudge-back", "Nudge -1 frame");
  nudgeBack.type = "button";
  nudgeBack.setAttribute("aria-label", "Nudge selected description one frame earlier");
  const nudgeForward = el(doc, "button", "nudge nudge-forward", "Nudge +1 frame");
  nudgeForward.type = "button";
  nudgeForward.setAttribute("aria-label", "Nudge selected description one frame later");

  const contrastToggle = el(doc, "button", "contrast-toggle", "High contrast");
  contrastToggle.type = "button";
  contrastToggle.setAttribute("aria-pressed", "false");
  contrastToggle.addEventListener("click", () => {
    const on = root.classList.toggle("high-contrast");
    contrastToggle.setAttribute("aria-pressed", String(on));
  });

  root.append(
    conflictBanner,
    readOnlyBanner,
    timeline,
    nudgeBack,
    nudgeForward,
    contrastToggle,
    attribution,
  );

  function refresh(playhead = 0): void {
    conflictBanner.hidden = !editor.conflict;
    readOnlyBanner.hidden = !editor.readOnly;
    renderTimeline(timeline, editor.markers(playhead, pps), (eventId) => {
      selected = eventId;
    });
    renderAttribution(attribution, editor.attribution);
  }

  async function nudgeSelected(frames: number): Promise<void> {
    if (!selected) return;
    await editor.nudge(selected, frames);
    refresh();
  }

  nudgeBack.addEventListener("click", () => void nudgeSelected(-1));
  nudgeForward.addEventListener("click", () => void nudgeSelected(+1));

  doc.addEventListener("keydown", (event) => {
    void adaptKeys.handleKey({ altKey: event.altKey, key: event.key });
  });

  return {
    editor,
    adaptKeys,
    refresh,
    selectedEventId: () => selected,
  };
}
