// Timeline marker layout and rendering.
//
// Inline narration shows as yellow segments spanning its audible interval;
// extended narration as purple markers at the pause instant. During playback
// exactly one segment is highlighted as active.

import type { EventView } from "./types.js";

export const INLINE_MARKER_CLASS = "marker-inline";
export const EXTENDED_MARKER_CLASS = "marker-extended";
export const ACTIVE_CLASS = "marker-active";

/** Extended markers get a fixed visual width; they occupy no timeline span. */
export const EXTENDED_MARKER_PX = 10;

export interface MarkerLayout {
  eventId: string;
  leftPx: number;
  widthPx: number;
  colorClass: string;
  active: boolean;
  label: string;
}

function canonical(events: EventView[]): EventView[] {
  return [...events].sort(
    (a, b) => a.start_time - b.start_time || (a.event_id < b.event_id ? -1 : 1),
  );
}

/** The single active event at the playhead, or null between narrations. */
export function activeEventId(
  events: EventView[],
  playhead: number,
): string | null {
  for (const ev of canonical(events)) {
    const end = ev.start_time + ev.estimated_duration;
    if (ev.start_time <= playhead && playhead < end) return ev.event_id;
  }
  return null;
}

export function markerLayout(
  event: EventView,
  pixelsPerSecond: number,
  activeId: string | null,
): MarkerLayout {
  const inline = event.delivery !== "extended";
  return {
    eventId: event.event_id,
    leftPx: event.start_time * pixelsPerSecond,
    widthPx: inline
      ? Math.max(event.estimated_duration * pixelsPerSecond, 2)
      : EXTENDED_MARKER_PX,
    colorClass: inline ? INLINE_MARKER_CLASS : EXTENDED_MARKER_CLASS,
    active: event.event_id === activeId,
    label: `${inline ? "Inline" : "Extended"} ${
      event.event_type === "visual" ? "visual" : "text-on-screen"
    } description at ${event.start_time.toFixed(3)} seconds: ${event.text}`,
  };
}

export function layoutTimeline(
  events: EventView[],
  playhead: number,
  pixelsPerSecond: number,
): MarkerLayout[] {
  const activeId = activeEventId(events, playhead);
  return canonical(events).map((ev) =>
    markerLayout(ev, pixelsPerSecond, activeId),
  );
}

/**
 * Render markers into a container. Markers are buttons so they are
 * keyboard-reachable, with descriptive labels for assistive technologies.
 */
export function renderTimeline(
  container: HTMLElement,
  layouts: MarkerLayout[],
  onSelect?: (eventId: string) => void,
): void {
  container.textContent = "";
  container.setAttribute("role", "list");
  container.setAttribute("aria-label", "Description timeline");
  for (const layout of layouts) {
    const marker = container.ownerDocument.createElement("button");
    marker.type = "button";
    marker.setAttribute("role", "listitem");
    marker.className = layout.colorClass + (layout.active ? ` ${ACTIVE_CLASS}` : "");
    marker.dataset.eventId = layout.eventId;
    marker.style.left = `${layout.leftPx}px`;
    marker.style.width = `${layout.widthPx}px`;
    marker.setAttribute("aria-label", layout.label);
    if (layout.active) marker.setAttribute("aria-current", "true");
    if (onSelect) marker.addEventListener("click", () => onSelect(layout.eventId));
    container.appendChild(marker);
  }
}
