import { describe, expect, it } from "vitest";

import {
  ACTIVE_CLASS,
  EXTENDED_MARKER_CLASS,
  INLINE_MARKER_CLASS,
  activeEventId,
  layoutTimeline,
  renderTimeline,
} from "../src/timeline.js";
import { fixtureEvents } from "./stub_server.js";

describe("timeline layout", () => {
  it("produces one marker per event with the delivery color class", () => {
    const layouts = layoutTimeline(fixtureEvents(), 0, 10);
    expect(layouts).toHaveLength(4);
    const byId = Object.fromEntries(layouts.map((l) => [l.eventId, l]));
    expect(byId["s000e00"]!.colorClass).toBe(INLINE_MARKER_CLASS);
    expect(byId["s000e01"]!.colorClass).toBe(INLINE_MARKER_CLASS);
    expect(byId["s002e00"]!.colorClass).toBe(INLINE_MARKER_CLASS);
    expect(byId["s001e01"]!.colorClass).toBe(EXTENDED_MARKER_CLASS);
  });

  it("positions markers at start_time times pixels-per-second", () => {
    const layouts = layoutTimeline(fixtureEvents(), 0, 10);
    const jane = layouts.find((l) => l.eventId === "s000e01")!;
    expect(jane.leftPx).toBeCloseTo(44.0, 6);
    expect(jane.widthPx).toBeCloseTo(36.0, 6);
  });

  it("marks exactly one event active during playback", () => {
    const events = fixtureEvents();
    expect(activeEventId(events, 5.0)).toBe("s000e01");
    expect(activeEventId(events, 20.0)).toBeNull();
    const layouts = layoutTimeline(events, 5.0, 10);
    expect(layouts.filter((l) => l.active)).toHaveLength(1);
  });

  it("orders markers canonically regardless of input order", () => {
    const events = fixtureEvents().reverse();
    const layouts = layoutTimeline(events, 0, 10);
    expect(layouts.map((l) => l.eventId)).toEqual([
      "s000e00",
      "s000e01",
      "s001e01",
      "s002e00",
    ]);
  });
});

describe("timeline rendering", () => {
  it("renders keyboard-reachable markers with labels and classes", () => {
    const container = document.createElement("div");
    document.body.appendChild(container);
    renderTimeline(container, layoutTimeline(fixtureEvents(), 5.0, 10));

    const markers = Array.from(container.querySelectorAll("button"));
    expect(markers).toHaveLength(4);
    expect(markers.map((m) => m.className.split(" ")[0])).toEqual([
      INLINE_MARKER_CLASS,
      INLINE_MARKER_CLASS,
      EXTENDED_MARKER_CLASS,
      INLINE_MARKER_CLASS,
    ]);
    const active = container.querySelectorAll(`.${ACTIVE_CLASS}`);
    expect(active).toHaveLength(1);
    for (const marker of markers) {
      expect(marker.getAttribute("aria-label")).toBeTruthy();
    }
  });
});
