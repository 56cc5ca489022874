// Stacked-bar rendering of contribution shares.

import type { AttributionShares } from "./types.js";

export interface BarSegment {
  author: string;
  fraction: number;
  offset: number;
}

/** AI first, then human authors alphabetically; offsets accumulate to 1. */
export function stackedBarSegments(shares: AttributionShares): BarSegment[] {
  const authors = Object.keys(shares).sort((a, b) => {
    if (a === "AI") return -1;
    if (b === "AI") return 1;
    return a < b ? -1 : 1;
  });
  const segments: BarSegment[] = [];
  let offset = 0;
  for (const author of authors) {
    const fraction = shares[author] ?? 0;
    segments.push({ author, fraction, offset });
    offset += fraction;
  }
  return segments;
}

export function renderAttribution(
  container: HTMLElement,
  shares: AttributionShares,
): void {
  container.textContent = "";
  container.setAttribute("role", "img");
  const summary = stackedBarSegments(shares)
    .map((s) => `${s.author} ${(s.fraction * 100).toFixed(1)}%`)
    .join(", ");
  container.setAttribute("aria-label", `Contributions: ${summary}`);
  for (const segment of stackedBarSegments(shares)) {
    const div = container.ownerDocument.createElement("div");
    div.className = "attribution-segment";
    div.dataset.author = segment.author;
    div.style.left = `${segment.offset * 100}%`;
    div.style.width = `${segment.fraction * 100}%`;
    div.title = `${segment.author}: ${(segment.fraction * 100).toFixed(1)}%`;
    container.appendChild(div);
  }
}
