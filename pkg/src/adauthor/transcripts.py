"""Two-engine transcript merging and dialogue-gap computation.

The primary engine owns timing. A primary word survives if the secondary
engine heard the same word at roughly the same time, or if the primary
engine was confident enough on its own.
"""

from __future__ import annotations

import json
import unicodedata
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .model import Gap, MediaAsset
from .segmentation import Scene

PRIMARY = "primary_asr"
SECONDARY = "secondary_asr"

DEFAULT_TIME_TOL = 0.5
DEFAULT_HIGH_CONF = 0.9
DEFAULT_MIN_GAP = 1.0


@dataclass(frozen=True)
class TranscriptWord:
    text: str
    start: float
    end: float
    engine: str = PRIMARY
    confidence: Optional[float] = None

    def __post_init__(self):
        if self.end <= self.start:
            raise ValueError(f"word {self.text!r} has end <= start")

    @property
    def midpoint(self) -> float:
        return (self.start + self.end) / 2.0


@dataclass(frozen=True)
class MergedTranscript:
    words: tuple[TranscriptWord, ...] = field(default_factory=tuple)

    def __iter__(self):
        return iter(self.words)

    def __len__(self):
        return len(self.words)


def _normalize(token: str) -> str:
    token = token.casefold()
    return "".join(ch for ch in token
                   if not unicodedata.category(ch).startswith("P"))


def align_and_filter(
    primary: Sequence[TranscriptWord],
    secondary: Sequence[TranscriptWord],
    time_tol: float = DEFAULT_TIME_TOL,
    high_conf: float = DEFAULT_HIGH_CONF,
) -> MergedTranscript:
    """Keep primary words the secondary engine corroborates.

    Corroboration means case-folded, punctuation-stripped equality with a
    start-time difference no larger than time_tol. Unmatched primary words
    survive only with confidence >= high_conf. Output keeps the primary
    engine's order and timestamps.
    """
    by_token: dict[str, list[float]] = {}
    for word in secondary:
        by_token.setdefault(_normalize(word.text), []).append(word.start)

    kept = []
    for word in primary:
        starts = by_token.get(_normalize(word.text), ())
        matched = any(abs(word.start - s) <= time_tol for s in starts)
        if matched or (word.confidence is not None and word.confidence >= high_conf):
            kept.append(word)
    return MergedTranscript(tuple(kept))


def compute_gaps(
    merged: MergedTranscript,
    asset: MediaAsset,
    min_gap: float = DEFAULT_MIN_GAP,
) -> list[Gap]:
    """Maximal word-free intervals of [0, duration] of length >= min_gap.

    The interval before the first word and the one after the last word
    count as gaps.
    """
    intervals = sorted((w.start, w.end) for w in merged.words)
    covered: list[tuple[float, float]] = []
    for start, end in intervals:
        start = max(0.0, start)
        end = min(asset.duration, end)
        if end <= start:
            continue
        if covered and start <= covered[-1][1]:
            covered[-1] = (covered[-1][0], max(covered[-1][1], end))
        else:
            covered.append((start, end))

    gaps = []
    cursor = 0.0
    for start, end in covered:
        if start - cursor >= min_gap and start > cursor:
            gaps.append(Gap(cursor, start))
        cursor = max(cursor, end)
    if asset.duration - cursor >= min_gap and asset.duration > cursor:
        gaps.append(Gap(cursor, asset.duration))
    return gaps


def scene_transcript(scene: Scene, merged: MergedTranscript) -> str:
    """Whitespace-joined text of words whose midpoint falls in
    [scene.start, scene.end)."""
    return " ".join(w.text for w in merged.words
                    if scene.start <= w.midpoint < scene.end)


def words_until(merged: MergedTranscript, cutoff: float) -> str:
    """Whitespace-joined text of words starting at or before the cutoff."""
    return " ".join(w.text for w in merged.words if w.start <= cutoff)


def load_words(path, engine: str) -> list[TranscriptWord]:
    """Read a per-engine transcript file: one JSON word record per line."""
    words = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            words.append(TranscriptWord(
                text=str(rec["text"]),
                start=float(rec["start"]),
                end=float(rec["end"]),
                engine=engine,
                confidence=None if rec.get("confidence") is None
                else float(rec["confidence"]),
            ))
    words.sort(key=lambda w: w.start)
    return words
