"""Domain types, track validation, and the canonical track file format.

The canonical on-disk representation is a UTF-8 JSON document (".adx3 track,
v1"). Events are kept in canonical order everywhere: ascending start_time,
ties broken by event_id.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Any, Mapping, Optional, Sequence

from .errors import AssetMismatch, ParseError, ValidationFailed, VersionError

SCHEMA_VERSION = 1

CATEGORIES = ("entertainment", "education", "howto")
EVENT_TYPES = ("visual", "text_on_screen")
DELIVERIES = ("inline", "extended")
VOICES = ("female", "male")
SOURCES = ("ai", "human")

# Voice follows event type so listeners can tell the two apart without a
# spoken "text on screen" preamble.
VOICE_FOR_TYPE = {"visual": "female", "text_on_screen": "male"}


@dataclass(frozen=True)
class MediaAsset:
    """A registered video plus the metadata the pipeline needs."""

    asset_id: str
    title: str
    category: str
    duration: float
    fps: float
    metadata: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.category not in CATEGORIES:
            raise ValueError(f"unknown category {self.category!r}")
        if self.duration < 0:
            raise ValueError("duration must be >= 0")
        if self.fps <= 0:
            raise ValueError("fps must be > 0")


@dataclass(frozen=True)
class ADEvent:
    """One description unit on the timeline.

    delivery is None for freshly generated events that have not been through
    the scheduler yet; a final track must have it set on every event.
    """

    event_id: str
    start_time: float
    event_type: str
    text: str
    voice: str
    estimated_duration: float = 0.0
    delivery: Optional[str] = None
    source: str = "ai"
    audio_uri: Optional[str] = None

    @property
    def end_time(self) -> float:
        return self.start_time + self.estimated_duration


@dataclass(frozen=True)
class Track:
    """An ordered description track for one asset.

    Events are canonicalized at construction so permuting the input never
    changes the value.
    """

    track_id: str
    asset_id: str
    events: tuple[ADEvent, ...] = ()
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        ordered = tuple(sorted(self.events, key=lambda e: (e.start_time, e.event_id)))
        object.__setattr__(self, "events", ordered)

    def with_events(self, events: Sequence[ADEvent]) -> "Track":
        return replace(self, events=tuple(events))

    def event(self, event_id: str) -> Optional[ADEvent]:
        for ev in self.events:
            if ev.event_id == event_id:
                return ev
        return None


@dataclass(frozen=True)
class Gap:
    """A dialogue-free interval usable for inline narration."""

    start: float
    end: float

    def __post_init__(self):
        if self.end <= self.start:
            raise ValueError("gap end must be greater than start")

    @property
    def length(self) -> float:
        return self.end - self.start


@dataclass(frozen=True)
class Violation:
    """One broken invariant, attached to the offending event."""

    event_id: str
    rule: str
    detail: str = ""
    severity: str = "error"


def voice_for_event_type(event_type: str) -> str:
    """female for visual events, male for text-on-screen events."""
    return VOICE_FOR_TYPE[event_type]


def validate_track(track: Track, asset: MediaAsset) -> list[Violation]:
    """Check every track and event invariant; return all violations found.

    The result is independent of input event order (events are canonical).
    Inline/extended start collisions are reported as warnings, not errors.
    """
    if track.asset_id != asset.asset_id:
        raise AssetMismatch(f"track {track.track_id} references asset "
                            f"{track.asset_id!r}, not {asset.asset_id!r}")

    violations: list[Violation] = []
    for ev in track.events:
        if ev.event_type not in EVENT_TYPES:
            violations.append(Violation(ev.event_id, "unknown-event-type", ev.event_type))
            continue
        if not 0 <= ev.start_time <= asset.duration:
            violations.append(Violation(
                ev.event_id, "start-out-of-range",
                f"start_time {ev.start_time} outside [0, {asset.duration}]"))
        if not ev.text.strip():
            violations.append(Violation(ev.event_id, "empty-text"))
        if ev.voice != VOICE_FOR_TYPE[ev.event_type]:
            violations.append(Violation(
                ev.event_id, "voice-mismatch",
                f"{ev.event_type} events must use the "
                f"{VOICE_FOR_TYPE[ev.event_type]} voice"))
        if ev.delivery is None:
            violations.append(Violation(ev.event_id, "delivery-unset"))
        elif ev.delivery not in DELIVERIES:
            violations.append(Violation(ev.event_id, "unknown-delivery", ev.delivery))
        if ev.estimated_duration < 0:
            violations.append(Violation(ev.event_id, "negative-duration"))
        if ev.source not in SOURCES:
            violations.append(Violation(ev.event_id, "unknown-source", ev.source))

    inline = [e for e in track.events if e.delivery == "inline"]
    for a, b in zip(inline, inline[1:]):
        if b.start_time < a.end_time:
            violations.append(Violation(
                b.event_id, "inline-overlap",
                f"[{b.start_time}, {b.end_time}) intersects "
                f"[{a.start_time}, {a.end_time}) of {a.event_id}"))

    extended = [e for e in track.events if e.delivery == "extended"]
    for a, b in zip(extended, extended[1:]):
        if a.start_time == b.start_time:
            violations.append(Violation(
                b.event_id, "extended-start-collision",
                f"shares start_time {a.start_time} with {a.event_id}"))

    ext_starts = {e.start_time for e in extended}
    for ev in inline:
        if ev.start_time in ext_starts:
            violations.append(Violation(
                ev.event_id, "inline-extended-collision",
                f"inline event coincides with an extended event at {ev.start_time}",
                severity="warning"))

    return violations


def track_errors(track: Track, asset: MediaAsset) -> list[Violation]:
    """Error-severity violations only (warnings do not block publication)."""
    return [v for v in validate_track(track, asset) if v.severity == "error"]


def require_valid(track: Track, asset: MediaAsset) -> None:
    errors = track_errors(track, asset)
    if errors:
        raise ValidationFailed(errors)


def format_timestamp(seconds: float) -> str:
    """HH:MM:SS.mmm with millisecond rounding."""
    total_ms = round(seconds * 1000)
    h, rem = divmod(total_ms, 3_600_000)
    m, rem = divmod(rem, 60_000)
    s, ms = divmod(rem, 1000)
    return f"{h:02d}:{m:02d}:{s:02d}.{ms:03d}"


def export_webvtt(track: Track, asset: MediaAsset) -> str:
    """Render the track as WebVTT, one cue per event in start order.

    Extended cues carry the literal "[EXTENDED] " prefix so a plain player
    surfaces the delivery mode.
    """
    require_valid(track, asset)
    lines = ["WEBVTT"]
    for ev in track.events:
        text = ev.text if ev.delivery == "inline" else f"[EXTENDED] {ev.text}"
        lines.append("")
        lines.append(f"{format_timestamp(ev.start_time)} --> "
                     f"{format_timestamp(ev.end_time)}")
        lines.append(text)
    return "\n".join(lines) + "\n"


def _event_to_record(ev: ADEvent) -> dict[str, Any]:
    return {
        "event_id": ev.event_id,
        "start_time": ev.start_time,
        "event_type": ev.event_type,
        "delivery": ev.delivery,
        "text": ev.text,
        "voice": ev.voice,
        "estimated_duration": ev.estimated_duration,
        "source": ev.source,
        "audio_uri": ev.audio_uri,
    }


def export_track(track: Track) -> str:
    """Serialize to the canonical track document (deterministic bytes)."""
    doc = {
        "schema_version": track.schema_version,
        "track_id": track.track_id,
        "asset_id": track.asset_id,
        "events": [_event_to_record(ev) for ev in track.events],
    }
    return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


_EVENT_FIELDS = {"event_id", "start_time", "event_type", "delivery", "text",
                 "voice", "estimated_duration", "source", "audio_uri"}


def _parse_event(record: Any, index: int) -> ADEvent:
    if not isinstance(record, dict):
        raise ParseError(f"event {index} is not an object")
    missing = _EVENT_FIELDS - record.keys()
    if missing:
        raise ParseError(f"event {index} missing fields {sorted(missing)}")
    try:
        return ADEvent(
            event_id=str(record["event_id"]),
            start_time=float(record["start_time"]),
            event_type=record["event_type"],
            delivery=record["delivery"],
            text=record["text"],
            voice=record["voice"],
            estimated_duration=float(record["estimated_duration"]),
            source=record["source"],
            audio_uri=record["audio_uri"],
        )
    except (TypeError, ValueError) as exc:
        raise ParseError(f"event {index} has a malformed field: {exc}") from exc


def import_track(data: bytes | str) -> Track:
    """Parse a canonical track document; inverse of export_track."""
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError("document is not UTF-8", exc.start) from exc
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.pos) from exc
    if not isinstance(doc, dict):
        raise ParseError("top level is not an object")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise VersionError(f"unsupported schema_version {version!r}")
    for key in ("track_id", "asset_id", "events"):
        if key not in doc:
            raise ParseError(f"missing top-level field {key!r}")
    if not isinstance(doc["events"], list):
        raise ParseError("events is not an array")
    events = tuple(_parse_event(rec, i) for i, rec in enumerate(doc["events"]))
    return Track(
        track_id=str(doc["track_id"]),
        asset_id=str(doc["asset_id"]),
        events=events,
        schema_version=version,
    )
