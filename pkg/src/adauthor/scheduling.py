"""Inline/extended delivery optimization.

Events are grouped into windows around dialogue gaps. Each window is
condensed into one inline narration that must fit its gap, with bounded
shorten-retries. Windows that never fit fall back to extended candidacy and
pass through a necessity filter, so playback is interrupted only for
material the audio does not already convey. How-to assets first merge each
scene's on-screen text and visual actions into a single line.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence, Union

from . import prompts
from .errors import ProviderFailure
from .generation import SceneContext
from .model import ADEvent, Gap, MediaAsset, Track, voice_for_event_type
from .parsing import first_json_array
from .providers import VlmProvider, call_with_backoff
from .segmentation import SceneList
from .transcripts import MergedTranscript

logger = logging.getLogger(__name__)

COLLISION_STEP = 0.001  # extended events may not share a start instant

_EMPTY_CONTEXT = SceneContext(
    metadata_text="", cumulative_transcript="", cumulative_descriptions="",
    scene_transcript="", scene_duration=0.0)


@dataclass(frozen=True)
class DurationModel:
    """Pre-synthesis speech duration estimate from word count."""

    words_per_minute: float = 150.0
    per_char_floor: float = 0.0

    def __post_init__(self):
        if self.words_per_minute <= 0:
            raise ValueError("words_per_minute must be > 0")

    def estimate(self, text: str) -> float:
        words = len(text.split())
        return max(words / (self.words_per_minute / 60.0),
                   len(text) * self.per_char_floor)


@dataclass(frozen=True)
class SchedulerParams:
    duration_model: DurationModel = DurationModel()
    max_retries: int = 2
    min_utterance: float = 0.5
    lookback: float = 2.0


def estimate_speech_duration(text: str, model: DurationModel = DurationModel()) -> float:
    return model.estimate(text)


@dataclass(frozen=True)
class ScheduleDecision:
    event_id: str
    delivery: str
    final_text: str
    attempts: int
    assigned_gap: Optional[Gap] = None


@dataclass(frozen=True)
class InlineFailure:
    events: tuple[ADEvent, ...]
    cause: str
    attempts: int = 0


def retry_shorten(previous_text: str, tts_duration: float, available: float,
                  provider: VlmProvider,
                  sleep: Callable[[float], None] = None) -> str:
    """Ask for a shorter version naming the exact deficit; empty replies
    count as provider failures."""
    prompt = prompts.render_condense_retry(previous_text, tts_duration, available)
    kwargs = {} if sleep is None else {"sleep": sleep}
    reply = call_with_backoff(lambda: provider.generate(prompt), **kwargs).strip()
    if not reply:
        raise ProviderFailure("empty reply to shorten request")
    return reply


def optimize_inline(
    events_in_window: Sequence[ADEvent],
    gap: Gap,
    provider: VlmProvider,
    params: SchedulerParams = SchedulerParams(),
    sleep: Callable[[float], None] = None,
) -> Union[ScheduleDecision, InlineFailure]:
    """Condense a window into one narration that fits the gap.

    Total provider calls are bounded by 1 + max_retries. Gaps shorter than
    min_utterance fail immediately without a call.
    """
    events = tuple(events_in_window)
    if gap.length < params.min_utterance:
        return InlineFailure(events, cause="gap below minimum utterance", attempts=0)

    model = params.duration_model
    combined = "\n".join(ev.text for ev in events)
    prompt = prompts.render_inline_condense(combined, gap.length)
    kwargs = {} if sleep is None else {"sleep": sleep}
    try:
        text = call_with_backoff(lambda: provider.generate(prompt), **kwargs).strip()
    except ProviderFailure as exc:
        return InlineFailure(events, cause=str(exc), attempts=1)
    if not text:
        return InlineFailure(events, cause="empty reply", attempts=1)

    attempts = 1
    while model.estimate(text) > gap.length:
        if attempts > params.max_retries:
            return InlineFailure(events, cause="never fit the gap", attempts=attempts)
        try:
            text = retry_shorten(text, model.estimate(text), gap.length,
                                 provider, sleep=sleep)
        except ProviderFailure as exc:
            return InlineFailure(events, cause=str(exc), attempts=attempts + 1)
        attempts += 1

    return ScheduleDecision(event_id=events[0].event_id, delivery="inline",
                            final_text=text, attempts=attempts, assigned_gap=gap)


def _is_filter_record(rec: dict) -> bool:
    # Lenient: id + necessary suffice; a missing reason is accepted.
    return (isinstance(rec.get("id"), int) and not isinstance(rec.get("id"), bool)
            and isinstance(rec.get("necessary"), bool))


def filter_extended(
    candidates: Sequence[ADEvent],
    scene_ctx: SceneContext,
    provider: VlmProvider,
    sleep: Callable[[float], None] = None,
) -> list[ADEvent]:
    """Keep only candidates the provider marks necessary.

    At most one visual candidate survives per scene; several marks keep the
    lowest id. An unparseable reply is re-asked once, then everything is
    dropped (less interruption beats a bad guess).
    """
    candidates = list(candidates)
    candidates_text = "\n".join(f"{i}: {ev.text}" for i, ev in enumerate(candidates))
    prompt = prompts.render_extended_filter(
        scene_ctx.scene_transcript,
        scene_ctx.cumulative_transcript,
        scene_ctx.cumulative_descriptions,
        candidates_text,
    )
    kwargs = {} if sleep is None else {"sleep": sleep}

    records = None
    for attempt in range(2):
        ask = prompt if attempt == 0 else f"{prompt}\n\nReturn only the JSON array."
        try:
            reply = call_with_backoff(lambda: provider.generate(ask), **kwargs)
        except ProviderFailure as exc:
            logger.warning("necessity filter call failed: %s", exc)
            return []
        records = first_json_array(reply, _is_filter_record)
        if records is not None:
            break
    if records is None:
        logger.warning("necessity filter reply unparseable twice; dropping %d candidates",
                       len(candidates))
        return []

    kept = {rec["id"] for rec in records
            if rec["necessary"] and 0 <= rec["id"] < len(candidates)}
    visual_ids = sorted(i for i in kept if candidates[i].event_type == "visual")
    for extra in visual_ids[1:]:
        kept.discard(extra)
    return [candidates[i] for i in sorted(kept)]


_PUNCT_EDGE = ".,;:!?\"'()[]"


def _digit_tokens(texts: Sequence[str]) -> set[str]:
    tokens = set()
    for text in texts:
        for token in text.split():
            token = token.strip(_PUNCT_EDGE)
            if any(ch.isdigit() for ch in token):
                tokens.add(token)
    return tokens


def merge_howto(
    scene_events: Sequence[ADEvent],
    available_scene_time: float,
    provider: VlmProvider,
    sleep: Callable[[float], None] = None,
) -> list[ADEvent]:
    """Merge a how-to scene's text and visual events into one sentence.

    Measurements (digit-bearing tokens) must survive verbatim; one re-ask,
    then the unmerged events are returned as-is. The merge prompt has no
    input slot, so the event texts are appended as labeled sections.
    """
    events = sorted(scene_events, key=lambda e: (e.start_time, e.event_id))
    text_events = [e for e in events if e.event_type == "text_on_screen"]
    visual_events = [e for e in events if e.event_type == "visual"]
    if not text_events or not visual_events:
        raise ValueError("how-to merge needs at least one text and one visual event")

    prompt = prompts.render_howto_merge(available_scene_time)
    prompt += "\n\nTEXT ON SCREEN:\n" + "\n".join(e.text for e in text_events)
    prompt += "\n\nVISUAL ELEMENTS:\n" + "\n".join(e.text for e in visual_events)

    required = _digit_tokens([e.text for e in events])
    kwargs = {} if sleep is None else {"sleep": sleep}
    for _ in range(2):
        try:
            reply = call_with_backoff(lambda: provider.generate(prompt), **kwargs).strip()
        except ProviderFailure as exc:
            logger.warning("how-to merge failed (%s); keeping unmerged events", exc)
            return list(events)
        if reply and all(token in reply for token in required):
            merged = ADEvent(
                event_id=events[0].event_id,
                start_time=events[0].start_time,
                event_type="visual",
                text=reply,
                voice=voice_for_event_type("visual"),
                source="ai",
            )
            return [merged]
        logger.warning("how-to merge dropped a measurement; re-asking")
    return list(events)


def _nearest_gap(event: ADEvent, gaps: Sequence[Gap], lookback: float) -> Optional[Gap]:
    eligible = [g for g in gaps if g.start >= event.start_time - lookback]
    if not eligible:
        return None
    return min(eligible, key=lambda g: (abs(g.start - event.start_time), g.start))


def _scene_index_of(scenes: Optional[SceneList], timestamp: float) -> int:
    if scenes is None or len(scenes) == 0:
        return 0
    return scenes.containing(timestamp).scene_index


def _resolve_extended_collisions(events: list[ADEvent],
                                 log: Optional[list]) -> list[ADEvent]:
    taken: set[float] = set()
    out = []
    for ev in sorted(events, key=lambda e: (e.start_time, e.event_id)):
        start = ev.start_time
        while start in taken:
            start += COLLISION_STEP
        if start != ev.start_time:
            if log is not None:
                log.append({"event_id": ev.event_id, "outcome": "retimed",
                            "attempts": 0,
                            "reason": f"extended start collision, moved to {start}"})
            ev = replace(ev, start_time=start)
        taken.add(start)
        out.append(ev)
    return out


def schedule(
    raw_track: Track,
    gaps: Sequence[Gap],
    asset: MediaAsset,
    provider: VlmProvider,
    scenes: Optional[SceneList] = None,
    contexts: Optional[Sequence[SceneContext]] = None,
    params: SchedulerParams = SchedulerParams(),
    decision_log: Optional[list] = None,
    sleep: Callable[[float], None] = None,
) -> Track:
    """Produce the final conflict-free track from a raw generated one.

    Scene information is optional; without it the whole asset acts as one
    scene with an empty necessity-filter context.
    """
    model = params.duration_model
    log = decision_log

    def record(event_id, outcome, attempts, reason):
        if log is not None:
            log.append({"event_id": event_id, "outcome": outcome,
                        "attempts": attempts, "reason": reason})

    events = list(raw_track.events)

    # How-to premerge: one fluent line per scene instead of fragmented text
    # and action callouts.
    if asset.category == "howto" and scenes is not None and len(scenes) > 0:
        merged_events = []
        for scene in scenes:
            group = [e for e in events
                     if _scene_index_of(scenes, e.start_time) == scene.scene_index]
            has_both = (any(e.event_type == "text_on_screen" for e in group)
                        and any(e.event_type == "visual" for e in group))
            if not has_both:
                merged_events.extend(group)
                continue
            overlaps = [min(g.end, scene.end) - max(g.start, scene.start)
                        for g in gaps if g.start < scene.end and g.end > scene.start]
            available = max(overlaps) if overlaps else scene.duration
            result = merge_howto(group, available, provider, sleep=sleep)
            if len(result) == 1 and len(group) > 1:
                for old in group:
                    if old.event_id != result[0].event_id:
                        record(old.event_id, "merged", 1,
                               f"merged into {result[0].event_id}")
            merged_events.extend(result)
        events = merged_events

    events.sort(key=lambda e: (e.start_time, e.event_id))

    # Window the events by their nearest usable gap.
    windows: dict[Gap, list[ADEvent]] = {}
    extended_candidates: list[tuple[ADEvent, str]] = []
    for ev in events:
        gap = _nearest_gap(ev, gaps, params.lookback)
        if gap is None:
            extended_candidates.append((ev, "no usable gap"))
        else:
            windows.setdefault(gap, []).append(ev)

    final_events: list[ADEvent] = []
    for gap in sorted(windows, key=lambda g: g.start):
        window = windows[gap]
        outcome = optimize_inline(window, gap, provider, params, sleep=sleep)
        if isinstance(outcome, ScheduleDecision):
            merged = ADEvent(
                event_id=outcome.event_id,
                start_time=gap.start,
                event_type=("visual" if any(e.event_type == "visual" for e in window)
                            else "text_on_screen"),
                text=outcome.final_text,
                voice=voice_for_event_type(
                    "visual" if any(e.event_type == "visual" for e in window)
                    else "text_on_screen"),
                estimated_duration=model.estimate(outcome.final_text),
                delivery="inline",
                source="ai",
            )
            final_events.append(merged)
            for ev in window:
                record(ev.event_id, "inline", outcome.attempts,
                       f"fit gap [{gap.start}, {gap.end})")
        else:
            for ev in window:
                extended_candidates.append((ev, outcome.cause))
                record(ev.event_id, "inline_failed", outcome.attempts, outcome.cause)

    # Necessity filter, one call per scene holding candidates.
    by_scene: dict[int, list[ADEvent]] = {}
    for ev, _cause in extended_candidates:
        by_scene.setdefault(_scene_index_of(scenes, ev.start_time), []).append(ev)

    surviving: list[ADEvent] = []
    for scene_index in sorted(by_scene):
        group = sorted(by_scene[scene_index], key=lambda e: (e.start_time, e.event_id))
        ctx = (contexts[scene_index]
               if contexts is not None and scene_index < len(contexts)
               else _EMPTY_CONTEXT)
        kept = filter_extended(group, ctx, provider, sleep=sleep)
        kept_ids = {ev.event_id for ev in kept}
        for ev in group:
            if ev.event_id in kept_ids:
                record(ev.event_id, "extended", 1, "marked necessary")
            else:
                record(ev.event_id, "dropped", 1, "not marked necessary")
        surviving.extend(kept)

    extended_final = [
        replace(ev, delivery="extended",
                estimated_duration=model.estimate(ev.text))
        for ev in surviving
    ]
    final_events.extend(_resolve_extended_collisions(extended_final, log))

    return raw_track.with_events(final_events)


def demote_unfit(track: Track, flagged_ids: Sequence[str],
                 decision_log: Optional[list] = None) -> Track:
    """Post-synthesis re-pass: inline events whose measured audio no longer
    fits their gap become extended events in place."""
    flagged = set(flagged_ids)
    out = []
    for ev in track.events:
        if ev.event_id in flagged and ev.delivery == "inline":
            out.append(replace(ev, delivery="extended"))
            if decision_log is not None:
                decision_log.append({"event_id": ev.event_id, "outcome": "demoted",
                                     "attempts": 0,
                                     "reason": "measured audio exceeded gap"})
        else:
            out.append(ev)
    extended = [e for e in out if e.delivery == "extended"]
    others = [e for e in out if e.delivery != "extended"]
    resolved = _resolve_extended_collisions(extended, decision_log)
    return track.with_events(others + resolved)
