"""Narration synthesis and the playback mix plan.

Inline clips duck the original audio; extended clips pause it. The engine
emits the plan as data and leaves actual mixing to an external renderer.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, replace
from typing import Optional, Sequence

from .errors import PlanConflict, ProviderFailure
from .model import ADEvent, Gap, Track, voice_for_event_type
from .providers import TtsProvider

logger = logging.getLogger(__name__)

DEFAULT_DUCK_DB = -12.0


def assign_voice(event: ADEvent) -> str:
    """Voice is a total function of event type: visual narration is female,
    on-screen text is male."""
    return voice_for_event_type(event.event_type)


@dataclass(frozen=True)
class SynthReport:
    unfit_inline: tuple[str, ...] = ()
    failed: tuple[str, ...] = ()


def _fits_some_gap(event: ADEvent, gaps: Sequence[Gap]) -> bool:
    return any(g.start <= event.start_time and event.end_time <= g.end for g in gaps)


def synthesize_track(track: Track, provider: TtsProvider,
                     gaps: Optional[Sequence[Gap]] = None) -> tuple[Track, SynthReport]:
    """Synthesize every event; measured durations replace estimates.

    Inline events whose measured clip no longer fits any gap are reported
    for the scheduler's demotion re-pass. A failed synthesis leaves the
    event untouched and is reported; the rest of the track proceeds.
    """
    events = []
    unfit: list[str] = []
    failed: list[str] = []
    for ev in track.events:
        try:
            result = provider.synthesize(ev.text, ev.voice)
        except ProviderFailure as exc:
            logger.error("synthesis failed for %s: %s", ev.event_id, exc)
            failed.append(ev.event_id)
            events.append(ev)
            continue
        ev = replace(ev, audio_uri=result.audio_uri,
                     estimated_duration=result.duration)
        if ev.delivery == "inline" and gaps is not None and not _fits_some_gap(ev, gaps):
            unfit.append(ev.event_id)
        events.append(ev)
    return track.with_events(events), SynthReport(tuple(unfit), tuple(failed))


@dataclass(frozen=True)
class MixInstruction:
    at: float
    kind: str
    clip_uri: Optional[str] = None
    duck_db: Optional[float] = None


@dataclass(frozen=True)
class MixPlan:
    instructions: tuple[MixInstruction, ...] = ()

    def to_json(self) -> str:
        records = []
        for ins in self.instructions:
            rec = {"at": ins.at, "kind": ins.kind}
            if ins.clip_uri is not None:
                rec["clip_uri"] = ins.clip_uri
            if ins.duck_db is not None:
                rec["duck_db"] = ins.duck_db
            records.append(rec)
        return json.dumps({"instructions": records}, indent=2, sort_keys=True,
                          ensure_ascii=False) + "\n"


def build_mix_plan(track: Track, duck_db: float = DEFAULT_DUCK_DB) -> MixPlan:
    """Duck around inline clips, pause-and-resume around extended clips.

    Instruction times are main-timeline seconds; an extended clip's pause,
    playback, and resume all anchor at the same instant because the main
    timeline does not advance while it plays.
    """
    extended_starts: set[float] = set()
    ordered: list[tuple[float, int, MixInstruction]] = []
    seq = 0

    def push(at: float, kind: str, clip_uri=None, duck=None):
        nonlocal seq
        ordered.append((at, seq, MixInstruction(at, kind, clip_uri, duck)))
        seq += 1

    for ev in sorted(track.events, key=lambda e: (e.start_time, e.event_id)):
        if ev.delivery == "inline":
            push(ev.start_time, "duck_begin", duck=duck_db)
            push(ev.start_time, "play_clip", clip_uri=ev.audio_uri)
            push(ev.end_time, "duck_end")
        elif ev.delivery == "extended":
            if ev.start_time in extended_starts:
                raise PlanConflict(
                    f"two extended clips at {ev.start_time} ({ev.event_id})")
            extended_starts.add(ev.start_time)
            push(ev.start_time, "pause_main")
            push(ev.start_time, "play_clip", clip_uri=ev.audio_uri)
            push(ev.start_time, "resume_main")
        else:
            raise PlanConflict(f"event {ev.event_id} has no delivery mode")

    ordered.sort(key=lambda item: (item[0], item[1]))
    return MixPlan(tuple(ins for _, _, ins in ordered))
