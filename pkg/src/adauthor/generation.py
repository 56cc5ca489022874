"""Scene-by-scene baseline description generation.

Each scene gets one provider call carrying the scene prompt and three frame
references (keyframe, first and last sampled frame). Context accumulates
across scenes: the transcript so far and every accepted description feed the
next scene's prompt, so later scenes can reuse established names.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from . import prompts
from .errors import GuidelinesNotAcknowledged, ProviderFailure, ProviderFormatError
from .model import ADEvent, MediaAsset, Track, voice_for_event_type
from .parsing import first_json_array
from .providers import VlmProvider, call_with_backoff
from .segmentation import FrameEmbedding, SceneList, Scene
from .transcripts import MergedTranscript, scene_transcript, words_until

logger = logging.getLogger(__name__)

REASK_INSTRUCTION = "Return only the JSON array."

_TYPE_LABELS = {"Text on Screen": "text_on_screen", "Visual": "visual"}


@dataclass(frozen=True)
class SceneContext:
    """Everything the scene prompt needs, accumulated in scene order."""

    metadata_text: str
    cumulative_transcript: str
    cumulative_descriptions: str
    scene_transcript: str
    scene_duration: float

    def context_block(self) -> str:
        return build_context_block(
            self.metadata_text,
            self.cumulative_transcript,
            self.cumulative_descriptions,
            self.scene_transcript,
        )


def asset_metadata_text(asset: MediaAsset) -> str:
    lines = [f"TITLE: {asset.title}", f"CATEGORY: {asset.category}"]
    for key in sorted(asset.metadata):
        lines.append(f"{key.upper()}: {asset.metadata[key]}")
    return "\n".join(lines)


def build_context_block(metadata_text: str, cumulative_transcript: str,
                        cumulative_descriptions: str, scene_transcript_text: str) -> str:
    """Labeled context sections in fixed order; empty sections are omitted."""
    sections = []
    if metadata_text:
        sections.append(f"VIDEO METADATA:\n{metadata_text}")
    if cumulative_transcript:
        sections.append(f"CUMULATIVE TRANSCRIPT:\n{cumulative_transcript}")
    if cumulative_descriptions:
        sections.append(f"CUMULATIVE DESCRIPTION:\n{cumulative_descriptions}")
    if scene_transcript_text:
        sections.append(f"CURRENT SCENE TRANSCRIPT:\n{scene_transcript_text}")
    return "\n\n".join(sections)


def build_guidelines_prompt() -> str:
    return prompts.render_guidelines_ack()


def build_scene_prompt(ctx: SceneContext) -> str:
    return prompts.render_scene_events(ctx.scene_duration, ctx.context_block())


def acknowledge_guidelines(provider: VlmProvider,
                           sleep: Callable[[float], None] = None) -> str:
    """Present the guidelines; the provider must answer with "YES".

    One retry is allowed before the run is aborted.
    """
    prompt = build_guidelines_prompt()
    kwargs = {} if sleep is None else {"sleep": sleep}
    for attempt in range(2):
        reply = call_with_backoff(lambda: provider.generate(prompt), **kwargs)
        if "YES" in reply:
            return reply
        logger.warning("guidelines not acknowledged (attempt %d): %r", attempt + 1, reply)
    raise GuidelinesNotAcknowledged(f"provider {provider.name} never confirmed")


def _is_event_record(rec: dict) -> bool:
    return (isinstance(rec.get("type"), str)
            and isinstance(rec.get("start_time"), (int, float))
            and not isinstance(rec.get("start_time"), bool)
            and isinstance(rec.get("text"), str))


def parse_events(raw: str, scene: Scene) -> list[ADEvent]:
    """Extract labeled events from a provider reply.

    Start times at or above the scene start are taken as asset-absolute;
    smaller values are treated as scene-relative offsets. Either way the
    result is clamped into the scene interval. Records with empty text or an
    unknown type label are dropped.
    """
    records = first_json_array(raw, _is_event_record)
    if records is None:
        raise ProviderFormatError("no parseable event array in reply")

    parsed = []
    for rec in records:
        event_type = _TYPE_LABELS.get(rec["type"])
        if event_type is None:
            logger.debug("dropping record with unknown type %r", rec["type"])
            continue
        if not rec["text"].strip():
            continue
        start = float(rec["start_time"])
        if start < scene.start:
            start += scene.start
        start = min(max(start, scene.start), scene.end)
        parsed.append((start, event_type, rec["text"].strip()))

    parsed.sort(key=lambda item: item[0])
    return [
        ADEvent(
            event_id=f"s{scene.scene_index:03d}e{i:02d}",
            start_time=start,
            event_type=event_type,
            text=text,
            voice=voice_for_event_type(event_type),
            source="ai",
        )
        for i, (start, event_type, text) in enumerate(parsed)
    ]


def scene_frame_refs(scene: Scene, frames: Sequence[FrameEmbedding],
                     frame_ref: Callable[[int], str]) -> list[str]:
    """Keyframe plus first and last sampled frames of the scene, deduplicated."""
    in_scene = [f for f in frames if scene.start <= f.timestamp < scene.end]
    indices = [scene.keyframe_index]
    if in_scene:
        indices.extend([in_scene[0].frame_index, in_scene[-1].frame_index])
    refs = []
    for idx in indices:
        ref = frame_ref(idx)
        if ref not in refs:
            refs.append(ref)
    return refs


def default_frame_ref(index: int) -> str:
    return f"frame:{index:06d}"


def build_scene_contexts(asset: MediaAsset, scenes: SceneList,
                         merged: MergedTranscript, track: Track) -> list[SceneContext]:
    """Reconstruct per-scene contexts from a generated track.

    Used by stages downstream of generation (necessity filtering, on-demand
    queries) that need the same context the generator saw.
    """
    metadata = asset_metadata_text(asset)
    contexts = []
    for scene in scenes:
        prior = [ev.text for ev in track.events
                 if scenes.containing(ev.start_time).scene_index < scene.scene_index]
        contexts.append(SceneContext(
            metadata_text=metadata,
            cumulative_transcript=words_until(merged, scene.start),
            cumulative_descriptions="\n".join(prior),
            scene_transcript=scene_transcript(scene, merged),
            scene_duration=scene.duration,
        ))
    return contexts


def run_genad(
    asset: MediaAsset,
    scenes: SceneList,
    merged: MergedTranscript,
    provider: VlmProvider,
    frames: Sequence[FrameEmbedding] = (),
    frame_ref: Callable[[int], str] = default_frame_ref,
    run_log: Optional[list] = None,
    sleep: Callable[[float], None] = None,
) -> Track:
    """Generate the raw pre-optimization track, one provider call per scene.

    Scenes run strictly in order because each prompt embeds everything
    accepted so far. Transport failures are retried with backoff and then
    skip the scene; malformed replies get exactly one re-ask.
    """
    acknowledge_guidelines(provider, sleep=sleep)
    backoff_kwargs = {} if sleep is None else {"sleep": sleep}

    metadata = asset_metadata_text(asset)
    accepted_texts: list[str] = []
    events: list[ADEvent] = []

    for scene in scenes:
        ctx = SceneContext(
            metadata_text=metadata,
            cumulative_transcript=words_until(merged, scene.start),
            cumulative_descriptions="\n".join(accepted_texts),
            scene_transcript=scene_transcript(scene, merged),
            scene_duration=scene.duration,
        )
        prompt = build_scene_prompt(ctx)
        images = scene_frame_refs(scene, frames, frame_ref)

        try:
            reply = call_with_backoff(lambda: provider.generate(prompt, images),
                                      **backoff_kwargs)
        except ProviderFailure as exc:
            logger.error("scene %d skipped: %s", scene.scene_index, exc)
            if run_log is not None:
                run_log.append({"scene": scene.scene_index,
                                "outcome": "scene_skipped", "reason": str(exc)})
            continue

        try:
            scene_events = parse_events(reply, scene)
        except ProviderFormatError:
            reask = f"{prompt}\n\n{REASK_INSTRUCTION}"
            try:
                reply = call_with_backoff(lambda: provider.generate(reask, images),
                                          **backoff_kwargs)
                scene_events = parse_events(reply, scene)
            except (ProviderFailure, ProviderFormatError) as exc:
                logger.error("scene %d yielded no events: %s", scene.scene_index, exc)
                if run_log is not None:
                    run_log.append({"scene": scene.scene_index,
                                    "outcome": "unparseable", "reason": str(exc)})
                scene_events = []

        events.extend(scene_events)
        accepted_texts.extend(ev.text for ev in scene_events)

    return Track(track_id=f"{asset.asset_id}-baseline", asset_id=asset.asset_id,
                 events=tuple(events))
