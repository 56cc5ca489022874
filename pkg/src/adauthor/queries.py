"""On-demand paused-frame descriptions and question answering.

Both operations see the paused frame plus the nearest keyframe, and only
context from before the pause instant, so a reply can never spoil what has
not played yet.
"""

from __future__ import annotations

import logging
import re
import time
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from . import prompts
from .errors import NoFrames, ProviderFailure, Unavailable
from .generation import asset_metadata_text, build_context_block
from .model import MediaAsset, Track
from .providers import TtsProvider, VlmProvider, call_with_backoff
from .segmentation import Scene, SceneList
from .transcripts import MergedTranscript

logger = logging.getLogger(__name__)

# Replies must not leak machine coordinates like frame numbers.
_COORDINATE_LEAK = re.compile(r"\bframes?\b\W*\d|timestamp", re.IGNORECASE)

_TERMINATOR = re.compile(r"[.!?](?=\s|$)")


@dataclass(frozen=True)
class FrameStamp:
    frame_index: int
    timestamp: float


@dataclass(frozen=True)
class AdaptContext:
    """Generation artifacts an asset needs to answer paused-frame queries."""

    asset: MediaAsset
    scenes: SceneList
    frames: tuple[FrameStamp, ...]
    words: MergedTranscript
    track: Track


@dataclass(frozen=True)
class AdaptReply:
    text: str
    audio_uri: Optional[str] = None
    latency_ms: int = 0


@dataclass(frozen=True)
class AdaptQuery:
    asset_id: str
    pause_time: float
    kind: str
    reply: str
    latency_ms: int
    question_text: Optional[str] = None


def truncate_sentence(text: str) -> str:
    """Cut at the first sentence terminator followed by whitespace or the
    end; decimal points and embedded dots survive."""
    text = text.strip()
    match = _TERMINATOR.search(text)
    return text[:match.end()] if match else text


def select_frames(pause_time: float, scenes: SceneList,
                  frames: Sequence[FrameStamp]) -> tuple[FrameStamp, FrameStamp]:
    """(exact paused frame, scene keyframe); when they coincide the previous
    scene's keyframe stands in so the provider still sees two frames."""
    if not frames:
        raise NoFrames("no frames registered for this asset")
    by_index = {f.frame_index: f for f in frames}
    exact = min(frames, key=lambda f: (abs(f.timestamp - pause_time), f.frame_index))
    scene = scenes.containing(pause_time)
    keyframe = by_index.get(scene.keyframe_index, exact)
    if keyframe.frame_index == exact.frame_index and scene.scene_index > 0:
        previous = scenes[scene.scene_index - 1]
        keyframe = by_index.get(previous.keyframe_index, keyframe)
    return exact, keyframe


def scene_info_text(ctx: AdaptContext, pause_time: float) -> str:
    """Context block truncated at the pause: transcript words and accepted
    descriptions that start after pause_time are excluded."""
    scene = ctx.scenes.containing(pause_time)
    cumulative_words = " ".join(w.text for w in ctx.words if w.start <= pause_time)
    descriptions = "\n".join(ev.text for ev in ctx.track.events
                             if ev.start_time <= pause_time)
    current = " ".join(w.text for w in ctx.words
                       if scene.start <= w.midpoint < scene.end
                       and w.start <= pause_time)
    return build_context_block(asset_metadata_text(ctx.asset), cumulative_words,
                               descriptions, current)


def _ask(provider: VlmProvider, prompt: str, images: Sequence[str],
         sleep: Callable[[float], None] = None) -> str:
    kwargs = {} if sleep is None else {"sleep": sleep}
    try:
        return call_with_backoff(lambda: provider.generate(prompt, images), **kwargs)
    except ProviderFailure as exc:
        raise Unavailable(str(exc)) from exc


def _speak(reply_text: str, tts: Optional[TtsProvider]) -> Optional[str]:
    if tts is None or not reply_text:
        return None
    try:
        return tts.synthesize(reply_text, "female").audio_uri
    except ProviderFailure as exc:
        logger.warning("reply synthesis failed: %s", exc)
        return None


def describe_now(ctx: AdaptContext, pause_time: float, provider: VlmProvider,
                 frame_ref: Callable[[int], str] = None,
                 tts: Optional[TtsProvider] = None,
                 sleep: Callable[[float], None] = None) -> AdaptReply:
    """One-sentence description of what is visible at the pause instant."""
    started = time.monotonic()
    exact, keyframe = select_frames(pause_time, ctx.scenes, ctx.frames)
    prompt = prompts.render_frame_describe(
        scene_info_text(ctx, pause_time),
        keyframe_time=keyframe.timestamp, exact_time=exact.timestamp)
    ref = frame_ref or (lambda i: f"frame:{i:06d}")
    reply = _ask(provider, prompt, [ref(keyframe.frame_index), ref(exact.frame_index)],
                 sleep=sleep)
    text = truncate_sentence(reply)
    latency = int((time.monotonic() - started) * 1000)
    return AdaptReply(text=text, audio_uri=_speak(text, tts), latency_ms=latency)


def answer_question(ctx: AdaptContext, pause_time: float, question: str,
                    provider: VlmProvider,
                    frame_ref: Callable[[int], str] = None,
                    tts: Optional[TtsProvider] = None,
                    sleep: Callable[[float], None] = None) -> AdaptReply:
    """Concise single-sentence answer about the paused frame.

    Replies that mention frame numbers or timestamps are re-asked once.
    """
    if not question or not question.strip():
        raise ValueError("question text must be non-empty")
    started = time.monotonic()
    exact, keyframe = select_frames(pause_time, ctx.scenes, ctx.frames)
    prompt = prompts.render_frame_question(
        scene_info_text(ctx, pause_time), question.strip(),
        keyframe_time=keyframe.timestamp, exact_time=exact.timestamp)
    ref = frame_ref or (lambda i: f"frame:{i:06d}")
    images = [ref(keyframe.frame_index), ref(exact.frame_index)]

    reply = _ask(provider, prompt, images, sleep=sleep)
    if _COORDINATE_LEAK.search(reply):
        logger.info("reply leaked frame coordinates; re-asking")
        reply = _ask(provider, prompt, images, sleep=sleep)
    text = truncate_sentence(reply)
    latency = int((time.monotonic() - started) * 1000)
    return AdaptReply(text=text, audio_uri=_speak(text, tts), latency_ms=latency)
