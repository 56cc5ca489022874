"""Prompt template loading and rendering.

Templates live as versioned text files under templates/ and are rendered by
literal slot replacement rather than str.format: several slots are
expression-shaped (for example the retry template's deficit slot), and the
template bodies contain braces of their own.
"""

from __future__ import annotations

from functools import lru_cache
from importlib import resources

TEMPLATE_NAMES = (
    "guidelines",
    "guidelines_ack",
    "scene_events",
    "inline_condense",
    "condense_retry",
    "extended_filter",
    "howto_merge",
    "frame_describe",
    "frame_question",
)

DESCRIBE_QUERY = "describe the scene"


@lru_cache(maxsize=None)
def template_text(name: str) -> str:
    """Raw template body (file content without the trailing newline)."""
    if name not in TEMPLATE_NAMES:
        raise KeyError(f"unknown template {name!r}")
    path = resources.files(__package__).joinpath("templates", f"{name}.txt")
    text = path.read_text(encoding="utf-8")
    return text[:-1] if text.endswith("\n") else text


def _fill(name: str, substitutions: dict[str, str]) -> str:
    text = template_text(name)
    for slot, value in substitutions.items():
        text = text.replace(slot, value)
    return text


def render_guidelines_ack() -> str:
    return _fill("guidelines_ack", {"{guidelines}": template_text("guidelines")})


def render_scene_events(scene_duration: float, context: str) -> str:
    return _fill("scene_events", {
        "{scene_duration:.2f}": f"{scene_duration:.2f}",
        "{context}": context,
    })


def render_inline_condense(combined_text: str, available_duration: float) -> str:
    return _fill("inline_condense", {
        "{combined_text}": combined_text,
        "{available_duration:.2f}": f"{available_duration:.2f}",
    })


def render_condense_retry(optimized_text: str, tts_duration: float,
                          available_duration: float) -> str:
    deficit = tts_duration - available_duration
    return _fill("condense_retry", {
        "{optimized_text}": optimized_text,
        "{tts_duration:.2f}": f"{tts_duration:.2f}",
        "{available_duration:.2f}": f"{available_duration:.2f}",
        "{tts_duration - available_duration:.2f}": f"{deficit:.2f}",
    })


def render_extended_filter(transcript_text: str, cumulative_transcript: str,
                           previous_desc_text: str, candidates_text: str) -> str:
    return _fill("extended_filter", {
        "{transcript_text}": transcript_text,
        "{cumulative_transcript}": cumulative_transcript,
        "{previous_desc_text}": previous_desc_text,
        "{clip['text']}": candidates_text,
    })


def render_howto_merge(available_scene_time: float) -> str:
    return _fill("howto_merge", {
        "{available_scene_time:.2f}": f"{available_scene_time:.2f}",
    })


def _render_frame_prompt(name: str, scene_info_text: str, query: str,
                         keyframe_time: float, exact_time: float) -> str:
    return _fill(name, {
        "{scene_info_text}": scene_info_text,
        "{query}": query,
        "{keyframe_time:.2f}": f"{keyframe_time:.2f}",
        "{exact_time:.2f}": f"{exact_time:.2f}",
    })


def render_frame_describe(scene_info_text: str, keyframe_time: float,
                          exact_time: float, query: str = DESCRIBE_QUERY) -> str:
    return _render_frame_prompt("frame_describe", scene_info_text, query,
                                keyframe_time, exact_time)


def render_frame_question(scene_info_text: str, query: str,
                          keyframe_time: float, exact_time: float) -> str:
    return _render_frame_prompt("frame_question", scene_info_text, query,
                                keyframe_time, exact_time)
