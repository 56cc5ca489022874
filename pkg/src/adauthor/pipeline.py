"""End-to-end generation pipeline: inputs to finished track plus artifacts.

Stage order: segmentation, transcript ensemble, generation, delivery
optimization, synthesis (with one demotion re-pass), mix planning. Every
artifact write is deterministic bytes so runs with scripted providers are
hash-stable.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

from .config import PipelineConfig
from .generation import build_scene_contexts, run_genad
from .model import MediaAsset, Track, export_track, import_track
from .providers import TtsProvider, VlmProvider, build_tts, build_vlm
from .queries import AdaptContext, FrameStamp
from .scheduling import demote_unfit, schedule
from .segmentation import SceneList, Scene, build_scenes, detect_boundaries, load_embeddings
from .synthesis import build_mix_plan, synthesize_track
from .transcripts import (MergedTranscript, TranscriptWord, align_and_filter,
                          compute_gaps, load_words)

logger = logging.getLogger(__name__)

STAGES = ("segmentation", "ensemble", "generation", "scheduling",
          "synthesis", "export")


class StageFailure(Exception):
    def __init__(self, stage: str, message: str):
        self.stage = stage
        super().__init__(f"{stage}: {message}")


@dataclass
class PipelineResult:
    asset: MediaAsset
    track: Track
    decision_log: list
    mix_plan_json: str
    scenes: SceneList
    frames: list
    merged: MergedTranscript
    gaps: list


def load_asset_spec(path) -> MediaAsset:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    return MediaAsset(
        asset_id=raw["asset_id"],
        title=raw.get("title", raw["asset_id"]),
        category=raw["category"],
        duration=float(raw["duration"]),
        fps=float(raw["fps"]),
        metadata=raw.get("metadata", {}),
    )


def make_frame_ref(config: PipelineConfig) -> Callable[[int], str]:
    frames_dir = config.resolve(config.paths.frames_dir)
    if frames_dir is None:
        return lambda index: f"frame:{index:06d}"
    return lambda index: os.path.join(frames_dir, f"frame_{index:06d}.jpg")


def run_pipeline(
    config: PipelineConfig,
    asset: MediaAsset,
    vlm: Optional[VlmProvider] = None,
    tts: Optional[TtsProvider] = None,
    sleep: Callable[[float], None] = None,
) -> PipelineResult:
    vlm = vlm or build_vlm(config.vlm, base_dir=config.base_dir)
    tts = tts or build_tts(config.tts, wpm=config.optimizer.wpm)

    embeddings_path = config.resolve(config.paths.embeddings)
    if embeddings_path is None or not os.path.exists(embeddings_path):
        raise StageFailure("segmentation", "missing input")
    try:
        frames = load_embeddings(embeddings_path)
        boundaries = detect_boundaries(frames, config.segmentation.threshold,
                                       config.segmentation.min_scene_len)
        scenes = build_scenes(boundaries, asset, frames)
    except StageFailure:
        raise
    except Exception as exc:
        raise StageFailure("segmentation", str(exc)) from exc

    try:
        primary_path = config.resolve(config.paths.transcript_primary)
        secondary_path = config.resolve(config.paths.transcript_secondary)
        if primary_path is None or not os.path.exists(primary_path):
            raise StageFailure("ensemble", "missing input")
        primary = load_words(primary_path, "primary_asr")
        secondary = (load_words(secondary_path, "secondary_asr")
                     if secondary_path and os.path.exists(secondary_path) else [])
        merged = align_and_filter(primary, secondary,
                                  time_tol=config.ensemble.time_tol,
                                  high_conf=config.ensemble.high_conf)
        gaps = compute_gaps(merged, asset, min_gap=config.ensemble.min_gap)
    except StageFailure:
        raise
    except Exception as exc:
        raise StageFailure("ensemble", str(exc)) from exc

    decision_log: list = []
    frame_ref = make_frame_ref(config)
    try:
        raw_track = run_genad(asset, scenes, merged, vlm, frames=frames,
                              frame_ref=frame_ref, run_log=decision_log,
                              sleep=sleep)
    except Exception as exc:
        raise StageFailure("generation", str(exc)) from exc

    try:
        contexts = build_scene_contexts(asset, scenes, merged, raw_track)
        track = schedule(raw_track, gaps, asset, vlm, scenes=scenes,
                         contexts=contexts,
                         params=config.optimizer.scheduler_params(),
                         decision_log=decision_log, sleep=sleep)
    except Exception as exc:
        raise StageFailure("scheduling", str(exc)) from exc

    try:
        track, report = synthesize_track(track, tts, gaps=gaps)
        if report.unfit_inline:
            track = demote_unfit(track, report.unfit_inline, decision_log)
        for event_id in report.failed:
            decision_log.append({"event_id": event_id, "outcome": "synth_failed",
                                 "attempts": 1, "reason": "tts provider failure"})
        mix_plan = build_mix_plan(track, duck_db=config.duck_db)
    except Exception as exc:
        raise StageFailure("synthesis", str(exc)) from exc

    return PipelineResult(
        asset=asset, track=track, decision_log=decision_log,
        mix_plan_json=mix_plan.to_json(), scenes=scenes, frames=frames,
        merged=merged, gaps=gaps,
    )


def decision_log_text(decision_log: list) -> str:
    return "".join(json.dumps(entry, sort_keys=True) + "\n"
                   for entry in decision_log)


def adapt_context_json(result: PipelineResult) -> str:
    """Bundle everything paused-frame queries need, as deterministic JSON."""
    asset = result.asset
    doc = {
        "asset": {
            "asset_id": asset.asset_id, "title": asset.title,
            "category": asset.category, "duration": asset.duration,
            "fps": asset.fps, "metadata": dict(asset.metadata),
        },
        "scenes": [{"scene_index": s.scene_index, "start": s.start,
                    "end": s.end, "keyframe_index": s.keyframe_index}
                   for s in result.scenes],
        "frames": [{"frame_index": f.frame_index, "timestamp": f.timestamp}
                   for f in result.frames],
        "words": [{"text": w.text, "start": w.start, "end": w.end}
                  for w in result.merged.words],
        "track": json.loads(export_track(result.track)),
    }
    return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def load_adapt_context(path) -> AdaptContext:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    asset = MediaAsset(**doc["asset"])
    scenes = SceneList(tuple(Scene(**s) for s in doc["scenes"]))
    frames = tuple(FrameStamp(**f) for f in doc["frames"])
    words = MergedTranscript(tuple(
        TranscriptWord(text=w["text"], start=w["start"], end=w["end"])
        for w in doc["words"]))
    track = import_track(json.dumps(doc["track"]))
    return AdaptContext(asset=asset, scenes=scenes, frames=frames,
                        words=words, track=track)


def adapt_context_from_result(result: PipelineResult) -> AdaptContext:
    return AdaptContext(
        asset=result.asset,
        scenes=result.scenes,
        frames=tuple(FrameStamp(f.frame_index, f.timestamp) for f in result.frames),
        words=result.merged,
        track=result.track,
    )


def write_outputs(result: PipelineResult, output_dir) -> dict[str, Path]:
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    asset_id = result.asset.asset_id
    paths = {
        "track": out / f"{asset_id}.adx3",
        "decisions": out / f"{asset_id}.decisions.jsonl",
        "mixplan": out / f"{asset_id}.mixplan.json",
        "context": out / f"{asset_id}.context.json",
    }
    paths["track"].write_text(export_track(result.track), encoding="utf-8")
    paths["decisions"].write_text(decision_log_text(result.decision_log),
                                  encoding="utf-8")
    paths["mixplan"].write_text(result.mix_plan_json, encoding="utf-8")
    paths["context"].write_text(adapt_context_json(result), encoding="utf-8")
    return paths
