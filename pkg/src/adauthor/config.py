"""Pipeline configuration: one JSON file, env-var indirection for secrets."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .providers import ProviderConfig
from .scheduling import DurationModel, SchedulerParams
from .segmentation import DEFAULT_FRAME_RATE, DEFAULT_MIN_SCENE_LEN, DEFAULT_THRESHOLD
from .synthesis import DEFAULT_DUCK_DB
from .transcripts import DEFAULT_HIGH_CONF, DEFAULT_MIN_GAP, DEFAULT_TIME_TOL


@dataclass
class SegmentationConfig:
    threshold: float = DEFAULT_THRESHOLD
    min_scene_len: float = DEFAULT_MIN_SCENE_LEN
    frame_rate: float = DEFAULT_FRAME_RATE


@dataclass
class EnsembleConfig:
    time_tol: float = DEFAULT_TIME_TOL
    high_conf: float = DEFAULT_HIGH_CONF
    min_gap: float = DEFAULT_MIN_GAP


@dataclass
class OptimizerConfig:
    wpm: float = 150.0
    max_retries: int = 2
    min_utterance: float = 0.5
    lookback: float = 2.0

    def scheduler_params(self) -> SchedulerParams:
        return SchedulerParams(
            duration_model=DurationModel(words_per_minute=self.wpm),
            max_retries=self.max_retries,
            min_utterance=self.min_utterance,
            lookback=self.lookback,
        )


@dataclass
class PathsConfig:
    embeddings: Optional[str] = None
    transcript_primary: Optional[str] = None
    transcript_secondary: Optional[str] = None
    frames_dir: Optional[str] = None


@dataclass
class PipelineConfig:
    vlm: ProviderConfig = field(default_factory=lambda: ProviderConfig(name="vlm"))
    tts: ProviderConfig = field(default_factory=lambda: ProviderConfig(name="tts"))
    segmentation: SegmentationConfig = field(default_factory=SegmentationConfig)
    ensemble: EnsembleConfig = field(default_factory=EnsembleConfig)
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    duck_db: float = DEFAULT_DUCK_DB
    paths: PathsConfig = field(default_factory=PathsConfig)
    output_dir: str = "out"
    storage_dir: str = "store"
    base_dir: str = "."

    def resolve(self, path: Optional[str]) -> Optional[str]:
        if path is None:
            return None
        if os.path.isabs(path):
            return path
        return os.path.join(self.base_dir, path)

    @classmethod
    def from_file(cls, path) -> "PipelineConfig":
        path = Path(path)
        raw = json.loads(path.read_text(encoding="utf-8"))
        providers = raw.get("providers", {})
        return cls(
            vlm=ProviderConfig.from_dict(providers.get("vlm", {"name": "vlm"})),
            tts=ProviderConfig.from_dict(providers.get("tts", {"name": "tts"})),
            segmentation=SegmentationConfig(**raw.get("segmentation", {})),
            ensemble=EnsembleConfig(**raw.get("ensemble", {})),
            optimizer=OptimizerConfig(**raw.get("optimizer", {})),
            duck_db=raw.get("synthesis", {}).get("duck_db", DEFAULT_DUCK_DB),
            paths=PathsConfig(**raw.get("paths", {})),
            output_dir=raw.get("output_dir", "out"),
            storage_dir=raw.get("storage_dir", "store"),
            base_dir=str(path.parent),
        )
