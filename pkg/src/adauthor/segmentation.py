"""Scene boundary detection from per-frame embedding vectors.

A boundary candidate sits between two consecutive frames whose cosine
similarity drops below the threshold; candidates too close to the previous
accepted boundary (or to time zero) are suppressed left to right.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateVector, InsufficientInput, RangeError
from .model import MediaAsset

DEFAULT_THRESHOLD = 0.85
DEFAULT_MIN_SCENE_LEN = 2.0
DEFAULT_FRAME_RATE = 1.0


@dataclass(frozen=True)
class FrameEmbedding:
    frame_index: int
    timestamp: float
    vector: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "vector", np.asarray(self.vector, dtype=np.float64))


@dataclass(frozen=True)
class Scene:
    scene_index: int
    start: float
    end: float
    keyframe_index: int

    @property
    def duration(self) -> float:
        return self.end - self.start

    @property
    def midpoint(self) -> float:
        return (self.start + self.end) / 2.0


@dataclass(frozen=True)
class SceneList:
    scenes: tuple[Scene, ...]

    def __iter__(self):
        return iter(self.scenes)

    def __len__(self):
        return len(self.scenes)

    def __getitem__(self, index):
        return self.scenes[index]

    def containing(self, timestamp: float) -> Scene:
        """Scene whose [start, end) holds the timestamp; the last scene is
        closed on the right."""
        for scene in self.scenes:
            if scene.start <= timestamp < scene.end:
                return scene
        return self.scenes[-1]


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise DegenerateVector("cosine similarity is undefined for a zero vector")
    return float(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0))


def detect_boundaries(
    frames: Sequence[FrameEmbedding],
    threshold: float = DEFAULT_THRESHOLD,
    min_scene_len: float = DEFAULT_MIN_SCENE_LEN,
) -> list[float]:
    """Boundary timestamps (midpoints between frames) after suppression.

    A candidate between frames i and i+1 exists iff their similarity is
    below the threshold. Candidates closer than min_scene_len to the
    previously accepted boundary, or to time 0, are dropped in a single
    left-to-right pass.
    """
    if len(frames) < 2:
        raise InsufficientInput("boundary detection needs at least two frames")
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must lie in (0, 1)")

    candidates = []
    for prev, cur in zip(frames, frames[1:]):
        if cosine_similarity(prev.vector, cur.vector) < threshold:
            candidates.append((prev.timestamp + cur.timestamp) / 2.0)

    accepted: list[float] = []
    last = 0.0
    for ts in candidates:
        if ts - last >= min_scene_len:
            accepted.append(ts)
            last = ts
    return accepted


def build_scenes(
    boundaries: Sequence[float],
    asset: MediaAsset,
    frames: Sequence[FrameEmbedding],
) -> SceneList:
    """Partition [0, duration] at the boundaries; N boundaries, N+1 scenes.

    A scene's keyframe is the frame whose timestamp is nearest the scene
    midpoint (ties go to the lower frame index).
    """
    for prev, cur in zip((0.0, *boundaries), boundaries):
        if cur <= prev:
            raise RangeError(f"boundaries must be strictly increasing, got {cur}")
    for ts in boundaries:
        if not 0.0 < ts < asset.duration:
            raise RangeError(f"boundary {ts} outside (0, {asset.duration})")

    edges = [0.0, *boundaries, asset.duration]
    scenes = []
    for i, (start, end) in enumerate(zip(edges, edges[1:])):
        midpoint = (start + end) / 2.0
        keyframe = min(frames, key=lambda f: (abs(f.timestamp - midpoint), f.frame_index))
        scenes.append(Scene(i, start, end, keyframe.frame_index))
    return SceneList(tuple(scenes))


def load_embeddings(path) -> list[FrameEmbedding]:
    """Read a frame-embedding file: one JSON record per line with
    frame_index, timestamp, and vector."""
    frames = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            frames.append(FrameEmbedding(
                frame_index=int(rec["frame_index"]),
                timestamp=float(rec["timestamp"]),
                vector=np.asarray(rec["vector"], dtype=np.float64),
            ))
    frames.sort(key=lambda f: f.frame_index)
    return frames
