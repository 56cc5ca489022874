"""Audio-description authoring engine.

Generates baseline description tracks from video-derived inputs, supports
provenance-tracked human revision, answers paused-frame queries on demand,
and aggregates rubric-based quality ratings. Model access is behind
pluggable providers, so the pipeline itself is deterministic and testable.
"""

from .model import ADEvent, Gap, MediaAsset, Track, validate_track

__version__ = "0.1.0"

__all__ = ["ADEvent", "Gap", "MediaAsset", "Track", "validate_track",
           "__version__"]
