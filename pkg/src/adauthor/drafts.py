"""Versioned description drafts: revisions, collaboration gating, and
proportional contribution credit.

Drafts are event-sourced: the revision log replays from an empty track to
the current state, and every write is an optimistic compare-and-set on the
draft version. Contribution shares come from length-normalized edit
distances between successive revision texts, with the machine-generated
baseline counting as one full unit of credit.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Iterable, Optional, Protocol, Sequence

from .errors import (Conflict, Forbidden, NotFound, RejectedWithViolations,
                     ValidationFailed)
from .levenshtein import levenshtein
from .model import ADEvent, MediaAsset, Track, Violation, track_errors

AI_AUTHOR = "AI"

OP_KINDS = ("edit_text", "retime", "change_delivery", "add", "remove",
            "replace_audio")


@dataclass(frozen=True)
class RevisionOp:
    event_id: str
    kind: str
    before: Any = None
    after: Any = None

    def __post_init__(self):
        if self.kind not in OP_KINDS:
            raise ValueError(f"unknown op kind {self.kind!r}")


@dataclass(frozen=True)
class Revision:
    author_id: str
    ops: tuple[RevisionOp, ...]
    revision_id: str = ""
    timestamp: float = 0.0


@dataclass(frozen=True)
class Draft:
    draft_id: str
    asset_id: str
    current: Track
    version: int
    collab_enabled: bool
    published: bool
    revision_log: tuple[Revision, ...]

    @property
    def authors(self) -> list[str]:
        seen: list[str] = []
        for rev in self.revision_log:
            if rev.author_id not in seen:
                seen.append(rev.author_id)
        return seen

    @property
    def original_human_author(self) -> Optional[str]:
        for rev in self.revision_log:
            if rev.author_id != AI_AUTHOR:
                return rev.author_id
        return None


@dataclass(frozen=True)
class Attribution:
    shares: dict[str, float]


def event_to_dict(ev: ADEvent) -> dict:
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


def event_from_dict(rec: dict) -> ADEvent:
    return ADEvent(**rec)


def _mismatch(event_id: str, kind: str, detail: str) -> RejectedWithViolations:
    return RejectedWithViolations([Violation(event_id, f"{kind}-before-mismatch", detail)])


def apply_ops(track: Track, ops: Sequence[RevisionOp]) -> Track:
    """Apply ops atomically to produce a new track.

    Every op's before-value must match the present state, so a replayed log
    can never silently diverge.
    """
    events = {ev.event_id: ev for ev in track.events}
    for op in ops:
        ev = events.get(op.event_id)
        if op.kind == "add":
            if ev is not None:
                raise _mismatch(op.event_id, "add", "event already exists")
            new = event_from_dict(op.after)
            if new.event_id != op.event_id:
                raise _mismatch(op.event_id, "add", "event_id mismatch in payload")
            events[op.event_id] = new
            continue
        if ev is None:
            raise NotFound(f"event {op.event_id} not in track")
        if op.kind == "remove":
            if event_to_dict(ev) != op.before:
                raise _mismatch(op.event_id, "remove", "stored event differs")
            del events[op.event_id]
        elif op.kind == "edit_text":
            if ev.text != op.before:
                raise _mismatch(op.event_id, "edit_text", "text changed underneath")
            events[op.event_id] = replace(ev, text=op.after)
        elif op.kind == "retime":
            if ev.start_time != op.before:
                raise _mismatch(op.event_id, "retime", "start_time changed underneath")
            events[op.event_id] = replace(ev, start_time=op.after)
        elif op.kind == "change_delivery":
            if ev.delivery != op.before:
                raise _mismatch(op.event_id, "change_delivery", "delivery changed underneath")
            events[op.event_id] = replace(ev, delivery=op.after)
        elif op.kind == "replace_audio":
            current = {"audio_uri": ev.audio_uri,
                       "estimated_duration": ev.estimated_duration}
            if current != op.before:
                raise _mismatch(op.event_id, "replace_audio", "audio changed underneath")
            events[op.event_id] = replace(
                ev, audio_uri=op.after["audio_uri"],
                estimated_duration=op.after["estimated_duration"])
    return track.with_events(tuple(events.values()))


def replay(track_id: str, asset_id: str,
           revisions: Iterable[Revision]) -> Track:
    """Rebuild the track by replaying the revision log from empty."""
    track = Track(track_id=track_id, asset_id=asset_id, events=())
    for rev in revisions:
        track = apply_ops(track, rev.ops)
    return track


def initial_revision(track: Track, timestamp: float = 0.0) -> Revision:
    ops = tuple(RevisionOp(ev.event_id, "add", after=event_to_dict(ev))
                for ev in track.events)
    return Revision(author_id=AI_AUTHOR, ops=ops, revision_id="r1",
                    timestamp=timestamp)


def attribution_text(track: Track) -> str:
    """Serialization used for contribution credit.

    Events are ordered by event_id so pure retimes and nudges leave the
    serialization, and therefore the credit, unchanged.
    """
    return "\n".join(ev.text for ev in
                     sorted(track.events, key=lambda e: e.event_id))


def compute_attribution(draft: Draft) -> Attribution:
    """Length-normalized edit-distance credit per author, summing to 1."""
    raw: dict[str, float] = {}
    track = Track(track_id=draft.current.track_id, asset_id=draft.asset_id)
    prev_text = attribution_text(track)
    for i, rev in enumerate(draft.revision_log, start=1):
        track = apply_ops(track, rev.ops)
        text = attribution_text(track)
        if i == 1:
            credit = 1.0
        else:
            denom = max(len(prev_text), len(text), 1)
            credit = min(1.0, max(0.0, levenshtein(prev_text, text) / denom))
        raw[rev.author_id] = raw.get(rev.author_id, 0.0) + credit
        prev_text = text
    total = sum(raw.values())
    if total == 0.0:
        return Attribution(shares={AI_AUTHOR: 1.0})
    return Attribution(shares={author: credit / total
                               for author, credit in raw.items()})


class DraftStorage(Protocol):
    def save(self, draft: Draft) -> None: ...
    def load_all(self) -> list[Draft]: ...


class FileStorage:
    """Snapshot plus append-only revision log per draft."""

    def __init__(self, root: Path | str):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _snapshot_path(self, draft_id: str) -> Path:
        return self.root / f"{draft_id}.json"

    def _log_path(self, draft_id: str) -> Path:
        return self.root / f"{draft_id}.revisions.jsonl"

    def save(self, draft: Draft) -> None:
        snapshot = {
            "draft_id": draft.draft_id,
            "asset_id": draft.asset_id,
            "version": draft.version,
            "collab_enabled": draft.collab_enabled,
            "published": draft.published,
            "track_id": draft.current.track_id,
        }
        self._snapshot_path(draft.draft_id).write_text(
            json.dumps(snapshot, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        log_path = self._log_path(draft.draft_id)
        existing = 0
        if log_path.exists():
            with log_path.open(encoding="utf-8") as fh:
                existing = sum(1 for line in fh if line.strip())
        with log_path.open("a", encoding="utf-8") as fh:
            for rev in draft.revision_log[existing:]:
                fh.write(json.dumps(_revision_to_dict(rev), sort_keys=True) + "\n")

    def load_all(self) -> list[Draft]:
        drafts = []
        for snap_path in sorted(self.root.glob("*.json")):
            snapshot = json.loads(snap_path.read_text(encoding="utf-8"))
            revisions = []
            log_path = self._log_path(snapshot["draft_id"])
            if log_path.exists():
                with log_path.open(encoding="utf-8") as fh:
                    for line in fh:
                        if line.strip():
                            revisions.append(_revision_from_dict(json.loads(line)))
            current = replay(snapshot["track_id"], snapshot["asset_id"], revisions)
            drafts.append(Draft(
                draft_id=snapshot["draft_id"],
                asset_id=snapshot["asset_id"],
                current=current,
                version=snapshot["version"],
                collab_enabled=snapshot["collab_enabled"],
                published=snapshot["published"],
                revision_log=tuple(revisions),
            ))
        return drafts


def _revision_to_dict(rev: Revision) -> dict:
    return {
        "revision_id": rev.revision_id,
        "author_id": rev.author_id,
        "timestamp": rev.timestamp,
        "ops": [{"event_id": op.event_id, "kind": op.kind,
                 "before": op.before, "after": op.after} for op in rev.ops],
    }


def _revision_from_dict(rec: dict) -> Revision:
    return Revision(
        author_id=rec["author_id"],
        revision_id=rec["revision_id"],
        timestamp=rec["timestamp"],
        ops=tuple(RevisionOp(**op) for op in rec["ops"]),
    )


@dataclass(frozen=True)
class Feedback:
    draft_id: str
    rating: int
    comment: str = ""


class DraftStore:
    """Serializes writes per draft; reads return immutable snapshots."""

    def __init__(self, storage: Optional[DraftStorage] = None):
        self._storage = storage
        self._drafts: dict[str, Draft] = {}
        self._assets: dict[str, MediaAsset] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()
        self.feedback: list[Feedback] = []
        if storage is not None:
            for draft in storage.load_all():
                self._drafts[draft.draft_id] = draft
                self._locks[draft.draft_id] = threading.Lock()

    def register_asset(self, asset: MediaAsset) -> None:
        with self._registry_lock:
            self._assets[asset.asset_id] = asset

    def asset(self, asset_id: str) -> MediaAsset:
        try:
            return self._assets[asset_id]
        except KeyError:
            raise NotFound(f"asset {asset_id} is not registered") from None

    def create_draft(self, asset: MediaAsset, ai_track: Track,
                     draft_id: Optional[str] = None) -> Draft:
        """New draft at version 1, collaborative editing on by default so the
        machine baseline invites review."""
        errors = track_errors(ai_track, asset)
        if errors:
            raise ValidationFailed(errors)
        self.register_asset(asset)
        draft_id = draft_id or f"d-{uuid.uuid4().hex[:12]}"
        draft = Draft(
            draft_id=draft_id,
            asset_id=asset.asset_id,
            current=ai_track,
            version=1,
            collab_enabled=True,
            published=False,
            revision_log=(initial_revision(ai_track, timestamp=time.time()),),
        )
        with self._registry_lock:
            if draft_id in self._drafts:
                raise Conflict(f"draft {draft_id} already exists")
            self._drafts[draft_id] = draft
            self._locks[draft_id] = threading.Lock()
        self._persist(draft)
        return draft

    def get(self, draft_id: str) -> Draft:
        try:
            return self._drafts[draft_id]
        except KeyError:
            raise NotFound(f"draft {draft_id} does not exist") from None

    def drafts(self) -> list[Draft]:
        return list(self._drafts.values())

    def _persist(self, draft: Draft) -> None:
        if self._storage is not None:
            self._storage.save(draft)

    def _check_author_allowed(self, draft: Draft, author_id: str) -> None:
        if author_id == AI_AUTHOR:
            return
        original = draft.original_human_author
        if original is None or author_id == original:
            return
        if not draft.collab_enabled:
            raise Forbidden(
                f"collaborative editing is disabled; only {original} may edit")

    def apply_revision(self, draft_id: str, expected_version: int,
                       revision: Revision) -> int:
        """Compare-and-set write; returns the new version."""
        lock = self._lock_for(draft_id)
        with lock:
            draft = self.get(draft_id)
            if draft.published:
                raise Conflict("draft is published; unpublish before editing")
            if expected_version != draft.version:
                raise Conflict(f"expected version {expected_version}, "
                               f"draft is at {draft.version}")
            self._check_author_allowed(draft, revision.author_id)
            new_track = apply_ops(draft.current, revision.ops)
            errors = track_errors(new_track, self.asset(draft.asset_id))
            if errors:
                raise RejectedWithViolations(errors)
            new_version = draft.version + 1
            accepted = replace(
                revision,
                revision_id=revision.revision_id or f"r{new_version}",
                timestamp=revision.timestamp or time.time(),
            )
            updated = replace(draft, current=new_track, version=new_version,
                              revision_log=draft.revision_log + (accepted,))
            self._drafts[draft_id] = updated
            self._persist(updated)
            return new_version

    def _lock_for(self, draft_id: str) -> threading.Lock:
        with self._registry_lock:
            if draft_id not in self._locks:
                self._locks[draft_id] = threading.Lock()
            return self._locks[draft_id]

    def nudge_event(self, draft_id: str, expected_version: int, event_id: str,
                    frames: int, author_id: str) -> float:
        """Shift an event by whole frames, clamped to the asset bounds;
        recorded as a retime revision. Returns the new start time."""
        draft = self.get(draft_id)
        asset = self.asset(draft.asset_id)
        ev = draft.current.event(event_id)
        if ev is None:
            raise NotFound(f"event {event_id} not in draft {draft_id}")
        new_start = ev.start_time + frames * (1.0 / asset.fps)
        new_start = min(max(new_start, 0.0), asset.duration)
        op = RevisionOp(event_id, "retime", before=ev.start_time, after=new_start)
        self.apply_revision(draft_id, expected_version,
                            Revision(author_id=author_id, ops=(op,)))
        return new_start

    def _require_author(self, draft: Draft, author_id: str) -> None:
        # A fresh machine-only draft has no human owner yet; anyone may
        # manage it. Afterwards management is limited to its authors.
        if draft.original_human_author is None:
            return
        if author_id not in draft.authors:
            raise Forbidden(f"{author_id} is not an author of {draft.draft_id}")

    def set_collab(self, draft_id: str, enabled: bool, author_id: str) -> Draft:
        lock = self._lock_for(draft_id)
        with lock:
            draft = self.get(draft_id)
            self._require_author(draft, author_id)
            updated = replace(draft, collab_enabled=enabled)
            self._drafts[draft_id] = updated
            self._persist(updated)
            return updated

    def publish(self, draft_id: str, author_id: str) -> Draft:
        lock = self._lock_for(draft_id)
        with lock:
            draft = self.get(draft_id)
            self._require_author(draft, author_id)
            errors = track_errors(draft.current, self.asset(draft.asset_id))
            if errors:
                raise ValidationFailed(errors)
            updated = replace(draft, published=True)
            self._drafts[draft_id] = updated
            self._persist(updated)
            return updated

    def unpublish(self, draft_id: str, author_id: str) -> Draft:
        lock = self._lock_for(draft_id)
        with lock:
            draft = self.get(draft_id)
            self._require_author(draft, author_id)
            updated = replace(draft, published=False)
            self._drafts[draft_id] = updated
            self._persist(updated)
            return updated

    def record_feedback(self, draft_id: str, rating: int, comment: str = "") -> Feedback:
        if not 1 <= rating <= 5:
            raise ValidationFailed([Violation("", "rating-out-of-range",
                                              f"rating {rating} not in 1..5")])
        self.get(draft_id)
        fb = Feedback(draft_id=draft_id, rating=rating, comment=comment)
        self.feedback.append(fb)
        return fb
