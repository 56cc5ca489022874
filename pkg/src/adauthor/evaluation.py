"""Rubric-based rating capture, blinded assignment plans, and aggregation.

Seven dimensions, each scored 1 to 5. Raters see versions labeled A/B/C;
the label-to-model mapping, the video order, and the within-video viewing
order are all independently shuffled from one seed, so a plan is fully
reproducible.
"""

from __future__ import annotations

import csv
import json
import random
import statistics
import threading
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .errors import CardinalityError, ValidationFailed
from .model import Violation

DIMENSIONS = (
    "Accurate",
    "Prioritized",
    "Appropriate",
    "Consistent",
    "Equal",
    "Strategic Use of Delivery Method",
    "Timing & Placement",
)

LABELS = ("A", "B", "C")


@dataclass(frozen=True)
class RatingRecord:
    rater_id: str
    video_id: str
    condition_label: str
    scores: Mapping[str, int]
    model_id: Optional[str] = None
    comment: str = ""

    def validate(self) -> None:
        problems = []
        if self.condition_label not in LABELS:
            problems.append(Violation("", "unknown-label", self.condition_label))
        for dim in DIMENSIONS:
            if dim not in self.scores:
                problems.append(Violation("", "missing-dimension", dim))
            elif self.scores[dim] not in (1, 2, 3, 4, 5):
                problems.append(Violation("", "score-out-of-range",
                                          f"{dim}={self.scores[dim]}"))
        for dim in self.scores:
            if dim not in DIMENSIONS:
                problems.append(Violation("", "unknown-dimension", dim))
        if problems:
            raise ValidationFailed(problems)


@dataclass(frozen=True)
class AssignmentPlan:
    seed: int
    raters: tuple[str, ...]
    videos: tuple[str, ...]
    models: tuple[str, ...]
    video_order: Mapping[str, tuple[str, ...]]
    label_map: Mapping[str, Mapping[str, Mapping[str, str]]]
    viewing_order: Mapping[str, Mapping[str, tuple[str, ...]]]

    def model_for(self, rater: str, video: str, label: str) -> str:
        return self.label_map[rater][video][label]

    def label_for(self, rater: str, video: str, model: str) -> str:
        for label, mapped in self.label_map[rater][video].items():
            if mapped == model:
                return label
        raise KeyError(model)

    def to_json(self) -> str:
        doc = {
            "seed": self.seed,
            "raters": list(self.raters),
            "videos": list(self.videos),
            "models": list(self.models),
            "video_order": {r: list(v) for r, v in self.video_order.items()},
            "label_map": {r: {v: dict(m) for v, m in per.items()}
                          for r, per in self.label_map.items()},
            "viewing_order": {r: {v: list(o) for v, o in per.items()}
                              for r, per in self.viewing_order.items()},
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "AssignmentPlan":
        doc = json.loads(text)
        return cls(
            seed=doc["seed"],
            raters=tuple(doc["raters"]),
            videos=tuple(doc["videos"]),
            models=tuple(doc["models"]),
            video_order={r: tuple(v) for r, v in doc["video_order"].items()},
            label_map={r: {v: dict(m) for v, m in per.items()}
                       for r, per in doc["label_map"].items()},
            viewing_order={r: {v: tuple(o) for v, o in per.items()}
                           for r, per in doc["viewing_order"].items()},
        )


def make_assignment(raters: Sequence[str], videos: Sequence[str],
                    models: Sequence[str], seed: int) -> AssignmentPlan:
    """Three independent shuffles per the blinding design: label-to-model
    per (rater, video), video order per rater, viewing order per video."""
    if len(models) != len(LABELS):
        raise CardinalityError(f"need exactly {len(LABELS)} models, got {len(models)}")
    rng = random.Random(seed)
    video_order = {}
    label_map: dict[str, dict[str, dict[str, str]]] = {}
    viewing_order: dict[str, dict[str, tuple[str, ...]]] = {}
    for rater in raters:
        order = list(videos)
        rng.shuffle(order)
        video_order[rater] = tuple(order)
        label_map[rater] = {}
        viewing_order[rater] = {}
        for video in videos:
            shuffled_models = list(models)
            rng.shuffle(shuffled_models)
            label_map[rater][video] = dict(zip(LABELS, shuffled_models))
            labels = list(LABELS)
            rng.shuffle(labels)
            viewing_order[rater][video] = tuple(labels)
    return AssignmentPlan(
        seed=seed, raters=tuple(raters), videos=tuple(videos),
        models=tuple(models), video_order=video_order,
        label_map=label_map, viewing_order=viewing_order,
    )


class RatingStore:
    """Last writer wins per (rater, video, label): raters may revise."""

    def __init__(self):
        self._records: dict[tuple[str, str, str], RatingRecord] = {}
        self._lock = threading.Lock()

    def record_rating(self, record: RatingRecord) -> str:
        record.validate()
        key = (record.rater_id, record.video_id, record.condition_label)
        with self._lock:
            self._records[key] = record
        return "/".join(key)

    def records(self) -> list[RatingRecord]:
        with self._lock:
            return list(self._records.values())

    def __len__(self):
        return len(self._records)


def resolve_models(records: Iterable[RatingRecord],
                   plan: AssignmentPlan) -> list[RatingRecord]:
    """Unblind each record's condition label through the plan."""
    resolved = []
    for rec in records:
        model = plan.model_for(rec.rater_id, rec.video_id, rec.condition_label)
        resolved.append(RatingRecord(
            rater_id=rec.rater_id, video_id=rec.video_id,
            condition_label=rec.condition_label, scores=rec.scores,
            model_id=model, comment=rec.comment))
    return resolved


@dataclass(frozen=True)
class Summary:
    mean: float
    sd: Optional[float]
    n: int


def _summarize(values: Sequence[float]) -> Summary:
    mean = statistics.fmean(values)
    sd = statistics.stdev(values) if len(values) > 1 else None
    return Summary(mean=mean, sd=sd, n=len(values))


@dataclass(frozen=True)
class AggregateReport:
    overall: Mapping[str, Summary]
    criteria: Mapping[str, Mapping[str, Summary]]
    categories: Mapping[str, Mapping[str, Summary]] = field(default_factory=dict)


def aggregate(records: Iterable[RatingRecord],
              categories: Optional[Mapping[str, str]] = None) -> AggregateReport:
    """Per-model overall and per-criterion mean/SD, plus per-category means.

    Overall pools all dimension scores of a model; a category mean pools all
    dimension scores of that model's videos in the category. SD is the
    sample (n-1) estimator and is absent for a single value.
    """
    records = list(records)
    if not records:
        return AggregateReport(overall={}, criteria={})
    missing = [r for r in records if r.model_id is None]
    if missing:
        raise ValueError("records must be resolved to a model before aggregation")

    pooled: dict[str, list[float]] = {}
    per_criterion: dict[str, dict[str, list[float]]] = {}
    per_category: dict[str, dict[str, list[float]]] = {}
    for rec in records:
        model = rec.model_id
        for dim in DIMENSIONS:
            score = float(rec.scores[dim])
            pooled.setdefault(model, []).append(score)
            per_criterion.setdefault(model, {}).setdefault(dim, []).append(score)
            if categories and rec.video_id in categories:
                cat = categories[rec.video_id]
                per_category.setdefault(model, {}).setdefault(cat, []).append(score)

    return AggregateReport(
        overall={m: _summarize(v) for m, v in pooled.items()},
        criteria={m: {d: _summarize(v) for d, v in dims.items()}
                  for m, dims in per_criterion.items()},
        categories={m: {c: _summarize(v) for c, v in cats.items()}
                    for m, cats in per_category.items()},
    )


def _fmt(value: Optional[float]) -> str:
    return "-" if value is None else f"{value:.2f}"


def format_report(report: AggregateReport) -> str:
    """Human-readable table; means and SDs use two decimals."""
    lines = []
    models = sorted(report.overall)
    header = "Criteria".ljust(36) + "".join(f"{m:>18}" for m in models)
    lines.append(header)
    overall_cells = "".join(
        f"{_fmt(report.overall[m].mean):>12} {_fmt(report.overall[m].sd):>5}"
        for m in models)
    lines.append("Overall".ljust(36) + overall_cells)
    for dim in DIMENSIONS:
        cells = ""
        for m in models:
            summary = report.criteria.get(m, {}).get(dim)
            if summary is None:
                cells += f"{'-':>12} {'-':>5}"
            else:
                cells += f"{_fmt(summary.mean):>12} {_fmt(summary.sd):>5}"
        lines.append(dim.ljust(36) + cells)
    if report.categories:
        lines.append("")
        cats = sorted({c for per in report.categories.values() for c in per})
        lines.append("Video Category".ljust(36)
                     + "".join(f"{m:>18}" for m in models))
        for cat in cats:
            cells = ""
            for m in models:
                summary = report.categories.get(m, {}).get(cat)
                cells += f"{_fmt(summary.mean if summary else None):>18}"
            lines.append(cat.ljust(36) + cells)
    return "\n".join(lines) + "\n"


def load_ratings_csv(path) -> tuple[list[RatingRecord], dict[str, str]]:
    """Read ratings from a delimited file.

    Expected columns: rater_id, video_id, label, the seven dimension names
    exactly as spelled in DIMENSIONS, and optionally category, model_id,
    comment. Returns the records plus any video-to-category mapping found.
    """
    records = []
    categories: dict[str, str] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        fieldnames = reader.fieldnames or []
        missing = [d for d in DIMENSIONS if d not in fieldnames]
        if missing:
            raise ValueError(f"ratings file lacks dimension columns: {missing}")
        for row in reader:
            scores = {dim: int(row[dim]) for dim in DIMENSIONS}
            record = RatingRecord(
                rater_id=row["rater_id"],
                video_id=row["video_id"],
                condition_label=row["label"],
                scores=scores,
                model_id=row.get("model_id") or None,
                comment=row.get("comment", "") or "",
            )
            record.validate()
            records.append(record)
            if row.get("category"):
                categories[row["video_id"]] = row["category"]
    return records, categories


def write_ratings_csv(path, records: Sequence[RatingRecord],
                      categories: Optional[Mapping[str, str]] = None) -> None:
    fieldnames = ["rater_id", "video_id", "label", "category", *DIMENSIONS,
                  "model_id", "comment"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        for rec in records:
            row = {"rater_id": rec.rater_id, "video_id": rec.video_id,
                   "label": rec.condition_label,
                   "category": (categories or {}).get(rec.video_id, ""),
                   "model_id": rec.model_id or "", "comment": rec.comment}
            row.update({dim: rec.scores[dim] for dim in DIMENSIONS})
            writer.writerow(row)
