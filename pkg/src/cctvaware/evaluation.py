"""Detection scoring: COCO-style AP/AR with size buckets, F1, and two-detector fusion.

Metrics follow the MS COCO evaluator conventions with two deliberate
modifications: the small size bucket is excluded from headline numbers
(size_filter defaults to medium+large) and AR is reported only at 100
detections per image. Pooled metrics treat directed and round cameras as a
single category; per-category AP@0.5 is reported separately.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

CATEGORIES = ("directed", "round")
POOLED_CATEGORY = "camera"

# COCO size buckets by pixel area
SMALL_MAX_AREA = 32 * 32       # exclusive upper bound for small
MEDIUM_MAX_AREA = 96 * 96      # inclusive upper bound for medium

COCO_CATEGORY_IDS = {1: "directed", 2: "round"}


class SchemaError(ValueError):
    """Input file does not match the COCO ground-truth/results schema."""


class NoGroundTruth(ValueError):
    """Metric undefined: no ground truth in the selected size filter."""


class UndefinedMetric(ValueError):
    """Counts are all zero; the score has no value."""


@dataclass(frozen=True)
class BBox:
    """Axis-aligned pixel box, (x, y) top-left, w/h strictly positive."""

    x: float
    y: float
    w: float
    h: float

    def __post_init__(self) -> None:
        if not (self.w > 0 and self.h > 0):
            raise ValueError(f"box sides must be positive, got w={self.w}, h={self.h}")

    @property
    def area(self) -> float:
        return self.w * self.h


@dataclass(frozen=True)
class Detection:
    image_id: object
    category: str
    bbox: BBox
    score: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score {self.score} outside [0, 1]")


@dataclass(frozen=True)
class GroundTruthBox:
    image_id: object
    category: str
    bbox: BBox


def _default_thresholds() -> tuple[float, ...]:
    return tuple(round(0.5 + 0.05 * i, 2) for i in range(10))


@dataclass(frozen=True)
class EvalConfig:
    iou_thresholds: tuple[float, ...] = field(default_factory=_default_thresholds)
    max_dets_per_image: int = 100
    size_filter: frozenset[str] = frozenset({"medium", "large"})

    def __post_init__(self) -> None:
        if any(b <= a for a, b in zip(self.iou_thresholds, self.iou_thresholds[1:])):
            raise ValueError("iou_thresholds must be strictly increasing")
        if not self.size_filter <= {"small", "medium", "large"}:
            raise ValueError(f"unknown size bucket in {self.size_filter}")
        object.__setattr__(self, "size_filter", frozenset(self.size_filter))


@dataclass(frozen=True)
class EvalReport:
    """Metric fields are None when undefined (no ground truth in scope)."""

    ap50: float | None
    ap50_95: float | None
    ap_medium: float | None
    ap_large: float | None
    ar100: float | None
    ar_medium: float | None
    ar_large: float | None
    f1_at_50: float | None
    ap50_directed: float | None
    ap50_round: float | None
    tp: int
    fp: int
    fn: int


def iou(a: BBox, b: BBox) -> float:
    """Intersection over union; 0 for disjoint boxes."""
    ix = min(a.x + a.w, b.x + b.w) - max(a.x, b.x)
    iy = min(a.y + a.h, b.y + b.h) - max(a.y, b.y)
    if ix <= 0 or iy <= 0:
        return 0.0
    inter = ix * iy
    return inter / (a.area + b.area - inter)


def size_bucket(b: BBox) -> str:
    """small (< 32x32), medium (32x32 .. 96x96 inclusive), large (> 96x96)."""
    area = b.area
    if area < SMALL_MAX_AREA:
        return "small"
    if area <= MEDIUM_MAX_AREA:
        return "medium"
    return "large"


@dataclass(frozen=True)
class MatchResult:
    tp: int
    fp: int
    fn: int
    pairs: tuple[tuple[int, int], ...]   # (detection index, ground-truth index)
    det_is_tp: tuple[tuple[int, bool], ...]  # per considered detection, input order index


@dataclass(frozen=True)
class _DetOutcome:
    det_index: int
    score: float
    status: str  # "tp" | "fp" | "ignored"
    gt_index: int | None


def _match_single(
    dets: Sequence[Detection],
    gts: Sequence[GroundTruthBox],
    iou_thr: float,
    max_dets: int,
    size_filter: frozenset[str] | None,
) -> tuple[list[_DetOutcome], list[bool], int]:
    """Greedy COCO matching for one image and one category.

    Returns per-detection outcomes, per-GT matched flags, and the number of
    active (non-ignored) GTs. With a size filter: GTs outside the filter are
    ignorable, detections matched to them are neither TP nor FP, and
    unmatched detections outside the filter are excluded.
    """
    if size_filter is None:
        gt_active = [True] * len(gts)
    else:
        gt_active = [size_bucket(g.bbox) in size_filter for g in gts]

    order = sorted(range(len(dets)), key=lambda i: (-dets[i].score, i))[:max_dets]
    gt_matched = [False] * len(gts)
    outcomes: list[_DetOutcome] = []
    for di in order:
        det = dets[di]
        best_active, best_active_iou = None, 0.0
        best_ignored, best_ignored_iou = None, 0.0
        for gi, gt in enumerate(gts):
            if gt_matched[gi]:
                continue
            v = iou(det.bbox, gt.bbox)
            if v < iou_thr:
                continue
            if gt_active[gi]:
                if v > best_active_iou:
                    best_active, best_active_iou = gi, v
            elif v > best_ignored_iou:
                best_ignored, best_ignored_iou = gi, v
        if best_active is not None:
            gt_matched[best_active] = True
            outcomes.append(_DetOutcome(di, det.score, "tp", best_active))
        elif best_ignored is not None:
            gt_matched[best_ignored] = True
            outcomes.append(_DetOutcome(di, det.score, "ignored", best_ignored))
        elif size_filter is not None and size_bucket(det.bbox) not in size_filter:
            outcomes.append(_DetOutcome(di, det.score, "ignored", None))
        else:
            outcomes.append(_DetOutcome(di, det.score, "fp", None))
    return outcomes, gt_matched, sum(gt_active)


def match_greedy(
    dets: Sequence[Detection],
    gts: Sequence[GroundTruthBox],
    iou_thr: float = 0.5,
    max_dets: int = 100,
) -> MatchResult:
    """Match one image's detections to ground truth, per category.

    Detections are taken in descending score order (ties by input order) and
    each one claims the unmatched same-category GT with the highest IoU at or
    above the threshold. No size filtering here.
    """
    images = {d.image_id for d in dets} | {g.image_id for g in gts}
    if len(images) > 1:
        raise ValueError(f"match_greedy expects a single image, got {sorted(map(str, images))}")
    pairs: list[tuple[int, int]] = []
    det_flags: list[tuple[int, bool]] = []
    tp = fp = fn = 0
    for category in sorted({d.category for d in dets} | {g.category for g in gts}):
        dsub = [(i, d) for i, d in enumerate(dets) if d.category == category]
        gsub = [(i, g) for i, g in enumerate(gts) if g.category == category]
        outcomes, gt_matched, n_active = _match_single(
            [d for _, d in dsub], [g for _, g in gsub], iou_thr, max_dets, None
        )
        for o in outcomes:
            orig_det = dsub[o.det_index][0]
            if o.status == "tp":
                tp += 1
                pairs.append((orig_det, gsub[o.gt_index][0]))
                det_flags.append((orig_det, True))
            else:
                fp += 1
                det_flags.append((orig_det, False))
        fn += n_active - sum(gt_matched)
    det_flags.sort()
    return MatchResult(tp, fp, fn, tuple(sorted(pairs)), tuple(det_flags))


def _group_by_image_category(items: Iterable) -> dict:
    groups: dict = {}
    for idx, item in enumerate(items):
        groups.setdefault((item.image_id, item.category), []).append((idx, item))
    return groups


def _scored_flags(
    dets: Sequence[Detection],
    gts: Sequence[GroundTruthBox],
    iou_thr: float,
    config: EvalConfig,
) -> tuple[list[tuple[float, object, int, bool]], int]:
    """Pooled (score, image_id, det index, is_tp) rows for non-ignored
    detections plus the active ground-truth count."""
    det_groups = _group_by_image_category(dets)
    gt_groups = _group_by_image_category(gts)
    rows: list[tuple[float, object, int, bool]] = []
    n_active_total = 0
    for key in sorted(set(det_groups) | set(gt_groups), key=lambda k: (k[0], k[1])):
        dsub = det_groups.get(key, [])
        gsub = gt_groups.get(key, [])
        outcomes, _, n_active = _match_single(
            [d for _, d in dsub],
            [g for _, g in gsub],
            iou_thr,
            config.max_dets_per_image,
            config.size_filter,
        )
        n_active_total += n_active
        for o in outcomes:
            if o.status == "ignored":
                continue
            rows.append((o.score, key[0], dsub[o.det_index][0], o.status == "tp"))
    return rows, n_active_total


def average_precision(
    dets: Sequence[Detection],
    gts: Sequence[GroundTruthBox],
    iou_thr: float = 0.5,
    config: EvalConfig | None = None,
    method: str = "101point",
) -> float | None:
    """Interpolated average precision over all images.

    method="101point" samples the precision envelope at recalls 0.00..1.00
    (COCO convention); method="allpoint" integrates the envelope exactly.
    Returns None when no ground truth falls inside the size filter.
    """
    if method not in ("101point", "allpoint"):
        raise ValueError(f"unknown method {method!r}")
    config = config or EvalConfig()
    rows, n_gt = _scored_flags(dets, gts, iou_thr, config)
    if n_gt == 0:
        return None
    if not rows:
        return 0.0
    # ties: image id first, then input order (ids must be mutually comparable)
    rows.sort(key=lambda r: (-r[0], r[1], r[2]))
    flags = np.array([r[3] for r in rows], dtype=np.float64)
    tp_cum = np.cumsum(flags)
    fp_cum = np.cumsum(1.0 - flags)
    recall = tp_cum / n_gt
    precision = tp_cum / (tp_cum + fp_cum)
    # envelope: best precision achievable at recall >= r
    envelope = np.maximum.accumulate(precision[::-1])[::-1]
    if method == "101point":
        # grid points must be exact k/100 floats so threshold comparisons
        # against recall = tp/n_gt are reproducible
        grid = np.arange(101, dtype=np.float64) / 100.0
        idx = np.searchsorted(recall, grid, side="left")
        sampled = np.where(idx < len(envelope), envelope[np.minimum(idx, len(envelope) - 1)], 0.0)
        return float(np.mean(sampled))
    # exact area under the step envelope
    prev_r = 0.0
    area = 0.0
    for r, e in zip(recall, envelope):
        if r > prev_r:
            area += (r - prev_r) * e
            prev_r = r
    return float(area)


def recall_at(
    dets: Sequence[Detection],
    gts: Sequence[GroundTruthBox],
    iou_thr: float,
    config: EvalConfig,
) -> float | None:
    """Recall at the configured max detections per image; None without GT."""
    rows, n_gt = _scored_flags(dets, gts, iou_thr, config)
    if n_gt == 0:
        return None
    return sum(1 for r in rows if r[3]) / n_gt


def counts_at(
    dets: Sequence[Detection],
    gts: Sequence[GroundTruthBox],
    iou_thr: float,
    config: EvalConfig,
) -> tuple[int, int, int]:
    """(tp, fp, fn) totals across images under the config's size filter."""
    rows, n_gt = _scored_flags(dets, gts, iou_thr, config)
    tp = sum(1 for r in rows if r[3])
    fp = len(rows) - tp
    return tp, fp, n_gt - tp


def f1_score(tp: int, fp: int, fn: int) -> float:
    """Balanced F-measure 2tp / (2tp + fp + fn)."""
    if min(tp, fp, fn) < 0:
        raise ValueError("counts must be nonnegative")
    denom = 2 * tp + fp + fn
    if denom == 0:
        raise UndefinedMetric("f1 undefined for tp=fp=fn=0")
    return 2 * tp / denom


def _pooled(items):
    return [replace(item, category=POOLED_CATEGORY) for item in items]


def _mean_or_none(values: list[float | None]) -> float | None:
    present = [v for v in values if v is not None]
    if not present:
        return None
    return float(sum(present) / len(present))


def evaluate(
    dets: Sequence[Detection],
    gts: Sequence[GroundTruthBox],
    config: EvalConfig | None = None,
) -> EvalReport:
    """Full report over a detection run; see EvalReport for the field set."""
    config = config or EvalConfig()
    pooled_dets = _pooled(dets)
    pooled_gts = _pooled(gts)

    def ap_at(thr: float, size_filter: frozenset[str]) -> float | None:
        return average_precision(
            pooled_dets, pooled_gts, thr, replace(config, size_filter=size_filter)
        )

    ap50 = ap_at(0.5, config.size_filter)
    ap50_95 = _mean_or_none([ap_at(t, config.size_filter) for t in config.iou_thresholds])
    ap_medium = _mean_or_none([ap_at(t, frozenset({"medium"})) for t in config.iou_thresholds])
    ap_large = _mean_or_none([ap_at(t, frozenset({"large"})) for t in config.iou_thresholds])

    def ar_over(size_filter: frozenset[str]) -> float | None:
        cfg = replace(config, size_filter=size_filter)
        return _mean_or_none(
            [recall_at(pooled_dets, pooled_gts, t, cfg) for t in config.iou_thresholds]
        )

    ar100 = ar_over(config.size_filter)
    ar_medium = ar_over(frozenset({"medium"}))
    ar_large = ar_over(frozenset({"large"}))

    tp, fp, fn = counts_at(pooled_dets, pooled_gts, 0.5, config)
    try:
        f1 = f1_score(tp, fp, fn)
    except UndefinedMetric:
        f1 = None

    ap50_directed = average_precision(
        [d for d in dets if d.category == "directed"],
        [g for g in gts if g.category == "directed"],
        0.5,
        config,
    )
    ap50_round = average_precision(
        [d for d in dets if d.category == "round"],
        [g for g in gts if g.category == "round"],
        0.5,
        config,
    )
    return EvalReport(
        ap50=ap50,
        ap50_95=ap50_95,
        ap_medium=ap_medium,
        ap_large=ap_large,
        ar100=ar100,
        ar_medium=ar_medium,
        ar_large=ar_large,
        f1_at_50=f1,
        ap50_directed=ap50_directed,
        ap50_round=ap50_round,
        tp=tp,
        fp=fp,
        fn=fn,
    )


def fuse(
    dets_a: Sequence[Detection],
    dets_b: Sequence[Detection],
    dedup_iou_thr: float = 0.5,
) -> list[Detection]:
    """Combine two detectors' outputs with cross-source greedy suppression.

    Per image and category both sets are unioned and swept in descending
    score order; a detection is dropped when it overlaps an already kept one
    at or above the dedup threshold, so the higher-scored source wins.
    """
    groups = _group_by_image_category(list(dets_a) + list(dets_b))
    fused: list[Detection] = []
    for key in sorted(groups, key=lambda k: (str(k[0]), k[1])):
        members = groups[key]
        members.sort(key=lambda pair: (-pair[1].score, pair[0]))
        kept: list[Detection] = []
        for _, det in members:
            if all(iou(det.bbox, other.bbox) < dedup_iou_thr for other in kept):
                kept.append(det)
        fused.extend(kept)
    return fused


# --- COCO-format files -------------------------------------------------------

def _require(obj: dict, key: str, where: str):
    if key not in obj:
        raise SchemaError(f"{where}: missing {key!r}")
    return obj[key]


def _parse_bbox(raw, where: str) -> BBox:
    if not isinstance(raw, (list, tuple)) or len(raw) != 4:
        raise SchemaError(f"{where}: bbox must be [x, y, w, h]")
    try:
        box = BBox(*map(float, raw))
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{where}: {exc}") from exc
    return box


def _category_from_id(raw, where: str) -> str:
    if raw not in COCO_CATEGORY_IDS:
        raise SchemaError(
            f"{where}: category_id {raw!r} not in {sorted(COCO_CATEGORY_IDS)}"
        )
    return COCO_CATEGORY_IDS[raw]


def load_coco_ground_truth(doc: dict | str | bytes | Path) -> list[GroundTruthBox]:
    """Read a COCO annotation file: images[] + annotations[] with xywh boxes."""
    if isinstance(doc, Path):
        doc = doc.read_text(encoding="utf-8")
    if isinstance(doc, (str, bytes)):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"ground truth: invalid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise SchemaError("ground truth: expected a JSON object")
    annotations = _require(doc, "annotations", "ground truth")
    known_images = {img.get("id") for img in doc.get("images", [])} or None
    boxes = []
    for i, ann in enumerate(annotations):
        where = f"annotations[{i}]"
        image_id = _require(ann, "image_id", where)
        if known_images is not None and image_id not in known_images:
            raise SchemaError(f"{where}: image_id {image_id!r} not in images[]")
        boxes.append(
            GroundTruthBox(
                image_id=image_id,
                category=_category_from_id(_require(ann, "category_id", where), where),
                bbox=_parse_bbox(_require(ann, "bbox", where), where),
            )
        )
    return boxes


def load_coco_detections(doc: list | str | bytes | Path) -> list[Detection]:
    """Read a COCO results file: a list of image_id/category_id/bbox/score."""
    if isinstance(doc, Path):
        doc = doc.read_text(encoding="utf-8")
    if isinstance(doc, (str, bytes)):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"detections: invalid JSON ({exc})") from exc
    if not isinstance(doc, list):
        raise SchemaError("detections: expected a JSON array")
    dets = []
    for i, row in enumerate(doc):
        where = f"detections[{i}]"
        try:
            score = float(_require(row, "score", where))
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"{where}: bad score ({exc})") from exc
        if not 0.0 <= score <= 1.0:
            raise SchemaError(f"{where}: score {score} outside [0, 1]")
        dets.append(
            Detection(
                image_id=_require(row, "image_id", where),
                category=_category_from_id(_require(row, "category_id", where), where),
                bbox=_parse_bbox(_require(row, "bbox", where), where),
                score=score,
            )
        )
    return dets


_REPORT_FIELDS = (
    "ap50", "ap50_95", "ap_medium", "ap_large",
    "ar100", "ar_medium", "ar_large",
    "f1_at_50", "ap50_directed", "ap50_round",
    "tp", "fp", "fn",
)


def report_to_dict(report: EvalReport) -> dict:
    return {name: getattr(report, name) for name in _REPORT_FIELDS}


def report_to_text(report: EvalReport) -> str:
    lines = []
    for name in _REPORT_FIELDS:
        value = getattr(report, name)
        if value is None:
            lines.append(f"{name} absent")
        elif isinstance(value, int):
            lines.append(f"{name} {value}")
        else:
            lines.append(f"{name} {value:.4f}")
    return "\n".join(lines)


def write_report(report: EvalReport, path: str | Path) -> None:
    Path(path).write_text(json.dumps(report_to_dict(report), indent=2) + "\n", encoding="utf-8")
