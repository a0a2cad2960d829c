"""Walkthrough: scoring two detectors against ground truth and fusing them.

Two imperfect detectors each miss a different subset of the 39 annotated
cameras. Fusion unions their detections with cross-source suppression and
lifts the F1 score.

Run with: python demos/detector_scoring.py
"""

from cctvaware.evaluation import (
    BBox,
    Detection,
    GroundTruthBox,
    evaluate,
    fuse,
    report_to_text,
)

# One annotated camera per street photo, alternating directed/round, all in
# the medium size bucket so the default size filter keeps them.
ground_truth = [
    GroundTruthBox(i, "directed" if i % 2 else "round", BBox(10 + i, 20, 40, 40))
    for i in range(1, 40)
]

# Detector A finds the first 33 cameras; detector B a shifted window of 33.
# Neither produces false positives on this set.
detector_a = [Detection(g.image_id, g.category, g.bbox, 0.9) for g in ground_truth[:33]]
detector_b = [Detection(g.image_id, g.category, g.bbox, 0.8) for g in ground_truth[2:35]]

print("=== detector A alone ===")
print(report_to_text(evaluate(detector_a, ground_truth)))

print()
print("=== detector B alone ===")
print(report_to_text(evaluate(detector_b, ground_truth)))

fused = fuse(detector_a, detector_b)
print()
print(f"=== fused ({len(fused)} detections after cross-source suppression) ===")
print(report_to_text(evaluate(fused, ground_truth)))
