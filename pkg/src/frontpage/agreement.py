"""Inter-annotator agreement statistics.

Cohen's kappa for paired binary labels, Krippendorff's alpha with the
interval distance for 1-5 quality scores (tolerating missing data).
"""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import InsufficientOverlapError, NoVariationError

QUALITY_DIMENSIONS = ("coherence", "consistency", "fluency", "relevance")


@dataclass(frozen=True)
class AnnotationRecord:
    annotator_id: str
    item_id: str
    task: str  # "match_binary" | "quality_1_5"
    value: int
    dimension: str | None = None

    def __post_init__(self):
        if self.task == "match_binary":
            if self.value not in (0, 1):
                raise ValueError(f"binary value must be 0/1, got {self.value}")
        elif self.task == "quality_1_5":
            if not 1 <= self.value <= 5:
                raise ValueError(f"quality value must be 1..5, got {self.value}")
            if self.dimension not in QUALITY_DIMENSIONS:
                raise ValueError(f"unknown quality dimension {self.dimension!r}")
        else:
            raise ValueError(f"unknown task {self.task!r}")

    def as_dict(self) -> dict:
        doc = {
            "annotator_id": self.annotator_id,
            "item_id": self.item_id,
            "task": self.task,
            "value": self.value,
        }
        if self.dimension is not None:
            doc["dimension"] = self.dimension
        return doc


def read_records(path: str | Path) -> list[AnnotationRecord]:
    records = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        doc = json.loads(line)
        records.append(
            AnnotationRecord(
                annotator_id=doc["annotator_id"],
                item_id=doc["item_id"],
                task=doc["task"],
                value=int(doc["value"]),
                dimension=doc.get("dimension"),
            )
        )
    return records


def cohens_kappa_from_confusion(a: int, b: int, c: int, d: int) -> float:
    """Kappa from a 2x2 confusion matrix (a,d agreements; b,c disagreements)."""
    n = a + b + c + d
    if n == 0:
        raise InsufficientOverlapError("empty confusion matrix")
    p_o = (a + d) / n
    p_yes1 = (a + b) / n
    p_yes2 = (a + c) / n
    p_e = p_yes1 * p_yes2 + (1 - p_yes1) * (1 - p_yes2)
    if p_e == 1.0:
        # both marginals degenerate to the same single label
        return 1.0 if p_o == 1.0 else 0.0
    return (p_o - p_e) / (1 - p_e)


def cohens_kappa(records: Iterable[AnnotationRecord]) -> float:
    """Kappa over items co-annotated by exactly two annotators."""
    binary = [r for r in records if r.task == "match_binary"]
    annotators = sorted({r.annotator_id for r in binary})
    if len(annotators) != 2:
        raise InsufficientOverlapError(
            f"need exactly two annotators, found {len(annotators)}"
        )
    first, second = annotators
    by_item: dict[str, dict[str, int]] = defaultdict(dict)
    for r in binary:
        by_item[r.item_id][r.annotator_id] = r.value
    pairs = [
        (values[first], values[second])
        for values in by_item.values()
        if first in values and second in values
    ]
    if not pairs:
        raise InsufficientOverlapError("no co-annotated items")
    a = sum(1 for x, y in pairs if x == 1 and y == 1)
    b = sum(1 for x, y in pairs if x == 1 and y == 0)
    c = sum(1 for x, y in pairs if x == 0 and y == 1)
    d = sum(1 for x, y in pairs if x == 0 and y == 0)
    return cohens_kappa_from_confusion(a, b, c, d)


def _alpha_interval(units: Sequence[Sequence[float]]) -> float:
    """Krippendorff's alpha over rating units using squared differences.

    A unit is the list of values given to one item (pooling whichever
    annotators rated it); units with fewer than two ratings drop out.
    """
    usable = [list(values) for values in units if len(values) >= 2]
    if not usable:
        raise InsufficientOverlapError("no item carries two or more ratings")
    # coincidence matrix entries o(c,k), accumulated per unit
    o: dict[tuple[float, float], float] = defaultdict(float)
    for values in usable:
        m = len(values)
        for i, c in enumerate(values):
            for j, k in enumerate(values):
                if i != j:
                    o[(c, k)] += 1.0 / (m - 1)
    n_total = sum(o.values())
    marginals: dict[float, float] = defaultdict(float)
    for (c, _), weight in o.items():
        marginals[c] += weight
    d_o = sum(weight * (c - k) ** 2 for (c, k), weight in o.items()) / n_total
    d_e = (
        sum(
            nc * nk * (c - k) ** 2
            for c, nc in marginals.items()
            for k, nk in marginals.items()
        )
        / (n_total * (n_total - 1))
    )
    if d_e == 0.0:
        if d_o == 0.0:
            return 1.0
        raise NoVariationError("expected disagreement is zero, alpha undefined")
    return 1.0 - d_o / d_e


def krippendorff_alpha(records: Iterable[AnnotationRecord]) -> float:
    """Interval-metric alpha pooled over all quality dimensions.

    Each (item, dimension) is one rating unit, so annotators may rate
    different subsets without penalty.
    """
    quality = [r for r in records if r.task == "quality_1_5"]
    units: dict[tuple[str, str | None], list[float]] = defaultdict(list)
    for r in quality:
        units[(r.item_id, r.dimension)].append(float(r.value))
    return _alpha_interval(list(units.values()))


def krippendorff_alpha_per_dimension(
    records: Iterable[AnnotationRecord],
) -> dict[str, float | None]:
    """Alpha per quality dimension; None where undefined or degenerate."""
    records = list(records)
    out: dict[str, float | None] = {}
    for dimension in QUALITY_DIMENSIONS:
        subset = [r for r in records if r.dimension == dimension]
        try:
            out[dimension] = krippendorff_alpha(subset)
        except (InsufficientOverlapError, NoVariationError):
            out[dimension] = None
    return out
