import random

import pytest

from frontpage.agreement import (
    QUALITY_DIMENSIONS,
    AnnotationRecord,
    cohens_kappa,
    cohens_kappa_from_confusion,
    krippendorff_alpha,
    krippendorff_alpha_per_dimension,
    read_records,
)
from frontpage.errors import InsufficientOverlapError, NoVariationError


def binary(annotator, item, value):
    return AnnotationRecord(annotator, item, "match_binary", value)


def quality(annotator, item, value, dimension="coherence"):
    return AnnotationRecord(annotator, item, "quality_1_5", value, dimension)


def brute_force_alpha(units):
    """Independent coincidence-matrix alpha with interval distance."""
    usable = [u for u in units if len(u) >= 2]
    pairs = []  # all ordered value pairs within units, weighted 1/(m-1)
    for unit in usable:
        m = len(unit)
        for i, c in enumerate(unit):
            for j, k in enumerate(unit):
                if i != j:
                    pairs.append((c, k, 1.0 / (m - 1)))
    n = sum(w for _, _, w in pairs)
    marginal = {}
    for c, _, w in pairs:
        marginal[c] = marginal.get(c, 0.0) + w
    d_o = sum(w * (c - k) ** 2 for c, k, w in pairs) / n
    d_e = sum(
        nc * nk * (c - k) ** 2
        for c, nc in marginal.items()
        for k, nk in marginal.items()
    ) / (n * (n - 1))
    if d_e == 0.0:
        return 1.0 if d_o == 0.0 else None
    return 1.0 - d_o / d_e


def records_from_units(units):
    out = []
    for item_index, unit in enumerate(units):
        for annotator_index, value in enumerate(unit):
            out.append(quality(f"ann{annotator_index}", f"item{item_index}", value))
    return out


# -- cohen's kappa ---------------------------------------------------------

def test_kappa_constructed_confusion_is_0_4():
    assert cohens_kappa_from_confusion(20, 5, 10, 15) == pytest.approx(0.4, abs=1e-12)


def test_kappa_perfect_agreement_is_one():
    records = [binary("a", f"i{k}", k % 2) for k in range(6)]
    records += [binary("b", f"i{k}", k % 2) for k in range(6)]
    assert cohens_kappa(records) == 1.0


def test_kappa_inverted_labels_is_minus_one():
    records = [binary("a", f"i{k}", k % 2) for k in range(6)]
    records += [binary("b", f"i{k}", 1 - k % 2) for k in range(6)]
    assert cohens_kappa(records) == pytest.approx(-1.0)


def test_kappa_degenerate_marginals():
    assert cohens_kappa_from_confusion(10, 0, 0, 0) == 1.0
    assert cohens_kappa_from_confusion(0, 0, 0, 10) == 1.0


def test_kappa_two_path_consistency():
    rng = random.Random(11)
    records = []
    a = b = c = d = 0
    for k in range(40):
        x, y = rng.randint(0, 1), rng.randint(0, 1)
        records.append(binary("ann1", f"i{k}", x))
        records.append(binary("ann2", f"i{k}", y))
        if x == 1 and y == 1:
            a += 1
        elif x == 1:
            b += 1
        elif y == 1:
            c += 1
        else:
            d += 1
    assert cohens_kappa(records) == pytest.approx(
        cohens_kappa_from_confusion(a, b, c, d), abs=1e-12
    )


def test_kappa_requires_two_annotators():
    with pytest.raises(InsufficientOverlapError):
        cohens_kappa([binary("a", "i1", 1)])
    with pytest.raises(InsufficientOverlapError):
        cohens_kappa(
            [binary("a", "i1", 1), binary("b", "i2", 0), binary("c", "i3", 1)]
        )


def test_kappa_ignores_items_without_overlap():
    records = [
        binary("a", "i1", 1), binary("b", "i1", 1),
        binary("a", "i2", 0), binary("b", "i2", 0),
        binary("a", "solo", 1),  # only one annotator saw this item
        binary("b", "i3", 1), binary("a", "i3", 0),
    ]
    # overlap pairs: (1,1), (0,0), (0,1)
    assert cohens_kappa(records) == pytest.approx(
        cohens_kappa_from_confusion(1, 0, 1, 1), abs=1e-12
    )


def test_kappa_invariant_under_relabeling():
    records = [
        binary("a", "i1", 1), binary("b", "i1", 0),
        binary("a", "i2", 1), binary("b", "i2", 1),
        binary("a", "i3", 0), binary("b", "i3", 0),
    ]
    renamed = [
        AnnotationRecord(
            {"a": "zz", "b": "aa"}[r.annotator_id], r.item_id, r.task, r.value
        )
        for r in records
    ]
    assert cohens_kappa(records) == pytest.approx(cohens_kappa(renamed))


# -- krippendorff's alpha --------------------------------------------------

def test_alpha_identical_scores_is_one():
    units = [[3, 3], [5, 5, 5], [2, 2]]
    assert krippendorff_alpha(records_from_units(units)) == 1.0


def test_alpha_single_ratings_insufficient():
    with pytest.raises(InsufficientOverlapError):
        krippendorff_alpha([quality("a", "i1", 3), quality("b", "i2", 4)])


def test_alpha_no_variation_raises():
    # all values equal across units except disagreement would need variation;
    # construct D_e == 0 with D_o > 0 is impossible, but D_e == 0 with D_o == 0
    # yields exactly 1.0 and is not an error
    assert krippendorff_alpha(records_from_units([[4, 4], [4, 4]])) == 1.0


def test_alpha_matches_brute_force_on_randomized_datasets():
    rng = random.Random(20260823)
    checked = 0
    while checked < 12:
        units = [
            [rng.randint(1, 5) for _ in range(rng.randint(1, 3))]
            for _ in range(rng.randint(2, 6))
        ]
        expected = None
        if any(len(u) >= 2 for u in units):
            expected = brute_force_alpha(units)
        records = records_from_units(units)
        try:
            actual = krippendorff_alpha(records)
        except (InsufficientOverlapError, NoVariationError):
            actual = None
        if expected is None:
            assert actual is None
        else:
            assert actual == pytest.approx(expected, abs=1e-9)
        checked += 1


def test_alpha_shift_invariant_unbounded_scale():
    units = [[1, 2], [3, 3, 4], [2, 5]]
    shifted = [[v + 7 for v in unit] for unit in units]
    assert brute_force_alpha(units) == pytest.approx(brute_force_alpha(shifted), abs=1e-12)
    # the implementation agrees on the original 1-5 range
    assert krippendorff_alpha(records_from_units(units)) == pytest.approx(
        brute_force_alpha(units), abs=1e-9
    )


def test_alpha_noise_never_improves_perfect_agreement():
    rng = random.Random(5)
    clean = [[3, 3], [4, 4], [2, 2], [5, 5]]
    noisy = [
        [min(5, max(1, v + rng.choice((-1, 0, 1)))) for v in unit] for unit in clean
    ]
    clean_alpha = krippendorff_alpha(records_from_units(clean))
    noisy_alpha = krippendorff_alpha(records_from_units(noisy))
    assert noisy_alpha <= clean_alpha == 1.0


def test_alpha_units_are_item_dimension_pairs():
    records = [
        quality("a", "i1", 4, "coherence"),
        quality("b", "i1", 2, "coherence"),
        quality("a", "i1", 5, "fluency"),
        quality("b", "i1", 1, "fluency"),
    ]
    expected = brute_force_alpha([[4, 2], [5, 1]])
    assert krippendorff_alpha(records) == pytest.approx(expected, abs=1e-9)


def test_alpha_per_dimension_reports_all_four():
    records = []
    for dim in QUALITY_DIMENSIONS[:2]:
        records += [
            quality("a", "i1", 4, dim), quality("b", "i1", 3, dim),
            quality("a", "i2", 2, dim), quality("b", "i2", 2, dim),
        ]
    out = krippendorff_alpha_per_dimension(records)
    assert set(out) == set(QUALITY_DIMENSIONS)
    assert out["coherence"] is not None
    assert out["fluency"] is None  # no records for this dimension


# -- record validation and io ---------------------------------------------

def test_record_validation():
    with pytest.raises(ValueError):
        binary("a", "i", 3)
    with pytest.raises(ValueError):
        quality("a", "i", 0)
    with pytest.raises(ValueError):
        quality("a", "i", 3, dimension="style")
    with pytest.raises(ValueError):
        AnnotationRecord("a", "i", "unknown_task", 1)


def test_read_records_round_trip(tmp_path):
    import json

    records = [binary("a", "i1", 1), quality("b", "i1", 4, "relevance")]
    path = tmp_path / "records.jsonl"
    path.write_text(
        "".join(json.dumps(r.as_dict()) + "\n" for r in records), encoding="utf-8"
    )
    assert read_records(path) == records
