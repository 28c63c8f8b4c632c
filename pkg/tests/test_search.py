import math
from fractions import Fraction as F

import pytest

from subdioph.construct import build_line
from subdioph.exactlin import saturate
from subdioph.search import (
    ApproximationRecord,
    ScanConfig,
    best_approx_scan,
    enumerate_lines,
    enumerate_subspaces,
    enumeration_strategy,
    exponent_estimate,
    family_records,
    primitive_vectors,
    records_to_csv,
)


def test_enumerate_lines_counts():
    assert len(list(enumerate_lines(2, 1))) == 2
    assert len(list(enumerate_lines(2, 2))) == 4
    lines = list(enumerate_lines(3, 9))
    assert all(l.height_sq <= 9 for l in lines)
    assert len({l.key() for l in lines}) == len(lines)


def test_primitive_vectors_canonical():
    vecs = primitive_vectors(3, 6)
    assert all(next(x for x in v if x) > 0 for v in vecs)
    assert all(math.gcd(*[abs(x) for x in v]) == 1 for v in vecs)
    hs = [sum(x * x for x in v) for v in vecs]
    assert hs == sorted(hs)


def test_duality_bijection_count():
    lines = list(enumerate_lines(3, 9))
    planes = enumerate_subspaces(3, 2, 9)
    assert len(planes) == len(lines)
    assert all(p.dim == 2 and p.height_sq <= 9 for p in planes)


def test_bounded_entries_matches_dual():
    dual = enumerate_subspaces(3, 2, 9, strategy="dual")
    bounded = enumerate_subspaces(3, 2, 9, strategy="boundedEntries")
    assert [b.key() for b in bounded] == [d.key() for d in dual]


def test_bounded_entries_middle_dimension():
    subs = enumerate_subspaces(4, 2, 4, strategy="boundedEntries")
    assert all(b.dim == 2 and b.height_sq <= 4 for b in subs)
    assert len({b.key() for b in subs}) == len(subs)
    # coordinate planes all have height 1 and must be present
    coord_keys = {
        saturate([tuple(1 if t == i else 0 for t in range(4)),
                  tuple(1 if t == j else 0 for t in range(4))]).key()
        for i in range(4) for j in range(i + 1, 4)
    }
    found = {b.key() for b in subs}
    assert coord_keys <= found


def test_strategy_table():
    assert enumeration_strategy(3, 1) == ("primitiveVectors", True)
    assert enumeration_strategy(3, 2) == ("dual", True)
    assert enumeration_strategy(6, 3) == ("boundedEntries", True)
    assert enumeration_strategy(7, 5)[1] is False  # sampling, flagged
    with pytest.raises(ValueError):
        enumeration_strategy(3, 3)


def test_rejects_full_dimension():
    with pytest.raises(ValueError):
        enumerate_subspaces(3, 3, 5)


def test_slope_two_point_example():
    r1 = ApproximationRecord(saturate([(1, 0)]), 100, F(1, 100), F(1, 100), 2.0, 2.0)
    r2 = ApproximationRecord(saturate([(0, 1)]), 10000, F(1, 10000), F(1, 10000), 2.0, 2.0)
    lo, hi = exponent_estimate([r1, r2], "familySlope")
    assert abs(lo - 2) < 1e-12 and abs(hi - 2) < 1e-12
    flo, fhi = exponent_estimate([r1, r2], "frontierMax")
    assert abs(flo - 2) < 1e-12


def test_estimate_errors():
    r1 = ApproximationRecord(saturate([(1, 0)]), 100, F(1, 100), F(1, 100), 0, 0)
    with pytest.raises(ValueError):
        exponent_estimate([r1], "familySlope")
    with pytest.raises(ValueError):
        exponent_estimate([r1, r1], "familySlope")  # degenerate heights


def test_family_slope_recovers_exponent():
    lc = build_line(2, [F(3)], seed=11)
    recs = family_records(lc, 1, range(2, 7))
    lo, hi = exponent_estimate(recs, "familySlope")
    assert abs(0.5 * (lo + hi) - 3) / 3 < 0.1
    flo, fhi = exponent_estimate(recs, "frontierMax")
    assert fhi >= lo - 1e-9  # max dominates the fit on the same data


def test_scan_finds_construction_approximants():
    lc = build_line(3, [F(3)], seed=7)
    target = lc.truncated_target(5)
    cfg = ScanConfig(n=3, e=1, height_sq_max=20000, score_floor=1.5)
    recs = best_approx_scan(cfg, target)
    keys = {r.plucker_key() for r in recs}
    assert saturate([lc.x_vector(0)]).key()[2] in keys
    assert saturate([lc.x_vector(1)]).key()[2] in keys
    # scores ordered, frontier scores consistent with output order
    scores = [r.score_lo for r in recs]
    assert scores == sorted(scores, reverse=True)
    front = [r for r in recs if r.on_frontier]
    assert front, "frontier must be nonempty"
    # Pareto property among records: no record dominates a frontier member
    for f in front:
        for r in recs:
            assert not (r.height_sq < f.height_sq and r.psi_hi < f.psi_lo)


def test_scan_deterministic_across_workers():
    lc = build_line(3, [F(3)], seed=7)
    target = lc.truncated_target(5)
    csv1 = records_to_csv(
        best_approx_scan(ScanConfig(n=3, e=1, height_sq_max=20000, score_floor=1.5, workers=1), target)
    )
    csv2 = records_to_csv(
        best_approx_scan(ScanConfig(n=3, e=1, height_sq_max=20000, score_floor=1.5, workers=3), target)
    )
    assert csv1 == csv2


def test_scan_excludes_exact_zero_for_rational_target():
    target = saturate([(1, 0, 0), (0, 1, 0)])
    cfg = ScanConfig(n=3, e=2, height_sq_max=9, score_floor=0.5)
    recs = best_approx_scan(cfg, target)
    assert all(r.plucker_key() != tuple(target.plucker.dense_colex()) for r in recs)


def test_dual_scan_finds_b_n2():
    lc = build_line(3, [F(3)], seed=7)
    target = lc.truncated_target(5)
    cfg = ScanConfig(n=3, e=2, height_sq_max=20000, score_floor=2.0)
    recs = best_approx_scan(cfg, target)
    b02 = lc.b_approx(0, 2)
    assert any(r.plucker_key() == tuple(b02.plucker.dense_colex()) for r in recs)


def test_desk_scale_best_approx_planes():
    # e = 2 analogue of the best-approximation oracle: any plane beating
    # H^(-K_2 - 1/4) = H^(-37/4) above the small-height floor must be a B_{N,2}
    lc = build_line(3, [F(3)], seed=7)
    target = lc.truncated_target(5)
    cfg = ScanConfig(n=3, e=2, height_sq_max=20000, score_floor=6.0)
    recs = best_approx_scan(cfg, target)
    family = {tuple(lc.b_approx(n_idx, 2).plucker.dense_colex()) for n_idx in range(0, 3)}
    h0_sq = 1
    for r in recs:
        beats = (r.psi_lo ** 2) ** 2 * F(r.height_sq) ** 37 <= 1  # psi <= H^(-37/4)
        if beats and r.plucker_key() not in family:
            h0_sq = max(h0_sq, r.height_sq)
    assert h0_sq <= 32, f"non-family plane beats the threshold at H^2 = {h0_sq}"


def test_constructed_family_strategy():
    lc = build_line(3, [F(3)], seed=7)
    target = lc.truncated_target(6)
    cfg = ScanConfig(n=3, e=1, height_sq_max=10 ** 14, strategy="constructedFamily", score_floor=1.0)
    recs = best_approx_scan(cfg, target, construction=lc, n_values=[0, 1, 2])
    assert {r.label for r in recs} == {"0", "1", "2"}
    assert all(r.score_lo > 2 for r in recs)
    with pytest.raises(ValueError):
        best_approx_scan(cfg, target)


def test_csv_format():
    lc = build_line(2, [F(3)], seed=11)
    recs = family_records(lc, 1, range(2, 5))
    lines = records_to_csv(recs)
    assert lines[0].startswith("N_or_rank,heightSq,log10_H")
    assert len(lines) == 4
    # interval endpoints are parseable scientific strings, no bare repr floats
    psi_lo = lines[1].split(",")[3]
    assert "e" in psi_lo
