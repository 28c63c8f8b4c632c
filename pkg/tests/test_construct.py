import random
from fractions import Fraction as F

import pytest

from subdioph.construct import (
    ConstructionError,
    DigitFamily,
    GrowthSchedule,
    alpha_sequence,
    build_blocks,
    build_line,
    build_recursive,
    digit_family,
)
from subdioph.exactlin import saturate, wedge
from subdioph.numeric import log_fraction


def test_alpha_sequence_examples():
    assert alpha_sequence([F(3)], None, 3) == [(1, 1), (3, 3), (9, 9), (27, 27)]
    seq = alpha_sequence([F(5, 2), F(3)], None, 3)
    assert [a for a, _ in seq] == [F(1), F(5, 2), F(15, 2), F(75, 4)]
    assert [fl for _, fl in seq] == [1, 2, 7, 18]
    assert alpha_sequence([F(3)], None, 0) == [(1, 1)]
    with pytest.raises(ConstructionError):
        alpha_sequence([F(1)], None, 2)


def test_floor_cap_enforced():
    sched = GrowthSchedule([F(3)], 5, floor_cap=100)
    with pytest.raises(ConstructionError):
        sched.floor_alpha(5)
    sched2 = GrowthSchedule([F(3)], 5, floor_cap=10 ** 9)
    assert sched2.floor_alpha(5) == 243


def test_x_vector_worked_example():
    lc = build_line(3, [F(5, 2), F(3)], seed=0, mode="relaxed", digit_override=[1, 1, 2])
    assert lc.x_vector(0) == (5, 1, 0)
    assert lc.x_vector(1) == (25, 5, 1)
    assert lc.x_vector(2) == (78125, 15627, 3125)


def test_x_vector_recurrence_and_leading_power():
    lc = build_line(4, [F(3)], seed=13)
    th = lc.theta
    for n_idx in range(5):
        x0, x1 = lc.x_vector(n_idx), lc.x_vector(n_idx + 1)
        scale = th ** (lc.schedule.floor_alpha(n_idx + 1) - lc.schedule.floor_alpha(n_idx))
        w = tuple(a - scale * b for a, b in zip(x1, x0))
        nz = [v for v in w if v]
        assert w[0] == 0 and len(nz) == 1 and nz[0] in (1, 2)
        assert x1[0] == th ** lc.schedule.floor_alpha(n_idx + 1)


def test_b_approx_claimed_basis_matches_saturation_small_grid():
    for n in (3, 4):
        lc = build_line(n, [F(3)], seed=21)
        for big_n in range(0, 4):
            for e in range(1, n):
                claimed = lc.b_approx(big_n, e)
                oracle = saturate(lc.spanning_xs(big_n, e))
                assert claimed.height_sq == oracle.height_sq, (n, big_n, e)
                assert claimed.key() == oracle.key()


def test_b_approx_worked_height():
    lc = build_line(3, [F(5, 2), F(3)], seed=0, mode="relaxed", digit_override=[1, 1, 2])
    assert lc.b_approx(0, 2).height_sq == 26
    b1 = lc.b_approx(1, 1)
    assert b1.height_sq == sum(x * x for x in lc.x_vector(1))
    assert lc.b_approx(0, 2).dim == 2
    with pytest.raises(ConstructionError):
        lc.b_approx(0, 3)


def test_prediction_examples_and_seed_independence():
    lc = build_line(3, [F(3)], seed=1)
    assert lc.predicted_mu(1) == 3 and lc.predicted_mu(2) == 9
    lc34 = build_line(3, [F(3), F(4)], seed=1)
    assert lc34.predicted_mu(1) == 4 and lc34.predicted_mu(2) == 12
    other = build_line(3, [F(3), F(4)], seed=2)
    assert other.predicted_mu(2) == lc34.predicted_mu(2)
    assert other.digits.transcript(30) != lc34.digits.transcript(30)


def test_strict_mode_threshold():
    with pytest.raises(ConstructionError):
        build_line(3, [F(5, 2)], mode="strict")  # 2.5 < C_1 = 2.618...
    build_line(3, [F(27, 10)], mode="strict")  # 2.7 >= C_1
    with pytest.raises(ConstructionError):
        build_line(3, [F(2)], mode="relaxed")


def test_tail_bound_dominates_level_differences():
    lc = build_line(3, [F(3)], seed=4)
    for m1 in range(1, 4):
        bound = lc.tail_bound(m1)
        for j in range(lc.n - 1):
            diff = abs(lc.sigma_trunc(j, m1 + 2) - lc.sigma_trunc(j, m1))
            assert diff <= bound


def test_height_envelope_test_schedule():
    lc = build_line(3, [F(3)], seed=9)
    for big_n in (4, 5, 6):
        for e in (1, 2):
            h_sq = lc.b_approx(big_n, e).height_sq
            ratio = (log_fraction(h_sq) / 2 / log_fraction(5)) / float(lc.schedule.alpha(big_n))
            assert 0.9 <= ratio <= 1.01
            assert h_sq <= sum(x * x for x in lc.x_vector(big_n))


def test_digit_family_basics():
    fam = digit_family(2, seed=5)
    assert [fam.phi(k) for k in range(5)] == [0, 1, 0, 1, 0]
    fam2 = digit_family(2, seed=5)
    assert fam.transcript(50) == fam2.transcript(50)
    counts = {1: 0, 2: 0}
    for k in range(10 ** 4):
        counts[fam.value(k)] += 1
    share = counts[1] / 10 ** 4
    assert 0.45 <= share <= 0.55
    with pytest.raises(ConstructionError):
        DigitFamily(0, seed=1)


# ---------------------------------------------------------------------------
# blocks


def test_blocks_single_block_reduces_to_line():
    bc = build_blocks(1, 2, [[F(4), F(3)]], mode="relaxed", seed=5)
    assert bc.n == 3
    assert bc.lines[0].schedule.gammas == (F(4), F(3), F(3), F(3))
    emb = bc.x_vector(1, 1)
    assert emb == bc.lines[0].x_vector(1)


def test_blocks_relaxed_pipeline_and_table():
    bc = build_blocks(2, 2, [[F(5), F(4)], [F(26), F(25)]], mode="relaxed", seed=2)
    assert bc.predicted_mu(3, 2) == F(260, 23)
    entries = bc.exponent_table().entries
    assert (3, 2) in entries and str(entries[(3, 2)]) == "260/23"


def test_blocks_strict_validation():
    with pytest.raises(ConstructionError):
        build_blocks(2, 2, [[F(5), F(4)], [F(26), F(25)]], mode="strict")
    # increasing row in a strict config with huge spread still fails hyp 1
    with pytest.raises(ConstructionError):
        build_blocks(1, 2, [[F(3), F(4)]], mode="strict", c2=F(11, 10))


def test_blocks_orthogonality_and_heights():
    bc = build_blocks(2, 2, [[F(5), F(4)], [F(26), F(25)]], mode="relaxed", seed=2)
    x1, x2 = bc.x_vector(2, 1), bc.x_vector(1, 2)
    assert sum(a * b for a, b in zip(x1, x2)) == 0
    c = bc.c_approx([1, 2], 3, [2, 2])
    h1 = bc.lines[0].b_approx(2, 2).height_sq
    h2 = bc.lines[1].b_approx(2, 1).height_sq
    assert c.height_sq == h1 * h2
    assert saturate(c.basis).height_sq == c.height_sq


def test_blocks_full_lane_height_one():
    bc = build_blocks(2, 2, [[F(5), F(4)], [F(26), F(25)]], mode="relaxed", seed=2)
    c = bc.c_approx([1, 2], 5, [0, 2])  # f=1: first lane is the full block
    assert c.dim == 5
    assert c.height_sq == bc.lines[1].b_approx(2, 2).height_sq


def test_blocks_k1_embedding():
    bc = build_blocks(2, 2, [[F(5), F(4)], [F(26), F(25)]], mode="relaxed", seed=2)
    c = bc.c_approx([2], 2, [1])
    local = bc.lines[1].b_approx(1, 2)
    assert c.height_sq == local.height_sq


def test_blocks_gram_cross_block_diagonal():
    bc = build_blocks(3, 1, [[F(4)], [F(5)], [F(6)]], mode="relaxed", seed=8)
    gens = [bc.x_vector(1, i) for i in (1, 2, 3)]
    for i in range(3):
        for j in range(3):
            dot = sum(a * b for a, b in zip(gens[i], gens[j]))
            assert (dot == 0) == (i != j)


# ---------------------------------------------------------------------------
# recursive


def test_recursive_shapes_and_predictions():
    rc = build_recursive(4, 2, [F(4)], proxies=[F(3)], seed=3, level=3)
    y1, y2 = rc.generator_trunc(1), rc.generator_trunc(2)
    assert y1[0] == 1 and y1[1] == 0 and all(x > 0 for x in y1[2:])
    assert y2[0] == 1 and all(x > 0 for x in y2[1:])
    assert rc.predicted_mu(1) == 4 and rc.predicted_mu(2) == 16
    # trailing construction coordinate counts: n-d+j-1
    assert sum(1 for x in y1[1:] if x != 0) == 2
    assert sum(1 for x in y2[1:] if x != 0) == 3


def test_recursive_base_case_is_line():
    rc = build_recursive(4, 1, [F(3)], proxies=[], seed=3, level=3)
    lc = rc.lines[0]
    assert lc.n == 4
    y = rc.generator_trunc(1)
    assert y == lc.y_trunc(3)


def test_recursive_strict_thresholds_astronomical():
    # C_2 for n=4 is about 1.8e6; gamma=4 must be rejected in strict mode
    with pytest.raises(ConstructionError):
        build_recursive(4, 2, [F(4)], proxies=[F(3)], mode="strict")


def test_recursive_truncated_target_shape():
    rc = build_recursive(5, 2, [F(3), F(4)], proxies=[F(3)], seed=6, level=3)
    t = rc.truncated_target()
    assert t.d == 2 and len(t.generators) == 2
    assert t.perturbed_counts == (3, 4)


def test_blocks_height_envelope():
    # log_theta H(C^J_N) tracks sum of alpha_{j,N_j} over the non-full lanes
    bc = build_blocks(2, 2, [[F(5), F(4)], [F(26), F(25)]], mode="relaxed", seed=2)
    for n_vec in ([1, 1], [2, 1], [2, 2]):
        c = bc.c_approx([1, 2], 3, n_vec)
        expected = float(bc.alpha_block(1, n_vec[0]) + bc.alpha_block(2, n_vec[1]))
        measured = log_fraction(c.height_sq) / 2 / log_fraction(5)
        assert abs(measured / expected - 1) < 0.05, (n_vec, measured, expected)


def test_blocks_angle_envelope_non_rigorous_interval():
    # psi_{k-g}(A_J, C^J_N) tracks theta^(-min_j alpha_{j, N_j + v_j}); the
    # d > 1 widening uses the heuristic constant and must be flagged
    from subdioph.angles import PrecisionConfig, angle_interval_to_truncated_target

    bc = build_blocks(2, 2, [[F(5), F(4)], [F(26), F(25)]], mode="relaxed", seed=2)
    c = bc.c_approx([1, 2], 3, [0, 0])
    target = bc.truncated_target(3)
    iv, rigorous = angle_interval_to_truncated_target(
        target, c, 2, PrecisionConfig(working_bits=256)
    )
    assert not rigorous
    # v = (2,1): expected scale theta^-min(alpha_{1,2}, alpha_{2,1}) = 5^-20
    expected = -float(min(bc.alpha_block(1, 2), bc.alpha_block(2, 1)))
    for endpoint in (iv.lo, iv.hi):
        assert endpoint > 0
        val = log_fraction(endpoint) / log_fraction(5)
        assert abs(val - expected) / abs(expected) < 0.25, (val, expected)


def test_blocks_family_slope_matches_block_formula():
    # full pipeline at desk scale: equal-growth blocks, e = k = d = 2, where
    # the witness sequence is the diagonal (N, N); the score of C^J_{(N,N)}
    # tends to 1/(1/K_1 + 1/K_2) = 3/2
    from subdioph.angles import PrecisionConfig, angle_interval_to_truncated_target
    from subdioph.exponents import witness_ns

    bc = build_blocks(2, 1, [[F(3)], [F(3)]], mode="relaxed", seed=4)
    assert bc.predicted_mu(2, 2) == F(3, 2)
    assert witness_ns(bc, (1, 2), e=2, k=2, n_first=4) == (4, 4)

    cfg = PrecisionConfig(working_bits=2048)
    target = bc.truncated_target(6)
    points = []
    for n_idx in (2, 3, 4):
        c = bc.c_approx([1, 2], 2, [n_idx, n_idx])
        iv, rigorous = angle_interval_to_truncated_target(target, c, 2, cfg)
        assert not rigorous and iv.lo > 0
        score = -log_fraction(iv.hi) / (log_fraction(c.height_sq) / 2)
        points.append(score)
    assert abs(points[-1] - 1.5) / 1.5 < 0.15, points


def test_growth_schedule_concurrent_readers():
    import threading

    sched = GrowthSchedule([F(3), F(4)], 5, floor_cap=10 ** 9)
    results = []

    def worker():
        results.append(sched.floor_alpha(8))

    threads = [threading.Thread(target=worker) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len(set(results)) == 1
