import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from subdioph.exponents import (
    ExponentValue,
    direct_sum_combine,
    f_func,
    g_func,
    gamma_from_beta,
    k_max,
    mu_block_formula,
    mu_line_formula,
    pad_schedule,
    roy_check,
    sufficient_condition_report,
    v_q,
    validate_beta_hypotheses,
    witness_ns,
)


def test_g_and_f():
    assert g_func(1, 1, 3) == 0
    assert g_func(2, 2, 3) == 1
    assert f_func(5, 4) == 1
    assert f_func(3, 4) == 0


@given(st.integers(1, 64), st.integers(1, 64))
@settings(max_examples=120)
def test_v_q_partition(e, k):
    if e < k:
        with pytest.raises(ValueError):
            v_q(e, k)
        return
    v = v_q(e, k)
    assert sum(v) == e
    assert all(x in (e // k, e // k + 1) for x in v)
    assert v == sorted(v, reverse=True)


def test_v_q_examples():
    assert v_q(5, 2) == [3, 2]
    assert v_q(4, 2) == [2, 2]
    assert v_q(5, 3) == [2, 2, 1]


def test_k_max_examples():
    assert k_max([F(4), F(3), F(2)], 2) == 12
    assert k_max([F(4), F(3), F(2)], 0) == 1
    assert k_max([F(3)] * 5, 4) == 81
    with pytest.raises(ValueError):
        k_max([F(2)], 2)


def test_k_max_monotone_in_v(rng):
    for _ in range(40):
        row = [F(rng.randrange(1, 30), rng.randrange(1, 4)) for _ in range(rng.randrange(1, 6))]
        row = [max(x, F(1)) for x in row]
        vals = [k_max(row, v) for v in range(len(row) + 1)]
        assert vals == sorted(vals)


def test_mu_line_examples():
    assert mu_line_formula([F(3), F(4)], 1) == 4
    assert mu_line_formula([F(3), F(4)], 2) == 12
    assert mu_line_formula([F(7, 2)], 3) == F(343, 8)


def test_mu_block_worked_value():
    assert mu_block_formula(2, 2, [[F(5), F(4)], [F(26), F(25)]], 3, 2) == F(260, 23)


def test_mu_block_d1_equals_line_on_extended_schedule(rng):
    # the d=1 block row, extended by its minimum with period 2m, is exactly
    # the schedule of the single-block line; the formulas must agree
    for _ in range(40):
        m = rng.randrange(1, 5)
        row = [F(rng.randrange(9, 60), rng.randrange(1, 4)) for _ in range(m)]
        row = [x if x > 2 else x + 3 for x in row]
        ext = min(row)
        period = row + [ext] * m
        for e in range(1, m + 1):
            assert mu_block_formula(1, m, [row], e, 1) == mu_line_formula(period, e)


def test_mu_block_boundary_error():
    with pytest.raises(ValueError):
        mu_block_formula(2, 2, [[F(5), F(4)], [F(26), F(25)]], 6, 2)


def test_roy_examples():
    ok, _ = roy_check(3, [ExponentValue.finite(2), ExponentValue.finite(4)])
    assert ok
    ok, why = roy_check(3, [ExponentValue.finite(3), ExponentValue.finite(4)])
    assert not ok and "upper" in why
    ok, _ = roy_check(3, [ExponentValue.infinite(), ExponentValue.infinite()])
    assert ok
    with pytest.raises(ValueError):
        roy_check(3, [ExponentValue.finite(2)])


def test_direct_sum_examples():
    def table(j_set, e):
        return ExponentValue.finite({frozenset({1}): 5, frozenset({2}): 3}[j_set])

    direct, rec = direct_sum_combine(table, 2, 1, 1, 0)
    assert direct.value == 5 and rec.value == 5

    # k + g = d: a single subset, identity
    def table2(j_set, e):
        assert j_set == frozenset({1, 2})
        return ExponentValue.finite(F(7, 3))

    direct2, rec2 = direct_sum_combine(table2, 2, 3, 2, 0)
    assert direct2.value == rec2.value == F(7, 3)


def test_direct_sum_recursive_equals_direct(rng):
    for _ in range(150):
        d = rng.randrange(2, 6)
        e = rng.randrange(1, 6)
        g = rng.choice([0, 0, 0, 1])
        k = rng.randrange(1, d + 1 - g)
        vals = {}

        def table(j_set, e_arg, vals=vals):
            if j_set not in vals:
                if rng.random() < 0.1:
                    vals[j_set] = ExponentValue.infinite()
                else:
                    vals[j_set] = ExponentValue.finite(
                        F(rng.randrange(1, 500), rng.randrange(1, 20))
                    )
            return vals[j_set]

        direct, rec = direct_sum_combine(table, d, e, k, g)
        assert direct == rec


def test_validate_beta_worked_example():
    rep = validate_beta_hypotheses(1, 2, [[F(100), F(90)]], F(11, 10))
    threshold_check = next(c for c in rep.checks if c.name == "row1_min_gt_threshold")
    assert not threshold_check.passed  # 90 < 3^11 = 177147
    assert rep.kki_passed  # the sufficient condition is much weaker
    assert not rep.strict_ok


def test_validate_beta_passing_instance():
    rep = validate_beta_hypotheses(2, 1, [[F(10) ** 6], [F(10) ** 8]], F(6, 5))
    assert rep.strict_ok and rep.kki_passed


def test_validate_beta_d1_skips_inter_row():
    rep = validate_beta_hypotheses(1, 1, [[F(10) ** 6]], F(3, 2))
    assert len(rep.checks) == 2  # only the two row-1 checks


def test_row_monotonicity_under_hypotheses():
    # on a validated configuration, K_{i+1,v} dominates K_{i,v}
    rows = [[F(10) ** 6], [F(10) ** 8]]
    rep = validate_beta_hypotheses(2, 1, rows, F(6, 5))
    assert rep.strict_ok
    for v in (0, 1):
        assert k_max(rows[1], v) >= k_max(rows[0], v)


def test_gamma_from_beta_examples():
    gam, _ = gamma_from_beta([F(4), F(12)], 1, 3, relaxed_threshold=F(2))
    assert gam == [F(4), F(3)]
    assert mu_line_formula(gam, 1) == 4 and mu_line_formula(gam, 2) == 12

    gam2, _ = gamma_from_beta([F(3), F(9), F(27)], 1, 4, relaxed_threshold=F(2))
    assert gam2 == [F(3)] * 3

    _, in_o = gamma_from_beta([F(4), F(20)], 1, 3, relaxed_threshold=F(4))
    assert not in_o  # 20 >= 4^2 violates the upper constraint

    with pytest.raises(ValueError):
        gamma_from_beta([F(4), F(3)], 1, 3, relaxed_threshold=F(2))


def _random_o_member(rng, n, threshold=F(27, 10)):
    """Sample beta strictly inside the relaxed open set."""
    betas = [threshold * F(rng.randrange(11, 30), 10)]
    for i in range(1, n - 1):
        lo = threshold * betas[-1]
        hi = min(betas[i - j] * betas[j - 1] for j in range(1, i + 1))
        assert lo < hi
        mid_num = rng.randrange(1, 10)
        betas.append(lo + (hi - lo) * F(mid_num, 11))
    return betas


def test_gamma_from_beta_o_members_pass_roy(rng):
    thr = F(27, 10)
    for _ in range(60):
        n = rng.randrange(3, 7)
        betas = _random_o_member(rng, n)
        gammas, in_o = gamma_from_beta(betas, 1, n, relaxed_threshold=thr)
        assert in_o, betas
        padded = pad_schedule(gammas, thr)
        mus = [ExponentValue.finite(mu_line_formula(padded, e)) for e in range(1, n)]
        assert [m.value for m in mus] == betas
        ok, why = roy_check(n, mus)
        assert ok, (betas, why)


# ---------------------------------------------------------------------------
# witness indices


class _StubBlocks:
    """Minimal per-block data for the synchronization formula."""

    def __init__(self, m, rows, exts):
        self.m = m
        self.rows = [[F(x) for x in r] for r in rows]
        self.exts = [F(x) for x in exts]

    def e_value(self, i):
        prod = F(1)
        for x in self.rows[i - 1]:
            prod *= x
        return prod * self.exts[i - 1] ** self.m

    def alpha_block(self, i, ell):
        period = self.rows[i - 1] + [self.exts[i - 1]] * self.m
        prod = F(1)
        for t in range(ell):
            prod *= period[t % (2 * self.m)]
        return prod

    def l_index(self, i, v):
        from subdioph.exponents import k_max_argmin_window

        return k_max_argmin_window(self.rows[i - 1], v)


def test_witness_ns_worked_example():
    # m=1, E_1=4, E_2=9, v=(1,1), L_2=0, alpha_{1,0}=1, N_1=2 -> N_2 = 0
    bc = _StubBlocks(1, [[2], [3]], [2, 3])
    assert bc.e_value(1) == 4 and bc.e_value(2) == 9
    nvec = witness_ns(bc, (1, 2), e=2, k=2, n_first=2)
    assert nvec == (2, 0)


def test_witness_ns_equal_growth_pass_through():
    bc = _StubBlocks(1, [[3], [3]], [3, 3])
    nvec = witness_ns(bc, (1, 2), e=2, k=2, n_first=6)
    assert nvec == (6, 6)


def test_witness_ns_k1_pass_through():
    bc = _StubBlocks(1, [[3]], [3])
    assert witness_ns(bc, (1,), e=1, k=1, n_first=4) == (4,)


def test_witness_ns_validates_multiple():
    bc = _StubBlocks(2, [[3, 4], [5, 6]], [3, 5])
    with pytest.raises(ValueError):
        witness_ns(bc, (1, 2), e=3, k=2, n_first=3)  # not a multiple of 2m


def test_exponent_table_serialization():
    from subdioph.exponents import ExponentTable

    t = ExponentTable(6, 2)
    t.set(3, 2, ExponentValue.finite(F(260, 23)))
    t.set(1, 1, ExponentValue.infinite())
    csv = t.to_csv_lines()
    assert csv[0] == "e,j,mu_num,mu_den,infinite_flag"
    assert "3,2,260,23,0" in csv
    assert "1,1,,,1" in csv
    with pytest.raises(ValueError):
        t.set(5, 2, ExponentValue.finite(1))  # outside V_{2,6}
