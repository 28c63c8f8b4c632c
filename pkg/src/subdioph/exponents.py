"""Closed-form exponent formulas and constraint validators.

Covers the dimension bookkeeping g and f, the Euclidean-split lane sizes v_q,
window maxima K over rows of growth factors, the line and block exponent
formulas, the joint-spectrum consistency inequalities, the direct-sum
combiner, hypothesis validators for the block construction, the beta-to-gamma
open-set map, and the synchronized witness indices.

All values are exact rationals; +infinity is a distinct symbolic value with
arithmetic defined only where the consistency checks need it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .numeric import floor_log, ge_cd, root_pow_gt


@dataclass(frozen=True)
class ExponentValue:
    """A Diophantine exponent: a rational >= 1 or +infinity."""

    value: Fraction | None = None  # None encodes +infinity

    @staticmethod
    def finite(v) -> "ExponentValue":
        return ExponentValue(Fraction(v))

    @staticmethod
    def infinite() -> "ExponentValue":
        return ExponentValue(None)

    @property
    def is_infinite(self) -> bool:
        return self.value is None

    def __le__(self, other: "ExponentValue") -> bool:
        if self.is_infinite:
            return other.is_infinite
        if other.is_infinite:
            return True
        return self.value <= other.value

    def max(self, other: "ExponentValue") -> "ExponentValue":
        return other if self <= other else self

    def __str__(self) -> str:
        return "inf" if self.is_infinite else str(self.value)


@dataclass
class ExponentTable:
    """Map (e, j) -> exponent for a fixed target; keys inside V_{d,n}."""

    n: int
    d: int
    entries: dict = field(default_factory=dict)  # (e, j) -> ExponentValue

    def set(self, e: int, j: int, value: ExponentValue) -> None:
        if not (1 <= e <= self.n - 1):
            raise ValueError("e out of range")
        if not (1 <= j <= min(self.d, e) - g_func(self.d, e, self.n)):
            raise ValueError(f"(e={e}, j={j}) outside V_d,n")
        self.entries[(e, j)] = value

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "d": self.d,
            "entries": [
                {"e": e, "j": j, "mu": str(v)} for (e, j), v in sorted(self.entries.items())
            ],
        }

    def to_csv_lines(self) -> list[str]:
        lines = ["e,j,mu_num,mu_den,infinite_flag"]
        for (e, j), v in sorted(self.entries.items()):
            if v.is_infinite:
                lines.append(f"{e},{j},,,1")
            else:
                lines.append(f"{e},{j},{v.value.numerator},{v.value.denominator},0")
        return lines


# ---------------------------------------------------------------------------
# elementary index functions


def g_func(d: int, e: int, n: int) -> int:
    """Forced intersection dimension of generic d- and e-subspaces of R^n."""
    return max(0, d + e - n)


def f_func(e: int, mk: int) -> int:
    return max(0, e - mk)


def v_q(e: int, k: int) -> list[int]:
    """Lane sizes from the Euclidean division e = k*v + u: u lanes get v+1."""
    if k < 1:
        raise ValueError("k >= 1 required")
    if e < k:
        raise ValueError("e >= k required")
    v, u = e // k, e % k
    return [v + 1 if q <= u else v for q in range(1, k + 1)]


def k_max(beta_row: Sequence[Fraction], v: int) -> Fraction:
    """Maximal product of v consecutive entries of the row; empty product 1."""
    row = [Fraction(b) for b in beta_row]
    if v < 0 or v > len(row):
        raise ValueError(f"window size {v} out of range for row of length {len(row)}")
    if v == 0:
        return Fraction(1)
    best = None
    for start in range(len(row) - v + 1):
        prod = Fraction(1)
        for x in row[start : start + v]:
            prod *= x
        if best is None or prod > best:
            best = prod
    return best


def k_max_argmin_window(beta_row: Sequence[Fraction], v: int) -> int:
    """Smallest window start L with beta_{L+1}..beta_{L+v} achieving k_max."""
    row = [Fraction(b) for b in beta_row]
    best = k_max(row, v)
    for start in range(len(row) - v + 1):
        prod = Fraction(1)
        for x in row[start : start + v]:
            prod *= x
        if prod == best:
            return start
    raise AssertionError("unreachable")


# ---------------------------------------------------------------------------
# exponent formulas


def mu_line_formula(gamma: Sequence[Fraction], e: int) -> Fraction:
    """max over cyclic e-windows of the periodic schedule: the first-angle
    exponent of the line built from gamma."""
    if e < 1:
        raise ValueError("e >= 1 required")
    per = [Fraction(x) for x in gamma]
    if not per or any(x <= 1 for x in per):
        raise ValueError("gamma entries must be rationals > 1")
    t = len(per)
    best = None
    for i in range(t):
        prod = Fraction(1)
        for s in range(e):
            prod *= per[(i + s) % t]
        if best is None or prod > best:
            best = prod
    return best


def mu_block_formula(d: int, m: int, beta: Sequence[Sequence[Fraction]], e: int, k: int) -> Fraction:
    """Harmonic combination of row-window maxima for the block construction:
    1 / sum_{q=1+max(0,e-mk)}^{k} 1/K_{q+d-k, v_q}."""
    n = (m + 1) * d
    if len(beta) != d or any(len(r) < m for r in beta):
        raise ValueError("need d rows of at least m entries")
    if not (1 + g_func(d, e, n) <= k <= min(d, e)):
        raise ValueError(f"k={k} outside [1+g, min(d,e)] for (d={d}, e={e}, n={n})")
    if not e < k * (m + 1):
        raise ValueError(f"constraint e < k(m+1) violated: e={e}, k={k}, m={m}")
    f = f_func(e, m * k)
    v = v_q(e, k)
    denom = Fraction(0)
    for q in range(1 + f, k + 1):
        row = [Fraction(x) for x in beta[q + d - k - 1][:m]]
        denom += 1 / k_max(row, v[q - 1])
    return 1 / denom


def roy_check(n: int, mus: Sequence[ExponentValue]) -> tuple[bool, str | None]:
    """Joint-spectrum consistency inequalities for the d = 1 full spectrum:
    mu_1 >= n/(n-1) and e mu_e/(mu_e+e-1) <= mu_{e-1} <= (n-e) mu_e/(n-e+1).

    Infinite entries follow the limit conventions (the lower bound tends to e,
    the upper bound to +infinity)."""
    if len(mus) != n - 1:
        raise ValueError(f"expected {n - 1} exponents, got {len(mus)}")
    mu = list(mus)
    if not mu[0].is_infinite and mu[0].value < Fraction(n, n - 1):
        return False, f"mu_1 = {mu[0]} < n/(n-1) = {Fraction(n, n - 1)}"
    for e in range(2, n):
        me, mprev = mu[e - 1], mu[e - 2]
        lower = ExponentValue.finite(e) if me.is_infinite else ExponentValue.finite(
            e * me.value / (me.value + e - 1)
        )
        if not lower <= mprev:
            return False, f"lower bound at e={e}: {lower} > mu_{e-1} = {mprev}"
        if not me.is_infinite:
            upper = Fraction(n - e) * me.value / (n - e + 1)
            if mprev.is_infinite or mprev.value > upper:
                return False, f"upper bound at e={e}: mu_{e-1} = {mprev} > {upper}"
    return True, None


# ---------------------------------------------------------------------------
# direct-sum combiner


def direct_sum_combine(
    per_subset_table: Callable[[frozenset, int], ExponentValue],
    d: int,
    e: int,
    k: int,
    g: int,
) -> tuple[ExponentValue, ExponentValue]:
    """Exponent of a direct sum of d lines at level k via its base subsets.

    per_subset_table(J, e) supplies the exponent of the sub-sum A_J at its
    own shifted level, for every J of size k + g. Returns the pair (direct
    maximum over size-(k+g) subsets, recursive one-element-removal value)
    after asserting the two agree.
    """
    base_size = k + g
    if base_size > d:
        raise ValueError("k + g exceeds the number of summands")
    full = frozenset(range(1, d + 1))
    # n is only needed through g(A_J, e) = max(0, #J + e - n_eff)
    n_eff = d + e - g if g > 0 else d + e

    subsets = [frozenset(c) for c in itertools.combinations(sorted(full), base_size)]
    direct = None
    for j_set in subsets:
        val = per_subset_table(j_set, e)
        direct = val if direct is None else direct.max(val)

    def g_of(j_set: frozenset) -> int:
        return max(0, len(j_set) + e - n_eff)

    memo: dict[frozenset, ExponentValue] = {}

    def recurse(j_set: frozenset) -> ExponentValue:
        if len(j_set) == base_size:
            return per_subset_table(j_set, e)
        if j_set in memo:
            return memo[j_set]
        best = None
        for j in sorted(j_set):
            sub = recurse(j_set - {j})
            best = sub if best is None else best.max(sub)
        memo[j_set] = best
        return best

    recursive = recurse(full)
    if direct != recursive:
        raise AssertionError(
            f"combiner routes disagree: direct {direct} vs recursive {recursive}"
        )
    return direct, recursive


# ---------------------------------------------------------------------------
# hypothesis validation for the block construction


@dataclass
class HypothesisCheck:
    name: str
    passed: bool
    detail: str


@dataclass
class BetaValidationReport:
    checks: list[HypothesisCheck]
    kki_passed: bool
    kki_failures: list[str]

    @property
    def strict_ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json_dict(self) -> dict:
        return {
            "strict_ok": self.strict_ok,
            "checks": [
                {"name": c.name, "passed": c.passed, "detail": c.detail} for c in self.checks
            ],
            "sufficient_condition_ok": self.kki_passed,
            "sufficient_condition_failures": self.kki_failures,
        }


def _pow_gt(lhs: Fraction, rhs_base: Fraction, rhs_exp: Fraction) -> bool:
    """Exact lhs > rhs_base**rhs_exp for positive rationals, rational exponent."""
    p, q = rhs_exp.numerator, rhs_exp.denominator
    if p >= 0:
        return lhs ** q > rhs_base ** p
    return lhs ** q * rhs_base ** (-p) > 1


def validate_beta_hypotheses(
    d: int,
    m: int,
    beta: Sequence[Sequence[Fraction]],
    c2: Fraction,
    check_sufficient: bool = True,
) -> BetaValidationReport:
    """Per-inequality report on the block-construction hypotheses.

    Rows may carry m entries (the core) or m+1 (core plus the chosen
    extension entry); a missing extension defaults to the row minimum. The
    strict hypotheses involve the irrational exponent c1 = (1+1/m)^(1/d) and
    are decided by certified outward-rounded comparisons; the separately
    reported sufficient condition is the exact rational inequality that the
    exponent computation actually needs.
    """
    c2 = Fraction(c2)
    rows = [[Fraction(x) for x in r] for r in beta]
    if len(rows) != d or any(len(r) not in (m, m + 1) for r in rows):
        raise ValueError("need d rows of m or m+1 entries")
    ext = [r[:] if len(r) == m + 1 else r + [min(r)] for r in rows]
    core = [r[:m] for r in rows]
    if c2 <= 1 or not (c2 ** d < 1 + Fraction(1, m)):
        raise ValueError("c2 must satisfy 1 < c2 < (1+1/m)^(1/d)")

    checks: list[HypothesisCheck] = []
    inner = 1 + Fraction(1, m)

    mins = [min(r) for r in core]
    maxs = [max(r) for r in core]

    thr_exp = c2 / (c2 - 1)
    ok = _pow_gt(mins[0], Fraction(3 * d), thr_exp)
    checks.append(
        HypothesisCheck(
            "row1_min_gt_threshold",
            ok,
            f"min(beta_1) = {mins[0]} vs (3d)^(c2/(c2-1)) = {3 * d}^{thr_exp}",
        )
    )
    ok = root_pow_gt(mins[0], inner, d, maxs[0], c2)
    checks.append(
        HypothesisCheck(
            "row1_min_c1_gt_max_c2",
            ok,
            f"min(beta_1)^c1 vs max(beta_1)^c2 with min={mins[0]}, max={maxs[0]}",
        )
    )
    for i in range(d - 1):
        ok = root_pow_gt(mins[i], inner, d, maxs[i + 1], Fraction(1))
        checks.append(
            HypothesisCheck(
                f"row{i+1}_min_c1_gt_row{i+2}_max",
                ok,
                f"{mins[i]}^c1 vs {maxs[i + 1]}",
            )
        )
        ok = _pow_gt(mins[i + 1], maxs[i], c2)
        checks.append(
            HypothesisCheck(
                f"row{i+2}_min_gt_row{i+1}_max_c2",
                ok,
                f"{mins[i + 1]} vs {maxs[i]}^{c2}",
            )
        )

    kki_passed = True
    failures: list[str] = []
    if check_sufficient:
        kki_passed, failures = sufficient_condition_report(d, m, ext)
    return BetaValidationReport(checks, kki_passed, failures)


def sufficient_condition_report(
    d: int, m: int, ext_rows: Sequence[Sequence[Fraction]]
) -> tuple[bool, list[str]]:
    """Exact evaluation of the inequality the exponent proof actually uses:

      (1 - 1/min_l beta_{j_q,l}) (1/sum_{l=1+f}^k 1/K_{j_l,v_l} - 1)
          - K_{j_q, v_q - 1} >= 0

    over all k, all admissible e, all strictly increasing row tuples and
    positions (the nondecreasing phrasing in the source statement is
    incompatible with the monotonicity step it relies on; every use has
    distinct rows).
    """
    failures: list[str] = []
    rows = [[Fraction(x) for x in r] for r in ext_rows]
    for k in range(1, d + 1):
        for e in range(1, k * (m + 1)):
            if e < k:
                continue
            f = f_func(e, m * k)
            v = v_q(e, k)
            for tup in itertools.combinations(range(1, d + 1), k):
                denom = Fraction(0)
                for pos in range(1 + f, k + 1):
                    denom += 1 / k_max(rows[tup[pos - 1] - 1], v[pos - 1])
                combined = 1 / denom
                for q in range(1, k + 1):
                    row_q = rows[tup[q - 1] - 1]
                    lhs = (1 - 1 / min(row_q)) * (combined - 1) - k_max(row_q, v[q - 1] - 1)
                    if lhs < 0:
                        failures.append(
                            f"k={k} e={e} rows={tup} q={q}: margin {lhs} < 0"
                        )
    return not failures, failures


# ---------------------------------------------------------------------------
# the beta -> gamma open-set map


def pad_schedule(gammas: Sequence[Fraction], threshold: Fraction) -> list[Fraction]:
    """Period-doubling pad: append len(gammas) copies of a value at most
    every gamma and at most the growth threshold.

    Over the padded period the cyclic window maxima equal the straight
    windows of the original list (wrap-around windows are dominated), which
    is exactly what makes the full-spectrum realization work.
    """
    gam = [Fraction(x) for x in gammas]
    pad = min(min(gam), Fraction(threshold))
    if pad <= 1:
        raise ValueError("padding value must exceed 1")
    return gam + [pad] * len(gam)


def gamma_from_beta(
    betas: Sequence[Fraction],
    d: int,
    n: int,
    relaxed_threshold: Fraction | None = None,
) -> tuple[list[Fraction], bool]:
    """Schedule gamma_j = beta_j / beta_{j-1} realizing first-angle exponents
    beta_e, plus membership of beta in the open set

        beta_1 > C_d,   C_d beta_i < beta_{i+1} < min_j beta_{i+1-j} beta_j.

    relaxed_threshold substitutes a rational bound for C_d when supplied.
    The returned list is the raw quotient schedule; realizing mu(.|e)_1 =
    beta_e requires the periodic completion pad_schedule(gammas, threshold)
    so that no cyclic window exceeds the straight ones.
    """
    b = [Fraction(x) for x in betas]
    if any(x <= 0 for x in b) or any(b[i] >= b[i + 1] for i in range(len(b) - 1)):
        raise ValueError("betas must be positive and increasing")

    def above_threshold(x: Fraction) -> bool:
        if relaxed_threshold is not None:
            return x > relaxed_threshold
        return ge_cd(x, d, n)

    def threshold_times_below(x: Fraction, y: Fraction) -> bool:
        # threshold * x < y; C_d is irrational so >= and > coincide on rationals
        if relaxed_threshold is not None:
            return relaxed_threshold * x < y
        return ge_cd(y / x, d, n)

    gammas = []
    prev = Fraction(1)
    for x in b:
        gammas.append(x / prev)
        prev = x
    in_o = above_threshold(b[0])
    for i in range(len(b) - 1):
        if not threshold_times_below(b[i], b[i + 1]):
            in_o = False
        # beta_{i+2} < min_{j=1..i+1} beta_{i+2-j} * beta_j   (1-based paper indices)
        upper = min(b[i + 1 - j] * b[j - 1] for j in range(1, i + 2))
        if not b[i + 1] < upper:
            in_o = False
    return gammas, in_o


# ---------------------------------------------------------------------------
# synchronized witness indices


def witness_ns(bc, j_set: Sequence[int], e: int, k: int, n_first: int) -> tuple[int, ...]:
    """Index vector (N_1 .. N_k) whose direct-sum approximants realize the
    supremum in the block exponent formula.

    bc supplies per-block data (duck-typed): bc.m, bc.e_value(i),
    bc.alpha_block(i, l) and the extended beta rows. Full blocks (positions
    <= f) get index 0; position f+1 passes n_first through; later positions
    follow the synchronization formula with floors evaluated exactly by
    rational power comparisons.
    """
    m = bc.m
    if len(j_set) != k:
        raise ValueError("#J must equal k")
    if sorted(j_set) != list(j_set) or len(set(j_set)) != k:
        raise ValueError("J must be strictly increasing")
    f = f_func(e, m * k)
    v = v_q(e, k)
    if n_first <= 0 or n_first % (2 * m) != 0:
        raise ValueError("N_{f+1} must be a positive multiple of 2m")
    out = [0] * k
    if f >= k:
        raise ValueError("no non-full lane to synchronize")
    out[f] = n_first

    lead_block = j_set[f]
    lead_v = v[f]
    e_lead = bc.e_value(lead_block)
    # alpha_{f+1, v_{f+1} - 1} in the lead block
    offset_alpha = bc.alpha_block(lead_block, lead_v - 1)
    y_base = e_lead ** (n_first // (2 * m)) * offset_alpha

    for pos in range(f + 2, k + 1):
        block = j_set[pos - 1]
        e_i = bc.e_value(block)
        l_i = bc.l_index(block, v[pos - 1])
        out[pos - 1] = 2 * m * floor_log(y_base, e_i) + l_i
    return tuple(out)
