"""Targets with prescribed approximation exponents.

Three families, all driven by a multiplicative growth schedule
alpha_{k+1} = gamma_{k+1} alpha_k and a two-valued digit family:

  * lines: Y = (1, sigma_0, ..., sigma_{n-2}) with lacunary series sigma_j,
    truncated to integer vectors X_N and approximant subspaces B_{N,e}
    spanned by e consecutive truncations;
  * block sums: d pairwise-orthogonal copies of the line construction living
    in coordinate blocks of size m+1, approximated by direct sums of
    per-block approximants;
  * recursive sums: a line at lane count n-d stacked on lines at lane counts
    n-d+1 .. n-1 with constant schedules, giving the triangular generator
    shape of the induction.

Schedules are restricted to rationals so every floor(alpha_k) is exact; the
series digits come from a seeded deterministic generator (the algebraic
independence the theory asks of them is an assumption, not a certificate).
"""

from __future__ import annotations

import hashlib
import threading
from fractions import Fraction
from typing import Sequence

from .angles import TruncatedTarget
from .exactlin import IntVector, RationalSubspace
from .exponents import (
    BetaValidationReport,
    ExponentTable,
    ExponentValue,
    g_func,
    k_max_argmin_window,
    mu_block_formula,
    mu_line_formula,
    v_q,
    validate_beta_hypotheses,
)
from .numeric import cd_enclosure, ge_c1, ge_cd

DEFAULT_FLOOR_CAP = 10 ** 6


class ConstructionError(ValueError):
    """Parameter validation failure (strict-mode threshold, bad schedule...)."""


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    i = 2
    while i * i <= p:
        if p % i == 0:
            return False
        i += 1
    return True


# ---------------------------------------------------------------------------
# growth schedules


class GrowthSchedule:
    """Periodic rational schedule gamma with alpha_0 = 1 and
    alpha_{k+1} = gamma_{k+1} alpha_k; floors are exact.

    Memoization is lock-protected so shared instances are safe for
    concurrent readers.
    """

    def __init__(self, gammas: Sequence[Fraction], theta: int, floor_cap: int = DEFAULT_FLOOR_CAP):
        self.gammas = tuple(Fraction(x) for x in gammas)
        if not self.gammas or any(x <= 1 for x in self.gammas):
            raise ConstructionError("gamma entries must be rationals > 1")
        if not is_prime(theta) or theta < 5:
            raise ConstructionError("theta must be a prime >= 5")
        self.theta = theta
        self.floor_cap = floor_cap
        self.period = len(self.gammas)
        self._alphas = [Fraction(1)]
        self._lock = threading.Lock()

    def gamma(self, k: int) -> Fraction:
        if k < 1:
            raise ValueError("gamma is 1-indexed")
        return self.gammas[(k - 1) % self.period]

    def alpha(self, k: int) -> Fraction:
        if k < 0:
            raise ValueError("alpha index must be >= 0")
        with self._lock:
            while len(self._alphas) <= k:
                nxt = self._alphas[-1] * self.gamma(len(self._alphas))
                self._alphas.append(nxt)
            return self._alphas[k]

    def floor_alpha(self, k: int) -> int:
        a = self.alpha(k)
        fl = a.numerator // a.denominator
        if fl > self.floor_cap:
            raise ConstructionError(
                f"floor(alpha_{k}) = {fl} exceeds cap {self.floor_cap}; raise floor_cap to proceed"
            )
        return fl


def alpha_sequence(gamma: Sequence[Fraction], t: int | None, k: int) -> list[tuple[Fraction, int]]:
    """Exact (alpha_i, floor(alpha_i)) for i = 0..k; t is the period (defaults
    to len(gamma))."""
    per = [Fraction(x) for x in gamma]
    if t is not None:
        per = per[:t]
    sched = GrowthSchedule(per, theta=5, floor_cap=10 ** 9)
    return [(sched.alpha(i), sched.floor_alpha(i)) for i in range(k + 1)]


# ---------------------------------------------------------------------------
# digit families


class DigitFamily:
    """Digits u_k in {1, 2} on lane phi(k) = k mod laneCount, zero elsewhere.

    Values are derived per-index from a keyed hash, so they are deterministic
    under the seed and independent of access order or platform.
    """

    def __init__(self, lane_count: int, seed: int, override: Sequence[int] | None = None):
        if lane_count < 1:
            raise ConstructionError("lane_count >= 1 required")
        self.lane_count = lane_count
        self.seed = seed & 0xFFFFFFFFFFFFFFFF
        self.override = tuple(override) if override is not None else None
        if self.override is not None and any(v not in (1, 2) for v in self.override):
            raise ConstructionError("override digits must be in {1, 2}")

    def phi(self, k: int) -> int:
        return k % self.lane_count

    def value(self, k: int) -> int:
        """The nonzero digit at index k (it sits on lane phi(k))."""
        if self.override is not None and k < len(self.override):
            return self.override[k]
        h = hashlib.blake2b(
            f"{self.seed}:{k}".encode(), digest_size=8
        ).digest()
        return 1 + (h[0] & 1)

    def digit(self, j: int, k: int) -> int:
        return self.value(k) if self.phi(k) == j else 0

    def transcript(self, up_to: int) -> list[int]:
        return [self.value(k) for k in range(up_to + 1)]


def digit_family(lane_count: int, seed: int, k: int = 0) -> DigitFamily:
    """Deterministic digit family; `k` is only a hint of how far it will be
    read (values are lazy either way)."""
    return DigitFamily(lane_count, seed)


# ---------------------------------------------------------------------------
# the d = 1 line construction


class LineConstruction:
    """Line target in R^n with lacunary-series coordinates, plus its integer
    truncations X_N and approximant subspaces B_{N,e}."""

    def __init__(self, n: int, schedule: GrowthSchedule, digits: DigitFamily, mode: str = "strict"):
        if n < 2:
            raise ConstructionError("n >= 2 required")
        if digits.lane_count != n - 1:
            raise ConstructionError("digit family must have n-1 lanes")
        self.n = n
        self.schedule = schedule
        self.digits = digits
        self.mode = mode

    @property
    def theta(self) -> int:
        return self.schedule.theta

    def sigma_trunc(self, j: int, big_n: int) -> Fraction:
        """sigma_{j,N}: the lane-j series truncated at index N, exact."""
        if not (0 <= j < self.n - 1):
            raise ValueError("lane out of range")
        th = self.theta
        total = Fraction(0)
        for k in range(big_n + 1):
            if self.digits.phi(k) == j:
                total += Fraction(self.digits.value(k), th ** self.schedule.floor_alpha(k))
        return total

    def x_vector(self, big_n: int) -> IntVector:
        """X_N = theta^floor(alpha_N) (1, sigma_{0,N}, ..., sigma_{n-2,N}),
        integral because floor(alpha) is nondecreasing."""
        th = self.theta
        fn = self.schedule.floor_alpha(big_n)
        coords = [th ** fn]
        for j in range(self.n - 1):
            acc = 0
            for k in range(big_n + 1):
                if self.digits.phi(k) == j:
                    acc += self.digits.value(k) * th ** (fn - self.schedule.floor_alpha(k))
            coords.append(acc)
        return tuple(coords)

    def y_trunc(self, level: int) -> tuple[Fraction, ...]:
        return (Fraction(1),) + tuple(self.sigma_trunc(j, level) for j in range(self.n - 1))

    def v_unit(self, k: int) -> IntVector:
        """The canonical basis vector carrying the digit at index k."""
        lane = self.digits.phi(k)
        return tuple(1 if i == lane + 1 else 0 for i in range(self.n))

    def claimed_zbasis(self, big_n: int, e: int) -> list[IntVector]:
        if not (1 <= e <= self.n - 1):
            raise ConstructionError("1 <= e <= n-1 required for the claimed basis")
        return [self.x_vector(big_n)] + [self.v_unit(big_n + i) for i in range(1, e)]

    def b_approx(self, big_n: int, e: int) -> RationalSubspace:
        """B_{N,e} with the claimed Z-basis {X_N, v_{N+1}, ..., v_{N+e-1}}."""
        return RationalSubspace.from_zbasis(self.claimed_zbasis(big_n, e))

    def spanning_xs(self, big_n: int, e: int) -> list[IntVector]:
        return [self.x_vector(big_n + i) for i in range(e)]

    def tail_bound(self, level: int) -> Fraction:
        """Per-coordinate bound on |sigma_j - sigma_{j,M}|:
        2 theta^2/(theta-1) * theta^(-floor(alpha_{M+1}))."""
        th = self.theta
        return Fraction(2 * th * th, th - 1) / Fraction(th) ** self.schedule.floor_alpha(level + 1)

    def truncated_target(self, level: int) -> TruncatedTarget:
        return TruncatedTarget(
            n=self.n,
            d=1,
            generators=(self.y_trunc(level),),
            level=level,
            per_coordinate_tail_bound=self.tail_bound(level),
            perturbed_counts=(self.n - 1,),
        )

    def predicted_mu(self, e: int) -> Fraction:
        return mu_line_formula(self.schedule.gammas, e)

    def best_window_offsets(self, e: int) -> list[int]:
        """Offsets i mod T whose window product achieves the predicted mu;
        the family {B_{N,e} : N = i mod T} realizes the supremum."""
        per = self.schedule.gammas
        t = len(per)
        best = self.predicted_mu(e)
        out = []
        for i in range(t):
            prod = Fraction(1)
            for s in range(e):
                prod *= per[(i + s) % t]
            if prod == best:
                out.append(i)
        return out

    def to_json_dict(self, transcript_up_to: int = 32) -> dict:
        return {
            "kind": "line",
            "n": self.n,
            "theta": self.theta,
            "mode": self.mode,
            "gamma": [str(x) for x in self.schedule.gammas],
            "seed": self.digits.seed,
            "digit_transcript": self.digits.transcript(transcript_up_to),
            "predicted_mu": {
                str(e): str(self.predicted_mu(e)) for e in range(1, self.n)
            },
        }


def build_line(
    n: int,
    gamma: Sequence[Fraction],
    theta: int = 5,
    seed: int = 0,
    mode: str = "strict",
    floor_cap: int = DEFAULT_FLOOR_CAP,
    digit_override: Sequence[int] | None = None,
) -> LineConstruction:
    """Line construction with validated schedule.

    Strict mode enforces gamma_i >= C_1 = 2 + (sqrt(5)-1)/2 through the exact
    predicate; relaxed mode accepts any gamma > 2 and is meant for empirical
    slope experiments only.
    """
    gam = [Fraction(x) for x in gamma]
    if mode == "strict":
        for x in gam:
            if not ge_c1(x):
                raise ConstructionError(f"gamma entry {x} below C_1 = (3+sqrt(5))/2 in strict mode")
    elif mode == "relaxed":
        if any(x <= 2 for x in gam):
            raise ConstructionError("relaxed mode still requires gamma > 2")
    else:
        raise ConstructionError(f"unknown mode {mode!r}")
    sched = GrowthSchedule(gam, theta, floor_cap)
    digits = DigitFamily(n - 1, seed, override=digit_override)
    return LineConstruction(n, sched, digits, mode)


# ---------------------------------------------------------------------------
# block construction


class BlockConstruction:
    """d orthogonal per-block lines in R^(d(m+1)) with row schedules beta.

    Row i is extended by beta_{i,m+1} (default: the row minimum) and repeated
    with period 2m, so each block carries a valid periodic line construction.
    """

    def __init__(
        self,
        d: int,
        m: int,
        beta_core: Sequence[Sequence[Fraction]],
        beta_ext: Sequence[Fraction],
        theta: int,
        seed: int,
        mode: str,
        c2: Fraction,
        validation: BetaValidationReport,
        floor_cap: int = DEFAULT_FLOOR_CAP,
    ):
        self.d = d
        self.m = m
        self.n = (m + 1) * d
        self.beta_core = tuple(tuple(Fraction(x) for x in row) for row in beta_core)
        self.beta_ext = tuple(Fraction(x) for x in beta_ext)
        self.theta = theta
        self.seed = seed
        self.mode = mode
        self.c2 = Fraction(c2)
        self.validation = validation
        self.lines: list[LineConstruction] = []
        for i in range(d):
            period = list(self.beta_core[i]) + [self.beta_ext[i]] * m  # length 2m
            sched = GrowthSchedule(period, theta, floor_cap)
            self.lines.append(
                LineConstruction(m + 1, sched, DigitFamily(m, seed + i + 1), mode)
            )

    # -- embedding ---------------------------------------------------------

    def block_offset(self, i: int) -> int:
        if not (1 <= i <= self.d):
            raise ValueError("block index out of range")
        return (i - 1) * (self.m + 1)

    def embed(self, vec: Sequence, i: int) -> tuple:
        off = self.block_offset(i)
        out = [0] * self.n
        for t, x in enumerate(vec):
            out[off + t] = x
        return tuple(out)

    def x_vector(self, big_n: int, i: int) -> IntVector:
        return self.embed(self.lines[i - 1].x_vector(big_n), i)

    def extended_row(self, i: int) -> list[Fraction]:
        return list(self.beta_core[i - 1]) + [self.beta_ext[i - 1]]

    # -- exponent-formula plumbing (duck-typed by exponents.witness_ns) ----

    def e_value(self, i: int) -> Fraction:
        """E_i = beta_{i,1} ... beta_{i,m} * beta_{i,m+1}^m."""
        prod = Fraction(1)
        for x in self.beta_core[i - 1]:
            prod *= x
        return prod * self.beta_ext[i - 1] ** self.m

    def alpha_block(self, i: int, ell: int) -> Fraction:
        return self.lines[i - 1].schedule.alpha(ell)

    def l_index(self, i: int, v: int) -> int:
        return k_max_argmin_window(self.beta_core[i - 1], v)

    # -- approximants -------------------------------------------------------

    def c_approx(self, j_set: Sequence[int], e: int, n_vec: Sequence[int]) -> RationalSubspace:
        """C^J_N: the direct sum over positions q of the per-block
        approximant of dimension v_q; positions with v_q = m+1 collapse to
        the full coordinate block."""
        k = len(j_set)
        if len(n_vec) != k:
            raise ValueError("Nvec length must equal #J")
        if sorted(set(j_set)) != list(j_set):
            raise ValueError("J must be strictly increasing")
        if not (k <= e < k * (self.m + 1)):
            raise ValueError("e must satisfy k <= e < k(m+1)")
        v = v_q(e, k)
        rows: list[IntVector] = []
        for pos, block in enumerate(j_set):
            vq = v[pos]
            if vq == self.m + 1:
                off = self.block_offset(block)
                for t in range(self.m + 1):
                    rows.append(tuple(1 if c == off + t else 0 for c in range(self.n)))
            else:
                for row in self.lines[block - 1].claimed_zbasis(n_vec[pos], vq):
                    rows.append(self.embed(row, block))
        return RationalSubspace.from_zbasis(rows)

    def predicted_mu(self, e: int, k: int) -> Fraction:
        return mu_block_formula(self.d, self.m, self.beta_core, e, k)

    def exponent_table(self) -> ExponentTable:
        table = ExponentTable(self.n, self.d)
        for e in range(1, self.n):
            g = g_func(self.d, e, self.n)
            for k in range(1 + g, min(self.d, e) + 1):
                if e < k * (self.m + 1):
                    table.set(e, k - g, ExponentValue.finite(self.predicted_mu(e, k)))
        return table

    def truncated_target(self, level: int) -> TruncatedTarget:
        gens = tuple(
            tuple(Fraction(x) for x in self.embed(self.lines[i].y_trunc(level), i + 1))
            for i in range(self.d)
        )
        tail = max(line.tail_bound(level) for line in self.lines)
        return TruncatedTarget(
            n=self.n,
            d=self.d,
            generators=gens,
            level=level,
            per_coordinate_tail_bound=tail,
            perturbed_counts=tuple(self.m for _ in range(self.d)),
        )

    def to_json_dict(self, transcript_up_to: int = 32) -> dict:
        return {
            "kind": "blocks",
            "d": self.d,
            "m": self.m,
            "n": self.n,
            "theta": self.theta,
            "mode": self.mode,
            "c2": str(self.c2),
            "beta": [[str(x) for x in row] for row in self.beta_core],
            "beta_ext": [str(x) for x in self.beta_ext],
            "seed": self.seed,
            "digit_transcripts": [
                line.digits.transcript(transcript_up_to) for line in self.lines
            ],
            "validation": self.validation.to_json_dict(),
            "predicted": self.exponent_table().to_json_dict(),
        }


def default_c2(d: int, m: int) -> Fraction:
    """A rational strictly inside (1, (1+1/m)^(1/d)); the bound
    (1 + 1/(2md))^d < 1 + 1/(2m-1) <= 1 + 1/m keeps it valid for all m, d."""
    return 1 + Fraction(1, 2 * m * d)


def build_blocks(
    d: int,
    m: int,
    beta: Sequence[Sequence[Fraction]],
    theta: int = 5,
    seed: int = 0,
    mode: str = "strict",
    c2: Fraction | None = None,
    beta_ext: Sequence[Fraction] | None = None,
    floor_cap: int = DEFAULT_FLOOR_CAP,
) -> BlockConstruction:
    """Block construction over d rows of m rational growth factors.

    Strict mode requires the full hypothesis set to validate (certified
    comparisons for the irrational-exponent inequalities); relaxed mode
    records the report and only insists every factor exceeds 2 so the
    per-block schedules are legal.
    """
    rows = [[Fraction(x) for x in r] for r in beta]
    if len(rows) != d or any(len(r) != m for r in rows):
        raise ConstructionError(f"beta must be {d} rows of {m} entries")
    c2 = default_c2(d, m) if c2 is None else Fraction(c2)
    ext = [min(r) for r in rows] if beta_ext is None else [Fraction(x) for x in beta_ext]
    if len(ext) != d or any(not (0 < ext[i] <= min(rows[i])) for i in range(d)):
        raise ConstructionError("beta_ext must be positive and at most each row minimum")

    report = validate_beta_hypotheses(d, m, [rows[i] + [ext[i]] for i in range(d)], c2)
    if mode == "strict":
        if not report.strict_ok:
            failed = [c.name for c in report.checks if not c.passed]
            raise ConstructionError(f"strict hypothesis validation failed: {failed}")
        if not report.kki_passed:
            raise ConstructionError("sufficient condition failed despite strict hypotheses")
    elif mode == "relaxed":
        if any(x <= 2 for r in rows for x in r):
            raise ConstructionError("relaxed mode still requires beta > 2")
    else:
        raise ConstructionError(f"unknown mode {mode!r}")
    return BlockConstruction(d, m, rows, ext, theta, seed, mode, c2, report, floor_cap)


# ---------------------------------------------------------------------------
# recursive construction


class RecursiveConstruction:
    """Y_1 from the line construction at lane count n-d, stacked over lines
    at lane counts n-d+1, ..., n-1 with constant schedules, reproducing the
    triangular generator pattern of the induction."""

    def __init__(
        self,
        n: int,
        d: int,
        lines: list[LineConstruction],
        gamma: tuple[Fraction, ...],
        proxies: tuple[Fraction, ...],
        mode: str,
        level: int,
    ):
        self.n = n
        self.d = d
        self.lines = lines  # index j-1 holds the level-j line (lane count n-d+j-1)
        self.gamma = gamma
        self.proxies = proxies
        self.mode = mode
        self.level = level

    def lane_count(self, j: int) -> int:
        return self.n - self.d + j - 1

    def generator_trunc(self, j: int, level: int | None = None) -> tuple[Fraction, ...]:
        """Y_j truncated: leading 1, d-j zeros, then the lane coordinates."""
        level = self.level if level is None else level
        sub = self.lines[j - 1].y_trunc(level)
        out = [Fraction(0)] * self.n
        out[0] = Fraction(1)
        start = self.d - j + 1
        for t, x in enumerate(sub[1:]):
            out[start + t] = x
        return tuple(out)

    def truncated_target(self, level: int | None = None) -> TruncatedTarget:
        level = self.level if level is None else level
        gens = tuple(self.generator_trunc(j, level) for j in range(1, self.d + 1))
        tail = max(line.tail_bound(level) for line in self.lines)
        return TruncatedTarget(
            n=self.n,
            d=self.d,
            generators=gens,
            level=level,
            per_coordinate_tail_bound=tail,
            perturbed_counts=tuple(self.lane_count(j) for j in range(1, self.d + 1)),
        )

    def predicted_mu(self, e: int) -> Fraction:
        if not (1 <= e <= self.n - self.d):
            raise ValueError("prediction available for 1 <= e <= n-d only")
        return mu_line_formula(self.gamma, e)

    def to_json_dict(self, transcript_up_to: int = 32) -> dict:
        return {
            "kind": "recursive",
            "n": self.n,
            "d": self.d,
            "mode": self.mode,
            "gamma": [str(x) for x in self.gamma],
            "proxies": [str(x) for x in self.proxies],
            "truncation_level": self.level,
            "threshold_ladder": cd_ladder_report(self.n, self.d),
            "digit_transcripts": [
                line.digits.transcript(transcript_up_to) for line in self.lines
            ],
            "predicted_mu": {
                str(e): str(self.predicted_mu(e)) for e in range(1, self.n - self.d + 1)
            },
        }


def build_recursive(
    n: int,
    d: int,
    gamma: Sequence[Fraction],
    theta: int = 5,
    seed: int = 0,
    level: int = 4,
    mode: str = "relaxed",
    proxies: Sequence[Fraction] | None = None,
    floor_cap: int = DEFAULT_FLOOR_CAP,
) -> RecursiveConstruction:
    """Nested construction of depth d; `level` is the truncation level at
    which all generators are materialized.

    Strict mode checks gamma >= C_d and each constant proxy >= C_{d-j+1} with
    the exact enclosure predicates (these thresholds are doubly exponential,
    so strict instances are formula-level objects, not numeric test beds);
    relaxed mode takes proxies > 2 for empirical slope work.
    """
    if not (1 <= d <= n - 1):
        raise ConstructionError("1 <= d <= n-1 required")
    gam = tuple(Fraction(x) for x in gamma)
    if proxies is None:
        prox = tuple(Fraction(3) for _ in range(max(0, d - 1)))
    else:
        prox = tuple(Fraction(x) for x in proxies)
    if len(prox) != d - 1:
        raise ConstructionError("need d-1 proxy schedules for the deeper levels")
    if mode == "strict":
        for x in gam:
            if not ge_cd(x, d, n):
                raise ConstructionError(f"gamma entry {x} below C_{d} in strict mode")
        for j in range(2, d + 1):
            if not ge_cd(prox[j - 2], d - j + 1, n):
                raise ConstructionError(f"proxy for level {j} below C_{d - j + 1}")
    elif mode == "relaxed":
        if any(x <= 2 for x in gam) or any(x <= 2 for x in prox):
            raise ConstructionError("relaxed mode still requires schedules > 2")
    else:
        raise ConstructionError(f"unknown mode {mode!r}")

    lines = []
    for j in range(1, d + 1):
        lanes = n - d + j - 1
        sched_vals = gam if j == 1 else (prox[j - 2],)
        sched = GrowthSchedule(sched_vals, theta, floor_cap)
        lines.append(LineConstruction(lanes + 1, sched, DigitFamily(lanes, seed + 101 * j), mode))
    return RecursiveConstruction(n, d, lines, gam, prox, mode, level)


def cd_ladder_report(n: int, d: int, bits: int = 96) -> dict:
    """Enclosures of C_1..C_d for documentation and validation messages."""
    from .numeric import fraction_to_sci

    out = {}
    for i in range(1, d + 1):
        lo, hi = cd_enclosure(i, n, bits)
        out[f"C_{i}"] = {
            "lo": fraction_to_sci(lo, round_up=False),
            "hi": fraction_to_sci(hi, round_up=True),
        }
    return out
