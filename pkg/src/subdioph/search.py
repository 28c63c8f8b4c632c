"""Independent brute-force oracle: enumerate rational subspaces of bounded
height, measure their angles to a target, and estimate exponents from the
records.

The enumeration strategies and their completeness guarantees:

  * primitiveVectors (e = 1): primitive integer vectors up to sign; complete
    by definition of the height of a line.
  * dual (e = n-1): orthogonal complements of enumerated lines; complete
    because H(B) = H(B-perp) exactly.
  * boundedEntries (2 <= e <= n-2): integer bases with Euclidean norm at
    most c_e * sqrt(heightSqMax), saturated and deduplicated. For e <= 4 a
    basis attaining the successive minima exists (Minkowski reduction attains
    the minima in rank <= 4), and Minkowski's second theorem bounds
    lambda_e <= (2^e / omega_e) H since every lambda_i >= 1; with omega_e the
    unit-ball volume, c_e = 2^e/omega_e is at most 1, 13/10, 2, 13/4 for
    e = 1..4. For e >= 5 the enumeration is flagged as sampling.

Large line scans (n in {2, 3}, and their duals) run through a vectorized
float64 prefilter whose error margin is documented inline; every retained
candidate is re-evaluated in exact rational arithmetic, so records are exact
even though discards rely on the (generous) float bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, isqrt
from typing import Iterable, Sequence

import numpy as np

from .angles import PrecisionConfig, TruncatedTarget, first_angle_line_to_subspace, principal_sines, psi_from_omegas
from .exactlin import RationalSubspace, orth_complement, rank, saturate
from .numeric import PrecisionExhausted, fraction_to_sci, log_fraction

# 2^e / omega_e rounded up; omega_e = volume of the Euclidean unit e-ball
_MINKOWSKI_C = {1: Fraction(1), 2: Fraction(13, 10), 3: Fraction(2), 4: Fraction(13, 4)}


@dataclass(frozen=True)
class ScanConfig:
    n: int
    e: int
    height_sq_max: int
    j: int = 1
    strategy: str = "auto"  # auto|primitiveVectors|dual|boundedEntries|constructedFamily
    workers: int = 1
    seed: int = 0
    score_floor: float = 1.0
    keep_top: int = 64
    precision: PrecisionConfig = PrecisionConfig()


@dataclass
class ApproximationRecord:
    subspace: RationalSubspace
    height_sq: int
    psi_lo: Fraction
    psi_hi: Fraction
    score_lo: float
    score_hi: float
    label: str = ""  # family index for constructed families, else ""
    on_frontier: bool = False
    flagged: str = ""

    def plucker_key(self) -> tuple:
        return tuple(self.subspace.plucker.dense_colex())


# ---------------------------------------------------------------------------
# enumeration


def primitive_vectors(n: int, height_sq_max: int) -> list[tuple[int, ...]]:
    """All primitive integer vectors with norm^2 <= bound, first nonzero
    coordinate positive, ordered by (norm^2, lex)."""
    if n < 1:
        raise ValueError("n >= 1 required")
    out: list[tuple[int, ...]] = []
    r = isqrt(height_sq_max)

    def rec(prefix: list[int], remaining: int, budget: int, leading_zero: bool):
        if remaining == 0:
            if any(prefix) and math.gcd(*[abs(x) for x in prefix]) == 1:
                out.append(tuple(prefix))
            return
        lo = 0 if leading_zero else -isqrt(budget)
        for x in range(lo, isqrt(budget) + 1):
            rec(prefix + [x], remaining - 1, budget - x * x, leading_zero and x == 0)

    rec([], n, height_sq_max, True)
    out.sort(key=lambda v: (sum(x * x for x in v), v))
    return out


def enumerate_lines(n: int, height_sq_max: int) -> Iterable[RationalSubspace]:
    """Every rational line of squared height <= bound, exactly once."""
    if n < 2:
        raise ValueError("n >= 2 required")
    for v in primitive_vectors(n, height_sq_max):
        yield RationalSubspace.from_zbasis([v])


def enumeration_strategy(n: int, e: int, requested: str = "auto") -> tuple[str, bool]:
    """(strategy, complete) for the pair; sampling is flagged incomplete."""
    if not (1 <= e <= n - 1):
        raise ValueError("1 <= e <= n-1 required")
    if requested != "auto":
        complete = (
            (requested == "primitiveVectors" and e == 1)
            or (requested == "dual" and e == n - 1)
            or (requested == "boundedEntries" and e <= 4)
        )
        return requested, complete
    if e == 1:
        return "primitiveVectors", True
    if e == n - 1:
        return "dual", True
    return "boundedEntries", e <= 4


def enumerate_subspaces(
    n: int, e: int, height_sq_max: int, strategy: str = "auto"
) -> list[RationalSubspace]:
    """Complete, duplicate-free enumeration wherever the strategy table
    guarantees it (see module docstring); deterministic output order."""
    strat, complete = enumeration_strategy(n, e, strategy)
    if strat == "primitiveVectors":
        subs = list(enumerate_lines(n, height_sq_max))
    elif strat == "dual":
        subs = [orth_complement(line) for line in enumerate_lines(n, height_sq_max)]
    elif strat == "boundedEntries":
        bound_norm_sq = int(_MINKOWSKI_C.get(e, Fraction(4)) ** 2 * height_sq_max) + 1
        vecs = [v for v in primitive_vectors(n, bound_norm_sq)]
        seen = {}
        import itertools

        for combo in itertools.combinations(range(len(vecs)), e):
            rows = [vecs[i] for i in combo]
            if rank(rows) != e:
                continue
            b = saturate(rows)
            if b.height_sq <= height_sq_max:
                seen.setdefault(b.key(), b)
        subs = list(seen.values())
    else:
        raise ValueError(f"unknown strategy {strat!r}")
    subs = [b for b in subs if b.height_sq <= height_sq_max]
    subs.sort(key=lambda b: (b.height_sq, b.key()))
    return subs


# ---------------------------------------------------------------------------
# exact psi evaluation against a target


def _scale_to_int(vec: Sequence[Fraction]) -> tuple[int, ...]:
    """Clear denominators: the scaled integer vector spans the same line, and
    all-integer Gram arithmetic avoids per-operation gcd normalization on
    huge rationals."""
    den = 1
    for x in vec:
        den = den * x.denominator // gcd(den, x.denominator)
    return tuple(int(x * den) for x in vec)


def _psi_interval_line_target(
    target: TruncatedTarget, b: RationalSubspace
) -> tuple[Fraction, Fraction]:
    """Exact first angle to the truncated generator, widened by the rigorous
    tail shift (d = 1 only)."""
    y = _scale_to_int(tuple(Fraction(x) for x in target.generators[0]))
    sin_sq = first_angle_line_to_subspace(y, b)
    delta = target.generator_angle_shifts()[0]
    from .numeric import sqrt_lower, sqrt_upper

    lo = max(Fraction(0), sqrt_lower(sin_sq, 128) - delta)
    hi = min(Fraction(1), sqrt_upper(sin_sq, 128) + delta)
    return lo, hi


def psi_interval(target, b: RationalSubspace, j: int, cfg: PrecisionConfig) -> tuple[Fraction, Fraction, str]:
    """(lo, hi, flag) enclosure of psi_j(target, B); flag records exclusions
    (exact zero for rational targets) or non-rigorous widenings."""
    if isinstance(target, TruncatedTarget):
        if target.d == 1:
            lo, hi = _psi_interval_line_target(target, b)
            return lo, hi, ""
        from .angles import angle_interval_to_truncated_target

        iv, rigorous = angle_interval_to_truncated_target(target, b, j, cfg)
        return iv.lo, iv.hi, "" if rigorous else "non-rigorous-width"
    if isinstance(target, RationalSubspace):
        d, e, n = target.dim, b.dim, target.n
        g = max(0, d + e - n)
        stacked = list(target.basis) + list(b.basis)
        if rank(stacked) < d + e - (j - 1 + g):
            return Fraction(0), Fraction(0), "exact-zero"
        rep = principal_sines([[Fraction(x) for x in r] for r in target.basis], b.basis, cfg)
        psis = psi_from_omegas(rep, d, e, n)
        if not (1 <= j <= len(psis)):
            raise ValueError(f"psi index {j} out of range for (d={d}, e={e}, n={n})")
        iv = psis[j - 1]
        return iv.lo, iv.hi, ""
    raise TypeError(f"unsupported target type {type(target)!r}")


def _score_interval(height_sq: int, psi_lo: Fraction, psi_hi: Fraction) -> tuple[float, float]:
    log_h = log_fraction(height_sq) / 2
    if log_h <= 0:
        return 0.0, 0.0
    hi = math.inf if psi_lo == 0 else -log_fraction(psi_lo) / log_h
    lo = math.inf if psi_hi == 0 else -log_fraction(psi_hi) / log_h
    return lo, hi


# ---------------------------------------------------------------------------
# vectorized line prefilter
#
# Error budget (documented for the retention guarantee): with |Y_i| <= 2,
# |v_i| <= R and float64 eps = 2^-52, each cross-product component carries
# absolute error <= 4 R eps, so the computed sine omega = ||Y ^ v||/(|Y||v|)
# is within 4 sqrt(3) R eps / (|Y||v|) <= 7e-13 of the true value for
# R <= 10^3. Retention keeps omega_float <= 1.5 * thresh + 1e-9, a margin
# at least three orders wider than the float error, so no candidate whose
# exact sine is at or below the threshold is ever discarded.


def _canonical_primitive(vec: tuple[int, ...]) -> tuple[int, ...] | None:
    g = 0
    for x in vec:
        g = gcd(g, abs(x))
    if g == 0:
        return None
    vec = tuple(x // g for x in vec)
    for x in vec:
        if x > 0:
            return vec
        if x < 0:
            return tuple(-y for y in vec)
    return None


def _retention_mask(omega_sq: np.ndarray, r2: np.ndarray, floor: float, keep_top: int) -> np.ndarray:
    """Threshold passers, plus frontier candidates: the minimum-angle point
    of every eighth-octave height bin (so the reported Pareto frontier is
    complete up to a 2^(1/8) height resolution) and the keep_top globally
    smallest angles of the batch."""
    thresh = 1.5 * np.power(r2, -floor / 2.0) + 1e-9
    keep = omega_sq <= thresh * thresh
    if len(omega_sq) == 0:
        return keep
    bins = np.floor(np.log2(r2) * 8.0).astype(np.int64)
    bins -= bins.min()
    nbins = int(bins.max()) + 1
    bin_min = np.full(nbins, np.inf)
    np.minimum.at(bin_min, bins, omega_sq)
    keep |= omega_sq <= bin_min[bins]
    if keep_top:
        if len(omega_sq) > keep_top:
            part = np.argpartition(omega_sq, keep_top)[:keep_top]
            keep[part] = True
        else:
            keep[:] = True
    return keep


def _line_candidates_fast(
    y_float: np.ndarray,
    n: int,
    height_sq_max: int,
    floor: float,
    keep_top: int,
    x_range: tuple[int, int],
    numerator: str = "cross",
) -> set[tuple[int, ...]]:
    """Candidate primitive vectors in the slice range whose float angle
    clears the retention margin, plus per-slice frontier candidates.

    numerator "cross" filters on omega(Y, v) for line candidates; "dot"
    filters on |<Y, w>|/(|Y||w|), the first angle between Span(Y) and the
    hyperplane with normal w.
    """
    r = isqrt(height_sq_max)
    out: set[tuple[int, ...]] = set()
    y = y_float
    y_norm_sq = float(np.dot(y, y))
    if n == 2:
        xs = np.arange(x_range[0], x_range[1] + 1, dtype=np.int64)
        ys = np.arange(-r, r + 1, dtype=np.int64)
        vx, vy = np.meshgrid(xs, ys, indexing="ij")
        vx = vx.ravel()
        vy = vy.ravel()
        mask = (vx * vx + vy * vy <= height_sq_max) & ((vx > 0) | ((vx == 0) & (vy > 0)))
        vx, vy = vx[mask], vy[mask]
        if len(vx) == 0:
            return out
        r2 = (vx * vx + vy * vy).astype(np.float64)
        if numerator == "cross":
            num = y[0] * vy.astype(np.float64) - y[1] * vx.astype(np.float64)
        else:
            num = y[0] * vx.astype(np.float64) + y[1] * vy.astype(np.float64)
        omega_sq = num * num / (y_norm_sq * r2)
        keep = _retention_mask(omega_sq, r2, floor, keep_top)
        for i in np.nonzero(keep)[0]:
            c = _canonical_primitive((int(vx[i]), int(vy[i])))
            if c:
                out.add(c)
        return out

    if n != 3:
        raise ValueError("fast scan supports n in {2, 3}")
    base = np.arange(-r, r + 1, dtype=np.int64)
    gy, gz = np.meshgrid(base, base, indexing="ij")
    gy = gy.ravel()
    gz = gz.ravel()
    yz2 = gy * gy + gz * gz
    for x in range(x_range[0], x_range[1] + 1):
        budget = height_sq_max - x * x
        if budget < 0:
            continue
        mask = yz2 <= budget
        if x == 0:
            mask &= (gy > 0) | ((gy == 0) & (gz > 0))
        vy = gy[mask]
        vz = gz[mask]
        if len(vy) == 0:
            continue
        r2 = (x * x + yz2[mask]).astype(np.float64)
        fy = vy.astype(np.float64)
        fz = vz.astype(np.float64)
        if numerator == "cross":
            c1 = y[1] * fz - y[2] * fy
            c2 = y[2] * x - y[0] * fz
            c3 = y[0] * fy - y[1] * x
            num_sq = c1 * c1 + c2 * c2 + c3 * c3
        else:
            dot = y[0] * x + y[1] * fy + y[2] * fz
            num_sq = dot * dot
        omega_sq = num_sq / (y_norm_sq * r2)
        keep = _retention_mask(omega_sq, r2, floor, keep_top)
        for i in np.nonzero(keep)[0]:
            c = _canonical_primitive((x, int(vy[i]), int(vz[i])))
            if c:
                out.add(c)
    return out


def _target_y_float(target) -> np.ndarray:
    if isinstance(target, TruncatedTarget):
        return np.array([float(x) for x in target.generators[0]], dtype=np.float64)
    raise TypeError("fast scan needs a truncated line target")


def _fast_scan_ranges(height_sq_max: int, workers: int) -> list[tuple[int, int]]:
    r = isqrt(height_sq_max)
    chunks = max(1, workers * 4)
    step = max(1, (r + 1) // chunks + 1)
    return [(lo, min(r, lo + step - 1)) for lo in range(0, r + 1, step)]


def _run_fast_candidates(args):
    kind, y_list, n, bound, floor, keep_top, rng = args
    y_float = np.array(y_list, dtype=np.float64)
    numerator = "cross" if kind == "line" else "dot"
    return _line_candidates_fast(y_float, n, bound, floor, keep_top, rng, numerator)


def best_approx_scan(
    cfg: ScanConfig, target, construction=None, n_values: Sequence[int] | None = None
) -> list[ApproximationRecord]:
    """Records of the best approximations to the target among all rational
    subspaces of dimension e with squared height <= bound (or, with the
    constructedFamily strategy, among the supplied approximant family).

    Output: all records whose score interval clears the floor, plus the
    Pareto frontier of (H, psi) among evaluated candidates; deterministic
    order (score desc, then height asc, then Plucker lex). A candidate whose
    angle computation exhausts the precision budget is flagged and kept with
    the trivial interval rather than aborting the scan."""
    labels: dict[tuple, str] = {}
    use_fast_line = (
        cfg.strategy in ("auto", "primitiveVectors")
        and cfg.e == 1
        and cfg.n in (2, 3)
        and isinstance(target, TruncatedTarget)
        and target.d == 1
    )
    use_fast_dual = (
        cfg.strategy in ("auto", "dual")
        and cfg.e == cfg.n - 1
        and cfg.n == 3
        and isinstance(target, TruncatedTarget)
        and target.d == 1
    )
    candidates: list[RationalSubspace]
    if cfg.strategy == "constructedFamily":
        if construction is None or n_values is None:
            raise ValueError("constructedFamily strategy needs construction and n_values")
        candidates = []
        for n_val in n_values:
            b = construction.b_approx(n_val, cfg.e)
            if b.height_sq <= cfg.height_sq_max:
                candidates.append(b)
                labels[tuple(b.plucker.dense_colex())] = str(n_val)
    elif use_fast_line or use_fast_dual:
        kind = "line" if use_fast_line else "dual"
        y_list = [float(x) for x in target.generators[0]]
        ranges = _fast_scan_ranges(cfg.height_sq_max, cfg.workers)
        tasks = [
            (kind, y_list, cfg.n, cfg.height_sq_max, cfg.score_floor, cfg.keep_top, rng)
            for rng in ranges
        ]
        if cfg.workers > 1:
            import multiprocessing

            with multiprocessing.Pool(cfg.workers) as pool:
                chunks = pool.map(_run_fast_candidates, tasks)
        else:
            chunks = [_run_fast_candidates(t) for t in tasks]
        vecs: set[tuple[int, ...]] = set()
        for ch in chunks:
            vecs |= ch
        ordered = sorted(vecs, key=lambda v: (sum(x * x for x in v), v))
        if use_fast_line:
            candidates = [RationalSubspace.from_zbasis([v]) for v in ordered]
        else:
            candidates = [orth_complement(RationalSubspace.from_zbasis([v])) for v in ordered]
        candidates = [b for b in candidates if b.height_sq <= cfg.height_sq_max]
    else:
        candidates = enumerate_subspaces(cfg.n, cfg.e, cfg.height_sq_max, cfg.strategy)

    records: dict[tuple, ApproximationRecord] = {}
    for b in candidates:
        try:
            lo, hi, flag = psi_interval(target, b, cfg.j, cfg.precision)
        except PrecisionExhausted as exc:
            lo, hi, flag = Fraction(0), Fraction(1), f"precision-exhausted: {exc}"
        if flag == "exact-zero":
            continue  # the target contains this subspace's intersection exactly
        score_lo, score_hi = _score_interval(b.height_sq, lo, hi)
        rec = ApproximationRecord(
            b, b.height_sq, lo, hi, score_lo, score_hi,
            label=labels.get(tuple(b.plucker.dense_colex()), ""), flagged=flag,
        )
        records.setdefault(rec.plucker_key(), rec)

    recs = list(records.values())
    # exact Pareto frontier among evaluated candidates: increasing height,
    # strictly decreasing psi (compared by exact upper bounds)
    recs.sort(key=lambda r: (r.height_sq, r.psi_hi))
    best_psi: Fraction | None = None
    for r in recs:
        if best_psi is None or r.psi_hi < best_psi:
            r.on_frontier = True
            best_psi = r.psi_hi
    kept = [r for r in recs if r.on_frontier or r.score_lo >= cfg.score_floor]
    kept.sort(key=lambda r: (-r.score_lo, r.height_sq, r.plucker_key()))
    return kept


def family_records(
    construction, e: int, n_values: Sequence[int], level_margin: int = 0, cfg: PrecisionConfig = PrecisionConfig()
) -> list[ApproximationRecord]:
    """Records for the constructed approximant family B_{N,e}.

    Truncating the target at level max(N)+e+margin keeps the rigorous tail
    widening a factor theta^(alpha_{M+1}-alpha_M) below the measured angles,
    so even margin 0 leaves the score intervals effectively exact."""
    level = max(n_values) + e + level_margin
    target = construction.truncated_target(level)
    out = []
    for n_val in n_values:
        b = construction.b_approx(n_val, e)
        lo, hi, flag = psi_interval(target, b, 1, cfg)
        score_lo, score_hi = _score_interval(b.height_sq, lo, hi)
        out.append(
            ApproximationRecord(b, b.height_sq, lo, hi, score_lo, score_hi, label=str(n_val), flagged=flag)
        )
    return out


# ---------------------------------------------------------------------------
# estimates


def exponent_estimate(records: Sequence[ApproximationRecord], mode: str) -> tuple[float, float]:
    """frontierMax: the best score interval; familySlope: least-squares slope
    of (log H, -log psi) with interval propagation."""
    if len(records) < 2:
        raise ValueError("need at least two records")
    if mode == "frontierMax":
        return max(r.score_lo for r in records), max(r.score_hi for r in records)
    if mode != "familySlope":
        raise ValueError(f"unknown mode {mode!r}")
    xs = [log_fraction(r.height_sq) / 2 for r in records]
    if max(xs) == min(xs):
        raise ValueError("degenerate family: all heights equal")
    y_lo = []
    y_hi = []
    for r in records:
        if r.psi_lo == 0 or r.psi_hi == 0:
            raise ValueError("zero psi in family")
        y_lo.append(-log_fraction(r.psi_hi))
        y_hi.append(-log_fraction(r.psi_lo))
    xbar = sum(xs) / len(xs)
    sxx = sum((x - xbar) ** 2 for x in xs)
    lo = sum((x - xbar) * (yl if x >= xbar else yh) for x, yl, yh in zip(xs, y_lo, y_hi)) / sxx
    hi = sum((x - xbar) * (yh if x >= xbar else yl) for x, yl, yh in zip(xs, y_lo, y_hi)) / sxx
    return lo, hi


# ---------------------------------------------------------------------------
# reporting


CSV_HEADER = "N_or_rank,heightSq,log10_H,psi_lo,psi_hi,score_lo,score_hi,plucker"


def records_to_csv(records: Sequence[ApproximationRecord]) -> list[str]:
    lines = [CSV_HEADER]
    for rank_idx, r in enumerate(records):
        label = r.label if r.label else str(rank_idx)
        log10_h = log_fraction(r.height_sq) / (2 * math.log(10))
        plucker = " ".join(str(c) for c in r.subspace.plucker.dense_colex())
        lines.append(
            ",".join(
                [
                    label,
                    str(r.height_sq),
                    f"{log10_h:.12f}",
                    fraction_to_sci(r.psi_lo, round_up=False),
                    fraction_to_sci(r.psi_hi, round_up=True),
                    f"{r.score_lo:.9f}",
                    f"{r.score_hi:.9f}",
                    plucker,
                ]
            )
        )
    return lines
