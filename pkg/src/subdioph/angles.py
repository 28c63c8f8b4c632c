"""Angles between subspaces: the increasing sequence of principal sines
omega_1 <= ... <= omega_t and the shifted psi_j = omega_{j+g}.

Two computation routes coexist:

  * exact big-rational algebra wherever a single angle is a closed form
    (vector/vector, line/subspace, and the smallest-eigenvalue bounds used
    by the projection witness), and
  * multiprecision floating eigenvalues for full principal-sine lists,
    wrapped in intervals and cross-checked against exact trace and
    wedge-product identities, with precision doubling on failure.

Targets that are exact truncations of the transcendental constructions get
angle intervals widened by the rational tail bound; for targets of dimension
one this widening is rigorous, for higher dimension the multi-generator
constant is heuristic and the result is flagged accordingly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath

from .exactlin import RationalSubspace, rank, wedge
from .numeric import (
    PrecisionExhausted,
    count_roots_in,
    poly_eval,
    smallest_root_interval,
    sqrt_lower,
    sqrt_upper,
)

RatRows = Sequence[Sequence[Fraction]]


@dataclass(frozen=True)
class PrecisionConfig:
    working_bits: int = 256
    max_refinements: int = 8

    def __post_init__(self):
        if self.working_bits < 64:
            raise ValueError("working_bits >= 64 required")


@dataclass(frozen=True)
class AngleInterval:
    """Enclosure of one principal sine; exact entries carry the squared sine."""

    lo: Fraction
    hi: Fraction
    exact: bool = False
    sin_sq: Fraction | None = None

    def widened(self, delta: Fraction) -> "AngleInterval":
        return AngleInterval(max(Fraction(0), self.lo - delta), min(Fraction(1), self.hi + delta))


@dataclass
class AngleReport:
    n: int
    d: int
    e: int
    omegas: list[AngleInterval]
    rigorous: bool = True

    @property
    def g(self) -> int:
        return max(0, self.d + self.e - self.n)

    def psis(self) -> list[AngleInterval]:
        return psi_from_omegas(self, self.d, self.e, self.n)

    def to_json_dict(self) -> dict:
        from .numeric import fraction_to_sci

        return {
            "n": self.n,
            "d": self.d,
            "e": self.e,
            "g": self.g,
            "rigorous": self.rigorous,
            "omegas": [
                {
                    "lo": str(iv.lo),
                    "hi": str(iv.hi),
                    "lo_dec": fraction_to_sci(iv.lo, round_up=False),
                    "hi_dec": fraction_to_sci(iv.hi, round_up=True),
                    "exact": iv.exact,
                    "sin_sq": None if iv.sin_sq is None else str(iv.sin_sq),
                }
                for iv in self.omegas
            ],
        }


@dataclass(frozen=True)
class TruncatedTarget:
    """Exact rational truncation, at series level M, of a construction target."""

    n: int
    d: int
    generators: tuple[tuple[Fraction, ...], ...]
    level: int
    per_coordinate_tail_bound: Fraction
    # number of coordinates of each generator subject to the tail bound;
    # defaults to all n of them, which is always valid
    perturbed_counts: tuple[int, ...] | None = None

    def generator_angle_shifts(self) -> list[Fraction]:
        """Upper bound, per generator, on omega(Y, Y_M) <= ||Y - Y_M|| / ||Y_M||."""
        counts = self.perturbed_counts or tuple(self.n for _ in self.generators)
        out = []
        for gen, cnt in zip(self.generators, counts):
            norm_sq = sum(x * x for x in gen)
            bound_sq = cnt * self.per_coordinate_tail_bound ** 2 / norm_sq
            out.append(sqrt_upper(bound_sq))
        return out


# ---------------------------------------------------------------------------
# exact single-angle routes


def angle_of_vectors(x: Sequence, y: Sequence) -> Fraction:
    """Exact squared sine ||X ∧ Y||^2 / (||X||^2 ||Y||^2)."""
    xv = [Fraction(a) for a in x]
    yv = [Fraction(a) for a in y]
    nx = sum(a * a for a in xv)
    ny = sum(a * a for a in yv)
    if nx == 0 or ny == 0:
        raise ValueError("zero vector")
    w = wedge([xv, yv])
    return Fraction(w.norm_sq()) / (nx * ny)


def _gram(rows: RatRows) -> list[list[Fraction]]:
    return [[sum(Fraction(a) * Fraction(b) for a, b in zip(r1, r2)) for r2 in rows] for r1 in rows]


def _solve(mat: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction]:
    """Exact dense solve (Gaussian elimination with exact pivoting)."""
    k = len(mat)
    aug = [row[:] + [rhs[i]] for i, row in enumerate(mat)]
    for col in range(k):
        piv = next(i for i in range(col, k) if aug[i][col] != 0)
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [v * inv for v in aug[col]]
        for i in range(k):
            if i != col and aug[i][col] != 0:
                f = aug[i][col]
                aug[i] = [a - f * b for a, b in zip(aug[i], aug[col])]
    return [aug[i][k] for i in range(k)]


def _as_rows(b) -> list[list[Fraction]]:
    if isinstance(b, RationalSubspace):
        return [[Fraction(x) for x in row] for row in b.basis]
    return [[Fraction(x) for x in row] for row in b]


def first_angle_line_to_subspace(y: Sequence, b) -> Fraction:
    """Exact squared sine of the first angle between Span(Y) and B, via the
    Gram solve for the orthogonal projection of Y onto B."""
    yv = [Fraction(a) for a in y]
    ny = sum(a * a for a in yv)
    if ny == 0:
        raise ValueError("zero vector")
    rows = _as_rows(b)
    if not rows:
        raise ValueError("zero-dimensional subspace")
    g = _gram(rows)
    rhs = [sum(r[i] * yv[i] for i in range(len(yv))) for r in rows]
    coeffs = _solve(g, rhs)
    proj_norm_sq = sum(c * r for c, r in zip(coeffs, rhs))
    val = (ny - proj_norm_sq) / ny
    return val if val > 0 else Fraction(0)


# ---------------------------------------------------------------------------
# principal sines (multiprecision route with exact cross-checks)


def _mpf_matrix(rows: RatRows, prec: int) -> mpmath.matrix:
    with mpmath.workprec(prec):
        m = mpmath.matrix(len(rows), len(rows[0]))
        for i, r in enumerate(rows):
            for j, x in enumerate(r):
                f = Fraction(x)
                m[i, j] = mpmath.mpf(f.numerator) / mpmath.mpf(f.denominator)
        return m


def _mpf_to_fraction(x) -> Fraction:
    sign, man, exp, _ = x._mpf_
    if man == 0:
        return Fraction(0)
    v = Fraction(man, 1) * (Fraction(2) ** exp)
    return -v if sign else v


def _exact_cos_sq_checks(a_rows, b_rows) -> tuple[Fraction, Fraction]:
    """Exact (sum of cos^2, product of sin^2) for the principal angles,
    with the convention that the matrix side is the smaller subspace."""
    ga = _gram(a_rows)
    gb = _gram(b_rows)
    c = [[sum(ra[i] * rb[i] for i in range(len(ra))) for rb in b_rows] for ra in a_rows]
    # X = G_A^{-1} C  (d x e), Y = G_B^{-1} C^T (e x d); trace(P) = tr(X Y)
    d, e = len(a_rows), len(b_rows)
    x_cols = [_solve(ga, [c[i][j] for i in range(d)]) for j in range(e)]  # column j of X
    y_cols = [_solve(gb, [c[i][j] for j in range(e)]) for i in range(d)]  # column i of Y
    trace = sum(x_cols[j][i] * y_cols[i][j] for i in range(d) for j in range(e))
    wa = wedge(a_rows)
    wb = wedge(b_rows)
    wab = wa.wedge(wb)
    prod_sin_sq = Fraction(wab.norm_sq()) / (Fraction(wa.norm_sq()) * Fraction(wb.norm_sq()))
    return trace, prod_sin_sq


def principal_sines(a, b, cfg: PrecisionConfig = PrecisionConfig(), exact_shortcut: bool = True) -> AngleReport:
    """Intervals for the principal sines omega_1 <= ... <= omega_t.

    Multiprecision singular values of the product of orthonormalized bases,
    accepted only when the exact trace and wedge-product identities hold
    within the interval tolerance; precision doubles on failure up to
    cfg.max_refinements. Line-versus-subspace inputs are tightened to the
    exact closed form.
    """
    a_rows = _as_rows(a)
    b_rows = _as_rows(b)
    if not a_rows or not b_rows:
        raise ValueError("empty generator set")
    n = len(a_rows[0])
    if any(len(r) != n for r in a_rows + b_rows):
        raise ValueError("ambient dimension mismatch")
    d, e = len(a_rows), len(b_rows)
    if rank(a_rows) != d or rank(b_rows) != e:
        raise ValueError("rank-deficient generators")
    if d > e:
        a_rows, b_rows, d, e = b_rows, a_rows, e, d
    t = d
    g = max(0, d + e - n)

    trace, prod_sin_sq = _exact_cos_sq_checks(a_rows, b_rows)

    bits = cfg.working_bits
    last_err = None
    for _ in range(cfg.max_refinements + 1):
        tol = Fraction(1, 2 ** (bits // 2))
        with mpmath.workprec(bits + 32):
            ma = _mpf_matrix(a_rows, bits + 32).T
            mb = _mpf_matrix(b_rows, bits + 32).T
            qa, _ = mpmath.qr(ma)
            qb, _ = mpmath.qr(mb)
            qa = qa[:, 0:d]
            qb = qb[:, 0:e]
            svals = mpmath.svd_r(qa.T * qb, compute_uv=False)
            cos_sq = sorted((min(max(_mpf_to_fraction(s), Fraction(0)), Fraction(1)) ** 2 for s in svals), reverse=True)
        sin_sq = [1 - cs for cs in cos_sq]  # ascending
        sum_err = abs(sum(cos_sq) - trace)
        prod = Fraction(1)
        for s in sin_sq:
            prod *= s
        prod_err = abs(prod - prod_sin_sq)
        if sum_err <= tol * (t + 1) and prod_err <= tol * (t + 1):
            break
        last_err = (sum_err, prod_err)
        bits *= 2
    else:
        raise PrecisionExhausted(f"principal sine cross-checks failed: {last_err}")

    width = Fraction(1, 2 ** (cfg.working_bits // 2))
    for j in range(g):
        # dim(A ∩ B) >= d+e-n forces the first g sines to vanish exactly;
        # anything else is a computation failure, not a clamping matter
        if sin_sq[j] > width:
            raise PrecisionExhausted(
                f"forced-zero angle omega_{j+1} computed as {float(sin_sq[j])}"
            )
    omegas = []
    for j, ss in enumerate(sin_sq):
        w = ss * width + width ** 2
        lo_sq = max(Fraction(0), ss - w)
        hi_sq = min(Fraction(1), ss + w)
        if j < g:
            lo_sq = Fraction(0)  # forced zero angles
        omegas.append(
            AngleInterval(sqrt_lower(lo_sq, cfg.working_bits), sqrt_upper(hi_sq, cfg.working_bits))
        )

    report = AngleReport(n, d, e, omegas)
    if exact_shortcut and t == 1:
        exact_sq = first_angle_line_to_subspace(a_rows[0], b_rows)
        iv = report.omegas[0]
        lo = sqrt_lower(exact_sq, cfg.working_bits)
        hi = sqrt_upper(exact_sq, cfg.working_bits)
        if not (iv.lo <= hi and lo <= iv.hi):
            raise PrecisionExhausted("exact angle escaped the interval route")
        report.omegas[0] = AngleInterval(lo, hi, exact=True, sin_sq=exact_sq)
    return report


def psi_from_omegas(report: AngleReport, d: int, e: int, n: int) -> list[AngleInterval]:
    """psi_j = omega_{j+g}: drop the g forced-zero leading angles."""
    g = max(0, d + e - n)
    for j in range(g):
        if report.omegas[j].lo > 0:
            raise ValueError(f"forced-zero angle omega_{j+1} has positive lower bound")
    out = report.omegas[g:]
    if not out:
        raise ValueError("g-shifted index out of range")
    return out


# ---------------------------------------------------------------------------
# truncated targets


def angle_interval_to_truncated_target(
    target: TruncatedTarget,
    b,
    j: int,
    cfg: PrecisionConfig = PrecisionConfig(),
    resolution: Fraction | None = None,
) -> tuple[AngleInterval, bool]:
    """Enclosure of psi_j(A, B) where A is known only through an exact
    truncation of its generators.

    Returns (interval, rigorous). The perturbation budget sums the
    per-generator angle shifts; for d > 1 it is additionally scaled by the
    documented multi-generator constant n and flagged non-rigorous.
    """
    b_rows = _as_rows(b)
    e = len(b_rows)
    d = target.d
    n = target.n
    g = max(0, d + e - n)
    t = min(d, e)
    if not (1 <= j <= t - g):
        raise ValueError(f"psi index {j} out of range for (d={d}, e={e}, n={n})")

    shifts = target.generator_angle_shifts()
    delta = sum(shifts, Fraction(0))
    rigorous = d == 1
    if d > 1:
        delta *= n
    if resolution is not None and delta >= resolution:
        raise ValueError(
            f"truncation level {target.level} insufficient: perturbation {delta} >= resolution {resolution}"
        )

    report = principal_sines(target.generators, b_rows, cfg)
    psi = psi_from_omegas(report, d, e, n)[j - 1]
    return psi.widened(delta), rigorous


# ---------------------------------------------------------------------------
# block projection witness


def _char_poly_pencil(m_mat, g_mat) -> list[Fraction]:
    """Coefficients of det(M - x G), exact, via Lagrange interpolation."""
    k = len(m_mat)

    def det_at(x: Fraction) -> Fraction:
        a = [[m_mat[i][j] - x * g_mat[i][j] for j in range(k)] for i in range(k)]
        # exact fraction-free-ish elimination
        det = Fraction(1)
        for col in range(k):
            piv = next((i for i in range(col, k) if a[i][col] != 0), None)
            if piv is None:
                return Fraction(0)
            if piv != col:
                a[col], a[piv] = a[piv], a[col]
                det = -det
            det *= a[col][col]
            inv = 1 / a[col][col]
            for i in range(col + 1, k):
                if a[i][col] != 0:
                    f = a[i][col] * inv
                    a[i] = [u - f * v for u, v in zip(a[i], a[col])]
        return det

    xs = [Fraction(i) for i in range(k + 1)]
    ys = [det_at(x) for x in xs]
    # Newton's divided differences, expanded to monomial coefficients
    coeffs = [Fraction(0)] * (k + 1)
    divided = ys[:]
    for level in range(1, k + 1):
        for i in range(k, level - 1, -1):
            divided[i] = (divided[i] - divided[i - 1]) / (xs[i] - xs[i - level])
    basis = [Fraction(1)]
    for i in range(k + 1):
        for j, c in enumerate(basis):
            coeffs[j] += divided[i] * c
        new_basis = [Fraction(0)] * (len(basis) + 1)
        for j, c in enumerate(basis):
            new_basis[j] -= xs[i] * c
            new_basis[j + 1] += c
        basis = new_basis
    return coeffs


def block_projection_gram(rows: RatRows, killed_coords: set[int]) -> list[list[Fraction]]:
    proj = [[Fraction(0) if i in killed_coords else Fraction(x) for i, x in enumerate(r)] for r in rows]
    return _gram(proj)


def projection_lower_bound_witness(
    f_rows: RatRows,
    j_set: Sequence[int],
    block_sizes: Sequence[int],
    width: Fraction = Fraction(1, 2 ** 64),
) -> tuple[int, tuple[Fraction, Fraction]]:
    """Find the block index j in J maximizing min_X ||p̂_j(X)||^2 / ||X||^2
    over X in F, where p̂_j kills coordinate block j.

    Returns (j, (lo, hi)) with a certified enclosure of the max-min ratio.
    Requires dim F < #J, the hypothesis under which the ratio is guaranteed
    to be at least 1/(n^2+1).
    """
    rows = _as_rows(f_rows)
    if rank(rows) >= len(j_set):
        raise ValueError("witness requires dim F < #J")
    offsets = []
    pos = 0
    for s in block_sizes:
        offsets.append((pos, pos + s))
        pos += s
    n = pos
    if any(len(r) != n for r in rows):
        raise ValueError("block sizes do not match ambient dimension")

    g_mat = _gram(rows)
    best: tuple[Fraction, Fraction] | None = None
    best_j = None
    for j in j_set:
        lo_c, hi_c = offsets[j - 1]
        killed = set(range(lo_c, hi_c))
        m_mat = block_projection_gram(rows, killed)
        if len(rows) == 1:
            v = m_mat[0][0] / g_mat[0][0]
            enc = (v, v)
        else:
            poly = _char_poly_pencil(m_mat, g_mat)
            enc = smallest_root_interval(poly, Fraction(0), Fraction(1), width)
            if enc is None:
                enc = (Fraction(1), Fraction(1))  # no eigenvalue below 1
        if best is None or enc[0] > best[0]:
            best = enc
            best_j = j
    assert best is not None and best_j is not None
    return best_j, best


def min_ratio_certified_at_least(
    f_rows: RatRows, j: int, block_sizes: Sequence[int], threshold: Fraction
) -> bool:
    """Certified check that min_X ||p̂_j(X)||^2/||X||^2 >= threshold, via a
    Sturm count of pencil eigenvalues strictly below the threshold."""
    rows = _as_rows(f_rows)
    offsets = []
    pos = 0
    for s in block_sizes:
        offsets.append((pos, pos + s))
        pos += s
    lo_c, hi_c = offsets[j - 1]
    m_mat = block_projection_gram(rows, set(range(lo_c, hi_c)))
    g_mat = _gram(rows)
    if len(rows) == 1:
        return m_mat[0][0] / g_mat[0][0] >= threshold
    poly = _char_poly_pencil(m_mat, g_mat)
    # pencil eigenvalues are >= 0 and det(M + G) != 0, so -1 is a safe endpoint
    below = count_roots_in(poly, Fraction(-1), threshold)
    if poly_eval(poly, threshold) == 0:
        return below == 1  # the only root up to threshold is threshold itself
    return below == 0
