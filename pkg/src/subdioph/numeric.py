"""Shared exact-arithmetic helpers: rational square-root enclosures, logs of
big rationals, exact floor-of-log, threshold predicates against the irrational
construction constants, and certified comparisons of powers with irrational
exponents.

Everything here either returns an exact answer or an enclosure with outward
rounding; nothing silently falls back to floats.
"""

from __future__ import annotations

import math
from fractions import Fraction
from math import isqrt

import mpmath


class PrecisionExhausted(Exception):
    """An interval computation could not reach the requested resolution."""


class AmbiguousComparison(Exception):
    """A certified comparison stayed undecided at maximum precision."""


# ---------------------------------------------------------------------------
# rational square roots


def sqrt_lower(x: Fraction, bits: int = 64) -> Fraction:
    """Dyadic rational r <= sqrt(x) with ~`bits` bits of *relative* accuracy
    (the scaling adapts to the magnitude of x, so subnormal-tiny values keep
    their precision)."""
    if x < 0:
        raise ValueError("sqrt of negative value")
    if x == 0:
        return Fraction(0)
    num, den = x.numerator, x.denominator
    shift = max(0, 2 * bits - (num.bit_length() - den.bit_length()))
    shift += shift & 1
    n = (num << shift) // den
    return Fraction(isqrt(n), 1 << (shift // 2))


def sqrt_upper(x: Fraction, bits: int = 64) -> Fraction:
    """Dyadic rational r >= sqrt(x) with ~`bits` bits of relative accuracy."""
    if x < 0:
        raise ValueError("sqrt of negative value")
    if x == 0:
        return Fraction(0)
    num, den = x.numerator, x.denominator
    shift = max(0, 2 * bits - (num.bit_length() - den.bit_length()))
    shift += shift & 1
    n = (num << shift) // den
    r = isqrt(n)
    scale = 1 << (shift // 2)
    if r * r * den == (num << shift):
        return Fraction(r, scale)
    return Fraction(r + 1, scale)


# ---------------------------------------------------------------------------
# logarithms of big rationals (float result, exact inputs)


def log_fraction(x: Fraction | int) -> float:
    """Natural log of a positive rational of arbitrary size.

    math.log handles arbitrary ints exactly enough; Fractions are split so the
    conversion never overflows a double.
    """
    if isinstance(x, int):
        if x <= 0:
            raise ValueError("log of non-positive value")
        return math.log(x)
    if x <= 0:
        raise ValueError("log of non-positive value")
    return math.log(x.numerator) - math.log(x.denominator)


def log10_fraction(x: Fraction | int) -> float:
    return log_fraction(x) / math.log(10)


def fraction_to_sci(x: Fraction, digits: int = 15, round_up: bool = False) -> str:
    """Deterministic scientific-notation string for a nonnegative rational,
    rounded outward (down by default, up when round_up) by exact integer
    arithmetic. Valid as an interval endpoint."""
    x = Fraction(x)
    if x < 0:
        raise ValueError("nonnegative values only")
    if x == 0:
        return "0"
    exp10 = 0
    num, den = x.numerator, x.denominator
    # normalize mantissa into [1, 10)
    while num < den:
        num *= 10
        exp10 -= 1
    while num >= 10 * den:
        den *= 10
        exp10 += 1
    scaled = num * 10 ** (digits - 1)
    q, r = divmod(scaled, den)
    if round_up and r:
        q += 1
        if q >= 10 ** digits:
            q //= 10
            exp10 += 1
    s = str(q).ljust(digits, "0")
    return f"{s[0]}.{s[1:]}e{exp10:+d}"


# ---------------------------------------------------------------------------
# exact floor of log_b(y) for rationals b > 1, y > 0


def floor_log(y: Fraction, b: Fraction) -> int:
    """Exact floor(log_b(y)) by rational power comparisons (no rounding)."""
    y = Fraction(y)
    b = Fraction(b)
    if b <= 1:
        raise ValueError("base must be > 1")
    if y <= 0:
        raise ValueError("argument must be positive")
    if y < 1:
        # floor(log_b(y)) = -ceil(log_b(1/y))
        inv = floor_log(1 / y, b)
        if b ** inv == 1 / y:
            return -inv
        return -inv - 1
    # exponential search then binary search for b^t <= y < b^(t+1)
    hi = 1
    while b ** hi <= y:
        hi *= 2
    lo = 0
    while lo + 1 < hi:
        mid = (lo + hi) // 2
        if b ** mid <= y:
            lo = mid
        else:
            hi = mid
    return lo


# ---------------------------------------------------------------------------
# the construction constants C_d
#
# C_1 = (3 + sqrt(5)) / 2 is irrational; comparisons against it are done with
# the exact predicate  x >= C_1  <=>  x >= 3/2 and (2x - 3)^2 >= 5,
# and enclosures of the C_d ladder (C_d = 5 n^2 C_{d-1}^{2n}) are refined on
# demand until a comparison is decided.


def ge_c1(x: Fraction) -> bool:
    """Exact predicate x >= C_1 = 2 + (sqrt(5) - 1)/2."""
    x = Fraction(x)
    if x < Fraction(3, 2):
        return False
    t = 2 * x - 3
    return t * t >= 5


def c1_enclosure(bits: int) -> tuple[Fraction, Fraction]:
    """Dyadic enclosure [lo, hi] of C_1 with hi - lo <= 2^-bits."""
    # sqrt(5) in [isqrt(5*4^b)/2^b, +1ulp]
    s_lo = Fraction(isqrt(5 << (2 * bits)), 1 << bits)
    s_hi = s_lo + Fraction(1, 1 << bits)
    return (3 + s_lo) / 2, (3 + s_hi) / 2


def cd_enclosure(d: int, n: int, bits: int = 64) -> tuple[Fraction, Fraction]:
    """Enclosure of C_d for ambient dimension n (C_d = 5 n^2 C_{d-1}^{2n})."""
    if d < 1:
        raise ValueError("d >= 1 required")
    lo, hi = c1_enclosure(bits)
    for _ in range(2, d + 1):
        lo, hi = 5 * n * n * lo ** (2 * n), 5 * n * n * hi ** (2 * n)
    return lo, hi


def ge_cd(x: Fraction, d: int, n: int) -> bool:
    """Exact predicate x >= C_d, decided by refining the enclosure.

    Terminates for every rational x because C_d is irrational.
    """
    x = Fraction(x)
    if d == 1:
        return ge_c1(x)
    bits = 32
    while True:
        lo, hi = cd_enclosure(d, n, bits)
        if x >= hi:
            return True
        if x < lo:
            return False
        bits *= 2
        if bits > 1 << 16:
            raise AmbiguousComparison(f"x suspiciously close to C_{d}")


# ---------------------------------------------------------------------------
# certified comparisons involving irrational exponents
#
# The block-construction hypotheses compare b^c1 with M^c2 where
# c1 = (1 + 1/m)^(1/d) is irrational and b, M, c2 are rational. These are
# decided with outward-rounded interval arithmetic at increasing precision;
# genuinely tied comparisons raise instead of guessing.

# ---------------------------------------------------------------------------
# exact polynomial root counting (Sturm chains over Q)


def poly_eval(coeffs: list[Fraction], x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def poly_derive(coeffs: list[Fraction]) -> list[Fraction]:
    return [i * c for i, c in enumerate(coeffs)][1:]


def _poly_trim(coeffs: list[Fraction]) -> list[Fraction]:
    while coeffs and coeffs[-1] == 0:
        coeffs = coeffs[:-1]
    return coeffs


def _poly_rem(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    a = a[:]
    db, lb = len(b) - 1, b[-1]
    while a and len(a) - 1 >= db:
        k = len(a) - 1 - db
        f = a[-1] / lb
        for i in range(db + 1):
            a[k + i] -= f * b[i]
        a.pop()  # leading coefficient cancelled exactly
        a = _poly_trim(a)
    return a


def sturm_chain(coeffs: list[Fraction]) -> list[list[Fraction]]:
    p = _poly_trim([Fraction(c) for c in coeffs])
    if len(p) <= 1:
        return [p] if p else []
    chain = [p, _poly_trim(poly_derive(p))]
    while len(chain[-1]) > 1:
        r = _poly_rem(chain[-2], chain[-1])
        if not r:
            break
        chain.append([-c for c in r])
    return chain


def _sign_variations(chain, x: Fraction) -> int:
    signs = []
    for p in chain:
        v = poly_eval(p, x)
        if v != 0:
            signs.append(1 if v > 0 else -1)
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def count_roots_in(coeffs: list[Fraction], a: Fraction, b: Fraction) -> int:
    """Number of distinct real roots in (a, b] of the rational polynomial."""
    chain = sturm_chain(coeffs)
    if not chain or len(chain[0]) <= 1:
        return 0
    return _sign_variations(chain, a) - _sign_variations(chain, b)


def smallest_root_interval(
    coeffs: list[Fraction],
    lo: Fraction,
    hi: Fraction,
    width: Fraction,
) -> tuple[Fraction, Fraction] | None:
    """Certified enclosure of the smallest root of `coeffs` in [lo, hi].

    Returns None if there is no root in the range. Endpoints hit by a root
    are handled by the closed-interval convention at `lo`.
    """
    chain = sturm_chain(coeffs)
    if not chain or len(chain[0]) <= 1:
        return None
    if poly_eval(chain[0], lo) == 0:
        return (lo, lo)

    def nroots(x, y):
        return _sign_variations(chain, x) - _sign_variations(chain, y)

    if nroots(lo, hi) == 0:
        return None
    a, b = lo, hi
    while b - a > width:
        mid = (a + b) / 2
        if poly_eval(chain[0], mid) == 0:
            return (mid, mid)
        if nroots(a, mid) > 0:
            b = mid
        else:
            a = mid
    return (a, b)


_MAX_IV_PREC = 1 << 14


def _iv_fraction(x: Fraction):
    return mpmath.iv.mpf(x.numerator) / mpmath.iv.mpf(x.denominator)


def pow_rational_exponent_gt(base: Fraction, exp: Fraction, rhs: Fraction) -> bool:
    """Exact test base**exp > rhs for rational base > 0, exp, rhs > 0.

    Uses the monotone transformation base**(p/q) > rhs  <=>  base**p > rhs**q
    (p, q integers, q > 0), which stays in exact integer arithmetic.
    """
    base, exp, rhs = Fraction(base), Fraction(exp), Fraction(rhs)
    if base <= 0 or rhs <= 0:
        raise ValueError("positive base and rhs required")
    p, q = exp.numerator, exp.denominator
    if p >= 0:
        return base ** p > rhs ** q
    return rhs ** q * base ** (-p) < 1


def compare_log_products(terms_left, terms_right) -> int:
    """Certified sign of sum(c*log(x) for c,x in terms_left) - same(right).

    Each term is (coeff, value) with rational coeff and rational value > 0;
    coefficients may themselves be irrational markers ('c1', m, d) handled by
    the caller via root extraction. Returns -1, 0-never, or 1; raises
    AmbiguousComparison if undecided at max precision (a genuine tie).
    """
    prec = 64
    while prec <= _MAX_IV_PREC:
        old = mpmath.iv.prec
        try:
            mpmath.iv.prec = prec
            total = mpmath.iv.mpf(0)
            for coeff, value in terms_left:
                total += _iv_fraction(Fraction(coeff)) * mpmath.iv.log(_iv_fraction(Fraction(value)))
            for coeff, value in terms_right:
                total -= _iv_fraction(Fraction(coeff)) * mpmath.iv.log(_iv_fraction(Fraction(value)))
            if total.a > 0:
                return 1
            if total.b < 0:
                return -1
        finally:
            mpmath.iv.prec = old
        prec *= 2
    raise AmbiguousComparison("log-product comparison undecided at max precision")


def root_pow_gt(
    base: Fraction,
    inner: Fraction,
    root: int,
    rhs: Fraction,
    rhs_exp: Fraction = Fraction(1),
) -> bool:
    """Certified test base**(inner**(1/root)) > rhs**rhs_exp for rationals > 1.

    Equivalent to inner * log(base)^root > rhs_exp^root * log(rhs)^root.
    Constant-base ties (base == rhs) reduce to an exact rational comparison.
    """
    base, inner, rhs, rhs_exp = Fraction(base), Fraction(inner), Fraction(rhs), Fraction(rhs_exp)
    if base <= 1:
        raise ValueError("base must be > 1")
    if rhs <= 1 or rhs_exp <= 0:
        return True
    if base == rhs:
        # inner^(1/root) > rhs_exp  <=>  inner > rhs_exp^root, exactly
        return inner > rhs_exp ** root
    prec = 64
    while prec <= _MAX_IV_PREC:
        old = mpmath.iv.prec
        try:
            mpmath.iv.prec = prec
            lb = mpmath.iv.log(_iv_fraction(base)) ** root * _iv_fraction(inner)
            rb = mpmath.iv.log(_iv_fraction(rhs)) ** root * _iv_fraction(rhs_exp ** root)
            diff = lb - rb
            if diff.a > 0:
                return True
            if diff.b < 0:
                return False
        finally:
            mpmath.iv.prec = old
        prec *= 2
    raise AmbiguousComparison("irrational-exponent comparison undecided")
