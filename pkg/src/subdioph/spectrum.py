"""Jacobian-rank certificates for families of block-construction exponents.

Each admissible pair (e, k) owes its exponent to a harmonic sum whose
reciprocal is the polynomial

    Omega_{(e,k)}(beta) = sum_{q=1+f}^{k} beta_{q+d-k,1} ... beta_{q+d-k,v_q}

in the dm variables beta_{i,l}. If the Jacobian of (Omega_{(e,k)})_{(e,k) in U}
has full rank everywhere on the positive orthant, the joint exponent map has
open image and the family carries no smooth relation. Two certificate levels
are computed:

  * triangular: an ordering of U giving each member a fresh variable, which
    forces a triangular full-rank minor for every positive beta;
  * genericRank: exact full rank of the Jacobian at random rational beta
    (distinct primes), certifying generic rank only.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .exponents import f_func, g_func, v_q


@dataclass(frozen=True)
class SpectrumTarget:
    """A family U of (e, k) pairs inside V_{d,n}, n = d(m+1)."""

    n: int
    d: int
    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.n % self.d != 0:
            raise ValueError("d must divide n")
        m = self.m
        for e, k in self.pairs:
            g = g_func(self.d, e, self.n)
            if not (1 <= e <= self.n - 1 and 1 + g <= k <= min(self.d, e)):
                raise ValueError(f"(e={e}, k={k}) outside V_d,n")
            if not e < k * (m + 1):
                raise ValueError(f"(e={e}, k={k}) violates e < k(m+1)")
        if len(self.pairs) > self.d * m:
            raise ValueError("#U must be at most dm")

    @property
    def m(self) -> int:
        return self.n // self.d - 1


def u_family(kind: str, n: int, d: int, custom: Sequence[tuple[int, int]] | None = None) -> SpectrumTarget:
    """The named families: minAngle takes k = min(d,e) for e = 1..n-d,
    lastAngleD takes k = d for e = d..n-1."""
    if n % d != 0:
        raise ValueError("d must divide n")
    if kind == "minAngle":
        pairs = tuple((e, min(d, e)) for e in range(1, n - d + 1))
    elif kind == "lastAngleD":
        pairs = tuple((e, d) for e in range(d, n))
    elif kind == "custom":
        if custom is None:
            raise ValueError("custom family needs explicit pairs")
        pairs = tuple((int(e), int(k)) for e, k in custom)
    else:
        raise ValueError(f"unknown family kind {kind!r}")
    return SpectrumTarget(n, d, pairs)


# ---------------------------------------------------------------------------
# chi sets and Omega polynomials


def chi(e: int, k: int, d: int, m: int) -> set[tuple[int, int]]:
    """Variable support of Omega_{(e,k)}: the union of the integer boxes
    [1+f+d-k, u+d-k] x [1, v+1] and [u+1+d-k, d] x [1, v]."""
    n = (m + 1) * d
    g = g_func(d, e, n)
    if not (1 + g <= k <= min(d, e)) or not e < k * (m + 1):
        raise ValueError(f"(e={e}, k={k}) not admissible for d={d}, m={m}")
    v, u = e // k, e % k
    f = f_func(e, m * k)
    box1 = {
        (q, ell)
        for q in range(1 + f + d - k, u + d - k + 1)
        for ell in range(1, v + 2)
    }
    box2 = {
        (q, ell)
        for q in range(u + 1 + d - k, d + 1)
        for ell in range(1, v + 1)
    }
    out = box1 | box2
    assert all(1 <= q <= d and 1 <= ell <= m for q, ell in out)
    return out


def chi_member(q: int, ell: int, e: int, k: int, d: int, m: int) -> bool:
    """Membership form: q >= 1+f+d-k and ell <= v_{q+k-d}(e, k)."""
    f = f_func(e, m * k)
    if not (1 <= q <= d and 1 <= ell <= m):
        return False
    if q < 1 + f + d - k:
        return False
    return ell <= v_q(e, k)[q + k - d - 1]


class OmegaMap:
    """The polynomial family (Omega_{(e,k)})_{(e,k) in U}, stored as
    monomial lists (each monomial a tuple of distinct (row, col) variables)."""

    def __init__(self, target: SpectrumTarget):
        self.target = target
        self.monomials: dict[tuple[int, int], list[tuple[tuple[int, int], ...]]] = {}
        d, m = target.d, target.m
        for e, k in target.pairs:
            f = f_func(e, m * k)
            v = v_q(e, k)
            monos = []
            for q in range(1 + f, k + 1):
                row = q + d - k
                monos.append(tuple((row, ell) for ell in range(1, v[q - 1] + 1)))
            self.monomials[(e, k)] = monos

    def support(self, e: int, k: int) -> set[tuple[int, int]]:
        return {var for mono in self.monomials[(e, k)] for var in mono}

    def eval_one(self, e: int, k: int, beta: Sequence[Sequence[Fraction]]) -> Fraction:
        total = Fraction(0)
        for mono in self.monomials[(e, k)]:
            prod = Fraction(1)
            for (q, ell) in mono:
                prod *= Fraction(beta[q - 1][ell - 1])
            total += prod
        return total

    def eval(self, beta: Sequence[Sequence[Fraction]]) -> list[Fraction]:
        return [self.eval_one(e, k, beta) for e, k in self.target.pairs]

    def partial_closed_form(
        self, e: int, k: int, q: int, ell: int, beta: Sequence[Sequence[Fraction]]
    ) -> Fraction:
        """d Omega/d beta_{q,l}: the product of the rest of the row-q window
        when (q, l) is in chi(e, k), zero otherwise."""
        d, m = self.target.d, self.target.m
        if not chi_member(q, ell, e, k, d, m):
            return Fraction(0)
        vq = v_q(e, k)[q + k - d - 1]
        prod = Fraction(1)
        for p in range(1, vq + 1):
            if p != ell:
                prod *= Fraction(beta[q - 1][p - 1])
        return prod

    def partial_symbolic(
        self, e: int, k: int, q: int, ell: int, beta: Sequence[Sequence[Fraction]]
    ) -> Fraction:
        """Same derivative from the monomial lists (product rule on each
        square-free monomial)."""
        total = Fraction(0)
        for mono in self.monomials[(e, k)]:
            if (q, ell) not in mono:
                continue
            prod = Fraction(1)
            for var in mono:
                if var != (q, ell):
                    prod *= Fraction(beta[var[0] - 1][var[1] - 1])
            total += prod
        return total

    def jacobian(
        self, beta: Sequence[Sequence[Fraction]], symbolic: bool = False
    ) -> list[list[Fraction]]:
        """#U x dm matrix; columns ordered by (row, col) lexicographically."""
        d, m = self.target.d, self.target.m
        cols = [(q, ell) for q in range(1, d + 1) for ell in range(1, m + 1)]
        deriv = self.partial_symbolic if symbolic else self.partial_closed_form
        return [
            [deriv(e, k, q, ell, beta) for (q, ell) in cols]
            for (e, k) in self.target.pairs
        ]


def omega_eval(target: SpectrumTarget, beta: Sequence[Sequence[Fraction]]) -> list[Fraction]:
    return OmegaMap(target).eval(beta)


def omega_jacobian(
    target: SpectrumTarget, beta: Sequence[Sequence[Fraction]]
) -> list[list[Fraction]]:
    omap = OmegaMap(target)
    jac = omap.jacobian(beta, symbolic=False)
    sym = omap.jacobian(beta, symbolic=True)
    if jac != sym:
        raise AssertionError("closed-form and symbolic Jacobians disagree")
    return jac


# ---------------------------------------------------------------------------
# rank certificates


@dataclass
class RankCertificate:
    level: str  # "triangular" | "genericRank" | "unknown"
    witness_order: list[tuple[int, int]] | None = None
    fresh_vars: list[tuple[int, int]] | None = None
    witness_beta: list[list[str]] | None = None
    diagnostics: str = ""

    def to_json_dict(self, target: SpectrumTarget) -> dict:
        return {
            "U": [list(p) for p in target.pairs],
            "n": target.n,
            "d": target.d,
            "m": target.m,
            "certificateLevel": self.level,
            "witnessOrder": [list(p) for p in self.witness_order] if self.witness_order else None,
            "freshVariables": [list(p) for p in self.fresh_vars] if self.fresh_vars else None,
            "witnessBeta": self.witness_beta,
            "diagnostics": self.diagnostics,
        }


def _triangular_order(target: SpectrumTarget):
    """Backtracking search for an order theta_1, ..., theta_r of U with a
    fresh chi variable at each step (complete, so failure is structural)."""
    d, m = target.d, target.m
    supports = {pair: chi(pair[0], pair[1], d, m) for pair in target.pairs}
    order: list[tuple[int, int]] = []
    fresh: list[tuple[int, int]] = []
    remaining = list(target.pairs)

    def extend(covered: set) -> bool:
        if not remaining:
            return True
        for idx in range(len(remaining)):
            pair = remaining[idx]
            new_vars = supports[pair] - covered
            if not new_vars:
                continue
            var = min(new_vars)
            order.append(pair)
            fresh.append(var)
            remaining.pop(idx)
            if extend(covered | supports[pair]):
                return True
            remaining.insert(idx, pair)
            order.pop()
            fresh.pop()
        return False

    if extend(set()):
        return order, fresh
    return None


_PRIMES = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67,
    71, 73, 79, 83, 89, 97, 101, 103, 107, 109, 113, 127, 131, 137, 139, 149,
]


def _random_prime_beta(d: int, m: int, rng) -> list[list[Fraction]]:
    """Rows of distinct primes (shuffled), avoiding accidental relations."""
    pool = _PRIMES[: max(dm := d * m, 10) + 5]
    picks = rng.sample(pool, d * m)
    it = iter(picks)
    return [[Fraction(next(it)) for _ in range(m)] for _ in range(d)]


def _exact_rank(mat: list[list[Fraction]]) -> int:
    rows = [r[:] for r in mat]
    if not rows:
        return 0
    ncols = len(rows[0])
    rank = 0
    for col in range(ncols):
        piv = next((i for i in range(rank, len(rows)) if rows[i][col] != 0), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = 1 / rows[rank][col]
        rows[rank] = [x * inv for x in rows[rank]]
        for i in range(len(rows)):
            if i != rank and rows[i][col] != 0:
                f = rows[i][col]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[rank])]
        rank += 1
        if rank == len(rows):
            break
    return rank


def rank_certify(target: SpectrumTarget, trials: int = 20, seed: int = 0) -> RankCertificate:
    """Try the all-beta triangular certificate, then exact generic rank at
    random prime-valued rational beta. Returns Unknown with a diagnostic when
    both fail (e.g. a duplicated pair makes the rows identical)."""
    import random

    if len(set(target.pairs)) != len(target.pairs):
        return RankCertificate("unknown", diagnostics="duplicated (e,k) pair: Jacobian rows repeat")

    omap = OmegaMap(target)
    tri = _triangular_order(target)
    rng = random.Random(seed)
    generic = None
    for _ in range(max(1, trials)):
        beta = _random_prime_beta(target.d, target.m, rng)
        jac = omap.jacobian(beta)
        if _exact_rank(jac) == len(target.pairs):
            generic = beta
            break
    if generic is None:
        return RankCertificate(
            "unknown",
            witness_order=tri[0] if tri else None,
            fresh_vars=tri[1] if tri else None,
            diagnostics=f"rank below #U at {trials} random prime beta",
        )
    beta_str = [[str(x) for x in row] for row in generic]
    if tri is not None:
        return RankCertificate(
            "triangular",
            witness_order=tri[0],
            fresh_vars=tri[1],
            witness_beta=beta_str,
            diagnostics="fresh-variable order certifies full rank for every positive beta",
        )
    return RankCertificate(
        "genericRank",
        witness_beta=beta_str,
        diagnostics="exact full rank at random rational beta (generic certificate only)",
    )
