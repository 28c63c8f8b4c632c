"""Exact integer/rational linear and exterior algebra for rational subspaces.

A rational subspace of R^n is represented by a Z-basis of its integer point
lattice, together with its primitive Grassmann coordinate vector and exact
squared height. All arithmetic is over Python ints and fractions.Fraction;
nothing here rounds.

Conventions:
  * vectors are tuples; matrices are tuples of row tuples
  * Grassmann coordinates are indexed by strictly increasing tuples of
    0-based coordinate indices, enumerated in colex order
  * the zero subspace has dimension 0, empty basis and squared height 1
  * Plucker vectors are primitive with the first nonzero coordinate
    (in colex order) positive, so subspace equality is data equality
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from itertools import combinations
from math import gcd
from typing import Iterable, Sequence

IntVector = tuple[int, ...]
RatVector = tuple[Fraction, ...]


class Membership(Enum):
    IN_B = "InB"
    INCONCLUSIVE = "Inconclusive"


# ---------------------------------------------------------------------------
# multivectors


def _colex_key(idx: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(reversed(idx))


@dataclass(frozen=True)
class MultiVector:
    """Exact grade-k exterior-algebra element over Q."""

    n: int
    grade: int
    coords: dict  # strictly increasing index tuple -> Fraction/int, nonzero

    def __post_init__(self):
        for key in self.coords:
            if len(key) != self.grade or list(key) != sorted(set(key)):
                raise ValueError(f"bad index tuple {key} for grade {self.grade}")

    @staticmethod
    def from_vector(v: Sequence, n: int | None = None) -> "MultiVector":
        n = len(v) if n is None else n
        coords = {(i,): x for i, x in enumerate(v) if x != 0}
        return MultiVector(n, 1, coords)

    @staticmethod
    def scalar(n: int, value=1) -> "MultiVector":
        return MultiVector(n, 0, {(): value} if value != 0 else {})

    def is_zero(self) -> bool:
        return not self.coords

    def wedge(self, other: "MultiVector") -> "MultiVector":
        if self.n != other.n:
            raise ValueError("ambient dimension mismatch")
        grade = self.grade + other.grade
        if grade > self.n:
            return MultiVector(self.n, min(grade, self.n), {})
        out: dict = {}
        for a_idx, a in self.coords.items():
            a_set = set(a_idx)
            for b_idx, b in other.coords.items():
                if a_set & set(b_idx):
                    continue
                merged = tuple(sorted(a_idx + b_idx))
                # sign = parity of the merge permutation
                inv = 0
                for i in a_idx:
                    for j in b_idx:
                        if j < i:
                            inv += 1
                term = -a * b if inv % 2 else a * b
                acc = out.get(merged, 0) + term
                if acc:
                    out[merged] = acc
                else:
                    out.pop(merged, None)
        return MultiVector(self.n, grade, out)

    def norm_sq(self):
        return sum(c * c for c in self.coords.values())

    def content(self) -> int:
        """gcd of the (integer) coordinates; 0 for the zero multivector."""
        g = 0
        for c in self.coords.values():
            if c != int(c):
                raise ValueError("content is defined for integer coordinates only")
            g = gcd(g, abs(int(c)))
        return g

    def colex_items(self):
        return sorted(self.coords.items(), key=lambda kv: _colex_key(kv[0]))

    def primitive_signed(self) -> "MultiVector":
        """Divide by content and normalize the first colex-nonzero coordinate
        to be positive."""
        if self.is_zero():
            return self
        g = self.content()
        if g == 0:
            raise ValueError("primitive normalization needs integer coordinates")
        items = self.colex_items()
        sign = 1 if items[0][1] > 0 else -1
        coords = {k: (int(v) * sign) // g for k, v in self.coords.items()}
        return MultiVector(self.n, self.grade, coords)

    def dense_colex(self) -> list:
        """All C(n, grade) coordinates in colex order of the index tuples."""
        keys = sorted(combinations(range(self.n), self.grade), key=_colex_key)
        return [self.coords.get(k, 0) for k in keys]


def wedge(vectors: Sequence[Sequence]) -> MultiVector:
    """Exterior product of 1-vectors; coordinates are the k x k minors."""
    if not vectors:
        raise ValueError("empty wedge input")
    n = len(vectors[0])
    if any(len(v) != n for v in vectors):
        raise ValueError("dimension mismatch in wedge input")
    if len(vectors) > n:
        raise ValueError(f"cannot wedge {len(vectors)} vectors in dimension {n}")
    acc = MultiVector.from_vector(vectors[0], n)
    for v in vectors[1:]:
        acc = acc.wedge(MultiVector.from_vector(v, n))
    return acc


# ---------------------------------------------------------------------------
# integer lattice elimination


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    return old_r, old_s, old_t


def int_kernel(rows: Sequence[Sequence[int]], n: int) -> list[IntVector]:
    """Z-basis of {x in Z^n : <r, x> = 0 for every row r}.

    Column elimination on the row matrix with a tracked unimodular transform;
    the kernel of a linear map is saturated by construction.
    """
    mat = [list(r) for r in rows]
    for r in mat:
        if len(r) != n:
            raise ValueError("row length mismatch")
    u = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    m = len(mat)
    col = 0
    # work column-by-column on the transposed picture: combine coordinates
    work = [[mat[i][j] for i in range(m)] for j in range(n)]  # n "columns"
    for target in range(m):
        # eliminate entry `target` across remaining columns using xgcd combos
        piv = None
        for j in range(col, n):
            if work[j][target] != 0:
                piv = j
                break
        if piv is None:
            continue
        work[col], work[piv] = work[piv], work[col]
        u[col], u[piv] = u[piv], u[col]
        for j in range(col + 1, n):
            b = work[j][target]
            if b == 0:
                continue
            a = work[col][target]
            g, x, y = _xgcd(a, b)
            ag, bg = a // g, b // g
            wc, wj = work[col], work[j]
            uc, uj = u[col], u[j]
            for t in range(target, m):
                ct, jt = wc[t], wj[t]
                wc[t] = x * ct + y * jt
                wj[t] = -bg * ct + ag * jt
            for t in range(n):
                ct, jt = uc[t], uj[t]
                uc[t] = x * ct + y * jt
                uj[t] = -bg * ct + ag * jt
        col += 1
    return [tuple(u[j]) for j in range(col, n)]


def hnf_rows(rows: Sequence[Sequence[int]]) -> list[IntVector]:
    """Row Hermite normal form of a full-rank-by-rows integer matrix:
    positive pivots, entries above each pivot reduced into [0, pivot)."""
    mat = [list(r) for r in rows]
    if not mat:
        return []
    n = len(mat[0])
    done: list[list[int]] = []
    rest = mat
    for col in range(n):
        piv_idx = next((i for i, r in enumerate(rest) if r[col] != 0), None)
        if piv_idx is None:
            continue
        piv = rest.pop(piv_idx)
        for r in rest:
            while r[col] != 0:
                if abs(r[col]) >= abs(piv[col]):
                    q = r[col] // piv[col]
                    for j in range(n):
                        r[j] -= q * piv[j]
                else:
                    piv, r[:] = r[:], piv
        if piv[col] < 0:
            piv = [-x for x in piv]
        done.append(piv)
        rest = [r for r in rest if any(r)]
    # reduce entries above each pivot
    for i in reversed(range(len(done))):
        col = next(j for j, x in enumerate(done[i]) if x)
        for k in range(i):
            q = done[k][col] // done[i][col]
            if q:
                done[k] = [a - q * b for a, b in zip(done[k], done[i])]
    return [tuple(r) for r in done]


def saturate_basis(spanning: Sequence[Sequence[int]]) -> list[IntVector]:
    """Z-basis of span(spanning) ∩ Z^n via a double integer kernel,
    normalized to row Hermite form so output is canonical."""
    rows = [tuple(r) for r in spanning if any(r)]
    if not rows:
        return []
    n = len(rows[0])
    normals = int_kernel(rows, n)
    if not normals:
        # full space
        return [tuple(1 if i == j else 0 for j in range(n)) for i in range(n)]
    return hnf_rows(int_kernel(normals, n))


# ---------------------------------------------------------------------------
# rational subspaces


@dataclass(frozen=True)
class RationalSubspace:
    n: int
    dim: int
    basis: tuple[IntVector, ...]  # Z-basis of B ∩ Z^n
    plucker: MultiVector          # primitive, sign-normalized, integer
    height_sq: int

    @staticmethod
    def zero(n: int) -> "RationalSubspace":
        return RationalSubspace(n, 0, (), MultiVector.scalar(n, 1), 1)

    @staticmethod
    def full(n: int) -> "RationalSubspace":
        eye = tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))
        return RationalSubspace.from_zbasis(eye)

    @staticmethod
    def from_zbasis(basis: Sequence[Sequence[int]]) -> "RationalSubspace":
        """Build from a basis the caller asserts is a Z-basis of B ∩ Z^n.

        The squared height is the squared norm of the basis wedge, which is
        only the true height if the assertion holds; `saturate` is the
        checked path.
        """
        basis = tuple(tuple(int(x) for x in row) for row in basis)
        if not basis:
            raise ValueError("empty basis; use RationalSubspace.zero")
        n = len(basis[0])
        w = wedge(basis)
        if w.is_zero():
            raise ValueError("basis vectors are linearly dependent")
        return RationalSubspace(n, len(basis), basis, w.primitive_signed(), int(w.norm_sq()))

    def key(self) -> tuple:
        """Dedup key: (n, dim, dense colex plucker of the primitive vector)."""
        return (self.n, self.dim, tuple(self.plucker.dense_colex()))

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "e": self.dim,
            "basis": [list(r) for r in self.basis],
            "pluckerIndexOrder": "colex",
            "plucker": [str(c) for c in self.plucker.dense_colex()],
            "heightSq": str(self.height_sq),
        }


def saturate(spanning: Sequence[Sequence[int]]) -> RationalSubspace:
    """Subspace spanned by integer vectors, with a saturated Z-basis."""
    rows = [tuple(int(x) for x in r) for r in spanning]
    if not rows or all(not any(r) for r in rows):
        raise ValueError("zero span")
    basis = saturate_basis(rows)
    return RationalSubspace.from_zbasis(basis)


def height_sq(b: RationalSubspace) -> int:
    return b.height_sq


def orth_complement(b: RationalSubspace) -> RationalSubspace:
    if b.dim in (0, b.n):
        raise ValueError("orthogonal complement requires 1 <= dim <= n-1")
    return RationalSubspace.from_zbasis(int_kernel(b.basis, b.n))


def coord_project(b: RationalSubspace, keep: Iterable[int]) -> tuple[RationalSubspace, RationalSubspace, bool]:
    """Split B along the orthogonal projection p onto Span{e_i : i in keep}.

    Returns (ker(p) ∩ B, p(B), factorizationHolds) where the flag reports
    whether H(B)^2 = H(ker(p) ∩ B)^2 * H(p(B))^2 exactly. The identity is a
    theorem only when ker(p) ⊆ B; the flag records what actually happened.
    """
    keep_set = sorted(set(keep))
    if any(i < 0 or i >= b.n for i in keep_set):
        raise ValueError("projection indices out of range")
    if b.dim == 0:
        return RationalSubspace.zero(b.n), RationalSubspace.zero(b.n), True

    # ker(p) ∩ B: integer coefficient vectors c with (c . basis) zero on `keep`
    cols = [[row[i] for row in b.basis] for i in keep_set]  # |keep| x e
    coeffs = int_kernel(cols, b.dim) if cols else [
        tuple(1 if i == j else 0 for j in range(b.dim)) for i in range(b.dim)
    ]
    ker_vecs = []
    for c in coeffs:
        v = tuple(sum(c[i] * b.basis[i][j] for i in range(b.dim)) for j in range(b.n))
        if any(v):
            ker_vecs.append(v)
    ker_part = saturate(ker_vecs) if ker_vecs else RationalSubspace.zero(b.n)

    keep_mask = set(keep_set)
    img_rows = [tuple(x if j in keep_mask else 0 for j, x in enumerate(row)) for row in b.basis]
    img_rows = [r for r in img_rows if any(r)]
    image = saturate(img_rows) if img_rows else RationalSubspace.zero(b.n)

    holds = b.height_sq == ker_part.height_sq * image.height_sq
    return ker_part, image, holds


def membership_by_wedge(y: Sequence[int], b: RationalSubspace) -> Membership:
    """Integer membership test: exact ||Y ∧ X_1 ∧ ... ∧ X_e||^2 is either 0
    (so Y ∈ B) or >= 1 (inconclusive about nearness, Y ∉ B)."""
    y = tuple(int(x) for x in y)
    if not any(y):
        raise ValueError("Y must be nonzero")
    if b.dim == b.n:
        return Membership.IN_B
    w = wedge(list(b.basis) + [y])
    return Membership.IN_B if w.norm_sq() == 0 else Membership.INCONCLUSIVE


def in_row_space(y: Sequence, rows: Sequence[Sequence]) -> bool:
    """Oracle: exact rational solve for y ∈ span(rows)."""
    mat = [[Fraction(x) for x in r] for r in rows]
    vec = [Fraction(x) for x in y]
    aug = [row[:] for row in mat]
    aug.append(vec)
    return _rank_frac(mat) == _rank_frac(aug)


def _rank_frac(rows: Sequence[Sequence]) -> int:
    mat = [[Fraction(x) for x in r] for r in rows]
    if not mat:
        return 0
    n = len(mat[0])
    rank = 0
    for col in range(n):
        piv = next((i for i in range(rank, len(mat)) if mat[i][col] != 0), None)
        if piv is None:
            continue
        mat[rank], mat[piv] = mat[piv], mat[rank]
        prow = mat[rank]
        inv = 1 / prow[col]
        for i in range(len(mat)):
            if i != rank and mat[i][col] != 0:
                f = mat[i][col] * inv
                mat[i] = [a - f * b for a, b in zip(mat[i], prow)]
        rank += 1
        if rank == len(mat):
            break
    return rank


def rank(rows: Sequence[Sequence]) -> int:
    return _rank_frac(rows)
