import random
from fractions import Fraction

import pytest

from subdioph.exactlin import RationalSubspace, saturate


def random_subspace(rng: random.Random, n: int, dim: int | None = None, entry_bound: int = 20) -> RationalSubspace:
    """Random rational subspace via a random integer spanning set."""
    while True:
        k = dim if dim is not None else rng.randrange(1, n)
        rows = [
            [rng.randrange(-entry_bound, entry_bound + 1) for _ in range(n)]
            for _ in range(k)
        ]
        if all(not any(r) for r in rows):
            continue
        b = saturate(rows)
        if dim is None or b.dim == dim:
            return b


def random_fraction(rng: random.Random, lo: int = 1, hi: int = 50, den: int = 12) -> Fraction:
    return Fraction(rng.randrange(lo * den, hi * den), den)


@pytest.fixture
def rng():
    return random.Random(20240817)
