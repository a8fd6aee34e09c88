"""Helpers shared by the test modules."""
from __future__ import annotations

import random

from lmcanon.errors import FieldNotSplitting
from lmcanon.field import QQ
from lmcanon.linalg import Matrix, block_diag, is_invertible


def jordan_block(n: int, lam, field=QQ) -> Matrix:
    return Matrix(field, [[lam if i == j else (1 if j == i + 1 else 0) for j in range(n)] for i in range(n)], n, n)


def jordan_matrix(blocks, field=QQ) -> Matrix:
    """Direct sum of Jordan blocks given as (size, eigenvalue) pairs."""
    if not blocks:
        return Matrix.zeros(field, 0)
    return block_diag(field, [jordan_block(n, lam, field) for n, lam in blocks])


def random_invertible_matrix(rng: random.Random, n: int, field=QQ, bound: int = 3) -> Matrix:
    while True:
        m = Matrix(field, [[field.random(rng, bound) for _ in range(n)] for _ in range(n)], n, n, coerce=False)
        if is_invertible(m):
            return m


def random_jordan_data(rng: random.Random, n: int, eigen_pool=(-2, -1, 0, 1, 2)):
    """A random list of (size, eigenvalue) Jordan blocks of total size n."""
    blocks, left = [], n
    while left:
        size = rng.randint(1, left)
        blocks.append((size, rng.choice(eigen_pool)))
        left -= size
    return blocks


def sample_splitting(spec, sizes, rng: random.Random, bound: int = 2, tries: int = 200):
    """A random problem matrix whose reduction stays inside the field, with its canonical form."""
    for _ in range(tries):
        m = spec.random_matrix(sizes, rng, bound)
        try:
            return m, spec.canonicalize(m, sizes)
        except FieldNotSplitting:
            continue
    raise RuntimeError("no splitting sample found")


def loop_quiver(field=QQ):
    """The three-vertex quiver with loops at 1 and 3, arrows 1->2, 2->3 and two arrows 1->3."""
    from lmcanon.problems import quiver_problem
    return quiver_problem(["1", "2", "3"], [("alpha", "1", "1"), ("beta", "1", "2"), ("gamma", "1", "3"),
                                            ("delta", "1", "3"), ("eps", "2", "3"), ("zeta", "3", "3")], field)


def _pair_algebra():
    from lmcanon.weyr import commutant_algebra
    return commutant_algebra(jordan_block(2, 0)).inflate((2, 2))


# {[[S1, S2], [0, S1]]}: the commutant of J_2 inflated to 2 x 2 blocks, and a
# canonical matrix for it with two empty boxes
PAIR_ALGEBRA = _pair_algebra()
PAIR_CANONICAL = Matrix(QQ, [[-1, 1, 2, 0], [0, -1, 0, 1], [3, 0, 0, 0], [0, 3, 0, 0]], 4, 4)
