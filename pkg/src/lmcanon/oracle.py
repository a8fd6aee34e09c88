"""Brute-force ground truth over small prime fields.

Everything here works by exhaustive enumeration and shares no code with the
reduction beyond matrix arithmetic, so it can be used to check it.
"""
from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from typing import Sequence

from .algebra import ReducedAlgebra
from .belitskii import StructuredCanonicalMatrix
from .errors import BudgetExceeded, FieldNotSplitting
from .field import Field, PrimeField, get_field
from .linalg import Matrix, det

DEFAULT_BUDGET = 2_000_000


def _require_finite(field: Field) -> PrimeField:
    if not isinstance(field, PrimeField):
        raise ValueError("brute-force enumeration needs a prime field")
    return field


def _combinations(field: PrimeField, basis: Sequence[Matrix], n: int, budget: int):
    if field.p ** len(basis) > budget:
        raise BudgetExceeded(f"{field.p}^{len(basis)} combinations exceed the budget of {budget}")
    p = field.p
    flats = [[x for r in b.rows for x in r] for b in basis]
    for coeffs in itertools.product(range(p), repeat=len(basis)):
        flat = [0] * (n * n)
        for c, f in zip(coeffs, flats):
            if c:
                for k, x in enumerate(f):
                    if x:
                        flat[k] = (flat[k] + c * x) % p
        yield Matrix._raw(field, tuple(tuple(flat[i * n:(i + 1) * n]) for i in range(n)), n, n)


def enumerate_group(alg: ReducedAlgebra, budget: int = DEFAULT_BUDGET) -> list[Matrix]:
    """All invertible members of ``alg``."""
    field = _require_finite(alg.field)
    return [s for s in _combinations(field, alg.spanning_set(), alg.n, budget) if det(s) != 0]


def orbit_equivalent(alg: ReducedAlgebra, m: Matrix, n: Matrix, group: Sequence[Matrix] | None = None,
                     budget: int = DEFAULT_BUDGET) -> bool:
    """True iff S^{-1} M S = N for some invertible S in ``alg``."""
    if group is None:
        group = enumerate_group(alg, budget)
    return any(m @ s == s @ n for s in group)


def orbit(alg: ReducedAlgebra, m: Matrix, group: Sequence[Matrix] | None = None,
          budget: int = DEFAULT_BUDGET) -> set[Matrix]:
    if group is None:
        group = enumerate_group(alg, budget)
    return {s.inverse() @ m @ s for s in group}


def count_orbits(alg: ReducedAlgebra, matrices: Sequence[Matrix], budget: int = DEFAULT_BUDGET) -> int:
    """Number of orbits among ``matrices`` (closed under the action), by orbit sweeps."""
    group = enumerate_group(alg, budget)
    seen: set[Matrix] = set()
    count = 0
    for m in matrices:
        if m in seen:
            continue
        count += 1
        seen |= orbit(alg, m, group)
    return count


def _canon_batch(args) -> list[StructuredCanonicalMatrix | None]:
    spec, sizes, batch, skip = args
    out = []
    for m in batch:
        try:
            out.append(spec.canonicalize(m, sizes))
        except FieldNotSplitting:
            if not skip:
                raise
            out.append(None)
    return out


def enumerate_canonical(spec, sizes: Sequence[int], field=None, budget: int = DEFAULT_BUDGET,
                        jobs: int = 1, skip_nonsplitting: bool = False) -> list[StructuredCanonicalMatrix]:
    """Canonical forms of every matrix of the problem at ``sizes``, one per orbit.

    With ``skip_nonsplitting`` the matrices whose reduction meets a
    characteristic polynomial without all roots in the field are left out.
    """
    if field is not None:
        spec = spec.over(get_field(field))
    fld = _require_finite(spec.field)
    sizes = tuple(sizes)
    n = sum(sizes)
    matrices = list(_combinations(fld, spec.matrix_space_basis(sizes), n, budget))
    if jobs > 1 and len(matrices) > 1:
        chunk = max(1, len(matrices) // (4 * jobs))
        batches = [(spec, sizes, matrices[k:k + chunk], skip_nonsplitting) for k in range(0, len(matrices), chunk)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = [c for part in pool.map(_canon_batch, batches) for c in part]
    else:
        results = _canon_batch((spec, sizes, matrices, skip_nonsplitting))
    unique: dict[Matrix, StructuredCanonicalMatrix] = {}
    for c in results:
        if c is None:
            continue
        unique.setdefault(c.matrix, c)
    return [unique[k] for k in sorted(unique, key=lambda m: tuple(x for r in m.rows for x in r))]
