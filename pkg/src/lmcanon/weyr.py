"""Weyr canonical forms.

A Weyr matrix has, for each eigenvalue, diagonal blocks ``lam*I`` of sizes
m_1 >= m_2 >= ... and super-diagonal blocks ``[I; 0]``.  Its commutant is block
upper triangular with respect to the standard partition, which is what makes
it the right normal form for the similarity steps of the reduction.
"""
from __future__ import annotations

import functools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

from .errors import FieldNotSplitting, SizeMismatch
from .field import Field, FieldElement
from .linalg import Matrix, RowSpace, StepPartition, char_poly, inverse, nullspace, nullspace_rows, rank

# ------------------------------------------------------------ polynomials
# Coefficient lists run from the highest degree down.


def _trim(f: list) -> list:
    i = 0
    while i < len(f) - 1 and f[i] == 0:
        i += 1
    return f[i:]


def _poly_divmod(field: Field, f: Sequence, g: Sequence) -> tuple[list, list]:
    f = _trim(list(f))
    g = _trim(list(g))
    if len(g) == 1 and g[0] == 0:
        raise ZeroDivisionError("polynomial division by zero")
    if len(f) < len(g):
        return [field.zero], f
    lead_inv = field.inv(g[0])
    rem = list(f)
    quot = []
    for k in range(len(f) - len(g) + 1):
        c = field.mul(rem[k], lead_inv)
        quot.append(c)
        if c != 0:
            for d in range(len(g)):
                rem[k + d] = field.sub(rem[k + d], field.mul(c, g[d]))
    rem = _trim(rem[len(f) - len(g) + 1:] or [field.zero])
    return quot, rem


def _poly_monic(field: Field, f: list) -> list:
    f = _trim(f)
    if f[0] == 0:
        return f
    inv = field.inv(f[0])
    return [field.mul(inv, c) for c in f]


def _poly_gcd(field: Field, f: Sequence, g: Sequence) -> list:
    a, b = _trim(list(f)), _trim(list(g))
    while not (len(b) == 1 and b[0] == 0):
        a, b = b, _poly_divmod(field, a, b)[1]
    return _poly_monic(field, a)


def _poly_deriv(field: Field, f: Sequence) -> list:
    deg = len(f) - 1
    out = [field.mul(field.coerce(deg - k), f[k]) for k in range(deg)]
    return _trim(out) if out else [field.zero]


def _poly_eval(field: Field, f: Sequence, x):
    acc = field.zero
    for c in f:
        acc = field.add(field.mul(acc, x), c)
    return acc


def _poly_mul(field: Field, f: Sequence, g: Sequence) -> list:
    out = [field.zero] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a != 0:
            for j, b in enumerate(g):
                out[i + j] = field.add(out[i + j], field.mul(a, b))
    return out


def _poly_powmod(field: Field, base: list, e: int, mod: list) -> list:
    result = [field.one]
    base = _poly_divmod(field, base, mod)[1]
    while e:
        if e & 1:
            result = _poly_divmod(field, _poly_mul(field, result, base), mod)[1]
        base = _poly_divmod(field, _poly_mul(field, base, base), mod)[1]
        e >>= 1
    return result


def _divisors(n: int) -> list[int]:
    n = abs(n)
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d * d != n:
                large.append(n // d)
        d += 1
    return small + large[::-1]


def _rational_roots(f: list) -> list[Fraction]:
    roots = []
    f = _trim([Fraction(c) for c in f])
    if len(f) > 1 and f[-1] == 0:
        roots.append(Fraction(0))
        while f[-1] == 0:
            f = f[:-1]
    if len(f) == 1:
        return roots
    from .field import QQ
    g = _poly_gcd(QQ, f, _poly_deriv(QQ, f))
    f, _ = _poly_divmod(QQ, f, g)
    den = math.lcm(*(c.denominator for c in f))
    ints = [int(c * den) for c in f]
    content = math.gcd(*ints)
    ints = [c // content for c in ints]
    lead, const = ints[0], ints[-1]
    seen = set()
    for num in _divisors(const):
        for d in _divisors(lead):
            for cand in (Fraction(num, d), Fraction(-num, d)):
                if cand in seen:
                    continue
                seen.add(cand)
                acc = 0
                for c in ints:
                    acc = acc * cand + c
                if acc == 0:
                    roots.append(cand)
    return roots


_TRIAL_LIMIT = 1 << 14


def _prime_field_roots(field, f: list) -> list[int]:
    f = _poly_monic(field, list(f))
    p = field.p
    if p <= _TRIAL_LIMIT:
        return [x for x in range(p) if _poly_eval(field, f, x) == 0]
    # Large p: split gcd(f, x^p - x) by random equal-degree splitting.
    xp = _poly_powmod(field, [field.one, field.zero], p, f)
    x = [field.one, field.zero]
    width = max(len(xp), 2)
    xp = [field.zero] * (width - len(xp)) + xp
    x = [field.zero] * (width - 2) + x
    lin = _trim([field.sub(a, b) for a, b in zip(xp, x)])
    g = _poly_gcd(field, f, lin)
    rng = random.Random(p)
    out: list[int] = []
    stack = [g]
    while stack:
        h = stack.pop()
        if len(h) <= 1:
            continue
        if len(h) == 2:
            out.append(field.neg(h[1]))
            continue
        while True:
            a = rng.randrange(p)
            w = _poly_powmod(field, [field.one, a], (p - 1) // 2, h)
            w = _trim(list(w))
            w[-1] = field.sub(w[-1], field.one)
            d = _poly_gcd(field, h, w)
            if 1 < len(d) < len(h):
                stack.append(d)
                stack.append(_poly_divmod(field, h, d)[0])
                break
    return sorted(out)


def field_roots(field: Field, coeffs: Sequence) -> list:
    """Distinct roots in ``field`` of a polynomial, ordered by the field order."""
    coeffs = _trim([field.coerce(c) for c in coeffs])
    if len(coeffs) == 1:
        return []
    if field.characteristic == 0:
        roots = _rational_roots(coeffs)
    else:
        roots = _prime_field_roots(field, coeffs)
    return sorted(set(roots), key=field.sort_key)


# ------------------------------------------------------------ structures

@dataclass(frozen=True)
class Piece:
    """One strip of the standard partition: eigenvalue index, level, chain length."""

    eigen: int
    level: int
    length: int
    size: int


@dataclass(frozen=True)
class WeyrStructure:
    field: Field
    eigenvalues: tuple
    characteristics: tuple[tuple[int, ...], ...]

    @property
    def n(self) -> int:
        return sum(sum(c) for c in self.characteristics)

    @functools.cached_property
    def pieces(self) -> tuple[Piece, ...]:
        out = []
        for e, chars in enumerate(self.characteristics):
            k = len(chars)
            for j in range(1, k + 1):
                for length in range(k, j - 1, -1):
                    count = chars[length - 1] - (chars[length] if length < k else 0)
                    if count > 0:
                        out.append(Piece(e, j, length, count))
        return tuple(out)

    @functools.cached_property
    def standard_partition(self) -> StepPartition:
        return StepPartition(tuple(p.size for p in self.pieces),
                             tuple((p.eigen, p.length) for p in self.pieces))

    @property
    def piece_values(self) -> tuple:
        return tuple(self.eigenvalues[p.eigen] for p in self.pieces)

    @functools.cached_property
    def identity_cells(self) -> tuple[tuple[int, int], ...]:
        """Pairs (row piece, column piece) holding an identity cell off the diagonal."""
        index = {(p.eigen, p.level, p.length): k for k, p in enumerate(self.pieces)}
        cells = []
        for k, p in enumerate(self.pieces):
            if p.level > 1:
                cells.append((index[(p.eigen, p.level - 1, p.length)], k))
        return tuple(sorted(cells))

    def eigenvalue_elements(self) -> list[FieldElement]:
        return [FieldElement(self.field, v) for v in self.eigenvalues]


class WeyrForm(NamedTuple):
    W: Matrix
    P: Matrix
    structure: WeyrStructure


def build_weyr(field: Field, eigenvalues: Sequence, characteristics: Sequence[Sequence[int]]) -> Matrix:
    """Assemble the Weyr matrix with the given eigenvalues and characteristics."""
    n = sum(sum(c) for c in characteristics)
    rows = [[field.zero] * n for _ in range(n)]
    base = 0
    for lam, chars in zip(eigenvalues, characteristics):
        lam = field.coerce(lam)
        starts = []
        acc = base
        for m in chars:
            starts.append(acc)
            acc += m
        for i in range(base, acc):
            rows[i][i] = lam
        for j in range(1, len(chars)):
            for d in range(chars[j]):
                rows[starts[j - 1] + d][starts[j] + d] = field.one
        base = acc
    return Matrix._raw(field, rows, n, n)


# ------------------------------------------------------------ computations

def weyr_characteristic(a: Matrix, lam) -> list[int]:
    """Rank drops of the powers of (A - lam I); empty when lam is not an eigenvalue."""
    if not a.is_square:
        raise SizeMismatch("Weyr characteristic of a non-square matrix")
    field = a.field
    lam = field.coerce(lam.value if isinstance(lam, FieldElement) else lam)
    b = a - Matrix.scalar(field, a.nrows, lam)
    out = []
    prev = a.nrows
    power = Matrix.identity(field, a.nrows)
    while True:
        power = power @ b
        r = rank(power)
        if r == prev:
            break
        out.append(prev - r)
        prev = r
    return out


def _spectrum(a: Matrix) -> tuple[list, list[tuple[int, ...]]]:
    """Distinct eigenvalues (field order) and their Weyr characteristics."""
    field = a.field
    poly = char_poly(a)
    roots = field_roots(field, poly)
    chars_all = [tuple(weyr_characteristic(a, lam)) for lam in roots]
    if sum(sum(c) for c in chars_all) != a.nrows:
        rest = _residual_poly(field, poly, [(lam, sum(c)) for lam, c in zip(roots, chars_all)])
        raise FieldNotSplitting([field.render(c) for c in rest])
    return roots, chars_all


def eigenvalues(a: Matrix) -> list:
    """Distinct eigenvalues in the field order; raises if the spectrum leaves the field."""
    return _spectrum(a)[0]


def _residual_poly(field: Field, poly: list, roots_with_mult: list) -> list:
    rest = list(poly)
    for lam, mult in roots_with_mult:
        for _ in range(mult):
            rest, _ = _poly_divmod(field, rest, [field.one, field.neg(lam)])
    return rest


def _chain_tops(a: Matrix, lam, chars: Sequence[int]) -> list[tuple[int, list]]:
    """Generalised eigenvector chains for ``lam``: (length, top vector), longest first."""
    field = a.field
    n = a.nrows
    b = a - Matrix.scalar(field, n, lam)
    k = len(chars)
    kernels = [[]]
    power = Matrix.identity(field, n)
    for _ in range(k):
        power = power @ b
        kernels.append(nullspace(power))

    def apply(v):
        return [field.dot(r, v) for r in b.rows]

    chains: list[tuple[int, list]] = []
    level_vectors: list[list] = []
    for j in range(k, 0, -1):
        images = [apply(v) for v in level_vectors]
        space = RowSpace(field, n, kernels[j - 1])
        for v in images:
            if not space.add(v):
                raise AssertionError("chain images are dependent")
        chosen = []
        for cand in kernels[j]:
            if space.add(cand):
                chosen.append(cand)
        expected = chars[j - 1] - (chars[j] if j < k else 0)
        if len(chosen) != expected:
            raise AssertionError("chain completion produced the wrong number of tops")
        chains.extend((j, v) for v in chosen)
        level_vectors = images + chosen
    return chains


def weyr_form(a: Matrix) -> WeyrForm:
    """Weyr form W and a transform P with P^{-1} A P = W."""
    if not a.is_square:
        raise SizeMismatch("Weyr form of a non-square matrix")
    field = a.field
    n = a.nrows
    if n == 0:
        return WeyrForm(a, a, WeyrStructure(field, (), ()))
    roots, chars_all = _spectrum(a)
    columns = []
    for lam, chars in zip(roots, chars_all):
        chains = _chain_tops(a, lam, chars)
        b = a - Matrix.scalar(field, n, lam)
        vectors = []
        for length, top in chains:
            seq = [top]
            for _ in range(length - 1):
                seq.append([field.dot(r, seq[-1]) for r in b.rows])
            vectors.append(seq[::-1])  # eigenvector first
        for j in range(len(chars)):
            for chain in vectors:
                if len(chain) > j:
                    columns.append(chain[j])
    p = Matrix.from_columns(field, columns, n)
    structure = WeyrStructure(field, tuple(roots), tuple(chars_all))
    w = build_weyr(field, roots, chars_all)
    if inverse(p) @ a @ p != w:
        raise AssertionError("Weyr transform failed to conjugate onto the Weyr matrix")
    return WeyrForm(w, p, structure)


def is_weyr(m: Matrix) -> WeyrStructure | None:
    """Structure of ``m`` if it is exactly a Weyr matrix, else None."""
    if not m.is_square:
        return None
    field = m.field
    n = m.nrows
    if n == 0:
        return WeyrStructure(field, (), ())
    diag = [m[i, i] for i in range(n)]
    runs = []
    start = 0
    for i in range(1, n + 1):
        if i == n or diag[i] != diag[start]:
            runs.append((start, i))
            start = i
    keys = [field.sort_key(diag[s]) for s, _ in runs]
    if any(k1 >= k2 for k1, k2 in zip(keys, keys[1:])):
        return None
    eigs, chars_all = [], []
    for s, e in runs:
        lam = diag[s]
        size = e - s

        def col_nonzero_rows(c, lo, hi):
            return any(m[r, c] != (lam if r == c else 0) for r in range(lo, hi))

        m1 = 0
        while m1 < size and not col_nonzero_rows(s + m1, s, s + size):
            m1 += 1
        if m1 == 0:
            return None
        chars = [m1]
        lo, hi = s, s + m1
        while hi < e:
            nxt = hi
            while nxt < e and col_nonzero_rows(nxt, lo, hi):
                nxt += 1
            if nxt == hi:
                return None
            chars.append(nxt - hi)
            lo, hi = hi, nxt
        if any(x < y for x, y in zip(chars, chars[1:])):
            return None
        eigs.append(lam)
        chars_all.append(tuple(chars))
    if build_weyr(field, eigs, chars_all) != m:
        return None
    return WeyrStructure(field, tuple(eigs), tuple(chars_all))


# ------------------------------------------------------------ commutant

def _commutant_basis(w: Matrix) -> list[Matrix]:
    """Basis of {X : XW = WX} by solving the entrywise linear system."""
    field = w.field
    n = w.nrows
    rows = []
    for a_ in range(n):
        for b_ in range(n):
            coeffs = [field.zero] * (n * n)
            for k in range(n):
                if w[k, b_] != 0:
                    idx = a_ * n + k
                    coeffs[idx] = field.add(coeffs[idx], w[k, b_])
                if w[a_, k] != 0:
                    idx = k * n + b_
                    coeffs[idx] = field.sub(coeffs[idx], w[a_, k])
            if any(c != 0 for c in coeffs):
                rows.append(coeffs)
    basis = nullspace_rows(field, rows, n * n)
    return [Matrix._raw(field, tuple(tuple(v[i * n:(i + 1) * n]) for i in range(n)), n, n) for v in basis]


@functools.lru_cache(maxsize=512)
def basic_commutant(structure: WeyrStructure):
    """Commutant of the Weyr matrix with one chain per distinct chain length.

    It is a basic algebra whose strips correspond one-to-one to the pieces of
    ``structure``; inflating it by the piece sizes gives the full commutant.
    """
    from .algebra import ReducedAlgebra

    field = structure.field
    chars0 = []
    for chars in structure.characteristics:
        k = len(chars)
        lengths = [l for l in range(1, k + 1) if chars[l - 1] - (chars[l] if l < k else 0) > 0]
        chars0.append(tuple(sum(1 for l in lengths if l >= j) for j in range(1, k + 1)))
    w0 = build_weyr(field, structure.eigenvalues, chars0)
    basis = _commutant_basis(w0)
    alg = ReducedAlgebra.from_span(field, w0.nrows, basis)
    expected = structure.standard_partition.classes
    if alg.partition.classes != expected:
        raise AssertionError("commutant classes disagree with chain-length labelling")
    return alg


def commutant_algebra(w: Matrix, structure: WeyrStructure | None = None):
    """The reduced algebra {X : XW = WX} over the standard partition of W."""
    if structure is None:
        structure = is_weyr(w)
        if structure is None:
            raise ValueError("matrix is not a Weyr matrix")
    return basic_commutant(structure).inflate(structure.standard_partition.sizes)
