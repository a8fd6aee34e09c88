"""Exact dense matrices, row reduction and block-partition bookkeeping."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import PartitionMismatch, Singular, SizeMismatch, NotStepSequence
from .field import QQ, Field, FieldElement


class Matrix:
    """An immutable m x n matrix over an exact field.

    Entries are raw field values (``Fraction`` or ``int``); ``M[i, j]`` returns
    the raw value and ``M.element(i, j)`` a ``FieldElement``.
    """

    __slots__ = ("field", "nrows", "ncols", "_rows", "_hash")

    def __init__(self, field: Field, rows: Iterable[Sequence], nrows: int | None = None,
                 ncols: int | None = None, *, coerce: bool = True):
        if coerce:
            data = tuple(tuple(field.coerce(x) for x in row) for row in rows)
        else:
            data = tuple(tuple(row) for row in rows)
        if nrows is None:
            nrows = len(data)
        if ncols is None:
            ncols = len(data[0]) if data else 0
        if len(data) != nrows or any(len(r) != ncols for r in data):
            raise SizeMismatch(f"ragged or mis-sized entries for a {nrows}x{ncols} matrix")
        self.field = field
        self.nrows = nrows
        self.ncols = ncols
        self._rows = data
        self._hash = None

    # construction helpers
    @classmethod
    def _raw(cls, field: Field, rows, nrows: int, ncols: int) -> "Matrix":
        m = object.__new__(cls)
        m.field = field
        m.nrows = nrows
        m.ncols = ncols
        m._rows = rows if isinstance(rows, tuple) else tuple(tuple(r) for r in rows)
        m._hash = None
        return m

    @classmethod
    def zeros(cls, field: Field, nrows: int, ncols: int | None = None) -> "Matrix":
        ncols = nrows if ncols is None else ncols
        z = field.zero
        return cls._raw(field, tuple((z,) * ncols for _ in range(nrows)), nrows, ncols)

    @classmethod
    def identity(cls, field: Field, n: int) -> "Matrix":
        z, o = field.zero, field.one
        return cls._raw(field, tuple(tuple(o if i == j else z for j in range(n)) for i in range(n)), n, n)

    @classmethod
    def scalar(cls, field: Field, n: int, value) -> "Matrix":
        value = field.coerce(value)
        z = field.zero
        return cls._raw(field, tuple(tuple(value if i == j else z for j in range(n)) for i in range(n)), n, n)

    @classmethod
    def from_columns(cls, field: Field, columns: Sequence[Sequence], nrows: int) -> "Matrix":
        return cls._raw(field, tuple(tuple(c[i] for c in columns) for i in range(nrows)), nrows, len(columns))

    @classmethod
    def unit(cls, field: Field, nrows: int, ncols: int, i: int, j: int) -> "Matrix":
        rows = [[field.zero] * ncols for _ in range(nrows)]
        rows[i][j] = field.one
        return cls._raw(field, rows, nrows, ncols)

    # access
    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    @property
    def rows(self) -> tuple[tuple, ...]:
        return self._rows

    def __getitem__(self, idx):
        i, j = idx
        return self._rows[i][j]

    def element(self, i: int, j: int) -> FieldElement:
        return FieldElement(self.field, self._rows[i][j])

    def row(self, i: int) -> tuple:
        return self._rows[i]

    def column(self, j: int) -> list:
        return [r[j] for r in self._rows]

    def columns(self) -> list[list]:
        return [self.column(j) for j in range(self.ncols)]

    def to_lists(self) -> list[list]:
        return [list(r) for r in self._rows]

    def render(self) -> list[list[str]]:
        return [[self.field.render(x) for x in r] for r in self._rows]

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return (self.field == other.field and self.nrows == other.nrows
                and self.ncols == other.ncols and self._rows == other._rows)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.nrows, self.ncols, self._rows))
        return self._hash

    def __repr__(self):
        body = "; ".join(" ".join(self.field.render(x) for x in r) for r in self._rows)
        return f"Matrix[{self.field.name}]({self.nrows}x{self.ncols}: {body})"

    # predicates
    @property
    def is_square(self) -> bool:
        return self.nrows == self.ncols

    def is_zero(self) -> bool:
        return all(x == 0 for r in self._rows for x in r)

    def is_identity(self) -> bool:
        return self.is_square and all(
            (x == 1 if i == j else x == 0) for i, r in enumerate(self._rows) for j, x in enumerate(r))

    def scalar_value(self):
        """Return c when the matrix is c*I (square), otherwise None."""
        if not self.is_square:
            return None
        if self.nrows == 0:
            return self.field.zero
        c = self._rows[0][0]
        for i, r in enumerate(self._rows):
            for j, x in enumerate(r):
                if x != (c if i == j else 0):
                    return None
        return c

    # arithmetic
    def _check_field(self, other: "Matrix"):
        if self.field != other.field:
            from .errors import FieldMismatch
            raise FieldMismatch(f"{self.field} vs {other.field}")

    def __add__(self, other: "Matrix") -> "Matrix":
        self._check_field(other)
        if self.shape != other.shape:
            raise SizeMismatch(f"{self.shape} + {other.shape}")
        add = self.field.add
        return Matrix._raw(self.field, tuple(tuple(add(a, b) for a, b in zip(r, s))
                                             for r, s in zip(self._rows, other._rows)), self.nrows, self.ncols)

    def __sub__(self, other: "Matrix") -> "Matrix":
        self._check_field(other)
        if self.shape != other.shape:
            raise SizeMismatch(f"{self.shape} - {other.shape}")
        sub = self.field.sub
        return Matrix._raw(self.field, tuple(tuple(sub(a, b) for a, b in zip(r, s))
                                             for r, s in zip(self._rows, other._rows)), self.nrows, self.ncols)

    def __neg__(self) -> "Matrix":
        neg = self.field.neg
        return Matrix._raw(self.field, tuple(tuple(neg(a) for a in r) for r in self._rows), self.nrows, self.ncols)

    def __matmul__(self, other: "Matrix") -> "Matrix":
        self._check_field(other)
        if self.ncols != other.nrows:
            raise SizeMismatch(f"{self.shape} @ {other.shape}")
        dot = self.field.dot
        cols = list(zip(*other._rows)) if other.nrows else [()] * other.ncols
        return Matrix._raw(self.field, tuple(tuple(dot(r, c) for c in cols) for r in self._rows),
                           self.nrows, other.ncols)

    def scale(self, c) -> "Matrix":
        c = self.field.coerce(c)
        return Matrix._raw(self.field, tuple(tuple(self.field.scale(c, r)) for r in self._rows),
                           self.nrows, self.ncols)

    def __pow__(self, k: int) -> "Matrix":
        if not self.is_square or k < 0:
            raise SizeMismatch("power needs a square matrix and k >= 0")
        result = Matrix.identity(self.field, self.nrows)
        base = self
        while k:
            if k & 1:
                result = result @ base
            base = base @ base
            k >>= 1
        return result

    def transpose(self) -> "Matrix":
        return Matrix._raw(self.field, tuple(zip(*self._rows)) if self.nrows else tuple(() for _ in range(self.ncols)),
                           self.ncols, self.nrows)

    @property
    def T(self) -> "Matrix":
        return self.transpose()

    # blocks
    def block(self, r0: int, r1: int, c0: int, c1: int) -> "Matrix":
        """Sub-grid rows [r0, r1) and columns [c0, c1)."""
        if not (0 <= r0 <= r1 <= self.nrows and 0 <= c0 <= c1 <= self.ncols):
            raise SizeMismatch(f"block [{r0}:{r1}, {c0}:{c1}] outside {self.shape}")
        return Matrix._raw(self.field, tuple(r[c0:c1] for r in self._rows[r0:r1]), r1 - r0, c1 - c0)

    def with_block(self, r0: int, c0: int, b: "Matrix") -> "Matrix":
        if r0 + b.nrows > self.nrows or c0 + b.ncols > self.ncols:
            raise SizeMismatch(f"block of shape {b.shape} at ({r0},{c0}) overflows {self.shape}")
        rows = [list(r) for r in self._rows]
        for i, br in enumerate(b._rows):
            rows[r0 + i][c0:c0 + b.ncols] = br
        return Matrix._raw(self.field, tuple(tuple(r) for r in rows), self.nrows, self.ncols)

    def permute(self, perm: Sequence[int]) -> "Matrix":
        """Return P^{-1} M P for the permutation matrix P whose column k is e_{perm[k]}."""
        rows = self._rows
        return Matrix._raw(self.field, tuple(tuple(rows[a][b] for b in perm) for a in perm),
                           self.nrows, self.ncols)

    def inverse(self) -> "Matrix":
        return inverse(self)

    def rank(self) -> int:
        return rank(self)


def permutation_matrix(field: Field, perm: Sequence[int]) -> Matrix:
    """Matrix whose k-th column is the unit vector e_{perm[k]}."""
    n = len(perm)
    rows = [[field.zero] * n for _ in range(n)]
    for k, a in enumerate(perm):
        rows[a][k] = field.one
    return Matrix._raw(field, rows, n, n)


def block_diag(field: Field, blocks: Sequence[Matrix]) -> Matrix:
    n = sum(b.nrows for b in blocks)
    m = sum(b.ncols for b in blocks)
    out = Matrix.zeros(field, n, m)
    r = c = 0
    for b in blocks:
        out = out.with_block(r, c, b)
        r += b.nrows
        c += b.ncols
    return out


def from_blocks(field: Field, grid: Sequence[Sequence[Matrix]]) -> Matrix:
    heights = [row[0].nrows for row in grid]
    widths = [b.ncols for b in grid[0]] if grid else []
    out = Matrix.zeros(field, sum(heights), sum(widths))
    r = 0
    for i, row in enumerate(grid):
        c = 0
        for j, b in enumerate(row):
            if b.shape != (heights[i], widths[j]):
                raise SizeMismatch("inconsistent block grid")
            out = out.with_block(r, c, b)
            c += widths[j]
        r += heights[i]
    return out


# ---------------------------------------------------------------- elimination

def rref_rows(field: Field, rows: Sequence[Sequence], ncols: int, track: bool = False):
    """Gauss-Jordan on raw rows.

    Returns (reduced rows, pivot columns, transform rows or None).
    """
    work = [list(r) for r in rows]
    m = len(work)
    trans = None
    if track:
        z, o = field.zero, field.one
        trans = [[o if i == j else z for j in range(m)] for i in range(m)]
    pivots = []
    r = 0
    for c in range(ncols):
        if r == m:
            break
        piv = None
        for i in range(r, m):
            if work[i][c] != 0:
                piv = i
                break
        if piv is None:
            continue
        if piv != r:
            work[r], work[piv] = work[piv], work[r]
            if track:
                trans[r], trans[piv] = trans[piv], trans[r]
        lead = work[r][c]
        if lead != 1:
            inv = field.inv(lead)
            work[r] = field.scale(inv, work[r])
            if track:
                trans[r] = field.scale(inv, trans[r])
        prow = work[r]
        for i in range(m):
            if i != r:
                f = work[i][c]
                if f != 0:
                    work[i] = field.axpy(work[i], f, prow)
                    if track:
                        trans[i] = field.axpy(trans[i], f, trans[r])
        pivots.append(c)
        r += 1
    return work, pivots, trans


@dataclass(frozen=True)
class RrefResult:
    R: Matrix
    rank: int
    pivots: tuple[int, ...]
    transform: Matrix


def rref(a: Matrix) -> RrefResult:
    """Reduced row echelon form with ``transform @ a == R``."""
    work, pivots, trans = rref_rows(a.field, a.rows, a.ncols, track=True)
    R = Matrix._raw(a.field, work, a.nrows, a.ncols)
    T = Matrix._raw(a.field, trans, a.nrows, a.nrows)
    return RrefResult(R, len(pivots), tuple(pivots), T)


def rank(a: Matrix) -> int:
    if a.nrows == 0 or a.ncols == 0:
        return 0
    return len(rref_rows(a.field, a.rows, a.ncols)[1])


def nullspace_rows(field: Field, rows: Sequence[Sequence], ncols: int) -> list[list]:
    """Basis of {x : rows . x = 0}, one vector per free column, in column order."""
    work, pivots, _ = rref_rows(field, rows, ncols)
    pivset = set(pivots)
    basis = []
    for f in range(ncols):
        if f in pivset:
            continue
        v = [field.zero] * ncols
        v[f] = field.one
        for r, c in enumerate(pivots):
            if work[r][f] != 0:
                v[c] = field.neg(work[r][f])
        basis.append(v)
    return basis


def nullspace(a: Matrix) -> list[list]:
    return nullspace_rows(a.field, a.rows, a.ncols)


def solve(a: Matrix, b: Sequence) -> tuple[list, list[list]] | None:
    """Solve a x = b.

    ``b`` is a column given as a sequence (or an m x 1 matrix).  Returns None
    when inconsistent, otherwise (particular solution, nullspace basis).
    """
    field = a.field
    if isinstance(b, Matrix):
        if b.ncols != 1:
            raise SizeMismatch("right-hand side must be a single column")
        b = b.column(0)
    b = [field.coerce(x) for x in b]
    if len(b) != a.nrows:
        raise SizeMismatch(f"{a.nrows} equations but {len(b)} right-hand sides")
    aug = [list(r) + [bi] for r, bi in zip(a.rows, b)]
    work, pivots, _ = rref_rows(field, aug, a.ncols + 1)
    if a.ncols in pivots:
        return None
    x = [field.zero] * a.ncols
    for r, c in enumerate(pivots):
        x[c] = work[r][a.ncols]
    return x, nullspace(a)


def inverse(a: Matrix) -> Matrix:
    if not a.is_square:
        raise SizeMismatch("inverse of a non-square matrix")
    n = a.nrows
    field = a.field
    z, o = field.zero, field.one
    aug = [list(r) + [o if i == j else z for j in range(n)] for i, r in enumerate(a.rows)]
    work, pivots, _ = rref_rows(field, aug, 2 * n)
    if n and (len(pivots) < n or pivots[n - 1] >= n):
        raise Singular("matrix is singular")
    return Matrix._raw(field, tuple(tuple(r[n:]) for r in work), n, n)


def is_invertible(a: Matrix) -> bool:
    return a.is_square and rank(a) == a.nrows


def det(a: Matrix):
    if not a.is_square:
        raise SizeMismatch("determinant of a non-square matrix")
    field = a.field
    work = [list(r) for r in a.rows]
    n = a.nrows
    d = field.one
    for c in range(n):
        piv = next((i for i in range(c, n) if work[i][c] != 0), None)
        if piv is None:
            return field.zero
        if piv != c:
            work[c], work[piv] = work[piv], work[c]
            d = field.neg(d)
        d = field.mul(d, work[c][c])
        inv = field.inv(work[c][c])
        for i in range(c + 1, n):
            f = work[i][c]
            if f != 0:
                work[i] = field.axpy(work[i], field.mul(f, inv), work[c])
    return d


class RowSpace:
    """Incrementally maintained row space supporting membership and extension."""

    def __init__(self, field: Field, ncols: int, rows: Iterable[Sequence] = ()):
        self.field = field
        self.ncols = ncols
        self._rows: list[list] = []
        self._pivots: list[int] = []
        for r in rows:
            self.add(r)

    @property
    def dim(self) -> int:
        return len(self._rows)

    def reduce(self, v: Sequence) -> list:
        field = self.field
        v = list(v)
        for row, c in zip(self._rows, self._pivots):
            f = v[c]
            if f != 0:
                v = field.axpy(v, f, row)
        return v

    def contains(self, v: Sequence) -> bool:
        return all(x == 0 for x in self.reduce(v))

    def add(self, v: Sequence) -> bool:
        """Insert v; return True when the dimension grew."""
        res = self.reduce(v)
        for c, x in enumerate(res):
            if x != 0:
                self._rows.append(self.field.scale(self.field.inv(x), res))
                self._pivots.append(c)
                return True
        return False


# ------------------------------------------------------- characteristic poly

def char_poly(a: Matrix) -> list:
    """Monic characteristic polynomial, coefficients from the highest degree down."""
    if not a.is_square:
        raise SizeMismatch("characteristic polynomial of a non-square matrix")
    if a.field.characteristic == 0:
        return _char_poly_faddeev(a)
    return _char_poly_hessenberg(a)


def _char_poly_faddeev(a: Matrix) -> list:
    # Faddeev-LeVerrier: needs division by 1..n, hence characteristic zero only.
    field = a.field
    n = a.nrows
    coeffs = [field.one]
    m = Matrix.zeros(field, n)
    ident = Matrix.identity(field, n)
    c = field.one
    for k in range(1, n + 1):
        m = a @ m + ident.scale(c)
        am = a @ m
        trace = sum((am[i, i] for i in range(n)), field.zero)
        c = field.neg(field.div(trace, field.coerce(k)))
        coeffs.append(c)
    return coeffs


def _char_poly_hessenberg(a: Matrix) -> list:
    # Similarity reduction to upper Hessenberg form, then the standard
    # three-term expansion; exact over any field.
    field = a.field
    n = a.nrows
    h = [list(r) for r in a.rows]
    for m in range(1, n - 1):
        piv = next((i for i in range(m, n) if h[i][m - 1] != 0), None)
        if piv is None:
            continue
        if piv != m:
            h[piv], h[m] = h[m], h[piv]
            for row in h:
                row[piv], row[m] = row[m], row[piv]
        t = field.inv(h[m][m - 1])
        for i in range(m + 1, n):
            u = field.mul(h[i][m - 1], t)
            if u != 0:
                h[i] = field.axpy(h[i], u, h[m])
                for row in h:
                    row[m] = field.add(row[m], field.mul(u, row[i]))
    # polys stored lowest degree first while building
    polys = [[field.one]]
    for m in range(1, n + 1):
        prev = polys[m - 1]
        pm = [field.zero] + list(prev)
        hmm = h[m - 1][m - 1]
        for d, x in enumerate(prev):
            pm[d] = field.sub(pm[d], field.mul(hmm, x))
        t = field.one
        for i in range(m - 1, 0, -1):
            t = field.mul(t, h[i][i - 1])
            f = field.mul(h[i - 1][m - 1], t)
            if f != 0:
                for d, x in enumerate(polys[i - 1]):
                    pm[d] = field.sub(pm[d], field.mul(f, x))
        polys.append(pm)
    return list(reversed(polys[n]))


def poly_eval_matrix(coeffs: Sequence, a: Matrix) -> Matrix:
    """Evaluate a polynomial (highest degree first) at a square matrix by Horner."""
    field = a.field
    result = Matrix.zeros(field, a.nrows)
    ident = Matrix.identity(field, a.nrows)
    for c in coeffs:
        result = result @ a + ident.scale(c)
    return result


# ------------------------------------------------------------- partitions

def _normalize_labels(labels: Sequence) -> tuple[int, ...]:
    seen: dict = {}
    out = []
    for x in labels:
        if x not in seen:
            seen[x] = len(seen)
        out.append(seen[x])
    return tuple(out)


@dataclass(frozen=True)
class StepPartition:
    """Strip sizes plus an equivalence relation on the strips.

    Classes are relabelled 0, 1, ... in order of first occurrence.
    """

    sizes: tuple[int, ...]
    classes: tuple[int, ...] | None = None

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        if any(s < 0 for s in sizes):
            raise ValueError("strip sizes must be non-negative")
        classes = tuple(range(len(sizes))) if self.classes is None else _normalize_labels(self.classes)
        if len(classes) != len(sizes):
            raise ValueError("one class label per strip is required")
        first_size: dict[int, int] = {}
        for s, c in zip(sizes, classes):
            if first_size.setdefault(c, s) != s:
                raise NotStepSequence(f"strips of class {c} have different sizes")
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "classes", classes)

    @property
    def t(self) -> int:
        return len(self.sizes)

    @property
    def n(self) -> int:
        return sum(self.sizes)

    @property
    def offsets(self) -> tuple[int, ...]:
        out, acc = [], 0
        for s in self.sizes:
            out.append(acc)
            acc += s
        out.append(acc)
        return tuple(out)

    @property
    def num_classes(self) -> int:
        return max(self.classes) + 1 if self.classes else 0

    def members(self, c: int) -> list[int]:
        return [i for i, k in enumerate(self.classes) if k == c]

    def class_size(self, c: int) -> int:
        return self.sizes[self.classes.index(c)]

    def span(self, i: int) -> tuple[int, int]:
        off = self.offsets
        return off[i], off[i + 1]

    def strip_of(self, index: int) -> int:
        """Strip containing absolute row/column ``index``."""
        off = self.offsets
        for i in range(self.t):
            if off[i] <= index < off[i + 1]:
                return i
        raise IndexError(index)


def _check_conformal(m: Matrix, p: StepPartition):
    if m.nrows != p.n or m.ncols != p.n:
        raise PartitionMismatch(f"matrix {m.shape} does not conform to sizes {p.sizes}")


def block_view(m: Matrix, p: StepPartition, i: int, j: int) -> Matrix:
    """The (i, j) block (0-based strip indices)."""
    _check_conformal(m, p)
    off = p.offsets
    return m.block(off[i], off[i + 1], off[j], off[j + 1])


def block_write(m: Matrix, p: StepPartition, i: int, j: int, b: Matrix) -> Matrix:
    _check_conformal(m, p)
    if b.shape != (p.sizes[i], p.sizes[j]):
        raise PartitionMismatch(f"block ({i},{j}) has shape {(p.sizes[i], p.sizes[j])}, got {b.shape}")
    off = p.offsets
    return m.with_block(off[i], off[j], b)


def matrix(entries: Sequence[Sequence], field: Field = QQ) -> Matrix:
    """Convenience constructor: ``matrix([[1, 2], [3, 4]])`` over Q by default."""
    entries = [list(r) for r in entries]
    ncols = len(entries[0]) if entries else 0
    return Matrix(field, entries, len(entries), ncols)


# ------------------------------------------------------------------- JSON

def matrix_to_json(m: Matrix) -> dict:
    return {"field": m.field.name, "rows": m.nrows, "cols": m.ncols, "entries": m.render()}


def matrix_from_json(data, field: Field | None = None) -> Matrix:
    from .errors import ParseError
    from .field import get_field

    try:
        fld = get_field(field if field is not None else data.get("field", "Q"))
        entries = data["entries"]
        nrows = int(data.get("rows", len(entries)))
        ncols = int(data.get("cols", len(entries[0]) if entries else 0))
        values = [[fld.coerce(x if isinstance(x, (str, int)) else str(x)) for x in row] for row in entries]
    except (KeyError, TypeError, AttributeError) as exc:
        raise ParseError(f"malformed matrix JSON: {exc}") from None
    return Matrix(fld, values, nrows, ncols, coerce=False)
