"""Reduced block-triangular matrix algebras.

A reduced algebra is fixed by a ``StepPartition`` (strip sizes and a class
relation: diagonal blocks of equivalent strips are equal) together with, for
every ordered pair of classes (I, J), a homogeneous linear system with scalar
coefficients on the upper off-diagonal blocks S_ij, i in I, j in J, i < j.
A basic algebra is the special case where every strip has size 1.
"""
from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field as dc_field
from typing import Hashable, Iterable, Mapping, Sequence

from .errors import NotBasic, NotClosed, SizeMismatch
from .field import Field, get_field
from .linalg import Matrix, RowSpace, StepPartition, block_diag, is_invertible, nullspace_rows, rref_rows

Position = tuple[int, int]
Pair = tuple[int, int]


def pair_variables(partition: StepPartition) -> dict[Pair, list[Position]]:
    """All upper off-diagonal block positions grouped by class pair."""
    out: dict[Pair, list[Position]] = {}
    cls = partition.classes
    for i in range(partition.t):
        for j in range(i + 1, partition.t):
            out.setdefault((cls[i], cls[j]), []).append((i, j))
    return out


@dataclass(frozen=True)
class ClassPairSystem:
    """Constraint rows (in rref) on the block variables of one class pair."""

    pair: Pair
    variables: tuple[Position, ...]
    rows: tuple[tuple, ...]

    @property
    def rank(self) -> int:
        return len(self.rows)

    @property
    def free_dim(self) -> int:
        return len(self.variables) - len(self.rows)

    def row_dicts(self) -> list[dict[Position, object]]:
        return [{v: c for v, c in zip(self.variables, row) if c != 0} for row in self.rows]

    def solutions(self, field: Field) -> list[list]:
        """Basis of the solution space as coefficient vectors over the variables."""
        return nullspace_rows(field, self.rows, len(self.variables))


def _rref_system(field: Field, variables: Sequence[Position], rows: Iterable) -> tuple[tuple, ...]:
    index = {v: k for k, v in enumerate(variables)}
    dense = []
    for row in rows:
        if isinstance(row, Mapping):
            vec = [field.zero] * len(variables)
            for v, c in row.items():
                if v not in index:
                    raise ValueError(f"variable {v} does not belong to this class pair")
                vec[index[v]] = field.add(vec[index[v]], field.coerce(c))
        else:
            vec = [field.coerce(c) for c in row]
            if len(vec) != len(variables):
                raise SizeMismatch("constraint row length differs from the variable count")
        dense.append(vec)
    if not dense:
        return ()
    work, pivots, _ = rref_rows(field, dense, len(variables))
    return tuple(tuple(r) for r in work[:len(pivots)])


@dataclass(frozen=True)
class ClassSplit:
    """How one class is cut during a refinement step.

    ``sizes`` are the piece sizes, ``labels`` name the new class of each piece
    (pieces sharing a label, possibly from different classes, merge), and
    ``relations`` are extra linear rows on the sub-blocks (alpha, beta),
    alpha < beta, of the class's diagonal block.
    """

    sizes: tuple[int, ...]
    labels: tuple[Hashable, ...]
    relations: tuple[Mapping[tuple[int, int], object], ...] = dc_field(default=())


class ReducedAlgebra:
    """A reduced matrix algebra given by a partition and class-pair systems."""

    def __init__(self, field: Field, partition: StepPartition,
                 systems: Mapping[Pair, Iterable] | None = None):
        self.field = get_field(field)
        self.partition = partition
        self._variables = pair_variables(partition)
        systems = systems or {}
        for pair in systems:
            if pair not in self._variables and any(True for _ in systems[pair]):
                raise ValueError(f"class pair {pair} has no variables")
        built = {}
        for pair, variables in self._variables.items():
            rows = _rref_system(self.field, variables, systems.get(pair, ()))
            built[pair] = ClassPairSystem(pair, tuple(variables), rows)
        self.systems: dict[Pair, ClassPairSystem] = built

    # basic accessors
    @property
    def sizes(self) -> tuple[int, ...]:
        return self.partition.sizes

    @property
    def classes(self) -> tuple[int, ...]:
        return self.partition.classes

    @property
    def t(self) -> int:
        return self.partition.t

    @property
    def n(self) -> int:
        return self.partition.n

    @property
    def is_basic(self) -> bool:
        return all(s == 1 for s in self.sizes)

    def system(self, i_class: int, j_class: int) -> ClassPairSystem:
        pair = (i_class, j_class)
        if pair not in self.systems:
            return ClassPairSystem(pair, (), ())
        return self.systems[pair]

    def __repr__(self):
        return (f"ReducedAlgebra({self.field.name}, sizes={self.sizes}, classes={self.classes}, "
                f"constraints={sum(s.rank for s in self.systems.values())})")

    def __eq__(self, other):
        if not isinstance(other, ReducedAlgebra):
            return NotImplemented
        return (self.field == other.field and self.partition == other.partition
                and self.systems == other.systems)

    def __hash__(self):
        return hash((self.field, self.partition, tuple(sorted(self.systems.items()))))

    # constructors
    @classmethod
    def full(cls, field: Field, sizes: Sequence[int]) -> "ReducedAlgebra":
        """All block upper triangular matrices, every strip in its own class."""
        return cls(field, StepPartition(tuple(sizes)))

    @classmethod
    def matrix_algebra(cls, field: Field, n: int) -> "ReducedAlgebra":
        """k^{n x n} as a one-strip algebra."""
        return cls(field, StepPartition((n,)))

    @classmethod
    def from_span(cls, field: Field, t: int, basis: Sequence[Matrix]) -> "ReducedAlgebra":
        """The basic algebra spanned by ``basis`` (t x t matrices)."""
        field = get_field(field)
        for b in basis:
            if b.shape != (t, t):
                raise SizeMismatch(f"expected {t}x{t} spanning matrices, got {b.shape}")
            if any(b[i, j] != 0 for i in range(t) for j in range(i)):
                raise NotBasic("spanning matrix is not upper triangular")
        diag_keys = [tuple(b[i, i] for b in basis) for i in range(t)]
        partition = StepPartition((1,) * t, diag_keys)
        variables = pair_variables(partition)
        systems = {}
        total = partition.num_classes
        for pair, vars_ in variables.items():
            space = RowSpace(field, len(vars_))
            for b in basis:
                space.add([b[i, j] for i, j in vars_])
            total += space.dim
            proj = [[b[i, j] for i, j in vars_] for b in basis]
            systems[pair] = nullspace_rows(field, proj, len(vars_))
        span = RowSpace(field, t * t)
        for b in basis:
            span.add([x for r in b.rows for x in r])
        if span.dim != total:
            raise NotBasic("span does not split into diagonal and class-pair parts")
        alg = cls(field, partition, systems)
        if alg.dim() != span.dim:
            raise NotBasic("span is not closed under the diagonal projection")
        return alg

    # re-sizing
    def with_sizes(self, sizes: Sequence[int]) -> "ReducedAlgebra":
        """Same classes and systems, different strip sizes."""
        partition = StepPartition(tuple(sizes), self.classes)
        return ReducedAlgebra(self.field, partition,
                              {p: s.row_dicts() for p, s in self.systems.items()})

    def inflate(self, sizes: Sequence[int]) -> "ReducedAlgebra":
        if not self.is_basic:
            raise NotBasic("inflation starts from a basic algebra (all strip sizes 1)")
        if len(sizes) != self.t:
            raise SizeMismatch(f"need {self.t} strip sizes, got {len(sizes)}")
        return self.with_sizes(sizes)

    def basic(self) -> "ReducedAlgebra":
        return self.with_sizes((1,) * self.t)

    def over(self, field: Field) -> "ReducedAlgebra":
        """The same systems read over another field."""
        field = get_field(field)
        return ReducedAlgebra(field, self.partition,
                              {p: [{v: field.coerce(c) for v, c in r.items()} for r in s.row_dicts()]
                               for p, s in self.systems.items()})

    # membership and bases
    def contains(self, s: Matrix) -> bool:
        n = self.n
        if s.shape != (n, n):
            raise SizeMismatch(f"expected {n}x{n}, got {s.shape}")
        off = self.partition.offsets
        rows = s.rows
        t = self.t
        for i in range(t):
            for j in range(i):
                for a in range(off[i], off[i + 1]):
                    for b in range(off[j], off[j + 1]):
                        if rows[a][b] != 0:
                            return False
        for c in range(self.partition.num_classes):
            members = self.partition.members(c)
            first = s.block(off[members[0]], off[members[0] + 1], off[members[0]], off[members[0] + 1])
            for i in members[1:]:
                if s.block(off[i], off[i + 1], off[i], off[i + 1]) != first:
                    return False
        dot = self.field.dot
        sizes = self.sizes
        for (ci, cj), system in self.systems.items():
            if not system.rows:
                continue
            ni = sizes[system.variables[0][0]]
            nj = sizes[system.variables[0][1]]
            for a in range(ni):
                for b in range(nj):
                    vec = [rows[off[i] + a][off[j] + b] for i, j in system.variables]
                    for r in system.rows:
                        if dot(r, vec) != 0:
                            return False
        return True

    def _diagonal_basis(self) -> list[Matrix]:
        field = self.field
        off = self.partition.offsets
        out = []
        for c in range(self.partition.num_classes):
            members = self.partition.members(c)
            size = self.sizes[members[0]]
            for a in range(size):
                for b in range(size):
                    rows = [[field.zero] * self.n for _ in range(self.n)]
                    for i in members:
                        rows[off[i] + a][off[i] + b] = field.one
                    out.append(Matrix._raw(field, rows, self.n, self.n))
        return out

    def _radical_basis(self) -> list[Matrix]:
        field = self.field
        off = self.partition.offsets
        out = []
        for pair in sorted(self.systems):
            system = self.systems[pair]
            ni = self.sizes[system.variables[0][0]]
            nj = self.sizes[system.variables[0][1]]
            if ni == 0 or nj == 0:
                continue
            for u in system.solutions(field):
                for a in range(ni):
                    for b in range(nj):
                        rows = [[field.zero] * self.n for _ in range(self.n)]
                        for (i, j), coeff in zip(system.variables, u):
                            if coeff != 0:
                                rows[off[i] + a][off[j] + b] = coeff
                        out.append(Matrix._raw(field, rows, self.n, self.n))
        return out

    @functools.cached_property
    def _spanning(self) -> tuple[Matrix, ...]:
        return tuple(self._diagonal_basis() + self._radical_basis())

    def spanning_set(self) -> list[Matrix]:
        """A vector-space basis: diagonal class blocks first, then class-pair solutions."""
        return list(self._spanning)

    def radical_spanning_set(self) -> list[Matrix]:
        """Basis of the members whose diagonal blocks vanish."""
        return self._radical_basis()

    def dim(self) -> int:
        sizes = self.sizes
        total = 0
        for c in range(self.partition.num_classes):
            total += self.partition.class_size(c) ** 2
        for system in self.systems.values():
            i, j = system.variables[0]
            total += system.free_dim * sizes[i] * sizes[j]
        return total

    def is_subalgebra_of(self, other: "ReducedAlgebra") -> bool:
        return all(other.contains(b) for b in self._spanning)

    # sampling
    def random_element(self, rng, bound: int = 3) -> Matrix:
        field = self.field
        out = Matrix.zeros(field, self.n)
        for b in self._spanning:
            c = field.random(rng, bound)
            if c != 0:
                out = out + b.scale(c)
        return out

    def random_invertible(self, rng, bound: int = 3) -> Matrix:
        """Sample D(I - C): D invertible block diagonal, C with zero diagonal blocks."""
        field = self.field
        n = self.n
        if n == 0:
            return Matrix.zeros(field, 0)
        blocks = {}
        for c in range(self.partition.num_classes):
            size = self.partition.class_size(c)
            while True:
                d = Matrix(field, [[field.random(rng, bound) for _ in range(size)] for _ in range(size)],
                           size, size, coerce=False)
                if is_invertible(d):
                    break
            blocks[c] = d
        dmat = block_diag(field, [blocks[c] for c in self.classes])
        cmat = Matrix.zeros(field, n)
        for b in self._radical_basis():
            coeff = field.random(rng, bound)
            if coeff != 0:
                cmat = cmat + b.scale(coeff)
        return dmat - dmat @ cmat

    def verify_closure(self, sample: int | None = None, rng=None) -> None:
        """Raise NotClosed unless I and all products of spanning elements are members."""
        ident = Matrix.identity(self.field, self.n)
        if not self.contains(ident):
            raise NotClosed(ident, "identity is not a member")
        basis = self._spanning
        pairs = list(itertools.product(range(len(basis)), repeat=2))
        if sample is not None and rng is not None and sample < len(pairs):
            pairs = rng.sample(pairs, sample)
        for a, b in pairs:
            prod = basis[a] @ basis[b]
            if not self.contains(prod):
                raise NotClosed(prod)

    # refinement used by the reduction
    def add_constraint(self, pair: Pair, row: Mapping[Position, object]) -> "ReducedAlgebra":
        systems = {p: s.row_dicts() for p, s in self.systems.items()}
        systems.setdefault(pair, []).append(dict(row))
        return ReducedAlgebra(self.field, self.partition, systems)

    def refine(self, splits: Mapping[int, ClassSplit]) -> tuple["ReducedAlgebra", list[tuple[int, int]]]:
        """Cut classes into pieces, rewriting every system for the sub-blocks.

        Returns the new algebra and, for every new strip, (old strip, piece).
        Sub-block variables that fall below the diagonal are dropped.
        """
        cls = self.classes
        labels = []
        pieces: list[tuple[int, int]] = []
        sizes = []
        piece_count = {}
        for i in range(self.t):
            split = splits.get(cls[i])
            if split is None:
                pieces.append((i, 0))
                sizes.append(self.sizes[i])
                labels.append(("keep", cls[i]))
                piece_count[cls[i]] = 1
            else:
                if sum(split.sizes) != self.sizes[i]:
                    raise SizeMismatch(f"split of class {cls[i]} does not add up to {self.sizes[i]}")
                piece_count[cls[i]] = len(split.sizes)
                for a, (s, lab) in enumerate(zip(split.sizes, split.labels)):
                    pieces.append((i, a))
                    sizes.append(s)
                    labels.append(lab)
        index = {p: k for k, p in enumerate(pieces)}
        partition = StepPartition(tuple(sizes), labels)
        new_cls = partition.classes
        rows: dict[Pair, list[dict]] = {}

        def put(row: dict):
            some = next(iter(row))
            rows.setdefault((new_cls[some[0]], new_cls[some[1]]), []).append(row)

        for (ci, cj), system in self.systems.items():
            for row in system.row_dicts():
                for a in range(piece_count[ci]):
                    for b in range(piece_count[cj]):
                        put({(index[(i, a)], index[(j, b)]): c for (i, j), c in row.items()})
        one, minus = self.field.one, self.field.neg(self.field.one)
        for c in range(self.partition.num_classes):
            split = splits.get(c)
            if split is None:
                continue
            members = self.partition.members(c)
            rep = members[0]
            k = len(split.sizes)
            for a in range(k):
                for b in range(a + 1, k):
                    for i in members[1:]:
                        put({(index[(i, a)], index[(i, b)]): one, (index[(rep, a)], index[(rep, b)]): minus})
            for rel in split.relations:
                row = {(index[(rep, a)], index[(rep, b)]): v for (a, b), v in rel.items() if v != 0}
                if row:
                    put(row)
        return ReducedAlgebra(self.field, partition, rows), pieces

    def compact(self) -> tuple["ReducedAlgebra", list[int]]:
        """Drop size-0 strips; returns the new algebra and the kept strip indices."""
        kept = [i for i, s in enumerate(self.sizes) if s > 0]
        if len(kept) == self.t:
            return self, kept
        index = {i: k for k, i in enumerate(kept)}
        partition = StepPartition(tuple(self.sizes[i] for i in kept), tuple(self.classes[i] for i in kept))
        rows: dict[Pair, list[dict]] = {}
        for system in self.systems.values():
            i0, j0 = system.variables[0]
            if self.sizes[i0] == 0 or self.sizes[j0] == 0:
                continue
            for row in system.row_dicts():
                new = {(index[i], index[j]): c for (i, j), c in row.items()}
                some = next(iter(new))
                rows.setdefault((partition.classes[some[0]], partition.classes[some[1]]), []).append(new)
        return ReducedAlgebra(self.field, partition, rows), kept

    # serialisation
    def to_json(self) -> dict:
        render = self.field.render
        return {
            "field": self.field.name,
            "sizes": list(self.sizes),
            "classes": list(self.classes),
            "systems": [
                {"I": p[0], "J": p[1], "vars": [list(v) for v in s.variables],
                 "rows": [[render(c) for c in r] for r in s.rows]}
                for p, s in sorted(self.systems.items()) if s.rows
            ],
        }

    @classmethod
    def from_json(cls, data: Mapping, field: Field | None = None) -> "ReducedAlgebra":
        fld = get_field(field if field is not None else data.get("field", "Q"))
        partition = StepPartition(tuple(data["sizes"]), tuple(data.get("classes") or range(len(data["sizes"]))))
        systems: dict[Pair, list[dict]] = {}
        for entry in data.get("systems", []):
            variables = [tuple(v) for v in entry["vars"]]
            for r in entry["rows"]:
                row = {v: fld.coerce(c) for v, c in zip(variables, r)}
                systems.setdefault((entry["I"], entry["J"]), []).append(row)
        alg = cls(fld, partition, systems)
        for (ci, cj), rows in systems.items():
            for row in rows:
                for i, j in row:
                    if not (i < j and partition.classes[i] == ci and partition.classes[j] == cj):
                        raise ValueError(f"variable {(i, j)} does not lie in class pair {(ci, cj)}")
        return alg
