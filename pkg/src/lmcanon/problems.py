"""Linear matrix problems.

A problem is a pair (Gamma, M): a basic t x t algebra Gamma and a t x t
matrix space M with Gamma M and M Gamma inside M.  For a step-sequence n the
algebra Gamma_n acts on M_n by similarity S^{-1} X S.  Builders cover quiver
and poset representations, pairs of matrices under simultaneous similarity,
separated problems and upper-triangular similarity.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Mapping, Sequence

from .algebra import ReducedAlgebra
from .errors import (BadIndexing, NotBasic, NotInvariant, NotLinking, NotNilpotent, ParseError,
                     SizeMismatch)
from .field import QQ, Field, get_field
from .linalg import (Matrix, RowSpace, StepPartition, matrix_from_json, matrix_to_json, nullspace_rows,
                     rref_rows)

Position = tuple[int, int]


def order_key(pos: Position) -> tuple[int, int]:
    """Sort key of the block order: bottom row first, left to right within a row."""
    return (-pos[0], pos[1])


@dataclass(frozen=True)
class BlockClassification:
    """Free positions and, for each dependent position, its linear rule.

    A dependent block equals the sum of coeff * (free block) over its rule;
    an empty rule means the block is forced to zero.
    """

    free: tuple[Position, ...]
    rules: Mapping[Position, tuple[tuple[Position, object], ...]]

    def is_free(self, pos: Position) -> bool:
        return pos in self._free_set

    def is_dependent(self, pos: Position) -> bool:
        return pos in self.rules

    @property
    def _free_set(self) -> frozenset:
        return frozenset(self.free)


class ProblemSpec:
    """A linear matrix problem given by a basic algebra and a matrix space."""

    def __init__(self, gamma: ReducedAlgebra, mbasis: Sequence[Matrix], *, kind: str = "pair",
                 meta: Mapping | None = None):
        if not gamma.is_basic:
            raise NotBasic("the problem algebra must be basic")
        self.gamma = gamma
        self.field = gamma.field
        self.t = gamma.t
        self.kind = kind
        self.meta = dict(meta or {})
        t = self.t
        space = RowSpace(self.field, t * t)
        basis = []
        for m in mbasis:
            if m.shape != (t, t):
                raise SizeMismatch(f"matrix space elements must be {t}x{t}")
            if space.add([x for r in m.rows for x in r]):
                basis.append(m)
        self.mbasis = tuple(basis)
        self.equations = self._equations()
        for g in gamma.spanning_set():
            for m in self.mbasis:
                if not (self._member(g @ m) and self._member(m @ g)):
                    raise NotInvariant("matrix space is not a bimodule over the algebra")
        self.classification = self._classify()

    # defining equations of the space, one system per class pair over all its positions
    def _equations(self) -> dict[tuple[int, int], tuple[list[Position], list[list]]]:
        cls = self.gamma.classes
        t = self.t
        groups: dict[tuple[int, int], list[Position]] = {}
        for i in range(t):
            for j in range(t):
                groups.setdefault((cls[i], cls[j]), []).append((i, j))
        out = {}
        total = 0
        for pair, positions in groups.items():
            proj = [[m[i, j] for i, j in positions] for m in self.mbasis]
            sub = RowSpace(self.field, len(positions), proj)
            total += sub.dim
            out[pair] = (positions, nullspace_rows(self.field, proj, len(positions)))
        if total != len(self.mbasis):
            raise NotInvariant("matrix space does not split along class pairs")
        return out

    def _member(self, x: Matrix) -> bool:
        dot = self.field.dot
        for positions, rows in self.equations.values():
            vec = [x[i, j] for i, j in positions]
            if any(dot(r, vec) != 0 for r in rows):
                return False
        return True

    def _classify(self) -> BlockClassification:
        field = self.field
        free: list[Position] = []
        rules: dict[Position, tuple] = {}
        for positions, rows in self.equations.values():
            # Columns run from the last unknown in the block order to the first, so
            # Gauss-Jordan pivots on the latest unknowns and expresses them through
            # earlier ones.
            order = sorted(positions, key=order_key, reverse=True)
            col = {p: k for k, p in enumerate(positions)}
            dense = [[r[col[p]] for p in order] for r in rows]
            work, pivots, _ = rref_rows(field, dense, len(order)) if dense else ([], [], None)
            pivset = set(pivots)
            for k, p in enumerate(order):
                if k not in pivset:
                    free.append(p)
            for r, c in enumerate(pivots):
                terms = tuple((order[k], field.neg(work[r][k])) for k in range(len(order))
                              if k != c and work[r][k] != 0)
                rules[order[c]] = terms
        free.sort(key=order_key)
        return BlockClassification(tuple(free), rules)

    # block-level views
    def _partition(self, sizes: Sequence[int]) -> StepPartition:
        if len(sizes) != self.t:
            raise SizeMismatch(f"need {self.t} strip sizes, got {len(sizes)}")
        return StepPartition(tuple(sizes), self.gamma.classes)

    def algebra(self, sizes: Sequence[int]) -> ReducedAlgebra:
        """Gamma inflated to the step-sequence ``sizes``."""
        return self.gamma.inflate(self._partition(sizes).sizes)

    def classify_blocks(self, sizes: Sequence[int] | None = None) -> BlockClassification:
        if sizes is not None:
            self._partition(sizes)
        return self.classification

    def matrix_space_basis(self, sizes: Sequence[int]) -> list[Matrix]:
        p = self._partition(sizes)
        off = p.offsets
        field = self.field
        n = p.n
        dependents: dict[Position, list[tuple[Position, object]]] = {}
        for dep, terms in self.classification.rules.items():
            for src, coeff in terms:
                dependents.setdefault(src, []).append((dep, coeff))
        out = []
        for i, j in self.classification.free:
            for a in range(p.sizes[i]):
                for b in range(p.sizes[j]):
                    rows = [[field.zero] * n for _ in range(n)]
                    rows[off[i] + a][off[j] + b] = field.one
                    for (l, r), coeff in dependents.get((i, j), ()):
                        rows[off[l] + a][off[r] + b] = field.add(rows[off[l] + a][off[r] + b], coeff)
                    out.append(Matrix._raw(field, rows, n, n))
        return out

    def dim(self, sizes: Sequence[int]) -> int:
        p = self._partition(sizes)
        return sum(p.sizes[i] * p.sizes[j] for i, j in self.classification.free)

    def contains_matrix(self, m: Matrix, sizes: Sequence[int]) -> bool:
        p = self._partition(sizes)
        if m.shape != (p.n, p.n):
            raise SizeMismatch(f"expected {p.n}x{p.n}, got {m.shape}")
        return dependent_violation(m, p, self.classification) is None

    def random_matrix(self, sizes: Sequence[int], rng, bound: int = 3) -> Matrix:
        p = self._partition(sizes)
        field = self.field
        out = Matrix.zeros(field, p.n)
        for b in self.matrix_space_basis(sizes):
            c = field.random(rng, bound)
            if c != 0:
                out = out + b.scale(c)
        return out

    def sizes_from_dims(self, dims: Sequence[int]) -> tuple[int, ...]:
        """Strip sizes from a dimension vector (per vertex for quiver problems)."""
        dims = [int(d) for d in dims]
        strip_dims = self.meta.get("dims_map")
        if strip_dims is not None and len(dims) != self.t:
            if len(dims) != 1 + max(strip_dims, default=-1):
                raise SizeMismatch(f"expected {1 + max(strip_dims, default=-1)} dimensions")
            return tuple(dims[k] for k in strip_dims)
        if len(dims) != self.t:
            raise SizeMismatch(f"expected {self.t} strip sizes, got {len(dims)}")
        return tuple(dims)

    def over(self, field) -> "ProblemSpec":
        field = get_field(field)
        mbasis = [Matrix(field, [[field.coerce(x) for x in r] for r in m.rows], self.t, self.t, coerce=False)
                  for m in self.mbasis]
        return ProblemSpec(self.gamma.over(field), mbasis, kind=self.kind, meta=self.meta)

    def canonicalize(self, m: Matrix, sizes: Sequence[int], **kwargs):
        from .belitskii import canonicalize
        return canonicalize(self.algebra(sizes), m, self.classification, **kwargs)

    def to_json(self) -> dict:
        out = {"kind": "pair", "source": self.kind, "field": self.field.name, "t": self.t,
               "gamma": self.gamma.to_json(),
               "mspace": {"basis": [matrix_to_json(m) for m in self.mbasis]}}
        if self.meta:
            out["meta"] = self.meta
        return out


def dependent_violation(m: Matrix, p: StepPartition, cls: BlockClassification):
    """First dependent block position whose rule fails, or None."""
    off = p.offsets
    field = m.field
    for (l, r), terms in cls.rules.items():
        if p.sizes[l] == 0 or p.sizes[r] == 0:
            continue
        for a in range(p.sizes[l]):
            for b in range(p.sizes[r]):
                expected = field.zero
                for (i, j), c in terms:
                    expected = field.add(expected, field.mul(c, m[off[i] + a, off[j] + b]))
                if m[off[l] + a, off[r] + b] != expected:
                    return (l, r)
    return None


# ---------------------------------------------------------------- triples

@dataclass(frozen=True)
class ProblemTriple:
    """Classes of T = {0..t-1}, linking nilpotent generators P and space generators V."""

    field: Field
    t: int
    classes: tuple
    P: tuple[Matrix, ...] = ()
    V: tuple[Matrix, ...] = ()
    meta: Mapping = dc_field(default_factory=dict)


def _linked_pair(m: Matrix, classes: Sequence) -> tuple | None:
    pairs = {(classes[i], classes[j]) for i in range(m.nrows) for j in range(m.ncols) if m[i, j] != 0}
    if len(pairs) > 1:
        return None
    return next(iter(pairs), ())


def _span_basis(field: Field, mats: Sequence[Matrix]) -> list[Matrix]:
    space = RowSpace(field, mats[0].nrows * mats[0].ncols) if mats else None
    out = []
    for m in mats:
        if space.add([x for r in m.rows for x in r]):
            out.append(m)
    return out


def from_triple(tr: ProblemTriple, kind: str = "triple") -> ProblemSpec:
    field = get_field(tr.field)
    t = tr.t
    classes = tuple(tr.classes)
    if len(classes) != t:
        raise SizeMismatch("one class label per index is required")
    for p in tr.P:
        if p.shape != (t, t):
            raise SizeMismatch("generators must be t x t")
        if any(p[i, j] != 0 for i in range(t) for j in range(i + 1)):
            raise NotNilpotent("P generators must be strictly upper triangular")
        if _linked_pair(p, classes) is None:
            raise NotLinking("a P generator links more than one class pair")
    for v in tr.V:
        if v.shape != (t, t):
            raise SizeMismatch("generators must be t x t")
        if _linked_pair(v, classes) is None:
            raise NotLinking("a V generator links more than one class pair")
    # products of the P's; any product of t strictly upper triangular matrices vanishes
    closure: list[Matrix] = []
    seen = set()
    layer = [p for p in tr.P if not p.is_zero()]
    for _ in range(t):
        nxt = []
        for m in layer:
            if m not in seen:
                seen.add(m)
                closure.append(m)
                nxt.extend(m @ p for p in tr.P)
        layer = [m for m in nxt if not m.is_zero()]
        if not layer:
            break
    idempotents = []
    labels = sorted(set(classes), key=list(classes).index)
    for lab in labels:
        rows = [[field.one if (i == j and classes[i] == lab) else field.zero for j in range(t)] for i in range(t)]
        idempotents.append(Matrix._raw(field, rows, t, t))
    gamma_span = _span_basis(field, idempotents + closure)
    gamma = ReducedAlgebra.from_span(field, t, gamma_span)
    if _partition_labels(gamma.classes) != _partition_labels(classes):
        raise NotLinking("generated algebra does not respect the given classes")
    ident = Matrix.identity(field, t)
    sides = [ident] + closure
    vmats = [a @ v @ b for v in tr.V for a in sides for b in sides]
    vmats = [m for m in vmats if not m.is_zero()]
    mbasis = _span_basis(field, vmats) if vmats else []
    return ProblemSpec(gamma, mbasis, kind=kind, meta=tr.meta)


def _partition_labels(labels: Sequence) -> tuple:
    seen: dict = {}
    return tuple(seen.setdefault(x, len(seen)) for x in labels)


# ---------------------------------------------------------------- builders

def _units(field: Field, t: int, positions) -> list[Matrix]:
    return [Matrix.unit(field, t, t, i, j) for i, j in positions]


@dataclass
class QuiverProblem:
    """A quiver problem with maps between representations and block matrices."""

    spec: ProblemSpec
    vertices: tuple
    arrows: tuple  # (name, source, target)
    strip_vertex: tuple[int, ...]
    arrow_position: dict  # arrow name -> (row strip, column strip)

    def sizes(self, dims: Mapping) -> tuple[int, ...]:
        return tuple(int(dims[self.vertices[v]]) for v in self.strip_vertex)

    def embed(self, dims: Mapping, maps: Mapping[str, Matrix]) -> tuple[tuple[int, ...], Matrix]:
        """Block matrix of a representation (one n_target x n_source matrix per arrow)."""
        field = self.spec.field
        sizes = self.sizes(dims)
        p = StepPartition(sizes)
        off = p.offsets
        out = Matrix.zeros(field, p.n)
        for name, src, dst in self.arrows:
            a = maps[name]
            if a.shape != (int(dims[dst]), int(dims[src])):
                raise SizeMismatch(f"arrow {name} needs a {dims[dst]}x{dims[src]} matrix")
            r, c = self.arrow_position[name]
            out = out.with_block(off[r], off[c], a)
        return sizes, out

    def extract(self, m: Matrix, sizes: Sequence[int]) -> tuple[dict, dict]:
        p = StepPartition(tuple(sizes))
        off = p.offsets
        dims = {}
        for k, v in enumerate(self.strip_vertex):
            dims[self.vertices[v]] = sizes[k]
        maps = {}
        for name, _, _ in self.arrows:
            r, c = self.arrow_position[name]
            maps[name] = m.block(off[r], off[r + 1], off[c], off[c + 1])
        return dims, maps


def quiver_problem(vertices: Sequence, arrows: Sequence, field=QQ) -> QuiverProblem:
    """Quiver representations as a block-matrix problem.

    Each vertex gets a strip; an arrow s -> d sits in the column strip of s
    and in a row strip carrying d.  When that slot is taken a further copy
    of d's strip (same class) is appended.
    """
    field = get_field(field)
    vertices = tuple(vertices)
    vindex = {v: k for k, v in enumerate(vertices)}
    arrows = tuple((str(name), src, dst) for name, src, dst in arrows)
    strip_vertex = list(range(len(vertices)))
    taken = set()
    position = {}
    for name, src, dst in arrows:
        if src not in vindex or dst not in vindex:
            raise ValueError(f"arrow {name} uses an unknown vertex")
        if name in position:
            raise ValueError(f"duplicate arrow name {name}")
        col = vindex[src]
        copies = [k for k, v in enumerate(strip_vertex) if v == vindex[dst]]
        row = next((k for k in reversed(copies) if (k, col) not in taken), None)
        if row is None:
            strip_vertex.append(vindex[dst])
            row = len(strip_vertex) - 1
        taken.add((row, col))
        position[name] = (row, col)
    t = len(strip_vertex)
    meta = {"dims_map": list(strip_vertex), "vertices": [str(v) for v in vertices],
            "arrows": [[n, str(s), str(d)] for n, s, d in arrows]}
    triple = ProblemTriple(field, t, tuple(strip_vertex), (), tuple(_units(field, t, taken)), meta)
    spec = from_triple(triple, kind="quiver")
    return QuiverProblem(spec, vertices, arrows, tuple(strip_vertex), position)


def similarity_problem(field=QQ) -> QuiverProblem:
    return quiver_problem(["1"], [("a", "1", "1")], field)


def kronecker_problem(field=QQ) -> QuiverProblem:
    return quiver_problem(["1", "2"], [("a", "1", "2"), ("b", "1", "2")], field)


def poset_problem(n: int, relations: Sequence[tuple[int, int]] = (), field=QQ) -> ProblemSpec:
    """Representations of a poset on {0..n-1}; ``(i, j)`` means p_i < p_j and needs i < j."""
    field = get_field(field)
    less = set()
    for i, j in relations:
        if not (0 <= i < n and 0 <= j < n) or i >= j:
            raise BadIndexing(f"relation {(i, j)} must satisfy 0 <= i < j < {n}")
        less.add((i, j))
    changed = True
    while changed:
        changed = False
        for (a, b) in list(less):
            for (c, d) in list(less):
                if b == c and (a, d) not in less:
                    less.add((a, d))
                    changed = True
    t = n + 1
    triple = ProblemTriple(field, t, tuple(range(t)), tuple(_units(field, t, sorted(less))),
                           tuple(_units(field, t, [(n, i) for i in range(n)])),
                           {"poset_size": n, "relations": sorted([list(r) for r in less])})
    return from_triple(triple, kind="poset")


@dataclass
class SimsimProblem:
    """Pairs of n x n matrices under simultaneous similarity, packed as [[A, B], [0, 0]]."""

    spec: ProblemSpec
    n: int

    @property
    def sizes(self) -> tuple[int, int]:
        return (self.n, self.n)

    def pack(self, a: Matrix, b: Matrix) -> Matrix:
        field = self.spec.field
        n = self.n
        if a.shape != (n, n) or b.shape != (n, n):
            raise SizeMismatch(f"expected two {n}x{n} matrices")
        return Matrix.zeros(field, 2 * n).with_block(0, 0, a).with_block(0, n, b)

    def unpack(self, m: Matrix) -> tuple[Matrix, Matrix]:
        n = self.n
        return m.block(0, n, 0, n), m.block(0, n, n, 2 * n)


def simsim_problem(n: int, field=QQ) -> SimsimProblem:
    field = get_field(field)
    gamma = ReducedAlgebra.from_span(field, 2, [Matrix.identity(field, 2)])
    spec = ProblemSpec(gamma, _units(field, 2, [(0, 0), (0, 1)]), kind="simsim", meta={"n": n})
    return SimsimProblem(spec, n)


def separated_problem(gamma: ReducedAlgebra, delta: ReducedAlgebra, nspace: Sequence[Matrix]) -> ProblemSpec:
    """Rows transformed by Gamma, columns by Delta: the pair (Gamma + Delta, 0 \\ N)."""
    if not (gamma.is_basic and delta.is_basic):
        raise NotBasic("separated problems need basic algebras")
    field = gamma.field
    m, n = gamma.t, delta.t
    t = m + n
    basis = []
    for g in gamma.spanning_set():
        basis.append(Matrix.zeros(field, t).with_block(0, 0, g))
    for d in delta.spanning_set():
        basis.append(Matrix.zeros(field, t).with_block(m, m, d))
    combined = ReducedAlgebra.from_span(field, t, basis)
    mats = []
    for x in nspace:
        if x.shape != (m, n):
            raise SizeMismatch(f"N elements must be {m}x{n}")
        mats.append(Matrix.zeros(field, t).with_block(0, m, x))
    nspace_basis = _span_basis(field, mats) if mats else []
    space = RowSpace(field, m * n, [[v for r in x.rows for v in r] for x in nspace])
    for g in gamma.spanning_set():
        for x in nspace:
            if not space.contains([v for r in (g @ x).rows for v in r]):
                raise NotInvariant("N is not closed under the row algebra")
    for d in delta.spanning_set():
        for x in nspace:
            if not space.contains([v for r in (x @ d).rows for v in r]):
                raise NotInvariant("N is not closed under the column algebra")
    return ProblemSpec(combined, nspace_basis, kind="separated", meta={"rows": m, "cols": n})


def module_problem(gamma: ReducedAlgebra) -> ProblemSpec:
    """The pair (Gamma + Gamma, 0 \\ R) with R the zero-diagonal part of Gamma."""
    if not gamma.is_basic:
        raise NotBasic("module problems need a basic algebra")
    spec = separated_problem(gamma, gamma, gamma.radical_spanning_set())
    spec.kind = "module"
    return spec


def upper_triangular_problem(t: int, field=QQ) -> ProblemSpec:
    if t < 1:
        raise ValueError("t must be positive")
    field = get_field(field)
    gamma = ReducedAlgebra.full(field, (1,) * t)
    return ProblemSpec(gamma, _units(field, t, [(i, j) for i in range(t) for j in range(i, t)]),
                       kind="upper_triangular", meta={"t": t})


def wasow_problem(t: int, field=QQ) -> ProblemSpec:
    """The triple ({T}, {J_t}, {I_t})."""
    field = get_field(field)
    jt = Matrix(field, [[1 if j == i + 1 else 0 for j in range(t)] for i in range(t)], t, t)
    triple = ProblemTriple(field, t, (0,) * t, (jt,), (Matrix.identity(field, t),))
    return from_triple(triple, kind="wasow")


# ---------------------------------------------------------------- JSON

def problem_from_json(data: Mapping, field=None) -> ProblemSpec:
    """Build a problem from any supported JSON kind."""
    try:
        kind = data["kind"]
        fld = get_field(field if field is not None else data.get("field", "Q"))
        if kind == "pair":
            gamma = ReducedAlgebra.from_json(data["gamma"], fld)
            basis = [matrix_from_json(m, fld) for m in data.get("mspace", {}).get("basis", [])]
            return ProblemSpec(gamma, basis, kind=data.get("source", "pair"), meta=data.get("meta"))
        if kind == "triple":
            t = int(data["t"])
            classes = tuple(data.get("classes") or range(t))
            P = tuple(matrix_from_json(m, fld) for m in data.get("P", []))
            V = tuple(matrix_from_json(m, fld) for m in data.get("V", []))
            return from_triple(ProblemTriple(fld, t, classes, P, V))
        if kind == "quiver":
            vertices = [str(v) for v in data["vertices"]]
            arrows = []
            for a in data["arrows"]:
                if isinstance(a, Mapping):
                    arrows.append((a["name"], str(a["source"]), str(a["target"])))
                else:
                    arrows.append((a[0], str(a[1]), str(a[2])))
            return quiver_problem(vertices, arrows, fld).spec
        if kind == "poset":
            return poset_problem(int(data["n"]), [tuple(r) for r in data.get("relations", [])], fld)
        if kind == "simsim":
            return simsim_problem(int(data["n"]), fld).spec
        if kind == "upper_triangular":
            return upper_triangular_problem(int(data["t"]), fld)
        if kind == "separated":
            gamma = ReducedAlgebra.from_json(data["gamma"], fld)
            delta = ReducedAlgebra.from_json(data["delta"], fld)
            nspace = [matrix_from_json(m, fld) for m in data.get("N", [])]
            return separated_problem(gamma, delta, nspace)
        if kind == "module":
            return module_problem(ReducedAlgebra.from_json(data["gamma"], fld))
        if kind == "wasow":
            return wasow_problem(int(data["t"]), fld)
    except KeyError as exc:
        raise ParseError(f"problem JSON is missing {exc}") from None
    raise ParseError(f"unknown problem kind {data.get('kind')!r}")
