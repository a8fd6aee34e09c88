"""Reduction of a matrix to its canonical form under Lambda-similarity.

Blocks are visited bottom row first and left to right within a row.  For each
free block one of three steps applies:

* an admissible addition exists: the whole block is cleared and the
  addition's covector becomes a new constraint on the algebra (empty box);
* the row and column strips are not equivalent: the block is brought to
  [[0, I], [0, 0]] by independent row and column changes;
* the strips are equivalent: the block is brought to Weyr form.

After each step the algebra is replaced by the stabilizer of the boxes built
so far, which is again a reduced algebra on a finer partition.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field as dc_field
from typing import Sequence

from .algebra import ClassSplit, ReducedAlgebra
from .errors import InternalInconsistency, NotCanonical, NotInSpace, SizeMismatch
from .linalg import Matrix, RowSpace, StepPartition, nullspace_rows, rref_rows
from .problems import BlockClassification, dependent_violation
from .weyr import WeyrStructure, basic_commutant, is_weyr, weyr_form


class BoxKind(str, enum.Enum):
    EMPTY = "empty"
    ZERO_IDENTITY = "zero_identity"
    WEYR = "weyr"


@dataclass(frozen=True)
class Box:
    """A reduced block; ``rows`` and ``cols`` are half-open index ranges."""

    rows: tuple[int, int]
    cols: tuple[int, int]
    kind: BoxKind
    rank: int | None = None
    structure: WeyrStructure | None = None

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows[1] - self.rows[0], self.cols[1] - self.cols[0])

    def order_key(self) -> tuple[int, int]:
        return (-self.rows[1], self.cols[0])

    def to_json(self) -> dict:
        out = {"rows": list(self.rows), "cols": list(self.cols), "kind": self.kind.value}
        if self.rank is not None:
            out["rank"] = self.rank
        if self.structure is not None:
            s = self.structure
            out["eigenvalues"] = [s.field.render(v) for v in s.eigenvalues]
            out["characteristics"] = [list(c) for c in s.characteristics]
        return out


@dataclass(frozen=True)
class Step:
    """Trace record of one reduction step."""

    index: int
    block: tuple[int, int]
    case: str
    box: Box
    constraint: tuple[tuple[int, int], dict] | None = None

    def to_json(self, field) -> dict:
        out = {"step": self.index, "block": list(self.block), "case": self.case, "box": self.box.to_json()}
        if self.constraint is not None:
            pair, row = self.constraint
            out["constraint"] = {"pair": list(pair),
                                 "row": [[i, j, field.render(c)] for (i, j), c in sorted(row.items())]}
        return out


@dataclass
class StructuredCanonicalMatrix:
    matrix: Matrix
    initial_partition: StepPartition
    final_partition: StepPartition
    boxes: list[Box]
    stabilizer: ReducedAlgebra
    trace: list[Step]
    algebra: ReducedAlgebra
    classification: BlockClassification | None = None
    witness: Matrix | None = None
    origin: tuple[int, ...] = ()
    history: list[ReducedAlgebra] = dc_field(default_factory=list)

    @property
    def field(self):
        return self.matrix.field

    def to_json(self, *, witness: bool = False, trace: bool = False) -> dict:
        out = {
            "matrix": {"field": self.field.name, "rows": self.matrix.nrows, "cols": self.matrix.ncols,
                       "entries": self.matrix.render()},
            "initial_partition": {"sizes": list(self.initial_partition.sizes),
                                  "classes": list(self.initial_partition.classes)},
            "final_partition": {"sizes": list(self.final_partition.sizes),
                                "classes": list(self.final_partition.classes),
                                "origin": list(self.origin)},
            "boxes": [b.to_json() for b in self.boxes],
        }
        if witness and self.witness is not None:
            out["witness"] = self.witness.render()
        if trace:
            out["trace"] = [s.to_json(self.field) for s in self.trace]
        return out


def _dependent_mask(partition: StepPartition, classification: BlockClassification | None) -> list[list[bool]]:
    n = partition.n
    if classification is None:
        return [[False] * n for _ in range(n)]
    strip = [partition.strip_of(a) for a in range(n)]
    return [[classification.is_dependent((strip[a], strip[b])) for b in range(n)] for a in range(n)]


def _scalar_block(m: Matrix, alg: ReducedAlgebra, x: int, y: int):
    """Stable value of an already reduced block: its scalar if x ~ y, else zero."""
    off = alg.partition.offsets
    sizes = alg.sizes
    field = alg.field
    if sizes[x] == 0 or sizes[y] == 0:
        return field.zero
    block = m.block(off[x], off[x + 1], off[y], off[y + 1])
    if alg.classes[x] == alg.classes[y]:
        c = block.scalar_value()
        if c is None:
            raise InternalInconsistency(f"reduced block {(x, y)} is not scalar")
        return c
    if not block.is_zero():
        raise InternalInconsistency(f"reduced block {(x, y)} between inequivalent strips is nonzero")
    return field.zero


def addition_covector(m: Matrix, alg: ReducedAlgebra, l: int, r: int) -> dict[tuple[int, int], object]:
    """Linear form giving the change of block (l, r) under an addition S = I + X.

    The coefficient of X_ir (i < r, i ~ l) is the stable scalar of block (l, i);
    the coefficient of X_li (i > l, i ~ r) is minus that of block (i, r).
    """
    field = alg.field
    cls = alg.classes
    phi: dict[tuple[int, int], object] = {}
    for i in range(r):
        if cls[i] == cls[l]:
            a = _scalar_block(m, alg, l, i)
            if a != 0:
                phi[(i, r)] = field.add(phi.get((i, r), field.zero), a)
    for i in range(l + 1, alg.t):
        if cls[i] == cls[r]:
            a = _scalar_block(m, alg, i, r)
            if a != 0:
                phi[(l, i)] = field.sub(phi.get((l, i), field.zero), a)
    return {v: c for v, c in phi.items() if c != 0}


def _covector_dense(alg: ReducedAlgebra, pair, phi: dict) -> list:
    system = alg.system(*pair)
    return [phi.get(v, alg.field.zero) for v in system.variables]


def admits_addition(alg: ReducedAlgebra, pair, phi: dict) -> bool:
    """True when some member of the algebra's radical part changes the block."""
    if not phi:
        return False
    system = alg.system(*pair)
    space = RowSpace(alg.field, len(system.variables), system.rows)
    return not space.contains(_covector_dense(alg, pair, phi))


def _conjugate(m: Matrix, s: Matrix) -> Matrix:
    return s.inverse() @ m @ s


def _block_diagonal_transform(alg: ReducedAlgebra, blocks: dict[int, Matrix]) -> Matrix:
    """Block-diagonal S with ``blocks[c]`` on every strip of class c, identity elsewhere."""
    field = alg.field
    s = Matrix.identity(field, alg.n)
    off = alg.partition.offsets
    for i, c in enumerate(alg.classes):
        if c in blocks:
            s = s.with_block(off[i], off[i], blocks[c])
    return s


def _rank_transform(x: Matrix) -> tuple[int, Matrix, Matrix]:
    """(rank, P, Q) with P^{-1} X Q = [[0, I], [0, 0]]."""
    field = x.field
    m, n = x.shape
    work, pivots, _ = rref_rows(field, [list(r) for r in x.rows], n)
    rho = len(pivots)
    kernel = nullspace_rows(field, work[:rho], n)
    q_cols = [list(v) for v in kernel]
    for c in pivots:
        q_cols.append([field.one if k == c else field.zero for k in range(n)])
    q = Matrix.from_columns(field, q_cols, n)
    image = [x.column(c) for c in pivots]
    space = RowSpace(field, m, image)
    p_cols = list(image)
    for k in range(m):
        e = [field.one if a == k else field.zero for a in range(m)]
        if space.add(e):
            p_cols.append(e)
    p = Matrix.from_columns(field, p_cols, m)
    return rho, p, q


def _check_boxes_kept(before: Matrix, after: Matrix, covered: list[list[bool]]):
    for a, row in enumerate(covered):
        for b, flag in enumerate(row):
            if flag and before[a, b] != after[a, b]:
                raise InternalInconsistency("a reduction step changed an earlier box")


def _next_block(alg: ReducedAlgebra, covered, dependent) -> tuple[int, int] | None:
    off = alg.partition.offsets
    sizes = alg.sizes
    for l in reversed(range(alg.t)):
        if sizes[l] == 0:
            continue
        for r in range(alg.t):
            if sizes[r] == 0:
                continue
            a, b = off[l], off[r]
            if not covered[a][b] and not dependent[a][b]:
                return l, r
    return None


def canonicalize(alg: ReducedAlgebra, m: Matrix, classification: BlockClassification | None = None, *,
                 keep_history: bool = False) -> StructuredCanonicalMatrix:
    """Reduce ``m`` to its canonical form under similarity by invertible members of ``alg``.

    ``classification`` marks the dependent blocks of a matrix space; they are
    never processed and must keep satisfying their rules.
    """
    field = alg.field
    if m.field != field:
        m = Matrix(field, [[field.coerce(x) for x in r] for r in m.rows], m.nrows, m.ncols, coerce=False)
    n = alg.n
    if m.shape != (n, n):
        raise SizeMismatch(f"matrix is {m.shape}, algebra expects {n}x{n}")
    initial = alg.partition
    if classification is not None and dependent_violation(m, initial, classification) is not None:
        raise NotInSpace("matrix does not belong to the problem's matrix space")
    dependent = _dependent_mask(initial, classification)
    covered = [[False] * n for _ in range(n)]
    current, kept = alg.compact()
    origin = tuple(kept)
    witness = Matrix.identity(field, n)
    boxes: list[Box] = []
    trace: list[Step] = []
    history = [current] if keep_history else []
    step = 0
    while True:
        pos = _next_block(current, covered, dependent)
        if pos is None:
            break
        l, r = pos
        off = current.partition.offsets
        cls = current.classes
        r0, r1, c0, c1 = off[l], off[l + 1], off[r], off[r + 1]
        x = m.block(r0, r1, c0, c1)
        pair = (cls[l], cls[r])
        phi = addition_covector(m, current, l, r)
        constraint = None
        splits: dict[int, ClassSplit] = {}
        if admits_addition(current, pair, phi):
            # Case I.  The reachable changes of the block are phi(u) * Y for
            # solutions u of the pair's system and arbitrary Y, a subspace that
            # is 0 or everything; taking phi(u) = 1 and Y = -X clears it.
            system = current.system(*pair)
            dense = _covector_dense(current, pair, phi)
            u = next(b for b in system.solutions(field) if field.dot(dense, b) != 0)
            scale = field.inv(field.dot(dense, u))
            s = Matrix.identity(field, n)
            for (i, j), coeff in zip(system.variables, u):
                if coeff != 0:
                    s = s.with_block(off[i], off[j], x.scale(field.neg(field.mul(coeff, scale))))
            case = "I"
            target = Matrix.zeros(field, r1 - r0, c1 - c0)
            box = Box((r0, r1), (c0, c1), BoxKind.EMPTY)
            constraint = (pair, phi)
        elif pair[0] != pair[1]:
            rho, p, q = _rank_transform(x)
            s = _block_diagonal_transform(current, {pair[0]: p, pair[1]: q})
            merged = ("merge", step)
            splits[pair[0]] = ClassSplit((rho, r1 - r0 - rho), (merged, ("piece", pair[0], 1)))
            splits[pair[1]] = ClassSplit((c1 - c0 - rho, rho), (("piece", pair[1], 0), merged))
            case = "II"
            target = _zero_identity(field, r1 - r0, c1 - c0, rho)
            box = Box((r0, r1), (c0, c1), BoxKind.ZERO_IDENTITY, rank=rho)
        else:
            form = weyr_form(x)
            s = _block_diagonal_transform(current, {pair[0]: form.P})
            sp = form.structure.standard_partition
            relations = tuple(row for system in basic_commutant(form.structure).systems.values()
                              for row in system.row_dicts())
            splits[pair[0]] = ClassSplit(sp.sizes, tuple(("piece", pair[0], c) for c in sp.classes), relations)
            case = "III"
            target = form.W
            box = Box((r0, r1), (c0, c1), BoxKind.WEYR, structure=form.structure)
        new_m = _conjugate(m, s)
        _check_boxes_kept(m, new_m, covered)
        if new_m.block(r0, r1, c0, c1) != target:
            raise InternalInconsistency(f"step {step} did not produce the expected block")
        m = new_m
        witness = witness @ s
        if constraint is not None:
            current = current.add_constraint(*constraint)
        else:
            current, pieces = current.refine(splits)
            origin = tuple(origin[i] for i, _ in pieces)
        current, kept = current.compact()
        origin = tuple(origin[i] for i in kept)
        for a in range(r0, r1):
            for b in range(c0, c1):
                covered[a][b] = True
        if classification is not None and dependent_violation(m, initial, classification) is not None:
            raise InternalInconsistency("a dependent block no longer satisfies its rule")
        boxes.append(box)
        trace.append(Step(step, (l, r), case, box, constraint))
        if keep_history:
            history.append(current)
        step += 1
    return StructuredCanonicalMatrix(m, initial, current.partition, boxes, current, trace, alg,
                                     classification, witness, origin, history)


def _zero_identity(field, rows: int, cols: int, rho: int) -> Matrix:
    out = Matrix.zeros(field, rows, cols)
    for k in range(rho):
        out = out.with_block(k, cols - rho + k, Matrix.identity(field, 1))
    return out


def are_equivalent(alg: ReducedAlgebra, m: Matrix, n: Matrix,
                   classification: BlockClassification | None = None) -> bool:
    return canonicalize(alg, m, classification).matrix == canonicalize(alg, n, classification).matrix


# ------------------------------------------------------------ q-strips

class _UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def _box_cells(scm: StructuredCanonicalMatrix, box: Box):
    """Row and column cut points (relative) and identity/scalar cells of a box."""
    m = scm.matrix
    field = m.field
    h, w = box.shape
    if box.kind is BoxKind.EMPTY:
        return [0, h], [0, w], []
    if box.kind is BoxKind.ZERO_IDENTITY:
        rho = box.rank
        rows = sorted({0, rho, h})
        cols = sorted({0, w - rho, w})
        cells = [((0, rho), (w - rho, w), field.one)] if rho else []
        return rows, cols, cells
    sp = box.structure.standard_partition
    cuts = list(sp.offsets)
    off = sp.offsets
    cells = []
    for k, value in enumerate(box.structure.piece_values):
        if sp.sizes[k]:
            cells.append(((off[k], off[k + 1]), (off[k], off[k + 1]), value))
    for a, b in box.structure.identity_cells:
        cells.append(((off[a], off[a + 1]), (off[b], off[b + 1]), field.one))
    return cuts, cuts, cells


def q_strips(scm: StructuredCanonicalMatrix, q: int) -> tuple[list[list[int]], list[int]]:
    """Substrip sizes of each original strip after the first ``q`` boxes, and their linking.

    Cuts come from the cell boundaries of the boxes and are pushed across
    identity and scalar cells, and between equivalent original strips,
    until stable.  Returns (sizes per original strip, link label per substrip
    in reading order); substrips sharing a label are linked.
    """
    if not 0 <= q <= len(scm.boxes):
        raise ValueError(f"q must lie in 0..{len(scm.boxes)}")
    p = scm.initial_partition
    off = p.offsets
    n = p.n
    cuts = {0, n} | set(off)
    boxes = scm.boxes[:q]
    cell_list = []
    for box in boxes:
        rows, cols, cells = _box_cells(scm, box)
        cuts.update(box.rows[0] + c for c in rows)
        cuts.update(box.cols[0] + c for c in cols)
        for (ra, rb), (ca, cb), _ in cells:
            cell_list.append((box.rows[0] + ra, box.rows[0] + rb, box.cols[0] + ca, box.cols[0] + cb))
    cls = p.classes
    changed = True
    while changed:
        changed = False
        # identity/scalar cells: a cut inside the row range is mirrored in the column range
        for r0, r1, c0, c1 in cell_list:
            for c in list(cuts):
                if r0 < c < r1 and c0 + (c - r0) not in cuts:
                    cuts.add(c0 + (c - r0))
                    changed = True
                if c0 < c < c1 and r0 + (c - c0) not in cuts:
                    cuts.add(r0 + (c - c0))
                    changed = True
        # equivalent original strips are cut identically
        for i in range(p.t):
            for j in range(p.t):
                if i != j and cls[i] == cls[j]:
                    for c in list(cuts):
                        if off[i] < c < off[i + 1] and off[j] + (c - off[i]) not in cuts:
                            cuts.add(off[j] + (c - off[i]))
                            changed = True
    points = sorted(cuts)
    segments = [(a, b) for a, b in zip(points, points[1:])]
    sizes = []
    for i in range(p.t):
        sizes.append([b - a for a, b in segments if off[i] <= a and b <= off[i + 1]])
    uf = _UnionFind(range(len(segments)))
    start = {a: k for k, (a, _) in enumerate(segments)}
    for i in range(p.t):
        for j in range(p.t):
            if cls[i] == cls[j]:
                mine = [k for k, (a, b) in enumerate(segments) if off[i] <= a and b <= off[i + 1]]
                other = [k for k, (a, b) in enumerate(segments) if off[j] <= a and b <= off[j + 1]]
                for k1, k2 in zip(mine, other):
                    uf.union(k1, k2)
    for r0, r1, c0, c1 in cell_list:
        k = start[r0]
        while k < len(segments) and segments[k][1] <= r1:
            a = segments[k][0]
            uf.union(k, start[c0 + (a - r0)])
            k += 1
    roots: dict[int, int] = {}
    labels = [roots.setdefault(uf.find(k), len(roots)) for k in range(len(segments))]
    return [s for s in sizes], labels


def linking(scm: StructuredCanonicalMatrix, q: int) -> StepPartition:
    """The q-strips as a step partition whose classes are the linked sets."""
    sizes, labels = q_strips(scm, q)
    return StepPartition(tuple(s for group in sizes for s in group), labels)


# ------------------------------------------------------------ verification

def _partition_cuts(p: StepPartition) -> set[int]:
    return set(p.offsets)


def verify_canonical(scm: StructuredCanonicalMatrix) -> None:
    """Check the box conditions of a canonical matrix; raises NotCanonical.

    (a) each box is a block of the partition given by the earlier boxes;
    (b) a box is empty exactly when some S in the algebra that keeps the
        earlier boxes fixed changes it, and an empty box holds zeros;
    (c) a non-empty box is a Weyr matrix when its strips are linked and
        [[0, I], [0, 0]] otherwise.
    """
    alg = scm.algebra
    field = alg.field
    m = scm.matrix
    span = alg.spanning_set()
    # coefficient vectors (over ``span``) of the members fixing every box so far
    fixing = [[field.one if a == b else field.zero for b in range(len(span))] for a in range(len(span))]
    commutators = [m @ s - s @ m for s in span]
    for q, box in enumerate(scm.boxes):
        part = linking(scm, q)
        cuts = _partition_cuts(part)
        if not ({box.rows[0], box.rows[1], box.cols[0], box.cols[1]} <= cuts):
            raise NotCanonical(q, "a", f"box {q} is not a block of the earlier strips")
        r_strip = part.strip_of(box.rows[0])
        c_strip = part.strip_of(box.cols[0])
        off = part.offsets
        if off[r_strip + 1] != box.rows[1] or off[c_strip + 1] != box.cols[1]:
            raise NotCanonical(q, "a", f"box {q} is not a single block of the earlier strips")
        mutating = _has_mutating_addition(field, span, commutators, fixing, part, box)
        block = m.block(box.rows[0], box.rows[1], box.cols[0], box.cols[1])
        if box.kind is BoxKind.EMPTY:
            if not mutating:
                raise NotCanonical(q, "b", f"box {q} is marked empty but no addition reaches it")
            if not block.is_zero():
                raise NotCanonical(q, "b", f"empty box {q} is not zero")
        else:
            if mutating:
                raise NotCanonical(q, "b", f"box {q} could be changed by an addition")
            linked = part.classes[r_strip] == part.classes[c_strip]
            if linked:
                structure = is_weyr(block)
                if structure is None or box.kind is not BoxKind.WEYR:
                    raise NotCanonical(q, "c", f"box {q} joins linked strips but is not a Weyr matrix")
            else:
                h, w = box.shape
                rho = block.rank()
                if box.kind is not BoxKind.ZERO_IDENTITY or block != _zero_identity(field, h, w, rho):
                    raise NotCanonical(q, "c", f"box {q} is not in the form [[0, I], [0, 0]]")
        fixing = _restrict(field, commutators, fixing, box)


def _box_values(commutator: Matrix, box: Box) -> list:
    return [commutator[a, b] for a in range(*box.rows) for b in range(*box.cols)]


def _combine(field, vectors: Sequence[list], coeffs: Sequence) -> list:
    out = [field.zero] * len(vectors[0])
    for v, c in zip(vectors, coeffs):
        if c != 0:
            out = field.axpy(out, field.neg(c), v)
    return out


def _restrict(field, commutators, fixing, box) -> list[list]:
    """Members of the current fixing space whose commutator with M vanishes on ``box``."""
    if not fixing:
        return fixing
    cols = [_box_values(c, box) for c in commutators]
    images = [_combine(field, cols, f) for f in fixing]
    if not images[0]:
        return fixing
    # kernel of the map coefficient -> image
    transposed = [[img[k] for img in images] for k in range(len(images[0]))]
    kernel = nullspace_rows(field, transposed, len(fixing))
    return [_combine(field, fixing, k) for k in kernel]


def _has_mutating_addition(field, span, commutators, fixing, part: StepPartition, box: Box) -> bool:
    """Does a fixing member with zero diagonal blocks (on the given strips) change the box?"""
    if not fixing:
        return False
    off = part.offsets
    diag_cells = [(a, b) for i in range(part.t) for a in range(off[i], off[i + 1])
                  for b in range(off[i], off[i + 1])]
    members = [_combine(field, [[s[a, b] for a, b in diag_cells] for s in span], f) for f in fixing]
    transposed = [[v[k] for v in members] for k in range(len(diag_cells))] if diag_cells else []
    radical = nullspace_rows(field, transposed, len(fixing)) if transposed else \
        [[field.one if a == b else field.zero for b in range(len(fixing))] for a in range(len(fixing))]
    cols = [_box_values(c, box) for c in commutators]
    for k in radical:
        coeffs = _combine(field, fixing, k)
        if any(v != 0 for v in _combine(field, cols, coeffs)):
            return True
    return False
