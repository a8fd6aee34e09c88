"""Block-direct sums and Krull-Schmidt decomposition of canonical matrices.

The substrips of a canonical matrix fall into classes of its stabilizer.
Permuting each original strip so that substrips of the same class (and the
same copy inside the class) sit together splits the matrix into a
block-direct sum of smaller canonical matrices, one per class, repeated as
often as the common substrip size.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .belitskii import BoxKind, StructuredCanonicalMatrix, canonicalize, verify_canonical
from .errors import InternalInconsistency, TemplateMismatch
from .linalg import Matrix, StepPartition, permutation_matrix


def block_direct_sum(m: Matrix, m_sizes: Sequence[int], n: Matrix, n_sizes: Sequence[int]) -> tuple[Matrix, tuple[int, ...]]:
    """The matrix whose (i, j) block is M_ij (+) N_ij, and its strip sizes."""
    if len(m_sizes) != len(n_sizes):
        raise TemplateMismatch(f"{len(m_sizes)} strips vs {len(n_sizes)} strips")
    if m.field != n.field:
        raise TemplateMismatch("summands live over different fields")
    pm, pn = StepPartition(tuple(m_sizes)), StepPartition(tuple(n_sizes))
    if m.shape != (pm.n, pm.n) or n.shape != (pn.n, pn.n):
        raise TemplateMismatch("matrix shape does not match its strip sizes")
    sizes = tuple(a + b for a, b in zip(m_sizes, n_sizes))
    ps = StepPartition(sizes)
    field = m.field
    rows = [[field.zero] * ps.n for _ in range(ps.n)]
    om, on, os_ = pm.offsets, pn.offsets, ps.offsets
    t = len(sizes)
    for i in range(t):
        for j in range(t):
            for a in range(m_sizes[i]):
                for b in range(m_sizes[j]):
                    rows[os_[i] + a][os_[j] + b] = m[om[i] + a, om[j] + b]
            for a in range(n_sizes[i]):
                for b in range(n_sizes[j]):
                    rows[os_[i] + m_sizes[i] + a][os_[j] + m_sizes[j] + b] = n[on[i] + a, on[j] + b]
    return Matrix._raw(field, rows, ps.n, ps.n), sizes


def direct_sum_all(field, t: int, parts: Sequence[tuple[Matrix, Sequence[int]]]) -> tuple[Matrix, tuple[int, ...]]:
    out, sizes = Matrix.zeros(field, 0), (0,) * t
    for m, s in parts:
        out, sizes = block_direct_sum(out, sizes, m, s)
    return out, sizes


@dataclass
class Decomposition:
    summands: list[tuple[StructuredCanonicalMatrix, int]]
    permutation: Matrix

    def sizes(self) -> list[tuple[int, ...]]:
        return [s.initial_partition.sizes for s, _ in self.summands]

    def to_json(self) -> dict:
        return {
            "summands": [{"matrix": s.matrix.render(), "sizes": list(s.initial_partition.sizes),
                          "multiplicity": k} for s, k in self.summands],
            "permutation": self.permutation.render(),
        }


def _summand_key(field, sizes, m: Matrix):
    return (tuple(sizes), tuple(field.sort_key(x) for r in m.rows for x in r))


def krull_schmidt(scm: StructuredCanonicalMatrix, *, check: bool = True) -> Decomposition:
    """Split a canonical matrix into indecomposable canonical summands with multiplicities."""
    if check:
        verify_canonical(scm)
    field = scm.field
    m = scm.matrix
    initial = scm.initial_partition
    final = scm.final_partition
    t = initial.t
    foff = final.offsets
    classes = final.classes
    # substrips of each class, per original strip, in order
    members: dict[int, list[list[int]]] = {}
    for k, c in enumerate(classes):
        members.setdefault(c, [[] for _ in range(t)])[scm.origin[k]].append(k)
    summands: dict[tuple, list] = {}
    per_class = {}
    for c, groups in members.items():
        counts = tuple(len(g) for g in groups)
        flat = [k for g in groups for k in g]
        size = final.sizes[flat[0]]
        rows = [[m[foff[x], foff[y]] for y in flat] for x in flat]
        small = Matrix._raw(field, rows, len(flat), len(flat))
        key = _summand_key(field, counts, small)
        entry = summands.setdefault(key, [counts, small, 0, []])
        entry[2] += size
        entry[3].append(c)
        per_class[c] = (groups, size)
    ordered = sorted(summands)
    perm: list[int] = []
    for i in range(t):
        for key in ordered:
            for c in summands[key][3]:
                groups, size = per_class[c]
                for copy in range(size):
                    perm.extend(foff[x] + copy for x in groups[i])
    p = permutation_matrix(field, perm)
    if not scm.algebra.contains(p):
        raise InternalInconsistency("the grouping permutation is not a member of the algebra")
    rebuilt, _ = direct_sum_all(field, t, [(summands[k][1], summands[k][0])
                                           for k in ordered for _ in range(summands[k][2])])
    if m.permute(perm) != rebuilt:
        raise InternalInconsistency("permuted matrix differs from the sum of its summands")
    out = []
    template = scm.algebra
    for key in ordered:
        counts, small, mult, _ = summands[key]
        alg = template.with_sizes(counts)
        sub = canonicalize(alg, small, scm.classification)
        if sub.matrix != small:
            raise InternalInconsistency("a summand of a canonical matrix is not canonical")
        out.append((sub, mult))
    return Decomposition(out, p)


def is_indecomposable(scm: StructuredCanonicalMatrix) -> bool:
    if scm.matrix.nrows == 0:
        return False
    d = krull_schmidt(scm)
    return len(d.summands) == 1 and d.summands[0][1] == 1


def reduction_graph(scm: StructuredCanonicalMatrix) -> list[tuple[int, int]]:
    """Edges i - j for 1 x 1 boxes at (i, j) set to 1 by an equivalence step."""
    return [(b.rows[0], b.cols[0]) for b in scm.boxes
            if b.kind is BoxKind.ZERO_IDENTITY and b.rank == 1 and b.shape == (1, 1)]


def graph_shape(vertices: int, edges: Sequence[tuple[int, int]]) -> tuple[bool, bool]:
    """(is_forest, is_tree) for an undirected graph."""
    parent = list(range(vertices))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    forest = True
    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra == rb:
            forest = False
        else:
            parent[ra] = rb
    components = len({find(x) for x in range(vertices)})
    return forest, forest and components == 1
