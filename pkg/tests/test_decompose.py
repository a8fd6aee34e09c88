import random
from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from lmcanon.algebra import ReducedAlgebra
from lmcanon.belitskii import canonicalize
from lmcanon.decompose import (block_direct_sum, direct_sum_all, graph_shape, is_indecomposable, krull_schmidt,
                               reduction_graph)
from lmcanon.errors import TemplateMismatch
from lmcanon.field import QQ, get_field
from lmcanon.linalg import Matrix, matrix
from lmcanon.problems import kronecker_problem, simsim_problem, upper_triangular_problem

from support import PAIR_CANONICAL, PAIR_ALGEBRA, jordan_block, jordan_matrix

F2 = get_field("F2")


def sim_canon(m):
    return canonicalize(ReducedAlgebra.matrix_algebra(QQ, m.nrows), m)


def summary(decomp):
    return Counter({(s.initial_partition.sizes, s.matrix): k for s, k in decomp.summands})


def kronecker_indecomposables(field=QQ):
    """Canonical indecomposable Kronecker representations of small dimension."""
    q = kronecker_problem(field)
    reps = [
        ({"1": 1, "2": 0}, {"a": None, "b": None}),
        ({"1": 0, "2": 1}, {"a": None, "b": None}),
        ({"1": 1, "2": 1}, {"a": [[1]], "b": [[0]]}),
        ({"1": 1, "2": 1}, {"a": [[0]], "b": [[1]]}),
        ({"1": 1, "2": 1}, {"a": [[1]], "b": [[1]]}),
        ({"1": 1, "2": 2}, {"a": [[1], [0]], "b": [[0], [1]]}),
        ({"1": 2, "2": 1}, {"a": [[1, 0]], "b": [[0, 1]]}),
    ]
    out = []
    for dims, maps in reps:
        if dims["1"] and dims["2"]:
            mats = {k: matrix(v, field) for k, v in maps.items()}
        else:
            mats = {k: Matrix.zeros(field, dims["2"], dims["1"]) for k in maps}
        sizes, m = q.embed(dims, mats)
        out.append(q.spec.canonicalize(m, sizes))
    return q.spec, out


def test_block_direct_sum_examples():
    m = matrix([[1, 2], [0, 3]])
    empty = Matrix.zeros(QQ, 0)
    assert block_direct_sum(m, (1, 1), empty, (0, 0)) == (m, (1, 1))
    assert block_direct_sum(matrix([[4]]), (1,), matrix([[7]]), (1,))[0] == matrix([[4, 0], [0, 7]])
    s = simsim_problem(1)
    t = simsim_problem(2)
    a = s.pack(matrix([[1]]), matrix([[2]]))
    b = s.pack(matrix([[3]]), matrix([[4]]))
    summed, sizes = block_direct_sum(a, (1, 1), b, (1, 1))
    assert sizes == (2, 2)
    assert t.unpack(summed) == (matrix([[1, 0], [0, 3]]), matrix([[2, 0], [0, 4]]))
    with pytest.raises(TemplateMismatch):
        block_direct_sum(m, (1, 1), matrix([[1]]), (1,))


def test_similarity_examples():
    d = krull_schmidt(sim_canon(Matrix.zeros(QQ, 2)))
    assert [(s.matrix, k) for s, k in d.summands] == [(matrix([[0]]), 2)]
    d = krull_schmidt(sim_canon(jordan_matrix([(2, 0), (1, 0)])))
    assert sorted((s.matrix.nrows, k) for s, k in d.summands) == [(1, 1), (2, 1)]
    assert set(s.matrix for s, _ in d.summands) == {matrix([[0]]), jordan_block(2, 0)}
    for n in range(1, 5):
        assert is_indecomposable(sim_canon(jordan_block(n, 3)))
    assert not is_indecomposable(sim_canon(matrix([[1, 0], [0, 2]])))
    assert not is_indecomposable(sim_canon(Matrix.zeros(QQ, 0)))


def test_kronecker_two_points():
    q = kronecker_problem(F2)
    a, b = matrix([[1, 0], [0, 0]], F2), matrix([[0, 0], [0, 1]], F2)
    sizes, m = q.embed({"1": 2, "2": 2}, {"a": a, "b": b})
    d = krull_schmidt(q.spec.canonicalize(m, sizes))
    assert [k for _, k in d.summands] == [1, 1]
    assert d.summands[0][0].matrix != d.summands[1][0].matrix
    assert all(s.initial_partition.sizes == (1, 1, 1) for s, _ in d.summands)


def test_pair_canonical_indecomposable():
    assert is_indecomposable(canonicalize(PAIR_ALGEBRA, PAIR_CANONICAL))


def test_graph_shape():
    assert graph_shape(3, [(0, 1), (1, 2)]) == (True, True)
    assert graph_shape(3, [(0, 1)]) == (True, False)
    assert graph_shape(3, [(0, 1), (1, 2), (0, 2)]) == (False, False)


def test_tree_criterion_small():
    for t in (1, 2, 3):
        spec = upper_triangular_problem(t, F2)
        sizes = (1,) * t
        for m in _all_members(spec, sizes):
            scm = spec.canonicalize(m, sizes)
            forest, tree = graph_shape(t, reduction_graph(scm))
            assert forest
            assert tree == is_indecomposable(scm)


def _all_members(spec, sizes):
    from lmcanon.oracle import _combinations
    return list(_combinations(spec.field, spec.matrix_space_basis(sizes), sum(sizes), 10**6))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6), st.booleans())
def test_shuffled_sums_decompose_back(seed, kron):
    rng = random.Random(seed)
    if kron:
        spec, pool = kronecker_indecomposables()
        t = 3
    else:
        spec = None
        pool = [sim_canon(jordan_block(n, lam)) for n in (1, 2, 3) for lam in (0, 2)]
        t = 1
    picks = [rng.choice(pool) for _ in range(rng.randint(1, 4))]
    m, sizes = direct_sum_all(QQ, t, [(p.matrix, p.initial_partition.sizes) for p in picks])
    alg = spec.algebra(sizes) if spec else ReducedAlgebra.matrix_algebra(QQ, m.nrows)
    cls = spec.classification if spec else None
    s = alg.random_invertible(rng)
    scm = canonicalize(alg, s.inverse() @ m @ s, cls)
    d = krull_schmidt(scm)
    expected = Counter((p.initial_partition.sizes, p.matrix) for p in picks)
    assert summary(d) == expected
    p = d.permutation
    assert alg.contains(p)
    rebuilt, _ = direct_sum_all(QQ, t, [(x.matrix, x.initial_partition.sizes) for x, k in d.summands for _ in range(k)])
    assert p.inverse() @ scm.matrix @ p == rebuilt


def test_kronecker_pool_is_indecomposable():
    _, pool = kronecker_indecomposables()
    assert all(is_indecomposable(p) for p in pool)
    assert len({(p.initial_partition.sizes, p.matrix) for p in pool}) == len(pool)
