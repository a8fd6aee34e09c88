import random

import pytest
from hypothesis import given, settings, strategies as st

from lmcanon.algebra import ReducedAlgebra
from lmcanon.errors import NotBasic, NotClosed, SizeMismatch
from lmcanon.field import QQ, get_field
from lmcanon.linalg import Matrix, StepPartition, det, from_blocks, matrix, rank
from lmcanon.weyr import commutant_algebra, weyr_form

from support import jordan_block, jordan_matrix, random_jordan_data

F2 = get_field("F2")


def e(i, j, n, field=QQ):
    rows = [[0] * n for _ in range(n)]
    rows[i][j] = 1
    return matrix(rows, field)


def entrywise_dim(alg: ReducedAlgebra) -> int:
    """Dimension of the algebra from the full system on all n^2 entries."""
    n, off, sizes, cls = alg.n, alg.partition.offsets, alg.sizes, alg.classes
    eqs = []

    def row(pairs):
        r = [0] * (n * n)
        for (a, b), c in pairs:
            r[a * n + b] = alg.field.add(r[a * n + b], c)
        eqs.append(r)

    for i in range(alg.t):
        for j in range(i):
            for a in range(sizes[i]):
                for b in range(sizes[j]):
                    row([((off[i] + a, off[j] + b), 1)])
        rep = alg.partition.members(cls[i])[0]
        if rep != i:
            for a in range(sizes[i]):
                for b in range(sizes[i]):
                    row([((off[i] + a, off[i] + b), 1), ((off[rep] + a, off[rep] + b), -1)])
    for system in alg.systems.values():
        if not system.rows:
            continue
        i0, j0 = system.variables[0]
        for a in range(sizes[i0]):
            for b in range(sizes[j0]):
                for r in system.rows:
                    row([((off[i] + a, off[j] + b), c) for (i, j), c in zip(system.variables, r) if c != 0])
    if not eqs:
        return n * n
    return n * n - rank(matrix(eqs, alg.field))


def simsim_group_algebra(field=QQ, size=2):
    """{S (+) S}: two equivalent strips with a zero off-diagonal block."""
    return ReducedAlgebra(field, StepPartition((size, size), (0, 0)), {(0, 0): [{(0, 1): 1}]})


def commutant_of(a: Matrix) -> ReducedAlgebra:
    w, _, s = weyr_form(a)
    return commutant_algebra(w, s)


def test_contains_examples():
    full = ReducedAlgebra.full(QQ, (1, 1, 1))
    assert full.contains(matrix([[1, 2, 3], [0, 4, 5], [0, 0, 6]]))
    assert not full.contains(matrix([[1, 0, 0], [1, 1, 0], [0, 0, 1]]))
    tied = ReducedAlgebra(QQ, StepPartition((1, 1), (0, 0)))
    assert not tied.contains(matrix([[1, 0], [0, 2]]))
    comm = commutant_algebra(jordan_block(2, 3))
    assert comm.contains(matrix([[5, 7], [0, 5]]))
    assert not comm.contains(matrix([[5, 7], [0, 4]]))
    with pytest.raises(SizeMismatch):
        full.contains(Matrix.identity(QQ, 2))


def test_spanning_set_examples():
    assert set(ReducedAlgebra.full(QQ, (1, 1)).spanning_set()) == {e(0, 0, 2), e(0, 1, 2), e(1, 1, 2)}
    assert simsim_group_algebra(size=1).spanning_set() == [Matrix.identity(QQ, 2)]
    assert set(commutant_algebra(jordan_block(2, 0)).spanning_set()) == {Matrix.identity(QQ, 2), e(0, 1, 2)}


def test_random_invertible_examples():
    rng = random.Random(1)
    scalars = simsim_group_algebra(size=1)
    s = scalars.random_invertible(rng)
    assert s[0, 0] != 0 and s == Matrix.scalar(QQ, 2, s[0, 0])
    gl2 = {m for m in (simsim_group_algebra(F2).random_invertible(rng) for _ in range(200))}
    assert len(gl2) == 6
    for m in gl2:
        assert m.block(0, 2, 0, 2) == m.block(2, 4, 2, 4) and det(m) != 0
    assert ReducedAlgebra.matrix_algebra(QQ, 0).random_invertible(rng).shape == (0, 0)


def test_verify_closure_examples():
    ReducedAlgebra.full(QQ, (1, 2, 1)).verify_closure()
    commutant_of(jordan_matrix([(3, 0), (1, 0), (2, 1)])).verify_closure()
    # strips 1 ~ 2 and S_01 = S_02: the product breaks the tie through S_12
    bad = ReducedAlgebra(QQ, StepPartition((1, 1, 1), (0, 1, 1)), {(0, 1): [{(0, 1): 1, (0, 2): -1}]})
    with pytest.raises(NotClosed) as info:
        bad.verify_closure()
    assert not bad.contains(info.value.witness)


def test_inflate_examples():
    gamma = commutant_algebra(jordan_block(2, 0))
    lam = gamma.inflate((2, 2))
    assert lam.dim() == 8
    s1, s2 = matrix([[1, 2], [3, 4]]), matrix([[5, 6], [7, 8]])
    z = Matrix.zeros(QQ, 2)
    assert lam.contains(from_blocks(QQ, [[s1, s2], [z, s1]]))
    assert not lam.contains(from_blocks(QQ, [[s1, s2], [z, s2]]))
    diag = ReducedAlgebra(QQ, StepPartition((1, 1)), {(0, 1): [{(0, 1): 1}]})
    assert diag.inflate((2, 3)).dim() == 4 + 9
    assert gamma.inflate((1, 1)) == gamma
    with pytest.raises(NotBasic):
        lam.inflate((1, 1))
    with pytest.raises(SizeMismatch):
        gamma.inflate((1, 1, 1))


def test_json_round_trip():
    alg = commutant_of(jordan_matrix([(2, 0), (2, 0), (1, 0)]))
    assert ReducedAlgebra.from_json(alg.to_json()) == alg


@st.composite
def algebras(draw):
    rng = random.Random(draw(st.integers(0, 10**6)))
    kind = draw(st.sampled_from(["commutant", "full", "tied"]))
    if kind == "commutant":
        w, _, s = weyr_form(jordan_matrix(random_jordan_data(rng, rng.randint(1, 5), (0, 1))))
        alg = commutant_algebra(w, s)
        if alg.is_basic and draw(st.booleans()):
            per_class = [rng.randint(1, 2) for _ in range(alg.partition.num_classes)]
            alg = alg.inflate(tuple(per_class[c] for c in alg.classes))
        return alg, rng
    if kind == "full":
        return ReducedAlgebra.full(QQ, tuple(rng.randint(1, 2) for _ in range(rng.randint(1, 3)))), rng
    return ReducedAlgebra(QQ, StepPartition((2, 1, 2), (0, 1, 0))), rng


@settings(max_examples=40, deadline=None)
@given(algebras())
def test_algebra_properties(case):
    alg, rng = case
    assert alg.dim() == len(alg.spanning_set()) == entrywise_dim(alg)
    for _ in range(5):
        a, b = alg.random_element(rng), alg.random_element(rng)
        assert alg.contains(a @ b)
    for _ in range(5):
        s = alg.random_invertible(rng)
        assert alg.contains(s) and det(s) != 0
        assert alg.contains(s.inverse())
