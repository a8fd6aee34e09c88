import random

import pytest

from lmcanon.algebra import ReducedAlgebra
from lmcanon.belitskii import are_equivalent
from lmcanon.decompose import is_indecomposable
from lmcanon.errors import BudgetExceeded, FieldNotSplitting
from lmcanon.field import get_field
from lmcanon.linalg import Matrix, StepPartition, matrix
from lmcanon.oracle import count_orbits, enumerate_canonical, enumerate_group, orbit_equivalent
from lmcanon.oracle import _combinations
from lmcanon.problems import kronecker_problem, simsim_problem, similarity_problem

F2, F3 = get_field("F2"), get_field("F3")


def test_enumerate_group_examples():
    pairs = ReducedAlgebra(F2, StepPartition((2, 2), (0, 0)), {(0, 0): [{(0, 1): 1}]})
    assert len(enumerate_group(pairs)) == 6
    scalars = ReducedAlgebra(F3, StepPartition((1, 1), (0, 0)), {(0, 0): [{(0, 1): 1}]})
    assert len(enumerate_group(scalars)) == 2
    assert len(enumerate_group(ReducedAlgebra.full(F2, (1, 1)))) == 2
    with pytest.raises(BudgetExceeded):
        enumerate_group(ReducedAlgebra.matrix_algebra(F3, 3), budget=1000)


def test_orbit_equivalent_examples():
    full = ReducedAlgebra.matrix_algebra(F2, 1)
    one = matrix([[1]], F2)
    assert orbit_equivalent(full, one, one)
    # the 1 x 1 equivalence problem: rows and columns in separate strips
    eq = kronecker_problem(F2)
    sizes = (1, 1, 1)
    alg = eq.spec.algebra(sizes)
    m10 = Matrix.zeros(F2, 3).with_block(1, 0, one)
    m01 = Matrix.zeros(F2, 3).with_block(2, 0, one)
    m11 = m10 + m01
    assert not orbit_equivalent(alg, m10, m01)
    assert orbit_equivalent(alg, m11, m11)
    assert not orbit_equivalent(alg, m10, Matrix.zeros(F2, 3))
    f3 = kronecker_problem(F3).spec.algebra(sizes)
    two = matrix([[2]], F3)
    assert orbit_equivalent(f3, Matrix.zeros(F3, 3).with_block(1, 0, two).with_block(2, 0, two),
                            Matrix.zeros(F3, 3).with_block(1, 0, matrix([[1]], F3)).with_block(2, 0, matrix([[1]], F3)))


def test_enumerate_canonical_examples():
    kron = kronecker_problem().spec
    for field, total, indec in ((F2, 4, 3), (F3, 5, 4)):
        found = enumerate_canonical(kron, (1, 1, 1), field=field)
        assert len(found) == total
        assert sum(is_indecomposable(c) for c in found) == indec
    assert [c.matrix for c in enumerate_canonical(similarity_problem().spec, (1,), field=F3)] == \
        [matrix([[x]], F3) for x in range(3)]
    with pytest.raises(BudgetExceeded):
        enumerate_canonical(kron, (2, 2, 2), field=F3, budget=100)


def test_parallel_matches_serial():
    spec = simsim_problem(1, F3).spec
    serial = enumerate_canonical(spec, (1, 1))
    parallel = enumerate_canonical(spec, (1, 1), jobs=2)
    assert [c.matrix for c in serial] == [c.matrix for c in parallel]
    assert len(serial) == 9


@pytest.mark.parametrize("field", [F2, F3])
@pytest.mark.parametrize("which", ["simsim1", "kron11"])
def test_counts_match_orbits(field, which):
    if which == "simsim1":
        spec, sizes = simsim_problem(1, field).spec, (1, 1)
    else:
        spec, sizes = kronecker_problem(field).spec, (1, 1, 1)
    alg = spec.algebra(sizes)
    members = list(_combinations(field, spec.matrix_space_basis(sizes), alg.n, 10**6))
    assert len(enumerate_canonical(spec, sizes)) == count_orbits(alg, members)


def test_simsim_nonsplitting_skip():
    spec = simsim_problem(2, F2).spec
    with pytest.raises(FieldNotSplitting):
        enumerate_canonical(spec, (2, 2))
    found = enumerate_canonical(spec, (2, 2), skip_nonsplitting=True)
    assert len(found) == 46


def test_sampled_simsim_agreement():
    rng = random.Random(0)
    spec = simsim_problem(2, F2).spec
    alg = spec.algebra((2, 2))
    group = enumerate_group(alg)
    checked = 0
    while checked < 200:
        m, n = spec.random_matrix((2, 2), rng), spec.random_matrix((2, 2), rng)
        if rng.random() < 0.5:
            s = rng.choice(group)
            n = s.inverse() @ m @ s
        try:
            ours = are_equivalent(alg, m, n, spec.classification)
        except FieldNotSplitting:
            continue
        assert ours == orbit_equivalent(alg, m, n, group)
        checked += 1
