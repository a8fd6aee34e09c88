"""Exact canonical forms of matrices under linear matrix problems."""
from .algebra import ClassSplit, ReducedAlgebra
from .belitskii import (Box, BoxKind, StructuredCanonicalMatrix, are_equivalent, canonicalize, linking,
                        q_strips, verify_canonical)
from .decompose import Decomposition, block_direct_sum, is_indecomposable, krull_schmidt
from .errors import *  # noqa: F401,F403
from .field import QQ, FieldElement, PrimeField, RationalField, get_field
from .linalg import Matrix, StepPartition, matrix
from .oracle import enumerate_canonical, enumerate_group, orbit_equivalent
from .problems import (BlockClassification, ProblemSpec, ProblemTriple, from_triple, kronecker_problem,
                       module_problem, poset_problem, problem_from_json, quiver_problem, separated_problem,
                       similarity_problem, simsim_problem, upper_triangular_problem, wasow_problem)
from .weyr import WeyrForm, WeyrStructure, commutant_algebra, is_weyr, weyr_characteristic, weyr_form

__version__ = "0.1.0"
