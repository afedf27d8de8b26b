"""
Constants for the inflap solver and verifiers.

:copyright: (c) 2026 by the inflap developers.
:license: MPL-2.0, see LICENSE for more details.
"""

from enum import StrEnum

LOG_LEVEL_ENV = "INFLAP_LOG_LEVEL"
DEFAULT_LOG_LEVEL = "WARNING"
LOG_FORMAT = "%(asctime)s | %(levelname)-8s | %(name)-25s | %(message)s"

# Comparison tolerance for binary64 graphs; rational graphs compare exactly.
FLOAT_TOL = 1e-12

DEFAULT_H = "1/32"
DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITERS = 10**6
DEFAULT_ACCELERATE_EVERY = 25
DEFAULT_POLICY_ROUNDS = 8

# Per-sweep slack when asserting u^{k+1} <= u^k in binary64.
MONOTONE_SLACK = 1e-11
# Largest scheme defect tolerated in a policy candidate before it is used.
POLICY_SLACK = 1e-12
# Sup norm below which a collapse run counts as decayed.
DECAY_THRESHOLD = 1e-6
DEFAULT_COLLAPSE_SWEEPS = 10_000
# Interior values above 1 + this mean the level is above the principal eigenvalue.
FEASIBILITY_SLACK = 1e-9
# Largest rows * neighbours^2 block evaluated at once by the vectorised operator.
CHUNK_ELEMENTS = 1 << 20

COMPOSE_TOL = 1e-6
COMPOSE_MAX_DEPTH = 40
HARNACK_CONSTANT = 3

DEFAULT_SEED = 0
DEFAULT_TRIALS = 500
DEFAULT_SAMPLES = 100
SAMPLED_CHECK_TOL = 1e-9

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_FAILED = 2


class CheckStatus(StrEnum):
    PASS = "PASS"
    FAIL = "FAIL"
    INAPPLICABLE = "INAPPLICABLE"


class MongeClass(StrEnum):
    SOLUTION = "solution"
    SUPERSOLUTION = "supersolution"
    SUBSOLUTION = "subsolution"
    NEITHER = "neither"


class NodeRole(StrEnum):
    INTERIOR = "interior"
    BOUNDARY = "boundary"
    CONSTRAINT = "constraint"


class SolveStatus(StrEnum):
    CONVERGED = "converged"
    MAX_ITERS = "max_iters"
    INFEASIBLE = "infeasible"


class SweepMode(StrEnum):
    GAUSS_SEIDEL = "gauss-seidel"
    JACOBI = "jacobi"


class Branch(StrEnum):
    """Active branch of the node update."""

    MIDRANGE = "midrange"
    EIKONAL = "eikonal"
