"""
Configuration for the inflap solver and randomized checks.

:copyright: (c) 2026 by the inflap developers.
:license: MPL-2.0, see LICENSE for more details.
"""

from __future__ import annotations

from argparse import Namespace
from dataclasses import dataclass, field, fields
from typing import Any

from inflap.const import (
    DEFAULT_ACCELERATE_EVERY,
    DEFAULT_H,
    DEFAULT_MAX_ITERS,
    DEFAULT_POLICY_ROUNDS,
    DEFAULT_SAMPLES,
    DEFAULT_SEED,
    DEFAULT_TOL,
    DEFAULT_TRIALS,
    SweepMode,
)
from inflap.numeric import Scalar, parse_scalar


@dataclass
class SolverConfig:
    """Discretization and iteration settings for the monotone scheme."""

    h: Scalar = field(default_factory=lambda: parse_scalar(DEFAULT_H))
    tol: float = DEFAULT_TOL
    max_iters: int = DEFAULT_MAX_ITERS
    mode: SweepMode = SweepMode.GAUSS_SEIDEL
    threads: int = 1
    accelerate_every: int = DEFAULT_ACCELERATE_EVERY
    policy_rounds: int = DEFAULT_POLICY_ROUNDS
    # relative distance below the target level used for the downward phase
    continuation: float = 1e-3
    # relative distance below the principal eigenvalue of the first warm-start level; 0 disables
    anneal: float = 0.5
    # largest jump accepted from an upward policy candidate
    bracket: float = 1e-2

    def __post_init__(self) -> None:
        self.h = parse_scalar(self.h)
        self.mode = SweepMode(self.mode)
        if self.h <= 0:
            raise ValueError(f"spacing h must be positive, got {self.h}")
        if self.tol <= 0:
            raise ValueError(f"tolerance must be positive, got {self.tol}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be at least 1, got {self.max_iters}")
        if self.threads < 1:
            raise ValueError(f"threads must be at least 1, got {self.threads}")
        if self.mode is SweepMode.GAUSS_SEIDEL and self.threads != 1:
            raise ValueError("Gauss-Seidel sweeps are single-threaded; use --mode jacobi with --threads")
        if not 0 < self.continuation < 1:
            raise ValueError(f"continuation must lie in (0, 1), got {self.continuation}")
        if not 0 <= self.anneal < 1:
            raise ValueError(f"anneal must lie in [0, 1), got {self.anneal}")

    @classmethod
    def from_args(cls, args: Namespace) -> SolverConfig:
        return cls(**_options(cls, args))


@dataclass
class CheckConfig:
    """Seeded sampling settings for the randomized verifiers."""

    seed: int = DEFAULT_SEED
    trials: int = DEFAULT_TRIALS
    samples: int = DEFAULT_SAMPLES

    def __post_init__(self) -> None:
        if self.trials < 0 or self.samples < 0:
            raise ValueError("trials and samples must be nonnegative")

    @classmethod
    def from_args(cls, args: Namespace) -> CheckConfig:
        return cls(**_options(cls, args))


def _options(cls, args: Namespace) -> dict[str, Any]:
    """Config fields present on the parsed CLI arguments, skipping unset options."""
    names = {f.name for f in fields(cls)}
    return {k: v for k, v in vars(args).items() if k in names and v is not None}

