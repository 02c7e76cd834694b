"""Seeded random plants and measurement runs shared by tests and scripts."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EstimationError
from .plant import System
from .simulate import Trajectory, sample_disturbances, simulate


@dataclass(frozen=True)
class RandomRun:
    system: System
    x0: np.ndarray
    trajectory: Trajectory

    @property
    def z(self) -> np.ndarray:
        return self.trajectory.z


def random_system(rng: np.random.Generator, m: int, denominator_scale: float = 0.6) -> System:
    """Draw numerator and monic denominator coefficients until the pair is admissible."""
    while True:
        n = rng.normal(size=m + 1)
        d = np.concatenate([[1.0], rng.normal(size=m) * denominator_scale])
        try:
            return System.from_coefficients(n, d)
        except EstimationError:
            continue


def random_run(seed: int, m: int, k: int, law: str = "uniform") -> RandomRun:
    """Plant, initial state and a k-step trajectory, all determined by ``seed``."""
    rng = np.random.default_rng(seed)
    sysm = random_system(rng, m)
    x0 = rng.normal(size=m)
    v, w = sample_disturbances(seed, k, law)
    return RandomRun(sysm, x0, simulate(sysm.plant, x0, v, w, sysm.est))
