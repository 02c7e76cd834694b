"""Ground-truth trajectories, measurement streams and disturbance reconstruction."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import DisturbanceOutOfBounds
from .plant import EstimatorRealization, PlantSpec, realize_estimator

Law = Literal["uniform", "vertex"]

BOUND_SLACK = 1e-12


@dataclass(frozen=True)
class Trajectory:
    x0: np.ndarray
    v: np.ndarray
    w: np.ndarray
    x: np.ndarray  # (k+1, m); x[0] is x0
    y: np.ndarray
    z: np.ndarray

    @property
    def k(self) -> int:
        return len(self.v)


def _check_bounds(name: str, seq: np.ndarray) -> None:
    if seq.size and np.abs(seq).max() > 1.0 + BOUND_SLACK:
        j = int(np.argmax(np.abs(seq)))
        raise DisturbanceOutOfBounds(f"|{name}_{j + 1}| = {abs(seq[j]):.6g} > 1")


def closed_form_state(est: EstimatorRealization, x0: np.ndarray, v: np.ndarray) -> np.ndarray:
    """x_k = A^k x0 + sum_{j<k} A^j B v_{k-j}."""
    k = len(v)
    x = np.linalg.matrix_power(est.A, k) @ x0
    Aj_B = est.B_col.copy()
    for j in range(k):
        x = x + Aj_B * v[k - 1 - j]
        Aj_B = est.A @ Aj_B
    return x


def simulate(p: PlantSpec, x0, v, w, est: EstimatorRealization | None = None) -> Trajectory:
    est = est or realize_estimator(p)
    x0 = np.asarray(x0, dtype=float).reshape(p.m)
    v = np.asarray(v, dtype=float).ravel()
    w = np.asarray(w, dtype=float).ravel()
    if len(v) != len(w):
        raise ValueError("v and w must have equal length")
    _check_bounds("v", v)
    _check_bounds("w", w)
    k = len(v)
    x = np.empty((k + 1, p.m))
    x[0] = x0
    y = np.empty(k)
    for j in range(k):
        y[j] = est.C_row @ x[j] + est.D1 * v[j]
        x[j + 1] = est.A @ x[j] + est.B_col * v[j]
    if k:
        xc = closed_form_state(est, x0, v)
        scale = max(1.0, np.abs(x[-1]).max())
        if np.abs(xc - x[-1]).max() > 1e-9 * scale:
            raise AssertionError("closed-form state disagrees with the recursion")
    return Trajectory(x0=x0, v=v, w=w, x=x, y=y, z=y + w)


def reconstruct_w(p: PlantSpec, x0, v, z, est: EstimatorRealization | None = None) -> np.ndarray:
    """Measurement noise implied by (x0, v) and the measurements z."""
    est = est or realize_estimator(p)
    v = np.asarray(v, dtype=float).ravel()
    z = np.asarray(z, dtype=float).ravel()
    if len(v) != len(z):
        raise ValueError("v and z must have equal length")
    x = np.asarray(x0, dtype=float).reshape(p.m)
    w = np.empty(len(z))
    for j in range(len(z)):
        w[j] = z[j] - (est.C_row @ x + est.D1 * v[j])
        x = est.A @ x + est.B_col * v[j]
    return w


def sample_disturbances(seed: int, k: int, law: Law = "uniform") -> tuple[np.ndarray, np.ndarray]:
    """Draw (v, w) of length k from independent PCG64 streams spawned off one seed.

    The first spawned child drives v and the second drives w, so extending k
    never changes the leading entries of either stream.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    v_seq, w_seq = np.random.SeedSequence(seed).spawn(2)
    rv = np.random.Generator(np.random.PCG64(v_seq))
    rw = np.random.Generator(np.random.PCG64(w_seq))
    if law == "uniform":
        return rv.uniform(-1.0, 1.0, k), rw.uniform(-1.0, 1.0, k)
    if law == "vertex":
        return rv.choice([-1.0, 1.0], k), rw.choice([-1.0, 1.0], k)
    raise ValueError(f"unknown law {law!r}")
