"""Plant model: validation, Toeplitz Bezoutian and the two state-space realizations.

Coefficient vectors are stored in ascending-power order, so ``n[0]`` is the
constant coefficient n_1 of n(lambda) = n_1 + n_2 lambda + ... + n_{m+1} lambda^m
and ``d[0] == 1``. Every formula below indexes with that convention; an
off-by-one here silently corrupts all downstream sets.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import NonCausal, NotCoprime, SingularBezoutian

log = logging.getLogger(__name__)

Side = Literal["forward", "backward"]

COPRIME_REL_THRESHOLD = 1e-8
COND_WARN = 1e8


@dataclass(frozen=True)
class PlantSpec:
    n: np.ndarray
    d: np.ndarray
    m: int

    @property
    def n1(self) -> float:
        return float(self.n[0])

    @property
    def n_last(self) -> float:
        return float(self.n[-1])

    @property
    def d_last(self) -> float:
        return float(self.d[-1])

    def to_dict(self) -> dict:
        return {"n": self.n.tolist(), "d": self.d.tolist()}


@dataclass(frozen=True)
class Bezoutian:
    B: np.ndarray
    B_inv: np.ndarray
    C_row: np.ndarray


@dataclass(frozen=True)
class EstimatorRealization:
    A: np.ndarray
    B_col: np.ndarray
    C_row: np.ndarray
    D1: float


@dataclass(frozen=True)
class RegulatorRealization:
    A_star: np.ndarray
    B_star: np.ndarray
    C_star: np.ndarray
    D1_star: float


def sylvester_resultant(p: np.ndarray, q: np.ndarray) -> float:
    """Resultant of two polynomials given in ascending order, both of formal degree m."""
    m = len(p) - 1
    size = 2 * m
    S = np.zeros((size, size))
    pd, qd = p[::-1], q[::-1]
    for i in range(m):
        S[i, i:i + m + 1] = pd
        S[m + i, i:i + m + 1] = qd
    return float(np.linalg.det(S))


def validate_plant(n, d) -> PlantSpec:
    n = np.asarray(n, dtype=float).ravel()
    d = np.asarray(d, dtype=float).ravel()
    if n.shape != d.shape or len(n) < 2:
        raise ValueError("n and d must have the same length >= 2")
    if d[0] == 0.0:
        raise NonCausal("d_1 = 0: the plant is not causal")
    n = n / d[0]
    d = d / d[0]
    if d[-1] == 0.0:
        raise NonCausal("d_{m+1} = 0: the regulator plant is not causal")
    m = len(n) - 1
    res = sylvester_resultant(n, d)
    scale = max(np.abs(n).max(), np.abs(d).max()) ** (2 * m)
    if not abs(res) > COPRIME_REL_THRESHOLD * scale:
        raise NotCoprime(f"|resultant| = {abs(res):.3e} below threshold")
    n.setflags(write=False)
    d.setflags(write=False)
    return PlantSpec(n=n, d=d, m=m)


def lower_toeplitz(c: np.ndarray, size: int) -> np.ndarray:
    """Banded lower-triangular Toeplitz matrix with first column c (truncated/padded)."""
    T = np.zeros((size, size))
    for j in range(min(len(c), size)):
        T += np.diag(np.full(size - j, c[j]), -j)
    return T


def toeplitz_blocks(p: PlantSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Return (D_L, D_U, N_L, N_U)."""
    m = p.m

    def upper(c):
        U = np.zeros((m, m))
        for i in range(m):
            for j in range(i, m):
                U[i, j] = c[m - (j - i)]
        return U

    return lower_toeplitz(p.d, m), upper(p.d), lower_toeplitz(p.n, m), upper(p.n)


def bezoutian_from_generating_polynomial(p: PlantSpec) -> np.ndarray:
    """Extract B_T coefficient-wise from its bivariate generating function.

    Numerator coefficient of t^i s^j is d_i n_{m-j} - n_i d_{m-j} (0-based); the
    quotient by (1 - s t) is obtained by accumulating along diagonals.
    """
    m = p.m
    n, d = p.n, p.d
    P = np.outer(d, n[::-1]) - np.outer(n, d[::-1])
    Q = np.zeros((m + 1, m + 1))
    for i in range(m + 1):
        for j in range(m + 1):
            Q[i, j] = P[i, j] + (Q[i - 1, j - 1] if i > 0 and j > 0 else 0.0)
    resid = max(np.abs(Q[m, :]).max(), np.abs(Q[:, m]).max())
    scale = max(1.0, np.abs(P).max())
    if resid > 1e-9 * scale:
        raise SingularBezoutian("generating polynomial is not divisible by 1 - st")
    return Q[:m, :m]


def gohberg_semencul_products(p: PlantSpec) -> tuple[np.ndarray, np.ndarray]:
    D_L, D_U, N_L, N_U = toeplitz_blocks(p)
    return D_L @ N_U - N_L @ D_U, N_U @ D_L - D_U @ N_L


def build_bezoutian(p: PlantSpec) -> Bezoutian:
    B, B_alt = gohberg_semencul_products(p)
    B_gen = bezoutian_from_generating_polynomial(p)
    scale = max(1.0, np.abs(B).max())
    if np.abs(B - B_alt).max() > 1e-10 * scale or np.abs(B - B_gen).max() > 1e-10 * scale:
        raise SingularBezoutian("Gohberg-Semencul products disagree")
    cond = np.linalg.cond(B)
    if not np.isfinite(cond):
        raise SingularBezoutian("Bezoutian is singular although the plant validated as coprime")
    if cond > COND_WARN:
        log.warning("Bezoutian condition number %.3e", cond)
    else:
        log.debug("Bezoutian condition number %.3e", cond)
    B_inv = np.linalg.inv(B)
    C_row = B[0].copy()
    for arr in (B, B_inv, C_row):
        arr.setflags(write=False)
    return Bezoutian(B=B, B_inv=B_inv, C_row=C_row)


def realize_estimator(p: PlantSpec, bez: Bezoutian | None = None) -> EstimatorRealization:
    m = p.m
    n, d = p.n, p.d
    A = np.zeros((m, m))
    A[:-1, 1:] = np.eye(m - 1)
    A[-1, :] = -d[:0:-1]  # (-d_{m+1}, ..., -d_2)
    B_col = np.zeros(m)
    B_col[-1] = 1.0
    C_row = n[:0:-1] - d[:0:-1] * n[0]
    bez = bez or build_bezoutian(p)
    if np.abs(C_row - bez.C_row).max() > 1e-14 * max(1.0, np.abs(C_row).max()):
        raise AssertionError("realization C differs from Bezoutian first row")
    return EstimatorRealization(A=A, B_col=B_col, C_row=C_row, D1=float(n[0]))


def realize_regulator(p: PlantSpec) -> RegulatorRealization:
    m = p.m
    n, d = p.n, p.d
    dl = d[-1]
    A_star = np.zeros((m, m))
    A_star[:, 0] = -d[m - 1::-1] / dl  # (-d_m, ..., -d_1) / d_{m+1}
    A_star[:-1, 1:] = np.eye(m - 1)
    B_star = n[m - 1::-1] - d[m - 1::-1] * (n[-1] / dl)
    C_star = np.zeros(m)
    C_star[0] = -1.0 / dl
    if not np.any(B_star != 0.0):
        raise NotCoprime("B* vanishes, so n and d share a factor")
    return RegulatorRealization(A_star=A_star, B_star=B_star, C_star=C_star, D1_star=float(-n[-1] / dl))


def state_from_window(p: PlantSpec, bez: Bezoutian, y_window, v_window, side: Side) -> np.ndarray:
    """Estimator state from an m-long window of outputs and inputs.

    ``forward`` uses the window (k+1 .. k+m) after time k, ``backward`` the
    window (k-m+1 .. k) ending at time k.
    """
    y = np.asarray(y_window, dtype=float)
    v = np.asarray(v_window, dtype=float)
    if len(y) != p.m or len(v) != p.m:
        raise ValueError("windows must have length m")
    D_L, D_U, N_L, N_U = toeplitz_blocks(p)
    if side == "forward":
        return bez.B_inv @ (D_L @ y - N_L @ v)
    if side == "backward":
        return bez.B_inv @ (-D_U @ y + N_U @ v)
    raise ValueError(f"unknown side {side!r}")


def regulator_state_from_window(p: PlantSpec, ys_window, vs_window, side: Side) -> np.ndarray:
    ys = np.asarray(ys_window, dtype=float)
    vs = np.asarray(vs_window, dtype=float)
    if len(ys) != p.m or len(vs) != p.m:
        raise ValueError("windows must have length m")
    D_L, D_U, N_L, N_U = toeplitz_blocks(p)
    if side == "forward":
        return -N_U.T @ ys - D_U.T @ vs
    if side == "backward":
        return N_L.T @ ys + D_L.T @ vs
    raise ValueError(f"unknown side {side!r}")


@dataclass(frozen=True)
class System:
    """Convenience bundle of a validated plant and everything derived from it."""

    plant: PlantSpec
    bez: Bezoutian
    est: EstimatorRealization
    reg: RegulatorRealization

    @classmethod
    def from_coefficients(cls, n, d) -> "System":
        p = validate_plant(n, d)
        bez = build_bezoutian(p)
        return cls(p, bez, realize_estimator(p, bez), realize_regulator(p))

    @property
    def m(self) -> int:
        return self.plant.m
