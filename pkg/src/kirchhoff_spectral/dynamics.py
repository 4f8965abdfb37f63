"""Field evaluators: pack states into flat arrays and expose right-hand sides.

Each evaluator owns a grid and adapts one vector field to the integrator
protocol (pack / unpack / rhs / project / ball_value). The physical system
integrates the pair (u, v) with Hermitian re-projection each step; the
complex-coordinate systems integrate only the first component, since the
second is its conjugate by construction and needs no projection at all.
"""

from __future__ import annotations

import numpy as np

from .fields import ComplexField, ConjugatePair, RealPair
from .grid import SpectralGrid
from .normal_form import (
    complexified_rhs_arrays,
    diagonalized_rhs_arrays,
    normal_form_rhs_arrays,
)


class KirchhoffDynamics:
    """Original dynamics: du = v, dv = -(1 + sum |k|^2 |u_k|^2) Lambda^2 u."""

    name = "original"

    def __init__(self, grid: SpectralGrid):
        self.grid = grid
        self._n = grid.n_modes
        self._j2f = grid.j2f

    def pack(self, state: RealPair) -> np.ndarray:
        return np.concatenate([state.u.coeffs, state.v.coeffs])

    def unpack(self, y: np.ndarray) -> RealPair:
        g = self.grid
        return RealPair(
            ComplexField(g, y[: self._n]), ComplexField(g, y[self._n:]), check_tol=None
        )

    def rhs(self, t: float, y: np.ndarray) -> np.ndarray:
        n = self._n
        u = y[:n]
        v = y[n:]
        a = 1.0 + np.dot(self._j2f, u.real * u.real + u.imag * u.imag)
        return np.concatenate([v, (-a) * self._j2f * u])

    def project(self, y: np.ndarray) -> tuple[np.ndarray, float]:
        n = self._n
        neg = self.grid.neg_index
        u, v = y[:n], y[n:]
        u_m = np.conj(u[neg])
        v_m = np.conj(v[neg])
        defect = max(float(np.max(np.abs(u - u_m))), float(np.max(np.abs(v - v_m))))
        if defect == 0.0:
            return y, 0.0
        return np.concatenate([0.5 * (u + u_m), 0.5 * (v + v_m)]), defect

    def ball_value(self, y: np.ndarray) -> float | None:
        return None


class _ConjugateDynamics:
    """Common plumbing for systems whose state is a single complex field w."""

    def __init__(self, grid: SpectralGrid):
        self.grid = grid

    def pack(self, state: ConjugatePair) -> np.ndarray:
        return state.w.coeffs.copy()

    def unpack(self, y: np.ndarray) -> ConjugatePair:
        return ConjugatePair(ComplexField(self.grid, y))

    def project(self, y: np.ndarray) -> tuple[np.ndarray, float]:
        return y, 0.0  # the conjugate component is derived, nothing can drift

    def ball_value(self, y: np.ndarray) -> float:
        return self.grid.coeff_norm(y, self.grid.m0)

    def _z(self, y: np.ndarray) -> np.ndarray:
        return np.conj(y[self.grid.neg_index])


class ComplexifiedDynamics(_ConjugateDynamics):
    """The physical system in complex-conjugate coordinates (before the diag stage)."""

    name = "complexified"

    def rhs(self, t: float, y: np.ndarray) -> np.ndarray:
        return complexified_rhs_arrays(self.grid, y, self._z(y))[0]


class DiagonalizedDynamics(_ConjugateDynamics):
    """The order-one-diagonalized system (state after the diag stage)."""

    name = "diagonalized"

    def rhs(self, t: float, y: np.ndarray) -> np.ndarray:
        return diagonalized_rhs_arrays(self.grid, y, self._z(y))[0]


class NormalFormDynamics(_ConjugateDynamics):
    """The normal-form system; structured evaluation by default."""

    name = "normal_form"

    def __init__(self, grid: SpectralGrid, method: str = "structured"):
        super().__init__(grid)
        self.method = method

    def rhs(self, t: float, y: np.ndarray) -> np.ndarray:
        return normal_form_rhs_arrays(self.grid, y, self._z(y), self.method)[0]


class LinearDiagonalDynamics(_ConjugateDynamics):
    """dw/dt = -i Lambda w; each mode rotates as exp(-i |j| t). Exact-flow test field."""

    name = "linear"

    def rhs(self, t: float, y: np.ndarray) -> np.ndarray:
        return -1j * self.grid.absj * y

    def exact(self, w0: np.ndarray, t: float) -> np.ndarray:
        return w0 * np.exp(-1j * self.grid.absj * t)


def make_dynamics(representation: str, grid: SpectralGrid, method: str = "structured"):
    if representation == "original":
        return KirchhoffDynamics(grid)
    if representation == "complexified":
        return ComplexifiedDynamics(grid)
    if representation == "diagonalized":
        return DiagonalizedDynamics(grid)
    if representation == "normal_form":
        return NormalFormDynamics(grid, method=method)
    if representation == "linear":
        return LinearDiagonalDynamics(grid)
    raise ValueError(f"unknown representation {representation!r}")
