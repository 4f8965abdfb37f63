"""The four-stage change of variables and its scalar machinery.

The composed map sends a conjugate pair (w, conj w) to a physical state
(u, v) through four stages, each invertible on its stated domain:

* cubic stage   -- identity plus the off-diagonal mix operator (removes the
  nonresonant cubic coupling between a field and its conjugate);
* diag stage    -- state-dependent 2x2 mixing that diagonalizes the order-one
  part of the system, with mixing ratio rho evaluated at the scalar P;
* complex stage -- complex-conjugate coordinates (f, g) <-> real (q, p);
* scale stage   -- half-order scaling |j|^{-1/2} / |j|^{+1/2} that balances
  the two components of the wave system.

Scalar maps: rho(x) = -x / (1 + x + sqrt(1+2x)) is the mixing ratio of the
diagonalization, and phi_inv is the inverse of x -> x sqrt(1+2x), computed by
Newton iteration on the squared form 2x^3 + x^2 - y^2 (monotone convex for
x >= 0, so the iteration from x0 = y converges unconditionally).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .coupling import mix_arrays
from .errors import ConvergenceError, DomainError, ParameterError
from .fields import (
    ComplexField,
    ConjugatePair,
    RealPair,
    _same_grid,
    conjugate_defect,
    field_to_dict,
)
from .grid import DEFAULT_BALL_RADIUS, SpectralGrid

CUBIC_INV_BALL = 0.25
CUBIC_INV_TOL = 1e-13
CUBIC_INV_MAX_ITER = 200

FieldPair = tuple[ComplexField, ComplexField]


def _check_direction(direction: str) -> None:
    if direction not in ("fwd", "inv"):
        raise ParameterError(f"direction must be 'fwd' or 'inv', got {direction!r}")


# -- scalar maps -------------------------------------------------------------


def rho(x: float) -> float:
    """Mixing ratio of the order-one diagonalization; maps [0, inf) into (-1, 0]."""
    if x < 0:
        raise DomainError(f"rho is defined for x >= 0, got {x}")
    return -x / (1.0 + x + math.sqrt(1.0 + 2.0 * x))


def phi_inv(y: float, tol: float = 1e-15, max_iter: int = 100) -> float:
    """Inverse of x -> x sqrt(1+2x) on [0, inf), by Newton on 2x^3 + x^2 - y^2."""
    if y < 0:
        raise DomainError(f"phi_inv is defined for y >= 0, got {y}")
    if y == 0.0:
        return 0.0
    x = y
    for _ in range(max_iter):
        r = 2.0 * x ** 3 + x ** 2 - y * y
        dr = 6.0 * x ** 2 + 2.0 * x
        dx = r / dr
        x -= dx
        if abs(dx) <= tol * max(1.0, x):
            return max(x, 0.0)
    raise ConvergenceError(f"phi_inv Newton iteration did not converge for y={y}")


def _q_value_arrays(grid: SpectralGrid, a: np.ndarray, b: np.ndarray) -> float:
    c = a + b
    val = 0.25 * complex(np.dot(grid.absj * c, c[grid.neg_index]))
    scale = max(1.0, abs(val))
    if abs(val.imag) > 1e-10 * scale:
        raise DomainError(
            f"quadratic functional is not real ({val!r}); pair is not conjugate"
        )
    return max(val.real, 0.0) if val.real > -1e-12 * scale else _raise_negative(val)


def _raise_negative(val: complex) -> float:
    raise DomainError(f"quadratic functional is negative ({val.real!r}); pair is not conjugate")


def q_value(f: ComplexField | ConjugatePair, g: ComplexField | None = None) -> float:
    """Quadratic functional Q = (1/4) <Lambda(f+g), f+g>.

    For a conjugate pair this is the integral of (Lambda^{1/2} Re f)^2, hence
    real and >= 0; the instantaneous squared wave speed of the system in the
    complexified coordinates is 1 + 2Q.
    """
    if isinstance(f, ConjugatePair):
        pair = f
        c = pair.w.coeffs + pair.z.coeffs  # Hermitian, so each product is |c_j|^2
        return 0.25 * float(np.dot(pair.grid.absj, c.real * c.real + c.imag * c.imag))
    if g is None:
        raise ParameterError("q_value needs a ConjugatePair or two fields")
    _same_grid(f, g)
    return _q_value_arrays(f.grid, f.coeffs, g.coeffs)


def p_value(f: ComplexField | ConjugatePair, g: ComplexField | None = None) -> float:
    """P = phi_inv(Q): the same functional expressed through the diagonalized pair."""
    return phi_inv(q_value(f, g))


# -- individual stages --------------------------------------------------------


def scale_stage(direction: str, pair: FieldPair) -> FieldPair:
    """fwd: (q, p) -> (|j|^{-1/2} q, |j|^{1/2} p); inv undoes it."""
    _check_direction(direction)
    a, b = pair
    _same_grid(a, b)
    g = a.grid
    sgn = -0.5 if direction == "fwd" else 0.5
    return (
        ComplexField(g, a.coeffs * g.absj ** sgn),
        ComplexField(g, b.coeffs * g.absj ** (-sgn)),
    )


def complex_stage(direction: str, pair: FieldPair) -> FieldPair:
    """fwd: (f, g) -> (q, p) = ((f+g)/sqrt2, (f-g)/(i sqrt2)); inv: f,g = (q +- i p)/sqrt2."""
    _check_direction(direction)
    a, b = pair
    _same_grid(a, b)
    g = a.grid
    inv_sqrt2 = 1.0 / math.sqrt(2.0)
    if direction == "fwd":
        return (
            ComplexField(g, (a.coeffs + b.coeffs) * inv_sqrt2),
            ComplexField(g, -1j * (a.coeffs - b.coeffs) * inv_sqrt2),
        )
    return (
        ComplexField(g, (a.coeffs + 1j * b.coeffs) * inv_sqrt2),
        ComplexField(g, (a.coeffs - 1j * b.coeffs) * inv_sqrt2),
    )


def diag_stage(direction: str, pair: FieldPair) -> FieldPair:
    """Order-one diagonalization; global (no smallness needed), closed-form inverse.

    fwd maps the diagonalized pair (eta, psi) to (f, g) through the mixing
    matrix with ratio rho(P(eta, psi)); inv recovers (eta, psi) using that
    the same ratio equals rho(Q(f, g)).
    """
    _check_direction(direction)
    a, b = pair
    _same_grid(a, b)
    g = a.grid
    if direction == "fwd":
        r = rho(p_value(a, b))
        den = 1.0 / math.sqrt(1.0 - r * r)
        return (
            ComplexField(g, (a.coeffs + r * b.coeffs) * den),
            ComplexField(g, (r * a.coeffs + b.coeffs) * den),
        )
    r = rho(q_value(a, b))
    den = 1.0 / math.sqrt(1.0 - r * r)
    return (
        ComplexField(g, (a.coeffs - r * b.coeffs) * den),
        ComplexField(g, (-r * a.coeffs + b.coeffs) * den),
    )


def cubic_stage(direction: str, pair: FieldPair) -> FieldPair:
    """fwd: (w, z) -> (w, z) + mix(w, z)(w, z); inv by contraction in the 1/4 ball."""
    _check_direction(direction)
    a, b = pair
    _same_grid(a, b)
    g = a.grid
    if direction == "fwd":
        ma, mb = mix_arrays(g, a.coeffs, b.coeffs, a.coeffs, b.coeffs)
        return ComplexField(g, a.coeffs + ma), ComplexField(g, b.coeffs + mb)
    wa, wb = cubic_stage_inverse_arrays(g, a.coeffs, b.coeffs)
    return ComplexField(g, wa), ComplexField(g, wb)


def cubic_stage_inverse_arrays(
    grid: SpectralGrid,
    eta: np.ndarray,
    psi: np.ndarray,
    ball: float = CUBIC_INV_BALL,
    tol: float = CUBIC_INV_TOL,
    max_iter: int = CUBIC_INV_MAX_ITER,
) -> tuple[np.ndarray, np.ndarray]:
    """Fixed point of (w, z) = (eta, psi) - mix(w, z)(w, z), from (0, 0).

    The map is a contraction for ||eta||_{m0} <= 1/4, where the inverse is
    unique and satisfies ||w||_s <= 2 ||eta||_s.
    """
    wgt = grid.weight(grid.m0)

    def m0_norm(c):
        return float(np.sqrt(np.dot(wgt, c.real * c.real + c.imag * c.imag)))

    if m0_norm(eta) > ball:
        raise DomainError(
            f"cubic stage inverse needs ||eta||_m0 <= {ball}, got {m0_norm(eta):.4f}"
        )
    w = np.zeros_like(eta)
    z = np.zeros_like(psi)
    prev = math.inf
    grow = 0
    for _ in range(max_iter):
        ma, mb = mix_arrays(grid, w, z, w, z)
        w_new = eta - ma
        z_new = psi - mb
        delta = max(m0_norm(w_new - w), m0_norm(z_new - z))
        w, z = w_new, z_new
        if delta <= tol:
            return w, z
        if delta >= prev:
            grow += 1
            if grow >= 5:
                raise ConvergenceError(
                    f"cubic stage inversion is not contracting (step {delta:.3e})"
                )
        else:
            grow = 0
        prev = delta
    raise ConvergenceError("cubic stage inversion hit the iteration cap")


# -- rank-one correction of the diag stage ------------------------------------
#
# Differentiating the diag stage along the flow produces a rank-one operator
# acting on pairs: (alpha, beta) -> (psi, eta) * F * <Lambda(eta+psi), alpha+beta>,
# with the scalar factor F below. (I + that operator) has the closed-form
# inverse implemented here; the dense solve is the independent oracle for it.


def rank_one_factor(eta: ComplexField, psi: ComplexField) -> float:
    p = p_value(eta, psi)
    return -1.0 / (4.0 * (1.0 + 3.0 * p) * math.sqrt(1.0 + 2.0 * p))


def _lam_pair_functional(grid, eta, psi, a, b) -> complex:
    c = eta + psi
    return complex(np.dot(grid.absj * c, (a + b)[grid.neg_index]))


def rank_one_apply(eta: ComplexField, psi: ComplexField, vec: FieldPair) -> FieldPair:
    g = eta.grid
    f = rank_one_factor(eta, psi)
    ell = _lam_pair_functional(g, eta.coeffs, psi.coeffs, vec[0].coeffs, vec[1].coeffs)
    return ComplexField(g, psi.coeffs * (f * ell)), ComplexField(g, eta.coeffs * (f * ell))


def rank_one_solve_closed(eta: ComplexField, psi: ComplexField, rhs: FieldPair) -> FieldPair:
    """Closed form: rhs + (psi, eta) <Lambda(eta+psi), rhs_1+rhs_2> / (4 (1+2P)^{3/2})."""
    g = eta.grid
    p = p_value(eta, psi)
    ell = _lam_pair_functional(g, eta.coeffs, psi.coeffs, rhs[0].coeffs, rhs[1].coeffs)
    c = ell / (4.0 * (1.0 + 2.0 * p) ** 1.5)
    return (
        ComplexField(g, rhs[0].coeffs + c * psi.coeffs),
        ComplexField(g, rhs[1].coeffs + c * eta.coeffs),
    )


def rank_one_solve_dense(eta: ComplexField, psi: ComplexField, rhs: FieldPair) -> FieldPair:
    g = eta.grid
    n = g.n_modes
    f = rank_one_factor(eta, psi)
    c = eta.coeffs + psi.coeffs
    row = (g.absj * c)[g.neg_index]  # functional l(alpha,beta) = row . alpha + row . beta
    col = np.concatenate([psi.coeffs, eta.coeffs])
    mat = np.eye(2 * n, dtype=np.complex128) + f * np.outer(col, np.concatenate([row, row]))
    sol = np.linalg.solve(mat, np.concatenate([rhs[0].coeffs, rhs[1].coeffs]))
    return ComplexField(g, sol[:n]), ComplexField(g, sol[n:])


# -- full composition ----------------------------------------------------------


@dataclass
class TransformChain:
    """Optional diagnostic record of every intermediate pair of the composition."""

    stages: list = dataclass_field(default_factory=list)

    def add(self, name: str, pair: FieldPair) -> None:
        self.stages.append((name, pair))

    def to_dict(self) -> dict:
        return {
            "stages": [
                {"name": name, "first": field_to_dict(a), "second": field_to_dict(b)}
                for name, (a, b) in self.stages
            ]
        }


def change_of_variables(
    direction: str,
    state: ConjugatePair | RealPair,
    ball_radius: float | None = DEFAULT_BALL_RADIUS,
    chain: TransformChain | None = None,
) -> RealPair | ConjugatePair:
    """Composition of all four stages.

    fwd maps a :class:`ConjugatePair` (w, conj w) with ||w||_{m0} inside the
    operational ball to the physical :class:`RealPair` (u, v); inv goes back,
    requiring ||u||_{m0+1/2} + ||v||_{m0-1/2} inside the same ball. Pass
    ``ball_radius=None`` to disable the precondition (diagnostics only).
    """
    _check_direction(direction)
    if direction == "fwd":
        if not isinstance(state, ConjugatePair):
            raise ParameterError("fwd composition expects a ConjugatePair")
        m0 = state.grid.m0
        if ball_radius is not None and state.w.norm(m0) > ball_radius:
            raise DomainError(
                f"||w||_m0 = {state.w.norm(m0):.4f} outside the ball {ball_radius}"
            )
        pair = (state.w, state.z)
        if chain is not None:
            chain.add("input_wz", pair)
        pair = cubic_stage("fwd", pair)
        if chain is not None:
            chain.add("after_cubic", pair)
        pair = diag_stage("fwd", pair)
        if chain is not None:
            chain.add("after_diag", pair)
        pair = complex_stage("fwd", pair)
        if chain is not None:
            chain.add("after_complex", pair)
        u, v = scale_stage("fwd", pair)
        if chain is not None:
            chain.add("output_uv", (u, v))
        return RealPair(u, v)

    if not isinstance(state, RealPair):
        raise ParameterError("inv composition expects a RealPair")
    m0 = state.grid.m0
    size = state.u.norm(m0 + 0.5) + state.v.norm(m0 - 0.5)
    if ball_radius is not None and size > ball_radius:
        raise DomainError(f"||u|| + ||v|| = {size:.4f} outside the ball {ball_radius}")
    pair = (state.u, state.v)
    if chain is not None:
        chain.add("input_uv", pair)
    pair = scale_stage("inv", pair)
    if chain is not None:
        chain.add("after_scale_inv", pair)
    pair = complex_stage("inv", pair)
    if chain is not None:
        chain.add("after_complex_inv", pair)
    pair = diag_stage("inv", pair)
    if chain is not None:
        chain.add("after_diag_inv", pair)
    w, z = cubic_stage("inv", pair)
    if chain is not None:
        chain.add("output_wz", (w, z))
    scale = max(1.0, float(np.max(np.abs(w.coeffs))))
    if conjugate_defect(w, z) > 1e-9 * scale:
        raise DomainError("inverse composition lost the conjugate-pair structure")
    return ConjugatePair(w)


def equivalence_ratios(state: ConjugatePair, s: float, ball_radius: float | None = None) -> dict:
    """Measured two-sided norm-equivalence constants of the composition at one state."""
    uv = change_of_variables("fwd", state, ball_radius=ball_radius)
    w_norm = state.w.norm(s)
    uv_norm = uv.u.norm(s + 0.5) + uv.v.norm(s - 0.5)
    return {
        "s": s,
        "uv_over_w": uv_norm / w_norm if w_norm > 0 else 0.0,
        "w_over_uv": w_norm / uv_norm if uv_norm > 0 else 0.0,
    }
