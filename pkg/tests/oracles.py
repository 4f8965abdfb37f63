"""Independent reference computations used to cross-check the package.

These deliberately avoid the package's own integrator and operator code:
the oscillator oracle goes through scipy's DOP853, and the brute-force
helpers are plain double loops over the lattice.
"""

import numpy as np
from scipy.integrate import solve_ivp


def single_mode_oracle(j_sq: int, x0: complex, v0: complex, t_eval):
    """High-accuracy trajectory of x'' + j^2 x (1 + 2 j^2 |x|^2) = 0.

    This is the exact reduction of the full system to a single conjugate
    mode pair +-j with u_j = x and u_{-j} = conj(x).
    """
    j2 = float(j_sq)

    def rhs(t, y):
        xr, xi, vr, vi = y
        amp2 = xr * xr + xi * xi
        f = -j2 * (1.0 + 2.0 * j2 * amp2)
        return [vr, vi, f * xr, f * xi]

    sol = solve_ivp(
        rhs,
        (0.0, float(t_eval[-1])),
        [x0.real, x0.imag, v0.real, v0.imag],
        method="DOP853",
        rtol=1e-13,
        atol=1e-14,
        t_eval=t_eval,
        dense_output=False,
    )
    assert sol.success
    x = sol.y[0] + 1j * sol.y[1]
    v = sol.y[2] + 1j * sol.y[3]
    return x, v


def brute_force_small_divisor_margin(d: int, radius: int) -> float:
    """Worst 3|j| ||j|-|k|| over actual lattice pairs, by direct enumeration."""
    pts = []
    rng = range(-radius, radius + 1)
    if d == 2:
        pts = [(a, b) for a in rng for b in rng if 0 < a * a + b * b <= radius * radius]
    elif d == 3:
        pts = [
            (a, b, c)
            for a in rng
            for b in rng
            for c in rng
            if 0 < a * a + b * b + c * c <= radius * radius
        ]
    else:
        raise ValueError(d)
    norms = sorted({sum(c * c for c in p) for p in pts})
    worst = np.inf
    for n1 in norms:
        for n2 in norms:
            if n1 == n2:
                continue
            worst = min(worst, 3.0 * np.sqrt(n1) * abs(np.sqrt(n1) - np.sqrt(n2)))
    return float(worst)


def brute_force_coupling(kind: str, grid, u, v, h):
    """O(n^2) direct evaluation of the coupling operator from its definition."""
    n = grid.n_modes
    out = np.zeros(n, dtype=np.complex128)
    for kk in range(n):
        acc = 0.0 + 0.0j
        k2 = grid.j2[kk]
        ka = np.sqrt(float(k2))
        for jj in range(n):
            j2 = grid.j2[jj]
            ja = np.sqrt(float(j2))
            if kind == "diff":
                if j2 == k2:
                    continue
                c = j2 / (8.0 * (ja - ka))
            else:
                c = j2 / (8.0 * (ja + ka))
            acc += u[jj] * v[grid.neg_index[jj]] * c
        out[kk] = acc * h[kk]
    return out
