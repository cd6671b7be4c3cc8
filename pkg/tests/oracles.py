"""Independent reference computations used only by the tests.

Nothing here imports the Bessel or quadrature code under test: the mode is
rebuilt from scipy.special.jv, and the load constant is found by shooting
on the ODE itself.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate, optimize, special


def jv_zero(nu: float = 0.25) -> float:
    return optimize.brentq(lambda x: special.jv(nu, x), nu + 1.0, nu + 4.0, xtol=1e-15, rtol=1e-15)


def shooting_load_constant() -> float:
    """Smallest lam with a nontrivial solution of phi'' + lam^2 u^2 phi = 0, phi(0) = phi(1) = 0."""

    def end_value(lam: float) -> float:
        sol = integrate.solve_ivp(
            lambda u, y: [y[1], -lam * lam * u * u * y[0]], (0.0, 1.0), [0.0, 1.0], rtol=1e-12, atol=1e-14
        )
        return sol.y[0, -1]

    return optimize.brentq(end_value, 4.0, 7.0, xtol=1e-13)


def reference_solution(E: float, nu: float, l: float, D: float, h: float, t: float, weak_axis: bool) -> dict:
    """P_cr, A1 and psi_l from scipy.special.jv and scipy.integrate.quad."""
    G = E / (2.0 * (1.0 + nu))
    EI = E * h * t**3 / 12.0 if weak_axis else E * h**3 * t / 12.0
    C = G * h * t**3 / 3.0
    c0 = 2.0 * jv_zero(0.25)
    P = c0 / l**2 * math.sqrt(EI * C)
    a = 0.5 * P / math.sqrt(EI * C)

    def y(u):
        return math.sqrt(u) * special.jv(0.25, a * u * u)

    def dy(u):
        # central difference of the scipy mode, step well inside smooth region
        hh = 1e-6 * l
        lo = max(u - hh, 0.0)
        return (y(u + hh) - y(lo)) / (u + hh - lo)

    opts = dict(epsabs=0.0, epsrel=1e-11, limit=400)
    bend = integrate.quad(lambda u: (P * u * y(u)) ** 2 / EI, 0.0, l, **opts)[0]
    twist = integrate.quad(lambda u: C * dy(u) ** 2, 0.0, l, **opts)[0]
    A1 = math.sqrt(P * D / (0.5 * (bend + twist)))
    psi = P / EI * A1 * integrate.quad(lambda u: y(u) * u, 0.0, l, **opts)[0]
    return {"EI": EI, "C": C, "P_cr": P, "A1": A1, "psi_l": psi, "U_barr": 3.0 * P * D}


def ode_residual(sol, n_points: int = 100, h_frac: float = 1e-3) -> float:
    """max |C phi'' + (P^2/EI)(l-z)^2 phi| / max |C phi''| at interior points, 5-point stencil."""
    l = sol.geometry.l
    C, EI, P = sol.section.C, sol.section.EI_eta, sol.P_cr
    h = h_frac * l
    zs = np.linspace(0.0, l, n_points + 2)[1:-1]
    res, scale = [], []
    for z in zs:
        f = [sol.mode_shape(z + k * h) for k in (-2, -1, 0, 1, 2)]
        d2 = (-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12.0 * h * h)
        res.append(C * d2 + P * P / EI * (l - z) ** 2 * f[2])
        scale.append(abs(C * d2))
    return float(np.max(np.abs(res)) / np.max(scale))
