"""Buckling, energy and timescale model of a single hair-clip ribbon.

The pinned ribbon buckles laterally with twist angle

    phi(z) = A1 * sqrt(l - z) * J_{1/4}( k/2 * (l - z)^2 ),   k = P_cr / sqrt(EI * C)

which solves ``C phi'' + (P_cr^2 / EI) (l - z)^2 phi = 0`` and vanishes at both
ends when ``k l^2 / 2`` is the first zero of J_{1/4}. Everything here works in
SI units and is a pure function of its inputs.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache

from scipy import integrate

from hairclip.special import besselj, first_zero

G_ACCEL = 9.81
QUAD_RTOL = 1e-8

# Reference chassis (PETG sheet, dual-HCM crawler).
PETG_E = 1730e6
PETG_NU = 0.40
PETG_RHO = 1270.0
REF_L = 129.1e-3
REF_D = 16e-3
REF_H = 15e-3
REF_T = 0.381e-3
REF_BODY_LENGTH = 200.6e-3
REF_FLEXION_LENGTH = 176.5e-3
NOMINAL_LOAD_CONSTANT = 5.5618


class ValidationError(ValueError):
    """Raised for physically meaningless inputs."""


class QuadratureError(RuntimeError):
    """Raised when an integral does not reach the requested tolerance."""


class Convention(str, enum.Enum):
    """Which bending stiffness formula feeds the critical load.

    ``PAPER_LITERAL`` uses the strong-axis expression E h^3 t / 12 (the default);
    ``WEAK_AXIS`` uses the textbook weak-axis value E h t^3 / 12.
    """

    PAPER_LITERAL = "paper-literal"
    WEAK_AXIS = "weak-axis"


def _positive(**values: float) -> None:
    for name, v in values.items():
        if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
            raise ValidationError(f"{name} must be a positive finite number, got {v!r}")


@dataclass(frozen=True)
class Material:
    E: float
    nu: float = PETG_NU
    rho_s: float = PETG_RHO
    G: float | None = None

    def __post_init__(self) -> None:
        _positive(E=self.E, rho_s=self.rho_s)
        if not 0 < self.nu < 0.5:
            raise ValidationError(f"nu must lie in (0, 0.5), got {self.nu!r}")
        if self.G is None:
            object.__setattr__(self, "G", self.E / (2.0 * (1.0 + self.nu)))
        else:
            _positive(G=self.G)


@dataclass(frozen=True)
class RibbonGeometry:
    """Half length ``l``, locking displacement ``D``, width ``h``, thickness ``t`` (m)."""

    l: float
    D: float
    h: float
    t: float

    def __post_init__(self) -> None:
        _positive(l=self.l, D=self.D, h=self.h, t=self.t)
        if not (self.t < self.h < 2.0 * self.l):
            raise ValidationError(
                f"thin-ribbon regime requires t < h < 2l, got t={self.t}, h={self.h}, l={self.l}"
            )


PETG = Material(E=PETG_E)
REFERENCE_GEOMETRY = RibbonGeometry(l=REF_L, D=REF_D, h=REF_H, t=REF_T)


@dataclass(frozen=True)
class SectionProperties:
    EI_eta: float
    C: float
    convention: Convention


def section_properties(
    mat: Material, geo: RibbonGeometry, convention: Convention = Convention.PAPER_LITERAL
) -> SectionProperties:
    convention = Convention(convention)
    if convention is Convention.PAPER_LITERAL:
        ei = mat.E * geo.h**3 * geo.t / 12.0
    else:
        ei = mat.E * geo.h * geo.t**3 / 12.0
    c = mat.G * geo.h * geo.t**3 / 3.0
    return SectionProperties(EI_eta=ei, C=c, convention=convention)


@lru_cache(maxsize=1)
def load_constant() -> float:
    """Twice the first zero of J_{1/4}; checked against the nominal 5.5618."""
    value = 2.0 * first_zero(0.25)
    if abs(value - NOMINAL_LOAD_CONSTANT) / NOMINAL_LOAD_CONSTANT > 1e-3:
        raise RuntimeError(f"load constant {value} disagrees with {NOMINAL_LOAD_CONSTANT}")
    return value


def critical_load(section: SectionProperties, geo: RibbonGeometry) -> float:
    """Lateral-torsional critical load P_cr = c0 / l^2 * sqrt(EI * C) in newtons."""
    return load_constant() / geo.l**2 * math.sqrt(section.EI_eta * section.C)


def _shape(u: float, a: float) -> float:
    """sqrt(u) J_{1/4}(a u^2), the unit-amplitude mode as a function of u = l - z."""
    return math.sqrt(u) * besselj(0.25, a * u * u)


def _shape_du(u: float, a: float) -> float:
    # d/du [sqrt(u) J_{1/4}(a u^2)] = J_{1/4}(X)/sqrt(u) - 2 a u^{3/2} J_{5/4}(X),  X = a u^2
    if u == 0.0:
        return 0.0
    x = a * u * u
    return besselj(0.25, x) / math.sqrt(u) - 2.0 * a * u**1.5 * besselj(1.25, x)


def _quad(f, lo: float, hi: float) -> float:
    # QUADPACK never evaluates the endpoints, so the sqrt(l - z) end is safe.
    out = integrate.quad(f, lo, hi, epsrel=QUAD_RTOL, epsabs=0.0, limit=200, full_output=True)
    val, err = out[0], out[1]
    if len(out) > 3 or not math.isfinite(val) or err > QUAD_RTOL * abs(val):
        msg = out[3] if len(out) > 3 else "error estimate above tolerance"
        raise QuadratureError(f"quadrature did not converge ({msg}): value={val}, error={err}")
    return val


@dataclass(frozen=True)
class BucklingSolution:
    P_cr: float
    A1: float
    psi_l: float
    geometry: RibbonGeometry
    section: SectionProperties = field(repr=False)

    @property
    def wavenumber(self) -> float:
        """k = P_cr / sqrt(EI C); the Bessel argument is k/2 * (l - z)^2."""
        return self.P_cr / math.sqrt(self.section.EI_eta * self.section.C)

    def mode_shape(self, z: float) -> float:
        return mode_shape(self, z)


def mode_shape(sol: BucklingSolution, z: float) -> float:
    """Lateral rotation angle phi(z) in radians for 0 <= z < l."""
    l = sol.geometry.l
    if not 0.0 <= z < l:
        raise ValidationError(f"z must lie in [0, l) = [0, {l}), got {z}")
    return sol.A1 * _shape(l - z, 0.5 * sol.wavenumber)


def mode_shape_slope(sol: BucklingSolution, z: float) -> float:
    """d(phi)/dz, used for the torsional strain energy."""
    l = sol.geometry.l
    if not 0.0 <= z <= l:
        raise ValidationError(f"z must lie in [0, l], got {z}")
    return -sol.A1 * _shape_du(l - z, 0.5 * sol.wavenumber)


def strain_energy_per_amplitude2(section: SectionProperties, geo: RibbonGeometry, P_cr: float) -> tuple[float, float]:
    """Bending and torsional strain energy of the unit-amplitude mode (J per A1^2).

    Lateral curvature is P_cr (l - z) phi / EI and the twist rate is phi'.
    """
    l = geo.l
    a = 0.5 * P_cr / math.sqrt(section.EI_eta * section.C)
    bend = _quad(lambda z: (P_cr * (l - z) * _shape(l - z, a)) ** 2 / section.EI_eta, 0.0, l)
    twist = _quad(lambda z: section.C * _shape_du(l - z, a) ** 2, 0.0, l)
    return 0.5 * bend, 0.5 * twist


def amplitude_closure(section: SectionProperties, geo: RibbonGeometry) -> float:
    """A1 such that the mode's strain energy equals the locking work P_cr * D."""
    p = critical_load(section, geo)
    bend, twist = strain_energy_per_amplitude2(section, geo, p)
    per_a2 = bend + twist
    if not per_a2 > 0:
        raise QuadratureError("mode strain energy is not positive")
    return math.sqrt(p * geo.D / per_a2)


def _tip_integral(P_cr: float, A1: float, section: SectionProperties, geo: RibbonGeometry) -> float:
    l = geo.l
    a = 0.5 * P_cr / math.sqrt(section.EI_eta * section.C)
    return P_cr / section.EI_eta * A1 * _quad(lambda z: _shape(l - z, a) * (l - z), 0.0, l)


def tip_angle(sol: BucklingSolution) -> float:
    """Tip bending angle: integral of the lateral curvature P_cr (l - z) phi / EI."""
    return _tip_integral(sol.P_cr, sol.A1, sol.section, sol.geometry)


def solve_buckling(
    mat: Material, geo: RibbonGeometry, convention: Convention = Convention.PAPER_LITERAL
) -> BucklingSolution:
    section = section_properties(mat, geo, convention)
    p = critical_load(section, geo)
    a1 = amplitude_closure(section, geo)
    psi = _tip_integral(p, a1, section, geo)
    return BucklingSolution(P_cr=p, A1=a1, psi_l=psi, geometry=geo, section=section)


def energy_barrier(P_cr: float, D: float) -> float:
    """U_barr = 3 P_cr D in joules."""
    _positive(P_cr=P_cr, D=D)
    return 3.0 * P_cr * D


def snap_timescale(geo: RibbonGeometry, mat: Material) -> float:
    """Snap-through time (2l)^2 / (t * sqrt(E / rho_s)) in seconds."""
    return (2.0 * geo.l) ** 2 / (geo.t * math.sqrt(mat.E / mat.rho_s))


@dataclass(frozen=True)
class EnergyLandscape:
    """Symmetric quartic double well on s in [0, stroke].

    U(s) = 16 U_barr s^2 (s - stroke)^2 / stroke^4, wells at 0 (extension) and
    ``stroke`` (flexion), barrier U_barr at stroke / 2.
    """

    U_barr: float
    stroke: float

    def __post_init__(self) -> None:
        _positive(U_barr=self.U_barr, stroke=self.stroke)

    @property
    def s_ext(self) -> float:
        return 0.0

    @property
    def s_flex(self) -> float:
        return self.stroke

    def energy(self, s: float) -> float:
        d = self.stroke
        return 16.0 * self.U_barr * s * s * (s - d) ** 2 / d**4

    def derivative(self, s: float) -> float:
        d = self.stroke
        return 32.0 * self.U_barr * s * (s - d) * (2.0 * s - d) / d**4

    def curvature(self, s: float) -> float:
        d = self.stroke
        return 32.0 * self.U_barr * (6.0 * s * s - 6.0 * d * s + d * d) / d**4

    def force(self, s: float) -> float:
        """-dU/ds."""
        return -self.derivative(s)

    @property
    def max_slope(self) -> float:
        """Largest |dU/ds| on [0, stroke], reached at stroke * (1/2 -+ 1/(2 sqrt 3))."""
        return 16.0 * self.U_barr / (3.0 * math.sqrt(3.0) * self.stroke)

    def __call__(self, s: float) -> float:
        return self.energy(s)


def build_landscape(U_barr: float, stroke: float) -> EnergyLandscape:
    return EnergyLandscape(U_barr=U_barr, stroke=stroke)


@dataclass(frozen=True)
class HCMReport:
    """Everything the single-design analysis prints."""

    section: SectionProperties
    solution: BucklingSolution
    U_barr: float
    t_star: float
    landscape: EnergyLandscape


def analyze_design(
    mat: Material,
    geo: RibbonGeometry,
    convention: Convention = Convention.PAPER_LITERAL,
    stroke: float = REF_BODY_LENGTH - REF_FLEXION_LENGTH,
) -> HCMReport:
    sol = solve_buckling(mat, geo, convention)
    ub = energy_barrier(sol.P_cr, geo.D)
    return HCMReport(
        section=sol.section,
        solution=sol,
        U_barr=ub,
        t_star=snap_timescale(geo, mat),
        landscape=build_landscape(ub, stroke),
    )
