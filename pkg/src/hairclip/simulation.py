"""Planar two-body crawler with a bi-stable spine and anisotropic friction feet.

Model
-----
Fore and hind bodies are point masses at their feet. They share a horizontal
spine coordinate ``s`` (0 = extension, length L; stroke = flexion, length
L_f) so that ``x_fore - x_hind = L - s``. Forces:

* spine: ``-dU/ds - c ds/dt`` plus the servo push, acting along ``s``;
* gravity and a unilateral spring-damper ground contact on each foot;
* regularized Coulomb friction whose coefficient depends on the sliding
  direction (plastic forward, rubber backward);
* a vertical kick on the actuated feet proportional to the flexion rate
  (upward bending of the spine lifts the feet). The kick draws its energy
  from the spine through a skew coupling, so it is workless in continuous
  time.

Integration is kick-drift (semi-implicit) Euler. Friction is linearized and
treated implicitly, which keeps the 1 mm/s regularization stable at 1e-4 s
steps. The state stores the centre-of-mass *displacement* rather than
absolute positions, so mirrored runs are bit-exact negatives of each other.

Energy bookkeeping uses midpoint velocities for non-conservative work and
evaluates stored energy at the midpoint position of the last step; for a
staggered integrator this makes the balance second-order accurate.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from hairclip.mechanics import (
    G_ACCEL,
    REF_BODY_LENGTH,
    REF_FLEXION_LENGTH,
    EnergyLandscape,
    ValidationError,
)

TRAJECTORY_HEADER = ("t_s", "x_fore_m", "y_fore_m", "x_hind_m", "y_hind_m", "s_m", "contact_fore", "contact_hind")
SUITE_HEADER = ("label", "freq_hz", "substrate", "speed_mm_s", "speed_bl_s", "air_frac", "energy_mJ")

REF_STROKE = REF_BODY_LENGTH - REF_FLEXION_LENGTH
# Measured chassis barrier (43.4 mJ) split evenly between the two HCMs.
REF_HCM_BARRIER = 43.4e-3 / 2.0


class ConfigError(ValueError):
    pass


class SimulationInstability(RuntimeError):
    pass


@dataclass(frozen=True)
class SubstrateFriction:
    name: str
    mu_plastic: float
    mu_rubber: float

    def __post_init__(self) -> None:
        if not (self.mu_plastic > 0 and self.mu_rubber > 0):
            raise ValidationError("friction coefficients must be positive")

    @property
    def anisotropy(self) -> float:
        return self.mu_rubber / self.mu_plastic

    def swapped(self) -> SubstrateFriction:
        return SubstrateFriction(f"{self.name}-swapped", self.mu_rubber, self.mu_plastic)


# Preset coefficients are modelling defaults, not measurements; override them per config.
SUBSTRATES = {
    "wood": SubstrateFriction("wood", 0.25, 0.80),
    "glass": SubstrateFriction("glass", 0.20, 0.65),
    "marble": SubstrateFriction("marble", 0.30, 0.75),
    "concrete": SubstrateFriction("concrete", 0.60, 0.55),
}


class GaitMode(str, enum.Enum):
    SYMMETRIC_GALLOP = "symmetric-gallop"
    REAR_ONLY = "rear-only"


_REF_LANDSCAPE = EnergyLandscape(U_barr=REF_HCM_BARRIER, stroke=REF_STROKE)


@dataclass(frozen=True)
class RobotConfig:
    """Crawler parameters in SI units.

    The servo is a push-only, rate-limited drive: after each toggle it drives
    the spine toward the commanded well at ``servo_rate`` with gain
    ``servo_gain``, never exceeding ``servo_margin`` times the steepest
    landscape slope plus the largest foot friction. It lets go once the spine
    passes the barrier and the landscape finishes the snap. The rate must
    carry the spine to the barrier within ``snap_time``.

    ``kick_gain`` (N s/m) converts flexion rate into an upward push on each
    actuated foot; its default gives a 50-100 ms air phase on the reference
    2 Hz wood run.
    """

    total_mass: float = 0.072
    mass_split: float = 0.5
    body_length: float = REF_BODY_LENGTH
    flexion_length: float = REF_FLEXION_LENGTH
    fore_landscape: EnergyLandscape = _REF_LANDSCAPE
    rear_landscape: EnergyLandscape = _REF_LANDSCAPE
    spine_damping: float = 2.0
    snap_time: float = 0.15
    substrate: SubstrateFriction = SUBSTRATES["wood"]
    frequency: float = 2.0
    mode: GaitMode = GaitMode.SYMMETRIC_GALLOP
    servo_energy_limit: float | None = None
    actuated: bool = True
    contact_stiffness: float = 1e4
    contact_damping_ratio: float = 1.0
    v_eps: float = 1e-3
    kick_gain: float = 1.0
    servo_margin: float = 1.25
    servo_gain: float = 50.0
    servo_rate: float = 0.3
    label: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", GaitMode(self.mode))
        if not self.total_mass > 0:
            raise ConfigError("total_mass must be positive")
        if not 0 < self.mass_split < 1:
            raise ConfigError("mass_split must lie in (0, 1)")
        if not 0 < self.flexion_length < self.body_length:
            raise ConfigError("flexion_length must be positive and shorter than body_length")
        stroke = self.body_length - self.flexion_length
        for name in ("fore_landscape", "rear_landscape"):
            ls = getattr(self, name)
            if abs(ls.stroke - stroke) > 1e-9 * stroke:
                raise ConfigError(f"{name}.stroke={ls.stroke} must equal body_length - flexion_length = {stroke}")
        if not self.frequency > 0:
            raise ConfigError("frequency must be positive")
        if self.spine_damping < 0 or self.kick_gain < 0:
            raise ConfigError("spine_damping and kick_gain must be non-negative")
        if not (self.snap_time > 0 and self.contact_stiffness > 0 and self.v_eps > 0):
            raise ConfigError("snap_time, contact_stiffness and v_eps must be positive")
        if self.contact_damping_ratio < 0 or self.servo_margin <= 1.0:
            raise ConfigError("contact_damping_ratio must be >= 0 and servo_margin > 1")
        if not (self.servo_gain > 0 and self.servo_rate > 0):
            raise ConfigError("servo_gain and servo_rate must be positive")
        if 0.5 * stroke / self.servo_rate > self.snap_time:
            raise ConfigError(
                f"servo_rate {self.servo_rate} m/s cannot reach the barrier within snap_time {self.snap_time} s"
            )
        if self.servo_energy_limit is not None and self.servo_energy_limit < self.active_barrier:
            raise ConfigError(
                f"servo energy limit {self.servo_energy_limit:.4g} J cannot overcome "
                f"the active barrier {self.active_barrier:.4g} J"
            )

    @property
    def stroke(self) -> float:
        return self.body_length - self.flexion_length

    @property
    def masses(self) -> tuple[float, float]:
        mf = self.total_mass * self.mass_split
        return mf, self.total_mass - mf

    @property
    def active_landscapes(self) -> tuple[EnergyLandscape, ...]:
        if self.mode is GaitMode.REAR_ONLY:
            return (self.rear_landscape,)
        return (self.fore_landscape, self.rear_landscape)

    @property
    def active_barrier(self) -> float:
        return sum(ls.U_barr for ls in self.active_landscapes)

    @property
    def period(self) -> float:
        return 1.0 / self.frequency

    @property
    def servo_force(self) -> float:
        """Upper bound on the servo push along s (N)."""
        slope = sum(ls.max_slope for ls in self.active_landscapes)
        mu = max(self.substrate.mu_plastic, self.substrate.mu_rubber)
        return self.servo_margin * slope + mu * self.total_mass * G_ACCEL

    @property
    def kicked(self) -> tuple[bool, bool]:
        """Which feet (fore, hind) receive the flexion kick."""
        return (self.mode is GaitMode.SYMMETRIC_GALLOP, True)


def friction_force(
    normal: float, substrate: SubstrateFriction, slip_velocity: float, v_eps: float = 1e-3
) -> float:
    """Horizontal friction on a foot sliding at ``slip_velocity`` (positive = forward).

    Forward sliding sees the plastic coefficient, backward sliding the rubber
    one; ``tanh(v / v_eps)`` regularizes the sign function near zero slip.
    """
    if normal < 0:
        raise ValidationError("normal force must be non-negative")
    th = math.tanh(slip_velocity / v_eps)
    mu = substrate.mu_plastic if th > 0 else substrate.mu_rubber
    return -normal * mu * th


def _spine_potential(cfg_landscapes, stroke: float, k_wall: float, s: float) -> float:
    u = 0.0
    for ls in cfg_landscapes:
        u += ls.energy(s)
    if s < 0.0:
        u += 0.5 * k_wall * s * s
    elif s > stroke:
        u += 0.5 * k_wall * (s - stroke) ** 2
    return u


def _spine_slope(cfg_landscapes, stroke: float, k_wall: float, s: float) -> float:
    du = 0.0
    for ls in cfg_landscapes:
        du += ls.derivative(s)
    if s < 0.0:
        du += k_wall * s
    elif s > stroke:
        du += k_wall * (s - stroke)
    return du


def _wall_stiffness(cfg: RobotConfig) -> float:
    return 10.0 * sum(ls.curvature(0.0) for ls in cfg.active_landscapes)


def spine_force(config: RobotConfig, s: float, s_rate: float) -> float:
    """Generalized force along s: ``-dU/ds - c ds/dt`` over the active landscapes.

    Outside [0, stroke] a stiff quadratic wall adds a restoring force.
    """
    slope = _spine_slope(config.active_landscapes, config.stroke, _wall_stiffness(config), s)
    return -slope - config.spine_damping * s_rate


class SpineTarget(enum.IntEnum):
    EXTENSION = 0
    FLEXION = 1


def servo_target(config: RobotConfig, time: float) -> SpineTarget:
    """Square-wave command: flexion on [0, T/2), extension on [T/2, T), ..."""
    k = math.floor(2.0 * config.frequency * time + 1e-9)
    return SpineTarget.FLEXION if k % 2 == 0 else SpineTarget.EXTENSION


def actuate(config: RobotConfig, time: float) -> list[tuple[float, SpineTarget]]:
    """Servo toggle events (time, new target) on [0, time]."""
    if not config.frequency > 0:
        raise ConfigError("frequency must be positive")
    half = 0.5 / config.frequency
    n = math.floor(time / half + 1e-9)
    return [(k * half, SpineTarget.FLEXION if k % 2 == 0 else SpineTarget.EXTENSION) for k in range(n + 1)]


@dataclass(frozen=True)
class SimState:
    """Integrator state.

    ``x_disp`` is the centre-of-mass displacement since the start; absolute
    foot positions follow from it and ``s``. Velocities are the staggered
    half-step values of the kick-drift scheme. The ``e_*`` fields are the
    running energy ledger (J).
    """

    time: float
    x_disp: float
    s: float
    vx_fore: float
    vx_hind: float
    y_fore: float
    y_hind: float
    vy_fore: float
    vy_hind: float
    e_stored: float = 0.0
    e_injected: float = 0.0
    e_dissipated: float = 0.0
    e_coupling: float = 0.0
    x0: float = 0.0

    @property
    def s_rate(self) -> float:
        return self.vx_hind - self.vx_fore

    def positions(self, config: RobotConfig) -> tuple[float, float]:
        mf, mh = config.masses
        m = mf + mh
        span = config.body_length - self.s
        xc = self.x0 + self.x_disp
        return xc + mh / m * span, xc - mf / m * span

    @property
    def contact_fore(self) -> bool:
        return self.y_fore < 0.0

    @property
    def contact_hind(self) -> bool:
        return self.y_hind < 0.0


def rest_state(config: RobotConfig, s: float = 0.0) -> SimState:
    """Both feet on the ground at static equilibrium, spine at ``s``."""
    mf, mh = config.masses
    k = config.contact_stiffness
    yf, yh = -mf * G_ACCEL / k, -mh * G_ACCEL / k
    state = SimState(
        time=0.0, x_disp=0.0, s=s, vx_fore=0.0, vx_hind=0.0, y_fore=yf, y_hind=yh, vy_fore=0.0, vy_hind=0.0,
        x0=mf / config.total_mass * config.body_length,
    )
    return replace(state, e_stored=stored_energy(config, state))


def stored_energy(config: RobotConfig, state: SimState, s: float | None = None,
                  y_fore: float | None = None, y_hind: float | None = None) -> float:
    """Kinetic + spine + gravity + contact-spring energy (J)."""
    mf, mh = config.masses
    s = state.s if s is None else s
    yf = state.y_fore if y_fore is None else y_fore
    yh = state.y_hind if y_hind is None else y_hind
    k = config.contact_stiffness
    ke = 0.5 * mf * (state.vx_fore**2 + state.vy_fore**2) + 0.5 * mh * (state.vx_hind**2 + state.vy_hind**2)
    pe = _spine_potential(config.active_landscapes, config.stroke, _wall_stiffness(config), s)
    pe += G_ACCEL * (mf * yf + mh * yh)
    if yf < 0:
        pe += 0.5 * k * yf * yf
    if yh < 0:
        pe += 0.5 * k * yh * yh
    return ke + pe


class _Params:
    """Flattened scalars for the inner loop."""

    __slots__ = (
        "mf", "mh", "m", "L", "stroke", "landscapes", "k_wall", "c", "F_servo", "v_servo", "b_servo", "freq",
        "actuated",
        "k", "cn_f", "cn_h", "mu_p", "mu_r", "veps", "kappa", "kick_f", "kick_h", "g",
    )

    def __init__(self, cfg: RobotConfig) -> None:
        self.mf, self.mh = cfg.masses
        self.m = cfg.total_mass
        self.L = cfg.body_length
        self.stroke = cfg.stroke
        self.landscapes = cfg.active_landscapes
        self.k_wall = _wall_stiffness(cfg)
        self.c = cfg.spine_damping
        self.F_servo = cfg.servo_force
        self.v_servo = cfg.servo_rate
        self.b_servo = cfg.servo_gain
        self.freq = cfg.frequency
        self.actuated = cfg.actuated
        self.k = cfg.contact_stiffness
        self.cn_f = 2.0 * cfg.contact_damping_ratio * math.sqrt(self.k * self.mf)
        self.cn_h = 2.0 * cfg.contact_damping_ratio * math.sqrt(self.k * self.mh)
        self.mu_p = cfg.substrate.mu_plastic
        self.mu_r = cfg.substrate.mu_rubber
        self.veps = cfg.v_eps
        self.kappa = cfg.kick_gain
        self.kick_f, self.kick_h = cfg.kicked
        self.g = G_ACCEL


def _implicit_friction(v: float, force: float, normal: float, p: _Params, m: float, dt: float) -> float:
    """Velocity update with friction linearized about ``v`` and taken implicitly."""
    if normal <= 0.0:
        return v + dt * force / m
    th = math.tanh(v / p.veps)
    if th > 0.0:
        mu = p.mu_p
    elif th < 0.0:
        mu = p.mu_r
    else:
        mu = 0.5 * (p.mu_p + p.mu_r)
    f = -normal * mu * th
    dfdv = -normal * mu * (1.0 - th * th) / p.veps
    return v + dt * (force + f) / (m - dt * dfdv)


def _advance(st: list, p: _Params, dt: float) -> None:
    """One kick-drift step, in place on the flat state list.

    Layout: [t, X, s, vf, vh, yf, yh, vyf, vyh, e_inj, e_diss, e_coup].
    """
    t, X, s, vf, vh, yf, yh, vyf, vyh, e_inj, e_diss, e_coup = st
    mf, mh, k = p.mf, p.mh, p.k
    sdot = vh - vf

    # ground contact
    cf = yf < 0.0
    ch = yh < 0.0
    spring_f = -k * yf if cf else 0.0
    spring_h = -k * yh if ch else 0.0
    nf = spring_f - p.cn_f * vyf if cf else 0.0
    nh = spring_h - p.cn_h * vyh if ch else 0.0
    if nf < 0.0:
        nf = 0.0
    if nh < 0.0:
        nh = 0.0

    # flexion kick, paid for by the spine
    kf = kh = 0.0
    f_skick = 0.0
    if sdot > 0.0 and p.kappa > 0.0:
        if p.kick_f:
            kf = p.kappa * sdot
            f_skick -= p.kappa * vyf
        if p.kick_h:
            kh = p.kappa * sdot
            f_skick -= p.kappa * vyh

    # servo
    f_servo = 0.0
    if p.actuated:
        half = 0.5 * p.stroke
        if math.floor(2.0 * p.freq * t + 1e-9) % 2 == 0:
            if s < half:
                push = p.b_servo * (p.v_servo - sdot)
                if push > 0.0:
                    f_servo = push if push < p.F_servo else p.F_servo
        elif s > half:
            push = p.b_servo * (p.v_servo + sdot)
            if push > 0.0:
                f_servo = -(push if push < p.F_servo else p.F_servo)

    slope = 0.0
    for ls in p.landscapes:
        slope += ls.derivative(s)
    if s < 0.0:
        slope += p.k_wall * s
    elif s > p.stroke:
        slope += p.k_wall * (s - p.stroke)
    f_damp = -p.c * sdot
    f_s = -slope + f_damp + f_servo + f_skick

    # kick (velocities)
    vyf_n = vyf + dt * (nf + kf - mf * p.g) / mf
    vyh_n = vyh + dt * (nh + kh - mh * p.g) / mh
    vf_n = _implicit_friction(vf, -f_s, nf, p, mf, dt)
    vh_n = _implicit_friction(vh, f_s, nh, p, mh, dt)

    # drift (positions)
    X += dt * (mf * vf_n + mh * vh_n) / p.m
    sdot_n = vh_n - vf_n
    s += dt * sdot_n
    yf += dt * vyf_n
    yh += dt * vyh_n

    # energy ledger with midpoint velocities
    sbar = 0.5 * (sdot + sdot_n)
    vfbar = 0.5 * (vf + vf_n)
    vhbar = 0.5 * (vh + vh_n)
    fric_f = mf * (vf_n - vf) / dt + f_s
    fric_h = mh * (vh_n - vh) / dt - f_s
    e_inj += f_servo * sbar * dt
    e_diss -= (f_damp * sbar + fric_f * vfbar + fric_h * vhbar) * dt
    e_diss -= ((nf - spring_f) * 0.5 * (vyf + vyf_n) + (nh - spring_h) * 0.5 * (vyh + vyh_n)) * dt
    e_coup += (kf * 0.5 * (vyf + vyf_n) + kh * 0.5 * (vyh + vyh_n) + f_skick * sbar) * dt

    st[:] = [t + dt, X, s, vf_n, vh_n, yf, yh, vyf_n, vyh_n, e_inj, e_diss, e_coup]


def _midpoint_energy(cfg: RobotConfig, p: _Params, st: list, dt: float) -> float:
    _, _, s, vf, vh, yf, yh, vyf, vyh = st[:9]
    s_mid = s - 0.5 * dt * (vh - vf)
    yf_mid = yf - 0.5 * dt * vyf
    yh_mid = yh - 0.5 * dt * vyh
    ke = 0.5 * p.mf * (vf * vf + vyf * vyf) + 0.5 * p.mh * (vh * vh + vyh * vyh)
    pe = _spine_potential(p.landscapes, p.stroke, p.k_wall, s_mid) + p.g * (p.mf * yf_mid + p.mh * yh_mid)
    if yf_mid < 0:
        pe += 0.5 * p.k * yf_mid * yf_mid
    if yh_mid < 0:
        pe += 0.5 * p.k * yh_mid * yh_mid
    return ke + pe


def _check_dt(config: RobotConfig, dt: float) -> None:
    if not dt > 0:
        raise ConfigError("dt must be positive")
    if dt > config.snap_time / 20.0:
        raise ConfigError(f"dt={dt} does not resolve the snap (need dt <= snap_time/20 = {config.snap_time / 20})")


def _to_list(state: SimState) -> list:
    return [state.time, state.x_disp, state.s, state.vx_fore, state.vx_hind, state.y_fore, state.y_hind,
            state.vy_fore, state.vy_hind, state.e_injected, state.e_dissipated, state.e_coupling]


def _from_list(st: list, e_stored: float, x0: float) -> SimState:
    t, X, s, vf, vh, yf, yh, vyf, vyh, e_inj, e_diss, e_coup = st
    return SimState(time=t, x_disp=X, s=s, vx_fore=vf, vx_hind=vh, y_fore=yf, y_hind=yh, vy_fore=vyf,
                    vy_hind=vyh, e_stored=e_stored, e_injected=e_inj, e_dissipated=e_diss, e_coupling=e_coup, x0=x0)


def _guard(e_stored: float, e0: float, e_inj: float, t: float) -> None:
    if e_stored - e0 > 2.0 * max(e_inj, 1e-6):
        raise SimulationInstability(
            f"stored energy grew by {e_stored - e0:.4g} J at t={t:.4f} s, "
            f"more than twice the injected {e_inj:.4g} J; reduce dt"
        )


def step(state: SimState, config: RobotConfig, dt: float, e0: float | None = None) -> SimState:
    """Advance one semi-implicit Euler step.

    ``e0`` is the stored energy at the start of the run, used by the
    instability guard; it defaults to the incoming state's ledger value.
    """
    _check_dt(config, dt)
    p = _Params(config)
    st = _to_list(state)
    _advance(st, p, dt)
    e = _midpoint_energy(config, p, st, dt)
    _guard(e, state.e_stored if e0 is None else e0, st[9], st[0])
    return _from_list(st, e, state.x0)


@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled run output (struct of arrays).

    Sample ``i`` is taken after ``i * decimation`` integrator steps, so the
    sample period is ``decimation * dt``. The energy arrays hold the running
    ledger at each sample.
    """

    t: np.ndarray
    x_fore: np.ndarray
    y_fore: np.ndarray
    x_hind: np.ndarray
    y_hind: np.ndarray
    s: np.ndarray
    contact_fore: np.ndarray
    contact_hind: np.ndarray
    x_disp: np.ndarray
    e_stored: np.ndarray
    e_injected: np.ndarray
    e_dissipated: np.ndarray
    e_coupling: np.ndarray
    sample_period: float
    dt: float
    config: RobotConfig = field(repr=False)

    def __len__(self) -> int:
        return len(self.t)

    @property
    def duration(self) -> float:
        return float(self.t[-1] - self.t[0])

    @property
    def net_displacement(self) -> float:
        return float(self.x_disp[-1])

    @property
    def mean_speed(self) -> float:
        return self.net_displacement / self.duration

    @property
    def injected_energy(self) -> float:
        return float(self.e_injected[-1])

    @property
    def x_com(self) -> np.ndarray:
        mf, mh = self.config.masses
        return (mf * self.x_fore + mh * self.x_hind) / (mf + mh)

    def energy_residual(self) -> np.ndarray:
        """Stored-energy change + dissipated - injected - coupling work, per sample."""
        return (self.e_stored - self.e_stored[0]) + self.e_dissipated - self.e_injected - self.e_coupling

    def audit_error(self) -> float:
        """Largest ledger residual relative to the total injected energy."""
        scale = max(self.injected_energy, abs(float(self.e_stored[0])), 1e-12)
        return float(np.max(np.abs(self.energy_residual())) / scale)


def run_gait(config: RobotConfig, duration: float, dt: float = 1e-4, sample_rate: float = 1000.0) -> Trajectory:
    """Integrate from rest in the extension well for ``duration`` seconds."""
    _check_dt(config, dt)
    if duration < 3.0 * config.period - 1e-12:
        raise ConfigError(f"duration {duration} s is shorter than 3 actuation periods ({3 * config.period} s)")
    decimation = max(1, int(round(1.0 / (sample_rate * dt))))
    n_steps = int(round(duration / dt))
    n_samples = n_steps // decimation + 1
    p = _Params(config)
    state = rest_state(config)
    x0 = state.x0
    e0 = state.e_stored
    st = _to_list(state)
    cols = np.empty((n_samples, 13))
    mfrac, hfrac = p.mh / p.m, p.mf / p.m

    def record(i: int, e: float) -> None:
        t, X, s, _, _, yf, yh = st[:7]
        span = p.L - s
        xc = x0 + X
        cols[i] = (t, xc + mfrac * span, yf, xc - hfrac * span, yh, s, yf < 0.0, yh < 0.0, X, e,
                   st[9], st[10], st[11])

    record(0, e0)
    i = 0
    for n in range(1, n_steps + 1):
        _advance(st, p, dt)
        st[0] = n * dt
        if n % decimation == 0:
            e = _midpoint_energy(config, p, st, dt)
            _guard(e, e0, st[9], st[0])
            i += 1
            record(i, e)
    cols = cols[: i + 1]
    return Trajectory(
        t=cols[:, 0], x_fore=cols[:, 1], y_fore=cols[:, 2], x_hind=cols[:, 3], y_hind=cols[:, 4], s=cols[:, 5],
        contact_fore=cols[:, 6].astype(bool), contact_hind=cols[:, 7].astype(bool), x_disp=cols[:, 8],
        e_stored=cols[:, 9], e_injected=cols[:, 10], e_dissipated=cols[:, 11], e_coupling=cols[:, 12],
        sample_period=decimation * dt, dt=dt, config=config,
    )


def write_trajectory_csv(traj: Trajectory) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRAJECTORY_HEADER)
    for i in range(len(traj)):
        w.writerow([
            f"{traj.t[i]:.6f}", f"{traj.x_fore[i]:.9e}", f"{traj.y_fore[i]:.9e}", f"{traj.x_hind[i]:.9e}",
            f"{traj.y_hind[i]:.9e}", f"{traj.s[i]:.9e}", int(traj.contact_fore[i]), int(traj.contact_hind[i]),
        ])
    return buf.getvalue()


def read_trajectory_csv(text: str) -> dict[str, np.ndarray]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != TRAJECTORY_HEADER:
        raise ValueError(f"expected header {','.join(TRAJECTORY_HEADER)}")
    data = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float).reshape(-1, len(TRAJECTORY_HEADER))
    out = {name: data[:, j] for j, name in enumerate(TRAJECTORY_HEADER)}
    out["contact_fore"] = out["contact_fore"].astype(bool)
    out["contact_hind"] = out["contact_hind"].astype(bool)
    return out


@dataclass(frozen=True)
class SuiteEntry:
    label: str
    config: RobotConfig
    duration: float = 5.0
    dt: float = 1e-4


@dataclass(frozen=True)
class SuiteRow:
    label: str
    freq_hz: float
    substrate: str
    speed_mm_s: float = math.nan
    speed_bl_s: float = math.nan
    air_frac: float = math.nan
    energy_mJ: float = math.nan
    error: str | None = None

    def as_csv_row(self) -> list[str]:
        def f(x: float) -> str:
            return "nan" if math.isnan(x) else f"{x:.6g}"

        return [self.label, f(self.freq_hz), self.substrate, f(self.speed_mm_s), f(self.speed_bl_s),
                f(self.air_frac), f(self.energy_mJ)]


def _run_entry(entry: SuiteEntry) -> SuiteRow:
    cfg = entry.config
    try:
        traj = run_gait(cfg, entry.duration, entry.dt)
    except (ConfigError, SimulationInstability, ValidationError) as exc:
        return SuiteRow(entry.label, cfg.frequency, cfg.substrate.name, error=f"{type(exc).__name__}: {exc}")
    airborne = ~(traj.contact_fore | traj.contact_hind)
    speed = traj.mean_speed
    return SuiteRow(
        label=entry.label,
        freq_hz=cfg.frequency,
        substrate=cfg.substrate.name,
        speed_mm_s=speed * 1e3,
        speed_bl_s=speed / cfg.body_length,
        air_frac=float(np.mean(airborne)),
        energy_mJ=traj.injected_energy * 1e3,
    )


def experiment_suite(entries: list[SuiteEntry], workers: int = 1) -> list[SuiteRow]:
    """Run each entry; failures become rows with ``error`` set. Order follows ``entries``."""
    if not entries:
        raise ConfigError("experiment suite needs at least one entry")
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_run_entry, entries))
    return [_run_entry(e) for e in entries]


def write_suite_csv(rows: list[SuiteRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUITE_HEADER)
    for r in rows:
        w.writerow(r.as_csv_row())
    return buf.getvalue()


def read_suite_csv(text: str) -> list[SuiteRow]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != SUITE_HEADER:
        raise ValueError(f"expected header {','.join(SUITE_HEADER)}")
    return [SuiteRow(r[0], float(r[1]), r[2], *(float(v) for v in r[3:])) for r in rows[1:]]
