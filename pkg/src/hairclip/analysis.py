"""Bending-test and motion-trace analysis.

Bending data stay in the units the test machine reports (mm, N), so a
load-displacement area comes out directly in mJ. Traces are held in SI.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from hairclip.mechanics import G_ACCEL

BENDING_COLUMNS = ("disp_mm", "load_N")
TRACE_REQUIRED = ("t_s", "x_mm")
TRACE_OPTIONAL = ("y_mm", "psi1_deg", "psi2_deg")


class AnalysisError(ValueError):
    pass


class CSVFormatError(AnalysisError):
    def __init__(self, message: str, line: int | None = None) -> None:
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class BendingRecord:
    disp_mm: np.ndarray
    load_N: np.ndarray
    span_mm: float = 180.0

    def __post_init__(self) -> None:
        d = np.asarray(self.disp_mm, dtype=float)
        f = np.asarray(self.load_N, dtype=float)
        object.__setattr__(self, "disp_mm", d)
        object.__setattr__(self, "load_N", f)
        if d.shape != f.shape or d.ndim != 1:
            raise AnalysisError("displacement and load must be 1-D arrays of equal length")
        if len(d) < 5:
            raise AnalysisError(f"need at least 5 samples, got {len(d)}")
        if not (np.all(np.isfinite(d)) and np.all(np.isfinite(f))):
            raise AnalysisError("samples must be finite")
        if np.any(np.diff(d) < 0):
            raise AnalysisError("displacements must be non-decreasing")


@dataclass(frozen=True)
class StiffnessFit:
    K: float
    stderr: float
    n: int
    region: tuple[float, float]


def fit_stiffness(rec: BendingRecord, region: tuple[float, float] | None = None) -> StiffnessFit:
    """Least-squares slope of load on displacement (N/mm) with its standard error.

    Without ``region`` the fit uses the central half of the displacement range.
    """
    d, f = rec.disp_mm, rec.load_N
    if region is None:
        lo, hi = d[0], d[-1]
        region = (lo + 0.25 * (hi - lo), lo + 0.75 * (hi - lo))
    mask = (d >= region[0]) & (d <= region[1])
    x, y = d[mask], f[mask]
    n = len(x)
    if n < 3:
        raise AnalysisError(f"fit region {region} holds {n} samples; need at least 3")
    xm = x.mean()
    dx = x - xm
    sxx = float(np.dot(dx, dx))
    if sxx == 0.0:
        raise AnalysisError("degenerate fit region: displacement has zero variance")
    slope = float(np.dot(dx, y - y.mean())) / sxx
    resid = y - y.mean() - slope * dx
    stderr = math.sqrt(float(np.dot(resid, resid)) / (n - 2) / sxx) if n > 2 else math.nan
    return StiffnessFit(K=slope, stderr=stderr, n=n, region=(float(region[0]), float(region[1])))


def barrier_from_curve(rec: BendingRecord) -> float:
    """Area under the load-displacement curve in mJ (N*mm), trapezoidal rule."""
    d, f = rec.disp_mm, rec.load_N
    return math.fsum(0.5 * (d[1:] - d[:-1]) * (f[1:] + f[:-1]))


def static_deflection(mass: float, K: float) -> float:
    """Deflection in mm of stiffness ``K`` (N/mm) under the weight of ``mass`` kg."""
    if not K > 0:
        raise AnalysisError("stiffness must be positive")
    if mass < 0:
        raise AnalysisError("mass must be non-negative")
    return mass * G_ACCEL / K


@dataclass(frozen=True)
class Trace:
    """A motion trace in SI units; optional channels may be None.

    ``contact`` (True = some foot on the ground) takes precedence over ``y``
    for air-phase detection.
    """

    t: np.ndarray
    x: np.ndarray
    y: np.ndarray | None = None
    psi1_deg: np.ndarray | None = None
    psi2_deg: np.ndarray | None = None
    contact: np.ndarray | None = None
    period: float | None = None
    y_rest: float | None = None

    def __post_init__(self) -> None:
        t = np.asarray(self.t, dtype=float)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        if len(t) < 2:
            raise AnalysisError("a trace needs at least 2 samples")
        if np.any(np.diff(t) <= 0):
            raise AnalysisError("trace time stamps must be strictly increasing")
        for name in ("x", "y", "psi1_deg", "psi2_deg", "contact"):
            v = getattr(self, name)
            if v is not None:
                v = np.asarray(v, dtype=bool if name == "contact" else float)
                object.__setattr__(self, name, v)
                if v.shape != t.shape:
                    raise AnalysisError(f"channel {name} has {len(v)} samples, expected {len(t)}")

    @classmethod
    def from_trajectory(cls, traj) -> Trace:
        cfg = traj.config
        mf, mh = cfg.masses
        y = (mf * traj.y_fore + mh * traj.y_hind) / (mf + mh)
        return cls(
            t=traj.t,
            x=traj.x_com,
            y=y,
            contact=traj.contact_fore | traj.contact_hind,
            period=cfg.period,
            y_rest=float(y[0]),
        )


def read_bending_csv(text: str, span_mm: float = 180.0) -> BendingRecord:
    rows = _rows(text)
    header = [h.strip() for h in rows[0][1]]
    if tuple(header) != BENDING_COLUMNS:
        raise CSVFormatError(f"expected header {','.join(BENDING_COLUMNS)}, got {','.join(header)}", rows[0][0])
    vals = [_floats(line, r, 2) for line, r in rows[1:]]
    if not vals:
        raise CSVFormatError("no data rows")
    arr = np.array(vals)
    return BendingRecord(arr[:, 0], arr[:, 1], span_mm=span_mm)


def read_trace_csv(text: str, period: float | None = None) -> Trace:
    """Parse ``t_s,x_mm[,y_mm][,psi1_deg,psi2_deg]`` into a SI-unit trace."""
    rows = _rows(text)
    header = [h.strip() for h in rows[0][1]]
    if tuple(header[:2]) != TRACE_REQUIRED:
        raise CSVFormatError("header must start with t_s,x_mm", rows[0][0])
    unknown = [h for h in header[2:] if h not in TRACE_OPTIONAL]
    if unknown or len(set(header)) != len(header):
        raise CSVFormatError(f"unexpected columns {unknown or header}", rows[0][0])
    vals = [_floats(line, r, len(header)) for line, r in rows[1:]]
    if len(vals) < 2:
        raise CSVFormatError("need at least 2 data rows")
    arr = np.array(vals)
    col = {h: arr[:, j] for j, h in enumerate(header)}
    return Trace(
        t=col["t_s"],
        x=col["x_mm"] * 1e-3,
        y=col["y_mm"] * 1e-3 if "y_mm" in col else None,
        psi1_deg=col.get("psi1_deg"),
        psi2_deg=col.get("psi2_deg"),
        period=period,
    )


def _rows(text: str) -> list[tuple[int, list[str]]]:
    rows = [(i + 1, r) for i, r in enumerate(csv.reader(io.StringIO(text))) if r and any(c.strip() for c in r)]
    if not rows:
        raise CSVFormatError("file is empty", 1)
    return rows


def _floats(line: int, row: list[str], n: int) -> list[float]:
    if len(row) != n:
        raise CSVFormatError(f"expected {n} fields, got {len(row)}", line)
    try:
        out = [float(v) for v in row]
    except ValueError as exc:
        raise CSVFormatError(str(exc), line) from None
    if not all(math.isfinite(v) for v in out):
        raise CSVFormatError("non-finite value", line)
    return out


def _air_intervals(trace: Trace, threshold: float) -> list[tuple[float, float, int, int]]:
    """Off-ground intervals as (start, end, first index, last index).

    With a contact channel an interval spans the airborne samples plus one
    sample period. With heights, the edges are the linearly interpolated
    crossings of ``baseline + threshold``.
    """
    t = trace.t
    if trace.contact is not None:
        air = ~trace.contact
        level = None
    elif trace.y is not None:
        base = trace.y_rest if trace.y_rest is not None else float(np.percentile(trace.y, 5))
        level = base + threshold
        air = trace.y > level
    else:
        raise AnalysisError("trace has neither contact flags nor heights")
    out = []
    n = len(t)
    i = 0
    while i < n:
        if not air[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and air[j + 1]:
            j += 1
        if level is None:
            dt = float(np.median(np.diff(t)))
            start, end = t[i] - 0.5 * dt, t[j] + 0.5 * dt
            start, end = max(start, t[0]), min(end, t[-1])
        else:
            y = trace.y
            start = t[i] if i == 0 else t[i - 1] + (level - y[i - 1]) / (y[i] - y[i - 1]) * (t[i] - t[i - 1])
            end = t[j] if j == n - 1 else t[j] + (y[j] - level) / (y[j] - y[j + 1]) * (t[j + 1] - t[j])
        out.append((float(start), float(end), i, j))
        i = j + 1
    return out


@dataclass(frozen=True)
class GaitMetrics:
    mean_speed: float
    speed_bl: float | None = None
    stride_length: float | None = None
    air_time_fraction: float | None = None
    peak_tip_angular_velocity: float | None = None
    missing: dict[str, str] = field(default_factory=dict)

    def as_dict(self) -> dict:
        d = {
            "speed_mm_s": self.mean_speed,
            "speed_bl_s": self.speed_bl,
            "stride_length_mm": self.stride_length,
            "air_frac": self.air_time_fraction,
            "peak_tip_angular_velocity_deg_s": self.peak_tip_angular_velocity,
        }
        if self.missing:
            d["missing"] = dict(self.missing)
        return d


def gait_metrics(trace, body_length: float | None = None, period: float | None = None,
                 air_threshold: float = 1e-3) -> GaitMetrics:
    """Speed (mm/s), BL/s, stride length (mm), air fraction and peak tip rate (deg/s).

    ``trace`` may be a :class:`Trace` or a simulator trajectory. Metrics whose
    channels are absent are left as None with a reason in ``missing``.
    """
    if not isinstance(trace, Trace):
        trace = Trace.from_trajectory(trace)
    t, x = trace.t, trace.x
    duration = float(t[-1] - t[0])
    speed = (float(x[-1]) - float(x[0])) / duration
    missing: dict[str, str] = {}

    speed_bl = None
    if body_length is None:
        missing["speed_bl_s"] = "body length not given"
    else:
        if not body_length > 0:
            raise AnalysisError("body length must be positive")
        speed_bl = speed / body_length

    period = period if period is not None else trace.period
    stride = None
    if period is None:
        missing["stride_length_mm"] = "actuation period unknown"
    elif duration < period:
        missing["stride_length_mm"] = "trace shorter than one actuation period"
    else:
        edges = t[0] + period * np.arange(int(math.floor(duration / period + 1e-9)) + 1)
        stride = float(np.mean(np.diff(np.interp(edges, t, x)))) * 1e3

    air = None
    if trace.contact is None and trace.y is None:
        missing["air_frac"] = "no contact or height channel"
    else:
        total = sum(e - s for s, e, _, _ in _air_intervals(trace, air_threshold))
        air = min(1.0, max(0.0, total / duration))

    peak = None
    chans = [c for c in (trace.psi1_deg, trace.psi2_deg) if c is not None]
    if not chans:
        missing["peak_tip_angular_velocity_deg_s"] = "no tip angle channels"
    elif len(t) < 3:
        missing["peak_tip_angular_velocity_deg_s"] = "need 3 samples for central differences"
    else:
        peak = max(float(np.max(np.abs(np.gradient(c, t)))) for c in chans)

    return GaitMetrics(
        mean_speed=speed * 1e3,
        speed_bl=speed_bl,
        stride_length=stride,
        air_time_fraction=air,
        peak_tip_angular_velocity=peak,
        missing=missing,
    )


@dataclass(frozen=True)
class JumpMetrics:
    air_time: float
    apex_height: float

    def as_dict(self) -> dict:
        return {"jump_air_time_ms": self.air_time * 1e3, "jump_apex_mm": self.apex_height}


def jump_metrics(trace, threshold: float = 0.0) -> JumpMetrics:
    """Longest off-ground interval (s) and its apex height above the baseline (mm).

    ``threshold`` (m) is the height above baseline that counts as off the
    ground when no contact flags are available.
    """
    if not isinstance(trace, Trace):
        trace = Trace.from_trajectory(trace)
    if trace.y is None:
        raise AnalysisError("jump metrics need a height channel")
    intervals = _air_intervals(trace, threshold)
    if not intervals:
        return JumpMetrics(0.0, 0.0)
    start, end, i, j = max(intervals, key=lambda iv: (iv[1] - iv[0], -iv[0]))
    base = trace.y_rest if trace.y_rest is not None else float(np.percentile(trace.y, 5))
    apex = float(np.max(trace.y[i : j + 1])) - base
    return JumpMetrics(air_time=end - start, apex_height=apex * 1e3)


def linear_fit_r2(x, y) -> tuple[float, float, float]:
    """Ordinary least squares ``y = a x + b``; returns (a, b, R^2)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 2 or len(x) != len(y):
        raise AnalysisError("need at least 2 paired points")
    a, b = np.polyfit(x, y, 1)
    ss_res = float(np.sum((y - (a * x + b)) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(a), float(b), r2
