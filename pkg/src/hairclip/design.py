"""Design-space sweeps and budget-constrained optimization over (l, D)."""

from __future__ import annotations

import csv
import enum
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from hairclip import mechanics as mech
from hairclip.mechanics import Convention, Material, RibbonGeometry

CSV_HEADER = ("l_mm", "D_mm", "psi_l_rad", "U_barr_mJ", "P_cr_N", "t_star_ms")


class InfeasibleError(ValueError):
    """No grid point satisfies the energy budget."""


def _axis(lo: float, hi: float, step: float) -> np.ndarray:
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(n)


@dataclass(frozen=True)
class DesignGrid:
    """Rectangular (l, D) grid; ranges are (min, max, step) in metres.

    A zero-width range (min == max) is a single node.
    """

    l_range: tuple[float, float, float] = (80e-3, 200e-3, 5e-3)
    D_range: tuple[float, float, float] = (5e-3, 30e-3, 1e-3)
    material: Material = mech.PETG
    h: float = mech.REF_H
    t: float = mech.REF_T
    convention: Convention = Convention.PAPER_LITERAL

    def __post_init__(self) -> None:
        for name, (lo, hi, step) in (("l_range", self.l_range), ("D_range", self.D_range)):
            if not (lo > 0 and hi >= lo and step > 0):
                raise mech.ValidationError(f"{name} must satisfy 0 < min <= max and step > 0, got {(lo, hi, step)}")

    @property
    def l_values(self) -> np.ndarray:
        return _axis(*self.l_range)

    @property
    def D_values(self) -> np.ndarray:
        return _axis(*self.D_range)

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.l_values), len(self.D_values)

    def nodes(self) -> list[tuple[float, float]]:
        """Row-major: l is the slow index, D the fast one."""
        return [(float(l), float(d)) for l in self.l_values for d in self.D_values]


@dataclass(frozen=True)
class DesignPoint:
    l: float
    D: float
    psi_l: float = math.nan
    U_barr: float = math.nan
    P_cr: float = math.nan
    t_star: float = math.nan
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


def evaluate(l: float, D: float, material: Material, h: float, t: float, convention: Convention) -> DesignPoint:
    try:
        geo = RibbonGeometry(l=l, D=D, h=h, t=t)
        sol = mech.solve_buckling(material, geo, convention)
        return DesignPoint(
            l=l,
            D=D,
            psi_l=sol.psi_l,
            U_barr=mech.energy_barrier(sol.P_cr, D),
            P_cr=sol.P_cr,
            t_star=mech.snap_timescale(geo, material),
        )
    except (mech.ValidationError, mech.QuadratureError) as exc:
        return DesignPoint(l=l, D=D, error=f"{type(exc).__name__}: {exc}")


def _evaluate_node(args) -> DesignPoint:
    return evaluate(*args)


def sweep(grid: DesignGrid, workers: int = 1) -> list[DesignPoint]:
    """Evaluate every grid node; failures come back as points with ``error`` set."""
    jobs = [(l, d, grid.material, grid.h, grid.t, grid.convention) for l, d in grid.nodes()]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_evaluate_node, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    return [_evaluate_node(j) for j in jobs]


class Target(str, enum.Enum):
    TIP_ANGLE = "tip-angle"
    BARRIER = "barrier"
    WEIGHTED = "weighted"


@dataclass(frozen=True)
class DesignObjective:
    """What to maximize, subject to ``U_barr <= budget``.

    ``WEIGHTED`` maximizes ``w_psi * psi/psi_ref + w_U * U/U_ref`` where the
    reference scales are the largest feasible values on the coarse grid, so
    the weights are dimensionless.
    """

    target: Target = Target.TIP_ANGLE
    budget: float = math.inf
    w_psi: float = 1.0
    w_U: float = 0.0
    l_bounds: tuple[float, float] | None = None
    D_bounds: tuple[float, float] | None = None
    levels: int = 4
    _scales: tuple[float, float] = field(default=(1.0, 1.0), repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "target", Target(self.target))
        if not self.budget > 0:
            raise mech.ValidationError(f"budget must be positive, got {self.budget}")
        if self.target is Target.WEIGHTED:
            if self.w_psi < 0 or self.w_U < 0 or (self.w_psi == 0 and self.w_U == 0):
                raise mech.ValidationError("weights must be non-negative and not both zero")
        if self.levels < 3:
            raise mech.ValidationError("refinement needs at least 3 levels")

    def value(self, p: DesignPoint) -> float:
        if self.target is Target.TIP_ANGLE:
            return p.psi_l
        if self.target is Target.BARRIER:
            return p.U_barr
        return self.w_psi * p.psi_l / self._scales[0] + self.w_U * p.U_barr / self._scales[1]

    def feasible(self, p: DesignPoint) -> bool:
        if not p.ok or p.U_barr > self.budget:
            return False
        if self.l_bounds and not (self.l_bounds[0] <= p.l <= self.l_bounds[1]):
            return False
        if self.D_bounds and not (self.D_bounds[0] <= p.D <= self.D_bounds[1]):
            return False
        return True


@dataclass(frozen=True)
class OptimizationResult:
    best: DesignPoint
    objective_value: float
    coarse_best: DesignPoint
    boxes: tuple[tuple[float, float, float, float], ...]
    evaluations: int
    budget_active: bool


def _better(obj: DesignObjective, a: DesignPoint, b: DesignPoint | None) -> bool:
    if b is None:
        return True
    va, vb = obj.value(a), obj.value(b)
    if va != vb:
        return va > vb
    return (a.l, a.D) < (b.l, b.D)


def _pick(obj: DesignObjective, points: list[DesignPoint]) -> DesignPoint | None:
    best = None
    for p in points:
        if obj.feasible(p) and _better(obj, p, best):
            best = p
    return best


def optimize(obj: DesignObjective, grid: DesignGrid, workers: int = 1) -> OptimizationResult:
    """Coarse grid scan, then repeated local refinement around the incumbent.

    Each refinement level halves the step and searches the box spanned by
    +-1 previous step around the incumbent, so the box width halves per level.
    The incumbent is always a candidate, so refinement never loses ground.
    """
    coarse = sweep(grid, workers=workers)
    feasible = [p for p in coarse if obj.feasible(p)]
    if not feasible:
        raise InfeasibleError(
            f"no grid point satisfies U_barr <= {obj.budget:.6g} J "
            f"(smallest grid barrier {min((p.U_barr for p in coarse if p.ok), default=math.nan):.6g} J)"
        )
    if obj.target is Target.WEIGHTED:
        scales = (max(p.psi_l for p in feasible), max(p.U_barr for p in feasible))
        obj = replace(obj, _scales=scales)
    best = _pick(obj, feasible)
    coarse_best = best
    unconstrained = _pick(replace(obj, budget=math.inf), coarse)
    budget_active = unconstrained is not None and unconstrained.U_barr > obj.budget
    l_lo, l_hi, dl = grid.l_range
    d_lo, d_hi, dd = grid.D_range
    if obj.l_bounds:
        l_lo, l_hi = max(l_lo, obj.l_bounds[0]), min(l_hi, obj.l_bounds[1])
    if obj.D_bounds:
        d_lo, d_hi = max(d_lo, obj.D_bounds[0]), min(d_hi, obj.D_bounds[1])
    boxes = []
    evaluations = len(coarse)
    seen = {(p.l, p.D): p for p in coarse}
    for _ in range(obj.levels):
        box = (
            max(l_lo, best.l - dl),
            min(l_hi, best.l + dl),
            max(d_lo, best.D - dd),
            min(d_hi, best.D + dd),
        )
        boxes.append(box)
        dl, dd = dl / 2.0, dd / 2.0
        ls = best.l + dl * np.arange(-2, 3)
        ds = best.D + dd * np.arange(-2, 3)
        candidates = [best]
        for l in ls:
            if not box[0] - 1e-15 <= l <= box[1] + 1e-15:
                continue
            for d in ds:
                if not box[2] - 1e-15 <= d <= box[3] + 1e-15:
                    continue
                key = (float(l), float(d))
                if key not in seen:
                    seen[key] = evaluate(key[0], key[1], grid.material, grid.h, grid.t, grid.convention)
                    evaluations += 1
                candidates.append(seen[key])
        best = _pick(obj, candidates)
    return OptimizationResult(
        best=best,
        objective_value=obj.value(best),
        coarse_best=coarse_best,
        boxes=tuple(boxes),
        evaluations=evaluations,
        budget_active=budget_active,
    )


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def write_csv(points: list[DesignPoint], stream: io.TextIOBase | None = None) -> str:
    """Sweep CSV in physical units, one row per valid node; invalid nodes are skipped."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for p in points:
        if not p.ok:
            continue
        w.writerow(
            [_fmt(p.l * 1e3), _fmt(p.D * 1e3), _fmt(p.psi_l), _fmt(p.U_barr * 1e3), _fmt(p.P_cr), _fmt(p.t_star * 1e3)]
        )
    text = buf.getvalue()
    if stream is not None:
        stream.write(text)
    return text


def read_csv(text: str) -> list[DesignPoint]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != CSV_HEADER:
        raise ValueError(f"expected header {','.join(CSV_HEADER)}")
    out = []
    for r in rows[1:]:
        l, d, psi, u, p, ts = map(float, r)
        out.append(DesignPoint(l=l * 1e-3, D=d * 1e-3, psi_l=psi, U_barr=u * 1e-3, P_cr=p, t_star=ts * 1e-3))
    return out
