"""Per-step diagnostics, runtime invariant monitors, run classification and
blow-up time estimation."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import optimize

from .errors import FitError
from .flux import FluxState, gradients_flux, momentum_total
from .initial_data import (HypothesisReport, Scenario, Theorem, compact_support_radius,
                           trapezoid)
from .riemann import RiemannState
from .wavespeed import speed_primitive

LP_ORDERS = (1, 2, 4)
SUPPORT_TOL = 1e-12


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    min_u: float
    min_c: float
    max_abs_R1: float
    max_abs_R2: float
    linf_ut_ux: float
    lp: dict
    momentum: float
    support_radius: float
    max_R: float = 0.0      # signed max over R1 and R2
    min_R: float = 0.0
    argmin_x: float = 0.0
    solver: str = "riemann"

    @property
    def r_sup(self) -> float:
        """max(|R1|, |R2|), +inf once anything is non-finite."""
        v = max(self.max_abs_R1, self.max_abs_R2)
        return v if math.isfinite(v) else math.inf

    CSV_HEADER = ("t", "min_u", "min_c", "max_abs_R1", "max_abs_R2", "linf_ut_ux",
                  "lp1", "lp2", "lp4", "momentum", "support_radius")

    def csv_row(self) -> list[float]:
        return [self.t, self.min_u, self.min_c, self.max_abs_R1, self.max_abs_R2,
                self.linf_ut_ux, self.lp[1], self.lp[2], self.lp[4], self.momentum,
                self.support_radius]


def _nanmax_abs(a: np.ndarray) -> float:
    if not np.all(np.isfinite(a)):
        return math.inf
    return float(np.max(np.abs(a)))


def _record_fields(t, grid, model, u, R1, R2, ut, ux, momentum, solver):
    c = model.speed_or_zero(u)
    with np.errstate(invalid="ignore", over="ignore"):
        lp = {p: trapezoid(np.abs(R1) ** p + np.abs(R2) ** p, grid) for p in LP_ORDERS}
    finite_u = np.all(np.isfinite(u))
    i = int(np.nanargmin(u)) if finite_u else 0
    return DiagnosticsRecord(
        t=float(t),
        min_u=float(u[i]) if finite_u else -math.inf,
        min_c=float(np.min(c)) if np.all(np.isfinite(c)) else 0.0,
        max_abs_R1=_nanmax_abs(R1),
        max_abs_R2=_nanmax_abs(R2),
        linf_ut_ux=_nanmax_abs(ut) + _nanmax_abs(ux),
        lp=lp,
        momentum=float(momentum),
        support_radius=compact_support_radius(u, grid, SUPPORT_TOL) if finite_u else grid.extent,
        max_R=float(max(np.max(R1), np.max(R2))),
        min_R=float(min(np.min(R1), np.min(R2))),
        argmin_x=float(grid.x[i]),
        solver=solver,
    )


def record(state: RiemannState | FluxState) -> DiagnosticsRecord:
    """Diagnostics of a live or just-sealed state from either solver."""
    if isinstance(state, RiemannState):
        c = state.model.speed_or_zero(state.u)
        ut = 0.5 * (state.R1 + state.R2)
        with np.errstate(divide="ignore", invalid="ignore"):
            ux = np.where(c > 0, (state.R1 - state.R2) / np.where(c > 0, 2.0 * c, 1.0), np.inf)
        ux = np.where(state.R1 == state.R2, 0.0, ux)
        return _record_fields(state.t, state.grid, state.model, state.u, state.R1, state.R2,
                              ut, ux, trapezoid(ut, state.grid), "riemann")
    if isinstance(state, FluxState):
        ut, ux = gradients_flux(state)
        c = state.model.speed_or_zero(state.u_curr)
        return _record_fields(state.t, state.grid, state.model, state.u_curr,
                              ut + c * ux, ut - c * ux, ut, ux, momentum_total(state), "flux")
    raise TypeError(f"cannot record {type(state).__name__}")


# ---------------------------------------------------------------------------
# Non-degeneracy floor

def theta1_floor(s: Scenario, tol: float = 1e-10) -> float | None:
    """theta1 with int_{theta1}^0 c = -int u1, the lower bound on u for all time.

    None when -int u1 reaches the budget int_{theta0}^0 c (or is negative).
    """
    mass = -trapezoid(s.u1, s.grid)
    return theta1_from_mass(s.model, mass, tol)


def theta1_from_mass(model, mass: float, tol: float = 1e-10) -> float | None:
    if mass < 0:
        return None
    if mass == 0:
        return 0.0
    budget = speed_primitive(model, model.theta0, 0.0)
    if not mass < budget:
        return None

    def residual(th):
        return speed_primitive(model, th, 0.0) - mass

    if model.finite_theta0:
        lo = model.theta0
    else:
        lo = -1.0
        while residual(lo) < 0:
            lo *= 2.0
    # residual is decreasing in theta: positive at lo, -mass < 0 at 0
    return float(optimize.brentq(residual, lo, 0.0, xtol=tol, rtol=4 * np.finfo(float).eps))


# ---------------------------------------------------------------------------
# Invariant monitors

@dataclass(frozen=True)
class Violation:
    monitor: str
    t: float
    magnitude: float


@dataclass(frozen=True)
class MonitorTolerances:
    sign: float = 1e-8
    lp_rate: float = 1e-6
    linf: float = 1e-3
    theta1: float = 1e-3
    momentum: float = 1e-10
    support_cells: float = 2.0


def _reports(hypotheses) -> dict:
    if isinstance(hypotheses, HypothesisReport):
        return {hypotheses.theorem: hypotheses}
    return {Theorem(k): v for k, v in dict(hypotheses).items()}


def _holds(reports: dict, *conditions: str) -> bool:
    found = {}
    for rep in reports.values():
        for r in rep.results:
            found.setdefault(r.condition, r.satisfied)
    return all(found.get(c, False) for c in conditions)


def applicable_monitors(hypotheses, solver: str = "riemann") -> list[str]:
    reports = _reports(hypotheses)
    out = []
    if solver == "riemann":
        if _holds(reports, "INICON2") or _holds(reports, "INICON8"):
            out.append("SIGN_PRESERVATION")
        if _holds(reports, "CON2", "INICON1", "INICON2"):
            out += ["LP_MONOTONE", "LINF_BOUND"]
    if Theorem.THM1 in reports and reports[Theorem.THM1].satisfied:
        out.append("THETA1_FLOOR")
    # upwind tails outrun the cone by a few cells at the 1e-12 level; only the
    # three-point leapfrog stencil has a sharp numerical domain of dependence
    if solver == "flux" and Theorem.THM2 in reports and reports[Theorem.THM2].satisfied:
        out.append("SUPPORT")
    out.append("MOMENTUM")
    return out


def check_lemma_monitors(history: Sequence[DiagnosticsRecord], hypotheses, *,
                         theta1: float | None = None, support_K: float | None = None,
                         c_max: float | None = None, dx: float | None = None,
                         half_width: float | None = None,
                         tol: MonitorTolerances = MonitorTolerances()) -> list[Violation]:
    """Evaluate every monitor whose hypotheses hold; return the violations.

    Momentum is only checked while the support stays at least two cells
    inside ``half_width`` (outflow through the edges is not a scheme error).
    """
    if not history:
        return []
    solver = history[0].solver
    active = applicable_monitors(hypotheses, solver)
    first = history[0]
    scale = max(first.max_abs_R1, first.max_abs_R2)
    out: list[Violation] = []

    if "SIGN_PRESERVATION" in active:
        reports = _reports(hypotheses)
        nonpositive = _holds(reports, "INICON2")
        for rec in history:
            excursion = rec.max_R if nonpositive else -rec.min_R
            if excursion > tol.sign * scale:
                out.append(Violation("SIGN_PRESERVATION", rec.t, excursion))

    if "LP_MONOTONE" in active:
        for p in LP_ORDERS:
            rate = tol.lp_rate * scale ** p
            for a, b in zip(history[:-1], history[1:]):
                excess = (b.lp[p] - a.lp[p]) - rate * (b.t - a.t)
                if excess > 0 or not math.isfinite(b.lp[p]):
                    out.append(Violation(f"LP_MONOTONE_p{p}", b.t, excess))

    if "LINF_BOUND" in active:
        bound = 2.0 * (first.max_abs_R1 + first.max_abs_R2) * (1.0 + tol.linf)
        for rec in history:
            total = rec.max_abs_R1 + rec.max_abs_R2
            if not total <= bound:
                out.append(Violation("LINF_BOUND", rec.t, total - bound))

    if "THETA1_FLOOR" in active and theta1 is not None:
        for rec in history:
            if rec.min_u < theta1 - tol.theta1:
                out.append(Violation("THETA1_FLOOR", rec.t, theta1 - rec.min_u))

    if "SUPPORT" in active and None not in (support_K, c_max, dx):
        for rec in history:
            bound = support_K + c_max * rec.t + tol.support_cells * dx
            if rec.support_radius > bound:
                out.append(Violation("SUPPORT", rec.t, rec.support_radius - bound))

    if "MOMENTUM" in active:
        m0 = first.momentum
        allowed = tol.momentum * (1.0 + abs(m0))
        for rec in history:
            if half_width is not None and dx is not None and \
                    rec.support_radius >= half_width - tol.support_cells * dx:
                break
            drift = abs(rec.momentum - m0)
            if not drift <= allowed:
                out.append(Violation("MOMENTUM", rec.t, drift))
    return out


# ---------------------------------------------------------------------------
# Classification

class Outcome(str, Enum):
    GLOBAL_WINDOW = "GLOBAL_WINDOW"
    DEGENERATE = "DEGENERATE"
    GRADIENT_BLOWUP = "GRADIENT_BLOWUP"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class RunClassification:
    outcome: Outcome
    eps_deg: float
    m_blow: float
    t_end: float | None = None
    t_stop: float | None = None
    x_min_location: float | None = None
    t_estimate: float | None = None
    reason: str = ""

    def to_dict(self) -> dict:
        d = asdict(self)
        d["outcome"] = self.outcome.value
        return d


def detect_stop(history: Sequence[DiagnosticsRecord], *, eps_deg: float, m_blow: float,
                t_end: float, violations: Iterable[Violation] = (),
                failure: str | None = None, t_estimate: float | None = None) -> RunClassification:
    """Decide which horn of the blow-up alternative the run shows.

    The first record where min_c < eps_deg marks degeneracy, the first where
    max |R| > m_blow marks gradient blow-up.  Both in the same record, or a
    blow-up with min_c < 2 eps_deg, is INCONCLUSIVE.
    """
    base = dict(eps_deg=eps_deg, m_blow=m_blow)
    if not history:
        return RunClassification(Outcome.INCONCLUSIVE, reason="no records", **base)
    deg_idx = next((i for i, r in enumerate(history) if r.min_c < eps_deg), None)
    blow_idx = next((i for i, r in enumerate(history) if r.r_sup > m_blow), None)

    if deg_idx is not None and blow_idx is not None and deg_idx == blow_idx:
        r = history[deg_idx]
        return RunClassification(Outcome.INCONCLUSIVE, t_stop=r.t,
                                 reason="degeneracy and blow-up thresholds tripped together", **base)
    if deg_idx is not None and (blow_idx is None or deg_idx < blow_idx):
        r = history[deg_idx]
        return RunClassification(Outcome.DEGENERATE, t_stop=r.t, x_min_location=r.argmin_x, **base)
    if blow_idx is not None:
        r = history[blow_idx]
        if r.min_c >= 2.0 * eps_deg:
            return RunClassification(Outcome.GRADIENT_BLOWUP, t_stop=r.t, t_estimate=t_estimate, **base)
        return RunClassification(Outcome.INCONCLUSIVE, t_stop=r.t,
                                 reason=f"blow-up with min_c={r.min_c:.3e} below 2*eps_deg", **base)
    if failure:
        return RunClassification(Outcome.INCONCLUSIVE, t_stop=history[-1].t, reason=failure, **base)
    last = history[-1]
    if last.t < t_end * (1.0 - 1e-12):
        return RunClassification(Outcome.INCONCLUSIVE, t_stop=last.t,
                                 reason="run ended before the horizon without a stop event", **base)
    violations = list(violations)
    if violations:
        names = sorted({v.monitor for v in violations})
        return RunClassification(Outcome.INCONCLUSIVE, t_end=t_end,
                                 reason="monitor violations: " + ", ".join(names), **base)
    return RunClassification(Outcome.GLOBAL_WINDOW, t_end=t_end, **base)


# ---------------------------------------------------------------------------
# Blow-up time from the Riccati law

@dataclass(frozen=True)
class RiccatiFit:
    t_a: float
    t_b: float
    slope: float
    intercept: float
    t_estimate: float
    fit_quality: float

    def to_dict(self) -> dict:
        return asdict(self)


def riccati_estimate(history: Sequence[DiagnosticsRecord] | Sequence[tuple[float, float]],
                     window_fraction: float = 0.3, min_records: int = 8) -> RiccatiFit:
    """Fit 1/max|R| affinely in t over the last ``window_fraction`` of records.

    dR/dt = C R^2 makes 1/R affine in t, vanishing at the blow-up time; the
    root of the fitted line is the estimate.  ``history`` may also be a list
    of (t, R) pairs.
    """
    if not 0 < window_fraction <= 1:
        raise FitError(f"window_fraction must lie in (0, 1], got {window_fraction}")
    pairs = [(r.t, r.r_sup) if isinstance(r, DiagnosticsRecord) else (float(r[0]), float(r[1]))
             for r in history]
    if len(pairs) < min_records:
        raise FitError(f"need at least {min_records} records, got {len(pairs)}")
    count = max(min_records, int(math.ceil(window_fraction * len(pairs))))
    window = pairs[-count:]
    t = np.array([p[0] for p in window])
    R = np.array([p[1] for p in window])
    if not np.all(np.isfinite(R)) or np.any(R <= 0):
        raise FitError("non-finite or non-positive amplitudes in the fit window")
    if np.any(np.diff(R) <= 0) or np.any(np.diff(t) <= 0):
        raise FitError("amplitude is not monotonically growing over the fit window")
    y = 1.0 / R
    slope, intercept = np.polyfit(t, y, 1)
    resid = y - (slope * t + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    quality = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 0.0
    if slope >= 0:
        raise FitError("1/R is not decreasing; no finite-time blow-up in the window")
    return RiccatiFit(float(t[0]), float(t[-1]), float(slope), float(intercept),
                      float(-intercept / slope), quality)
