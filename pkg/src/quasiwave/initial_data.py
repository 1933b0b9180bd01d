"""Grids, initial profiles, and the hypothesis checks for the three regimes.

Fields are plain float64 arrays sampled at the nodes of a :class:`Grid`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Any

import numpy as np
from scipy import integrate

from . import expr as ex
from .errors import DegeneracyError, DomainError
from .wavespeed import WaveSpeedModel, probe_points, speed_primitive


@dataclass(frozen=True)
class Grid:
    """Uniform nodes x_i = x_min + i*dx, i = 0..n-1."""

    x_min: float
    dx: float
    n: int

    def __post_init__(self):
        if self.n < 16:
            raise DomainError(f"grid needs at least 16 nodes, got {self.n}")
        if not self.dx > 0:
            raise DomainError(f"dx must be positive, got {self.dx}")

    @classmethod
    def symmetric(cls, half_width: float, n: int) -> "Grid":
        """Cell-centred grid on [-half_width, half_width] with n cells."""
        dx = 2.0 * half_width / n
        return cls(-half_width + 0.5 * dx, dx, n)

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n)

    @property
    def x_max(self) -> float:
        return self.x_min + self.dx * (self.n - 1)

    @property
    def extent(self) -> float:
        """Largest |x| over the nodes."""
        return max(abs(self.x_min), abs(self.x_max))


def trapezoid(values: np.ndarray, grid: Grid) -> float:
    return float(np.trapezoid(values, dx=grid.dx))


def central_difference(f: np.ndarray, dx: float) -> np.ndarray:
    """4th-order central first derivative; 2nd order in the two edge layers."""
    d = np.empty_like(f, dtype=float)
    d[2:-2] = (f[:-4] - 8.0 * f[1:-3] + 8.0 * f[3:-1] - f[4:]) / (12.0 * dx)
    d[1] = (f[2] - f[0]) / (2.0 * dx)
    d[-2] = (f[-1] - f[-3]) / (2.0 * dx)
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dx)
    d[-1] = (3.0 * f[-1] - 4.0 * f[-2] + f[-3]) / (2.0 * dx)
    return d


# ---------------------------------------------------------------------------
# Profiles

def _bump_unit(s: np.ndarray) -> np.ndarray:
    out = np.zeros_like(s)
    m = np.abs(s) < 1.0
    out[m] = np.exp(-1.0 / (1.0 - s[m] ** 2))
    return out


def _bump_unit_deriv(s: np.ndarray) -> np.ndarray:
    out = np.zeros_like(s)
    m = np.abs(s) < 1.0
    sm = s[m]
    out[m] = np.exp(-1.0 / (1.0 - sm ** 2)) * (-2.0 * sm / (1.0 - sm ** 2) ** 2)
    return out


@lru_cache(maxsize=None)
def bump_unit_integral() -> float:
    """Integral of exp(-1/(1-s^2)) over (-1, 1), about 0.443993818."""
    val, _ = integrate.quad(lambda s: math.exp(-1.0 / (1.0 - s * s)), -1.0, 1.0,
                            epsabs=1e-15, epsrel=1e-13)
    return val


class Profile:
    """Base class; subclasses implement ``values`` and optionally ``derivative``."""

    def values(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def derivative(self, x: np.ndarray) -> np.ndarray:
        raise DomainError(f"{type(self).__name__} has no analytic derivative")

    def support_radius(self) -> float | None:
        """Declared K with support inside [-K, K], if known."""
        return None

    def describe(self) -> dict[str, Any]:
        raise NotImplementedError


@dataclass(frozen=True)
class Zero(Profile):
    def values(self, x):
        return np.zeros_like(x, dtype=float)

    def derivative(self, x):
        return np.zeros_like(x, dtype=float)

    def support_radius(self):
        return 0.0

    def describe(self):
        return {"kind": "zero"}


@dataclass(frozen=True)
class Bump(Profile):
    """A * exp(-1/(1 - ((x-center)/K)^2)) inside |x-center| < K, exactly 0 outside."""

    amplitude: float
    radius: float
    center: float = 0.0

    def __post_init__(self):
        if not self.radius > 0:
            raise DomainError(f"bump radius must be positive, got {self.radius}")

    @classmethod
    def with_integral(cls, integral: float, radius: float, center: float = 0.0) -> "Bump":
        return cls(integral / (radius * bump_unit_integral()), radius, center)

    def values(self, x):
        return self.amplitude * _bump_unit((np.asarray(x, dtype=float) - self.center) / self.radius)

    def derivative(self, x):
        s = (np.asarray(x, dtype=float) - self.center) / self.radius
        return self.amplitude * _bump_unit_deriv(s) / self.radius

    def integral(self) -> float:
        return self.amplitude * self.radius * bump_unit_integral()

    def support_radius(self):
        return abs(self.center) + self.radius

    def describe(self):
        return {"kind": "bump", "amplitude": self.amplitude, "radius": self.radius,
                "center": self.center}


@dataclass(frozen=True)
class TruncatedGaussian(Profile):
    amplitude: float
    sigma: float
    cutoff: float
    center: float = 0.0

    def __post_init__(self):
        if not (self.sigma > 0 and self.cutoff > 0):
            raise DomainError("truncated gaussian needs sigma > 0 and cutoff > 0")

    def values(self, x):
        s = np.asarray(x, dtype=float) - self.center
        return np.where(np.abs(s) < self.cutoff,
                        self.amplitude * np.exp(-0.5 * (s / self.sigma) ** 2), 0.0)

    def derivative(self, x):
        s = np.asarray(x, dtype=float) - self.center
        return np.where(np.abs(s) < self.cutoff, -s / self.sigma ** 2 * self.values(x), 0.0)

    def support_radius(self):
        return abs(self.center) + self.cutoff

    def describe(self):
        return {"kind": "gaussian", "amplitude": self.amplitude, "sigma": self.sigma,
                "cutoff": self.cutoff, "center": self.center}


@dataclass(frozen=True)
class ScaledDerivative(Profile):
    """scale * d/dx of another profile (used for travelling-wave data u1 = -phi')."""

    of: Profile
    scale: float = 1.0

    def values(self, x):
        return self.scale * self.of.derivative(x)

    def support_radius(self):
        return self.of.support_radius()

    def describe(self):
        return {"kind": "derivative", "scale": self.scale, "of": self.of.describe()}


@dataclass(frozen=True)
class Custom(Profile):
    """Expression in ``x`` with the same grammar as speed expressions."""

    text: str
    ast: ex.Node = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "ast", ex.parse_expr(self.text, "x"))

    def values(self, x):
        return np.asarray(ex.evaluate(self.ast, np.asarray(x, dtype=float)), dtype=float) + 0.0 * x

    def derivative(self, x):
        return np.asarray(ex.evaluate(ex.derive(self.ast), np.asarray(x, dtype=float)), dtype=float) + 0.0 * x

    def describe(self):
        return {"kind": "expr", "text": self.text}


def sample_profile(p: Profile, g: Grid) -> np.ndarray:
    values = np.asarray(p.values(g.x), dtype=float)
    if not np.all(np.isfinite(values)):
        raise DomainError(f"profile {p.describe()} is not finite on the grid")
    return values


# ---------------------------------------------------------------------------
# Scenario

@dataclass(frozen=True, eq=False)
class Scenario:
    grid: Grid
    u0: np.ndarray
    u1: np.ndarray
    model: WaveSpeedModel
    support_radius_K: float
    labels: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("u0", "u1"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (self.grid.n,):
                raise DomainError(f"{name} has shape {arr.shape}, grid has {self.grid.n} nodes")
            if not np.all(np.isfinite(arr)):
                raise DomainError(f"{name} has non-finite values")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.model.is_degenerate(self.u0):
            raise DegeneracyError(f"min u0 = {self.u0.min()} is not above theta0 = {self.model.theta0}")

    @classmethod
    def from_profiles(cls, grid: Grid, u0: Profile, u1: Profile, model: WaveSpeedModel,
                      K: float | None = None, labels: dict | None = None) -> "Scenario":
        f0, f1 = sample_profile(u0, grid), sample_profile(u1, grid)
        if K is None:
            declared = [p.support_radius() for p in (u0, u1)]
            if all(d is not None for d in declared):
                K = max(declared)
            else:
                K = max(compact_support_radius(f0, grid, 0.0), compact_support_radius(f1, grid, 0.0))
        return cls(grid, f0, f1, model, float(K), dict(labels or {}))

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    def du0(self) -> np.ndarray:
        return central_difference(self.u0, self.grid.dx)

    def c_max(self) -> float:
        """Speed bound used for finite propagation: c(max(u0, 0))."""
        return float(self.model.speed(max(float(self.u0.max()), 0.0)))


def riemann_initial(s: Scenario) -> tuple[np.ndarray, np.ndarray]:
    """R1 = u1 + c(u0) u0', R2 = u1 - c(u0) u0'."""
    cdu = s.model.speed(s.u0) * s.du0()
    return s.u1 + cdu, s.u1 - cdu


def compact_support_radius(f: np.ndarray, grid: Grid, tol: float = 0.0) -> float:
    """Smallest K with |f| <= tol at every node outside [-K, K]."""
    idx = np.nonzero(np.abs(f) > tol)[0]
    if idx.size == 0:
        return 0.0
    x = grid.x
    return float(max(abs(x[idx[0]]), abs(x[idx[-1]])))


# ---------------------------------------------------------------------------
# Hypotheses

class Theorem(str, Enum):
    """Hypothesis sets: THM1 global existence, THM2 degeneracy in finite
    time, THM3 gradient blow-up."""

    THM1 = "THM1"
    THM2 = "THM2"
    THM3 = "THM3"


CONDITIONS = {
    "INICON1": "u0 > theta0",
    "INICON2": "u1 +- c(u0) u0' <= 0",
    "INICON3": "-int u1 < int_{theta0}^0 c",
    "INICON4": "supp u0, supp u1 in [-K, K]",
    "INICON5": "-int u1 > -2 theta0 c(0)",
    "INICON6": "c' > 0 on (theta0, inf)",
    "INICON7": "supp u0, supp u1 in [-K, K]",
    "INICON8": "u1 +- c(u0) u0' >= 0",
    "CON2": "c' >= 0",
    "CON4": "c > 0 on (theta0, inf)",
    "NONTRIVIAL": "(u0, u1) != 0",
}

_BY_THEOREM = {
    Theorem.THM1: ("INICON1", "INICON2", "INICON3", "CON2", "CON4"),
    Theorem.THM2: ("INICON1", "INICON2", "INICON4", "INICON5", "CON2", "CON4"),
    Theorem.THM3: ("INICON1", "INICON6", "INICON7", "INICON8", "NONTRIVIAL", "CON4"),
}


@dataclass(frozen=True)
class ConditionResult:
    condition: str
    satisfied: bool
    margin: float
    location: float | None = None


@dataclass(frozen=True)
class HypothesisReport:
    theorem: Theorem
    results: tuple[ConditionResult, ...]
    tol: float
    notes: tuple[str, ...] = (
        "sign conditions are checked at grid nodes only",
    )

    @property
    def satisfied(self) -> bool:
        return all(r.satisfied for r in self.results)

    def __getitem__(self, condition: str) -> ConditionResult:
        for r in self.results:
            if r.condition == condition:
                return r
        raise KeyError(condition)

    def __contains__(self, condition: str) -> bool:
        return any(r.condition == condition for r in self.results)

    def failed(self) -> list[str]:
        return [r.condition for r in self.results if not r.satisfied]

    def to_dict(self) -> dict:
        return {
            "theorem": self.theorem.value,
            "satisfied": self.satisfied,
            "tol": self.tol,
            "conditions": [
                {"id": r.condition, "satisfied": r.satisfied, "margin": _json_float(r.margin),
                 "location": r.location} for r in self.results
            ],
            "notes": list(self.notes),
        }


def _json_float(v: float):
    if math.isfinite(v):
        return v
    return "inf" if v > 0 else ("-inf" if v < 0 else "nan")


def check_hypotheses(s: Scenario, theorem: Theorem | str, tol_factor: float = 1e-12) -> HypothesisReport:
    theorem = Theorem(theorem)
    x = s.x
    model = s.model
    R1, R2 = riemann_initial(s)
    cdu = 0.5 * (R1 - R2)
    scale = max(1.0, float(np.max(np.abs(s.u1))), float(np.max(np.abs(cdu))))
    tol = tol_factor * scale
    mass = -trapezoid(s.u1, s.grid)
    probe = probe_points(model, hi=float(max(np.max(np.abs(s.u0)), 0.0) + np.max(np.abs(s.u1)) + 1.0))

    def result(cid, margin, location=None, strict=False):
        ok = margin > tol if strict else margin >= -tol
        return ConditionResult(cid, bool(ok), float(margin), location)

    out = []
    for cid in _BY_THEOREM[theorem]:
        if cid == "INICON1":
            i = int(np.argmin(s.u0))
            out.append(result(cid, float(s.u0[i]) - model.theta0, float(x[i])))
        elif cid == "INICON2":
            worst = np.maximum(R1, R2)
            i = int(np.argmax(worst))
            out.append(result(cid, -float(worst[i]), float(x[i])))
        elif cid == "INICON8":
            worst = np.minimum(R1, R2)
            i = int(np.argmin(worst))
            out.append(result(cid, float(worst[i]), float(x[i])))
        elif cid == "INICON3":
            budget = speed_primitive(model, model.theta0, 0.0)
            out.append(result(cid, budget - mass, strict=True))
        elif cid in ("INICON4", "INICON7"):
            radius = max(compact_support_radius(s.u0, s.grid), compact_support_radius(s.u1, s.grid))
            margin = s.support_radius_K - radius
            # Data touching the last node are not compactly supported on this grid.
            if radius >= s.grid.extent - s.grid.dx:
                margin = -math.inf
            out.append(result(cid, margin))
        elif cid == "INICON5":
            if model.finite_theta0:
                out.append(result(cid, mass + 2.0 * model.theta0 * model.c_at_zero, strict=True))
            else:
                out.append(ConditionResult(cid, False, -math.inf))
        elif cid == "INICON6":
            dc = model.derivative(probe)
            i = int(np.argmin(dc))
            # strict inequality: zero slope fails
            out.append(ConditionResult(cid, bool(dc[i] > 0), float(dc[i]), float(probe[i])))
        elif cid == "CON2":
            dc = model.derivative(probe)
            i = int(np.argmin(dc))
            out.append(result(cid, float(dc[i]), float(probe[i])))
        elif cid == "CON4":
            cv = model.speed(probe)
            i = int(np.argmin(cv))
            out.append(ConditionResult(cid, bool(cv[i] > 0), float(cv[i]), float(probe[i])))
        elif cid == "NONTRIVIAL":
            size = float(max(np.max(np.abs(s.u0)), np.max(np.abs(s.u1))))
            out.append(ConditionResult(cid, size > 0, size))
    return HypothesisReport(theorem, tuple(out), tol)


def degeneracy_time_bound_from(theta0: float, c0: float, K: float, F0: float, F1: float) -> float | None:
    """Time by which F(t) = F0 + t F1 must meet the support bound -2 theta0 (c0 t + K).

    None when the bound does not apply (theta0 infinite or F1 + 2 theta0 c0 <= 0).
    """
    if not math.isfinite(theta0):
        return None
    denom = F1 + 2.0 * theta0 * c0
    if not denom > 0:
        return None
    return (-2.0 * theta0 * K - F0) / denom


def degeneracy_time_bound(s: Scenario) -> float | None:
    """Upper bound on the degeneracy time, or None if not applicable."""
    F0 = -trapezoid(s.u0, s.grid)
    F1 = -trapezoid(s.u1, s.grid)
    return degeneracy_time_bound_from(s.model.theta0, s.model.c_at_zero, s.support_radius_K, F0, F1)
