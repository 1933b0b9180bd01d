"""Explicit solver for the diagonal system in Riemann invariants.

With R1 = u_t + c(u) u_x and R2 = u_t - c(u) u_x the wave equation becomes

    R1_t - c R1_x = (c'/2c) (R1^2 - R1 R2)      (R1 travels left)
    R2_t + c R2_x = (c'/2c) (R2^2 - R1 R2)      (R2 travels right)
    u_t = (R1 + R2) / 2

Two discretisations are offered:

``conservative`` (default)
    Uses c_x = c' u_x = c' (R1 - R2) / 2c to fold the quadratic source into
    the transport, giving R1_t = (c R1)_x and R2_t = -(c R2)_x.  Upwind flux
    form, so the discrete sums of R1 and R2 are conserved to round-off and
    signs are preserved under CFL <= 1.

``characteristic``
    Advective upwind transport plus the quadratic source, Strang split.  The
    source sub-step freezes the partner invariant and the coefficient, which
    leaves a Bernoulli equation with a closed-form solution.

Both use zero-gradient ghost cells.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .errors import BlowupStop, DegeneracyStop, DomainError, OutOfDomain, SolverStop
from .initial_data import Grid, Scenario, riemann_initial
from .wavespeed import WaveSpeedModel


@dataclass(frozen=True)
class SolverConfig:
    order: int = 1
    form: str = "conservative"
    eps_deg: float | None = None       # absolute; default 1e-3 * c(0)
    eps_deg_factor: float = 1e-3
    m_blow: float | None = None        # absolute; default factor * max(1, sup |R(0)|)
    blowup_factor: float = 1e3
    dt_max: float = np.inf

    def __post_init__(self):
        if self.order not in (1, 2):
            raise DomainError(f"upwind order must be 1 or 2, got {self.order}")
        if self.form not in ("conservative", "characteristic"):
            raise DomainError(f"unknown form {self.form!r}")

    def degeneracy_threshold(self, model: WaveSpeedModel) -> float:
        return self.eps_deg if self.eps_deg is not None else self.eps_deg_factor * model.c_at_zero

    def blowup_threshold(self, initial_scale: float) -> float:
        if self.m_blow is not None:
            return self.m_blow
        return self.blowup_factor * max(1.0, initial_scale)


@dataclass(frozen=True, eq=False)
class RiemannState:
    t: float
    grid: Grid
    model: WaveSpeedModel
    u: np.ndarray
    R1: np.ndarray
    R2: np.ndarray
    alive: bool = True
    stop_reason: str = ""

    @classmethod
    def from_scenario(cls, s: Scenario) -> "RiemannState":
        R1, R2 = riemann_initial(s)
        return cls(0.0, s.grid, s.model, np.array(s.u0, dtype=float), R1, R2)

    def sealed(self, reason: str) -> "RiemannState":
        return replace(self, alive=False, stop_reason=reason)

    def sup_norm(self) -> float:
        return float(max(np.max(np.abs(self.R1)), np.max(np.abs(self.R2))))


@dataclass(frozen=True)
class StepStats:
    dt: float
    max_abs_R1: float
    max_abs_R2: float
    min_u: float
    min_c: float
    cfl: float


class Sign(str, Enum):
    PLUS = "PLUS"
    MINUS = "MINUS"


@dataclass(frozen=True)
class CharacteristicProbe:
    sign: Sign
    t: np.ndarray
    x: np.ndarray
    R1: np.ndarray
    R2: np.ndarray
    u: np.ndarray


def cfl_timestep(state: RiemannState, nu: float, dt_max: float = np.inf) -> float:
    """dt = nu * dx / max c(u), capped at dt_max."""
    if not 0 < nu < 1:
        raise DomainError(f"CFL number must lie in (0, 1), got {nu}")
    cmax = float(np.max(state.model.speed_or_zero(state.u)))
    if cmax <= 0:
        raise DegeneracyStop("maximum wave speed is zero", state.sealed("degenerate"))
    return min(nu * state.grid.dx / cmax, dt_max)


def source_coefficient(model: WaveSpeedModel, u: np.ndarray, eps_deg: float | None = None) -> np.ndarray:
    """Pointwise c'(u) / (2 c(u))."""
    eps = 1e-3 * model.c_at_zero if eps_deg is None else eps_deg
    c = model.speed_or_zero(u)
    if np.any(c < eps):
        raise DegeneracyStop(f"min c(u) = {np.min(c):.3e} below {eps:.3e}")
    return model.derivative(u) / (2.0 * c)


def reconstruct_gradients(state: RiemannState, eps_deg: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """(u_t, u_x) = ((R1 + R2)/2, (R1 - R2)/(2c))."""
    eps = 1e-3 * state.model.c_at_zero if eps_deg is None else eps_deg
    c = state.model.speed_or_zero(state.u)
    if np.any(c < eps):
        raise DegeneracyStop(f"min c(u) = {np.min(c):.3e} below {eps:.3e}", state.sealed("degenerate"))
    return 0.5 * (state.R1 + state.R2), (state.R1 - state.R2) / (2.0 * c)


# ---------------------------------------------------------------------------
# spatial operators

def _face_speeds(model: WaveSpeedModel, u: np.ndarray) -> np.ndarray:
    """c at the n+1 faces; face j sits between nodes j-1 and j (ghosts copy the edge)."""
    ue = np.concatenate(([u[0]], u, [u[-1]]))
    return model.speed_or_zero(0.5 * (ue[1:] + ue[:-1]))


def _minmod_slopes(q: np.ndarray) -> np.ndarray:
    qe = np.concatenate(([q[0]], q, [q[-1]]))
    a = qe[1:-1] - qe[:-2]
    b = qe[2:] - qe[1:-1]
    return np.where(a * b > 0, np.sign(a) * np.minimum(np.abs(a), np.abs(b)), 0.0)


def _face_values(R1, R2, order):
    """Upwind face states: R1 from the right of each face, R2 from the left."""
    if order == 1:
        left_of_cell, right_of_cell = R1, R2
    else:
        left_of_cell = R1 - 0.5 * _minmod_slopes(R1)
        right_of_cell = R2 + 0.5 * _minmod_slopes(R2)
    # face j takes R1 from node j and R2 from node j-1
    r1f = np.append(left_of_cell, left_of_cell[-1])
    r2f = np.insert(right_of_cell, 0, right_of_cell[0])
    return r1f, r2f


def _conservative_rhs(cf, R1, R2, dx, order):
    r1f, r2f = _face_values(R1, R2, order)
    F1 = cf * r1f
    F2 = cf * r2f
    return (F1[1:] - F1[:-1]) / dx, -(F2[1:] - F2[:-1]) / dx


def _advective_rhs(c, R1, R2, dx, order):
    r1f, r2f = _face_values(R1, R2, order)
    return c * (r1f[1:] - r1f[:-1]) / dx, -c * (r2f[1:] - r2f[:-1]) / dx


def _transport(rhs, R1, R2, dt, order):
    k1 = rhs(R1, R2)
    a1 = R1 + dt * k1[0]
    a2 = R2 + dt * k1[1]
    if order == 1:
        return a1, a2
    # SSP-RK2 keeps the minmod update positivity preserving
    k2 = rhs(a1, a2)
    return 0.5 * (R1 + a1 + dt * k2[0]), 0.5 * (R2 + a2 + dt * k2[1])


def riccati_substep(R: np.ndarray, k: np.ndarray, m: np.ndarray, h: float) -> np.ndarray:
    """Exact solution at time h of dR/dt = k R (R - m) with k, m frozen.

    With w = 1/R the equation is linear: w' = k m w - k.  Entries whose
    denominator reaches zero within h blow up and come back as +-inf.
    """
    z = k * m * h
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        small = np.abs(z) < 1e-8
        phi = np.where(small, 1.0 + 0.5 * z, np.expm1(z) / np.where(small, 1.0, z))
        den = np.exp(z) - R * k * h * phi
        out = np.where(den > 0, R / den, np.where(R == 0, 0.0, np.sign(R) * np.inf))
    return out


def _source_half(model, u_mid, R1, R2, h, eps):
    k = source_coefficient(model, u_mid, eps)
    R1 = riccati_substep(R1, k, R2, 0.5 * h)
    R2 = riccati_substep(R2, k, R1, h)
    R1 = riccati_substep(R1, k, R2, 0.5 * h)
    return R1, R2


def step(state: RiemannState, dt: float, config: SolverConfig = SolverConfig(),
         m_blow: float = np.inf) -> tuple[RiemannState, StepStats]:
    """Advance one explicit step.

    Raises DegeneracyStop / BlowupStop carrying the sealed post-step state
    when min c(u) drops below the degeneracy threshold or max |R| exceeds
    ``m_blow`` (or turns non-finite).
    """
    if not state.alive:
        raise SolverStop("state is sealed", state)
    if not dt > 0:
        raise DomainError(f"time step must be positive, got {dt}")
    model, g = state.model, state.grid
    dx = g.dx
    eps = config.degeneracy_threshold(model)
    u, R1, R2 = state.u, state.R1, state.R2
    ut0 = 0.5 * (R1 + R2)

    if config.form == "conservative":
        cf = _face_speeds(model, u + 0.5 * dt * ut0)
        cmax = float(np.max(cf))
        R1n, R2n = _transport(lambda a, b: _conservative_rhs(cf, a, b, dx, config.order),
                              R1, R2, dt, config.order)
    else:
        try:
            R1h, R2h = _source_half(model, u + 0.25 * dt * ut0, R1, R2, 0.5 * dt, eps)
            c_mid = model.speed_or_zero(u + 0.5 * dt * ut0)
            cmax = float(np.max(c_mid))
            R1h, R2h = _transport(lambda a, b: _advective_rhs(c_mid, a, b, dx, config.order),
                                  R1h, R2h, dt, config.order)
            R1n, R2n = _source_half(model, u + 0.75 * dt * ut0, R1h, R2h, 0.5 * dt, eps)
        except DegeneracyStop as stop:
            sealed = replace(state, t=state.t + dt).sealed("degenerate")
            raise DegeneracyStop(str(stop), sealed) from None

    with np.errstate(invalid="ignore", over="ignore"):
        un = u + 0.25 * dt * (R1 + R2 + R1n + R2n)
    new = RiemannState(state.t + dt, g, model, un, R1n, R2n)

    with np.errstate(invalid="ignore"):
        c_new = model.speed_or_zero(un)
    min_c = float(np.min(c_new)) if np.all(np.isfinite(c_new)) else 0.0
    a1 = float(np.max(np.abs(R1n)))
    a2 = float(np.max(np.abs(R2n)))
    stats = StepStats(dt, a1, a2, float(np.min(un)), min_c, dt * cmax / dx)

    degenerate = min_c < eps
    blown = not (np.isfinite(a1) and np.isfinite(a2)) or max(a1, a2) > m_blow
    if degenerate and blown:
        raise DegeneracyStop("degeneracy and blow-up in the same step",
                             new.sealed("degenerate+blowup"), stats, blowup=True)
    if degenerate:
        raise DegeneracyStop(f"min c(u) = {min_c:.3e} below {eps:.3e}", new.sealed("degenerate"), stats)
    if blown:
        raise BlowupStop(f"max |R| = {max(a1, a2):.3e} above {m_blow:.3e}", new.sealed("blowup"), stats)
    return new, stats


# ---------------------------------------------------------------------------
# characteristics

def _interp(state: RiemannState, values: np.ndarray, x: float) -> float:
    return float(np.interp(x, state.grid.x, values))


def trace_characteristic(history, sign: Sign | str, x_start: float) -> CharacteristicProbe:
    """Follow dx/dt = +c(u) (PLUS, carries R2) or -c(u) (MINUS, carries R1).

    Heun's method between consecutive stored states, linear interpolation
    in x.
    """
    sign = Sign(sign)
    states = list(history)
    if not states:
        raise DomainError("empty history")
    s = 1.0 if sign is Sign.PLUS else -1.0
    g = states[0].grid
    lo, hi = g.x_min, g.x_max

    def vel(st, x):
        return s * float(st.model.speed_or_zero(_interp(st, st.u, x)))

    def check(x, t):
        if not lo <= x <= hi:
            raise OutOfDomain(f"{sign.value} characteristic left the grid at t={t}, x={x}")

    xs = [float(x_start)]
    check(xs[0], states[0].t)
    for a, b in zip(states[:-1], states[1:]):
        if b.t < a.t or b.grid != g:
            raise DomainError("history must be time-ordered on one grid")
        h = b.t - a.t
        v1 = vel(a, xs[-1])
        xp = xs[-1] + h * v1
        check(xp, b.t)
        xn = xs[-1] + 0.5 * h * (v1 + vel(b, xp))
        check(xn, b.t)
        xs.append(xn)
    t = np.array([st.t for st in states])
    x = np.array(xs)
    return CharacteristicProbe(
        sign, t, x,
        np.array([_interp(st, st.R1, xi) for st, xi in zip(states, xs)]),
        np.array([_interp(st, st.R2, xi) for st, xi in zip(states, xs)]),
        np.array([_interp(st, st.u, xi) for st, xi in zip(states, xs)]),
    )
