"""Leapfrog solver for the second-order form u_tt = (c(u)^2 u_x)_x.

The spatial operator is written in flux form with c evaluated at the mean of
the two adjacent nodes, so the discrete integral of u_t telescopes and is
conserved to round-off.  Ghost nodes copy the edge value (zero boundary flux).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import BlowupStop, DegeneracyError, DegeneracyStop, DomainError, SolverStop
from .initial_data import Grid, Scenario
from .wavespeed import WaveSpeedModel


@dataclass(frozen=True, eq=False)
class FluxState:
    t: float
    grid: Grid
    model: WaveSpeedModel
    u_prev: np.ndarray
    u_curr: np.ndarray
    dt_prev: float
    alive: bool = True
    stop_reason: str = ""
    last_momentum: float | None = None

    def sealed(self, reason: str, momentum: float | None) -> "FluxState":
        return replace(self, alive=False, stop_reason=reason, last_momentum=momentum)

    @property
    def momentum_stale(self) -> bool:
        return not self.alive


def flux_operator(model: WaveSpeedModel, u: np.ndarray, dx: float) -> np.ndarray:
    """(c(u)^2 u_x)_x with face speeds c((u_i + u_{i+1})/2)."""
    ue = np.concatenate(([u[0]], u, [u[-1]]))
    c_face = model.speed_or_zero(0.5 * (ue[1:] + ue[:-1]))
    F = c_face * c_face * (ue[1:] - ue[:-1])
    return (F[1:] - F[:-1]) / (dx * dx)


def init_flux(s: Scenario, dt0: float) -> FluxState:
    """Second-order Taylor start: u_prev = u0 - dt0 u1 + dt0^2/2 L(u0)."""
    if not dt0 > 0:
        raise DomainError(f"initial time step must be positive, got {dt0}")
    if s.model.is_degenerate(s.u0):
        raise DegeneracyError("u0 reaches theta0")
    u0 = np.array(s.u0, dtype=float)
    L0 = flux_operator(s.model, u0, s.grid.dx)
    u_prev = u0 - dt0 * s.u1 + 0.5 * dt0 * dt0 * L0
    return FluxState(0.0, s.grid, s.model, u_prev, u0, float(dt0))


def momentum_total(state: FluxState) -> float:
    """Trapezoid integral of the backward difference (u_curr - u_prev)/dt_prev.

    For a sealed state the value of the last live state is returned
    (``state.momentum_stale`` is then True).
    """
    if not state.alive and state.last_momentum is not None:
        return state.last_momentum
    return float(np.trapezoid((state.u_curr - state.u_prev) / state.dt_prev, dx=state.grid.dx))


def gradients_flux(state: FluxState) -> tuple[np.ndarray, np.ndarray]:
    """u_t by backward difference, u_x by 2nd-order central difference."""
    ut = (state.u_curr - state.u_prev) / state.dt_prev
    ux = np.gradient(state.u_curr, state.grid.dx, edge_order=2)
    return ut, ux


def riemann_fields(state: FluxState) -> tuple[np.ndarray, np.ndarray]:
    ut, ux = gradients_flux(state)
    c = state.model.speed_or_zero(state.u_curr)
    return ut + c * ux, ut - c * ux


def step_flux(state: FluxState, dt: float, *, eps_deg: float | None = None,
              m_blow: float = np.inf) -> FluxState:
    """One leapfrog step, with the non-uniform correction when dt != dt_prev:

        u+ = u + (dt/dt_prev)(u - u-) + dt (dt + dt_prev)/2 * L(u)
    """
    if not state.alive:
        raise SolverStop("state is sealed", state)
    if not dt > 0:
        raise DomainError(f"time step must be positive, got {dt}")
    model, g = state.model, state.grid
    cmax = float(np.max(model.speed_or_zero(state.u_curr)))
    if dt * cmax > g.dx * (1.0 + 1e-12):
        raise DomainError(f"dt={dt} violates the CFL limit dx/max c = {g.dx / cmax}")
    eps = 1e-3 * model.c_at_zero if eps_deg is None else eps_deg
    momentum = momentum_total(state)

    L = flux_operator(model, state.u_curr, g.dx)
    with np.errstate(invalid="ignore", over="ignore"):
        u_next = (state.u_curr + (dt / state.dt_prev) * (state.u_curr - state.u_prev)
                  + 0.5 * dt * (dt + state.dt_prev) * L)
    new = FluxState(state.t + dt, g, model, state.u_curr, u_next, float(dt))

    c_new = model.speed_or_zero(u_next)
    finite = bool(np.all(np.isfinite(u_next)))
    min_c = float(np.min(c_new)) if finite else 0.0
    if finite:
        R1, R2 = riemann_fields(new)
        rmax = float(max(np.max(np.abs(R1)), np.max(np.abs(R2))))
    else:
        rmax = np.inf
    degenerate = min_c < eps
    blown = not np.isfinite(rmax) or rmax > m_blow
    if degenerate:
        raise DegeneracyStop(f"min c(u) = {min_c:.3e} below {eps:.3e}",
                             new.sealed("degenerate+blowup" if blown else "degenerate", momentum),
                             blowup=blown)
    if blown:
        raise BlowupStop(f"max |R| = {rmax:.3e} above {m_blow:.3e}", new.sealed("blowup", momentum))
    return new
