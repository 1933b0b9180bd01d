"""Wave-speed functions c(theta) for u_tt = (c(u)^2 u_x)_x.

A model carries c, its derivative c', and the degeneracy point ``theta0``
where c vanishes (``-inf`` when it never does).  Models never clamp:
asking for c at or below ``theta0`` raises :class:`DegeneracyError`.  The
solvers use :meth:`WaveSpeedModel.speed_or_zero` for diagnostics instead.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import integrate

from . import expr as ex
from .errors import DegeneracyError, DomainError, QuadratureError

NEG_INF = float("-inf")


class SpeedKind(str, Enum):
    ZABUSKY = "zabusky"
    CONSTANT = "constant"
    AFFINE_SHIFT = "affine_shift"
    EXPRESSION = "expression"


@dataclass(frozen=True)
class WaveSpeedModel:
    kind: SpeedKind
    theta0: float
    params: tuple[float, ...] = ()
    monotone: bool = True
    ast: ex.Node | None = None
    ast_deriv: ex.Node | None = None
    text: str = ""
    c_at_zero: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "c_at_zero", float(self.speed(0.0)))
        if not self.c_at_zero > 0:
            raise DomainError(f"c(0) must be positive, got {self.c_at_zero}")

    # -- raw evaluation -------------------------------------------------
    def _c(self, th):
        match self.kind:
            case SpeedKind.ZABUSKY:
                (a,) = self.params
                return np.power(1.0 + th, 0.5 * a)
            case SpeedKind.CONSTANT:
                (c0,) = self.params
                return c0 + 0.0 * np.asarray(th, dtype=float) if np.ndim(th) else c0
            case SpeedKind.AFFINE_SHIFT:
                return th - self.theta0
            case SpeedKind.EXPRESSION:
                return ex.evaluate(self.ast, th)
        raise AssertionError(self.kind)

    def _dc(self, th):
        match self.kind:
            case SpeedKind.ZABUSKY:
                (a,) = self.params
                return 0.5 * a * np.power(1.0 + th, 0.5 * a - 1.0)
            case SpeedKind.CONSTANT:
                return 0.0 * np.asarray(th, dtype=float) if np.ndim(th) else 0.0
            case SpeedKind.AFFINE_SHIFT:
                return 1.0 + 0.0 * np.asarray(th, dtype=float) if np.ndim(th) else 1.0
            case SpeedKind.EXPRESSION:
                return ex.evaluate(self.ast_deriv, th)
        raise AssertionError(self.kind)

    def _check(self, th):
        if np.any(np.asarray(th) <= self.theta0):
            worst = float(np.min(th))
            raise DegeneracyError(f"theta={worst} is at or below theta0={self.theta0}")

    # -- public ---------------------------------------------------------
    def speed(self, th):
        """c(theta); scalar or elementwise over an array."""
        self._check(th)
        return self._c(th)

    def derivative(self, th):
        self._check(th)
        return self._dc(th)

    def speed_or_zero(self, th):
        """c(theta) with c := 0 at and below theta0 (diagnostics only)."""
        th = np.asarray(th, dtype=float)
        alive = th > self.theta0
        safe = np.where(alive, th, 1.0 if self.theta0 == NEG_INF else self.theta0 + 1.0)
        out = np.where(alive, self._c(safe), 0.0)
        return float(out) if out.ndim == 0 else out

    def is_degenerate(self, th) -> bool:
        return bool(np.any(np.asarray(th) <= self.theta0))

    @property
    def finite_theta0(self) -> bool:
        return math.isfinite(self.theta0)

    def describe(self) -> dict:
        out = {"kind": self.kind.value,
               "theta0": self.theta0 if self.finite_theta0 else "-inf"}
        if self.kind is SpeedKind.ZABUSKY:
            out["a"] = self.params[0]
        elif self.kind is SpeedKind.CONSTANT:
            out["c0"] = self.params[0]
        elif self.kind is SpeedKind.EXPRESSION:
            out["expr"] = self.text
            out["monotone"] = self.monotone
        return out


def builtin_zabusky(a: float) -> WaveSpeedModel:
    """Nonlinear string: c(theta) = (1 + theta)^(a/2), theta0 = -1."""
    if not a > 0:
        raise DomainError(f"Zabusky exponent a must be positive, got {a}")
    return WaveSpeedModel(SpeedKind.ZABUSKY, -1.0, (float(a),))


def builtin_constant(c0: float) -> WaveSpeedModel:
    if not c0 > 0:
        raise DomainError(f"constant speed must be positive, got {c0}")
    return WaveSpeedModel(SpeedKind.CONSTANT, NEG_INF, (float(c0),))


def builtin_affine_shift(theta0: float = -1.0) -> WaveSpeedModel:
    """c(theta) = theta - theta0, so c(0) = -theta0."""
    if not (math.isfinite(theta0) and theta0 < 0):
        raise DomainError(f"affine shift needs a finite negative theta0, got {theta0}")
    return WaveSpeedModel(SpeedKind.AFFINE_SHIFT, float(theta0))


def from_expression(text: str, theta0: float = NEG_INF, monotone: bool = True,
                    derivative_text: str | None = None) -> WaveSpeedModel:
    """Model from a user expression in ``theta``; c' is derived symbolically
    unless ``derivative_text`` is given."""
    ast = ex.parse_speed_expr(text)
    dast = ex.parse_speed_expr(derivative_text) if derivative_text else ex.derive(ast)
    if theta0 is None or (isinstance(theta0, str) and theta0.strip() in ("-inf", "-infinity")):
        theta0 = NEG_INF
    if not float(theta0) < 0:
        raise DomainError(f"theta0 must be negative, got {theta0}")
    return WaveSpeedModel(SpeedKind.EXPRESSION, float(theta0), (), bool(monotone), ast, dast, text)


def eval_speed(model: WaveSpeedModel, theta: float) -> float:
    return float(model.speed(theta))


def eval_speed_derivative(model: WaveSpeedModel, theta: float) -> float:
    return float(model.derivative(theta))


def speed_primitive(model: WaveSpeedModel, lo: float, hi: float, rtol: float = 1e-9) -> float:
    """Integral of c over [lo, hi].

    ``lo`` may equal ``theta0``; the integrand tends to zero there.  With
    theta0 = -inf and lo = -inf the result is the ``+inf`` sentinel meaning
    "no finite degeneracy budget".
    """
    if lo == NEG_INF and model.theta0 == NEG_INF:
        return math.inf
    if lo < model.theta0 or hi < lo:
        raise DomainError(f"need theta0 <= lo <= hi, got lo={lo}, hi={hi}")
    if hi == lo:
        return 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(model.speed_or_zero, lo, hi, epsabs=0.0,
                                      epsrel=0.1 * rtol, limit=400)
        except integrate.IntegrationWarning as warn:
            raise QuadratureError(f"quadrature failed on [{lo}, {hi}]: {warn}") from None
    if not err <= rtol * max(abs(val), 1e-300):
        raise QuadratureError(f"quadrature error {err:.3e} exceeds rtol {rtol} on [{lo}, {hi}]")
    return float(val)


def probe_points(model: WaveSpeedModel, hi: float = 10.0, n: int = 64) -> np.ndarray:
    """Log-spaced probe set clustering at theta0 (or a wide span if it is -inf)."""
    if model.finite_theta0:
        offsets = np.logspace(-6, math.log10(max(hi - model.theta0, 1e-6)), n)
        return model.theta0 + offsets
    return np.concatenate([-np.logspace(2, -6, n // 2), np.logspace(-6, math.log10(max(hi, 1e-6)), n // 2)])
