"""Scenario files, the time loop, sweeps, cross-validation and reports."""

from __future__ import annotations

import copy
import csv
import hashlib
import itertools
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from . import __version__
from .diagnostics import (DiagnosticsRecord, Outcome, RiccatiFit, RunClassification, Violation,
                          check_lemma_monitors, detect_stop, record, riccati_estimate,
                          theta1_floor)
from .errors import (ConfigError, DomainError, ExpressionSyntaxError, FitError, ParseError,
                     QuasiwaveError, SolverStop, ValidationError)
from .flux import FluxState, init_flux, step_flux
from .initial_data import (Bump, Custom, Grid, HypothesisReport, Profile, Scenario,
                           ScaledDerivative, Theorem, TruncatedGaussian, Zero, check_hypotheses,
                           degeneracy_time_bound, riemann_initial)
from .riemann import RiemannState, SolverConfig, cfl_timestep, step
from .wavespeed import (WaveSpeedModel, builtin_affine_shift, builtin_constant, builtin_zabusky,
                        from_expression)

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

log = logging.getLogger("quasiwave")

RUN_DEFAULTS = {
    "t_end": 10.0,
    "cfl": 0.45,
    "solver": "riemann",
    "order": 1,
    "form": "conservative",
    "eps_deg_factor": 1e-3,
    "eps_deg": None,
    "blowup_factor": 1e3,
    "m_blow": None,
    "record_stride": 10,
    "riccati_window": 0.3,
    "support_radius": None,
}
OUTPUT_DEFAULTS = {"dir": "quasiwave-out", "stem": "run"}
SOLVERS = ("riemann", "flux", "both")
DEFAULT_NODES = 1024


# ---------------------------------------------------------------------------
# Configuration

@dataclass
class ScenarioConfig:
    model: dict
    u0: dict
    u1: dict
    grid: dict
    run: dict
    output: dict
    warnings: list = field(default_factory=list)
    source: str = ""
    grid_input: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {k: copy.deepcopy(getattr(self, k))
                for k in ("model", "u0", "u1", "grid", "run", "output")}

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, default=str)
        return hashlib.sha256(blob.encode()).hexdigest()

    def with_overrides(self, overrides: Mapping[str, Any]) -> "ScenarioConfig":
        """Copy with dotted-path overrides such as ``{"u1.integral": -4}``, revalidated."""
        raw = self.to_dict()
        raw["grid"] = copy.deepcopy(self.grid_input)
        for key, value in overrides.items():
            table, _, name = key.partition(".")
            if table not in raw or not name:
                raise ValidationError(key, "override must be table.field")
            raw[table][name] = value
        return config_from_dict(raw, self.source)


def _float(table: dict, key: str, where: str, default=None, positive=False):
    value = table.get(key, default)
    if value is None:
        return None
    if isinstance(value, str) and value.strip().lower() in ("-inf", "inf", "+inf"):
        return float(value)
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ValidationError(f"{where}.{key}", f"expected a number, got {value!r}") from None
    if positive and not value > 0:
        raise ValidationError(f"{where}.{key}", f"must be positive, got {value}")
    return value


def build_model(spec: Mapping[str, Any]) -> WaveSpeedModel:
    kind = str(spec.get("kind", "")).lower()
    try:
        if kind == "zabusky":
            return builtin_zabusky(_float(spec, "a", "model", default=float("nan")))
        if kind == "constant":
            return builtin_constant(_float(spec, "c0", "model", default=1.0))
        if kind == "affine_shift":
            return builtin_affine_shift(_float(spec, "theta0", "model", default=-1.0))
        if kind == "expression":
            if "expr" not in spec:
                raise ValidationError("model.expr", "expression model needs expr")
            return from_expression(str(spec["expr"]), _float(spec, "theta0", "model", default="-inf"),
                                   bool(spec.get("monotone", True)), spec.get("derivative"))
    except ExpressionSyntaxError as err:
        raise ValidationError("model.expr", str(err)) from None
    except DomainError as err:
        name = {"zabusky": "a", "constant": "c0"}.get(kind, "theta0")
        raise ValidationError(f"model.{name}", str(err)) from None
    raise ValidationError("model.kind", f"unknown wave-speed kind {kind!r}")


def build_profile(spec: Mapping[str, Any], where: str) -> Profile:
    kind = str(spec.get("kind", "zero")).lower()
    try:
        if kind == "zero":
            return Zero()
        if kind == "bump":
            radius = _float(spec, "radius", where, default=1.0, positive=True)
            center = _float(spec, "center", where, default=0.0)
            if "integral" in spec:
                return Bump.with_integral(_float(spec, "integral", where), radius, center)
            return Bump(_float(spec, "amplitude", where, default=1.0), radius, center)
        if kind == "gaussian":
            return TruncatedGaussian(_float(spec, "amplitude", where, default=1.0),
                                     _float(spec, "sigma", where, default=1.0, positive=True),
                                     _float(spec, "cutoff", where, default=3.0, positive=True),
                                     _float(spec, "center", where, default=0.0))
        if kind == "derivative":
            if not isinstance(spec.get("of"), Mapping):
                raise ValidationError(f"{where}.of", "derivative profile needs an 'of' table")
            return ScaledDerivative(build_profile(spec["of"], f"{where}.of"),
                                    _float(spec, "scale", where, default=1.0))
        if kind == "expr":
            return Custom(str(spec.get("text", "")))
    except ExpressionSyntaxError as err:
        raise ValidationError(f"{where}.text", str(err)) from None
    except DomainError as err:
        raise ValidationError(where, str(err)) from None
    raise ValidationError(f"{where}.kind", f"unknown profile kind {kind!r}")


def _profile_peak(p: Profile, K: float) -> float:
    xs = np.linspace(-K, K, 4001)
    return float(np.max(p.values(xs)))


def config_from_dict(raw: Mapping[str, Any], source: str = "") -> ScenarioConfig:
    """Validate a raw mapping, fill defaults, and size the domain."""
    if not isinstance(raw, Mapping):
        raise ParseError("scenario must be a table", source)
    for table in ("model", "u0", "u1"):
        if table not in raw or not isinstance(raw[table], Mapping):
            raise ValidationError(table, "missing table")
    warnings: list[str] = []
    model_spec = dict(raw["model"])
    model = build_model(model_spec)
    u0 = build_profile(raw["u0"], "u0")
    u1 = build_profile(raw["u1"], "u1")

    run = dict(RUN_DEFAULTS)
    run.update(raw.get("run", {}))
    unknown = set(run) - set(RUN_DEFAULTS)
    if unknown:
        raise ValidationError(f"run.{sorted(unknown)[0]}", "unknown field")
    run["t_end"] = _float(run, "t_end", "run", positive=True)
    run["cfl"] = _float(run, "cfl", "run", positive=True)
    if not run["cfl"] < 1:
        raise ValidationError("run.cfl", "CFL number must be below 1")
    if run["solver"] not in SOLVERS:
        raise ValidationError("run.solver", f"expected one of {SOLVERS}")
    if run["form"] not in ("conservative", "characteristic"):
        raise ValidationError("run.form", "expected 'conservative' or 'characteristic'")
    if int(run["order"]) not in (1, 2):
        raise ValidationError("run.order", "expected 1 or 2")
    run["order"] = int(run["order"])
    if int(run["record_stride"]) < 1:
        raise ValidationError("run.record_stride", "must be >= 1")
    run["record_stride"] = int(run["record_stride"])
    for key in ("eps_deg_factor", "blowup_factor", "riccati_window"):
        run[key] = _float(run, key, "run", positive=True)
    for key in ("eps_deg", "m_blow", "support_radius"):
        run[key] = _float(run, key, "run", positive=True)

    # Domain sizing: half width >= K + c_max T_end + 10 dx.
    grid = dict(raw.get("grid", {}))
    declared = [p.support_radius() for p in (u0, u1)]
    K = run["support_radius"]
    if K is None:
        if any(d is None for d in declared):
            if "x_half_width" not in grid:
                raise ValidationError("grid.x_half_width",
                                      "required when a profile has no declared support")
            K = 0.0
        else:
            K = max(declared)
    c_max = float(model.speed(max(_profile_peak(u0, max(K, 1e-9)), 0.0)))
    reach = K + c_max * run["t_end"]
    W = _float(grid, "x_half_width", "grid", positive=True)
    n = grid.get("n")
    dx = _float(grid, "dx", "grid", positive=True)
    if n is not None:
        n = int(n)
        if n < 16:
            raise ValidationError("grid.n", "need at least 16 nodes")
    if n is None and dx is None:
        n = DEFAULT_NODES
    if W is None:
        if dx is None:
            W = reach / (1.0 - 20.0 / n)
            dx = 2.0 * W / n
        else:
            W = reach + 10.0 * dx
            n = int(math.ceil(2.0 * W / dx))
            W = 0.5 * n * dx
        warnings.append(f"x_half_width auto-sized to {W:.6g}")
    else:
        if dx is None:
            dx = 2.0 * W / n
        elif n is None:
            n = int(math.ceil(2.0 * W / dx))
            W = 0.5 * n * dx
        elif not math.isclose(dx, 2.0 * W / n, rel_tol=1e-9):
            raise ValidationError("grid.dx", "inconsistent with x_half_width and n")
        needed = reach + 10.0 * dx
        if W < needed:
            n = int(math.ceil(2.0 * needed / dx))
            warnings.append(f"x_half_width {W:.6g} below K + c_max*T_end + 10 dx = {needed:.6g}; "
                            f"expanded to {0.5 * n * dx:.6g}")
            W = 0.5 * n * dx
    grid_out = {"x_half_width": W, "n": n, "dx": dx, "_K": K, "_c_max": c_max}

    output = dict(OUTPUT_DEFAULTS)
    output.update(raw.get("output", {}))
    cfg = ScenarioConfig(model_spec, dict(raw["u0"]), dict(raw["u1"]), grid_out, run, output,
                         warnings, source, dict(raw.get("grid", {})))
    for w in warnings:
        log.warning("%s: %s", source or "scenario", w)
    return cfg


def builtin_scenario_path(name: str) -> Path:
    return Path(str(resources.files("quasiwave") / "scenarios" / f"{name}.toml"))


def load_scenario(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    if not path.exists() and not path.suffix:
        candidate = builtin_scenario_path(str(path))
        if candidate.exists():
            path = candidate
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as err:
        raise ParseError(f"cannot read scenario: {err}", str(path)) from None
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as err:
        raise ParseError(str(err), str(path)) from None
    return config_from_dict(raw, str(path))


def build_scenario(cfg: ScenarioConfig) -> Scenario:
    g = Grid.symmetric(cfg.grid["x_half_width"], cfg.grid["n"])
    model = build_model(cfg.model)
    return Scenario.from_profiles(g, build_profile(cfg.u0, "u0"), build_profile(cfg.u1, "u1"),
                                  model, K=cfg.grid["_K"] if cfg.grid["_K"] > 0 else None,
                                  labels={"source": cfg.source})


def solver_config(cfg: ScenarioConfig) -> SolverConfig:
    r = cfg.run
    return SolverConfig(order=r["order"], form=r["form"], eps_deg=r["eps_deg"],
                        eps_deg_factor=r["eps_deg_factor"], m_blow=r["m_blow"],
                        blowup_factor=r["blowup_factor"])


# ---------------------------------------------------------------------------
# Runs

@dataclass
class RunReport:
    solver: str
    hypotheses: dict
    classification: RunClassification
    bounds: dict
    riccati: RiccatiFit | None
    series: list
    violations: list
    provenance: dict
    warnings: list = field(default_factory=list)
    snapshots: list = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "solver": self.solver,
            "classification": self.classification.to_dict(),
            "hypotheses": {k.value if hasattr(k, "value") else k: v.to_dict()
                           for k, v in self.hypotheses.items()},
            "bounds": self.bounds,
            "riccati": self.riccati.to_dict() if self.riccati else None,
            "violations": [asdict(v) for v in self.violations],
            "provenance": self.provenance,
            "warnings": self.warnings,
            "records": len(self.series),
        }


def _time_loop_riemann(s, cfg, scfg, snapshot_every):
    state = RiemannState.from_scenario(s)
    m_blow = scfg.blowup_threshold(state.sup_norm())
    records = [record(state)]
    snaps = [(state.t, state.u.copy())] if snapshot_every else []
    t_end, nu, stride = cfg.run["t_end"], cfg.run["cfl"], cfg.run["record_stride"]
    failure = None
    steps = 0
    try:
        while state.t < t_end * (1.0 - 1e-14):
            dt = min(cfl_timestep(state, nu), t_end - state.t)
            if dt <= 1e-14 * t_end:
                failure = "time step underflow"
                break
            try:
                state, _ = step(state, dt, scfg, m_blow)
            except SolverStop as stop:
                state = stop.state
                records.append(record(state))
                if snapshot_every:
                    snaps.append((state.t, state.u.copy()))
                break
            steps += 1
            done = state.t >= t_end * (1.0 - 1e-14)
            if steps % stride == 0 or done:
                records.append(record(state))
            if snapshot_every and (steps % snapshot_every == 0 or done):
                snaps.append((state.t, state.u.copy()))
    except (QuasiwaveError, FloatingPointError, ValueError) as err:
        failure = f"{type(err).__name__}: {err}"
    return records, snaps, m_blow, failure, steps


def _time_loop_flux(s, cfg, scfg, snapshot_every):
    model, g = s.model, s.grid
    nu, t_end, stride = cfg.run["cfl"], cfg.run["t_end"], cfg.run["record_stride"]
    eps = scfg.degeneracy_threshold(model)
    R1, R2 = riemann_initial(s)
    m_blow = scfg.blowup_threshold(float(max(np.max(np.abs(R1)), np.max(np.abs(R2)))))
    cmax0 = float(np.max(model.speed(s.u0)))
    dt = min(nu * g.dx / cmax0, t_end)
    state = init_flux(s, dt)
    records = [record(state)]
    snaps = [(0.0, np.array(s.u0))] if snapshot_every else []
    failure = None
    steps = 0
    dt_prev = dt
    try:
        while state.t < t_end * (1.0 - 1e-14):
            bound = nu * g.dx / float(np.max(model.speed_or_zero(state.u_curr)))
            dt = bound if bound < 0.95 * dt_prev else dt_prev
            dt = min(dt, t_end - state.t)
            if dt <= 1e-14 * t_end:
                failure = "time step underflow"
                break
            try:
                state = step_flux(state, dt, eps_deg=eps, m_blow=m_blow)
            except SolverStop as stop:
                state = stop.state
                records.append(record(state))
                if snapshot_every:
                    snaps.append((state.t, state.u_curr.copy()))
                break
            dt_prev = dt
            steps += 1
            done = state.t >= t_end * (1.0 - 1e-14)
            if steps % stride == 0 or done:
                records.append(record(state))
            if snapshot_every and (steps % snapshot_every == 0 or done):
                snaps.append((state.t, state.u_curr.copy()))
    except (QuasiwaveError, FloatingPointError, ValueError) as err:
        failure = f"{type(err).__name__}: {err}"
    return records, snaps, m_blow, failure, steps


def _json_safe(v):
    if isinstance(v, float) and not math.isfinite(v):
        return "inf" if v > 0 else ("-inf" if v < 0 else "nan")
    return v


def run(cfg: ScenarioConfig, solver: str | None = None, snapshot_every: int = 0) -> RunReport:
    """One solver run with diagnostics, monitors, bounds and classification.

    Solver failures become INCONCLUSIVE classifications; this never raises
    for numerical trouble.
    """
    solver = solver or cfg.run["solver"]
    if solver == "both":
        solver = "riemann"
    s = build_scenario(cfg)
    scfg = solver_config(cfg)
    eps = scfg.degeneracy_threshold(s.model)
    hyps = {th: check_hypotheses(s, th) for th in Theorem}
    theta1 = theta1_floor(s) if hyps[Theorem.THM1]["INICON3"].satisfied else None
    t_bound = degeneracy_time_bound(s) if hyps[Theorem.THM2].satisfied else None

    loop = _time_loop_riemann if solver == "riemann" else _time_loop_flux
    records, snaps, m_blow, failure, steps = loop(s, cfg, scfg, snapshot_every)

    violations = check_lemma_monitors(
        records, hyps, theta1=theta1 if hyps[Theorem.THM1].satisfied else None,
        support_K=s.support_radius_K, c_max=s.c_max(), dx=s.grid.dx,
        half_width=s.grid.extent)

    fit = None
    blow_idx = next((i for i, r in enumerate(records) if r.r_sup > m_blow), None)
    if blow_idx is not None:
        try:
            fit = riccati_estimate(records[:blow_idx + 1], cfg.run["riccati_window"])
        except FitError as err:
            log.info("no Riccati fit: %s", err)
    cls = detect_stop(records, eps_deg=eps, m_blow=m_blow, t_end=cfg.run["t_end"],
                      violations=violations, failure=failure,
                      t_estimate=fit.t_estimate if fit else None)
    provenance = {
        "config_hash": cfg.config_hash(),
        "config": cfg.to_dict(),
        "source": cfg.source,
        "grid": {"x_min": s.grid.x_min, "dx": s.grid.dx, "n": s.grid.n},
        "thresholds": {"eps_deg": eps, "m_blow": m_blow},
        "solver": solver,
        "steps": steps,
        "version": __version__,
    }
    bounds = {"theta1_floor": theta1, "degeneracy_time_bound": t_bound,
              "support_radius_K": s.support_radius_K, "c_max": s.c_max()}
    log.info("%s/%s: %s", cfg.source or "scenario", solver, cls.outcome.value)
    return RunReport(solver, hyps, cls, bounds, fit, records, violations, provenance,
                     list(cfg.warnings), snaps)


def run_all(cfg: ScenarioConfig, solver: str | None = None) -> dict[str, RunReport]:
    solver = solver or cfg.run["solver"]
    names = ("riemann", "flux") if solver == "both" else (solver,)
    return {name: run(cfg, name) for name in names}


def check(cfg: ScenarioConfig) -> dict:
    """Hypothesis reports and a-priori bounds without running a solver."""
    s = build_scenario(cfg)
    hyps = {th: check_hypotheses(s, th) for th in Theorem}
    return {
        "hypotheses": {th.value: rep.to_dict() for th, rep in hyps.items()},
        "theta1_floor": theta1_floor(s) if hyps[Theorem.THM1]["INICON3"].satisfied else None,
        "degeneracy_time_bound": degeneracy_time_bound(s) if hyps[Theorem.THM2].satisfied else None,
    }


# ---------------------------------------------------------------------------
# Reports

def write_report(report: RunReport, out_dir: str | Path, stem: str = "run") -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    meta_path = out / f"{stem}-{report.solver}.json"
    csv_path = out / f"{stem}-{report.solver}.csv"
    meta_path.write_text(json.dumps(_sanitize(report.to_dict()), indent=2, sort_keys=True) + "\n",
                         encoding="utf-8")
    with csv_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(DiagnosticsRecord.CSV_HEADER)
        for rec in report.series:
            writer.writerow([format(v, ".17g") for v in rec.csv_row()])
    return meta_path, csv_path


def _sanitize(obj):
    if isinstance(obj, dict):
        return {str(k): _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        obj = obj.item()
    return _json_safe(obj)


# ---------------------------------------------------------------------------
# Sweeps

def _sweep_cell(args):
    cfg, overrides, solver = args
    row = {"params": dict(overrides)}
    try:
        cell_cfg = cfg.with_overrides(overrides)
        rep = run(cell_cfg, solver)
        c = rep.classification
        row.update(outcome=c.outcome.value, t_stop=c.t_stop, reason=c.reason,
                   theta1_floor=rep.bounds["theta1_floor"],
                   degeneracy_time_bound=rep.bounds["degeneracy_time_bound"],
                   thm1=rep.hypotheses[Theorem.THM1].satisfied,
                   thm2=rep.hypotheses[Theorem.THM2].satisfied,
                   thm3=rep.hypotheses[Theorem.THM3].satisfied)
    except (QuasiwaveError, ValueError, FloatingPointError) as err:
        row.update(outcome=Outcome.INCONCLUSIVE.value, t_stop=None, reason=f"{type(err).__name__}: {err}",
                   theta1_floor=None, degeneracy_time_bound=None, thm1=None, thm2=None, thm3=None)
    return row


def sweep(cfg: ScenarioConfig, axes: Mapping[str, Sequence[Any]], jobs: int = 1,
          solver: str | None = None) -> list[dict]:
    """One run per cell of the Cartesian product of ``axes``; rows in cell order."""
    names = list(axes)
    if any(len(axes[n]) == 0 for n in names):
        names = [n for n in names if len(axes[n])]
    grids = [list(axes[n]) for n in names]
    cells = [dict(zip(names, combo)) for combo in itertools.product(*grids)] if names else [{}]
    if len(cells) > 10_000:
        raise ValidationError("axes", f"{len(cells)} cells exceed the 10^4 limit")
    solver = solver or cfg.run["solver"]
    if solver == "both":
        solver = "riemann"
    tasks = [(cfg, cell, solver) for cell in cells]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_cell, tasks))
    else:
        rows = [_sweep_cell(t) for t in tasks]
    return rows


def write_sweep(rows: list[dict], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    params = sorted({k for r in rows for k in r["params"]})
    cols = ["outcome", "t_stop", "theta1_floor", "degeneracy_time_bound", "thm1", "thm2", "thm3", "reason"]
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(params + cols)
        for r in rows:
            w.writerow([r["params"].get(p) for p in params] + [r.get(c) for c in cols])
    return path


# ---------------------------------------------------------------------------
# Cross-validation

@dataclass
class Discrepancy:
    times: np.ndarray
    l2: np.ndarray
    linf: np.ndarray
    rel_l2: np.ndarray
    outcomes: dict
    t_stops: dict
    agree: bool

    @property
    def max_rel_l2(self) -> float:
        return float(np.max(self.rel_l2)) if self.rel_l2.size else 0.0

    def to_dict(self) -> dict:
        return {"max_rel_l2": self.max_rel_l2,
                "max_linf": float(np.max(self.linf)) if self.linf.size else 0.0,
                "compared_times": int(self.times.size),
                "outcomes": self.outcomes, "t_stops": self.t_stops, "agree": self.agree}


def _interp_snapshot(snaps, t):
    times = np.array([s[0] for s in snaps])
    j = int(np.searchsorted(times, t))
    if j < len(times) and math.isclose(times[j], t, rel_tol=0, abs_tol=1e-14):
        return snaps[j][1]
    if j == 0 or j >= len(times):
        raise DomainError(f"time {t} outside snapshot range")
    t0, t1 = times[j - 1], times[j]
    w = (t - t0) / (t1 - t0)
    return (1.0 - w) * snaps[j - 1][1] + w * snaps[j][1]


def cross_validate(cfg: ScenarioConfig) -> Discrepancy:
    """Run both solvers and compare u at matched times up to 0.9 t_stop."""
    reps = {name: run(cfg, name, snapshot_every=1) for name in ("riemann", "flux")}
    finite = [r.classification.t_stop for r in reps.values() if r.classification.t_stop is not None]
    limit = 0.9 * min(finite) if finite else cfg.run["t_end"]
    g = Grid.symmetric(cfg.grid["x_half_width"], cfg.grid["n"])
    r_snaps, f_snaps = reps["riemann"].snapshots, reps["flux"].snapshots
    f_end = f_snaps[-1][0]
    times, l2, linf, rel = [], [], [], []
    for t, ur in r_snaps:
        if t > limit * (1 + 1e-12) or t > f_end:
            continue
        uf = _interp_snapshot(f_snaps, t)
        diff = ur - uf
        d2 = math.sqrt(float(np.trapezoid(diff * diff, dx=g.dx)))
        n2 = math.sqrt(float(np.trapezoid(ur * ur, dx=g.dx)))
        times.append(t)
        l2.append(d2)
        linf.append(float(np.max(np.abs(diff))))
        rel.append(d2 / n2 if n2 > 0 else (0.0 if d2 == 0 else math.inf))
    outcomes = {k: r.classification.outcome.value for k, r in reps.items()}
    return Discrepancy(np.array(times), np.array(l2), np.array(linf), np.array(rel), outcomes,
                       {k: r.classification.t_stop for k, r in reps.items()},
                       len(set(outcomes.values())) == 1)
