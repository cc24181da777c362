"""Experiment runner: presets, trajectory records, benchmarks, convergence
studies, and flat-file emission (CSV and simple SVG line charts).

A run is described by a flat :class:`ExperimentSpec` (always expressible as
a flat JSON document).  The doubled-space explicit methods integrate the
embedded state and report invariants evaluated on the ``(q, p)`` block
together with the copy-mismatch norm; the projected and Runge-Kutta methods
integrate in the original phase space directly.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field, fields, replace
from typing import Callable

import numpy as np

from . import invariants as inv_mod
from .core import defect_norm, embed
from .errors import ConfigError, NonConvergence, VortexCollision
from .hamiltonians import (
    EvalCounter,
    HamiltonianSystem,
    VortexConfig,
    canonical_from_planar,
    make_nls,
    make_testcase,
    make_vortices,
)
from .implicit_rk import gl_step, gl_tableau
from .projection import SolverConfig, semiexplicit_step
from .splitting import TaoParams, composed_step, composition_scheme, pihajoki_step, tao_step

METHODS = ("pihajoki", "tao", "semiexplicit", "gl2", "gl4", "gl6")
SYSTEMS = ("testcase", "nls", "vortex")
COMPOSITIONS = {"triple_jump": "triple_jump_4", "suzuki": "suzuki_4", "yoshida": "yoshida_6"}
MAX_RECORD_ROWS = 100_000


@dataclass(frozen=True)
class ExperimentSpec:
    """Flat description of one integration run."""

    system: str = "testcase"
    method: str = "semiexplicit"
    dt: float = 0.1
    t_end: float = 10.0
    order: int = 2
    composition: str | None = None
    omega: float = 10.0
    tol: float = 1e-12
    max_iter: int = 100
    solver: str = "simplified_newton"
    warm_start: bool = False
    d: int | None = None
    gammas: tuple | None = None
    positions: tuple | None = None
    q0: tuple | None = None
    p0: tuple | None = None
    record_stride: int | None = None
    record_state: bool = False
    name: str = "experiment"

    def validate(self) -> None:
        if self.system not in SYSTEMS:
            raise ConfigError(f"unknown system {self.system!r}, expected one of {SYSTEMS}")
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}, expected one of {METHODS}")
        if not (self.dt > 0.0 and math.isfinite(self.dt)):
            raise ConfigError("dt must be positive and finite")
        if not (self.t_end > 0.0 and math.isfinite(self.t_end)):
            raise ConfigError("t_end must be positive and finite")
        if self.dt > self.t_end * (1.0 + 1e-12):
            raise ConfigError("dt must not exceed t_end")
        if self.method.startswith("gl"):
            implied = int(self.method[2])
            if self.order not in (2, implied):
                raise ConfigError(f"order {self.order} conflicts with method {self.method}")
            if self.composition is not None:
                raise ConfigError("compositions do not apply to the Runge-Kutta methods")
        else:
            if self.order not in (2, 4, 6):
                raise ConfigError("order must be 2, 4, or 6")
            comp = self.composition
            if self.order == 2 and comp not in (None, "single"):
                raise ConfigError("order 2 admits no composition")
            if self.order == 4 and comp not in (None, "triple_jump", "suzuki"):
                raise ConfigError("order 4 uses the triple_jump or suzuki composition")
            if self.order == 6 and comp not in (None, "yoshida"):
                raise ConfigError("order 6 uses the yoshida composition")
        if self.tol <= 0.0:
            raise ConfigError("tol must be positive")
        if self.max_iter < 1:
            raise ConfigError("max_iter must be at least 1")
        if self.omega < 0.0:
            raise ConfigError("omega must be non-negative")
        if self.record_stride is not None and self.record_stride < 1:
            raise ConfigError("record_stride must be at least 1")
        self._initial_state_shape()

    def _initial_state_shape(self) -> int:
        if self.system == "testcase":
            for block in (self.q0, self.p0):
                if block is not None and len(block) != 2:
                    raise ConfigError("testcase initial blocks must have length 2")
            return 2
        if self.system == "nls":
            if self.d is None or self.d < 1:
                raise ConfigError("nls requires a positive dimension d")
            for block in (self.q0, self.p0):
                if block is None or len(block) != self.d:
                    raise ConfigError("nls requires q0 and p0 of length d")
            return self.d
        if self.gammas is None:
            raise ConfigError("vortex system requires circulations")
        n = len(self.gammas)
        if self.positions is not None:
            if len(self.positions) != n or any(len(pt) != 2 for pt in self.positions):
                raise ConfigError("vortex positions must be N pairs")
        elif self.q0 is None or self.p0 is None or len(self.q0) != n or len(self.p0) != n:
            raise ConfigError("vortex system requires planar positions or q0/p0 of length N")
        return n

    @property
    def scheme_label(self) -> str:
        if self.order == 2:
            return "single"
        if self.order == 4:
            return COMPOSITIONS[self.composition or "triple_jump"]
        return COMPOSITIONS[self.composition or "yoshida"]

    @property
    def method_label(self) -> str:
        if self.method.startswith("gl"):
            return self.method
        return f"{self.method}-{self.order}"


PRESETS: dict[str, dict] = {
    # d = 2 closed-form system, long horizon
    "testcase": dict(
        name="testcase",
        system="testcase",
        method="semiexplicit",
        q0=(-1.0, 2.0),
        p0=(1.0, -1.0),
        dt=0.1,
        t_end=1000.0,
        omega=10.0,
        tol=1e-14,
    ),
    # four vortices with mixed-sign circulations
    "vortex4": dict(
        name="vortex4",
        system="vortex",
        method="semiexplicit",
        gammas=(4.0, -3.0, -2.0, 7.0),
        positions=((1.0, 2.0), (-1.5, 1.0), (-3.0, -1.0), (2.0, 0.5)),
        dt=0.05,
        t_end=200.0,
        omega=10.0,
        tol=1e-14,
    ),
    # five-site quartic lattice benchmark
    "nls_bench": dict(
        name="nls_bench",
        system="nls",
        method="semiexplicit",
        d=5,
        q0=(3.0, 0.01, 0.01, 0.01, 0.01),
        p0=(1.0, 0.0, 0.0, 0.0, 0.0),
        dt=1e-3,
        t_end=1000.0,
        omega=100.0,
        tol=1e-10,
    ),
    # ten vortices, long benchmark horizon
    "vortex10": dict(
        name="vortex10",
        system="vortex",
        method="semiexplicit",
        gammas=(-0.5, 0.3, 0.6, 0.7, -0.2, -0.8, -0.9, -0.3, 0.7, -0.6),
        positions=(
            (3.0, -5.0),
            (-10.0, -6.0),
            (6.0, 0.0),
            (9.0, -2.0),
            (0.0, 0.0),
            (7.0, 10.0),
            (-8.0, 2.0),
            (5.0, 9.0),
            (9.0, 0.0),
            (7.0, -1.0),
        ),
        dt=0.1,
        t_end=1000.0,
        omega=7.0,
        tol=1e-10,
    ),
}

_SPEC_FIELDS = {f.name for f in fields(ExperimentSpec)}


def preset(name: str, **overrides) -> ExperimentSpec:
    """Named built-in configuration, optionally overridden field by field."""
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}, expected one of {sorted(PRESETS)}")
    return make_spec({**PRESETS[name], **overrides})


def make_spec(mapping: dict) -> ExperimentSpec:
    unknown = set(mapping) - _SPEC_FIELDS
    if unknown:
        raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
    mapping = dict(mapping)
    for key in ("gammas", "q0", "p0"):
        if mapping.get(key) is not None:
            mapping[key] = tuple(float(v) for v in mapping[key])
    if mapping.get("positions") is not None:
        mapping["positions"] = tuple(tuple(float(v) for v in pt) for pt in mapping["positions"])
    spec = ExperimentSpec(**mapping)
    spec.validate()
    return spec


def load_config(path) -> ExperimentSpec:
    """Read a flat JSON key-value document; unknown keys are rejected."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must contain a flat JSON object")
    return make_spec(data)


def build_system(spec: ExperimentSpec):
    """Instantiate the system, initial state, and its named invariants."""
    if spec.system == "testcase":
        system = make_testcase()
        q0 = spec.q0 if spec.q0 is not None else (-1.0, 2.0)
        p0 = spec.p0 if spec.p0 is not None else (1.0, -1.0)
        z0 = np.array(q0 + p0, dtype=float)
        invs = [("L", inv_mod.testcase_L()), ("Q", inv_mod.testcase_Q())]
    elif spec.system == "nls":
        system = make_nls(spec.d)
        z0 = np.array(spec.q0 + spec.p0, dtype=float)
        invs = [("mass", inv_mod.nls_mass(spec.d))]
    else:
        config = VortexConfig(spec.gammas, spec.positions)
        system = make_vortices(config)
        if spec.positions is not None:
            z0 = canonical_from_planar(config, spec.positions)
        else:
            z0 = np.array(spec.q0 + spec.p0, dtype=float)
        g = config.circulations
        invs = [
            ("L_a", inv_mod.vortex_linear_impulse_x(g)),
            ("L_b", inv_mod.vortex_linear_impulse_y(g)),
            ("Q_kappa", inv_mod.vortex_angular_impulse(g)),
        ]
    return system, z0, invs


class _Advancer:
    """Uniform stepping facade over the three method families."""

    def __init__(self, spec: ExperimentSpec, system: HamiltonianSystem, z0: np.ndarray):
        self.spec = spec
        self.counter = EvalCounter()
        self.system = system.with_counter(self.counter)
        self.extended = spec.method in ("pihajoki", "tao")
        self.itr_last = 0
        self.defect_last = 0.0
        self.converged_steps = 0
        self._mu_prev = None
        self.vf_last = 0
        if spec.method.startswith("gl"):
            self._tableau = gl_tableau(int(spec.method[2]))
            self._cfg = SolverConfig(spec.tol, spec.max_iter, spec.solver, spec.warm_start)
            self.z = np.asarray(z0, dtype=float)
        else:
            scheme = composition_scheme(spec.scheme_label)
            if spec.method == "tao":
                params = TaoParams(spec.omega)

                def base(system, dt, zeta):
                    return tao_step(system, dt, zeta, params)

                substep_cost = 4 if spec.omega != 0.0 else 3
            else:
                base = pihajoki_step
                substep_cost = 3
            self._step = composed_step(base, scheme)
            self.cost_per_iter = substep_cost * len(scheme)
            if spec.method == "semiexplicit":
                self._cfg = SolverConfig(spec.tol, spec.max_iter, spec.solver, spec.warm_start)
                self.z = np.asarray(z0, dtype=float)
            else:
                self.zeta = embed(np.asarray(z0, dtype=float))

    def state_z(self) -> np.ndarray:
        if self.extended:
            d = self.system.dim
            return np.concatenate((self.zeta[0:d], self.zeta[2 * d : 3 * d]))
        return self.z

    def advance(self, dt: float) -> None:
        before = self.counter.n_grad
        if self.extended:
            try:
                with np.errstate(over="ignore", invalid="ignore"):
                    self.zeta = self._step(self.system, dt, self.zeta)
            except OverflowError:
                self.zeta = np.full_like(self.zeta, np.nan)
            if not np.isfinite(self.zeta).all():
                raise NonConvergence("state is no longer finite; the copies separated")
            self.itr_last = 0
            self.defect_last = defect_norm(self.zeta)
            expected = self.cost_per_iter
            self.converged_steps += 1
        elif self.spec.method == "semiexplicit":
            mu0 = self._mu_prev if self._cfg.warm_start else None
            self.z, stats = semiexplicit_step(
                self.system, self._step, dt, self.z, self._cfg, mu0=mu0
            )
            self._mu_prev = stats.mu
            self.itr_last = stats.iterations
            self.defect_last = stats.defect_norm
            expected = self.cost_per_iter * stats.iterations
            self.converged_steps += int(stats.converged)
        else:
            self.z, stats = gl_step(self.system, dt, self.z, self._tableau, self._cfg)
            self.itr_last = stats.iterations
            self.defect_last = 0.0
            expected = self._tableau.stages * stats.iterations
            self.converged_steps += int(stats.converged)
        spent = self.counter.n_grad - before
        self.vf_last = spent
        if spent != expected:
            raise AssertionError(
                f"cost accounting violated: spent {spent} gradient evaluations, "
                f"expected {expected}"
            )


@dataclass
class TrajectoryRecord:
    """Recorded series of one run plus cumulative cost accounting."""

    spec: ExperimentSpec
    invariant_names: list
    steps: np.ndarray
    times: np.ndarray
    defect: np.ndarray
    energy_err: np.ndarray
    drifts: dict
    itr: np.ndarray
    vf: np.ndarray
    states: np.ndarray | None
    total_steps: int
    itr_total: int
    vf_total: int
    complete: bool = True
    failure: str | None = None
    failure_kind: str | None = None

    @property
    def rows(self) -> int:
        return self.steps.size


def _step_count(spec: ExperimentSpec) -> int:
    n = int(round(spec.t_end / spec.dt))
    if n < 1 or abs(n * spec.dt - spec.t_end) > 1e-6 * max(spec.t_end, 1.0):
        raise ConfigError("t_end must be an integer number of steps")
    return n


def run_experiment(spec: ExperimentSpec) -> TrajectoryRecord:
    """Integrate from 0 to ``t_end`` recording defect, energy error, and
    invariant drift at strided steps.

    Solver failures and vortex collisions do not raise: the partial record
    is returned flagged incomplete with the failure kind attached.
    """
    spec.validate()
    system, z0, invs = build_system(spec)
    n_steps = _step_count(spec)
    stride = spec.record_stride or max(1, math.ceil(n_steps / MAX_RECORD_ROWS))
    adv = _Advancer(spec, system, z0)

    e0 = system.energy_z(z0)
    e_scale = max(abs(e0), inv_mod.DRIFT_FLOOR)
    inv0 = [inv.evaluate(z0) for _, inv in invs]
    inv_scale = [max(abs(v), inv_mod.DRIFT_FLOOR) for v in inv0]

    steps, times, defect, energy_err, itr, vf = [], [], [], [], [], []
    drifts = {name: [] for name, _ in invs}
    states = [] if spec.record_state else None

    def record(k: int) -> None:
        z = adv.state_z()
        steps.append(k)
        times.append(k * spec.dt)
        defect.append(adv.defect_last if k else 0.0)
        energy_err.append(abs(system.energy_z(z) - e0) / e_scale)
        for (name, inv), v0, scale in zip(invs, inv0, inv_scale):
            drifts[name].append(abs(inv.evaluate(z) - v0) / scale)
        itr.append(adv.itr_last if k else 0)
        vf.append(adv.vf_last if k else 0)
        if states is not None:
            states.append(z.copy())

    failure = None
    failure_kind = None
    itr_total = 0
    record(0)
    k = 0
    try:
        for k in range(1, n_steps + 1):
            adv.advance(spec.dt)
            itr_total += adv.itr_last
            if k % stride == 0 or k == n_steps:
                record(k)
    except NonConvergence as exc:
        failure, failure_kind = str(exc), "non_convergence"
    except VortexCollision as exc:
        failure, failure_kind = str(exc), "collision"

    return TrajectoryRecord(
        spec=spec,
        invariant_names=[name for name, _ in invs],
        steps=np.array(steps, dtype=int),
        times=np.array(times),
        defect=np.array(defect),
        energy_err=np.array(energy_err),
        drifts={name: np.array(vals) for name, vals in drifts.items()},
        itr=np.array(itr, dtype=int),
        vf=np.array(vf, dtype=int),
        states=np.array(states) if states is not None else None,
        total_steps=n_steps if failure is None else max(k - 1, 0),
        itr_total=itr_total,
        vf_total=adv.counter.n_grad,
        complete=failure is None,
        failure=failure,
        failure_kind=failure_kind,
    )


def benchmark(spec: ExperimentSpec, repetitions: int) -> dict:
    """Wall-clock the bare stepping loop, averaged over repetitions.

    Diagnostics (energy and invariant evaluation, record assembly) are kept
    outside the timed region; only stepping and the solves inside it are
    measured on a monotonic clock.
    """
    if repetitions < 1:
        raise ConfigError("repetitions must be at least 1")
    spec.validate()
    system, z0, _ = build_system(spec)
    n_steps = _step_count(spec)
    elapsed = []
    itr_total = 0
    vf_total = 0
    converged = 0
    for _ in range(repetitions):
        adv = _Advancer(spec, system, z0)
        itr_total = 0
        start = time.perf_counter()
        for _ in range(n_steps):
            adv.advance(spec.dt)
            itr_total += adv.itr_last
        elapsed.append(time.perf_counter() - start)
        vf_total = adv.counter.n_grad
        converged = adv.converged_steps
    return {
        "method": spec.method_label,
        "order": spec.order if not spec.method.startswith("gl") else int(spec.method[2]),
        "dt": spec.dt,
        "t_end": spec.t_end,
        "tol": spec.tol,
        "time_s": sum(elapsed) / len(elapsed),
        "itr_avg": itr_total / n_steps,
        "vf_avg": vf_total / n_steps,
        "converged_steps": converged,
        "total_steps": n_steps,
        # exact integer tallies, handy for cost-identity checks
        "itr_total": itr_total,
        "vf_total": vf_total,
    }


def final_state(spec: ExperimentSpec) -> np.ndarray:
    """Original-space state after integrating to ``t_end`` (no recording)."""
    spec.validate()
    system, z0, _ = build_system(spec)
    adv = _Advancer(spec, system, z0)
    for _ in range(_step_count(spec)):
        adv.advance(spec.dt)
    return adv.state_z()


def convergence_study(
    spec: ExperimentSpec, dt_list, t_end: float | None = None, ref_tol: float = 1e-14
):
    """Least-squares order estimate from final-state errors over a dt sweep.

    Requires at least four step sizes in geometric progression.  The
    reference solution is a 3-stage Gauss run at ``min(dt)/20``.
    Returns ``(slope, errors)`` with ``errors`` mapping dt to the Euclidean
    final-state error.
    """
    dts = sorted((float(v) for v in dt_list), reverse=True)
    if len(dts) < 4:
        raise ConfigError("need at least four step sizes")
    ratios = [dts[i] / dts[i + 1] for i in range(len(dts) - 1)]
    if any(abs(r - ratios[0]) > 1e-9 * ratios[0] for r in ratios):
        raise ConfigError("step sizes must form a geometric progression")
    horizon = t_end if t_end is not None else spec.t_end
    ref_spec = replace(
        spec,
        method="gl6",
        order=6,
        composition=None,
        dt=min(dts) / 20.0,
        t_end=horizon,
        tol=ref_tol,
        max_iter=500,
    )
    z_ref = final_state(ref_spec)
    errors = {}
    for dt in dts:
        z = final_state(replace(spec, dt=dt, t_end=horizon))
        errors[dt] = max(float(np.linalg.norm(z - z_ref)), 1e-16)
    slope = float(
        np.polyfit(np.log(list(errors.keys())), np.log(list(errors.values())), 1)[0]
    )
    return slope, errors


# ---------------------------------------------------------------------------
# Flat-file emission


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def emit_csv(record: TrajectoryRecord, path) -> None:
    """Write the record using the documented column schema, 17 significant
    digits, `,` separator, `.` decimal."""
    names = record.invariant_names
    header = ["step", "t", "defect_norm", "energy_rel_err"]
    header += [f"{name}_rel_err" for name in names]
    header += ["itr", "vf_evals"]
    d = None
    if record.states is not None and record.rows:
        d = record.states.shape[1] // 2
        header += [f"q{i + 1}" for i in range(d)] + [f"p{i + 1}" for i in range(d)]
    lines = [",".join(header)]
    for i in range(record.rows):
        row = [
            str(int(record.steps[i])),
            _fmt(record.times[i]),
            _fmt(record.defect[i]),
            _fmt(record.energy_err[i]),
        ]
        row += [_fmt(record.drifts[name][i]) for name in names]
        row += [str(int(record.itr[i])), str(int(record.vf[i]))]
        if d is not None:
            row += [_fmt(v) for v in record.states[i]]
        lines.append(",".join(row))
    _write_text(path, "\n".join(lines) + "\n")


def emit_benchmark_csv(rows: list, path) -> None:
    header = "method,order,dt,t_end,tol,time_s,itr_avg,vf_avg,converged_steps,total_steps"
    lines = [header]
    for row in rows:
        lines.append(
            ",".join(
                [
                    str(row["method"]),
                    str(int(row["order"])),
                    _fmt(row["dt"]),
                    _fmt(row["t_end"]),
                    _fmt(row["tol"]),
                    _fmt(row["time_s"]),
                    _fmt(row["itr_avg"]),
                    _fmt(row["vf_avg"]),
                    str(int(row["converged_steps"])),
                    str(int(row["total_steps"])),
                ]
            )
        )
    _write_text(path, "\n".join(lines) + "\n")


def load_csv(path) -> dict:
    """Parse a CSV written by :func:`emit_csv` into column arrays."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = [line.strip() for line in fh if line.strip()]
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    header = lines[0].split(",")
    columns = {name: [] for name in header}
    for line in lines[1:]:
        for name, cell in zip(header, line.split(",")):
            columns[name].append(float(cell))
    return {name: np.array(vals) for name, vals in columns.items()}


def emit_svg(record: TrajectoryRecord, path) -> None:
    """Render defect and per-invariant drift panels with log-scale y axes.

    Zero values cannot be shown on a log axis and are omitted from the
    polylines (the CSV keeps them).
    """
    panels = [("defect", record.times, record.defect)]
    for name in record.invariant_names:
        panels.append((f"{name} drift", record.times, record.drifts[name]))
    width, height, margin = 360, 280, 45
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width * len(panels)}" '
        f'height="{height}" font-family="sans-serif" font-size="11">'
    ]
    for idx, (title, ts, values) in enumerate(panels):
        x0 = idx * width + margin
        y0 = margin
        plot_w = width - 2 * margin
        plot_h = height - 2 * margin
        keep = values > 0.0
        parts.append(
            f'<rect x="{x0}" y="{y0}" width="{plot_w}" height="{plot_h}" '
            'fill="none" stroke="black"/>'
        )
        parts.append(
            f'<text x="{x0 + plot_w / 2:.1f}" y="{y0 - 8}" text-anchor="middle">{title}</text>'
        )
        if keep.any():
            logv = np.log10(values[keep])
            tk = ts[keep]
            lo, hi = float(logv.min()), float(logv.max())
            if hi - lo < 1e-12:
                lo, hi = lo - 1.0, hi + 1.0
            t_lo, t_hi = float(ts.min()), float(ts.max())
            t_span = (t_hi - t_lo) or 1.0
            xs = x0 + (tk - t_lo) / t_span * plot_w
            ys = y0 + (hi - logv) / (hi - lo) * plot_h
            points = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(xs, ys))
            parts.append(f'<polyline points="{points}" fill="none" stroke="#1f77b4"/>')
            parts.append(
                f'<text x="{x0 - 6}" y="{y0 + 10}" text-anchor="end">1e{hi:.1f}</text>'
            )
            parts.append(
                f'<text x="{x0 - 6}" y="{y0 + plot_h}" text-anchor="end">1e{lo:.1f}</text>'
            )
        else:
            parts.append(
                f'<text x="{x0 + plot_w / 2:.1f}" y="{y0 + plot_h / 2:.1f}" '
                'text-anchor="middle" fill="#777">all values zero</text>'
            )
        parts.append(
            f'<text x="{x0 + plot_w / 2:.1f}" y="{height - 10}" text-anchor="middle">t</text>'
        )
    parts.append("</svg>")
    _write_text(path, "\n".join(parts) + "\n")


def _write_text(path, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc}") from exc
