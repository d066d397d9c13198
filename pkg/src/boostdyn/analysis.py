"""Error metrics, model comparison tables, parameter sweeps and
overshoot-mitigation paths over the component space."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np

from . import ebm, refmodel, tfm_line, tfm_load
from .circuit import (
    ConverterParams,
    ModelDomainError,
    ResponseMetrics,
    StepEvent,
    StepKind,
    Waveform,
    validate_params,
)
from .oracle import SwitchedTrace, simulate_averaged, simulate_switched
from .steady import steady_output

#: measured reference scalars (steady V, peak V) for the two bench scenarios
AER_INPUT_STEP = (5.35, 6.74)
AER_LOAD_STEP = (8.80, 13.43)

SWEEP_AXES = ("v_i", "d", "l", "c", "r_0", "r_l", "r_c", "r_m", "v_d")


class ZeroReference(ModelDomainError):
    """Relative error against a zero reference value is undefined."""


class GridMismatch(ModelDomainError):
    """Waveforms must share t0, dt and length to be compared pointwise."""


class NotSettled(ModelDomainError):
    """The waveform tail still moves too much to call a steady value."""


class UnsupportedAxisPair(ValueError):
    """Sweep axes must be two distinct converter parameters."""


class ConstraintInfeasible(ModelDomainError):
    """Descent constraint projection failed to converge."""


def error_percent(y_actual: float, y_fit: float) -> float:
    """|y - y_hat| / y * 100."""
    if y_actual == 0:
        raise ZeroReference("reference value is zero")
    return abs(y_actual - y_fit) / abs(y_actual) * 100.0


def rmse(actual: Waveform, fit: Waveform) -> float:
    """Root-mean-square sample error between two waveforms on one grid."""
    if (
        actual.t0 != fit.t0
        or actual.dt != fit.dt
        or actual.samples.size != fit.samples.size
    ):
        raise GridMismatch("waveforms are sampled on different grids")
    diff = actual.samples - fit.samples
    return float(np.sqrt(np.mean(diff * diff)))


def extract_metrics(w: Waveform, t_event: float) -> ResponseMetrics:
    """Steady value, refined peak and peak time of a sampled waveform.

    The steady value averages the final 10 percent of samples, which must
    vary by less than 0.5 percent; the peak is the post-event maximum
    sharpened by three-point quadratic interpolation.
    """
    tail = w.samples[-max(1, w.samples.size // 10):]
    mean = float(np.mean(tail))
    span = float(np.max(tail) - np.min(tail))
    if mean == 0 or span / abs(mean) >= 0.005:
        raise NotSettled("waveform tail varies by >= 0.5% of its mean")

    start = max(0, int(math.ceil((t_event - w.t0) / w.dt)))
    seg = w.samples[start:]
    k = int(np.argmax(seg))
    v_max = float(seg[k])
    t_max = w.t0 + (start + k) * w.dt
    if 0 < k < seg.size - 1:
        y0, y1, y2 = float(seg[k - 1]), float(seg[k]), float(seg[k + 1])
        denom = y0 - 2.0 * y1 + y2
        if denom < 0:
            shift = 0.5 * (y0 - y2) / denom
            v_max = y1 - 0.25 * (y0 - y2) * shift
            t_max += shift * w.dt
    t_p = max(0.0, t_max - t_event)
    overshoot = 100.0 * (v_max - mean) / mean
    return ResponseMetrics(mean, v_max, t_p, overshoot)


# --- model comparison ------------------------------------------------------

MODEL_ROWS = ("ebm", "tfm", "fr", "avg+par", "avg-par", "switched")


@dataclass(frozen=True)
class ModelRow:
    model: str
    v_steady: float
    v_max: float
    t_p: Optional[float]
    steady_error_pct: Optional[float] = None
    dynamic_error_pct: Optional[float] = None
    rmse_v: Optional[float] = None
    flags: tuple[str, ...] = ()


@dataclass(frozen=True)
class ComparisonTable:
    event: StepEvent
    reference: str
    rows: tuple[ModelRow, ...]

    def row(self, model: str) -> ModelRow:
        for r in self.rows:
            if r.model == model:
                return r
        raise KeyError(model)


def _closed_form_line_waveform(
    p: ConverterParams, event: StepEvent, grid: Waveform, model: str
) -> Waveform:
    """Sample a closed-form input-step response on an existing time grid."""
    t = grid.times
    rel = np.clip(t - event.t_event, 0.0, None)
    base = 0.0
    if event.value_before > 0:
        base = steady_output(replace(p, v_i=event.value_before))
    if model == "ebm":
        form = ebm.startup_form(p, v_before=event.value_before)
        post = ebm.ebm_response(form, rel)
    elif model == "tfm":
        tf = tfm_line.line_tf_coefficients(p)
        post = base + tfm_line.line_step_response(tf, event.delta, rel)
    elif model == "fr":
        fr_base = event.value_before / (1.0 - p.d)
        post = fr_base + refmodel.fr_step_response(p, event.delta, rel)
    else:
        raise ValueError(model)
    samples = np.where(t < event.t_event, base, post)
    return Waveform(t0=grid.t0, dt=grid.dt, samples=samples)


def _closed_form_load_waveform(
    p: ConverterParams, event: StepEvent, grid: Waveform, model: str
) -> Waveform:
    t = grid.times
    rel = np.clip(t - event.t_event, 0.0, None)
    pre = replace(p, r_0=event.value_before)
    base = steady_output(pre)
    if model == "ebm":
        form = ebm.load_step_form(p, event.value_before, event.value_after)
        post = ebm.ebm_response(form, rel)
    elif model == "tfm":
        post = tfm_load.load_response(pre, event.delta, rel)
    elif model == "fr":
        level = p.v_i / (1.0 - p.d)
        post = np.full_like(rel, level)
        base = level
    else:
        raise ValueError(model)
    samples = np.where(t < event.t_event, base, post)
    return Waveform(t0=grid.t0, dt=grid.dt, samples=samples)


def closed_form_metrics(p: ConverterParams, event: StepEvent, model: str) -> ResponseMetrics:
    """Analytic response metrics for one model and one event."""
    if event.kind is StepKind.INPUT_VOLTAGE:
        if model == "ebm":
            return ebm.ebm_metrics(ebm.startup_form(p, v_before=event.value_before))
        if model == "tfm":
            tf = tfm_line.line_tf_coefficients(p)
            base = 0.0
            if event.value_before > 0:
                base = steady_output(replace(p, v_i=event.value_before))
            if not tf.is_underdamped:
                v_inf = base + event.delta * tf.dc_gain
                return ResponseMetrics(v_inf, v_inf, None, 0.0, flags=("overdamped",))
            t_p = tfm_line.line_peak_time(tf)
            v_steady = base + event.delta * tf.dc_gain
            v_max = base + tfm_line.line_peak_voltage(tf, event.delta)
            over = 100.0 * (v_max - v_steady) / v_steady if v_steady else 0.0
            return ResponseMetrics(v_steady, v_max, t_p, over)
        if model == "fr":
            tf = refmodel.fr_tf(p)
            base = event.value_before / (1.0 - p.d)
            t_p = tfm_line.line_peak_time(tf)
            v_steady = base + event.delta * tf.dc_gain
            v_max = base + tfm_line.line_peak_voltage(tf, event.delta)
            over = 100.0 * (v_max - v_steady) / v_steady if v_steady else 0.0
            return ResponseMetrics(v_steady, v_max, t_p, over)
        raise ValueError(model)
    if model == "ebm":
        return ebm.ebm_metrics(ebm.load_step_form(p, event.value_before, event.value_after))
    if model == "tfm":
        return tfm_load.load_metrics(replace(p, r_0=event.value_before), event.delta)
    if model == "fr":
        level = p.v_i / (1.0 - p.d)
        return ResponseMetrics(level, level, None, 0.0, flags=("no-transient",))
    raise ValueError(model)


def default_comparison_t_end(p: ConverterParams, event: StepEvent) -> float:
    """Whole-cycle horizon long enough for the slowest row to settle.

    The parasitic-free rows decay at m1/(2 m2) with only the load damping
    them, so the horizon is set by whichever of the two coefficient sets
    rings longer.
    """
    r_post = event.value_after if event.kind is StepKind.LOAD_RESISTANCE else p.r_0
    ideal = replace(p, r_l=0.0, r_c=0.0, r_m=0.0, v_d=0.0)
    rates = []
    for q in (p, ideal):
        co = ebm.ode_coefficients(q, r_0=r_post)
        rates.append(co.m1 / (2.0 * co.m2))
    settle = 12.0 / min(rates)
    period = p.period
    return (math.ceil((event.t_event + settle) / period) + 20) * period


def compare_models(
    p: ConverterParams,
    event: StepEvent,
    reference: str = "switched",
    dt: Optional[float] = None,
    t_end: Optional[float] = None,
    steps_per_cycle: int = 200,
) -> ComparisonTable:
    """One row per model: closed forms, both averaged oracles and the
    switched oracle, each with metrics and errors against the reference.

    ``reference`` is a row name or "aer" to score against the embedded
    measured scalars (no waveform, so no rmse in that mode).
    """
    validate_params(p)
    period = p.period
    if t_end is None:
        t_end = default_comparison_t_end(p, event)
    if dt is None:
        dt = period / steps_per_cycle

    if event.kind is StepKind.INPUT_VOLTAGE:
        sim_p = replace(p, v_i=event.value_before)
        initial = "zero"
        make_wave = _closed_form_line_waveform
    else:
        sim_p = replace(p, r_0=event.value_before)
        initial = "steady"
        make_wave = _closed_form_load_waveform

    trace = simulate_switched(sim_p, [event], steps_per_cycle, t_end, initial_state=initial)
    grid = Waveform(0.0, dt, np.zeros(int(round(t_end / dt)) + 1))

    waveforms: dict[str, Waveform] = {}
    metrics: dict[str, ResponseMetrics] = {}
    flags: dict[str, tuple[str, ...]] = {}

    for model in ("ebm", "tfm", "fr"):
        waveforms[model] = make_wave(p, event, grid, model)
        m = closed_form_metrics(p, event, model)
        metrics[model] = m
        flags[model] = m.flags

    for name, parasitics in (("avg+par", True), ("avg-par", False)):
        wave = simulate_averaged(
            sim_p, [event], dt, t_end, include_parasitics=parasitics, initial_state=initial
        )
        waveforms[name] = wave
        metrics[name] = extract_metrics(wave, event.t_event)
        flags[name] = ()

    cyc = trace.cycle_averaged()
    metrics["switched"] = extract_metrics(cyc, event.t_event)
    flags["switched"] = trace.flags
    # switched rmse is computed on the cycle-averaged grid against resampled rows
    waveforms["switched"] = cyc

    if reference == "aer":
        ref_steady, ref_peak = (
            AER_INPUT_STEP if event.kind is StepKind.INPUT_VOLTAGE else AER_LOAD_STEP
        )
        ref_wave = None
    else:
        ref_m = metrics[reference]
        ref_steady, ref_peak = ref_m.v_steady, ref_m.v_max
        ref_wave = waveforms[reference]

    rows = []
    for model in MODEL_ROWS:
        m = metrics[model]
        row_rmse = None
        if ref_wave is not None and model != reference:
            a, b = _common_grid(ref_wave, waveforms[model])
            row_rmse = rmse(a, b)
        rows.append(
            ModelRow(
                model=model,
                v_steady=m.v_steady,
                v_max=m.v_max,
                t_p=m.t_p,
                steady_error_pct=error_percent(ref_steady, m.v_steady),
                dynamic_error_pct=error_percent(ref_peak, m.v_max),
                rmse_v=row_rmse,
                flags=flags[model],
            )
        )
    return ComparisonTable(event=event, reference=reference, rows=tuple(rows))


def _common_grid(ref: Waveform, other: Waveform) -> tuple[Waveform, Waveform]:
    """Resample ``other`` onto ``ref``'s grid by linear interpolation."""
    if ref.t0 == other.t0 and ref.dt == other.dt and len(ref) == len(other):
        return ref, other
    resampled = np.interp(ref.times, other.times, other.samples)
    return ref, Waveform(ref.t0, ref.dt, resampled)


# --- sweeps ----------------------------------------------------------------


@dataclass(frozen=True)
class SweepAxis:
    name: str
    lo: float
    hi: float
    n: int
    log: bool = False

    @property
    def values(self) -> np.ndarray:
        if self.log:
            return np.logspace(math.log10(self.lo), math.log10(self.hi), self.n)
        return np.linspace(self.lo, self.hi, self.n)


@dataclass(frozen=True)
class SweepGrid:
    axis1: SweepAxis
    axis2: SweepAxis
    metric: str
    values: np.ndarray   # shape (axis1.n, axis2.n)
    valid: np.ndarray    # bool mask, same shape


def _metric_for(p: ConverterParams, model: str, metric: str) -> float:
    m = closed_form_metrics(
        p, StepEvent(StepKind.INPUT_VOLTAGE, 0.0, p.v_i), model
    )
    if metric == "v_max":
        return m.v_max
    if metric == "v_steady":
        return m.v_steady
    if metric == "t_p":
        return math.nan if m.t_p is None else m.t_p
    raise ValueError(f"unknown sweep metric {metric!r}")


def sweep(
    p: ConverterParams,
    axis1: SweepAxis,
    axis2: SweepAxis,
    model: str = "tfm",
    metric: str = "v_max",
) -> SweepGrid:
    """Startup-overshoot response surface over two component axes.

    Cells whose parameters fail validation (or land outside a model's
    domain) are marked invalid rather than interpolated.  BOOSTDYN_THREADS
    caps the worker count; evaluation order never affects the result.
    """
    if axis1.name not in SWEEP_AXES or axis2.name not in SWEEP_AXES:
        raise UnsupportedAxisPair(f"axes must be drawn from {SWEEP_AXES}")
    if axis1.name == axis2.name:
        raise UnsupportedAxisPair("axes must differ")
    if axis1.n > 512 or axis2.n > 512:
        raise UnsupportedAxisPair("axis resolution capped at 512")
    if model not in ("ebm", "tfm"):
        raise ValueError("sweep models are the two closed forms: 'ebm' or 'tfm'")

    v1 = axis1.values
    v2 = axis2.values
    values = np.full((axis1.n, axis2.n), np.nan)
    valid = np.zeros((axis1.n, axis2.n), dtype=bool)

    def cell(idx: tuple[int, int]) -> tuple[int, int, float, bool]:
        i, j = idx
        try:
            q = replace(p, **{axis1.name: float(v1[i]), axis2.name: float(v2[j])})
            val = _metric_for(q, model, metric)
            return i, j, val, bool(np.isfinite(val))
        except (ValueError, ModelDomainError):
            return i, j, math.nan, False

    indices = [(i, j) for i in range(axis1.n) for j in range(axis2.n)]
    workers = _thread_cap()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(cell, indices))
    else:
        results = [cell(idx) for idx in indices]
    for i, j, val, ok in results:
        values[i, j] = val
        valid[i, j] = ok
    return SweepGrid(axis1=axis1, axis2=axis2, metric=metric, values=values, valid=valid)


def _thread_cap() -> int:
    raw = os.environ.get("BOOSTDYN_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


# --- descent ---------------------------------------------------------------

CONSTRAINTS = (None, "constant-steady-output", "constant-omega0", "parasitic-loss-bound")


@dataclass(frozen=True)
class DescentStep:
    params: ConverterParams
    v_max: float


@dataclass(frozen=True)
class DescentPath:
    steps: tuple[DescentStep, ...]
    constraint: Optional[str]

    @property
    def v_max_series(self) -> np.ndarray:
        return np.array([s.v_max for s in self.steps])


def _project(
    p: ConverterParams, constraint: Optional[str], target_steady: float,
    target_lc: float, r_l_budget: float,
) -> ConverterParams:
    if constraint is None:
        return p
    if constraint == "constant-omega0":
        scale = math.sqrt(target_lc / (p.l * p.c))
        return replace(p, l=p.l * scale, c=p.c * scale)
    if constraint == "parasitic-loss-bound":
        return replace(p, r_l=min(p.r_l, r_l_budget))
    if constraint == "constant-steady-output":
        return _resolve_duty(p, target_steady)
    raise ValueError(f"unknown constraint {constraint!r}")


def _resolve_duty(p: ConverterParams, target: float, tol: float = 1e-6) -> ConverterParams:
    """Bisect the duty cycle so steady_output(p) hits ``target``."""

    def gap(d: float) -> float:
        return steady_output(replace(p, d=d)) - target

    lo, hi = None, None
    width = 0.02
    d0 = p.d
    g0 = gap(d0)
    if abs(g0) <= tol:
        return p
    # expand a bracket around the current duty
    for _ in range(60):
        d_lo = max(1e-4, d0 - width)
        d_hi = min(1.0 - 1e-4, d0 + width)
        g_lo, g_hi = gap(d_lo), gap(d_hi)
        if g_lo == 0.0:
            return replace(p, d=d_lo)
        if g_hi == 0.0:
            return replace(p, d=d_hi)
        if g_lo < 0.0 < g_hi:
            lo, hi = d_lo, d_hi
            break
        if g_hi < 0.0 < g_lo:
            lo, hi = d_hi, d_lo
            break
        width *= 1.6
        if d_lo <= 1e-4 and d_hi >= 1.0 - 1e-4:
            break
    if lo is None:
        raise ConstraintInfeasible("no duty cycle reaches the target steady output")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        g = gap(mid)
        if abs(g) <= tol:
            return replace(p, d=mid)
        if g > 0:
            hi = mid
        else:
            lo = mid
    raise ConstraintInfeasible("duty bisection failed to converge")


def steepest_descent(
    p: ConverterParams,
    free: Sequence[str],
    constraint: Optional[str] = None,
    max_steps: int = 50,
    model: str = "tfm",
    r_l_budget: Optional[float] = None,
) -> DescentPath:
    """Greedy overshoot descent over two or three free component axes.

    The gradient of the startup peak is taken by central differences in
    log-parameter space; each move starts at 5 percent of the current
    magnitudes and is halved until the (projected) step strictly lowers
    the peak.  Constraints are enforced by projection after every step.
    """
    validate_params(p)
    if not 2 <= len(free) <= 3:
        raise ValueError("free must name two or three parameters")
    for name in free:
        if name not in SWEEP_AXES:
            raise UnsupportedAxisPair(f"{name!r} is not a sweepable parameter")
    if constraint not in CONSTRAINTS:
        raise ValueError(f"constraint must be one of {CONSTRAINTS}")

    target_steady = steady_output(p)
    target_lc = p.l * p.c
    budget = p.r_l if r_l_budget is None else r_l_budget

    def objective(q: ConverterParams) -> float:
        return _metric_for(q, model, "v_max")

    current = _project(p, constraint, target_steady, target_lc, budget)
    v_now = objective(current)
    v_init = v_now
    steps = [DescentStep(current, v_now)]

    h = 1e-4
    for _ in range(max_steps):
        grad = np.zeros(len(free))
        for k, name in enumerate(free):
            theta = getattr(current, name)
            up = replace(current, **{name: theta * math.exp(h)})
            dn = replace(current, **{name: theta * math.exp(-h)})
            grad[k] = (objective(up) - objective(dn)) / (2.0 * h)
        norm = float(np.linalg.norm(grad))
        if norm < 1e-6 * v_now:
            break
        direction = -grad / norm

        accepted = False
        step_size = 0.05
        for _ in range(40):
            cand = current
            try:
                for k, name in enumerate(free):
                    theta = getattr(cand, name)
                    cand = replace(cand, **{name: theta * math.exp(step_size * direction[k])})
                validate_params(cand)
                cand = _project(cand, constraint, target_steady, target_lc, budget)
                v_cand = objective(cand)
            except (ValueError, ModelDomainError):
                step_size *= 0.5
                continue
            if v_cand < v_now - 1e-9 * v_init:
                current, v_now = cand, v_cand
                steps.append(DescentStep(current, v_now))
                accepted = True
                break
            step_size *= 0.5
        if not accepted:
            break
    return DescentPath(steps=tuple(steps), constraint=constraint)


# --- scenario prediction ---------------------------------------------------


@dataclass(frozen=True)
class ScenarioPrediction:
    before: ResponseMetrics
    after: ResponseMetrics

    @property
    def v_max_reduction(self) -> float:
        return self.before.v_max - self.after.v_max

    @property
    def v_steady_change(self) -> float:
        return self.after.v_steady - self.before.v_steady


def scenario_predict(
    before: ConverterParams, after: ConverterParams, event: StepEvent
) -> ScenarioPrediction:
    """Transfer-function prediction of a component change: same event, both
    parameter sets, with the overshoot reduction and steady-state cost."""
    validate_params(before)
    validate_params(after)
    return ScenarioPrediction(
        before=closed_form_metrics(before, event, "tfm"),
        after=closed_form_metrics(after, event, "tfm"),
    )
