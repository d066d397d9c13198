"""Numerical ground truth: fixed-step integrators for the averaged model,
a cycle-by-cycle switched simulator, and an energy-conservation audit.

Everything here is deterministic: classical fourth-order steps on a fixed
grid, no adaptivity, so repeated runs produce identical waveforms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .circuit import (
    ConverterParams,
    ModelDomainError,
    StepEvent,
    StepKind,
    Waveform,
    validate_params,
)


class StepTooLarge(ModelDomainError):
    """Integration step too coarse for the circuit's fastest dynamics."""


class NonFiniteState(ModelDomainError):
    """The integrator diverged to a non-finite state."""


class WindowOutOfRange(ModelDomainError):
    """Audit window falls outside the simulated trace."""


def integrate_second_order(
    m2: float,
    m1: float,
    m0: float,
    forcing: float,
    v0: float,
    dv0: float,
    dt: float,
    t_end: float,
) -> Waveform:
    """Fixed-step integration of  m2 v'' + m1 v' + m0 v = forcing.

    Serves as the independent oracle for every closed-form second-order
    response in the library.
    """
    if dt <= 0 or t_end <= 0:
        raise ValueError("dt and t_end must be positive")
    n = int(round(t_end / dt))
    out = np.empty(n + 1)
    v, dv = float(v0), float(dv0)
    out[0] = v
    for i in range(n):
        a1 = (forcing - m1 * dv - m0 * v) / m2
        v2, dv2 = v + 0.5 * dt * dv, dv + 0.5 * dt * a1
        a2 = (forcing - m1 * dv2 - m0 * v2) / m2
        v3, dv3 = v + 0.5 * dt * dv2, dv + 0.5 * dt * a2
        a3 = (forcing - m1 * dv3 - m0 * v3) / m2
        v4, dv4 = v + dt * dv3, dv + dt * a3
        a4 = (forcing - m1 * dv4 - m0 * v4) / m2
        v += (dt / 6.0) * (dv + 2.0 * dv2 + 2.0 * dv3 + dv4)
        dv += (dt / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
        out[i + 1] = v
    if not np.all(np.isfinite(out)):
        raise NonFiniteState("second-order integration diverged")
    return Waveform(t0=0.0, dt=dt, samples=out)


def _initial_averaged_state(p: ConverterParams, initial_state, parasitics: bool):
    if isinstance(initial_state, tuple):
        return np.array(initial_state, dtype=float)
    if initial_state == "zero":
        return np.zeros(2)
    if initial_state == "steady":
        one_d = 1.0 - p.d
        r_l = p.r_l if parasitics else 0.0
        r_m = p.r_m if parasitics else 0.0
        v_d = p.v_d if parasitics else 0.0
        den = one_d**2 * p.r_0 + r_l + p.d * r_m
        v = (p.v_i - one_d * v_d) * one_d * p.r_0 / den
        return np.array([v / (one_d * p.r_0), v])
    raise ValueError("initial_state must be 'zero', 'steady' or an (i_l, v) tuple")


def simulate_averaged(
    p: ConverterParams,
    events: Sequence[StepEvent],
    dt: float,
    t_end: float,
    include_parasitics: bool = True,
    initial_state="zero",
) -> Waveform:
    """Fixed-step integration of the two-state averaged model.

    States are the inductor current and the averaged voltage; with
    parasitics on, the reported output adds the capacitor-ESR feedthrough
    r_c * C * dv/dt.  Events swap the input voltage or the load at the
    nearest sample boundary.
    """
    validate_params(p)
    if t_end <= 0:
        raise ValueError("t_end must be > 0")
    dt_max = min(math.sqrt(p.l * p.c) / 100.0, 1.0 / (20.0 * p.f_sw))
    if dt > dt_max:
        raise StepTooLarge(f"dt={dt:g} exceeds stability budget {dt_max:g}")

    r_l = p.r_l if include_parasitics else 0.0
    r_m = p.r_m if include_parasitics else 0.0
    r_c = p.r_c if include_parasitics else 0.0
    v_d = p.v_d if include_parasitics else 0.0
    one_d = 1.0 - p.d
    l_ind, cap = p.l, p.c
    r_series = r_l + p.d * r_m

    n = int(round(t_end / dt))
    switch_at: dict[int, list[StepEvent]] = {}
    for ev in events:
        switch_at.setdefault(int(round(ev.t_event / dt)), []).append(ev)

    v_i = p.v_i
    r_0 = p.r_0
    i_l, v = (float(x) for x in _initial_averaged_state(p, initial_state, include_parasitics))
    out = np.empty(n + 1)

    for idx in range(n + 1):
        for ev in switch_at.get(idx, ()):
            if ev.kind is StepKind.INPUT_VOLTAGE:
                v_i = ev.value_after
            else:
                r_0 = ev.value_after
        dv = (one_d * i_l - v / r_0) / cap
        out[idx] = v + r_c * cap * dv
        if idx == n:
            break
        # classical fourth-order step, unrolled for the two states
        di1 = (v_i - one_d * (v + v_d) - i_l * r_series) / l_ind
        dv1 = (one_d * i_l - v / r_0) / cap
        i2, v2 = i_l + 0.5 * dt * di1, v + 0.5 * dt * dv1
        di2 = (v_i - one_d * (v2 + v_d) - i2 * r_series) / l_ind
        dv2 = (one_d * i2 - v2 / r_0) / cap
        i3, v3 = i_l + 0.5 * dt * di2, v + 0.5 * dt * dv2
        di3 = (v_i - one_d * (v3 + v_d) - i3 * r_series) / l_ind
        dv3 = (one_d * i3 - v3 / r_0) / cap
        i4, v4 = i_l + dt * di3, v + dt * dv3
        di4 = (v_i - one_d * (v4 + v_d) - i4 * r_series) / l_ind
        dv4 = (one_d * i4 - v4 / r_0) / cap
        i_l += (dt / 6.0) * (di1 + 2.0 * di2 + 2.0 * di3 + di4)
        v += (dt / 6.0) * (dv1 + 2.0 * dv2 + 2.0 * dv3 + dv4)
        if not (math.isfinite(i_l) and math.isfinite(v)):
            raise NonFiniteState(f"averaged simulation diverged at step {idx}")
    return Waveform(t0=0.0, dt=dt, samples=out)


@dataclass(frozen=True)
class SwitchedState:
    """Instantaneous switched-circuit state at one substep."""

    i_l: float
    v_c: float
    v1: float
    v_out: float
    phase: str  # "on" | "off"


@dataclass(frozen=True)
class SwitchedTrace:
    """Full per-substep record of a switched simulation.

    ``waveform`` exposes the output voltage on the simulation grid; the
    state arrays feed the energy audit.
    """

    dt: float
    steps_per_cycle: int
    i_l: np.ndarray
    v_c: np.ndarray
    v_out: np.ndarray
    i_c: np.ndarray
    on_phase: np.ndarray
    v_i_applied: np.ndarray
    r_0_applied: np.ndarray
    flags: tuple[str, ...] = field(default=())

    @property
    def waveform(self) -> Waveform:
        return Waveform(t0=0.0, dt=self.dt, samples=self.v_out)

    def cycle_averaged(self) -> Waveform:
        """Per-cycle means of the output voltage; settles even with ripple."""
        spc = self.steps_per_cycle
        n_cycles = (self.v_out.size - 1) // spc
        means = np.array(
            [self.v_out[k * spc : (k + 1) * spc].mean() for k in range(n_cycles)]
        )
        return Waveform(t0=0.5 * spc * self.dt, dt=spc * self.dt, samples=means)

    def state_at(self, index: int, p: ConverterParams) -> SwitchedState:
        on = bool(self.on_phase[index])
        i_l = float(self.i_l[index])
        v_out = float(self.v_out[index])
        # switch node: on -> MOSFET drop, off -> output plus diode drop
        v1 = i_l * p.r_m if on else v_out + p.v_d
        return SwitchedState(
            i_l=i_l,
            v_c=float(self.v_c[index]),
            v1=v1,
            v_out=v_out,
            phase="on" if on else "off",
        )


def _output_node(p: ConverterParams, i_l: float, v_c: float, on: bool, r_0: float):
    """Resistive node solve: (v_out, i_c) for the active phase."""
    if on:
        i_c = -v_c / (r_0 + p.r_c)
        v_out = v_c * r_0 / (r_0 + p.r_c)
    else:
        i_c = (i_l * r_0 - v_c) / (r_0 + p.r_c)
        v_out = r_0 * (v_c + p.r_c * i_l) / (r_0 + p.r_c)
    return v_out, i_c


def simulate_switched(
    p: ConverterParams,
    events: Sequence[StepEvent],
    steps_per_cycle: int,
    t_end: float,
    initial_state="zero",
) -> SwitchedTrace:
    """Cycle-by-cycle piecewise-linear simulation of the two switch modes.

    On phase: the source charges the inductor through r_l + r_m while the
    capacitor discharges into the load through its ESR.  Off phase: the
    inductor feeds the output node through the diode.  The inductor current
    is clamped at zero when the diode blocks (discontinuous conduction),
    and the trace is flagged "dcm" when that happens.
    """
    validate_params(p)
    if steps_per_cycle < 50:
        raise ValueError("steps_per_cycle must be >= 50")
    period = p.period
    if t_end < 20.0 * period:
        raise ValueError("t_end must cover at least 20 switching periods")

    dt = period / steps_per_cycle
    n = int(round(t_end / dt))
    on_steps = int(round(p.d * steps_per_cycle))

    switch_at: dict[int, list[StepEvent]] = {}
    for ev in events:
        switch_at.setdefault(int(round(ev.t_event / dt)), []).append(ev)

    if isinstance(initial_state, tuple):
        i_l, v_c = float(initial_state[0]), float(initial_state[1])
    elif initial_state == "zero":
        i_l, v_c = 0.0, 0.0
    elif initial_state == "steady":
        from .steady import steady_inductor_current, steady_output

        i_l = steady_inductor_current(p).i_inductor
        v_c = steady_output(p)
    else:
        raise ValueError("initial_state must be 'zero', 'steady' or an (i_l, v_c) tuple")

    v_i = p.v_i
    r_0 = p.r_0
    arr_i = np.empty(n + 1)
    arr_vc = np.empty(n + 1)
    arr_vo = np.empty(n + 1)
    arr_ic = np.empty(n + 1)
    arr_on = np.empty(n + 1, dtype=bool)
    arr_vi = np.empty(n + 1)
    arr_r0 = np.empty(n + 1)
    dcm = False

    l_ind, cap, r_c = p.l, p.c, p.r_c
    r_on = p.r_l + p.r_m
    r_l, v_d = p.r_l, p.v_d

    for idx in range(n + 1):
        for ev in switch_at.get(idx, ()):
            if ev.kind is StepKind.INPUT_VOLTAGE:
                v_i = ev.value_after
            else:
                r_0 = ev.value_after
        on = (idx % steps_per_cycle) < on_steps
        v_out, i_c = _output_node(p, i_l, v_c, on, r_0)
        arr_i[idx] = i_l
        arr_vc[idx] = v_c
        arr_vo[idx] = v_out
        arr_ic[idx] = i_c
        arr_on[idx] = on
        arr_vi[idx] = v_i
        arr_r0[idx] = r_0
        if idx == n:
            break

        rsum = r_0 + r_c

        def deriv(i: float, v: float) -> tuple[float, float]:
            if on:
                ic = -v / rsum
                di = (v_i - i * r_on) / l_ind
            else:
                ic = (i * r_0 - v) / rsum
                vo = r_0 * (v + r_c * i) / rsum
                if i <= 0.0 and (v_i - v_d - vo) < 0.0:
                    di = 0.0
                else:
                    di = (v_i - v_d - vo - i * r_l) / l_ind
            return di, ic / cap

        di1, dv1 = deriv(i_l, v_c)
        di2, dv2 = deriv(i_l + 0.5 * dt * di1, v_c + 0.5 * dt * dv1)
        di3, dv3 = deriv(i_l + 0.5 * dt * di2, v_c + 0.5 * dt * dv2)
        di4, dv4 = deriv(i_l + dt * di3, v_c + dt * dv3)
        i_l += (dt / 6.0) * (di1 + 2.0 * di2 + 2.0 * di3 + di4)
        v_c += (dt / 6.0) * (dv1 + 2.0 * dv2 + 2.0 * dv3 + dv4)
        if not (math.isfinite(i_l) and math.isfinite(v_c)):
            raise NonFiniteState(f"switched simulation diverged at substep {idx}")
        if i_l < 0.0:
            if not on:
                dcm = True
            i_l = 0.0

    flags = ("dcm",) if dcm else ()
    return SwitchedTrace(
        dt=dt,
        steps_per_cycle=steps_per_cycle,
        i_l=arr_i,
        v_c=arr_vc,
        v_out=arr_vo,
        i_c=arr_ic,
        on_phase=arr_on,
        v_i_applied=arr_vi,
        r_0_applied=arr_r0,
        flags=flags,
    )


@dataclass(frozen=True)
class EnergyBreakdown:
    """Window energies, joules.

    ``e_l`` is the energy the source-inductor branch hands to the rest of
    the circuit: source input over the window minus the growth of stored
    magnetic energy.  The residual is what conservation says should vanish:

        residual = e_l - (e_c + e_r + e_vd + e_rm + e_rl + e_rc)
    """

    e_l: float
    e_c: float
    e_r: float
    e_vd: float
    e_rm: float
    e_rl: float
    e_rc: float

    @property
    def residual(self) -> float:
        return self.e_l - (self.e_c + self.e_r + self.e_vd + self.e_rm + self.e_rl + self.e_rc)


def energy_audit(
    p: ConverterParams, trace: SwitchedTrace, t0: float, t1: float
) -> EnergyBreakdown:
    """Trapezoidal energy bookkeeping of a switched trace over [t0, t1]."""
    if t1 < t0:
        raise ValueError("t1 must be >= t0")
    n = trace.v_out.size - 1
    i0 = int(round(t0 / trace.dt))
    i1 = int(round(t1 / trace.dt))
    if i0 < 0 or i1 > n:
        raise WindowOutOfRange(f"[{t0}, {t1}] outside trace of {n + 1} samples")
    if i0 == i1:
        return EnergyBreakdown(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)

    sl = slice(i0, i1 + 1)
    t = trace.dt * np.arange(i0, i1 + 1)
    i_l = trace.i_l[sl]
    v_c = trace.v_c[sl]
    v_o = trace.v_out[sl]
    i_c = trace.i_c[sl]
    on = trace.on_phase[sl].astype(float)
    off = 1.0 - on

    e_in = np.trapz(trace.v_i_applied[sl] * i_l, t)
    stored_l = 0.5 * p.l * (i_l[-1] ** 2 - i_l[0] ** 2)
    e_c = 0.5 * p.c * (v_c[-1] ** 2 - v_c[0] ** 2)
    e_r = np.trapz(v_o**2 / trace.r_0_applied[sl], t)
    e_vd = np.trapz(off * i_l * p.v_d, t)
    e_rm = np.trapz(on * i_l**2 * p.r_m, t)
    e_rl = np.trapz(i_l**2 * p.r_l, t)
    e_rc = np.trapz(i_c**2 * p.r_c, t)
    return EnergyBreakdown(
        e_l=float(e_in - stored_l),
        e_c=float(e_c),
        e_r=float(e_r),
        e_vd=float(e_vd),
        e_rm=float(e_rm),
        e_rl=float(e_rl),
        e_rc=float(e_rc),
    )
