"""Conventional parasitic-free second-order model, kept as the comparison
baseline.  Its transfer function is the zero-parasitics limit of the line
model (after normalizing by the load), and its steady value is the ideal
boost ratio, independent of the load."""

from __future__ import annotations

import numpy as np

from .circuit import ConverterParams, StepEvent, StepKind, Waveform, validate_params
from .steady import ideal_steady_output
from .tfm_line import SecondOrderTF, line_step_response


def fr_tf(p: ConverterParams) -> SecondOrderTF:
    """Ideal second-order transfer function (1-D) / (LC s^2 + (L/R0) s + (1-D)^2)."""
    validate_params(p)
    one_d = 1.0 - p.d
    return SecondOrderTF(
        a=p.l * p.c,
        b=p.l / p.r_0,
        c=one_d * one_d,
        d_num=0.0,
        f_num=one_d,
    )


def fr_step_response(p: ConverterParams, k: float, t):
    """Baseline response to an input step of magnitude ``k``."""
    return line_step_response(fr_tf(p), k, t)


def fr_stitched_load_waveform(
    p: ConverterParams, event: StepEvent, dt: float, t_end: float
) -> tuple[Waveform, tuple[str, ...]]:
    """Baseline treatment of a load step: two steady segments joined at the
    event with no transient at all.

    The ideal steady value does not depend on the load, so both segments sit
    at Vi/(1-D); the waveform is returned flagged so downstream comparisons
    can label the missing transient.
    """
    if event.kind is not StepKind.LOAD_RESISTANCE:
        raise ValueError("stitching applies to load steps only")
    n = int(round(t_end / dt))
    level = ideal_steady_output(p)
    samples = np.full(n + 1, level)
    return Waveform(t0=0.0, dt=dt, samples=samples), ("no-transient",)
