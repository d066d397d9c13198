"""Transfer-function model for input-voltage steps.

Small-signal node analysis of the non-ideal circuit yields a second-order
transfer function from input voltage to output voltage,

    G(s) = (d_num s + f_num) / (a s^2 + b s + c),

whose DC gain f_num/c matches the corrected steady-state ratio.  The step
response, first peak time and peak voltage are evaluated in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circuit import ConverterParams, ModelDomainError, NonFiniteTime, validate_params


class ZeroInputVoltage(ModelDomainError):
    """The diode-drop correction divides by Vi; the TF needs Vi > 0."""


class OverdampedTF(ModelDomainError):
    """Closed-form peak expressions exist only for the oscillatory case."""


@dataclass(frozen=True)
class SecondOrderTF:
    """Rational transfer function (d_num s + f_num) / (a s^2 + b s + c)."""

    a: float
    b: float
    c: float
    d_num: float
    f_num: float

    @property
    def discriminant(self) -> float:
        return 4.0 * self.a * self.c - self.b * self.b

    @property
    def is_underdamped(self) -> bool:
        return self.discriminant > 0.0

    @property
    def dc_gain(self) -> float:
        return self.f_num / self.c

    def evaluate(self, s: complex) -> complex:
        return (self.d_num * s + self.f_num) / (self.a * s * s + self.b * s + self.c)


@dataclass(frozen=True)
class DampedSinusoidParams:
    """Residue components, decay rate, frequency and phase of the unit step
    response written as  f/c - 2 sqrt(A^2+B^2) e^{-Et} sin(Ft + phi)."""

    A: float
    B: float
    E: float
    F: float
    phi: float


def line_tf_coefficients(p: ConverterParams) -> SecondOrderTF:
    """Coefficients of the input-to-output transfer function."""
    validate_params(p)
    if p.v_i <= 0:
        raise ZeroInputVoltage("input voltage must be > 0 to place the diode correction")
    one_d = 1.0 - p.d
    q = one_d * one_d
    rs = p.r_0 + p.r_c
    a = rs * p.l * p.c
    b = q * p.c * p.r_0 * p.r_c + p.d * p.c * p.r_m * rs + p.c * p.r_l * rs + p.l
    c = q * p.r_0 + p.r_l + p.d * p.r_m + q * p.r_c
    d_num = one_d * p.c * p.r_0 * p.r_c
    f_num = one_d * p.r_0 - (p.v_d / p.v_i) * q * p.r_0
    return SecondOrderTF(a=a, b=b, c=c, d_num=d_num, f_num=f_num)


def damped_sinusoid_params(tf: SecondOrderTF) -> DampedSinusoidParams:
    """Partial-fraction parameters of the underdamped unit step response.

    The phase uses the two-argument arctangent of (A, B) so a negative
    bf - 2cd lands in the correct quadrant.
    """
    disc = tf.discriminant
    if disc <= 0:
        raise OverdampedTF("4ac - b^2 must be positive")
    root = math.sqrt(disc)
    a_res = tf.f_num / (2.0 * tf.c)
    b_res = (tf.b * tf.f_num - 2.0 * tf.c * tf.d_num) / (2.0 * tf.c * root)
    return DampedSinusoidParams(
        A=a_res,
        B=b_res,
        E=tf.b / (2.0 * tf.a),
        F=root / (2.0 * tf.a),
        phi=math.atan2(a_res, b_res),
    )


def line_step_response(tf: SecondOrderTF, k: float, t):
    """Response to a step of magnitude ``k`` applied at t = 0.

    Underdamped systems use the damped-sinusoid closed form; real-pole
    systems fall back to two-exponential (or critically damped) inversion.
    """
    t_arr = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(t_arr)):
        raise NonFiniteTime("response requested at non-finite time")
    if tf.is_underdamped:
        par = damped_sinusoid_params(tf)
        amp = 2.0 * math.hypot(par.A, par.B)
        out = k * (
            tf.f_num / tf.c
            - amp * np.exp(-par.E * t_arr) * np.sin(par.F * t_arr + par.phi)
        )
    else:
        out = _real_pole_step_response(tf, k, t_arr)
    return float(out) if np.isscalar(t) else out


def _real_pole_step_response(tf: SecondOrderTF, k: float, t_arr: np.ndarray):
    a, b, c, d, f = tf.a, tf.b, tf.c, tf.d_num, tf.f_num
    disc = b * b - 4.0 * a * c
    if disc == 0.0:
        x = b / (2.0 * a)
        return k * (f / c - (f / c) * np.exp(-x * t_arr)
                    + (d * x - f) / (a * x) * t_arr * np.exp(-x * t_arr))
    root = math.sqrt(disc)
    x1 = (b + root) / (2.0 * a)
    x2 = (b - root) / (2.0 * a)
    r1 = (-d * x1 + f) / (a * x1 * x1 - c)
    r2 = (-d * x2 + f) / (a * x2 * x2 - c)
    return k * (f / c + r1 * np.exp(-x1 * t_arr) + r2 * np.exp(-x2 * t_arr))


def line_peak_time(tf: SecondOrderTF) -> float:
    """Time from step to the first output maximum, in closed form."""
    disc = tf.discriminant
    if disc <= 0:
        raise OverdampedTF("no oscillatory peak for real-pole systems")
    root = math.sqrt(disc)
    num = (
        math.atan2(root, tf.b)
        - math.atan2(tf.f_num * root, tf.b * tf.f_num - 2.0 * tf.c * tf.d_num)
        + math.pi
    )
    return num / (root / (2.0 * tf.a))


def line_peak_voltage(tf: SecondOrderTF, v_i: float) -> float:
    """First peak of the response to a step of magnitude ``v_i``."""
    disc = tf.discriminant
    if disc <= 0:
        raise OverdampedTF("no oscillatory peak for real-pole systems")
    a, b, c, d, f = tf.a, tf.b, tf.c, tf.d_num, tf.f_num
    root = math.sqrt(disc)
    radical = math.sqrt((a * f * f - b * d * f + c * d * d) / (4.0 * a * c * c - b * b * c))
    expo = math.exp(
        b * (math.atan2(f * root, b * f - 2.0 * c * d) - math.atan2(root, b) - math.pi)
        / root
    )
    return v_i * (f / c - 2.0 * radical * expo * math.sin(math.atan2(root, b) + math.pi))
