"""Transfer-function model for load-resistance steps.

The load path goes through a quartic transfer function from the load jump
to the output-voltage deviation, scaled by the pre-step output-side
current.  An empirical bracket, fit near the reference operating region,
rescales the denominator dynamics; the DC coefficient pair is untouched so
the settled value is correction-independent.  Inversion is classical
partial fractions over the four denominator roots plus the DC offset.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .circuit import ConverterParams, ModelDomainError, NonFiniteTime, ResponseMetrics, validate_params
from .polyroots import all_roots, pair_conjugates
from .steady import steady_inductor_current, steady_output

#: |slope| threshold for extremum bisection, relative to decay rate * offset
PEAK_SLOPE_TOL = 1e-9


class InvalidPostLoad(ModelDomainError):
    """Post-step load resistance must stay positive."""


class CorrectionOutOfDomain(ModelDomainError):
    """The empirical correction bracket went non-positive: the fit does not
    cover this parameter region."""


class RepeatedRoots(ModelDomainError):
    """Confluent denominator roots; partial fractions refused."""


@dataclass(frozen=True)
class QuarticTF:
    """num/den quartic rational function with its drive scaling.

    den and num hold s^4..s^0 coefficients; the physical deviation response
    is gain_i2 * delta_r0 * num/den driven by a unit step.
    """

    den: tuple[float, float, float, float, float]
    num: tuple[float, float, float, float, float]
    gain_i2: float
    delta_r0: float

    @property
    def dc_gain(self) -> float:
        return self.num[-1] / self.den[-1]

    def evaluate(self, s: complex) -> complex:
        return np.polyval(self.num, s) / np.polyval(self.den, s)


@dataclass(frozen=True)
class ExpModeSum:
    """offset + sum of residue * exp(root * t), volts.

    Conjugate mode pairs enter as stored; ``stable`` is False when any root
    has a non-negative real part (response kept for diagnosis).
    """

    offset: float
    modes: tuple[tuple[complex, complex], ...]
    stable: bool = True

    def deviation(self, t):
        t_arr = np.asarray(t, dtype=float)
        out = np.full(t_arr.shape, self.offset, dtype=complex)
        for residue, root in self.modes:
            out = out + residue * np.exp(root * t_arr)
        return float(out.real) if np.isscalar(t) else out.real

    def deviation_slope(self, t):
        t_arr = np.asarray(t, dtype=float)
        out = np.zeros(t_arr.shape, dtype=complex)
        for residue, root in self.modes:
            out = out + residue * root * np.exp(root * t_arr)
        return float(out.real) if np.isscalar(t) else out.real


def _raw_coefficients(p: ConverterParams, delta_r0: float):
    one_d = 1.0 - p.d
    q = one_d * one_d
    L, C, rc = p.l, p.c, p.r_c
    s1 = p.r_0 + delta_r0 + rc
    s2 = p.r_0 + rc
    r_new = p.r_0 + delta_r0
    w = p.d * p.r_m + p.r_l

    a = L * C**3 * s1**2 * s2
    b = (
        L * C**2 * s1**2
        + 2.0 * L * C**2 * s1 * s2
        + C**3 * w * s1**2 * s2
        + C**3 * q * s1 * r_new * s2 * rc
    )
    c = (
        2.0 * L * C * s1
        + L * C * s2
        + C**2 * w * s1 * (2.0 * p.r_0 + delta_r0 + 2.0 * rc)
        + C**2 * w * s1 * s2
        + C**2 * q * s1 * r_new * (p.r_0 + 2.0 * rc)
        + C**2 * q * r_new * s2 * rc
    )
    d = (
        L
        + C * w * (3.0 * p.r_0 + 2.0 * delta_r0 + 3.0 * rc)
        + C * q * (2.0 * p.r_0 + delta_r0 + 3.0 * rc) * r_new
    )
    f = w + q * r_new

    g = L * C**3 * s1 * rc**2
    h = L * C**2 * rc**2 + 2.0 * L * C**2 * s1 * rc + C**3 * w * s1 * rc**2
    j = (
        2.0 * L * C * rc
        + L * C * s1
        + C**2 * w * rc**2
        + 2.0 * C**2 * w * s1 * rc
    )
    k = L + C * w * (r_new + 3.0 * rc)
    l_coef = w
    return (a, b, c, d, f), (g, h, j, k, l_coef)


def load_tf_raw(p: ConverterParams, delta_r0: float) -> QuarticTF:
    """Quartic transfer function exactly as derived, no empirical correction."""
    validate_params(p)
    if p.r_0 + delta_r0 <= 0:
        raise InvalidPostLoad("post-step load resistance must be > 0")
    den, num = _raw_coefficients(p, delta_r0)
    i2 = steady_inductor_current(p).i_out
    return QuarticTF(den=den, num=num, gain_i2=i2, delta_r0=delta_r0)


def correction_factor(p: ConverterParams) -> float:
    """Empirical bracket rescaling the denominator dynamics."""
    c_field, l_field = p.c, p.l
    total = (c_field - 0.000042) / 0.00005
    total += (0.001 - l_field) / 0.0006
    total += (p.r_l - 1.4) / 6.0
    total += (p.d - 0.5) / 0.5
    total += (p.r_c - 1.0) / 2.0
    total += (p.v_d - 0.4) / 3.0
    total += (p.r_m - 0.8) / 5.0
    return 0.5 + total * 0.6


def load_tf_corrected(p: ConverterParams, delta_r0: float) -> QuarticTF:
    """Quartic TF with the correction applied to the s^4..s^1 denominator
    coefficients.  The DC pair and the whole numerator stay as derived."""
    raw = load_tf_raw(p, delta_r0)
    kappa = correction_factor(p)
    if kappa <= 0:
        raise CorrectionOutOfDomain(
            f"correction bracket {kappa:.6g} <= 0; parameters are outside "
            "the region the correction was fit on"
        )
    a, b, c, d, f = raw.den
    return QuarticTF(
        den=(kappa * a, kappa * b, kappa * c, kappa * d, f),
        num=raw.num,
        gain_i2=raw.gain_i2,
        delta_r0=raw.delta_r0,
    )


def invert_quartic_tf(tf: QuarticTF) -> ExpModeSum:
    """Partial-fraction inversion of the step-driven quartic.

    Roots come from the simultaneous-iteration solver with conjugate pairs
    enforced by averaging; residues are num(p)/(p * den'(p)) scaled by the
    drive, and the offset is the final-value term gain * dc_gain.
    """
    den = np.asarray(tf.den, dtype=float)
    num = np.asarray(tf.num, dtype=float)
    roots = pair_conjugates(all_roots(den))
    max_mag = float(np.max(np.abs(roots)))
    for i in range(roots.size):
        for j in range(i + 1, roots.size):
            if abs(roots[i] - roots[j]) <= 1e-9 * max_mag:
                raise RepeatedRoots(
                    f"denominator roots {roots[i]:.6g} and {roots[j]:.6g} coincide"
                )
    scale = tf.gain_i2 * tf.delta_r0
    dden = np.polyder(den)
    modes = tuple(
        (scale * complex(np.polyval(num, r)) / (r * complex(np.polyval(dden, r))), complex(r))
        for r in roots
    )
    stable = bool(np.all(roots.real < 0))
    return ExpModeSum(offset=scale * tf.dc_gain, modes=modes, stable=stable)


def load_response(p: ConverterParams, delta_r0: float, t):
    """Total output voltage during a load step: pre-step steady value plus
    the corrected deviation modes evaluated at ``t`` (seconds after the step)."""
    t_arr = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(t_arr)):
        raise NonFiniteTime("response requested at non-finite time")
    if np.any(t_arr < 0):
        raise ValueError("t must be >= 0")
    base = steady_output(p)
    if delta_r0 == 0.0:
        out = np.full(t_arr.shape, base)
        return float(out) if np.isscalar(t) else out
    mode_sum = invert_quartic_tf(load_tf_corrected(p, delta_r0))
    out = base + mode_sum.deviation(t_arr)
    return float(out) if np.isscalar(t) else out


def load_metrics(p: ConverterParams, delta_r0: float) -> ResponseMetrics:
    """Settled value plus first transient extremum of the load response.

    Load increases peak above the settled value; decreases report the
    symmetric undershoot (negative overshoot_pct).  The extremum is found
    by bracketing the analytic slope of the mode sum and bisecting.
    """
    base = steady_output(p)
    if delta_r0 == 0.0:
        return ResponseMetrics(base, base, None, 0.0, flags=("no-peak",))
    mode_sum = invert_quartic_tf(load_tf_corrected(p, delta_r0))
    v_steady = base + mode_sum.offset
    flags: tuple[str, ...] = () if mode_sum.stable else ("unstable-roots",)

    decay = min(abs(r.real) for _, r in mode_sum.modes if r.real != 0)
    t_hi = 14.0 / decay
    bracket = _bracket_extremum(mode_sum, t_hi)
    if bracket is None:
        return ResponseMetrics(v_steady, v_steady, None, 0.0, flags=flags + ("no-peak",))
    lo, hi, rising = bracket
    rate = max(abs(r.real) + abs(r.imag) for _, r in mode_sum.modes)
    tol = PEAK_SLOPE_TOL * rate * max(abs(mode_sum.offset), 1e-30)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        s = mode_sum.deviation_slope(mid)
        if abs(s) < tol:
            lo = hi = mid
            break
        if (s > 0) == rising:
            lo = mid
        else:
            hi = mid
    t_p = 0.5 * (lo + hi)
    v_ext = base + float(mode_sum.deviation(t_p))
    overshoot = 100.0 * (v_ext - v_steady) / v_steady if v_steady != 0 else 0.0
    return ResponseMetrics(v_steady, v_ext, t_p, overshoot, flags=flags)


def _bracket_extremum(mode_sum: ExpModeSum, t_hi: float, n: int = 512):
    """First slope sign change away from the initial direction, or None.

    Returns (lo, hi, rising) where ``rising`` records the pre-crossing sign.
    """
    ts = np.linspace(0.0, t_hi, n + 1)
    slopes = mode_sum.deviation_slope(ts)
    start = None
    for k in range(1, n + 1):
        if slopes[k] != 0.0:
            start = slopes[k] > 0.0
            break
    if start is None:
        return None
    for k in range(1, n + 1):
        prev, cur = slopes[k - 1], slopes[k]
        if start and prev > 0.0 and cur <= 0.0:
            return float(ts[k - 1]), float(ts[k]), True
        if not start and prev < 0.0 and cur >= 0.0:
            return float(ts[k - 1]), float(ts[k]), False
    return None
