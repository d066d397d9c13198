"""Simultaneous-iteration polynomial root finding (Durand-Kerner).

Degree is small and fixed in this library, so a global all-roots iteration
on the monic polynomial is simpler and more predictable than companion
matrix eigenvalues.
"""

from __future__ import annotations

import numpy as np


def all_roots(coeffs, tol: float = 1e-13, max_iter: int = 200) -> np.ndarray:
    """All complex roots of the polynomial with highest-degree-first ``coeffs``.

    Durand-Kerner iteration on the monic normalization, converged when the
    largest update falls below ``tol`` relative to the root magnitudes.
    """
    a = np.asarray(coeffs, dtype=complex)
    if a.ndim != 1 or a.size < 2:
        raise ValueError("need a polynomial of degree >= 1")
    if a[0] == 0:
        raise ValueError("leading coefficient must be nonzero")
    monic = a / a[0]
    n = monic.size - 1

    # Cauchy-style radius so starting points circle every root.
    radius = 1.0 + float(np.max(np.abs(monic[1:])))
    seed = radius * (0.4 + 0.9j) ** np.arange(1, n + 1)
    roots = seed.astype(complex)

    for _ in range(max_iter):
        vals = np.polyval(monic, roots)
        new = roots.copy()
        for i in range(n):
            denom = np.prod(new[i] - np.delete(roots, i))
            if denom == 0:
                denom = 1e-30
            new[i] = roots[i] - vals[i] / denom
        shift = np.max(np.abs(new - roots))
        scale = max(1.0, float(np.max(np.abs(new))))
        roots = new
        if shift <= tol * scale:
            break
    return roots


def pair_conjugates(roots: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Force numerically-conjugate root pairs to be exact conjugates.

    Roots whose imaginary part is negligible are snapped onto the real
    axis; the rest are matched plus-to-minus and replaced by the average
    of the pair, keeping the time-domain signal exactly real.
    """
    out = np.array(roots, dtype=complex)
    scale = max(1.0, float(np.max(np.abs(out))))
    real_mask = np.abs(out.imag) <= tol * scale
    out[real_mask] = out[real_mask].real

    pos = [i for i in range(out.size) if not real_mask[i] and out[i].imag > 0]
    neg = [i for i in range(out.size) if not real_mask[i] and out[i].imag < 0]
    used = set()
    for i in pos:
        best, best_d = None, np.inf
        for j in neg:
            if j in used:
                continue
            d = abs(out[i] - np.conj(out[j]))
            if d < best_d:
                best, best_d = j, d
        if best is None:
            continue
        used.add(best)
        avg = 0.5 * (out[i] + np.conj(out[best]))
        out[i] = avg
        out[best] = np.conj(avg)
    return out
