"""Pure numpy implementations of the hot loops.

Mirrors ``_kernels.pyx`` exactly (same names, same argument order). Used when
the compiled extension is missing or ``ESISAV_PURE_PYTHON=1`` is set.

Spectral arrays use the ``rfft2`` half layout: shape ``(nx, ny // 2 + 1)``
with ``ny`` even, so column 0 and the last column (Nyquist) appear once in
the full spectrum and every other column twice.
"""

import numpy as np

NAME = "python"


def cubic_derivative(phi, q, a):
    """Return ``q*phi**3 - a*phi``."""
    return phi * (q * phi * phi - a)


def quartic_sum(phi, q, a, c):
    """Return ``sum(q/4 phi^4 - a/2 phi^2 + c)`` over all points."""
    p2 = phi * phi
    return float(np.sum(p2 * (0.25 * q * p2 - 0.5 * a))) + c * phi.size


def spectral_quadratic(sym, fh):
    """Full-spectrum sum of ``sym * |fh|^2`` from half-layout arrays."""
    w = sym * (fh.real * fh.real + fh.imag * fh.imag)
    total = 2.0 * float(np.sum(w)) - float(np.sum(w[:, 0]))
    if w.shape[1] > 1:
        total -= float(np.sum(w[:, -1]))
    return total


def implicit_update(base, forcing, gsym, coef, denom):
    """Return ``(base + coef * gsym * forcing) / denom``."""
    return (base + (coef * gsym) * forcing) / denom
