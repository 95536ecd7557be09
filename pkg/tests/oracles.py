"""Independent reference computations used to check the package.

None of these reuse package internals beyond simple data containers: the
constrained LS oracle solves the full KKT system of the stacked problem, the
crossing oracle integrates the speed numerically and root-finds, and the tone
oracle fits a sinusoid by ordinary least squares.
"""

import math

import numpy as np
from scipy import integrate, optimize

TWO_PI = 2.0 * math.pi


def kkt_constrained_ls(Y):
    """argmin sum_k ||Y_k - a||^2 subject to sum(a) = 2*pi, via the KKT system."""
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    N, L = Y.shape
    A = np.tile(np.eye(L), (N, 1))
    b = Y.reshape(-1)
    c = np.ones(L)
    K = np.zeros((L + 1, L + 1))
    K[:L, :L] = A.T @ A
    K[:L, L] = c
    K[L, :L] = c
    rhs = np.concatenate((A.T @ b, [TWO_PI]))
    return np.linalg.solve(K, rhs)[:L]


def crossing_times(omega, boundaries, t_end, kinks=()):
    """Times at which the integral of ``omega`` reaches each boundary angle.

    ``kinks`` lists times where ``omega`` is not smooth, so quadrature splits there.
    """
    def angle(t):
        pts = [k for k in kinks if 0 < k < t] or None
        return integrate.quad(omega, 0.0, t, points=pts, limit=200, epsabs=1e-13, epsrel=1e-13)[0]

    out = []
    lo = 0.0
    for b in boundaries:
        out.append(optimize.brentq(lambda t: angle(t) - b, lo, t_end, xtol=1e-13))
        lo = out[-1]
    return np.array(out)


def tone_amplitude(t, x, f):
    """Amplitude of the best-fit sinusoid at ``f`` (with offset) by least squares."""
    t = np.asarray(t, dtype=float)
    M = np.column_stack((np.ones_like(t), np.sin(TWO_PI * f * t), np.cos(TWO_PI * f * t)))
    coef, *_ = np.linalg.lstsq(M, np.asarray(x, dtype=float), rcond=None)
    return float(math.hypot(coef[1], coef[2]))
