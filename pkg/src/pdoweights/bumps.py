"""C-infinity cutoffs built from the exp(-1/t) glue.

``smooth_step(t)`` is 0 for t <= 0, 1 for t >= 1 and satisfies
``smooth_step(t) + smooth_step(1 - t) == 1``. All derivatives are computed
analytically: ``d^n/dt^n exp(-1/t) = P_n(1/t) exp(-1/t)`` with
``P_{n+1}(u) = u**2 (P_n(u) - P_n'(u))``, and the quotient rule is applied as a
recurrence.
"""

from __future__ import annotations

from functools import lru_cache
from math import comb

import numpy as np
from numpy.polynomial import polynomial as P


@lru_cache(maxsize=None)
def _glue_poly(order: int) -> np.ndarray:
    coeffs = np.array([1.0])
    for _ in range(order):
        coeffs = P.polymul([0.0, 0.0, 1.0], P.polysub(coeffs, P.polyder(coeffs)))
    return coeffs


def _exp_glue(t: np.ndarray, order: int = 0) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    if np.any(pos):
        u = 1.0 / t[pos]
        out[pos] = P.polyval(u, _glue_poly(order)) * np.exp(-u)
    return out


def smooth_step(t, order: int = 0) -> np.ndarray:
    """The glue step or its ``order``-th derivative."""
    t = np.asarray(t, dtype=float)
    a = [_exp_glue(t, j) for j in range(order + 1)]
    b = [(-1) ** j * _exp_glue(1.0 - t, j) for j in range(order + 1)]
    denom = [a[j] + b[j] for j in range(order + 1)]
    g = [a[0] / denom[0]]
    for n in range(1, order + 1):
        acc = a[n].copy()
        for k in range(n):
            acc -= comb(n, k) * g[k] * denom[n - k]
        g.append(acc / denom[0])
    return g[order]


def step_down(r, inner: float, outer: float, order: int = 0) -> np.ndarray:
    """1 for r <= inner, 0 for r >= outer (derivative in r if ``order`` > 0)."""
    width = outer - inner
    t = (np.asarray(r, dtype=float) - inner) / width
    if order == 0:
        return 1.0 - smooth_step(t)
    return -smooth_step(t, order) / width**order


def annular(r, rise: tuple[float, float], fall: tuple[float, float], order: int = 0) -> np.ndarray:
    """0 below rise[0], 1 on [rise[1], fall[0]], 0 above fall[1]."""
    r = np.asarray(r, dtype=float)
    w_up = rise[1] - rise[0]
    t_up = (r - rise[0]) / w_up
    total = np.zeros_like(r)
    for k in range(order + 1):
        up = smooth_step(t_up, k) / w_up**k
        down = step_down(r, fall[0], fall[1], order - k)
        total = total + comb(order, k) * up * down
    return total


def radial_derivative_1d(profile, xi, order: int) -> np.ndarray:
    """d^n/dxi^n of ``profile(|xi|)`` for a profile flat near the origin."""
    xi = np.asarray(xi, dtype=float)
    return np.sign(xi) ** order * profile(np.abs(xi), order)


def partition_bump(x) -> np.ndarray:
    """psi with support [-1, 1] whose integer translates sum to one."""
    return smooth_step(1.0 - np.abs(np.asarray(x, dtype=float)))
