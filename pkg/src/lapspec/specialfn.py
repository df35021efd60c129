"""Special functions behind the closed forms.

* Bessel J of real order alpha >= 0: ascending series for x <= 12 (the
  series is stable there for every order; cancellation stays below
  ~e^12 * eps), half-integer closed trigonometric forms, and scipy's
  mature evaluator for the oscillatory range.  Contract: absolute error
  <= 1e-10 for x <= 1e4, alpha <= 25.
* Mueller-Legendre polynomials P_m(n, t): the zonal harmonics on S^n
  normalized so P_m(n, 1) = 1, via the Gegenbauer three-term recurrence
  rewritten for the normalized values,
      (m + n - 2) P_m = (2m + n - 3) t P_{m-1} - (m - 1) P_{m-2},
  which keeps every value in [-1, 1] on [-1, 1] (O(m) per point, stable).
* Eigenspace multiplicities N(n, m) as exact integers.
* Surface-volume constants D_n = 2 pi^((n+1)/2) / Gamma((n+1)/2).
* Taylor coefficients of (1+z) / (D_n (1 + z^2 - 2 z t)^((n+1)/2)),
  which equal the sphere spectral-function values at eigenvalue jumps.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import special as _sp

SERIES_CUTOFF = 12.0
_HALF_INT_FORMS = (0.5, 1.5, 2.5)


def _series_j(alpha: float, x: np.ndarray) -> np.ndarray:
    """Ascending power series; intended for 0 <= x <= SERIES_CUTOFF."""
    out = np.zeros_like(x)
    zero = x == 0.0
    if zero.any():
        out[zero] = 1.0 if alpha == 0.0 else 0.0
    xs = x[~zero]
    if xs.size:
        q = 0.25 * xs * xs
        term = np.exp(alpha * np.log(0.5 * xs) - math.lgamma(alpha + 1.0))
        acc = term.copy()
        for k in range(1, 80):
            term *= -q / (k * (alpha + k))
            acc += term
            if np.all(np.abs(term) <= 1e-18 * (np.abs(acc) + 1e-300)):
                break
        out[~zero] = acc
    return out


def _half_integer_j(alpha: float, x: np.ndarray) -> np.ndarray:
    """Closed trigonometric forms for alpha in {1/2, 3/2, 5/2}, x > 0."""
    pref = np.sqrt(2.0 / (np.pi * x))
    if alpha == 0.5:
        return pref * np.sin(x)
    if alpha == 1.5:
        return pref * (np.sin(x) / x - np.cos(x))
    return pref * ((3.0 / (x * x) - 1.0) * np.sin(x) - 3.0 * np.cos(x) / x)


def bessel_j(alpha: float, x):
    """Bessel function of the first kind J_alpha(x) for alpha >= 0, x >= 0.

    Accepts scalars or arrays.  Raises ValueError on negative argument
    or negative order.
    """
    if alpha < 0:
        raise ValueError("order must be >= 0")
    arr = np.asarray(x, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    if np.any(arr < 0):
        raise ValueError("argument must be >= 0")
    out = np.empty_like(arr)
    small = arr <= SERIES_CUTOFF
    if small.any():
        out[small] = _series_j(alpha, arr[small])
    big = ~small
    if big.any():
        if alpha in _HALF_INT_FORMS:
            out[big] = _half_integer_j(alpha, arr[big])
        else:
            out[big] = _sp.jv(alpha, arr[big])
    return float(out[0]) if scalar else out


def multiplicity(n: int, m: int) -> int:
    """Dimension N(n, m) of the degree-m eigenspace on S^n, exactly.

    Equals (2m+n-1) Gamma(m+n-1) / (Gamma(m+1) Gamma(n)) but is computed
    as a difference of binomial coefficients in integer arithmetic
    (Python integers are unbounded, so no overflow cap is needed).
    """
    if n < 2:
        raise ValueError("sphere dimension must be >= 2")
    if m < 0:
        raise ValueError("degree must be >= 0")
    if m == 0:
        return 1
    return math.comb(m + n, n) - math.comb(m + n - 2, n)


def sphere_area_constant(n: int) -> float:
    """D_n = 2 pi^((n+1)/2) / Gamma((n+1)/2), the volume of S^n."""
    if n < 1:
        raise ValueError("dimension must be >= 1")
    return 2.0 * math.pi ** ((n + 1) / 2.0) / math.gamma((n + 1) / 2.0)


def legendre_muller(n: int, m: int, t):
    """P_m(n, t), the zonal harmonic on S^n with P_m(n, 1) = 1."""
    table = legendre_muller_table(n, m, t)
    return table[m]


def legendre_muller_table(n: int, m_max: int, t):
    """P_m(n, t) for m = 0..m_max.

    Returns an array of shape (m_max + 1,) for scalar t, or
    (m_max + 1, len(t)) for array t.
    """
    if n < 2:
        raise ValueError("sphere dimension must be >= 2")
    if m_max < 0:
        raise ValueError("degree must be >= 0")
    tt = np.asarray(t, dtype=float)
    if np.any(np.abs(tt) > 1.0 + 1e-15):
        raise ValueError("argument t must lie in [-1, 1]")
    tt = np.clip(tt, -1.0, 1.0)
    scalar = tt.ndim == 0
    tt = np.atleast_1d(tt)
    out = np.empty((m_max + 1, tt.size), dtype=float)
    out[0] = 1.0
    if m_max >= 1:
        out[1] = tt
    for m in range(2, m_max + 1):
        out[m] = ((2 * m + n - 3) * tt * out[m - 1] - (m - 1) * out[m - 2]) / (m + n - 2)
    return out[:, 0] if scalar else out


def gegenbauer_table(beta: float, m_max: int, t) -> np.ndarray:
    """Unnormalized Gegenbauer C_m^(beta)(t) for m = 0..m_max.

    Generating function: sum_m C_m^(beta)(t) z^m = (1 - 2 z t + z^2)^(-beta).
    """
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty((m_max + 1, tt.size), dtype=float)
    out[0] = 1.0
    if m_max >= 1:
        out[1] = 2.0 * beta * tt
    for m in range(2, m_max + 1):
        out[m] = (2.0 * tt * (m + beta - 1.0) * out[m - 1] - (m + 2.0 * beta - 2.0) * out[m - 2]) / m
    return out


def generating_function_coeffs(n: int, t: float, m_max: int) -> np.ndarray:
    """Taylor coefficients c_m of (1+z) / (D_n (1 + z^2 - 2 z t)^((n+1)/2)).

    c_m equals the cumulative sum over m' <= m of N(n,m') P_m'(n,t) / D_n,
    i.e. the sphere spectral-function value just past the m-th jump
    (zero mode included).  Requires |t| < 1 (non-conjugate points).
    """
    if abs(t) >= 1.0:
        raise ValueError("generating-function coefficients need |t| < 1")
    beta = 0.5 * (n + 1)
    c = gegenbauer_table(beta, m_max, t)[:, 0]
    dn = sphere_area_constant(n)
    out = c.copy()
    out[1:] += c[:-1]
    return out / dn
