"""Pointwise zeta function Z_{x,y}(z) = sum_j lambda_j^{-z} phi_j(x) conj(phi_j(y)).

Two certified evaluation regimes:

* `zeta_direct`: absolutely convergent partial sums for Re z > n + margin.
  The truncation tail is certified through the diagonal bound
  |coeff_j| <= diag_j and the counting estimate N_{x,x}(mu) <= A(mu+B)^n,
  which give  |tail(L)| <= A t sum_k C(n,k) B^(n-k) L^(k-t) / (t-k).

* `zeta_accelerated_circle`: on the circle, Z(z) = (1/pi) sum cos(m d) m^{-z}
  for any Re z > 0 by iterated summation by parts against the closed
  geometric sums of e^{i m d} (bounded by 1/(2 sin(d/2))).  Iterated
  forward differences of m^{-z} are evaluated stably through the
  integral form  Delta^r a(M) = (z)_r int psi_r(v) (M+v)^(-z-r) dv
  with psi_r the order-r cardinal B-spline, so no subtractive
  cancellation occurs.  Remainders are certified at every step.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from ._numutil import FitResult, csum, fit_line, gauss_legendre, parallel_map
from .errors import ConjugatePointError, CutoffExceededError, RegimeError
from .geometry import TWO_PI
from .spectra import SpectralSeries

T_MARGIN = 0.25


@dataclass(frozen=True)
class ZetaPoint:
    t: float
    s: float
    value: complex
    tail_bound: float


@dataclass(frozen=True)
class ZetaScan:
    t: float
    s_grid: np.ndarray
    values: np.ndarray
    tail_bounds: np.ndarray
    fit: FitResult | None
    predicted_exponent: float | None
    advisory: bool
    note: str = ""


# ---------------------------------------------------------------------------
# Direct regime


def counting_tail_bound(diag_growth: tuple[float, float], n: int, t: float, cut: float) -> float:
    """Certified bound on sum over frequencies above `cut` of freq^{-t} * diag."""
    A, B = diag_growth
    return A * t * sum(
        math.comb(n, k) * B ** (n - k) * cut ** (k - t) / (t - k) for k in range(n + 1)
    )


def _diag_tail_bound(series: SpectralSeries, t: float, cut: float) -> float:
    return counting_tail_bound(series.diag_growth, series.n, t, cut)


def _require_direct_regime(series: SpectralSeries, t: float):
    if t <= series.n + T_MARGIN:
        raise RegimeError(
            f"direct sums need Re z > n + {T_MARGIN} = {series.n + T_MARGIN}; "
            "use zeta_accelerated_circle in the conditionally convergent regime"
        )


def _direct_cut_index(series: SpectralSeries, t: float, tol: float) -> int:
    """Smallest atom count whose certified tail is <= tol."""
    freqs = series.freqs
    lo, hi = 0, len(freqs) - 1
    if len(freqs) == 0 or _diag_tail_bound(series, t, float(freqs[-1])) > tol:
        need = float(freqs[-1]) if len(freqs) else 1.0
        while _diag_tail_bound(series, t, need) > tol:
            need *= 2.0
        raise CutoffExceededError(
            f"series cutoff {series.lambda_max} cannot certify tol = {tol}; "
            f"needs atoms up to frequency ~{need:.6g}"
        )
    while lo < hi:
        mid = (lo + hi) // 2
        if _diag_tail_bound(series, t, float(freqs[mid])) <= tol:
            hi = mid
        else:
            lo = mid + 1
    return lo + 1


def zeta_direct(series: SpectralSeries, z: complex, tol: float = 1e-8) -> ZetaPoint:
    """Certified partial sum of sum_j coeff_j * freq_j^{-z} for Re z > n + 1/4."""
    z = complex(z)
    t = z.real
    _require_direct_regime(series, t)
    if tol <= 0:
        raise ValueError("tol must be positive")
    count = _direct_cut_index(series, t, tol)
    f = series.freqs[:count]
    c = series.coeffs[:count]
    terms = c * np.exp(-z * np.log(f))
    value = complex(csum(terms.real), csum(terms.imag))
    bound = _diag_tail_bound(series, t, float(f[-1])) if count else _diag_tail_bound(
        series, t, 1.0
    )
    return ZetaPoint(t=t, s=z.imag, value=value, tail_bound=bound)


# ---------------------------------------------------------------------------
# Circle acceleration


def _bspline_values(r: int, v: np.ndarray) -> np.ndarray:
    """Cardinal B-spline psi_r on [0, r] (Irwin-Hall density)."""
    out = np.zeros_like(v)
    fact = math.factorial(r - 1)
    for k in range(r + 1):
        w = v - k
        pos = w > 0
        term = np.zeros_like(v)
        term[pos] = w[pos] ** (r - 1)  # truncated power; (w)_+^0 is a step
        out += (-1) ** k * math.comb(r, k) * term
    return out / fact


def _forward_difference(z: complex, M: int, r: int, gl_nodes=16) -> complex:
    """Delta^r of m^{-z} at m = M with Delta g(m) = g(m) - g(m+1), stably."""
    if r == 0:
        return cmath.exp(-z * math.log(M))
    poch = 1.0 + 0.0j
    for j in range(r):
        poch *= z + j
    total = 0.0 + 0.0j
    for knot in range(r):
        x, w = gauss_legendre(gl_nodes, float(knot), float(knot + 1))
        psi = _bspline_values(r, x)
        vals = np.exp(-(z + r) * np.log(M + x))
        total += complex((w * psi * vals.real).sum(), (w * psi * vals.imag).sum())
    return poch * total


def _sbp_exponential_sum(z: complex, d: float, head: int, tol: float):
    """sum_{m>=1} e^{i m d} m^{-z} with a certified remainder, via iterated
    summation by parts of the tail beyond `head` terms."""
    t = z.real
    eid = cmath.exp(1j * d)
    P = eid / (eid - 1.0)
    absP = abs(P)
    m = np.arange(1, head + 1, dtype=float)
    terms = np.exp(-z * np.log(m) + 1j * d * m)
    total = complex(csum(terms.real), csum(terms.imag))
    # pick the smallest depth whose remainder bound clears the tolerance
    best = None
    poch = 1.0
    for r in range(1, 15):
        poch *= abs(z) + (r - 1)
        rem = absP**r * poch * (head ** (-t - r) + head ** (1.0 - t - r) / (t + r - 1.0))
        if rem <= tol:
            best = (r, rem)
            break
    if best is None:
        return None
    depth, remainder = best
    boundary = 0.0 + 0.0j
    p_pow = 1.0 + 0.0j
    for j in range(depth):
        boundary += p_pow * _forward_difference(z, head + 1, j)
        p_pow *= P
    total += -P * cmath.exp(1j * d * head) * boundary
    return total, remainder


def zeta_accelerated_circle(
    d: float, z: complex, tol: float = 1e-10, head: int = 2000
) -> ZetaPoint:
    """Circle zeta (1/pi) sum_m cos(m d) m^{-z}, certified, for Re z > 0.

    Valid for every t > 0 (absolutely convergent or not); d must avoid
    2 pi Z where the series diverges.
    """
    z = complex(z)
    if z.real <= 0:
        raise RegimeError("acceleration requires Re z > 0")
    if tol <= 0:
        raise ValueError("tol must be positive")
    dr = math.remainder(d, TWO_PI)
    if abs(dr) <= 1e-12:
        raise ConjugatePointError("d = 0 mod 2 pi: the series diverges")
    M = head
    while True:
        got_p = _sbp_exponential_sum(z, d, M, tol * math.pi / 4.0)
        got_m = _sbp_exponential_sum(z, -d, M, tol * math.pi / 4.0)
        if got_p is not None and got_m is not None:
            break
        M *= 2
        if M > 200_000:
            raise RegimeError(f"cannot certify tol = {tol} at z = {z}")
    (fp, rp), (fm, rm) = got_p, got_m
    value = (fp + fm) / (2.0 * math.pi)
    bound = (rp + rm) / (2.0 * math.pi) + 1e-15 * (1.0 + abs(value))
    return ZetaPoint(t=z.real, s=z.imag, value=value, tail_bound=bound)


# ---------------------------------------------------------------------------
# Scans and consistency checks


def _predicted_exponent(n: int, t: float) -> float | None:
    if t > n:
        return 0.0
    if n / 2.0 <= t < n:
        return n - t
    return None


def zeta_growth_scan(
    target,
    t: float,
    s_grid,
    tol: float = 1e-6,
    fit_smin: float = 10.0,
    threads: int = 1,
) -> ZetaScan:
    """|Z(t+is)| over s_grid with a log|Z| vs log<s> growth fit.

    `target` is either a SpectralSeries (direct regime, t > n + 1/4) or a
    circle distance d as a float (any t > 0).  Near the theorem edges
    t = n and t = n/2 the scan is advisory: no pass/fail semantics.
    """
    s_arr = np.asarray(s_grid, dtype=float)
    if isinstance(target, SpectralSeries):
        series = target
        _require_direct_regime(series, t)
        count = _direct_cut_index(series, t, tol)
        f = series.freqs[:count]
        w = series.coeffs[:count] * f ** (-t)
        logf = np.log(f)
        bound = _diag_tail_bound(series, t, float(f[-1]))

        def one(s):
            ph = np.exp(-1j * s * logf)
            return complex(csum((w * ph.real)), csum((w * ph.imag)))

        values = np.array(parallel_map(one, s_arr, threads))
        tails = np.full(len(s_arr), bound)
        n = series.n
    else:
        d = float(target)
        pts = parallel_map(
            lambda s: zeta_accelerated_circle(d, complex(t, s), tol), s_arr, threads
        )
        values = np.array([p.value for p in pts])
        tails = np.array([p.tail_bound for p in pts])
        n = 1
    bracket = np.sqrt(1.0 + s_arr**2)
    mask = np.abs(s_arr) >= fit_smin
    fit = fit_line(np.log(bracket[mask]), np.log(np.abs(values[mask]))) if mask.sum() >= 2 else None
    advisory = abs(t - n) < 0.15 or abs(t - n / 2.0) < 0.15
    return ZetaScan(
        t=t,
        s_grid=s_arr,
        values=values,
        tail_bounds=tails,
        fit=fit,
        predicted_exponent=_predicted_exponent(n, t),
        advisory=advisory,
        note="advisory scan near a theorem edge" if advisory else "",
    )


def mellin_consistency(series: SpectralSeries, z: complex, lambda_cap: float) -> dict:
    """Compare the atom sum with z int_0^inf lambda^{-z-1} N(lambda) d lambda.

    The integral is evaluated exactly panel by panel (N is constant
    between jumps) up to lambda_cap, closed with the analytic tail stub
    N(last) * f_last^{-z}.  Returns the residual and the certified bound
    it must not exceed.
    """
    z = complex(z)
    _require_direct_regime(series, z.real)
    if lambda_cap > series.lambda_max * (1 + 1e-12):
        raise CutoffExceededError("lambda_cap exceeds the series cutoff")
    k = int(np.searchsorted(series.freqs, lambda_cap, side="right"))
    if k == 0:
        return {"residual": 0.0, "certified": 0.0, "lhs": 0j, "rhs": 0j}
    f = series.freqs[:k]
    prefix = series.prefix()[1 : k + 1]  # N just past each jump
    powers = np.exp(-z * np.log(f))
    # sum_i N_i (f_i^{-z} - f_{i+1}^{-z}) + N_K f_K^{-z}
    contrib = prefix[:-1] * (powers[:-1] - powers[1:])
    rhs = complex(csum(contrib.real), csum(contrib.imag)) + prefix[-1] * powers[-1]
    direct_terms = series.coeffs[:k] * powers
    lhs = complex(csum(direct_terms.real), csum(direct_terms.imag))
    tail = _diag_tail_bound(series, z.real, float(f[-1]))
    return {
        "residual": abs(lhs - rhs),
        "certified": 2.0 * tail + 1e-12 * (1.0 + abs(lhs)),
        "lhs": lhs,
        "rhs": rhs,
    }


def zeta_manifold_average(
    manifold,
    x,
    t: float,
    s_grid,
    rule,
    eps: float = 0.1,
    lambda_cutoff: float = 800.0,
    threads: int = 1,
):
    """Weighted manifold average int |Z(t+is)|^2 / (d^(2t-n-eps)+1) dy per s.

    Requires t > n so Z is certified at every node.  Returns a harness
    ScanReport with the growth fit against <s> (prediction: bounded).
    """
    from . import harness

    return harness.zeta_average_scan(
        manifold, x, t, np.asarray(s_grid, dtype=float), rule, eps, lambda_cutoff, threads
    )
