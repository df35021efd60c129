"""Internal numeric plumbing: compensated sums, panel quadrature, fits.

Everything here is deterministic: fixed orders, no thread-dependent
reductions.  `parallel_map` only distributes independent work items and
reassembles results by index, so outputs are bitwise identical for any
thread count.
"""
from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

# Closed 9-point Newton-Cotes weights on [x0, x8], step h = L/8:
# integral = (4h/14175) * sum(NC9_COEFFS * f(nodes)).
NC9_COEFFS = np.array(
    [989.0, 5888.0, -928.0, 10496.0, -4540.0, 10496.0, -928.0, 5888.0, 989.0]
)
NC9_UNIT_WEIGHTS = NC9_COEFFS / 28350.0  # weights for a unit-length panel
NC9_UNIT_NODES = np.arange(9) / 8.0


def neumaier_sum(values) -> float:
    """Compensated (Neumaier) sum of a 1-d array in its given order."""
    total = 0.0
    comp = 0.0
    for x in values.tolist() if isinstance(values, np.ndarray) else values:
        t = total + x
        if abs(total) >= abs(x):
            comp += (total - t) + x
        else:
            comp += (x - t) + total
        total = t
    return total + comp


def neumaier_cumsum(values: np.ndarray) -> np.ndarray:
    """Compensated running sums; entry i holds sum(values[: i + 1])."""
    out = np.empty(len(values), dtype=float)
    total = 0.0
    comp = 0.0
    i = 0
    for x in values.tolist():
        t = total + x
        if abs(total) >= abs(x):
            comp += (total - t) + x
        else:
            comp += (x - t) + total
        total = t
        out[i] = total + comp
        i += 1
    return out


def csum(values) -> float:
    """Exact sum (Shewchuk) of finite floats in fixed order."""
    return math.fsum(values.tolist() if isinstance(values, np.ndarray) else values)


def panel_breaks(a: float, b: float, interior: np.ndarray, max_width: float) -> np.ndarray:
    """Panel edges over [a, b]: sorted interior breakpoints, then uniform
    subdivision of every panel wider than max_width."""
    if b <= a:
        raise ValueError(f"empty integration range [{a}, {b}]")
    pts = interior[(interior > a) & (interior < b)]
    edges = np.concatenate(([a], np.sort(pts), [b]))
    widths = np.diff(edges)
    nsub = np.maximum(1, np.ceil(widths / max_width).astype(np.int64))
    total = int(nsub.sum())
    out = np.empty(total + 1, dtype=float)
    pos = 0
    for i in range(len(widths)):
        k = int(nsub[i])
        if k == 1:
            out[pos] = edges[i]
            pos += 1
        else:
            out[pos : pos + k] = edges[i] + widths[i] * np.arange(k) / k
            pos += k
    out[total] = edges[-1]
    return out


def nc9_nodes_weights(edges: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """All Newton-Cotes nodes/weights for panels defined by edges.

    Returns flat arrays of length 9 * npanels; weights already include
    the panel lengths, so integral = dot(weights, f(nodes)).
    """
    starts = edges[:-1]
    widths = np.diff(edges)
    nodes = starts[:, None] + widths[:, None] * NC9_UNIT_NODES[None, :]
    weights = widths[:, None] * NC9_UNIT_WEIGHTS[None, :]
    return nodes.ravel(), weights.ravel()


def gauss_legendre(n: int, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes/weights mapped to (a, b)."""
    x, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    stderr: float
    r2: float

    def as_dict(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "stderr": self.stderr,
            "r2": self.r2,
        }


def fit_line(x: np.ndarray, y: np.ndarray) -> FitResult:
    """Least-squares line with slope standard error and R^2."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 2:
        raise ValueError("need at least two points to fit a line")
    xm = x - x.mean()
    ym = y - y.mean()
    sxx = float(xm @ xm)
    if sxx == 0.0:
        raise ValueError("degenerate abscissae in fit")
    slope = float(xm @ ym) / sxx
    intercept = float(y.mean() - slope * x.mean())
    resid = y - (intercept + slope * x)
    dof = max(len(x) - 2, 1)
    var = float(resid @ resid) / dof
    stderr = math.sqrt(var / sxx)
    syy = float(ym @ ym)
    r2 = 1.0 if syy == 0.0 else 1.0 - float(resid @ resid) / syy
    return FitResult(slope, intercept, stderr, r2)


def fit_loglog(x: np.ndarray, y: np.ndarray) -> FitResult:
    """Fit log|y| vs log x, ignoring nonpositive x and zero y."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    mask = (x > 0) & (np.abs(y) > 0) & np.isfinite(y)
    if mask.sum() < 2:
        raise ValueError("not enough usable points for log-log fit")
    return fit_line(np.log(x[mask]), np.log(np.abs(y[mask])))


def parallel_map(fn, items, threads: int = 1) -> list:
    """Map fn over items; results in item order regardless of thread count."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    out = [None] * len(items)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = {pool.submit(fn, it): i for i, it in enumerate(items)}
        for fut, i in futures.items():
            out[i] = fut.result()
    return out


def fmt17(x: float) -> str:
    """Decimal form with 17 significant digits (round-trips doubles)."""
    return format(float(x), ".17g")


def canonical_json(obj) -> str:
    """Deterministic JSON rendering used for hashing and report files."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def config_hash(obj) -> str:
    return hashlib.sha256(canonical_json(obj).encode()).hexdigest()[:16]


def log_grid(lo: float, hi: float, count: int) -> np.ndarray:
    return np.exp(np.linspace(math.log(lo), math.log(hi), count))
