"""Numerical verification scans for the growth theorems.

Quadrature over manifolds:
* flat 2-tori: uniform tensor grids in fractional coordinates (trapezoid
  sums, exact for trigonometric polynomials below the grid Nyquist);
  spectral-function fields over the whole grid come from a single FFT
  per lambda, since N_{x,y}(lambda) is a mode sum over the dual lattice;
* spheres: Gauss-Legendre nodes s_i in (0, pi) with weights
  D_{n-1} sin^{n-1}(s_i) w_i.

All theorem constants are existential, so pass criteria are slopes and
boundedness ratios with declared tolerances, never absolute values.
Reports hold every grid and measured number needed to recompute their
pass flags; volatile run data (wall time, thread count) never enters a
report so reruns are byte-identical at any thread count.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._numutil import (
    canonical_json,
    config_hash,
    csum,
    fit_line,
    fit_loglog,
    gauss_legendre,
    neumaier_cumsum,
    parallel_map,
)
from .errors import RegimeError, ResolutionError
from .geometry import (
    TWO_PI,
    Circle,
    FlatTorus2,
    Sphere,
    SquareTorus,
    lattice_for,
    manifold_volume,
)
from .spectra import (
    build_series_circle,
    build_series_sphere,
    build_series_torus,
    euclidean_N,
    sphere_diag_growth,
    sphere_node_coefficients,
    torus_diag_growth,
    weyl_leading,
)
from .specialfn import sphere_area_constant
from .zeta import counting_tail_bound

# default tolerances, pinned from the acceptance criteria
AVG_SLOPE_TOL = 0.15
STABILITY_RTOL = 0.005
EXPONENT_TOL = 0.1
KAPPA1_RATIO_MAX = 3.0
LOWER_BOUND_MIN = 0.05
TREND_DIP_TOL = 0.01
NODES_PER_WAVELENGTH = 4


# ---------------------------------------------------------------------------
# Reports


@dataclass
class ScanReport:
    """Self-contained record of one verification scan.

    Every pass flag is recomputable from `grids` and `values`; `meta`
    holds only stable identifiers (schema, config hash), never timings.
    """

    scan_id: str
    params: dict
    grids: dict = field(default_factory=dict)
    values: dict = field(default_factory=dict)
    fits: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def passed(self) -> bool:
        return all(self.flags.values())

    def as_dict(self) -> dict:
        return {
            "scan_id": self.scan_id,
            "params": self.params,
            "grids": self.grids,
            "values": self.values,
            "fits": self.fits,
            "flags": self.flags,
            "notes": self.notes,
            "meta": self.meta,
        }

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(canonical_json(self.as_dict()) + "\n")


def _listify(arr) -> list:
    return [float(v) for v in np.asarray(arr).ravel()]


def _report(name: str, params: dict) -> ScanReport:
    return ScanReport(scan_id=f"{name}-{config_hash(params)}", params=params,
                      meta={"schema": "lapspec-scan-1"})


# ---------------------------------------------------------------------------
# Quadrature rules


@dataclass(eq=False)
class QuadratureRule:
    """Nodes and positive weights summing to the manifold volume.

    Torus rules keep the tensor grid implicit (resolution per axis);
    sphere and disc rules store nodes (angles / radii) and weights.
    """

    kind: str
    manifold: object
    resolution: int
    nodes: np.ndarray | None = None
    weights: np.ndarray | None = None

    def volume(self) -> float:
        if self.kind == "torus_grid":
            return manifold_volume(self.manifold)
        return csum(self.weights)


def torus_rule(manifold, resolution: int) -> QuadratureRule:
    if not isinstance(manifold, (SquareTorus, FlatTorus2)) or manifold.n != 2:
        raise ValueError("torus rules support 2-dimensional flat tori")
    if resolution < 4:
        raise ValueError("grid resolution must be >= 4")
    return QuadratureRule("torus_grid", manifold, int(resolution))


def sphere_rule(n: int, count: int) -> QuadratureRule:
    s, w = gauss_legendre(count, 0.0, math.pi)
    weights = sphere_area_constant(n - 1) * np.sin(s) ** (n - 1) * w
    return QuadratureRule("sphere_angles", Sphere(n), int(count), s, weights)


def disc_rule(radius: float, count: int) -> QuadratureRule:
    """Radial rule for rotation-invariant integrands on a disc in R^2."""
    r, w = gauss_legendre(count, 0.0, radius)
    return QuadratureRule("disc_radial", None, int(count), r, TWO_PI * r * w)


def check_resolution(rule: QuadratureRule, lambda_max: float):
    """Shortest wavelength 2 pi / lambda_max must be covered by >= 4 nodes."""
    if rule.kind == "torus_grid":
        need = int(math.ceil(NODES_PER_WAVELENGTH * lambda_max))
        if rule.resolution < need:
            raise ResolutionError(
                f"torus grid {rule.resolution} under-resolves lambda_max = "
                f"{lambda_max}: need resolution >= {need}"
            )
    elif rule.kind == "sphere_angles":
        need = int(math.ceil(NODES_PER_WAVELENGTH * lambda_max / 2.0))
        if rule.resolution < need:
            raise ResolutionError(
                f"sphere rule with {rule.resolution} nodes under-resolves "
                f"lambda_max = {lambda_max}: need >= {need} nodes"
            )


def integrate_rule(rule: QuadratureRule, node_values: np.ndarray) -> float:
    """Weighted sum for rules that store explicit nodes."""
    return float(rule.weights @ np.asarray(node_values, dtype=float))


# ---------------------------------------------------------------------------
# Torus fields (one FFT per lambda)


@dataclass(eq=False)
class TorusFieldData:
    G: int
    vol: float
    freq: np.ndarray       # (G, G) eigenfrequency 2 pi |xi| of mode (m1, m2)
    unit_phase: np.ndarray  # (G, G) complex e^{i <m, 2 pi u_x>} / vol
    dist: np.ndarray       # (G, G) Riemannian distance d_{x, y_j}
    log_freq: np.ndarray | None = None


def torus_field_data(manifold, G: int, x=(0.0, 0.0)) -> TorusFieldData:
    lat = lattice_for(manifold)
    basis, dual = lat.basis, lat.dual_basis
    x = np.asarray(x, dtype=float)
    modes = np.fft.fftfreq(G, 1.0 / G).astype(np.int64)
    m1, m2 = modes[:, None], modes[None, :]
    # xi = dual @ m; frequency = 2 pi |xi|
    xi1 = dual[0, 0] * m1 + dual[0, 1] * m2
    xi2 = dual[1, 0] * m1 + dual[1, 1] * m2
    freq = TWO_PI * np.sqrt(xi1 * xi1 + xi2 * xi2)
    ux = np.linalg.solve(basis, x)  # fractional coordinates of x
    unit_phase = np.exp(1j * TWO_PI * (m1 * ux[0] + m2 * ux[1])) / lat.volume
    # distance field: min over shifts of |basis @ (u_x - u_j + k)|
    u = np.arange(G) / G
    du1 = ux[0] - u[:, None] + np.zeros((1, G))
    du2 = ux[1] - u[None, :] + np.zeros((G, 1))
    best = np.full((G, G), np.inf)
    for k1 in range(-2, 3):
        for k2 in range(-2, 3):
            w1 = basis[0, 0] * (du1 + k1) + basis[0, 1] * (du2 + k2)
            w2 = basis[1, 0] * (du1 + k1) + basis[1, 1] * (du2 + k2)
            np.minimum(best, np.hypot(w1, w2), out=best)
    return TorusFieldData(G=G, vol=lat.volume, freq=freq, unit_phase=unit_phase, dist=best)


def torus_N_field(data: TorusFieldData, lam: float) -> np.ndarray:
    """N_{x, y}(lambda) over the full grid: modes with 0 < freq < lambda."""
    mask = (data.freq < lam) & (data.freq > 0)
    A = np.where(mask, data.unit_phase, 0.0)
    return np.fft.fft2(A).real


def torus_Z_field(data: TorusFieldData, z: complex) -> np.ndarray:
    """Pointwise zeta field over the grid for Re z > 2, modes freq > 0."""
    if data.log_freq is None:
        with np.errstate(divide="ignore"):
            data.log_freq = np.where(data.freq > 0, np.log(np.maximum(data.freq, 1e-300)), 0.0)
    mask = data.freq > 0
    A = np.where(mask, data.unit_phase * np.exp(-z * data.log_freq), 0.0)
    return np.fft.fft2(A)


def _torus_euclid_field(data: TorusFieldData, lam: float) -> np.ndarray:
    """Euclidean comparison N(lambda, d) over the grid; d = 0 nodes take
    the Weyl value (the d -> 0 limit of the closed form)."""
    out = np.empty_like(data.dist)
    zero = data.dist <= 0.0
    if zero.any():
        out[zero] = weyl_leading(2, lam)
    out[~zero] = euclidean_N(2, data.dist[~zero], lam)
    return out


# ---------------------------------------------------------------------------
# Sphere node evaluators


@dataclass(eq=False)
class SphereNodeData:
    n: int
    angles: np.ndarray
    weights: np.ndarray
    freqs: np.ndarray
    prefix: np.ndarray  # (n_atoms + 1, n_nodes) running sums, row 0 zero

    def N_at(self, lam: float) -> np.ndarray:
        idx = int(np.searchsorted(self.freqs, lam, side="left"))
        return self.prefix[idx]


def sphere_node_data(n: int, rule: QuadratureRule, lambda_max: float) -> SphereNodeData:
    freqs, coeffs = sphere_node_coefficients(n, rule.nodes, lambda_max)
    prefix = np.zeros((len(freqs) + 1, len(rule.nodes)))
    np.cumsum(coeffs, axis=0, out=prefix[1:])
    return SphereNodeData(n, rule.nodes, rule.weights, freqs, prefix)


# ---------------------------------------------------------------------------
# Theorem scans


def verify_manifold_average(
    manifold,
    x,
    lambda_grid,
    rule: QuadratureRule,
    euclid_scale: float = 1.0,
    slope_tol: float = AVG_SLOPE_TOL,
    stability: bool = True,
    threads: int = 1,
) -> ScanReport:
    """Scan of int_M |N~_{x,y} - N~_euclid(d_{x,y})|^2 dy over lambda.

    The theorem asserts a lambda-independent bound, so the pass criterion
    is |log-log slope| <= slope_tol plus grid-refinement stability at the
    largest lambda.  `euclid_scale` deliberately mis-scales the
    comparison term; it exists for mutation tests and must stay 1.0 for
    real runs.
    """
    lam = np.asarray(lambda_grid, dtype=float)
    check_resolution(rule, float(lam.max()))
    n = manifold.n
    rescale = (1 - n) / 2.0
    params = {
        "manifold": str(manifold), "x": _listify(x) if np.ndim(x) else [float(x)],
        "lambda_min": float(lam.min()), "lambda_max": float(lam.max()),
        "points": len(lam), "rule": rule.resolution, "euclid_scale": euclid_scale,
    }
    report = _report("manifold_average", params)

    if rule.kind == "torus_grid":
        data = torus_field_data(manifold, rule.resolution, x)

        def integral_at(l, d=data):
            diff = l**rescale * (torus_N_field(d, l) - euclid_scale * _torus_euclid_field(d, l))
            return float(np.mean(diff * diff) * d.vol)

        vals = np.array(parallel_map(integral_at, lam, threads))
        if stability:
            fine = torus_field_data(manifold, 2 * rule.resolution, x)
            ref = integral_at(float(lam.max()), fine)
    else:
        nd = sphere_node_data(manifold.n, rule, float(lam.max()))

        def integral_sphere(l, nodedata=nd, r=rule):
            diff = l**rescale * (
                nodedata.N_at(l) - euclid_scale * euclidean_N(n, r.nodes, l)
            )
            return float(r.weights @ (diff * diff))

        vals = np.array(parallel_map(integral_sphere, lam, threads))
        if stability:
            fine_rule = sphere_rule(manifold.n, 2 * rule.resolution)
            fine_nd = sphere_node_data(manifold.n, fine_rule, float(lam.max()))
            ref = integral_sphere(float(lam.max()), fine_nd, fine_rule)

    fit = fit_loglog(lam, vals)
    report.grids["lambda"] = _listify(lam)
    report.values["integral"] = _listify(vals)
    report.values["sup"] = float(vals.max())
    report.fits["growth"] = fit.as_dict()
    report.flags["slope_ok"] = abs(fit.slope) <= slope_tol
    report.flags["sup_finite"] = bool(np.isfinite(vals).all())
    if stability:
        rel = abs(ref - vals[-1]) / max(abs(ref), 1e-300)
        report.values["stability_rel_change"] = float(rel)
        report.flags["stability_ok"] = rel < STABILITY_RTOL
    return report


def verify_weighted_average(
    manifold,
    x,
    kappas,
    lambda_grid,
    rule: QuadratureRule,
    exponent_tol: float = EXPONENT_TOL,
    threads: int = 1,
) -> ScanReport:
    """Scan of int_M d^kappa |N~|^2 dy: fitted exponents against max(0, 1-kappa),
    and for kappa = 1 а bounded value / ln(lambda) ratio."""
    lam = np.asarray(lambda_grid, dtype=float)
    check_resolution(rule, float(lam.max()))
    kappas = [float(k) for k in kappas]
    n = manifold.n
    params = {
        "manifold": str(manifold), "kappas": kappas,
        "lambda_min": float(lam.min()), "lambda_max": float(lam.max()),
        "rule": rule.resolution,
    }
    report = _report("weighted_average", params)

    if rule.kind == "torus_grid":
        data = torus_field_data(manifold, rule.resolution, x)

        def row(l):
            nsq = torus_N_field(data, l) ** 2 * l ** (1 - n)
            return [float(np.mean(data.dist**k * nsq) * data.vol) for k in kappas]

        rows = parallel_map(row, lam, threads)
    else:
        nd = sphere_node_data(manifold.n, rule, float(lam.max()))

        def row(l):
            nsq = nd.N_at(l) ** 2 * l ** (1 - n)
            return [float(rule.weights @ (rule.nodes**k * nsq)) for k in kappas]

        rows = parallel_map(row, lam, threads)

    table = np.array(rows)  # (n_lambda, n_kappa)
    report.grids["lambda"] = _listify(lam)
    report.grids["kappa"] = kappas
    report.values["integral"] = [[float(v) for v in r] for r in table]
    for j, k in enumerate(kappas):
        vals = table[:, j]
        key = f"kappa_{k:g}"
        if abs(k - 1.0) < 1e-12:
            ratio_vals = vals / np.log(lam)
            ratio = float(ratio_vals.max() / ratio_vals.min())
            report.values[f"{key}_log_ratio"] = ratio
            report.flags[f"{key}_log_bounded"] = ratio <= KAPPA1_RATIO_MAX
        else:
            fit = fit_loglog(lam, vals)
            report.fits[key] = fit.as_dict()
            target = max(0.0, 1.0 - k)
            if k < 1.0:
                report.flags[f"{key}_exponent_ok"] = abs(fit.slope - target) <= exponent_tol
            else:
                report.flags[f"{key}_exponent_ok"] = fit.slope <= exponent_tol
    return report


def exceptional_set_measure(manifold, x, lam, mu, C, rule: QuadratureRule) -> float:
    """Measure of {y : |N~_{x,y}(lambda)| >= C (mu + d_{x,y}^{-(n+1)/2})}."""
    n = manifold.n
    if rule.kind == "torus_grid":
        data = torus_field_data(manifold, rule.resolution, x)
        nt = np.abs(lam ** ((1 - n) / 2.0) * torus_N_field(data, lam))
        with np.errstate(divide="ignore"):
            thresh = C * (mu + data.dist ** (-(n + 1) / 2.0))
        return float(np.mean(nt >= thresh) * data.vol)
    nd = sphere_node_data(manifold.n, rule, lam * 1.0000001)
    nt = np.abs(lam ** ((1 - n) / 2.0) * nd.N_at(lam))
    thresh = C * (mu + rule.nodes ** (-(n + 1) / 2.0))
    return float(rule.weights @ (nt >= thresh))


def exceptional_set_scan(manifold, x, lambda_grid, mu_grid, C, rule) -> ScanReport:
    lam = np.asarray(lambda_grid, dtype=float)
    mus = np.asarray(mu_grid, dtype=float)
    params = {
        "manifold": str(manifold), "C": float(C),
        "lambda": _listify(lam), "mu": _listify(mus), "rule": rule.resolution,
    }
    report = _report("exceptional_set", params)
    table = np.array(
        [[exceptional_set_measure(manifold, x, l, m, C, rule) for m in mus] for l in lam]
    )
    scaled = table * (C * C) * mus[None, :] ** 2
    report.grids["lambda"] = _listify(lam)
    report.grids["mu"] = _listify(mus)
    report.values["measure"] = [[float(v) for v in r] for r in table]
    report.values["measure_scaled"] = [[float(v) for v in r] for r in scaled]
    report.values["scaled_max"] = float(scaled.max())
    report.flags["scaled_finite"] = bool(np.isfinite(scaled).all())
    # trendwise: the mu^2-scaled measure should not grow from smallest to largest mu
    report.flags["mu_trend_ok"] = bool(
        (scaled[:, -1] <= scaled[:, 0] + 1e-12).all()
    )
    return report


def sequence_corollary_check(
    manifold, x, taus, mus, rule: QuadratureRule, thresholds, k_list, threads: int = 1
) -> ScanReport:
    """Empirical y-fractions of sup_k |mu_k^{-1} N~(tau_k)| over thresholds.

    Reports both the head variant max_{k <= K} and the tail variant
    sup_{k >= K} (the latter matches the limsup statement and should
    decrease as K grows).  Fractions are quadrature-weighted.
    """
    taus = np.asarray(taus, dtype=float)
    mus = np.asarray(mus, dtype=float)
    if len(taus) != len(mus) or np.any(np.diff(mus) < 0):
        raise ValueError("need increasing mus matched with taus")
    thresholds = [float(t) for t in thresholds]
    k_list = [int(k) for k in k_list]
    n = manifold.n
    params = {
        "manifold": str(manifold), "K": len(taus),
        "thresholds": thresholds, "k_list": k_list, "rule": rule.resolution,
    }
    report = _report("sequence_corollary", params)

    if rule.kind == "torus_grid":
        data = torus_field_data(manifold, rule.resolution, x)
        fields = parallel_map(
            lambda i: np.abs(
                taus[i] ** ((1 - n) / 2.0) * torus_N_field(data, taus[i])
            ) / mus[i],
            range(len(taus)),
            threads,
        )

        def frac(mask):
            return float(np.mean(mask))
    else:
        nd = sphere_node_data(manifold.n, rule, float(taus.max()))
        fields = [
            np.abs(taus[i] ** ((1 - n) / 2.0) * nd.N_at(taus[i])) / mus[i]
            for i in range(len(taus))
        ]
        wsum = csum(rule.weights)

        def frac(mask):
            return float(rule.weights @ mask) / wsum

    head, tail = {}, {}
    running = np.zeros_like(fields[0])
    ks = set(k_list)
    for i in range(len(taus)):
        np.maximum(running, fields[i], out=running)
        if i + 1 in ks:
            head[i + 1] = [frac(running >= t) for t in thresholds]
    running = np.zeros_like(fields[0])
    for i in range(len(taus) - 1, -1, -1):
        np.maximum(running, fields[i], out=running)
        if i + 1 in ks:
            tail[i + 1] = [frac(running >= t) for t in thresholds]

    report.grids["thresholds"] = thresholds
    report.grids["k_list"] = k_list
    report.values["fraction_head_max"] = {str(k): head[k] for k in sorted(head)}
    report.values["fraction_tail_sup"] = {str(k): tail[k] for k in sorted(tail)}
    sorted_k = sorted(tail)
    report.flags["tail_decreasing_in_K"] = all(
        all(tail[a][j] >= tail[b][j] - 1e-12 for j in range(len(thresholds)))
        for a, b in zip(sorted_k, sorted_k[1:])
    )
    report.flags["vanishing_at_large_threshold"] = all(
        v[-1] <= v[0] + 1e-12 for v in head.values()
    )
    return report


# ---------------------------------------------------------------------------
# Spectral-parameter averages (exact panel integrals)


def _series_for_pair(manifold, pair, lambda_max: float):
    if isinstance(manifold, Circle):
        return build_series_circle(float(pair), lambda_max)
    if isinstance(manifold, (SquareTorus, FlatTorus2)):
        return build_series_torus(lattice_for(manifold), pair, lambda_max)
    if isinstance(manifold, Sphere):
        return build_series_sphere(manifold.n, float(pair), lambda_max)
    raise ValueError(f"no spectral series for {manifold!r}")


def _power_panel_integrals(freqs, lo, hi, exponent):
    """Exact integrals of mu^exponent over [max(f_i, lo), min(f_{i+1}, hi)]."""
    edges = np.concatenate(([lo], freqs[(freqs > lo) & (freqs < hi)], [hi]))
    if abs(exponent + 1.0) < 1e-14:
        vals = np.log(edges[1:]) - np.log(edges[:-1])
    else:
        e1 = exponent + 1.0
        vals = (edges[1:] ** e1 - edges[:-1] ** e1) / e1
    return edges, vals


def verify_lower_bound(
    manifold,
    pair,
    q: float,
    p: float,
    lambda_grid,
    min_threshold: float = LOWER_BOUND_MIN,
) -> ScanReport:
    """Running averages lambda^{-q-1} int_0^lambda mu^q |N~|^p d mu.

    |N~|^p is piecewise mu^{p(1-n)/2} |N_i|^p between eigenvalue jumps,
    so every panel integrates exactly by the power rule.  The theorem
    predicts a positive lower bound; the flags check the minimum over
    the upper half of the grid and a non-decreasing trend on the last
    decade.
    """
    if q < 0 or p < 1:
        raise ValueError("need q >= 0 and p >= 1")
    lam = np.sort(np.asarray(lambda_grid, dtype=float))
    series = _series_for_pair(manifold, pair, float(lam.max()))
    n = series.n
    freqs = series.freqs
    nvals = series.prefix()[1:]  # N just past each jump
    exponent = q + p * (1 - n) / 2.0
    first = float(freqs[0])
    running = []
    # prefix integrals I(f_j) over [first, f_j]
    if abs(exponent + 1.0) < 1e-14:
        raw = np.diff(np.log(freqs))
    else:
        e1 = exponent + 1.0
        raw = np.diff(freqs**e1) / e1
    contrib = np.abs(nvals[:-1]) ** p * raw
    I_at_jump = np.concatenate(([0.0], neumaier_cumsum(contrib)))
    for l in lam:
        j = int(np.searchsorted(freqs, l, side="left"))
        total = I_at_jump[max(j - 1, 0)]
        if j >= 1:
            lo = float(freqs[j - 1])
            if abs(exponent + 1.0) < 1e-14:
                tail = math.log(l) - math.log(lo)
            else:
                tail = (l ** (exponent + 1.0) - lo ** (exponent + 1.0)) / (exponent + 1.0)
            total += abs(nvals[j - 1]) ** p * tail
        running.append(l ** (-q - 1.0) * total)
    running = np.array(running)

    params = {
        "manifold": str(manifold), "q": q, "p": p,
        "lambda_min": float(lam.min()), "lambda_max": float(lam.max()),
    }
    report = _report("lower_bound", params)
    upper_half = lam >= math.sqrt(lam.min() * lam.max())
    last_decade = lam >= lam.max() / 10.0
    report.grids["lambda"] = _listify(lam)
    report.values["running_average"] = _listify(running)
    report.values["min_upper_half"] = float(running[upper_half].min())
    trend = fit_line(np.log(lam[last_decade]), running[last_decade])
    report.fits["last_decade_trend"] = trend.as_dict()
    report.flags["min_ok"] = float(running[upper_half].min()) >= min_threshold
    start, end = running[last_decade][0], running[last_decade][-1]
    report.flags["trend_ok"] = end >= start * (1.0 - TREND_DIP_TOL)
    return report


def log_divergence_check(
    manifold, pair, lambda_max: float, eps: float = 0.5, grid_points: int = 25
) -> ScanReport:
    """Partial integrals I(lambda) = int_1^lambda mu^{-1} |N~|^2 d mu (expected
    ~ ln lambda) and J_eps with the extra (ln mu)^{-1-eps} weight (expected
    to stabilize).  J starts at mu = e where the weight is integrable."""
    series = _series_for_pair(manifold, pair, float(lambda_max))
    n = series.n
    freqs = series.freqs
    nvals = series.prefix()[1:]
    lam_grid = np.exp(np.linspace(math.log(100.0), math.log(lambda_max), grid_points))

    def partial(l, weight):
        edges = np.concatenate(([1.0], freqs[(freqs > 1.0) & (freqs < l)], [l]))
        idx = np.searchsorted(freqs, edges[:-1], side="right")
        nsq = np.abs(np.where(idx > 0, nvals[np.maximum(idx - 1, 0)], 0.0)) ** 2
        return float(csum(nsq * weight(edges[:-1], edges[1:])))

    def w_plain(a, b):
        if n == 1:
            return np.log(b) - np.log(a)
        e1 = 1.0 - n
        return (b**e1 - a**e1) / e1

    def w_logeps(a, b):
        lo = np.maximum(a, math.e)
        hi = np.maximum(b, math.e)
        x, w = np.polynomial.legendre.leggauss(8)
        mid, half = 0.5 * (hi + lo), 0.5 * (hi - lo)
        nodes = mid[:, None] + half[:, None] * x[None, :]
        vals = nodes ** (-float(n)) * np.log(nodes) ** (-1.0 - eps)
        return half * (vals @ w)

    I_vals = np.array([partial(l, w_plain) for l in lam_grid])
    J_vals = np.array([partial(l, w_logeps) for l in lam_grid])
    params = {"manifold": str(manifold), "lambda_max": float(lambda_max), "eps": eps}
    report = _report("log_divergence", params)
    fit = fit_line(np.log(lam_grid), I_vals)
    report.grids["lambda"] = _listify(lam_grid)
    report.values["I"] = _listify(I_vals)
    report.values["J_eps"] = _listify(J_vals)
    report.fits["I_vs_log_lambda"] = fit.as_dict()
    report.flags["I_log_linear"] = fit.r2 >= 0.9
    decades = np.searchsorted(lam_grid, [1e2, 1e3, 1e4])
    incs = np.diff(J_vals[np.clip(decades, 0, len(J_vals) - 1)])
    if len(incs) >= 2:
        report.values["J_decade_increments"] = _listify(incs)
        report.flags["J_increments_decreasing"] = bool(np.all(np.diff(incs) <= 1e-12))
    return report


# ---------------------------------------------------------------------------
# zeta manifold average (called via zeta.zeta_manifold_average)


def zeta_average_scan(manifold, x, t, s_grid, rule, eps, lambda_cutoff, threads=1):
    if t <= manifold.n:
        raise RegimeError("zeta manifold average needs t > n")
    n = manifold.n
    power = 2.0 * t - n - eps
    params = {
        "manifold": str(manifold), "t": t, "eps": eps,
        "s": _listify(s_grid), "rule": rule.resolution,
        "lambda_cutoff": float(lambda_cutoff),
    }
    report = _report("zeta_average", params)

    if rule.kind == "torus_grid":
        lat = lattice_for(manifold)
        data = torus_field_data(manifold, rule.resolution, x)
        # every mode inside the cutoff ball must fit the FFT index box
        top = TWO_PI * (rule.resolution // 2 - 1) / np.linalg.norm(lat.basis, 2)
        cutoff = min(float(lambda_cutoff), top)
        data = TorusFieldData(
            G=data.G, vol=data.vol, freq=np.where(data.freq <= cutoff, data.freq, 0.0),
            unit_phase=data.unit_phase, dist=data.dist,
        )
        weight = 1.0 / (data.dist**power + 1.0)

        def one(s):
            Z = torus_Z_field(data, complex(t, s))
            return float(np.mean(np.abs(Z) ** 2 * weight) * data.vol)

        vals = np.array(parallel_map(one, s_grid, threads))
        tail = counting_tail_bound(torus_diag_growth(n, lat.dual_basis), n, t, cutoff)
    else:
        nd = sphere_node_data(n, rule, float(lambda_cutoff))
        coeff = np.diff(nd.prefix, axis=0)  # original coefficients
        weight = 1.0 / (rule.nodes**power + 1.0)
        cutoff = float(lambda_cutoff)

        def one(s):
            w = np.exp(-complex(t, s) * np.log(nd.freqs))
            Z = coeff.T @ w
            return float(rule.weights @ (np.abs(Z) ** 2 * weight))

        vals = np.array(parallel_map(one, s_grid, threads))
        tail = counting_tail_bound(sphere_diag_growth(n), n, t, cutoff)

    bracket = np.sqrt(1.0 + np.asarray(s_grid) ** 2)
    mask = np.abs(np.asarray(s_grid)) >= 5.0
    fit = fit_line(np.log(bracket[mask]), np.log(vals[mask]))
    report.grids["s"] = _listify(s_grid)
    report.values["integral"] = _listify(vals)
    report.values["node_tail_bound"] = float(tail)
    report.values["cutoff_used"] = float(cutoff)
    report.fits["growth"] = fit.as_dict()
    report.flags["slope_ok"] = fit.slope <= 0.1
    return report
