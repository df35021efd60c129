"""Exact spectral functions N_{x,y}(lambda) on the model manifolds.

A series holds one atom per distinct eigenfrequency: the frequency (the
square root of a Laplace eigenvalue) together with the eigenspace sum of
phi_j(x) * conj(phi_j(y)), which is real on every model manifold.

Conventions:
* N(lambda) sums coefficients with frequency strictly below lambda, so N
  is left-continuous at jumps and N(lambda) = 0 up to and including the
  smallest positive frequency.
* The zero mode (constant eigenfunction, coefficient 1/Vol) is excluded
  by default; `include_zero_mode=True` switches to the convention that
  keeps it.
* Atoms aggregate exactly degenerate frequencies into a single entry;
  on square tori the shells are indexed by the integer |m|^2, on general
  lattices grouping uses a 1e-9 relative tolerance.
* Evaluation uses compensated prefix sums in ascending frequency order,
  so results are identical no matter how evaluation points are batched.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import geometry
from ._numutil import fmt17, neumaier_cumsum
from .errors import CapacityError, ConjugatePointError, CutoffExceededError, RegimeError
from .geometry import TWO_PI, Lattice
from .specialfn import bessel_j, legendre_muller_table, multiplicity, sphere_area_constant

FREQ_GROUP_RTOL = 1e-9
_CHUNK_POINTS = 4_000_000


@dataclass(frozen=True)
class SpectralAtom:
    frequency: float
    coefficient: float


@dataclass(frozen=True)
class RescaledValue:
    """lambda together with lambda^((1-n)/2) * N(lambda)."""

    lambda_: float
    value: float

    def unrescaled(self, n: int) -> float:
        return self.value * self.lambda_ ** ((n - 1) / 2.0)


def unit_ball_volume(n: int) -> float:
    return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)


@dataclass(eq=False)
class SpectralSeries:
    """Aggregated eigenfrequency atoms of one (manifold, pair) up to a cutoff.

    diag_coeffs are the diagonal (x = y) shell coefficients, which bound
    the off-diagonal ones in absolute value; diag_growth = (A, B) gives
    the analytic counting bound N_{x,x}(mu) <= A (mu + B)^n used to
    certify truncation tails.
    """

    n: int
    freqs: np.ndarray
    coeffs: np.ndarray
    diag_coeffs: np.ndarray
    zero_coefficient: float
    lambda_max: float
    volume: float
    diag_growth: tuple[float, float]
    label: str
    distance: float
    include_zero_mode: bool = False
    _prefix: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        for arr in (self.freqs, self.coeffs, self.diag_coeffs):
            arr.setflags(write=False)
        if len(self.freqs) > 1 and np.any(np.diff(self.freqs) <= 0):
            raise ValueError("atom frequencies must be strictly increasing")

    @property
    def atoms(self) -> list[SpectralAtom]:
        return [SpectralAtom(float(f), float(c)) for f, c in zip(self.freqs, self.coeffs)]

    def prefix(self) -> np.ndarray:
        """Compensated running sums of coefficients, leading zero included."""
        if self._prefix is None:
            p = np.empty(len(self.coeffs) + 1)
            p[0] = 0.0
            p[1:] = neumaier_cumsum(self.coeffs)
            p.setflags(write=False)
            self._prefix = p
        return self._prefix

    def with_zero_mode(self, flag: bool) -> "SpectralSeries":
        out = SpectralSeries(
            n=self.n, freqs=self.freqs, coeffs=self.coeffs,
            diag_coeffs=self.diag_coeffs, zero_coefficient=self.zero_coefficient,
            lambda_max=self.lambda_max, volume=self.volume,
            diag_growth=self.diag_growth, label=self.label, distance=self.distance,
            include_zero_mode=flag,
        )
        out._prefix = self._prefix
        return out


# ---------------------------------------------------------------------------
# Torus series


def _flush_shells(cos_acc, cnt_acc, ks, ws):
    k = np.concatenate(ks)
    w = np.concatenate(ws)
    cos_acc += np.bincount(k, weights=w, minlength=len(cos_acc))
    cnt_acc += np.bincount(k, minlength=len(cnt_acc))


def _square_torus_shells(n, period, delta, lambda_max, cap):
    """Shell sums over m in Z^n, |m| <= M, keyed by the integer |m|^2."""
    scale = TWO_PI / period
    M = int(math.floor(lambda_max / scale * (1.0 + 1e-14)))
    kmax = M * M
    estimate = unit_ball_volume(n) * (M + 1.5) ** n
    if estimate > cap:
        raise CapacityError(
            f"square-torus shell build needs ~{estimate:.3g} lattice points, cap is {cap}"
        )
    cos_acc = np.zeros(kmax + 1)
    cnt_acc = np.zeros(kmax + 1)
    phase = scale * np.asarray(delta, dtype=float)
    if M >= 0 and n == 1:
        m = np.arange(-M, M + 1, dtype=np.int64)
        _flush_shells(cos_acc, cnt_acc, [m * m], [np.cos(phase[0] * m)])
    elif M >= 0:
        ks, ws, pending = [], [], 0
        for m1 in range(-M, M + 1):
            r2 = kmax - m1 * m1
            r = int(math.floor(math.sqrt(r2) + 1e-9))
            m2 = np.arange(-r, r + 1, dtype=np.int64)
            if n == 2:
                k = m1 * m1 + m2 * m2
                arg = phase[0] * m1 + phase[1] * m2
            elif n == 3:
                g2, g3 = np.meshgrid(m2, m2, indexing="ij")
                keep = g2 * g2 + g3 * g3 <= r2
                g2, g3 = g2[keep], g3[keep]
                k = m1 * m1 + g2 * g2 + g3 * g3
                arg = phase[0] * m1 + phase[1] * g2 + phase[2] * g3
            else:
                raise NotImplementedError("square torus shells support n <= 3")
            ks.append(k)
            ws.append(np.cos(arg))
            pending += len(k)
            if pending >= _CHUNK_POINTS:
                _flush_shells(cos_acc, cnt_acc, ks, ws)
                ks, ws, pending = [], [], 0
        if ks:
            _flush_shells(cos_acc, cnt_acc, ks, ws)
    present = np.nonzero(cnt_acc > 0)[0]
    present = present[present > 0]  # zero mode handled separately
    freqs = scale * np.sqrt(present.astype(float))
    return freqs, cos_acc[present], cnt_acc[present]


def _general_torus_shells(lattice, delta, lambda_max, cap):
    dual = geometry.dual_lattice(lattice.dual_basis)
    pts = geometry.enumerate_lattice_points(dual, lambda_max / TWO_PI, cap)
    norms = np.sqrt((pts**2).sum(axis=1))
    keep = norms > 1e-300
    pts, norms = pts[keep], norms[keep]
    freqs_raw = TWO_PI * norms
    order = np.argsort(freqs_raw, kind="stable")
    freqs_raw = freqs_raw[order]
    vals = np.cos(TWO_PI * (pts[order] @ np.asarray(delta, dtype=float)))
    if len(freqs_raw) == 0:
        return freqs_raw, vals, vals
    gaps = np.diff(freqs_raw) > FREQ_GROUP_RTOL * freqs_raw[1:]
    starts = np.concatenate(([0], np.nonzero(gaps)[0] + 1))
    freqs = freqs_raw[starts]
    coeffs = np.add.reduceat(vals, starts)
    counts = np.add.reduceat(np.ones_like(vals), starts)
    return freqs, coeffs, counts


def torus_diag_growth(n: int, dual_basis: np.ndarray) -> tuple[float, float]:
    """(A, B) with N_{x,x}(mu) <= A (mu + B)^n on the torus.

    Comes from pi_n (mu/(2 pi) + rho)^n with rho at least the covering
    radius of the dual lattice.
    """
    rho = 0.5 * float(np.sqrt((dual_basis**2).sum(axis=0)).sum())
    return unit_ball_volume(n) / TWO_PI**n, TWO_PI * rho


def sphere_diag_growth(n: int) -> tuple[float, float]:
    """(A, B) with N_{x,x}(mu) <= A (mu + B)^n on S^n."""
    return 2.0 / (math.gamma(n + 1) * sphere_area_constant(n)), float(n + 1)


def build_series_torus(
    lattice: Lattice,
    displacement,
    lambda_max: float,
    include_zero_mode: bool = False,
    cap: int = geometry.DEFAULT_POINT_CAP,
) -> SpectralSeries:
    """Spectral series on R^n/Gamma: frequencies 2 pi |xi| over the dual
    lattice, shell coefficients (1/Vol) sum of cos(2 pi <delta, xi>)."""
    if lambda_max <= 0:
        raise ValueError("lambda_max must be positive")
    delta = np.asarray(displacement, dtype=float).reshape(lattice.n)
    basis = lattice.basis
    period = basis[0, 0]
    is_square = np.allclose(basis, period * np.eye(lattice.n), atol=0.0) and period > 0
    if is_square:
        freqs, shell_cos, shell_cnt = _square_torus_shells(
            lattice.n, period, delta, lambda_max, cap
        )
    else:
        freqs, shell_cos, shell_cnt = _general_torus_shells(lattice, delta, lambda_max, cap)
    vol = lattice.volume
    A, B = torus_diag_growth(lattice.n, lattice.dual_basis)
    return SpectralSeries(
        n=lattice.n,
        freqs=freqs,
        coeffs=shell_cos / vol,
        diag_coeffs=shell_cnt / vol,
        zero_coefficient=1.0 / vol,
        lambda_max=float(lambda_max),
        volume=vol,
        diag_growth=(A, B),
        label=f"torus{lattice.n}d",
        distance=geometry.torus_distance(lattice, delta),
        include_zero_mode=include_zero_mode,
    )


def build_series_circle(d: float, lambda_max: float, include_zero_mode: bool = False) -> SpectralSeries:
    """Unit-circle series: frequencies m = 1, 2, ..., coefficients cos(m d)/pi."""
    if not 0 < d < TWO_PI:
        raise ConjugatePointError("circle pair needs 0 < d < 2 pi")
    if lambda_max <= 0:
        raise ValueError("lambda_max must be positive")
    m = np.arange(1, int(math.floor(lambda_max * (1 + 1e-14))) + 1, dtype=float)
    return SpectralSeries(
        n=1,
        freqs=m,
        coeffs=np.cos(m * d) / math.pi,
        diag_coeffs=np.full(len(m), 1.0 / math.pi),
        zero_coefficient=1.0 / TWO_PI,
        lambda_max=float(lambda_max),
        volume=TWO_PI,
        diag_growth=torus_diag_growth(1, np.eye(1) / TWO_PI),
        label="circle",
        distance=min(d, TWO_PI - d),
        include_zero_mode=include_zero_mode,
    )


# ---------------------------------------------------------------------------
# Sphere series


def sphere_frequency(n: int, m) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    return np.sqrt(m * (m + n - 1))


def sphere_degree_cutoff(n: int, lambda_max: float) -> int:
    """Largest m with sqrt(m(m+n-1)) <= lambda_max."""
    disc = (n - 1) ** 2 + 4.0 * lambda_max**2
    return int(math.floor((math.sqrt(disc) - (n - 1)) / 2.0 * (1 + 1e-14)))


def build_series_sphere(
    n: int,
    s: float,
    lambda_max: float,
    include_zero_mode: bool = False,
    allow_conjugate: bool = False,
) -> SpectralSeries:
    """Series on S^n at angle s: frequencies sqrt(m(m+n-1)), coefficients
    N(n,m) P_m(n, cos s) / D_n.  Conjugate angles s in {0, pi} are exact
    (P_m(+-1) = (+-1)^m) but must be requested explicitly."""
    if n < 2:
        raise ValueError("sphere dimension must be >= 2")
    if lambda_max <= 0:
        raise ValueError("lambda_max must be positive")
    conj = s <= geometry.CONJUGATE_TOL or abs(s - math.pi) <= geometry.CONJUGATE_TOL
    if (conj or not 0 <= s <= math.pi) and not allow_conjugate:
        raise ConjugatePointError(f"sphere pair needs 0 < s < pi, got {s}")
    m_max = sphere_degree_cutoff(n, lambda_max)
    ms = np.arange(1, m_max + 1)
    mult = np.array([float(multiplicity(n, int(m))) for m in ms])
    dn = sphere_area_constant(n)
    pvals = legendre_muller_table(n, m_max, math.cos(s))[1:] if m_max >= 1 else np.empty(0)
    return SpectralSeries(
        n=n,
        freqs=sphere_frequency(n, ms),
        coeffs=mult * pvals / dn,
        diag_coeffs=mult / dn,
        zero_coefficient=1.0 / dn,
        lambda_max=float(lambda_max),
        volume=dn,
        diag_growth=sphere_diag_growth(n),
        label=f"sphere{n}d",
        distance=float(s),
        include_zero_mode=include_zero_mode,
    )


# ---------------------------------------------------------------------------
# Closed forms


def spectral_function_circle(d: float, lam):
    """Circle closed form: -1/(2 pi) + sin((ceil(lam)-1/2) d) / (2 pi sin(d/2)).

    Equals the strict cosine sum (1/pi) sum_{1 <= m < lam} cos(m d).
    """
    if not 0 < d < TWO_PI:
        raise ConjugatePointError("coincident points: need 0 < d < 2 pi")
    lam_arr = np.asarray(lam, dtype=float)
    if np.any(lam_arr <= 0):
        raise ValueError("lambda must be positive")
    val = -0.5 / math.pi + np.sin((np.ceil(lam_arr) - 0.5) * d) / (
        TWO_PI * math.sin(0.5 * d)
    )
    return float(val) if lam_arr.ndim == 0 else val


def euclidean_N(n: int, d, lam):
    """Euclidean spectral function (2 pi)^(-n/2) d^(-n/2) lam^(n/2) J_{n/2}(d lam)."""
    d_arr = np.asarray(d, dtype=float)
    lam_arr = np.asarray(lam, dtype=float)
    if np.any(d_arr <= 0):
        raise ValueError("requires d > 0 (use weyl_leading on the diagonal)")
    if np.any(lam_arr < 0):
        raise ValueError("lambda must be >= 0")
    d_b, lam_b = np.broadcast_arrays(d_arr, lam_arr)
    val = (
        TWO_PI ** (-n / 2.0)
        * d_b ** (-n / 2.0)
        * lam_b ** (n / 2.0)
        * bessel_j(n / 2.0, d_b * lam_b)
    )
    return float(val) if val.ndim == 0 else val


def euclidean_N_asymptotic(n: int, d, lam):
    """Leading oscillatory term 2 lam^((n-1)/2) sin(lam d - (n-1) pi/4) / (2 pi d)^((n+1)/2)."""
    d_arr = np.asarray(d, dtype=float)
    lam_arr = np.asarray(lam, dtype=float)
    if np.any(d_arr * lam_arr < 1.0):
        raise RegimeError("asymptotic form requires d * lambda >= 1")
    d_b, lam_b = np.broadcast_arrays(d_arr, lam_arr)
    val = (
        2.0
        * lam_b ** ((n - 1) / 2.0)
        / (TWO_PI * d_b) ** ((n + 1) / 2.0)
        * np.sin(lam_b * d_b - (n - 1) * math.pi / 4.0)
    )
    return float(val) if val.ndim == 0 else val


def weyl_leading(n: int, lam):
    """Leading Weyl term lam^n / ((4 pi)^(n/2) Gamma(n/2 + 1))."""
    lam_arr = np.asarray(lam, dtype=float)
    if np.any(lam_arr < 0):
        raise ValueError("lambda must be >= 0")
    val = lam_arr**n / ((4.0 * math.pi) ** (n / 2.0) * math.gamma(n / 2.0 + 1.0))
    return float(val) if lam_arr.ndim == 0 else val


# ---------------------------------------------------------------------------
# Evaluation


def _check_cutoff(series: SpectralSeries, lam_arr: np.ndarray):
    top = float(lam_arr.max()) if lam_arr.size else 0.0
    if top > series.lambda_max * (1.0 + 1e-12):
        raise CutoffExceededError(
            f"lambda = {top} exceeds series cutoff {series.lambda_max}"
        )


def evaluate_N(series: SpectralSeries, lam):
    """N(lambda): compensated sum of coefficients with frequency < lambda."""
    lam_arr = np.asarray(lam, dtype=float)
    _check_cutoff(series, np.atleast_1d(lam_arr))
    idx = np.searchsorted(series.freqs, lam_arr, side="left")
    val = series.prefix()[idx]
    if series.include_zero_mode:
        val = val + series.zero_coefficient
    return float(val) if lam_arr.ndim == 0 else val


def evaluate_rescaled(series: SpectralSeries, lam):
    """Rescaled value lambda^((1-n)/2) N(lambda); RescaledValue for scalars."""
    lam_arr = np.asarray(lam, dtype=float)
    if np.any(lam_arr <= 0):
        raise ValueError("rescaling requires lambda > 0")
    raw = evaluate_N(series, lam_arr)
    val = lam_arr ** ((1 - series.n) / 2.0) * raw
    if lam_arr.ndim == 0:
        return RescaledValue(float(lam_arr), float(val))
    return val


def export_series(series: SpectralSeries, path):
    """Columnar text export: one `frequency coefficient` pair per line."""
    lines = [
        f"# lapspec spectral series: {series.label}",
        f"# n = {series.n}, lambda_max = {fmt17(series.lambda_max)}",
        f"# zero_coefficient = {fmt17(series.zero_coefficient)}"
        f" (include_zero_mode = {series.include_zero_mode})",
        "# columns: frequency coefficient",
    ]
    lines.extend(
        f"{fmt17(f)} {fmt17(c)}" for f, c in zip(series.freqs, series.coeffs)
    )
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def sphere_node_coefficients(n: int, s_nodes: np.ndarray, lambda_max: float):
    """Shared-frequency sphere data for many angles at once.

    Returns (freqs, coeffs) with coeffs of shape (m_max, len(s_nodes)):
    column j holds the series coefficients at angle s_nodes[j].  The zero
    mode (1/D_n) is not included.
    """
    m_max = sphere_degree_cutoff(n, lambda_max)
    ms = np.arange(1, m_max + 1)
    mult = np.array([float(multiplicity(n, int(m))) for m in ms])
    dn = sphere_area_constant(n)
    table = legendre_muller_table(n, m_max, np.cos(np.asarray(s_nodes, dtype=float)))
    return sphere_frequency(n, ms), table[1:] * (mult / dn)[:, None]
