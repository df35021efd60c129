"""Truncated almost-periodic expansions from geodesic data.

The candidate expansion attaches to each geodesic segment gamma one term

    (2 / (2 pi)^((n+1)/2)) * sin(lambda l - (n-1) pi/4 - omega pi/2) / (l sqrt(a)),

so amplitude = 2 / ((2 pi)^((n+1)/2) l sqrt(a)), frequency = l and phase
= -(n-1) pi/4 - omega pi/2.  On the circle this reduces to
sin(lambda l)/(pi l); on flat 2-tori to the 2 sin(lambda l - pi/4) /
((2 pi)^(3/2) l^(3/2)) terms; on spheres the phase equals
-(n - 1 + 2 omega_k) pi / 4.

Besicovitch seminorms are estimated at a finite horizon T only: the
limsup itself is not computable, so estimates ship with a history over
T/4, T/2, T for convergence diagnosis.  Seminorm averages run over
[0, T]; squared residuals against a spectral series run over [1, T].
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._numutil import csum, nc9_nodes_weights, panel_breaks
from .errors import ConjugatePointError, CutoffExceededError
from .geometry import TWO_PI, GeodesicSegment
from .spectra import SpectralSeries, evaluate_N

_EVAL_CHUNK = 2_000_000


@dataclass(frozen=True)
class TrigTerm:
    amplitude: float
    frequency: float
    phase: float

    def __post_init__(self):
        if not self.frequency > 0:
            raise ValueError("term frequency must be positive")


@dataclass(frozen=True)
class ApExpansion:
    """Finite trigonometric sum with an optional constant offset.

    Terms are sorted ascending by frequency; every frequency is a
    geodesic length and must not exceed the cutoff.
    """

    terms: tuple[TrigTerm, ...]
    cutoff: float
    n: int
    constant: float = 0.0
    label: str = ""

    def __post_init__(self):
        freqs = [t.frequency for t in self.terms]
        if any(f > self.cutoff * (1 + 1e-12) for f in freqs):
            raise ValueError("term frequency exceeds the expansion cutoff")
        if any(b < a for a, b in zip(freqs, freqs[1:])):
            raise ValueError("terms must be sorted ascending by frequency")

    @property
    def max_frequency(self) -> float:
        return self.terms[-1].frequency if self.terms else 0.0

    def with_constant(self, c: float) -> "ApExpansion":
        return ApExpansion(self.terms, self.cutoff, self.n, c, self.label)


def morse_phase_check(n: int, k: int) -> float:
    """Phase -(n-1+2*omega_k) pi/4 of the sphere term winding k times."""
    omega = (n - 1) * (2 * abs(k) - (1 if k < 0 else 0))
    return -(n - 1 + 2 * omega) * math.pi / 4.0


def expansion_from_geodesics(
    segments, n: int, cutoff: float, label: str = ""
) -> ApExpansion:
    """One trigonometric term per geodesic segment, frequencies <= cutoff."""
    pref = 2.0 / TWO_PI ** ((n + 1) / 2.0)
    terms = []
    for seg in segments:
        if isinstance(seg, GeodesicSegment) and not seg.jacobi_det > 0:
            raise ConjugatePointError("segment with vanishing Jacobi determinant")
        if seg.length > cutoff * (1 + 1e-12):
            continue
        terms.append(
            TrigTerm(
                amplitude=pref / (seg.length * math.sqrt(seg.jacobi_det)),
                frequency=seg.length,
                phase=-(n - 1) * math.pi / 4.0 - seg.morse_index * math.pi / 2.0,
            )
        )
    terms.sort(key=lambda t: (t.frequency, t.phase, t.amplitude))
    return ApExpansion(tuple(terms), float(cutoff), n, 0.0, label)


def eval_expansion(e: ApExpansion, lam):
    """Sum of amplitude * sin(frequency * lambda + phase) in fixed term order."""
    lam_arr = np.asarray(lam, dtype=float)
    if lam_arr.ndim == 0:
        parts = [t.amplitude * math.sin(t.frequency * float(lam_arr) + t.phase) for t in e.terms]
        return e.constant + csum(parts)
    acc = np.full(lam_arr.shape, e.constant, dtype=float)
    for t in e.terms:
        acc += t.amplitude * np.sin(t.frequency * lam_arr + t.phase)
    return acc


# ---------------------------------------------------------------------------
# Seminorms


@dataclass(frozen=True)
class SeminormEstimate:
    p: float
    horizon: float
    value: float
    samples_per_unit: float
    history: tuple[tuple[float, float], ...]


def besicovitch_seminorm(
    f,
    p: float,
    T: float,
    samples_per_unit: float,
    max_frequency: float | None = None,
) -> SeminormEstimate:
    """Horizon-T estimate ((1/T) int_0^T |f|^p)^(1/p) by the midpoint rule.

    If the signal's top frequency is known, the sampling density must
    satisfy the Nyquist-style guard samples_per_unit >= 8 * freq / (2 pi).
    The history holds the same functional at horizons T/4, T/2, T.
    """
    if p < 1:
        raise ValueError("exponent p must be >= 1")
    if T <= 0 or samples_per_unit <= 0:
        raise ValueError("T and samples_per_unit must be positive")
    if max_frequency is not None and samples_per_unit < 8.0 * max_frequency / TWO_PI:
        raise ValueError(
            f"samples_per_unit = {samples_per_unit} under-resolves max frequency "
            f"{max_frequency}: need >= {8.0 * max_frequency / TWO_PI}"
        )
    npanels = 4 * max(1, int(math.ceil(T * samples_per_unit / 4.0)))
    h = T / npanels
    quarter = npanels // 4
    history = []
    total = 0.0
    for block in range(4):
        mids = (np.arange(block * quarter, (block + 1) * quarter) + 0.5) * h
        vals = np.abs(np.asarray(f(mids), dtype=float)) ** p
        bad = ~np.isfinite(vals)
        if bad.any():
            raise ValueError(f"nonfinite sample at lambda = {mids[bad][0]}")
        total += h * csum(vals)
        horizon = (block + 1) * quarter * h
        if block in (0, 1, 3):
            history.append((horizon, (total / horizon) ** (1.0 / p)))
    return SeminormEstimate(
        p=p,
        horizon=T,
        value=history[-1][1],
        samples_per_unit=samples_per_unit,
        history=tuple(history),
    )


def b2_residual(
    series: SpectralSeries,
    e: ApExpansion,
    T: float,
    points_per_wavelength: int = 8,
) -> float:
    """(1/T) int_1^T |N~(lambda) - expansion(lambda)|^2 d lambda.

    Quadrature panels split at the eigenvalue jumps of N (exact from the
    series) and are subdivided so no panel exceeds 2 pi / (8 f_max); a
    closed 9-point rule integrates each panel.
    """
    if e.cutoff > series.lambda_max * (1 + 1e-12):
        raise CutoffExceededError("expansion cutoff exceeds series cutoff")
    if T > series.lambda_max * (1 + 1e-12):
        raise CutoffExceededError(f"T = {T} exceeds series cutoff {series.lambda_max}")
    if T <= 1.0:
        raise ValueError("averaging horizon must exceed the lower limit 1")
    max_freq = max(e.max_frequency, 1.0)
    width = TWO_PI / (points_per_wavelength * max_freq)
    edges = panel_breaks(1.0, float(T), series.freqs, width)
    rescale = (1 - series.n) / 2.0
    total = 0.0
    # panels processed in fixed chunks; each chunk contributes one exact sum
    step = max(1, _EVAL_CHUNK // 9)
    chunk_totals = []
    for lo in range(0, len(edges) - 1, step):
        sub = edges[lo : min(lo + step + 1, len(edges))]
        nodes, weights = nc9_nodes_weights(sub)
        resid = nodes**rescale * evaluate_N(series, nodes) - eval_expansion(e, nodes)
        chunk_totals.append(float(weights @ (resid * resid)))
    total = csum(chunk_totals)
    return total / float(T)
