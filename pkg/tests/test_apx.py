import math

import numpy as np
import pytest

from lapspec import apx, geometry, spectra
from lapspec._numutil import csum
from lapspec.errors import ConjugatePointError, CutoffExceededError

TWO_PI = 2 * math.pi


class TestExpansionTerms:
    def test_flat_torus_terms(self):
        lat = geometry.square_lattice(2)
        segs = geometry.geodesics_torus(lat, [1.0, 0.0], 10.0)
        e = apx.expansion_from_geodesics(segs, 2, 10.0)
        for term, seg in zip(e.terms, segs):
            # 2 sin(lam l - pi/4) / ((2 pi)^(3/2) l^(3/2))
            assert term.amplitude == pytest.approx(
                2.0 / (TWO_PI**1.5 * seg.length**1.5), rel=1e-13
            )
            assert term.phase == pytest.approx(-math.pi / 4)
            assert term.frequency == pytest.approx(seg.length)

    def test_sphere_phases(self):
        n = 3
        segs = geometry.geodesics_sphere(n, 1.0, 2)
        e = apx.expansion_from_geodesics(segs, n, 30.0)
        for term, seg in zip(e.terms, segs):
            omega = seg.morse_index
            # -(n-1) pi/4 - omega pi/2 == -(n-1+2 omega) pi/4
            assert term.phase == pytest.approx(-(n - 1 + 2 * omega) * math.pi / 4.0)
            assert term.amplitude == pytest.approx(
                2.0 / (TWO_PI**2 * seg.length * math.sin(1.0)), rel=1e-13
            )

    def test_circle_terms(self):
        segs = geometry.geodesics_torus(geometry.square_lattice(1), [1.0], 20.0)
        e = apx.expansion_from_geodesics(segs, 1, 20.0)
        for term, seg in zip(e.terms, segs):
            assert term.amplitude == pytest.approx(1.0 / (math.pi * seg.length), rel=1e-13)
            assert term.phase == 0.0

    def test_cutoff_drops_terms(self):
        segs = geometry.geodesics_torus(geometry.square_lattice(2), [1.0, 0.0], 30.0)
        e = apx.expansion_from_geodesics(segs, 2, 7.0)
        assert e.max_frequency <= 7.0
        assert len(e.terms) < len(segs)

    def test_conjugate_segment_rejected(self):
        with pytest.raises(ConjugatePointError):
            apx.expansion_from_geodesics(
                [geometry.GeodesicSegment(1.0, 0, 1.0), "not-checked"], 2, 10.0
            )
        # jacobi_det = 0 cannot even be constructed
        with pytest.raises(ConjugatePointError):
            geometry.GeodesicSegment(1.0, 0, 0.0)


class TestMorsePhase:
    def test_k_zero(self):
        for n in (2, 3, 6):
            assert apx.morse_phase_check(n, 0) == pytest.approx(-(n - 1) * math.pi / 4)

    def test_examples_n2(self):
        assert apx.morse_phase_check(2, 1) == pytest.approx(-(1 + 4) * math.pi / 4)
        assert apx.morse_phase_check(2, -1) == pytest.approx(-3 * math.pi / 4)


class TestEvalExpansion:
    def test_empty(self):
        e = apx.ApExpansion((), 5.0, 2)
        assert apx.eval_expansion(e, 3.0) == 0.0

    def test_single_term_zero(self):
        e = apx.ApExpansion((apx.TrigTerm(2.0, 1.0, -math.pi / 4),), 5.0, 2)
        assert apx.eval_expansion(e, math.pi / 4) == pytest.approx(0.0, abs=1e-15)

    def test_duplicate_code_oracle(self):
        lat = geometry.square_lattice(2)
        segs = geometry.geodesics_torus(lat, [1.0, 0.41421356], 20.0)
        e = apx.expansion_from_geodesics(segs, 2, 20.0)
        lam = 100.0
        # independent re-implementation straight from the geodesic data
        ref = csum(
            [
                2.0
                / (TWO_PI**1.5 * s.length ** 1.5)
                * math.sin(lam * s.length - math.pi / 4)
                for s in segs
            ]
        )
        assert apx.eval_expansion(e, lam) == pytest.approx(ref, abs=1e-12)

    def test_array_matches_scalar(self):
        e = apx.ApExpansion(
            (apx.TrigTerm(1.0, 1.0, 0.1), apx.TrigTerm(0.5, 2.7, -0.3)), 5.0, 2, 0.25
        )
        lams = np.array([0.5, 1.0, 9.3])
        assert apx.eval_expansion(e, lams) == pytest.approx(
            [apx.eval_expansion(e, float(x)) for x in lams]
        )


class TestSeminorm:
    def test_constant(self):
        est = apx.besicovitch_seminorm(
            lambda lam: np.full_like(lam, -2.5), p=1.0, T=100.0, samples_per_unit=4.0
        )
        assert est.value == pytest.approx(2.5, rel=1e-14)

    def test_sine_rms(self):
        est = apx.besicovitch_seminorm(
            np.sin, p=2.0, T=TWO_PI * 1e3, samples_per_unit=4.0, max_frequency=1.0
        )
        assert est.value == pytest.approx(1 / math.sqrt(2), abs=1e-4)
        assert len(est.history) >= 2

    def test_two_tone(self):
        a, b = 0.7, 1.3
        th1, th2 = 1.0, math.sqrt(2)
        est = apx.besicovitch_seminorm(
            lambda lam: a * np.sin(th1 * lam) + b * np.sin(th2 * lam),
            p=2.0, T=1e4, samples_per_unit=8.0, max_frequency=th2,
        )
        assert est.value == pytest.approx(math.sqrt((a * a + b * b) / 2), rel=0.02)

    def test_nyquist_guard(self):
        with pytest.raises(ValueError, match="under-resolves"):
            apx.besicovitch_seminorm(np.sin, 2.0, 100.0, 1.0, max_frequency=40.0)

    def test_nonfinite_identified(self):
        def bad(lam):
            out = np.ones_like(lam)
            out[lam > 50.0] = np.nan
            return out

        with pytest.raises(ValueError, match="lambda"):
            apx.besicovitch_seminorm(bad, 2.0, 100.0, 4.0)

    def test_p_monotonicity(self):
        # ||f||_{B^1} <= ||f||_{B^2} at matched horizons (Jensen)
        rng = np.random.default_rng(3)
        for _ in range(8):
            amps = rng.uniform(-1, 1, size=4)
            freqs = rng.uniform(0.3, 4.0, size=4)

            def f(lam, a=amps, th=freqs):
                return sum(ai * np.sin(ti * lam) for ai, ti in zip(a, th))

            e1 = apx.besicovitch_seminorm(f, 1.0, 400.0, 16.0)
            e2 = apx.besicovitch_seminorm(f, 2.0, 400.0, 16.0)
            assert e1.value <= e2.value + 1e-12

    def test_parseval_heuristic(self):
        terms = (apx.TrigTerm(0.8, 1.0, 0.2), apx.TrigTerm(0.5, 2.3, 0.0),
                 apx.TrigTerm(0.3, 4.1, -1.0))
        e = apx.ApExpansion(terms, 5.0, 2)
        est = apx.besicovitch_seminorm(
            lambda lam: apx.eval_expansion(e, lam), 2.0, 2e4, 8.0, max_frequency=4.1
        )
        expect = math.sqrt(sum(t.amplitude**2 for t in terms) / 2)
        assert est.value == pytest.approx(expect, rel=5e-3)


class TestB2Residual:
    def test_circle_with_constant_term(self):
        # Residual of the circle expansion against the exact series; the
        # -1/(2 pi) zero-mode constant must be included for decay.
        d = 1.0
        series = spectra.build_series_circle(d, 10_000.0)
        segs = geometry.geodesics_torus(geometry.square_lattice(1), [d], 80.0)
        e = apx.expansion_from_geodesics(segs, 1, 80.0)
        with_const = e.with_constant(-1 / TWO_PI)
        resid = apx.b2_residual(series, with_const, 10_000.0)
        assert resid < 1e-3
        resid_no_const = apx.b2_residual(series, e, 10_000.0)
        assert resid_no_const == pytest.approx(1 / (TWO_PI**2), rel=0.05)

    def test_empty_vs_truncated(self):
        lat = geometry.square_lattice(2)
        delta = [1.0, math.sqrt(2) - 1.0]
        series = spectra.build_series_torus(lat, delta, 500.0)
        empty = apx.ApExpansion((), 1.0, 2)
        e20 = apx.expansion_from_geodesics(
            geometry.geodesics_torus(lat, delta, 20.0), 2, 20.0
        )
        r_empty = apx.b2_residual(series, empty, 500.0)
        r20 = apx.b2_residual(series, e20, 500.0)
        assert r20 < r_empty

    def test_cutoff_monotonicity_with_tolerance(self):
        lat = geometry.square_lattice(2)
        delta = [1.0, math.sqrt(2) - 1.0]
        series = spectra.build_series_torus(lat, delta, 500.0)
        resids = []
        for q in (5.0, 10.0, 20.0):
            e = apx.expansion_from_geodesics(
                geometry.geodesics_torus(lat, delta, q), 2, q
            )
            resids.append(apx.b2_residual(series, e, 500.0))
        assert resids[1] <= resids[0] * 1.05
        assert resids[2] <= resids[1] * 1.05

    def test_cutoff_errors(self):
        series = spectra.build_series_circle(1.0, 50.0)
        e = apx.ApExpansion((apx.TrigTerm(1.0, 1.0, 0.0),), 1.0, 1)
        with pytest.raises(CutoffExceededError):
            apx.b2_residual(series, e, 60.0)
        big = apx.ApExpansion((apx.TrigTerm(1.0, 1.0, 0.0),), 60.0, 1)
        with pytest.raises(CutoffExceededError):
            apx.b2_residual(series, big, 40.0)

    def test_rational_direction_divergence(self):
        # Remark-3.4 regime: on T^3 with x - y in pi Q^3 the horizon averages
        # grow with T; an irrational pair stays flat.
        lat3 = geometry.square_lattice(3)
        empty = apx.ApExpansion((), 1.0, 3)
        s_rat = spectra.build_series_torus(lat3, [math.pi] * 3, 240.0)
        vals_rat = [apx.b2_residual(s_rat, empty, T) for T in (60.0, 120.0, 240.0)]
        assert vals_rat[0] < vals_rat[1] < vals_rat[2]
        s_irr = spectra.build_series_torus(
            lat3, [1.0, math.sqrt(2) - 1, math.sqrt(3) - 1], 240.0
        )
        vals_irr = [apx.b2_residual(s_irr, empty, T) for T in (60.0, 120.0, 240.0)]
        assert max(vals_irr) / min(vals_irr) < 1.05


class TestCircleExpansionIdentities:
    def test_dirichlet_kernel_expansion_monotone_in_K(self):
        # horizon-B^2 distance between sin((floor(lam)+1/2)s)/(2 sin(s/2)) and
        # the geodesic sum decreases monotonically in the truncation K
        T = 10_000.0
        for s in (1.0, 2.0):
            norms = []
            for K in (0, 1, 2, 4, 8):
                ks = np.arange(-K, K + 1)
                lengths = np.abs(s + TWO_PI * ks)

                def f(lam, L=lengths, s=s):
                    lhs = np.sin((np.floor(lam) + 0.5) * s) / (2 * math.sin(s / 2))
                    rhs = sum(np.sin(lam * l) / l for l in L)
                    return lhs - rhs

                est = apx.besicovitch_seminorm(
                    f, 2.0, T, samples_per_unit=8.0 * (s + TWO_PI * 8 + 1) / TWO_PI
                )
                norms.append(est.value)
            assert all(b < a for a, b in zip(norms, norms[1:]))
