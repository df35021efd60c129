import math

import numpy as np
import pytest
from scipy.special import eval_legendre

from lapspec import geometry, spectra
from lapspec._numutil import csum
from lapspec.errors import ConjugatePointError, CutoffExceededError, RegimeError

TWO_PI = 2 * math.pi


def circle_cosine_sum(d, lam):
    # independent oracle: strict cosine sum
    m = np.arange(1, int(np.ceil(lam)))
    m = m[m < lam]
    return csum(np.cos(m * d)) / math.pi


def torus_brute_N(basis, delta, lam):
    # independent oracle: brute sum over the dual lattice in a box
    dual = np.linalg.inv(basis).T
    vol = abs(np.linalg.det(basis))
    radius = lam / TWO_PI
    # integer coords of a dual point xi are basis.T @ xi
    bound = int(math.ceil(radius * np.linalg.norm(basis, 2))) + 2
    total = []
    for a in range(-bound, bound + 1):
        for b in range(-bound, bound + 1):
            xi = dual @ (a, b)
            r = math.hypot(*xi)
            if 0 < TWO_PI * r < lam:
                total.append(math.cos(TWO_PI * float(xi @ delta)))
    return csum(total) / vol


def sphere_direct_N(n, s, lam):
    # independent oracle via scipy Legendre (n=2) / Chebyshev-U (n=3)
    total = []
    m = 1
    while math.sqrt(m * (m + n - 1)) < lam:
        if n == 2:
            term = (2 * m + 1) * float(eval_legendre(m, math.cos(s))) / (4 * math.pi)
        elif n == 3:
            # P_m(3, cos s) = sin((m+1)s) / ((m+1) sin s), multiplicity (m+1)^2
            term = (
                (m + 1) ** 2
                * math.sin((m + 1) * s)
                / ((m + 1) * math.sin(s))
                / (2 * math.pi**2)
            )
        total.append(term)
        m += 1
    return csum(total)


class TestCircleClosedForm:
    def test_zero_below_first_frequency(self):
        for lam in (0.2, 0.7, 1.0):
            assert spectra.spectral_function_circle(1.3, lam) == pytest.approx(0.0, abs=1e-15)

    def test_half_period_cancellation(self):
        assert spectra.spectral_function_circle(math.pi, 2.5) == pytest.approx(0.0, abs=1e-14)

    def test_single_term(self):
        assert spectra.spectral_function_circle(math.pi / 3, 1.5) == pytest.approx(
            1 / TWO_PI, abs=1e-14
        )

    def test_matches_cosine_sum_to_1e11(self):
        rng = np.random.default_rng(42)
        for d in (0.5, 1.0, 2.0):
            lams = rng.uniform(0.5, 1e4, size=120)
            for lam in lams:
                assert abs(
                    spectra.spectral_function_circle(d, float(lam))
                    - circle_cosine_sum(d, float(lam))
                ) < 1e-11

    def test_coincident_rejected(self):
        with pytest.raises(ConjugatePointError):
            spectra.spectral_function_circle(0.0, 3.0)


class TestTorusSeries:
    def setup_method(self):
        self.lat = geometry.square_lattice(2)

    def test_first_shell_diagonal(self):
        s = spectra.build_series_torus(self.lat, [0.0, 0.0], 5.0)
        assert spectra.evaluate_N(s, 1.0 + 1e-9) == pytest.approx(
            4 / (4 * math.pi**2), rel=1e-13
        )

    def test_zero_below_first(self):
        s = spectra.build_series_torus(self.lat, [1.0, 0.3], 5.0)
        assert spectra.evaluate_N(s, 1.0) == 0.0
        assert spectra.evaluate_N(s, 0.5) == 0.0

    def test_half_lattice_shell(self):
        s = spectra.build_series_torus(self.lat, [math.pi, math.pi], 5.0)
        assert spectra.evaluate_N(s, 1.0 + 1e-9) == pytest.approx(
            -4 / (4 * math.pi**2), rel=1e-13
        )

    def test_zero_mode_flag(self):
        s = spectra.build_series_torus(self.lat, [1.0, 0.3], 5.0, include_zero_mode=True)
        assert spectra.evaluate_N(s, 0.5) == pytest.approx(1 / (4 * math.pi**2))
        assert s.with_zero_mode(False).include_zero_mode is False

    def test_cutoff_error(self):
        s = spectra.build_series_torus(self.lat, [1.0, 0.3], 5.0)
        with pytest.raises(CutoffExceededError):
            spectra.evaluate_N(s, 6.0)

    def test_circle_is_1d_square_torus(self):
        d = 1.234
        torus = spectra.build_series_torus(geometry.square_lattice(1), [d], 80.0)
        circ = spectra.build_series_circle(d, 80.0)
        lams = np.linspace(0.3, 79.0, 57)
        assert spectra.evaluate_N(torus, lams) == pytest.approx(
            spectra.evaluate_N(circ, lams), abs=1e-13
        )
        assert spectra.evaluate_N(circ, lams) == pytest.approx(
            spectra.spectral_function_circle(d, lams), abs=1e-12
        )


class TestSphereSeries:
    def test_diagonal_coefficients(self):
        s = spectra.build_series_sphere(2, 0.0, 20.0, allow_conjugate=True)
        assert s.coeffs[:4] == pytest.approx(
            [(2 * m + 1) / (4 * math.pi) for m in (1, 2, 3, 4)], rel=1e-13
        )

    def test_antipodal_coefficients(self):
        s = spectra.build_series_sphere(2, math.pi, 20.0, allow_conjugate=True)
        assert s.coeffs[:4] == pytest.approx(
            [((-1) ** m) * (2 * m + 1) / (4 * math.pi) for m in (1, 2, 3, 4)], rel=1e-12
        )

    def test_equator_degree_two(self):
        s = spectra.build_series_sphere(2, math.pi / 2, 20.0)
        # P_2(2, 0) = -1/2 so the m=2 coefficient is -5/(8 pi)
        assert s.coeffs[1] == pytest.approx(-5 / (8 * math.pi), rel=1e-13)

    def test_conjugate_needs_flag(self):
        with pytest.raises(ConjugatePointError):
            spectra.build_series_sphere(2, 0.0, 10.0)

    def test_diagonal_telescoping(self):
        s = spectra.build_series_sphere(2, 0.0, 40.0, allow_conjugate=True)
        for m in (1, 5, 11):
            lam = math.sqrt(m * (m + 1)) + 1e-9
            assert spectra.evaluate_N(s, lam) == pytest.approx(
                ((m + 1) ** 2 - 1) / (4 * math.pi), rel=1e-12
            )


class TestOracleEquivalence:
    def test_200_random_points(self):
        rng = np.random.default_rng(11)
        lat = geometry.square_lattice(2)
        hexlat = geometry.dual_lattice(
            np.array([[TWO_PI, math.pi], [0.0, math.pi * math.sqrt(3)]])
        )
        checked = 0
        for _ in range(40):
            lam = float(rng.uniform(2.0, 40.0))
            d = float(rng.uniform(0.1, TWO_PI - 0.1))
            assert spectra.evaluate_N(
                spectra.build_series_circle(d, 41.0), lam
            ) == pytest.approx(circle_cosine_sum(d, lam), abs=1e-10)
            delta = rng.uniform(0.1, 3.0, size=2)
            s_t = spectra.build_series_torus(lat, delta, 41.0)
            assert spectra.evaluate_N(s_t, lam) == pytest.approx(
                torus_brute_N(lat.basis, delta, lam), abs=1e-10
            )
            s_h = spectra.build_series_torus(hexlat, delta, 41.0)
            assert spectra.evaluate_N(s_h, lam) == pytest.approx(
                torus_brute_N(hexlat.basis, delta, lam), abs=1e-10
            )
            ang = float(rng.uniform(0.2, math.pi - 0.2))
            for n in (2, 3):
                s_s = spectra.build_series_sphere(n, ang, 41.0)
                assert spectra.evaluate_N(s_s, lam) == pytest.approx(
                    sphere_direct_N(n, ang, lam), abs=1e-10
                )
            checked += 5
        assert checked == 200


class TestSeriesStructure:
    def test_diagonal_monotone(self):
        s = spectra.build_series_torus(geometry.square_lattice(2), [0.0, 0.0], 30.0)
        lams = np.linspace(0.5, 30.0, 97)
        vals = spectra.evaluate_N(s, lams)
        assert np.all(np.diff(vals) >= -1e-15)

    def test_jump_sizes_match_coefficients(self):
        s = spectra.build_series_sphere(2, 1.0, 15.0)
        for j in (0, 2, 5):
            f = s.freqs[j]
            eps = 1e-7
            jump = spectra.evaluate_N(s, f + eps) - spectra.evaluate_N(s, f - eps)
            assert jump == pytest.approx(s.coeffs[j], rel=1e-10)

    def test_strictly_increasing_frequencies(self):
        s = spectra.build_series_torus(geometry.square_lattice(2), [1.0, 0.2], 50.0)
        assert np.all(np.diff(s.freqs) > 0)

    def test_rescaled_value(self):
        s = spectra.build_series_sphere(2, 1.0, 15.0)
        rv = spectra.evaluate_rescaled(s, 10.0)
        assert rv.value == pytest.approx(spectra.evaluate_N(s, 10.0) / math.sqrt(10.0))
        assert rv.unrescaled(2) == pytest.approx(spectra.evaluate_N(s, 10.0))

    def test_export(self, tmp_path):
        s = spectra.build_series_circle(1.0, 6.0)
        path = tmp_path / "series.txt"
        spectra.export_series(s, path)
        lines = path.read_text().strip().splitlines()
        data = [ln.split() for ln in lines if not ln.startswith("#")]
        assert len(data) == len(s.freqs)
        assert float(data[0][0]) == 1.0
        assert float(data[0][1]) == pytest.approx(math.cos(1.0) / math.pi)


class TestEuclidean:
    def test_n1_closed_form(self):
        lam = np.linspace(0.1, 50, 40)
        got = spectra.euclidean_N(1, 1.0, lam)
        assert got == pytest.approx(np.sin(lam) / math.pi, abs=1e-12)
        assert spectra.euclidean_N(1, 1.0, math.pi) == pytest.approx(0.0, abs=1e-12)

    def test_n3_closed_form(self):
        d = 1.0
        lam = np.linspace(0.5, 40, 31)
        expect = (np.sin(d * lam) - d * lam * np.cos(d * lam)) / (2 * math.pi**2 * d**3)
        assert spectra.euclidean_N(3, d, lam) == pytest.approx(expect, abs=1e-11)
        assert spectra.euclidean_N(3, 1.0, math.pi) == pytest.approx(1 / TWO_PI, rel=1e-12)

    def test_lambda_zero(self):
        for n in (1, 2, 3):
            assert spectra.euclidean_N(n, 0.7, 0.0) == 0.0

    def test_diagonal_rejected(self):
        with pytest.raises(ValueError):
            spectra.euclidean_N(2, 0.0, 3.0)

    def test_asymptotic_n1_exact(self):
        lam = np.linspace(2.0, 70.0, 23)
        assert spectra.euclidean_N_asymptotic(1, 1.0, lam) == pytest.approx(
            spectra.euclidean_N(1, 1.0, lam), abs=1e-12
        )

    def test_asymptotic_n3_error_bound(self):
        # the n=3 remainder is sin(d lam)/(2 pi^2 d^3): order lambda^((n-3)/2) = O(1)
        d = 1.0
        for lam in (50.0, 137.0, 400.0):
            err = abs(
                spectra.euclidean_N(3, d, lam) - spectra.euclidean_N_asymptotic(3, d, lam)
            )
            assert err <= 1.0 / (2 * math.pi**2 * d**3) + 1e-12
            assert err == pytest.approx(
                abs(math.sin(d * lam)) / (2 * math.pi**2 * d**3), rel=1e-9
            )

    def test_asymptotic_residual_decay(self):
        # residual ~ lambda^{-1/2} relative to the main term at n=2
        d = 2.0
        lams = np.array([100.0, 200.0, 400.0, 800.0, 1600.0])
        res = []
        for lam in lams:
            grid = lam * (1 + np.linspace(0, 0.02, 160))
            r = np.abs(
                spectra.euclidean_N(2, d, grid) * grid ** (-0.5)
                - spectra.euclidean_N_asymptotic(2, d, grid) * grid ** (-0.5)
            )
            res.append(r.max())
        slope = np.polyfit(np.log(lams), np.log(res), 1)[0]
        assert slope == pytest.approx(-1.0, abs=0.25)

    def test_out_of_regime(self):
        with pytest.raises(RegimeError):
            spectra.euclidean_N_asymptotic(2, 0.1, 5.0)


class TestWeyl:
    def test_specializations(self):
        lam = 7.0
        assert spectra.weyl_leading(2, lam) == pytest.approx(lam**2 / (4 * math.pi))
        assert spectra.weyl_leading(1, lam) == pytest.approx(lam / math.pi)
        assert spectra.weyl_leading(2, 0.0) == 0.0

    def test_weyl_residual_exponent(self):
        # |N_xx - weyl| = O(lambda) on T^2 and S^2: fitted exponent <= 1.1
        lat = geometry.square_lattice(2)
        lams = np.exp(np.linspace(np.log(50.0), np.log(500.0), 12))
        st = spectra.build_series_torus(lat, [0.0, 0.0], 501.0)
        resid_t = np.abs(
            spectra.evaluate_N(st, lams) - spectra.weyl_leading(2, lams)
        )
        slope_t = np.polyfit(np.log(lams), np.log(resid_t + 1e-12), 1)[0]
        assert slope_t <= 1.1
        ss = spectra.build_series_sphere(2, 0.0, 501.0, allow_conjugate=True)
        resid_s = np.abs(
            spectra.evaluate_N(ss, lams) - spectra.weyl_leading(2, lams)
        )
        slope_s = np.polyfit(np.log(lams), np.log(resid_s + 1e-12), 1)[0]
        assert slope_s <= 1.1
