import math

import numpy as np
import pytest

from lapspec import geometry
from lapspec.errors import CapacityError, ConjugatePointError, SingularBasisError

TWO_PI = 2 * math.pi


class TestDualLattice:
    def test_square_2pi(self):
        lat = geometry.dual_lattice(TWO_PI * np.eye(2))
        assert np.allclose(lat.dual_basis, np.eye(2) / TWO_PI, atol=0, rtol=1e-15)
        assert lat.volume == pytest.approx(4 * math.pi**2, rel=1e-15)

    def test_integer_self_dual(self):
        lat = geometry.dual_lattice(np.eye(2))
        assert np.allclose(lat.dual_basis, np.eye(2))

    def test_hexagonal_pairing_integral(self):
        basis = np.array([[TWO_PI, math.pi], [0.0, math.pi * math.sqrt(3)]])
        lat = geometry.dual_lattice(basis)
        pair = lat.dual_basis.T @ lat.basis
        assert np.max(np.abs(pair - np.round(pair))) < 1e-12
        assert lat.volume * abs(np.linalg.det(lat.dual_basis)) == pytest.approx(1.0, rel=1e-13)

    def test_singular_rejected(self):
        with pytest.raises(SingularBasisError):
            geometry.dual_lattice([[1.0, 2.0], [2.0, 4.0]])


def brute_ball_points(radius):
    # independent oracle: scan the integer bounding box
    r = int(math.floor(radius))
    pts = set()
    for a in range(-r, r + 1):
        for b in range(-r, r + 1):
            if a * a + b * b <= radius * radius:
                pts.add((a, b))
    return pts


class TestEnumerate:
    def test_radius_one(self):
        lat = geometry.dual_lattice(np.eye(2))
        pts = geometry.enumerate_lattice_points(lat, 1.0)
        got = {tuple(np.round(p).astype(int)) for p in pts}
        assert got == {(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)}

    def test_radius_ten_brute_force(self):
        lat = geometry.dual_lattice(np.eye(2))
        pts = geometry.enumerate_lattice_points(lat, 10.0)
        assert len(pts) == 317
        got = {tuple(np.round(p).astype(int)) for p in pts}
        assert got == brute_ball_points(10.0)

    def test_scaled_lattice_equivariance(self):
        lat = geometry.dual_lattice(np.eye(2) / TWO_PI)
        pts = geometry.enumerate_lattice_points(lat, 10.0 / TWO_PI)
        assert len(pts) == 317
        got = {tuple(np.round(p * TWO_PI).astype(int)) for p in pts}
        assert got == brute_ball_points(10.0)

    def test_capacity_error_names_cap(self):
        lat = geometry.dual_lattice(np.eye(2))
        with pytest.raises(CapacityError, match="997"):
            geometry.enumerate_lattice_points(lat, 1e4, cap=997)

    def test_lexicographic_order(self):
        lat = geometry.dual_lattice(np.eye(2))
        pts = geometry.enumerate_lattice_points(lat, 2.5)
        ints = [tuple(np.round(p).astype(int)) for p in pts]
        assert ints == sorted(ints)

    def test_count_matches_ball_volume(self):
        # >= 1e5 points at this radius; deviation from pi R^2 well under 2%
        lat = geometry.dual_lattice(np.eye(2))
        radius = 200.0
        count = len(geometry.enumerate_lattice_points(lat, radius))
        assert count >= 1e5
        assert abs(count / (math.pi * radius**2) - 1.0) < 0.02


class TestGeodesicsTorus:
    def setup_method(self):
        self.lat = geometry.square_lattice(2)

    def test_example_lengths(self):
        segs = geometry.geodesics_torus(self.lat, [1.0, 0.0], 7.0)
        lengths = [s.length for s in segs]
        expected = [1.0, TWO_PI - 1.0, math.sqrt(1 + 4 * math.pi**2),
                    math.sqrt(1 + 4 * math.pi**2)]
        assert lengths == pytest.approx(expected, abs=1e-12)
        assert all(s.morse_index == 0 for s in segs)
        assert [s.jacobi_det for s in segs] == pytest.approx(lengths, abs=1e-12)

    def test_half_period_multiplicity(self):
        segs = geometry.geodesics_torus(self.lat, [math.pi, 0.0], math.pi + 0.1)
        assert len(segs) == 2
        assert segs[0].length == pytest.approx(math.pi, abs=1e-12)
        assert segs[1].length == pytest.approx(math.pi, abs=1e-12)

    def test_below_distance_empty(self):
        segs = geometry.geodesics_torus(self.lat, [1.0, 0.5], 0.5)
        assert segs == []

    def test_lattice_displacement_rejected(self):
        with pytest.raises(ConjugatePointError):
            geometry.geodesics_torus(self.lat, [TWO_PI, 0.0], 10.0)

    def test_shift_invariance_of_lengths(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            delta = rng.uniform(0.2, 2.0, size=2)
            eta = TWO_PI * rng.integers(-2, 3, size=2)
            a = geometry.geodesics_torus(self.lat, delta, 25.0)
            b = geometry.geodesics_torus(self.lat, delta + eta, 25.0)
            assert np.allclose([s.length for s in a], [s.length for s in b], atol=1e-9)


class TestGeodesicsSphere:
    def test_example_n2(self):
        segs = geometry.geodesics_sphere(2, 1.0, 1)
        assert [s.length for s in segs] == pytest.approx(
            [1.0, TWO_PI - 1.0, TWO_PI + 1.0], abs=1e-12
        )
        assert [s.morse_index for s in segs] == [0, 1, 2]
        assert all(s.jacobi_det == pytest.approx(math.sin(1.0), abs=1e-15) for s in segs)

    def test_example_n3(self):
        segs = geometry.geodesics_sphere(3, 1.0, 1)
        assert [s.morse_index for s in segs] == [0, 2, 4]
        assert all(
            s.jacobi_det == pytest.approx(math.sin(1.0) ** 2, abs=1e-15) for s in segs
        )

    def test_k_zero_single(self):
        segs = geometry.geodesics_sphere(4, 2.2, 0)
        assert len(segs) == 1
        assert segs[0].length == pytest.approx(2.2)
        assert segs[0].morse_index == 0

    @pytest.mark.parametrize("s", [0.0, math.pi, 1e-13, math.pi - 1e-13])
    def test_conjugate_rejected(self, s):
        with pytest.raises(ConjugatePointError):
            geometry.geodesics_sphere(2, s, 2)

    def test_sorted_lengths_and_index_steps(self):
        for n in (2, 3, 5):
            segs = geometry.geodesics_sphere(n, 0.8, 6)
            lengths = [s.length for s in segs]
            assert lengths == sorted(lengths)
            indices = [s.morse_index for s in segs]
            assert all(b - a == n - 1 for a, b in zip(indices, indices[1:]))


class TestPairsAndDistances:
    def test_torus_distance_wraps(self):
        lat = geometry.square_lattice(2)
        assert geometry.torus_distance(lat, [TWO_PI - 0.3, 0.0]) == pytest.approx(0.3)
        assert geometry.torus_distance(lat, [1.0, 1.0]) == pytest.approx(math.sqrt(2))

    def test_pair_on_torus(self):
        pair = geometry.pair_on_torus(geometry.SquareTorus(2), [TWO_PI - 0.3, 0.0])
        assert pair.distance == pytest.approx(0.3)
        with pytest.raises(ConjugatePointError):
            geometry.pair_on_torus(geometry.SquareTorus(2), [0.0, 0.0])

    def test_pair_on_sphere(self):
        assert geometry.pair_on_sphere(2, 1.0).distance == 1.0
        with pytest.raises(ConjugatePointError):
            geometry.pair_on_sphere(2, math.pi)

    def test_manifold_volume(self):
        assert geometry.manifold_volume(geometry.SquareTorus(2)) == pytest.approx(4 * math.pi**2)
        assert geometry.manifold_volume(geometry.Sphere(2)) == pytest.approx(4 * math.pi)
        assert geometry.manifold_volume(geometry.Circle()) == pytest.approx(TWO_PI)

    def test_geodesic_segment_validation(self):
        with pytest.raises(ConjugatePointError):
            geometry.GeodesicSegment(length=1.0, morse_index=0, jacobi_det=0.0)
        with pytest.raises(ValueError):
            geometry.GeodesicSegment(length=-1.0, morse_index=0, jacobi_det=1.0)
