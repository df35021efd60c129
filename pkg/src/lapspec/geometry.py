"""Model manifolds, lattices and their duals, distances, geodesic data.

Supported geometries: the unit circle, flat square tori R^n/(2*pi*Z)^n,
flat 2-tori R^2/Gamma for an arbitrary nonsingular lattice Gamma, round
unit spheres S^n (n >= 2), and Euclidean space (comparison model).

A geodesic segment joining two points carries three numbers used by the
trigonometric expansions: its length l, its Morse index omega (number of
interior conjugate points with multiplicity), and the Jacobi determinant
a > 0.  On flat tori a = l^(n-1) and omega = 0; on the unit sphere at
base angle s in (0, pi), a = (sin s)^(n-1) and omega = (n-1)*(2|k|-H(k))
for the segment winding k times, H being the reversed Heaviside function
(H(k) = 1 for k < 0, else 0).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, ConjugatePointError, SingularBasisError

CONJUGATE_TOL = 1e-12
DEFAULT_POINT_CAP = 120_000_000

TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# Manifold variants


@dataclass(frozen=True)
class Circle:
    """Unit circle; the n = 1 square torus."""

    @property
    def n(self) -> int:
        return 1


@dataclass(frozen=True)
class SquareTorus:
    """Flat torus R^n / (2*pi*Z)^n."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("torus dimension must be >= 1")


@dataclass(frozen=True, eq=False)
class FlatTorus2:
    """Flat torus R^2 / Gamma for a general nonsingular 2x2 basis."""

    basis: np.ndarray

    def __post_init__(self):
        b = np.array(self.basis, dtype=float)
        if b.shape != (2, 2):
            raise ValueError("FlatTorus2 basis must be a 2x2 matrix")
        if abs(np.linalg.det(b)) < 1e-300:
            raise SingularBasisError("torus basis is singular")
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)

    @property
    def n(self) -> int:
        return 2


@dataclass(frozen=True)
class Sphere:
    """Round unit sphere S^n, n >= 2."""

    n: int

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("sphere dimension must be >= 2 (use Circle for n=1)")


@dataclass(frozen=True)
class Euclidean:
    """R^n, used for the comparison term only."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("dimension must be >= 1")


ModelManifold = Circle | SquareTorus | FlatTorus2 | Sphere | Euclidean


def manifold_dimension(m: ModelManifold) -> int:
    return m.n


def manifold_volume(m: ModelManifold) -> float:
    """Riemannian volume; spheres use D_n = 2 pi^((n+1)/2) / Gamma((n+1)/2)."""
    if isinstance(m, (Circle, SquareTorus)):
        return TWO_PI**m.n
    if isinstance(m, FlatTorus2):
        return abs(float(np.linalg.det(m.basis)))
    if isinstance(m, Sphere):
        return 2.0 * math.pi ** ((m.n + 1) / 2.0) / math.gamma((m.n + 1) / 2.0)
    raise ValueError(f"no finite volume for {m!r}")


# ---------------------------------------------------------------------------
# Lattices


@dataclass(frozen=True, eq=False)
class Lattice:
    """Lattice given by basis columns, with covolume and dual basis.

    The dual pairs integrally with the primal: <dual_i, basis_j> in Z,
    which forces dual_basis = inverse-transpose of basis and
    volume(Gamma) * volume(Gamma*) = 1.
    """

    basis: np.ndarray
    volume: float
    dual_basis: np.ndarray

    @property
    def n(self) -> int:
        return self.basis.shape[0]


def dual_lattice(basis) -> Lattice:
    """Build a Lattice with its dual from generator columns."""
    b = np.array(basis, dtype=float)
    if b.ndim != 2 or b.shape[0] != b.shape[1]:
        raise ValueError("lattice basis must be a square matrix")
    det = float(np.linalg.det(b))
    if abs(det) < 1e-300:
        raise SingularBasisError("lattice basis is singular")
    dual = np.linalg.inv(b).T
    b.setflags(write=False)
    dual.setflags(write=False)
    return Lattice(basis=b, volume=abs(det), dual_basis=dual)


def square_lattice(n: int, period: float = TWO_PI) -> Lattice:
    return dual_lattice(period * np.eye(n))


def lattice_for(manifold: ModelManifold) -> Lattice:
    if isinstance(manifold, (Circle, SquareTorus)):
        return square_lattice(manifold.n)
    if isinstance(manifold, FlatTorus2):
        return dual_lattice(manifold.basis)
    raise ValueError(f"{manifold!r} has no lattice")


def _axis_bounds(basis_inv: np.ndarray, radius: float) -> np.ndarray:
    """Per-axis integer bound K_i with |k_i| <= K_i for all |B k| <= radius."""
    row_norms = np.sqrt((basis_inv**2).sum(axis=1))
    return np.floor(row_norms * radius + 1e-9).astype(np.int64)


def _integer_box(bounds: np.ndarray, cap: int) -> np.ndarray:
    """All integer vectors in prod [-K_i, K_i], lexicographic order."""
    count = 1
    for k in bounds:
        count *= 2 * int(k) + 1
        if count > cap:
            raise CapacityError(
                f"lattice enumeration of {count}+ candidate points exceeds cap {cap}"
            )
    axes = [np.arange(-int(k), int(k) + 1, dtype=np.int64) for k in bounds]
    grids = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def enumerate_lattice_points(
    lattice: Lattice, radius: float, cap: int = DEFAULT_POINT_CAP
) -> np.ndarray:
    """All lattice vectors with |xi| <= radius, lexicographic in integer coords.

    Exhaustive by construction: candidates come from an axis-aligned
    integer box containing the ball, then are filtered by |xi| <= radius.
    """
    if radius < 0:
        raise ValueError("radius must be >= 0")
    inv = np.linalg.inv(lattice.basis)
    ints = _integer_box(_axis_bounds(inv, radius), cap)
    pts = ints @ lattice.basis.T
    keep = (pts**2).sum(axis=1) <= radius * radius * (1.0 + 1e-14)
    return pts[keep]


# ---------------------------------------------------------------------------
# Geodesic segments


@dataclass(frozen=True)
class GeodesicSegment:
    length: float
    morse_index: int
    jacobi_det: float

    def __post_init__(self):
        if not self.length > 0:
            raise ValueError("geodesic length must be positive")
        if not self.jacobi_det > 0:
            raise ConjugatePointError(
                "segment with vanishing Jacobi determinant (conjugate endpoints)"
            )
        if self.morse_index < 0:
            raise ValueError("Morse index must be >= 0")


def _displacement_in_lattice(lattice: Lattice, displacement: np.ndarray) -> bool:
    k = np.linalg.solve(lattice.basis, displacement)
    return bool(np.all(np.abs(k - np.round(k)) <= CONJUGATE_TOL))


def geodesics_torus(
    lattice: Lattice,
    displacement,
    max_length: float,
    cap: int = DEFAULT_POINT_CAP,
) -> list[GeodesicSegment]:
    """Geodesics joining x and y = x - displacement on the flat torus.

    One segment per eta in Gamma with |displacement + eta| <= max_length,
    Morse index 0 and Jacobi determinant l^(n-1).  Equal lengths are kept
    as separate entries.  Sorted ascending by length, ties broken by the
    integer coordinates of eta.
    """
    delta = np.asarray(displacement, dtype=float)
    if _displacement_in_lattice(lattice, delta):
        raise ConjugatePointError("displacement lies in the lattice: coincident endpoints")
    n = lattice.n
    inv = np.linalg.inv(lattice.basis)
    bounds = _axis_bounds(inv, max_length + float(np.linalg.norm(delta)))
    ints = _integer_box(bounds, cap)
    vecs = delta[None, :] + ints @ lattice.basis.T
    lengths = np.sqrt((vecs**2).sum(axis=1))
    keep = lengths <= max_length * (1.0 + 1e-14)
    ints, lengths = ints[keep], lengths[keep]
    order = np.lexsort(tuple(ints[:, j] for j in range(n - 1, -1, -1)) + (lengths,))
    return [
        GeodesicSegment(length=float(l), morse_index=0, jacobi_det=float(l) ** (n - 1))
        for l in lengths[order]
    ]


def geodesics_sphere(n: int, s: float, max_count: int) -> list[GeodesicSegment]:
    """Sphere geodesics of lengths |s + 2 pi k| for k = 0, +-1, ..., +-K.

    Requires non-conjugate endpoints: 0 < s < pi.  Morse index
    omega_k = (n-1)(2|k| - H(k)), Jacobi determinant (sin s)^(n-1).
    Returned sorted by length (s, 2pi-s, 2pi+s, 4pi-s, ...).
    """
    if n < 2:
        raise ValueError("sphere dimension must be >= 2")
    if max_count < 0:
        raise ValueError("max_count must be >= 0")
    if s <= CONJUGATE_TOL or abs(s - math.pi) <= CONJUGATE_TOL or not 0 < s < math.pi:
        raise ConjugatePointError(f"conjugate endpoints on the sphere: s = {s}")
    jac = math.sin(s) ** (n - 1)
    ks = sorted(range(-max_count, max_count + 1), key=lambda k: abs(s + TWO_PI * k))
    return [
        GeodesicSegment(
            length=abs(s + TWO_PI * k),
            morse_index=(n - 1) * (2 * abs(k) - (1 if k < 0 else 0)),
            jacobi_det=jac,
        )
        for k in ks
    ]


# ---------------------------------------------------------------------------
# Point pairs and distances


def torus_distance(lattice: Lattice, displacement) -> float:
    """Riemannian distance min over eta in Gamma of |displacement + eta|."""
    delta = np.asarray(displacement, dtype=float)
    inv = np.linalg.inv(lattice.basis)
    # box guaranteed to contain the minimizer: |eta| <= 2 |delta|
    bounds = _axis_bounds(inv, 2.0 * float(np.linalg.norm(delta))) + 1
    ints = _integer_box(bounds, DEFAULT_POINT_CAP)
    vecs = delta[None, :] + ints @ lattice.basis.T
    return float(np.sqrt((vecs**2).sum(axis=1).min()))


@dataclass(frozen=True, eq=False)
class PointPair:
    """A pair (x, y) reduced to its invariant data on a model manifold."""

    manifold: ModelManifold
    displacement: object  # vector on tori, angle s on spheres, scalar d on R^n
    distance: float


def pair_on_torus(manifold: ModelManifold, displacement) -> PointPair:
    lat = lattice_for(manifold)
    delta = np.asarray(displacement, dtype=float).reshape(lat.n)
    if _displacement_in_lattice(lat, delta):
        raise ConjugatePointError("coincident endpoints on the torus")
    delta.setflags(write=False)
    return PointPair(manifold, delta, torus_distance(lat, delta))


def pair_on_sphere(n: int, s: float) -> PointPair:
    if not 0 < s < math.pi:
        raise ConjugatePointError(f"sphere pair needs 0 < s < pi, got {s}")
    return PointPair(Sphere(n), float(s), float(s))


def pair_euclidean(n: int, d: float) -> PointPair:
    if d <= 0:
        raise ValueError("Euclidean pair needs d > 0")
    return PointPair(Euclidean(n), float(d), float(d))
