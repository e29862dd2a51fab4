"""Graded radial meshes on ``[r0, 1]`` and weighted integrals over the unit ball.

A radial function ``v(|x|)`` on the unit ball of R^N is represented on a 1D
mesh; volume integrals pick up the weight ``omega * r**(N-1)`` where
``omega = 2*pi**(N/2)/Gamma(N/2)`` is the area of the unit sphere.
All quadrature points are strictly interior to elements, so singular weights
like ``r**(N-3)`` are never evaluated at ``r = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import DomainError, MeshError


def sphere_area(N: int) -> float:
    """Surface area of the unit sphere in R^N."""
    return 2 * math.pi ** (N / 2) / math.gamma(N / 2)


def ball_volume(N: int) -> float:
    return sphere_area(N) / N


@dataclass(frozen=True, eq=False)
class RadialMesh:
    nodes: np.ndarray
    N: int
    q: float = 1.0
    quad_order: int = 4

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 3:
            raise MeshError("a mesh needs at least 2 elements")
        if nodes[0] < 0:
            raise MeshError("nodes must be nonnegative")
        if nodes[-1] != 1.0:
            raise MeshError("last node must be exactly 1")
        if not np.all(np.diff(nodes) > 0):
            raise MeshError(
                "nodes are not strictly increasing (grading too strong for "
                "the element count in double precision?)"
            )
        if self.N < 3:
            raise MeshError(f"dimension must be >= 3, got {self.N}")
        if self.quad_order < 1:
            raise MeshError("quadrature order must be >= 1")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    @property
    def n_elements(self) -> int:
        return self.nodes.size - 1

    @property
    def cutoff(self) -> float:
        return float(self.nodes[0])

    @property
    def lengths(self) -> np.ndarray:
        return np.diff(self.nodes)

    @cached_property
    def omega(self) -> float:
        return sphere_area(self.N)

    @cached_property
    def _quad(self):
        xg, wg = np.polynomial.legendre.leggauss(self.quad_order)
        a, b = self.nodes[:-1, None], self.nodes[1:, None]
        half = 0.5 * (b - a)
        r = a + half * (xg[None, :] + 1.0)
        w = half * wg[None, :]
        # P1 shape functions on each element at the points
        phi_right = (r - a) / (b - a)
        phi_left = 1.0 - phi_right
        for arr in (r, w, phi_left, phi_right):
            arr.setflags(write=False)
        return r, w, phi_left, phi_right

    @property
    def qpoints(self) -> np.ndarray:
        """Quadrature points, shape ``(n_elements, quad_order)``."""
        return self._quad[0]

    @property
    def qweights(self) -> np.ndarray:
        """Quadrature weights for plain ``dr`` integration (no r-weight)."""
        return self._quad[1]

    @property
    def shape_values(self):
        """Left/right hat-function values at the quadrature points."""
        return self._quad[2], self._quad[3]

    @cached_property
    def volume_weights(self) -> np.ndarray:
        """Weights for ``int_B g dx = sum g(r_q) * w_q`` (sphere factor included)."""
        w = self.omega * self.qweights * self.qpoints ** (self.N - 1)
        w.setflags(write=False)
        return w

    def integrate(self, values) -> float:
        """Volume integral over the ball of radial values given at qpoints."""
        return float(np.sum(np.asarray(values) * self.volume_weights))

    def refine(self) -> "RadialMesh":
        """Bisect every element (nested refinement)."""
        mids = 0.5 * (self.nodes[:-1] + self.nodes[1:])
        nodes = np.empty(2 * self.nodes.size - 1)
        nodes[0::2] = self.nodes
        nodes[1::2] = mids
        nodes[-1] = 1.0
        # bisection breaks the geometric pattern unless the mesh was uniform
        q = 1.0 if self.q == 1.0 else math.nan
        return RadialMesh(nodes, self.N, q=q, quad_order=self.quad_order)

    def to_csv(self, path) -> None:
        from .io import write_csv

        write_csv(path, ["r"], [self.nodes])


def build_mesh(elements: int, q: float = 1.0, N: int = 3, cutoff: float = 0.0, quad_order: int = 4) -> RadialMesh:
    """Geometric mesh of ``[cutoff, 1]`` graded toward the origin.

    Consecutive element lengths satisfy ``len(e_i)/len(e_{i+1}) = q``; ``q=1``
    is uniform. Choosing ``q = cutoff**(1/elements)`` yields log-uniform
    nodes ``cutoff**(1 - i/elements)``.
    """
    if int(elements) != elements or elements < 2:
        raise MeshError(f"need an integer element count >= 2, got {elements}")
    if not (0 < q <= 1):
        raise MeshError(f"grading ratio must lie in (0, 1], got {q}")
    if not (0 <= cutoff < 1):
        raise MeshError(f"inner cutoff must lie in [0, 1), got {cutoff}")
    M = int(elements)
    if q == 1.0:
        frac = np.arange(M + 1) / M
    else:
        # lengths proportional to q**(M-1-i); cumulative sums in closed form
        k = np.arange(M + 1)
        frac = (q ** (M - k) - q**M) / (1.0 - q**M)
        frac = frac if np.all(np.isfinite(frac)) else np.full(M + 1, np.nan)
    nodes = cutoff + (1.0 - cutoff) * frac
    nodes[0] = cutoff
    nodes[-1] = 1.0
    return RadialMesh(nodes, N, q=q, quad_order=quad_order)


def log_mesh(elements: int, cutoff: float, N: int = 3, quad_order: int = 4) -> RadialMesh:
    """Geometric mesh whose ratio reaches the cutoff in exactly ``elements`` steps."""
    if not (0 < cutoff < 1):
        raise MeshError("log mesh needs 0 < cutoff < 1")
    return build_mesh(elements, cutoff ** (1.0 / elements), N, cutoff, quad_order)


@dataclass(frozen=True, eq=False)
class DiscreteField:
    """Piecewise-linear radial function given by nodal values."""

    values: np.ndarray
    mesh: RadialMesh = field(repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != self.mesh.nodes.shape:
            raise MeshError(
                f"field has {v.size} values but mesh has {self.mesh.nodes.size} nodes"
            )
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def zeros(cls, mesh: RadialMesh) -> "DiscreteField":
        return cls(np.zeros(mesh.nodes.size), mesh)

    @classmethod
    def interpolate(cls, func, mesh: RadialMesh, boundary_zero: bool = True) -> "DiscreteField":
        """Nodal interpolant. A node at ``r=0`` takes the value at the first
        quadrature point when ``func`` is singular there."""
        r = mesh.nodes.copy()
        with np.errstate(divide="ignore", invalid="ignore"):
            v = np.asarray(func(r), dtype=float)
        if not np.isfinite(v[0]) and r[0] == 0.0:
            v[0] = float(func(np.array([mesh.qpoints[0, 0]]))[0])
        if boundary_zero:
            v[-1] = 0.0
        return cls(v, mesh)

    @property
    def boundary_ok(self) -> bool:
        return self.values[-1] == 0.0

    def at_qpoints(self) -> np.ndarray:
        pl, pr = self.mesh.shape_values
        v = self.values
        return v[:-1, None] * pl + v[1:, None] * pr

    def slopes(self) -> np.ndarray:
        """Elementwise constant derivative."""
        return np.diff(self.values) / self.mesh.lengths

    def __call__(self, r):
        return np.interp(r, self.mesh.nodes, self.values)

    def __sub__(self, other: "DiscreteField") -> "DiscreteField":
        _check_same_mesh(self, other)
        return DiscreteField(self.values - other.values, self.mesh)

    def __add__(self, other: "DiscreteField") -> "DiscreteField":
        _check_same_mesh(self, other)
        return DiscreteField(self.values + other.values, self.mesh)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    def to_csv(self, path) -> None:
        from .io import write_csv

        write_csv(path, ["r", "u"], [self.mesh.nodes, self.values])


def _check_same_mesh(a: DiscreteField, b: DiscreteField):
    if a.mesh is not b.mesh and not np.array_equal(a.mesh.nodes, b.mesh.nodes):
        raise MeshError("fields live on different meshes")


def _values_and_slopes(v, mesh: RadialMesh):
    """Values (and derivatives if available) at quadrature points."""
    if isinstance(v, DiscreteField):
        if v.mesh is not mesh and not np.array_equal(v.mesh.nodes, mesh.nodes):
            raise MeshError("field does not live on the given mesh")
        return v.at_qpoints(), np.broadcast_to(v.slopes()[:, None], mesh.qpoints.shape)
    vals = np.asarray(v(mesh.qpoints), dtype=float)
    deriv = getattr(v, "derivative", None)
    slopes = np.asarray(deriv()(mesh.qpoints), dtype=float) if deriv is not None else None
    return vals, slopes


def weighted_lp_norm(v, m: float, mesh: RadialMesh) -> float:
    """``(omega * int_0^1 |v|^m r^(N-1) dr)^(1/m)`` by Gauss quadrature.

    ``v`` is a :class:`DiscreteField` on ``mesh`` or a vectorized callable of r.
    """
    if not m >= 1:
        raise DomainError(f"L^m norm needs m >= 1, got {m}")
    return lp_integral(v, m, mesh) ** (1.0 / m)


def lp_integral(v, m: float, mesh: RadialMesh) -> float:
    """``int_B |v|^m dx`` (the m-th power of the norm)."""
    vals, _ = _values_and_slopes(v, mesh)
    return mesh.integrate(np.abs(vals) ** m)


def linf_norm(v: DiscreteField) -> float:
    return v.max_abs()


def h1_seminorm(v, mesh: RadialMesh | None = None) -> float:
    """``(omega * int_0^1 |v'|^2 r^(N-1) dr)^(1/2)``."""
    mesh = v.mesh if mesh is None else mesh
    _, slopes = _values_and_slopes(v, mesh)
    if slopes is None:
        raise DomainError("callable has no derivative; interpolate it first")
    return math.sqrt(mesh.integrate(slopes**2))


def h1_error(v: DiscreteField, exact) -> float:
    """H^1 seminorm of ``v - exact`` with ``exact`` analytic (has ``derivative``)."""
    mesh = v.mesh
    d = exact.derivative()(mesh.qpoints)
    return math.sqrt(mesh.integrate((v.slopes()[:, None] - d) ** 2))


def hardy_quotient(v, mesh: RadialMesh | None = None) -> float:
    """``int |v'|^2 r^(N-1) / int v^2 r^(N-3)``; bounded below by ``H**2``."""
    mesh = v.mesh if mesh is None else mesh
    vals, slopes = _values_and_slopes(v, mesh)
    if slopes is None:
        raise DomainError("callable has no derivative; interpolate it first")
    den = mesh.integrate(vals**2 / mesh.qpoints**2)
    if den == 0.0:
        raise DomainError("Hardy quotient undefined for the zero field")
    return mesh.integrate(slopes**2) / den
