"""Weighted P1 finite elements for the radially reduced regularized problems.

The continuous problem on the unit ball is

    -div(M grad u - u V) + a h(u) = lam u/|x|^2 + f,   u = 0 on |x| = 1,

with ``M = m(r) I`` and radial drift ``V = d x/|x|^2``. Level ``n`` replaces
``f, a, V`` and the Hardy kernel by bounded approximations and truncates the
lower-order occurrences of ``u``. Only the diffusion form is kept implicit;
every lower-order term is evaluated at a lagged state and moved to the
right-hand side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import linalg

from .errors import DomainError, HypothesisError, MeshError, SingularSystemError
from .mesh import DiscreteField, RadialMesh
from .powersum import PowerSum
from .thresholds import HypothesisSet, Nonlinearity

TRUNCATION_MODES = ("rational", "hard")
ZERO_ORDER_MODES = ("explicit", "semi-implicit")


@dataclass(frozen=True)
class ProblemSpec:
    """Complete continuous problem.

    ``diffusion`` defaults to the constant ``alpha``; ``drift`` is the signed
    strength ``d`` of ``V = d x/|x|^2`` and defaults to ``A``.
    """

    hyp: HypothesisSet
    f: PowerSum = field(default_factory=PowerSum)
    a: PowerSum = field(default_factory=PowerSum)
    h: Nonlinearity = field(default_factory=Nonlinearity)
    diffusion: PowerSum | None = None
    drift: float | None = None
    zero_order: bool = False

    def __post_init__(self):
        if self.diffusion is None:
            object.__setattr__(self, "diffusion", PowerSum.constant(self.hyp.alpha))
        if self.drift is None:
            object.__setattr__(self, "drift", float(self.hyp.A))
        if abs(self.drift) > self.hyp.A * (1 + 1e-14):
            raise DomainError(
                f"drift strength |d| = {abs(self.drift)} exceeds the bound A = {self.hyp.A}"
            )
        if self.zero_order and not self.a.integrable(self.hyp.N):
            raise DomainError("absorption weight a must be integrable on the ball")

    @property
    def N(self) -> int:
        return self.hyp.N

    @property
    def lam(self) -> float:
        return self.hyp.lam

    def with_(self, **changes) -> "ProblemSpec":
        return replace(self, **changes)

    def check_coefficients(self, mesh: RadialMesh) -> None:
        """Validate ``alpha <= m <= beta`` and ``a >= 0`` at quadrature points."""
        r = mesh.qpoints
        m = self.diffusion(r)
        tol = 1e-12 * max(1.0, self.hyp.beta)
        if np.any(m < self.hyp.alpha - tol) or np.any(m > self.hyp.beta + tol):
            raise DomainError(
                f"diffusion coefficient leaves [alpha, beta] = [{self.hyp.alpha}, {self.hyp.beta}]"
            )
        if self.zero_order and np.any(self.a(r) < 0):
            raise DomainError("absorption weight a must be nonnegative")

    def domination_ok(self, mesh: RadialMesh) -> bool:
        """``|f| <= Q a`` at every quadrature point."""
        r = mesh.qpoints
        fa = np.abs(self.f(r))
        qa = self.hyp.Q * self.a(r)
        return bool(np.all(fa <= qa * (1 + 1e-12) + 1e-300))


@dataclass(frozen=True)
class RegularizedProblem:
    """Level-``n`` approximation of a :class:`ProblemSpec`.

    ``mode="rational"`` uses ``u/(1 + |u|/n)`` in the drift and leaves the
    Hardy term untruncated; ``mode="hard"`` uses ``T_n(u)`` in both.
    """

    base: ProblemSpec
    n: float
    mode: str = "hard"

    def __post_init__(self):
        if not self.n >= 1:
            raise DomainError(f"regularization level must be >= 1, got {self.n}")
        if self.mode not in TRUNCATION_MODES:
            raise DomainError(f"unknown truncation mode {self.mode!r}")

    def f_n(self, r):
        f = self.base.f(r)
        return f / (1 + np.abs(f) / self.n)

    def a_n(self, r):
        if not self.base.zero_order:
            return np.zeros_like(np.asarray(r, dtype=float))
        a = self.base.a(r)
        return a / (1 + self.base.hyp.Q * a / self.n)

    def drift_n(self, r):
        """Radial component of ``V_n = V/(1 + |V|/n)``, i.e. ``d/(r + |d|/n)``."""
        d = self.base.drift
        return d / (np.asarray(r, dtype=float) + abs(d) / self.n)

    def kernel_n(self, r):
        """Regularized Hardy kernel ``1/(r^2 + 1/n)``."""
        return 1.0 / (np.asarray(r, dtype=float) ** 2 + 1.0 / self.n)

    def tau(self, u):
        """Truncation applied to ``u`` in the drift term."""
        u = np.asarray(u, dtype=float)
        if self.mode == "hard":
            return np.clip(u, -self.n, self.n)
        return u / (1 + np.abs(u) / self.n)

    def tau_potential(self, u):
        u = np.asarray(u, dtype=float)
        if self.mode == "hard":
            return np.clip(u, -self.n, self.n)
        return u


def regularize(spec: ProblemSpec, n: float, mode: str = "hard") -> RegularizedProblem:
    return RegularizedProblem(spec, n, mode)


@dataclass
class LinearSystem:
    """Tridiagonal system over the free nodes (Dirichlet node removed).

    ``ab`` uses the LAPACK banded layout with one sub- and one
    super-diagonal: ``ab[0, 1:]`` upper, ``ab[1]`` diagonal, ``ab[2, :-1]``
    lower.
    """

    ab: np.ndarray
    rhs: np.ndarray
    mesh: RadialMesh | None = None
    boundary_index: int | None = None

    @property
    def size(self) -> int:
        return self.rhs.size

    def dense(self) -> np.ndarray:
        n = self.size
        A = np.diag(self.ab[1])
        if n > 1:
            A += np.diag(self.ab[0, 1:], 1) + np.diag(self.ab[2, :-1], -1)
        return A

    def matvec(self, x) -> np.ndarray:
        return banded_matvec(self.ab, x)


def banded_matvec(ab, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    y = ab[1] * x
    y[:-1] += ab[0, 1:] * x[1:]
    y[1:] += ab[2, :-1] * x[:-1]
    return y


def _assemble_tridiag(mesh: RadialMesh, elem_diag_left, elem_diag_right, elem_off) -> np.ndarray:
    """Scatter per-element 2x2 symmetric contributions into banded storage
    over the free nodes ``0..M-1``."""
    M = mesh.n_elements
    full_diag = np.zeros(M + 1)
    full_diag[:-1] += elem_diag_left
    full_diag[1:] += elem_diag_right
    ab = np.zeros((3, M))
    ab[1] = full_diag[:-1]
    # element e couples nodes e and e+1; drop the coupling to the Dirichlet node
    ab[0, 1:] = elem_off[:-1]
    ab[2, :-1] = elem_off[:-1]
    return ab


def stiffness_matrix(mesh: RadialMesh, coef=None) -> np.ndarray:
    """``omega * int c(r) phi_i' phi_j' r^(N-1) dr`` over free nodes.

    ``coef`` is None (``c = 1``), a callable of r, or an array of values at
    the quadrature points.
    """
    w = mesh.volume_weights
    if coef is None:
        cw = w
    elif callable(coef):
        cw = np.asarray(coef(mesh.qpoints), dtype=float) * w
    else:
        cw = np.asarray(coef, dtype=float) * w
    k = cw.sum(axis=1) / mesh.lengths**2
    return _assemble_tridiag(mesh, k, k, -k)


def mass_matrix(mesh: RadialMesh, weight=None) -> np.ndarray:
    """``omega * int g(r) phi_i phi_j r^(N-1) dr`` over free nodes.

    ``weight`` follows the same conventions as ``coef`` in
    :func:`stiffness_matrix`.
    """
    w = mesh.volume_weights
    if weight is None:
        gw = w
    elif callable(weight):
        gw = np.asarray(weight(mesh.qpoints), dtype=float) * w
    else:
        gw = np.asarray(weight, dtype=float) * w
    pl, pr = mesh.shape_values
    return _assemble_tridiag(
        mesh, (gw * pl * pl).sum(axis=1), (gw * pr * pr).sum(axis=1), (gw * pl * pr).sum(axis=1)
    )


def hardy_mass_matrix(mesh: RadialMesh) -> np.ndarray:
    """Mass matrix with the Hardy weight ``1/r^2``."""
    return mass_matrix(mesh, 1.0 / mesh.qpoints**2)


def load_vector(mesh: RadialMesh, value_q, slope_q=None) -> np.ndarray:
    """``omega * int (g phi_i + G phi_i') r^(N-1) dr`` over free nodes.

    ``value_q`` and ``slope_q`` are arrays at quadrature points multiplying
    the test function and its derivative respectively.
    """
    w = mesh.volume_weights
    pl, pr = mesh.shape_values
    M = mesh.n_elements
    left = (value_q * pl * w).sum(axis=1)
    right = (value_q * pr * w).sum(axis=1)
    if slope_q is not None:
        gs = (slope_q * w).sum(axis=1) / mesh.lengths
        left = left - gs
        right = right + gs
    b = np.zeros(M + 1)
    b[:-1] += left
    b[1:] += right
    return b[:-1]


def lower_order_terms(rp: RegularizedProblem, mesh: RadialMesh, lagged: DiscreteField, implicit_zero_order: bool = False):
    """Quadrature values ``(g, G)`` of the explicit right-hand side
    ``int g phi + G phi'`` at the lagged state."""
    r = mesh.qpoints
    ul = lagged.at_qpoints()
    G = rp.tau(ul) * rp.drift_n(r) if rp.base.drift != 0.0 else None
    g = rp.f_n(r)
    if rp.base.lam != 0.0:
        g = g + rp.base.lam * rp.tau_potential(ul) * rp.kernel_n(r)
    if rp.base.zero_order and not implicit_zero_order:
        g = g - rp.a_n(r) * rp.base.h(ul)
    return g, G


def assemble(rp: RegularizedProblem, mesh: RadialMesh, lagged: DiscreteField | None = None, zero_order_mode: str = "explicit") -> LinearSystem:
    """Linear system of one fixed-point step.

    The matrix is the diffusion form; drift, Hardy potential, absorption and
    load enter the right-hand side evaluated at ``lagged``. With
    ``zero_order_mode="semi-implicit"`` the absorption is instead kept on
    the left as ``a_n * (h(u_lag)/u_lag) * u``, which is exact for linear h.
    """
    if zero_order_mode not in ZERO_ORDER_MODES:
        raise DomainError(f"unknown zero-order mode {zero_order_mode!r}")
    if lagged is None:
        lagged = DiscreteField.zeros(mesh)
    if lagged.mesh is not mesh and not np.array_equal(lagged.mesh.nodes, mesh.nodes):
        raise MeshError("lagged field does not live on the assembly mesh")
    if lagged.mesh.N != mesh.N or mesh.N != rp.base.N:
        raise MeshError("mesh dimension differs from the problem dimension")
    implicit = zero_order_mode == "semi-implicit" and rp.base.zero_order
    ab = stiffness_matrix(mesh, rp.base.diffusion)
    if implicit:
        sec = rp.a_n(mesh.qpoints) * rp.base.h.secant(lagged.at_qpoints())
        ab = ab + mass_matrix(mesh, sec)
    g, G = lower_order_terms(rp, mesh, lagged, implicit_zero_order=implicit)
    rhs = load_vector(mesh, g, G)
    return LinearSystem(ab, rhs, mesh, boundary_index=mesh.n_elements)


def solve_banded_system(ab, rhs) -> np.ndarray:
    ab = np.asarray(ab, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    if ab.shape[1] == 1:
        if ab[1, 0] == 0.0:
            raise SingularSystemError("zero pivot in 1x1 system")
        return rhs / ab[1, 0]
    try:
        x = linalg.solve_banded((1, 1), ab, rhs, check_finite=True)
    except linalg.LinAlgError as exc:
        raise SingularSystemError(f"banded factorization failed: {exc}") from exc
    return x


def solve_linear(sys: LinearSystem) -> DiscreteField | np.ndarray:
    """Direct banded solve; returns a field (boundary value 0) when the system
    carries a mesh, else the bare solution vector."""
    x = solve_banded_system(sys.ab, sys.rhs)
    res = np.max(np.abs(sys.matvec(x) - sys.rhs)) if x.size else 0.0
    A_inf = np.max(np.sum(np.abs(sys.ab), axis=0)) if x.size else 0.0
    bound = 1e-12 * (A_inf * np.max(np.abs(x)) + np.max(np.abs(sys.rhs))) if x.size else 0.0
    if not math.isfinite(res) or res > max(bound, 0.0) and res > 0.0:
        # one step of iterative refinement before giving up
        x = x + solve_banded_system(sys.ab, sys.rhs - sys.matvec(x))
        res = np.max(np.abs(sys.matvec(x) - sys.rhs))
        bound = 1e-12 * (A_inf * np.max(np.abs(x)) + np.max(np.abs(sys.rhs)))
        if not math.isfinite(res) or res > bound:
            raise SingularSystemError(
                f"linear solve residual {res:.3e} exceeds {bound:.3e}; system near singular"
            )
    if sys.mesh is None:
        return x
    return DiscreteField(np.append(x, 0.0), sys.mesh)


def check_hypotheses(spec: ProblemSpec) -> None:
    """Raise :class:`HypothesisError` when the existence condition fails."""
    from .thresholds import existence_inequality, check_existence

    if not check_existence(spec.hyp):
        ineq = existence_inequality(spec.hyp)
        raise HypothesisError("existence condition fails: " + ineq, inequality=ineq)
