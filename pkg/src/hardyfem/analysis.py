"""Spectral checks, maximum-principle verdicts and summability scans."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .errors import ConvergenceError, DomainError, MeshError
from .fem import ProblemSpec, banded_matvec, hardy_mass_matrix, mass_matrix, stiffness_matrix
from .mesh import DiscreteField, RadialMesh, log_mesh, lp_integral, weighted_lp_norm
from .powersum import PowerSum
from .solver import SolveOptions, continuation_solve
from .thresholds import UNBOUNDED, compute_k0, solve_m_threshold

GROWTH_FACTOR = 10.0
MIN_SPECTRAL_ELEMENTS = 8


def _to_upper_banded(ab):
    up = np.zeros((2, ab.shape[1]))
    up[0, 1:] = ab[0, 1:]
    up[1] = ab[1]
    return up


def inverse_power(A, B, tol=1e-8, max_iter=50000):
    """Smallest eigenpair of the symmetric tridiagonal pencil ``(A, B)``.

    Both matrices are in LAPACK banded layout and must be positive definite.
    Iterates ``x <- A^{-1} B x`` with a single Cholesky factorization and
    stops when successive Rayleigh quotients agree to relative ``tol``.
    """
    n = A.shape[1]
    try:
        chol = linalg.cholesky_banded(_to_upper_banded(A))
    except linalg.LinAlgError as exc:
        raise ConvergenceError(f"stiffness matrix not positive definite: {exc}") from exc
    x = np.ones(n)
    prev = None
    for k in range(1, max_iter + 1):
        y = linalg.cho_solve_banded((chol, False), banded_matvec(B, x))
        By = banded_matvec(B, y)
        yBy = float(y @ By)
        mu = float(y @ banded_matvec(A, y)) / yBy
        x = y / math.sqrt(yBy)
        if prev is not None and abs(mu - prev) <= tol * abs(mu):
            return mu, x, k
        prev = mu
    raise ConvergenceError(f"inverse power iteration stagnated after {max_iter} steps (last {mu})")


def _check_spectral_mesh(mesh):
    if mesh.n_elements < MIN_SPECTRAL_ELEMENTS:
        raise MeshError(f"spectral checks need >= {MIN_SPECTRAL_ELEMENTS} elements")


def min_hardy_rayleigh(mesh: RadialMesh, tol: float = 1e-8, return_field: bool = False):
    """Minimum of ``int |v'|^2 r^(N-1) / int v^2 r^(N-3)`` over the discrete
    space with ``v(1) = 0``. Never below ``((N-2)/2)**2``."""
    _check_spectral_mesh(mesh)
    mu, x, _ = inverse_power(stiffness_matrix(mesh), hardy_mass_matrix(mesh), tol)
    if return_field:
        x = x if x[0] >= 0 else -x
        return mu, DiscreteField(np.append(x, 0.0), mesh)
    return mu


def dirichlet_eigenvalue(mesh: RadialMesh, tol: float = 1e-8) -> float:
    """Smallest radial Dirichlet eigenvalue of ``-Laplace`` on the unit ball."""
    _check_spectral_mesh(mesh)
    mu, _, _ = inverse_power(stiffness_matrix(mesh), mass_matrix(mesh), tol)
    return mu


@dataclass
class MaxPrincipleVerdict:
    weak_ok: bool | None = None
    min_value: float = math.nan
    tolerance: float = math.nan
    c_omega: float = math.nan
    inner_radius: float = math.nan
    strong_ok: bool | None = None
    preconditions: dict = field(default_factory=dict)

    def to_text(self) -> str:
        lines = []
        if self.weak_ok is not None:
            lines.append(f"weak_ok = {self.weak_ok}")
            lines.append(f"min_value = {self.min_value:.17g}")
        if self.strong_ok is not None:
            lines.append(f"strong_ok = {self.strong_ok}")
            lines.append(f"c_omega = {self.c_omega:.17g}")
            lines.append(f"inner_radius = {self.inner_radius:.17g}")
        for k, v in self.preconditions.items():
            lines.append(f"{k} = {v}")
        return "\n".join(lines) + "\n"


def max_principle_preconditions(spec: ProblemSpec, mesh: RadialMesh) -> dict:
    """Data sign / domination conditions under which nonnegativity is expected.

    ``f = Q a`` with ``Q > 0`` (checked at quadrature points) and
    ``max_{|s| <= k0} h(s) <= Q``.
    """
    r = mesh.qpoints
    Q = spec.hyp.Q
    f, a = spec.f(r), spec.a(r)
    f_eq_Qa = bool(np.allclose(f, Q * a, rtol=1e-12, atol=0.0)) and spec.zero_order
    k0 = compute_k0(spec.h, Q)
    s = np.linspace(-k0, k0, 2001)
    h_ok = bool(np.max(spec.h(s)) <= Q * (1 + 1e-9))
    return {
        "f_equals_Q_a": f_eq_Qa,
        "h_bounded_by_Q_on_k0": h_ok,
        "f_nonnegative": bool(np.all(f >= 0)),
        "k0": k0,
    }


def check_weak_maximum(u: DiscreteField, tolerance: float = 1e-10, spec: ProblemSpec | None = None) -> MaxPrincipleVerdict:
    """Nodal nonnegativity up to ``tolerance * ||u||_inf``."""
    tol = tolerance * u.max_abs()
    vmin = float(np.min(u.values))
    v = MaxPrincipleVerdict(weak_ok=vmin >= -tol, min_value=vmin, tolerance=tol)
    if spec is not None:
        v.preconditions = max_principle_preconditions(spec, u.mesh)
    return v


def check_strong_maximum(u: DiscreteField, inner_radius: float, verdict: MaxPrincipleVerdict | None = None) -> MaxPrincipleVerdict:
    """``c_omega = min`` of the P1 field over the ball ``r <= inner_radius``.

    The minimum of a piecewise-linear function over ``[r0, rho]`` is attained
    at a node or at ``rho`` itself, so both are inspected.
    """
    if not (0 < inner_radius < 1):
        raise DomainError("inner radius must lie in (0, 1)")
    nodes = u.mesh.nodes
    inside = u.values[nodes <= inner_radius]
    cands = np.append(inside, u(inner_radius))
    c = float(np.min(cands))
    v = verdict if verdict is not None else MaxPrincipleVerdict()
    v.c_omega = c
    v.inner_radius = inner_radius
    v.strong_ok = c > 0
    return v


@dataclass
class SummabilityReport:
    """Norms of a radial field on a sequence of meshes with shrinking cutoff.

    ``integrals[j][i]`` is ``int |u|^m`` for ``m = m_grid[i]`` on level ``j``
    and ``norms`` its m-th root. A column is ``"growing"`` when the integral
    increases by at least ``GROWTH_FACTOR`` between the two finest levels.
    """

    m_grid: list
    cutoffs: list
    norms: list
    integrals: list
    classification: list
    predicted_threshold: float | None = None

    @property
    def empirical_threshold(self) -> float | None:
        """Smallest m classified as growing, or None."""
        for m, c in zip(self.m_grid, self.classification):
            if c == "growing":
                return m
        return None

    def growth(self, i: int) -> float:
        return self.integrals[-1][i] / self.integrals[-2][i]

    def norm_variation(self, i: int) -> float:
        col = [row[i] for row in self.norms]
        return (max(col) - min(col)) / max(col)

    def consistent(self) -> bool | None:
        """Bounded below and growing above the predicted threshold."""
        if self.predicted_threshold is None:
            return None
        for m, c in zip(self.m_grid, self.classification):
            if m < self.predicted_threshold and c != "bounded":
                return False
            if m > self.predicted_threshold and c != "growing":
                return False
        return True

    def rows(self):
        for j, cut in enumerate(self.cutoffs):
            for i, m in enumerate(self.m_grid):
                yield m, j, cut, self.norms[j][i], self.integrals[j][i], self.classification[i]

    def to_csv(self, path):
        from .io import write_csv

        rows = list(self.rows())
        cols = list(zip(*rows)) if rows else [[]] * 6
        return write_csv(path, ["m", "level", "cutoff", "norm", "integral", "class"], cols)


def cutoff_levels(cutoffs, N: int = 3, elements_per_decade: int = 40, quad_order: int = 4):
    """Log-uniform meshes reaching each inner cutoff."""
    meshes = []
    for c in cutoffs:
        M = max(MIN_SPECTRAL_ELEMENTS, int(math.ceil(elements_per_decade * math.log10(1 / c))))
        meshes.append(log_mesh(M, c, N, quad_order))
    cut = [m.cutoff for m in meshes]
    if any(b >= a for a, b in zip(cut, cut[1:])):
        raise MeshError("refinement levels must have decreasing inner cutoff")
    return meshes


def _solve_on(args):
    spec, mesh, opts = args
    return continuation_solve(spec, mesh, opts)[0]


def summability_scan(
    source, m_grid, meshes, predicted_threshold=None, opts: SolveOptions | None = None, workers: int = 1
) -> SummabilityReport:
    """Tabulate ``L^m`` norms of ``source`` over meshes with shrinking cutoff.

    ``source`` is a :class:`ProblemSpec` (solved on every mesh by
    continuation), or an analytic radial function (interpolated). For a spec
    the predicted threshold defaults to its ``m_{lambda,A}``. Solves on
    different meshes are independent and run on up to ``workers`` processes.
    """
    if len(meshes) < 3:
        raise DomainError("summability scan needs at least 3 refinement levels")
    cut = [m.cutoff for m in meshes]
    if any(b >= a for a, b in zip(cut, cut[1:])):
        raise MeshError("refinement levels must have decreasing inner cutoff")
    if isinstance(source, ProblemSpec):
        two_star = source.hyp.two_star
        if any(m < two_star for m in m_grid):
            raise DomainError(f"m grid must lie in [2*, inf) = [{two_star}, inf)")
        if predicted_threshold is None:
            predicted_threshold = solve_m_threshold(source.hyp)
        jobs = [(source, mesh, opts) for mesh in meshes]
        if workers > 1:
            with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
                fields = list(pool.map(_solve_on, jobs))
        else:
            fields = [_solve_on(j) for j in jobs]
    else:
        fields = [DiscreteField.interpolate(source, mesh) for mesh in meshes]
    norms, integrals = [], []
    for u in fields:
        ints = [lp_integral(u, m, u.mesh) for m in m_grid]
        integrals.append(ints)
        norms.append([v ** (1.0 / m) for v, m in zip(ints, m_grid)])
    classes = []
    for i in range(len(m_grid)):
        grow = integrals[-1][i] / integrals[-2][i] if integrals[-2][i] > 0 else (math.inf if integrals[-1][i] > 0 else 1.0)
        classes.append("growing" if grow >= GROWTH_FACTOR else "bounded")
    if predicted_threshold == UNBOUNDED:
        predicted_threshold = math.inf
    return SummabilityReport(
        m_grid=list(map(float, m_grid)),
        cutoffs=cut,
        norms=norms,
        integrals=integrals,
        classification=classes,
        predicted_threshold=predicted_threshold,
    )


def u_rho_scan(rho: float, m_grid, cutoffs, N: int = 3, elements_per_decade: int = 40) -> SummabilityReport:
    """Summability scan of the exact ``u_rho`` with predicted threshold ``N/rho``."""
    u = PowerSum([(1.0, -rho), (-1.0, 0.0)])
    return summability_scan(u, m_grid, cutoff_levels(cutoffs, N, elements_per_decade), N / rho)
