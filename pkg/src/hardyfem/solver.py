"""Fixed-point solves at one regularization level and continuation in n."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, DomainError
from .fem import ProblemSpec, RegularizedProblem, assemble, regularize, solve_linear
from .mesh import DiscreteField, RadialMesh, h1_seminorm, weighted_lp_norm
from .thresholds import check_existence, compute_k0

log = logging.getLogger(__name__)

DIVERGENCE_WINDOW = 5


@dataclass(frozen=True)
class SolveOptions:
    theta: float = 0.5
    tol: float = 1e-10
    max_iter: int = 200
    schedule: tuple = (10, 100, 1000, 10000)
    mode: str = "hard"
    zero_order_mode: str = "semi-implicit"
    m_grid: tuple | None = None

    def __post_init__(self):
        if not (0 < self.theta <= 1):
            raise DomainError(f"relaxation must lie in (0, 1], got {self.theta}")
        if not self.tol > 0:
            raise DomainError("tolerance must be positive")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise DomainError("max_iter must be a positive integer")
        sched = tuple(self.schedule)
        if not sched:
            raise DomainError("n schedule must be nonempty")
        if any(b <= a for a, b in zip(sched, sched[1:])):
            raise DomainError("n schedule must be strictly increasing")
        if any(n < 1 for n in sched):
            raise DomainError("regularization levels must be >= 1")
        object.__setattr__(self, "schedule", sched)


@dataclass
class LevelReport:
    n: float
    iterations: int
    gaps: list
    theta: float
    converged: bool
    monotone_tail: bool
    h1: float = math.nan
    linf: float = math.nan
    lm_norms: dict = field(default_factory=dict)
    ratio_f: float = math.nan
    ratio_a: float = math.nan


@dataclass
class SolveReport:
    levels: list = field(default_factory=list)
    cauchy: list = field(default_factory=list)
    existence_ok: bool = True
    k0: float | None = None
    data_norm_f: float = math.nan
    data_norm_a: float = math.nan

    @property
    def iterations(self):
        return [lv.iterations for lv in self.levels]

    @property
    def converged(self) -> bool:
        return bool(self.levels) and all(lv.converged for lv in self.levels)

    @property
    def cauchy_decreasing(self) -> bool:
        c = self.cauchy
        return all(b < a for a, b in zip(c, c[1:]))

    @property
    def max_ratio_f(self) -> float:
        vals = [lv.ratio_f for lv in self.levels if math.isfinite(lv.ratio_f)]
        return max(vals) if vals else math.nan

    @property
    def max_ratio_a(self) -> float:
        vals = [lv.ratio_a for lv in self.levels if math.isfinite(lv.ratio_a)]
        return max(vals) if vals else math.nan

    @property
    def linf_within_k0(self) -> bool | None:
        if self.k0 is None:
            return None
        return all(lv.linf <= self.k0 + 1e-6 for lv in self.levels)

    @property
    def verdict(self) -> str:
        if not self.converged:
            return "not converged"
        if not all(lv.monotone_tail for lv in self.levels):
            return "converged (non-monotone gaps flagged)"
        return "converged"

    def to_text(self) -> str:
        lines = ["[solve]", f"verdict = {self.verdict}", f"existence_ok = {self.existence_ok}"]
        if self.k0 is not None:
            lines.append(f"k0 = {self.k0:.17g}")
            lines.append(f"linf_within_k0 = {self.linf_within_k0}")
        lines.append(f"data_norm_f = {self.data_norm_f:.17g}")
        lines.append(f"data_norm_a_L1 = {self.data_norm_a:.17g}")
        lines.append(f"max_ratio_h1_over_f = {self.max_ratio_f:.17g}")
        lines.append(f"max_ratio_h1_over_a = {self.max_ratio_a:.17g}")
        lines.append("cauchy = " + ", ".join(f"{c:.17g}" for c in self.cauchy))
        for lv in self.levels:
            lines.append("")
            lines.append(f"[level n={lv.n:g}]")
            lines.append(f"iterations = {lv.iterations}")
            lines.append(f"theta = {lv.theta}")
            lines.append(f"converged = {lv.converged}")
            lines.append(f"monotone_tail = {lv.monotone_tail}")
            lines.append(f"final_gap = {lv.gaps[-1] if lv.gaps else math.nan:.17g}")
            lines.append(f"h1 = {lv.h1:.17g}")
            lines.append(f"linf = {lv.linf:.17g}")
            for m, v in lv.lm_norms.items():
                lines.append(f"L{m:g} = {v:.17g}")
        return "\n".join(lines) + "\n"


def _monotone_tail(gaps) -> bool:
    tail = gaps[DIVERGENCE_WINDOW:]
    return all(b <= a * (1 + 1e-12) + 1e-300 for a, b in zip(tail, tail[1:]))


def _iterate(rp, mesh, u0, theta, opts):
    u = u0
    gaps = []
    rising = 0
    for _ in range(opts.max_iter):
        sys = assemble(rp, mesh, u, zero_order_mode=opts.zero_order_mode)
        s = solve_linear(sys)
        new = DiscreteField((1 - theta) * u.values + theta * s.values, mesh)
        gap = h1_seminorm(new - u)
        gaps.append(gap)
        u = new
        if not math.isfinite(gap):
            return u, gaps, "diverged"
        if gap <= opts.tol:
            return u, gaps, "converged"
        if len(gaps) >= 2 and gap > gaps[-2]:
            rising += 1
            if rising >= DIVERGENCE_WINDOW:
                return u, gaps, "diverged"
        else:
            rising = 0
    return u, gaps, "max_iter"


def picard_solve(rp: RegularizedProblem, mesh: RadialMesh, opts: SolveOptions | None = None, initial: DiscreteField | None = None):
    """Relaxed Picard iteration at a fixed level ``n``; returns ``(u, SolveReport)``."""
    opts = opts or SolveOptions()
    spec = rp.base
    report = SolveReport(existence_ok=check_existence(spec.hyp))
    if spec.zero_order:
        report.k0 = compute_k0(spec.h, spec.hyp.Q)
    nf, na = _data_norms(spec, mesh)
    report.data_norm_f, report.data_norm_a = nf, na
    u, level = _picard(rp, mesh, opts, initial)
    _measure(level, u, spec, opts, nf, na)
    report.levels.append(level)
    return u, report


def _picard(rp: RegularizedProblem, mesh: RadialMesh, opts: SolveOptions, initial: DiscreteField | None):
    """Relaxed Picard iteration at a fixed level ``n``.

    ``u <- (1-theta) u + theta * S(u)`` where ``S`` solves the diffusion
    problem with lower-order terms frozen at ``u``. Stops when the H^1 gap
    between successive iterates drops below ``opts.tol``. If the gap grows
    for five consecutive steps the relaxation is halved once and the run is
    restarted; a second failure raises :class:`ConvergenceError`.
    """
    rp.base.check_coefficients(mesh)
    if not check_existence(rp.base.hyp):
        log.warning("existence condition fails; contraction not guaranteed")
    u0 = DiscreteField.zeros(mesh) if initial is None else initial
    if u0.values[-1] != 0.0:
        u0 = DiscreteField(np.append(u0.values[:-1], 0.0), mesh)
    theta = opts.theta
    history = []
    for attempt in range(2):
        u, gaps, status = _iterate(rp, mesh, u0, theta, opts)
        history.extend(gaps)
        if status == "converged":
            level = LevelReport(
                n=rp.n,
                iterations=len(gaps),
                gaps=gaps,
                theta=theta,
                converged=True,
                monotone_tail=_monotone_tail(gaps),
            )
            return u, level
        if status == "max_iter":
            break
        if attempt == 0:
            log.info("gap grew for %d steps at n=%g; halving theta", DIVERGENCE_WINDOW, rp.n)
            theta *= 0.5
    raise ConvergenceError(
        f"Picard iteration at n={rp.n:g} did not converge ({status}, theta={theta}, "
        f"last gap {history[-1] if history else math.nan:.3e})",
        history=history,
        level=rp.n,
    )


def _data_norms(spec: ProblemSpec, mesh: RadialMesh):
    N = spec.N
    p_dual = 2 * N / (N + 2)
    nf = weighted_lp_norm(spec.f, p_dual, mesh) if not spec.f.is_zero else 0.0
    na = weighted_lp_norm(spec.a, 1.0, mesh) if spec.zero_order and not spec.a.is_zero else 0.0
    return nf, na


def _measure(level: LevelReport, u: DiscreteField, spec: ProblemSpec, opts: SolveOptions, nf, na):
    level.h1 = h1_seminorm(u)
    level.linf = u.max_abs()
    two_star = spec.hyp.two_star
    grid = opts.m_grid if opts.m_grid is not None else (two_star, 1.5 * two_star, 2 * two_star)
    level.lm_norms = {float(m): weighted_lp_norm(u, m, u.mesh) for m in grid}
    level.ratio_f = level.h1 / nf if nf > 0 else math.nan
    level.ratio_a = level.h1 / na if na > 0 else math.nan


def continuation_solve(spec: ProblemSpec, mesh: RadialMesh, opts: SolveOptions | None = None, initial: DiscreteField | None = None):
    """Solve every level of ``opts.schedule``, warm-starting each from the last.

    Returns the final level's field and a :class:`SolveReport` with Cauchy
    differences ``||u_{n_{j+1}} - u_{n_j}||_{H^1}`` between consecutive levels.
    """
    opts = opts or SolveOptions()
    report = SolveReport(existence_ok=check_existence(spec.hyp))
    if spec.zero_order:
        report.k0 = compute_k0(spec.h, spec.hyp.Q)
    nf, na = _data_norms(spec, mesh)
    report.data_norm_f, report.data_norm_a = nf, na
    u = initial
    prev = None
    for n in opts.schedule:
        rp = regularize(spec, n, opts.mode)
        try:
            u, level = _picard(rp, mesh, opts, u)
        except ConvergenceError as exc:
            exc.level = n
            raise
        _measure(level, u, spec, opts, nf, na)
        report.levels.append(level)
        if prev is not None:
            report.cauchy.append(h1_seminorm(u - prev))
        prev = u
    return u, report


def solve_level(spec: ProblemSpec, mesh: RadialMesh, n: float, opts: SolveOptions | None = None, initial=None):
    """Single-level convenience wrapper returning ``(field, SolveReport)``."""
    opts = opts or SolveOptions()
    one = SolveOptions(
        theta=opts.theta,
        tol=opts.tol,
        max_iter=opts.max_iter,
        schedule=(n,),
        mode=opts.mode,
        zero_order_mode=opts.zero_order_mode,
        m_grid=opts.m_grid,
    )
    return continuation_solve(spec, mesh, one, initial)
