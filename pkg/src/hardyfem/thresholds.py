"""Closed-form constants, the summability threshold function and its root.

All quantities here are scalar and pure. ``H`` denotes the Hardy constant
``(N-2)/2`` (so the optimal Hardy inequality constant is ``H**2``) and
``two_star`` the critical Sobolev exponent ``2N/(N-2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BoundUnavailable, DomainError, HypothesisError

#: Returned by :func:`solve_m_threshold` when no finite root exists, i.e.
#: every exponent ``m >= 2*`` is admissible.
UNBOUNDED = math.inf

# tolerances: closed-form identities vs iterative roots
IDENTITY_RTOL = 1e-12
ROOT_TOL = 1e-10


@dataclass(frozen=True)
class HypothesisSet:
    """Structural constants of the problem class.

    N is the space dimension, ``alpha <= M(x) <= beta`` bounds the diffusion
    matrix, ``A`` bounds the drift ``|V(x)| <= A/|x|``, ``lam`` multiplies the
    Hardy potential and ``Q`` is the domination constant in ``|f| <= Q a``.
    """

    N: int
    alpha: float
    beta: float
    A: float = 0.0
    lam: float = 0.0
    Q: float = 1.0

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 3:
            raise DomainError(f"dimension N must be an integer >= 3, got {self.N}")
        if not (0 < self.alpha <= self.beta):
            raise DomainError(
                f"need 0 < alpha <= beta, got alpha={self.alpha}, beta={self.beta}"
            )
        if self.A < 0:
            raise DomainError(f"drift bound A must be >= 0, got {self.A}")
        if self.lam < 0:
            raise DomainError(f"lambda must be >= 0, got {self.lam}")
        if self.Q <= 0:
            raise DomainError(f"Q must be > 0, got {self.Q}")

    @property
    def H(self) -> float:
        return hardy_constant(self.N)

    @property
    def two_star(self) -> float:
        return sobolev_exponent(self.N)


@dataclass(frozen=True)
class Nonlinearity:
    """Odd, strictly increasing, unbounded absorption ``h``.

    ``kind="linear"`` is ``h(s) = coef*s``; ``kind="power"`` is
    ``h(s) = coef*|s|**(p-1)*s`` with ``p >= 1``.
    """

    kind: str = "linear"
    p: float = 1.0
    coef: float = 1.0

    def __post_init__(self):
        if self.kind not in ("linear", "power"):
            raise DomainError(f"unknown nonlinearity kind {self.kind!r}")
        if self.coef <= 0 or not math.isfinite(self.coef):
            raise DomainError("nonlinearity coefficient must be positive and finite")
        if self.kind == "power" and not (self.p >= 1 and math.isfinite(self.p)):
            raise DomainError(f"power exponent must be >= 1, got {self.p}")
        if self.kind == "linear" and self.p != 1.0:
            raise DomainError("linear nonlinearity takes no exponent")

    @property
    def exponent(self) -> float:
        return 1.0 if self.kind == "linear" else float(self.p)

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == "linear" or self.p == 1.0:
            out = self.coef * s
        else:
            out = self.coef * np.abs(s) ** (self.p - 1.0) * s
        return out if out.ndim else float(out)

    def secant(self, s):
        """``h(s)/s`` with the limit value at ``s = 0``; nonnegative."""
        s = np.asarray(s, dtype=float)
        if self.kind == "linear" or self.p == 1.0:
            out = np.full_like(s, self.coef)
        else:
            out = self.coef * np.abs(s) ** (self.p - 1.0)
        return out if out.ndim else float(out)


@dataclass(frozen=True)
class ThresholdResult:
    H: float
    two_star: float
    m_threshold: float
    F_at_2star: float
    existence_ok: bool
    theorem_check_ok: bool

    @property
    def bounded(self) -> bool:
        return self.m_threshold != UNBOUNDED


def hardy_constant(N) -> float:
    """Return ``(N-2)/2``, whose square is the optimal Hardy constant."""
    if N < 3:
        raise DomainError(f"Hardy constant requires N >= 3, got N={N}")
    return (N - 2) / 2


def sobolev_exponent(N) -> float:
    if N < 3:
        raise DomainError(f"critical Sobolev exponent requires N >= 3, got N={N}")
    return 2 * N / (N - 2)


def eval_F(t, hyp: HypothesisSet):
    """Threshold function on ``[2*, inf)``.

    ``F(t) = alpha*H*N/t*(2 - 2*/t) + A*H*(2*/t - 1)``. It equals
    ``alpha*H**2`` at ``t = 2*``, decreases strictly and tends to ``-A*H``.
    Accepts scalars or arrays.
    """
    H = hyp.H
    ts = hyp.two_star
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < ts) or np.any(np.isnan(t_arr)):
        raise DomainError(f"F is defined on [2*, inf) = [{ts}, inf)")
    val = hyp.alpha * H * hyp.N / t_arr * (2 - ts / t_arr) + hyp.A * H * (ts / t_arr - 1)
    return val if val.ndim else float(val)


def target_value(hyp: HypothesisSet) -> float:
    """``A*H + lambda``, the level that F crosses at the threshold."""
    return hyp.A * hyp.H + hyp.lam


def check_existence(hyp: HypothesisSet) -> bool:
    """Existence condition ``alpha*H**2 > A*H + lambda``."""
    return hyp.alpha * hyp.H**2 > target_value(hyp)


def existence_inequality(hyp: HypothesisSet) -> str:
    """Human-readable statement of the existence inequality with values."""
    lhs = hyp.alpha * hyp.H**2
    rhs = target_value(hyp)
    rel = ">" if lhs > rhs else "<="
    return f"alpha*H^2 > A*H + lambda ({lhs:.6g} {rel} {rhs:.6g})"


def require_existence(hyp: HypothesisSet) -> None:
    if not check_existence(hyp):
        raise HypothesisError(
            "existence condition fails: " + existence_inequality(hyp),
            inequality=existence_inequality(hyp),
        )


def solve_m_threshold(hyp: HypothesisSet, max_doublings: int = 60) -> float:
    """Root ``m > 2*`` of ``F(m) = A*H + lambda`` by bisection.

    Returns :data:`UNBOUNDED` when F never reaches the target (only possible
    when ``A = lambda = 0``). Raises :class:`HypothesisError` when the target
    is not below ``F(2*) = alpha*H**2``.
    """
    require_existence(hyp)
    target = target_value(hyp)
    lo = hyp.two_star
    g = lambda t: eval_F(t, hyp) - target  # noqa: E731
    hi = lo
    for _ in range(max_doublings):
        hi *= 2.0
        if g(hi) <= 0:
            break
    else:
        return UNBOUNDED
    if g(hi) == 0:
        return hi
    # g(lo) > 0 >= g(hi); bisect down to adjacent floats
    for _ in range(2000):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if g(mid) > 0:
            lo = mid
        else:
            hi = mid
    root = hi if abs(g(hi)) <= abs(g(lo)) else lo
    scale = max(1.0, hyp.alpha * hyp.H**2)
    if abs(g(root)) > IDENTITY_RTOL * scale and abs(g(root)) > ROOT_TOL:
        raise ArithmeticError(f"bisection failed to resolve the threshold root near {root}")
    return root


def threshold_report(hyp: HypothesisSet) -> ThresholdResult:
    """Bundle H, 2*, the threshold and both existence checks.

    The threshold-root check ``alpha*H**2 > F(m_threshold)`` coincides with the
    direct check whenever the root exists; both are evaluated so a numerical
    disagreement would surface.
    """
    ok = check_existence(hyp)
    F2 = eval_F(hyp.two_star, hyp)
    if ok:
        m = solve_m_threshold(hyp)
        F_m = target_value(hyp) if m == UNBOUNDED else eval_F(m, hyp)
        thm_ok = hyp.alpha * hyp.H**2 > F_m
    else:
        m = math.nan
        thm_ok = False
    return ThresholdResult(
        H=hyp.H,
        two_star=hyp.two_star,
        m_threshold=m,
        F_at_2star=F2,
        existence_ok=ok,
        theorem_check_ok=thm_ok,
    )


def s_from_m(m: float, N: int) -> float:
    """Power ``s`` with ``m = 2*(s/2 + 1)``."""
    return 2 * m / sobolev_exponent(N) - 2


def lm_estimate_constant(hyp: HypothesisSet, m: float, h: Nonlinearity, sobolev: float = 1.0):
    """Constants of the L^m a priori estimate for the regularized solutions.

    Returns ``(c_lin, c_bound)`` where
    ``c_lin = C_s*alpha*(s+1) - sqrt(C_s)*A*(s+1)/H - lambda/H**2`` with
    ``s = 2m/2* - 2`` and ``C_s = 4/(s+2)**2``, and ``c_bound`` is the
    prefactor bounding ``int |u_n|^m`` by ``(int a)^(2*/2)``.

    ``c_lin > 0`` exactly when ``A*H + lambda < F(m)``. When ``c_lin <= 0``
    no bound is available and :class:`BoundUnavailable` is raised carrying
    ``c_lin``; use :func:`lm_linear_constant` for the sign alone.
    """
    c_lin = lm_linear_constant(hyp, m)
    if c_lin <= 0:
        raise BoundUnavailable(
            f"C(alpha,s,A,H,lambda) = {c_lin:.6g} <= 0 at m = {m}: "
            "L^m regularity not guaranteed",
            c_lin,
        )
    N = hyp.N
    k0 = compute_k0(h, hyp.Q)
    base = hyp.Q * k0 ** (m * (N - 2) / N - 1) * sobolev**2 / c_lin
    return c_lin, base ** (hyp.two_star / 2)


def lm_linear_constant(hyp: HypothesisSet, m: float) -> float:
    if m < hyp.two_star:
        raise DomainError(f"m must be >= 2* = {hyp.two_star}, got {m}")
    s = s_from_m(m, hyp.N)
    C_s = 4.0 / (s + 2) ** 2
    H = hyp.H
    return C_s * hyp.alpha * (s + 1) - math.sqrt(C_s) * hyp.A * (s + 1) / H - hyp.lam / H**2


def compute_k0(h: Nonlinearity, Q: float, rtol: float = 1e-12) -> float:
    """Level ``k0 = h^{-1}(Q)`` beyond which ``|h(s)| > Q``."""
    if not Q > 0:
        raise DomainError(f"Q must be positive, got {Q}")
    lo, hi = 0.0, 1.0
    for _ in range(2100):
        if h(hi) >= Q:
            break
        lo, hi = hi, 2 * hi
    else:
        raise DomainError("nonlinearity appears bounded; no level exceeds Q")
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if h(mid) < Q:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def truncate(t, k):
    """Return ``(T_k(t), G_k(t))`` with ``T_k = max(-k, min(t, k))``.

    ``G_k = t - T_k``, so ``T_k + G_k`` recovers ``t`` up to one rounding.
    Works elementwise on arrays.
    """
    if not k > 0:
        raise DomainError(f"truncation level must be positive, got {k}")
    T = np.clip(t, -k, k)
    G = np.asarray(t) - T
    if np.ndim(T) == 0:
        return float(T), float(G)
    return T, G
