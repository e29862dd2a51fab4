"""Run configuration files (INI style) and their validation.

Example::

    [hypothesis]
    dim = 3
    alpha = 1
    beta = 1
    A = 0
    lambda = 0.1
    Q = 1

    [coefficients]
    diffusion = 1
    a = 1*r^-1.5
    f = 1*r^-1.5
    h = linear
    zero_order = true

    [discretization]
    elements = 400
    grading = 0.98

    [solver]
    schedule = 100, 1000, 10000

Every key is optional except the hypothesis block; unknown sections or keys
are rejected.
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError, DomainError
from .expressions import parse_expression
from .fem import TRUNCATION_MODES, ZERO_ORDER_MODES, ProblemSpec
from .mesh import RadialMesh, build_mesh
from .powersum import PowerSum
from .solver import SolveOptions
from .thresholds import HypothesisSet, Nonlinearity

SCHEMA = {
    "hypothesis": {"dim", "alpha", "beta", "a", "lambda", "q"},
    "coefficients": {"diffusion", "a", "f", "h", "h_exponent", "h_coef", "drift", "zero_order"},
    "discretization": {"elements", "grading", "cutoff", "quadrature_order"},
    "solver": {"theta", "tolerance", "max_iterations", "schedule", "mode", "zero_order_mode"},
    "tasks": {"m_grid", "inner_radius", "scan_cutoffs", "elements_per_decade", "weak_tolerance", "workers"},
    "output": {"directory"},
}
REQUIRED = {"hypothesis": {"dim", "alpha"}}


@dataclass
class RunConfig:
    spec: ProblemSpec
    elements: int = 400
    grading: float = 0.98
    cutoff: float = 0.0
    quad_order: int = 4
    solver: SolveOptions = field(default_factory=SolveOptions)
    m_grid: tuple | None = None
    inner_radius: float = 0.9
    scan_cutoffs: tuple = (1e-4, 1e-6, 1e-30)
    elements_per_decade: int = 40
    weak_tolerance: float = 1e-10
    workers: int = 1
    output_dir: Path | None = None

    def mesh(self) -> RadialMesh:
        return build_mesh(self.elements, self.grading, self.spec.N, self.cutoff, self.quad_order)


class _Located:
    """Line lookup for ``section.key`` in the raw config text."""

    def __init__(self, text):
        self.lines = text.splitlines()
        self.index = {}
        section = None
        for i, raw in enumerate(self.lines, start=1):
            s = raw.strip()
            m = re.match(r"\[([^\]]+)\]", s)
            if m:
                section = m.group(1).strip()
                self.index[(section, None)] = (i, 1)
                continue
            m = re.match(r"([^=:#;]+?)\s*[=:]\s*(.*)$", s)
            if m and section is not None:
                key = m.group(1).strip().lower()
                col = raw.index(m.group(2)) + 1 if m.group(2) else len(raw) + 1
                self.index[(section, key)] = (i, col)

    def at(self, section, key=None):
        return self.index.get((section, key), (None, None))


def _bool(text, where):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}", *where)


def _num(text, where, kind=float):
    try:
        v = kind(text.strip())
    except ValueError:
        raise ConfigError(f"expected {'an integer' if kind is int else 'a number'}, got {text!r}", *where) from None
    return v


def _list(text, where, kind=float):
    parts = [p for p in text.split(",") if p.strip()]
    if not parts:
        raise ConfigError("expected a comma-separated list", *where)
    return tuple(_num(p, where, kind) for p in parts)


def parse_config_text(text: str) -> RunConfig:
    loc = _Located(text)
    cp = configparser.ConfigParser(interpolation=None, strict=True)
    try:
        cp.read_string(text)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("key outside any [section]", exc.lineno, 1) from None
    except configparser.DuplicateOptionError as exc:
        raise ConfigError(f"duplicate key {exc.option!r} in [{exc.section}]", exc.lineno, 1) from None
    except configparser.DuplicateSectionError as exc:
        raise ConfigError(f"duplicate section [{exc.section}]", exc.lineno, 1) from None
    except configparser.ParsingError as exc:
        lineno = exc.errors[0][0] if exc.errors else None
        raise ConfigError("malformed line (expected 'key = value')", lineno, 1) from None

    for sec in cp.sections():
        if sec not in SCHEMA:
            raise ConfigError(f"unknown section [{sec}]", *loc.at(sec))
        for key in cp[sec]:
            if key not in SCHEMA[sec]:
                raise ConfigError(f"unknown key {key!r} in [{sec}]", *loc.at(sec, key))
    for sec, keys in REQUIRED.items():
        if sec not in cp:
            raise ConfigError(f"missing required section [{sec}]")
        for k in keys:
            if k not in cp[sec]:
                raise ConfigError(f"missing required key {k!r} in [{sec}]", *loc.at(sec))

    def get(sec, key, conv, default):
        if sec in cp and key in cp[sec]:
            return conv(cp[sec][key], loc.at(sec, key))
        return default

    hy = "hypothesis"
    N = get(hy, "dim", lambda t, w: _num(t, w, int), None)
    alpha = get(hy, "alpha", _num, None)
    beta = get(hy, "beta", _num, alpha)
    A = get(hy, "a", _num, 0.0)
    lam = get(hy, "lambda", _num, 0.0)
    Q = get(hy, "q", _num, 1.0)
    checks = [
        (N >= 3, "dim must be an integer >= 3", "dim"),
        (alpha > 0, "alpha must be positive", "alpha"),
        (beta >= alpha, "beta must be >= alpha", "beta"),
        (A >= 0, "A must be nonnegative", "a"),
        (lam >= 0, "lambda must be nonnegative", "lambda"),
        (Q > 0, "Q must be positive", "q"),
    ]
    for ok, msg, key in checks:
        if not ok:
            raise ConfigError(msg, *loc.at(hy, key))
    hyp = HypothesisSet(N, alpha, beta, A=A, lam=lam, Q=Q)

    co = "coefficients"

    def expr(text, where):
        return parse_expression(text, line=where[0], column=where[1] or 1)

    diffusion = get(co, "diffusion", expr, None)
    a = get(co, "a", expr, PowerSum())
    f = get(co, "f", expr, PowerSum())
    h_kind = get(co, "h", lambda t, w: t.strip().lower(), "linear")
    h_exp = get(co, "h_exponent", _num, 1.0)
    h_coef = get(co, "h_coef", _num, 1.0)
    drift = get(co, "drift", _num, None)
    zero_order = get(co, "zero_order", _bool, not a.is_zero)
    if h_kind not in ("linear", "power"):
        raise ConfigError(f"h must be 'linear' or 'power', got {h_kind!r}", *loc.at(co, "h"))
    if h_kind == "power" and h_exp < 1:
        raise ConfigError("h_exponent must be >= 1", *loc.at(co, "h_exponent"))
    if h_kind == "linear" and h_exp != 1.0:
        raise ConfigError("h_exponent requires h = power", *loc.at(co, "h_exponent"))
    if h_coef <= 0:
        raise ConfigError("h_coef must be positive", *loc.at(co, "h_coef"))
    if drift is not None and abs(drift) > A:
        raise ConfigError(f"|drift| = {abs(drift)} exceeds A = {A}", *loc.at(co, "drift"))
    if zero_order and not a.integrable(N):
        raise ConfigError("absorption weight a must be integrable on the ball", *loc.at(co, "a"))
    h = Nonlinearity(h_kind, h_exp if h_kind == "power" else 1.0, h_coef)
    try:
        spec = ProblemSpec(hyp, f=f, a=a, h=h, diffusion=diffusion, drift=drift, zero_order=zero_order)
    except DomainError as exc:
        raise ConfigError(str(exc), *loc.at(co)) from None

    di = "discretization"
    elements = get(di, "elements", lambda t, w: _num(t, w, int), 400)
    grading = get(di, "grading", _num, 0.98)
    cutoff = get(di, "cutoff", _num, 0.0)
    quad = get(di, "quadrature_order", lambda t, w: _num(t, w, int), 4)
    if elements < 2:
        raise ConfigError("elements must be >= 2", *loc.at(di, "elements"))
    if not 0 < grading <= 1:
        raise ConfigError("grading must lie in (0, 1]", *loc.at(di, "grading"))
    if not 0 <= cutoff < 1:
        raise ConfigError("cutoff must lie in [0, 1)", *loc.at(di, "cutoff"))
    if quad < 1:
        raise ConfigError("quadrature_order must be >= 1", *loc.at(di, "quadrature_order"))

    so = "solver"
    theta = get(so, "theta", _num, 0.5)
    tol = get(so, "tolerance", _num, 1e-10)
    max_it = get(so, "max_iterations", lambda t, w: _num(t, w, int), 200)
    schedule = get(so, "schedule", _list, (10, 100, 1000, 10000))
    mode = get(so, "mode", lambda t, w: t.strip().lower(), "hard")
    zmode = get(so, "zero_order_mode", lambda t, w: t.strip().lower(), "semi-implicit")
    if not 0 < theta <= 1:
        raise ConfigError("theta must lie in (0, 1]", *loc.at(so, "theta"))
    if tol <= 0:
        raise ConfigError("tolerance must be positive", *loc.at(so, "tolerance"))
    if max_it < 1:
        raise ConfigError("max_iterations must be >= 1", *loc.at(so, "max_iterations"))
    if any(b <= a_ for a_, b in zip(schedule, schedule[1:])):
        raise ConfigError("schedule must be strictly increasing", *loc.at(so, "schedule"))
    if any(n < 1 for n in schedule):
        raise ConfigError("schedule levels must be >= 1", *loc.at(so, "schedule"))
    if mode not in TRUNCATION_MODES:
        raise ConfigError(f"mode must be one of {TRUNCATION_MODES}", *loc.at(so, "mode"))
    if zmode not in ZERO_ORDER_MODES:
        raise ConfigError(f"zero_order_mode must be one of {ZERO_ORDER_MODES}", *loc.at(so, "zero_order_mode"))

    ta = "tasks"
    m_grid = get(ta, "m_grid", _list, None)
    if m_grid is not None and any(m < hyp.two_star for m in m_grid):
        raise ConfigError(f"m_grid values must be >= 2* = {hyp.two_star:g}", *loc.at(ta, "m_grid"))
    opts = SolveOptions(theta, tol, max_it, schedule, mode, zmode, m_grid)
    inner = get(ta, "inner_radius", _num, 0.9)
    if not 0 < inner < 1:
        raise ConfigError("inner_radius must lie in (0, 1)", *loc.at(ta, "inner_radius"))
    cuts = get(ta, "scan_cutoffs", _list, (1e-4, 1e-6, 1e-30))
    if len(cuts) < 3 or any(b >= a_ for a_, b in zip(cuts, cuts[1:])) or not all(0 < c < 1 for c in cuts):
        raise ConfigError("scan_cutoffs needs >= 3 strictly decreasing values in (0, 1)", *loc.at(ta, "scan_cutoffs"))
    epd = get(ta, "elements_per_decade", lambda t, w: _num(t, w, int), 40)
    if epd < 1:
        raise ConfigError("elements_per_decade must be >= 1", *loc.at(ta, "elements_per_decade"))
    wtol = get(ta, "weak_tolerance", _num, 1e-10)
    if wtol < 0:
        raise ConfigError("weak_tolerance must be >= 0", *loc.at(ta, "weak_tolerance"))
    workers = get(ta, "workers", lambda t, w: _num(t, w, int), 1)
    if workers < 1:
        raise ConfigError("workers must be >= 1", *loc.at(ta, "workers"))

    out = get("output", "directory", lambda t, w: Path(t.strip()), None)
    return RunConfig(
        spec=spec,
        elements=elements,
        grading=grading,
        cutoff=cutoff,
        quad_order=quad,
        solver=opts,
        m_grid=m_grid,
        inner_radius=inner,
        scan_cutoffs=cuts,
        elements_per_decade=epd,
        weak_tolerance=wtol,
        workers=workers,
        output_dir=out,
    )


def load_config(path) -> RunConfig:
    return parse_config_text(Path(path).read_text())
