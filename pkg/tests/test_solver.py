import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hardyfem.errors import ConvergenceError, DomainError
from hardyfem.fem import ProblemSpec, regularize
from hardyfem.mesh import DiscreteField, build_mesh, h1_seminorm
from hardyfem.powersum import PowerSum
from hardyfem.solver import SolveOptions, continuation_solve, picard_solve, solve_level
from hardyfem.thresholds import HypothesisSet, Nonlinearity, compute_k0


def bnd_spec(h=Nonlinearity(), Q=0.5):
    hyp = HypothesisSet(3, 1, 1, A=0.2, lam=0.05, Q=Q)
    a = PowerSum.monomial(1.0, -1.0)
    return ProblemSpec(hyp, f=Q * a, a=a, h=h, zero_order=True)


MESH = build_mesh(120, 0.95)


def test_options_validation():
    for kw in (dict(theta=0), dict(theta=1.5), dict(tol=0), dict(max_iter=0),
               dict(schedule=()), dict(schedule=(100, 10)), dict(schedule=(0.5,))):
        with pytest.raises(DomainError):
            SolveOptions(**kw)


def test_zero_data_gives_zero_solution():
    spec = ProblemSpec(HypothesisSet(3, 1, 1, lam=0.1))
    u, rep = continuation_solve(spec, build_mesh(20))
    assert np.all(u.values == 0.0)
    assert rep.converged


def test_continuation_report():
    opts = SolveOptions(schedule=(100, 1000, 10000))
    u, rep = continuation_solve(bnd_spec(), MESH, opts)
    assert rep.converged and rep.existence_ok
    assert len(rep.levels) == 3 and len(rep.cauchy) == 2
    assert rep.cauchy_decreasing
    assert rep.linf_within_k0
    assert u.boundary_ok
    assert all(lv.iterations <= 200 for lv in rep.levels)
    text = rep.to_text()
    assert "verdict = converged" in text and "[level n=10000]" in text


@pytest.mark.parametrize("h", [Nonlinearity(), Nonlinearity("power", 3.0)])
def test_uniqueness_from_zero_and_from_k0(h):
    spec = bnd_spec(h)
    k0 = compute_k0(h, spec.hyp.Q)
    start = DiscreteField.interpolate(lambda r: np.full_like(r, k0), MESH)
    opts = SolveOptions(tol=1e-12)
    u0, _ = solve_level(spec, MESH, 1000, opts)
    u1, _ = solve_level(spec, MESH, 1000, opts, initial=start)
    assert h1_seminorm(u0 - u1) < 1e-9


def test_semi_implicit_and_explicit_agree_for_linear_h():
    spec = bnd_spec()
    a, _ = solve_level(spec, MESH, 100, SolveOptions(tol=1e-12, zero_order_mode="explicit"))
    b, _ = solve_level(spec, MESH, 100, SolveOptions(tol=1e-12, zero_order_mode="semi-implicit"))
    np.testing.assert_allclose(a.values, b.values, atol=1e-9)


def test_deterministic():
    opts = SolveOptions(schedule=(100, 1000))
    a, ra = continuation_solve(bnd_spec(), MESH, opts)
    b, rb = continuation_solve(bnd_spec(), MESH, opts)
    np.testing.assert_array_equal(a.values, b.values)
    assert ra.iterations == rb.iterations


@settings(max_examples=15)
@given(st.floats(0.05, 0.2), st.floats(0, 0.1), st.floats(0.2, 2.0))
def test_n_consistency(A, lam, Q):
    # consecutive levels move the solution less and less
    hyp = HypothesisSet(3, 1, 1, A=A, lam=lam, Q=Q)
    a = PowerSum.monomial(1.0, -1.0)
    spec = ProblemSpec(hyp, f=Q * a, a=a, zero_order=True)
    _, rep = continuation_solve(spec, build_mesh(60, 0.93), SolveOptions(schedule=(100, 1000, 10000)))
    assert rep.converged
    assert rep.cauchy_decreasing


def test_max_iter_exhaustion_raises_with_history():
    with pytest.raises(ConvergenceError) as exc:
        solve_level(bnd_spec(), MESH, 100, SolveOptions(max_iter=2, tol=1e-14))
    assert len(exc.value.history) == 2
    assert exc.value.level == 100


def test_picard_solve_single_level():
    u, rep = picard_solve(regularize(bnd_spec(), 100), MESH)
    assert rep.converged and rep.levels[0].n == 100
    assert np.isfinite(rep.max_ratio_f) and np.isfinite(rep.max_ratio_a)


def test_rational_mode_converges():
    u, rep = continuation_solve(bnd_spec(), MESH, SolveOptions(schedule=(100, 1000), mode="rational"))
    assert rep.converged


def test_linf_bound_fails_when_hardy_term_dominates():
    # f = Q a with a constant, N=5, strong Hardy term and an inward drift:
    # the solution grows like r^-0.38 near the origin, so max|u| exceeds
    # k0 = 1 and keeps growing under refinement. The L^inf bound claimed for
    # this problem class therefore does not hold without extra hypotheses.
    hyp = HypothesisSet(5, 1, 1, A=0.5, lam=1.0, Q=1.0)
    spec = ProblemSpec(hyp, f=PowerSum.constant(3.0), a=PowerSum.constant(3.0), drift=-0.5, zero_order=True)
    opts = SolveOptions(schedule=(1e6,))
    peaks = []
    for M in (100, 200):
        _, rep = continuation_solve(spec, build_mesh(M, 0.97 ** (200 / M), 5), opts)
        assert rep.existence_ok
        peaks.append(rep.levels[-1].linf)
        assert rep.linf_within_k0 is False
    assert peaks[1] > peaks[0] > 10 * rep.k0


def test_default_schedule_cauchy_decreasing_for_bounded_data():
    hyp = HypothesisSet(3, 1, 1, A=0.2, lam=0.05, Q=1)
    spec = ProblemSpec(hyp, f=PowerSum.constant(0.5), a=PowerSum.constant(1.0), zero_order=True)
    _, rep = continuation_solve(spec, MESH, SolveOptions())
    assert rep.converged and len(rep.cauchy) == 3
    assert rep.cauchy_decreasing


def test_truncation_inactive_for_bounded_solution():
    hyp = HypothesisSet(3, 1, 1, A=0.2, lam=0.0, Q=1)
    spec = ProblemSpec(hyp, f=PowerSum.constant(1.0), a=PowerSum.constant(1.0), zero_order=True)
    u, _ = solve_level(spec, MESH, 10, SolveOptions(tol=1e-12))
    assert u.max_abs() < 10
    rp = regularize(spec, 10)
    np.testing.assert_array_equal(rp.tau(u.values), u.values)


def test_single_level_schedule_matches_picard_solve():
    spec = bnd_spec()
    a, _ = continuation_solve(spec, MESH, SolveOptions(schedule=(500,)))
    b, _ = picard_solve(regularize(spec, 500), MESH)
    np.testing.assert_array_equal(a.values, b.values)


def test_zero_data_one_iteration():
    spec = ProblemSpec(HypothesisSet(3, 1, 1, A=0.1, lam=0.1))
    _, rep = solve_level(spec, MESH, 100)
    assert rep.iterations == [1]


def test_hypothesis_violation_fails_loudly():
    # alpha H^2 <= A H + lambda: the Picard map need not contract
    hyp = HypothesisSet(3, 1, 1, A=0.5, lam=0.3)
    spec = ProblemSpec(hyp, f=PowerSum.constant(1.0), drift=-0.5)
    try:
        _, rep = solve_level(spec, MESH, 1e4, SolveOptions(max_iter=200))
    except ConvergenceError as exc:
        assert exc.history
    else:
        assert not rep.existence_ok


def test_rational_and_hard_truncation_share_the_limit():
    # the two regularization schemes differ at finite n; their gap shrinks with n
    hyp = HypothesisSet(3, 1, 1, A=0.3, lam=0.05, Q=1)
    spec = ProblemSpec(hyp, f=PowerSum.monomial(2.0, -1.0), a=PowerSum.monomial(1.0, -1.5),
                       zero_order=True, drift=-0.3)
    gaps = []
    for n in (1e2, 1e3, 1e4, 1e5):
        hard, _ = solve_level(spec, MESH, n, SolveOptions(mode="hard"))
        rat, _ = solve_level(spec, MESH, n, SolveOptions(mode="rational"))
        gaps.append(h1_seminorm(hard - rat))
    assert all(b < 0.5 * a for a, b in zip(gaps, gaps[1:]))
