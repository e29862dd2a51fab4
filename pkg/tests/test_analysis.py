import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import sparse, special
from scipy.sparse.linalg import eigsh

from hardyfem.analysis import (
    SummabilityReport,
    check_strong_maximum,
    check_weak_maximum,
    cutoff_levels,
    dirichlet_eigenvalue,
    inverse_power,
    max_principle_preconditions,
    min_hardy_rayleigh,
    summability_scan,
    u_rho_scan,
)
from hardyfem.errors import DomainError, MeshError
from hardyfem.fem import LinearSystem, ProblemSpec, hardy_mass_matrix, stiffness_matrix
from hardyfem.io import read_csv
from hardyfem.mesh import DiscreteField, build_mesh, log_mesh
from hardyfem.powersum import PowerSum
from hardyfem.solver import SolveOptions, continuation_solve
from hardyfem.thresholds import HypothesisSet


def to_sparse(ab):
    return sparse.csc_matrix(LinearSystem(ab, np.zeros(ab.shape[1])).dense())


def eigsh_oracle(A, B):
    return eigsh(to_sparse(A), k=1, M=to_sparse(B), sigma=0, which="LM")[0][0]


@pytest.mark.parametrize("mesh", [build_mesh(60, 0.9), log_mesh(200, 1e-8), build_mesh(40, 0.95, N=5)])
def test_hardy_minimum_matches_eigsh(mesh):
    mu = min_hardy_rayleigh(mesh, tol=1e-12)
    ref = eigsh_oracle(stiffness_matrix(mesh), hardy_mass_matrix(mesh))
    assert mu == pytest.approx(ref, rel=1e-8)
    assert mu >= ((mesh.N - 2) / 2) ** 2 - 1e-10


def test_hardy_minimum_nonincreasing_under_nested_refinement():
    mesh = build_mesh(20, 0.7)
    vals = []
    for _ in range(4):
        vals.append(min_hardy_rayleigh(mesh, tol=1e-12))
        mesh = mesh.refine()
    assert all(b <= a * (1 + 1e-10) for a, b in zip(vals, vals[1:]))
    assert vals[-1] >= 0.25 - 1e-10


@settings(max_examples=10)
@given(st.integers(8, 60), st.floats(0.6, 1.0), st.integers(3, 6))
def test_hardy_lower_bound(M, q, N):
    mu = min_hardy_rayleigh(build_mesh(M, q, N))
    assert mu >= ((N - 2) / 2) ** 2 - 1e-10


def test_hardy_minimizer_returned():
    mu, v = min_hardy_rayleigh(build_mesh(30, 0.8), return_field=True)
    assert v.boundary_ok and v.values[0] > 0


@pytest.mark.parametrize("N", [3, 4, 5])
def test_dirichlet_eigenvalue_from_above(N):
    exact = special.jn_zeros(N / 2 - 1, 1)[0] ** 2 if N % 2 == 0 else None
    if exact is None:
        exact = {3: math.pi**2, 5: 4.493409457909064**2}[N]
    coarse = dirichlet_eigenvalue(build_mesh(50, N=N))
    fine = dirichlet_eigenvalue(build_mesh(400, N=N))
    assert exact < fine < coarse
    assert fine == pytest.approx(exact, rel=1e-4)


def test_spectral_checks_need_enough_elements():
    with pytest.raises(MeshError):
        dirichlet_eigenvalue(build_mesh(4))


def test_inverse_power_small_pencil():
    mesh = build_mesh(20)
    mu, x, k = inverse_power(stiffness_matrix(mesh), stiffness_matrix(mesh))
    assert mu == pytest.approx(1.0)


def mp_spec():
    hyp = HypothesisSet(3, 1, 1, A=0.2, lam=0.1, Q=1)
    a = PowerSum([(2.0, -1.0), (1.0, 0.0)])
    return ProblemSpec(hyp, f=a, a=a, zero_order=True)


def test_max_principle_verdicts():
    spec = mp_spec()
    mesh = build_mesh(100, 0.95)
    u, _ = continuation_solve(spec, mesh, SolveOptions(schedule=(100, 1000, 10000)))
    v = check_weak_maximum(u, spec=spec)
    assert v.weak_ok and v.min_value >= -1e-10
    assert v.preconditions["f_equals_Q_a"] and v.preconditions["h_bounded_by_Q_on_k0"]
    check_strong_maximum(u, 0.9, v)
    assert v.strong_ok and v.c_omega > 0
    assert "c_omega" in v.to_text()
    with pytest.raises(DomainError):
        check_strong_maximum(u, 1.0)


def test_weak_maximum_flags_negative_field():
    mesh = build_mesh(10)
    vals = np.linspace(1, 0, 11)
    vals[3] = -0.1
    v = check_weak_maximum(DiscreteField(vals, mesh))
    assert not v.weak_ok and v.min_value == -0.1


def test_strong_maximum_uses_value_at_inner_radius():
    mesh = build_mesh(4)
    # field positive at nodes 0..0.75 but zero at r = 0.9 by linear decay to 0 at 1
    u = DiscreteField(np.array([1.0, 1.0, 1.0, 1.0, 0.0]), mesh)
    v = check_strong_maximum(u, 0.9)
    assert v.c_omega == pytest.approx(0.4)


def test_preconditions_detect_broken_domination():
    spec = mp_spec().with_(f=PowerSum.constant(-1.0))
    p = max_principle_preconditions(spec, build_mesh(10))
    assert not p["f_equals_Q_a"] and not p["f_nonnegative"]


def test_u_rho_scan_brackets_threshold(tmp_path):
    rep = u_rho_scan(1 / 3, [6, 7, 8, 9, 10], (1e-4, 1e-6, 1e-30), 3, 40)
    assert rep.classification == ["bounded"] * 3 + ["growing"] * 2
    assert rep.empirical_threshold == 9
    assert rep.consistent()
    path = rep.to_csv(tmp_path / "s.csv")
    header, cols = read_csv(path)
    assert header == ["m", "level", "cutoff", "norm", "integral", "class"]
    assert len(cols[0]) == 15


def test_scan_needs_three_levels_and_decreasing_cutoffs():
    meshes = cutoff_levels((1e-2, 1e-3, 1e-4))
    with pytest.raises(DomainError):
        summability_scan(lambda r: r, [2], meshes[:2])
    with pytest.raises(MeshError):
        summability_scan(lambda r: r, [2], meshes[::-1])
    with pytest.raises(MeshError):
        cutoff_levels((1e-2, 1e-2, 1e-3))


def test_scan_of_spec_rejects_m_below_two_star():
    meshes = cutoff_levels((1e-2, 1e-3, 1e-4))
    with pytest.raises(DomainError):
        summability_scan(mp_spec(), [4.0], meshes)


def test_scan_of_spec_with_workers():
    meshes = cutoff_levels((1e-2, 1e-3, 1e-4), elements_per_decade=20)
    opts = SolveOptions(schedule=(100, 1000))
    serial = summability_scan(mp_spec(), [6.0, 9.0], meshes, opts=opts)
    parallel = summability_scan(mp_spec(), [6.0, 9.0], meshes, opts=opts, workers=2)
    assert serial.integrals == parallel.integrals
    assert serial.classification == ["bounded", "bounded"]


def test_report_consistency_logic():
    rep = SummabilityReport([6, 9], [1e-2, 1e-3, 1e-4], [[1, 1]] * 3, [[1, 1], [1, 1], [1, 20]],
                            ["bounded", "growing"], 8.0)
    assert rep.consistent() and rep.empirical_threshold == 9
    rep.predicted_threshold = 10.0
    assert rep.consistent() is False
    rep.predicted_threshold = None
    assert rep.consistent() is None


def test_weak_maximum_examples():
    mesh = build_mesh(200, 0.97)
    hyp = HypothesisSet(3, 1, 1, A=0, lam=0.1, Q=1)
    a = PowerSum.monomial(1.0, -1.5)
    spec = ProblemSpec(hyp, f=a, a=a, zero_order=True)
    u, _ = continuation_solve(spec, mesh, SolveOptions(schedule=(100, 1000, 10000)))
    assert check_weak_maximum(u, spec=spec).weak_ok
    assert check_strong_maximum(u, 0.9).c_omega > 0
    neg = check_weak_maximum(DiscreteField.interpolate(lambda r: -(1 - r), mesh))
    assert not neg.weak_ok and neg.min_value == -1.0
    zero = check_weak_maximum(DiscreteField.zeros(mesh))
    assert zero.weak_ok and zero.min_value == 0.0


def test_strong_maximum_examples():
    mesh = build_mesh(1000)
    v = check_strong_maximum(DiscreteField.interpolate(lambda r: 1 - r**2, mesh), 0.9)
    assert v.c_omega == pytest.approx(0.19, abs=1e-12)
    z = check_strong_maximum(DiscreteField.zeros(mesh), 0.9)
    assert z.c_omega == 0.0 and not z.strong_ok


def test_coarse_dirichlet_value_above_pi_squared():
    assert dirichlet_eigenvalue(build_mesh(8)) > math.pi**2
