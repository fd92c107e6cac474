import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thermocarleman.carleman import KernelSpec
from thermocarleman.errors import InvalidNoiseModel, ParameterViolation, StandoffViolation
from thermocarleman.geometry import S_TAG, SIGMA_TAG, ConeSpec, make_cap_domain, make_cone_domain
from thermocarleman.harness import DEFAULT_SOURCES, add_noise, manufacture_solution, sample_cauchy_data, sources_from_list
from thermocarleman.reconstruct import (
    AUTO,
    CauchyData,
    ReconConfig,
    choose_tau,
    cone_radius_power,
    reconstruct_exact,
    reconstruct_noisy,
    relative_error,
    represent_full,
    sigma_remainder,
    stability_bound,
)

X = np.array([0.0, 0.0, 0.4])


@pytest.fixture(scope="module")
def setup(mb):
    mesh = make_cap_domain(1.0, 16)
    U = manufacture_solution(sources_from_list(DEFAULT_SOURCES), mb, mesh)
    return mesh, U, sample_cauchy_data(U, mesh, None)


@pytest.fixture(scope="module")
def mb():
    from thermocarleman.medium import bundle, make_medium

    return bundle(make_medium(1.3, 0.9, 1.1, 1.2, 0.7, 0.5, 0.8))


def test_full_representation_reproduces_solution(setup, mb):
    mesh, U, data = setup
    for x in (X, np.array([0.1, 0.2, 0.4]), np.array([-0.3, 0.1, 0.6])):
        assert relative_error(represent_full(x, data, mb), U(x[None])[0]) < 1e-3


def test_full_representation_converges_under_refinement(mb):
    errs = []
    for res in (8, 16):
        mesh = make_cap_domain(1.0, res)
        U = manufacture_solution(sources_from_list(DEFAULT_SOURCES), mb, mesh)
        errs.append(relative_error(represent_full(X, sample_cauchy_data(U, mesh, None), mb), U(X[None])[0]))
    assert errs[1] * 4 <= errs[0]


def test_conjugate_transpose_breaks_identity(setup, mb):
    # the adjoint term must use a plain transpose
    from thermocarleman.carleman import psi_reflected_field
    from thermocarleman.fundsol import stress_R_tilde

    mesh, U, data = setup
    V, Gy = psi_reflected_field(data.mesh.nodes, X, mb)
    RQ = stress_R_tilde(np.swapaxes(V, 1, 2).conj(), np.swapaxes(Gy, 1, 2).conj(), data.mesh.normals, mb.params)
    integ = np.einsum("nij,nj->ni", V, data.g) - np.einsum("nji,nj->ni", RQ, data.f)
    val = 0.5 * np.einsum("n,ni->i", data.mesh.weights, integ)
    assert relative_error(val, U(X[None])[0]) > 1e-2


def test_zero_data_gives_zero(setup, mb):
    mesh, U, data = setup
    zero = CauchyData(data.mesh, np.zeros_like(data.f), np.zeros_like(data.g))
    assert np.all(represent_full(X, zero, mb) == 0)
    cfg = ReconConfig(KernelSpec(tau=5.0), 5.0)
    assert np.all(reconstruct_exact(X, zero, cfg, mb) == 0)


def test_full_equals_s_part_plus_sigma_part(setup, mb):
    mesh, U, data = setup
    spec = KernelSpec(tau=6.0)
    s_part = reconstruct_exact(X, data, ReconConfig(spec, 6.0), mb)
    gap = sigma_remainder(X, data, mb, spec)
    assert relative_error(s_part + gap, U(X[None])[0]) < 1e-6


def test_reconstruction_error_decreases_with_tau(setup, mb):
    mesh, U, data = setup
    truth = U(X[None])[0]
    errs = [relative_error(reconstruct_exact(X, data.select(S_TAG), ReconConfig(KernelSpec(), t), mb, mesh), truth) for t in (5, 10, 15)]
    assert errs[0] > errs[1] > errs[2]


@settings(max_examples=8, deadline=None)
@given(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False), st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False))
def test_reconstruction_is_linear(a, b):
    from thermocarleman.medium import bundle, make_medium

    mbl = bundle(make_medium(1.3, 0.9, 1.1, 1.2, 0.7, 0.5, 0.8))
    mesh = make_cap_domain(1.0, 6)
    U = manufacture_solution(sources_from_list(DEFAULT_SOURCES), mbl, mesh)
    d1 = sample_cauchy_data(U, mesh, None)
    rng = np.random.default_rng(0)
    d2 = CauchyData(d1.mesh, rng.normal(size=d1.f.shape) + 0j, rng.normal(size=d1.g.shape) + 0j)
    comb = CauchyData(d1.mesh, a * d1.f + b * d2.f, a * d1.g + b * d2.g)
    cfg = ReconConfig(KernelSpec(tau=3.0), 3.0)
    lhs = reconstruct_exact(X, comb, cfg, mbl)
    rhs = a * reconstruct_exact(X, d1, cfg, mbl) + b * reconstruct_exact(X, d2, cfg, mbl)
    assert np.allclose(lhs, rhs, rtol=1e-10, atol=1e-12)


def test_noisy_with_zero_noise_is_bitwise_exact(setup, mb):
    mesh, U, data = setup
    s = data.select(S_TAG)
    noisy = add_noise(s, 0.0, 3)
    cfg = ReconConfig(KernelSpec(), 7.0, 0.0, 1.0)
    a = reconstruct_noisy(X, noisy, cfg, mb, mesh)
    b = reconstruct_exact(X, s, ReconConfig(KernelSpec(), 7.0), mb, mesh)
    assert np.array_equal(a, b)


def test_standoff_enforced(setup, mb):
    mesh, U, data = setup
    with pytest.raises(StandoffViolation):
        represent_full(np.array([0, 0, 0.01]), data, mb)
    with pytest.raises(StandoffViolation):
        represent_full(np.array([0, 0, 1.5]), data, mb)


def test_choose_tau_plug_in_values():
    mesh = make_cap_domain(1.0, 8)
    cfg = ReconConfig(KernelSpec(), AUTO, math.exp(-1), 1.0)
    h = float(mesh.nodes[:, -1].max())
    assert choose_tau(cfg, mesh) == pytest.approx(1.0 / h)
    cfg = ReconConfig(KernelSpec(), AUTO, 1e-3, 1.0)
    half = make_cap_domain(0.5, 8)
    assert choose_tau(cfg, half) * float(half.nodes[:, -1].max()) == pytest.approx(math.log(1000))


def test_choose_tau_rejects_noise_above_bound():
    mesh = make_cap_domain(1.0, 8)
    with pytest.raises(InvalidNoiseModel):
        choose_tau(ReconConfig(KernelSpec(), AUTO, 0.5, 0.4), mesh)


def test_cone_tau_rule_uses_brute_force_radius():
    mesh = make_cone_domain(ConeSpec(2.0), 12)
    s = mesh.select(S_TAG).nodes
    brute = max(((1j * math.hypot(p[0], p[1]) + p[2]) ** 2).real for p in s)
    assert cone_radius_power(mesh, 2.0) == pytest.approx(brute)
    cfg = ReconConfig(KernelSpec("mittag-leffler", 1.0, 3, 2.0), AUTO, 1e-2, 1.0)
    tau = choose_tau(cfg, mesh)
    assert 0 < tau < math.inf
    assert tau == pytest.approx(math.log(100) / brute)


def test_config_validation():
    with pytest.raises(ParameterViolation):
        ReconConfig(KernelSpec(), AUTO, 1.5, 1.0)
    with pytest.raises(ParameterViolation):
        ReconConfig(KernelSpec(), AUTO, 0.1, 0.0)
    with pytest.raises(ParameterViolation):
        ReconConfig(KernelSpec(), -2.0)


def test_stability_bound_properties():
    mesh = make_cap_domain(1.0, 8)
    cfg = ReconConfig(KernelSpec(), AUTO, 1e-3, 1.0)
    heights = np.linspace(0.15, 0.8, 10)
    bounds = [stability_bound(np.array([0, 0, h]), cfg, mesh) for h in heights]
    # the r^-n integral grows toward the boundary, so compare the decaying factor
    shapes = [b / float(np.sum(mesh.weights * np.linalg.norm(mesh.nodes - [0, 0, h], axis=1) ** -3)) for b, h in zip(bounds, heights)]
    assert all(a > b for a, b in zip(shapes[:-1], shapes[1:]))
    near_m = ReconConfig(KernelSpec(), AUTO, 0.999, 0.999 + 1e-12)
    assert stability_bound(X, near_m, mesh) == pytest.approx(0.0, abs=1e-8)
    at_m = ReconConfig(KernelSpec(), AUTO, 0.5, 0.5)
    assert stability_bound(X, at_m, mesh) == 0.0


def test_stability_exponent_limit_at_flat_boundary():
    mesh = make_cap_domain(1.0, 8)
    cfg = ReconConfig(KernelSpec(), AUTO, 1e-3, 1.0, standoff=0.0)
    b = stability_bound(np.array([0, 0, 1e-9]), cfg, mesh)
    C = float(np.sum(mesh.weights * np.linalg.norm(mesh.nodes - [0, 0, 1e-9], axis=1) ** -3))
    assert b == pytest.approx(C * math.log(1e3), rel=1e-6)
