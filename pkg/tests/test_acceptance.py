"""Acceptance criteria at their stated tolerances; each prints one PASS/FAIL line."""

import cmath
import math
import time

import numpy as np
import pytest

from thermocarleman.geometry import make_cap_domain
from thermocarleman.harness import (
    DEFAULT_MEDIUM,
    DEFAULT_SOURCES,
    fit_rate,
    StudySpec,
    manufacture_solution,
    medium_from_dict,
    monotone_violations,
    run_study,
    sample_cauchy_data,
    sources_from_list,
    verify_carleman,
    verify_fundamental,
    verify_kernel,
)
from thermocarleman.reconstruct import relative_error, represent_full
from thermocarleman.specfun import bessel_j0, mittag_leffler

J0_SPOT = [
    (0.5, 0.9384698072408129),
    (1.0, 0.7651976865579666),
    (5.0, -0.1775967713143383),
    (10.0, -0.24593576445134835),
    (100.0, 0.019985850304223122),
]


@pytest.fixture
def report(capsys):
    def _report(name: str, ok: bool, detail: str, elapsed: float, budget: float):
        ok = ok and elapsed < budget
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {name}: {detail} ({elapsed:.1f} s, budget {budget:.0f} s)")
        return ok

    return _report


def _study(domain: dict, sweep: dict, point):
    return StudySpec.from_dict(
        {"domain": domain, "medium": DEFAULT_MEDIUM, "sources": DEFAULT_SOURCES, "sweep": sweep, "eval_points": [point]}
    )


def test_criterion_1_fundamental_solution(report):
    t0 = time.perf_counter()
    worst = verify_fundamental(5, 20, seed=0)
    assert report("1 fundamental solution", worst < 1e-5, f"max rel B-residual {worst:.2e}", time.perf_counter() - t0, 30)


def test_criterion_2_kernel_tau_zero(report):
    t0 = time.perf_counter()
    check = verify_kernel(20, seed=0)[0]
    assert report("2 kernel tau->0 oracle", check.passed, f"max rel err {check.worst:.2e}", time.perf_counter() - t0, 10)


def test_criterion_3_tau_derivative(report):
    t0 = time.perf_counter()
    _, hi, lo = verify_kernel(20, seed=1)
    ok = hi.passed and lo.passed
    detail = f"tau>k rel {hi.worst:.2e}, tau<k abs {lo.worst:.2e}"
    assert report("3 tau-derivative identity", ok, detail, time.perf_counter() - t0, 30)


@pytest.mark.slow
def test_criterion_4_carleman_decay(report):
    t0 = time.perf_counter()
    taus = (5.0, 10.0, 20.0, 40.0)
    ok, parts = True, []
    for x in ([0.0, 0.0, 0.4], [0.2, -0.1, 0.5]):
        eps, fit = verify_carleman(np.array(x), taus, resolution=48, tau_power=1.0)
        good = monotone_violations(eps) == 0 and abs(fit.slope + x[-1]) <= 0.15 * x[-1]
        ok &= good
        plain = fit_rate(taus, eps).slope
        parts.append(f"x_n={x[-1]} slope {fit.slope:.3f} (tau-corrected; plain {plain:.3f})")
    assert report("4 Carleman decay", ok, ", ".join(parts), time.perf_counter() - t0, 600)


@pytest.mark.slow
def test_criterion_5_exact_data_rate(report):
    t0 = time.perf_counter()
    x = [0.0, 0.0, 0.4]
    rep = run_study(_study({"kind": "cap", "resolution": 40}, {"taus": [5.0, 10.0, 15.0, 20.0, 25.0]}, x))
    fit = rep.fits["point0"]
    ok = rep.complete and rep.gates["point0"]
    detail = f"slope {fit.get('slope', float('nan')):.3f} vs target {-x[-1]} +-15%"
    assert report("5 exact-data rate (cap)", ok, detail, time.perf_counter() - t0, 600)


@pytest.mark.slow
def test_criterion_6_noisy_rate(report):
    t0 = time.perf_counter()
    rep = run_study(_study({"kind": "cap", "resolution": 24}, {"deltas": [1e-1, 1e-2, 1e-3, 1e-4]}, [0.0, 0.0, 0.4]))
    fit = rep.fits["point0"]
    errs = [r["err_rel"] for r in rep.rows]
    ok = rep.complete and rep.gates["point0"] and monotone_violations(errs) <= 1
    detail = f"exponent {fit.get('slope', float('nan')):.3f} vs {fit.get('target', float('nan')):.3f} +-25%"
    assert report("6 noisy-data rate (cap, auto tau)", ok, detail, time.perf_counter() - t0, 900)


@pytest.mark.slow
def test_criterion_7_cone_rate(report):
    t0 = time.perf_counter()
    rep = run_study(
        _study({"kind": "cone", "rho_exp": 2.0, "resolution": 24}, {"taus": [5.0, 10.0, 20.0]}, [0.0, 0.0, 0.6])
    )
    errs = [r["err_rel"] for r in rep.rows]
    fit = rep.fits["point0"]
    ok = rep.complete and monotone_violations(errs) == 0 and rep.gates["point0"]
    detail = f"errors {', '.join(f'{e:.2e}' for e in errs)}, slope {fit.get('slope', float('nan')):.3f}"
    assert report("7 cone rate (Mittag-Leffler, rho=2)", ok, detail, time.perf_counter() - t0, 1200)


def test_criterion_8_representation(report):
    t0 = time.perf_counter()
    mb = medium_from_dict(DEFAULT_MEDIUM)
    x = np.array([0.0, 0.0, 0.4])
    errs = []
    for res in (16, 32):
        mesh = make_cap_domain(1.0, res)
        U = manufacture_solution(sources_from_list(DEFAULT_SOURCES), mb, mesh)
        errs.append(relative_error(represent_full(x, sample_cauchy_data(U, mesh, None), mb), U(x[None])[0]))
    ok = errs[0] < 1e-3 and errs[0] >= 4 * errs[1]
    detail = f"rel err {errs[0]:.2e} at default resolution, {errs[1]:.2e} doubled"
    assert report("8 representation identity", ok, detail, time.perf_counter() - t0, 300)


def test_criterion_9_invariants(report):
    t0 = time.perf_counter()
    c = medium_from_dict(DEFAULT_MEDIUM).coeffs
    sums = {name: abs(complex(np.sum(getattr(c, name)))) for name in ("alpha", "beta", "gamma_c")}
    scales = {name: max(np.max(np.abs(getattr(c, name))), 1e-300) for name in sums}
    sums_ok = all(sums[n] <= 1e-12 * scales[n] for n in sums)
    grid = [complex(a, b) for a in np.linspace(-5, 5, 11) for b in np.linspace(-5, 5, 11)]
    e1 = max(abs(mittag_leffler(1.0, w) - cmath.exp(w)) / abs(cmath.exp(w)) for w in grid)
    j0 = max(abs(bessel_j0(x) - v) / abs(v) for x, v in J0_SPOT)
    ok = sums_ok and e1 < 1e-10 and j0 < 1e-12
    detail = (
        f"|sum alpha| {sums['alpha']:.1e}, |sum beta| {sums['beta']:.1e}, |sum gamma| {sums['gamma_c']:.3e}"
        f" (1/2pi = {1 / (2 * math.pi):.3e}); E1 {e1:.1e}; J0 {j0:.1e}"
    )
    assert report("9 algebraic invariants", ok, detail, time.perf_counter() - t0, 5)
