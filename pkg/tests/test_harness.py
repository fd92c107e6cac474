import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thermocarleman import cli
from thermocarleman.errors import DegenerateFit, SourceInsideDomain
from thermocarleman.fundsol import StressContext, apply_B_fd, apply_stress_R
from thermocarleman.geometry import S_TAG, make_cap_domain
from thermocarleman.harness import (
    DEFAULT_MEDIUM,
    DEFAULT_SOURCES,
    Source,
    StudySpec,
    add_noise,
    fit_rate,
    manufacture_solution,
    medium_from_dict,
    monotone_violations,
    noise_norm,
    read_cauchy_csv,
    run_study,
    sample_cauchy_data,
    sources_from_list,
    verify_kernel,
    write_cauchy_csv,
)


@pytest.fixture(scope="module")
def mbd():
    return medium_from_dict(DEFAULT_MEDIUM)


@pytest.fixture(scope="module")
def mesh():
    return make_cap_domain(1.0, 8)


@pytest.fixture(scope="module")
def U(mbd, mesh):
    return manufacture_solution(sources_from_list(DEFAULT_SOURCES), mbd, mesh)


def test_source_on_axis_gives_finite_field(mbd, mesh):
    V = manufacture_solution([Source([0, 0, 1.6], [1, 0, 0, 0])], mbd, mesh)(mesh.nodes)
    assert np.all(np.isfinite(V))


def test_manufactured_field_solves_system(U, mbd, rng):
    for _ in range(10):
        x = rng.uniform([-0.4, -0.4, 0.2], [0.4, 0.4, 0.7])
        res = apply_B_fd(lambda p: U(p[None])[0], x, mbd.params, 1e-3)
        assert np.abs(res).max() < 1e-5 * np.abs(U(x[None])[0]).max()


def test_superposition(mbd, mesh):
    a = Source(np.array([0.2, 0.1, -0.6]), np.array([1, 0.5j, -0.3, 0.8]))
    b = Source(np.array([0.0, 1.5, 0.5]), np.array([0, 1, 2j, 0.1]))
    y = mesh.nodes[:20]
    both = manufacture_solution([a, b], mbd)(y)
    assert np.allclose(both, manufacture_solution([a], mbd)(y) + manufacture_solution([b], mbd)(y), rtol=1e-15, atol=0)


def test_source_inside_rejected(mbd, mesh):
    with pytest.raises(SourceInsideDomain):
        manufacture_solution([Source([0, 0, 0.5], [1, 0, 0, 0])], mbd, mesh)
    with pytest.raises(SourceInsideDomain):
        manufacture_solution([Source([0, 0, -0.05], [1, 0, 0, 0])], mbd, mesh)


def test_sampling_is_deterministic_and_stress_matches_fd(U, mesh, mbd, rng):
    d1 = sample_cauchy_data(U, mesh)
    d2 = sample_cauchy_data(U, mesh)
    assert np.array_equal(d1.f, d2.f) and np.array_equal(d1.g, d2.g)
    for i in rng.choice(len(d1.mesh), 5, replace=False):
        ctx = StressContext(d1.mesh.nodes[i], d1.mesh.normals[i], mbd.params)
        fd = apply_stress_R(lambda p: U(p[None])[0], ctx)
        assert np.allclose(d1.g[i], fd, rtol=1e-6)


def test_zero_field_zero_data(mbd, mesh):
    Z = manufacture_solution([Source([0, 0, -0.6], [0, 0, 0, 0])], mbd)
    d = sample_cauchy_data(Z, mesh)
    assert not d.f.any() and not d.g.any()


@settings(max_examples=20, deadline=None)
@given(st.floats(1e-8, 0.99), st.integers(0, 2**31))
def test_noise_norm_is_certified(delta, seed):
    mbd = medium_from_dict(DEFAULT_MEDIUM)
    mesh = make_cap_domain(1.0, 4)
    d = sample_cauchy_data(manufacture_solution(sources_from_list(DEFAULT_SOURCES), mbd), mesh)
    noisy = add_noise(d, delta, seed)
    assert noise_norm(d, noisy) <= delta
    assert noise_norm(d, noisy) == pytest.approx(delta * (1 - 1e-9), rel=1e-12)


def test_noise_seeds(U, mesh):
    d = sample_cauchy_data(U, mesh)
    assert add_noise(d, 0.0, 1) is d
    a, b, c = add_noise(d, 0.1, 1), add_noise(d, 0.1, 1), add_noise(d, 0.1, 2)
    assert np.array_equal(a.f, b.f)
    assert not np.array_equal(a.f, c.f)
    assert noise_norm(d, a) == pytest.approx(noise_norm(d, c), rel=1e-14)


def test_fit_rate_synthetic():
    taus = np.array([5.0, 10, 20, 40])
    assert fit_rate(taus, np.exp(-2 * taus)).slope == pytest.approx(-2.0, rel=1e-12)
    deltas = np.array([1e-1, 1e-2, 1e-3, 1e-4])
    assert fit_rate(deltas, deltas**0.8, log_x=True).slope == pytest.approx(0.8, rel=1e-12)
    assert fit_rate(taus, taus * np.exp(-0.4 * taus), tau_power=1).slope == pytest.approx(-0.4, rel=1e-12)
    with pytest.raises(DegenerateFit):
        fit_rate(taus, np.full(4, 1e-3))
    with pytest.raises(DegenerateFit) as exc:
        fit_rate(taus, np.exp(-taus), excluded=[1, 2])
    assert exc.value.excluded == [1, 2]


def test_monotone_violations():
    assert monotone_violations([4, 3, 2, 1]) == 0
    assert monotone_violations([4, 5, 2, 3]) == 2


STUDY = {
    "domain": {"kind": "cap", "radius": 1.0, "resolution": 12},
    "medium": DEFAULT_MEDIUM,
    "sources": DEFAULT_SOURCES,
    "sweep": {"taus": [3.0, 5.0, 7.0]},
    "eval_points": [[0.0, 0.0, 0.4]],
    "seed": 7,
}


def test_run_study_writes_deterministic_reports(tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    r1 = run_study(StudySpec.from_dict({**STUDY, "out": str(out1)}))
    run_study(StudySpec.from_dict({**STUDY, "out": str(out2)}))
    assert r1.complete
    assert (out1 / "report.csv").read_bytes() == (out2 / "report.csv").read_bytes()
    assert (out1 / "summary.json").read_bytes() == (out2 / "summary.json").read_bytes()
    head = (out1 / "report.csv").read_text().splitlines()[0]
    assert head == "point_id,x1,x2,x3,tau,delta,err_abs,err_rel,excluded"
    summary = json.loads((out1 / "summary.json").read_text())
    assert "point0" in summary["fits"]
    assert all(r["err_abs"] >= 0 and r["err_rel"] >= 0 for r in r1.rows)


def test_run_study_delta_sweep_uses_auto_tau():
    spec = StudySpec.from_dict({**STUDY, "sweep": {"deltas": [1e-1, 1e-2, 1e-3]}})
    rep = run_study(spec)
    taus = [r["tau"] for r in rep.rows]
    assert taus[0] < taus[1] < taus[2]
    assert taus[1] - taus[0] == pytest.approx(math.log(10) / max(make_cap_domain(1.0, 12).nodes[:, 2]))


def test_run_study_flags_failures():
    bad = {**STUDY, "eval_points": [[0.0, 0.0, 0.01]]}
    rep = run_study(StudySpec.from_dict(bad))
    assert not rep.complete and "Standoff" in rep.message and not rep.passed


def test_study_spec_needs_one_sweep():
    with pytest.raises(ValueError):
        StudySpec.from_dict({**STUDY, "sweep": {}})


def test_cauchy_csv_roundtrip(U, mesh, tmp_path):
    d = sample_cauchy_data(U, mesh)
    write_cauchy_csv(d, tmp_path / "d.csv")
    back = read_cauchy_csv(tmp_path / "d.csv", mesh.select(S_TAG))
    assert np.array_equal(back.f, d.f) and np.array_equal(back.g, d.g)


def test_verify_kernel_passes():
    assert all(c.passed for c in verify_kernel(6, 1))


def test_cli_sample_then_reconstruct(tmp_path, capsys):
    assert cli.main(["sample", "--out", str(tmp_path)]) == 0
    rc = cli.main(
        ["reconstruct", "--mesh", str(tmp_path / "mesh.csv"), "--data", str(tmp_path / "data.csv"), "--point", "0", "0", "0.4", "--tau", "6"]
    )
    out = capsys.readouterr().out
    assert rc == 0 and out.count("U") >= 4


def test_cli_verify_kernel(capsys):
    assert cli.main(["verify", "kernel", "--points", "4"]) == 0
    assert "PASS" in capsys.readouterr().out


def test_cli_study(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps(STUDY))
    cli.main(["study", "--config", str(cfg), "--out", str(tmp_path / "o")])
    assert (tmp_path / "o" / "report.csv").exists()


def test_cli_reports_library_errors(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({**STUDY, "sources": [{"point": [0, 0, 0.5], "weights": [1, 0, 0, 0]}]}))
    assert cli.main(["sample", "--config", str(cfg), "--out", str(tmp_path)]) == 2
    assert "SourceInsideDomain" in capsys.readouterr().err
