"""Manufactured solutions, Cauchy data, noise, rate fits and sweep studies."""

from __future__ import annotations

import csv
import functools
import json
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .carleman import DEFAULT_Q, EXPONENTIAL, MITTAG_LEFFLER, KernelSpec, QuadratureControls, pi_field
from .errors import DegenerateFit, ParameterViolation, SourceInsideDomain, ThermoCarlemanError
from .fundsol import psi_field, stress_R, stress_R_tilde
from .geometry import S_TAG, SIGMA_TAG, BoundaryMesh, ConeSpec, make_cap_domain, make_cone_domain
from .medium import MediumBundle, bundle, make_medium
from .reconstruct import (
    AUTO,
    CauchyData,
    ReconConfig,
    choose_tau,
    height_of,
    reconstruct_exact,
    relative_error,
    represent_full,
    stability_exponent,
)

EPS = np.finfo(float).eps


# ------------------------------------------------------ manufactured fields


@dataclass(frozen=True)
class Source:
    point: np.ndarray
    weights: np.ndarray  # combination of the n+1 columns of Psi


@dataclass(frozen=True)
class ManufacturedSolution:
    """``U(y) = sum_j Psi(y - x_j) c_j`` with every ``x_j`` outside the domain."""

    sources: tuple
    mb: MediumBundle

    def value_and_gradient(self, y: np.ndarray):
        y = np.atleast_2d(np.asarray(y, dtype=float))
        n = y.shape[1]
        val = np.zeros((len(y), n + 1), dtype=complex)
        grad = np.zeros((len(y), n + 1, n), dtype=complex)
        for src in self.sources:
            V, G = psi_field(y - src.point[None, :], self.mb, grad=True)
            val += V @ src.weights
            grad += np.einsum("nijk,j->nik", G, src.weights)
        return val, grad

    def __call__(self, y) -> np.ndarray:
        return self.value_and_gradient(y)[0]

    def stress(self, y, normals) -> np.ndarray:
        """Closed-form ``R(d_y, nu) U`` at the given nodes."""
        val, grad = self.value_and_gradient(y)
        return stress_R(val[:, :, None], grad[:, :, None, :], np.atleast_2d(normals), self.mb.params)[:, :, 0]


def manufacture_solution(sources: Sequence[Source], mb: MediumBundle, domain: BoundaryMesh | None = None) -> ManufacturedSolution:
    srcs = tuple(Source(np.asarray(s.point, dtype=float), np.asarray(s.weights, dtype=complex)) for s in sources)
    if not srcs:
        raise ParameterViolation("sources", "at least one source is required")
    if domain is not None:
        scale = domain.params.get("radius", 1.0)
        for s in srcs:
            gap = float(np.min(np.linalg.norm(domain.nodes - s.point[None, :], axis=1)))
            if domain.contains(s.point[None, :])[0] or gap < 0.1 * scale:
                raise SourceInsideDomain(f"source {s.point} is inside or within 0.1 of the domain")
    return ManufacturedSolution(srcs, mb)


def sample_cauchy_data(U: ManufacturedSolution, mesh: BoundaryMesh, tag: str | None = S_TAG) -> CauchyData:
    sub = mesh.select(tag)
    return CauchyData(sub, U(sub.nodes), U.stress(sub.nodes, sub.normals))


def noise_norm(a: CauchyData, b: CauchyData) -> float:
    """``max |f_a - f_b| + max |g_a - g_b|`` with the Euclidean norm at each node."""
    df = np.linalg.norm(a.f - b.f, axis=1)
    dg = np.linalg.norm(a.g - b.g, axis=1)
    return float(df.max(initial=0.0) + dg.max(initial=0.0))


def add_noise(data: CauchyData, delta: float, seed: int) -> CauchyData:
    """Uniform complex perturbations whose noise norm is exactly ``delta (1 - 1e-9)``."""
    if not 0 <= delta < 1:
        raise ParameterViolation("delta", "noise level must lie in [0, 1)")
    if delta == 0:
        return data
    rng = np.random.default_rng(seed)
    shape = data.f.shape
    pf = rng.uniform(-1, 1, shape) + 1j * rng.uniform(-1, 1, shape)
    pg = rng.uniform(-1, 1, shape) + 1j * rng.uniform(-1, 1, shape)
    half = 0.5 * delta * (1 - 1e-9)
    pf *= half / np.linalg.norm(pf, axis=1).max()
    pg *= half / np.linalg.norm(pg, axis=1).max()
    return CauchyData(data.mesh, data.f + pf, data.g + pg)


# ------------------------------------------------------------------ fitting


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    r2: float
    slope_stderr: float
    used: tuple
    excluded: tuple


def fit_rate(xs, errors, log_x: bool = False, tau_power: float = 0.0, excluded: Sequence[int] = ()) -> FitResult:
    """Least squares of ``ln(err / x^tau_power)`` against ``x`` (or ``ln x`` when ``log_x``).

    ``excluded`` lists rows known to sit on the quadrature floor.
    """
    xs = np.asarray(xs, dtype=float)
    errors = np.asarray(errors, dtype=float)
    excl = set(int(i) for i in excluded)
    excl |= {i for i, e in enumerate(errors) if not (e > 0 and math.isfinite(e))}
    used = [i for i in range(len(xs)) if i not in excl]
    if len(used) < 3:
        raise DegenerateFit(f"{len(used)} usable rows; need at least 3", sorted(excl))
    x = xs[used]
    yv = np.log(errors[used]) - tau_power * np.log(x)
    if log_x:
        x = np.log(x)
    if np.ptp(yv) < 1e-12 or np.ptp(x) == 0:
        raise DegenerateFit("errors do not vary across the sweep", sorted(excl))
    A = np.stack([x, np.ones_like(x)], axis=1)
    coef, *_ = np.linalg.lstsq(A, yv, rcond=None)
    resid = yv - A @ coef
    ss_tot = float(np.sum((yv - yv.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot
    dof = len(x) - 2
    stderr = math.sqrt(float(np.sum(resid**2)) / dof / np.sum((x - x.mean()) ** 2)) if dof > 0 else math.nan
    return FitResult(float(coef[0]), float(coef[1]), r2, stderr, tuple(used), tuple(sorted(excl)))


def monotone_violations(values: Sequence[float]) -> int:
    return sum(1 for a, b in zip(values[:-1], values[1:]) if b >= a)


# ------------------------------------------------------------ Carleman decay


def carleman_epsilon(x, sigma_mesh: BoundaryMesh, mb: MediumBundle, spec: KernelSpec, q: QuadratureControls = DEFAULT_Q) -> float:
    """``int_Sigma (|Pi| + |R~ Pi|) ds`` with Frobenius norms."""
    sub = sigma_mesh.select(SIGMA_TAG)
    V, Gy = pi_field(sub.nodes, np.asarray(x, dtype=float), mb, spec, q)
    RQ = stress_R_tilde(np.swapaxes(V, 1, 2), np.swapaxes(Gy, 1, 2), sub.normals, mb.params)
    dens = np.linalg.norm(V, axis=(1, 2)) + np.linalg.norm(RQ, axis=(1, 2))
    return float(np.sum(sub.weights * dens))


# ------------------------------------------------------------------- studies


@dataclass
class StudySpec:
    domain: dict
    medium: dict
    sources: list
    eval_points: list
    taus: list | None = None
    deltas: list | None = None
    M: float | str = "data"
    quadrature: dict = field(default_factory=dict)
    seed: int = 0
    out: str | None = None
    slope_tol: float | None = None

    @classmethod
    def from_dict(cls, d: dict) -> StudySpec:
        sweep = d.get("sweep", {})
        return cls(
            domain=d["domain"],
            medium=d["medium"],
            sources=d["sources"],
            eval_points=d["eval_points"],
            taus=sweep.get("taus"),
            deltas=sweep.get("deltas"),
            M=sweep.get("M", "data"),
            quadrature=d.get("quadrature", {}),
            seed=int(d.get("seed", 0)),
            out=d.get("out"),
            slope_tol=sweep.get("slope_tol"),
        )

    @classmethod
    def from_json(cls, path: str | Path) -> StudySpec:
        return cls.from_dict(json.loads(Path(path).read_text()))

    def __post_init__(self):
        if (self.taus is None) == (self.deltas is None):
            raise ParameterViolation("sweep", "give exactly one of taus or deltas")


MEDIUM_KEYS = ("lambda", "mu", "rho", "omega", "gamma", "eta", "theta")


def medium_from_dict(d: dict) -> MediumBundle:
    return bundle(make_medium(*(float(d[k]) for k in MEDIUM_KEYS)))


def domain_from_dict(d: dict) -> BoundaryMesh:
    res = int(d.get("resolution", 16))
    if d.get("kind", "cap") == "cap":
        return make_cap_domain(float(d.get("radius", 1.0)), res, int(d.get("n", 3)))
    return make_cone_domain(ConeSpec(float(d.get("rho_exp", 2.0)), float(d.get("radius", 1.0))), res)


def kernel_for(mesh: BoundaryMesh, tau: float = 1.0) -> KernelSpec:
    if mesh.kind == "cap":
        return KernelSpec(EXPONENTIAL, tau, mesh.dim)
    return KernelSpec(MITTAG_LEFFLER, tau, mesh.dim, mesh.params["rho_exp"])


def sources_from_list(items: list) -> list[Source]:
    out = []
    for it in items:
        w = [complex(*v) if isinstance(v, (list, tuple)) else complex(v) for v in it["weights"]]
        out.append(Source(np.asarray(it["point"], dtype=float), np.asarray(w)))
    return out


@dataclass
class StudyReport:
    rows: list = field(default_factory=list)
    fits: dict = field(default_factory=dict)
    gates: dict = field(default_factory=dict)
    complete: bool = True
    message: str = ""

    @property
    def passed(self) -> bool:
        return self.complete and all(self.gates.values())

    def write(self, outdir: str | Path) -> None:
        outdir = Path(outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        n = len(self.rows[0]["x"]) if self.rows else 3
        cols = ["point_id"] + [f"x{i+1}" for i in range(n)] + ["tau", "delta", "err_abs", "err_rel", "excluded"]
        with open(outdir / "report.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(cols)
            for r in self.rows:
                w.writerow(
                    [r["point_id"]]
                    + [repr(v) for v in r["x"]]
                    + [repr(r["tau"]), "" if r["delta"] is None else repr(r["delta"]), repr(r["err_abs"]), repr(r["err_rel"]), int(r["excluded"])]
                )
        summary = {"complete": self.complete, "passed": self.passed, "message": self.message, "fits": self.fits, "gates": self.gates}
        (outdir / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True))


def quadrature_floor(x, mesh: BoundaryMesh, data_full: CauchyData, U: ManufacturedSolution, mb: MediumBundle, tau: float, kernel: KernelSpec) -> float:
    """Relative error below which a reconstruction cannot be trusted.

    The classical formula's self-error, and round-off amplified by the
    kernel's growth on S relative to its size at x.
    """
    self_err = relative_error(represent_full(x, data_full, mb, 0.0), U(np.asarray(x)[None, :])[0])
    if kernel.kind == EXPONENTIAL:
        growth = tau * (height_of(mesh) - x[-1])
    else:
        rho = kernel.rho_exp
        s_nodes = mesh.select(S_TAG).nodes
        w = 1j * np.linalg.norm(s_nodes[:, :-1], axis=1) + s_nodes[:, -1]
        growth = tau * (float(np.max((w**rho).real)) - x[-1] ** rho)
    return 10.0 * max(self_err, 100 * EPS * math.exp(growth))


def run_study(spec: StudySpec, progress=None) -> StudyReport:
    report = StudyReport()
    mb = medium_from_dict(spec.medium)
    mesh = domain_from_dict(spec.domain)
    q = QuadratureControls(**spec.quadrature) if spec.quadrature else DEFAULT_Q
    U = manufacture_solution(sources_from_list(spec.sources), mb, mesh)
    data_full = sample_cauchy_data(U, mesh, None)
    data_s = data_full.select(S_TAG)
    base = kernel_for(mesh)
    M = (
        float(np.linalg.norm(data_s.f, axis=1).max() + np.linalg.norm(data_s.g, axis=1).max())
        if spec.M == "data"
        else float(spec.M)
    )
    sweep = spec.taus if spec.taus is not None else spec.deltas
    try:
        for pid, xp in enumerate(spec.eval_points):
            x = np.asarray(xp, dtype=float)
            truth = U(x[None, :])[0]
            errs, taus, excl = [], [], []
            for j, v in enumerate(sweep):
                t0 = time.perf_counter()
                if spec.taus is not None:
                    cfg = ReconConfig(base, float(v), None, M, quadrature=q)
                    data, delta = data_s, None
                else:
                    delta = float(v)
                    cfg = ReconConfig(base, choose_tau(ReconConfig(base, AUTO, delta, M), mesh), delta, M, quadrature=q)
                    data = add_noise(data_s, delta, spec.seed + j)
                tau = float(cfg.tau)
                val = reconstruct_exact(x, data, cfg, mb, mesh)
                err_abs = float(np.max(np.abs(val - truth)))
                err_rel = relative_error(val, truth)
                floor = quadrature_floor(x, mesh, data_full, U, mb, tau, base.with_tau(tau))
                is_excl = err_rel < floor
                errs.append(err_rel)
                taus.append(tau)
                if is_excl:
                    excl.append(j)
                report.rows.append(
                    {
                        "point_id": pid,
                        "x": [float(c) for c in x],
                        "tau": tau,
                        "delta": delta,
                        "err_abs": err_abs,
                        "err_rel": err_rel,
                        "excluded": bool(is_excl),
                        "wall_time": time.perf_counter() - t0,
                    }
                )
                if progress:
                    progress(report.rows[-1])
            _fit_point(report, spec, mesh, base, pid, x, sweep, errs, excl)
    except ThermoCarlemanError as exc:
        report.complete = False
        report.message = f"{type(exc).__name__}: {exc}"
    if spec.out:
        report.write(spec.out)
    return report


def _fit_point(report: StudyReport, spec: StudySpec, mesh, base: KernelSpec, pid: int, x, sweep, errs, excl) -> None:
    key = f"point{pid}"
    try:
        if spec.taus is not None:
            fit = fit_rate(sweep, errs, excluded=excl)
            target = -float(x[-1]) if mesh.kind == "cap" else None
            tol = spec.slope_tol if spec.slope_tol is not None else 0.15
        else:
            fit = fit_rate(sweep, errs, log_x=True, excluded=excl)
            target = stability_exponent(x, mesh, base.rho_exp)
            tol = spec.slope_tol if spec.slope_tol is not None else 0.25
    except DegenerateFit as exc:
        report.fits[key] = {"error": str(exc), "excluded": exc.excluded}
        report.gates[key] = False
        return
    entry = asdict(fit)
    entry["target"] = target
    entry["tolerance"] = tol
    report.fits[key] = entry
    if target is None:
        report.gates[key] = fit.slope < 0
    else:
        report.gates[key] = abs(fit.slope - target) <= tol * abs(target)


# ------------------------------------------------------------------ CSV I/O


def write_cauchy_csv(data: CauchyData, path: str | Path) -> None:
    k = data.f.shape[1]
    cols = ["node_id"]
    for name in ("f", "g"):
        for i in range(k):
            cols += [f"{name}{i+1}_re", f"{name}{i+1}_im"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for nid, (fv, gv) in enumerate(zip(data.f, data.g)):
            row = [nid]
            for v in list(fv) + list(gv):
                row += [repr(float(v.real)), repr(float(v.imag))]
            w.writerow(row)


def read_cauchy_csv(path: str | Path, mesh: BoundaryMesh) -> CauchyData:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    body = np.array([[float(v) for v in r[1:]] for r in rows[1:]])
    ids = np.array([int(r[0]) for r in rows[1:]])
    k = body.shape[1] // 4
    cplx = body[:, 0::2] + 1j * body[:, 1::2]
    order = np.argsort(ids)
    cplx = cplx[order]
    if len(cplx) != len(mesh):
        raise ValueError(f"data has {len(cplx)} rows but the mesh has {len(mesh)} nodes")
    return CauchyData(mesh, cplx[:, :k], cplx[:, k:])


# ------------------------------------------------------------- verification

DEFAULT_MEDIUM = {"lambda": 1.3, "mu": 0.9, "rho": 1.1, "omega": 1.2, "gamma": 0.7, "eta": 0.5, "theta": 0.8}
DEFAULT_SOURCES = [{"point": [0.2, 0.1, -0.6], "weights": [1.0, [0.0, 0.5], -0.3, 0.8]}]


def random_medium(rng: np.random.Generator) -> MediumBundle:
    lam_mu = rng.uniform(0.5, 3.0), rng.uniform(0.5, 2.0)
    rest = rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0), rng.uniform(0.1, 1.0), rng.uniform(0.1, 1.0), rng.uniform(0.5, 2.0)
    return bundle(make_medium(*lam_mu, *rest))


def verify_fundamental(n_media: int = 5, n_points: int = 20, seed: int = 0, h: float = 1e-3) -> float:
    """Largest finite-difference residual of B applied to the columns of Psi.

    The residual of each column is divided by the column's size at the point.
    """
    from .fundsol import apply_B_fd, psi

    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_media):
        mb = random_medium(rng)
        for _ in range(n_points):
            d = rng.normal(size=3)
            x = d / np.linalg.norm(d) * rng.uniform(0.3, 1.5)
            cached = functools.lru_cache(maxsize=None)(lambda key: psi(np.array(key), mb))
            for j in range(4):
                col = lambda p, j=j: cached(tuple(p))[:, j]  # noqa: E731
                res = apply_B_fd(col, x, mb.params, h)
                worst = max(worst, float(np.abs(res).max() / np.abs(col(x)).max()))
    return worst


@dataclass
class KernelCheck:
    name: str
    worst: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.worst < self.tolerance


def verify_kernel(n_pairs: int = 20, seed: int = 0) -> list[KernelCheck]:
    """u-integral oracles against closed forms."""
    from .carleman import KERNEL_NORMALIZATION, cap_dtau_raw_integral, cap_raw_integral, phi_cap_dtau
    from .specfun import bessel_j0

    rng = np.random.default_rng(seed)
    worst0 = 0.0
    for _ in range(n_pairs):
        r, k = rng.uniform(0.2, 2.0), rng.uniform(0.2, 3.0)
        d = rng.normal(size=3)
        d *= r / np.linalg.norm(d)
        got = cap_raw_integral(d, np.zeros(3), k, 0.0)
        want = -math.pi / (2 * r) * math.exp(-k * r)
        worst0 = max(worst0, abs(got - want) / abs(want))
    worst_hi, worst_lo = 0.0, 0.0
    for _ in range(n_pairs // 2):
        s = rng.uniform(0.05, 1.5)
        y = np.array([math.sqrt(s), 0.0, rng.uniform(-0.5, 0.5)])
        k = rng.uniform(0.3, 2.0)
        for ratio in (0.5, 2.0, 5.0):
            tau = ratio * k
            quad = cap_dtau_raw_integral(y, np.zeros(3), k, tau)
            if tau > k:
                closed = 0.5 * math.pi * bessel_j0(math.sqrt(s * (tau * tau - k * k)))
                spec = KernelSpec(EXPONENTIAL, tau)
                via_op = phi_cap_dtau(y, np.zeros(3), k, spec) * KERNEL_NORMALIZATION[3] * math.exp(-tau * y[-1])
                worst_hi = max(worst_hi, abs(quad - closed) / abs(closed), abs(via_op - closed) / abs(closed))
            else:
                worst_lo = max(worst_lo, abs(quad))
    return [
        KernelCheck("tau->0 limit vs closed form", worst0, 1e-6),
        KernelCheck("tau-derivative, tau > k", worst_hi, 1e-4),
        KernelCheck("tau-derivative, tau < k (absolute)", worst_lo, 1e-6),
    ]


def verify_carleman(x, taus=(5.0, 10.0, 20.0, 40.0), resolution: int = 48, medium: dict | None = None, tau_power: float = 1.0):
    """Carleman decay on the flat part of the unit cap: epsilon(tau) and its fitted slope."""
    mb = medium_from_dict(medium or DEFAULT_MEDIUM)
    mesh = make_cap_domain(1.0, resolution).select(SIGMA_TAG)
    eps = [carleman_epsilon(x, mesh, mb, KernelSpec(EXPONENTIAL, float(t))) for t in taus]
    fit = fit_rate(taus, eps, tau_power=tau_power)
    return eps, fit
