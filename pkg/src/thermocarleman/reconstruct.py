"""Boundary-integral reconstruction from Cauchy data.

All formulas share one quadrature: for a kernel K(y, x),

    2 U(x) ~ sum_j w_j [K(y_j, x) g_j - (R~_y K(y_j, x)^T)^T f_j].

With K = Psi(x - y) over the whole boundary this is the classical
representation; with K = Pi(y, x) over S it is the Carleman reconstruction.
``(.)^T`` is a plain transpose; conjugating it breaks the identity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .carleman import DEFAULT_Q, EXPONENTIAL, KernelSpec, QuadratureControls, pi_field, psi_reflected_field
from .errors import InvalidNoiseModel, ParameterViolation, StandoffViolation
from .fundsol import stress_R_tilde
from .geometry import S_TAG, SIGMA_TAG, BoundaryMesh
from .medium import MediumBundle

REL_FLOOR = 1e-14
AUTO = "auto"


@dataclass(frozen=True)
class CauchyData:
    """Values ``f = U`` and stresses ``g = R U`` at the nodes of ``mesh``."""

    mesh: BoundaryMesh
    f: np.ndarray
    g: np.ndarray

    def __post_init__(self):
        n = len(self.mesh)
        for name in ("f", "g"):
            arr = getattr(self, name)
            if arr.shape != (n, self.mesh.dim + 1):
                raise ValueError(f"{name} has shape {arr.shape}, expected {(n, self.mesh.dim + 1)}")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} has non-finite entries")

    def select(self, tag: str) -> CauchyData:
        sel = self.mesh.tags == tag
        return CauchyData(self.mesh.select(tag), self.f[sel], self.g[sel])

    def scaled(self, c: complex) -> CauchyData:
        return CauchyData(self.mesh, c * self.f, c * self.g)


@dataclass(frozen=True)
class ReconConfig:
    kernel: KernelSpec
    tau: float | str = AUTO
    delta: float | None = None
    M: float = 1.0
    eval_points: tuple = ()
    quadrature: QuadratureControls = field(default_factory=lambda: DEFAULT_Q)
    standoff: float = 0.05

    def __post_init__(self):
        if self.delta is not None and not 0 <= self.delta < 1:
            raise ParameterViolation("delta", "noise level must lie in [0, 1)")
        if not self.M > 0:
            raise ParameterViolation("M", "a-priori bound must be positive")
        if self.tau != AUTO and not (isinstance(self.tau, (int, float)) and self.tau > 0):
            raise ParameterViolation("tau", "tau must be positive or 'auto'")


def check_standoff(x, mesh: BoundaryMesh, standoff: float) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if not mesh.contains(x[None, :])[0]:
        raise StandoffViolation(f"{x} is not inside the domain")
    dist = mesh.distance_to_boundary(x)
    if dist < standoff:
        raise StandoffViolation(f"{x} is {dist:.3g} from the boundary (standoff {standoff})")
    return x


def boundary_integral(x, mesh: BoundaryMesh, f: np.ndarray, g: np.ndarray, kernel, mb: MediumBundle) -> np.ndarray:
    """``0.5 * sum w [K g - (R~ K^T)^T f]`` for a kernel callback ``kernel(y, x) -> (K, dK/dy)``."""
    if len(mesh) == 0:
        return np.zeros(mesh.dim + 1, dtype=complex)
    V, Gy = kernel(mesh.nodes, x)
    RQ = stress_R_tilde(np.swapaxes(V, 1, 2), np.swapaxes(Gy, 1, 2), mesh.normals, mb.params)
    integrand = np.einsum("nij,nj->ni", V, g) - np.einsum("nji,nj->ni", RQ, f)
    return 0.5 * np.einsum("n,ni->i", mesh.weights, integrand)


def represent_full(x, data: CauchyData, mb: MediumBundle, standoff: float = 0.05) -> np.ndarray:
    """Classical representation of U(x) from data on the whole boundary."""
    x = check_standoff(x, data.mesh, standoff)
    return boundary_integral(x, data.mesh, data.f, data.g, lambda y, z: psi_reflected_field(y, z, mb), mb)


def resolve_tau(cfg: ReconConfig, mesh: BoundaryMesh) -> float:
    if cfg.tau == AUTO:
        if cfg.delta is None:
            raise ParameterViolation("tau", "automatic tau needs a noise level")
        return choose_tau(cfg, mesh)
    return float(cfg.tau)


def carleman_integral(x, data: CauchyData, mb: MediumBundle, spec: KernelSpec, q: QuadratureControls = DEFAULT_Q) -> np.ndarray:
    """Carleman-kernel boundary integral over the nodes carried by ``data`` (no standoff check)."""
    return boundary_integral(x, data.mesh, data.f, data.g, lambda y, z: pi_field(y, z, mb, spec, q), mb)


def reconstruct_exact(x, data: CauchyData, cfg: ReconConfig, mb: MediumBundle, domain: BoundaryMesh | None = None) -> np.ndarray:
    """U_tau(x) from Cauchy data on S.

    ``domain`` is the full boundary mesh used for the interior/standoff test;
    it defaults to the data mesh when that already carries both parts.
    """
    dom = domain if domain is not None else data.mesh
    x = check_standoff(x, dom, cfg.standoff)
    spec = cfg.kernel.with_tau(resolve_tau(cfg, dom))
    s_data = data.select(S_TAG) if np.any(data.mesh.tags != S_TAG) else data
    return carleman_integral(x, s_data, mb, spec, cfg.quadrature)


def reconstruct_noisy(x, noisy: CauchyData, cfg: ReconConfig, mb: MediumBundle, domain: BoundaryMesh | None = None) -> np.ndarray:
    """U_tau,delta(x): same formula, tau tied to the noise level unless fixed in ``cfg``."""
    if cfg.delta is None:
        raise ParameterViolation("delta", "noisy reconstruction needs a noise level")
    return reconstruct_exact(x, noisy, cfg, mb, domain)


def _log_ratio(M: float, delta: float) -> float:
    if delta <= 0:
        raise InvalidNoiseModel("delta must be positive to choose tau")
    if delta >= M:
        raise InvalidNoiseModel(f"delta={delta} must be smaller than M={M}")
    return max(math.log(M / delta), 0.0)


def height_of(mesh: BoundaryMesh) -> float:
    """x_n^0: the largest height reached by the domain."""
    return float(np.max(mesh.nodes[:, -1]))


def cone_radius_power(mesh: BoundaryMesh, rho: float) -> float:
    """R^rho = max over S of Re (i sqrt(s) + y_n)^rho."""
    s_nodes = mesh.select(S_TAG).nodes
    w = 1j * np.linalg.norm(s_nodes[:, :-1], axis=1) + s_nodes[:, -1]
    return float(np.max((w**rho).real))


def choose_tau(cfg: ReconConfig, mesh: BoundaryMesh, kind: str | None = None) -> float:
    kind = kind or mesh.kind
    L = _log_ratio(cfg.M, cfg.delta if cfg.delta is not None else -1.0)
    if kind == "cap":
        return L / height_of(mesh)
    rho = cfg.kernel.rho_exp if cfg.kernel.rho_exp is not None else mesh.params["rho_exp"]
    tau_rho = mesh.params["tau_rho"]
    r_pow = cone_radius_power(mesh, rho)
    return L / (tau_rho**rho * r_pow)


def stability_exponent(x, mesh: BoundaryMesh, rho: float | None = None) -> float:
    x = np.asarray(x, dtype=float)
    if mesh.kind == "cap":
        return float(x[-1] / height_of(mesh))
    r_pow = cone_radius_power(mesh, rho or mesh.params["rho_exp"])
    return float(x[-1] ** (rho or mesh.params["rho_exp"]) / r_pow)


def stability_bound(x, cfg: ReconConfig, mesh: BoundaryMesh, c_tilde: float = 1.0) -> float:
    """Shape of the conditional-stability ceiling ``C delta^q (ln M/delta)^m``.

    ``C = c_tilde * int r^-n ds`` over the whole boundary.  A diagnostic, not a guarantee.
    """
    x = np.asarray(x, dtype=float)
    if cfg.delta is None:
        raise ParameterViolation("delta", "bound needs a noise level")
    r = np.linalg.norm(mesh.nodes - x[None, :], axis=1)
    C = c_tilde * float(np.sum(mesh.weights * r ** (-mesh.dim)))
    if cfg.delta >= cfg.M:
        return 0.0
    L = max(math.log(cfg.M / cfg.delta), 0.0)
    q = stability_exponent(x, mesh, cfg.kernel.rho_exp)
    m = mesh.dim // 2
    return C * cfg.delta**q * L**m


def relative_error(value: np.ndarray, truth: np.ndarray) -> float:
    value = np.asarray(value)
    truth = np.asarray(truth)
    return float(np.max(np.abs(value - truth)) / max(np.max(np.abs(truth)), REL_FLOOR))


def sigma_remainder(x, data: CauchyData, mb: MediumBundle, spec: KernelSpec, q: QuadratureControls = DEFAULT_Q) -> np.ndarray:
    """Carleman integral over Sigma: the exact gap ``represent_full - reconstruct_exact``."""
    return carleman_integral(x, data.select(SIGMA_TAG), mb, spec, q)


__all__ = [
    "AUTO",
    "CauchyData",
    "ReconConfig",
    "EXPONENTIAL",
    "boundary_integral",
    "carleman_integral",
    "check_standoff",
    "choose_tau",
    "cone_radius_power",
    "height_of",
    "reconstruct_exact",
    "reconstruct_noisy",
    "relative_error",
    "represent_full",
    "resolve_tau",
    "sigma_remainder",
    "stability_bound",
    "stability_exponent",
]
