"""Thermoelastic medium: parameters, wave numbers and coupling coefficients.

The steady-oscillation system for displacement ``u`` and temperature ``v``

    mu Lap u + (lam + mu) grad div u - gamma grad v + rho omega^2 u = 0
    Lap v + (i omega / theta) v + i omega eta div u = 0

has three wave numbers.  The shear one is ``sqrt(rho omega^2 / mu)``; the
other two come from the coupled dilatational/thermal block, whose symbol
determinant is ``(lam + 2 mu) (t - l1^2) (t - l2^2)`` with ``t = |xi|^2``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateRoots, ParameterViolation

__all__ = [
    "MediumParams",
    "WaveNumbers",
    "CouplingCoefficients",
    "make_medium",
    "wave_numbers",
    "verify_wave_numbers",
    "coupling_coefficients",
    "symbol_matrix",
    "MediumBundle",
    "bundle",
]


@dataclass(frozen=True)
class MediumParams:
    lame_lambda: float
    shear_mu: float
    density_rho: float
    frequency_omega: float
    coupling_gamma: float
    coupling_eta: float
    theta: float

    @property
    def decoupled(self) -> bool:
        return self.coupling_gamma == 0.0 and self.coupling_eta == 0.0

    def as_dict(self) -> dict[str, float]:
        return {
            "lambda": self.lame_lambda,
            "mu": self.shear_mu,
            "rho": self.density_rho,
            "omega": self.frequency_omega,
            "gamma": self.coupling_gamma,
            "eta": self.coupling_eta,
            "theta": self.theta,
        }


@dataclass(frozen=True)
class WaveNumbers:
    k1_sq: complex
    k2_sq: complex
    lambda_l: tuple[complex, complex, complex]

    @property
    def lambda_sq(self) -> tuple[complex, complex, complex]:
        return tuple(l * l for l in self.lambda_l)  # type: ignore[return-value]

    @property
    def k_modified(self) -> np.ndarray:
        """Parameters ``k_l = -i lambda_l`` so that ``exp(-k r) = exp(i lambda r)``."""
        return -1j * np.asarray(self.lambda_l, dtype=complex)


@dataclass(frozen=True)
class CouplingCoefficients:
    alpha: np.ndarray
    beta: np.ndarray
    gamma_c: np.ndarray


def make_medium(
    lame_lambda: float,
    shear_mu: float,
    density_rho: float,
    frequency_omega: float,
    coupling_gamma: float,
    coupling_eta: float,
    theta: float,
) -> MediumParams:
    """Validate the seven constants and build a :class:`MediumParams`.

    ``gamma = eta = 0`` is accepted as the decoupled limit; otherwise the
    ratio ``gamma / eta`` must be positive.
    """
    vals = [lame_lambda, shear_mu, density_rho, frequency_omega, coupling_gamma, coupling_eta, theta]
    names = ["lambda", "mu", "rho", "omega", "gamma", "eta", "theta"]
    for name, v in zip(names, vals):
        if not math.isfinite(v):
            raise ParameterViolation(name, "not finite")
    if not shear_mu > 0:
        raise ParameterViolation("mu", "mu > 0 required")
    if not 3 * lame_lambda + 2 * shear_mu > 0:
        raise ParameterViolation("3λ+2μ", "3 lambda + 2 mu > 0 required")
    if not density_rho > 0:
        raise ParameterViolation("rho", "rho > 0 required")
    if not frequency_omega > 0:
        raise ParameterViolation("omega", "omega > 0 required")
    if not theta > 0:
        raise ParameterViolation("theta", "theta > 0 required")
    if not (coupling_gamma == 0.0 and coupling_eta == 0.0):
        if coupling_eta == 0.0 or not coupling_gamma / coupling_eta > 0:
            raise ParameterViolation("gamma/eta", "gamma / eta > 0 required")
    return MediumParams(*(float(v) for v in vals))


def _upper_sqrt(z: complex) -> complex:
    r = cmath.sqrt(z)
    if r.imag < 0 or (r.imag == 0 and r.real < 0):
        r = -r
    return r


def wave_numbers(m: MediumParams) -> WaveNumbers:
    lam2mu = m.lame_lambda + 2 * m.shear_mu
    w = m.frequency_omega
    k1_sq = complex(m.density_rho * w * w / lam2mu)
    k2_sq = 1j * w / m.theta
    k3_sq = complex(m.density_rho * w * w / m.shear_mu)
    b = k1_sq + k2_sq + 1j * w * m.coupling_eta * m.coupling_gamma / lam2mu
    c = k1_sq * k2_sq
    disc = cmath.sqrt(b * b - 4 * c)
    # avoid cancellation in the smaller root
    q = (b + disc) / 2 if abs(b + disc) >= abs(b - disc) else (b - disc) / 2
    r1 = q
    r2 = c / q if q != 0 else (b - q)
    if abs(r1 - r2) < 1e-14 * max(abs(r1), abs(r2)):
        raise DegenerateRoots(f"coupled roots coincide: {r1!r} ~ {r2!r}")
    r1, r2 = sorted((r1, r2), key=lambda z: (z.real, z.imag))
    lams = (_upper_sqrt(r1), _upper_sqrt(r2), _upper_sqrt(k3_sq))
    return WaveNumbers(k1_sq=k1_sq, k2_sq=k2_sq, lambda_l=lams)


def symbol_matrix(m: MediumParams, wavevec: np.ndarray) -> np.ndarray:
    """Symbol of B for a plane wave ``exp(i p . x)``: each d/dx_j becomes ``i p_j``."""
    p = np.asarray(wavevec, dtype=complex)
    n = p.shape[0]
    pp = p @ p
    B = np.zeros((n + 1, n + 1), dtype=complex)
    B[:n, :n] = (
        np.eye(n) * (-m.shear_mu * pp + m.density_rho * m.frequency_omega**2)
        - (m.lame_lambda + m.shear_mu) * np.outer(p, p)
    )
    B[:n, n] = -m.coupling_gamma * 1j * p
    B[n, :n] = 1j * m.frequency_omega * m.coupling_eta * 1j * p
    B[n, n] = -pp + 1j * m.frequency_omega / m.theta
    return B


def verify_wave_numbers(m: MediumParams, w: WaveNumbers, n: int = 3, ndirs: int = 7) -> float:
    """Largest relative smallest-singular-value of B(i lambda_l xi) over l and directions."""
    rng = np.random.default_rng(12345)
    dirs = rng.normal(size=(ndirs, n))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    worst = 0.0
    for lam in w.lambda_l:
        for xi in dirs:
            s = np.linalg.svd(symbol_matrix(m, lam * xi), compute_uv=False)
            worst = max(worst, s[-1] / s[0])
    return float(worst)


def coupling_coefficients(m: MediumParams, w: WaveNumbers) -> CouplingCoefficients:
    l1, l2, _ = w.lambda_sq
    diff = l2 - l1
    if abs(diff) < 1e-14 * max(abs(l1), abs(l2)):
        raise DegenerateRoots("lambda_2^2 - lambda_1^2 vanishes")
    lam2mu = m.lame_lambda + 2 * m.shear_mu
    rw2 = m.density_rho * m.frequency_omega**2
    alpha = np.zeros(3, dtype=complex)
    beta = np.zeros(3, dtype=complex)
    gam = np.zeros(3, dtype=complex)
    for idx, lsq in enumerate((l1, l2)):
        sgn = (-1) ** (idx + 1)
        alpha[idx] = sgn * (1 - w.k2_sq / lsq) / (2 * math.pi * lam2mu * diff)
        beta[idx] = sgn / (2 * math.pi * lam2mu * diff)
        gam[idx] = sgn * (lsq - w.k1_sq) / (2 * math.pi * diff)
    alpha[2] = -1.0 / (2 * math.pi * rw2)
    return CouplingCoefficients(alpha=alpha, beta=beta, gamma_c=gam)


@dataclass(frozen=True)
class MediumBundle:
    """Everything the kernels need about the medium, derived once."""

    params: MediumParams
    waves: WaveNumbers
    coeffs: CouplingCoefficients


def bundle(m: MediumParams) -> MediumBundle:
    w = wave_numbers(m)
    return MediumBundle(m, w, coupling_coefficients(m, w))
