"""Fundamental matrix of the thermoelastic system and boundary stress operators.

Matrix fields are handled through *jets*: a scalar function together with its
Cartesian derivatives up to third order in ``y``, evaluated at a batch of
points.  The fundamental matrix and the Carleman matrix are the same linear
differential combination of three scalar jets, one per wave number, so both
are assembled by :func:`assemble`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DifferentiationFailure, SingularPoint
from .medium import MediumBundle, MediumParams
from .specfun import HELMHOLTZ_NORM


@dataclass
class Jet:
    """Values and y-derivatives (orders 0..3) of a scalar field at N points."""

    d0: np.ndarray  # (N,)
    d1: np.ndarray  # (N, n)
    d2: np.ndarray  # (N, n, n)
    d3: np.ndarray  # (N, n, n, n)

    def __add__(self, other: Jet) -> Jet:
        return Jet(self.d0 + other.d0, self.d1 + other.d1, self.d2 + other.d2, self.d3 + other.d3)

    def __sub__(self, other: Jet) -> Jet:
        return Jet(self.d0 - other.d0, self.d1 - other.d1, self.d2 - other.d2, self.d3 - other.d3)

    def scale(self, c) -> Jet:
        c = np.asarray(c)
        return Jet(self.d0 * c, self.d1 * c[..., None], self.d2 * c[..., None, None], self.d3 * c[..., None, None, None])


def radial_jet(d: np.ndarray, f0, f1, f2, f3) -> Jet:
    """Jet of ``f(|d|)`` from radial derivatives ``f0..f3`` (arrays of shape (N,))."""
    r = np.linalg.norm(d, axis=-1)
    n = d.shape[-1]
    e = d / r[:, None]
    eye = np.eye(n)
    a = f2 - f1 / r
    ap = f3 - f2 / r + f1 / r**2
    d1 = f1[:, None] * e
    ee = e[:, :, None] * e[:, None, :]
    d2 = a[:, None, None] * ee + (f1 / r)[:, None, None] * eye
    eee = ee[:, :, :, None] * e[:, None, None, :]
    sym = (
        eye[None, :, :, None] * e[:, None, None, :]
        + eye[None, :, None, :] * e[:, None, :, None]
        + eye[None, None, :, :] * e[:, :, None, None]
    )
    d3 = (ap - 2 * a / r)[:, None, None, None] * eee + (a / r)[:, None, None, None] * sym
    return Jet(f0, d1, d2, d3)


def yukawa_jet(d: np.ndarray, k: complex) -> Jet:
    """Jet of ``exp(-k r) / r`` (times the module normalisation), ``r = |d|``."""
    r = np.linalg.norm(d, axis=-1)
    if np.any(r == 0):
        raise SingularPoint("kernel evaluated at its pole")
    kr = k * r
    ex = np.exp(-kr) * HELMHOLTZ_NORM
    f0 = ex / r
    f1 = -ex * (kr + 1) / r**2
    f2 = ex * (kr**2 + 2 * kr + 2) / r**3
    f3 = -ex * (kr**3 + 3 * kr**2 + 6 * kr + 6) / r**4
    return radial_jet(d, f0, f1, f2, f3)


def assemble(jets: list[Jet], mb: MediumBundle, odd_sign: float, grad: bool = True):
    """Combine per-wave-number jets into an (n+1)x(n+1) matrix field.

    ``odd_sign`` is the sign carried by odd-order derivatives: the matrix is
    a differential expression in ``z`` and ``d/dz = odd_sign * d/dy``.
    Returns ``(value, gradient)`` with shapes (N, n+1, n+1) and
    (N, n+1, n+1, n); the gradient is with respect to ``y``.
    """
    m = mb.params
    al, be, ga = mb.coeffs.alpha, mb.coeffs.beta, mb.coeffs.gamma_c
    N, n = jets[0].d1.shape
    s = odd_sign
    V = np.zeros((N, n + 1, n + 1), dtype=complex)
    G = np.zeros((N, n + 1, n + 1, n), dtype=complex) if grad else None
    eye = np.eye(n)
    shear = 1.0 / (2 * math.pi * m.shear_mu)
    ie = 1j * m.frequency_omega * m.coupling_eta
    for l, J in enumerate(jets):
        # displacement block
        V[:, :n, :n] -= al[l] * J.d2
        V[:, :n, n] += -m.coupling_gamma * be[l] * s * J.d1
        V[:, n, :n] += ie * be[l] * s * J.d1
        V[:, n, n] += ga[l] * J.d0
        if l == 2:
            V[:, :n, :n] += shear * J.d0[:, None, None] * eye
        if grad:
            G[:, :n, :n, :] -= al[l] * J.d3
            G[:, :n, n, :] += -m.coupling_gamma * be[l] * s * J.d2
            G[:, n, :n, :] += ie * be[l] * s * J.d2
            G[:, n, n, :] += ga[l] * J.d1
            if l == 2:
                G[:, :n, :n, :] += shear * J.d1[:, None, None, :] * eye[None, :, :, None]
    return V, G


def _check_dim(n: int):
    if n != 3:
        raise ValueError("the thermoelastic fundamental matrix is implemented for n = 3")


def psi_field(z: np.ndarray, mb: MediumBundle, grad: bool = False):
    """Psi(z) at a batch of points ``z`` (N, 3), with gradient in z if asked."""
    z = np.atleast_2d(np.asarray(z, dtype=float))
    _check_dim(z.shape[1])
    jets = [yukawa_jet(z, k) for k in mb.waves.k_modified]
    return assemble(jets, mb, +1.0, grad=grad)


def psi(x, mb: MediumBundle) -> np.ndarray:
    """Fundamental matrix Psi(x, omega) at one point, shape (n+1, n+1)."""
    x = np.asarray(x, dtype=float)
    if np.linalg.norm(x) == 0:
        raise SingularPoint("Psi is singular at the origin")
    return psi_field(x[None, :], mb)[0][0]


def psi_tilde(x, mb: MediumBundle) -> np.ndarray:
    """Psi evaluated at ``-x``."""
    return psi(-np.asarray(x, dtype=float), mb)


def psi_adjoint(x, mb: MediumBundle) -> np.ndarray:
    """``Psi(-x)^T``: fundamental matrix of the formally adjoint system."""
    return psi_tilde(x, mb).T


# ------------------------------------------------------------------ stresses


@dataclass(frozen=True)
class StressContext:
    point: np.ndarray
    normal: np.ndarray
    medium: MediumParams

    def __post_init__(self):
        if abs(np.linalg.norm(self.normal) - 1.0) > 1e-12:
            raise ValueError("normal must be a unit vector")


def _stress(V: np.ndarray, G: np.ndarray, nu: np.ndarray, m: MediumParams, coupling: complex) -> np.ndarray:
    """Apply ``[[T, coupling*nu], [0, d/dnu]]`` column-wise.

    V: (N, n+1, C), G: (N, n+1, C, n), nu: (N, n).
    """
    n = nu.shape[1]
    lam, mu = m.lame_lambda, m.shear_mu
    Gu = G[:, :n, :, :]  # (N, n, C, n): d_j V_i
    div = np.einsum("nicj,ij->nc", Gu, np.eye(n))
    dnu = np.einsum("nicj,nj->nic", G, nu)  # normal derivative of every entry
    grad_dot = np.einsum("njck,nj->nkc", Gu, nu)  # sum_j nu_j d_k V_j
    out = np.empty_like(V)
    out[:, :n, :] = (
        lam * nu[:, :, None] * div[:, None, :]
        + mu * grad_dot
        + mu * dnu[:, :n, :]
        + coupling * nu[:, :, None] * V[:, n, None, :]
    )
    out[:, n, :] = dnu[:, n, :]
    return out


def stress_R(V, G, nu, m: MediumParams) -> np.ndarray:
    return _stress(V, G, nu, m, -m.coupling_gamma)


def stress_R_tilde(V, G, nu, m: MediumParams) -> np.ndarray:
    return _stress(V, G, nu, m, -1j * m.frequency_omega * m.coupling_eta)


def _gradient_fd(field, y: np.ndarray, h: float) -> np.ndarray:
    n = y.shape[0]
    cols = []
    for j in range(n):
        e = np.zeros(n)
        e[j] = h
        f = [np.asarray(field(y + c * e), dtype=complex) for c in (-2, -1, 1, 2)]
        cols.append((f[0] - 8 * f[1] + 8 * f[2] - f[3]) / (12 * h))
    return np.stack(cols, axis=-1)


def numerical_gradient(field, y, tol: float = 1e-9) -> np.ndarray:
    """4th-order central differences with one Richardson check."""
    y = np.asarray(y, dtype=float)
    h = max(1e-5, 1e-4 * np.linalg.norm(y))
    g1 = _gradient_fd(field, y, h)
    g2 = _gradient_fd(field, y, h / 2)
    g = g2 + (g2 - g1) / 15.0
    err = np.max(np.abs(g2 - g1))
    scale = max(np.max(np.abs(g)), 1e-300)
    if not np.all(np.isfinite(g)) or err > max(tol, 1e-3) * scale * 1e3:
        raise DifferentiationFailure(f"finite differences did not settle (err {err:.2e})")
    return g


def apply_stress_R(field, ctx: StressContext, gradient=None) -> np.ndarray:
    """R(d_y, nu) U at ``ctx.point``.

    ``field`` maps a point to an (n+1)-vector; ``gradient`` (optional) maps a
    point to the (n+1, n) Jacobian.  Without it, central differences are used.
    """
    y = np.asarray(ctx.point, dtype=float)
    V = np.asarray(field(y), dtype=complex)
    Jm = np.asarray(gradient(y), dtype=complex) if gradient is not None else numerical_gradient(field, y)
    return stress_R(V[None, :, None], Jm[None, :, None, :], np.asarray(ctx.normal)[None, :], ctx.medium)[0, :, 0]


def apply_stress_R_tilde(matrixfield, ctx: StressContext, gradient=None) -> np.ndarray:
    """R~(d_y, nu) applied column-wise to a matrix field; returns (n+1, n+1)."""
    y = np.asarray(ctx.point, dtype=float)
    V = np.asarray(matrixfield(y), dtype=complex)
    Jm = np.asarray(gradient(y), dtype=complex) if gradient is not None else numerical_gradient(matrixfield, y)
    return stress_R_tilde(V[None], Jm[None], np.asarray(ctx.normal)[None, :], ctx.medium)[0]


def apply_B_fd(field, x: np.ndarray, m: MediumParams, h: float = 1e-3) -> np.ndarray:
    """Apply B(d_x, omega) to a vector field by 4th-order central differences.

    Independent of the closed-form jets; used as a test oracle.
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    c2 = {-2: -1 / 12, -1: 4 / 3, 0: -5 / 2, 1: 4 / 3, 2: -1 / 12}
    c1 = {-2: 1 / 12, -1: -2 / 3, 1: 2 / 3, 2: -1 / 12}
    U0 = np.asarray(field(x), dtype=complex)
    hess = np.zeros((U0.shape[0], n, n), dtype=complex)
    grad = np.zeros((U0.shape[0], n), dtype=complex)
    cache = {}

    def at(off):
        key = tuple(off)
        if key not in cache:
            cache[key] = np.asarray(field(x + h * np.asarray(off, dtype=float)), dtype=complex)
        return cache[key]

    for i in range(n):
        for a, w in c1.items():
            off = np.zeros(n)
            off[i] = a
            grad[:, i] += w * at(off) / h
        for a, w in c2.items():
            off = np.zeros(n)
            off[i] = a
            hess[:, i, i] += w * at(off) / h**2
        for j in range(i + 1, n):
            acc = 0
            for a, wa in c1.items():
                for b, wb in c1.items():
                    off = np.zeros(n)
                    off[i] = a
                    off[j] = b
                    acc = acc + wa * wb * at(off)
            hess[:, i, j] = hess[:, j, i] = acc / h**2
    lap = np.trace(hess[:, :, :], axis1=1, axis2=2)
    u = U0[:n]
    out = np.zeros(n + 1, dtype=complex)
    w2 = m.density_rho * m.frequency_omega**2
    out[:n] = (
        m.shear_mu * lap[:n]
        + (m.lame_lambda + m.shear_mu) * np.einsum("jij->i", hess[:n])
        - m.coupling_gamma * grad[n]
        + w2 * u
    )
    out[n] = lap[n] + 1j * m.frequency_omega / m.theta * U0[n] + 1j * m.frequency_omega * m.coupling_eta * np.trace(grad[:n])
    return out
