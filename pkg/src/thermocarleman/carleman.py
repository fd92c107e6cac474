"""Carleman kernels and the Carleman matrix.

Normalisation
-------------
All kernels are scaled so that ``Phi(y, x, k) = exp(-k r)/r + regular`` in
3-D, i.e. they have the same singular part as the radial factor of the
fundamental matrix once ``k = -i lambda``.  The raw u-integrals relate to
the normalised kernel through ``raw = KERNEL_NORMALIZATION[n] * Phi``.

Evaluation
----------
The raw u-integrals only converge for real ``k``: ``cos(k u)`` grows like
``exp(|Im k| u)``.  The kernels are therefore evaluated through their
tau-derivative, which has the closed form
``d/dtau Phi = -exp(tau a) J0(sqrt(s (tau^2 - k^2)))`` (3-D, ``a = y_n - x_n``)
and is entire in ``k``.  Integrating it from ``k`` gives, for every complex k,

    Phi_tau = exp(-k r)/r - int_k^0 ... dsigma - int_0^tau exp(sigma a) J0(...) dsigma.

The Mittag-Leffler kernel is a superposition of exponential kernels,
``E_rho(c w) = int_0^inf M(t) exp(c t w) dt`` (M the Wright function of
index 1/rho), so it only changes the weight on the real sigma-axis: the
indicator ``sigma < tau`` becomes the smooth survival weight
``W(sigma) / E_rho(c x_n)``.  The u-integrals are kept as independent
oracles for real k.
"""

from __future__ import annotations

import functools
import math
from fractions import Fraction
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, interpolate, special

from .errors import OnLightCone, ParameterViolation, QuadratureFailure, SingularPoint
from .fundsol import Jet, assemble, yukawa_jet
from .medium import MediumBundle
from .specfun import bessel_j0, bessel_jp_over_zp_all, mittag_leffler, mittag_leffler_real

KERNEL_NORMALIZATION = {3: -math.pi / 2, 2: -0.5}

EXPONENTIAL = "exponential"
MITTAG_LEFFLER = "mittag-leffler"


@dataclass(frozen=True)
class KernelSpec:
    kind: str = EXPONENTIAL
    tau: float = 10.0
    n: int = 3
    rho_exp: float | None = None

    def __post_init__(self):
        if self.kind not in (EXPONENTIAL, MITTAG_LEFFLER):
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if not self.tau > 0:
            raise ParameterViolation("tau", "tau > 0 required")
        if self.n not in (2, 3):
            raise ValueError("n must be 2 or 3")
        if self.kind == MITTAG_LEFFLER and not (self.rho_exp is not None and self.rho_exp > 1):
            raise ParameterViolation("rho", "Mittag-Leffler kernel needs rho > 1")

    @property
    def m(self) -> int:
        return self.n // 2

    def with_tau(self, tau: float) -> KernelSpec:
        return KernelSpec(self.kind, tau, self.n, self.rho_exp)


@dataclass(frozen=True)
class QuadratureControls:
    """Controls for the sigma-axis Gauss panels and the u-integral oracles."""

    u_max: float = math.inf
    panel_nodes: int = 16
    segment_nodes: int = 32
    extrapolation_depth: int = 50  # QAWF cycle limit
    tol: float = 1e-10
    decay_budget: float = 40.0  # e-folds kept beyond the weight's bulk

    def __post_init__(self):
        if not 0 < self.tol <= 1e-2:
            raise ParameterViolation("tol", "tolerance must lie in (0, 1e-2]")
        if not self.u_max > 0:
            raise ParameterViolation("u_max", "must be positive")


DEFAULT_Q = QuadratureControls()


# ---------------------------------------------------------------- u-oracles


def _oscillatory(amp, freq: float, kind: str, q: QuadratureControls, u0: float) -> float:
    """int_{u0}^inf amp(u) * {cos|sin}(freq u) du via QUADPACK's QAWF."""
    if freq == 0.0:
        if kind == "sin":
            return 0.0
        val, err = integrate.quad(amp, u0, math.inf, limit=500)
        return val
    if freq < 0:
        freq = -freq
        sign = -1.0 if kind == "sin" else 1.0
    else:
        sign = 1.0
    val, err = integrate.quad(amp, u0, math.inf, weight=kind, wvar=freq, limlst=q.extrapolation_depth, epsabs=1e-14)
    if not math.isfinite(val) or err > max(q.tol * max(abs(val), 1.0) * 1e3, 1e-9):
        raise QuadratureFailure(f"oscillatory tail did not converge (err {err:.2e})")
    return sign * val


def _sc_cos_integral(A, C, tau: float, k: float, s: float, q: QuadratureControls) -> float:
    """int_0^inf [A(u) sin(tau rho) + C(u) cos(tau rho)] cos(k u) du, rho = sqrt(u^2 + s).

    The tau*rho phase is split as tau*u + tau*eps(u) with eps -> 0 so each
    piece is a smooth amplitude times a pure Fourier factor.
    """
    period = 2 * math.pi / max(tau + abs(k), 1.0)
    u0 = 4 * period + 2 * math.sqrt(s)

    def full(u):
        rho = math.hypot(u, math.sqrt(s))
        return (A(u) * math.sin(tau * rho) + C(u) * math.cos(tau * rho)) * math.cos(k * u)

    head, _ = integrate.quad(full, 0.0, u0, limit=800, epsabs=1e-15, epsrel=1e-13)

    def eps(u):
        return s / (math.hypot(u, math.sqrt(s)) + u)

    def amp_sin(u):  # multiplies sin(tau u)
        e = tau * eps(u)
        return A(u) * math.cos(e) - C(u) * math.sin(e)

    def amp_cos(u):  # multiplies cos(tau u)
        e = tau * eps(u)
        return A(u) * math.sin(e) + C(u) * math.cos(e)

    tail = 0.0
    if tau == 0.0:
        tail = _oscillatory(lambda u: C(u), k, "cos", q, u0)
    else:
        for f in (tau + k, tau - k):
            tail += 0.5 * _oscillatory(amp_sin, f, "sin", q, u0)
            tail += 0.5 * _oscillatory(amp_cos, f, "cos", q, u0)
    return head + tail


def _split(y, x):
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    d = y - x
    if np.linalg.norm(d) == 0:
        raise SingularPoint("y coincides with x")
    return float(d[:-1] @ d[:-1]), float(d[-1])


def cap_raw_integral(y, x, k: float, tau: float, q: QuadratureControls = DEFAULT_Q) -> float:
    """n = 3 u-integral ``int Im[exp(tau(i rho + a))/(i rho + a)] cos(k u)/rho du`` (real k)."""
    s, a = _split(y, x)
    ea = math.exp(tau * a)

    def A(u):
        rho2 = u * u + s
        return ea * a / ((rho2 + a * a) * math.sqrt(rho2))

    def C(u):
        rho2 = u * u + s
        return -ea / (rho2 + a * a)

    if s == 0.0:
        # A alone is singular at u = 0; integrate the combination near the origin
        def full(u):
            if u == 0:
                return ea * (a * tau - 1) / (a * a)
            return ea * (a * math.sin(tau * u) / u - math.cos(tau * u)) / (u * u + a * a) * math.cos(k * u)

        u0 = 8 * math.pi / max(tau + abs(k), 1.0)
        head, _ = integrate.quad(full, 0.0, u0, limit=800, epsabs=1e-15, epsrel=1e-13)
        tail = 0.0
        for f in (tau + k, tau - k):
            tail += 0.5 * _oscillatory(A, f, "sin", q, u0)
            tail += 0.5 * _oscillatory(C, f, "cos", q, u0)
        return head + tail
    return _sc_cos_integral(A, C, tau, k, s, q)


def cap_dtau_raw_integral(y, x, k: float, tau: float, q: QuadratureControls = DEFAULT_Q) -> float:
    """``int_0^inf sin(tau rho)/rho cos(k u) du`` (the s-dependent factor of the tau-derivative)."""
    s, _ = _split(y, x)
    if s == 0.0:
        raise SingularPoint("s = 0 makes the amplitude singular; use s > 0")
    return _sc_cos_integral(lambda u: 1.0 / math.sqrt(u * u + s), lambda u: 0.0, tau, k, s, q)


def cone_raw_integral(y, x, k: float, tau: float, rho: float, q: QuadratureControls = DEFAULT_Q) -> float:
    """n = 3 Mittag-Leffler u-integral normalised by ``E_rho(tau^(1/rho) x_3)`` (real k)."""
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    s, a = _split(y, x)
    c = tau ** (1.0 / rho)
    norm = mittag_leffler_real(rho, c * x[-1])

    @functools.lru_cache(maxsize=None)
    def integrand_val(u):
        rr = math.sqrt(u * u + s)
        w = 1j * rr + y[-1]
        return (mittag_leffler(rho, c * w) / (1j * rr + a)).imag / rr

    def f(u):
        return integrand_val(u) * math.cos(k * u)

    # E_rho decays like 1/w on the vertical line, so the integrand is O(u^-2)
    pts = np.concatenate([[0.0], np.geomspace(0.05, 400.0, 60)])
    total = 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        total += integrate.quad(f, lo, hi, limit=200, epsabs=1e-13, epsrel=1e-11)[0]
    # far tail: E_rho(cw) ~ -1/(Gamma(1 - 1/rho) c w), integrate the asymptotic form
    g1 = special.gamma(1 - 1 / rho)

    def tail(u):
        rr = math.sqrt(u * u + s)
        w = 1j * rr + y[-1]
        return (-1.0 / (g1 * c * w) / (1j * rr + a)).imag / rr

    if k == 0:
        total += integrate.quad(tail, 400.0, math.inf)[0]
    else:
        total += _oscillatory(tail, k, "cos", q, 400.0)
    return total / norm


# ----------------------------------------------------------- sigma measures


def _gl_panels(a: float, b: float, h: float, nodes: int):
    if b <= a:
        return np.zeros(0), np.zeros(0)
    npan = max(1, int(math.ceil((b - a) / h)))
    xg, wg = np.polynomial.legendre.leggauss(nodes)
    edges = np.linspace(a, b, npan + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    pts = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
    wts = (half[:, None] * wg[None, :]).ravel()
    return pts, wts


def _segment(k: complex, nodes: int):
    """Nodes/weights for int_k^0 f(sigma) d sigma along the straight segment."""
    if k == 0:
        return np.zeros(0, dtype=complex), np.zeros(0, dtype=complex)
    v, w = np.polynomial.legendre.leggauss(nodes)
    v = 0.5 * (v + 1)
    w = 0.5 * w
    return k * (1 - v), -k * w


@dataclass(frozen=True)
class SurvivalWeight:
    """Weight on the real sigma-axis replacing the indicator ``sigma < tau``.

    For the Mittag-Leffler kernel ``w(sigma) = int_{sigma/c}^inf M(t) e^{c t x_n} dt / E_rho(c x_n)``.
    """

    spec: KernelSpec
    x_n: float
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def c(self) -> float:
        return self.spec.tau ** (1.0 / self.spec.rho_exp)

    def __call__(self, sigma: np.ndarray) -> np.ndarray:
        sigma = np.asarray(sigma, dtype=float)
        if self.spec.kind == EXPONENTIAL:
            return (sigma < self.spec.tau).astype(float)
        rho = self.spec.rho_exp
        c = self.c
        if rho == 2.0:
            return special.erfc((sigma / c - 2 * c * self.x_n) / 2) / special.erfc(-c * self.x_n)
        t_grid, spline = self._table()
        u = sigma / c
        return np.where(u < t_grid[-1], spline(np.minimum(u, t_grid[-1])), 0.0)

    def _table(self):
        if "t" not in self._cache:
            rho = self.spec.rho_exp
            c = self.c
            t = np.linspace(0.0, _wright_cutoff(rho, c * self.x_n), 601)
            dens = wright_m(1.0 / rho, t) * np.exp(c * self.x_n * t)
            cum = integrate.cumulative_simpson(dens, x=t, initial=0.0)
            total = cum[-1]
            self._cache["t"] = t
            self._cache["s"] = interpolate.CubicSpline(t, (total - cum) / total)
        return self._cache["t"], self._cache["s"]

    def upper(self, a_max: float, budget: float) -> float:
        """Point beyond which ``w(sigma) exp(sigma a_max)`` is below ``e^-budget`` of its peak."""
        if self.spec.kind == EXPONENTIAL:
            return self.spec.tau
        grid = np.linspace(0.0, 1.0, 2001)
        hi = 4.0 * self.c * (self.c * max(self.x_n, 0.0) + max(a_max, 0.0) * self.c + 10.0) + 10.0
        sig = grid * hi
        with np.errstate(divide="ignore"):
            lg = np.log(np.maximum(self(sig), 1e-300)) + sig * a_max
        peak = lg.max()
        above = np.nonzero(lg > peak - budget)[0]
        return float(sig[above[-1]] + hi / 2000)


def wright_m(nu: float, t: np.ndarray) -> np.ndarray:
    """Wright M-function of index ``nu`` in (0,1), by its power series in extended precision."""
    import mpmath as mp

    t = np.atleast_1d(np.asarray(t, dtype=float))
    tmax = float(t.max()) if t.size else 0.0
    # terms peak near exp(t^(1/(1-nu))); size precision and length to that
    grow = tmax ** (1 / (1 - nu)) + tmax
    nterms = int(4 * grow) + 60
    with mp.workdps(int(0.45 * grow) + 30):
        # exact rational index so 1/Gamma vanishes exactly at its poles
        fr = Fraction(nu).limit_denominator(10**6)
        coef = [(-1) ** n * mp.rgamma(mp.mpf(fr.denominator - fr.numerator * (n + 1)) / fr.denominator) / mp.factorial(n) for n in range(nterms)]
        coef.reverse()
        return np.array([float(mp.polyval(coef, mp.mpf(float(tv)))) for tv in t])


def _wright_cutoff(rho: float, shift: float) -> float:
    """t beyond which ``M_{1/rho}(t) exp(shift t)`` is below e^-60."""
    nu = 1.0 / rho
    b = (1 - nu) * nu ** (nu / (1 - nu))
    t = max(4.0, 4 * shift)
    while -b * t ** (1 / (1 - nu)) + shift * t > -60:
        t *= 1.2
    return t


def sigma_measure(spec: KernelSpec, x_n: float, k: complex, a_max: float, s_max: float, q: QuadratureControls = DEFAULT_Q):
    """Quadrature nodes/weights on the sigma-contour so that

    ``Phi = exp(-k r)/r - sum_j w_j exp(sigma_j a) J0(sqrt(s (sigma_j^2 - k^2)))``.
    """
    k = complex(k)
    weight = SurvivalWeight(spec, x_n)
    hi = weight.upper(a_max, q.decay_budget)
    h = min(1.0, math.pi / (2 * max(math.sqrt(max(s_max, 0.0)), 1e-3)), 2.0 / max(abs(a_max), 1e-3))
    if k.imag == 0 and k.real >= 0:
        # real k: the raw u-integral does not depend on tau below k
        seg_s, seg_w = np.zeros(0, dtype=complex), np.zeros(0, dtype=complex)
        lo = k.real
    else:
        seg_s, seg_w = _segment(k, q.segment_nodes)
        lo = 0.0
    pts, wts = _gl_panels(lo, max(hi, lo), h, q.panel_nodes)
    if spec.kind == MITTAG_LEFFLER:
        wts = wts * weight(pts)
    sig = np.concatenate([seg_s, pts.astype(complex)])
    w = np.concatenate([seg_w, wts.astype(complex)])
    return sig, w


# -------------------------------------------------------------- jets in 3-D


_PJ_PAIRS = [(0, 0), (0, 1), (0, 2), (0, 3), (1, 0), (1, 1), (1, 2), (2, 0), (2, 1), (3, 0)]


def _accumulate(d: np.ndarray, k: complex, sig: np.ndarray, w: np.ndarray, chunk: int = 256):
    """Sums ``S[p, j] = sum_q w_q sigma_q^j exp(sigma_q a) f_p(s; sigma_q)``.

    ``f_p`` is the p-th derivative in s of ``J0(sqrt(s (sigma^2 - k^2)))``.
    """
    s = np.sum(d[:, :-1] ** 2, axis=1)
    a = d[:, -1]
    N = d.shape[0]
    S = {pj: np.zeros(N, dtype=complex) for pj in _PJ_PAIRS}
    sqs = np.sqrt(s)
    for lo in range(0, len(sig), chunk):
        sg = sig[lo : lo + chunk]
        wg = w[lo : lo + chunk]
        q2 = sg * sg - k * k  # (Q,)
        qq = np.sqrt(q2)
        z = sqs[:, None] * qq[None, :]
        ea = np.exp(np.outer(a, sg)) * wg[None, :]
        fp = [(-q2[None, :] / 2) ** p * jz for p, jz in enumerate(bessel_jp_over_zp_all(3, z))]
        for p, j in _PJ_PAIRS:
            S[(p, j)] += np.sum(ea * sg[None, :] ** j * fp[p], axis=1)
    return S


def _tangential(tidx: tuple, t: np.ndarray, fp) -> np.ndarray:
    """Derivative of F(s), s = |t|^2, along the tangential multi-index ``tidx``."""
    o = len(tidx)
    if o == 0:
        return fp(0)
    if o == 1:
        (i,) = tidx
        return 2 * t[:, i] * fp(1)
    if o == 2:
        i, j = tidx
        return 4 * t[:, i] * t[:, j] * fp(2) + 2 * (i == j) * fp(1)
    i, j, l = tidx
    return 8 * t[:, i] * t[:, j] * t[:, l] * fp(3) + 4 * (
        (i == j) * t[:, l] + (i == l) * t[:, j] + (j == l) * t[:, i]
    ) * fp(2)


def _jet_from_sums(d: np.ndarray, S) -> Jet:
    N, n = d.shape
    t = d[:, :-1]
    nt = n - 1

    def deriv(idx):
        tidx = tuple(i for i in idx if i < nt)
        j = len(idx) - len(tidx)
        return _tangential(tidx, t, lambda p: S[(p, j)])

    d0 = deriv(())
    d1 = np.stack([deriv((i,)) for i in range(n)], axis=-1)
    d2 = np.empty((N, n, n), dtype=complex)
    d3 = np.empty((N, n, n, n), dtype=complex)
    for i in range(n):
        for j in range(i, n):
            d2[:, i, j] = d2[:, j, i] = deriv((i, j))
            for l in range(j, n):
                v = deriv((i, j, l))
                for perm in {(i, j, l), (i, l, j), (j, i, l), (j, l, i), (l, i, j), (l, j, i)}:
                    d3[(slice(None),) + perm] = v
    return Jet(d0, d1, d2, d3)


def carleman_jet(y: np.ndarray, x: np.ndarray, k: complex, spec: KernelSpec, q: QuadratureControls = DEFAULT_Q) -> Jet:
    """Value and y-derivatives (to third order) of the normalised 3-D kernel at nodes ``y``."""
    if spec.n != 3:
        raise ValueError("jets are implemented for n = 3")
    y = np.atleast_2d(np.asarray(y, dtype=float))
    x = np.asarray(x, dtype=float)
    d = y - x[None, :]
    if np.any(np.linalg.norm(d, axis=1) == 0):
        raise SingularPoint("kernel evaluated at y = x")
    s_max = float(np.max(np.sum(d[:, :-1] ** 2, axis=1)))
    a_max = float(np.max(d[:, -1]))
    sig, w = sigma_measure(spec, float(x[-1]), complex(k), a_max, s_max, q)
    S = _accumulate(d, complex(k), sig, w)
    return yukawa_jet(d, complex(k)) - _jet_from_sums(d, S)


# ------------------------------------------------------- scalar operations


def phi_cap(y, x, k: complex, spec: KernelSpec, q: QuadratureControls = DEFAULT_Q) -> complex:
    """Normalised exponential-kernel Carleman function."""
    if spec.kind != EXPONENTIAL:
        raise ValueError("phi_cap needs the exponential kernel")
    if spec.n == 2:
        return phi_2d(y, x, k, spec, q)
    return complex(carleman_jet(np.atleast_2d(y), x, k, spec, q).d0[0])


def phi_cone(y, x, k: complex, spec: KernelSpec, q: QuadratureControls = DEFAULT_Q) -> complex:
    """Normalised Mittag-Leffler Carleman function (n = 3)."""
    if spec.kind != MITTAG_LEFFLER:
        raise ValueError("phi_cone needs the Mittag-Leffler kernel")
    return complex(carleman_jet(np.atleast_2d(y), x, k, spec, q).d0[0])


def phi_cap_dtau(y, x, k: float, spec: KernelSpec) -> float:
    """Closed-form tau-derivative of the normalised exponential kernel (real k >= 0)."""
    s, a = _split(y, x)
    tau = spec.tau
    if abs(tau - k) < 1e-9:
        raise OnLightCone("tau too close to k")
    if tau < k:
        return 0.0
    arg = math.sqrt(s * (tau * tau - k * k))
    if spec.n == 3:
        psi = 0.5 * math.pi * bessel_j0(arg)
    else:
        psi = math.cos(arg) / math.sqrt(tau * tau - k * k)
    return math.exp(tau * a) * psi / KERNEL_NORMALIZATION[spec.n]


def phi_2d(y, x, k: complex, spec: KernelSpec, q: QuadratureControls = DEFAULT_Q) -> complex:
    """2-D exponential kernel, normalised to ``2 K0(k r) + regular`` (scalar validation tier)."""
    s, a = _split(y, x)
    r = math.sqrt(s + a * a)
    k = complex(k)
    tau = spec.tau
    # sigma = k + (tau - k) v^2 removes the 1/sqrt(sigma - k) endpoint singularity
    npan = max(4, int(math.ceil(abs(tau - k) * (1 + math.sqrt(s)))))
    v, wv = _gl_panels(0.0, 1.0, 1.0 / npan, q.panel_nodes)
    sig = k + (tau - k) * v**2
    jac = 2 * (tau - k) * v
    q2 = sig * sig - k * k
    # cos(sqrt(s q2))/sqrt(q2) with sqrt(q2) = v sqrt((tau-k)(sig+k)) to keep the branch smooth
    root = v * np.sqrt((tau - k) * (sig + k))
    with np.errstate(invalid="ignore", divide="ignore"):
        integrand = np.where(v > 0, np.exp(sig * a) * np.cos(math.sqrt(s) * root) / np.where(v > 0, root, 1.0), 0.0)
    val = np.sum(wv * jac * integrand)
    return complex(2 * (special.kv(0, k * r) - val))


def phi_gradients(y, x, k: complex, spec: KernelSpec, order: int = 1, q: QuadratureControls = DEFAULT_Q):
    """Gradient (order 1) or Hessian (order 2) of the kernel with respect to y."""
    J = carleman_jet(np.atleast_2d(y), x, k, spec, q)
    if order == 1:
        return J.d1[0]
    if order == 2:
        return J.d2[0]
    raise ValueError("order must be 1 or 2")


# ------------------------------------------------------------ Carleman matrix


def pi_field(y: np.ndarray, x, mb: MediumBundle, spec: KernelSpec, q: QuadratureControls = DEFAULT_Q, grad: bool = True):
    """Carleman matrix Pi(y, x) and its y-gradient at a batch of nodes.

    Pi uses the fundamental-matrix combination with derivatives in ``z = x - y``
    so that ``Pi - Psi(x - y)`` is regular in y.
    """
    y = np.atleast_2d(np.asarray(y, dtype=float))
    jets = [carleman_jet(y, x, k, spec, q) for k in mb.waves.k_modified]
    return assemble(jets, mb, -1.0, grad=grad)


def pi_matrix(y, x, mb: MediumBundle, spec: KernelSpec, q: QuadratureControls = DEFAULT_Q) -> np.ndarray:
    return pi_field(np.atleast_2d(y), x, mb, spec, q, grad=False)[0][0]


def psi_reflected_field(y: np.ndarray, x, mb: MediumBundle, grad: bool = True):
    """Psi(x - y) and its y-gradient: the kernel of the classical representation."""
    y = np.atleast_2d(np.asarray(y, dtype=float))
    d = y - np.asarray(x, dtype=float)[None, :]
    jets = [yukawa_jet(d, k) for k in mb.waves.k_modified]
    return assemble(jets, mb, -1.0, grad=grad)


def kernel_trace(y, x, k: float, tau: float, path, u_max: float = 50.0, samples: int = 2001) -> None:
    """Write the real-k u-integrand and its running integral to CSV (debug aid)."""
    import csv

    s, a = _split(y, x)
    u = np.linspace(0.0, u_max, samples)
    rho = np.sqrt(u * u + s)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = np.exp(tau * (1j * rho + a)) / (1j * rho + a)
        f = np.where(rho > 0, val.imag / rho, 0.0) * np.cos(k * u)
    part = integrate.cumulative_trapezoid(f, u, initial=0.0)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["u", "integrand_re", "integrand_im", "partial_sum"])
        for row in zip(u, f, np.zeros_like(f), part):
            w.writerow([repr(float(v)) for v in row])
