"""Special functions used by the kernels.

``E_rho(w) = sum_n w^n / Gamma(1 + n / rho)`` is the Mittag-Leffler function
of order ``rho`` (``E_{1/rho}`` in the two-index notation).  It grows like
``rho * exp(w^rho)`` inside ``|arg w| < pi / (2 rho)`` and decays like
``1/w`` outside.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .errors import EvaluationOverflow, ParameterViolation, SingularPoint

# Fundamental solutions are ``HELMHOLTZ_NORM * 4 pi * g`` where g is the
# outgoing Green's function of Lap + k^2 (so in 3-D: exp(ikr)/r).
HELMHOLTZ_NORM = 1.0

ML_SERIES_RADIUS = 0.9
_EXP_LIMIT = 700.0


@dataclass(frozen=True)
class MLIndex:
    rho_exp: float

    def __post_init__(self):
        # rho = 1 is admitted so E_1 = exp can serve as a check.
        if not self.rho_exp >= 1.0:
            raise ParameterViolation("rho", "Mittag-Leffler order must be >= 1")


# --------------------------------------------------------------------- J0


def _j0_miller(x: float) -> float:
    nmax = 2 * ((int(x) + 40) // 2)
    jp1, j = 0.0, 1e-300
    even_sum = 0.0
    j0 = 0.0
    for k in range(nmax, 0, -1):
        jm1 = 2.0 * k / x * j - jp1
        jp1, j = j, jm1
        if abs(j) > 1e250:
            jp1 *= 1e-250
            j *= 1e-250
            even_sum *= 1e-250
        if (k - 1) % 2 == 0 and k - 1 > 0:
            even_sum += j
        if k - 1 == 0:
            j0 = j
    norm = j0 + 2.0 * even_sum
    return j0 / norm


def _j0_asymptotic(x: float) -> float:
    # Hankel expansion; terms are summed until they stop decreasing.
    mu = 0.0
    p, q = 0.0, 0.0
    term = 1.0
    k = 0
    prev = math.inf
    while True:
        if k % 2 == 0:
            p += term * (-1) ** (k // 2)
        else:
            q += term * (-1) ** (k // 2)
        k += 1
        nxt = term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        if abs(nxt) >= prev or abs(nxt) < 1e-18:
            break
        prev = abs(term)
        term = nxt
    chi = x - math.pi / 4
    return math.sqrt(2 / (math.pi * x)) * (p * math.cos(chi) - q * math.sin(chi))


def bessel_j0(x):
    """Bessel J0 for real ``x >= 0`` (scalar or array).

    Two-term series below 1e-4, Miller backward recurrence below 25,
    Hankel asymptotics above.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0):
        raise ValueError("bessel_j0 expects x >= 0")
    out = np.empty_like(arr)
    for idx, v in np.ndenumerate(arr):
        if v < 1e-4:
            out[idx] = 1.0 - 0.25 * v * v
        elif v < 25.0:
            out[idx] = _j0_miller(float(v))
        else:
            out[idx] = _j0_asymptotic(float(v))
    return float(out) if out.ndim == 0 else out


def bessel_jp_over_zp(p: int, z: np.ndarray) -> np.ndarray:
    """``J_p(z) / z^p`` for complex ``z``; entire, so small |z| uses the series."""
    z = np.asarray(z, dtype=complex)
    out = np.empty_like(z)
    small = np.abs(z) < 2.5
    if np.any(small):
        zs = z[small]
        h = -(zs * zs) / 4
        term = np.full_like(zs, 1.0 / (2.0**p * math.factorial(p)))
        acc = term.copy()
        for j in range(1, 30):
            term = term * h / (j * (j + p))
            acc += term
        out[small] = acc
    big = ~small
    if np.any(big):
        zb = z[big]
        out[big] = special.jv(p, zb) / zb**p
    return out


def bessel_jp_over_zp_all(pmax: int, z: np.ndarray) -> list[np.ndarray]:
    """``[J_p(z) / z^p for p = 0..pmax]``; upward recurrence from J0, J1 for |z| >= 2.5."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 2.5
    out = [np.empty_like(z) for _ in range(pmax + 1)]
    if np.any(small):
        for p in range(pmax + 1):
            out[p][small] = bessel_jp_over_zp(p, z[small])
    big = ~small
    if np.any(big):
        zb = z[big]
        jm, j = special.jv(0, zb), special.jv(1, zb)
        out[0][big] = jm
        zp = zb
        if pmax >= 1:
            out[1][big] = j / zp
        for p in range(2, pmax + 1):
            jm, j = j, 2 * (p - 1) / zb * j - jm
            zp = zp * zb
            out[p][big] = j / zp
    return out


# ------------------------------------------------------------ Mittag-Leffler


def _ml_series(rho: float, w: complex, deriv: bool = False) -> complex:
    acc = 0.0 + 0.0j
    for n in range(0, 400):
        if deriv:
            if n == 0:
                continue
            term = n * w ** (n - 1) / special.gamma(1 + n / rho)
        else:
            term = w**n / special.gamma(1 + n / rho)
        acc += term
        if n > 5 and abs(term) < 1e-17 * max(abs(acc), 1e-300):
            break
    return acc


def _cquad(f, a, b, **kw) -> complex:
    # tolerances sit at the round-off level on purpose; silence QUADPACK's notice
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        re = integrate.quad(lambda t: f(t).real, a, b, limit=400, epsabs=1e-15, epsrel=1e-13, **kw)[0]
        im = integrate.quad(lambda t: f(t).imag, a, b, limit=400, epsabs=1e-15, epsrel=1e-13, **kw)[0]
    return complex(re, im)


def _ml_contour(rho: float, w: complex, power: int) -> complex:
    """Hankel-contour representation with ``(zeta - w)^-power`` in the integrand."""
    alpha = 1.0 / rho
    lo, hi = alpha * math.pi / 2, min(math.pi, alpha * math.pi)
    theta = abs(cmath.phase(w))
    eps = 0.5
    if theta <= lo:
        delta, inside = (lo + hi) / 2, True
    elif theta > hi:
        delta, inside = (lo + hi) / 2, False
    elif theta - lo > hi - theta:
        delta, inside = (lo + theta) / 2, False
    else:
        delta, inside = (theta + hi) / 2, True
    inside = inside and abs(w) > eps

    def ray(sign):
        e = cmath.exp(1j * sign * delta)

        def f(chi):
            zeta = chi * e
            return cmath.exp(zeta**rho) * e / (zeta - w) ** power

        return f

    # rays: out along +delta, in along -delta
    total = _cquad(ray(+1), eps, math.inf) - _cquad(ray(-1), eps, math.inf)

    def arc(phi):
        zeta = eps * cmath.exp(1j * phi)
        return cmath.exp(zeta**rho) * 1j * zeta / (zeta - w) ** power

    total += _cquad(arc, -delta, delta)
    val = total / (2j * math.pi * alpha)
    if inside:
        wr = w**rho
        if wr.real > _EXP_LIMIT:
            raise EvaluationOverflow(f"E_rho({w}) overflows double precision")
        if power == 1:
            val += rho * cmath.exp(wr)
        else:
            val += rho * rho * w ** (rho - 1) * cmath.exp(wr)
    return val


def mittag_leffler(idx: MLIndex | float, w: complex) -> complex:
    rho = idx.rho_exp if isinstance(idx, MLIndex) else float(idx)
    w = complex(w)
    if not (math.isfinite(w.real) and math.isfinite(w.imag)):
        raise ValueError("argument must be finite")
    if rho == 1.0:
        if w.real > _EXP_LIMIT:
            raise EvaluationOverflow("exp overflow")
        return cmath.exp(w)
    if abs(w) < ML_SERIES_RADIUS:
        return _ml_series(rho, w)
    return _ml_contour(rho, w, 1)


def mittag_leffler_derivative(idx: MLIndex | float, w: complex) -> complex:
    rho = idx.rho_exp if isinstance(idx, MLIndex) else float(idx)
    w = complex(w)
    if rho == 1.0:
        return cmath.exp(w)
    if abs(w) < ML_SERIES_RADIUS:
        return _ml_series(rho, w, deriv=True)
    return _ml_contour(rho, w, 2)


def mittag_leffler_real(rho: float, x: float) -> float:
    """E_rho at a real argument via the Wright-function Laplace integral (no cancellation for x > 0)."""
    if rho == 1.0:
        return math.exp(x)
    if rho == 2.0:
        return math.exp(x * x) * special.erfc(-x)
    return mittag_leffler(rho, x).real


# --------------------------------------------------------- Helmholtz kernel


def helmholtz_phi(n: int, k: complex, r):
    """Fundamental solution of ``Lap + k^2`` scaled so that in 3-D it is exp(ikr)/r.

    2-D uses the same scaling: ``i pi H0^(1)(k r)``.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise SingularPoint("r must be positive")
    k = complex(k)
    if n == 3:
        out = HELMHOLTZ_NORM * np.exp(1j * k * r) / r
    elif n == 2:
        if k == 0:
            raise SingularPoint("2-D Laplace limit has no outgoing normalisation")
        out = HELMHOLTZ_NORM * 1j * math.pi * special.hankel1(0, k * r)
    else:
        raise ValueError("only n = 2, 3 are supported")
    return complex(out) if out.ndim == 0 else out
