"""Chebyshev derivatives, normalized associated Legendre functions and real
spherical harmonics on the 2-sphere.

Conventions
-----------
``K_l^m(t) = (-1)^m sqrt((l-m)!/(l+m)!) P_l^m(t)`` where ``P_l^m`` carries the
Condon-Shortley phase.  The two signs cancel, so for ``m >= 0`` the value is
the *positive* Schmidt semi-normalized Legendre function, e.g.
``K_1^1(cos t) = sin(t)/sqrt(2)``.  Negative orders follow
``K_l^{-m} = (-1)^m K_l^m`` and ``K_l^m = 0`` whenever ``|m| > l``.
"""
from dataclasses import dataclass
import math

import numpy as np

CLAMP_TOL = 1e-12


@dataclass(frozen=True)
class DegreeOrderPair:
    l: int
    m: int

    def __post_init__(self):
        if self.l < 0 or abs(self.m) > self.l:
            raise ValueError(f"invalid degree/order pair (l={self.l}, m={self.m})")


def clamp_unit(x):
    """Clamp values that exceed [-1, 1] by rounding noise only."""
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1.0 + CLAMP_TOL):
        raise ValueError("argument outside [-1, 1]")
    return np.clip(x, -1.0, 1.0)


def gegenbauer(n, lam, x):
    """C_n^{(lam)}(x) by the three-term recurrence."""
    x = np.asarray(x, dtype=float)
    if n == 0:
        return np.ones_like(x)
    c_prev = np.ones_like(x)
    c = 2.0 * lam * x
    for j in range(2, n + 1):
        c_prev, c = c, (2.0 * (j + lam - 1) * x * c - (j + 2 * lam - 2) * c_prev) / j
    return c


def chebyshev_derivative(n, d, x):
    """d-th derivative of the Chebyshev polynomial T_n at x.

    Uses ``T_n^{(d)} = 2^{d-1} (d-1)! n C_{n-d}^{(d)}`` for ``n >= d >= 1``.
    Scalars in give a float back; arrays broadcast.
    """
    if n < 0 or d < 0:
        raise ValueError("n and d must be non-negative")
    scalar = np.ndim(x) == 0
    x = clamp_unit(x)
    if d > n:
        out = np.zeros_like(x)
    elif d == 0:
        if n == 0:
            out = np.ones_like(x)
        else:
            t_prev, t = np.ones_like(x), x.copy()
            for _ in range(n - 1):
                t_prev, t = t, 2.0 * x * t - t_prev
            out = t
    else:
        scale = math.ldexp(float(math.factorial(d - 1)), d - 1) * n
        out = scale * gegenbauer(n - d, d, x)
    return float(out) if scalar else out


def _k_nonneg(l, m, t):
    # Schmidt semi-normalized recurrence upward in l at fixed m >= 0.
    sin_t = np.sqrt(np.maximum(0.0, (1.0 - t) * (1.0 + t)))
    kmm = np.ones_like(t)
    for i in range(1, m + 1):
        kmm = kmm * math.sqrt((2 * i - 1) / (2 * i)) * sin_t
    if l == m:
        return kmm
    k_prev, k = kmm, math.sqrt(2 * m + 1) * t * kmm
    for j in range(m + 2, l + 1):
        k_prev, k = k, ((2 * j - 1) * t * k - math.sqrt((j - 1) ** 2 - m * m) * k_prev) / math.sqrt(
            j * j - m * m
        )
    return k


def assoc_legendre_K(l, m, t):
    """Normalized associated Legendre function K_l^m(t)."""
    scalar = np.ndim(t) == 0
    if l < 0:
        raise ValueError("degree must be non-negative")
    t = clamp_unit(t)
    if abs(m) > l:
        out = np.zeros_like(t)
    else:
        out = _k_nonneg(l, abs(m), t)
        if m < 0 and (m % 2):
            out = -out
    return float(out) if scalar else out


def legendre_c(l, m):
    return 0.5 * math.sqrt(max(0, (l - m) * (l + m + 1)))


def legendre_tau(l, m):
    return math.sqrt(max(0, (l + m + 2) * (l + m + 1)))


def assoc_legendre_K_theta_derivative(l, m, theta):
    """Return ``sin(theta) * K_l^m'(cos(theta))`` without any division.

    ``c_{l,m} K_l^{m+1} - c_{l,-m} K_l^{m-1}`` evaluated at cos(theta).
    Note the theta-derivative of ``K_l^m(cos theta)`` is minus this value.
    """
    t = np.cos(theta)
    out = legendre_c(l, m) * assoc_legendre_K(l, m + 1, t) - legendre_c(l, -m) * assoc_legendre_K(
        l, m - 1, t
    )
    return float(out) if np.ndim(theta) == 0 else out


def eta(l):
    return math.sqrt((2 * l + 1) / (2.0 * math.pi))


def azimuthal(m, phi):
    """y_m(phi): cos(m phi), 1/sqrt(2) or sin(|m| phi)."""
    phi = np.asarray(phi, dtype=float)
    if m > 0:
        return np.cos(m * phi)
    if m < 0:
        return np.sin(-m * phi)
    return np.full_like(phi, 1.0 / math.sqrt(2.0))


def real_Y2(l, m, phi, theta):
    """Real orthonormal spherical harmonic Y_{l,m}(phi, theta) on S^2."""
    DegreeOrderPair(l, m)
    out = eta(l) * assoc_legendre_K(l, abs(m), np.cos(theta)) * azimuthal(m, phi)
    return float(out) if np.ndim(out) == 0 else out
