"""Real spherical harmonics on the unit sphere of R^4.

Hyperspherical coordinates ``(phi, theta, chi)`` map to
``xi = (sin th cos ph sin chi, sin th sin ph sin chi, cos th sin chi, cos chi)``.
For ``alpha = (k, l, m)``::

    Y_alpha = a_{k,l}^{-1/2} sin(chi)^l T_{k+1}^{(l+1)}(cos chi) Y_{l,m}(phi, theta)
    a_{k,l} = (k+1) pi / 2 * (k+l+1)! / (k-l)!

Everything here evaluates that closed form directly (Chebyshev derivatives
through the Gegenbauer connection, scale factors combined in log space).
The table kernels in :mod:`strayfield.kernel` use an independent normalized
recurrence; the two routes are cross-checked in the test-suite.
"""
from dataclasses import dataclass
import math

import numpy as np

from .specfun import (
    assoc_legendre_K,
    assoc_legendre_K_theta_derivative,
    azimuthal,
    chebyshev_derivative,
    eta,
    legendre_tau,
)


@dataclass(frozen=True, order=True)
class MultiIndex:
    """Basis label (k, l, m); ordering is lexicographic in (k, l, m)."""

    k: int
    l: int
    m: int

    def __post_init__(self):
        if not (0 <= self.l <= self.k and -self.l <= self.m <= self.l):
            raise ValueError(f"({self.k}, {self.l}, {self.m}) is not a valid multi-index")

    def __iter__(self):
        return iter((self.k, self.l, self.m))

    @property
    def position(self):
        """Position in the lexicographic enumeration of all indices."""
        return degree_offset(self.k) + self.l * self.l + self.l + self.m


def as_index(alpha):
    return alpha if isinstance(alpha, MultiIndex) else MultiIndex(*alpha)


def degree_indices(k):
    """The (k+1)^2 indices of degree k, lexicographic."""
    return [MultiIndex(k, l, m) for l in range(k + 1) for m in range(-l, l + 1)]


def indices_up_to(n):
    """All indices with degree <= n, lexicographic in (k, l, m)."""
    return [a for k in range(n + 1) for a in degree_indices(k)]


def degree_offset(k):
    """Number of indices of degree < k."""
    return k * (k + 1) * (2 * k + 1) // 6


def count_up_to(n):
    return (n + 1) * (n + 2) * (2 * n + 3) // 6


@dataclass(frozen=True)
class S3Point:
    xi: tuple
    phi: float
    theta: float
    chi: float

    @classmethod
    def from_angles(cls, phi, theta, chi):
        st, sc = math.sin(theta), math.sin(chi)
        xi = (st * math.cos(phi) * sc, st * math.sin(phi) * sc, math.cos(theta) * sc, math.cos(chi))
        return cls(xi, phi % (2 * math.pi), theta, chi)

    @classmethod
    def from_cartesian(cls, xi):
        x1, x2, x3, x4 = (float(v) for v in xi)
        norm = math.sqrt(x1 * x1 + x2 * x2 + x3 * x3 + x4 * x4)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError("point is not on the unit 3-sphere")
        rho3 = math.sqrt(x1 * x1 + x2 * x2 + x3 * x3)
        chi = math.atan2(rho3, x4)
        rho2 = math.hypot(x1, x2)
        theta = math.atan2(rho2, x3) if rho3 > 0 else 0.0
        phi = math.atan2(x2, x1) % (2 * math.pi) if rho2 > 0 else 0.0
        return cls((x1, x2, x3, x4), phi, theta, chi)


def log_a_norm(k, l):
    if not 0 <= l <= k:
        raise ValueError("a_norm requires 0 <= l <= k")
    return math.log((k + 1) * math.pi / 2) + math.lgamma(k + l + 2) - math.lgamma(k - l + 1)


def a_norm(k, l):
    """Normalization constant a_{k,l}; the factorial ratio is a running product."""
    if not 0 <= l <= k:
        raise ValueError("a_norm requires 0 <= l <= k")
    prod = 1.0
    for j in range(k - l + 1, k + l + 2):
        prod *= j
    return (k + 1) * math.pi / 2 * prod


def _scaled_cheb(k, l, d, power, chi):
    """a_{k,l}^{-1/2} sin(chi)^power T_{k+1}^{(d)}(cos chi), combined in log space."""
    chi = np.asarray(chi, dtype=float)
    t = chebyshev_derivative(k + 1, d, np.cos(chi))
    t = np.asarray(t, dtype=float)
    s = np.abs(np.sin(chi))
    with np.errstate(divide="ignore"):
        log_mag = np.log(np.abs(t)) - 0.5 * log_a_norm(k, l)
        if power:
            log_mag = log_mag + power * np.log(s)
    out = np.sign(t) * np.exp(log_mag)
    return np.where(t == 0.0, 0.0, out)


def y_alpha_angles(alpha, phi, theta, chi):
    """Vectorized Y_alpha in hyperspherical angles."""
    k, l, m = as_index(alpha)
    radial = _scaled_cheb(k, l, l + 1, l, chi)
    return radial * eta(l) * assoc_legendre_K(l, abs(m), np.cos(theta)) * azimuthal(m, phi)


def y_alpha(alpha, p):
    """Y_alpha at an :class:`S3Point`."""
    return float(y_alpha_angles(alpha, p.phi, p.theta, p.chi))


def angular_derivatives_angles(alpha, phi, theta, chi):
    """Pole-safe angular derivatives of Y_alpha (vectorized).

    Returns ``(dphi, dtheta, dchi)`` with
    ``dphi = dY/dphi / (sin th sin chi)``, ``dtheta = dY/dtheta / sin chi``,
    ``dchi = dY/dchi`` -- the three entries consumed by the gradient of W_alpha.
    """
    k, l, m = as_index(alpha)
    mu = abs(m)
    ct = np.cos(theta)
    zero = np.zeros(np.broadcast(phi, theta, chi).shape)
    ylm = eta(l) * assoc_legendre_K(l, mu, ct) * azimuthal(m, phi)
    # d/dchi [sin^l T^{(l+1)}] = l cos sin^{l-1} T^{(l+1)} - sin^{l+1} T^{(l+2)}
    dchi_rad = -_scaled_cheb(k, l, l + 2, l + 1, chi)
    if l == 0:
        return zero, zero, zero + dchi_rad * ylm
    dchi_rad = dchi_rad + l * np.cos(chi) * _scaled_cheb(k, l, l + 1, l - 1, chi)
    base = _scaled_cheb(k, l, l + 1, l - 1, chi)
    if m == 0:
        dphi = zero
    else:
        ratio = (
            legendre_tau(l, mu) * assoc_legendre_K(l + 1, mu + 1, ct)
            + legendre_tau(l, -mu) * assoc_legendre_K(l + 1, mu - 1, ct)
        ) / (2 * mu)
        dphi = base * (-m) * eta(l) * azimuthal(-m, phi) * ratio
    dtheta = -base * eta(l) * azimuthal(m, phi) * assoc_legendre_K_theta_derivative(l, mu, theta)
    return zero + dphi, zero + dtheta, zero + dchi_rad * ylm


def y_alpha_angular_derivatives(alpha, p):
    d = angular_derivatives_angles(alpha, p.phi, p.theta, p.chi)
    return tuple(float(v) for v in d)

