"""Arar-Boulmezaoud functions on R^3 and their analytic gradients.

``W_alpha(x) = (2 / (|x|^2 + 1))^{1/2} Y_alpha(pi^{-1}(x))`` where ``pi`` is
the stereographic projection from the north pole of S^3.
"""
from dataclasses import dataclass
import math
import threading

import numpy as np

from . import s3harm
from .s3harm import S3Point, as_index

NORTH_POLE_TOL = 1e-12


class NorthPoleError(ValueError):
    """Raised when a point too close to the projection pole is mapped to R^3."""


@dataclass(frozen=True)
class GradientSample:
    w: float
    grad: np.ndarray


def stereo_inverse_array(x):
    """(..., 3) points of R^3 -> (..., 4) points of S^3."""
    x = np.asarray(x, dtype=float)
    r2 = np.sum(x * x, axis=-1, keepdims=True)
    den = r2 + 1.0
    return np.concatenate([2.0 * x / den, (r2 - 1.0) / den], axis=-1)


def stereo_inverse(x):
    return S3Point.from_cartesian(stereo_inverse_array(np.asarray(x, dtype=float).reshape(3)))


def stereo_forward(xi):
    """Stereographic projection S^3 minus the north pole -> R^3."""
    if isinstance(xi, S3Point):
        xi = xi.xi
    xi = np.asarray(xi, dtype=float)
    if xi[3] >= 1.0 - NORTH_POLE_TOL:
        raise NorthPoleError("the north pole (0, 0, 0, 1) has no image in R^3")
    return xi[:3] / (1.0 - xi[3])


def hyperspherical_angles(x):
    """Hyperspherical angles (phi, theta, chi) of pi^{-1}(x), vectorized over (..., 3).

    chi is computed as atan2(2r, r^2 - 1), which keeps full precision near
    the origin where arccos(xi_4) would not.
    """
    x = np.asarray(x, dtype=float)
    r = np.sqrt(np.sum(x * x, axis=-1))
    rho = np.hypot(x[..., 0], x[..., 1])
    chi = np.arctan2(2.0 * r, r * r - 1.0)
    theta = np.arctan2(rho, x[..., 2])
    phi = np.mod(np.arctan2(x[..., 1], x[..., 0]), 2 * math.pi)
    return phi, theta, chi


def w_alpha_array(alpha, x):
    x = np.asarray(x, dtype=float)
    phi, theta, chi = hyperspherical_angles(x)
    r2 = np.sum(x * x, axis=-1)
    return np.sqrt(2.0 / (r2 + 1.0)) * s3harm.y_alpha_angles(alpha, phi, theta, chi)


def w_alpha(alpha, x):
    return float(w_alpha_array(alpha, np.asarray(x, dtype=float).reshape(3)))


def grad_w_alpha_array(alpha, x):
    """Values and gradients of W_alpha at (..., 3) points.

    ``grad W = (1 - xi_4)^{1/2} (V_alpha - Y_alpha xi_hat / 2)`` with
    ``V_alpha = (1 - cos chi) [e_phi, e_theta, -e_r] (dphi, dtheta, dchi)``
    built from the pole-safe angular derivatives.
    """
    x = np.asarray(x, dtype=float)
    phi, theta, chi = hyperspherical_angles(x)
    r2 = np.sum(x * x, axis=-1)
    den = r2 + 1.0
    one_minus_xi4 = 2.0 / den
    y = s3harm.y_alpha_angles(alpha, phi, theta, chi)
    dphi, dtheta, dchi = s3harm.angular_derivatives_angles(alpha, phi, theta, chi)

    cp, sp, ct, st = np.cos(phi), np.sin(phi), np.cos(theta), np.sin(theta)
    e_phi = np.stack([-sp, cp, np.zeros_like(cp)], axis=-1)
    e_theta = np.stack([cp * ct, sp * ct, -st], axis=-1)
    e_r = np.stack([cp * st, sp * st, ct], axis=-1)
    xi_hat = 2.0 * x / den[..., None]

    v = one_minus_xi4[..., None] * (
        e_phi * dphi[..., None] + e_theta * dtheta[..., None] - e_r * dchi[..., None]
    )
    sq = np.sqrt(one_minus_xi4)
    grad = sq[..., None] * (v - 0.5 * y[..., None] * xi_hat)
    return sq * y, grad


def grad_w_alpha(alpha, x):
    w, g = grad_w_alpha_array(alpha, np.asarray(x, dtype=float).reshape(3))
    return GradientSample(float(w), np.asarray(g, dtype=float).reshape(3))


# Closed forms for degree k <= 2, written in terms of x and s = |x|^2.
_S6 = math.sqrt(6.0)
CLOSED_FORMS = {
    (0, 0, 0): ("1/(pi (s+1)^(1/2))", lambda x, s: 1.0 / (math.pi * np.sqrt(s + 1))),
    (1, 0, 0): ("(2/pi)(s-1)/(s+1)^(3/2)", lambda x, s: 2 / math.pi * (s - 1) / (s + 1) ** 1.5),
    (1, 1, 0): ("(4/pi) x3/(s+1)^(3/2)", lambda x, s: 4 / math.pi * x[..., 2] / (s + 1) ** 1.5),
    (1, 1, 1): ("(4/pi) x1/(s+1)^(3/2)", lambda x, s: 4 / math.pi * x[..., 0] / (s + 1) ** 1.5),
    (1, 1, -1): ("(4/pi) x2/(s+1)^(3/2)", lambda x, s: 4 / math.pi * x[..., 1] / (s + 1) ** 1.5),
    (2, 0, 0): (
        "(1/pi)(3s^2-10s+3)/(s+1)^(5/2)",
        lambda x, s: (3 * s * s - 10 * s + 3) / (math.pi * (s + 1) ** 2.5),
    ),
    (2, 1, 0): (
        "(4 sqrt6/pi) x3 (s-1)/(s+1)^(5/2)",
        lambda x, s: 4 * _S6 / math.pi * x[..., 2] * (s - 1) / (s + 1) ** 2.5,
    ),
    (2, 1, 1): (
        "(4 sqrt6/pi) x1 (s-1)/(s+1)^(5/2)",
        lambda x, s: 4 * _S6 / math.pi * x[..., 0] * (s - 1) / (s + 1) ** 2.5,
    ),
    (2, 1, -1): (
        "(4 sqrt6/pi) x2 (s-1)/(s+1)^(5/2)",
        lambda x, s: 4 * _S6 / math.pi * x[..., 1] * (s - 1) / (s + 1) ** 2.5,
    ),
    (2, 2, 0): (
        "(4 sqrt2/pi)(3 x3^2 - s)/(s+1)^(5/2)",
        lambda x, s: 4 * math.sqrt(2) / math.pi * (3 * x[..., 2] ** 2 - s) / (s + 1) ** 2.5,
    ),
    (2, 2, 1): (
        "(8 sqrt6/pi) x1 x3/(s+1)^(5/2)",
        lambda x, s: 8 * _S6 / math.pi * x[..., 0] * x[..., 2] / (s + 1) ** 2.5,
    ),
    (2, 2, 2): (
        "(4 sqrt6/pi)(x1^2 - x2^2)/(s+1)^(5/2)",
        lambda x, s: 4 * _S6 / math.pi * (x[..., 0] ** 2 - x[..., 1] ** 2) / (s + 1) ** 2.5,
    ),
    (2, 2, -1): (
        "(8 sqrt6/pi) x2 x3/(s+1)^(5/2)",
        lambda x, s: 8 * _S6 / math.pi * x[..., 1] * x[..., 2] / (s + 1) ** 2.5,
    ),
    (2, 2, -2): (
        "(8 sqrt6/pi) x1 x2/(s+1)^(5/2)",
        lambda x, s: 8 * _S6 / math.pi * x[..., 0] * x[..., 1] / (s + 1) ** 2.5,
    ),
}


def closed_form(alpha, x):
    """Evaluate the tabulated closed form of W_alpha (k <= 2)."""
    x = np.asarray(x, dtype=float)
    s = np.sum(x * x, axis=-1)
    return CLOSED_FORMS[tuple(as_index(alpha))][1](x, s)


class NodeCache:
    """Gradients of W_alpha at the nodes of a quadrature rule.

    Keyed by (alpha, rule id).  Filled under a lock, read without one; a
    given entry is written once and never mutated afterwards.
    """

    def __init__(self):
        self._store = {}
        self._lock = threading.Lock()

    def gradients(self, alpha, rule):
        key = (tuple(as_index(alpha)), rule.uid)
        hit = self._store.get(key)
        if hit is not None:
            return hit
        with self._lock:
            hit = self._store.get(key)
            if hit is None:
                _, hit = grad_w_alpha_array(alpha, rule.nodes)
                hit.setflags(write=False)
                self._store[key] = hit
        return hit

    def __len__(self):
        return len(self._store)

    def clear(self):
        with self._lock:
            self._store.clear()
