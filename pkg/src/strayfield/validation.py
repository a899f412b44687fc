"""Basis self-checks: closed forms, Gram matrices through the inverse
stereographic map, and the finite-difference eigen-relation.

Used by ``strayfield basis-check``.
"""
from dataclasses import dataclass, field
import math

import numpy as np

from . import abbasis, kernel, s3harm
from .s3harm import indices_up_to


def s3_rule(n_chi, n_theta, n_phi, chi_nodes="chebyshev"):
    """Product rule on S^3 in (phi, theta, chi).

    With ``chi_nodes="chebyshev"`` cos(chi) uses Gauss-Chebyshev nodes of the
    second kind, exact for polynomials in xi.  ``"legendre"`` puts
    Gauss-Legendre nodes on chi itself, which suits integrands that are
    smooth in chi but not polynomial in cos(chi) (pulled-back gradients).
    cos(theta) is Gauss-Legendre, phi the trapezoid rule; no node is a pole.
    """
    if chi_nodes == "chebyshev":
        # f sin^2(chi) dchi = f(t) sqrt(1 - t^2) dt with t = cos(chi)
        chi = np.arange(1, n_chi + 1) * math.pi / (n_chi + 1)
        w_chi = math.pi / (n_chi + 1) * np.sin(chi) ** 2
    elif chi_nodes == "legendre":
        u, wu = np.polynomial.legendre.leggauss(n_chi)
        chi = 0.5 * math.pi * (u + 1.0)
        w_chi = 0.5 * math.pi * wu * np.sin(chi) ** 2
    else:
        raise ValueError(f"unknown chi node family {chi_nodes!r}")
    ct, wt = np.polynomial.legendre.leggauss(n_theta)
    theta = np.arccos(ct)
    phi = 2 * math.pi * np.arange(n_phi) / n_phi
    wp = np.full(n_phi, 2 * math.pi / n_phi)
    P, T, C = np.meshgrid(phi, theta, chi, indexing="ij")
    W = np.einsum("i,j,k->ijk", wp, wt, w_chi)
    return P.ravel(), T.ravel(), C.ravel(), W.ravel()


def _pullback_points(phi, theta, chi):
    """x = pi(xi) for the S^3 point with angles (phi, theta, chi)."""
    r = np.sin(chi) / (1.0 - np.cos(chi))
    st = np.sin(theta)
    return np.stack([r * st * np.cos(phi), r * st * np.sin(phi), r * np.cos(theta)], axis=-1)


def _rule_size(kmax):
    n = kmax + 4
    return n, n + 1, 2 * n + 2


def s3_gram(kmax):
    """Gram matrix of Y_alpha on S^3 (direct closed-form evaluation)."""
    phi, theta, chi, w = s3_rule(*_rule_size(kmax))
    idx = indices_up_to(kmax)
    Y = np.stack([s3harm.y_alpha_angles(a, phi, theta, chi) for a in idx], axis=1)
    return (Y * w[:, None]).T @ Y


def weighted_r3_gram(kmax, backend=None):
    """int_R3 W_a W_b (|x|^2+1)^-2 dx, evaluated on S^3 nodes mapped to R^3."""
    phi, theta, chi, w = s3_rule(*_rule_size(kmax))
    x = _pullback_points(phi, theta, chi)
    s = np.sum(x * x, axis=1) + 1.0
    jac = (s / 2.0) ** 3  # dx = ((|x|^2+1)/2)^3 dsigma
    W = kernel.dense_values(x, kmax, backend=backend)
    ww = w * jac / s**2
    return (W * ww[:, None]).T @ W


def gradient_gram(kmax, backend=None):
    """int_R3 grad W_a . grad W_b dx, evaluated on S^3 nodes mapped to R^3."""
    phi, theta, chi, w = s3_rule(4 * kmax + 16, kmax + 6, 2 * kmax + 12, chi_nodes="legendre")
    x = _pullback_points(phi, theta, chi)
    s = np.sum(x * x, axis=1) + 1.0
    G = kernel.dense_gradients(x, kmax, backend=backend)
    ww = w * (s / 2.0) ** 3
    return np.einsum("q,qad,qbd->ab", ww, G, G)


def expected_gradient_gram(kmax):
    return np.diag([(2 * a.k + 1) * (2 * a.k + 3) / 4.0 for a in indices_up_to(kmax)])


def fd_laplacian(alpha, x, h=1e-3):
    """Fourth-order central-difference Laplacian of W_alpha."""
    x = np.asarray(x, dtype=float)
    f0 = abbasis.w_alpha_array(alpha, x)
    lap = np.zeros_like(f0)
    for d in range(3):
        e = np.zeros(3)
        e[d] = h
        fp1 = abbasis.w_alpha_array(alpha, x + e)
        fm1 = abbasis.w_alpha_array(alpha, x - e)
        fp2 = abbasis.w_alpha_array(alpha, x + 2 * e)
        fm2 = abbasis.w_alpha_array(alpha, x - 2 * e)
        lap += (-fp2 + 16 * fp1 - 30 * f0 + 16 * fm1 - fm2) / (12 * h * h)
    return f0, lap


def eigen_ratio(alpha, x, h=1e-3):
    """-Delta W (|x|^2+1)^2 / W, which should equal (2k+1)(2k+3)."""
    x = np.asarray(x, dtype=float)
    f0, lap = fd_laplacian(alpha, x, h)
    s = np.sum(x * x, axis=-1) + 1.0
    return -lap * s * s / f0


def random_points(n, seed, scale=1.5):
    rng = np.random.default_rng(seed)
    return rng.normal(scale=scale, size=(n, 3))


@dataclass
class CheckReport:
    failures: list = field(default_factory=list)
    lines: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.failures

    def record(self, name, value, tol, alpha=None):
        good = bool(value <= tol)
        tag = "" if alpha is None else f" alpha={tuple(alpha)}"
        self.lines.append(f"{'PASS' if good else 'FAIL'} {name}{tag}: {value:.3e} (tol {tol:.1e})")
        if not good:
            self.failures.append((name, None if alpha is None else tuple(alpha), value))


def closed_form_deviations(n_points=100, seed=0):
    x = random_points(n_points, seed)
    out = {}
    for alpha in sorted(abbasis.CLOSED_FORMS):
        out[alpha] = float(np.max(np.abs(abbasis.w_alpha_array(alpha, x) - abbasis.closed_form(alpha, x))))
    return out


def run_basis_check(kmax=4, n_points=100, seed=0, eigen_points=5):
    rep = CheckReport()
    for alpha, dev in closed_form_deviations(n_points, seed).items():
        rep.record("closed-form", dev, 1e-10, alpha)
    idx = indices_up_to(kmax)
    g = s3_gram(kmax)
    for i, a in enumerate(idx):
        rep.record("s3-orthonormality", float(np.max(np.abs(g[i] - np.eye(len(idx))[i]))), 1e-9, a)
    g = weighted_r3_gram(kmax)
    rep.record("weighted-r3-orthogonality", float(np.max(np.abs(g - np.eye(len(idx)) / 4))), 1e-8)
    g = gradient_gram(kmax)
    ref = expected_gradient_gram(kmax)
    rel = np.max(np.abs(g - ref)) / np.max(np.abs(ref))
    rep.record("gradient-orthogonality", float(rel), 1e-6)
    pts = random_points(eigen_points, seed + 1, scale=0.8)
    for a in indices_up_to(min(kmax, 4)):
        f0 = abbasis.w_alpha_array(a, pts)
        use = np.abs(f0) > 1e-3 * np.max(np.abs(f0))
        r = eigen_ratio(a, pts[use])
        target = (2 * a.k + 1) * (2 * a.k + 3)
        rep.record("eigen-relation", float(np.max(np.abs(r / target - 1))), 1e-4, a)
    return rep
