"""Pure numpy basis tables (fallback backend).

For a batch of points this evaluates, for every (k, l) pair and every
(l, m) pair up to degree ``n_max``, the separable factors of W_alpha and
grad W_alpha::

    W_alpha      = radial_w[k,l] * ang_y[l,m]
    grad W_alpha = radial_p[k,l] * (e_phi ang_dphi[l,m] + e_theta ang_dtheta[l,m])
                 + radial_q[k,l] * ang_y[l,m] * e_r

Radial factors come from a normalized Gegenbauer recurrence in k at fixed l,
so nothing overflows for large degrees.  Layout is node-major: every table is
``(n_points, n_entries)``.
"""
import math

import numpy as np


def pair_offsets(n_max):
    """Column offset of (k=l, l) in the radial tables; pairs are l-major."""
    return [l * (n_max + 1) - l * (l - 1) // 2 for l in range(n_max + 2)]


_CONST_CACHE = {}


def constants(n_max):
    """Recurrence coefficients shared by both backends (cached per degree)."""
    if n_max in _CONST_CACHE:
        return _CONST_CACHE[n_max]
    lmax = n_max + 1
    st = lmax + 1
    start = np.zeros(st)
    gA = np.zeros((st, st))  # g[l, n] = gA * c * g[l, n-1] - gB * g[l, n-2]
    gB = np.zeros((st, st))
    for l in range(st):
        log_a = math.log((l + 1) * math.pi / 2) + math.lgamma(2 * l + 2)
        start[l] = math.exp(l * math.log(2) + math.lgamma(l + 1) + math.log(l + 1) - 0.5 * log_a)
        rho = [0.0] * (st + 1)
        for k in range(l + 1, st + 1):
            rho[k] = math.sqrt((k + 1) * (k - l) / (k * (k + l + 1)))
        for n in range(1, st - l):
            k = l + n
            gA[l, n] = rho[k] * 2.0 * (n + l) / n
            if n >= 2:
                gB[l, n] = rho[k] * rho[k - 1] * (n + 2 * l) / n
    n_pairs = (n_max + 1) * (n_max + 2) // 2
    dq = np.zeros(n_pairs)
    j = 0
    for l in range(n_max + 1):
        for k in range(l, n_max + 1):
            dq[j] = math.sqrt((k + l + 2) * (k - l))
            j += 1
    kdiag = np.ones(st)
    ksub = np.zeros(st)
    kA = np.zeros((st, st))  # K[l, mu] = kA * t * K[l-1, mu] - kB * K[l-2, mu]
    kB = np.zeros((st, st))
    for mu in range(st):
        if mu > 0:
            kdiag[mu] = math.sqrt((2 * mu - 1) / (2 * mu))
        ksub[mu] = math.sqrt(2 * mu + 1)
        for l in range(mu + 2, st):
            d = math.sqrt(l * l - mu * mu)
            kA[l, mu] = (2 * l - 1) / d
            kB[l, mu] = math.sqrt((l - 1) ** 2 - mu * mu) / d
    eta = np.array([math.sqrt((2 * l + 1) / (2 * math.pi)) for l in range(st)])
    cm_ = np.zeros((st, st))
    cp_ = np.zeros((st, st))
    tp_ = np.zeros((st, st))
    tm_ = np.zeros((st, st))
    for l in range(st):
        for mu in range(l + 1):
            cm_[l, mu] = 0.5 * math.sqrt((l + mu) * (l - mu + 1))
            cp_[l, mu] = 0.5 * math.sqrt((l - mu) * (l + mu + 1))
            tp_[l, mu] = math.sqrt((l + mu + 2) * (l + mu + 1)) / (2 * mu) if mu else 0.0
            tm_[l, mu] = math.sqrt((l - mu + 2) * (l - mu + 1)) / (2 * mu) if mu else 0.0
    out = dict(
        start=start, gA=gA, gB=gB, dq=dq, kdiag=kdiag, ksub=ksub, kA=kA, kB=kB,
        eta=eta, c_minus=cm_, c_plus=cp_, tau_p=tp_, tau_m=tm_,
    )
    _CONST_CACHE[n_max] = out
    return out


def point_geometry(points):
    x = np.ascontiguousarray(points, dtype=float).reshape(-1, 3)
    r2 = np.einsum("ij,ij->i", x, x)
    r = np.sqrt(r2)
    rho = np.hypot(x[:, 0], x[:, 1])
    den = r2 + 1.0
    c = (r2 - 1.0) / den
    s = 2.0 * r / den
    omega = np.sqrt(2.0 / den)
    safe_r = np.where(r > 0, r, 1.0)
    safe_rho = np.where(rho > 0, rho, 1.0)
    ct = np.where(r > 0, x[:, 2] / safe_r, 1.0)
    st = np.where(r > 0, rho / safe_r, 0.0)
    cp = np.where(rho > 0, x[:, 0] / safe_rho, 1.0)
    sp = np.where(rho > 0, x[:, 1] / safe_rho, 0.0)
    return c, s, omega, ct, st, cp, sp


def frames(ct, st, cp, sp):
    e_r = np.stack([cp * st, sp * st, ct], axis=1)
    e_theta = np.stack([cp * ct, sp * ct, -st], axis=1)
    e_phi = np.stack([-sp, cp, np.zeros_like(cp)], axis=1)
    return e_r, e_theta, e_phi


def _gegenbauer_tables(c, n_max, cst):
    """g[l][k - l] for l <= n_max + 1 and l <= k <= n_max."""
    start, gA, gB = cst["start"], cst["gA"], cst["gB"]
    out = []
    for l in range(n_max + 2):
        rows = []
        if l <= n_max:
            rows.append(np.full_like(c, start[l]))
        if l + 1 <= n_max:
            rows.append(gA[l, 1] * c * rows[0])
        for n in range(2, n_max + 1 - l):
            rows.append(gA[l, n] * c * rows[-1] - gB[l, n] * rows[-2])
        out.append(rows)
    return out


def _legendre_table(ct, st, lmax, cst):
    """K[l][mu] (mu >= 0) up to degree lmax."""
    kdiag, ksub, kA, kB = cst["kdiag"], cst["ksub"], cst["kA"], cst["kB"]
    K = [[None] * (l + 1) for l in range(lmax + 1)]
    diag = np.ones_like(ct)
    for mu in range(lmax + 1):
        if mu > 0:
            diag = diag * kdiag[mu] * st
        K[mu][mu] = diag
        if mu + 1 <= lmax:
            K[mu + 1][mu] = ksub[mu] * ct * diag
        for l in range(mu + 2, lmax + 1):
            K[l][mu] = kA[l, mu] * ct * K[l - 1][mu] - kB[l, mu] * K[l - 2][mu]
    return K


def basis_tables(points, n_max, grad=True):
    cst = constants(n_max)
    c, s, omega, ct, st, cp, sp = point_geometry(points)
    npts = c.shape[0]
    n_pairs = (n_max + 1) * (n_max + 2) // 2
    n_ang = (n_max + 1) ** 2
    g = _gegenbauer_tables(c, n_max, cst)
    dq = cst["dq"]

    radial_w = np.empty((n_pairs, npts))
    radial_p = np.zeros((n_pairs, npts)) if grad else None
    radial_q = np.empty((n_pairs, npts)) if grad else None
    omega3 = omega * omega * omega
    s_pow = [np.ones_like(s)]
    for l in range(1, n_max + 2):
        s_pow.append(s_pow[-1] * s)
    j = 0
    for l in range(n_max + 1):
        for k in range(l, n_max + 1):
            gk = g[l][k - l]
            a = s_pow[l] * gk
            radial_w[j] = omega * a
            if grad:
                if l > 0:
                    radial_p[j] = omega3 * s_pow[l - 1] * gk
                    da = l * c * s_pow[l - 1] * gk
                else:
                    da = np.zeros_like(c)
                if k > l:
                    da = da - dq[j] * s_pow[l] * s * g[l + 1][k - l - 1]
                radial_q[j] = -omega3 * da - 0.5 * omega * s * a
            j += 1

    K = _legendre_table(ct, st, n_max + 1, cst)
    cos_m = [np.ones_like(cp)]
    sin_m = [np.zeros_like(cp)]
    for m in range(1, n_max + 2):
        cos_m.append(cos_m[-1] * cp - sin_m[-1] * sp)
        sin_m.append(sin_m[-1] * cp + cos_m[-2] * sp)
    half = np.full_like(cp, 1.0 / math.sqrt(2.0))

    def y_m(m):
        if m > 0:
            return cos_m[m]
        if m < 0:
            return sin_m[-m]
        return half

    eta = cst["eta"]
    ang_y = np.empty((n_ang, npts))
    ang_dphi = np.zeros((n_ang, npts)) if grad else None
    ang_dtheta = np.empty((n_ang, npts)) if grad else None
    for l in range(n_max + 1):
        for m in range(-l, l + 1):
            mu = abs(m)
            i = l * l + l + m
            ym = y_m(m)
            ang_y[i] = eta[l] * K[l][mu] * ym
            if not grad:
                continue
            # d/dtheta K_l^mu(cos th) = c_{l,-mu} K_l^{mu-1} - c_{l,mu} K_l^{mu+1}; K_l^{-1} = -K_l^1
            if mu == 0:
                k_below = -K[l][1] if l >= 1 else 0.0
            else:
                k_below = K[l][mu - 1]
            k_above = K[l][mu + 1] if mu + 1 <= l else 0.0
            ang_dtheta[i] = eta[l] * ym * (cst["c_minus"][l, mu] * k_below - cst["c_plus"][l, mu] * k_above)
            if mu > 0:
                # K_l^mu / sin th via the degree-raising recurrence, no division by sin th
                ratio = cst["tau_p"][l, mu] * K[l + 1][mu + 1] + cst["tau_m"][l, mu] * K[l + 1][mu - 1]
                ang_dphi[i] = -m * eta[l] * y_m(-m) * ratio

    tables = {"radial_w": radial_w.T, "ang_y": ang_y.T}
    if grad:
        e_r, e_theta, e_phi = frames(ct, st, cp, sp)
        tables.update(
            radial_p=radial_p.T,
            radial_q=radial_q.T,
            ang_dphi=ang_dphi.T,
            ang_dtheta=ang_dtheta.T,
            e_r=e_r,
            e_theta=e_theta,
            e_phi=e_phi,
        )
    return tables
