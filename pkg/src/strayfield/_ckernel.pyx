# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled basis tables; same layout and recurrences as ``_kernel_py``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt
from libc.stdlib cimport malloc, free

cnp.import_array()


def fill_tables(const double[:, ::1] pts, int n_max, bint grad, dict cst,
                double[:, ::1] radial_w, double[:, ::1] radial_p, double[:, ::1] radial_q,
                double[:, ::1] ang_y, double[:, ::1] ang_dphi, double[:, ::1] ang_dtheta,
                double[:, ::1] e_r, double[:, ::1] e_theta, double[:, ::1] e_phi):
    cdef double[::1] start = cst["start"]
    cdef double[:, ::1] gA = cst["gA"]
    cdef double[:, ::1] gB = cst["gB"]
    cdef double[::1] dq = cst["dq"]
    cdef double[::1] kdiag = cst["kdiag"]
    cdef double[::1] ksub = cst["ksub"]
    cdef double[:, ::1] kA = cst["kA"]
    cdef double[:, ::1] kB = cst["kB"]
    cdef double[::1] eta = cst["eta"]
    cdef double[:, ::1] c_minus = cst["c_minus"]
    cdef double[:, ::1] c_plus = cst["c_plus"]
    cdef double[:, ::1] tau_p = cst["tau_p"]
    cdef double[:, ::1] tau_m = cst["tau_m"]

    cdef Py_ssize_t npts = pts.shape[0]
    cdef int lmax = n_max + 1
    cdef int stride = lmax + 1
    cdef double *g = <double *> malloc(stride * stride * sizeof(double))
    cdef double *K = <double *> malloc(stride * stride * sizeof(double))
    cdef double *cm = <double *> malloc((stride + 1) * sizeof(double))
    cdef double *sm = <double *> malloc((stride + 1) * sizeof(double))
    cdef double *spow = <double *> malloc((stride + 1) * sizeof(double))
    if g == NULL or K == NULL or cm == NULL or sm == NULL or spow == NULL:
        free(g); free(K); free(cm); free(sm); free(spow)
        raise MemoryError()
    cdef double inv_sqrt2 = 1.0 / sqrt(2.0)
    cdef Py_ssize_t b
    cdef int l, k, n, m, mu, j, i
    cdef double x0, x1, x2, r2, r, rh, den, c, s, omega, omega3, ct, st, cp, sp
    cdef double a, da, ym, ymm, kl, k_below, k_above, diag, gk, e
    cdef double *gl
    cdef double *Kl
    try:
        for b in range(npts):
            x0 = pts[b, 0]; x1 = pts[b, 1]; x2 = pts[b, 2]
            r2 = x0 * x0 + x1 * x1 + x2 * x2
            r = sqrt(r2)
            rh = sqrt(x0 * x0 + x1 * x1)
            den = r2 + 1.0
            c = (r2 - 1.0) / den
            s = 2.0 * r / den
            omega = sqrt(2.0 / den)
            omega3 = omega * omega * omega
            if r > 0:
                ct = x2 / r
                st = rh / r
            else:
                ct = 1.0
                st = 0.0
            if rh > 0:
                cp = x0 / rh
                sp = x1 / rh
            else:
                cp = 1.0
                sp = 0.0

            for l in range(lmax + 1):
                gl = g + l * stride
                if l <= n_max:
                    gl[0] = start[l]
                if l + 1 <= n_max:
                    gl[1] = gA[l, 1] * c * gl[0]
                for n in range(2, n_max + 1 - l):
                    gl[n] = gA[l, n] * c * gl[n - 1] - gB[l, n] * gl[n - 2]

            spow[0] = 1.0
            for l in range(1, lmax + 1):
                spow[l] = spow[l - 1] * s

            j = 0
            for l in range(n_max + 1):
                gl = g + l * stride
                for k in range(l, n_max + 1):
                    gk = gl[k - l]
                    a = spow[l] * gk
                    radial_w[b, j] = omega * a
                    if grad:
                        if l > 0:
                            radial_p[b, j] = omega3 * spow[l - 1] * gk
                            da = l * c * spow[l - 1] * gk
                        else:
                            radial_p[b, j] = 0.0
                            da = 0.0
                        if k > l:
                            da = da - dq[j] * spow[l] * s * g[(l + 1) * stride + k - l - 1]
                        radial_q[b, j] = -omega3 * da - 0.5 * omega * s * a
                    j += 1

            diag = 1.0
            for mu in range(lmax + 1):
                if mu > 0:
                    diag = diag * kdiag[mu] * st
                K[mu * stride + mu] = diag
                if mu + 1 <= lmax:
                    K[(mu + 1) * stride + mu] = ksub[mu] * ct * diag
                for l in range(mu + 2, lmax + 1):
                    K[l * stride + mu] = kA[l, mu] * ct * K[(l - 1) * stride + mu] - kB[l, mu] * K[(l - 2) * stride + mu]

            cm[0] = 1.0
            sm[0] = 0.0
            for m in range(1, lmax + 1):
                cm[m] = cm[m - 1] * cp - sm[m - 1] * sp
                sm[m] = sm[m - 1] * cp + cm[m - 1] * sp

            for l in range(n_max + 1):
                e = eta[l]
                Kl = K + l * stride
                for m in range(-l, l + 1):
                    mu = m if m >= 0 else -m
                    i = l * l + l + m
                    if m > 0:
                        ym = cm[m]
                        ymm = sm[m]
                    elif m < 0:
                        ym = sm[mu]
                        ymm = cm[mu]
                    else:
                        ym = inv_sqrt2
                        ymm = inv_sqrt2
                    ang_y[b, i] = e * Kl[mu] * ym
                    if not grad:
                        continue
                    if mu == 0:
                        k_below = -Kl[1] if l >= 1 else 0.0
                    else:
                        k_below = Kl[mu - 1]
                    k_above = Kl[mu + 1] if mu + 1 <= l else 0.0
                    ang_dtheta[b, i] = e * ym * (c_minus[l, mu] * k_below - c_plus[l, mu] * k_above)
                    if mu > 0:
                        ang_dphi[b, i] = -m * e * ymm * (tau_p[l, mu] * Kl[stride + mu + 1]
                                                         + tau_m[l, mu] * Kl[stride + mu - 1])
                    else:
                        ang_dphi[b, i] = 0.0

            if grad:
                e_r[b, 0] = cp * st; e_r[b, 1] = sp * st; e_r[b, 2] = ct
                e_theta[b, 0] = cp * ct; e_theta[b, 1] = sp * ct; e_theta[b, 2] = -st
                e_phi[b, 0] = -sp; e_phi[b, 1] = cp; e_phi[b, 2] = 0.0
    finally:
        free(g); free(K); free(cm); free(sm); free(spow)
