"""Hot loops: basis tables over node batches, coefficient contraction and
series evaluation.

The compiled extension ``_ckernel`` is used when it imports; otherwise the
numpy implementation in ``_kernel_py`` takes over.  Set
``STRAYFIELD_BACKEND=python`` to force the fallback.
"""
import logging
import os

import numpy as np

from . import _kernel_py
from .s3harm import count_up_to, degree_offset

log = logging.getLogger(__name__)

try:
    if os.environ.get("STRAYFIELD_BACKEND", "").lower() == "python":
        raise ImportError("pure-python backend requested")
    from . import _ckernel
except ImportError:
    _ckernel = None

BACKEND = "compiled" if _ckernel is not None else "python"
DEFAULT_CHUNK = 1024


def available_backends():
    return ["compiled", "python"] if _ckernel is not None else ["python"]


def _resolve(backend):
    backend = backend or BACKEND
    if backend == "compiled" and _ckernel is None:
        raise RuntimeError("compiled kernel is not built")
    if backend not in ("compiled", "python"):
        raise ValueError(f"unknown backend {backend!r}")
    return backend


def basis_tables(points, n_max, grad=True, backend=None):
    """Separable factors of W_alpha and grad W_alpha at ``points``.

    Returns a dict of node-major arrays; see ``_kernel_py`` for the layout.
    """
    if _resolve(backend) == "python":
        return _kernel_py.basis_tables(points, n_max, grad=grad)
    pts = np.ascontiguousarray(points, dtype=float).reshape(-1, 3)
    npts = pts.shape[0]
    n_pairs = (n_max + 1) * (n_max + 2) // 2
    n_ang = (n_max + 1) ** 2
    cst = _kernel_py.constants(n_max)
    out = {"radial_w": np.empty((npts, n_pairs)), "ang_y": np.empty((npts, n_ang))}
    if grad:
        for key, width in (("radial_p", n_pairs), ("radial_q", n_pairs), ("ang_dphi", n_ang), ("ang_dtheta", n_ang)):
            out[key] = np.empty((npts, width))
        for key in ("e_r", "e_theta", "e_phi"):
            out[key] = np.empty((npts, 3))
        extra = [out[k] for k in ("radial_p", "radial_q")]
        ang = [out[k] for k in ("ang_dphi", "ang_dtheta")]
        fr = [out[k] for k in ("e_r", "e_theta", "e_phi")]
    else:
        dummy = np.empty((1, 1))
        extra, ang, fr = [dummy, dummy], [dummy, dummy], [dummy, dummy, dummy]
    _ckernel.fill_tables(pts, n_max, grad, cst, out["radial_w"], *extra, out["ang_y"], *ang, *fr)
    return out


class _IndexMap:
    """Column slices per l and their positions in the lexicographic coefficient vector."""

    def __init__(self, n_max):
        off = _kernel_py.pair_offsets(n_max)
        self.pairs = [slice(off[l], off[l] + n_max + 1 - l) for l in range(n_max + 1)]
        self.ang = [slice(l * l, (l + 1) ** 2) for l in range(n_max + 1)]
        self.pos = []
        for l in range(n_max + 1):
            ks = np.arange(l, n_max + 1)
            base = np.array([degree_offset(k) for k in ks]) + l * l + l
            self.pos.append(base[:, None] + np.arange(-l, l + 1)[None, :])


_INDEX_CACHE = {}


def index_map(n_max):
    if n_max not in _INDEX_CACHE:
        _INDEX_CACHE[n_max] = _IndexMap(n_max)
    return _INDEX_CACHE[n_max]


def _neumaier_add(total, comp, x):
    t = total + x
    big = np.abs(total) >= np.abs(x)
    comp += np.where(big, (total - t) + x, (x - t) + total)
    return t


def coefficient_vector(nodes, weights, mvals, n_max, backend=None, chunk=DEFAULT_CHUNK):
    """All integrals  sum_q w_q M(x_q) . grad W_alpha(x_q)  for degree <= n_max.

    Nodes are processed in fixed-size chunks in their given order; per-chunk
    partial sums are combined with Neumaier compensated summation, so the
    result does not depend on anything but the inputs and the chunk size.
    """
    nodes = np.ascontiguousarray(nodes, dtype=float).reshape(-1, 3)
    weights = np.asarray(weights, dtype=float).reshape(-1)
    mvals = np.asarray(mvals, dtype=float).reshape(-1, 3)
    imap = index_map(n_max)
    size = count_up_to(n_max)
    total = np.zeros(size)
    comp = np.zeros(size)
    part = np.empty(size)
    for i0 in range(0, nodes.shape[0], chunk):
        sl = slice(i0, i0 + chunk)
        t = basis_tables(nodes[sl], n_max, grad=True, backend=backend)
        wm = weights[sl, None] * mvals[sl]
        m_r = np.einsum("ij,ij->i", wm, t["e_r"])
        m_th = np.einsum("ij,ij->i", wm, t["e_theta"])
        m_ph = np.einsum("ij,ij->i", wm, t["e_phi"])
        f_rad = t["ang_y"] * m_r[:, None]
        f_tan = t["ang_dphi"] * m_ph[:, None] + t["ang_dtheta"] * m_th[:, None]
        for l in range(n_max + 1):
            ps, asl = imap.pairs[l], imap.ang[l]
            block = t["radial_q"][:, ps].T @ f_rad[:, asl] + t["radial_p"][:, ps].T @ f_tan[:, asl]
            part[imap.pos[l]] = block
        total = _neumaier_add(total, comp, part)
    return total + comp


def _blocks(coeffs, n_max):
    imap = index_map(n_max)
    return imap, [coeffs[imap.pos[l]] for l in range(n_max + 1)]


def series_values(coeffs, n_max, points, backend=None, chunk=DEFAULT_CHUNK):
    """sum_alpha coeffs[alpha] W_alpha(x) at each point."""
    pts = np.ascontiguousarray(points, dtype=float).reshape(-1, 3)
    imap, blocks = _blocks(np.asarray(coeffs, dtype=float), n_max)
    out = np.zeros(pts.shape[0])
    for i0 in range(0, pts.shape[0], chunk):
        sl = slice(i0, i0 + chunk)
        t = basis_tables(pts[sl], n_max, grad=False, backend=backend)
        acc = np.zeros(t["radial_w"].shape[0])
        for l in range(n_max + 1):
            h = t["radial_w"][:, imap.pairs[l]] @ blocks[l]
            acc += np.einsum("ij,ij->i", h, t["ang_y"][:, imap.ang[l]])
        out[sl] = acc
    return out


def series_gradients(coeffs, n_max, points, backend=None, chunk=DEFAULT_CHUNK):
    """sum_alpha coeffs[alpha] grad W_alpha(x) at each point, shape (n, 3)."""
    pts = np.ascontiguousarray(points, dtype=float).reshape(-1, 3)
    imap, blocks = _blocks(np.asarray(coeffs, dtype=float), n_max)
    out = np.zeros((pts.shape[0], 3))
    for i0 in range(0, pts.shape[0], chunk):
        sl = slice(i0, i0 + chunk)
        t = basis_tables(pts[sl], n_max, grad=True, backend=backend)
        g_ph = np.zeros(t["ang_y"].shape[0])
        g_th = np.zeros_like(g_ph)
        g_r = np.zeros_like(g_ph)
        for l in range(n_max + 1):
            ps, asl = imap.pairs[l], imap.ang[l]
            hp = t["radial_p"][:, ps] @ blocks[l]
            hq = t["radial_q"][:, ps] @ blocks[l]
            g_ph += np.einsum("ij,ij->i", hp, t["ang_dphi"][:, asl])
            g_th += np.einsum("ij,ij->i", hp, t["ang_dtheta"][:, asl])
            g_r += np.einsum("ij,ij->i", hq, t["ang_y"][:, asl])
        out[sl] = t["e_phi"] * g_ph[:, None] + t["e_theta"] * g_th[:, None] + t["e_r"] * g_r[:, None]
    return out


def dense_values(points, n_max, backend=None):
    """(n_points, |Lambda*_N|) matrix of W_alpha values, lexicographic columns."""
    t = basis_tables(points, n_max, grad=False, backend=backend)
    imap = index_map(n_max)
    out = np.empty((t["radial_w"].shape[0], count_up_to(n_max)))
    for l in range(n_max + 1):
        out[:, imap.pos[l]] = t["radial_w"][:, imap.pairs[l], None] * t["ang_y"][:, None, imap.ang[l]]
    return out


def dense_gradients(points, n_max, backend=None):
    """(n_points, |Lambda*_N|, 3) array of grad W_alpha."""
    t = basis_tables(points, n_max, grad=True, backend=backend)
    imap = index_map(n_max)
    out = np.empty((t["radial_w"].shape[0], count_up_to(n_max), 3))
    for l in range(n_max + 1):
        ps, asl = imap.pairs[l], imap.ang[l]
        p = t["radial_p"][:, ps, None, None]
        q = t["radial_q"][:, ps, None, None]
        tan = (t["ang_dphi"][:, asl, None] * t["e_phi"][:, None, :]
               + t["ang_dtheta"][:, asl, None] * t["e_theta"][:, None, :])
        rad = t["ang_y"][:, asl, None] * t["e_r"][:, None, :]
        out[:, imap.pos[l]] = p * tan[:, None] + q * rad[:, None]
    return out
