"""Sample domains, quadrature rules and the coefficient integrals

    c_alpha = int_Omega M . grad W_alpha dx.
"""
import csv
from dataclasses import dataclass, field
import itertools
import math

import numpy as np

from . import abbasis, kernel
from .s3harm import as_index

_UIDS = itertools.count(1)


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SampleDomain:
    """A ball, an axis-aligned box or a weighted node cloud."""

    kind: str
    radius: float = 0.0
    center: tuple = (0.0, 0.0, 0.0)
    lo: tuple = ()
    hi: tuple = ()
    cloud_weight: float = 0.0

    def __post_init__(self):
        if self.kind == "ball":
            if not self.radius > 0:
                raise ValueError("ball radius must be positive")
        elif self.kind == "box":
            if len(self.lo) != 3 or len(self.hi) != 3:
                raise ValueError("box corners must be 3-vectors")
            if not all(a < b for a, b in zip(self.lo, self.hi)):
                raise ValueError(f"degenerate box: lo={self.lo} hi={self.hi}")
        elif self.kind == "cloud":
            if not self.cloud_weight > 0:
                raise ValueError("cloud must carry positive total weight")
        else:
            raise ValueError(f"unknown domain kind {self.kind!r}")

    @classmethod
    def ball(cls, radius, center=(0.0, 0.0, 0.0)):
        return cls("ball", radius=float(radius), center=tuple(float(c) for c in center))

    @classmethod
    def box(cls, lo, hi):
        return cls("box", lo=tuple(float(v) for v in lo), hi=tuple(float(v) for v in hi))

    @classmethod
    def cube(cls, half):
        return cls.box((-half,) * 3, (half,) * 3)

    @property
    def volume(self):
        if self.kind == "ball":
            return 4.0 / 3.0 * math.pi * self.radius**3
        if self.kind == "box":
            return math.prod(b - a for a, b in zip(self.lo, self.hi))
        return self.cloud_weight

    def contains(self, x, tol=0.0):
        x = np.asarray(x, dtype=float).reshape(-1, 3)
        if self.kind == "ball":
            return np.linalg.norm(x - np.asarray(self.center), axis=1) <= self.radius + tol
        if self.kind == "box":
            return np.all((x >= np.asarray(self.lo) - tol) & (x <= np.asarray(self.hi) + tol), axis=1)
        raise ValueError("a node cloud has no membership test")

    def describe(self):
        if self.kind == "ball":
            return {"kind": "ball", "radius": self.radius, "center": list(self.center)}
        if self.kind == "box":
            return {"kind": "box", "lo": list(self.lo), "hi": list(self.hi)}
        return {"kind": "cloud", "volume": self.cloud_weight}


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    order: int
    domain: SampleDomain
    resolution: dict = field(default_factory=dict)
    field_values: np.ndarray = None  # only for clouds read from file
    uid: int = field(default_factory=lambda: next(_UIDS))

    def __len__(self):
        return self.weights.shape[0]

    def integrate(self, values):
        """Weighted sum of per-node values, compensated and in node order."""
        v = np.asarray(values, dtype=float).reshape(len(self), -1)
        out = [math.fsum(c) for c in (self.weights[:, None] * v).T]
        return out[0] if len(out) == 1 else np.array(out)


def build_box_rule(domain, n_per_axis):
    """Tensor Gauss-Legendre rule on a box; exact for degree 2n-1 per axis."""
    if domain.kind != "box":
        raise ValueError("build_box_rule needs a box domain")
    n = int(n_per_axis)
    if n < 2:
        raise ValueError("n_per_axis must be at least 2")
    t, w = np.polynomial.legendre.leggauss(n)
    axes = []
    for a, b in zip(domain.lo, domain.hi):
        h = 0.5 * (b - a)
        axes.append((0.5 * (a + b) + h * t, h * w))
    X, Y, Z = np.meshgrid(axes[0][0], axes[1][0], axes[2][0], indexing="ij")
    WX, WY, WZ = np.meshgrid(axes[0][1], axes[1][1], axes[2][1], indexing="ij")
    nodes = np.stack([X.ravel(), Y.ravel(), Z.ravel()], axis=1)
    weights = (WX * WY * WZ).ravel()
    return QuadratureRule(_frozen(nodes), _frozen(weights), 2 * n - 1, domain, {"n_per_axis": n})


def build_ball_rule(domain, n_radial, n_theta, n_phi):
    """Spherical product rule: Gauss-Legendre in r (weight r^2) and cos theta,
    trapezoid in phi.  No node sits at r = 0 or on the axis.
    """
    if domain.kind != "ball":
        raise ValueError("build_ball_rule needs a ball domain")
    n_radial, n_theta, n_phi = int(n_radial), int(n_theta), int(n_phi)
    if min(n_radial, n_theta, n_phi) < 2:
        raise ValueError("all node counts must be at least 2")
    r0 = domain.radius
    tr, wr = np.polynomial.legendre.leggauss(n_radial)
    r = 0.5 * r0 * (tr + 1.0)
    wr = 0.5 * r0 * wr * r * r
    ct, wt = np.polynomial.legendre.leggauss(n_theta)
    st = np.sqrt(1.0 - ct * ct)
    phi = 2.0 * math.pi * np.arange(n_phi) / n_phi
    wp = np.full(n_phi, 2.0 * math.pi / n_phi)
    R, CT, PH = np.meshgrid(r, ct, phi, indexing="ij")
    ST = np.meshgrid(r, st, phi, indexing="ij")[1]
    W = np.einsum("i,j,k->ijk", wr, wt, wp)
    nodes = np.stack([R * ST * np.cos(PH), R * ST * np.sin(PH), R * CT], axis=-1).reshape(-1, 3)
    nodes = nodes + np.asarray(domain.center)
    order = min(2 * n_radial - 3, 2 * n_theta - 1, n_phi - 1)
    res = {"n_radial": n_radial, "n_theta": n_theta, "n_phi": n_phi}
    return QuadratureRule(_frozen(nodes), _frozen(W.ravel()), order, domain, res)


class CloudFormatError(ValueError):
    pass


CLOUD_COLUMNS = ("x", "y", "z", "weight", "Mx", "My", "Mz")


def load_cloud(path):
    """Read a node cloud CSV (x,y,z,weight,Mx,My,Mz with header).

    Returns ``(rule, field)``.  Errors name the offending line.
    """
    nodes, weights, mvals = [], [], []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CloudFormatError(f"{path}: empty file, header required") from None
        if tuple(h.strip() for h in header) != CLOUD_COLUMNS:
            raise CloudFormatError(f"{path}:1: header must be {','.join(CLOUD_COLUMNS)}")
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 7:
                raise CloudFormatError(f"{path}:{line}: expected 7 columns, got {len(row)}")
            try:
                vals = [float(c) for c in row]
            except ValueError as exc:
                raise CloudFormatError(f"{path}:{line}: {exc}") from None
            if not all(math.isfinite(v) for v in vals):
                raise CloudFormatError(f"{path}:{line}: non-finite value")
            if vals[3] <= 0:
                raise CloudFormatError(f"{path}:{line}: weight must be positive, got {vals[3]}")
            nodes.append(vals[:3])
            weights.append(vals[3])
            mvals.append(vals[4:])
    if not nodes:
        raise CloudFormatError(f"{path}: no nodes")
    weights = _frozen(weights)
    domain = SampleDomain("cloud", cloud_weight=math.fsum(weights))
    mvals = _frozen(mvals)
    rule = QuadratureRule(_frozen(nodes), weights, 0, domain, {"cloud_nodes": len(nodes)}, field_values=mvals)
    return rule, MagnetizationField.tabulated(rule)


@dataclass(frozen=True, eq=False)
class MagnetizationField:
    """Vectorized M: (n, 3) points -> (n, 3) vectors."""

    evaluator: object
    is_constant: bool = False
    divergence_free_tangential: bool = False
    unit_norm: bool = False
    label: str = "custom"
    bound_rule: int = 0  # uid of the only rule a tabulated field can serve

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.asarray(self.evaluator(x.reshape(-1, 3)), dtype=float).reshape(-1, 3)
        return out.reshape(x.shape) if x.ndim == 1 else out

    def sample(self, rule):
        if self.bound_rule:
            if rule.uid != self.bound_rule:
                raise ValueError("tabulated field is only defined on its own node cloud")
            return rule.field_values
        out = self(rule.nodes)
        if self.unit_norm:
            dev = np.max(np.abs(np.linalg.norm(out, axis=1) - 1.0)) if len(out) else 0.0
            if dev > 1e-12:
                raise ValueError(f"|M| = 1 violated at a node (deviation {dev:.3g})")
        return out

    @classmethod
    def constant(cls, vec, label=None):
        v = np.asarray(vec, dtype=float).reshape(3)
        unit = bool(abs(np.linalg.norm(v) - 1.0) < 1e-14)
        return cls(
            lambda x: np.broadcast_to(v, x.shape).copy(),
            is_constant=True,
            unit_norm=unit,
            label=label or f"constant{tuple(float(c) for c in v)}",
        )

    @classmethod
    def tabulated(cls, rule):
        return cls(lambda x: rule.field_values, label="cloud", bound_rule=rule.uid)

    def l2_norm_squared(self, rule):
        m = self.sample(rule)
        return rule.integrate(np.einsum("ij,ij->i", m, m))


@dataclass(frozen=True)
class ResolutionPolicy:
    """Node counts for a degree-N coefficient table.

    Balls get ``ceil(ball_slope * (N + 1)) + ball_extra`` Gauss nodes in r and
    in cos(theta), and ``phi_factor`` times that many in phi.  Boxes get
    ``ceil(box_slope * (N + 1)) + box_extra`` per axis.  Counts never drop
    below ``minimum``.
    """

    ball_slope: float = 0.5
    ball_extra: int = 4
    box_slope: float = 1.0
    box_extra: int = 8
    minimum: int = 12
    phi_factor: int = 2

    def ball_counts(self, n_max):
        q = max(math.ceil(self.ball_slope * (n_max + 1)) + self.ball_extra, self.minimum)
        return q, q, self.phi_factor * q

    def box_count(self, n_max):
        return max(math.ceil(self.box_slope * (n_max + 1)) + self.box_extra, self.minimum)

    def refined(self, factor=2):
        """Every node count multiplied by ``factor``."""
        return ResolutionPolicy(self.ball_slope * factor, self.ball_extra * factor,
                                self.box_slope * factor, self.box_extra * factor,
                                self.minimum * factor, self.phi_factor)

    def rule_for(self, domain, n_max):
        if domain.kind == "ball":
            return build_ball_rule(domain, *self.ball_counts(n_max))
        if domain.kind == "box":
            return build_box_rule(domain, self.box_count(n_max))
        raise ValueError("node clouds carry their own rule")

    def as_dict(self):
        return dict(self.__dict__)


DEFAULT_POLICY = ResolutionPolicy()


def coefficient(alpha, M, rule, cache=None):
    """int_Omega M . grad W_alpha for one index, summed with math.fsum in node order."""
    alpha = as_index(alpha)
    grads = cache.gradients(alpha, rule) if cache is not None else abbasis.grad_w_alpha_array(alpha, rule.nodes)[1]
    mv = M.sample(rule)
    return math.fsum(rule.weights * np.einsum("ij,ij->i", mv, grads))


def coefficient_vector(M, rule, n_max, backend=None, chunk=kernel.DEFAULT_CHUNK):
    """All coefficients up to degree n_max, in lexicographic (k, l, m) order."""
    return kernel.coefficient_vector(rule.nodes, rule.weights, M.sample(rule), n_max, backend=backend, chunk=chunk)
