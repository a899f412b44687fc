"""Truncated stray-field energy, potential and field from a coefficient table."""
from dataclasses import dataclass, field
import json
import math

import numpy as np

from . import kernel, quadrature
from .s3harm import MultiIndex, count_up_to, degree_offset, indices_up_to


def degree_factor(k):
    """(2k+1)(2k+3), the gradient norm of W_alpha times four."""
    return (2 * k + 1) * (2 * k + 3)


@dataclass
class CoefficientTable:
    """c_alpha for every index of degree <= n_max, stored in lexicographic order."""

    n_max: int
    coeffs: np.ndarray
    mu0: float = 1.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.n_max < 0:
            raise ValueError("n_max must be non-negative")
        self.coeffs = np.asarray(self.coeffs, dtype=float).reshape(-1)
        if self.coeffs.shape[0] != count_up_to(self.n_max):
            raise ValueError(
                f"expected {count_up_to(self.n_max)} coefficients for n_max={self.n_max}, got {self.coeffs.shape[0]}"
            )

    @classmethod
    def zeros(cls, n_max, mu0=1.0):
        return cls(n_max, np.zeros(count_up_to(n_max)), mu0)

    @classmethod
    def from_entries(cls, n_max, entries, mu0=1.0):
        table = cls.zeros(n_max, mu0)
        for alpha, c in entries.items():
            alpha = alpha if isinstance(alpha, MultiIndex) else MultiIndex(*alpha)
            if alpha.k > n_max:
                raise ValueError(f"{tuple(alpha)} exceeds n_max={n_max}")
            table.coeffs[alpha.position] = c
        return table

    @property
    def entries(self):
        return dict(zip(indices_up_to(self.n_max), self.coeffs.tolist()))

    def __getitem__(self, alpha):
        alpha = alpha if isinstance(alpha, MultiIndex) else MultiIndex(*alpha)
        return float(self.coeffs[alpha.position])

    def __len__(self):
        return self.coeffs.shape[0]

    def degree_block(self, k):
        return self.coeffs[degree_offset(k):degree_offset(k + 1)]

    def truncated(self, n):
        _check_degree(self, n)
        return self.coeffs[:count_up_to(n)]

    def to_json(self, extra=None):
        # float repr is the shortest string that round-trips the binary64 value
        doc = {"n_max": self.n_max, "mu0": self.mu0}
        if self.meta or extra:
            doc["config"] = {**self.meta, **(extra or {})}
        doc["coeffs"] = [
            {"k": a.k, "l": a.l, "m": a.m, "c": c} for a, c in zip(indices_up_to(self.n_max), self.coeffs.tolist())
        ]
        return json.dumps(doc, indent=1)

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text)
        n_max = int(doc["n_max"])
        coeffs = np.zeros(count_up_to(n_max))
        seen = set()
        for row in doc["coeffs"]:
            a = MultiIndex(int(row["k"]), int(row["l"]), int(row["m"]))
            if a.k > n_max or a in seen:
                raise ValueError(f"bad or duplicate coefficient {tuple(a)}")
            seen.add(a)
            coeffs[a.position] = float(row["c"])
        if len(seen) != coeffs.shape[0]:
            raise ValueError("coefficient list is incomplete")
        return cls(n_max, coeffs, float(doc.get("mu0", 1.0)), dict(doc.get("config", {})))


def compute_table(M, rule, n_max, mu0=1.0, backend=None):
    c = quadrature.coefficient_vector(M, rule, n_max, backend=backend)
    meta = {"n_max": n_max, "mu0": mu0, "nodes": len(rule), "resolution": dict(rule.resolution),
            "domain": rule.domain.describe()}
    return CoefficientTable(n_max, c, mu0, meta)


def _check_degree(table, n):
    if not 0 <= n <= table.n_max:
        raise ValueError(f"N={n} outside 0..{table.n_max}")


@dataclass(frozen=True)
class EnergyBreakdown:
    per_degree: list
    cumulative: list


def energy_breakdown(table):
    """Per-degree contributions and E_N for N = 0..n_max.

    Each E_N is the exactly rounded sum (math.fsum) of every term with
    degree <= N, visited by increasing k then lexicographic alpha.
    """
    terms = []
    per_degree, cumulative = [], []
    for k in range(table.n_max + 1):
        block = table.degree_block(k)
        t = (2.0 * table.mu0 / degree_factor(k)) * (block * block)
        per_degree.append(math.fsum(t))
        terms.extend(t.tolist())
        cumulative.append(math.fsum(terms))
    return EnergyBreakdown(per_degree, cumulative)


def energy(table, n):
    _check_degree(table, n)
    terms = []
    for k in range(n + 1):
        block = table.degree_block(k)
        terms.extend(((2.0 * table.mu0 / degree_factor(k)) * (block * block)).tolist())
    return math.fsum(terms)


def series_scale(n):
    """4/((2k+1)(2k+3)) for every index of degree <= n."""
    return np.concatenate([np.full((k + 1) ** 2, 4.0 / degree_factor(k)) for k in range(n + 1)])


def potential_eval(table, n, x, backend=None):
    """U_N at one point (float) or at an (m, 3) array of points."""
    _check_degree(table, n)
    x = np.asarray(x, dtype=float)
    u = kernel.series_values(series_scale(n) * table.truncated(n), n, x.reshape(-1, 3), backend=backend)
    return float(u[0]) if x.ndim == 1 else u


def strayfield_eval(table, n, x, backend=None):
    """H_N = -grad U_N at one point (3-vector) or an (m, 3) array."""
    _check_degree(table, n)
    x = np.asarray(x, dtype=float)
    g = kernel.series_gradients(series_scale(n) * table.truncated(n), n, x.reshape(-1, 3), backend=backend)
    return -g[0] if x.ndim == 1 else -g


def error_metrics(e_n, exact_energy):
    """(E - E_N, (E - E_N)/E, sqrt(max(E - E_N, 0)/E))."""
    if not exact_energy > 0:
        raise ValueError("exact energy must be positive")
    diff = exact_energy - e_n
    rel = diff / exact_energy
    return diff, rel, math.sqrt(max(diff, 0.0) / exact_energy)


def energy_error_split(table, exact_energy, n):
    return error_metrics(energy(table, n), exact_energy)


@dataclass(frozen=True)
class DiagonalSystem:
    """The Galerkin system G X = B, with G diagonal.

    ``g`` holds (2k+1)(2k+3)/4 per index, ``d`` its reciprocal, so the series
    coefficients are X = d * B.
    """

    g: np.ndarray
    d: np.ndarray
    b: np.ndarray

    def solve(self):
        return self.d * self.b

    def residual(self):
        return self.g * self.solve() - self.b


def diagonal_system(table, n):
    _check_degree(table, n)
    d = series_scale(n)
    g = np.concatenate([np.full((k + 1) ** 2, degree_factor(k) / 4.0) for k in range(n + 1)])
    return DiagonalSystem(g, d, table.truncated(n).copy())
