"""Benchmark problems with known solutions, convergence tables and slope fits."""
from dataclasses import dataclass
import math

import numpy as np

from . import quadrature, solver
from .quadrature import MagnetizationField, SampleDomain


@dataclass(frozen=True)
class ReferenceTable:
    """Published convergence data for one benchmark."""

    rows: tuple  # (N, E_N, rel_energy_err, e0)
    energy_slope: float
    e0_slope: float


@dataclass(frozen=True, eq=False)
class BenchmarkCase:
    id: int
    name: str
    domain: SampleDomain
    field: MagnetizationField
    exact_energy: float
    exact_potential: object = None
    exact_strayfield: object = None
    reference: ReferenceTable = None

    def __post_init__(self):
        if not self.exact_energy > 0:
            raise ValueError("exact energy must be positive")

    def magnetization_norm_squared(self):
        """||M||^2 over the domain (closed form: every benchmark has |M| = 1)."""
        return self.domain.volume


@dataclass(frozen=True)
class ConvergenceRow:
    N: int
    E_N: float
    rel_energy_err: float
    e0: float

    def as_tuple(self):
        return (self.N, self.E_N, self.rel_energy_err, self.e0)


def _spherical(x):
    x = np.asarray(x, dtype=float).reshape(-1, 3)
    r = np.linalg.norm(x, axis=1)
    rho = np.hypot(x[:, 0], x[:, 1])
    safe_r = np.where(r > 0, r, 1.0)
    safe_rho = np.where(rho > 0, rho, 1.0)
    ct = np.where(r > 0, x[:, 2] / safe_r, 1.0)
    st = rho / safe_r
    cp = np.where(rho > 0, x[:, 0] / safe_rho, 1.0)
    sp = np.where(rho > 0, x[:, 1] / safe_rho, 0.0)
    return r, ct, st, cp, sp


def _pointwise(fn):
    """Lift an (n, 3) -> (n, ...) evaluator so a single 3-vector works too."""
    def wrapped(x):
        x = np.asarray(x, dtype=float)
        out = fn(x.reshape(-1, 3))
        return out[0] if x.ndim == 1 else out
    return wrapped


def example1_field(x):
    """M = cos(theta) e_phi + sin(theta) e_theta (physics convention)."""
    _, ct, st, cp, sp = _spherical(x)
    e_phi = np.stack([-sp, cp, np.zeros_like(cp)], axis=1)
    e_theta = np.stack([cp * ct, sp * ct, -st], axis=1)
    return ct[:, None] * e_phi + st[:, None] * e_theta


def case_example1(r0=0.5):
    """Ball with a unit tangential (M.n = 0) magnetization."""

    def potential(x):
        r = np.linalg.norm(x, axis=1)
        z = x[:, 2]
        with np.errstate(divide="ignore", invalid="ignore"):
            inside = -2 * z / 9 + (2 * z / 3) * np.log(r / r0)
            outside = -2 * r0**3 * z / (9 * r**3)
        inside = np.where(r > 0, inside, 0.0)
        return np.where(r <= r0, inside, outside)

    def strayfield(x):
        r = np.linalg.norm(x, axis=1)[:, None]
        z = x[:, 2:3]
        ez = np.array([0.0, 0.0, 1.0])
        with np.errstate(divide="ignore", invalid="ignore"):
            g_in = (-2.0 / 9 + (2.0 / 3) * np.log(r / r0)) * ez + (2 * z / 3) * x / r**2
            g_out = -(2 * r0**3 / 9) * (ez / r**3 - 3 * z * x / r**5)
        return -np.where(r <= r0, g_in, g_out)

    ref = ReferenceTable(
        (
            (10, 0.07696625, 7.78e-3, 8.82e-2),
            (20, 0.07750001, 9.03e-4, 3.00e-2),
            (30, 0.07754315, 3.48e-4, 1.86e-2),
            (40, 0.07756016, 1.29e-4, 1.13e-2),
            (50, 0.07756414, 7.79e-5, 8.82e-3),
            (60, 0.07756708, 4.00e-5, 6.32e-3),
        ),
        -2.90,
        -1.45,
    )
    return BenchmarkCase(
        1,
        "tangential sphere",
        SampleDomain.ball(r0),
        MagnetizationField(example1_field, divergence_free_tangential=True, unit_norm=True, label="example1"),
        16.0 / 81.0 * math.pi * r0**3,
        _pointwise(potential),
        _pointwise(strayfield),
        ref,
    )


def case_example2(r0=0.5, m0=(0.0, 0.0, 1.0)):
    """Uniformly magnetized ball."""
    m0 = np.asarray(m0, dtype=float)

    def potential(x):
        r = np.linalg.norm(x, axis=1)
        mx = x @ m0
        with np.errstate(divide="ignore", invalid="ignore"):
            outside = r0**3 / 3 * mx / r**3
        return np.where(r < r0, mx / 3, outside)

    def strayfield(x):
        r = np.linalg.norm(x, axis=1)[:, None]
        mx = (x @ m0)[:, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            g_out = r0**3 / 3 * (m0 / r**3 - 3 * mx * x / r**5)
        return -np.where(r < r0, m0 / 3, g_out)

    ref = ReferenceTable(
        (
            (10, 0.07845252, 10.10e-2, 0.3153),
            (20, 0.08252939, 5.42e-2, 0.2322),
            (30, 0.08402011, 3.72e-2, 0.1924),
            (40, 0.08479348, 2.83e-2, 0.1680),
            (50, 0.08526692, 2.29e-2, 0.1511),
            (60, 0.08558669, 1.92e-2, 0.1385),
        ),
        -0.93,
        -0.46,
    )
    return BenchmarkCase(
        2,
        "uniform sphere",
        SampleDomain.ball(r0),
        MagnetizationField.constant(m0, label="example2"),
        2 * math.pi * float(m0 @ m0) * r0**3 / 9,
        _pointwise(potential),
        _pointwise(strayfield),
        ref,
    )


def cube_strayfield(x, gamma=0.5):
    """Closed-form field of the cube (-gamma, gamma)^3 magnetized along +y."""
    x = np.asarray(x, dtype=float).reshape(-1, 3)
    h = np.zeros_like(x)
    for k in (1, 2):
        a = x[:, 0] + (-1) ** k * gamma
        for l in (1, 2):
            b = x[:, 1] + (-1) ** l * gamma
            for m in (1, 2):
                c = x[:, 2] + (-1) ** m * gamma
                sign = (-1) ** (k + l + m)
                rho = np.sqrt(a * a + b * b + c * c)
                h[:, 0] += sign * np.log(c + rho)
                h[:, 1] -= sign * np.arctan(a * c / (b * rho))
                h[:, 2] += sign * np.log(a + rho)
    return h / (4 * math.pi)


def case_example3(gamma=0.5):
    """Uniformly magnetized cube, M = e_y."""
    ref = ReferenceTable(
        (
            (10, 0.14711046, 0.1173, 0.3397),
            (20, 0.15617466, 6.3e-2, 0.2499),
            (30, 0.15951131, 4.2e-2, 0.2066),
            (40, 0.16123614, 3.2e-2, 0.180),
            (50, 0.16229007, 2.62e-2, 0.1618),
            (60, 0.16300181, 2.19e-2, 0.1481),
        ),
        -0.94,
        -0.47,
    )
    return BenchmarkCase(
        3,
        "uniform cube",
        SampleDomain.cube(gamma),
        MagnetizationField.constant((0.0, 1.0, 0.0), label="example3"),
        1.0 / 6.0,
        None,
        _pointwise(lambda x: cube_strayfield(x, gamma)),
        ref,
    )


CASES = {1: case_example1, 2: case_example2, 3: case_example3}


def get_case(case_id):
    try:
        return CASES[int(case_id)]()
    except (KeyError, ValueError):
        raise ValueError(f"unknown example {case_id!r}; choose from {sorted(CASES)}") from None


def case_table(case, n_max, policy=quadrature.DEFAULT_POLICY, mu0=1.0, backend=None):
    rule = policy.rule_for(case.domain, n_max)
    table = solver.compute_table(case.field, rule, n_max, mu0=mu0, backend=backend)
    table.meta["policy"] = policy.as_dict()
    table.meta["example"] = case.id
    return table


def convergence_rows(table, exact_energy, n_list):
    cum = solver.energy_breakdown(table).cumulative
    rows = []
    for n in n_list:
        _, rel, e0 = solver.error_metrics(cum[n], exact_energy)
        rows.append(ConvergenceRow(n, cum[n], rel, e0))
    return rows


def run_convergence(case, n_list, policy=quadrature.DEFAULT_POLICY, mu0=1.0, backend=None):
    """One table at max(n_list), then a row per requested N."""
    n_list = [int(n) for n in n_list]
    if not n_list:
        raise ValueError("N list is empty")
    if any(b <= a for a, b in zip(n_list, n_list[1:])) or n_list[0] < 0:
        raise ValueError("N list must be non-negative and strictly ascending")
    table = case_table(case, n_list[-1], policy, mu0, backend)
    return convergence_rows(table, case.exact_energy * mu0, n_list), table


def fit_log_slope(ns, errs):
    """Least-squares slope of log(err) against log(N)."""
    ns = np.asarray(ns, dtype=float)
    errs = np.asarray(errs, dtype=float)
    if ns.shape != errs.shape or ns.size < 3:
        raise ValueError("need at least three (N, err) pairs")
    if np.any(errs <= 0) or np.any(ns <= 0):
        raise ValueError("slope fit needs positive N and positive errors")
    slope, _ = np.polyfit(np.log(ns), np.log(errs), 1)
    return float(slope)


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    target: float
    tol: float

    @property
    def ok(self):
        return abs(self.value - self.target) <= self.tol


ENERGY_TOL = 2e-5
E0_TOL = 2e-3
SLOPE_TOL = 0.15


def check_against_reference(case, rows, check_e0=None):
    """Compare rows with the published table (only the N values present in both).

    e0 is compared only when the published column is consistent with the
    energy column (Example 1); pass ``check_e0`` to override.
    """
    ref = case.reference
    if check_e0 is None:
        check_e0 = case.id == 1
    by_n = {r[0]: r for r in ref.rows}
    out = []
    shared = [r for r in rows if r.N in by_n]
    for r in shared:
        out.append(CheckResult(f"E_{r.N}", r.E_N, by_n[r.N][1], ENERGY_TOL))
        if check_e0:
            out.append(CheckResult(f"e0_{r.N}", r.e0, by_n[r.N][3], E0_TOL))
    if len(shared) >= 3:
        ns = [r.N for r in shared]
        out.append(CheckResult("energy_slope", fit_log_slope(ns, [r.rel_energy_err for r in shared]),
                               ref.energy_slope, SLOPE_TOL))
        out.append(CheckResult("e0_slope", fit_log_slope(ns, [r.e0 for r in shared]), ref.e0_slope, SLOPE_TOL))
    return out
