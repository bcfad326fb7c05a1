"""Seeded property suites: metric axioms, oracle agreement and convergence probes.

Every random input is drawn from a per-trial seed derived from the suite
seed, so any reported violation can be reproduced in isolation with
:func:`densitymetrics.algebra.sample_density`.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from .algebra import (
    AlgebraShape,
    DensityElement,
    Element,
    Trace,
    cstar_distance,
    normalize_to_density,
    sample_density,
)
from .calculus import matrix_sqrt
from .eigen import hermitian_eig
from .exceptions import DomainError, ResampleRequired
from .metrics import (
    RootCache,
    Seminorm,
    bures_commutative_closed_form,
    bures_distance,
    fidelity_2x2_oracle,
    mk_distance_bruteforce,
    mk_distance_lp,
    state_map,
)

METRICS = ("bures", "cstar", "quantum")


_MASK64 = (1 << 64) - 1


def _splitmix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def trial_seed(seed: int, *path: int) -> int:
    """Deterministic 63-bit seed for the sub-stream ``path`` of ``seed``."""
    z = _splitmix64(int(seed) & _MASK64)
    for p in path:
        z = _splitmix64(z ^ (int(p) & _MASK64))
    return z >> 1


def digest(*elements: DensityElement) -> str:
    h = hashlib.sha256()
    for e in elements:
        for block in e.blocks:
            h.update(np.ascontiguousarray(block).tobytes())
    return h.hexdigest()[:16]


def metric_function(
    name: str, tau: Trace, seminorm: Seminorm | None = None
) -> Callable[[DensityElement, DensityElement], float]:
    """Two-argument distance for ``name`` in :data:`METRICS`."""
    if name == "bures":
        return lambda x, y, cache=RootCache(): cache.bures(tau, x, y)
    if name == "cstar":
        return lambda x, y: cstar_distance(x.element, y.element)
    if name == "quantum":
        if seminorm is None:
            raise ValueError("the quantum metric needs a seminorm")
        if not tau.shape.is_commutative:
            raise ValueError("the quantum metric needs a commutative shape")
        return lambda x, y: mk_distance_lp(tau, seminorm, x, y)
    raise ValueError(f"unknown metric {name!r}; choose from {METRICS}")


def default_seminorm(shape: AlgebraShape, seed: int) -> Seminorm:
    """``|x_1 - x_2|`` on ``C^2``; a seeded random valid seminorm otherwise."""
    if shape.block_dims == (1, 1):
        return Seminorm.difference()
    return Seminorm.random(shape.n_blocks, np.random.default_rng(trial_seed(seed, 1 << 20)))


@dataclass
class AxiomReport:
    """Outcome of :func:`metric_axiom_suite`.

    ``violations`` holds one record per failing trial with the seeds that
    regenerate its inputs; ``records`` holds every trial when requested.
    """

    metric: str
    shape: tuple[int, ...]
    weights: tuple[float, ...]
    trials: int
    seed: int
    triangle_slack: float
    violations: list[dict] = field(default_factory=list)
    records: list[dict] = field(default_factory=list)
    worst_triangle: float = math.inf
    worst_triangle_trial: int | None = None
    max_asymmetry: float = 0.0
    max_self_distance: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        out = asdict(self)
        out["shape"] = list(self.shape)
        out["weights"] = list(self.weights)
        out["passed"] = self.passed
        if math.isinf(out["worst_triangle"]):
            out["worst_triangle"] = None
        return out


def metric_axiom_suite(
    metric: str,
    shape,
    tau: Trace | None = None,
    trials: int = 1000,
    seed: int = 0,
    seminorm: Seminorm | None = None,
    triangle_slack: float = 1e-9,
    symmetry_tol: float = 1e-10,
    zero_tol: float = 1e-10,
    keep_records: bool = False,
) -> AxiomReport:
    """Spot-check the metric axioms on ``trials`` random triples.

    Checks per triple ``(x, y, z)``: nonnegativity; symmetry within
    ``symmetry_tol``; ``d(x, x) <= zero_tol``; ``d(x, y) > 0`` whenever the
    C*-distance exceeds 1e-8; and all three triangle inequalities with
    slack ``triangle_slack``.
    """
    return metric_axiom_suites(
        (metric,), shape, tau, trials, seed, seminorm,
        triangle_slack, symmetry_tol, zero_tol, keep_records,
    )[metric]


def metric_axiom_suites(
    metrics,
    shape,
    tau: Trace | None = None,
    trials: int = 1000,
    seed: int = 0,
    seminorm: Seminorm | None = None,
    triangle_slack: float = 1e-9,
    symmetry_tol: float = 1e-10,
    zero_tol: float = 1e-10,
    keep_records: bool = False,
) -> dict[str, AxiomReport]:
    """:func:`metric_axiom_suite` for several metrics over the same random triples.

    Triples depend only on ``seed`` and the trial index, so each report is
    identical to running that metric on its own.
    """
    shape = shape if isinstance(shape, AlgebraShape) else AlgebraShape(tuple(shape))
    tau = tau or Trace.unit(shape)
    if "quantum" in metrics and seminorm is None:
        seminorm = default_seminorm(shape, seed)
    funcs = {m: metric_function(m, tau, seminorm) for m in metrics}
    reports = {
        m: AxiomReport(m, shape.block_dims, tau.weights, trials, seed, triangle_slack)
        for m in metrics
    }

    for trial in range(trials):
        seeds = [trial_seed(seed, trial, slot) for slot in range(3)]
        x, y, z = (sample_density(tau, s) for s in seeds)
        separated = None
        for name, d in funcs.items():
            report = reports[name]
            values = {
                "xy": d(x, y), "yx": d(y, x), "yz": d(y, z), "xz": d(x, z), "xx": d(x, x),
            }
            problems = []
            if min(values.values()) < 0.0:
                problems.append("negative distance")
            asym = abs(values["xy"] - values["yx"])
            report.max_asymmetry = max(report.max_asymmetry, asym)
            if asym > symmetry_tol:
                problems.append(f"asymmetry {asym:.3e}")
            report.max_self_distance = max(report.max_self_distance, values["xx"])
            if values["xx"] > zero_tol:
                problems.append(f"d(x, x) = {values['xx']:.3e}")
            if values["xy"] <= 0.0:
                if separated is None:
                    separated = cstar_distance(x.element, y.element) > 1e-8
                if separated:
                    problems.append("distinct points at distance zero")
            xy, yz, xz = values["xy"], values["yz"], values["xz"]
            slack = min(xy + yz - xz, xy + xz - yz, xz + yz - xy)
            if slack < report.worst_triangle:
                report.worst_triangle, report.worst_triangle_trial = slack, trial
            if slack < -triangle_slack:
                problems.append(f"triangle inequality off by {-slack:.3e}")

            if problems or keep_records:
                record = {
                    "trial": trial,
                    "seeds": seeds,
                    "digest": digest(x, y, z),
                    "values": values,
                    "violations": problems,
                }
                if problems:
                    report.violations.append(record)
                if keep_records:
                    report.records.append(record)
    return reports


@dataclass(frozen=True)
class OracleReport:
    """Maximum discrepancy between a computation and its independent oracle."""

    name: str
    trials: int
    seed: int
    tolerance: float
    max_gap: float
    worst_seeds: tuple[int, ...] = ()

    @property
    def passed(self) -> bool:
        return bool(self.max_gap <= self.tolerance)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["worst_seeds"] = list(self.worst_seeds)
        out["passed"] = self.passed
        return out


def random_weights(n_blocks: int, rng: np.random.Generator) -> tuple[float, ...]:
    return tuple(float(w) for w in rng.uniform(0.25, 2.0, n_blocks))


def bures_commutative_agreement(
    n: int, trials: int = 1000, seed: int = 0, tolerance: float = 1e-9
) -> OracleReport:
    """``bures_distance`` against the diagonal closed form on ``C^n`` with random weights."""
    shape = AlgebraShape.commutative(n)
    worst, worst_seeds = 0.0, ()
    for trial in range(trials):
        s = [trial_seed(seed, trial, slot) for slot in range(3)]
        tau = Trace(shape, random_weights(n, np.random.default_rng(s[0])))
        x, y = sample_density(tau, s[1]), sample_density(tau, s[2])
        gap = abs(bures_distance(tau, x, y) - bures_commutative_closed_form(tau, x, y))
        if gap > worst or not worst_seeds:
            worst, worst_seeds = gap, tuple(s)
    return OracleReport(f"bures-vs-closed-form-C{n}", trials, seed, tolerance, worst, worst_seeds)


def bures_qubit_agreement(trials: int = 1000, seed: int = 0, tolerance: float = 1e-9) -> OracleReport:
    """``bures_distance`` against the 2x2 determinant formula on ``M_2``."""
    tau = Trace.unit((2,))
    worst, worst_seeds = 0.0, ()
    for trial in range(trials):
        s = [trial_seed(seed, trial, slot) for slot in range(2)]
        x, y = sample_density(tau, s[0]), sample_density(tau, s[1])
        gap = abs(bures_distance(tau, x, y) - fidelity_2x2_oracle(x, y))
        if gap > worst or not worst_seeds:
            worst, worst_seeds = gap, tuple(s)
    return OracleReport("bures-vs-2x2-oracle", trials, seed, tolerance, worst, worst_seeds)


def lp_bruteforce_agreement(
    n: int, trials: int = 200, seed: int = 0, tolerance: float = 1e-9
) -> OracleReport:
    """Simplex against vertex enumeration on ``C^n`` with random seminorms and weights."""
    shape = AlgebraShape.commutative(n)
    worst, worst_seeds = 0.0, ()
    for trial in range(trials):
        s = [trial_seed(seed, trial, slot) for slot in range(3)]
        rng = np.random.default_rng(s[0])
        tau = Trace(shape, random_weights(n, rng))
        seminorm = Seminorm.random(n, rng)
        x, y = sample_density(tau, s[1]), sample_density(tau, s[2])
        gap = abs(
            mk_distance_lp(tau, seminorm, x, y) - mk_distance_bruteforce(tau, seminorm, x, y)
        )
        if gap > worst or not worst_seeds:
            worst, worst_seeds = gap, tuple(s)
    return OracleReport(f"lp-vs-vertices-C{n}", trials, seed, tolerance, worst, worst_seeds)


def c2_closed_form_agreement(trials: int = 1000, seed: int = 0, tolerance: float = 1e-9):
    """On ``C^2`` with ``|x_1 - x_2|`` and the sum trace, ``d_L = |x_1 - y_1| = d_A``.

    Returns two reports: LP against ``|x_1 - y_1|`` and LP against the C*-distance.
    """
    tau = Trace.unit((1, 1))
    seminorm = Seminorm.difference()
    worst = [0.0, 0.0]
    worst_seeds = [(), ()]
    for trial in range(trials):
        s = [trial_seed(seed, trial, slot) for slot in range(2)]
        x, y = sample_density(tau, s[0]), sample_density(tau, s[1])
        d = mk_distance_lp(tau, seminorm, x, y)
        gaps = (
            abs(d - abs(x.diagonal()[0] - y.diagonal()[0])),
            abs(d - cstar_distance(x.element, y.element)),
        )
        for i, gap in enumerate(gaps):
            if gap > worst[i] or not worst_seeds[i]:
                worst[i], worst_seeds[i] = gap, tuple(s)
    return (
        OracleReport("c2-lp-vs-closed-form", trials, seed, tolerance, worst[0], worst_seeds[0]),
        OracleReport("c2-lp-vs-cstar", trials, seed, tolerance, worst[1], worst_seeds[1]),
    )


def eigensolver_check(
    trials: int = 1000, seed: int = 0, max_dim: int = 8, tolerance: float = 1e-10
) -> OracleReport:
    """Worst of the scaled residual and unitarity defect on random Hermitian matrices."""
    worst, worst_seeds = 0.0, ()
    for trial in range(trials):
        s = trial_seed(seed, trial)
        rng = np.random.default_rng(s)
        n = int(rng.integers(1, max_dim + 1))
        m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        m = m + m.conj().T
        eig = hermitian_eig(m)
        scale = max(1.0, float(np.linalg.norm(m, 2)))
        gap = max(float(eig.residuals(m).max()) / scale, eig.unitarity_defect())
        if gap > worst or not worst_seeds:
            worst, worst_seeds = gap, (s,)
    return OracleReport("eigensolver-residual", trials, seed, tolerance, worst, worst_seeds)


def sqrt_roundtrip_check(
    shapes: Sequence[tuple[int, ...]] = ((2,), (3,), (2, 1), (4,)),
    trials: int = 250,
    seed: int = 0,
    tolerance: float = 1e-10,
) -> OracleReport:
    """``||(sqrt a)^2 - a||`` relative to ``max(1, ||a||)`` on random positive ``a = b^* b``."""
    worst, worst_seeds = 0.0, ()
    for i, shape in enumerate(shapes):
        for trial in range(trials):
            s = trial_seed(seed, i, trial)
            b = Element.random(shape, np.random.default_rng(s))
            a = b.adjoint() @ b
            root = matrix_sqrt(a)
            scale = max(1.0, cstar_distance(a, Element.zeros(shape)))
            gap = cstar_distance(root @ root, a) / scale
            if gap > worst or not worst_seeds:
                worst, worst_seeds = gap, (s,)
    return OracleReport("sqrt-roundtrip", trials * len(shapes), seed, tolerance, worst, worst_seeds)


def state_map_injectivity(
    shape, trials: int = 1000, seed: int = 0, separation: float = 1e-6
) -> OracleReport:
    """Distinct densities give states that differ on some matrix unit.

    ``max_gap`` is the worst shortfall below ``1e-8 * min weight``; the
    report passes when no separated pair has functionals that agree.
    """
    shape = shape if isinstance(shape, AlgebraShape) else AlgebraShape(tuple(shape))
    tau = Trace(shape, random_weights(shape.n_blocks, np.random.default_rng(seed)))
    threshold = 1e-8 * tau.min_weight
    shortfall, worst_seeds = 0.0, ()
    for trial in range(trials):
        s = [trial_seed(seed, trial, slot) for slot in range(2)]
        x, y = sample_density(tau, s[0]), sample_density(tau, s[1])
        if cstar_distance(x.element, y.element) < separation:
            continue
        diff = np.abs(state_map(tau, x).basis_values() - state_map(tau, y).basis_values()).max()
        if threshold - diff > shortfall:
            shortfall, worst_seeds = threshold - diff, tuple(s)
    return OracleReport(
        f"state-map-injective-{shape.block_dims}", trials, seed, 0.0, shortfall, worst_seeds
    )


# convergence probes


@dataclass(frozen=True)
class ProbeTable:
    """Distances from ``x_k`` to ``x`` along a probe family.

    ``quantum`` is empty unless a seminorm was supplied.
    """

    k: tuple[int, ...]
    cstar: tuple[float, ...]
    bures: tuple[float, ...]
    quantum: tuple[float, ...] = ()

    def columns(self) -> dict[str, tuple[float, ...]]:
        cols = {"cstar": self.cstar, "bures": self.bures}
        if self.quantum:
            cols["quantum"] = self.quantum
        return cols

    def transfer_violations(self, cstar_tol: float = 1e-8, bures_tol: float = 1e-4) -> list[int]:
        """Values of ``k`` where the C*-distance is tiny but the Bures distance is not."""
        return [k for k, c, b in zip(self.k, self.cstar, self.bures) if c <= cstar_tol and b > bures_tol]

    def covanishing_failures(self, cross: float = 1e-6, final: float = 1e-4) -> list[str]:
        """Columns that never drop below ``cross`` or end above ``final``."""
        problems = []
        for name, col in self.columns().items():
            if min(col) > cross:
                problems.append(f"{name} never below {cross:g} (min {min(col):.3e})")
            if col[-1] > final:
                problems.append(f"{name} ends at {col[-1]:.3e} > {final:g}")
        return problems

    def rows(self) -> list[dict]:
        cols = self.columns()
        return [{"k": k, **{n: c[i] for n, c in cols.items()}} for i, k in enumerate(self.k)]


def probe_schedule(K: int, schedule: str = "linear") -> list[int]:
    """``k = 1..K`` (linear) or ``k = 1, 2, 4, ..., 2^(K-1)`` (geometric)."""
    if K < 1:
        raise ValueError("K must be positive")
    if schedule == "linear":
        return list(range(1, K + 1))
    if schedule == "geometric":
        return [2**j for j in range(K)]
    raise ValueError(f"unknown schedule {schedule!r}")


def convergence_transfer_probe(
    tau: Trace,
    x: DensityElement,
    h: Element,
    K: int,
    seminorm: Seminorm | None = None,
    schedule: str = "linear",
) -> ProbeTable:
    """Distances between ``x_k = normalize(x + h / k)`` and ``x``.

    Raises:
        ResampleRequired: ``x + h / k`` is not positive for some ``k``.
    """
    cache = RootCache()
    ks = probe_schedule(K, schedule)
    cstar, bures, quantum = [], [], []
    for k in ks:
        try:
            xk = normalize_to_density(tau, x.element + h * (1.0 / k))
        except DomainError as exc:
            raise ResampleRequired(f"x + h/{k} left the positive cone") from exc
        cstar.append(cstar_distance(xk.element, x.element))
        bures.append(cache.bures(tau, xk, x))
        if seminorm is not None:
            quantum.append(mk_distance_lp(tau, seminorm, xk, x))
    return ProbeTable(tuple(ks), tuple(cstar), tuple(bures), tuple(quantum))


def random_probe_direction(
    tau: Trace, x: DensityElement, rng: np.random.Generator, margin: float = 0.5
) -> Element:
    """Trace-zero Hermitian ``h`` with ``x + t h >= 0`` for all ``t`` in ``[0, 1]``.

    ``h`` is scaled so ``||h|| = margin * lambda_min(x)``, which keeps
    ``x + h`` strictly positive.
    """
    h = Element.random_hermitian(tau.shape, rng)
    unit = Element.identity(tau.shape)
    h = h - unit * (tau(h).real / tau(unit).real)
    lowest = min(hermitian_eig(b).eigenvalues[0] for b in x.blocks)
    norm = cstar_distance(h, Element.zeros(tau.shape))
    if lowest <= 0.0 or norm == 0.0:
        raise ResampleRequired("density is singular or direction vanished")
    return h * (margin * lowest / norm)
