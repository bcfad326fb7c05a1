"""Metrics on the density space: Bures, C*-norm and Monge-Kantorovich.

The Monge-Kantorovich (quantum) metric is implemented for commutative
algebras ``C^n`` where the seminorm is a maximum of finitely many linear
functionals, so the supremum defining it is a linear program.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .algebra import AlgebraShape, DensityElement, Element, Trace, cstar_distance
from .calculus import matrix_abs, matrix_sqrt, polar_unitary, sqrt_psd
from .exceptions import (
    NumericalConsistencyError,
    SeminormKernelError,
    ShapeMismatchError,
    UnboundedProblemError,
)
from .simplex import simplex_max

log = logging.getLogger(__name__)

CLAMP_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class Seminorm:
    """Lipschitz seminorm ``L(a) = max_j |<c_j, a>|`` on self-adjoint elements of ``C^n``.

    Each row of ``functionals`` must sum to zero and the rows must span the
    orthogonal complement of the constants, so that ``L`` vanishes exactly
    on multiples of the unit.
    """

    functionals: np.ndarray
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        c = np.atleast_2d(np.array(self.functionals, dtype=float))
        c.setflags(write=False)
        object.__setattr__(self, "functionals", c)
        if self.validate:
            self.check_kernel()

    @property
    def n(self) -> int:
        return self.functionals.shape[1]

    @cached_property
    def lp_constraints(self) -> np.ndarray:
        """``[[C, -C], [-C, C]]`` for ``C`` with the last coordinate dropped."""
        c = self.functionals[:, :-1]
        return np.block([[c, -c], [-c, c]])

    @property
    def shape(self) -> AlgebraShape:
        return AlgebraShape.commutative(self.n)

    def check_kernel(self) -> None:
        """Raise :class:`SeminormKernelError` unless ``ker L`` is exactly the constants."""
        c = self.functionals
        scale = max(1.0, float(np.abs(c).max()))
        sums = np.abs(c.sum(axis=1))
        if np.any(sums > 1e-12 * scale * c.shape[1]):
            raise SeminormKernelError(
                f"functionals must annihilate the unit; row sums {c.sum(axis=1)}"
            )
        rank = np.linalg.matrix_rank(c) if self.n > 1 else 0
        if rank != self.n - 1:
            raise SeminormKernelError(f"functionals have rank {rank}, need {self.n - 1}")

    def __call__(self, a) -> float:
        if isinstance(a, Element):
            a = a.diagonal().real
        return float(np.abs(self.functionals @ np.asarray(a, dtype=float)).max())

    @classmethod
    def difference(cls) -> "Seminorm":
        """``L(x) = |x_1 - x_2|`` on ``C^2``."""
        return cls(np.array([[1.0, -1.0]]))

    @classmethod
    def random(cls, n: int, rng: np.random.Generator, n_functionals: int | None = None):
        """Random valid seminorm on ``C^n`` with zero-sum Gaussian functionals."""
        if n < 2:
            return cls(np.zeros((1, n)))
        while True:
            j = n_functionals or int(rng.integers(n - 1, n + 3))
            c = rng.standard_normal((j, n))
            c -= c.mean(axis=1, keepdims=True)
            if np.linalg.matrix_rank(c) == n - 1:
                return cls(c)

    def to_dict(self) -> dict:
        return {"functionals": self.functionals.tolist()}


@dataclass(frozen=True)
class StateFunctional:
    """The state ``b -> tau(a b)`` attached to a density element ``a``."""

    density: DensityElement

    @property
    def trace(self) -> Trace:
        return self.density.trace

    def __call__(self, b: Element) -> complex:
        return self.trace(self.density.element @ b)

    def basis_values(self) -> np.ndarray:
        """Values on the matrix units ``E_ij`` of every block, concatenated.

        ``tau(a E_ij) = w_k a_ji``, so this is the transposed density scaled
        by the block weights.
        """
        return np.concatenate(
            [w * b.T.ravel() for w, b in zip(self.trace.weights, self.density.blocks)]
        )

    @property
    def coefficients(self) -> np.ndarray:
        """For ``C^n``: the vector ``w * a`` with ``phi(b) = <w * a, b>``."""
        return np.asarray(self.trace.weights) * self.density.diagonal()


def state_map(tau: Trace, a: DensityElement) -> StateFunctional:
    if a.trace != tau:
        raise ShapeMismatchError("density element was certified against a different trace")
    return StateFunctional(a)


def _check_pair(tau: Trace, x: DensityElement, y: DensityElement):
    if x.shape != tau.shape or y.shape != tau.shape:
        raise ShapeMismatchError("density elements and trace must share a shape")


def _check_fidelity(value: float) -> None:
    if value < -CLAMP_TOL or value > 1.0 + CLAMP_TOL:
        raise NumericalConsistencyError(f"tau(|sqrt(x) sqrt(y)|) = {value!r} outside [0, 1]")
    if value > 1.0 or value < 0.0:
        log.debug("clamping fidelity %r into [0, 1]", value)


def _from_fidelity(value: float) -> float:
    _check_fidelity(value)
    return math.sqrt(1.0 - min(max(value, 0.0), 1.0))


def _block_overlap(sx: np.ndarray, sy: np.ndarray) -> tuple[float, float]:
    """``(Tr|sx sy|, min_U ||sx - sy U||_F^2)`` for one pair of root blocks.

    The minimum equals ``Tr x + Tr y - 2 Tr|sx sy|`` but is formed as a
    sum of squares, so it keeps full accuracy when ``x`` and ``y`` are close.
    """
    if sx.shape == (1, 1):
        a, b = sx[0, 0].real, sy[0, 0].real
        return abs(a * b), (a - b) ** 2
    w, fidelity = polar_unitary(sx @ sy)
    diff = sx - sy @ w.conj().T
    return fidelity, float(np.vdot(diff, diff).real)


def _bures_from_roots(tau: Trace, roots_x, roots_y) -> float:
    fidelity = 0.0
    gap = 0.0
    for weight, sx, sy in zip(tau.weights, roots_x, roots_y):
        f, g = _block_overlap(sx, sy)
        fidelity += weight * f
        gap += weight * g
    _check_fidelity(fidelity)
    # 1 - tau(|sqrt x sqrt y|) = tau(|sqrt x - sqrt y U|^2) / 2 for the polar unitary U
    return math.sqrt(min(max(0.5 * gap, 0.0), 1.0))


def bures_distance(tau: Trace, x: DensityElement, y: DensityElement) -> float:
    """``sqrt(1 - tau(|sqrt(x) sqrt(y)|))``.

    The fidelity ``tau(|sqrt x sqrt y|)`` is checked against ``[0, 1]``, but
    ``1 - fidelity`` is evaluated through the polar factor of ``sqrt x sqrt y``
    so that nearby densities do not lose half their digits to cancellation.

    Raises:
        NumericalConsistencyError: the inner trace leaves ``[0, 1]`` by more
            than :data:`CLAMP_TOL`.
    """
    _check_pair(tau, x, y)
    return _bures_from_roots(tau, matrix_sqrt(x.element).blocks, matrix_sqrt(y.element).blocks)


def bures_via_fidelity(tau: Trace, x: DensityElement, y: DensityElement) -> float:
    """Literal ``sqrt(1 - tau(|sqrt x sqrt y|))`` with ``|.|`` from :func:`matrix_abs`.

    Accurate to about ``1e-8`` absolute near the diagonal; kept as a cross-check.
    """
    _check_pair(tau, x, y)
    overlap = matrix_abs(matrix_sqrt(x.element) @ matrix_sqrt(y.element))
    return _from_fidelity(tau(overlap).real)


def _root(block: np.ndarray) -> np.ndarray:
    if block.shape == (1, 1):
        return np.sqrt(np.maximum(block.real, 0.0)).astype(complex)
    return sqrt_psd(block)


class RootCache:
    """Memoises square roots of density elements for repeated Bures evaluations."""

    def __init__(self):
        self._roots: dict[int, tuple[DensityElement, list[np.ndarray]]] = {}

    def roots(self, x: DensityElement) -> list[np.ndarray]:
        hit = self._roots.get(id(x))
        if hit is None or hit[0] is not x:
            hit = (x, [_root(b) for b in x.blocks])
            self._roots[id(x)] = hit
        return hit[1]

    def bures(self, tau: Trace, x: DensityElement, y: DensityElement) -> float:
        """Same value as :func:`bures_distance`, reusing cached square roots."""
        _check_pair(tau, x, y)
        return _bures_from_roots(tau, self.roots(x), self.roots(y))


def bures_commutative_closed_form(tau: Trace, x: DensityElement, y: DensityElement) -> float:
    """``sqrt(1 - sum_k w_k sqrt(x_k y_k))`` on ``C^n``, in Hellinger form."""
    _check_pair(tau, x, y)
    if not tau.shape.is_commutative:
        raise ShapeMismatchError("closed form needs a commutative shape")
    xs = np.sqrt(np.clip(x.diagonal(), 0.0, None))
    ys = np.sqrt(np.clip(y.diagonal(), 0.0, None))
    w = np.asarray(tau.weights)
    _check_fidelity(float(np.dot(w, xs * ys)))
    # sum_k w_k sqrt(x_k y_k) = 1 - sum_k w_k (sqrt x_k - sqrt y_k)^2 / 2 on densities
    return math.sqrt(min(0.5 * float(np.dot(w, (xs - ys) ** 2)), 1.0))


def fidelity_2x2_oracle(x: DensityElement, y: DensityElement) -> float:
    """Bures distance for qubit states from ``F^2 = Tr(xy) + 2 sqrt(det x det y)``."""
    if x.shape.block_dims != (2,) or y.shape.block_dims != (2,):
        raise ShapeMismatchError("the 2x2 oracle needs a single 2x2 block")
    if x.trace.weights != (1.0,) or y.trace.weights != (1.0,):
        raise ShapeMismatchError("the 2x2 oracle needs the unit trace")
    a, b = x.blocks[0], y.blocks[0]
    overlap = float(np.trace(a @ b).real)
    dets = max(float(np.linalg.det(a).real), 0.0) * max(float(np.linalg.det(b).real), 0.0)
    return _from_fidelity(math.sqrt(max(overlap + 2.0 * math.sqrt(dets), 0.0)))


def _mk_problem(tau: Trace, seminorm: Seminorm, x: DensityElement, y: DensityElement):
    _check_pair(tau, x, y)
    if not tau.shape.is_commutative:
        raise ShapeMismatchError("the Monge-Kantorovich metric is only implemented on C^n")
    if seminorm.n != tau.shape.n_blocks:
        raise ShapeMismatchError(
            f"seminorm acts on C^{seminorm.n}, algebra is C^{tau.shape.n_blocks}"
        )
    g = np.asarray(tau.weights) * (x.diagonal() - y.diagonal())
    # quotient by constants: pin the last coordinate to zero
    return g[:-1], seminorm.functionals[:, :-1]


def mk_distance_lp(tau: Trace, seminorm: Seminorm, x: DensityElement, y: DensityElement) -> float:
    """``sup { |phi_x(a) - phi_y(a)| : L(a) <= 1 }`` by the simplex method.

    The objective is ``<g, a>`` with ``g = w * (x - y)``; the feasible set
    ``{-1 <= <c_j, a> <= 1}`` is symmetric, so the maximum is already the
    supremum of the absolute value.

    Raises:
        SeminormKernelError: the program is unbounded, i.e. the functionals
            do not pin down every non-constant direction.
    """
    g, c = _mk_problem(tau, seminorm, x, y)
    if g.size == 0 or not np.any(g):
        return 0.0
    # the value is homogeneous in g; rescaling keeps tiny objectives above the pivot tolerance
    scale = float(np.abs(g).max())
    objective = np.concatenate([g, -g]) / scale
    constraints = seminorm.lp_constraints
    bounds = np.ones(constraints.shape[0])
    try:
        result = simplex_max(objective, constraints, bounds)
    except UnboundedProblemError as exc:
        raise SeminormKernelError(
            "Monge-Kantorovich program is unbounded: seminorm kernel is larger than the constants"
        ) from exc
    return max(result.value, 0.0) * scale


def mk_distance_bruteforce(
    tau: Trace, seminorm: Seminorm, x: DensityElement, y: DensityElement
) -> float:
    """Same quantity as :func:`mk_distance_lp`, by enumerating polytope vertices.

    Every vertex of ``{a : |<c_j, a>| <= 1}`` solves ``n - 1`` active
    constraints with equality. Meant as an oracle for ``n <= 4``.
    """
    g, c = _mk_problem(tau, seminorm, x, y)
    d = g.size
    if d == 0:
        return 0.0
    if d > 3:
        raise ShapeMismatchError("vertex enumeration is limited to n <= 4")
    rows = np.vstack([c, -c])
    best = 0.0
    for subset in itertools.combinations(range(rows.shape[0]), d):
        sub = rows[list(subset)]
        if np.linalg.cond(sub) > 1e12:
            continue
        vertex = np.linalg.solve(sub, np.ones(d))
        if np.all(rows @ vertex <= 1.0 + 1e-9):
            best = max(best, abs(float(g @ vertex)))
    return best


def quantum_distance(tau: Trace, seminorm: Seminorm, x: DensityElement, y: DensityElement):
    """Alias of :func:`mk_distance_lp`: the metric ``mk_L(phi_x, phi_y)``."""
    return mk_distance_lp(tau, seminorm, x, y)


__all__ = [
    "Seminorm",
    "StateFunctional",
    "RootCache",
    "state_map",
    "bures_distance",
    "bures_via_fidelity",
    "bures_commutative_closed_form",
    "fidelity_2x2_oracle",
    "mk_distance_lp",
    "mk_distance_bruteforce",
    "quantum_distance",
    "cstar_distance",
]
