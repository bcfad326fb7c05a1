"""Piecewise-polynomial functions on [0, 1] with the Lebesgue trace.

This is the commutative, infinite-dimensional example ``C([0, 1])`` with
``rho(f) = int_0^1 f``. It exhibits a sequence of densities that converges to
the constant function in the Bures metric but not uniformly.
"""

from __future__ import annotations

import csv
import functools
import io
import math
from dataclasses import dataclass
from numbers import Number
from typing import Sequence

import numpy as np
from numpy.polynomial import polynomial as P

from .exceptions import DomainError, NumericalConsistencyError
from .quadrature import QuadratureSpec, integrate

CONTINUITY_TOL = 1e-12
NONNEG_TOL = 1e-12


def _trim(coeffs) -> np.ndarray:
    c = np.trim_zeros(np.asarray(coeffs, dtype=float), "b")
    return c if c.size else np.zeros(1)


class PiecewiseFunction:
    """Real piecewise polynomial on ``[0, 1]``.

    Piece ``i`` covers ``[b_i, b_{i+1})`` (the last piece also contains 1) and
    is stored as ascending coefficients in ``x``.
    """

    __slots__ = ("breakpoints", "pieces")

    def __init__(self, breakpoints: Sequence[float], pieces: Sequence[Sequence[float]]):
        bp = np.asarray(breakpoints, dtype=float)
        if bp.ndim != 1 or bp.size < 2 or bp[0] != 0.0 or bp[-1] != 1.0:
            raise ValueError("breakpoints must run from 0 to 1")
        if np.any(np.diff(bp) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        if len(pieces) != bp.size - 1:
            raise ValueError(f"{bp.size - 1} intervals need as many pieces, got {len(pieces)}")
        bp.setflags(write=False)
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "pieces", tuple(_trim(c) for c in pieces))

    def __setattr__(self, name, value):
        raise AttributeError("PiecewiseFunction is immutable")

    @classmethod
    def constant(cls, value: float) -> "PiecewiseFunction":
        return cls([0.0, 1.0], [[value]])

    @classmethod
    def polynomial(cls, coeffs) -> "PiecewiseFunction":
        return cls([0.0, 1.0], [coeffs])

    def intervals(self):
        return zip(self.breakpoints[:-1], self.breakpoints[1:], self.pieces)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.clip(np.searchsorted(self.breakpoints, x, side="right") - 1, 0, len(self.pieces) - 1)
        out = np.empty_like(x)
        for i, coeffs in enumerate(self.pieces):
            mask = idx == i
            out[mask] = P.polyval(x[mask], coeffs)
        return out if out.ndim else float(out)

    def continuity_defect(self) -> float:
        """Largest jump at an interior breakpoint."""
        jumps = [
            abs(P.polyval(b, left) - P.polyval(b, right))
            for b, left, right in zip(self.breakpoints[1:-1], self.pieces[:-1], self.pieces[1:])
        ]
        return float(max(jumps, default=0.0))

    def is_continuous(self, tol: float = CONTINUITY_TOL) -> bool:
        return self.continuity_defect() <= tol

    # arithmetic on the common refinement

    def refine(self, breakpoints) -> "PiecewiseFunction":
        bp = np.union1d(self.breakpoints, breakpoints)
        owner = np.searchsorted(self.breakpoints, bp[:-1], side="right") - 1
        return PiecewiseFunction(bp, [self.pieces[i] for i in owner])

    def _combine(self, other, op):
        if isinstance(other, Number):
            other = PiecewiseFunction.constant(float(other))
        if not isinstance(other, PiecewiseFunction):
            return NotImplemented
        bp = np.union1d(self.breakpoints, other.breakpoints)
        f, g = self.refine(bp), other.refine(bp)
        return PiecewiseFunction(bp, [op(a, b) for a, b in zip(f.pieces, g.pieces)])

    def __add__(self, other):
        return self._combine(other, P.polyadd)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, P.polysub)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return PiecewiseFunction(self.breakpoints, [-c for c in self.pieces])

    def __mul__(self, other):
        if isinstance(other, Number):
            return PiecewiseFunction(self.breakpoints, [other * c for c in self.pieces])
        return self._combine(other, P.polymul)

    __rmul__ = __mul__

    # extrema

    def _piece_extrema(self, lo, hi, coeffs):
        candidates = [lo, hi]
        if coeffs.size > 2:
            for r in P.polyroots(P.polyder(coeffs)):
                if abs(r.imag) < 1e-12 and lo < r.real < hi:
                    candidates.append(r.real)
        return P.polyval(np.array(candidates), coeffs)

    def minimum(self) -> float:
        return float(min(self._piece_extrema(lo, hi, c).min() for lo, hi, c in self.intervals()))

    def maximum(self) -> float:
        return float(max(self._piece_extrema(lo, hi, c).max() for lo, hi, c in self.intervals()))

    def sup_norm(self) -> float:
        return float(
            max(np.abs(self._piece_extrema(lo, hi, c)).max() for lo, hi, c in self.intervals())
        )

    def __repr__(self):
        return (
            f"PiecewiseFunction(breakpoints={self.breakpoints.tolist()}, "
            f"pieces={[c.tolist() for c in self.pieces]})"
        )


def make_fn(n: int) -> PiecewiseFunction:
    """The density ``f_n``: ramp ``2nx`` up to ``1/2n``, constant 1, then ramp to 2 at ``x = 1``."""
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    h = 1.0 / (2 * n)
    ramp_up = [0.0, 2.0 * n]
    ramp_end = [2.0 - 2.0 * n, 2.0 * n]
    if n == 1:
        # the middle interval (1/2, 1/2) is empty
        return PiecewiseFunction([0.0, h, 1.0], [ramp_up, ramp_end])
    return PiecewiseFunction([0.0, h, 1.0 - h, 1.0], [ramp_up, [1.0], ramp_end])


def lebesgue_trace(f: PiecewiseFunction) -> float:
    """``int_0^1 f(x) dx``, exact per piece.

    Each piece uses a Gauss-Legendre rule with enough nodes to be exact for
    its degree. Unlike differencing the antiderivative at the endpoints, this
    never cancels large coefficients of short, steep pieces.
    """
    total = 0.0
    for lo, hi, c in f.intervals():
        nodes, weights = _legendre(c.size // 2 + 1)
        half = 0.5 * (hi - lo)
        total += half * float(weights @ P.polyval(lo + half * (nodes + 1.0), c))
    return total


@functools.lru_cache(maxsize=None)
def _legendre(points: int):
    return np.polynomial.legendre.leggauss(points)


def uniform_norm_distance(f: PiecewiseFunction, g: PiecewiseFunction) -> float:
    return (f - g).sup_norm()


def _sqrt_linear_integral(coeffs: np.ndarray, lo: float, hi: float) -> float:
    """Exact ``int_lo^hi sqrt(beta + alpha x) dx`` for a nonnegative linear piece."""
    beta = float(coeffs[0])
    alpha = float(coeffs[1]) if coeffs.size > 1 else 0.0
    if alpha == 0.0:
        return math.sqrt(max(beta, 0.0)) * (hi - lo)
    upper = max(beta + alpha * hi, 0.0)
    lower = max(beta + alpha * lo, 0.0)
    return 2.0 / (3.0 * alpha) * (upper**1.5 - lower**1.5)


def sqrt_integral(
    f: PiecewiseFunction, quad: QuadratureSpec = QuadratureSpec()
) -> float:
    """``int_0^1 sqrt(f)`` for nonnegative ``f``.

    Linear pieces use their antiderivative when ``quad.exact_linear`` is set;
    everything else goes through adaptive Gauss-Kronrod quadrature with the
    error budget split evenly across pieces.
    """
    if f.minimum() < -NONNEG_TOL:
        raise DomainError("square root of a function with negative values", f.minimum())
    budget = QuadratureSpec(
        quad.atol / len(f.pieces), quad.max_intervals, quad.exact_linear
    )
    total = 0.0
    for lo, hi, c in f.intervals():
        if quad.exact_linear and c.size <= 2:
            total += _sqrt_linear_integral(c, lo, hi)
        else:
            integrand = lambda x, c=c: np.sqrt(np.clip(P.polyval(x, c), 0.0, None))
            total += integrate(integrand, lo, hi, budget).value
    return total


def bures_distance_functions(
    f: PiecewiseFunction, g: PiecewiseFunction, quad: QuadratureSpec = QuadratureSpec()
) -> float:
    """``sqrt(1 - rho(sqrt(f g)))`` for densities ``f, g`` (nonnegative, ``rho = 1``).

    In a commutative algebra ``|sqrt(f) sqrt(g)| = sqrt(f g)``.

    Raises:
        DomainError: ``f`` or ``g`` is negative somewhere or does not integrate to 1.
    """
    for h in (f, g):
        lowest = h.minimum()
        if lowest < -NONNEG_TOL:
            raise DomainError(f"density takes the negative value {lowest:.3e}", lowest)
        mass = lebesgue_trace(h)
        if abs(mass - 1.0) > 1e-10:
            raise DomainError(f"density integrates to {mass!r}, not 1", mass)
    overlap = sqrt_integral(f * g, quad)
    if overlap > 1.0 + 1e-8:
        raise NumericalConsistencyError(f"rho(sqrt(fg)) = {overlap!r} exceeds 1")
    return math.sqrt(max(1.0 - overlap, 0.0))


def fineness_closed_form(n: int) -> float:
    """``sqrt((3 - 2 sqrt 2) / (3 n))``, the Bures distance from ``f_n`` to 1."""
    return math.sqrt((3.0 - 2.0 * math.sqrt(2.0)) / (3.0 * n))


@dataclass(frozen=True)
class FinenessRow:
    n: int
    bures: float
    uniform: float
    closed_form: float

    @property
    def residual(self) -> float:
        return abs(self.bures - self.closed_form)


@dataclass(frozen=True)
class FinenessTable:
    rows: tuple[FinenessRow, ...]

    def failures(self, residual_tol: float = 1e-8) -> list[str]:
        """Descriptions of every row that breaks the expected pattern."""
        problems = []
        for prev, row in zip(self.rows, self.rows[1:]):
            if not row.bures < prev.bures:
                problems.append(f"n={row.n}: bures {row.bures!r} not below n={prev.n}")
        for row in self.rows:
            if row.uniform != 1.0:
                problems.append(f"n={row.n}: uniform distance {row.uniform!r} != 1")
            if row.residual > residual_tol:
                problems.append(f"n={row.n}: closed-form residual {row.residual:.3e}")
        if self.rows and self.rows[-1].bures > fineness_closed_form(self.rows[-1].n) + 1e-9:
            problems.append("final Bures distance above its closed form")
        return problems

    def to_csv(self, residual: bool = False) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        header = ["n", "bures", "uniform"] + (["residual"] if residual else [])
        writer.writerow(header)
        for r in self.rows:
            line = [r.n, f"{r.bures:.12g}", f"{r.uniform:.12g}"]
            if residual:
                line.append(f"{r.residual:.12g}")
            writer.writerow(line)
        return buf.getvalue()


def strict_fineness_table(
    N: int, quad: QuadratureSpec = QuadratureSpec(), n_min: int = 1, check: bool = True
) -> FinenessTable:
    """Bures and uniform distances from ``f_n`` to the constant 1 for ``n = n_min..N``.

    With ``check`` set, raises :class:`NumericalConsistencyError` unless the
    Bures column strictly decreases along its closed form while the uniform
    column stays at 1.
    """
    if N < 1 or n_min < 1 or n_min > N:
        raise ValueError(f"empty or invalid range n = {n_min}..{N}")
    one = PiecewiseFunction.constant(1.0)
    rows = tuple(
        FinenessRow(
            n,
            bures_distance_functions(make_fn(n), one, quad),
            uniform_norm_distance(make_fn(n), one),
            fineness_closed_form(n),
        )
        for n in range(n_min, N + 1)
    )
    table = FinenessTable(rows)
    if check:
        problems = table.failures()
        if problems:
            raise NumericalConsistencyError("; ".join(problems))
    return table


def figure_data_csv(points: int = 1000, ns: Sequence[int] = (1, 2, 3)) -> str:
    """Samples ``x, f_1(x), f_2(x), ...`` on a uniform grid, for plotting."""
    if points < 2:
        raise ValueError("need at least two grid points")
    xs = np.linspace(0.0, 1.0, points)
    columns = [make_fn(n)(xs) for n in ns]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["x"] + [f"f{n}" for n in ns])
    for i, x in enumerate(xs):
        writer.writerow([f"{x:.12g}"] + [f"{col[i]:.12g}" for col in columns])
    return buf.getvalue()
