"""Finite-dimensional C*-algebras as direct sums of matrix blocks.

An algebra ``M_{n_1} + ... + M_{n_K}`` is described by an :class:`AlgebraShape`;
its members are :class:`Element` objects holding one dense complex block per
summand. A :class:`Trace` weights the ordinary matrix trace of each block, and
:class:`DensityElement` is a positive element of trace one.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from numbers import Number
from typing import Sequence

import numpy as np

from .eigen import hermitian_eig
from .exceptions import DegenerateInputError, DomainError, ShapeMismatchError

TOL_POS = 1e-10
TOL_TRACE = 1e-12


@dataclass(frozen=True)
class AlgebraShape:
    """Block dimensions ``(n_1, ..., n_K)`` of ``M_{n_1} + ... + M_{n_K}``."""

    block_dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.block_dims)
        if not dims:
            raise ShapeMismatchError("an algebra needs at least one block")
        if any(d < 1 for d in dims):
            raise ShapeMismatchError(f"block dimensions must be positive, got {dims}")
        object.__setattr__(self, "block_dims", dims)

    @classmethod
    def commutative(cls, n: int) -> "AlgebraShape":
        """Shape of ``C^n``, i.e. ``n`` blocks of size one."""
        return cls((1,) * n)

    @property
    def n_blocks(self) -> int:
        return len(self.block_dims)

    @property
    def dimension(self) -> int:
        """Complex dimension ``sum n_k^2``."""
        return sum(d * d for d in self.block_dims)

    @property
    def is_commutative(self) -> bool:
        return all(d == 1 for d in self.block_dims)

    def __iter__(self):
        return iter(self.block_dims)

    def __len__(self):
        return len(self.block_dims)


def _as_shape(shape) -> AlgebraShape:
    return shape if isinstance(shape, AlgebraShape) else AlgebraShape(tuple(shape))


class Element:
    """An element of a block-diagonal algebra.

    Blocks are stored as read-only complex arrays; arithmetic returns new
    elements. ``a @ b`` is the algebra product, ``a * s`` scales by a number,
    and ``a.adjoint()`` (or ``a.H``) is the blockwise conjugate transpose.
    """

    __slots__ = ("shape", "blocks")

    def __init__(self, shape, blocks: Sequence):
        shape = _as_shape(shape)
        if len(blocks) != shape.n_blocks:
            raise ShapeMismatchError(
                f"shape {shape.block_dims} needs {shape.n_blocks} blocks, got {len(blocks)}"
            )
        frozen = []
        for d, block in zip(shape.block_dims, blocks):
            arr = np.array(block, dtype=complex).reshape(np.shape(block) or (1, 1))
            if arr.shape != (d, d):
                raise ShapeMismatchError(f"expected a {d}x{d} block, got {arr.shape}")
            arr.setflags(write=False)
            frozen.append(arr)
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "blocks", tuple(frozen))

    def __setattr__(self, name, value):
        raise AttributeError("Element is immutable")

    @classmethod
    def _wrap(cls, shape: AlgebraShape, blocks) -> "Element":
        # trusted path for results of blockwise arithmetic: shapes already match
        self = object.__new__(cls)
        frozen = []
        for arr in blocks:
            arr = np.asarray(arr, dtype=complex)
            arr.setflags(write=False)
            frozen.append(arr)
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "blocks", tuple(frozen))
        return self

    # constructors

    @classmethod
    def identity(cls, shape) -> "Element":
        shape = _as_shape(shape)
        return cls(shape, [np.eye(d) for d in shape.block_dims])

    @classmethod
    def zeros(cls, shape) -> "Element":
        shape = _as_shape(shape)
        return cls(shape, [np.zeros((d, d)) for d in shape.block_dims])

    @classmethod
    def from_vector(cls, values) -> "Element":
        """Element of ``C^n`` with the given coordinates."""
        values = np.asarray(values, dtype=complex).ravel()
        return cls(AlgebraShape.commutative(len(values)), [[[v]] for v in values])

    @classmethod
    def random(cls, shape, rng: np.random.Generator) -> "Element":
        """Standard complex Gaussian entries in every block."""
        shape = _as_shape(shape)
        return cls(
            shape,
            [rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d)) for d in shape],
        )

    @classmethod
    def random_hermitian(cls, shape, rng: np.random.Generator) -> "Element":
        a = cls.random(shape, rng)
        return (a + a.adjoint()) * 0.5

    # algebra

    def _check(self, other: "Element"):
        if not isinstance(other, Element):
            return NotImplemented
        if other.shape != self.shape:
            raise ShapeMismatchError(
                f"shapes differ: {self.shape.block_dims} vs {other.shape.block_dims}"
            )

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return Element._wrap(self.shape, [a + b for a, b in zip(self.blocks, other.blocks)])

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return Element._wrap(self.shape, [a - b for a, b in zip(self.blocks, other.blocks)])

    def __neg__(self):
        return Element._wrap(self.shape, [-a for a in self.blocks])

    def __mul__(self, scalar):
        if not isinstance(scalar, Number):
            return NotImplemented
        return Element._wrap(self.shape, [scalar * a for a in self.blocks])

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        if not isinstance(scalar, Number):
            return NotImplemented
        return Element._wrap(self.shape, [a / scalar for a in self.blocks])

    def __matmul__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return Element._wrap(self.shape, [a @ b for a, b in zip(self.blocks, other.blocks)])

    def adjoint(self) -> "Element":
        return Element._wrap(self.shape, [a.conj().T for a in self.blocks])

    @property
    def H(self) -> "Element":
        return self.adjoint()

    # inspection

    def diagonal(self) -> np.ndarray:
        """Coordinates of a commutative element (real parts for self-adjoint use)."""
        if not self.shape.is_commutative:
            raise ShapeMismatchError("diagonal() needs a commutative shape")
        return np.array([b[0, 0] for b in self.blocks])

    def hermitian_defect(self) -> float:
        return max(float(np.linalg.norm(b - b.conj().T, 2)) for b in self.blocks)

    def is_self_adjoint(self, tol: float = 1e-12) -> bool:
        return self.hermitian_defect() <= tol * max(1.0, cstar_norm(self))

    def allclose(self, other: "Element", atol: float = 1e-12) -> bool:
        self._check(other)
        return all(np.allclose(a, b, rtol=0, atol=atol) for a, b in zip(self.blocks, other.blocks))

    def __eq__(self, other):
        if not isinstance(other, Element):
            return NotImplemented
        return self.shape == other.shape and all(
            np.array_equal(a, b) for a, b in zip(self.blocks, other.blocks)
        )

    __hash__ = None

    def __repr__(self):
        return f"Element(shape={self.shape.block_dims}, blocks={[b.tolist() for b in self.blocks]})"

    # serialisation

    def to_dict(self) -> dict:
        """JSON-ready form: blocks as row-major ``[re, im]`` pairs."""
        return {
            "shape": list(self.shape.block_dims),
            "blocks": [
                [[[float(z.real), float(z.imag)] for z in row] for row in block]
                for block in self.blocks
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Element":
        blocks = [
            [[complex(re, im) for re, im in row] for row in block] for block in data["blocks"]
        ]
        return cls(AlgebraShape(tuple(data["shape"])), blocks)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "Element":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class Trace:
    """Faithful trace ``tau(a) = sum_k w_k Tr(a_k)`` with positive block weights.

    The weights are not normalised; ``tau(1)`` may be any positive number.
    """

    shape: AlgebraShape
    weights: tuple[float, ...]

    def __post_init__(self):
        shape = _as_shape(self.shape)
        weights = tuple(float(w) for w in self.weights)
        if len(weights) != shape.n_blocks:
            raise ShapeMismatchError(
                f"need one weight per block ({shape.n_blocks}), got {len(weights)}"
            )
        if not all(w > 0 and math.isfinite(w) for w in weights):
            raise DomainError(f"trace weights must be finite and positive, got {weights}")
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def unit(cls, shape) -> "Trace":
        """Unit weight on every block (the sum of matrix traces)."""
        shape = _as_shape(shape)
        return cls(shape, (1.0,) * shape.n_blocks)

    @property
    def min_weight(self) -> float:
        return min(self.weights)

    @property
    def norm_bound(self) -> float:
        """Upper bound ``1 / min_k w_k`` on the C*-norm of any density element."""
        return 1.0 / self.min_weight

    def __call__(self, a: Element) -> complex:
        return trace_eval(self, a)

    def to_dict(self) -> dict:
        return {"shape": list(self.shape.block_dims), "weights": list(self.weights)}

    @classmethod
    def from_dict(cls, data: dict) -> "Trace":
        return cls(AlgebraShape(tuple(data["shape"])), tuple(data["weights"]))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "Trace":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class PositivityCertificate:
    """Outcome of :func:`check_positive`.

    ``min_eigenvalue`` is the smallest eigenvalue over all blocks, which is
    the witness of failure when ``positive`` is false.
    """

    positive: bool
    min_eigenvalue: float
    hermitian_defect: float

    def __bool__(self):
        return self.positive


@dataclass(frozen=True)
class DensityElement:
    """Positive element with ``tau(a) = 1``.

    Build these with :func:`normalize_to_density` or :func:`sample_density`,
    which certify positivity. The constructor only checks shape and trace.
    """

    element: Element
    trace: Trace

    def __post_init__(self):
        if self.element.shape != self.trace.shape:
            raise ShapeMismatchError("density element and trace live on different shapes")
        value = trace_eval(self.trace, self.element)
        if abs(value - 1.0) > TOL_TRACE * 10:
            raise DomainError(f"density element has trace {value!r}, expected 1", certificate=value)

    @property
    def shape(self) -> AlgebraShape:
        return self.element.shape

    @property
    def blocks(self):
        return self.element.blocks

    def diagonal(self) -> np.ndarray:
        """Real coordinates of a commutative density element."""
        return self.element.diagonal().real

    def to_dict(self) -> dict:
        return {"element": self.element.to_dict(), "trace": self.trace.to_dict()}


def _check_same(a: Element, b: Element):
    if a.shape != b.shape:
        raise ShapeMismatchError(f"shapes differ: {a.shape.block_dims} vs {b.shape.block_dims}")


def _block_norm(block: np.ndarray) -> float:
    if block.shape == (1, 1):
        return abs(block[0, 0])
    top = hermitian_eig(block.conj().T @ block).eigenvalues[-1]
    return math.sqrt(max(top, 0.0))


def cstar_norm(a: Element) -> float:
    """Operator norm, maximised over blocks: ``max_k sqrt(lambda_max(a_k^* a_k))``."""
    return max(_block_norm(b) for b in a.blocks)


def cstar_distance(a: Element, b: Element) -> float:
    _check_same(a, b)
    return cstar_norm(a - b)


def trace_eval(tau: Trace, a: Element) -> complex:
    if tau.shape != a.shape:
        raise ShapeMismatchError(
            f"trace on {tau.shape.block_dims} applied to element of shape {a.shape.block_dims}"
        )
    return complex(sum(w * b.trace() for w, b in zip(tau.weights, a.blocks)))


def tau_norm(tau: Trace, a: Element) -> float:
    """The Hilbert-Schmidt type norm ``sqrt(tau(a^* a))``."""
    if tau.shape != a.shape:
        raise ShapeMismatchError("trace and element shapes differ")
    # tau(a^* a) = sum_k w_k ||a_k||_F^2, computed without forming the product
    total = sum(w * float(np.sum(np.abs(b) ** 2)) for w, b in zip(tau.weights, a.blocks))
    return math.sqrt(total)


def check_positive(a: Element, tol: float = TOL_POS) -> PositivityCertificate:
    """Certify ``a >= 0`` up to ``tol`` relative to ``max(1, ||a||)``."""
    defect = max(float(np.linalg.norm(b - b.conj().T)) for b in a.blocks)
    if defect > tol * max(1.0, cstar_norm(a)):
        return PositivityCertificate(False, math.nan, defect)
    # for Hermitian a the norm is the largest |eigenvalue|
    spectra = [hermitian_eig(b, tol=max(tol, 1e-10)).eigenvalues for b in a.blocks]
    scale = max(1.0, max(float(np.abs(w).max()) for w in spectra))
    min_eig = min(float(w[0]) for w in spectra)
    return PositivityCertificate(bool(min_eig >= -tol * scale), min_eig, defect)


def _scalar_block(b: np.ndarray, tol: float) -> np.ndarray:
    z = complex(b[0, 0])
    if abs(z.imag) > tol * max(1.0, abs(z)):
        raise DomainError(f"element is not self-adjoint (defect {2 * abs(z.imag):.3e})", 2 * abs(z.imag))
    return np.array([[z.real]], dtype=complex)


def normalize_to_density(tau: Trace, a: Element, tol: float = TOL_POS) -> DensityElement:
    """Return ``a / tau(a)`` certified as a density element.

    Eigenvalues in ``[-tol * max(1, ||a||), 0)`` are clamped to zero first.

    Raises:
        DomainError: ``a`` is not positive; ``certificate`` holds the most
            negative eigenvalue (or the Hermitian defect).
        DegenerateInputError: ``tau(a)`` is not above ``tol``.
    """
    if tau.shape != a.shape:
        raise ShapeMismatchError("trace and element shapes differ")
    hermitian = []
    for b in a.blocks:
        if b.shape == (1, 1):
            hermitian.append((_scalar_block(b, tol), None))
            continue
        defect = float(np.linalg.norm(b - b.conj().T))
        if defect > tol * max(1.0, float(np.linalg.norm(b))):
            raise DomainError(
                f"element is not self-adjoint (defect {defect:.3e})", certificate=defect
            )
        h = 0.5 * (b + b.conj().T)
        hermitian.append((h, hermitian_eig(h, tol=max(tol, 1e-10))))
    # for Hermitian a the norm is the largest |eigenvalue|
    scale = max(
        1.0,
        max(abs(h[0, 0].real) if e is None else float(np.abs(e.eigenvalues).max()) for h, e in hermitian),
    )
    blocks = []
    for h, eig in hermitian:
        lowest = h[0, 0].real if eig is None else float(eig.eigenvalues[0])
        if lowest < -tol * scale:
            raise DomainError(
                f"element is not positive: min eigenvalue {lowest:.3e}", certificate=lowest
            )
        if lowest < 0.0 and eig is None:
            h = np.zeros((1, 1), dtype=complex)
        elif lowest < 0.0:
            h = eig.reconstruct(np.clip(eig.eigenvalues, 0.0, None))
            h = 0.5 * (h + h.conj().T)
        blocks.append(h)
    clamped = Element._wrap(a.shape, blocks)
    total = trace_eval(tau, clamped).real
    if total <= tol:
        raise DegenerateInputError(f"cannot normalise: tau(a) = {total:.3e}")
    return DensityElement(clamped / total, tau)


def density_from_vector(tau: Trace, values) -> DensityElement:
    """Density element of ``C^n`` from nonnegative coordinates, normalised by ``tau``."""
    a = Element.from_vector(values)
    return normalize_to_density(tau, a)


def sample_density(tau: Trace, rng_seed: int) -> DensityElement:
    """Random density element ``b^* b / tau(b^* b)``, deterministic in ``rng_seed``."""
    rng = np.random.default_rng(rng_seed)
    b = Element.random(tau.shape, rng)
    # b^* b is positive by construction, so the eigenvalue certificate of
    # normalize_to_density is skipped; only the trace is needed.
    gram = [m.conj().T @ m for m in b.blocks]
    gram = [0.5 * (g + g.conj().T) for g in gram]
    total = sum(w * g.trace().real for w, g in zip(tau.weights, gram))
    return DensityElement(Element._wrap(tau.shape, [g / total for g in gram]), tau)
