"""Continuous functional calculus on self-adjoint elements.

``f(a)`` is evaluated exactly through the spectrum of each block:
``V diag(f(lambda)) V^*``. Square roots and absolute values, which drive the
Bures metric, are thin wrappers.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .algebra import TOL_POS, Element, cstar_norm
from .eigen import hermitian_eig, jacobi_svd
from .exceptions import DomainError


def _apply(f, values: np.ndarray) -> np.ndarray:
    try:
        out = f(values)
    except TypeError:
        out = None
    if np.shape(out) != np.shape(values):
        out = np.array([f(float(v)) for v in values])
    return np.asarray(out, dtype=float)


def block_function(
    block: np.ndarray,
    f: Callable,
    domain: tuple[float, float] = (-math.inf, math.inf),
    tol: float = TOL_POS,
    scale: float | None = None,
) -> np.ndarray:
    """Apply ``f`` to one Hermitian matrix; see :func:`matrix_function`."""
    lo, hi = domain
    if scale is None:
        scale = max(1.0, float(np.abs(block).sum(axis=1).max()))
    if block.shape == (1, 1):
        w = np.array([block[0, 0].real])
        if not (lo - tol * scale <= w[0] <= hi + tol * scale):
            raise DomainError(
                f"eigenvalue {w[0]:.6g} outside domain [{lo}, {hi}]", certificate=float(w[0])
            )
        return _apply(f, np.clip(w, lo, hi)).reshape(1, 1).astype(complex)
    eig = hermitian_eig(block, tol=max(tol, 1e-10))
    w = eig.eigenvalues
    if w[0] < lo - tol * scale or w[-1] > hi + tol * scale:
        bad = w[0] if w[0] < lo else w[-1]
        raise DomainError(
            f"eigenvalue {bad:.6g} outside domain [{lo}, {hi}]", certificate=float(bad)
        )
    return eig.reconstruct(_apply(f, np.clip(w, lo, hi)))


def matrix_function(
    a: Element,
    f: Callable,
    domain: tuple[float, float] = (-math.inf, math.inf),
    tol: float = TOL_POS,
) -> Element:
    """Evaluate ``f(a)`` for self-adjoint ``a`` block by block.

    Args:
        a: self-adjoint element.
        f: real function; called on a numpy array of eigenvalues, or
            element-wise if it does not vectorise.
        domain: closed interval on which ``f`` is defined, e.g. ``(0, r)``.
        tol: eigenvalues within ``tol * max(1, ||a||)`` of the domain are
            clamped onto it before ``f`` is applied.

    Raises:
        DomainError: a block is not Hermitian, or has an eigenvalue outside
            the domain beyond the clamping tolerance.
    """
    scale = max(1.0, cstar_norm(a))
    return Element(a.shape, [block_function(b, f, domain, tol, scale) for b in a.blocks])


def matrix_sqrt(a: Element, tol: float = TOL_POS) -> Element:
    """Unique positive square root of a positive element."""
    return matrix_function(a, np.sqrt, (0.0, math.inf), tol)


def matrix_abs(a: Element) -> Element:
    """``|a| = sqrt(a^* a)``.

    Built from a one-sided Jacobi SVD ``a V = U S`` as ``V S V^*``, which is the
    same positive square root but keeps small singular values accurate.
    """
    return Element(a.shape, [jacobi_svd(b).abs_matrix() for b in a.blocks])


def polar_unitary(block: np.ndarray) -> tuple[np.ndarray, float]:
    """Return ``(W, Tr|M|)`` with ``W`` unitary and ``M = W |M|``.

    From the LAPACK SVD ``M = U S V^*`` the factor is ``U V^*``, which stays
    exactly unitary even when ``M`` is singular.
    """
    u, s, vh = np.linalg.svd(block)
    return u @ vh, float(s.sum())


def sqrt_psd(block: np.ndarray, tol: float = TOL_POS) -> np.ndarray:
    """Square root of a single positive semidefinite matrix."""
    return block_function(np.asarray(block, dtype=complex), np.sqrt, (0.0, math.inf), tol)


def trace_abs(block: np.ndarray) -> float:
    """``Tr |M|``, the sum of singular values of a single matrix."""
    if block.shape == (1, 1):
        return abs(block[0, 0])
    if block.shape == (2, 2):
        # (s1 + s2)^2 = ||M||_F^2 + 2 |det M|
        (a, b), (c, d) = block.tolist()
        frob = sum(z.real * z.real + z.imag * z.imag for z in (a, b, c, d))
        return math.sqrt(frob + 2.0 * abs(a * d - b * c))
    return float(jacobi_svd(block).singular_values.sum())
