"""Cyclic Jacobi eigensolver for complex Hermitian matrices."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import ConvergenceError, DomainError

MAX_SWEEPS = 100
_EPS = np.finfo(float).eps
_SMALL = 16


@dataclass(frozen=True)
class EigenDecomposition:
    """Spectrum of a Hermitian matrix.

    Attributes:
        eigenvalues: real eigenvalues in ascending order.
        eigenvectors: unitary matrix whose columns are the matching
            eigenvectors, so ``A = V @ diag(w) @ V^*``.
        sweeps: number of Jacobi sweeps that were needed.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    sweeps: int = 0

    def reconstruct(self, values=None) -> np.ndarray:
        """Return ``V diag(values) V^*``; ``values`` defaults to the eigenvalues."""
        w = self.eigenvalues if values is None else np.asarray(values)
        v = self.eigenvectors
        return (v * w) @ v.conj().T

    def residuals(self, matrix) -> np.ndarray:
        """Per-eigenpair residual norms ``||A v_i - w_i v_i||``."""
        a = np.asarray(matrix)
        r = a @ self.eigenvectors - self.eigenvectors * self.eigenvalues
        return np.linalg.norm(r, axis=0)

    def unitarity_defect(self) -> float:
        v = self.eigenvectors
        return float(np.linalg.norm(v.conj().T @ v - np.eye(v.shape[1]), 2))


def hermitian_defect(matrix) -> float:
    a = np.asarray(matrix)
    return float(np.linalg.norm(a - a.conj().T, 2)) if a.size else 0.0


def hermitian_eig(matrix, tol: float = 1e-10) -> EigenDecomposition:
    """Diagonalise a Hermitian matrix with cyclic Jacobi sweeps.

    Args:
        matrix: square complex (or real) array.
        tol: Hermiticity tolerance, relative to ``max(1, ||A||)``. The
            sweeps run until the off-diagonal Frobenius mass falls below
            ``tol * 1e-5 * max(1, ||A||_F)`` or becomes numerically zero.

    Raises:
        DomainError: if ``A`` is not square or not Hermitian within ``tol``.
        ConvergenceError: if :data:`MAX_SWEEPS` sweeps do not suffice.
    """
    a = np.asarray(matrix, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if n == 1:
        z = complex(a[0, 0])
        if 2.0 * abs(z.imag) > tol * max(1.0, abs(z)):
            raise DomainError(
                f"matrix is not Hermitian: ||A - A*|| = {2 * abs(z.imag):.3e}",
                certificate=2 * abs(z.imag),
            )
        return EigenDecomposition(np.array([z.real]), np.ones((1, 1), dtype=complex), 0)
    if n <= _SMALL:
        return _small_eig(a, n, tol)
    ah = a.conj().T
    frob = math.sqrt(float(np.vdot(a, a).real))
    diff = a - ah
    defect = math.sqrt(float(np.vdot(diff, diff).real))
    _check_defect(defect, frob, n, tol)
    a = 0.5 * (a + ah)
    w, v, sweeps = _jacobi_numpy(a, tol * 1e-5 * max(1.0, frob))
    order = np.argsort(w, kind="stable")
    return EigenDecomposition(w[order], v[:, order], sweeps)


def _check_defect(defect: float, frob: float, n: int, tol: float) -> None:
    # Frobenius bounds: defect_F <= tol * ||A||_F / sqrt(n) implies the operator-norm condition.
    if defect > tol * max(1.0, frob / math.sqrt(n)):
        raise DomainError(
            f"matrix is not Hermitian: ||A - A*|| = {defect:.3e}", certificate=defect
        )


def _small_eig(a: np.ndarray, n: int, tol: float) -> EigenDecomposition:
    m = a.tolist()
    frob2 = 0.0
    defect2 = 0.0
    for i in range(n):
        row = m[i]
        z = row[i]
        frob2 += z.real * z.real + z.imag * z.imag
        defect2 += 4.0 * z.imag * z.imag
        for j in range(i + 1, n):
            z = row[j]
            u = m[j][i]
            frob2 += z.real * z.real + z.imag * z.imag + u.real * u.real + u.imag * u.imag
            d = z - u.conjugate()
            defect2 += 2.0 * (d.real * d.real + d.imag * d.imag)
    frob = math.sqrt(frob2)
    _check_defect(math.sqrt(defect2), frob, n, tol)
    for i in range(n):
        row = m[i]
        row[i] = complex(row[i].real)
        for j in range(i + 1, n):
            z = 0.5 * (row[j] + m[j][i].conjugate())
            row[j] = z
            m[j][i] = z.conjugate()
    w, v, sweeps = _jacobi_lists(m, n, tol * 1e-5 * max(1.0, frob))
    order = sorted(range(n), key=w.__getitem__)
    values = np.array([w[i] for i in order])
    vectors = np.array([[row[i] for i in order] for row in v], dtype=complex)
    return EigenDecomposition(values, vectors, sweeps)


def _rotation(apq: complex, app: float, aqq: float):
    """Return ``(t, R)`` where the unitary ``R`` zeroes the (p, q) entry.

    ``R`` phase-shifts column q so the pivot becomes real and then applies a
    plane rotation; ``t`` is the tangent of the rotation angle.
    """
    mag = abs(apq)
    phase = apq.conjugate() / mag
    theta = (aqq - app) / (2.0 * mag)
    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
    c = 1.0 / math.sqrt(t * t + 1.0)
    s = t * c
    return t, (c, s, -s * phase, c * phase)


def _negligible(mag: float, app: float, aqq: float) -> bool:
    return mag <= 0.25 * _EPS * (abs(app) + abs(aqq))


def _jacobi_lists(m: list, n: int, threshold: float):
    # Scalar kernel with the rotation inlined: for tiny blocks plain Python
    # arithmetic beats numpy call overhead. Works in place on the nested list m.
    v = [[1.0 + 0j if i == j else 0j for j in range(n)] for i in range(n)]
    sqrt = math.sqrt
    eps = 0.25 * _EPS
    for sweep in range(MAX_SWEEPS + 1):
        off = 0.0
        for i in range(n - 1):
            row = m[i]
            for j in range(i + 1, n):
                z = row[j]
                off += z.real * z.real + z.imag * z.imag
        off = sqrt(2.0 * off)
        if off <= threshold:
            break
        if sweep == MAX_SWEEPS:
            raise ConvergenceError(
                f"Jacobi did not converge in {MAX_SWEEPS} sweeps (off-diagonal {off:.3e})"
            )
        for p in range(n - 1):
            mp = m[p]
            for q in range(p + 1, n):
                mq = m[q]
                apq = mp[q]
                mag = abs(apq)
                if mag == 0.0:
                    continue
                app = mp[p].real
                aqq = mq[q].real
                if mag <= eps * (abs(app) + abs(aqq)):
                    mp[q] = mq[p] = 0j
                    continue
                phase = apq.conjugate() / mag
                theta = (aqq - app) / (2.0 * mag)
                t = 1.0 / (abs(theta) + sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / sqrt(t * t + 1.0)
                s = t * c
                r10 = -s * phase
                r11 = c * phase
                for k in range(n):
                    if k == p or k == q:
                        continue
                    rk = m[k]
                    akp = rk[p]
                    akq = rk[q]
                    new_p = akp * c + akq * r10
                    new_q = akp * s + akq * r11
                    rk[p] = new_p
                    rk[q] = new_q
                    mp[k] = new_p.conjugate()
                    mq[k] = new_q.conjugate()
                mp[q] = mq[p] = 0j
                mp[p] = complex(app - t * mag)
                mq[q] = complex(aqq + t * mag)
                for row in v:
                    vp = row[p]
                    vq = row[q]
                    row[p] = vp * c + vq * r10
                    row[q] = vp * s + vq * r11
    return [m[i][i].real for i in range(n)], v, sweep


def _jacobi_numpy(a: np.ndarray, threshold: float):
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    for sweep in range(MAX_SWEEPS + 1):
        off = a - np.diag(a.diagonal())
        off = float(np.sqrt(np.sum(off.real**2 + off.imag**2)))
        if off <= threshold:
            break
        if sweep == MAX_SWEEPS:
            raise ConvergenceError(
                f"Jacobi did not converge in {MAX_SWEEPS} sweeps (off-diagonal {off:.3e})"
            )
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag == 0.0:
                    continue
                app = a[p, p].real
                aqq = a[q, q].real
                if _negligible(mag, app, aqq):
                    a[p, q] = a[q, p] = 0.0
                    continue
                t, r = _rotation(apq, app, aqq)
                rot = np.array(r).reshape(2, 2)
                idx = [p, q]
                a[:, idx] = a[:, idx] @ rot
                a[idx, :] = rot.conj().T @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
                a[p, p] = app - t * mag
                a[q, q] = aqq + t * mag
                v[:, idx] = v[:, idx] @ rot
    return a.real.diagonal().copy(), v, sweep


@dataclass(frozen=True)
class SingularDecomposition:
    """``M V = U diag(sigma)`` with ``V`` unitary; ``|M| = V diag(sigma) V^*``."""

    singular_values: np.ndarray
    right_vectors: np.ndarray
    sweeps: int = 0

    def abs_matrix(self) -> np.ndarray:
        v = self.right_vectors
        return (v * self.singular_values) @ v.conj().T


def jacobi_svd(matrix) -> SingularDecomposition:
    """Singular values by one-sided (Hestenes) Jacobi.

    Columns of ``M`` are rotated pairwise until mutually orthogonal; the
    singular values are then the column norms. Unlike ``sqrt(eig(M^* M))``,
    small singular values keep an absolute error of order ``eps * ||M||``.

    Raises:
        ConvergenceError: if :data:`MAX_SWEEPS` sweeps do not suffice.
    """
    a = np.array(matrix, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if n == 1:
        return SingularDecomposition(np.array([abs(a[0, 0])]), np.ones((1, 1), dtype=complex))
    cols = a.T.tolist()
    v = [[1.0 + 0j if i == j else 0j for i in range(n)] for j in range(n)]  # columns of V
    sqrt = math.sqrt
    tiny = 4.0 * n * _EPS
    for sweep in range(MAX_SWEEPS + 1):
        rotated = False
        # squared column norms, refreshed each sweep and updated exactly per rotation
        norms = [sum([z.real * z.real + z.imag * z.imag for z in col]) for col in cols]
        for p in range(n - 1):
            up = cols[p]
            for q in range(p + 1, n):
                uq = cols[q]
                alpha = norms[p]
                beta = norms[q]
                gamma = 0j
                for k in range(n):
                    gamma += up[k].conjugate() * uq[k]
                mag = abs(gamma)
                if mag == 0.0 or mag <= tiny * sqrt(alpha * beta):
                    continue
                if sweep == MAX_SWEEPS:
                    raise ConvergenceError(f"one-sided Jacobi did not converge in {MAX_SWEEPS} sweeps")
                rotated = True
                phase = gamma.conjugate() / mag
                theta = (beta - alpha) / (2.0 * mag)
                t = 1.0 / (abs(theta) + sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / sqrt(t * t + 1.0)
                s = t * c
                r10 = -s * phase
                r11 = c * phase
                norms[p] = max(alpha - t * mag, 0.0)
                norms[q] = max(beta + t * mag, 0.0)
                vp = v[p]
                vq = v[q]
                for k in range(n):
                    xk = up[k]
                    yk = uq[k]
                    up[k] = xk * c + yk * r10
                    uq[k] = xk * s + yk * r11
                    xk = vp[k]
                    yk = vq[k]
                    vp[k] = xk * c + yk * r10
                    vq[k] = xk * s + yk * r11
        if not rotated:
            break
    sigma = np.array([sqrt(sum([z.real * z.real + z.imag * z.imag for z in col])) for col in cols])
    return SingularDecomposition(sigma, np.array(v, dtype=complex).T, sweep)
