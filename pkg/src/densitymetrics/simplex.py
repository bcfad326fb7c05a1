"""Dense tableau simplex for small linear programs.

Only the form needed here is supported::

    maximise  c . z   subject to  A z <= b,  z >= 0,  with b >= 0

so the slack basis is feasible from the start and no phase one is needed.
Bland's rule keeps degenerate problems from cycling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ConvergenceError, DomainError, UnboundedProblemError

PIVOT_TOL = 1e-11
FEASIBILITY_TOL = 1e-10


@dataclass(frozen=True)
class LPResult:
    value: float
    x: np.ndarray
    iterations: int


def simplex_max(c, A, b, max_iter: int | None = None) -> LPResult:
    """Solve ``max c.z s.t. A z <= b, z >= 0`` for ``b >= 0``.

    Raises:
        DomainError: some ``b_i`` is negative beyond the feasibility slack.
        UnboundedProblemError: the objective is unbounded above.
        ConvergenceError: ``max_iter`` pivots were not enough.
    """
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    if np.any(b < -FEASIBILITY_TOL):
        raise DomainError("slack basis infeasible: b has negative entries")

    # tableau rows: constraints, then the reduced-cost row (c_j - z_j)
    tab = np.zeros((m + 1, n + m + 1))
    tab[:m, :n] = A
    tab[:m, n : n + m] = np.eye(m)
    tab[:m, -1] = np.clip(b, 0.0, None)
    tab[m, :n] = c
    basis = list(range(n, n + m))
    limit = max_iter if max_iter is not None else 50 * (n + m) + 100

    for it in range(limit + 1):
        positive = tab[m, :-1] > PIVOT_TOL
        enter = int(positive.argmax())
        if not positive[enter]:
            x = np.zeros(n + m)
            x[basis] = tab[:m, -1]
            return LPResult(float(-tab[m, -1]), x[:n], it)
        if it == limit:
            break

        column = tab[:m, enter]
        rows = np.flatnonzero(column > PIVOT_TOL)
        if rows.size == 0:
            raise UnboundedProblemError(f"objective unbounded along variable {enter}")
        ratios = tab[rows, -1] / column[rows]
        best = ratios.min()
        ties = rows[ratios <= best + FEASIBILITY_TOL * max(1.0, abs(best))]
        leave = int(ties[0]) if ties.size == 1 else min(ties.tolist(), key=basis.__getitem__)

        pivot_row = tab[leave] / tab[leave, enter]
        factors = tab[:, enter].copy()
        factors[leave] = 0.0
        tab -= factors[:, None] * pivot_row
        tab[leave] = pivot_row
        basis[leave] = enter

    raise ConvergenceError(f"simplex did not terminate within {limit} pivots")
