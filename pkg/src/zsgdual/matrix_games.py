"""Exact mixed-equilibrium solver for one-shot zero-sum matrix games.

The row player picks row ``u`` and maximizes, the column player picks ``v``
and minimizes; the row player receives ``R[u, v]``. The minimax value and a
pair of optimal mixed strategies are computed by a small dense simplex on
the classic reciprocal-value linear program: after shifting ``R`` so every
entry is positive, maximize ``sum(q)`` subject to ``R q <= 1``; the optimal
objective is ``1/value`` and the two strategies fall out of the primal and
dual solutions of the same tableau.

Bland's rule keeps the pivot sequence deterministic and cycle-free, so
degenerate games terminate and repeated calls return the identical vertex.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PIVOT_TOL = 1e-10


@dataclass(frozen=True)
class MatrixGameSolution:
    value: float
    row_strategy: np.ndarray
    col_strategy: np.ndarray


def value_of(R: np.ndarray, y: np.ndarray, z: np.ndarray) -> float:
    """Expected payoff to the row player under mixed strategies y, z."""
    R = np.asarray(R, dtype=float)
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    if R.ndim != 2 or y.shape != (R.shape[0],) or z.shape != (R.shape[1],):
        raise ValueError(
            f"shape mismatch: R {R.shape}, y {y.shape}, z {z.shape}"
        )
    return float(y @ R @ z)


def solve(R: np.ndarray) -> MatrixGameSolution:
    """Minimax value and optimal mixed strategies of the matrix game R."""
    R = np.asarray(R, dtype=float)
    if R.ndim != 2 or R.size == 0:
        raise ValueError(f"payoff matrix must be 2-D and nonempty, got shape {R.shape}")
    if not np.isfinite(R).all():
        raise ValueError("payoff matrix has non-finite entries")
    m, n = R.shape

    shift = 1.0 - float(R.min())
    Rs = R + shift  # every entry >= 1, so the shifted value is positive

    obj, q, p = _simplex_max_ones(Rs)
    v_shift = 1.0 / obj
    col = np.maximum(q, 0.0) * v_shift
    row = np.maximum(p, 0.0) * v_shift
    col /= col.sum()
    row /= row.sum()
    row.setflags(write=False)
    col.setflags(write=False)
    return MatrixGameSolution(
        value=v_shift - shift, row_strategy=row, col_strategy=col
    )


def _simplex_max_ones(A: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
    """Maximize sum(q) s.t. A q <= 1, q >= 0 with A > 0 elementwise.

    Returns (objective, primal q, dual p). The origin is feasible and the
    positive matrix makes the program bounded, so a single simplex phase
    suffices. Variables 0..n-1 are q, n..n+m-1 the slacks; the dual vector
    is read off the reduced costs of the slack columns at optimality.
    """
    m, n = A.shape
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n : n + m] = np.eye(m)
    T[:m, -1] = 1.0
    T[m, :n] = 1.0  # reduced costs of the maximization objective
    basis = list(range(n, n + m))

    while True:
        enter = -1
        for j in range(n + m):  # Bland: lowest eligible index enters
            if T[m, j] > PIVOT_TOL:
                enter = j
                break
        if enter < 0:
            break
        ratio = np.inf
        leave = -1
        for i in range(m):
            a = T[i, enter]
            if a > PIVOT_TOL:
                r = T[i, -1] / a
                if r < ratio or (r == ratio and basis[i] < basis[leave]):
                    ratio = r
                    leave = i
        if leave < 0:
            raise RuntimeError("simplex detected an unbounded program")
        piv = T[leave, enter]
        T[leave] /= piv
        for i in range(m + 1):
            if i != leave and T[i, enter] != 0.0:
                T[i] -= T[i, enter] * T[leave]
        basis[leave] = enter

    q = np.zeros(n)
    for i, b in enumerate(basis):
        if b < n:
            q[b] = T[i, -1]
    p = -T[m, n : n + m]
    return -T[m, -1], q, p
