"""Bounded-variable primal revised simplex.

Solves ``min c.x  s.t.  A x (<=|=|>=) b,  lb <= x <= ub`` where bounds may be
infinite. Each row gets a slack whose bounds encode its sense; rows whose
starting residual the slack cannot absorb get an artificial column, driven
to zero in phase one. The basis inverse is kept explicitly, updated by
product form and refactorized periodically. A refactorization that finds
the basis singular or badly conditioned swaps the dependent columns for
unit columns of the rows they left uncovered and carries on.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import StrEnum
from typing import Sequence

import numpy as np
import numpy.typing as npt

from .errors import SolverError
from .milp_instance import Sense

FloatArray = npt.NDArray[np.float64]
IntArray = npt.NDArray[np.int64]

OPT_TOL_REL = 1e-10
PIVOT_TOL = 1e-9
PIVOT_TOL_REL = 1e-7
HARRIS_TOL = 1e-9
DEGENERATE_STEP = 1e-12
STALL_LIMIT = 50
REFACTOR_EVERY = 50
INVERSE_RESIDUAL = 1e-6
INDEPENDENCE_TOL = 1e-8


class LpStatus(StrEnum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True, eq=False)
class LpResult:
    status: LpStatus
    x: FloatArray
    objective: float
    iterations: int


def independent_columns(matrix: FloatArray, candidates: Sequence[int]) -> list[int]:
    """Greedily pick linearly independent columns of ``matrix``, in candidate order.

    Stops once the picked columns span every row.
    """

    m = matrix.shape[0]
    ortho = np.zeros((m, m))
    chosen: list[int] = []
    for j in candidates:
        column = matrix[:, j]
        norm = float(np.linalg.norm(column))
        if norm == 0.0:
            continue
        basis = ortho[:, : len(chosen)]
        resid = column - basis @ (basis.T @ column)
        resid -= basis @ (basis.T @ resid)
        length = float(np.linalg.norm(resid))
        if length <= INDEPENDENCE_TOL * norm:
            continue
        ortho[:, len(chosen)] = resid / length
        chosen.append(int(j))
        if len(chosen) == m:
            break
    return chosen


class _RevisedSimplex:
    def __init__(
        self,
        full: FloatArray,
        rhs: FloatArray,
        lo: FloatArray,
        hi: FloatArray,
        x: FloatArray,
        basis: IntArray,
        spare: IntArray,
        max_iterations: int,
    ):
        self.full = full
        self.rhs = rhs
        self.lo = lo
        self.hi = hi
        self.x = x
        self.basis = basis
        # unit columns, one per row, that can stand in for dependent basics
        self.spare = spare
        self.is_basic = np.zeros(full.shape[1], dtype=np.bool_)
        self.is_basic[basis] = True
        self.max_iterations = max_iterations
        self.iterations = 0
        self.since_refactor = 0
        self.repairs = 0
        self.binv: FloatArray = np.eye(full.shape[0])
        self.refactor()

    def _invert(self, check_residual: bool = True) -> FloatArray | None:
        matrix = self.full[:, self.basis]
        try:
            binv = np.asarray(np.linalg.inv(matrix), dtype=np.float64)
        except np.linalg.LinAlgError:
            return None
        check = binv @ matrix
        check[np.diag_indices_from(check)] -= 1.0
        if not np.all(np.isfinite(check)):
            return None
        if check_residual and float(np.abs(check).max()) > INVERSE_RESIDUAL:
            return None
        return binv

    def repair_basis(self) -> None:
        """Swap dependent basic columns for unit columns of the uncovered rows.

        Dropped columns stay nonbasic at their current (clipped) values, so the
        primal point is unchanged up to rounding.
        """

        candidates = [int(j) for j in self.basis]
        candidates += [int(j) for j in self.spare if not self.is_basic[j]]
        chosen = independent_columns(self.full, candidates)
        if len(chosen) < self.full.shape[0]:
            raise SolverError("simplex basis became singular and could not be repaired")
        dropped = np.setdiff1d(self.basis, chosen)
        self.x[dropped] = np.clip(self.x[dropped], self.lo[dropped], self.hi[dropped])
        self.is_basic[:] = False
        self.basis[:] = chosen
        self.is_basic[self.basis] = True
        self.repairs += 1

    def refactor(self) -> None:
        binv = self._invert()
        if binv is None:
            self.repair_basis()
            binv = self._invert(check_residual=False)
            if binv is None:
                raise SolverError("simplex basis became singular")
        self.binv = binv
        nonbasic = ~self.is_basic
        self.x[self.basis] = self.binv @ (self.rhs - self.full[:, nonbasic] @ self.x[nonbasic])
        self.since_refactor = 0

    def run(self, cost: FloatArray) -> None:
        scale = float(np.max(np.abs(cost))) if cost.size else 0.0
        opt_tol = OPT_TOL_REL * (scale if scale > 0.0 else 1.0)
        movable = self.lo < self.hi
        stall = 0
        bland = False
        while True:
            y = cost[self.basis] @ self.binv
            d = cost - y @ self.full
            free_to_move = movable & ~self.is_basic
            can_inc = free_to_move & (self.x < self.hi) & (d < -opt_tol)
            can_dec = free_to_move & (self.x > self.lo) & (d > opt_tol)
            eligible = can_inc | can_dec
            if not eligible.any():
                return
            if self.iterations >= self.max_iterations:
                raise SolverError(f"simplex iteration limit {self.max_iterations} reached")
            if bland:
                q = int(np.flatnonzero(eligible)[0])
            else:
                q = int(np.argmax(np.where(eligible, np.abs(d), -1.0)))
            direction = 1.0 if can_inc[q] else -1.0
            w = self.binv @ self.full[:, q]
            delta = -direction * w
            step, r = self._ratio_test(delta, bland)
            # nonbasic values may sit strictly inside their bounds after a repair
            span = float(self.hi[q] - self.x[q] if direction > 0 else self.x[q] - self.lo[q])
            if np.isinf(step) and np.isinf(span):
                raise SolverError("LP relaxation is unbounded; the instance is malformed")
            self.iterations += 1
            if span <= step:
                self.x[self.basis] += delta * span
                self.x[q] = self.hi[q] if direction > 0 else self.lo[q]
                step = span
            else:
                self._pivot(q, r, direction, step, delta, w)
            if step <= DEGENERATE_STEP:
                stall += 1
                # least-index pivoting until the objective moves again
                bland = bland or stall >= STALL_LIMIT
            else:
                stall = 0
                bland = False

    def _ratio_test(self, delta: FloatArray, bland: bool) -> tuple[float, int]:
        """Two-pass (Harris) ratio test.

        The first pass finds the largest step that keeps every basic value within
        its bounds widened by ``HARRIS_TOL``; the second picks, among rows that
        block no later than that, the one with the largest pivot. Entries below
        the relative pivot floor never block.
        """

        if delta.size == 0:
            return float("inf"), -1
        xb = self.x[self.basis]
        lob = self.lo[self.basis]
        hib = self.hi[self.basis]
        floor = max(PIVOT_TOL, PIVOT_TOL_REL * float(np.abs(delta).max()))
        down = delta < -floor
        up = delta > floor
        exact = np.full(delta.size, np.inf)
        relaxed = np.full(delta.size, np.inf)
        exact[down] = (xb[down] - lob[down]) / -delta[down]
        exact[up] = (hib[up] - xb[up]) / delta[up]
        relaxed[down] = (xb[down] - lob[down] + HARRIS_TOL) / -delta[down]
        relaxed[up] = (hib[up] - xb[up] + HARRIS_TOL) / delta[up]
        exact = np.maximum(exact, 0.0)
        bound = float(relaxed.min())
        if np.isinf(bound):
            return bound, -1
        if bland:
            best = float(exact.min())
            ties = np.flatnonzero(exact <= best + DEGENERATE_STEP)
            r = int(ties[np.argmin(self.basis[ties])])
        else:
            ties = np.flatnonzero(exact <= max(bound, 0.0))
            r = int(ties[np.argmax(np.abs(delta[ties]))])
        return float(exact[r]), r

    def _pivot(
        self, q: int, r: int, direction: float, step: float, delta: FloatArray, w: FloatArray
    ) -> None:
        self.x[self.basis] += delta * step
        self.x[q] += direction * step
        leaving = int(self.basis[r])
        self.x[leaving] = self.lo[leaving] if delta[r] < 0 else self.hi[leaving]
        self.is_basic[leaving] = False
        self.is_basic[q] = True
        self.basis[r] = q
        row = self.binv[r] / w[r]
        self.binv -= np.outer(w, row)
        self.binv[r] = row
        self.since_refactor += 1
        if self.since_refactor >= REFACTOR_EVERY:
            self.refactor()


def _start_values(lb: FloatArray, ub: FloatArray) -> FloatArray:
    start: FloatArray = np.where(np.isfinite(lb), lb, np.where(np.isfinite(ub), ub, 0.0))
    return start


def _solve_without_rows(cost: FloatArray, lb: FloatArray, ub: FloatArray) -> LpResult:
    x = _start_values(lb, ub)
    x = np.where(cost < 0, ub, np.where(cost > 0, lb, x))
    if not np.all(np.isfinite(x)):
        raise SolverError("LP relaxation is unbounded; the instance is malformed")
    return LpResult(LpStatus.OPTIMAL, x, float(cost @ x), 0)


def solve_bounded_lp(
    cost: FloatArray,
    matrix: FloatArray,
    rhs: FloatArray,
    senses: Sequence[Sense],
    lb: FloatArray,
    ub: FloatArray,
    *,
    feas_tol: float = 1e-7,
    max_iterations: int | None = None,
) -> LpResult:
    m, n = matrix.shape
    lb = np.asarray(lb, dtype=np.float64)
    ub = np.asarray(ub, dtype=np.float64)
    if np.any(lb > ub):
        return LpResult(LpStatus.INFEASIBLE, _start_values(lb, ub), float("inf"), 0)
    if m == 0:
        return _solve_without_rows(cost, lb, ub)

    sense_arr = np.array([s.value for s in senses])
    slack_lo = np.where(sense_arr == Sense.GE.value, -np.inf, 0.0)
    slack_hi = np.where(sense_arr == Sense.LE.value, np.inf, 0.0)

    x_struct = _start_values(lb, ub)
    resid = rhs - matrix @ x_struct
    slack_ok = (resid >= slack_lo - feas_tol) & (resid <= slack_hi + feas_tol)
    art_sign = np.where(resid >= 0.0, 1.0, -1.0)

    full = np.hstack([matrix, np.eye(m), np.diag(art_sign)])
    lo = np.concatenate([lb, slack_lo, np.zeros(m)])
    hi = np.concatenate([ub, slack_hi, np.where(slack_ok, 0.0, np.inf)])
    x = np.concatenate([x_struct, np.zeros(2 * m)])
    rows = np.arange(m, dtype=np.int64)
    basis = np.where(slack_ok, n + rows, n + m + rows).astype(np.int64)

    limit = max_iterations if max_iterations is not None else 50 * (m + n) + 1000
    engine = _RevisedSimplex(full, rhs, lo, hi, x, basis, n + m + rows, limit)

    if not slack_ok.all():
        phase_one = np.zeros(n + 2 * m)
        phase_one[n + m :] = 1.0
        engine.run(phase_one)
        infeasibility = float(engine.x[n + m :].sum())
        if infeasibility > feas_tol * (1.0 + float(np.max(np.abs(rhs)))):
            return LpResult(LpStatus.INFEASIBLE, engine.x[:n].copy(), float("inf"), engine.iterations)
        engine.hi[n + m :] = 0.0
        nonbasic_art = ~engine.is_basic[n + m :]
        engine.x[n + m :][nonbasic_art] = 0.0

    engine.run(np.concatenate([cost, np.zeros(2 * m)]))
    engine.refactor()
    x_opt = np.clip(engine.x[:n], lb, ub)
    return LpResult(LpStatus.OPTIMAL, x_opt, float(cost @ x_opt), engine.iterations)
