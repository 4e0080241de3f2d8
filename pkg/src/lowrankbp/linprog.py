"""Dense linear-program solver: revised simplex with bounded variables.

Solves ``minimize c^T x subject to E x = f, lower <= x <= upper`` where the
bounds may be infinite.  Anti-cycling uses Bland's rule (lowest-index entering
variable, ratio-test ties broken by lowest variable index) with an iteration
cap of ``50 * (m + n)`` per phase as a final guard.  Feasibility is found in
phase 1 with artificial variables, which stay in the problem with bounds
fixed to [0, 0] during phase 2.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from ._validation import as_matrix, as_vector
from .exceptions import DimensionMismatchError, IterationLimitError

_FEAS_TOL = 1e-9
_COST_TOL = 1e-9
_REFACTOR_EVERY = 64


class LpStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LinearProgram:
    """minimize objective . x  subject to  eq_matrix x = eq_rhs and bounds."""

    objective: np.ndarray
    eq_matrix: np.ndarray
    eq_rhs: np.ndarray
    lower_bounds: np.ndarray
    upper_bounds: np.ndarray

    def __post_init__(self):
        c = as_vector(self.objective, "objective")
        n = c.shape[0]
        e = as_matrix(self.eq_matrix, "eq_matrix")
        f = as_vector(self.eq_rhs, "eq_rhs")
        if e.shape[1] != n:
            raise DimensionMismatchError(
                f"eq_matrix has {e.shape[1]} columns, objective has {n}"
            )
        if e.shape[0] != f.shape[0]:
            raise DimensionMismatchError("eq_matrix and eq_rhs row counts differ")
        lo = as_vector(self.lower_bounds, "lower_bounds", n)
        hi = as_vector(self.upper_bounds, "upper_bounds", n)
        if np.any(lo > hi):
            raise ValueError("lower_bounds must be <= upper_bounds componentwise")
        for name, arr in (
            ("objective", c),
            ("eq_matrix", e),
            ("eq_rhs", f),
            ("lower_bounds", lo),
            ("upper_bounds", hi),
        ):
            object.__setattr__(self, name, arr)

    @property
    def num_variables(self) -> int:
        return self.objective.shape[0]

    @property
    def num_constraints(self) -> int:
        return self.eq_matrix.shape[0]


@dataclass(frozen=True)
class LpSolution:
    """Result of a solve: point and objective are meaningful when OPTIMAL.

    ``dual`` holds the equality-constraint multipliers certified by the final
    basis (original row scaling), for weak-duality checks.
    """

    status: LpStatus
    point: np.ndarray | None
    objective_value: float
    dual: np.ndarray | None = None
    iterations: int = 0


_AT_LOWER = 0
_AT_UPPER = 1
_BASIC = 2


class _SimplexState:
    """Mutable tableau state for one solve (one solve per instance)."""

    def __init__(self, columns, cost, lower, upper, rhs, basis):
        self.A = columns          # m x n, all columns incl. artificials
        self.c = cost
        self.lo = lower
        self.hi = upper
        self.b = rhs
        self.m, self.n = columns.shape
        self.basis = list(basis)
        self.status = np.full(self.n, _AT_LOWER, dtype=int)
        for j in range(self.n):
            if not np.isfinite(self.lo[j]):
                self.status[j] = _AT_UPPER if np.isfinite(self.hi[j]) else _AT_LOWER
        for j in self.basis:
            self.status[j] = _BASIC
        self.binv = None
        self.pivots_since_refactor = 0
        self.iterations = 0
        self._refactor()
        self._rebuild_xn()
        self._recompute_xb()

    # -- linear algebra bookkeeping ------------------------------------

    def _refactor(self):
        B = self.A[:, self.basis]
        self.binv = np.linalg.inv(B)
        self.pivots_since_refactor = 0

    def nonbasic_value(self, j) -> float:
        if self.status[j] == _AT_LOWER:
            return self.lo[j] if np.isfinite(self.lo[j]) else 0.0
        if self.status[j] == _AT_UPPER:
            return self.hi[j] if np.isfinite(self.hi[j]) else 0.0
        raise AssertionError("basic variable has no nonbasic value")

    def _rebuild_xn(self):
        xn = np.zeros(self.n)
        at_lo = (self.status == _AT_LOWER) & np.isfinite(self.lo)
        at_hi = (self.status == _AT_UPPER) & np.isfinite(self.hi)
        xn[at_lo] = self.lo[at_lo]
        xn[at_hi] = self.hi[at_hi]
        self.xn = xn

    def _recompute_xb(self):
        rhs = self.b - self.A @ self.xn
        self.xb = self.binv @ rhs

    def full_point(self) -> np.ndarray:
        x = self.xn.copy()
        x[self.basis] = self.xb
        return x

    # -- simplex core ---------------------------------------------------

    def run(self, max_iterations: int) -> str:
        """Iterate to optimality; returns 'optimal' or 'unbounded'."""
        while True:
            if self.iterations >= max_iterations:
                raise IterationLimitError(
                    f"simplex exceeded {max_iterations} iterations (cycling guard)"
                )
            self.iterations += 1
            y = self.binv.T @ self.c[self.basis]
            reduced = self.c - self.A.T @ y
            at_lower = self.status == _AT_LOWER
            at_upper = self.status == _AT_UPPER
            movable = self.lo != self.hi
            increase = at_lower & movable & (reduced < -_COST_TOL)
            # free variables parked at 0 may also move downward
            decrease = (at_upper | (at_lower & ~np.isfinite(self.lo))) & movable & (
                reduced > _COST_TOL
            )
            eligible = np.flatnonzero(increase | decrease)
            if eligible.size == 0:
                return "optimal"
            entering = int(eligible[0])  # Bland: lowest index
            direction = 1.0 if increase[entering] else -1.0
            col = self.binv @ self.A[:, entering]
            basis_arr = np.asarray(self.basis)
            delta = -direction * col
            room = np.where(
                delta > 0,
                self.hi[basis_arr] - self.xb,
                self.xb - self.lo[basis_arr],
            )
            with np.errstate(divide="ignore", invalid="ignore"):
                steps = np.maximum(room, 0.0) / np.abs(delta)
            steps[np.abs(delta) <= 1e-11] = np.inf
            steps[~np.isfinite(room)] = np.inf
            own_gap = self.hi[entering] - self.lo[entering]
            best = float(own_gap) if np.isfinite(own_gap) else np.inf
            leave_pos = -1
            if steps.size:
                tight = float(np.min(steps))
                if tight < best - 1e-12:
                    # ratio-test tie broken by lowest variable index
                    tied = np.flatnonzero(steps <= tight + 1e-12)
                    leave_pos = int(tied[np.argmin(basis_arr[tied])])
                    best = float(steps[leave_pos])
            if not np.isfinite(best):
                return "unbounded"
            leave_bound = None
            if leave_pos >= 0:
                leave_bound = _AT_UPPER if delta[leave_pos] > 0 else _AT_LOWER
            self._apply_step(entering, direction, col, best, leave_pos, leave_bound)

    def _apply_step(self, entering, direction, col, step, leave_pos, leave_bound):
        self.xb -= direction * step * col
        if leave_pos < 0:
            # bound flip: entering moves across to its opposite bound
            self.status[entering] = (
                _AT_UPPER if self.status[entering] == _AT_LOWER else _AT_LOWER
            )
            self.xn[entering] = self.nonbasic_value(entering)
            return
        leaving = self.basis[leave_pos]
        self.status[leaving] = leave_bound
        self.xn[leaving] = self.nonbasic_value(leaving)
        self.basis[leave_pos] = entering
        self.status[entering] = _BASIC
        self.xn[entering] = 0.0
        # eta update of binv
        piv = col[leave_pos]
        eta = -col / piv
        row = self.binv[leave_pos, :].copy()
        self.binv += np.outer(eta, row)
        self.binv[leave_pos, :] = row / piv
        self.pivots_since_refactor += 1
        if self.pivots_since_refactor >= _REFACTOR_EVERY:
            self._refactor()
        self._rebuild_xn()
        self._recompute_xb()


def _row_scale(matrix, rhs):
    scale = np.max(np.abs(matrix), axis=1)
    scale[scale < 1e-300] = 1.0
    return matrix / scale[:, None], rhs / scale, scale


def solve(lp: LinearProgram, max_iterations: int | None = None) -> LpSolution:
    """Solve the program.  Raises IterationLimitError if the cycling guard
    trips; infeasibility and unboundedness are reported in the status."""
    m, n = lp.num_constraints, lp.num_variables
    cap = max_iterations if max_iterations is not None else 50 * (m + n)
    if m == 0:
        return _solve_unconstrained(lp)

    E, f, scale = _row_scale(lp.eq_matrix, lp.eq_rhs)

    # phase-1 start: real variables at a finite bound (or 0 when free)
    x0 = np.zeros(n)
    for j in range(n):
        if np.isfinite(lp.lower_bounds[j]):
            x0[j] = lp.lower_bounds[j]
        elif np.isfinite(lp.upper_bounds[j]):
            x0[j] = lp.upper_bounds[j]
    resid = f - E @ x0
    signs = np.where(resid >= 0, 1.0, -1.0)
    columns = np.hstack([E, np.diag(signs)])
    lower = np.concatenate([lp.lower_bounds, np.zeros(m)])
    upper = np.concatenate([lp.upper_bounds, np.full(m, np.inf)])
    phase1_cost = np.concatenate([np.zeros(n), np.ones(m)])
    basis = list(range(n, n + m))

    state = _SimplexState(columns, phase1_cost, lower, upper, f, basis)
    outcome = state.run(cap)
    iters = state.iterations
    if outcome != "optimal":  # pragma: no cover - phase 1 is bounded below
        raise AssertionError("phase-1 objective cannot be unbounded")
    art_values = state.full_point()[n:]
    if float(np.sum(art_values)) > 1e-7 * (1.0 + float(np.max(np.abs(f)))):
        return LpSolution(LpStatus.INFEASIBLE, None, float("nan"), None, iters)

    # phase 2: real objective; artificials pinned to zero
    state.c = np.concatenate([lp.objective, np.zeros(m)])
    state.lo = lower.copy()
    state.hi = upper.copy()
    state.lo[n:] = 0.0
    state.hi[n:] = 0.0
    for j in range(n, n + m):
        if state.status[j] != _BASIC:
            state.status[j] = _AT_LOWER
    state._rebuild_xn()
    state._recompute_xb()
    state.iterations = 0
    outcome = state.run(cap)
    iters += state.iterations
    if outcome == "unbounded":
        return LpSolution(LpStatus.UNBOUNDED, None, float("-inf"), None, iters)

    state._refactor()
    state._recompute_xb()
    point = state.full_point()[:n]
    value = float(lp.objective @ point)
    y_scaled = state.binv.T @ state.c[state.basis]
    dual = y_scaled / scale
    return LpSolution(LpStatus.OPTIMAL, point, value, dual, iters)


def _solve_unconstrained(lp: LinearProgram) -> LpSolution:
    point = np.zeros(lp.num_variables)
    for j, cj in enumerate(lp.objective):
        if cj > 0:
            target = lp.lower_bounds[j]
        elif cj < 0:
            target = lp.upper_bounds[j]
        else:
            target = lp.lower_bounds[j]
            if not np.isfinite(target):
                target = min(lp.upper_bounds[j], 0.0)
        if not np.isfinite(target):
            if cj == 0:
                target = 0.0
            else:
                return LpSolution(LpStatus.UNBOUNDED, None, float("-inf"), None, 0)
        point[j] = target
    value = float(lp.objective @ point)
    return LpSolution(LpStatus.OPTIMAL, point, value, np.zeros(0), 0)


def dual_objective_value(lp: LinearProgram, solution: LpSolution) -> float:
    """Objective of the dual point certified by the final basis.

    For ``min c.x  s.t.  Ex=f, l<=x<=u`` the dual value at multipliers y is
    ``y.f + sum_j max(0, c_j - y.E_j) l_j + sum_j min(0, c_j - y.E_j) u_j``;
    weak duality puts it at or below the primal optimum.
    """
    y = solution.dual
    reduced = lp.objective - lp.eq_matrix.T @ y
    value = float(y @ lp.eq_rhs)
    for j in range(lp.num_variables):
        r = reduced[j]
        if r > _COST_TOL:
            value += r * lp.lower_bounds[j]
        elif r < -_COST_TOL:
            value += r * lp.upper_bounds[j]
    return value
