"""Feasibility of equality-constrained nonnegative linear systems.

Decides whether ``A q = b, q >= 0`` has a solution and emits a verifiable
certificate either way: a nonnegative witness, or Farkas multipliers ``y``
with ``y^T A >= 0`` and ``y^T b < 0``.  The solver is a dense phase-1
simplex with Bland's anti-cycling rule; every certificate is re-verified
against the raw problem data before it is returned.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

FEAS_TOL = 1e-9
WITNESS_NEG_TOL = 1e-12
FARKAS_PRODUCT_TOL = 1e-12
MARGIN_TOL = 1e-7
PIVOT_TOL = 1e-10


class LpError(ValueError):
    pass


class IndeterminateError(LpError):
    """Neither branch could be certified at the required tolerances."""


@dataclass
class Row:
    coeffs: dict  # variable id -> coefficient
    rhs: float
    tag: dict = field(default_factory=dict)


@dataclass
class FeasibilityProblem:
    variables: list
    rows: list[Row]

    def __post_init__(self):
        if not self.rows:
            raise LpError("a feasibility problem needs at least one row")
        known = set(self.variables)
        if len(known) != len(self.variables):
            raise LpError("duplicate variable ids")
        for r, row in enumerate(self.rows):
            if not math.isfinite(row.rhs):
                raise LpError(f"row {r} has a non-finite right-hand side")
            for v, c in row.coeffs.items():
                if v not in known:
                    raise LpError(f"row {r} references unknown variable {v!r}")
                if not math.isfinite(c):
                    raise LpError(f"row {r} has a non-finite coefficient")

    def matrix(self):
        """Dense (A, b) in the order of ``variables`` and ``rows``."""
        index = {v: k for k, v in enumerate(self.variables)}
        a = np.zeros((len(self.rows), len(self.variables)))
        b = np.zeros(len(self.rows))
        for r, row in enumerate(self.rows):
            b[r] = row.rhs
            for v, c in row.coeffs.items():
                a[r, index[v]] = c
        return a, b

    def to_json(self) -> str:
        doc = {
            "variables": [list(v) if isinstance(v, tuple) else v for v in self.variables],
            "rows": [
                {
                    "rhs": row.rhs,
                    "tag": row.tag,
                    "coeffs": [
                        {"var": k, "c": row.coeffs[v]}
                        for k, v in enumerate(self.variables)
                        if v in row.coeffs
                    ],
                }
                for row in self.rows
            ],
        }
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"


@dataclass
class FeasibilityResult:
    status: str  # "feasible" | "infeasible"
    witness: dict | None = None  # variable id -> value
    multipliers: list[float] | None = None  # one per row, raw problem units
    margin: float | None = None

    @property
    def feasible(self) -> bool:
        return self.status == "feasible"

    def to_json(self, problem: FeasibilityProblem | None = None) -> str:
        doc = {"status": self.status}
        if self.witness is not None:
            doc["witness"] = [
                {"var": list(v) if isinstance(v, tuple) else v, "value": x}
                for v, x in self.witness.items()
            ]
        if self.multipliers is not None:
            doc["multipliers"] = list(self.multipliers)
            doc["margin"] = self.margin
            if problem is not None:
                doc["violated_tags"] = [
                    problem.rows[r].tag
                    for r, y in enumerate(self.multipliers)
                    if abs(y) > 1e-9
                ]
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _phase_one(a: np.ndarray, b: np.ndarray, max_iters: int, enter_tol: float = PIVOT_TOL):
    """Phase-1 simplex: minimize the sum of artificials for Ax=b, x>=0.

    Returns ``(optimum, x, y)`` with ``x`` the structural solution and ``y``
    the dual vector of the (sign-corrected) rows.  Bland's rule on both the
    entering and leaving choices guarantees termination.
    """
    m, n = a.shape
    flip = np.where(b < 0, -1.0, 1.0)
    a = a * flip[:, None]
    b = b * flip

    # Tableau [A | b] plus the reduced-cost row; the artificial columns are
    # never materialized (they start as the identity basis and are not
    # allowed to re-enter), which keeps the per-pivot rank-1 update small.
    tab = np.zeros((m + 1, n + 1))
    tab[:m, :n] = a
    tab[:m, -1] = b
    tab[m, :n] = a.sum(axis=0)
    tab[m, -1] = b.sum()
    basis = [n + r for r in range(m)]  # >= n marks an artificial

    # Dantzig pricing makes progress quickly; Bland's rule takes over as the
    # anti-cycling guard whenever the objective stalls on degenerate pivots.
    stall = 0
    last_objective = tab[m, -1]
    for _ in range(max_iters):
        reduced = tab[m, :n]
        if stall >= 20:
            entering_candidates = np.nonzero(reduced > enter_tol)[0]
            if entering_candidates.size == 0:
                break
            enter = int(entering_candidates[0])  # Bland: smallest index
        else:
            enter = int(np.argmax(reduced))
            if reduced[enter] <= enter_tol:
                break
        col = tab[:m, enter]
        rows = np.nonzero(col > PIVOT_TOL)[0]
        if rows.size == 0:
            # Phase-1 objective is bounded below by zero, so an unbounded
            # column can only be numerical noise.
            raise IndeterminateError("phase-1 simplex found an unbounded column")
        ratios = tab[rows, -1] / col[rows]
        best = ratios.min()
        ties = rows[np.nonzero(ratios <= best + 1e-12)[0]]
        leave = int(min(ties, key=lambda r: basis[r]))  # Bland on ties
        pivot = tab[leave, enter]
        tab[leave, :] /= pivot
        update = tab[:, enter].copy()
        update[leave] = 0.0
        tab -= np.outer(update, tab[leave, :])
        tab[:, enter] = 0.0
        tab[leave, enter] = 1.0
        basis[leave] = enter
        objective = tab[m, -1]
        stall = stall + 1 if objective >= last_objective - 1e-15 else 0
        last_objective = objective
    else:
        raise IndeterminateError("phase-1 simplex exceeded the iteration cap")

    optimum = tab[m, -1]
    x = np.zeros(n)
    for r, v in enumerate(basis):
        if v < n:
            x[v] = tab[r, -1]
    # Dual from the final basis: solve B^T y = c_B with unit cost on the
    # artificials still in the basis.
    bmat = np.zeros((m, m))
    cb = np.zeros(m)
    for r, v in enumerate(basis):
        if v < n:
            bmat[:, r] = a[:, v]
        else:
            bmat[v - n, r] = 1.0
            cb[r] = 1.0
    try:
        y = np.linalg.solve(bmat.T, cb)
    except np.linalg.LinAlgError:
        y = np.linalg.lstsq(bmat.T, cb, rcond=None)[0]
    return optimum, x, y * flip


def solve_feasibility(problem: FeasibilityProblem, *, max_iters: int | None = None) -> FeasibilityResult:
    """Decide feasibility and return a re-verified certificate.

    Raises :class:`IndeterminateError` when the solver's own certificate
    fails re-verification at the required tolerances; that outcome is never
    silently converted into a branch.
    """
    a_raw, b_raw = problem.matrix()
    m, n = a_raw.shape

    # Normalize each row to unit infinity-norm so external row scaling
    # cannot change the branch, only the reported multipliers.
    scale = np.ones(m)
    for r in range(m):
        big = np.max(np.abs(a_raw[r])) if n else 0.0
        if big == 0.0:
            # 0 = b row: decide directly.
            if abs(b_raw[r]) > FEAS_TOL:
                y = np.zeros(m)
                y[r] = -1.0 if b_raw[r] > 0 else 1.0
                margin = abs(b_raw[r])
                result = FeasibilityResult("infeasible", multipliers=list(y), margin=float(margin))
                if not verify_certificate(problem, result):
                    raise IndeterminateError("certificate for a null row failed verification")
                return result
            continue
        scale[r] = 1.0 / big
    a = a_raw * scale[:, None]
    b = b_raw * scale

    if max_iters is None:
        max_iters = 200 * (m + n) + 1000

    # A first pass at the standard pivot tolerance almost always certifies.
    # When it leaves reduced costs between the two tolerances (so the Farkas
    # products narrowly miss the -1e-12 bound), one rerun with a tighter
    # entering threshold resolves it; anything else is indeterminate.
    last_error = None
    for enter_tol in (PIVOT_TOL, 1e-13):
        optimum, x, y_scaled = _phase_one(a, b, max_iters, enter_tol)

        if optimum <= FEAS_TOL:
            # Degenerate pivots can leave basic variables a hair below zero;
            # clamping anything within the feasibility tolerance is safe
            # because the witness is re-verified against the raw rows.
            witness = {v: float(max(x[k], 0.0) if x[k] > -FEAS_TOL else x[k])
                       for k, v in enumerate(problem.variables)}
            result = FeasibilityResult("feasible", witness=witness)
            if verify_certificate(problem, result):
                return result
            last_error = "feasible witness failed re-verification"
            continue

        # Map the phase-1 dual back to raw row units and flip its sign so
        # that y^T A >= 0 while y^T b < 0.
        y = -(y_scaled * scale)
        norm = np.max(np.abs(y))
        if norm <= 0:
            last_error = "degenerate Farkas multipliers"
            continue
        y = y / norm
        margin = -float(y @ b_raw)
        result = FeasibilityResult("infeasible", multipliers=[float(v) for v in y], margin=margin)
        if verify_certificate(problem, result):
            return result
        last_error = f"infeasibility certificate failed re-verification (margin {margin:.3e})"
    raise IndeterminateError(last_error or "unresolvable feasibility problem")


def verify_certificate(problem: FeasibilityProblem, result: FeasibilityResult) -> bool:
    """Independently re-check a result against the problem data alone.

    Feasible: the witness is nonnegative (within 1e-12) and satisfies every
    row within 1e-9 relative to the row's coefficient scale.  Infeasible:
    the multipliers combine the rows into a contradiction ``y^T A >= -1e-12``
    (componentwise), ``y^T b <= -margin`` with ``margin >= 1e-7``.
    """
    a, b = problem.matrix()
    if result.status == "feasible":
        if result.witness is None:
            return False
        try:
            x = np.array([result.witness[v] for v in problem.variables], dtype=float)
        except KeyError:
            return False
        if np.any(x < -WITNESS_NEG_TOL):
            return False
        row_scale = np.maximum(1.0, np.max(np.abs(a), axis=1, initial=0.0))
        residual = np.abs(a @ x - b)
        return bool(np.all(residual <= FEAS_TOL * row_scale))
    if result.status == "infeasible":
        if result.multipliers is None or result.margin is None:
            return False
        y = np.array(result.multipliers, dtype=float)
        if y.shape != (len(problem.rows),):
            return False
        if result.margin < MARGIN_TOL:
            return False
        products = y @ a
        if np.any(products < -FARKAS_PRODUCT_TOL):
            return False
        return bool(y @ b <= -result.margin + 1e-15)
    return False
