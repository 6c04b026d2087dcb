"""Exact rational linear programming and the consistency decision.

The solver is a textbook two-phase primal simplex over :class:`Fraction`
with Bland's smallest-index rule, which terminates without perturbation.
Rows are stored as sparse dicts because each inequality of the system
touches at most ``|A| + 3`` variables.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .band import R1Language
from .errors import InputError, NumericalError, UnboundedError
from .rational import fmt_q
from .system import (
    P1,
    P2,
    X0,
    Constraint,
    InequalitySystem,
    VarKey,
    Y,
    build_system,
    evaluate,
    validate_assignment,
)

log = logging.getLogger(__name__)

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class LpProblem:
    """Maximize ``objective`` subject to ``constraints`` and variable ``bounds``.

    Bounds map a variable to ``(lo, hi)``; ``None`` stands for an infinite
    end.  Variables without an entry are free.
    """

    variables: tuple
    objective: dict
    constraints: tuple
    bounds: dict = field(default_factory=dict)

    def __post_init__(self):
        for c in self.constraints:
            if c.rel not in (">=", "<=", "=="):
                raise InputError(f"LP constraints must be non-strict, got {c.rel!r}")
        for k, (lo, hi) in self.bounds.items():
            if lo is not None and hi is not None and lo > hi:
                raise InputError(f"empty bound interval for {k}: [{lo}, {hi}]")


@dataclass(frozen=True)
class LpOutcome:
    status: str  # "optimal" or "infeasible"
    optimum: Fraction | None
    assignment: dict
    pivots: int = 0

    def to_dict(self, alphabet) -> dict:
        return {
            "status": self.status,
            "optimum": None if self.optimum is None else fmt_q(self.optimum),
            "assignment": {k.name(alphabet): fmt_q(v) for k, v in self.assignment.items()},
        }


def boxify(sys: InequalitySystem) -> LpProblem:
    """Turn the raw system into the bounded LP maximizing ``p2 - p1``.

    The strict gap becomes ``p1 <= p2``.  ``x0`` and ``Y(A)`` are fixed to 0,
    every other ``X``/``Y`` variable lies in ``[0, 1/|A|]`` and ``p1, p2`` lie
    in ``[0, 1]``.
    """
    a = sys.language.alphabet
    if len(a) == 0:
        raise InputError("the bounded LP needs a nonempty alphabet")
    cap = Fraction(1, len(a))
    full = Y(a.full)
    bounds = {}
    for k in sys.variables:
        if k == X0 or k == full:
            bounds[k] = (ZERO, ZERO)
        elif k in (P1, P2):
            bounds[k] = (ZERO, ONE)
        else:
            bounds[k] = (ZERO, cap)
    cons = [c for c in sys.constraints if c.rel != "<"]
    cons.append(Constraint({P1: ONE}, "<=", {P2: ONE}))
    return LpProblem(tuple(sys.variables), {P2: ONE, P1: -ONE}, tuple(cons), bounds)


class _Tableau:
    """Sparse simplex tableau in the form ``x_B = rhs - A_N x_N``.

    The objective is kept as ``value + sum_j cost[j] * x_j`` over nonbasic
    columns, so a positive ``cost[j]`` marks an improving column.
    """

    def __init__(self, rows, rhs, basis, ncols):
        self.rows = rows
        self.rhs = rhs
        self.basis = basis
        self.ncols = ncols
        self.cost: dict = {}
        self.value = ZERO
        self.pivots = 0

    def set_objective(self, c: Mapping[int, Fraction]):
        """Express ``sum c_j x_j`` in terms of the current nonbasic columns."""
        cost = {j: v for j, v in c.items() if v}
        value = ZERO
        for r, b in enumerate(self.basis):
            cb = c.get(b, ZERO)
            if cb:
                value += cb * self.rhs[r]
                for j, v in self.rows[r].items():
                    nv = cost.get(j, ZERO) - cb * v
                    if nv:
                        cost[j] = nv
                    else:
                        cost.pop(j, None)
        self.cost, self.value = cost, value

    def pivot(self, r: int, c: int):
        row = self.rows[r]
        p = row[c]
        if p != ONE:
            inv = ONE / p
            for j in row:
                row[j] *= inv
            self.rhs[r] *= inv
        b = self.rhs[r]
        items = list(row.items())
        for i, other in enumerate(self.rows):
            if i == r:
                continue
            f = other.get(c)
            if not f:
                continue
            for j, v in items:
                nv = other.get(j, ZERO) - f * v
                if nv:
                    other[j] = nv
                else:
                    del other[j]
            self.rhs[i] -= f * b
        f = self.cost.get(c)
        if f:
            for j, v in items:
                nv = self.cost.get(j, ZERO) - f * v
                if nv:
                    self.cost[j] = nv
                else:
                    self.cost.pop(j, None)
            self.value += f * b
        self.basis[r] = c
        self.pivots += 1

    def optimize(self, allowed=None) -> None:
        """Run Bland's rule until no improving column remains."""
        while True:
            entering = None
            for j, v in self.cost.items():
                if v > 0 and (allowed is None or j < allowed) and (entering is None or j < entering):
                    entering = j
            if entering is None:
                return
            best_r, best_ratio = None, None
            for r, row in enumerate(self.rows):
                a = row.get(entering)
                if a is not None and a > 0:
                    ratio = self.rhs[r] / a
                    if (
                        best_r is None
                        or ratio < best_ratio
                        or (ratio == best_ratio and self.basis[r] < self.basis[best_r])
                    ):
                        best_r, best_ratio = r, ratio
            if best_r is None:
                raise UnboundedError("objective is unbounded above")
            self.pivot(best_r, entering)

    def solution(self) -> list[Fraction]:
        x = [ZERO] * self.ncols
        for r, b in enumerate(self.basis):
            x[b] = self.rhs[r]
        return x


def solve(p: LpProblem) -> LpOutcome:
    """Maximize exactly.  Returns an optimal vertex or reports infeasibility.

    Raises
    ------
    UnboundedError
        If the objective has no finite maximum.
    """
    # Column layout: each variable becomes x = lo + x' (x' >= 0), or a split
    # x = x+ - x- when it has no lower bound; fixed variables are constants.
    cols: dict = {}  # var -> list of (column, sign)
    const: dict = {}
    rows: list[dict] = []
    rhs: list[Fraction] = []
    kinds: list[str] = []
    ncols = 0
    for v in p.variables:
        lo, hi = p.bounds.get(v, (None, None))
        lo = None if lo is None else Fraction(lo)
        hi = None if hi is None else Fraction(hi)
        if lo is not None and hi is not None and lo == hi:
            const[v] = lo
            continue
        if lo is None:
            cols[v] = [(ncols, ONE), (ncols + 1, -ONE)]
            const[v] = ZERO
            ncols += 2
            if hi is not None:
                rows.append({ncols - 2: ONE, ncols - 1: -ONE})
                rhs.append(hi)
                kinds.append("<=")
        else:
            cols[v] = [(ncols, ONE)]
            const[v] = lo
            ncols += 1
            if hi is not None:
                rows.append({ncols - 1: ONE})
                rhs.append(hi - lo)
                kinds.append("<=")

    def expand(expr):
        out, k = {}, ZERO
        for v, c in expr.items():
            c = Fraction(c)
            if v not in const:
                raise InputError(f"variable {v} is not declared in the problem")
            k += c * const[v]
            for j, s in cols.get(v, ()):
                nv = out.get(j, ZERO) + c * s
                if nv:
                    out[j] = nv
                else:
                    out.pop(j, None)
        return out, k

    for c in p.constraints:
        coeffs, k = expand(c.difference())
        b = -k
        if c.rel == ">=":
            coeffs = {j: -v for j, v in coeffs.items()}
            b = -b
        if not coeffs:
            ok = b >= 0 if c.rel != "==" else b == 0
            if not ok:
                return LpOutcome("infeasible", None, {}, 0)
            continue
        rows.append(coeffs)
        rhs.append(b)
        kinds.append("==" if c.rel == "==" else "<=")

    # Slack and artificial columns.
    n_struct = ncols
    basis = []
    artificial = []
    for r, kind in enumerate(kinds):
        if kind == "<=":
            rows[r][ncols] = ONE
            slack = ncols
            ncols += 1
            if rhs[r] >= 0:
                basis.append(slack)
                continue
        if rhs[r] < 0:
            rows[r] = {j: -v for j, v in rows[r].items()}
            rhs[r] = -rhs[r]
        basis.append(-1)
        artificial.append(r)
    first_art = ncols
    for r in artificial:
        rows[r][ncols] = ONE
        basis[r] = ncols
        ncols += 1

    t = _Tableau(rows, rhs, basis, ncols)
    if artificial:
        t.set_objective({basis[r]: -ONE for r in artificial})
        t.optimize()
        if t.value < 0:
            return LpOutcome("infeasible", None, {}, t.pivots)
        # Drive remaining artificial columns out of the basis.
        keep = []
        for r in range(len(t.rows)):
            if t.basis[r] >= first_art:
                col = next((j for j in sorted(t.rows[r]) if j < first_art), None)
                if col is None:
                    continue  # redundant row
                t.pivot(r, col)
            keep.append(r)
        t.rows = [{j: v for j, v in t.rows[r].items() if j < first_art} for r in keep]
        t.rhs = [t.rhs[r] for r in keep]
        t.basis = [t.basis[r] for r in keep]
        t.ncols = first_art

    obj_cols, obj_const = expand(p.objective)
    t.set_objective(obj_cols)
    t.optimize(allowed=first_art)
    x = t.solution()

    assignment = {}
    for v in p.variables:
        val = const[v] + sum((s * x[j] for j, s in cols.get(v, ())), ZERO)
        assignment[v] = val
    optimum = t.value + obj_const
    if evaluate(p.objective, assignment) != optimum:
        raise NumericalError("objective value does not match the returned vertex")
    for c in p.constraints:
        if not c.holds(assignment):
            raise NumericalError("returned vertex violates a constraint")
    log.debug("simplex finished after %d pivots over %d structural columns", t.pivots, n_struct)
    return LpOutcome("optimal", optimum, assignment, t.pivots)


@dataclass(frozen=True)
class Consistency:
    consistent: bool
    gap: Fraction
    witness: dict
    outcome: LpOutcome
    system: InequalitySystem

    def to_dict(self) -> dict:
        a = self.system.language.alphabet
        return {
            "consistent": self.consistent,
            "optimum": fmt_q(self.gap),
            "witness": {k.name(a): fmt_q(v) for k, v in self.witness.items()},
        }


def decide_consistency(L: R1Language) -> Consistency:
    """Decide whether the inequality system of ``L`` has a solution.

    The system is consistent exactly when the bounded LP optimum of
    ``p2 - p1`` is positive; the optimal vertex then solves the raw system,
    strict inequality included.
    """
    sys = build_system(L)
    out = solve(boxify(sys))
    gap = out.optimum
    consistent = gap > 0
    if consistent:
        rep = validate_assignment(sys, out.assignment)
        if not rep.ok:
            raise NumericalError("LP witness fails the raw system")
    return Consistency(consistent, gap, dict(out.assignment), out, sys)


def witness_value(witness: Mapping[VarKey, Fraction], key: VarKey) -> Fraction:
    return Fraction(witness.get(key, 0))
