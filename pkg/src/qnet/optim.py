"""In-repo solvers: dense two-phase simplex and branch-and-bound over binaries.

The simplex runs in two arithmetic modes sharing one code path: float64 with
a 1e-9 tolerance (used for LP-relaxation bounds) and exact `Fraction`
arithmetic with zero tolerance (used for region-membership feasibility).
Bland's rule is used throughout for anti-cycling.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import EnumerationLimitError, SolverStallError

FLOAT_TOL = 1e-9
OPT_TOL = 1e-9


# ---------------------------------------------------------------------------
# Linear programs


@dataclass
class LpProblem:
    """min (or max) cost.x  s.t.  A_ub x <= b_ub, A_eq x = b_eq, bounds."""

    cost: list
    A_ub: list = field(default_factory=list)
    b_ub: list = field(default_factory=list)
    A_eq: list = field(default_factory=list)
    b_eq: list = field(default_factory=list)
    bounds: list | None = None   # per-var (lo, hi); None entries mean unbounded
    maximize: bool = False


@dataclass
class LpSolution:
    status: str                  # optimal | infeasible | unbounded
    x: list | None
    value: object | None


def _simplex_core(T, basis, tol, maxiter):
    """Phase-2 style iteration on tableau T with reduced costs in the last row.

    Returns "optimal" or "unbounded". Bland's rule: entering column is the
    lowest index with negative reduced cost; leaving row breaks ratio ties by
    lowest basis-variable index.
    """
    m = len(basis)
    ncols = T.shape[1] - 1
    for _ in range(maxiter):
        enter = -1
        for j in range(ncols):
            if T[m, j] < -tol:
                enter = j
                break
        if enter < 0:
            return "optimal"
        leave = -1
        best = None
        for i in range(m):
            a = T[i, enter]
            if a > tol:
                ratio = T[i, -1] / a
                if best is None or ratio < best:
                    best, leave = ratio, i
                elif ratio == best and basis[i] < basis[leave]:
                    leave = i
        if leave < 0:
            return "unbounded"
        _pivot(T, basis, leave, enter)
    raise SolverStallError(
        f"simplex exceeded {maxiter} pivots (m={m}, n={ncols}); "
        "the instance may be degenerate or badly scaled")


def _pivot(T, basis, row, col):
    T[row] = T[row] / T[row, col]
    pivot_row = T[row]
    for i in range(T.shape[0]):
        if i != row:
            f = T[i, col]
            if f != 0:
                T[i] = T[i] - f * pivot_row
    basis[row] = col


def solve_lp(problem: LpProblem, exact: bool = False, maxiter: int = 20000) -> LpSolution:
    """Two-phase dense simplex. `exact=True` runs on Fractions with tol 0."""
    cast = (lambda v: Fraction(v)) if exact else float
    zero, one = cast(0), cast(1)
    tol = zero if exact else FLOAT_TOL

    n = len(problem.cost)
    sign = -1 if problem.maximize else 1
    cost = [cast(problem.cost[j]) * sign for j in range(n)]
    bounds = problem.bounds if problem.bounds is not None else [(0, None)] * n

    # map original variables onto nonnegative structural columns
    col_terms = []      # per original var: (offset, [(col, coef)])
    extra_ub_rows = []  # (col, ub) rows introduced by finite upper bounds
    ncols = 0
    for j in range(n):
        lo, hi = bounds[j]
        if lo is None and hi is None:
            col_terms.append((zero, [(ncols, one), (ncols + 1, -one)]))
            ncols += 2
        elif lo is None:
            col_terms.append((cast(hi), [(ncols, -one)]))
            ncols += 1
        else:
            col_terms.append((cast(lo), [(ncols, one)]))
            if hi is not None:
                extra_ub_rows.append((ncols, cast(hi) - cast(lo)))
            ncols += 1

    rows = []  # (coeffs over structural cols, rhs, is_eq)

    def _convert_row(coeffs, rhs, is_eq):
        out = [zero] * ncols
        r = cast(rhs)
        for j in range(n):
            a = cast(coeffs[j])
            if a == 0:
                continue
            off, terms = col_terms[j]
            r -= a * off
            for col, cf in terms:
                out[col] += a * cf
        rows.append((out, r, is_eq))

    for coeffs, rhs in zip(problem.A_ub, problem.b_ub):
        _convert_row(coeffs, rhs, False)
    for coeffs, rhs in zip(problem.A_eq, problem.b_eq):
        _convert_row(coeffs, rhs, True)
    for col, ub in extra_ub_rows:
        coeffs = [zero] * ncols
        coeffs[col] = one
        rows.append((coeffs, ub, False))

    m = len(rows)
    n_slack = sum(1 for _, _, is_eq in rows if not is_eq)
    width = ncols + n_slack
    dtype = object if exact else np.float64

    T = np.zeros((m + 1, width + 1), dtype=dtype)
    if exact:
        T[:, :] = zero
    basis = [0] * m
    needs_artificial = []
    k = 0
    for i, (coeffs, rhs, is_eq) in enumerate(rows):
        for j in range(ncols):
            T[i, j] = coeffs[j]
        T[i, -1] = rhs
        if not is_eq:
            T[i, ncols + k] = one
            slack_col = ncols + k
            k += 1
        if T[i, -1] < zero:
            T[i] = -T[i]
        if not is_eq and T[i, ncols + k - 1] == one:
            basis[i] = slack_col
        else:
            needs_artificial.append(i)

    if needs_artificial:
        art = np.zeros((m + 1, len(needs_artificial)), dtype=dtype)
        if exact:
            art[:, :] = zero
        for a_idx, i in enumerate(needs_artificial):
            art[i, a_idx] = one
            basis[i] = width + a_idx
        T = np.concatenate([T[:, :width], art, T[:, width:]], axis=1)
        # phase-1 objective: minimize the artificial sum
        for a_idx in range(len(needs_artificial)):
            T[m, width + a_idx] = one
        for i in needs_artificial:
            T[m] = T[m] - T[i]
        status = _simplex_core(T, basis, tol, maxiter)
        if status != "optimal" or -T[m, -1] > tol:
            return LpSolution("infeasible", None, None)
        # drive remaining artificials out of the basis (or drop redundant rows)
        drop = []
        for i in range(m):
            if basis[i] >= width:
                piv = -1
                for j in range(width):
                    if (T[i, j] > tol) or (T[i, j] < -tol):
                        piv = j
                        break
                if piv >= 0:
                    _pivot(T, basis, i, piv)
                else:
                    drop.append(i)
        if drop:
            keep = [i for i in range(m) if i not in drop]
            T = T[keep + [m]]
            basis = [basis[i] for i in keep]
            m = len(basis)
        T = np.concatenate([T[:, :width], T[:, -1:]], axis=1)

    # phase 2
    T[m, :] = zero if exact else 0.0
    c_std = [zero] * width
    for j in range(n):
        _, terms = col_terms[j]
        for col, cf in terms:
            c_std[col] += cost[j] * cf
    for j in range(width):
        T[m, j] = c_std[j]
    for i in range(m):
        cb = c_std[basis[i]] if basis[i] < width else zero
        if cb != 0:
            T[m] = T[m] - cb * T[i]
    status = _simplex_core(T, basis, tol, maxiter)
    if status == "unbounded":
        return LpSolution("unbounded", None, None)

    x_std = [zero] * width
    for i in range(m):
        if basis[i] < width:
            x_std[basis[i]] = T[i, -1]
    x = []
    for j in range(n):
        off, terms = col_terms[j]
        x.append(off + sum(cf * x_std[col] for col, cf in terms))
    value = sum(cast(problem.cost[j]) * x[j] for j in range(n))
    return LpSolution("optimal", x, value)


# ---------------------------------------------------------------------------
# Binary linear programs


@dataclass
class Bip:
    """min cost.u  s.t.  A u <= b,  u in {0,1}^n, with H blocks of n_v vars.

    A is integer and b entries are ints or Fractions, so feasibility checks
    are exact; the cost is floating point with a 1e-9 optimality tolerance.
    """

    n: int
    n_v: int
    H: int
    cost: np.ndarray
    A: np.ndarray
    b: list
    families: list  # per-row label: constituency | positiveness | source

    def rhs_scaled(self) -> tuple[np.ndarray, np.ndarray]:
        """(numerators, denominators) of b for exact integer comparisons."""
        num = np.array([Fraction(x).numerator for x in self.b], dtype=np.int64)
        den = np.array([Fraction(x).denominator for x in self.b], dtype=np.int64)
        return num, den


@dataclass
class BipSolution:
    x: np.ndarray | None
    value: float | None
    status: str          # optimal | infeasible | budget-exhausted
    nodes: int = 0


def bip_to_text(bip: Bip) -> str:
    """Plain-text dump for external cross-checking.

    Grammar: one `min:` line with `<coef> u<i>` terms, then one line per
    inequality `<family>: <coef> u<i> ... <= <rhs>`, variables 0-indexed.
    """
    lines = ["min: " + " + ".join(f"{bip.cost[j]!r} u{j}" for j in range(bip.n))]
    for i in range(bip.A.shape[0]):
        terms = [f"{int(bip.A[i, j])} u{j}" for j in range(bip.n) if bip.A[i, j]]
        lines.append(f"{bip.families[i]}: " + (" + ".join(terms) or "0") + f" <= {bip.b[i]}")
    return "\n".join(lines)


def _lp_relaxation_bound(bip: Bip, depth: int, lhs: np.ndarray, fixed_cost: float):
    """LP bound for the subproblem with u[:depth] fixed; None if infeasible."""
    free = bip.n - depth
    prob = LpProblem(
        cost=list(bip.cost[depth:]),
        A_ub=[list(bip.A[i, depth:]) for i in range(bip.A.shape[0])],
        b_ub=[float(bip.b[i]) - float(lhs[i]) for i in range(bip.A.shape[0])],
        bounds=[(0, 1)] * free,
    )
    sol = solve_lp(prob)
    if sol.status == "infeasible":
        return None
    return fixed_cost + float(sol.value)


MAX_LP_DEPTH = 4  # relaxation bounds are computed near the root, box bounds below


def solve_bip(bip: Bip, node_budget: int | None = None, use_lp_bounds: bool = True) -> BipSolution:
    """Depth-first branch and bound, 0-branch before 1-branch in variable order.

    The first incumbent found is kept through value ties (pruning uses
    `bound >= incumbent - 1e-9`), which makes the returned optimum the
    lexicographically smallest one.
    """
    n = bip.n
    if n == 0:
        return BipSolution(np.zeros(0, dtype=np.int8), 0.0, "optimal", nodes=1)
    A = bip.A
    m = A.shape[0]
    num, den = bip.rhs_scaled()
    cost = bip.cost
    # suffix sums: least possible remaining LHS per row, and negative-cost mass
    min_suffix = np.zeros((n + 1, m), dtype=np.int64)
    for d in range(n - 1, -1, -1):
        min_suffix[d] = min_suffix[d + 1] + np.minimum(A[:, d], 0)
    neg_cost_suffix = np.zeros(n + 1)
    for d in range(n - 1, -1, -1):
        neg_cost_suffix[d] = neg_cost_suffix[d + 1] + min(cost[d], 0.0)

    x = np.zeros(n, dtype=np.int8)
    best_x: np.ndarray | None = None
    best_val = np.inf
    nodes = 0
    exhausted = False

    def visit(depth: int, lhs: np.ndarray, fixed: float):
        nonlocal best_x, best_val, nodes, exhausted
        if exhausted:
            return
        nodes += 1
        if node_budget is not None and nodes > node_budget:
            exhausted = True
            return
        # exact infeasibility: even the most negative completion overshoots
        if ((lhs + min_suffix[depth]) * den > num).any():
            return
        if depth == n:
            if fixed < best_val - OPT_TOL:
                best_val = fixed
                best_x = x.copy()
            return
        zero_ok = (lhs * den <= num).all()
        if zero_ok and neg_cost_suffix[depth] == 0.0:
            # all-zero completion is the lexicographic minimum of this subtree
            # and no completion can cost less
            if fixed < best_val - OPT_TOL:
                best_val = fixed
                cand = x.copy()
                cand[depth:] = 0
                best_x = cand
            return
        if best_x is not None:
            if fixed + neg_cost_suffix[depth] >= best_val - OPT_TOL:
                return
            if use_lp_bounds and depth <= MAX_LP_DEPTH:
                lp_bound = _lp_relaxation_bound(bip, depth, lhs, fixed)
                if lp_bound is None or lp_bound >= best_val - OPT_TOL:
                    return
        x[depth] = 0
        visit(depth + 1, lhs, fixed)
        x[depth] = 1
        visit(depth + 1, lhs + A[:, depth], fixed + cost[depth])
        x[depth] = 0

    visit(0, np.zeros(m, dtype=np.int64), 0.0)
    if exhausted:
        return BipSolution(best_x, best_val if best_x is not None else None,
                           "budget-exhausted", nodes)
    if best_x is None:
        return BipSolution(None, None, "infeasible", nodes)
    return BipSolution(best_x, float(np.dot(cost, best_x)), "optimal", nodes)


def solve_bip_exhaustive(bip: Bip) -> BipSolution:
    """Full enumeration oracle with the same tolerance and tie-break."""
    n = bip.n
    if n > 20:
        raise EnumerationLimitError(f"exhaustive solve limited to 20 variables, got {n}")
    if n == 0:
        return BipSolution(np.zeros(0, dtype=np.int8), 0.0, "optimal", nodes=1)
    num, den = bip.rhs_scaled()
    shifts = np.arange(n - 1, -1, -1, dtype=np.uint32)
    best_x = None
    best_val = np.inf
    total = 1 << n
    chunk = 1 << 14
    for start in range(0, total, chunk):
        ks = np.arange(start, min(start + chunk, total), dtype=np.uint32)
        cand = ((ks[:, None] >> shifts[None, :]) & 1).astype(np.int64)
        lhs = cand @ bip.A.T
        feas = (lhs * den <= num).all(axis=1)
        vals = cand @ bip.cost
        for idx in np.flatnonzero(feas):
            v = vals[idx]
            if v < best_val - OPT_TOL:
                best_val = v
                best_x = cand[idx].astype(np.int8)
    if best_x is None:
        return BipSolution(None, None, "infeasible", nodes=total)
    return BipSolution(best_x, float(np.dot(bip.cost, best_x)), "optimal", nodes=total)
