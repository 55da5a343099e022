"""Stability-region arithmetic and empirical stability classification.

Region membership solves, in exact rational arithmetic,

    max eps  s.t.  a_bar + sum_s pi_s sum_v lambda_{s,v} (R W^s v) = -eps 1,
                   lambda >= 0,  sum_v lambda_{s,v} <= 1  per state,

and reports inside when the optimum exceeds 1e-9.  An infeasible program
means no averaged control balances the arrival vector at all, which is
likewise outside.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .dynamics import Trace
from .model import Network, enumerate_control_set
from .optim import LpProblem, solve_lp

EPS_THRESHOLD = Fraction(1, 10**9)


@dataclass
class RegionQuery:
    net: Network
    a_bar: tuple                       # exact per-queue mean rates
    pi: tuple | None = None            # stationary weights; default from P or single state
    options: np.ndarray | None = None  # restricted control set; default: full enumeration
    effect_scale: Fraction = Fraction(1)  # unit scale applied to R W^s v


@dataclass
class RegionResult:
    kind: str                 # inside | boundary | outside
    eps: Fraction | None


def mw_accessible_options(net: Network) -> np.ndarray:
    """Controls reachable by backlog-driven scheduling: copy links excluded.

    A copy link (a column with +1 entries but no -1) only ever increases the
    weighted backlog, so a myopic argmax never activates it.
    """
    V = enumerate_control_set(net)
    copy_links = ((net.R == 1).any(axis=0)) & (~(net.R == -1).any(axis=0))
    keep = ~(V[:, copy_links] == 1).any(axis=1) if copy_links.any() else np.ones(len(V), bool)
    return V[keep]


def _resolve_pi(query: RegionQuery) -> list[Fraction]:
    if query.pi is not None:
        return [Fraction(p) for p in query.pi]
    if query.net.n_s == 1:
        return [Fraction(1)]
    raise ValueError("multi-state region queries need explicit stationary weights pi")


def region_membership(query: RegionQuery) -> RegionResult:
    net = query.net
    V = query.options if query.options is not None else enumerate_control_set(net)
    pi = _resolve_pi(query)
    scale = Fraction(query.effect_scale)
    a_bar = [Fraction(x) for x in query.a_bar]
    if len(a_bar) != net.n_q:
        raise ValueError(f"expected {net.n_q} arrival rates, got {len(a_bar)}")

    # effect of option v in state s: pi_s * scale * (R W^s v), exact
    n_s = net.n_s
    n_lam = n_s * len(V)
    cols: list[list[Fraction]] = []
    for s in range(n_s):
        Ws = [Fraction(x) for x in net.W[s]]
        for v in V:
            eff = [scale * pi[s] * sum(Fraction(int(net.R[i, j])) * Ws[j] * int(v[j])
                                       for j in range(net.n_v))
                   for i in range(net.n_q)]
            cols.append(eff)

    # variables: [eps, lambda...]
    cost = [1] + [0] * n_lam
    A_eq = []
    b_eq = []
    for i in range(net.n_q):
        A_eq.append([1] + [cols[k][i] for k in range(n_lam)])
        b_eq.append(-a_bar[i])
    A_ub = []
    b_ub = []
    for s in range(n_s):
        row = [0] * (1 + n_lam)
        for k in range(len(V)):
            row[1 + s * len(V) + k] = 1
        A_ub.append(row)
        b_ub.append(1)
    bounds = [(None, None)] + [(0, None)] * n_lam
    sol = solve_lp(LpProblem(cost=cost, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
                             bounds=bounds, maximize=True), exact=True)
    if sol.status == "infeasible":
        return RegionResult("outside", None)
    if sol.status == "unbounded":
        # cannot happen with a finite option set and nonnegative rates
        raise RuntimeError("region program unbounded; inputs are inconsistent")
    eps = Fraction(sol.value)
    if eps > EPS_THRESHOLD:
        return RegionResult("inside", eps)
    if eps < -EPS_THRESHOLD:
        return RegionResult("outside", eps)
    return RegionResult("boundary", eps)


def region_slice(query: RegionQuery, directions, tol: float = 1e-6,
                 axes: tuple[int, int] = (0, 1)) -> list[dict]:
    """Boundary points along rays from the origin in a 2-d arrival plane.

    Each direction (dx, dy) is bisected on the membership radius to `tol`.
    Returns one row per ray: direction, boundary point, and eps at half the
    boundary radius.
    """
    ax, ay = axes
    rows = []
    for d in directions:
        dx, dy = Fraction(d[0]), Fraction(d[1])
        if dx == 0 and dy == 0:
            warnings.warn("skipping degenerate direction (0, 0)")
            continue

        def member(r: Fraction) -> RegionResult:
            a = [Fraction(0)] * query.net.n_q
            a[ax] = r * dx
            a[ay] = r * dy
            return region_membership(RegionQuery(net=query.net, a_bar=tuple(a),
                                                 pi=query.pi, options=query.options,
                                                 effect_scale=query.effect_scale))

        lo, hi = Fraction(0), Fraction(1)
        for _ in range(64):
            if member(hi).kind != "inside":
                break
            lo, hi = hi, hi * 2
        else:
            raise RuntimeError(f"direction {d} appears unbounded; inconsistent region")
        while hi - lo > Fraction(repr(tol)):
            mid = (lo + hi) / 2
            if member(mid).kind == "inside":
                lo = mid
            else:
                hi = mid
        r_star = (lo + hi) / 2
        eps_half = member(r_star / 2).eps
        rows.append({
            "direction_x": float(dx), "direction_y": float(dy),
            "boundary_x": float(r_star * dx), "boundary_y": float(r_star * dy),
            "eps_at_half": float(eps_half) if eps_half is not None else float("nan"),
        })
    return rows


def region_rows_to_csv(rows: list[dict]) -> str:
    header = "direction_x,direction_y,boundary_x,boundary_y,eps_at_half"
    lines = [header]
    for r in rows:
        lines.append(",".join(repr(r[k]) for k in header.split(",")))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Empirical classification


@dataclass
class StabilityThresholds:
    stable_slope: float = 0.01     # packets per slot
    unstable_slope: float = 0.05
    queue_factor: float = 100.0    # bound = factor * mean-arrival * sqrt(window)
    queue_floor: float = 100.0     # lets zero-arrival traces classify as stable


@dataclass
class StabilityVerdict:
    classification: str            # stable | unstable | inconclusive
    slope: float
    window: int


def assess_stability(trace: Trace, window: int | None = None,
                     thresholds: StabilityThresholds | None = None) -> StabilityVerdict:
    """Least-squares slope of the total queue over the final window."""
    th = thresholds or StabilityThresholds()
    series = trace.total_queue_series()
    if window is None:
        window = len(series) // 2
    if len(series) < 2 * window or window < 2:
        raise ValueError(f"trace of {len(series)} slots is too short for window {window}")
    tail = series[-window:].astype(np.float64)
    ts = np.arange(window, dtype=np.float64)
    ts -= ts.mean()
    slope = float((ts * (tail - tail.mean())).sum() / (ts * ts).sum())
    mean_arrival = trace.cumulative_arrivals() / max(trace.slots, 1)
    bound = max(th.queue_factor * mean_arrival * np.sqrt(window), th.queue_floor)
    if slope > th.unstable_slope:
        cls = "unstable"
    elif slope < th.stable_slope and tail.max() < bound:
        cls = "stable"
    else:
        cls = "inconclusive"
    return StabilityVerdict(cls, slope, window)
