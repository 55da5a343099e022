"""Control policies: max-weight, receding-horizon, fixed-trajectory, baselines.

All policies map the observed (queue vector, chain state) to a feasible
binary control.  Ties between cost-equal optima are always broken toward the
lexicographically smallest trajectory, so runs are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import check_feasible
from .errors import ValidationError
from .markov import MarkovChain
from .model import ArrivalProcess, Network, enumerate_control_set
from .optim import solve_bip, solve_bip_exhaustive
from .predictor import build_bip

POLICY_KINDS = ("MW", "PNC", "FPNC", "IDLE", "RANDOM")


@dataclass(frozen=True)
class PolicySpec:
    kind: str
    horizon: int | None = None
    tie_break: str = "lexicographic"
    node_budget: int | None = None

    def __post_init__(self):
        if self.kind not in POLICY_KINDS:
            raise ValidationError("policy.kind", f"unknown policy kind {self.kind!r}")
        if self.kind in ("PNC", "FPNC"):
            if self.horizon is None or self.horizon < 1:
                raise ValidationError("policy.H", "predictive policies need a horizon >= 1")
        if self.tie_break != "lexicographic":
            raise ValidationError("policy.tie_break", f"unsupported tie break {self.tie_break!r}")

    @property
    def name(self) -> str:
        if self.kind in ("PNC", "FPNC"):
            return f"{self.kind}-H{self.horizon}"
        return self.kind

    def to_json(self) -> dict:
        out = {"kind": self.kind}
        if self.horizon is not None:
            out["H"] = self.horizon
        return out

    @staticmethod
    def from_json(raw: dict) -> "PolicySpec":
        kind = raw.get("kind")
        if not isinstance(kind, str):
            raise ValidationError("policy.kind", "missing policy kind")
        return PolicySpec(kind=kind.upper(), horizon=raw.get("H"),
                          node_budget=raw.get("node_budget"))


def _solve_trajectory(net, chain, arrivals, q0, s0, H, node_budget):
    bip = build_bip(net, chain, arrivals, q0, s0, H)
    sol = solve_bip(bip, node_budget=node_budget)
    if sol.status == "budget-exhausted":
        if bip.n <= 20:
            sol = solve_bip_exhaustive(bip)
        else:
            raise RuntimeError(
                f"solver node budget exhausted on a {bip.n}-variable program too large to enumerate")
    if sol.status != "optimal":
        raise RuntimeError(f"trajectory program unexpectedly {sol.status}")
    return sol.x.reshape(H, net.n_v).astype(np.int64)


def pnc_decide(net: Network, chain: MarkovChain, arrivals: ArrivalProcess,
               q0, s0: int, H: int, node_budget: int | None = None) -> np.ndarray:
    """First block of the optimal H-step trajectory at (q0, s0)."""
    return _solve_trajectory(net, chain, arrivals, q0, s0, H, node_budget)[0]


def mw_decide(net: Network, chain: MarkovChain, arrivals: ArrivalProcess,
              q0, s0: int) -> np.ndarray:
    """Max-weight scheduling: the horizon-1 case of the predictive policy."""
    return pnc_decide(net, chain, arrivals, q0, s0, H=1)


class PncPolicy:
    """Receding horizon: re-solves every slot, applies only the first block.

    Decisions are a pure function of (q, s) and are memoized per run.
    """

    def __init__(self, net, chain, arrivals, H: int, node_budget=None):
        self.net, self.chain, self.arrivals = net, chain, arrivals
        self.H = H
        self.node_budget = node_budget
        self.n_solves = 0
        self._memo: dict = {}

    def decide(self, q, s) -> np.ndarray:
        self.n_solves += 1
        key = (tuple(int(x) for x in q), int(s))
        v = self._memo.get(key)
        if v is None:
            v = _solve_trajectory(self.net, self.chain, self.arrivals, q, s,
                                  self.H, self.node_budget)[0]
            self._memo[key] = v
        return v


class MwPolicy(PncPolicy):
    def __init__(self, net, chain, arrivals, node_budget=None):
        super().__init__(net, chain, arrivals, H=1, node_budget=node_budget)


def repair_control(net: Network, q, v) -> np.ndarray:
    """Switch off links violating feasibility at the realized state.

    Used by the fixed-trajectory policy when a precomputed block meets a
    shortfall the mean-arrival prediction did not anticipate.
    """
    v = np.asarray(v, dtype=np.int64).copy()
    while True:
        res = check_feasible(net, q, v)
        if res.ok:
            return v
        if res.family == "constituency":
            v[(net.C[res.index] > 0) & (v == 1)] = 0
        elif res.family == "positiveness":
            v[(net.R_minus[res.index] < 0) & (v == 1)] = 0
        else:  # source
            v[res.index] = 0


class FpncPolicy:
    """Fixed-trajectory variant: consumes a whole solved trajectory before
    re-optimizing; infeasible pending blocks are repaired by dropping the
    violating links."""

    def __init__(self, net, chain, arrivals, H: int, node_budget=None):
        self.net, self.chain, self.arrivals = net, chain, arrivals
        self.H = H
        self.node_budget = node_budget
        self.n_solves = 0
        self._memo: dict = {}
        self._pending: list[np.ndarray] = []

    def decide(self, q, s) -> np.ndarray:
        if not self._pending:
            self.n_solves += 1
            key = (tuple(int(x) for x in q), int(s))
            traj = self._memo.get(key)
            if traj is None:
                traj = _solve_trajectory(self.net, self.chain, self.arrivals, q, s,
                                         self.H, self.node_budget)
                self._memo[key] = traj
            self._pending = [traj[t] for t in range(self.H)]
        v = self._pending.pop(0)
        return repair_control(self.net, q, v)


class IdlePolicy:
    def __init__(self, net, *_args, **_kw):
        self.net = net
        self.n_solves = 0

    def decide(self, q, s) -> np.ndarray:
        return np.zeros(self.net.n_v, dtype=np.int64)


class RandomPolicy:
    """Uniform choice among the feasible controls; owns its rng stream."""

    def __init__(self, net, rng):
        self.net = net
        self.rng = rng
        self.n_solves = 0
        self._controls = enumerate_control_set(net)

    def decide(self, q, s) -> np.ndarray:
        feasible = [v for v in self._controls if check_feasible(self.net, q, v).ok]
        pick = int(self.rng.integers(len(feasible)))
        return np.asarray(feasible[pick], dtype=np.int64)


def make_policy(spec: PolicySpec, net, chain, arrivals, policy_rng=None):
    if spec.kind == "MW":
        return MwPolicy(net, chain, arrivals, node_budget=spec.node_budget)
    if spec.kind == "PNC":
        return PncPolicy(net, chain, arrivals, spec.horizon, node_budget=spec.node_budget)
    if spec.kind == "FPNC":
        return FpncPolicy(net, chain, arrivals, spec.horizon, node_budget=spec.node_budget)
    if spec.kind == "IDLE":
        return IdlePolicy(net)
    if spec.kind == "RANDOM":
        return RandomPolicy(net, policy_rng)
    raise ValidationError("policy.kind", f"unknown policy kind {spec.kind!r}")
