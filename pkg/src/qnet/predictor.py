"""Builds the H-step prediction data consumed by the receding-horizon policy.

For a horizon H the policy minimizes a linear surrogate of the expected
sum-of-squares queue objective over binary control trajectories
u_0 .. u_{H-1}.  The surrogate cost for block t is

    [2(H-t) q0 + (H+1+t)(H-t) a_bar] . R . What_t

where What_t is the expected success-probability diagonal t slots ahead.
Constituency constraints repeat per block; positiveness constraints are
block-lower-triangular: the drain scheduled in slot t may not exceed the
queue predicted from full-success transfers and mean arrivals.

Only this relaxed prediction (one control vector per future slot) is
implemented.  Richer schemes that condition future controls on realized
chain states or full realizations would replace `build_bip`'s variable
layout; they are deliberate non-goals here.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product

import numpy as np

from .errors import EnumerationLimitError
from .markov import MarkovChain, propagate
from .model import ArrivalProcess, Network
from .optim import Bip

ORACLE_MAX_VARS = 16


def expected_weights(chain: MarkovChain, W: np.ndarray, init, t: int) -> np.ndarray:
    """Expected success-probability diagonal t slots ahead of `init`.

    `init` is a state index or a distribution over states.
    """
    if np.isscalar(init):
        sigma0 = np.zeros(chain.n_s)
        sigma0[int(init)] = 1.0
    else:
        sigma0 = np.asarray(init, dtype=np.float64)
    sigma_t = propagate(sigma0, chain.P, t)
    return sigma_t @ W


def expected_weights_horizon(chain: MarkovChain, W: np.ndarray, init, H: int) -> np.ndarray:
    """Stack What_0 .. What_{H-1} as rows; one chain propagation per step."""
    if np.isscalar(init):
        sigma = np.zeros(chain.n_s)
        sigma[int(init)] = 1.0
    else:
        sigma = np.asarray(init, dtype=np.float64)
    rows = []
    for _ in range(H):
        rows.append(sigma @ W)
        sigma = propagate(sigma, chain.P, 1)
    return np.array(rows)


def build_objective(net: Network, chain: MarkovChain, q0, init, a_bar, H: int) -> np.ndarray:
    """Linear cost vector over the stacked trajectory, length H * n_v."""
    if H < 1:
        raise ValueError("horizon must be >= 1")
    q0 = np.asarray(q0, dtype=np.float64)
    a_bar = np.asarray(a_bar, dtype=np.float64)
    What = expected_weights_horizon(chain, net.W, init, H)
    blocks = []
    for t in range(H):
        lead = 2.0 * (H - t) * q0 + float((H + 1 + t) * (H - t)) * a_bar
        blocks.append((lead @ net.R) * What[t])
    return np.concatenate(blocks)


def build_constraints(net: Network, q0, rate: tuple, H: int,
                      source_gates: bool = True):
    """Stacked inequality system (A, b, families) over {0,1}^{H n_v}.

    A is integer; b entries are exact (ints or Fractions built from the mean
    arrival rate).  With `source_gates`, links whose required source queues
    are empty at the decision state are pinned to zero in the first block,
    which keeps the returned first control feasible for copy links that the
    positiveness rows cannot see.
    """
    if H < 1:
        raise ValueError("horizon must be >= 1")
    n_v, n_q = net.n_v, net.n_q
    n = H * n_v
    rows, rhs, families = [], [], []

    for t in range(H):
        for k in range(net.C.shape[0]):
            row = np.zeros(n, dtype=np.int64)
            row[t * n_v:(t + 1) * n_v] = net.C[k]
            rows.append(row)
            rhs.append(int(net.c[k]))
            families.append("constituency")
    for t in range(H):
        for i in range(n_q):
            row = np.zeros(n, dtype=np.int64)
            row[t * n_v:(t + 1) * n_v] = -net.R_minus[i]
            for tau in range(t):
                row[tau * n_v:(tau + 1) * n_v] = -net.R[i]
            rows.append(row)
            rhs.append(int(q0[i]) + t * Fraction(rate[i]))
            families.append("positiveness")
    if source_gates:
        for j in range(n_v):
            starved = any(net.S_req[i, j] and q0[i] < 1 for i in range(n_q))
            if starved:
                row = np.zeros(n, dtype=np.int64)
                row[j] = 1
                rows.append(row)
                rhs.append(0)
                families.append("source")

    A = np.array(rows, dtype=np.int64) if rows else np.zeros((0, n), dtype=np.int64)
    return A, rhs, families


def build_bip(net: Network, chain: MarkovChain, arrivals: ArrivalProcess,
              q0, init, H: int) -> Bip:
    """Full binary program for one policy decision."""
    cost = build_objective(net, chain, q0, init, arrivals.rate_float(), H)
    A, b, families = build_constraints(net, q0, arrivals.rate, H)
    return Bip(n=H * net.n_v, n_v=net.n_v, H=H, cost=cost, A=A, b=b, families=families)


# ---------------------------------------------------------------------------
# Exact quadratic oracle


def _bernoulli_outcomes(active, probs):
    """All (mask, probability) outcomes for the active links' coin flips."""
    if not active:
        return [(np.zeros(len(probs), dtype=np.int64), Fraction(1))]
    out = []
    for bits in product((0, 1), repeat=len(active)):
        mask = np.zeros(len(probs), dtype=np.int64)
        pr = Fraction(1)
        for j, hit in zip(active, bits):
            w = probs[j]
            pr *= w if hit else 1 - w
            mask[j] = hit
        if pr > 0:
            out.append((mask, pr))
    return out


def quadratic_objective_oracle(net: Network, chain: MarkovChain,
                               arrivals: ArrivalProcess, q0, s0: int,
                               H: int, u_traj) -> Fraction:
    """Exact E[sum_{t=1..H} q_t'q_t | q0, s0] under open-loop controls.

    Enumerates the full outcome tree (chain paths, per-link coin flips,
    arrival outcomes) in rational arithmetic.  The scheduled controls are
    applied unconditionally, exactly as the relaxed prediction model assumes,
    so intermediate states may go negative.  Small instances only.
    """
    u = np.asarray(u_traj, dtype=np.int64).reshape(H, net.n_v)
    if H * net.n_v > ORACLE_MAX_VARS:
        raise EnumerationLimitError(
            f"oracle limited to {ORACLE_MAX_VARS} trajectory variables, got {H * net.n_v}")
    W_frac = [[Fraction(x) for x in row] for row in net.W]
    P_frac = [[Fraction(x) for x in row] for row in chain.P]
    R = net.R

    memo: dict = {}

    def rec(t: int, q: tuple, s: int) -> Fraction:
        if t == H:
            return Fraction(0)
        key = (t, q, s)
        if key in memo:
            return memo[key]
        active = [j for j in range(net.n_v) if u[t, j]]
        total = Fraction(0)
        qv = np.array(q, dtype=np.int64)
        for mask, pm in _bernoulli_outcomes(active, W_frac[s]):
            moved = R @ mask if active else np.zeros(net.n_q, dtype=np.int64)
            for a_vec, pa in arrivals.support(t):
                q1 = qv + moved + a_vec
                w = pm * pa
                contrib = Fraction(int((q1 * q1).sum()))
                if t + 1 < H:
                    sub = Fraction(0)
                    for s1 in range(chain.n_s):
                        p = P_frac[s][s1]
                        if p > 0:
                            sub += p * rec(t + 1, tuple(int(x) for x in q1), s1)
                    contrib += sub
                total += w * contrib
        memo[key] = total
        return total

    return rec(0, tuple(int(x) for x in np.asarray(q0)), int(s0))
