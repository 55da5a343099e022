"""Discrete-time Markov chain driving the per-slot link-success matrices."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

ROW_SUM_TOL = 1e-12
STATIONARY_TOL = 1e-12
STATIONARY_MAX_ITER = 10**6


@dataclass(frozen=True)
class MarkovChain:
    n_s: int
    P: np.ndarray            # row-stochastic n_s x n_s
    s0: int | None = None    # initial state (0-indexed)
    sigma0: np.ndarray | None = None

    def __post_init__(self):
        self.P.setflags(write=False)
        if self.sigma0 is not None:
            self.sigma0.setflags(write=False)

    @property
    def deterministic(self) -> bool:
        return bool(np.isin(self.P, (0.0, 1.0)).all())

    def initial_distribution(self) -> np.ndarray:
        if self.sigma0 is not None:
            return self.sigma0.copy()
        sigma = np.zeros(self.n_s)
        sigma[self.s0] = 1.0
        return sigma

    def to_json(self) -> dict:
        out = {"P": self.P.tolist()}
        if self.s0 is not None:
            out["s0"] = self.s0
        else:
            out["sigma0"] = self.sigma0.tolist()
        return out


def validate_chain(raw: dict) -> MarkovChain:
    P = np.asarray(raw.get("P"), dtype=np.float64)
    if P.ndim != 2 or P.shape[0] != P.shape[1] or P.shape[0] == 0:
        raise ValidationError("chain.P", f"expected a square matrix, got shape {P.shape}")
    n_s = P.shape[0]
    if (P < 0).any() or (P > 1).any():
        i, j = np.argwhere((P < 0) | (P > 1))[0]
        raise ValidationError(f"chain.P[{i}][{j}]", f"entry {P[i, j]} outside [0, 1]")
    rows = P.sum(axis=1)
    if not np.allclose(rows, 1.0, atol=ROW_SUM_TOL, rtol=0):
        i = int(np.argmax(np.abs(rows - 1.0)))
        raise ValidationError(f"chain.P[{i}]", f"row sums to {rows[i]!r}, expected 1")
    s0 = raw.get("s0")
    sigma0 = raw.get("sigma0")
    if (s0 is None) == (sigma0 is None):
        raise ValidationError("chain", "exactly one of s0, sigma0 is required")
    if s0 is not None:
        s0 = int(s0)
        if not 0 <= s0 < n_s:
            raise ValidationError("chain.s0", f"state {s0} outside 0..{n_s - 1}")
        return MarkovChain(n_s=n_s, P=P, s0=s0)
    sigma0 = np.asarray(sigma0, dtype=np.float64)
    if sigma0.shape != (n_s,):
        raise ValidationError("chain.sigma0", f"expected length {n_s}")
    if (sigma0 < 0).any() or abs(sigma0.sum() - 1.0) > ROW_SUM_TOL:
        raise ValidationError("chain.sigma0", "must be nonnegative and sum to 1")
    return MarkovChain(n_s=n_s, P=P, sigma0=sigma0)


def propagate(sigma0: np.ndarray, P: np.ndarray, t: int) -> np.ndarray:
    """Distribution after t steps: sigma0 P^t.

    Deterministic (0/1) transition matrices are advanced by index shuffling
    instead of floating multiplication, so permutation schedules reproduce
    bit-exactly.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    sigma = np.asarray(sigma0, dtype=np.float64).copy()
    P = np.asarray(P, dtype=np.float64)
    if np.isin(P, (0.0, 1.0)).all():
        nxt = P.argmax(axis=1)
        for _ in range(t):
            out = np.zeros_like(sigma)
            np.add.at(out, nxt, sigma)
            sigma = out
        return sigma
    for _ in range(t):
        sigma = sigma @ P
    return sigma


def stationary(P: np.ndarray) -> np.ndarray:
    """Stationary distribution by power iteration (tiny state spaces).

    Raises on chains that oscillate instead of converging (periodic) or that
    exhaust the iteration budget.
    """
    P = np.asarray(P, dtype=np.float64)
    n = P.shape[0]
    # asymmetric start: a uniform vector is a fixed point of any doubly
    # stochastic chain, which would mask periodicity
    sigma = np.arange(1.0, n + 1.0)
    sigma /= sigma.sum()
    window = []
    for _ in range(STATIONARY_MAX_ITER):
        nxt = sigma @ P
        if np.abs(nxt - sigma).max() < STATIONARY_TOL:
            pi = nxt / nxt.sum()
            return pi
        for old in window:
            if np.abs(nxt - old).max() < STATIONARY_TOL:
                raise ValueError("power iteration oscillates: chain may be periodic or reducible")
        window.append(sigma)
        if len(window) > 4:
            window.pop(0)
        sigma = nxt
    raise ValueError("no convergence within 10^6 iterations: chain may be periodic or reducible")


def sample_next(s: int, P: np.ndarray, rng) -> int:
    """Draw the successor of state s, consuming exactly one uniform."""
    u = rng.random()
    return int(np.searchsorted(np.cumsum(P[s]), u, side="right").clip(max=P.shape[0] - 1))
