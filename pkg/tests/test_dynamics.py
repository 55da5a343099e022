"""One-step evolution, feasibility checks, traces, serialization."""

import numpy as np
import pytest

from qnet.dynamics import (SimState, Trace, check_feasible, make_streams, run,
                           step, trace_csv_header, trace_to_csv)
from qnet.errors import PolicyContractError
from qnet.markov import validate_chain
from qnet.model import enumerate_control_set, validate_arrivals, validate_network
from qnet.policies import IdlePolicy, RandomPolicy

from conftest import random_network, zero_arrivals

RELAY = validate_network({"R": [[-1, 0], [1, -1]], "C": [[0, 0]], "c": [1],
                          "W": [[1.0, 1.0]]})
ONE_STATE = validate_chain({"P": [[1.0]], "s0": 0})


def test_check_feasible_examples():
    assert check_feasible(RELAY, [0, 1], [0, 1]).ok
    res = check_feasible(RELAY, [1, 0], [0, 1])
    assert not res.ok and res.family == "positiveness" and res.index == 1
    assert check_feasible(RELAY, [0, 0], [0, 0]).ok
    res = check_feasible(RELAY, [5, 5], [1, 1])
    assert res.ok


def test_check_feasible_constituency():
    net = validate_network({"R": [[-1, -1]], "C": [[1, 1]], "c": [1], "W": [[1.0, 1.0]]})
    res = check_feasible(net, [5], [1, 1])
    assert not res.ok and res.family == "constituency" and res.index == 0


def test_check_feasible_source_requirement():
    net = validate_network({"R": [[-1, 0, -1], [0, 1, -1]], "C": [[1, 1, 1]], "c": [1],
                            "W": [[0.25, 1.0, 1.0]], "S_req": [[0, 1, 0], [0, 0, 0]]})
    res = check_feasible(net, [0, 3], [0, 1, 0])
    assert not res.ok and res.family == "source" and res.index == 1
    assert check_feasible(net, [1, 3], [0, 1, 0]).ok


def test_step_certain_success():
    arr = validate_arrivals({"kind": "constant", "value": [0, 0]}, 2)
    streams = make_streams(0)
    state = SimState(0, np.array([1, 1]), 0)
    nxt, rec = step(RELAY, arr, ONE_STATE, state, [1, 1], streams)
    assert rec.q_after.tolist() == [0, 1]
    assert rec.delivered == 1
    assert nxt.t == 1


def test_step_idle_keeps_queues():
    arr = validate_arrivals({"kind": "constant", "value": [1, 0]}, 2)
    streams = make_streams(0)
    nxt, rec = step(RELAY, arr, ONE_STATE, SimState(0, np.array([3, 2]), 0), [0, 0], streams)
    assert rec.q_after.tolist() == [4, 2]
    assert rec.m.tolist() == [0, 0]


def test_step_rejects_infeasible():
    arr = zero_arrivals(2)
    with pytest.raises(PolicyContractError):
        step(RELAY, arr, ONE_STATE, SimState(0, np.array([0, 0]), 0), [1, 0],
             make_streams(0))


def test_step_record_identity(rng):
    # q_after - q_before == R diag(m) v + a, exactly, on random feasible steps
    for _ in range(50):
        net = random_network(rng)
        arr = validate_arrivals({"kind": "constant",
                                 "value": rng.integers(0, 3, size=net.n_q).tolist()}, net.n_q)
        chain = validate_chain({"P": np.eye(net.n_s).tolist(), "s0": 0})
        q = rng.integers(0, 5, size=net.n_q)
        vs = [v for v in enumerate_control_set(net) if check_feasible(net, q, v).ok]
        v = vs[rng.integers(len(vs))]
        _, rec = step(net, arr, chain, SimState(0, q, 0), v, make_streams(int(rng.integers(1000))))
        assert np.array_equal(rec.q_after - rec.q_before, net.R @ (rec.m * rec.v) + rec.a)
        assert (rec.m[rec.v == 0] == 0).all()


def test_run_idle_zero_arrivals_constant():
    trace = run(RELAY, ONE_STATE, zero_arrivals(2), IdlePolicy(RELAY), 100,
                make_streams(1), q0=[2, 3])
    series = trace.total_queue_series()
    assert (series == 5).all()
    assert trace.cumulative_delivered() == 0


def test_run_deterministic_same_seed():
    net = validate_network({"R": [[-1, 0], [1, -1]], "C": [[0, 0]], "c": [1],
                            "W": [[0.5, 0.5]]})
    arr = validate_arrivals({"kind": "iid-bernoulli-batch", "p": ["0.5", "0"],
                             "batch": [1, 1]}, 2)
    def one():
        return run(net, ONE_STATE, arr, RandomPolicy(net, make_streams(7).policy),
                   200, make_streams(7))
    t1, t2 = one(), one()
    assert trace_to_csv(t1, net) == trace_to_csv(t2, net)


def test_run_aborts_on_bad_policy():
    class Bad:
        def decide(self, q, s):
            return np.array([1, 0])
    with pytest.raises(PolicyContractError):
        run(RELAY, ONE_STATE, zero_arrivals(2), Bad(), 10, make_streams(0))


def test_nonnegativity_and_masking_random_runs(rng):
    for _ in range(20):
        net = random_network(rng)
        chain = validate_chain({"P": np.eye(net.n_s).tolist(), "s0": 0})
        arr = validate_arrivals({"kind": "iid-bernoulli-batch",
                                 "p": ["1/2"] * net.n_q, "batch": [1] * net.n_q}, net.n_q)
        trace = run(net, chain, arr, RandomPolicy(net, make_streams(3).policy),
                    300, make_streams(int(rng.integers(10000))))
        for rec in trace.records:
            assert (rec.q_after >= 0).all()
            # masked links contribute nothing
            assert np.array_equal(rec.q_after - rec.q_before,
                                  net.R @ (rec.m * rec.v) + rec.a)


def test_window_difference_bounds(rng):
    # over any window of length L the queue change stays within
    # [-L n_v, L (n_v 1 + a_hat)] elementwise
    net = random_network(rng)
    chain = validate_chain({"P": np.eye(net.n_s).tolist(), "s0": 0})
    arr = validate_arrivals({"kind": "iid-bernoulli-batch",
                             "p": ["1/2"] * net.n_q, "batch": [1] * net.n_q}, net.n_q)
    trace = run(net, chain, arr, RandomPolicy(net, make_streams(5).policy),
                400, make_streams(11))
    qs = np.array([r.q_before for r in trace.records] + [trace.records[-1].q_after])
    for lag in range(1, len(qs)):
        diff = qs[lag:] - qs[:-lag]
        assert (diff >= -lag * net.n_v - 1e-9).all()
        assert (diff <= lag * (net.n_v + net.a_hat) + 1e-9).all()


def test_mass_accounting_conventional(rng):
    # packets in system == initial + arrivals - deliveries, every slot
    for _ in range(10):
        net = random_network(rng)
        assert net.conventional
        chain = validate_chain({"P": np.eye(net.n_s).tolist(), "s0": 0})
        arr = validate_arrivals({"kind": "iid-bernoulli-batch",
                                 "p": ["1/4"] * net.n_q, "batch": [1] * net.n_q}, net.n_q)
        q0 = rng.integers(0, 3, size=net.n_q)
        trace = run(net, chain, arr, RandomPolicy(net, make_streams(9).policy),
                    300, make_streams(int(rng.integers(10000))), q0=q0)
        total = int(q0.sum())
        for rec in trace.records:
            total += int(rec.a.sum()) - rec.delivered
            assert rec.q_after.sum() == total


def test_trace_csv_schema():
    header = trace_csv_header(RELAY)
    assert header == "t,s,q_1,q_2,v_1,v_2,m_1,m_2,a_1,a_2,delivered"
    trace = run(RELAY, ONE_STATE, zero_arrivals(2), IdlePolicy(RELAY), 3,
                make_streams(0), q0=[1, 0])
    text = trace_to_csv(trace, RELAY)
    lines = text.strip().split("\n")
    assert lines[0] == header
    assert len(lines) == 4
    assert lines[1] == "0,0,1,0,0,0,0,0,0,0,0"


def test_paired_streams_across_policies():
    # same seed, different policies: identical arrivals and chain states
    net = validate_network({"R": [[-1, 0], [1, -1]], "C": [[0, 0]], "c": [1],
                            "W": [[0.5, 0.5], [1.0, 0.0]]})
    chain = validate_chain({"P": [[0.3, 0.7], [0.6, 0.4]], "s0": 0})
    arr = validate_arrivals({"kind": "iid-bernoulli-batch", "p": ["0.5", "0.25"],
                             "batch": [1, 1]}, 2)
    t_idle = run(net, chain, arr, IdlePolicy(net), 300, make_streams(13))
    t_rand = run(net, chain, arr, RandomPolicy(net, make_streams(13).policy),
                 300, make_streams(13))
    for r1, r2 in zip(t_idle.records, t_rand.records):
        assert np.array_equal(r1.a, r2.a)
        assert r1.s == r2.s
