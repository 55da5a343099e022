"""Built-in scenario reconstructions and the JSON schema."""

import numpy as np
import pytest
from fractions import Fraction

from qnet.errors import ValidationError
from qnet.model import enumerate_control_set
from qnet.scenarios import (EXAMPLE2_POINTS, builtin_scenario, scenario_example1,
                            scenario_example2, validate_scenario)


def test_example1_shape():
    sc = scenario_example1()
    assert sc.slots == 9
    assert sc.net.n_q == 4 and sc.net.n_v == 6 and sc.net.n_s == 10
    assert sc.net.conventional
    # five arrivals over nine slots, one every second slot starting at 0
    total = sum(int(sc.arrivals.sample(t, None).sum()) for t in range(9))
    assert total == 5
    assert sc.arrivals.rate == (Fraction(1, 2), Fraction(0), Fraction(0), Fraction(0))


def test_example1_schedule():
    sc = scenario_example1()
    W = sc.net.W
    assert set(np.unique(W)) <= {0.0, 1.0}
    # wired links always on
    assert (W[:, :3] == 1.0).all()
    # exactly one wireless link on per schedule state, none in the terminal state
    for s in range(9):
        assert W[s, 3:].sum() == 1.0
    assert (W[9, 3:] == 0.0).all()
    # at t=4 the chain sits in state 4: second sector, so AP2's wireless is on
    on = np.flatnonzero(W[4, 3:])
    assert on.tolist() == [1]          # columns ordered AP3, AP2, AP1
    # deterministic shift chain with an absorbing tail state
    P = sc.chain.P
    assert P[3, 4] == 1.0 and P[9, 9] == 1.0
    assert sc.chain.deterministic


def test_example1_constituency():
    sc = scenario_example1()
    V = enumerate_control_set(sc.net)
    # one wired and one wireless at a time
    assert all(v[:3].sum() <= 1 and v[3:].sum() <= 1 for v in V)
    assert len(V) == 16


def test_example2_construction():
    sc = scenario_example2("red")
    net = sc.net
    assert not net.conventional
    effects = 4 * (net.R * net.W[0])
    assert effects.T.tolist() == [[-1.0, 0.0], [0.0, 4.0], [-4.0, -4.0]]
    V = enumerate_control_set(net)
    assert [0, 0, 0] in V.tolist()
    assert sc.region_scale == Fraction(4)
    # share link requires a packet at the head queue
    assert net.S_req[0, 1] == 1
    assert sc.arrivals.rate == (Fraction(1, 8), Fraction(1, 16))


@pytest.mark.parametrize("point", sorted(EXAMPLE2_POINTS))
def test_example2_points_scale(point):
    sc = scenario_example2(point)
    scaled = EXAMPLE2_POINTS[point]
    assert sc.arrivals.rate == (scaled[0] / 4, scaled[1] / 4)


def test_example2_unknown_point():
    with pytest.raises(ValidationError, match="point"):
        scenario_example2("violet")


def test_builtin_registry():
    for name in ("example1", "example2", "example2-red", "example2-blue", "example2-green"):
        sc = builtin_scenario(name)
        assert sc.seed is not None
    with pytest.raises(ValidationError, match="unknown builtin"):
        builtin_scenario("example3")


def test_scenario_json_round_trip():
    sc = scenario_example2("blue")
    again = validate_scenario(sc.to_json())
    assert again.name == sc.name
    assert np.array_equal(again.net.R, sc.net.R)
    assert again.arrivals.rate == sc.arrivals.rate
    assert [p.name for p in again.policies] == [p.name for p in sc.policies]
    assert again.region_scale == sc.region_scale
    assert again.slots == sc.slots and again.seed == sc.seed


def test_scenario_validation_paths():
    sc = scenario_example2("red").to_json()
    bad = dict(sc)
    del bad["seed"]
    with pytest.raises(ValidationError, match="seed"):
        validate_scenario(bad)
    bad = dict(sc, slots=0)
    with pytest.raises(ValidationError, match="slots"):
        validate_scenario(bad)
    bad = dict(sc, policies=[])
    with pytest.raises(ValidationError, match="policies"):
        validate_scenario(bad)
    bad = dict(sc, q0=[1, -1])
    with pytest.raises(ValidationError, match="q0"):
        validate_scenario(bad)
    bad = dict(sc)
    bad["network"] = dict(bad["network"], W=[[0.25, 1.0, 2.0]])
    with pytest.raises(ValidationError, match=r"network.W\[0\]\[2\]"):
        validate_scenario(bad)
    bad = dict(sc)
    bad["arrivals"] = {"kind": "iid-bernoulli-batch", "p": ["1/2", "0"], "batch": [5, 1]}
    with pytest.raises(ValidationError, match="a_hat"):
        validate_scenario(bad)
