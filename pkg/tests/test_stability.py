"""Region membership/slicing and empirical stability classification."""

import numpy as np
import pytest
from fractions import Fraction

from qnet.dynamics import make_streams, run
from qnet.markov import validate_chain
from qnet.model import enumerate_control_set, validate_arrivals, validate_network
from qnet.policies import IdlePolicy, MwPolicy
from qnet.scenarios import scenario_example2
from qnet.stability import (RegionQuery, StabilityThresholds, assess_stability,
                            mw_accessible_options, region_membership, region_slice)

EX2 = scenario_example2("red")
SCALE = Fraction(4)


def member(a1, a2, options=None, scale=SCALE):
    res = region_membership(RegionQuery(net=EX2.net, a_bar=(Fraction(a1), Fraction(a2)),
                                        options=options, effect_scale=scale))
    return res


def test_zero_rate_inside():
    relay = validate_network({"R": [[-1, 0], [1, -1]], "C": [[0, 0]], "c": [1],
                              "W": [[1.0, 1.0]]})
    res = region_membership(RegionQuery(net=relay, a_bar=(Fraction(0), Fraction(0))))
    assert res.kind == "inside" and res.eps > 0
    assert member(0, 0).kind == "inside"


def test_example2_full_axis_boundary():
    assert member(Fraction(194, 100), 0).kind == "inside"
    assert member(2, 0).kind == "boundary"
    assert member(Fraction(201, 100), 0).kind == "outside"


def test_example2_mw_axis_boundary():
    opts = mw_accessible_options(EX2.net)
    assert opts.tolist() == [[0, 0, 0], [0, 0, 1], [1, 0, 0]]
    assert member(Fraction(95, 100), 0, opts).kind == "inside"
    assert member(Fraction(105, 100), 0, opts).kind != "inside"


def test_restriction_monotone(rng):
    opts = mw_accessible_options(EX2.net)
    for _ in range(25):
        a1 = Fraction(int(rng.integers(0, 40)), 16)
        a2 = Fraction(int(rng.integers(0, 40)), 16)
        if member(a1, a2, opts).kind == "inside":
            assert member(a1, a2).kind == "inside"


def test_scaling_monotone(rng):
    inside_pts = [(Fraction(3, 2), Fraction(1, 2)), (Fraction(1, 2), Fraction(1, 4))]
    for a1, a2 in inside_pts:
        assert member(a1, a2).kind == "inside"
        for theta in (Fraction(1, 4), Fraction(1, 2), Fraction(9, 10), Fraction(1)):
            assert member(theta * a1, theta * a2).kind == "inside"


def test_permutation_invariance():
    # swapping the two queues relabels rows everywhere and flips the rates
    raw = EX2.net.to_json()
    for key in ("R", "S_req"):
        raw[key] = [raw[key][1], raw[key][0]]
    raw["a_hat"] = raw["a_hat"][::-1]
    swapped = validate_network(raw)
    a = (Fraction(3, 2), Fraction(1, 2))
    orig = region_membership(RegionQuery(net=EX2.net, a_bar=a, effect_scale=SCALE))
    perm = region_membership(RegionQuery(net=swapped, a_bar=a[::-1], effect_scale=SCALE))
    assert orig.kind == perm.kind and orig.eps == perm.eps


def test_region_slice_boundaries():
    q = RegionQuery(net=EX2.net, a_bar=(Fraction(0), Fraction(0)), effect_scale=SCALE)
    rows = region_slice(q, [(1, 0), (1, 1)])
    by_dir = {(r["direction_x"], r["direction_y"]): r for r in rows}
    assert abs(by_dir[(1.0, 0.0)]["boundary_x"] - 2.0) < 1e-5
    # on the diagonal the synchronized option alone carries the ray to (4, 4)
    assert abs(by_dir[(1.0, 1.0)]["boundary_x"] - 4.0) < 1e-5
    assert abs(by_dir[(1.0, 1.0)]["boundary_y"] - 4.0) < 1e-5
    for r in rows:
        assert r["eps_at_half"] > 0

    mw = RegionQuery(net=EX2.net, a_bar=(Fraction(0), Fraction(0)),
                     options=mw_accessible_options(EX2.net), effect_scale=SCALE)
    rows = region_slice(mw, [(1, 0)])
    assert abs(rows[0]["boundary_x"] - 1.0) < 1e-5


def test_region_slice_bracket_property():
    q = RegionQuery(net=EX2.net, a_bar=(Fraction(0), Fraction(0)), effect_scale=SCALE)
    row = region_slice(q, [(1, 0)])[0]
    bx = Fraction(repr(row["boundary_x"]))
    assert member(bx * Fraction(9999, 10000), 0).kind == "inside"
    assert member(bx * Fraction(10001, 10000), 0).kind != "inside"


def test_region_slice_skips_degenerate():
    q = RegionQuery(net=EX2.net, a_bar=(Fraction(0), Fraction(0)), effect_scale=SCALE)
    with pytest.warns(UserWarning, match="degenerate"):
        rows = region_slice(q, [(0, 0), (1, 0)])
    assert len(rows) == 1


def test_assess_zero_arrivals_stable():
    sc = scenario_example2("red")
    zero = validate_arrivals({"kind": "constant", "value": [0, 0]}, 2)
    trace = run(sc.net, sc.chain, zero, MwPolicy(sc.net, sc.chain, zero), 400,
                make_streams(3), q0=[20, 5])
    verdict = assess_stability(trace, window=200)
    assert verdict.classification == "stable"


def test_assess_idle_accumulates_at_arrival_rate():
    sc = scenario_example2("green")   # scaled (1.94, 0) -> 0.485 packets/slot
    trace = run(sc.net, sc.chain, sc.arrivals, IdlePolicy(sc.net), 4000, make_streams(4))
    verdict = assess_stability(trace, window=2000)
    assert verdict.classification == "unstable"
    assert abs(verdict.slope - 0.485) < 0.1


def test_assess_requires_length():
    sc = scenario_example2("red")
    trace = run(sc.net, sc.chain, sc.arrivals, IdlePolicy(sc.net), 50, make_streams(1))
    with pytest.raises(ValueError, match="too short"):
        assess_stability(trace, window=40)


def test_thresholds_configurable():
    sc = scenario_example2("green")
    trace = run(sc.net, sc.chain, sc.arrivals, IdlePolicy(sc.net), 1000, make_streams(4))
    loose = StabilityThresholds(unstable_slope=10.0, stable_slope=10.0, queue_floor=1e9)
    verdict = assess_stability(trace, window=500, thresholds=loose)
    assert verdict.classification == "stable"
