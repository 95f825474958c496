import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shotloc.ballistics import (
    DistanceEstimate,
    Method1Inputs,
    estimate_method1,
    horizontal_distance,
    mach_angle,
    slant_distance,
    solve_t1_t2,
)
from shotloc.errors import (
    ElevationExceedsDistance,
    InfeasibleGeometry,
    NoFeasibleSamples,
    Subsonic,
)
from shotloc.geo import EnuPoint
from shotloc.oracle import Scene, report

# the one scene used as a cross-check fixture: mach-2 round, camera
# 1000 m out at 10 degrees off the line of fire. The forward model
# puts the shock-to-blast gap at this value.
TDIFF_10DEG = 1.0506246773925316


def test_mach_angle_values():
    assert mach_angle(340.0, 680.0) == pytest.approx(math.radians(30.0), abs=1e-15)
    assert mach_angle(340.0, 800.0) == pytest.approx(0.4389618856097607, abs=1e-15)


def test_mach_angle_subsonic():
    with pytest.raises(Subsonic):
        mach_angle(340.0, 320.0)
    with pytest.raises(Subsonic):
        mach_angle(340.0, 340.0)


def test_head_on_closed_form():
    # D = vs*vb*tdiff/(vb - vs) when the camera sits on the trajectory
    assert slant_distance(1.0, 340.0, 680.0, 0.0) == pytest.approx(680.0, abs=1e-9)
    t1, t2 = solve_t1_t2(340.0, 680.0, 0.0, 1.0)
    assert t2 == pytest.approx(0.0, abs=1e-12)
    assert t1 == pytest.approx(1.0, abs=1e-12)


def test_ten_degree_inversion_recovers_range():
    d = slant_distance(TDIFF_10DEG, 340.0, 680.0, 10.0)
    assert d == pytest.approx(1000.0, abs=1e-9)


def test_leg_times_match_detachment_geometry():
    # vb*t1 must land on the same detachment point the forward model's
    # path minimization finds (884.5519... m for this scene)
    t1, t2 = solve_t1_t2(340.0, 680.0, 10.0, TDIFF_10DEG)
    assert 680.0 * t1 == pytest.approx(884.551930891918, abs=1e-6)
    # and vs*t2 is the sound leg from there to the camera
    alpha = math.radians(10.0)
    cam = np.array([1000 * math.cos(alpha), 1000 * math.sin(alpha)])
    leg = np.linalg.norm(cam - np.array([680.0 * t1, 0.0]))
    assert 340.0 * t2 == pytest.approx(leg, abs=1e-6)


@given(
    vs=st.floats(min_value=331.3, max_value=346.0),
    mach=st.floats(min_value=1.2, max_value=3.0),
    tdiff=st.floats(min_value=0.01, max_value=5.0),
)
@settings(max_examples=100, deadline=None)
def test_alpha_zero_closed_form_property(vs, mach, tdiff):
    vb = vs * mach
    expect = vs * vb * tdiff / (vb - vs)
    assert slant_distance(tdiff, vs, vb, 0.0) == pytest.approx(expect, abs=1e-9)


@given(
    vs=st.floats(min_value=331.3, max_value=346.0),
    mach=st.floats(min_value=1.2, max_value=3.0),
    alpha=st.floats(min_value=0.0, max_value=15.0),
    tdiff=st.floats(min_value=0.01, max_value=2.0),
    k=st.floats(min_value=0.5, max_value=4.0),
)
@settings(max_examples=100, deadline=None)
def test_distance_linear_in_tdiff(vs, mach, alpha, tdiff, k):
    # both leg times scale with tdiff, so distance must too
    d1 = slant_distance(tdiff, vs, vs * mach, alpha)
    dk = slant_distance(k * tdiff, vs, vs * mach, alpha)
    assert dk == pytest.approx(k * d1, rel=1e-9)


def test_round_trip_against_forward_model():
    # plant a scene, read tdiff off the forward model, invert it
    cases = [
        (0.0, 500.0, 1.3),
        (5.0, 1200.0, 2.1),
        (14.9, 300.0, 2.9),
        (7.5, 1999.0, 1.21),
    ]
    for alpha_deg, dist, mach in cases:
        vs, vb = 343.0, 343.0 * mach
        a = math.radians(alpha_deg)
        sc = Scene(
            shooter=EnuPoint(0, 0, 0),
            azimuth_deg=0.0,
            inclination_deg=0.0,
            vb=vb,
            vs=vs,
            cameras={"c": EnuPoint(dist * math.sin(a), dist * math.cos(a), 0)},
        )
        arr = report(sc)["c"]
        got = slant_distance(arr.tdiff, vs, vb, alpha_deg)
        assert got == pytest.approx(dist, rel=5e-10)


def test_invalid_inputs():
    with pytest.raises(Subsonic):
        solve_t1_t2(340.0, 300.0, 5.0, 1.0)
    with pytest.raises(InfeasibleGeometry):
        solve_t1_t2(340.0, 680.0, 5.0, -0.2)
    with pytest.raises(InfeasibleGeometry):
        solve_t1_t2(340.0, 680.0, 95.0, 1.0)


def test_horizontal_distance_pythagoras():
    assert horizontal_distance(500.0, 300.0) == pytest.approx(400.0)
    assert horizontal_distance(500.0, -300.0) == pytest.approx(400.0)
    assert horizontal_distance(500.0, 0.0) == 500.0
    with pytest.raises(ElevationExceedsDistance):
        horizontal_distance(100.0, 150.0)


# Monte Carlo estimator


def test_estimate_degenerate_box_equals_exact():
    est = estimate_method1(
        Method1Inputs(
            tdiff=1.0, vs_range=(340, 340), vb_range=(680, 680), alpha_deg_range=(0, 0)
        )
    )
    assert est.slant_min == pytest.approx(680.0, abs=1e-9)
    assert est.slant_max == pytest.approx(680.0, abs=1e-9)
    assert est.n_feasible == est.n_requested


def test_estimate_seed_determinism():
    inp = Method1Inputs(tdiff=0.8)
    a = estimate_method1(inp, seed=3)
    b = estimate_method1(inp, seed=3)
    assert a.slant_min == b.slant_min and a.slant_max == b.slant_max
    np.testing.assert_array_equal(a.dh_samples, b.dh_samples)
    c = estimate_method1(inp, seed=4)
    assert c.slant_min != a.slant_min


def test_estimate_contains_midpoint_truth():
    # truth at the center of every range must fall inside the spread
    vs, vb, alpha, dist = 338.0, 700.0, 7.0, 900.0
    sc = Scene(
        shooter=EnuPoint(0, 0, 0),
        azimuth_deg=0.0,
        inclination_deg=0.0,
        vb=vb,
        vs=vs,
        cameras={
            "c": EnuPoint(
                dist * math.sin(math.radians(alpha)), dist * math.cos(math.radians(alpha)), 0
            )
        },
    )
    arr = report(sc)["c"]
    est = estimate_method1(
        Method1Inputs(
            tdiff=arr.tdiff,
            vs_range=(331.3, 346.0),
            vb_range=(600.0, 800.0),
            alpha_deg_range=(0.0, 14.0),
        ),
        seed=1,
    )
    assert est.slant_min <= dist <= est.slant_max
    assert est.dh_min <= dist <= est.dh_max  # no height offset here


def test_estimate_all_infeasible_raises():
    # camera angles far outside any shock cone: every draw yields a
    # negative bullet leg
    with pytest.raises(NoFeasibleSamples):
        estimate_method1(
            Method1Inputs(
                tdiff=0.5,
                vs_range=(331.3, 346.0),
                vb_range=(986.0, 1038.0),
                alpha_deg_range=(80.0, 89.0),
                n_samples=5000,
            )
        )


def test_estimate_height_offset_shrinks_map_distance():
    inp0 = Method1Inputs(tdiff=1.0, elevation_diff=0.0)
    inp1 = Method1Inputs(tdiff=1.0, elevation_diff=200.0)
    e0 = estimate_method1(inp0, seed=2)
    e1 = estimate_method1(inp1, seed=2)
    # same draws, same slant spread, smaller horizontal
    assert e1.slant_min == e0.slant_min
    assert e1.dh_min < e0.dh_min
    assert e1.dh_max == pytest.approx(math.sqrt(e0.dh_max**2 - 200.0**2), rel=1e-12)


def test_estimate_samples_consistent_with_bounds():
    est = estimate_method1(Method1Inputs(tdiff=1.3), seed=5)
    assert est.dh_samples.min() == est.dh_min
    assert est.dh_samples.max() == est.dh_max
    assert len(est.dh_samples) == est.n_feasible
    assert est.dh_min <= est.dh_mean <= est.dh_max


@given(seed=st.integers(min_value=0, max_value=10_000))
@settings(max_examples=30, deadline=None)
def test_estimate_ordering_property(seed):
    est = estimate_method1(Method1Inputs(tdiff=0.6, elevation_diff=50.0), seed=seed)
    assert 0 < est.slant_min <= est.slant_mean <= est.slant_max
    assert 0 <= est.dh_min <= est.dh_mean <= est.dh_max
    assert est.dh_max <= est.slant_max


def test_inputs_validation():
    with pytest.raises(InfeasibleGeometry):
        Method1Inputs(tdiff=0.0)
    with pytest.raises(ValueError):
        Method1Inputs(tdiff=1.0, vs_range=(350.0, 331.0))
    with pytest.raises(ValueError):
        Method1Inputs(tdiff=1.0, alpha_deg_range=(5.0, 95.0))
    with pytest.raises(ValueError):
        Method1Inputs(tdiff=1.0, n_samples=0)
