import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shotloc.errors import CoincidentCameras, FullyInfeasible
from shotloc.geo import EnuPoint
from shotloc.tdoa import band_polylines, compute_band, two_a_lines

F1 = EnuPoint(-50.0, 0.0, 0.0)
F2 = EnuPoint(50.0, 0.0, 0.0)


def test_three_line_values_frozen():
    # vs in [331.3, 346], 33 ms jitter, 200 ms delay
    lower, center, upper = two_a_lines(0.2)
    assert lower == pytest.approx(55.3271, abs=1e-10)
    assert center == pytest.approx(67.73, abs=1e-10)
    assert upper == pytest.approx(80.618, abs=1e-10)


def test_legacy_center_variant():
    _, center, _ = two_a_lines(0.2, legacy_center=True)
    assert center == pytest.approx(338.65 * (0.2 - 0.033), abs=1e-10)
    assert center == pytest.approx(56.55455, abs=1e-10)


def test_delay_below_jitter_clamps_lower():
    lower, center, upper = two_a_lines(0.02)
    assert lower == 0.0
    assert center == pytest.approx(6.773, abs=1e-10)
    assert upper == pytest.approx(18.338, abs=1e-10)
    # legacy mode clamps its center too instead of going negative
    _, legacy, _ = two_a_lines(0.02, legacy_center=True)
    assert legacy == 0.0


@given(
    t=st.floats(min_value=0.0, max_value=3.0),
    vs_min=st.floats(min_value=300.0, max_value=340.0),
    width=st.floats(min_value=0.0, max_value=40.0),
    eps=st.floats(min_value=0.0, max_value=0.1),
    legacy=st.booleans(),
)
@settings(max_examples=150, deadline=None)
def test_line_ordering_property(t, vs_min, width, eps, legacy):
    lower, center, upper = two_a_lines(t, (vs_min, vs_min + width), eps, legacy)
    assert 0.0 <= lower <= center <= upper


def test_rejects_bad_inputs():
    with pytest.raises(ValueError):
        two_a_lines(-0.1)
    with pytest.raises(ValueError):
        two_a_lines(0.1, (346.0, 331.3))
    with pytest.raises(ValueError):
        two_a_lines(0.1, jitter_s=-0.01)


def test_band_orders_cameras_by_arrival():
    b = compute_band(10.0, 10.2, F1, F2)
    assert b.near == F1 and b.far == F2
    assert b.delta_t == pytest.approx(0.2)
    flipped = compute_band(10.2, 10.0, F1, F2)
    assert flipped.near == F2 and flipped.far == F1
    assert flipped.delta_t == pytest.approx(0.2)


def test_band_exact_geometry_no_uncertainty():
    # shooter at (-30, 0): 20 m to F1, 80 m to F2, range diff 60 m
    vs = 340.0
    t1, t2 = 20.0 / vs, 80.0 / vs
    b = compute_band(t1, t2, F1, F2, vs_range=(vs, vs), jitter_s=0.0)
    assert b.two_a_lower == pytest.approx(60.0, abs=1e-9)
    assert b.two_a_center == pytest.approx(60.0, abs=1e-9)
    assert b.two_a_upper == pytest.approx(60.0, abs=1e-9)
    lines = band_polylines(b, extent=500.0)
    vertex = lines["center"][len(lines["center"]) // 2]
    assert vertex.east == pytest.approx(-30.0, abs=1e-6)
    assert vertex.north == pytest.approx(0.0, abs=1e-6)


def test_band_polyline_range_difference_identity():
    b = compute_band(0.0, 0.2, F1, F2)
    lines = band_polylines(b, extent=800.0)
    near = np.array([b.near.east, b.near.north])
    far = np.array([b.far.east, b.far.north])
    for role, pts in lines.items():
        two_a = getattr(b, f"two_a_{role}")
        for p in pts:
            q = np.array([p.east, p.north])
            diff = np.linalg.norm(q - far) - np.linalg.norm(q - near)
            assert abs(diff - two_a) < 0.05, (role, p)


def test_band_degenerate_simultaneous():
    b = compute_band(5.0, 5.0, F1, F2)
    assert b.degenerate
    assert b.two_a_lower == 0.0 and b.two_a_center == 0.0
    assert b.two_a_upper == pytest.approx(346.0 * 0.033)
    lines = band_polylines(b, extent=200.0)
    assert set(lines) == {"center"}
    for p in lines["center"]:
        assert p.east == pytest.approx(0.0, abs=1e-9)  # bisector of the foci


def test_band_partial_infeasible():
    # separation 100 m; a 0.5 s delay pushes the upper line past it
    b = compute_band(0.0, 0.28, F1, F2)
    assert b.two_a_lower < 100.0 < b.two_a_upper
    assert b.infeasible_lines == ("upper",)
    lines = band_polylines(b, extent=400.0)
    assert set(lines) == {"lower", "center"}


def test_band_fully_infeasible():
    with pytest.raises(FullyInfeasible):
        compute_band(0.0, 1.0, F1, F2)


def test_band_coincident_cameras():
    with pytest.raises(CoincidentCameras):
        compute_band(0.0, 0.1, F1, EnuPoint(-50.0, 0.0, 0.0))
    # heights do not separate cameras on the map
    with pytest.raises(CoincidentCameras):
        compute_band(0.0, 0.1, F1, EnuPoint(-50.0, 0.0, 30.0))


def test_band_separation_is_planar():
    hi = EnuPoint(50.0, 0.0, 120.0)
    b = compute_band(0.0, 0.1, F1, hi)
    assert b.separation == pytest.approx(100.0)


@given(
    shooter_e=st.floats(min_value=-400.0, max_value=400.0),
    shooter_n=st.floats(min_value=5.0, max_value=400.0),
    vs=st.floats(min_value=331.3, max_value=346.0),
)
@settings(max_examples=60, deadline=None)
def test_true_shooter_range_diff_within_band(shooter_e, shooter_n, vs):
    # exact arrivals from a planted shooter: its range difference must
    # fall inside [lower, upper] even before any jitter is added
    s = np.array([shooter_e, shooter_n])
    d1 = float(np.linalg.norm(s - [-50.0, 0.0]))
    d2 = float(np.linalg.norm(s - [50.0, 0.0]))
    b = compute_band(d1 / vs, d2 / vs, F1, F2)
    true_diff = abs(d2 - d1)
    assert b.two_a_lower - 1e-9 <= true_diff <= b.two_a_upper + 1e-9


def test_band_polyline_step_override():
    b = compute_band(0.0, 0.1, F1, F2)
    fine = band_polylines(b, extent=300.0, step=1.0)
    coarse = band_polylines(b, extent=300.0, step=30.0)
    assert len(fine["center"]) > len(coarse["center"])
