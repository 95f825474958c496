import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shotloc.audio import AudioClip
from shotloc.errors import ClipTooShort
from shotloc.sync import (
    GlobalTimeline,
    PairwiseOffset,
    aggregate_timeline,
    estimate_offset,
    refine_manual,
)

RATE = 44100


def _noise_pair(shift_samples, seed=3, seconds=2):
    rng = np.random.default_rng(seed)
    base = rng.standard_normal(RATE * seconds + abs(shift_samples)) * 0.1
    a = AudioClip(samples=np.clip(base[: RATE * seconds], -1, 1), rate=RATE, source_video="a")
    b = AudioClip(
        samples=np.clip(base[shift_samples : shift_samples + RATE * seconds], -1, 1),
        rate=RATE,
        source_video="b",
    )
    return a, b


# pairwise estimation


def test_known_shift_tenth_second():
    a, b = _noise_pair(4410)
    o = estimate_offset(a, b)
    assert o.i == "a" and o.j == "b"
    assert o.offset == pytest.approx(0.100, abs=0.001)
    assert o.confidence > 0.9
    assert not o.low_confidence


def test_swapped_arguments_negate():
    a, b = _noise_pair(4410)
    o = estimate_offset(b, a)
    assert o.offset == pytest.approx(-0.100, abs=0.001)


def test_self_correlation():
    a, _ = _noise_pair(0)
    o = estimate_offset(a, a)
    assert o.offset == pytest.approx(0.0, abs=1e-4)
    assert o.confidence == pytest.approx(1.0, abs=1e-6)


def test_unrelated_clips_flagged():
    rng = np.random.default_rng(0)
    a = AudioClip(samples=rng.standard_normal(RATE) * 0.1, rate=RATE, source_video="a")
    b = AudioClip(samples=rng.standard_normal(RATE) * 0.1, rate=RATE, source_video="b")
    o = estimate_offset(a, b)
    assert o.confidence < 0.1
    assert o.low_confidence


@given(shift=st.integers(min_value=-30000, max_value=30000))
@settings(max_examples=15, deadline=None)
def test_shift_recovery_within_1ms(shift):
    if shift >= 0:
        a, b = _noise_pair(shift, seed=11)
        true = shift / RATE
    else:
        b, a = _noise_pair(-shift, seed=11)
        a, b = (
            AudioClip(samples=a.samples, rate=RATE, source_video="a"),
            AudioClip(samples=b.samples, rate=RATE, source_video="b"),
        )
        true = shift / RATE
    o = estimate_offset(a, b)
    assert abs(o.offset - true) < 0.001


def test_max_shift_window_respected():
    a, b = _noise_pair(RATE // 2)  # half a second
    o = estimate_offset(a, b, max_shift_s=0.2)
    assert abs(o.offset) <= 0.2 + 1e-6


def test_too_short_raises():
    tiny = AudioClip(samples=np.zeros(500), rate=RATE, source_video="t")
    with pytest.raises(ClipTooShort):
        estimate_offset(tiny, tiny)


def test_reversed_offset():
    o = PairwiseOffset("a", "b", 0.25, 0.8)
    r = o.reversed()
    assert (r.i, r.j, r.offset, r.confidence) == ("b", "a", -0.25, 0.8)
    assert r.reversed() == o


# manual refinement


def test_manual_same_fps():
    o = refine_manual("a", "b", frame_i=90, frame_j=30, fps_i=30.0, fps_j=30.0)
    assert o.offset == pytest.approx(2.0)
    assert o.uncertainty_s == pytest.approx(1.0 / 30.0)
    assert o.method == "manual"
    assert not o.low_confidence


def test_manual_mixed_fps():
    o = refine_manual("a", "b", frame_i=120, frame_j=30, fps_i=60.0, fps_j=30.0)
    assert o.offset == pytest.approx(1.0)
    assert o.uncertainty_s == pytest.approx(0.025)


def test_manual_validation():
    with pytest.raises(ValueError):
        refine_manual("a", "b", 1, 1, 0.0, 30.0)
    with pytest.raises(ValueError):
        refine_manual("a", "b", -1, 1, 30.0, 30.0)


# timeline aggregation


def test_triangle_least_squares():
    # inconsistent loop: 2.0 + 3.0 != 5.3; the fit spreads the 0.3 s
    # disagreement evenly, landing on starts (0, 2.1, 5.2)
    offsets = [
        PairwiseOffset("A", "B", 2.0, 1.0),
        PairwiseOffset("B", "C", 3.0, 1.0),
        PairwiseOffset("A", "C", 5.3, 1.0),
    ]
    tl = aggregate_timeline(["A", "B", "C"], offsets)
    assert tl.anchor == "A"
    assert tl.starts["A"] == 0.0
    assert tl.starts["B"] == pytest.approx(2.1, abs=1e-9)
    assert tl.starts["C"] == pytest.approx(5.2, abs=1e-9)
    assert sorted(round(r, 9) for r in tl.residuals) == [-0.1, 0.1, 0.1]
    assert tl.max_residual == pytest.approx(0.1, abs=1e-9)


def test_consistent_five_video_graph_exact():
    planted = {"v1": 0.0, "v2": 1.5, "v3": -0.75, "v4": 4.125, "v5": 2.0}
    pairs = [("v1", "v2"), ("v2", "v3"), ("v3", "v4"), ("v4", "v5"), ("v1", "v5"), ("v2", "v4")]
    offsets = [
        PairwiseOffset(i, j, planted[j] - planted[i], 0.9) for i, j in pairs
    ]
    tl = aggregate_timeline(sorted(planted), offsets)
    assert tl.max_residual < 1e-9
    for vid, start in planted.items():
        assert tl.starts[vid] == pytest.approx(start - planted[tl.anchor], abs=1e-9)
    assert len(tl.components) == 1
    assert tl.disconnected == ()


def test_duplicate_measurements_average():
    offsets = [
        PairwiseOffset("a", "b", 1.0, 0.5),
        PairwiseOffset("a", "b", 3.0, 0.5),
    ]
    tl = aggregate_timeline(["a", "b"], offsets)
    assert tl.starts["b"] == pytest.approx(2.0)


def test_confident_pair_dominates():
    offsets = [
        PairwiseOffset("a", "b", 1.0, 0.9),
        PairwiseOffset("a", "b", 2.0, 0.009),
    ]
    tl = aggregate_timeline(["a", "b"], offsets)
    assert tl.starts["b"] == pytest.approx(1.0, abs=0.01)


def test_manual_overrides_audio():
    offsets = [
        PairwiseOffset("x", "y", 1.0, 0.2),
        PairwiseOffset("x", "y", 2.0, 1.0, method="manual"),
    ]
    tl = aggregate_timeline(["x", "y"], offsets)
    assert tl.starts["y"] == pytest.approx(1.9900990099009903, abs=1e-12)


def test_disconnected_components():
    offsets = [
        PairwiseOffset("a", "b", 1.0, 0.9),
        PairwiseOffset("c", "d", 0.5, 0.9),
    ]
    tl = aggregate_timeline(["a", "b", "c", "d"], offsets)
    assert tl.starts == {"a": 0.0, "b": 1.0, "c": 0.0, "d": 0.5}
    assert tl.components[0] == frozenset({"a", "b"})
    assert tl.disconnected == ("c", "d")


def test_isolated_recording():
    tl = aggregate_timeline(["a", "b", "lone"], [PairwiseOffset("a", "b", 1.0, 0.9)])
    assert tl.starts["lone"] == 0.0
    assert tl.disconnected == ("lone",)


def test_anchor_selection():
    offsets = [PairwiseOffset("a", "b", 1.0, 0.9)]
    tl = aggregate_timeline(["a", "b"], offsets, anchor="b")
    assert tl.starts == {"a": -1.0, "b": 0.0}


def test_low_confidence_pairs_surface():
    offsets = [
        PairwiseOffset("a", "b", 1.0, 0.05),
        PairwiseOffset("b", "c", 2.0, 0.9),
    ]
    tl = aggregate_timeline(["a", "b", "c"], offsets)
    assert tl.low_confidence_pairs == (("a", "b"),)


def test_timeline_validation():
    with pytest.raises(ValueError):
        aggregate_timeline([], [])
    with pytest.raises(ValueError):
        aggregate_timeline(["a"], [PairwiseOffset("a", "ghost", 1.0, 0.5)])
    with pytest.raises(ValueError):
        aggregate_timeline(["a", "b"], [PairwiseOffset("a", "a", 0.0, 0.5)])
    with pytest.raises(ValueError):
        aggregate_timeline(["a"], [], anchor="zz")


@given(
    starts=st.lists(
        st.floats(min_value=-20.0, max_value=20.0), min_size=3, max_size=6, unique=True
    )
)
@settings(max_examples=40, deadline=None)
def test_chain_recovery_property(starts):
    ids = [f"v{k}" for k in range(len(starts))]
    planted = dict(zip(ids, starts))
    offsets = [
        PairwiseOffset(ids[k], ids[k + 1], planted[ids[k + 1]] - planted[ids[k]], 0.8)
        for k in range(len(ids) - 1)
    ]
    tl = aggregate_timeline(ids, offsets)
    base = planted[tl.anchor]
    for vid in ids:
        assert tl.starts[vid] == pytest.approx(planted[vid] - base, abs=1e-6)
    assert tl.max_residual < 1e-6
