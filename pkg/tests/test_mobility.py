import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from adhocsim.engine import S, RngStreams
from adhocsim.mobility import (ConvoyMobility, ConvoyScript, RandomWalkMobility,
                               RandomWalkState, StaticMobility, step_random_walk)


def test_static_is_constant():
    m = StaticMobility([(0, 0), (100, 0)])
    assert m.position_at(1, 0) == m.position_at(1, 500 * S)


def test_unknown_node_and_negative_time():
    m = StaticMobility([(0, 0)])
    with pytest.raises(KeyError):
        m.position_at(3, 0)
    with pytest.raises(ValueError):
        m.position_at(0, -1)


def convoy(depart=10 * S):
    script = ConvoyScript(depart_at=depart, away_duration=30 * S, members={1, 2})
    return ConvoyMobility([(0, 0), (100, 0), (200, 0)], script), script


def test_convoy_kinematics():
    m, s = convoy()
    p = m.position_at(1, 10 * S + 60 * S)
    assert p.x == pytest.approx(100 + 360)
    assert p.y == 0
    assert m.position_at(0, 70 * S).x == 0


def test_convoy_round_trip():
    m, s = convoy()
    assert s.travel_time == 100 * S
    assert s.cycle_end == 10 * S + 230 * S
    for node in range(3):
        assert m.position_at(node, s.cycle_end) == m.position_at(node, 0)
    assert m.position_at(2, s.away_start + 5 * S).x == pytest.approx(800)


def test_convoy_rigid():
    m, s = convoy()
    for t in np.linspace(0, s.cycle_end + S, 97):
        pos = m.positions(int(t))
        assert math.dist(pos[1], pos[2]) == pytest.approx(100)


def test_reflection_off_right_wall():
    st_ = RandomWalkState(499.0, 250.0, 0.0, speed=6.0, leg_duration=10.0, leg_remaining=10.0)
    new = step_random_walk(st_, 1.0, RngStreams(1)["w"])
    # 499 + 6 = 505 overshoots by 5, mirrored back to 495
    assert new.x == pytest.approx(495.0)
    assert math.cos(new.heading) == pytest.approx(-1.0)
    assert math.hypot(*new.velocity) == pytest.approx(6.0)


def test_straight_segment_displacement():
    st_ = RandomWalkState(100.0, 100.0, math.pi / 4, leg_duration=2.0, leg_remaining=2.0)
    new = step_random_walk(st_, 1.5, RngStreams(1)["w"])
    assert math.hypot(new.x - 100, new.y - 100) == pytest.approx(9.0)


def test_new_heading_each_leg():
    st_ = RandomWalkState(250.0, 250.0, 0.0, leg_duration=2.0, leg_remaining=2.0)
    rng = RngStreams(3)["w"]
    headings = set()
    for _ in range(5):
        st_ = step_random_walk(st_, 2.0, rng)
        headings.add(round(st_.heading, 9))
    assert len(headings) > 1


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_walk_stays_in_bounds(seed):
    rng = RngStreams(seed)["w"]
    st_ = RandomWalkState(float(rng.uniform(0, 500)), float(rng.uniform(0, 500)),
                          float(rng.uniform(0, 2 * math.pi)))
    for _ in range(500):
        st_ = step_random_walk(st_, float(rng.uniform(0.01, 7.0)), rng)
        assert 0 <= st_.x <= 500 and 0 <= st_.y <= 500
        assert math.hypot(*st_.velocity) == pytest.approx(6.0)


def test_walk_ten_thousand_steps_bounded():
    rng = RngStreams(11)["w"]
    st_ = RandomWalkState(10.0, 490.0, 1.0)
    for _ in range(10_000):
        st_ = step_random_walk(st_, 0.7, rng)
        assert 0 <= st_.x <= 500 and 0 <= st_.y <= 500


def test_random_walk_mobility_lazy_and_bounded():
    rngs = RngStreams(5)
    init = np.array([[250, 250], [0, 0], [500, 500]], dtype=float)
    m = RandomWalkMobility(init, [rngs[f"m/{i}"] for i in range(3)], start=10.0)
    assert m.position_at(0, 5 * S) == m.position_at(0, 0)
    late = m.positions(400 * S)
    early = m.positions(20 * S)
    assert np.all((late >= 0) & (late <= 500)) and np.all((early >= 0) & (early <= 500))
    # querying out of order gives the same answer
    m2 = RandomWalkMobility(init, [RngStreams(5)[f"m/{i}"] for i in range(3)], start=10.0)
    assert np.allclose(m2.positions(20 * S), early)
    a = m.positions(100 * S)[0]
    b = m.positions(100 * S + S // 2)[0]
    assert math.dist(a, b) <= 3.0 + 1e-9
