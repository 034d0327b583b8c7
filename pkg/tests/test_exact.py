import numpy as np
import pytest

from hardballs.dynamics import simulate
from hardballs.exact import ExactSimulator, exact_segment, precision_for
from hardballs.model import SystemParams, sample_initial_state


def make_params(**kw):
    base = dict(n_balls=2, dim=2, torus_side=1.0, radius=0.12, masses=(1.0, 1.0))
    base.update(kw)
    return SystemParams(**base)


def test_precision_schedule_monotone():
    assert precision_for(0) >= 64
    assert precision_for(100) > precision_for(10) > precision_for(0)


def test_matches_float_engine_early():
    # before round-off divergence both engines produce the same scheme and
    # nearly the same states
    p = make_params(n_balls=3, masses=(1.0, 1.4, 0.8), radius=0.1)
    state = sample_initial_state(p, 21)
    n = 8
    seg = simulate(p, state, n_collisions=n)
    sim = ExactSimulator(p, state.positions, state.velocities, precision_for(n))
    sim.run(n)
    assert sim.pairs == seg.pairs
    assert list(sim.adjustments) == [
        tuple(int(x) for x in ev.adjustment) for ev in seg.events
    ]
    assert np.max(np.abs(np.array(sim.positions_float()) - seg.final.positions)) <= 1e-9


def test_round_trip_long():
    p = make_params(n_balls=3, masses=(1.0, 2.0, 0.5), radius=0.1)
    state = sample_initial_state(p, 4)
    n = 120
    sim = ExactSimulator(p, state.positions, state.velocities, precision_for(n))
    sim.run(n)
    forward = sim.pairs[:]
    t_total = sim.t
    sim.reverse()
    sim.run_until(t_total)
    assert sim.pairs == forward[::-1]
    assert np.max(np.abs(np.array(sim.positions_float()) - state.positions)) <= 1e-9
    assert np.max(np.abs(np.array(sim.velocities_float()) + state.velocities)) <= 1e-9


def test_run_until_between_collisions():
    p = make_params()
    state = sample_initial_state(p, 6)
    sim = ExactSimulator(p, state.positions, state.velocities, 256)
    sim.step()
    t_first = float(sim.t)
    sim2 = ExactSimulator(p, state.positions, state.velocities, 256)
    sim2.run_until(t_first / 2)
    # no collision happened yet: free flight only
    assert sim2.pairs == []
    expect = state.positions + (t_first / 2) * state.velocities
    assert np.max(np.abs(np.array(sim2.positions_float()) - expect)) <= 1e-12


def test_exact_segment_structure():
    p = make_params(n_balls=3, masses=(1.0, 1.1, 0.9), radius=0.1)
    state = sample_initial_state(p, 15)
    seg = exact_segment(p, state, 10)
    assert seg.n_events == 10
    hist = seg.velocity_history()
    assert hist.shape == (11, 3, 2)
    for ev in seg.events:
        # contact vector sits on the collision sphere
        assert abs(np.linalg.norm(ev.contact_vector) - 2 * p.radius) <= 1e-12
        # reflection only changes the colliding pair
        touched = set(ev.pair)
        for l in range(3):
            if l not in touched:
                assert np.array_equal(ev.pre_velocities[l], ev.post_velocities[l])
    times = [ev.time for ev in seg.events]
    assert all(t2 > t1 for t1, t2 in zip(times, times[1:]))
    assert seg.final.time == times[-1]


def test_exact_segment_conserves_energy():
    p = make_params(n_balls=2, masses=(1.0, 3.0))
    state = sample_initial_state(p, 1)
    seg = exact_segment(p, state, 25)
    m = p.mass_array
    h0 = np.sum(m[:, None] * state.velocities**2)
    h1 = np.sum(m[:, None] * seg.final.velocities**2)
    assert abs(h1 - h0) <= 1e-13
