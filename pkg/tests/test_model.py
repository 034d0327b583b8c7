import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hardballs.errors import BadDimension, DegenerateMasses, OverlapGeometry, ZeroMass
from hardballs.model import (
    PhaseState,
    SystemParams,
    sample_initial_state,
    to_hat,
    torus_separation,
    validate,
)


def make_params(**kw):
    base = dict(n_balls=2, dim=2, torus_side=1.0, radius=0.1, masses=(1.0, 1.0))
    base.update(kw)
    return SystemParams(**base)


class TestValidate:
    def test_accepts_default(self):
        validate(make_params())

    def test_rejects_large_radius(self):
        with pytest.raises(OverlapGeometry):
            validate(make_params(radius=0.25))

    def test_rejects_single_positive_mass(self):
        with pytest.raises(DegenerateMasses):
            validate(
                make_params(
                    n_balls=3, masses=(0.0, 0.0, 1.0), allow_zero_mass=True
                )
            )

    def test_rejects_zero_mass_without_flag(self):
        with pytest.raises(DegenerateMasses):
            validate(make_params(masses=(0.0, 1.0)))

    def test_accepts_zero_mass_with_flag(self):
        validate(
            make_params(n_balls=3, masses=(0.0, 1.0, 2.0), allow_zero_mass=True)
        )

    def test_rejects_low_dimension(self):
        with pytest.raises(BadDimension):
            validate(make_params(dim=1))
        with pytest.raises(BadDimension):
            validate(make_params(n_balls=1, masses=(1.0,)))

    def test_rejects_mass_count_mismatch(self):
        with pytest.raises(DegenerateMasses):
            validate(make_params(masses=(1.0, 1.0, 1.0)))


class TestTorusSeparation:
    def test_half_open_convention(self):
        # a component exactly at +L/2 wraps to -L/2
        sep, a = torus_separation(np.array([0.75, 0.0]), np.array([0.25, 0.0]), 1.0)
        assert sep[0] == -0.5
        assert a[0] == 1

    @given(
        st.lists(st.floats(-10, 10), min_size=2, max_size=2),
        st.lists(st.floats(-10, 10), min_size=2, max_size=2),
    )
    @settings(max_examples=200, deadline=None)
    def test_reconstruction_and_range(self, qa, qb):
        L = 1.0
        qa, qb = np.array(qa), np.array(qb)
        sep, a = torus_separation(qa, qb, L)
        assert np.all(sep >= -L / 2) and np.all(sep < L / 2)
        assert np.allclose(sep + L * a, qa - qb, atol=1e-9)
        assert a.dtype.kind == "i"


class TestSampling:
    def test_deterministic(self):
        p = make_params()
        s1 = sample_initial_state(p, 42)
        s2 = sample_initial_state(p, 42)
        assert np.array_equal(s1.positions, s2.positions)
        assert np.array_equal(s1.velocities, s2.velocities)

    def test_normalization(self):
        p = make_params(n_balls=4, masses=(1.0, 2.0, 0.5, 1.5))
        s = sample_initial_state(p, 0)
        m = p.mass_array
        assert np.allclose(m @ s.velocities, 0.0, atol=1e-12)
        assert np.isclose(np.sum(m[:, None] * s.velocities**2), 1.0)

    def test_no_overlap(self):
        p = make_params(n_balls=5, masses=(1.0,) * 5, radius=0.05)
        s = sample_initial_state(p, 7)
        for i in range(5):
            for j in range(i + 1, 5):
                sep, _ = torus_separation(s.positions[i], s.positions[j], 1.0)
                assert np.linalg.norm(sep) >= 2 * p.radius

    def test_zero_mass_refused(self):
        p = make_params(n_balls=3, masses=(0.0, 1.0, 1.0), allow_zero_mass=True)
        with pytest.raises(ZeroMass):
            sample_initial_state(p, 0)


class TestHatCoordinates:
    def test_norm_equals_mass_weighted_norm(self):
        p = make_params(masses=(2.0, 3.0))
        s = sample_initial_state(p, 1)
        hat = to_hat(s, p)
        assert np.isclose(
            np.sum(hat.velocities**2),
            np.sum(p.mass_array[:, None] * s.velocities**2),
        )


def test_velocity_history_shape():
    from hardballs.dynamics import simulate

    p = make_params()
    seg = simulate(p, sample_initial_state(p, 3), n_collisions=4)
    hist = seg.velocity_history()
    assert hist.shape == (5, 2, 2)
    assert np.array_equal(hist[0], seg.initial.velocities)
    assert np.array_equal(hist[-1], seg.final.velocities)


def test_phase_state_copy_independent():
    s = PhaseState(np.zeros((2, 2)), np.ones((2, 2)), 0.0)
    c = s.copy()
    c.positions[0, 0] = 5.0
    assert s.positions[0, 0] == 0.0
