import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hardballs.combinatorics import (
    SymbolicScheme,
    check_property_A,
    components,
    is_connected,
    richness,
    richness_bruteforce,
    summary,
    threshold_C,
)
from hardballs.dynamics import simulate
from hardballs.model import SystemParams, sample_initial_state


class TestComponents:
    def test_empty(self):
        parts, count = components([], 3)
        assert parts == [[0], [1], [2]]
        assert count == 3

    def test_path(self):
        parts, count = components([(0, 1), (1, 2)], 4)
        assert count == 2
        assert parts == [[0, 1, 2], [3]]

    def test_connected(self):
        assert is_connected([(0, 1), (1, 2), (0, 2)], 3)
        assert not is_connected([(0, 1)], 3)


class TestRichness:
    def test_hand_examples(self):
        # two full sweeps of the path graph give two blocks
        sweep = [(0, 1), (1, 2)]
        assert richness(sweep, 3) == 1
        assert richness(sweep * 2, 3) == 2
        assert richness([(0, 1)] * 10, 3) == 0
        assert richness([], 2) == 0
        assert richness([(0, 1)], 2) == 1

    def test_interleaving_does_not_hurt(self):
        # junk edges between blocks are skipped, not wasted
        pairs = [(0, 1), (0, 1), (1, 2), (0, 1), (1, 2)]
        assert richness(pairs, 3) == 2

    def test_greedy_equals_bruteforce_exhaustive(self):
        # exhaustive on small sizes; the acceptance suite extends the ranges
        for N, n_max in ((2, 10), (3, 7), (4, 4)):
            edges = list(itertools.combinations(range(N), 2))
            for n in range(n_max + 1):
                for pairs in itertools.product(edges, repeat=n):
                    assert richness(list(pairs), N) == richness_bruteforce(
                        list(pairs), N
                    ), (N, pairs)

    def test_greedy_equals_bruteforce_sampled_n4(self):
        rng = np.random.default_rng(7)
        edges = list(itertools.combinations(range(4), 2))
        for _ in range(2000):
            n = int(rng.integers(6, 11))
            pairs = [edges[k] for k in rng.integers(0, len(edges), n)]
            assert richness(pairs, 4) == richness_bruteforce(pairs, 4)


class TestThreshold:
    def test_base_case(self):
        assert threshold_C(2) == 1

    def test_closed_form(self):
        for N in range(3, 9):
            assert threshold_C(N) == Fraction(3 * math.factorial(N), 2 ** (N - 1))

    def test_exact_rational(self):
        assert isinstance(threshold_C(5), Fraction)
        with pytest.raises(ValueError):
            threshold_C(1)


class TestPropertyA:
    def _scheme(self, pairs, adjustments, slots, n_balls=3):
        return SymbolicScheme(
            n_balls=n_balls, pairs=pairs, adjustments=adjustments, slots=slots
        )

    def test_real_orbits_pass(self):
        p = SystemParams(3, 2, 1.0, 0.1, (1.0, 1.2, 0.8))
        rng = np.random.default_rng(0)
        for _ in range(40):
            state = sample_initial_state(p, int(rng.integers(1 << 30)))
            seg = simulate(p, state, n_collisions=12)
            scheme = SymbolicScheme.from_segment(seg)
            assert check_property_A(scheme) is None

    def test_synthetic_violation(self):
        # same pair, same adjustment, interleaving disjoint, and the slot sum
        # cancels: tau_3 = -(tau_2)
        scheme = self._scheme(
            pairs=[(0, 1), (2, 3), (0, 1)],
            adjustments=[(0, 0)] * 3,
            slots=[1.0, 0.5, -0.5],
            n_balls=4,
        )
        assert check_property_A(scheme) == (1, 3)

    def test_adjacent_repeat_zero_slot(self):
        # immediate repeat with zero slot (empty interleaving sum)
        scheme = self._scheme(
            pairs=[(0, 1), (0, 1)], adjustments=[(0, 0)] * 2, slots=[1.0, 0.0]
        )
        assert check_property_A(scheme) == (1, 2)

    def test_different_adjustment_not_flagged(self):
        scheme = self._scheme(
            pairs=[(0, 1), (0, 1)], adjustments=[(0, 0), (1, 0)], slots=[1.0, 0.0]
        )
        assert check_property_A(scheme) is None

    def test_non_disjoint_interleaving_not_flagged(self):
        # the middle collision shares ball 1, so the window is not disjoint
        scheme = self._scheme(
            pairs=[(0, 1), (1, 2), (0, 1)],
            adjustments=[(0, 0)] * 3,
            slots=[1.0, 0.5, -0.5],
        )
        assert check_property_A(scheme) is None


def test_summary_record():
    p = SystemParams(3, 2, 1.0, 0.1, (1.0, 1.0, 1.0))
    seg = simulate(p, sample_initial_state(p, 3), n_collisions=15)
    scheme = SymbolicScheme.from_segment(seg)
    rec = summary(scheme)
    assert rec["n"] == 15
    assert 1 <= rec["p_sigma"] <= 3
    assert rec["property_A"] is True
    assert rec["richness"] == richness(scheme.pairs, 3)


@given(st.lists(st.sampled_from([(0, 1), (0, 2), (1, 2)]), max_size=12))
@settings(max_examples=200, deadline=None)
def test_richness_properties(pairs):
    r = richness(pairs, 3)
    assert r == richness_bruteforce(pairs, 3)
    # monotone under appending
    assert richness(pairs + [(0, 1)], 3) >= r
    # bounded by floor(n / (N - 1)) since a connecting block needs >= N-1 edges
    assert r <= len(pairs) // 2
