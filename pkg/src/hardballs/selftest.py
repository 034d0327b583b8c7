"""Bundled invariant suites for the selftest command.

Each suite returns (name, passed, detail).  Two of the suites are mutation
checks: they rerun a core computation with a deliberately broken variant (a
sign error in the reflection law, a wrong mass factor in the connecting-path
coefficients) and pass only if the harness catches the corruption.
"""

from __future__ import annotations

import numpy as np

from . import neutral as nt
from .combinatorics import richness, richness_bruteforce, threshold_C
from .dynamics import conserved, simulate
from .exact import ExactSimulator, exact_segment, precision_for
from .model import SystemParams, sample_initial_state


def _reflect(V, i, j, u, m, sign=1.0):
    g = 2.0 * float((V[i] - V[j]) @ u)
    W = V.copy()
    W[i] -= sign * (m[j] / (m[i] + m[j])) * g * u
    W[j] += sign * (m[i] / (m[i] + m[j])) * g * u
    return W


def suite_conservation() -> tuple[str, bool, str]:
    params = SystemParams(3, 2, 1.0, 0.1, (1.0, 1.5, 0.7))
    state = sample_initial_state(params, 11)
    h0, p0 = conserved(state, params)
    seg = simulate(params, state, n_collisions=2000)
    h1, p1 = conserved(seg.final, params)
    dh = abs(h1 - h0)
    dp = float(np.max(np.abs(p1 - p0)))
    residue = max(
        abs(float(np.linalg.norm(ev.contact_vector)) - 2.0 * params.radius)
        for ev in seg.events
    )
    ok = dh <= 1e-11 and dp <= 1e-12 and residue <= 1e-11
    return ("conservation", ok, f"dH={dh:.2e} dP={dp:.2e} residue={residue:.2e}")


def suite_reversal() -> tuple[str, bool, str]:
    params = SystemParams(2, 2, 1.0, 0.12, (1.0, 2.0))
    state = sample_initial_state(params, 3)
    n = 50
    prec = precision_for(n)
    sim = ExactSimulator(params, state.positions, state.velocities, prec)
    sim.run(n)
    forward = sim.pairs[:]
    t_total = sim.t
    sim.reverse()
    sim.run_until(t_total)
    backward = sim.pairs[:]
    pos_err = float(
        np.max(np.abs(np.array(sim.positions_float()) - state.positions))
    )
    vel_err = float(
        np.max(np.abs(np.array(sim.velocities_float()) + state.velocities))
    )
    seq_ok = backward == forward[::-1]
    ok = pos_err <= 1e-9 and vel_err <= 1e-9 and seq_ok
    return ("reversal", ok, f"pos_err={pos_err:.2e} vel_err={vel_err:.2e} seq_ok={seq_ok}")


def suite_cpf_identity() -> tuple[str, bool, str]:
    params = SystemParams(3, 2, 1.0, 0.1, (1.0, 1.3, 0.8))
    state = sample_initial_state(params, 5)
    seg = exact_segment(params, state, 15)
    nb = nt.neutral_direct(seg)
    worst = max(
        nt.cpf_verify(seg, nb.basis[r], nb.advance_matrix[r]) for r in range(nb.dim)
    )
    da, dn, _ = nt.advance_system(seg)
    ok = worst <= 1e-9 and nb.dim == dn
    return ("cpf_identity", ok, f"residual={worst:.2e} dims=({nb.dim},{dn})")


def _example_one_data(N=3, nu=2, seed=0):
    rng = np.random.default_rng(seed)
    m = rng.uniform(0.5, 2.0, N)
    V = rng.standard_normal((N, nu))
    pairs, hist = [], [V]
    for e in range(N - 1):
        u = rng.standard_normal(nu)
        u /= np.linalg.norm(u)
        for _ in range(2):
            pairs.append((e, e + 1))
            hist.append(_reflect(hist[-1], e, e + 1, u, m))
    return nt.SegmentData(N, nu, m, pairs, np.stack(hist))


def _example_two_data(seed=0, n=8):
    rng = np.random.default_rng(seed)
    m = np.array([0.0, 1.0, 0.0])
    V = rng.standard_normal((3, 2))
    pairs, hist = [], [V]
    for _ in range(n):
        p = [(0, 1), (1, 2)][int(rng.integers(2))]
        u = rng.standard_normal(2)
        u /= np.linalg.norm(u)
        pairs.append(p)
        hist.append(_reflect(hist[-1], *p, u, m))
    return nt.SegmentData(3, 2, m, pairs, np.stack(hist))


def suite_degenerate_examples() -> tuple[str, bool, str]:
    one = _example_one_data()
    da1, dn1, _ = nt.advance_system(one)
    d1 = nt.neutral_direct(one).dim
    two = _example_two_data()
    d2 = nt.neutral_direct(two).dim
    suff2 = nt.is_sufficient(two)
    ok = da1 == 2 and dn1 == 4 and d1 == 4 and d2 >= 4 and not suff2
    return (
        "degenerate_examples",
        ok,
        f"one=(alpha {da1}, dim {dn1}/{d1}) two=(dim {d2}, sufficient {suff2})",
    )


def suite_richness_oracle() -> tuple[str, bool, str]:
    rng = np.random.default_rng(2)
    checked = 0
    for _ in range(200):
        N = int(rng.integers(2, 5))
        n = int(rng.integers(0, 11))
        pairs = []
        for _ in range(n):
            i, j = sorted(rng.choice(N, size=2, replace=False))
            pairs.append((int(i), int(j)))
        if richness(pairs, N) != richness_bruteforce(pairs, N):
            return ("richness_oracle", False, f"mismatch on {pairs} N={N}")
        checked += 1
    from fractions import Fraction
    import math

    for N in range(3, 9):
        if threshold_C(N) != Fraction(3 * math.factorial(N), 2 ** (N - 1)):
            return ("richness_oracle", False, f"C({N}) mismatch")
    return ("richness_oracle", True, f"{checked} schemes, C(3..8) closed form")


def suite_mutation_reflection() -> tuple[str, bool, str]:
    """A sign error in the reflection law must break energy conservation."""
    rng = np.random.default_rng(9)
    m = np.array([1.0, 1.7])
    V = rng.standard_normal((2, 2))
    u = rng.standard_normal(2)
    u /= np.linalg.norm(u)
    good = _reflect(V, 0, 1, u, m)
    bad = _reflect(V, 0, 1, u, m, sign=-1.0)
    h = float(np.sum(m[:, None] * V**2))
    h_good = float(np.sum(m[:, None] * good**2))
    h_bad = float(np.sum(m[:, None] * bad**2))
    caught = abs(h_good - h) <= 1e-12 * h and abs(h_bad - h) > 1e-6 * h
    return ("mutation_reflection", caught, f"dH_good={abs(h_good-h):.1e} dH_bad={abs(h_bad-h):.1e}")


def suite_mutation_cpf() -> tuple[str, bool, str]:
    """A wrong mass factor in the path coefficients must blow up the residual."""
    params = SystemParams(3, 2, 1.0, 0.1, (1.0, 1.6, 0.6))
    state = sample_initial_state(params, 13)
    seg = exact_segment(params, state, 12)
    nb = nt.neutral_direct(seg)
    good = max(
        nt.cpf_verify(seg, nb.basis[r], nb.advance_matrix[r]) for r in range(nb.dim)
    )
    data = nt.SegmentData.from_segment(seg)
    broken = nt.SegmentData(
        data.n_balls, data.dim, data.masses[::-1].copy(), data.pairs, data.velocities
    )
    bad = max(
        nt.cpf_verify(broken, nb.basis[r], nb.advance_matrix[r]) for r in range(nb.dim)
    )
    caught = good <= 1e-9 and bad > 1e-4
    return ("mutation_cpf", caught, f"good={good:.1e} broken={bad:.1e}")


ALL_SUITES = (
    suite_conservation,
    suite_reversal,
    suite_cpf_identity,
    suite_degenerate_examples,
    suite_richness_oracle,
    suite_mutation_reflection,
    suite_mutation_cpf,
)


def run_all() -> list[tuple[str, bool, str]]:
    return [suite() for suite in ALL_SUITES]
