"""Collision-graph analysis: connectedness, richness, thresholds, Property (A)."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .model import OrbitSegment


@dataclass
class SymbolicScheme:
    """Symbolic sequence with adjustment vectors and time slots.

    pairs[k], adjustments[k] and slots[k] describe the (k+1)-st collision;
    slots are tau_k = t_k - t_{k-1} with t_0 the segment start.
    """

    n_balls: int
    pairs: list[tuple[int, int]]
    adjustments: list[tuple[int, ...]]
    slots: list[float]

    @classmethod
    def from_segment(cls, segment: OrbitSegment) -> "SymbolicScheme":
        times = [segment.initial.time] + [ev.time for ev in segment.events]
        return cls(
            n_balls=segment.params.n_balls,
            pairs=[ev.pair for ev in segment.events],
            adjustments=[tuple(int(x) for x in ev.adjustment) for ev in segment.events],
            slots=[times[k + 1] - times[k] for k in range(len(segment.events))],
        )


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))
        self.count = n

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb
            self.count -= 1
            return True
        return False


def components(pairs, n_balls: int):
    """Connected components of the collision multigraph on {1..N}.

    Returns (partition as a list of sorted vertex lists, component count).
    """
    uf = _UnionFind(n_balls)
    for i, j in pairs:
        uf.union(i, j)
    groups: dict[int, list[int]] = {}
    for v in range(n_balls):
        groups.setdefault(uf.find(v), []).append(v)
    return sorted(groups.values()), uf.count


def is_connected(pairs, n_balls: int) -> bool:
    return components(pairs, n_balls)[1] == 1


def richness(pairs, n_balls: int) -> int:
    """Maximum number of consecutive disjoint connected blocks.

    Greedy earliest-completion closing attains the maximum block count (an
    exchange argument; cross-checked against brute force in the tests): close
    a block as soon as its accumulated edges connect all N balls, then reset.
    """
    count = 0
    uf = _UnionFind(n_balls)
    for i, j in pairs:
        uf.union(i, j)
        if uf.count == 1:
            count += 1
            uf = _UnionFind(n_balls)
    return count


def richness_bruteforce(pairs, n_balls: int) -> int:
    """Oracle: maximize block count over all consecutive disjoint decompositions.

    Blocks are disjoint index ranges in order, gaps allowed; each block's edge
    set must connect all N balls.  Exponential; test sizes only.
    """
    n = len(pairs)
    best = [0] * (n + 1)
    for start in range(n - 1, -1, -1):
        best[start] = best[start + 1]
        for end in range(start + 1, n + 1):
            if is_connected(pairs[start:end], n_balls):
                best[start] = max(best[start], 1 + best[end])
    return best[0]


def threshold_C(n_balls: int) -> Fraction:
    """Richness threshold C(N): C(2) = 1, C(N) = (N/2) max(C(N-1), 3).

    Exact rational; equals 3 N! / 2^(N-1) for N >= 3.  Consumers requiring an
    integer block count take the ceiling.
    """
    if n_balls < 2:
        raise ValueError("need N >= 2")
    c = Fraction(1)
    for n in range(3, n_balls + 1):
        c = Fraction(n, 2) * max(c, Fraction(3))
    return c


def check_property_A(scheme: SymbolicScheme, exact: bool = False):
    """Nondegeneracy of repeated identical collisions with disjoint interleaving.

    For every k < l with sigma_k = sigma_l, a_k = a_l and sigma_j disjoint
    from sigma_k in between, the slot tau_l must differ from minus the sum of
    the interleaving slots.  Real orbits always pass (all slots positive).
    Returns None, or the violating 1-based (k, l).
    """
    slots = scheme.slots
    eps = 0.0 if exact else 1e-12 * sum(abs(t) for t in slots)
    n = len(scheme.pairs)
    for k in range(n):
        sk = set(scheme.pairs[k])
        for l in range(k + 1, n):
            if scheme.pairs[l] == scheme.pairs[k] and scheme.adjustments[l] == scheme.adjustments[k]:
                if all(not sk & set(scheme.pairs[j]) for j in range(k + 1, l)):
                    gap = sum(slots[j] for j in range(k + 1, l))
                    if abs(slots[l] + gap) <= eps:
                        return (k + 1, l + 1)
    return None


def summary(scheme: SymbolicScheme) -> dict:
    """Per-segment combinatorics record."""
    _, p_sigma = components(scheme.pairs, scheme.n_balls)
    violation = check_property_A(scheme)
    return {
        "n": len(scheme.pairs),
        "p_sigma": p_sigma,
        "richness": richness(scheme.pairs, scheme.n_balls),
        "property_A": violation is None,
    }
