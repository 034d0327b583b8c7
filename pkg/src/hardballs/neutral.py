"""Neutral spaces, advances, the connecting-path expansion, and sufficiency.

Three independent routes to the neutral space of an orbit segment:

* `neutral_direct` builds the homogeneous system expressing that the initial
  configuration displacement keeps the whole velocity history fixed (between
  collisions displacements are constant; at each collision the relative
  displacement of the partners must be parallel to their incoming relative
  velocity, and the partners' displacements jump by the advance times their
  velocity jump);
* `advance_system` solves the linear system over the advances obtained from
  the connecting-path expansion of each closing collision, and converts its
  solution dimension via dim N = nu * P_Sigma + dim{alpha};
* `neutral_jacobian` differentiates the velocity history of the full
  nonlinear dynamics by central finite differences and measures the kernel.

All index comparisons in the connecting-path machinery are combinatorial
(collision order), so synthetic schemes with zero time slots are handled the
same way as real segments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .combinatorics import _UnionFind, components
from .errors import MethodDisagreement, NotConnectedPair, SchemeChanged, SingularSegment
from .model import OrbitSegment, PhaseState

RANK_TOL_DIRECT = 1e-8
RANK_TOL_JACOBIAN = 1e-6
FD_STEP = 1e-6


@dataclass
class SegmentData:
    """The kinematic data the analysis consumes: pairs plus velocity history.

    velocities has shape (n+1, N, nu): row k holds every ball's velocity after
    the k-th collision (row 0 is the initial velocity set).  Synthetic schemes
    (prescribed histories that never ran through the simulator) use the same
    container.
    """

    n_balls: int
    dim: int
    masses: np.ndarray
    pairs: list[tuple[int, int]]
    velocities: np.ndarray

    @classmethod
    def from_segment(cls, segment: OrbitSegment) -> "SegmentData":
        return cls(
            n_balls=segment.params.n_balls,
            dim=segment.params.dim,
            masses=segment.params.mass_array,
            pairs=[ev.pair for ev in segment.events],
            velocities=segment.velocity_history(),
        )

    @property
    def n_events(self) -> int:
        return len(self.pairs)


@dataclass
class NeutralBasis:
    """Orthonormal kernel basis with the advance tuple of each basis vector."""

    basis: np.ndarray  # (dim, N*nu)
    advance_matrix: np.ndarray  # (dim, n)
    dim: int


def _as_data(segment) -> SegmentData:
    if isinstance(segment, OrbitSegment):
        return SegmentData.from_segment(segment)
    return segment


def _displacement_maps(data: SegmentData):
    """Constraint rows, advance rows, and final displacement maps over W.

    W runs over initial configuration displacements in R^(N*nu).  Returns
    (constraints (n*nu, N*nu), advance_rows (n, N*nu), end_maps (N, nu, N*nu)).
    """
    N, nu, n = data.n_balls, data.dim, data.n_events
    dim_w = N * nu
    D = np.zeros((N, nu, dim_w))
    for i in range(N):
        D[i, :, i * nu : (i + 1) * nu] = np.eye(nu)
    constraints = []
    advance_rows = []
    V = data.velocities
    for k, (i, j) in enumerate(data.pairs, start=1):
        dv = V[k - 1, i] - V[k - 1, j]
        norm2 = float(dv @ dv)
        if norm2 == 0.0:
            raise SingularSegment(f"zero incoming relative velocity at event {k}")
        rel = D[i] - D[j]
        proj = np.eye(nu) - np.outer(dv, dv) / norm2
        constraints.append(proj @ rel)
        alpha_row = (dv @ rel) / norm2
        advance_rows.append(alpha_row)
        for l in (i, j):
            D[l] = D[l] + np.outer(V[k, l] - V[k - 1, l], alpha_row)
    cons = np.concatenate(constraints) if constraints else np.zeros((0, dim_w))
    adv = np.stack(advance_rows) if advance_rows else np.zeros((0, dim_w))
    return cons, adv, D


def _kernel(matrix: np.ndarray, dim_w: int, rank_tol: float) -> np.ndarray:
    """Orthonormal kernel basis of `matrix` acting on R^dim_w."""
    if matrix.shape[0] == 0:
        return np.eye(dim_w)
    _, s, vt = np.linalg.svd(matrix)
    smax = s[0] if len(s) else 0.0
    rank = int(np.sum(s > rank_tol * smax)) if smax > 0 else 0
    return vt[rank:]


def neutral_direct(segment, rank_tol: float = RANK_TOL_DIRECT) -> NeutralBasis:
    """Neutral space from the per-collision parallelism system."""
    data = _as_data(segment)
    cons, adv, _ = _displacement_maps(data)
    basis = _kernel(cons, data.n_balls * data.dim, rank_tol)
    return NeutralBasis(basis=basis, advance_matrix=basis @ adv.T, dim=basis.shape[0])


def advances_of(segment, W: np.ndarray) -> np.ndarray:
    """Advance tuple (alpha_1..alpha_n) of one neutral vector."""
    data = _as_data(segment)
    _, adv, _ = _displacement_maps(data)
    return adv @ W


def end_displacements(segment, W: np.ndarray) -> np.ndarray:
    """Per-ball displacements at the segment end induced by initial displacement W."""
    data = _as_data(segment)
    _, _, D = _displacement_maps(data)
    return np.stack([D[i] @ W for i in range(data.n_balls)])


def neutral_jacobian(
    segment: OrbitSegment,
    step: float | None = None,
    rank_tol: float = RANK_TOL_JACOBIAN,
) -> int:
    """Kernel dimension of the finite-difference velocity-history Jacobian.

    Central differences of the full velocity history with respect to the
    initial position coordinates; each probe must reproduce the symbolic
    sequence and the adjustment vectors, otherwise SchemeChanged is raised.

    Perturbations are amplified roughly geometrically along the segment, so a
    double-precision step cannot stay inside the scheme beyond a handful of
    collisions.  The probes therefore run on the arbitrary-precision engine
    and the singular values are extracted at the same working precision.  The
    rank threshold is absolute: the unit-energy normalization makes genuine
    (non-kernel) singular values order one or larger, while a relative
    threshold would be swamped by the largest singular value, which itself
    grows geometrically with the number of collisions.
    """
    import gmpy2
    import mpmath
    from gmpy2 import mpfr

    from .exact import ExactSimulator, precision_for

    params = segment.params
    N, nu, n = params.n_balls, params.dim, segment.n_events
    if n == 0:
        return N * nu
    ref_pairs = segment.pairs
    ref_adj = [tuple(int(x) for x in ev.adjustment) for ev in segment.events]
    prec = precision_for(n) + 64
    gmpy2.get_context().precision = prec
    # step^2 times the cubed amplification (second-order truncation) must stay
    # below the rank threshold; half the working precision is ample for the
    # segment lengths the precision schedule is built for
    h = mpfr(step) if step is not None else mpfr(2) ** (-(prec // 2))

    def history(positions):
        sim = ExactSimulator(params, positions, segment.initial.velocities, prec)
        rows = [[row[:] for row in sim.v]]
        for _ in range(n):
            sim.step()
            rows.append([row[:] for row in sim.v])
        if sim.pairs != ref_pairs or list(sim.adjustments) != ref_adj:
            raise SchemeChanged("finite-difference probe left the symbolic scheme")
        return [x for row_set in rows for row in row_set for x in row]

    def to_mp(x):
        man, exp = x.as_mantissa_exp()
        return mpmath.ldexp(int(man), int(exp))

    cols = []
    for i in range(N):
        for c in range(nu):
            plus = [[mpfr(x) for x in row] for row in segment.initial.positions]
            plus[i][c] += h
            minus = [[mpfr(x) for x in row] for row in segment.initial.positions]
            minus[i][c] -= h
            hp, hm = history(plus), history(minus)
            cols.append([(a - b) / (2 * h) for a, b in zip(hp, hm)])
    old_prec = mpmath.mp.prec
    try:
        mpmath.mp.prec = prec
        jac = mpmath.matrix((n + 1) * N * nu, N * nu)
        for col_idx, col in enumerate(cols):
            for row_idx, x in enumerate(col):
                jac[row_idx, col_idx] = to_mp(x)
        sing = mpmath.svd_r(jac, compute_uv=False)
        rank = sum(1 for x in sing if x > rank_tol)
    finally:
        mpmath.mp.prec = old_prec
    return N * nu - rank


def _collision_forest(pairs_rev, n_balls):
    """Spanning-forest edge indices (reverse-time order) and adjacency."""
    uf = _UnionFind(n_balls)
    forest = []  # (reverse index, pair)
    for idx, (i, j) in enumerate(pairs_rev, start=1):
        if uf.union(i, j):
            forest.append((idx, (i, j)))
    adj: dict[int, list[tuple[int, int]]] = {v: [] for v in range(n_balls)}
    for idx, (i, j) in forest:
        adj[i].append((j, idx))
        adj[j].append((i, idx))
    return forest, adj


def _forest_path(adj, start, goal):
    """Vertex/edge path between two balls in the spanning forest (BFS)."""
    prev = {start: None}
    queue = [start]
    while queue:
        v = queue.pop(0)
        if v == goal:
            break
        for w, idx in adj[v]:
            if w not in prev:
                prev[w] = (v, idx)
                queue.append(w)
    if goal not in prev:
        raise NotConnectedPair(f"balls {start} and {goal} are not connected")
    vertices = [goal]
    edges = []
    v = goal
    while prev[v] is not None:
        u, idx = prev[v]
        edges.append(idx)
        vertices.append(u)
        v = u
    return vertices[::-1], edges[::-1]


def cpf_coefficients(segment, ball_a: int, ball_b: int, upto: int | None = None):
    """Coefficient of each advance in the connecting-path expansion of
    Delta q_a - Delta q_b at the segment end (or just before event `upto`).

    Returns a dict mapping 1-based forward event index to a nu-vector Gamma,
    so that Delta q_a(end) - Delta q_b(end) = sum Gamma[k] * alpha_k.
    """
    data = _as_data(segment)
    V = data.velocities
    masses = data.masses
    m = data.n_events if upto is None else upto - 1
    if ball_a == ball_b:
        raise NotConnectedPair("need two distinct balls")
    # reverse-time relabeling: e_1 is the latest collision of the sub-segment
    fwd = lambda rev_idx: m + 1 - rev_idx
    pairs_rev = [data.pairs[fwd(i) - 1] for i in range(1, m + 1)]
    _, adj = _collision_forest(pairs_rev, data.n_balls)
    B, path_edges = _forest_path(adj, ball_a, ball_b)
    h = len(path_edges)

    def vel(ball, fwd_idx, side):
        row = fwd_idx - 1 if side == "-" else fwd_idx
        return V[row, ball]

    # "later in time" == larger forward index; the boundary conventions
    # t(f_0) = t(f_{h+1}) = reference time are encoded as +infinity
    f_fwd = [np.inf] + [fwd(e) for e in path_edges] + [np.inf]

    coeffs: dict[int, np.ndarray] = {}

    def add(fwd_idx, gamma):
        coeffs[fwd_idx] = coeffs.get(fwd_idx, 0.0) + gamma

    for i in range(1, h + 1):
        fi = f_fwd[i]
        prev_later = f_fwd[i - 1] > fi
        next_later = f_fwd[i + 1] > fi
        bm, bp = B[i - 1], B[i]
        dminus = vel(bm, fi, "-") - vel(bp, fi, "-")
        dplus = vel(bm, fi, "+") - vel(bp, fi, "+")
        if not prev_later and not next_later:
            gamma = dminus
        elif prev_later and next_later:
            gamma = dplus
        else:
            mm, mp = masses[bm], masses[bp]
            if prev_later:  # t(f_{i+1}) < t(f_i) < t(f_{i-1})
                gamma = (mm * dminus + mp * dplus) / (mm + mp)
            else:  # t(f_{i-1}) < t(f_i) < t(f_{i+1})
                gamma = (mm * dplus + mp * dminus) / (mm + mp)
        add(fi, gamma)

    for i in range(0, h + 1):
        # adjacency window at vertex B_i: strictly between f_i and f_{i+1}
        lo = min(f_fwd[i], f_fwd[i + 1])
        hi = max(f_fwd[i], f_fwd[i + 1])
        vertex = B[i]
        sign = 1.0 if f_fwd[i] > f_fwd[i + 1] else -1.0
        for k in range(1, m + 1):
            if not (lo < k < hi):
                continue
            pair = data.pairs[k - 1]
            if vertex not in pair:
                continue
            other = pair[0] if pair[1] == vertex else pair[1]
            mc = masses[other]
            factor = sign * mc / (masses[vertex] + mc)
            jump = (vel(vertex, k, "+") - vel(other, k, "+")) - (
                vel(vertex, k, "-") - vel(other, k, "-")
            )
            add(k, factor * jump)
    return coeffs


def cpf_verify(segment, W: np.ndarray, alphas: np.ndarray) -> float:
    """Max relative residual of the connecting-path identity over connected pairs."""
    data = _as_data(segment)
    disp = end_displacements(data, W)
    parts, _ = components(data.pairs, data.n_balls)
    vnorm = float(np.linalg.norm(data.velocities))
    scale = max(float(np.linalg.norm(W)), 1e-300) * max(vnorm, 1.0)
    worst = 0.0
    for group in parts:
        for a_idx in range(len(group)):
            for b_idx in range(a_idx + 1, len(group)):
                a, b = group[a_idx], group[b_idx]
                coeffs = cpf_coefficients(data, a, b)
                rhs = np.zeros(data.dim)
                for k, gamma in coeffs.items():
                    rhs = rhs + gamma * alphas[k - 1]
                lhs = disp[a] - disp[b]
                denom = max(np.linalg.norm(lhs), np.linalg.norm(rhs), scale)
                worst = max(worst, float(np.linalg.norm(lhs - rhs)) / denom)
    return worst


def advance_system(segment, rank_tol: float = RANK_TOL_DIRECT):
    """Dimensions from the homogeneous system over the advances.

    For every closing collision (endpoints already connected by the preceding
    events) the connecting-path expression for the partners' relative
    displacement just before the collision must equal the advance times the
    incoming relative velocity.  Returns (dim_alpha, dim_N, n_equations).
    """
    data = _as_data(segment)
    N, nu, n = data.n_balls, data.dim, data.n_events
    V = data.velocities
    _, p_sigma = components(data.pairs, N)
    rows = []
    n_eq = 0
    uf = _UnionFind(N)
    for k, (i, j) in enumerate(data.pairs, start=1):
        closing = uf.find(i) == uf.find(j)
        uf.union(i, j)
        if not closing:
            continue
        n_eq += 1
        coeffs = cpf_coefficients(data, i, j, upto=k)
        block = np.zeros((nu, n))
        for idx, gamma in coeffs.items():
            block[:, idx - 1] += gamma
        block[:, k - 1] -= V[k - 1, i] - V[k - 1, j]
        rows.append(block)
    if rows:
        mat = np.concatenate(rows)
        _, s, _ = np.linalg.svd(mat)
        smax = s[0]
        rank = int(np.sum(s > rank_tol * smax)) if smax > 0 else 0
    else:
        rank = 0
    dim_alpha = n - rank
    return dim_alpha, nu * p_sigma + dim_alpha, n_eq


def is_sufficient(segment, with_jacobian: bool = False) -> bool:
    """Minimal neutral space (dim = nu + 1)?  Cross-checks the methods."""
    data = _as_data(segment)
    nb = neutral_direct(data)
    _, dim_n, _ = advance_system(data)
    dims = {nb.dim, dim_n}
    if with_jacobian and isinstance(segment, OrbitSegment):
        dims.add(neutral_jacobian(segment))
    if len(dims) != 1:
        raise MethodDisagreement(f"neutral dimension estimates disagree: {sorted(dims)}")
    return nb.dim == data.dim + 1
