"""Random fields on the fragmentation tree of disconnection times.

The growth process targeted at a leaf set fragments the disk: two leaves
share every excursion until their disconnection time and are independent
afterwards. The field h_t attaches a compensated compound-Poisson weight
stream to each branch: along an edge of duration tau the increment is a
Poisson(rate * tau) sum of weights minus tau * mean. Leaves therefore share
increments exactly until their meet time, realizing the covariance
Cov(h_t(z), h_t(w)) = E[T(z, w) and t] for unit-second-moment weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._rng import stream

__all__ = [
    "FragmentationTree", "WeightSpec", "TreeConsistencyError",
    "build_tree", "sample_field", "sample_field_path",
    "test_function_pairing", "increment_decay_check",
]


class TreeConsistencyError(ValueError):
    """Disconnection matrix incompatible with an ultrametric hierarchy."""


@dataclass(frozen=True)
class _Block:
    members: tuple       # leaf indices sharing this branch
    t_start: float
    t_end: float         # split time, or the horizon


@dataclass
class FragmentationTree:
    """Blocks of leaves with their persistence intervals."""

    n_leaves: int
    horizon: float
    blocks: list

    def meet_time(self, i: int, j: int) -> float:
        """First time i and j stop sharing a block (inf if never)."""
        if i == j:
            return 0.0
        deepest = None
        for b in self.blocks:
            if i in b.members and j in b.members:
                if deepest is None or b.t_start > deepest.t_start:
                    deepest = b
        if deepest is None:
            raise TreeConsistencyError("leaves never share a block")
        return deepest.t_end if deepest.t_end < self.horizon else math.inf

    def meet_matrix(self) -> np.ndarray:
        n = self.n_leaves
        out = np.zeros((n, n))
        for i in range(n):
            for j in range(n):
                if i != j:
                    out[i, j] = self.meet_time(i, j)
        return out


def build_tree(record) -> FragmentationTree:
    """Fragmentation tree of a GrowthRecord from its disconnection matrix.

    Splits are read off the matrix directly (cluster at level t = classes
    of the relation T > t), so the reconstructed meet times reproduce the
    matrix bit-exactly; a matrix violating ultrametric compatibility cannot
    be clustered consistently and raises TreeConsistencyError.
    """
    T = np.asarray(record.disconnection, float)
    n = T.shape[0]
    if n < 2:
        raise ValueError("need at least 2 targets")
    horizon = float(record.t_max)
    finite = sorted(set(T[np.isfinite(T) & (T > 0)].tolist()))
    blocks = []
    active = [(tuple(range(n)), 0.0)]
    for t in finite:
        nxt = []
        for members, born in active:
            groups = _split_groups(members, T, t)
            if len(groups) == 1:
                nxt.append((members, born))
                continue
            blocks.append(_Block(members, born, t))
            nxt.extend((g, t) for g in groups)
        active = nxt
    for members, born in active:
        blocks.append(_Block(members, born, horizon))
    tree = FragmentationTree(n, horizon, blocks)
    M = tree.meet_matrix()
    fin = np.isfinite(T)
    mism = (fin & (np.where(fin, M, 0.0) != np.where(fin, T, 0.0))) \
        | (~fin & np.isfinite(M))
    np.fill_diagonal(mism, False)
    if mism.any():
        raise TreeConsistencyError("meet times do not reproduce the matrix")
    return tree


def _split_groups(members, T, t):
    """Connected components of the relation T(i, j) > t within members."""
    members = list(members)
    seen = set()
    groups = []
    for start in members:
        if start in seen:
            continue
        comp = [start]
        seen.add(start)
        stack = [start]
        while stack:
            i = stack.pop()
            for j in members:
                if j not in seen and T[i, j] > t:
                    seen.add(j)
                    comp.append(j)
                    stack.append(j)
        groups.append(tuple(sorted(comp)))
    return groups


@dataclass(frozen=True)
class WeightSpec:
    """Finite-rate weight measure nu with unit second moment.

    The constructor rescales jump sizes so that int x^2 nu(dx) = 1; the
    (rescaled) mean stays finite. sampler(rng, size) draws the unscaled
    sizes.
    """

    rate: float
    sampler: object
    mean: float            # int x nu(dx) after rescaling
    scale: float = 1.0

    @staticmethod
    def point_mass(atom: float = 1.0, rate: float = 1.0) -> "WeightSpec":
        m2 = rate * atom ** 2
        s = 1.0 / math.sqrt(m2)
        return WeightSpec(rate, lambda rng, size: np.full(size, atom),
                          mean=rate * atom * s, scale=s)

    @staticmethod
    def exponential(beta: float = 1.0, rate: float = 1.0) -> "WeightSpec":
        # int x^2 nu(dx) = rate * 2/beta^2
        m2 = rate * 2.0 / beta ** 2
        s = 1.0 / math.sqrt(m2)
        return WeightSpec(rate, lambda rng, size: rng.exponential(1.0 / beta, size),
                          mean=rate / beta * s, scale=s)

    def second_moment_check(self, rng, n: int = 200000) -> float:
        x = self.scale * np.asarray(self.sampler(stream(rng) if isinstance(rng, int)
                                                 else rng, n))
        return float(self.rate * np.mean(x ** 2))


def sample_field_path(tree: FragmentationTree, weights: WeightSpec, times,
                      rng) -> np.ndarray:
    """Samples of (h_t(leaf)) at several times from one weight stream.

    Per block alive on [a, b): one compound-Poisson jump stream is drawn
    over the block's span and evaluated at every query time, so values at
    different times are increments of the same field (leaves share a
    block's increments bitwise until their split).

    Returns an array of shape (len(times), n_leaves).
    """
    times = np.asarray(times, float)
    if times.size and (times.min() < 0.0 or times.max() > tree.horizon + 1e-12):
        raise ValueError("times must lie within the tree horizon")
    rng = stream(rng) if isinstance(rng, int) else rng
    h = np.zeros((times.size, tree.n_leaves))
    for b in sorted(tree.blocks, key=lambda b: (b.t_start, b.members)):
        span = b.t_end - b.t_start
        n = rng.poisson(weights.rate * span)
        jt = b.t_start + rng.uniform(0.0, span, n)
        jw = weights.scale * np.asarray(weights.sampler(rng, n), float)
        order = np.argsort(jt)
        jt = jt[order]
        jw_cum = np.concatenate([[0.0], np.cumsum(jw[order])])
        for k, t in enumerate(times):
            tau = max(0.0, min(b.t_end, t) - min(b.t_start, t))
            if tau == 0.0:
                continue
            total = jw_cum[np.searchsorted(jt, t, side="right")]
            inc = total - tau * weights.mean
            for i in b.members:
                h[k, i] += inc
    return h


def sample_field(tree: FragmentationTree, weights: WeightSpec, t: float,
                 rng) -> np.ndarray:
    """One sample of (h_t(leaf))_leaves; see sample_field_path."""
    return sample_field_path(tree, weights, [t], rng)[0]


def test_function_pairing(points, h_values, f_values, cell_area: float) -> float:
    """Riemann-sum pairing of field samples with a test function."""
    h_values = np.asarray(h_values, float)
    f_values = np.asarray(f_values, float)
    if h_values.shape != f_values.shape:
        raise ValueError("mismatched grids")
    return float(np.sum(h_values * f_values) * cell_area)


def increment_decay_check(records, weights: WeightSpec, n_grid, seed,
                          replicas: int = 2000) -> dict:
    """Empirical decay of increment covariances between consecutive times.

    For each n in n_grid, estimates sum over leaf pairs of
    |Cov(h_{n+1}(z) - h_n(z), h_{n+1}(w) - h_n(w))| scaled by the pair
    count, across trees built from the supplied replicated records. Reports
    the sequence plus a log-linear trend in sqrt(n).
    """
    trees = [build_tree(rec) for rec in records]
    n_grid = sorted(n_grid)
    out = []
    for k, n in enumerate(n_grid):
        accum = []
        for r in range(replicas):
            tree = trees[r % len(trees)]
            rng = stream(seed, ("incdecay", k, r))
            pair = sample_field_path(
                tree, weights,
                [min(n, tree.horizon), min(n + 1.0, tree.horizon)], rng)
            accum.append(pair[1] - pair[0])
        d = np.array(accum)
        d -= d.mean(axis=0, keepdims=True)
        cov = d.T @ d / (len(accum) - 1)
        nl = cov.shape[0]
        mask = ~np.eye(nl, dtype=bool)
        out.append(float(np.abs(cov[mask]).mean()))
    x = np.sqrt(np.asarray(n_grid, float))
    y = np.log(np.maximum(out, 1e-300))
    slope, icept = np.polyfit(x, y, 1)
    return {"n_grid": list(n_grid), "mean_abs_cov": out,
            "sqrt_n_log_slope": float(slope)}
