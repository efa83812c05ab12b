"""Driftful subordinators with finite-activity jumps.

X(t) = d t + sum of jumps of a Poisson point process with intensity Pi,
restricted above a floor j_min (mass below the floor is dropped and
recorded, feeding error bars downstream). First/last passage across a
level and overshoot statistics implement the renewal-theoretic checks; the
capacity subordinator of the cutoff growth process is exposed as a factory
whose jumps are excursion capacities (kernel-distributed separation, then
the angle SDE).

Sign conventions: the classical Laplace exponent appears as
E[exp(-lam X(t))] = exp(-t phi(lam)) with
phi(lam) = d lam + int (1 - e^{-lam x}) Pi(dx); positive exponential
moments use psi(lam) = d lam + int (e^{lam x} - 1) Pi(dx), finite only
while the tail integral converges.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from . import _kernels as K
from ._rng import stream

__all__ = [
    "LevySpec", "PassageRecord", "PathSummary", "simulate", "first_passage",
    "overshoot_tail", "moment_exponent", "laplace_exponent",
    "capacity_jump_spec", "J_MIN_DEFAULT",
]

J_MIN_DEFAULT = 1e-8


@dataclass(frozen=True)
class LevySpec:
    """Sampling description of a driftful finite-activity subordinator."""

    drift: float
    rate: float                     # Pi((j_min, inf))
    jump_sampler: object            # callable (Generator, size) -> positive array
    tail: object = None             # callable x -> Pi((x, inf)), for assertions
    density: object = None          # callable x -> Pi density, for quadrature
    j_min: float = J_MIN_DEFAULT
    dropped_mass: float = 0.0       # int_0^{j_min} x Pi(dx), recorded deficit

    def __post_init__(self):
        if self.drift < 0.0:
            raise ValueError("drift must be nonnegative")
        if self.rate < 0.0 or not np.isfinite(self.rate):
            raise ValueError("jump rate must be finite and nonnegative")

    @staticmethod
    def exponential(beta: float = 2.0, c: float = 1.0, drift: float = 0.0,
                    j_min: float = J_MIN_DEFAULT) -> "LevySpec":
        """Pi(dx) = c e^{-beta x} dx restricted above j_min."""
        rate = c / beta * np.exp(-beta * j_min)

        def sampler(rng, size):
            return j_min + rng.exponential(1.0 / beta, size)

        dropped = c * (1.0 - np.exp(-beta * j_min) * (1.0 + beta * j_min)) / beta ** 2
        return LevySpec(drift, float(rate), sampler,
                        tail=lambda x: c / beta * np.exp(-beta * max(x, j_min)),
                        density=lambda x: c * np.exp(-beta * x),
                        j_min=j_min, dropped_mass=float(dropped))

    @staticmethod
    def unit_jumps(rate: float = 1.0, drift: float = 0.0) -> "LevySpec":
        """Pi = rate * delta_1."""
        return LevySpec(drift, rate, lambda rng, size: np.ones(size),
                        tail=lambda x: rate if x < 1.0 else 0.0, j_min=0.5)


@dataclass(frozen=True)
class PathSummary:
    final: float
    t: float
    jump_times: np.ndarray
    jump_sizes: np.ndarray


@dataclass(frozen=True)
class PassageRecord:
    x: float
    L: float      # first-passage time
    G: float      # last value before passage
    D: float      # first value at/after passage

    def __post_init__(self):
        if self.D < self.x - 1e-12:
            raise ValueError("passage record with D < x")

    @property
    def overshoot(self) -> float:
        return self.D - self.x


def simulate(spec: LevySpec, t: float, rng) -> PathSummary:
    """One path on [0, t]: Poisson jump count, iid sizes, drift."""
    if t < 0.0:
        raise ValueError("t must be nonnegative")
    rng = stream(rng) if isinstance(rng, int) else rng
    n = rng.poisson(spec.rate * t)
    times = np.sort(rng.uniform(0.0, t, n))
    sizes = np.asarray(spec.jump_sampler(rng, n), float)
    return PathSummary(spec.drift * t + float(sizes.sum()), t, times, sizes)


def first_passage(spec: LevySpec, x: float, rng) -> PassageRecord:
    """Simulate until X exceeds level x; drift crossings have zero overshoot."""
    if x < 0.0:
        raise ValueError("level must be nonnegative")
    rng = stream(rng) if isinstance(rng, int) else rng
    if spec.rate == 0.0:
        if spec.drift == 0.0:
            raise ValueError("degenerate subordinator never passes")
        return PassageRecord(x, x / spec.drift, x, x)
    t = 0.0
    val = 0.0
    while True:
        gap = rng.exponential(1.0 / spec.rate)
        if spec.drift > 0.0 and val + spec.drift * gap > x:
            dt = (x - val) / spec.drift
            return PassageRecord(x, t + dt, x, x)
        t += gap
        val += spec.drift * gap
        jump = float(spec.jump_sampler(rng, 1)[0])
        if val + jump > x:
            return PassageRecord(x, t, val, val + jump)
        val += jump


def overshoot_tail(spec: LevySpec, lambda0: float, x_grid, y_grid, n: int,
                   rng) -> dict:
    """Empirical P[D_x - x >= y] on the grid, with the fitted constant.

    The caller asserts int (e^{lambda0 x} - 1) Pi(dx) < inf via the spec's
    tail; the report passes when C* = max emp * e^{lambda0 y} is finite and
    stable in n (two half-sample estimates are returned for that check).
    """
    rng = stream(rng) if isinstance(rng, int) else rng
    x_grid = list(x_grid)
    y_grid = list(y_grid)
    table = np.zeros((len(x_grid), len(y_grid)))
    halves = np.zeros((2, len(x_grid), len(y_grid)))
    for i, x in enumerate(x_grid):
        ov = np.array([first_passage(spec, x, rng).overshoot for _ in range(n)])
        for j, y in enumerate(y_grid):
            table[i, j] = np.mean(ov >= y)
            halves[0, i, j] = np.mean(ov[: n // 2] >= y)
            halves[1, i, j] = np.mean(ov[n // 2:] >= y)
    weights = np.exp(lambda0 * np.asarray(y_grid))
    c_star = float((table * weights).max())
    return {
        "x_grid": x_grid, "y_grid": y_grid, "tail": table,
        "c_star": c_star,
        "c_star_halves": [float((halves[0] * weights).max()),
                          float((halves[1] * weights).max())],
    }


def moment_exponent(spec: LevySpec, lam: float) -> float:
    """psi(lam) with E[exp(lam X_t)] = exp(t psi(lam)), by quadrature.

    The upper limit is grown until the integrand is negligible; a blow-up
    before that (lam beyond the tail's exponential rate) raises.
    """
    if spec.density is None:
        raise ValueError("spec carries no density for quadrature")
    import math as _m

    def f(x):
        lx = lam * x
        if lx > 700.0:
            return _m.inf
        return _m.expm1(lx) * spec.density(x)

    hi = max(1.0, 2.0 * spec.j_min)
    while hi < 1e7:
        v = f(hi)
        if not _m.isfinite(v) or abs(v) > 1e12:
            raise ValueError("exponential moment diverges at this lam")
        if abs(v) < 1e-14 and abs(f(0.77 * hi)) < 1e-13:
            break
        hi *= 2.0
    val, _ = quad(f, spec.j_min, hi, limit=200)
    return spec.drift * lam + float(val)


def laplace_exponent(spec: LevySpec, lam: float) -> float:
    """phi(lam) with E[exp(-lam X_t)] = exp(-t phi(lam)), lam >= 0."""
    if lam < 0.0:
        raise ValueError("lam must be nonnegative")
    return -moment_exponent(spec, -lam)


def capacity_jump_spec(kappa: float, theta_cutoff: float, seed,
                       step_base: float = 0.005) -> LevySpec:
    """The accumulated-capacity subordinator of the cutoff growth process.

    Jumps are excursion capacities: separation from the boundary kernel
    restricted to [cutoff, 2pi - cutoff], capacity from the angle SDE. The
    jump rate is the cutoff kernel mass 2 cot(cutoff/2); there is no drift.
    """
    from .growth import excursion_rate, separation_quantile
    from .capacity import EPS_ABS, T_GUARD, T_MAX

    rate = excursion_rate(theta_cutoff)
    t_guard = T_MAX if kappa == 0.0 else T_GUARD

    def sampler(rng, size):
        thetas = separation_quantile(theta_cutoff, rng.uniform(size=size))
        st = rng.integers(0, 2 ** 63 - 1, 4, dtype=np.int64).astype(np.uint64)
        if not st.any():
            st[0] = np.uint64(1)
        times, _ = K.theta_hitting_theta_array(
            kappa, np.asarray(thetas, float), step_base, EPS_ABS, t_guard, st)
        return times

    return LevySpec(0.0, float(rate), sampler, j_min=0.0)
