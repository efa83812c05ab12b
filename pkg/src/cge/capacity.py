"""Exact-in-law sampling of chordal excursion capacity.

An excursion between boundary points at angular separation theta0, seen
from the target, has capacity equal in law to the absorption time of the
angle diffusion

    d theta = sqrt(kappa) dB + (kappa - 4)/2 * cot(theta/2) dt

at {0, 2pi}. Absorption at 0 means the arc does not surround the target.
kappa = 0 degenerates to the drift ODE, integrated with RK4 and capped at
T_MAX nats (the flow only reaches the boundary asymptotically).

RNG convention: functions accept either an int root seed, a (root, key)
pair via the ``key`` argument, or a raw 4-word xoshiro state (which is
advanced in place, giving stream semantics for sequential calls).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from ._rng import xoshiro_state
from .hypergeom import blowup_boundary

__all__ = [
    "ThetaPath", "McLaplaceResult", "sample_capacity", "sample_capacity_batch",
    "mc_capacity_laplace", "mean_capacity_table", "coupled_pair",
    "STEP_BASE", "EPS_ABS", "T_MAX",
]

STEP_BASE = 0.01     # base Euler step in capacity units
EPS_ABS = 1e-5       # absorption tolerance in radians
T_MAX = 50.0         # kappa = 0 cap; the ODE reaches the boundary only asymptotically
T_GUARD = 400.0      # safety horizon for kappa > 0 (absorption is a.s. far earlier)


def _state(rng, key=()):
    if isinstance(rng, np.ndarray):
        return rng
    return xoshiro_state(rng, key)


@dataclass(frozen=True)
class ThetaPath:
    """Summary of one absorbed path of the angle SDE."""

    kappa: float
    theta0: float
    step_base: float
    absorbed_at: str          # "zero" or "two_pi"
    hitting_time: float       # the sampled capacity, in nats
    capped: bool = False

    def __post_init__(self):
        if self.hitting_time < 0.0:
            raise ValueError("hitting_time must be nonnegative")


@dataclass(frozen=True)
class McLaplaceResult:
    estimate: float
    stderr: float
    n: int
    step_base: float
    moment_diverges: bool = False

    def __iter__(self):
        return iter((self.estimate, self.stderr))


def sample_capacity(kappa: float, theta0: float, rng, key=(),
                    step_base: float = STEP_BASE) -> ThetaPath:
    """One absorbed path; hitting_time is the capacity of the excursion."""
    if not (0.0 <= kappa < 8.0):
        raise ValueError("kappa must lie in [0, 8)")
    if not (0.0 < theta0 < 2.0 * np.pi):
        raise ValueError("theta0 must lie in (0, 2pi)")
    st = _state(rng, key)
    t_max = T_MAX if kappa == 0.0 else T_GUARD
    t, side, capped = K.theta_hitting_time(kappa, theta0, step_base, EPS_ABS, t_max, st)
    return ThetaPath(kappa, theta0, step_base,
                     "zero" if side == 0 else "two_pi", float(t), bool(capped))


def sample_capacity_batch(kappa, theta0, n, rng, key=(), step_base=STEP_BASE):
    """n independent hitting times; returns (times, sides, capped) arrays."""
    st = _state(rng, key)
    t_max = T_MAX if kappa == 0.0 else T_GUARD
    return K.theta_hitting_batch(kappa, theta0, n, step_base, EPS_ABS, t_max, st)


def coupled_pair(kappa, theta_a, theta_b, rng, key=(), step_base=STEP_BASE):
    """Hitting times of two paths driven by the same Brownian increments."""
    st = _state(rng, key)
    return K.theta_hitting_coupled(kappa, theta_a, theta_b, step_base,
                                   EPS_ABS, T_GUARD, st)


def mc_capacity_laplace(kappa: float, lam: float, theta0: float, n: int,
                        rng, key=(), step_base: float = STEP_BASE) -> McLaplaceResult:
    """Monte Carlo estimate of E[exp(lam * cap)] from n absorbed paths.

    For lam at or beyond the finite-moment boundary 1 - kappa/8 the sample
    mean is still returned but flagged, since the population moment is
    infinite.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if lam == 0.0:
        return McLaplaceResult(1.0, 0.0, n, step_base)
    times, _, _ = sample_capacity_batch(kappa, theta0, n, rng, key, step_base)
    y = np.exp(lam * times)
    est = float(y.mean())
    se = float(y.std(ddof=1) / np.sqrt(n)) if n > 1 else float("nan")
    return McLaplaceResult(est, se, n, step_base,
                           moment_diverges=lam >= blowup_boundary(kappa))


def mean_capacity_table(kappa, thetas, n_per: int, rng, key=(),
                        step_base=STEP_BASE):
    """Monte Carlo E[cap] on a theta grid; returns (means, stderrs).

    kappa = 0 is deterministic, so a single RK4 path per grid point
    suffices and the stderr column is zero.
    """
    thetas = np.asarray(thetas, float)
    st = _state(rng, key)
    means = np.empty(thetas.size)
    errs = np.empty(thetas.size)
    n_eff = 1 if kappa == 0.0 else n_per
    t_max = T_MAX if kappa == 0.0 else T_GUARD
    for i, th in enumerate(thetas):
        times, _, _ = K.theta_hitting_batch(kappa, th, n_eff, step_base,
                                            EPS_ABS, t_max, st)
        means[i] = times.mean()
        errs[i] = times.std(ddof=1) / np.sqrt(n_eff) if n_eff > 1 else 0.0
    return means, errs
