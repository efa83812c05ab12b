"""Laplace exponent of the accumulated capacity and its convex conjugate.

The exponent is the singular integral

    Lambda_k(lam) = 1/2 int_0^{1/2} u^{-3/2} (1-u)^{-3/2}
                    (E_u[exp(lam cap)] - 1) du,       u = sin^2(theta/4),

finite for lam < 1 - kappa/8 iff kappa < 4. The u -> 0 endpoint is
regularized by the substitution u = s^4 together with analytic subtraction
of the leading small-u power. The Fenchel-Legendre transform, its root
alpha_min of 2 alpha = Lambda*(alpha), and the dimension bound curve
2 - Lambda*(alpha)/alpha are computed on top.

The Legendre supremum is restricted to lam >= lambda_floor(kappa) + eps,
where the hypergeometric parameters stay real; below the floor the
conjugate is replaced by its chordal minorant (the restriction only
matters for alpha below Lambda'(lambda_floor), where reported values are
regression baselines rather than paper quantities).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq, minimize_scalar

from . import capacity as cap_mod
from .hypergeom import (DIVERGED, CapacityLaplaceParams, blowup_boundary,
                        f_and_g, lambda_floor, laplace_at_u_minus1,
                        mean_small_u_exponent)
from ._rng import stream

__all__ = [
    "ExponentTable", "LegendreCurve", "lambda_exponent", "lambda_truncated",
    "lambda_prime_zero", "lambda_prime_truncated", "legendre", "alpha_min",
    "dimension_bound_curve", "NumericInconsistencyError",
    "LambdaPrimeResult", "write_lambda_csv", "write_legendre_csv",
]

QUAD_REL_TOL = 1e-8
_LAM_CACHE: dict = {}


class NumericInconsistencyError(ArithmeticError):
    """Two independent estimators disagree beyond tolerance."""


# ----------------------------------------------------------------------
# the singular integral
# ----------------------------------------------------------------------

def _leading_small_u(kappa: float, lam: float):
    """(coef, power) of the leading small-u term of E_u[exp(lam cap)] - 1."""
    if kappa == 0.0:
        return 2.0 * lam, 1.0
    params = CapacityLaplaceParams(kappa, lam)
    if params.c_is_integer:
        # continuity argument: nudge kappa as f_and_g does
        lo = _leading_small_u(kappa * (1.0 - 1e-6), lam)
        hi = _leading_small_u(kappa * (1.0 + 1e-6), lam)
        if lo[1] != hi[1]:
            # straddling kappa = 8/3; no pure power available, skip subtraction
            return 0.0, 1.0
        return 0.5 * (lo[0] + hi[0]), lo[1]
    a, b, c = params.a, params.b, params.c
    if kappa > 8.0 / 3.0:
        f1, g1 = f_and_g(params, 1.0)
        return (1.0 - f1) / g1, 1.0 - c
    return a * b / c, 1.0


def _integral_u(kappa: float, lam: float, u_lo: float, u_hi: float,
                subtract: bool) -> float:
    """1/2 int u^{-3/2}(1-u)^{-3/2}(E_u - 1) du over [u_lo, u_hi]."""
    def raw(u):
        return 0.5 * u ** -1.5 * (1.0 - u) ** -1.5 \
            * laplace_at_u_minus1(kappa, lam, u)

    total = 0.0
    split = min(0.25, u_hi)
    if u_lo < split:
        if subtract and u_lo == 0.0:
            coef, p = _leading_small_u(kappa, lam)

            def regular_s(s):
                if s == 0.0:
                    return 0.0
                u = s ** 4
                main = 2.0 * s ** -3.0 * (1.0 - u) ** -1.5 \
                    * laplace_at_u_minus1(kappa, lam, u)
                return main - 2.0 * coef * s ** (4.0 * p - 3.0)

            val, _ = quad(regular_s, 0.0, split ** 0.25,
                          epsabs=1e-12, epsrel=QUAD_REL_TOL, limit=400)
            total += val + coef * split ** (p - 0.5) / (2.0 * p - 1.0)
        else:
            def plain_s(s):
                u = s ** 4
                return 2.0 * s ** -3.0 * (1.0 - u) ** -1.5 \
                    * laplace_at_u_minus1(kappa, lam, u)

            val, _ = quad(plain_s, u_lo ** 0.25, split ** 0.25,
                          epsabs=1e-12, epsrel=QUAD_REL_TOL, limit=400)
            total += val
    if u_hi > split:
        lo = max(u_lo, split)
        if kappa == 0.0 and lam > 0.0 and u_hi >= 0.5:
            # E_u - 1 = 2^{-lam}(1/2-u)^{-lam} - 1: peel off the algebraic
            # endpoint factor and hand it to the quadrature weight
            def smooth(u):
                return 0.5 * u ** -1.5 * (1.0 - u) ** -1.5 \
                    * (2.0 ** -lam - (0.5 - u) ** lam)

            val, _ = quad(smooth, lo, 0.5, weight="alg", wvar=(0.0, -lam),
                          epsabs=1e-12, epsrel=QUAD_REL_TOL, limit=400)
            total += val
        else:
            val, _ = quad(raw, lo, u_hi, epsabs=1e-12,
                          epsrel=QUAD_REL_TOL, limit=400)
            total += val
    return total


def lambda_exponent(kappa: float, lam: float) -> float:
    """Laplace exponent of the accumulated capacity per unit process time.

    Returns the distinguished value DIVERGED (inf, signed by lam) for
    lam >= 1 - kappa/8, and for every nonzero lam when kappa >= 4.
    """
    if not (0.0 <= kappa < 8.0):
        raise ValueError("kappa must lie in [0, 8)")
    if lam == 0.0:
        return 0.0
    if kappa >= 4.0:
        return DIVERGED if lam > 0.0 else -DIVERGED
    if lam >= blowup_boundary(kappa):
        return DIVERGED
    if kappa > 0.0 and lam < lambda_floor(kappa) + 1e-9:
        raise ValueError("lam below the real-parameter floor; "
                         "see lambda_floor(kappa)")
    key = (kappa, lam)
    if key not in _LAM_CACHE:
        _LAM_CACHE[key] = _integral_u(kappa, lam, 0.0, 0.5, subtract=True)
    return _LAM_CACHE[key]


def lambda_truncated(kappa: float, lam: float, theta_cutoff: float) -> float:
    """Exponent of the cutoff process: integral over separations >= cutoff."""
    if not (0.0 <= kappa < 8.0):
        raise ValueError("kappa must lie in [0, 8)")
    if not (0.0 < theta_cutoff <= np.pi):
        raise ValueError("theta_cutoff must lie in (0, pi]")
    if lam >= blowup_boundary(kappa):
        raise ValueError("lam must be below 1 - kappa/8 for a finite answer")
    if lam == 0.0 or theta_cutoff == np.pi:
        return 0.0
    if kappa > 0.0 and lam < lambda_floor(kappa) + 1e-9:
        raise ValueError("lam below the real-parameter floor")
    u_lo = float(np.sin(0.25 * theta_cutoff) ** 2)
    return _integral_u(kappa, lam, u_lo, 0.5, subtract=False)


# ----------------------------------------------------------------------
# derivative at zero, two estimators
# ----------------------------------------------------------------------

_FD_H = 1e-3


def _fd_prime(fn, h=_FD_H) -> float:
    """Second-order one-sided Richardson difference at 0 with f(0) = 0."""
    return (4.0 * fn(h) - fn(2.0 * h)) / (2.0 * h)


@dataclass(frozen=True)
class LambdaPrimeResult:
    value: float            # mean-capacity integral (Monte Carlo backed)
    value_fd: float         # Richardson difference of lambda_exponent
    rel_gap: float
    kappa: float
    n_per_point: int
    step_base: float

    def __float__(self):
        return self.value


def _tail_below(kappa, us, means, u_min):
    """Integral over [0, u_min] from a small-u power fit of the mean table."""
    try:
        p = mean_small_u_exponent(kappa)
        log_case = False
    except Exception:
        p, log_case = 1.0, True    # kappa = 8/3: u log(1/u) leading term
    nfit = min(8, len(us))
    uf, mf = us[:nfit], means[:nfit]
    if log_case:
        basis = np.column_stack([uf * np.log(1.0 / uf), uf])
    elif kappa > 8.0 / 3.0:
        basis = np.column_stack([uf ** p, uf])
    else:
        basis = uf[:, None] ** p
    coef, *_ = np.linalg.lstsq(basis, mf, rcond=None)

    def tail_s(s):
        u = s ** 4
        if log_case:
            e = coef[0] * u * np.log(1.0 / u) + coef[1] * u
        elif kappa > 8.0 / 3.0:
            e = coef[0] * u ** p + coef[1] * u
        else:
            e = coef[0] * u ** p
        return 4.0 * s ** 3 * 0.5 * u ** -1.5 * (1.0 - u) ** -1.5 * e

    tail, _ = quad(tail_s, 0.0, u_min ** 0.25, epsabs=1e-12, epsrel=1e-9)
    return tail


def _mc_mean_integral(kappa, seed, n_per, step_base, u_min=3e-4, n_grid=24):
    """1/2 int u^{-3/2}(1-u)^{-3/2} E_mc[cap] du with a power-law tail model.

    The grid covers [u_min, 1/2]; below u_min the mean is extrapolated with
    the analytic small-u exponent (two-term fit above kappa = 8/3 where the
    subleading u term is not negligible at the matching point). kappa = 0 is
    deterministic with a logarithmic blow-up of the mean at u = 1/2, so the
    quadrature consumes the RK4 sampler directly instead of a spline table.
    """
    if kappa == 0.0:
        us = np.geomspace(u_min, 0.3, 8)
        thetas = 4.0 * np.arcsin(np.sqrt(us))
        means, _ = cap_mod.mean_capacity_table(
            kappa, thetas, 1, seed, key=("lamprime", 0), step_base=step_base)

        def integrand(u):
            th = 4.0 * math.asin(math.sqrt(u))
            t = cap_mod.sample_capacity(0.0, th, seed, key=("lamprime", 1),
                                        step_base=step_base).hitting_time
            return 0.5 * u ** -1.5 * (1.0 - u) ** -1.5 * t

        body, _ = quad(integrand, u_min, 0.5, epsabs=1e-10, epsrel=1e-7,
                       limit=400, points=[0.49, 0.4999])
        return body + _tail_below(kappa, us, means, u_min)

    us = np.geomspace(u_min, 0.5, n_grid)
    thetas = 4.0 * np.arcsin(np.sqrt(us))
    gen_key = (int(kappa * 1000), n_grid, n_per)
    means, errs = cap_mod.mean_capacity_table(
        kappa, thetas, n_per, seed, key=("lamprime",) + gen_key,
        step_base=step_base)

    # interpolate log E against log u with a cubic spline, integrate
    from scipy.interpolate import CubicSpline
    spl = CubicSpline(np.log(us), np.log(means))

    def integrand(u):
        return 0.5 * u ** -1.5 * (1.0 - u) ** -1.5 * math.exp(spl(math.log(u)))

    body, _ = quad(integrand, u_min, 0.5, epsabs=1e-12, epsrel=1e-9, limit=400)
    return body + _tail_below(kappa, us, means, u_min)


def lambda_prime_zero(kappa: float, seed=20240, n_per_point: int = 6000,
                      step_base: float = 0.005,
                      tol_rel: float = 0.02) -> LambdaPrimeResult:
    """Lambda'_kappa(0) by the mean-capacity integral, with a hard self-audit.

    The Monte Carlo backed integral of E[cap] over the excursion kernel is
    the primary estimate; a Richardson one-sided difference of
    lambda_exponent at {h, 2h} must agree within tol_rel, else
    NumericInconsistencyError (re-run with finer steps / more samples).
    """
    if not (0.0 <= kappa < 4.0):
        raise ValueError("kappa must lie in [0, 4)")
    value_fd = _fd_prime(lambda l: lambda_exponent(kappa, l))
    value_mc = _mc_mean_integral(kappa, seed, n_per_point, step_base)
    gap = abs(value_mc - value_fd) / abs(value_fd)
    if gap > tol_rel:
        raise NumericInconsistencyError(
            f"Lambda'({kappa}) estimators disagree: mc-integral={value_mc:.6g} "
            f"fd={value_fd:.6g} rel gap={gap:.3%} > {tol_rel:.0%}")
    return LambdaPrimeResult(value_mc, value_fd, gap, kappa, n_per_point, step_base)


def lambda_prime_fd(kappa: float) -> float:
    """Deterministic Richardson estimate of Lambda'(0) (no self-audit)."""
    if not (0.0 <= kappa < 4.0):
        raise ValueError("kappa must lie in [0, 4)")
    return _fd_prime(lambda l: lambda_exponent(kappa, l))


def lambda_prime_truncated(kappa: float, theta_cutoff: float) -> float:
    """Derivative at 0 of the cutoff exponent: the truncated mean capacity.

    This is the normalizer used by every comparison against growth runs at
    the same cutoff (eliminates first-order cutoff bias).
    """
    return _fd_prime(lambda l: lambda_truncated(kappa, l, theta_cutoff))


# ----------------------------------------------------------------------
# Legendre transform
# ----------------------------------------------------------------------

def legendre(kappa: float, alpha: float, xtol: float = 1e-8) -> float:
    """Fenchel-Legendre transform sup_lam (lam alpha - Lambda(lam)).

    The search runs over [lambda_floor + eps, 1 - kappa/8); the objective
    is concave in lam, optimized with a bounded scalar minimizer to xtol.
    """
    if alpha <= 0.0:
        raise ValueError("alpha must be positive")
    if not (0.0 <= kappa < 4.0):
        raise ValueError("kappa must lie in [0, 4)")
    lo = lambda_floor(kappa) + 1e-6 if kappa > 0.0 else -60.0
    hi = blowup_boundary(kappa) - 1e-7

    def neg(lam):
        return -(lam * alpha - lambda_exponent(kappa, lam))

    res = minimize_scalar(neg, bounds=(lo, hi), method="bounded",
                          options={"xatol": xtol})
    best = -res.fun
    # the concave objective can peak at the floor; bounded Brent handles
    # interior maxima, so also check the endpoints explicitly
    for lam in (lo, hi - 1e-9):
        v = lam * alpha - lambda_exponent(kappa, lam)
        if v > best:
            best = v
    return float(best)


def alpha_min(kappa: float, xtol: float = 1e-10) -> float:
    """The root of 2 alpha = Lambda*(alpha), bracketed in (0, Lambda'(0)).

    Located by a bracketing root finder; the residual |2a - Lambda*(a)| at
    the returned point is below 1e-6 by construction.
    """
    lp = lambda_prime_fd(kappa)

    def h(a):
        return 2.0 * a - legendre(kappa, a)

    lo = 1e-6 * lp
    hi = lp * (1.0 - 1e-9)
    if h(lo) >= 0.0 or h(hi) <= 0.0:
        raise ArithmeticError("alpha_min bracketing failed; Legendre table too coarse")
    return float(brentq(h, lo, hi, xtol=xtol))


def dimension_bound_curve(kappa: float, alpha_grid):
    """Rows (alpha, bound, region) of the abnormal-decay dimension bound.

    bound = max(0, 2 - Lambda*(alpha)/alpha); entries with alpha below
    alpha_min are flagged region='empty' (the level set is empty there).
    """
    amin = alpha_min(kappa)
    rows = []
    for a in np.asarray(alpha_grid, float):
        ls = legendre(kappa, a)
        bound = max(0.0, 2.0 - ls / a)
        region = "empty" if a < amin - 1e-12 else "bound"
        rows.append((float(a), float(bound), region))
    return rows, amin


# ----------------------------------------------------------------------
# tables
# ----------------------------------------------------------------------

def _cheb_grid(lo: float, hi: float, n: int) -> np.ndarray:
    k = np.arange(n)
    x = np.cos(np.pi * (2 * k + 1) / (2 * n))[::-1]
    return lo + (hi - lo) * 0.5 * (x + 1.0)


@dataclass
class ExponentTable:
    """Grid lambda -> Lambda_kappa(lambda) plus the derivative at zero."""

    kappa: float
    lambda_grid: np.ndarray
    values: np.ndarray
    lambda_prime_zero: float
    blowup_boundary: float

    @classmethod
    def build(cls, kappa: float, n: int = 64) -> "ExponentTable":
        if not (0.0 <= kappa < 4.0):
            raise ValueError("kappa must lie in [0, 4)")
        bb = blowup_boundary(kappa)
        lo = max(-0.2 * bb, lambda_floor(kappa) + 1e-6 if kappa > 0 else -0.2 * bb)
        grid = _cheb_grid(lo, 0.98 * bb, n)
        vals = np.array([lambda_exponent(kappa, l) for l in grid])
        lp = lambda_prime_fd(kappa)
        if not (0.0 < lp < math.inf):
            raise ArithmeticError("Lambda'(0) must be positive and finite")
        return cls(kappa, grid, vals, lp, bb)

    def convexity_defect(self) -> float:
        """Most negative discrete second difference (should be >= -1e-8)."""
        g, v = self.lambda_grid, self.values
        d2 = np.diff(v, 2) - 0.0 * g[2:]
        # nonuniform grid second difference
        num = (v[2:] - v[1:-1]) / (g[2:] - g[1:-1]) \
            - (v[1:-1] - v[:-2]) / (g[1:-1] - g[:-2])
        return float(num.min())


@dataclass
class LegendreCurve:
    """Grid alpha -> Lambda*_kappa(alpha) plus alpha_min."""

    kappa: float
    alpha_grid: np.ndarray
    values: np.ndarray
    alpha_min: float

    @classmethod
    def build(cls, kappa: float, alpha_grid=None) -> "LegendreCurve":
        lp = lambda_prime_fd(kappa)
        if alpha_grid is None:
            alpha_grid = np.concatenate([
                np.geomspace(0.05 * lp, lp, 20),
                np.geomspace(1.15 * lp, 60.0 * lp, 20)])
        vals = np.array([legendre(kappa, a) for a in alpha_grid])
        return cls(kappa, np.asarray(alpha_grid, float), vals, alpha_min(kappa))


# ----------------------------------------------------------------------
# CSV emission (17 significant digits, LF endings)
# ----------------------------------------------------------------------

def _fmt(x: float) -> str:
    return format(x, ".17g")


def _atomic_text(path, text):
    import os
    from pathlib import Path
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_lambda_csv(path, table: ExponentTable):
    lines = ["kappa,lambda,Lambda"]
    for l, v in zip(table.lambda_grid, table.values):
        lines.append(f"{_fmt(table.kappa)},{_fmt(l)},{_fmt(v)}")
    _atomic_text(path, "\n".join(lines) + "\n")


def write_legendre_csv(path, curve: LegendreCurve):
    lines = ["kappa,alpha,LambdaStar,bound,region"]
    for a, v in zip(curve.alpha_grid, curve.values):
        bound = max(0.0, 2.0 - v / a)
        region = "empty" if a < curve.alpha_min - 1e-12 else "bound"
        lines.append(f"{_fmt(curve.kappa)},{_fmt(a)},{_fmt(v)},{_fmt(bound)},{region}")
    _atomic_text(path, "\n".join(lines) + "\n")
