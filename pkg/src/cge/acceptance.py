"""Acceptance criteria as importable runners.

Each runner returns a dict with keys: name, passed (bool), measured,
target, tolerance, details, seconds. The CLI validate command and the
pytest acceptance module both consume these, so the shipped binary and the
test suite execute the identical checks. Tolerances come from the packaged
JSON file; a malformed file raises ToleranceSchemaError (exit code 3 in the
CLI).

Two criteria are known to be unattainable as specified and fail honestly;
their details record companion measurements demonstrating the underlying
property at reachable scale (see the repository notes):

- c03: Lambda*_2(alpha)/alpha tends to 0.75 like 0.75 - 2 sqrt(C/alpha)
  with C about 2.5, so at alpha = 50 the ratio is about 0.35; the +-5 percent
  band requires alpha of order 10^4.
- c13: the truncated exponent at kappa = 4.5 grows like cutoff^{-2/9}; it
  reaches about 86 at cutoff 1e-6, and 10^3 would require cutoff near 1e-11.
"""

from __future__ import annotations

import importlib.resources as _res
import json
import math
import time

import numpy as np
from scipy import stats as sstats

from . import capacity as cap_mod
from . import exponent as exp_mod
from . import field as field_mod
from . import growth as growth_mod
from . import subordinator as sub_mod
from ._rng import stream
from .conformal import green_disk
from .hypergeom import DIVERGED, CapacityLaplaceParams, capacity_laplace

__all__ = ["ToleranceSchemaError", "load_tolerances", "run_all", "RUNNERS",
           "DEFAULT_SEED"]

DEFAULT_SEED = 20260809


class ToleranceSchemaError(ValueError):
    pass


_REQUIRED = {f"c{i:02d}" for i in range(1, 15)}


def load_tolerances(path=None) -> dict:
    if path is None:
        text = _res.files("cge").joinpath("acceptance_tolerances.json").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    try:
        tol = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ToleranceSchemaError(f"tolerance file is not valid JSON: {exc}")
    if tol.get("schema") != "cge-acceptance-tolerances-v1":
        raise ToleranceSchemaError("unknown tolerance schema")
    present = {k.split("_")[0] for k in tol if k.startswith("c")}
    missing = _REQUIRED - present
    if missing:
        raise ToleranceSchemaError(f"missing criteria: {sorted(missing)}")
    for key, val in tol.items():
        if key != "schema" and not isinstance(val, dict):
            raise ToleranceSchemaError(f"criterion block {key} must be an object")
    return tol


def _result(name, passed, measured, target, tolerance, details, t0):
    return {
        "name": name, "passed": bool(passed), "measured": measured,
        "target": target, "tolerance": tolerance, "details": details,
        "seconds": round(time.time() - t0, 2),
    }


# ----------------------------------------------------------------------

def c01_laplace_mc(tol, seed=DEFAULT_SEED):
    """Analytic vs Monte Carlo capacity Laplace transform, two step sizes."""
    t0 = time.time()
    cfg = tol["c01_laplace_mc"]
    kappa, lam, n = cfg["kappa"], cfg["lam"], int(cfg["n"])
    theta = np.pi
    ana = capacity_laplace(CapacityLaplaceParams(kappa, lam), theta)
    runs = []
    ok = True
    for i, sb in enumerate(cfg["step_bases"]):
        r = cap_mod.mc_capacity_laplace(kappa, lam, theta, n, seed,
                                        key=("c01", i), step_base=sb)
        z = abs(r.estimate - ana) / r.stderr
        runs.append({"step_base": sb, "estimate": r.estimate,
                     "stderr": r.stderr, "z": z})
        ok = ok and z <= cfg["sigma"]
    # Richardson consistency between the two step sizes
    se = math.hypot(runs[0]["stderr"], runs[1]["stderr"])
    gap = abs(runs[0]["estimate"] - runs[1]["estimate"]) / se
    ok = ok and gap <= cfg["sigma"]
    return _result("c01_laplace_mc", ok,
                   [r["estimate"] for r in runs], ana,
                   f"<= {cfg['sigma']} stderr each and between steps",
                   {"runs": runs, "step_gap_sigma": gap}, t0)


def c02_blowup(tol, seed=DEFAULT_SEED):
    """Finite below, divergent above, boundary localized by bisection."""
    t0 = time.time()
    cfg = tol["c02_blowup"]
    kappa = cfg["kappa"]
    v_lo = exp_mod.lambda_exponent(kappa, cfg["finite_at"])
    v_hi = exp_mod.lambda_exponent(kappa, cfg["divergent_at"])
    lo, hi = cfg["finite_at"], cfg["divergent_at"]
    while hi - lo > 1e-4:
        mid = 0.5 * (lo + hi)
        if np.isfinite(exp_mod.lambda_exponent(kappa, mid)):
            lo = mid
        else:
            hi = mid
    boundary = 0.5 * (lo + hi)
    ok = (np.isfinite(v_lo) and v_lo > 0.0 and v_hi == DIVERGED
          and abs(boundary - cfg["boundary"]) <= cfg["localize"])
    return _result("c02_blowup", ok, boundary, cfg["boundary"],
                   cfg["localize"],
                   {"Lambda(0.74)": v_lo, "Lambda(0.76)": "inf"}, t0)


def c03_legendre_asymptote(tol, seed=DEFAULT_SEED):
    """Lambda*_2(50)/50 against the +-5 percent band around 0.75."""
    t0 = time.time()
    cfg = tol["c03_legendre_asymptote"]
    kappa, alpha = cfg["kappa"], cfg["alpha"]
    ratio = exp_mod.legendre(kappa, alpha) / alpha
    ok = cfg["lo"] <= ratio <= cfg["hi"]
    # companion: the asymptote is reachable at much larger alpha
    big = 2.0e4
    ratio_big = exp_mod.legendre(kappa, big) / big
    return _result("c03_legendre_asymptote", ok, ratio, 0.75,
                   [cfg["lo"], cfg["hi"]],
                   {"alpha": alpha, "companion_alpha": big,
                    "companion_ratio": ratio_big,
                    "companion_in_band": cfg["lo"] <= ratio_big <= cfg["hi"],
                    "note": "ratio converges like 0.75 - 2 sqrt(C/alpha), "
                            "C ~ 2.5; alpha = 50 cannot meet the band"}, t0)


def c04_alpha_min(tol, seed=DEFAULT_SEED):
    t0 = time.time()
    cfg = tol["c04_alpha_min"]
    kappa = cfg["kappa"]
    am = exp_mod.alpha_min(kappa)
    resid = abs(2.0 * am - exp_mod.legendre(kappa, am))
    lp = exp_mod.lambda_prime_fd(kappa)
    ok = resid < cfg["residual"] and 0.0 < am < lp
    return _result("c04_alpha_min", ok, am, "root of 2a = Lambda*(a)",
                   cfg["residual"],
                   {"residual": resid, "lambda_prime": lp}, t0)


def c05_lambda_prime(tol, seed=DEFAULT_SEED):
    t0 = time.time()
    cfg = tol["c05_lambda_prime"]
    rows = []
    ok = True
    for kappa in cfg["kappas"]:
        try:
            r = exp_mod.lambda_prime_zero(kappa, seed=seed,
                                          tol_rel=cfg["rel_tol"])
            rows.append({"kappa": kappa, "mc": r.value, "fd": r.value_fd,
                         "gap": r.rel_gap})
        except exp_mod.NumericInconsistencyError as exc:
            rows.append({"kappa": kappa, "error": str(exc)})
            ok = False
    return _result("c05_lambda_prime", ok,
                   [r.get("gap") for r in rows], "agreement",
                   cfg["rel_tol"], {"rows": rows}, t0)


def c06_slln(tol, seed=DEFAULT_SEED):
    t0 = time.time()
    cfg = tol["c06_slln"]
    kappa, cutoff, t = cfg["kappa"], cfg["cutoff"], cfg["t"]
    target = exp_mod.lambda_prime_truncated(kappa, cutoff)
    spec = sub_mod.capacity_jump_spec(kappa, cutoff, seed)
    vals = np.array([
        sub_mod.simulate(spec, t, stream(seed, ("c06", r))).final / t
        for r in range(int(cfg["replicas"]))])
    measured = float(vals.mean())
    rel = abs(measured - target) / target
    ok = rel <= cfg["rel_tol"]
    return _result("c06_slln", ok, measured, target, cfg["rel_tol"],
                   {"rel_err": rel,
                    "stderr": float(vals.std(ddof=1) / np.sqrt(vals.size))}, t0)


def c07_disconnection(tol, seed=DEFAULT_SEED):
    t0 = time.time()
    cfg = tol["c07_disconnection"]
    kappa, cutoff = cfg["kappa"], cfg["cutoff"]
    lp = exp_mod.lambda_prime_truncated(kappa, cutoff)
    gs, means, errs, koebe = [], [], [], [0, 0]
    for i, x in enumerate(cfg["levels"]):
        w = math.exp(-x)
        m, se, cens = growth_mod.disconnection_mc(
            0j, w, kappa, cutoff, int(cfg["replicas"]),
            seed, koebe=True)
        gs.append(green_disk(0j, w))
        means.append(m)
        errs.append(se)
    slope = np.polyfit(gs, means, 1)[0]
    rel = abs(slope - 1.0 / lp) * lp
    ok = rel <= cfg["rel_tol"]
    return _result("c07_disconnection", ok, slope, 1.0 / lp, cfg["rel_tol"],
                   {"levels": cfg["levels"], "greens": gs, "means": means,
                    "stderrs": errs, "rel_err": rel}, t0)


def c08_koebe(tol, seed=DEFAULT_SEED):
    """Sandwich holds at every step of a dedicated battery of runs."""
    t0 = time.time()
    checked = failures = 0
    battery = [
        ([0j], 0.0, 0.5, 4.0),
        ([0j], 2.0, 0.3, 2.0),
        ([0.3, -0.4j], 2.0, 0.3, 6.0),
        ([0.5, -0.5, 0.4j], 1.0, 0.4, 6.0),
    ]
    for i, (targets, kappa, cutoff, tmax) in enumerate(battery):
        for r in range(8):
            rec = growth_mod.grow(targets, kappa, cutoff, tmax, seed,
                                  run_key=("c08", i, r), koebe=True)
            checked += rec.koebe_checked
            failures += rec.koebe_failures
    ok = failures == 0 and checked > 0
    return _result("c08_koebe", ok, failures, 0, "exact (1e-9 slack)",
                   {"checked": checked}, t0)


def c09_overshoot(tol, seed=DEFAULT_SEED):
    t0 = time.time()
    cfg = tol["c09_overshoot"]
    spec = sub_mod.LevySpec.exponential(cfg["beta"])
    rep = sub_mod.overshoot_tail(spec, cfg["lambda0"], cfg["x_grid"],
                                 cfg["y_grid"], int(cfg["n"]), seed)
    c_star = rep["c_star"]
    h1, h2 = rep["c_star_halves"]
    stable = abs(h1 - h2) <= 0.2 * max(c_star, 1e-12) + 0.01
    ok = np.isfinite(c_star) and c_star <= cfg["c_bound"] and stable
    return _result("c09_overshoot", ok, c_star, f"<= {cfg['c_bound']}",
                   "finite, stable in n",
                   {"halves": [h1, h2], "tail": np.asarray(rep["tail"]).tolist()},
                   t0)


def _dimension_estimate(kappa, cutoff, arcs, seed, density=200.0):
    rate = growth_mod.excursion_rate(cutoff)
    t_max = 3.0 * arcs / rate
    rec = growth_mod.grow([0j], kappa, cutoff, t_max, seed,
                          run_key=("dim", int(kappa * 10)),
                          retain_traces=True, koebe=True,
                          max_events=arcs, density=density)
    est, det = growth_mod.box_dimension(rec)
    det["n_arcs"] = len(rec.physical_arcs)
    det["koebe"] = [rec.koebe_failures, rec.koebe_checked]
    return est, det


def c10_dimension(tol, seed=DEFAULT_SEED, include_long=False):
    t0 = time.time()
    cfg = tol["c10_dimension"]
    est, det = _dimension_estimate(cfg["kappa_short"], 0.5,
                                   int(cfg["arcs"]), seed)
    ok = cfg["lo_short"] <= est <= cfg["hi_short"] and not det["unreliable"]
    details = {"short": det, "short_estimate": est}
    target = "1 + kappa/8"
    if include_long:
        est2, det2 = _dimension_estimate(cfg["kappa_long"], 0.3,
                                         2 * int(cfg["arcs"]), seed)
        ok = ok and cfg["lo_long"] <= est2 <= cfg["hi_long"]
        details["long"] = det2
        details["long_estimate"] = est2
    return _result("c10_dimension", ok, est, target,
                   [cfg["lo_short"], cfg["hi_short"]], details, t0)


def c11_field_cov(tol, seed=DEFAULT_SEED):
    t0 = time.time()
    cfg = tol["c11_field_cov"]
    z, w, t = complex(cfg["z"]), complex(cfg["w"]), cfg["t"]
    reps = int(cfg["replicas"])
    weights = field_mod.WeightSpec.point_mass(1.0, 1.0)
    hzw = np.empty((reps, 2))
    tmin = np.empty(reps)
    for r in range(reps):
        rec = growth_mod.grow([z, w], cfg["kappa"], cfg["cutoff"],
                              t, seed, run_key=("c11", r),
                              stop_when_disconnected=True)
        tree = field_mod.build_tree(rec)
        hzw[r] = field_mod.sample_field(tree, weights, t,
                                        stream(seed, ("c11f", r)))
        T = rec.disconnection[0, 1]
        tmin[r] = min(T, t)
    cov = float(np.cov(hzw.T)[0, 1])
    tgt = float(tmin.mean())
    se_t = float(tmin.std(ddof=1) / np.sqrt(reps))
    prod = (hzw[:, 0] - hzw[:, 0].mean()) * (hzw[:, 1] - hzw[:, 1].mean())
    se_c = float(prod.std(ddof=1) / np.sqrt(reps))
    sig = abs(cov - tgt) / math.hypot(se_c, se_t)
    ok = sig <= cfg["sigma"]
    return _result("c11_field_cov", ok, cov, tgt, f"{cfg['sigma']} stderr",
                   {"sigma_gap": sig, "se_cov": se_c, "se_T": se_t}, t0)


def c12_conformal_ks(tol, seed=DEFAULT_SEED):
    t0 = time.time()
    cfg = tol["c12_conformal_ks"]
    reps = int(cfg["replicas"])
    t = cfg["t"]

    def ensemble(target, tag):
        out = np.empty(reps)
        for r in range(reps):
            rec = growth_mod.grow([target], cfg["kappa"], cfg["cutoff"], t,
                                  seed, run_key=(tag, r), koebe=True)
            out[r] = rec.accumulated_capacity(0)
        return out

    a = ensemble(0j, "c12a")
    b = ensemble(0.5 + 0j, "c12b")
    ks = sstats.ks_2samp(a, b)
    ok = ks.pvalue >= cfg["alpha"]
    return _result("c12_conformal_ks", ok, float(ks.pvalue),
                   f">= {cfg['alpha']}", "two-sample KS at 1 percent",
                   {"statistic": float(ks.statistic),
                    "means": [float(a.mean()), float(b.mean())]}, t0)


def c13_divergence(tol, seed=DEFAULT_SEED):
    t0 = time.time()
    cfg = tol["c13_divergence"]
    vals = [exp_mod.lambda_truncated(cfg["kappa"], cfg["lam"], tc)
            for tc in cfg["cutoffs"]]
    monotone = all(vals[i + 1] > vals[i] for i in range(len(vals) - 1))
    ok = monotone and vals[-1] > cfg["threshold"]
    # companion: growth exponent matches the analytic power cutoff^{-2(c-1/2)}
    x = np.log(cfg["cutoffs"])
    fit = np.polyfit(x[-3:], np.log(vals[-3:]), 1)[0]
    c = 1.5 - 4.0 / cfg["kappa"]
    return _result("c13_divergence", ok, vals[-1],
                   f"> {cfg['threshold']}", "monotone growth",
                   {"values": vals, "monotone": monotone,
                    "measured_log_slope": float(fit),
                    "analytic_log_slope": -(2.0 * c - 1.0),
                    "note": "growth like cutoff^{-2/9} reaches 10^3 only "
                            "near cutoff 1e-11"}, t0)


def c14_determinism(tol, seed=DEFAULT_SEED):
    """Byte-identical reruns of the stochastic commands."""
    import subprocess
    import sys
    import tempfile
    from pathlib import Path
    t0 = time.time()
    pairs = []
    with tempfile.TemporaryDirectory() as td:
        td = Path(td)
        for tag, args in {
            "capacity-mc": ["capacity-mc", "--kappa", "2", "--lambda", "0.25",
                            "--replicas", "2000", "--seed", "7"],
            "grow": ["grow", "--kappa", "0", "--cutoff", "0.5",
                     "--t-max", "2.0", "--seed", "7"],
            "subordinator": ["subordinator", "--replicas", "500", "--seed", "7"],
        }.items():
            outs = []
            for run in (0, 1):
                out = td / f"{tag}-{run}"
                cmd = [sys.executable, "-m", "cge.cli"] + args + ["--out", str(out)]
                subprocess.run(cmd, check=True, capture_output=True)
                blob = b"".join(
                    p.read_bytes() for p in sorted(out.rglob("*")) if p.is_file())
                outs.append(blob)
            pairs.append((tag, outs[0] == outs[1]))
    ok = all(same for _, same in pairs)
    return _result("c14_determinism", ok, dict(pairs), "byte-identical",
                   "exact", {}, t0)


RUNNERS = [
    c01_laplace_mc, c02_blowup, c03_legendre_asymptote, c04_alpha_min,
    c05_lambda_prime, c06_slln, c07_disconnection, c08_koebe, c09_overshoot,
    c10_dimension, c11_field_cov, c12_conformal_ks, c13_divergence,
    c14_determinism,
]


def run_all(tol=None, seed=DEFAULT_SEED, include_long=False, report=print):
    tol = load_tolerances() if tol is None else tol
    results = []
    for fn in RUNNERS:
        if fn is c10_dimension:
            res = fn(tol, seed, include_long=include_long)
        else:
            res = fn(tol, seed)
        results.append(res)
        if report:
            flag = "PASS" if res["passed"] else "FAIL"
            report(f"[{flag}] {res['name']}: measured={res['measured']} "
                   f"target={res['target']} ({res['seconds']}s)")
    return results
