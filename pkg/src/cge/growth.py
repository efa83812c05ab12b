"""Cutoff aggregation of excursions with multi-target tracking.

One growth run maintains, per live component, a uniformizing frame (the
component mapped onto the unit disk, with its first tracked target at the
origin). Events arrive per component at the cutoff rate; each event samples
endpoint angles from the boundary kernel, grows the excursion as a radial
Loewner chain driven by the angle SDE (equivalent in law to a chordal arc
between the endpoints), and updates every tracked target:

- targets on the origin side flow through the chain's slit maps, which at
  absorption uniformize that side exactly;
- targets on the far side are handed to the polyline zipper
  (conformal.removal_map), which uniformizes their component and starts a
  child with fresh event clocks.

Capacity credited to a target is always the log-derivative of the event's
removal map at the target image (for the frame origin this coincides with
the chain's elapsed radial capacity). Randomness is drawn from streams
keyed by (root seed, run key, component id, event index, attempt), so a run
targeted at {z} and one at {z, w} with the same seed share every draw until
the disconnection event.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from ._rng import xoshiro_state
from .conformal import (AmbiguityError, ArcPolyline, GeometryError,
                        DiskAutomorphism, koebe_check, removal_map)

__all__ = [
    "BoundaryPair", "ExcursionEvent", "GrowthRecord", "GrowthError",
    "excursion_rate", "sample_endpoints", "sle_trace", "grow",
    "disconnection_mc", "shrinkage_stats", "box_dimension",
    "THETA_CUTOFF_DEFAULT",
]

THETA_CUTOFF_DEFAULT = 0.3
MIN_CUTOFF = 1e-4
SWALLOW_TOL = 1e-6       # target this close to the trace/boundary is disconnected
VERTEX_DENSITY = 200.0   # slit-map steps per unit of radial capacity
DCAP_MIN_FACTOR = 0.05   # extra refinement near absorption, dcap <= factor*sin^2(th/2)
MAX_RESAMPLE = 64

STEP_BASE_GROW = 0.005
EPS_ABS = 1e-5
T_GUARD_SDE = 200.0


class GrowthError(RuntimeError):
    pass


@dataclass(frozen=True)
class BoundaryPair:
    """Endpoint angles of one excursion, separation within the cutoff range."""

    angle_a: float   # growth end (the SLE starts here)
    angle_b: float   # force end (the arc closes up here)

    @property
    def separation(self) -> float:
        return float((self.angle_a - self.angle_b) % (2.0 * np.pi))

    def points(self):
        return np.exp(1j * self.angle_a), np.exp(1j * self.angle_b)


@dataclass
class ExcursionEvent:
    """One attached arc, in the frame of the component it grew in."""

    arrival_time: float
    component: int
    endpoints: BoundaryPair
    capacity_at_origin: float
    per_target_capacity: dict
    trace: ArcPolyline | None = None
    split: bool = False


@dataclass
class GrowthRecord:
    """Output of one growth run."""

    targets: list
    kappa: float
    theta_cutoff: float
    t_max: float
    seed: object
    trajectories: list          # per target: list of (time, -log CR)
    disconnection: np.ndarray   # pairwise matrix, inf if never within t_max
    events: list                # ExcursionEvents (traces only if retained)
    physical_arcs: list         # retained traces pulled back to the disk
    component_history: list     # (time, parent, kept ids, far ids, dead ids)
    hist_elements: np.ndarray | None = None   # component-0 chain (retained runs)
    hist_marks: list = field(default_factory=list)  # (event time, row count)
    n_events: int = 0
    resample_count: int = 0
    koebe_failures: int = 0
    koebe_checked: int = 0
    forced_disconnections: int = 0
    capped_sde: int = 0

    def final_log_cr(self, j: int) -> float:
        return self.trajectories[j][-1][1]

    def accumulated_capacity(self, j: int, t: float | None = None) -> float:
        """-log CR(z_j; D_t) + log CR(z_j; disk): the capacity subordinator."""
        traj = self.trajectories[j]
        base = traj[0][1]
        if t is None:
            return traj[-1][1] - base
        val = 0.0
        for s, y in traj:
            if s <= t:
                val = y
        return val - base


def excursion_rate(theta_cutoff: float) -> float:
    """Kernel mass of ordered boundary pairs at separation >= cutoff.

    Integrating 1/(4 pi sin^2(theta/2)) over both angles gives
    2 cot(theta_cutoff / 2) per unit process time.
    """
    if not (MIN_CUTOFF <= theta_cutoff <= np.pi):
        raise ValueError(f"theta_cutoff must lie in [{MIN_CUTOFF}, pi]")
    return 2.0 / math.tan(0.5 * theta_cutoff)


def separation_quantile(theta_cutoff: float, u):
    """Inverse CDF of the separation density 1/sin^2(theta/2) on the cutoff range."""
    c = 1.0 / math.tan(0.5 * theta_cutoff)
    return np.pi - 2.0 * np.arctan(c * (1.0 - 2.0 * np.asarray(u)))


def sample_endpoints(theta_cutoff: float, rng) -> BoundaryPair:
    """Draw one endpoint pair: rotation uniform, separation from the kernel."""
    if not (MIN_CUTOFF <= theta_cutoff <= np.pi):
        raise ValueError(f"theta_cutoff must lie in [{MIN_CUTOFF}, pi]")
    beta = rng.uniform(0.0, 2.0 * np.pi)
    theta = float(separation_quantile(theta_cutoff, rng.uniform()))
    return BoundaryPair((beta + theta) % (2.0 * np.pi), beta)


# ----------------------------------------------------------------------
# single excursions
# ----------------------------------------------------------------------

def _drive_excursion(kappa, pair: BoundaryPair, state,
                     step_base=STEP_BASE_GROW, density=VERTEX_DENSITY):
    theta0 = pair.separation
    t_guard = 50.0 if kappa == 0.0 else T_GUARD_SDE
    wang, dts, T, side, capped = K.excursion_driving(
        kappa, theta0, pair.angle_b, step_base, EPS_ABS, t_guard,
        1.0 / density, DCAP_MIN_FACTOR, state)
    return wang, dts, float(T), int(side), bool(capped)


TRACE_TAIL_CAP = 1e-4


def _trace_from_driving(pair: BoundaryPair, wang, dts,
                        tail_cap=None) -> ArcPolyline:
    x, y = pair.points()
    if tail_cap is None:
        tail_cap = TRACE_TAIL_CAP
    verts = K.chain_trace(wang, dts, x, y, tail_cap)
    # degenerate duplicates can appear next to the snapped endpoints
    keep = np.ones(verts.size, bool)
    keep[1:] = np.abs(np.diff(verts)) > 1e-13
    if not keep[-1]:
        keep[-1] = True
        keep[-2] = False
    return ArcPolyline(verts[keep])


def sle_trace(kappa: float, pair: BoundaryPair, rng_or_seed, key=(),
              density: float = VERTEX_DENSITY,
              step_base: float = STEP_BASE_GROW) -> ArcPolyline:
    """Sample one chordal excursion between the pair's endpoints.

    The curve is grown as radial SLE_kappa(kappa - 6) from angle_a with
    force point angle_b, which has the law of the chordal arc; the chain is
    run to absorption, so no capacity truncation or closing segment is
    involved. density controls slit-map steps per unit capacity.
    """
    if not (0.0 <= kappa < 4.0):
        raise ValueError("kappa must lie in [0, 4) for simple traces")
    st = rng_or_seed if isinstance(rng_or_seed, np.ndarray) \
        else xoshiro_state(rng_or_seed, key)
    wang, dts, T, side, capped = _drive_excursion(kappa, pair, st,
                                                  step_base, density)
    return _trace_from_driving(pair, wang, dts)


# ----------------------------------------------------------------------
# the growth engine
# ----------------------------------------------------------------------

@dataclass
class _Component:
    cid: int
    t: float
    target_ids: list            # indices into the global target list
    images: np.ndarray          # frame images, images[0] == 0
    logd: np.ndarray            # accumulated log|Phi'| per target
    hist: np.ndarray | None     # frame <- physical chain rows, for pullbacks
    spawner: np.ndarray | None = None   # per-component stream spawner
    event_index: int = 0


class _Run:
    def __init__(self, targets, kappa, theta_cutoff, t_max, seed, run_key,
                 retain_traces, koebe, step_base, density, collect_events,
                 max_events=None, stop_when_disconnected=False):
        self.kappa = kappa
        self.cutoff = theta_cutoff
        self.t_max = t_max
        self.seed = seed
        self.run_key = tuple(run_key)
        self.rate = excursion_rate(theta_cutoff)
        self.retain = retain_traces
        self.koebe = koebe
        self.collect_events = collect_events
        self.step_base = step_base
        self.density = density
        self.targets = [complex(z) for z in targets]
        n = len(self.targets)
        self.trajectories = [[] for _ in range(n)]
        self.disc = np.full((n, n), np.inf)
        np.fill_diagonal(self.disc, 0.0)
        self.events = []
        self.physical_arcs = []
        self.history = []
        self.n_events = 0
        self.resamples = 0
        self.koebe_failures = 0
        self.koebe_checked = 0
        self.forced = 0
        self.capped = 0
        self.next_cid = 0
        self.comp0_hist = None
        self.hist_marks = []
        self.max_events = max_events
        self.stop_when_disconnected = stop_when_disconnected

    # -- streams ------------------------------------------------------
    # Each component derives a spawner stream from (seed, run_key, cid); one
    # event consumes exactly one 4-word spawn from it, so runs sharing a
    # seed consume identical draws while their component structure agrees.
    # Resample attempts remix the event state without touching the spawner.
    def _spawner(self, cid):
        return xoshiro_state(self.seed, self.run_key + (cid,))

    # -- bookkeeping ---------------------------------------------------
    def _record(self, j, t, neg_log_cr):
        self.trajectories[j].append((t, neg_log_cr))

    def _neg_log_cr(self, comp, k):
        w = comp.images[k]
        return comp.logd[k] - math.log1p(-abs(w) ** 2) \
            + math.log1p(-abs(self.targets[comp.target_ids[k]]) ** 2)

    def _disconnect_pairs(self, ids_a, ids_b, t):
        for i in ids_a:
            for j in ids_b:
                self.disc[i, j] = min(self.disc[i, j], t)
                self.disc[j, i] = self.disc[i, j]

    # -- main loop ------------------------------------------------------
    def run(self):
        if not self.targets:
            return
        cid = self._new_cid()
        comp = _Component(
            cid=cid, t=0.0,
            target_ids=list(range(len(self.targets))),
            images=np.zeros(len(self.targets), complex),
            logd=np.zeros(len(self.targets)),
            hist=np.zeros((0, 8)) if self.retain else None,
            spawner=self._spawner(cid))
        # initial frame: automorphism sending target 0 to the origin
        a0 = DiskAutomorphism.centering(self.targets[0])
        comp.images = np.array([a0(z) for z in self.targets], complex)
        comp.images[0] = 0.0
        comp.logd = np.array([math.log(abs(a0.deriv(z))) for z in self.targets])
        if self.retain:
            comp.hist = a0.as_element()[None, :]
        for k, j in enumerate(comp.target_ids):
            self._record(j, 0.0, self._neg_log_cr(comp, k))
        stack = [comp]
        while stack:
            comp = stack.pop()
            children = self._evolve(comp)
            stack.extend(children)

    def _new_cid(self):
        cid = self.next_cid
        self.next_cid += 1
        return cid

    def _all_disconnected(self):
        n = self.disc.shape[0]
        if n < 2:
            return False
        iu = np.triu_indices(n, 1)
        return bool(np.all(np.isfinite(self.disc[iu])))

    def _evolve(self, comp):
        while True:
            if self.max_events is not None and self.n_events >= self.max_events:
                return []
            if self.stop_when_disconnected and self._all_disconnected():
                return []
            base = K.spawn_state(comp.spawner)
            st = base.copy()
            wait = -math.log(K.rng_uniform(st)) / self.rate
            if comp.t + wait > self.t_max:
                return []
            comp.t += wait
            children = self._one_event(comp, base, st)
            comp.event_index += 1
            if children is not None:
                return children

    def _one_event(self, comp, base, st):
        """Process one event in comp's frame. Returns child list on split."""
        for attempt in range(MAX_RESAMPLE):
            if attempt > 0:
                self.resamples += 1
                st = K.remix_state(base, attempt)
            beta = 2.0 * np.pi * K.rng_uniform(st)
            theta = float(separation_quantile(self.cutoff, K.rng_uniform(st)))
            pair = BoundaryPair((beta + theta) % (2.0 * np.pi), beta)
            try:
                return self._apply_event(comp, pair, st)
            except AmbiguityError:
                continue
        raise GrowthError(f"resample limit reached in component {comp.cid}")

    def _apply_event(self, comp, pair, st):
        wang, dts, T, side, capped = _drive_excursion(
            self.kappa, pair, st, self.step_base, self.density)
        if capped:
            self.capped += 1
        n_tr = len(comp.target_ids)
        need_trace = self.retain or self.koebe or n_tr > 1
        trace = _trace_from_driving(pair, wang, dts) if need_trace else None

        # side of each target: crossing parity against the frame origin
        on_origin_side = np.ones(n_tr, bool)
        if n_tr > 1:
            for k in range(1, n_tr):
                w = comp.images[k]
                cnt, amb = K.segment_crossings(trace.vertices, w, 0j, 1e-12)
                if amb or K.dist_to_polyline(trace.vertices, w) < SWALLOW_TOL:
                    raise AmbiguityError("target within tolerance of the arc")
                on_origin_side[k] = cnt % 2 == 0

        # flow origin-side targets through the chain
        idx0 = np.nonzero(on_origin_side)[0]
        pts = comp.images[idx0]
        imgs, logds, alive = K.flow_points(wang, dts, pts)
        cap_inc = {}
        forced_dead = []
        for pos, k in enumerate(idx0):
            j = comp.target_ids[k]
            if k == 0:
                inc = T
                comp.logd[0] += T
                cap_inc[j] = inc
                continue
            if not alive[pos] or abs(imgs[pos]) > 1.0 - SWALLOW_TOL:
                forced_dead.append(k)
                continue
            inc = logds[pos] - math.log1p(-abs(imgs[pos]) ** 2) \
                + math.log1p(-abs(comp.images[k]) ** 2)
            if self.koebe:
                inr = min(K.dist_to_polyline(trace.vertices, comp.images[k]),
                          1.0 - abs(comp.images[k]))
                cr_event = (1.0 - abs(imgs[pos]) ** 2) * math.exp(-logds[pos])
                self.koebe_checked += 1
                if not koebe_check(inr, cr_event):
                    self.koebe_failures += 1
            cap_inc[j] = inc
            comp.images[k] = imgs[pos]
            comp.logd[k] += logds[pos]
        if self.koebe:
            inr0 = min(K.dist_to_polyline(trace.vertices, 0j), 1.0)
            self.koebe_checked += 1
            if not koebe_check(inr0, math.exp(-T)):
                self.koebe_failures += 1

        far = [k for k in range(n_tr) if not on_origin_side[k]]

        self.n_events += 1
        ev = ExcursionEvent(comp.t, comp.cid, pair, T, cap_inc,
                            trace if self.retain else None,
                            split=bool(far) or bool(forced_dead))
        if self.collect_events:
            self.events.append(ev)
        if self.retain:
            phys = K.apply_chain_inv_many(comp.hist, trace.vertices)
            self.physical_arcs.append((comp.t, comp.cid, phys))

        # record trajectories for survivors on the origin side
        for k in idx0:
            if k in forced_dead:
                continue
            j = comp.target_ids[k]
            self._record(j, comp.t, self._neg_log_cr(comp, k))

        children = []
        far_ids = [comp.target_ids[k] for k in far]
        dead_ids = [comp.target_ids[k] for k in forced_dead]
        keep = [k for k in range(n_tr)
                if on_origin_side[k] and k not in forced_dead]
        keep_ids = [comp.target_ids[k] for k in keep]

        if far:
            self._disconnect_pairs(keep_ids + dead_ids, far_ids, comp.t)
            child = self._make_child(comp, trace, far, cap_inc)
            children.append(child)
        if forced_dead:
            self.forced += 1
            self._disconnect_pairs(
                keep_ids, dead_ids, comp.t)
            for a in dead_ids:
                for b in dead_ids:
                    if a != b:
                        self.disc[a, b] = min(self.disc[a, b], comp.t)
        if far or forced_dead:
            self.history.append((comp.t, comp.cid, keep_ids,
                                 far_ids, dead_ids))

        # shrink the parent to the surviving origin-side targets
        if len(keep) != n_tr:
            sel = np.array(keep, int)
            comp.target_ids = keep_ids
            comp.images = comp.images[sel]
            comp.logd = comp.logd[sel]
        if self.retain:
            rows = np.zeros((len(wang), 8))
            rows[:, 0] = K.RSLIT
            rows[:, 1] = wang
            rows[:, 2] = dts
            comp.hist = np.vstack([comp.hist, rows])
            if comp.cid == 0:
                self.comp0_hist = comp.hist
                self.hist_marks.append((comp.t, comp.hist.shape[0]))

        if children or not comp.target_ids:
            # return children plus the surviving parent for further evolution
            out = children
            if comp.target_ids:
                out = out + [comp]
            return out
        return None   # event loop continues in this component

    def _make_child(self, comp, trace, far, cap_inc):
        far_ids = [comp.target_ids[k] for k in far]
        anchor = comp.images[far[0]]
        extras = [(("t", k), comp.images[k]) for k in far[1:]]
        try:
            zc = removal_map(trace, anchor, extra_points=extras)
        except (AmbiguityError, GeometryError) as exc:
            raise AmbiguityError(f"zipper failed on far side: {exc}") from exc
        cid = self._new_cid()
        child = _Component(
            cid=cid, t=comp.t, target_ids=far_ids,
            images=np.zeros(len(far), complex),
            logd=np.zeros(len(far)),
            hist=None, spawner=self._spawner(cid), event_index=0)
        child.images[0] = 0.0
        child.logd[0] = comp.logd[far[0]] + zc.log_deriv("target")
        cap_inc[far_ids[0]] = zc.log_deriv("target") \
            + math.log1p(-abs(anchor) ** 2)
        for pos, k in enumerate(far[1:], start=1):
            key = ("t", k)
            child.images[pos] = zc.image(key)
            child.logd[pos] = comp.logd[k] + zc.log_deriv(key)
            cap_inc[comp.target_ids[k]] = zc.log_deriv(key) \
                - math.log1p(-abs(zc.image(key)) ** 2) \
                + math.log1p(-abs(comp.images[k]) ** 2)
        if self.retain:
            child.hist = np.vstack([comp.hist, zc.elements])
        for pos, j in enumerate(far_ids):
            self._record(j, comp.t, self._neg_log_cr(child, pos))
        return child


def grow(targets, kappa: float, theta_cutoff: float, t_max: float, seed,
         run_key=(0,), retain_traces: bool = False, koebe: bool = False,
         collect_events: bool = False, step_base: float = STEP_BASE_GROW,
         density: float = VERTEX_DENSITY,
         max_events: int | None = None,
         stop_when_disconnected: bool = False) -> GrowthRecord:
    """Run the cutoff growth process tracking the given targets.

    All randomness derives from (seed, run_key); reruns are bit-identical.
    retain_traces additionally keeps every arc in physical coordinates
    (needed for rendering and box counting); koebe performs the sandwich
    check at every event.
    """
    if not (0.0 <= kappa < 4.0):
        raise ValueError("growth requires kappa in [0, 4)")
    targets = [complex(z) for z in targets]
    for z in targets:
        if abs(z) >= 1.0:
            raise ValueError("targets must lie strictly inside the disk")
    for i, z in enumerate(targets):
        for w in targets[:i]:
            if abs(z - w) < 1e-12:
                raise ValueError("targets must be distinct")
    run = _Run(targets, kappa, theta_cutoff, t_max, seed, run_key,
               retain_traces, koebe, step_base, density, collect_events,
               max_events=max_events,
               stop_when_disconnected=stop_when_disconnected)
    run.run()
    return GrowthRecord(
        targets=targets, kappa=kappa, theta_cutoff=theta_cutoff,
        t_max=t_max, seed=(seed, tuple(run_key)),
        trajectories=run.trajectories, disconnection=run.disc,
        events=run.events, physical_arcs=run.physical_arcs,
        component_history=run.history, n_events=run.n_events,
        resample_count=run.resamples, koebe_failures=run.koebe_failures,
        koebe_checked=run.koebe_checked, forced_disconnections=run.forced,
        capped_sde=run.capped, hist_elements=run.comp0_hist,
        hist_marks=run.hist_marks)


# ----------------------------------------------------------------------
# statistics built on growth runs
# ----------------------------------------------------------------------

def disconnection_mc(z, w, kappa, theta_cutoff, replicas, seed,
                     t_hard=None, koebe=False):
    """Mean and standard error of the disconnection time T(z, w).

    Replicas exceeding t_hard are censored at t_hard and flagged; the
    default horizon is far beyond the Green-function prediction so
    censoring is exponentially rare.
    """
    z, w = complex(z), complex(w)
    if abs(z - w) < 1e-12:
        raise ValueError("z and w must be distinct")
    if t_hard is None:
        from .conformal import green_disk
        from .exponent import lambda_prime_truncated
        t_hard = 10.0 * (green_disk(z, w)
                         / lambda_prime_truncated(kappa, theta_cutoff) + 2.0)
    times = np.empty(replicas)
    censored = 0
    for r in range(replicas):
        rec = grow([z, w], kappa, theta_cutoff, t_hard, seed,
                   run_key=("disc", r), koebe=koebe,
                   stop_when_disconnected=True)
        t = rec.disconnection[0, 1]
        if not np.isfinite(t):
            t = t_hard
            censored += 1
        times[r] = t
    return (float(times.mean()),
            float(times.std(ddof=1) / np.sqrt(replicas)),
            censored)


def domain_outradius(rec: GrowthRecord, t: float, n_boundary: int = 96) -> float:
    """Max modulus of the boundary of D_t^0, from the retained chain.

    Valid for single-target runs with retain_traces; pulls a circle sample
    back through the chain accumulated up to time t. At t before the first
    event, D = disk and the answer is 1.
    """
    if rec.hist_elements is None:
        raise ValueError("run must retain traces")
    n_rows = 1   # the initial automorphism row
    for te, rows in rec.hist_marks:
        if te <= t:
            n_rows = rows
    circle = np.exp(2j * np.pi * np.arange(n_boundary) / n_boundary) \
        * (1.0 - 1e-9)
    bnd = K.apply_chain_inv_many(rec.hist_elements[:n_rows], circle)
    return float(np.abs(bnd).max())


def shrinkage_stats(kappa, theta_cutoff, t_grid, replicas, seed,
                    radii=(0.25, 0.5, 0.75), n_boundary=96):
    """Empirical P[D_t^0 not within B(0, r)] on a (t, r) grid.

    The domain boundary is probed by pulling a circle sample back through
    the accumulated chain; the max modulus is the outradius of D_t^0
    (0 is interior, so containment in B(0, r) is exactly outradius <= r).
    """
    t_grid = sorted(t_grid)
    out = np.zeros((len(t_grid), len(radii)))
    outradii = np.zeros((replicas, len(t_grid)))
    for r in range(replicas):
        rec = grow([0j], kappa, theta_cutoff, max(t_grid), seed,
                   run_key=("shrink", r), retain_traces=True)
        for i, t in enumerate(t_grid):
            outradii[r, i] = domain_outradius(rec, t, n_boundary)
    for i in range(len(t_grid)):
        for jr, rad in enumerate(radii):
            out[i, jr] = np.mean(outradii[:, i] > rad)
    return {
        "t_grid": list(t_grid), "radii": list(radii),
        "p_not_contained": out,
        "outradii": outradii,
    }


def box_dimension(arcs, scales=None, min_boxes=100, resample_step=5e-4):
    """Box-counting slope of a family of polylines in the disk.

    Polylines are resampled to at most resample_step spacing, the occupied
    dyadic boxes counted per scale, and the log-log slope fit by least
    squares. Returns (estimate, details dict with an 'unreliable' flag).
    Accepts a GrowthRecord (its retained physical arcs) or an iterable of
    vertex arrays.
    """
    if isinstance(arcs, GrowthRecord):
        if not arcs.physical_arcs:
            raise ValueError("record retains no traces")
        arcs = [a for _, _, a in arcs.physical_arcs]
    pts = []
    for arc in arcs:
        v = np.asarray(arc, complex)
        seg = np.abs(np.diff(v))
        for i in range(v.size - 1):
            n = max(1, int(seg[i] / resample_step))
            tt = np.arange(n) / n
            pts.append(v[i] + tt * (v[i + 1] - v[i]))
        pts.append(v[-1:])
    p = np.concatenate(pts)
    if scales is None:
        scales = [2.0 ** -k for k in range(3, 9)]
    counts = []
    for eps in scales:
        ij = np.round(np.c_[p.real, p.imag] / eps).astype(np.int64)
        counts.append(len(np.unique(ij, axis=0)))
    counts = np.array(counts, float)
    x = np.log(1.0 / np.array(scales))
    slope, icept = np.polyfit(x, np.log(counts), 1)
    return float(slope), {
        "scales": list(scales), "counts": counts.tolist(),
        "unreliable": counts[-1] < min_boxes,
    }
