"""Numba kernels: SDE paths, slit-map chains, zipper steps, parity tests.

Everything here is internal. Elementary conformal maps are encoded as rows
of a float64 array of width 8:

    [code, p0, p1, p2, 0, 0, 0, 0]

    code 0  disk automorphism   z -> e^{i*p2} (z - a)/(1 - conj(a) z),  a = p0 + i p1
    code 1  radial slit step    z -> W phinv(e^{dt} phi(z/W)),  W = e^{i*p0}, dt = p1
    code 2  Cayley chart U->H   z -> i (q + z)/(q - z),  q = e^{i*p0} (pole)
    code 3  vertical slit in H  z -> x + sqrt((z-x)^2 + y^2),  (x, y) = (p0, p1)
    code 4  closing map in H    m = (z-hi)/(z-lo); z -> sign * m^2,  (lo, hi, sign)
    code 5  Cayley back H->U    z -> (z - t)/(z - conj(t)),  t = p0 + i p1

phi(w) = w/(1+w)^2 solves the radial Loewner flow for constant driving.
All forward maps send (a subset of) the domain onto the full disk / half
plane; inverses embed back. Chains compose top row first.
"""

from __future__ import annotations

import numpy as np
from numba import njit

# map-element codes
AUTO, RSLIT, CHART, VSLIT, CLOSE, UNCHART = 0, 1, 2, 3, 4, 5

TWO_PI = 2.0 * np.pi


# ----------------------------------------------------------------------
# xoshiro256++ and normals
# ----------------------------------------------------------------------

@njit(cache=True, inline="always")
def _next_u64(s):
    x = s[0] + s[3]
    r = ((x << np.uint64(23)) | (x >> np.uint64(41))) + s[0]
    t = s[1] << np.uint64(17)
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = (s[3] << np.uint64(45)) | (s[3] >> np.uint64(19))
    return r


@njit(cache=True, inline="always")
def rng_uniform(s):
    return (np.float64(_next_u64(s) >> np.uint64(11)) + 0.5) * (2.0 ** -53)


@njit(cache=True, inline="always")
def rng_normal(s):
    u1 = rng_uniform(s)
    u2 = rng_uniform(s)
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(TWO_PI * u2)


# ----------------------------------------------------------------------
# theta SDE: d theta = sqrt(kappa) dB + (kappa-4)/2 cot(theta/2) dt
# ----------------------------------------------------------------------

@njit(cache=True)
def theta_hitting_time(kappa, theta0, step_base, eps_abs, t_max, state):
    """Absorption time of the angle SDE at {0, 2pi}.

    Returns (T, side, capped): side 0 for absorption at 0, 1 for 2pi.
    kappa == 0 integrates the drift ODE with RK4. For kappa > 0 a Brownian
    bridge correction accounts for intra-step boundary hits, which a purely
    discrete check would miss (it otherwise biases hitting times up by a
    step-size independent percentage, since steps scale with the boundary
    distance).
    """
    th = theta0
    t = 0.0
    if th < eps_abs:
        return 0.0, 0, False
    if th > TWO_PI - eps_abs:
        return 0.0, 1, False
    sq = np.sqrt(kappa)
    while True:
        s2 = np.sin(0.5 * th)
        dt = min(step_base, 0.1 * s2 * s2 / max(kappa, 1.0))
        if t + dt > t_max:
            return t_max, 0 if th < np.pi else 1, True
        if kappa > 0.0:
            # stochastic Heun: trapezoidal drift, same Brownian increment
            b0 = 0.5 * (kappa - 4.0) * np.cos(0.5 * th) / s2
            dW = sq * np.sqrt(dt) * rng_normal(state)
            pred = th + b0 * dt + dW
            if eps_abs < pred < TWO_PI - eps_abs:
                b1 = 0.5 * (kappa - 4.0) * np.cos(0.5 * pred) / np.sin(0.5 * pred)
                th_new = th + 0.5 * (b0 + b1) * dt + dW
            else:
                th_new = pred
            t += dt
            if th_new <= eps_abs:
                return t, 0, False
            if th_new >= TWO_PI - eps_abs:
                return t, 1, False
            # bridge hit probabilities at the two boundaries
            p_lo = np.exp(-2.0 * th * th_new / (kappa * dt))
            if rng_uniform(state) < p_lo:
                return t - 0.5 * dt, 0, False
            p_hi = np.exp(-2.0 * (TWO_PI - th) * (TWO_PI - th_new) / (kappa * dt))
            if rng_uniform(state) < p_hi:
                return t - 0.5 * dt, 1, False
            th = th_new
        else:
            k1 = -2.0 * np.cos(0.5 * th) / np.sin(0.5 * th)
            a = th + 0.5 * dt * k1
            k2 = -2.0 * np.cos(0.5 * a) / np.sin(0.5 * a)
            b = th + 0.5 * dt * k2
            k3 = -2.0 * np.cos(0.5 * b) / np.sin(0.5 * b)
            c = th + dt * k3
            k4 = -2.0 * np.cos(0.5 * c) / np.sin(0.5 * c)
            th = th + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            t += dt
            if th <= eps_abs:
                return t, 0, False
            if th >= TWO_PI - eps_abs:
                return t, 1, False


@njit(cache=True)
def theta_hitting_batch(kappa, theta0, n, step_base, eps_abs, t_max, state):
    times = np.empty(n)
    sides = np.empty(n, np.int64)
    capped = np.zeros(n, np.bool_)
    for i in range(n):
        times[i], sides[i], capped[i] = theta_hitting_time(
            kappa, theta0, step_base, eps_abs, t_max, state)
    return times, sides, capped


@njit(cache=True)
def theta_hitting_coupled(kappa, th_a, th_b, step_base, eps_abs, t_max, state):
    """Two paths driven by the same Brownian increments; returns both times."""
    ta = -1.0
    tb = -1.0
    t = 0.0
    a = th_a
    b = th_b
    sq = np.sqrt(kappa)
    while (ta < 0.0 or tb < 0.0) and t < t_max:
        ths = min(a if ta < 0.0 else np.pi, b if tb < 0.0 else np.pi)
        ths = min(ths, TWO_PI - (a if ta < 0.0 else np.pi),
                  TWO_PI - (b if tb < 0.0 else np.pi))
        s2 = np.sin(0.5 * ths)
        dt = min(step_base, 0.1 * s2 * s2 / max(kappa, 1.0))
        dw = sq * np.sqrt(dt) * rng_normal(state)
        if ta < 0.0:
            a = a + 0.5 * (kappa - 4.0) * np.cos(0.5 * a) / np.sin(0.5 * a) * dt + dw
        if tb < 0.0:
            b = b + 0.5 * (kappa - 4.0) * np.cos(0.5 * b) / np.sin(0.5 * b) * dt + dw
        t += dt
        if ta < 0.0 and (a <= eps_abs or a >= TWO_PI - eps_abs):
            ta = t
        if tb < 0.0 and (b <= eps_abs or b >= TWO_PI - eps_abs):
            tb = t
    if ta < 0.0:
        ta = t_max
    if tb < 0.0:
        tb = t_max
    return ta, tb


# ----------------------------------------------------------------------
# radial slit map: phi(w) = w/(1+w)^2, step z -> W phinv(e^{dt} phi(z/W))
# ----------------------------------------------------------------------

@njit(cache=True, inline="always")
def _phi(w):
    return w / ((1.0 + w) * (1.0 + w))


@njit(cache=True, inline="always")
def _phi_inv(s):
    # branch with |w| <= 1; the two roots are reciprocal
    if abs(s) < 1e-3:
        # Catalan series, avoids cancellation near the origin
        return s * (1.0 + s * (2.0 + s * (5.0 + s * (14.0 + s * (42.0 + s * 132.0)))))
    r = np.sqrt(1.0 - 4.0 * s)
    w = (1.0 - 2.0 * s - r) / (2.0 * s)
    if abs(w) > 1.0:
        w = 1.0 / w
    return w


@njit(cache=True, inline="always")
def _phi_deriv(w):
    op = 1.0 + w
    return (1.0 - w) / (op * op * op)


@njit(cache=True, inline="always")
def rslit_fwd(z, wang, dt):
    W = np.exp(1j * wang)
    zt = z * np.conj(W)
    g = _phi_inv(np.exp(dt) * _phi(zt))
    return W * g


@njit(cache=True, inline="always")
def rslit_fwd_d(z, wang, dt):
    """Forward image and complex derivative of one radial slit step."""
    W = np.exp(1j * wang)
    zt = z * np.conj(W)
    g = _phi_inv(np.exp(dt) * _phi(zt))
    d = np.exp(dt) * _phi_deriv(zt) / _phi_deriv(g)
    return W * g, d


@njit(cache=True, inline="always")
def rslit_inv(y, wang, dt):
    W = np.exp(1j * wang)
    yt = y * np.conj(W)
    g = _phi_inv(np.exp(-dt) * _phi(yt))
    return W * g


# ----------------------------------------------------------------------
# excursion driving: consolidated slit steps with capacity-midpoint driving
# ----------------------------------------------------------------------

DCAP_FLOOR = 2e-5    # map steps never refine below this capacity


@njit(cache=True)
def excursion_driving(kappa, theta0, v0, step_base, eps_abs, t_max,
                      dcap_base, cmap, state):
    """Simulate one excursion's (theta, v) driving pair to absorption.

    The fine SDE path is consolidated into slit-map steps of capacity about
    clip(cmap sin^2(theta/2), DCAP_FLOOR, dcap_base); each consolidated step
    records the driving angle w = v + theta at its capacity midpoint
    (second order in step size for the arc geometry). Fine steps are kept
    below half a map step so the midpoint is genuine.

    Returns (wang, dts, T, side, capped) with len(wang) == len(dts).
    """
    cap_w = 256
    wang = np.empty(cap_w)
    dts = np.empty(cap_w)
    nw = 0

    th = theta0
    v = v0
    t = 0.0
    sq = np.sqrt(kappa)
    side = 0
    capped = False

    # consolidation state
    step_target = min(dcap_base, max(cmap * np.sin(0.5 * th) ** 2, DCAP_FLOOR))
    acc = 0.0
    wmid = v + th
    have_mid = False

    while True:
        if th <= eps_abs or th >= TWO_PI - eps_abs or t >= t_max:
            side = 0 if th < np.pi else 1
            capped = t >= t_max
            break
        s2 = np.sin(0.5 * th)
        dt = min(step_base, 0.1 * s2 * s2 / max(kappa, 1.0))
        dt = min(dt, 0.49 * step_target)
        if t + dt > t_max:
            dt = t_max - t
        cot = np.cos(0.5 * th) / s2
        bridged = False
        if kappa > 0.0:
            b0 = 0.5 * (kappa - 4.0) * cot
            dW = sq * np.sqrt(dt) * rng_normal(state)
            pred = th + b0 * dt + dW
            if eps_abs < pred < TWO_PI - eps_abs:
                b1 = 0.5 * (kappa - 4.0) * np.cos(0.5 * pred) / np.sin(0.5 * pred)
                th_new = th + 0.5 * (b0 + b1) * dt + dW
            else:
                th_new = pred
            if eps_abs < th_new < TWO_PI - eps_abs:
                if rng_uniform(state) < np.exp(-2.0 * th * th_new / (kappa * dt)):
                    th_new = 0.0
                    bridged = True
                elif rng_uniform(state) < np.exp(
                        -2.0 * (TWO_PI - th) * (TWO_PI - th_new) / (kappa * dt)):
                    th_new = TWO_PI
                    bridged = True
        else:
            k1 = -2.0 * cot
            a = th + 0.5 * dt * k1
            k2 = -2.0 * np.cos(0.5 * a) / np.sin(0.5 * a)
            b = th + 0.5 * dt * k2
            k3 = -2.0 * np.cos(0.5 * b) / np.sin(0.5 * b)
            c = th + dt * k3
            k4 = -2.0 * np.cos(0.5 * c) / np.sin(0.5 * c)
            th_new = th + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if bridged:
            dt = 0.5 * dt
        if eps_abs < th_new < TWO_PI - eps_abs:
            v = v - 0.5 * (cot + np.cos(0.5 * th_new) / np.sin(0.5 * th_new)) * dt
        else:
            v = v - cot * dt
        th = th_new
        t += dt

        acc += dt
        if not have_mid and acc >= 0.5 * step_target:
            wmid = v + th
            have_mid = True
        if acc >= step_target or th <= eps_abs or th >= TWO_PI - eps_abs or t >= t_max:
            if not have_mid:
                wmid = v + th
            if nw == cap_w:
                cap_w *= 2
                w2 = np.empty(cap_w)
                d2 = np.empty(cap_w)
                w2[:nw] = wang[:nw]
                d2[:nw] = dts[:nw]
                wang = w2
                dts = d2
            wang[nw] = wmid
            dts[nw] = acc
            nw += 1
            acc = 0.0
            have_mid = False
            if eps_abs < th < TWO_PI - eps_abs:
                step_target = min(dcap_base,
                                  max(cmap * np.sin(0.5 * th) ** 2, DCAP_FLOOR))

    return wang[:nw].copy(), dts[:nw].copy(), t, side, capped


@njit(cache=True)
def spawn_state(spawner):
    """Next 4-word child state from a spawner stream (advanced in place)."""
    out = np.empty(4, np.uint64)
    for i in range(4):
        out[i] = _next_u64(spawner)
    if out[0] | out[1] | out[2] | out[3] == np.uint64(0):
        out[0] = np.uint64(0x9E3779B97F4A7C15)
    return out


@njit(cache=True)
def remix_state(base, salt):
    """Deterministic variant of a state (splitmix64 finalizer per word)."""
    out = np.empty(4, np.uint64)
    for i in range(4):
        z = base[i] + np.uint64(salt + 1) * np.uint64(0x9E3779B97F4A7C15)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        out[i] = z ^ (z >> np.uint64(31))
    if out[0] | out[1] | out[2] | out[3] == np.uint64(0):
        out[0] = np.uint64(0x9E3779B97F4A7C15)
    return out


@njit(cache=True)
def flow_points(wang, dts, pts):
    """Flow points through the slit chain, tracking log|derivative|.

    Returns (images, logd, alive). A point that lands on or inside a slit
    is marked dead; its image/logd stop updating at that step.
    """
    n = pts.shape[0]
    out = pts.copy()
    logd = np.zeros(n)
    alive = np.ones(n, np.bool_)
    for k in range(wang.shape[0]):
        W = np.exp(1j * wang[k])
        edt = np.exp(dts[k])
        for i in range(n):
            if not alive[i]:
                continue
            z = out[i]
            if abs(z) < 1e-14:
                logd[i] += dts[k]
                continue
            zt = z * np.conj(W)
            s = edt * _phi(zt)
            # swallowed: s on the cut [1/4, inf)
            if abs(s.imag) < 1e-12 and s.real >= 0.25:
                alive[i] = False
                continue
            g = _phi_inv(s)
            if abs(g) >= 1.0 - 1e-12:
                alive[i] = False
                continue
            d = edt * _phi_deriv(zt) / _phi_deriv(g)
            out[i] = W * g
            logd[i] += np.log(abs(d))
    return out, logd, alive


@njit(cache=True)
def chain_trace(wang, dts, x_start, y_end, tail_cap):
    """Physical trace of the excursion: pull each step's driving point back
    through all earlier steps. O(n^2). Returns vertices from x to y.

    Tips with remaining capacity below tail_cap are dropped: they crowd
    exponentially close to the attachment point and their long pullbacks
    lose precision; the final vertex snaps to the exact endpoint instead.
    """
    n = wang.shape[0]
    total = 0.0
    for k in range(n):
        total += dts[k]
    tr = np.empty(n + 2, np.complex128)
    tr[0] = x_start
    m = 1
    used = 0.0
    for k in range(n):
        used += dts[k]
        if total - used < tail_cap and k < n - 1:
            break
        y = np.exp(1j * wang[k]) * _phi_inv(np.exp(-dts[k]) * 0.25)
        for j in range(k - 1, -1, -1):
            y = rslit_inv(y, wang[j], dts[j])
        tr[m] = y
        m += 1
    tr[m] = y_end
    return tr[:m + 1]


# ----------------------------------------------------------------------
# segment / polyline crossing parity
# ----------------------------------------------------------------------

@njit(cache=True, inline="always")
def _cross(ax, ay, bx, by):
    return ax * by - ay * bx


@njit(cache=True)
def segment_crossings(poly, p, q, tol):
    """Number of proper crossings of segment pq with the polyline.

    Counts sign transitions of the polyline across the line through p, q,
    restricted to crossing points interior to the segment. Exact for
    crossings at polyline vertices (a vertex on the line belongs to a zero
    run; the run is a crossing iff the flanking sides differ).

    Returns (count, ambiguous). ambiguous is set when a crossing falls
    within tol of p or q, or when a zero run straddles a segment endpoint.
    """
    n = poly.shape[0]
    px, py = p.real, p.imag
    dx, dy = q.real - px, q.imag - py
    L2 = dx * dx + dy * dy
    L = np.sqrt(L2)
    thresh = tol * L

    count = 0
    ambiguous = False
    prev_sign = 0
    run_start = -1  # start of the current zero run, -1 if none
    for i in range(n):
        vx = poly[i].real - px
        vy = poly[i].imag - py
        s = _cross(dx, dy, vx, vy) / L  # signed distance to the pq line
        if abs(s) <= thresh:
            if run_start < 0:
                run_start = i
            continue
        sign = 1 if s > 0.0 else -1
        if prev_sign != 0 and sign != prev_sign:
            # polyline crossed the line somewhere in (last nonzero .. i)
            if run_start >= 0:
                # crossing at on-line vertices: parameter from their projections
                t_lo = 1e300
                t_hi = -1e300
                for j in range(run_start, i):
                    tj = (poly[j].real - px) * dx + (poly[j].imag - py) * dy
                    tj /= L2
                    t_lo = min(t_lo, tj)
                    t_hi = max(t_hi, tj)
                inside_lo = tol < t_lo < 1.0 - tol
                inside_hi = tol < t_hi < 1.0 - tol
                if inside_lo != inside_hi:
                    ambiguous = True
                if inside_lo and inside_hi:
                    count += 1
                elif (0.0 - tol < t_lo < tol) or (1.0 - tol < t_hi < 1.0 + tol):
                    ambiguous = True
            else:
                ax = poly[i - 1].real
                ay = poly[i - 1].imag
                sx = poly[i].real - ax
                sy = poly[i].imag - ay
                denom = _cross(dx, dy, sx, sy)
                t = _cross(ax - px, ay - py, sx, sy) / denom
                if tol < t < 1.0 - tol:
                    count += 1
                elif -tol <= t <= tol or 1.0 - tol <= t <= 1.0 + tol:
                    ambiguous = True
        elif prev_sign != 0 and sign == prev_sign and run_start >= 0:
            # tangency: polyline touched the line and bounced back; no crossing,
            # but flag if the touch happens at the segment endpoints
            for j in range(run_start, i):
                tj = ((poly[j].real - px) * dx + (poly[j].imag - py) * dy) / L2
                if -tol <= tj <= tol or 1.0 - tol <= tj <= 1.0 + tol:
                    ambiguous = True
        prev_sign = sign
        run_start = -1
    return count, ambiguous


@njit(cache=True)
def dist_to_polyline(poly, p):
    best = 1e300
    px, py = p.real, p.imag
    for i in range(poly.shape[0] - 1):
        ax, ay = poly[i].real, poly[i].imag
        bx, by = poly[i + 1].real, poly[i + 1].imag
        sx, sy = bx - ax, by - ay
        L2 = sx * sx + sy * sy
        if L2 == 0.0:
            d2 = (px - ax) ** 2 + (py - ay) ** 2
        else:
            t = ((px - ax) * sx + (py - ay) * sy) / L2
            if t < 0.0:
                t = 0.0
            elif t > 1.0:
                t = 1.0
            d2 = (px - ax - t * sx) ** 2 + (py - ay - t * sy) ** 2
        if d2 < best:
            best = d2
    return np.sqrt(best)


# ----------------------------------------------------------------------
# chain evaluation (encoded elementary maps)
# ----------------------------------------------------------------------

@njit(cache=True, inline="always")
def _sqrt_slit(w, y):
    # (w) -> w * sqrt(1 + (y/w)^2), branch cut only on the slit itself
    r = y / w
    return w * np.sqrt(1.0 + r * r)


@njit(cache=True)
def apply_chain(elems, z):
    """Apply encoded chain to one point; returns (image, complex derivative)."""
    d = 1.0 + 0.0j
    for r in range(elems.shape[0]):
        code = elems[r, 0]
        if code == 0.0:
            a = elems[r, 1] + 1j * elems[r, 2]
            rot = np.exp(1j * elems[r, 3])
            den = 1.0 - np.conj(a) * z
            d *= rot * (1.0 - abs(a) ** 2) / (den * den)
            z = rot * (z - a) / den
        elif code == 1.0:
            z2, dd = rslit_fwd_d(z, elems[r, 1], elems[r, 2])
            d *= dd
            z = z2
        elif code == 2.0:
            q = np.exp(1j * elems[r, 1])
            den = q - z
            d *= 2j * q / (den * den)
            z = 1j * (q + z) / den
        elif code == 3.0:
            x = elems[r, 1]
            y = elems[r, 2]
            w = z - x
            g = _sqrt_slit(w, y)
            d *= w / g
            z = x + g
        elif code == 4.0:
            lo = elems[r, 1]
            hi = elems[r, 2]
            sgn = elems[r, 3]
            m = (z - hi) / (z - lo)
            dm = (hi - lo) / ((z - lo) * (z - lo))
            d *= sgn * 2.0 * m * dm
            z = sgn * m * m
        elif code == 5.0:
            tt = elems[r, 1] + 1j * elems[r, 2]
            den = z - np.conj(tt)
            d *= (tt - np.conj(tt)) / (den * den)
            z = (z - tt) / den
    return z, d


@njit(cache=True)
def apply_chain_inv(elems, z):
    """Apply the inverse chain (no derivative tracking)."""
    for r in range(elems.shape[0] - 1, -1, -1):
        code = elems[r, 0]
        if code == 0.0:
            a = elems[r, 1] + 1j * elems[r, 2]
            w = z * np.exp(-1j * elems[r, 3])
            z = (w + a) / (1.0 + np.conj(a) * w)
        elif code == 1.0:
            z = rslit_inv(z, elems[r, 1], elems[r, 2])
        elif code == 2.0:
            q = np.exp(1j * elems[r, 1])
            z = q * (z - 1j) / (z + 1j)
        elif code == 3.0:
            x = elems[r, 1]
            y = elems[r, 2]
            w = z - x
            rr = y / w
            z = x + w * np.sqrt(1.0 - rr * rr)
        elif code == 4.0:
            lo = elems[r, 1]
            hi = elems[r, 2]
            if elems[r, 3] > 0.0:
                m = np.sqrt(z)
            else:
                m = -np.sqrt(-z)
            z = (lo * m - hi) / (m - 1.0)
        elif code == 5.0:
            tt = elems[r, 1] + 1j * elems[r, 2]
            z = (z * np.conj(tt) - tt) / (z - 1.0)
    return z


@njit(cache=True)
def apply_chain_many(elems, zs):
    out = np.empty(zs.shape[0], np.complex128)
    der = np.empty(zs.shape[0], np.complex128)
    for i in range(zs.shape[0]):
        out[i], der[i] = apply_chain(elems, zs[i])
    return out, der


@njit(cache=True)
def apply_chain_inv_many(elems, zs):
    out = np.empty(zs.shape[0], np.complex128)
    for i in range(zs.shape[0]):
        out[i] = apply_chain_inv(elems, zs[i])
    return out


@njit(cache=True)
def zipper_slits(a):
    """Unzip chart-image vertices with vertical slit maps.

    a holds the images of polyline vertices 1..m (vertex 0 is already on R).
    Returns slit parameters (xs, ys) for vertices 1..m-1 and the final real
    position of vertex m after all slits.
    """
    m = a.shape[0]
    xs = np.empty(m - 1)
    ys = np.empty(m - 1)
    arr = a.copy()
    for k in range(m - 1):
        w = arr[k]
        x = w.real
        y = abs(w.imag)
        xs[k] = x
        ys[k] = y
        if y > 0.0:
            for j in range(k + 1, m):
                ww = arr[j] - x
                if abs(ww) < 1e-14:
                    ww = 1e-14 + 0j
                arr[j] = x + _sqrt_slit(ww, y)
    return xs, ys, arr[m - 1].real


@njit(cache=True)
def theta_hitting_theta_array(kappa, theta0s, step_base, eps_abs, t_max, state):
    """Hitting times for an array of starting angles (one path each)."""
    n = theta0s.shape[0]
    times = np.empty(n)
    sides = np.empty(n, np.int64)
    for i in range(n):
        times[i], sides[i], _ = theta_hitting_time(
            kappa, theta0s[i], step_base, eps_abs, t_max, state)
    return times, sides
