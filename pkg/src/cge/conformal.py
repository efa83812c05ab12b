"""Exact conformal primitives of the unit disk.

Mobius automorphisms, Green function, boundary Poisson kernel, Koebe
sandwich checks, arc separation tests, and numerical removal maps that
uniformize the complement of a boundary-to-boundary arc.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K

__all__ = [
    "DiskAutomorphism", "ArcPolyline", "MapChain",
    "green_disk", "boundary_poisson", "koebe_check", "separates",
    "removal_map", "AmbiguityError", "GeometryError",
    "ON_CURVE_TOL", "DEGENERATE_ANGLE",
]

ON_CURVE_TOL = 1e-9        # ambiguity tolerance for on-curve / on-circle tests
DEGENERATE_ANGLE = 1e-6    # arcs subtending less than this are treated as identity


class AmbiguityError(ValueError):
    """Geometric query within tolerance of a degenerate configuration.

    Callers running stochastic loops should treat this as a resample signal.
    """


class GeometryError(ValueError):
    """Invalid geometry (wrong side, degenerate polyline, ...)."""


# ----------------------------------------------------------------------
# scalars
# ----------------------------------------------------------------------

def green_disk(z: complex, w: complex) -> float:
    """Green function of the unit disk, log|*(1 - conj(z) w)/(z - w)|.

    Symmetric, conformally invariant, positive for distinct interior points.
    """
    z = complex(z)
    w = complex(w)
    if abs(z) >= 1.0 - ON_CURVE_TOL or abs(w) >= 1.0 - ON_CURVE_TOL:
        raise ValueError("green_disk requires points strictly inside the disk")
    if abs(z - w) < ON_CURVE_TOL:
        raise ValueError("green_disk diverges at coincident points")
    return float(np.log(abs((1.0 - np.conj(z) * w) / (z - w))))


def boundary_poisson(theta: float) -> float:
    """Boundary Poisson kernel between circle points at angular separation theta.

    Equals 1/(4 pi sin^2(theta/2)); diverges at separation 0 or 2 pi.
    """
    theta = float(theta)
    if not (0.0 < theta < 2.0 * np.pi):
        raise ValueError("separation must lie strictly in (0, 2pi)")
    s = np.sin(0.5 * theta)
    return float(1.0 / (4.0 * np.pi * s * s))


def koebe_check(inradius: float, conformal_radius: float, slack: float = 1e-9) -> bool:
    """True iff inradius <= CR <= 4*inradius up to slack."""
    if inradius <= 0.0 or conformal_radius <= 0.0:
        raise ValueError("radii must be positive")
    return (inradius - slack <= conformal_radius <= 4.0 * inradius + slack)


# ----------------------------------------------------------------------
# domain types
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class DiskAutomorphism:
    """z -> e^{i rotation} (z - center_preimage)/(1 - conj(center_preimage) z)."""

    center_preimage: complex = 0j
    rotation: float = 0.0

    def __post_init__(self):
        if abs(self.center_preimage) >= 1.0:
            raise ValueError("center_preimage must be inside the disk")

    def __call__(self, z):
        a = self.center_preimage
        return np.exp(1j * self.rotation) * (z - a) / (1.0 - np.conj(a) * z)

    def deriv(self, z):
        a = self.center_preimage
        return np.exp(1j * self.rotation) * (1.0 - abs(a) ** 2) / (1.0 - np.conj(a) * z) ** 2

    def inverse(self) -> "DiskAutomorphism":
        a = self.center_preimage
        rot = self.rotation
        return DiskAutomorphism(-a * np.exp(1j * rot), -rot)

    def compose(self, other: "DiskAutomorphism") -> "DiskAutomorphism":
        """self after other, as a single automorphism."""
        b = self(other(0j))
        # image of 0 under composition determines -a e^{i rho}; rotation from derivative
        d = self.deriv(other(0j)) * other.deriv(0j)
        rho = float(np.angle(d * (1.0 - abs(b) ** 2) / (1.0 - 0.0)))  # placeholder, fixed below
        # For w = T(z): T(0) = b, T'(0) known; automorphism with T(0)=b is
        # e^{i r}(z - a)/(1 - conj(a) z) with a = -b e^{-i r}; T'(0) = e^{i r}(1-|a|^2).
        rho = float(np.angle(d))
        a = -b * np.exp(-1j * rho)
        return DiskAutomorphism(a, rho)

    def as_element(self) -> np.ndarray:
        row = np.zeros(8)
        row[0] = K.AUTO
        row[1] = self.center_preimage.real
        row[2] = self.center_preimage.imag
        row[3] = self.rotation
        return row

    @staticmethod
    def centering(a: complex, rotation: float = 0.0) -> "DiskAutomorphism":
        """Automorphism sending a to the origin."""
        return DiskAutomorphism(complex(a), rotation)


@dataclass(frozen=True)
class ArcPolyline:
    """Discretized boundary-to-boundary arc, endpoints on the unit circle."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=complex)
        object.__setattr__(self, "vertices", v)
        if v.size < 2:
            raise ValueError("ArcPolyline needs at least 2 vertices")
        if abs(abs(v[0]) - 1.0) > ON_CURVE_TOL or abs(abs(v[-1]) - 1.0) > ON_CURVE_TOL:
            raise ValueError("ArcPolyline endpoints must lie on the unit circle")
        if v.size > 2 and np.abs(v[1:-1]).max() >= 1.0:
            raise ValueError("interior vertices must lie strictly inside the disk")
        if np.any(np.abs(np.diff(v)) == 0.0):
            raise ValueError("consecutive vertices must be distinct")

    @property
    def endpoints(self):
        return self.vertices[0], self.vertices[-1]

    def angular_span(self) -> float:
        """Angle subtended by the endpoints, in (0, 2 pi)."""
        a, b = self.endpoints
        return float(np.angle(b / a) % (2.0 * np.pi))

    def distance(self, p: complex) -> float:
        return float(K.dist_to_polyline(self.vertices, complex(p)))


@dataclass
class MapChain:
    """Composition of elementary maps with tracked marked points.

    elements is the encoded (n, 8) float array understood by the kernels.
    marked holds, per key, the current image and accumulated real
    log-derivative of the full chain at that point. Extension returns a new
    chain; existing chains are never mutated.
    """

    elements: np.ndarray = field(default_factory=lambda: np.zeros((0, 8)))
    marked: dict = field(default_factory=dict)

    def map_point(self, z: complex):
        """Image and complex derivative of the chain at z."""
        img, d = K.apply_chain(self.elements, complex(z))
        return img, d

    def map_points(self, zs):
        return K.apply_chain_many(self.elements, np.asarray(zs, dtype=complex))

    def pullback(self, zs):
        return K.apply_chain_inv_many(self.elements, np.asarray(zs, dtype=complex))

    def mark(self, key, z: complex) -> "MapChain":
        img, d = self.map_point(z)
        new = dict(self.marked)
        new[key] = (img, float(np.log(abs(d))) if self.elements.size else 0.0)
        if not self.elements.size:
            new[key] = (complex(z), 0.0)
        return MapChain(self.elements, new)

    def extend(self, elements: np.ndarray) -> "MapChain":
        """New chain with extra elements appended; marked points updated."""
        elements = np.atleast_2d(elements)
        new_marked = {}
        for key, (img, logd) in self.marked.items():
            im2, d2 = K.apply_chain(elements, img)
            new_marked[key] = (im2, logd + float(np.log(abs(d2))))
        return MapChain(np.vstack([self.elements, elements]) if self.elements.size
                        else elements.copy(), new_marked)

    def image(self, key):
        return self.marked[key][0]

    def log_deriv(self, key) -> float:
        return self.marked[key][1]


def _identity_chain(target, marks=()):
    ch = MapChain()
    for key, z in marks:
        ch = ch.mark(key, z)
    return ch


# ----------------------------------------------------------------------
# separation test
# ----------------------------------------------------------------------

def separates(arc: ArcPolyline, p: complex, q: complex, tol: float = ON_CURVE_TOL) -> bool:
    """True iff p and q lie in different components of the disk minus the arc.

    Decided by crossing parity of the segment pq against the arc; the
    closing boundary arc can never be crossed by a chord between interior
    points. Raises AmbiguityError if either point is within tol of the arc
    or an intersection is degenerate.
    """
    p = complex(p)
    q = complex(q)
    if abs(p) >= 1.0 - tol or abs(q) >= 1.0 - tol:
        raise AmbiguityError("query points must be strictly inside the disk")
    v = arc.vertices
    if K.dist_to_polyline(v, p) < tol or K.dist_to_polyline(v, q) < tol:
        raise AmbiguityError("query point within tolerance of the arc")
    count, ambiguous = K.segment_crossings(v, p, q, 1e-12)
    if ambiguous:
        raise AmbiguityError("segment intersection within tolerance of a vertex")
    return count % 2 == 1


# ----------------------------------------------------------------------
# removal map (zipper)
# ----------------------------------------------------------------------

def _chart_pole_angle(arc: ArcPolyline) -> float:
    """Boundary angle for the Cayley chart pole, away from both endpoints."""
    a, b = arc.endpoints
    pa = float(np.angle(a))
    span = float(np.angle(b / a) % (2.0 * np.pi))
    return pa + 0.5 * span + np.pi


def removal_map(arc: ArcPolyline, target: complex, extra_points=(),
                tol: float = ON_CURVE_TOL) -> MapChain:
    """Uniformize the component of (disk minus arc) containing target.

    Returns a MapChain sending that component onto the unit disk with
    target at the origin and positive derivative there. The marked point
    "target" carries the accumulated log-derivative, whose value is the
    capacity of the arc seen from target up to the sign convention
    cap = log|Phi'(target)| - log(1 - |Phi(target)|^2) + log(1 - |target|^2)
    (here Phi(target) = 0, so cap = log|Phi'(target)| + log(1 - |target|^2)).

    extra_points: iterable of (key, point) marked along for the ride; they
    must lie in the same component as target.
    """
    target = complex(target)
    if abs(target) >= 1.0 - tol:
        raise GeometryError("target must be strictly inside the disk")
    v = arc.vertices
    if K.dist_to_polyline(v, target) < tol:
        raise AmbiguityError("target within tolerance of the arc")

    span = arc.angular_span()
    a_end, b_end = arc.endpoints
    small_span = min(span, 2.0 * np.pi - span) < DEGENERATE_ANGLE
    if small_span and np.abs(v - 0.5 * (a_end + b_end)).max() < 1e-3:
        # capacity below the numerical floor: identity chain
        ch = MapChain().mark("target", target)
        for key, z in extra_points:
            ch = ch.mark(key, complex(z))
        return ch

    pole = _chart_pole_angle(arc)
    q = np.exp(1j * pole)
    if min(np.min(np.abs(v - q)), 1.0) < 1e-6:
        raise GeometryError("arc passes too close to the chart pole")

    # chart to H
    chart = np.zeros((1, 8))
    chart[0, 0] = K.CHART
    chart[0, 1] = pole
    a_img = 1j * (q + v) / (q - v)
    a_img = np.where(np.abs(a_img.imag) < 1e-13, a_img.real + 0j, a_img)

    # unzip interior vertices with vertical slits
    xs, ys, p_end = K.zipper_slits(a_img[1:].copy())
    rows = [chart[0]]
    for x, y in zip(xs, ys):
        row = np.zeros(8)
        row[0] = K.VSLIT
        row[1] = x
        row[2] = y
        rows.append(row)
    b_end = xs[-1] if len(xs) else float(a_img[0].real)

    # closing map, sign decided by the flowed target
    lo, hi = (b_end, p_end) if b_end <= p_end else (p_end, b_end)
    partial = np.array(rows)
    t_img, _ = K.apply_chain(partial, target)
    if hi - lo > 1e-12:
        m = (t_img - hi) / (t_img - lo)
        sign = 1.0 if 0.0 < np.angle(m) < 0.5 * np.pi else -1.0
        row = np.zeros(8)
        row[0] = K.CLOSE
        row[1] = lo
        row[2] = hi
        row[3] = sign
        rows.append(row)
        partial = np.array(rows)
        t_img, _ = K.apply_chain(partial, target)

    # back to the disk, normalized at the target image
    row = np.zeros(8)
    row[0] = K.UNCHART
    row[1] = t_img.real
    row[2] = t_img.imag
    rows.append(row)
    partial = np.array(rows)
    _, d = K.apply_chain(partial, target)
    rot = np.zeros(8)
    rot[0] = K.AUTO
    rot[3] = -float(np.angle(d))
    rows.append(rot)

    elems = np.array(rows)
    ch = MapChain(elems, {})
    img, d = K.apply_chain(elems, target)
    if abs(img) > 1e-8:
        raise GeometryError("normalization failed; target not sent to origin")
    ch.marked["target"] = (img, float(np.log(abs(d))))
    for key, z in extra_points:
        zi, dz = K.apply_chain(elems, complex(z))
        if abs(zi) >= 1.0 - 1e-9:
            raise GeometryError(f"extra point {key} is not on the target side")
        ch.marked[key] = (zi, float(np.log(abs(dz))))
    return ch


def capacity_from_chain(chain: MapChain, key, source_point: complex) -> float:
    """Capacity increment seen from the marked point.

    cap = -log CR(z; component) + log CR(z; disk)
        = log|Phi'(z)| - log(1-|Phi(z)|^2) + log(1-|z|^2).
    """
    img = chain.image(key)
    logd = chain.log_deriv(key)
    z = complex(source_point)
    return float(logd - np.log1p(-abs(img) ** 2) + np.log1p(-abs(z) ** 2))
