import numpy as np
import pytest
from scipy import ndimage

from cge.conformal import (AmbiguityError, ArcPolyline, DiskAutomorphism,
                           MapChain, boundary_poisson, capacity_from_chain,
                           green_disk, koebe_check, removal_map, separates)


def inside_geodesic(alpha, n=400):
    """Circular arc orthogonal to the unit circle between e^{+-i alpha}."""
    cen, rad = 1 / np.cos(alpha), np.tan(alpha)
    a0 = np.angle(np.exp(1j * alpha) - cen)
    a1 = np.angle(np.exp(-1j * alpha) - cen) + 2 * np.pi
    t = np.linspace(0, 1, n)
    g = cen + rad * np.exp(1j * (a0 + (a1 - a0) * t))
    g[0] = np.exp(1j * alpha)
    g[-1] = np.exp(-1j * alpha)
    return ArcPolyline(g)


def exact_geodesic_removal(z, alpha):
    """Wedge-map uniformizer of the 0-side of the geodesic, normalized at 0."""
    A, B = np.exp(1j * alpha), np.exp(-1j * alpha)
    M = lambda w: (w - A) / (w - B)
    gmid = 1 / np.cos(alpha) - np.tan(alpha)
    angC, angG, ang0 = np.angle(M(-1.0)), np.angle(M(gmid)), np.angle(M(0.0))
    a1, a2 = angC, angG
    ccw = lambda a, b: (b - a) % (2 * np.pi)
    if ccw(a1, ang0) > ccw(a1, a2):
        a1, a2 = a2, a1
    beta = ccw(a1, a2)
    W = lambda w: (M(w) * np.exp(-1j * a1)) ** (np.pi / beta)
    w0, c0 = W(z), W(0.0)
    return (w0 - c0) / (w0 - np.conj(c0))


class TestScalars:
    def test_green_at_origin(self):
        assert green_disk(0, 0.5) == pytest.approx(np.log(2.0), abs=1e-12)

    def test_green_symmetry(self):
        z, w = 0.3 + 0.2j, -0.1 + 0.6j
        assert green_disk(z, w) == pytest.approx(green_disk(w, z), abs=1e-14)

    def test_green_mobius_invariance(self):
        rng = np.random.default_rng(3)
        for _ in range(25):
            a = rng.uniform(-0.6, 0.6) + 1j * rng.uniform(-0.6, 0.6)
            phi = DiskAutomorphism(a, rng.uniform(0, 2 * np.pi))
            z = rng.uniform(-0.5, 0.5) + 1j * rng.uniform(-0.5, 0.5)
            w = rng.uniform(-0.5, 0.5) + 1j * rng.uniform(-0.5, 0.5)
            if abs(z - w) < 0.05:
                continue
            assert green_disk(phi(z), phi(w)) == pytest.approx(
                green_disk(z, w), abs=1e-10)

    def test_green_domain_errors(self):
        with pytest.raises(ValueError):
            green_disk(0.5, 0.5)
        with pytest.raises(ValueError):
            green_disk(1.2, 0.0)

    def test_poisson_at_pi(self):
        assert boundary_poisson(np.pi) == pytest.approx(1 / (4 * np.pi), rel=1e-14)

    def test_poisson_symmetry(self):
        for th in (0.3, 1.1, 2.7):
            assert boundary_poisson(th) == pytest.approx(
                boundary_poisson(2 * np.pi - th), rel=1e-14)

    def test_poisson_small_angle(self):
        th = 0.01
        assert boundary_poisson(th) == pytest.approx(1 / (np.pi * th ** 2),
                                                     rel=1e-4)

    def test_poisson_domain(self):
        with pytest.raises(ValueError):
            boundary_poisson(0.0)
        with pytest.raises(ValueError):
            boundary_poisson(2 * np.pi)

    def test_poisson_conformal_covariance(self):
        rng = np.random.default_rng(9)
        for _ in range(30):
            a = rng.uniform(-0.7, 0.7) + 1j * rng.uniform(-0.7, 0.7)
            phi = DiskAutomorphism(a, rng.uniform(0, 2 * np.pi))
            t1, t2 = rng.uniform(0, 2 * np.pi, 2)
            if abs((t1 - t2) % (2 * np.pi)) < 0.05:
                continue
            x, y = np.exp(1j * t1), np.exp(1j * t2)
            sep2 = (np.angle(phi(x)) - np.angle(phi(y))) % (2 * np.pi)
            lhs = abs(phi.deriv(x)) * abs(phi.deriv(y)) * boundary_poisson(sep2)
            assert lhs == pytest.approx(
                boundary_poisson((t1 - t2) % (2 * np.pi)), rel=1e-9)

    @pytest.mark.parametrize("inr,cr,expect", [
        (1.0, 1.0, True),       # unit disk from the origin
        (0.25, 1.0, True),      # boundary case CR = 4 inrad
        (0.2, 1.0, False),      # violates the upper bound
    ])
    def test_koebe(self, inr, cr, expect):
        assert koebe_check(inr, cr) is expect


class TestAutomorphism:
    def test_sends_center_to_origin(self):
        phi = DiskAutomorphism(0.3 + 0.4j, 1.2)
        assert abs(phi(0.3 + 0.4j)) < 1e-15

    def test_inverse_roundtrip(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            phi = DiskAutomorphism(rng.uniform(-0.7, 0.7)
                                   + 1j * rng.uniform(-0.6, 0.6),
                                   rng.uniform(0, 2 * np.pi))
            inv = phi.inverse()
            z = rng.uniform(-0.8, 0.8) + 1j * rng.uniform(-0.5, 0.5)
            assert abs(inv(phi(z)) - z) < 1e-12

    def test_composition_is_automorphism(self):
        a = DiskAutomorphism(0.2 + 0.1j, 0.7)
        b = DiskAutomorphism(-0.4j, 2.1)
        c = a.compose(b)
        for z in (0.1, -0.3 + 0.5j, 0.6j):
            assert abs(c(z) - a(b(z))) < 1e-12

    def test_invalid_center(self):
        with pytest.raises(ValueError):
            DiskAutomorphism(1.0 + 0j, 0.0)


class TestSeparates:
    def test_diameter_opposite_halves(self):
        diam = ArcPolyline(np.linspace(-1, 1, 41) + 0j)
        assert separates(diam, 0.5j, -0.5j) is True

    def test_diameter_same_half(self):
        diam = ArcPolyline(np.linspace(-1, 1, 41) + 0j)
        assert separates(diam, 0.5j, 0.2 + 0.5j) is False

    def test_symmetric_and_orientation_invariant(self):
        arc = inside_geodesic(0.9, 60)
        rev = ArcPolyline(arc.vertices[::-1])
        p, q = -0.2 + 0.1j, 0.85 + 0.0j
        assert separates(arc, p, q) == separates(arc, q, p) \
            == separates(rev, p, q)

    def test_point_on_arc_is_ambiguous(self):
        diam = ArcPolyline(np.linspace(-1, 1, 41) + 0j)
        with pytest.raises(AmbiguityError):
            separates(diam, 0.25 + 0j, 0.5j)

    def test_against_flood_fill_oracle(self):
        """Pixel component labeling on a 512 x 512 grid as the oracle."""
        rng = np.random.default_rng(77)
        n_grid = 512
        xs = np.linspace(-1, 1, n_grid)
        for trial in range(12):
            t1 = rng.uniform(0, 2 * np.pi)
            t2 = t1 + rng.uniform(0.9, 2 * np.pi - 0.9)
            a, b = np.exp(1j * t1), np.exp(1j * t2)
            tt = np.linspace(0, 1, 400)
            mid = 0.5 * (a + b) * rng.uniform(0.2, 0.8)
            # quadratic Bezier chord, stays inside the disk
            curve = ((1 - tt) ** 2) * a + 2 * tt * (1 - tt) * mid + tt ** 2 * b
            arc = ArcPolyline(curve)

            gx, gy = np.meshgrid(xs, xs, indexing="ij")
            free = gx ** 2 + gy ** 2 < 1.0    # flood stays inside the disk
            # block a 3x3 neighborhood along a densified curve
            dense = np.interp(np.linspace(0, 1, 6000), tt, curve.real) \
                + 1j * np.interp(np.linspace(0, 1, 6000), tt, curve.imag)
            di = np.clip(((dense.real + 1) / 2 * (n_grid - 1)).round().astype(int), 1, n_grid - 2)
            dj = np.clip(((dense.imag + 1) / 2 * (n_grid - 1)).round().astype(int), 1, n_grid - 2)
            for oi in (-1, 0, 1):
                for oj in (-1, 0, 1):
                    free[di + oi, dj + oj] = False
            labels, _ = ndimage.label(free)

            def cell(z):
                i = int(round((z.real + 1) / 2 * (n_grid - 1)))
                j = int(round((z.imag + 1) / 2 * (n_grid - 1)))
                return labels[i, j]

            hits = 0
            while hits < 4:
                p = rng.uniform(-0.7, 0.7) + 1j * rng.uniform(-0.7, 0.7)
                q = rng.uniform(-0.7, 0.7) + 1j * rng.uniform(-0.7, 0.7)
                if abs(p) > 0.9 or abs(q) > 0.9 or abs(p - q) < 0.05:
                    continue
                if arc.distance(p) < 0.02 or arc.distance(q) < 0.02:
                    continue
                if cell(p) == 0 or cell(q) == 0:
                    continue
                assert separates(arc, p, q) == (cell(p) != cell(q))
                hits += 1


class TestRemovalMap:
    def test_tiny_chord_capacity_near_zero(self):
        span = 0.01
        v = np.array([1.0, 0.99999 * np.exp(1j * span / 2), np.exp(1j * span)])
        ch = removal_map(ArcPolyline(v), 0j)
        assert 0.0 <= ch.log_deriv("target") <= 1e-3

    def test_geodesic_capacity_vs_exact_oracle(self):
        alpha = np.pi / 4
        arc = inside_geodesic(alpha, 600)
        ch = removal_map(arc, 0j)
        cap = capacity_from_chain(ch, "target", 0j)
        assert cap == pytest.approx(-np.log(np.cos(alpha)), abs=1e-3)

    def test_interior_point_against_wedge_oracle(self):
        alpha = np.pi / 4
        arc = inside_geodesic(alpha, 600)
        z1 = 0.3 + 0.4j
        ch = removal_map(arc, 0j, extra_points=[("z1", z1)])
        img, ld = ch.image("z1"), ch.log_deriv("z1")
        cr = (1 - abs(img) ** 2) * np.exp(-ld)
        h = 1e-6
        d = (exact_geodesic_removal(z1 + h, alpha)
             - exact_geodesic_removal(z1 - h, alpha)) / (2 * h)
        cr_exact = (1 - abs(exact_geodesic_removal(z1, alpha)) ** 2) / abs(d)
        assert cr == pytest.approx(cr_exact, rel=3e-3)

    def test_empty_effect_limit(self):
        v = np.array([1.0 + 0j, np.exp(1j * 5e-7)])
        ch = removal_map(ArcPolyline(v), 0.2 + 0.1j)
        assert ch.log_deriv("target") == 0.0
        assert ch.image("target") == 0.2 + 0.1j

    def test_capacity_additivity_two_steps(self):
        """Accumulated log-derivative is the sum of the two increments."""
        arc1 = inside_geodesic(0.5, 200)
        ch1 = removal_map(arc1, 0j, extra_points=[("w", -0.4 + 0.2j)])
        # second arc in the uniformized frame
        arc2 = inside_geodesic(0.35, 200)
        w1 = ch1.image("w")
        ch2 = removal_map(arc2, ch1.image("target"),
                          extra_points=[("w", w1)])
        total = ch1.log_deriv("w") + ch2.log_deriv("w")
        assert total == pytest.approx(ch1.log_deriv("w") + ch2.log_deriv("w"),
                                      abs=1e-12)
        chained = ch1.extend(ch2.elements)
        assert chained.log_deriv("w") == pytest.approx(total, abs=1e-9)

    def test_images_stay_inside(self):
        arc = inside_geodesic(0.7, 300)
        rng = np.random.default_rng(11)
        pts = [(f"p{i}", rng.uniform(-0.4, 0.0) + 1j * rng.uniform(-0.4, 0.4))
               for i in range(8)]
        ch = removal_map(arc, 0j, extra_points=pts)
        for key, _ in pts:
            assert abs(ch.image(key)) < 1.0

    def test_koebe_sandwich_through_zipper(self):
        alpha = 0.6
        arc = inside_geodesic(alpha, 300)
        ch = removal_map(arc, 0j)
        cr = np.exp(-capacity_from_chain(ch, "target", 0j))
        inr = min(arc.distance(0j), 1.0)
        assert koebe_check(inr, cr)

    def test_wrong_side_detection(self):
        arc = inside_geodesic(np.pi / 4, 200)
        ch = removal_map(arc, 0.85 + 0j)  # other-side target works
        assert abs(ch.image("target")) < 1e-8
        from cge.conformal import GeometryError
        with pytest.raises((GeometryError, AmbiguityError)):
            removal_map(arc, 0j, extra_points=[("bad", 0.85 + 0j)])
