import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cpring import analysis as an
from cpring import closed_forms as cf
from cpring.closed_forms import BodyGeometry
from cpring.quadrature import Tolerances


def test_ring_torsion_free_heights():
    tf = an.ring_torsion_free()
    assert (tf.h1, tf.h2) == pytest.approx((0.4778468, 1.6872055), abs=1e-7)
    for h in tf:
        assert 40 * h**4 - 123 * h**2 + 26 == pytest.approx(0, abs=1e-10)
    assert an.matches_published("ring_torsion_free", tuple(tf))


def test_plate_torsion_free_heights():
    tf = an.plate_torsion_free()
    assert (tf.h1, tf.h2) == pytest.approx((0.6060114, 3.4350279), abs=1e-7)
    for h in tf:
        assert cf.annulus_iso_aniso(h, math.inf)[1] == pytest.approx(0, abs=1e-12)


def test_quadratic_roots_are_stable():
    # roots 1e-8 and 1e8: the naive formula loses the small one entirely
    r = an._positive_quadratic_roots(1.0, -(1e8 + 1e-8), 1.0)
    assert r == pytest.approx([1e-8, 1e8], rel=1e-12)


@settings(max_examples=20)
@given(st.floats(0, math.pi), st.floats(0, math.pi), st.sampled_from(["ring", "plate"]), st.integers(0, 1))
def test_energy_is_orientation_blind_at_torsion_free_heights(t1, t2, kind, which):
    if kind == "ring":
        h = tuple(an.ring_torsion_free())[which]
        e = cf.ring_energy
    else:
        h = tuple(an.plate_torsion_free())[which]
        e = cf.plate_energy
    scale = abs(e(h, 0.0))
    assert abs(e(h, t1) - e(h, t2)) <= 1e-12 * scale


BS = np.geomspace(1.0001, 1e4, 50)


def _heights_over_b():
    sets = [an.annulus_torsion_free(b) for b in BS]
    return np.array([s.h1 for s in sets]), np.array([s.h2 for s in sets])


def test_annulus_inner_height_monotone_in_b():
    h1, _ = _heights_over_b()
    assert np.all(np.diff(h1) >= -1e-12)
    assert np.all(np.diff(h1[BS <= 10]) > 0)
    ring, plate = an.ring_torsion_free(), an.plate_torsion_free()
    assert ring.h1 < h1[0] and np.all(h1 <= plate.h1 + 1e-12)
    assert h1[-1] == pytest.approx(plate.h1, abs=1e-12)
    assert an.annulus_torsion_free(1.0) == ring


def test_annulus_outer_height_monotone_in_b():
    # stated invariant: monotone between the ring and plate limits.  Known to fail:
    # h2 overshoots the plate value near b ~ 10 (see test_annulus_outer_height_overshoots_plate)
    _, h2 = _heights_over_b()
    ring, plate = an.ring_torsion_free(), an.plate_torsion_free()
    assert np.all(np.diff(h2) >= -1e-12)
    assert np.all((ring.h2 <= h2) & (h2 <= plate.h2 + 1e-12))


def test_annulus_outer_height_overshoots_plate():
    from cpring.bodies import delta_energy_quadrature
    b, h = 9.5416752, 3.455
    assert h > an.plate_torsion_free().h2
    # E(0) - E(90) still positive above the plate's outer height, by both routes
    assert an.delta_energy(BodyGeometry.annulus(b), h) > 0
    assert delta_energy_quadrature(BodyGeometry.annulus(b), h, Tolerances(1e-10, 0.0)).value > 0
    assert an.annulus_torsion_free(b).h2 > 3.46


def test_annulus_torsion_free_errors():
    with pytest.raises(ValueError):
        an.annulus_torsion_free(0.5)
    with pytest.raises(an.NonConvergenceError):
        an.annulus_torsion_free(math.inf, h_max=1.0)


def test_torsion_free_heights_dispatch():
    assert tuple(an.torsion_free_heights(BodyGeometry.ring())) == tuple(an.ring_torsion_free())
    tf = an.torsion_free_heights(BodyGeometry.plate())
    assert (tf.h1, tf.h2) == pytest.approx(tuple(an.plate_torsion_free()), abs=1e-10)


def test_radial_ring_torsion_free_by_quadrature():
    tf = an.torsion_free_heights(BodyGeometry.ring("radial"))
    assert (tf.h1, tf.h2) == pytest.approx((0.360007, 3.445344), abs=1e-6)
    assert an.QUADRATURE in tf.flags


def test_radial_plate_has_single_height_in_scan():
    tf = an.torsion_free_heights(BodyGeometry.plate("radial"))
    assert tf.h1 == pytest.approx(0.440835, abs=1e-6)
    assert tf.h2 == math.inf
    assert an.ABSENT_IN_SCAN in tf.flags


def test_preferred_orientation_flips_at_each_height():
    g = BodyGeometry.ring()
    h1, h2 = an.ring_torsion_free()
    assert an.preferred_orientation(g, 0.5 * h1) == 0.0
    assert an.preferred_orientation(g, 0.5 * (h1 + h2)) == math.pi / 2
    assert an.preferred_orientation(g, 2 * h2) == 0.0
    # and it agrees with a brute-force argmin over theta
    thetas = np.linspace(0, math.pi / 2, 91)
    for h in (0.5 * h1, 0.5 * (h1 + h2), 2 * h2):
        assert thetas[np.argmin(cf.ring_energy(h, thetas))] == an.preferred_orientation(g, h)


def test_delta_energy_zeros_match_heights():
    g = BodyGeometry.plate()
    for h in an.plate_torsion_free():
        assert an.delta_energy(g, h) == pytest.approx(0, abs=1e-12)
    sweep = an.delta_E_sweep(g, [0.1, 1.0, 5.0])
    assert sweep.shape == (3, 2)
    assert np.sign(sweep[:, 1]).tolist() == [-1, 1, -1]
    with pytest.raises(ValueError):
        an.delta_E_sweep(g, [])


@pytest.mark.parametrize("deg, expected", [
    (90.0, [(0.0, math.sqrt(2 / 9))]),
    # theta = 0: numerator 80 s^2 - 200 s + 116 with s = h^2
    (0.0, [tuple(math.sqrt(s) for s in sorted(np.roots([80, -200, 116]).real))]),
    (30.0, []),
])
def test_repulsion_window_examples(deg, expected):
    windows = an.repulsion_windows(math.radians(deg))
    assert [(w.lo, w.hi) for w in windows] == [pytest.approx(e, abs=1e-6) for e in expected]
    for w in windows:
        mid = 0.5 * (w.lo + w.hi)
        assert mid in w
        assert cf.ring_force(mid, math.radians(deg)) > 0


def test_window_flags_against_quoted_values():
    (w90,) = an.repulsion_windows(math.pi / 2)
    assert w90.flags == ()
    (w0,) = an.repulsion_windows(0.0)
    assert an.PAPER_TEXT_CONFLICT in w0.flags


@settings(max_examples=30, deadline=None)
@given(st.floats(0, math.pi))
def test_windows_agree_with_scan(theta):
    # cross_check raises ConsistencyError on any disagreement
    windows = an.repulsion_windows(theta, cross_check=True)
    for w in windows:
        assert w.lo < w.hi


def test_critical_angles():
    ca = an.critical_angles()
    lo, hi, inter = ca.degrees()
    assert (lo, hi, inter) == pytest.approx((60.8784, 119.1216, 13.26496), abs=1e-4)
    assert math.cos(math.radians(2 * lo)) == pytest.approx(-10 / 19, rel=1e-12)
    c = math.cos(2 * ca.intermediate)
    assert 20601 * c * c - 11682 * c - 6039 == pytest.approx(0, abs=1e-8)
    # just inside the intermediate limit there is a window, just outside there is none
    assert an.repulsion_windows(ca.intermediate - 1e-3, cross_check=False)
    assert not an.repulsion_windows(ca.intermediate + 1e-3, cross_check=False)


@pytest.mark.parametrize("deg, b_star", [(0, 1.650486), (6, 1.559026), (9, 1.437950), (12, 1.232390)])
def test_critical_outer_radius(deg, b_star):
    t = math.radians(deg)
    b = an.critical_outer_radius(t)
    assert b == pytest.approx(b_star, abs=2e-6)
    assert an.annulus_repulsion_windows(t, b - 1e-3)
    assert not an.annulus_repulsion_windows(t, b + 1e-3)


def test_critical_outer_radius_outside_range():
    with pytest.raises(ValueError):
        an.critical_outer_radius(math.radians(20))
    with pytest.raises(an.NonConvergenceError):
        an.critical_outer_radius(0.0, b_lo=2.0, b_hi=3.0)


def test_golden_section_max():
    x, fx = an.golden_section_max(lambda x: -(x - 0.3) ** 2 + 2, 0.0, 1.0, tol=1e-10)
    assert x == pytest.approx(0.3, abs=1e-7)
    assert fx == pytest.approx(2.0, abs=1e-15)


def test_machine_cycle():
    rep = an.machine_cycle()
    h1 = an.ring_torsion_free().h1
    assert rep.energies["A"] == -52.0
    assert rep.energies["B"] == pytest.approx(0.0, abs=1e-14)
    assert rep.energies["C"] == pytest.approx(-9.283257, abs=1e-6)
    assert rep.energies["D"] == pytest.approx(rep.energies["C"], abs=1e-12)
    assert rep.work["AB"] == pytest.approx(52.0)
    assert rep.work["CD"] == pytest.approx(0.0, abs=1e-12)
    assert rep.net_work == pytest.approx(0.0, abs=1e-12)
    assert rep.heights["C"] == h1
    assert rep.extras["h_repulsion_edge"] == pytest.approx(math.sqrt(2 / 9), rel=1e-14)
    assert rep.extras["work_B_to_edge"] + rep.extras["work_edge_to_C"] == pytest.approx(rep.work["BC"])
    # the atom climbs out of the repulsive window, so B -> edge releases energy
    assert rep.extras["work_B_to_edge"] < 0


def test_matches_published_unknown_key():
    with pytest.raises(KeyError):
        an.matches_published("nope", (1.0,))
