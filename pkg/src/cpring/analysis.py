"""Observables built on the energies: torsion-free heights, repulsion windows,
critical angles, critical outer radii, Delta-E sweeps and the machine cycle.

Heights are reduced (``h / a``), angles are radians.  Only the positive
height branch is reported; every observable is mirrored at negative height.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from . import closed_forms as cf
from .bodies import delta_energy_quadrature
from .closed_forms import BodyGeometry
from .quadrature import Tolerances

#: flag attached when a computed value disagrees with the published figure
PAPER_TEXT_CONFLICT = "paper-text-conflict"
#: flag attached when a value came from the quadrature path
QUADRATURE = "quadrature"
#: flag attached when a torsion-free height was not found inside the scan range
ABSENT_IN_SCAN = "absent-in-scan"
FLAGS = (PAPER_TEXT_CONFLICT, QUADRATURE, ABSENT_IN_SCAN)

#: Published values (reduced units / degrees) with the half-width inside which
#: a computed value counts as reproducing them.
PUBLISHED = {
    "ring_torsion_free": ((0.48, 1.69), 0.005),
    "ring_window_theta90": ((0.0, 0.47), 0.005),
    "ring_window_theta0": ((1.24, 1.41), 0.005),
    "critical_angles_deg": ((60.88, 119.12, 13.27), 0.01),
    "plate_axial_torsion_free": ((0.60, 3.44), 0.005),
    "ring_radial_torsion_free": ((0.36, 3.45), 0.01),
    "plate_radial_torsion_free": ((0.44, math.inf), 0.01),
    "table_outer_radius": ({0: 1.6505, 6: 1.559, 9: 1.4379, 12: 1.2323}, 1e-3),
}

ROOT_XTOL = 1e-12
SCAN_STEP = 0.01


class NonConvergenceError(ArithmeticError):
    pass


class ConsistencyError(AssertionError):
    """Two independent routes to the same observable disagree."""


def matches_published(key: str, computed: Sequence[float]) -> bool:
    quoted, half_width = PUBLISHED[key]
    return all(
        (math.isinf(q) and math.isinf(c)) or abs(q - c) <= half_width + 1e-12
        for q, c in zip(quoted, computed)
    )


@dataclass(frozen=True)
class TorsionFreeSet:
    """Orientation-independent heights; ``h2`` is inf when it does not exist."""

    h1: float
    h2: float
    method: str = "algebraic"
    flags: tuple[str, ...] = ()

    def __iter__(self):
        return iter((self.h1, self.h2))


@dataclass(frozen=True)
class RepulsionWindow:
    lo: float
    hi: float
    flags: tuple[str, ...] = ()

    def __contains__(self, h: float) -> bool:
        return self.lo < h < self.hi

    @property
    def width(self) -> float:
        return self.hi - self.lo


@dataclass(frozen=True)
class CriticalAngles:
    short_range_lo: float
    short_range_hi: float
    intermediate: float

    def degrees(self) -> tuple[float, float, float]:
        return tuple(math.degrees(x) for x in (self.short_range_lo, self.short_range_hi, self.intermediate))


@dataclass(frozen=True)
class CycleReport:
    heights: dict[str, float]
    angles: dict[str, float]
    energies: dict[str, float]
    work: dict[str, float]
    net_work: float
    extras: dict[str, float] = field(default_factory=dict)


# --- root finding -----------------------------------------------------------

def bracketed_roots(f: Callable[[float], float], grid: Sequence[float],
                    values: Sequence[float] | None = None) -> list[float]:
    """Sign changes of ``f`` on ``grid``, each polished by Brent's method."""
    grid = np.asarray(grid, dtype=float)
    v = np.asarray([f(x) for x in grid] if values is None else values, dtype=float)
    roots = []
    for i in range(len(grid) - 1):
        if v[i] == 0.0:
            roots.append(float(grid[i]))
        elif v[i] * v[i + 1] < 0:
            roots.append(brentq(f, grid[i], grid[i + 1], xtol=ROOT_XTOL))
    return roots


def _positive_quadratic_roots(a: float, b: float, c: float) -> list[float]:
    """Real roots of a s^2 + b s + c, computed without cancellation."""
    if a == 0.0:
        return [] if b == 0.0 else [-c / b]
    disc = b * b - 4 * a * c
    if disc < 0:
        return []
    q = -0.5 * (b + math.copysign(math.sqrt(disc), b))
    roots = [q / a] + ([c / q] if q != 0.0 else [])
    return sorted(roots)


# --- torsion-free heights ---------------------------------------------------

def ring_torsion_free() -> TorsionFreeSet:
    """Roots of 40 h^4 - 123 h^2 + 26 = 0."""
    s1, s2 = _positive_quadratic_roots(40.0, -123.0, 26.0)
    return TorsionFreeSet(math.sqrt(s1), math.sqrt(s2))


def plate_torsion_free() -> TorsionFreeSet:
    """Axial plate limit: roots of 6 h^4 - 73 h^2 + 26 = 0."""
    s1, s2 = _positive_quadratic_roots(6.0, -73.0, 26.0)
    return TorsionFreeSet(math.sqrt(s1), math.sqrt(s2))


def annulus_torsion_free(b_hat: float, h_max: float = 10.0, step: float = SCAN_STEP) -> TorsionFreeSet:
    """Both positive zeros of the cos 2theta coefficient for an axial annulus.

    ``b_hat = inf`` gives the plate.  Raises :class:`NonConvergenceError` if
    fewer than two zeros lie in ``(0, h_max]``.
    """
    if not b_hat >= 1:
        raise ValueError(f"b_hat must be >= 1, got {b_hat}")
    if b_hat == 1:
        return ring_torsion_free()

    def aniso(h):
        return float(cf.annulus_iso_aniso(h, b_hat)[1])

    grid = np.arange(step, h_max + step / 2, step)
    values = cf.annulus_iso_aniso(grid, b_hat)[1]
    roots = bracketed_roots(aniso, grid, values)
    if len(roots) < 2:
        raise NonConvergenceError(f"found {len(roots)} torsion-free heights in (0, {h_max}] for b_hat={b_hat}")
    return TorsionFreeSet(roots[0], roots[1], method="scan+brent")


def delta_energy(geometry: BodyGeometry, h_hat, tol: Tolerances = Tolerances()):
    """E(theta=0) - E(theta=pi/2) = 2 e_aniso, closed form when available."""
    if geometry.has_closed_form:
        if geometry.kind == "ring":
            return 2.0 * cf.ring_iso_aniso(h_hat)[1]
        return 2.0 * cf.annulus_iso_aniso(h_hat, geometry.outer_radius)[1]
    h = np.atleast_1d(np.asarray(h_hat, dtype=float))
    out = np.array([delta_energy_quadrature(geometry, x, tol).value for x in h])
    return out if np.ndim(h_hat) else float(out[0])


def default_scan_grid(geometry: BodyGeometry, h_max: float | None = None) -> np.ndarray:
    if geometry.has_closed_form:
        return np.arange(SCAN_STEP, (h_max or 10.0) + SCAN_STEP / 2, SCAN_STEP)
    # quadrature is costly; a log grid resolves both the near and far zeros
    if h_max is None:
        b = geometry.outer_radius
        h_max = 50.0 if math.isinf(b) else max(10.0, 20.0 * b)
    n = int(40 * math.log10(h_max / 0.05)) + 1
    return np.geomspace(0.05, h_max, n)


def torsion_free_heights(geometry: BodyGeometry, grid: Sequence[float] | None = None,
                         tol: Tolerances = Tolerances(rel=1e-10, abs=0.0)) -> TorsionFreeSet:
    """Torsion-free heights for any geometry and polarization.

    Axial bodies use the closed forms; other patterns integrate the kernel.
    A missing second height is returned as ``inf`` with ``ABSENT_IN_SCAN``.
    """
    if geometry.has_closed_form and grid is None:
        if geometry.kind == "ring":
            return ring_torsion_free()
        return annulus_torsion_free(geometry.outer_radius)
    grid = default_scan_grid(geometry) if grid is None else np.asarray(grid, dtype=float)

    def f(h):
        return float(delta_energy(geometry, h, tol))

    values = np.asarray(delta_energy(geometry, grid, tol))
    roots = bracketed_roots(f, grid, values)
    flags = () if geometry.has_closed_form else (QUADRATURE,)
    if not roots:
        raise NonConvergenceError(f"no torsion-free height in [{grid[0]}, {grid[-1]}]")
    if len(roots) == 1:
        return TorsionFreeSet(roots[0], math.inf, "scan+brent", flags + (ABSENT_IN_SCAN,))
    return TorsionFreeSet(roots[0], roots[1], "scan+brent", flags)


def preferred_orientation(geometry: BodyGeometry, h_hat: float,
                          tol: Tolerances = Tolerances(rel=1e-10, abs=0.0)) -> float:
    """theta (0 or pi/2) minimising the energy at ``h_hat``."""
    return 0.0 if delta_energy(geometry, h_hat, tol) < 0 else math.pi / 2


# --- repulsion --------------------------------------------------------------

def _fold(theta: float) -> float:
    t = theta % math.pi
    return min(t, math.pi - t)


def scan_repulsion_windows(force: Callable, h_max: float = 10.0, step: float = 1e-3,
                           h_min: float = 0.0) -> list[RepulsionWindow]:
    """Intervals of positive ``force`` found by a plain sign scan, edges polished."""
    grid = np.arange(h_min, h_max + step / 2, step)
    grid[0] = max(grid[0], step * 1e-3)
    values = np.asarray(force(grid), dtype=float)
    positive = values > 0
    windows = []
    i = 0
    while i < len(grid):
        if not positive[i]:
            i += 1
            continue
        j = i
        while j + 1 < len(grid) and positive[j + 1]:
            j += 1
        lo = h_min if i == 0 else brentq(lambda h: float(force(h)), grid[i - 1], grid[i], xtol=ROOT_XTOL)
        hi = grid[j] if j == len(grid) - 1 else brentq(lambda h: float(force(h)), grid[j], grid[j + 1], xtol=ROOT_XTOL)
        windows.append(RepulsionWindow(float(lo), float(hi)))
        i = j + 1
    return windows


def ring_window_roots(theta: float) -> list[float]:
    """Positive heights where the axial-ring force vanishes (h > 0)."""
    c = math.cos(2 * theta)
    if abs(1 + c) < 1e-15:
        # theta = 90 deg: the quartic collapses to 162 h^2 - 36 = 0
        roots = [36.0 / 162.0]
    else:
        roots = _positive_quadratic_roots(40 * (1 + c), -(19 + 181 * c), 40 + 76 * c)
    return [math.sqrt(s) for s in roots if s > 0]


def repulsion_windows(theta: float, *, cross_check: bool = True, scan_step: float = 1e-3,
                      h_max: float = 10.0) -> list[RepulsionWindow]:
    """Height intervals where an axial ring pushes the atom outward.

    Boundaries come from the biquadratic force numerator; each interval is
    classified by the force sign at its midpoint.  With ``cross_check`` the
    result is compared against :func:`scan_repulsion_windows`; windows
    narrower than two scan steps are invisible to the scan and are exempt.
    """
    edges = [0.0] + ring_window_roots(theta)
    windows = []
    for lo, hi in zip(edges, edges[1:]):
        if cf.ring_force(0.5 * (lo + hi), theta) > 0:
            windows.append(RepulsionWindow(lo, hi))
    # beyond the last edge the quartic's positive leading coefficient wins,
    # except at 90 deg where the window is the only region
    if cross_check:
        scanned = scan_repulsion_windows(lambda h: cf.ring_force(h, theta), h_max, scan_step)
        visible = [w for w in windows if w.width > 2 * scan_step]
        if len(visible) != len(scanned) or any(
            abs(a.lo - b.lo) > 1e-9 or abs(a.hi - b.hi) > 1e-9 for a, b in zip(visible, scanned)
        ):
            raise ConsistencyError(f"algebraic windows {visible} != scanned windows {scanned}")
    return [_flag_window(theta, w) for w in windows]


def _flag_window(theta: float, w: RepulsionWindow) -> RepulsionWindow:
    folded = _fold(theta)
    key = {0.0: "ring_window_theta0", math.pi / 2: "ring_window_theta90"}.get(folded)
    if key and not matches_published(key, (w.lo, w.hi)):
        return RepulsionWindow(w.lo, w.hi, (PAPER_TEXT_CONFLICT,))
    return w


def annulus_repulsion_windows(theta: float, b_hat: float, h_max: float = 10.0,
                              step: float = 1e-3) -> list[RepulsionWindow]:
    return scan_repulsion_windows(lambda h: cf.annulus_force(h, theta, b_hat), h_max, step)


def critical_angles() -> CriticalAngles:
    """Orientation limits for repulsion from an axial ring.

    Short range: the force near h = 0 is proportional to -(40 + 76 cos 2theta) h,
    so repulsion needs cos 2theta < -10/19.  Intermediate range: the window
    opens where the discriminant 20601 c^2 - 11682 c - 6039 vanishes.
    """
    lo = 0.5 * math.acos(-40.0 / 76.0)
    c_star = max(_positive_quadratic_roots(6867.0, -3894.0, -2013.0))
    return CriticalAngles(lo, math.pi - lo, 0.5 * math.acos(c_star))


# --- critical outer radius ----------------------------------------------------

INV_PHI = (math.sqrt(5) - 1) / 2


def golden_section_max(f: Callable[[float], float], a: float, b: float, tol: float = 1e-10) -> tuple[float, float]:
    """Maximise a unimodal ``f`` on ``[a, b]``; returns ``(x, f(x))``."""
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def _scaled_max_force(theta: float, b_hat: float, h_lo: float, h_hi: float, step: float) -> float:
    """max_h F_annulus(h; b) / (b - 1), which tends to the ring force as b -> 1."""
    if b_hat == 1.0:
        def F(h):
            return cf.ring_force(h, theta)
    else:
        def F(h):
            return cf.annulus_force(h, theta, b_hat) / (b_hat - 1.0)
    grid = np.arange(h_lo, h_hi + step / 2, step)
    i = int(np.argmax(F(grid)))
    a, b = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    return golden_section_max(lambda h: float(F(h)), a, b)[1]


def critical_outer_radius(theta: float, b_lo: float = 1.0, b_hi: float = 3.0, xtol: float = 1e-6,
                          h_range: tuple[float, float] = (0.05, 4.0), step: float = 0.01) -> float:
    """Largest outer radius that keeps the intermediate repulsion window.

    At the critical radius the window shrinks to a double root of the force,
    which sign scans cannot see.  Instead the maximum of the force over height
    (scan, then golden section) is tracked and bisected to zero in ``b_hat``.
    """
    t = _fold(theta)
    limit = critical_angles().intermediate
    if not t < limit:
        raise ValueError(f"no intermediate window for theta={math.degrees(t):.4f} deg "
                         f"(needs < {math.degrees(limit):.4f} deg)")

    def g(b):
        return _scaled_max_force(t, b, *h_range, step)

    lo, hi = b_lo, b_hi
    if not (g(lo) > 0 > g(hi)):
        raise NonConvergenceError(f"tangency not bracketed in b_hat in [{lo}, {hi}]")
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        if g(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# --- sweeps and the machine cycle ------------------------------------------------

def delta_E_sweep(geometry: BodyGeometry, h_grid: Sequence[float],
                  tol: Tolerances = Tolerances(rel=1e-10, abs=0.0)) -> np.ndarray:
    """Rows of (h_hat, E(0) - E(pi/2))."""
    h = np.asarray(h_grid, dtype=float)
    if h.size == 0:
        raise ValueError("empty height grid")
    d = np.asarray(delta_energy(geometry, h, tol), dtype=float)
    return np.column_stack([h, d])


def machine_cycle() -> CycleReport:
    """Energetics of the four-stroke cycle A -> B -> C -> D -> A on an axial ring.

    A: atom at the centre aligned with the ring axis.  B: rotated by 90 deg
    (work in).  C: displaced to the first torsion-free height, still at
    90 deg.  D: rotated back at no cost.  Work on a leg is the energy change
    along it; negative means energy released.
    """
    h1 = ring_torsion_free().h1
    heights = {"A": 0.0, "B": 0.0, "C": h1, "D": h1}
    angles = {"A": 0.0, "B": math.pi / 2, "C": math.pi / 2, "D": 0.0}
    E = {k: float(cf.ring_energy(heights[k], angles[k])) for k in "ABCD"}
    legs = ["AB", "BC", "CD", "DA"]
    work = {leg: E[leg[1]] - E[leg[0]] for leg in legs}
    edge = ring_window_roots(math.pi / 2)[0]
    e_edge = float(cf.ring_energy(edge, math.pi / 2))
    extras = {
        "h_repulsion_edge": edge,
        "E_repulsion_edge": e_edge,
        "work_B_to_edge": e_edge - E["B"],
        "work_edge_to_C": E["C"] - e_edge,
    }
    return CycleReport(heights, angles, E, work, math.fsum(work.values()), extras)
