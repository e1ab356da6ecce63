"""Body energies by direct integration of the point-point kernel.

This is the oracle path: it uses no energy or force from
:mod:`cpring.closed_forms`, only its configuration types.  A ring
of radius ``rho`` is integrated over its azimuth with the periodic trapezoid
rule; an annulus is the radial integral of such rings; the plate is the
annulus with ``b = inf``.  Results are scaled to the same reduced units as the
closed forms (factor ``64*pi``), so the two paths compare directly.

The local body tensor is built per source point: ``z z`` (axial),
``rho_hat rho_hat`` (radial), ``phi_hat phi_hat`` (azimuthal) or a constant
user tensor.
"""

from __future__ import annotations

import math

import numpy as np

from .closed_forms import AtomConfiguration, BodyGeometry
from .kernel import PolarizabilityTensor, cp_point_gradient, cp_point_kernel
from .quadrature import QuadratureResult, Tolerances, adaptive_quad, periodic_quad

REDUCED_SCALE = 64.0 * math.pi

#: atom tensor whose energy is E(theta=0) - E(theta=pi/2), by linearity
DELTA_ATOM = np.diag([-1.0, 0.0, 1.0])
SUM_ATOM = np.diag([1.0, 0.0, 1.0])

_Z = np.array([0.0, 0.0, 1.0])


def _body_tensors(polarization: str, phi: np.ndarray, tensor=None) -> np.ndarray:
    n = phi.size
    if polarization == "axial":
        return np.broadcast_to(np.outer(_Z, _Z), (n, 3, 3))
    if polarization == "tensor":
        return np.broadcast_to(np.asarray(tensor, dtype=float), (n, 3, 3))
    c, s = np.cos(phi), np.sin(phi)
    zero = np.zeros_like(phi)
    if polarization == "radial":
        e = np.stack([c, s, zero], axis=-1)
    elif polarization == "azimuthal":
        e = np.stack([-s, c, zero], axis=-1)
    else:
        raise ValueError(f"unknown polarization {polarization!r}")
    return e[:, :, None] * e[:, None, :]


def _atom_matrix(atom, theta: float) -> np.ndarray:
    if atom is None:
        return np.asarray(PolarizabilityTensor.atom(theta))
    return np.asarray(atom, dtype=float)


def _ring_integrand(h_hat, A, polarization, rho, tensor, quantity):
    def f(phi):
        r_vec = np.stack([rho * np.cos(phi), rho * np.sin(phi), np.full_like(phi, -h_hat)], axis=-1)
        B = _body_tensors(polarization, phi, tensor)
        if quantity == "energy":
            return cp_point_kernel(A, B, r_vec)
        # separation is source - atom, so -dE/dh_atom = +dE/dr_z
        return cp_point_gradient(A, B, r_vec)[..., 2]

    return f


def ring_quadrature(
    h_hat: float,
    theta: float = 0.0,
    polarization: str = "axial",
    tol: Tolerances = Tolerances(),
    *,
    atom=None,
    tensor=None,
    rho: float = 1.0,
    quantity: str = "energy",
) -> QuadratureResult:
    """Reduced energy (or force) of the atom against a ring of radius ``rho``.

    ``atom`` overrides the default uniaxial atom tensor built from ``theta``.
    """
    A = _atom_matrix(atom, theta)
    f = _ring_integrand(h_hat, A, polarization, rho, tensor, quantity)
    res = periodic_quad(f, rel_tol=tol.rel, abs_tol=tol.abs / (REDUCED_SCALE * rho))
    k = REDUCED_SCALE * rho
    return QuadratureResult(k * res.value, k * res.error_estimate, res.evaluations)


def ring_energy_quadrature(cfg: AtomConfiguration, polarization: str = "axial",
                           tol: Tolerances = Tolerances(), **kw) -> QuadratureResult:
    return ring_quadrature(cfg.h_hat, cfg.theta, polarization, tol, **kw)


def annulus_quadrature(
    h_hat: float,
    theta: float,
    b_hat: float,
    polarization: str = "axial",
    tol: Tolerances = Tolerances(),
    *,
    atom=None,
    tensor=None,
    quantity: str = "energy",
) -> QuadratureResult:
    """Radial integral of :func:`ring_quadrature` over ``1 <= rho <= b_hat``."""
    if not b_hat >= 1:
        raise ValueError(f"outer radius b_hat must be >= 1, got {b_hat}")
    if b_hat == 1:
        return QuadratureResult(0.0, 0.0, 0)
    A = _atom_matrix(atom, theta)
    inner_tol = Tolerances(tol.rel * 0.1, 0.0)
    worst = [0.0]
    evals = [0]

    def ring_at(rho: float) -> float:
        r = ring_quadrature(h_hat, polarization=polarization, tol=inner_tol, atom=A,
                            tensor=tensor, rho=rho, quantity=quantity)
        if r.value:
            worst[0] = max(worst[0], r.error_estimate / abs(r.value))
        evals[0] += r.evaluations
        return r.value

    # the integrand is concentrated within a few (1 + |h|) of the inner edge
    knee = 1.0 + 4.0 * (1.0 + abs(h_hat))
    value = err = 0.0
    for lo, hi in _radial_pieces(knee, b_hat):
        r = adaptive_quad(ring_at, lo, hi, rel_tol=tol.rel, abs_tol=tol.abs, scale=lo)
        value += r.value
        err += r.error_estimate
    err += worst[0] * abs(value)
    return QuadratureResult(value, err, evals[0])


def _radial_pieces(knee: float, b_hat: float) -> list[tuple[float, float]]:
    # beyond the knee the integrand decays like rho^-6: double the panel width
    pieces = [(1.0, min(b_hat, knee))]
    lo = knee
    while lo < b_hat:
        hi = b_hat if math.isinf(b_hat) else min(b_hat, 2.0 * lo)
        pieces.append((lo, hi))
        lo = hi
    return pieces


def annulus_energy_quadrature(cfg: AtomConfiguration, b_hat: float, polarization: str = "axial",
                              tol: Tolerances = Tolerances(), **kw) -> QuadratureResult:
    return annulus_quadrature(cfg.h_hat, cfg.theta, b_hat, polarization, tol, **kw)


def body_quadrature(geometry: BodyGeometry, h_hat: float, theta: float = 0.0,
                    tol: Tolerances = Tolerances(), *, atom=None,
                    quantity: str = "energy") -> QuadratureResult:
    """Dispatch on ``geometry`` (ring, annulus or plate)."""
    if geometry.kind == "ring":
        return ring_quadrature(h_hat, theta, geometry.polarization, tol, atom=atom,
                               tensor=geometry.tensor, quantity=quantity)
    return annulus_quadrature(h_hat, theta, geometry.outer_radius, geometry.polarization, tol,
                              atom=atom, tensor=geometry.tensor, quantity=quantity)


def delta_energy_quadrature(geometry: BodyGeometry, h_hat: float,
                            tol: Tolerances = Tolerances()) -> QuadratureResult:
    """E(theta=0) - E(theta=pi/2) in a single integral (kernel is linear in the atom tensor).

    The difference changes sign at the torsion-free heights, so a purely
    relative target is unreachable there; the absolute target is taken
    relative to the orientation-summed energy at the same height.
    """
    scale = abs(body_quadrature(geometry, h_hat, tol=Tolerances(1e-4, 0.0), atom=SUM_ATOM).value)
    floor = Tolerances(tol.rel, max(tol.abs, tol.rel * scale))
    return body_quadrature(geometry, h_hat, tol=floor, atom=DELTA_ATOM)
