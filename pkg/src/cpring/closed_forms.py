"""Closed-form energies and forces for axially polarizable bodies.

Every energy here has the shape ``E(h, theta) = e_iso(h) + e_aniso(h) cos 2theta``
and is reported in reduced units:

* ring of radius a, per-length polarizability sigma_z z z:
  ``E = RING_ENERGY_SCALE * ring_energy``
* annular disc a <= rho <= b (and the apertured plate, b -> inf), per-area
  polarizability lambda_z z z:
  ``E = DISC_ENERGY_SCALE * annulus_energy``

Heights are ``h_hat = h / a``; ``theta`` is the angle (radians) between the
atom's polarizability axis and the symmetry axis.  Force is ``-dE/dh_hat``, so a
positive force at positive height pushes the atom away from the body.

All functions broadcast over numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .kernel import PolarizabilityTensor

RING_ENERGY_SCALE = "hbar*c*alpha_1*sigma_z / (64*pi*a**6)"
DISC_ENERGY_SCALE = "hbar*c*alpha_1*lambda_z / (64*pi*a**5)"

Polarization = Literal["axial", "radial", "azimuthal", "tensor"]
BodyKind = Literal["ring", "annulus", "plate"]


class UnsupportedVariantError(NotImplementedError):
    """No closed form exists for the requested polarization pattern."""


@dataclass(frozen=True)
class AtomConfiguration:
    h_hat: float
    theta: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.h_hat) or not math.isfinite(self.theta):
            raise ValueError("h_hat and theta must be finite")
        # the energy has period pi in theta
        object.__setattr__(self, "theta", math.fmod(self.theta, math.pi) % math.pi)

    @classmethod
    def from_degrees(cls, h_hat: float, theta_deg: float) -> "AtomConfiguration":
        return cls(h_hat, math.radians(theta_deg))


@dataclass(frozen=True)
class BodyGeometry:
    """A ring, annulus or apertured plate with inner radius 1.

    ``tensor`` is only consulted for ``polarization="tensor"`` (the same
    constant tensor at every point of the body).
    """

    kind: BodyKind = "ring"
    polarization: Polarization = "axial"
    b_hat: float | None = None
    tensor: PolarizabilityTensor | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in ("ring", "annulus", "plate"):
            raise ValueError(f"unknown body kind {self.kind!r}")
        if self.polarization not in ("axial", "radial", "azimuthal", "tensor"):
            raise ValueError(f"unknown polarization {self.polarization!r}")
        if self.kind == "annulus":
            if self.b_hat is None or not self.b_hat > 1:
                raise ValueError(f"annulus needs b_hat > 1, got {self.b_hat}")
        elif self.b_hat is not None:
            raise ValueError(f"b_hat only applies to an annulus, not a {self.kind}")
        if self.polarization == "tensor" and self.tensor is None:
            raise ValueError("polarization='tensor' needs a tensor")

    @classmethod
    def ring(cls, polarization: Polarization = "axial", tensor=None) -> "BodyGeometry":
        return cls("ring", polarization, None, tensor)

    @classmethod
    def annulus(cls, b_hat: float, polarization: Polarization = "axial", tensor=None) -> "BodyGeometry":
        return cls("annulus", polarization, b_hat, tensor)

    @classmethod
    def plate(cls, polarization: Polarization = "axial", tensor=None) -> "BodyGeometry":
        return cls("plate", polarization, None, tensor)

    @property
    def outer_radius(self) -> float:
        """Reduced outer radius: 1 for a ring, inf for a plate."""
        return {"ring": 1.0, "plate": math.inf}.get(self.kind, self.b_hat)

    @property
    def energy_scale(self) -> str:
        return RING_ENERGY_SCALE if self.kind == "ring" else DISC_ENERGY_SCALE

    @property
    def has_closed_form(self) -> bool:
        return self.polarization == "axial"


@dataclass(frozen=True)
class EnergyDecomposition:
    e_iso: float
    e_aniso: float

    def energy(self, theta):
        return self.e_iso + self.e_aniso * np.cos(2 * np.asarray(theta))


# ring ------------------------------------------------------------------------

def ring_iso_aniso(h_hat):
    s = np.asarray(h_hat, dtype=float) ** 2
    denom = (1.0 + s) ** 5.5
    return -(26 + 3 * s + 40 * s * s) / denom, -(26 - 123 * s + 40 * s * s) / denom


def ring_energy(h_hat, theta):
    e_iso, e_aniso = ring_iso_aniso(h_hat)
    return e_iso + e_aniso * np.cos(2 * np.asarray(theta))


def ring_force(h_hat, theta):
    h = np.asarray(h_hat, dtype=float)
    s = h * h
    c = np.cos(2 * np.asarray(theta))
    bracket = (-280 + 133 * s - 280 * s * s) + c * (-532 + 1267 * s - 280 * s * s)
    return h * bracket / (1.0 + s) ** 6.5


# annulus / plate -------------------------------------------------------------

def _edge_terms(rho, h_hat):
    """Iso and aniso parts of the antiderivative G(rho) at fixed height."""
    r2 = rho * rho
    s = h_hat * h_hat
    denom = (r2 + s) ** 4.5
    return (26 * r2 * r2 + 17 * s * r2 + 26 * s * s) / denom, (26 * r2 * r2 - 73 * s * r2 + 6 * s * s) / denom


def _edge_force_terms(rho, h_hat):
    """-(1/5) dG/dh at fixed rho, split into iso and aniso parts."""
    r2 = rho * rho
    s = h_hat * h_hat
    denom = (r2 + s) ** 5.5
    return (h_hat * (40 * r2 * r2 + 3 * s * r2 + 26 * s * s) / denom,
            h_hat * (76 * r2 * r2 - 107 * s * r2 + 6 * s * s) / denom)


def _check_b(b_hat):
    if np.any(np.asarray(b_hat) < 1):
        raise ValueError(f"outer radius b_hat must be >= 1, got {b_hat}")


def annulus_iso_aniso(h_hat, b_hat):
    _check_b(b_hat)
    h = np.asarray(h_hat, dtype=float)
    b = np.asarray(b_hat, dtype=float)
    gi1, ga1 = _edge_terms(1.0, h)
    if np.all(np.isinf(b)):
        return -gi1 / 5, -ga1 / 5
    gib, gab = _edge_terms(b, h)
    return (gib - gi1) / 5, (gab - ga1) / 5


def annulus_energy(h_hat, theta, b_hat):
    e_iso, e_aniso = annulus_iso_aniso(h_hat, b_hat)
    return e_iso + e_aniso * np.cos(2 * np.asarray(theta))


def annulus_force(h_hat, theta, b_hat):
    _check_b(b_hat)
    h = np.asarray(h_hat, dtype=float)
    c = np.cos(2 * np.asarray(theta))
    fi1, fa1 = _edge_force_terms(1.0, h)
    if np.all(np.isinf(np.asarray(b_hat, dtype=float))):
        return -(fi1 + fa1 * c)
    fib, fab = _edge_force_terms(np.asarray(b_hat, dtype=float), h)
    return (fib - fi1) + (fab - fa1) * c


def ring_density_energy(rho, h_hat, theta):
    """dE_annulus / db at b = rho: a ring of radius rho carrying lambda_z d rho."""
    s = np.asarray(h_hat, dtype=float) ** 2
    r2 = np.asarray(rho, dtype=float) ** 2
    c = np.cos(2 * np.asarray(theta))
    bracket = (26 * r2 * r2 + 3 * s * r2 + 40 * s * s) + (26 * r2 * r2 - 123 * s * r2 + 40 * s * s) * c
    return -rho * bracket / (r2 + s) ** 5.5


def plate_energy(h_hat, theta):
    return annulus_energy(h_hat, theta, math.inf)


def plate_force(h_hat, theta):
    return annulus_force(h_hat, theta, math.inf)


# dispatch on geometry ----------------------------------------------------------

def _require_closed_form(geometry: BodyGeometry):
    if not geometry.has_closed_form:
        raise UnsupportedVariantError(
            f"no closed form for {geometry.polarization} polarization; "
            "use cpring.bodies.body_quadrature instead"
        )


def decompose(geometry: BodyGeometry, h_hat: float) -> EnergyDecomposition:
    _require_closed_form(geometry)
    if geometry.kind == "ring":
        e_iso, e_aniso = ring_iso_aniso(h_hat)
    else:
        e_iso, e_aniso = annulus_iso_aniso(h_hat, geometry.outer_radius)
    return EnergyDecomposition(float(e_iso), float(e_aniso))


def energy(geometry: BodyGeometry, cfg: AtomConfiguration) -> float:
    return decompose(geometry, cfg.h_hat).energy(cfg.theta).item()


def force(geometry: BodyGeometry, cfg: AtomConfiguration) -> float:
    _require_closed_form(geometry)
    if geometry.kind == "ring":
        return float(ring_force(cfg.h_hat, cfg.theta))
    return float(annulus_force(cfg.h_hat, cfg.theta, geometry.outer_radius))
