"""Tabulated data behind the energy-vs-height and Delta-E-vs-height figures.

The CSV text produced here is what ships under ``cpring/golden``; the test
suite regenerates it and compares numerically.
"""

from __future__ import annotations

import csv
import io
import math
from importlib import resources

import numpy as np

from . import closed_forms as cf
from .analysis import delta_E_sweep
from .closed_forms import BodyGeometry
from .quadrature import Tolerances

ENERGY_THETAS_DEG = (0.0, 30.0, 60.0, 90.0)
ENERGY_GRID = np.round(np.linspace(0.0, 2.5, 251), 12)
DELTA_GRID = np.round(np.linspace(0.05, 5.0, 100), 12)

DELTA_CURVES = {
    "ring_axial": BodyGeometry.ring("axial"),
    "plate_axial": BodyGeometry.plate("axial"),
    "ring_radial": BodyGeometry.ring("radial"),
    "plate_radial": BodyGeometry.plate("radial"),
}

GOLDEN_FILES = {"energy_curves": "energy_curves.csv", "delta_e_curves": "delta_e_curves.csv"}


def fmt(x) -> str:
    return "" if x is None else format(float(x), ".17g")


def energy_curves() -> list[dict]:
    rows = []
    for deg in ENERGY_THETAS_DEG:
        t = math.radians(deg)
        for h in ENERGY_GRID:
            rows.append({
                "theta_deg": deg,
                "h_hat": float(h),
                "energy_reduced": float(cf.ring_energy(h, t)),
                "force_reduced": float(cf.ring_force(h, t)),
            })
    return rows


def delta_e_curves(tol: Tolerances = Tolerances(rel=1e-10, abs=0.0)) -> list[dict]:
    rows = []
    for name, geometry in DELTA_CURVES.items():
        for h, d in delta_E_sweep(geometry, DELTA_GRID, tol):
            rows.append({"curve": name, "h_hat": float(h), "delta_energy_reduced": float(d)})
    return rows


def to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: fmt(v) if isinstance(v, float) else v for k, v in row.items()})
    return buf.getvalue()


def read_golden(name: str) -> list[dict]:
    text = resources.files("cpring").joinpath("golden", GOLDEN_FILES[name]).read_text()
    return list(csv.DictReader(io.StringIO(text)))


def compare_to_golden(name: str, rows: list[dict], rel: float = 1e-10, floor: float = 1e-14) -> float:
    """Largest scaled deviation of ``rows`` from the shipped table (<= 1 passes)."""
    golden = read_golden(name)
    if len(golden) != len(rows):
        return math.inf
    worst = 0.0
    for g, r in zip(golden, rows):
        for key, value in r.items():
            if isinstance(value, str):
                if g[key] != value:
                    return math.inf
                continue
            expected = float(g[key])
            worst = max(worst, abs(value - expected) / (rel * abs(expected) + floor))
    return worst
