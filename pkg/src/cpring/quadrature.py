"""Numerical integration primitives used by the oracle paths.

Two drivers live here:

* :func:`adaptive_quad` -- globally adaptive Gauss-Kronrod (QUADPACK through
  :func:`scipy.integrate.quad`) on finite or semi-infinite intervals.  A
  semi-infinite interval ``[lo, inf)`` is mapped onto ``[0, 1)`` with
  ``x = lo + L t / (1 - t)`` before integration, so no truncation cutoff is
  ever chosen.
* :func:`periodic_quad` -- trapezoid rule on a full period with node doubling,
  which converges spectrally for smooth periodic integrands.  The integrand
  must accept a numpy array of abscissae.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

DEFAULT_REL_TOL = 1e-9
DEFAULT_ABS_TOL = 1e-12


class QuadratureError(ArithmeticError):
    """Raised when an integration driver fails to reach its tolerance.

    The best available estimate is kept on the exception so callers can
    report it.
    """

    def __init__(self, message: str, value: float, error_estimate: float, evaluations: int):
        super().__init__(f"{message} (value={value!r}, error_estimate={error_estimate:.3g})")
        self.value = value
        self.error_estimate = error_estimate
        self.evaluations = evaluations


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    evaluations: int

    def __float__(self) -> float:
        return self.value


@dataclass(frozen=True)
class Tolerances:
    """Relative and absolute targets shared by the nested integrators."""

    rel: float = DEFAULT_REL_TOL
    abs: float = DEFAULT_ABS_TOL

    def __post_init__(self):
        if not (self.rel > 0 and self.abs >= 0):
            raise ValueError(f"need rel > 0 and abs >= 0, got {self.rel}, {self.abs}")

    def scaled(self, factor: float) -> "Tolerances":
        return Tolerances(self.rel * factor, self.abs * factor)


def adaptive_quad(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    rel_tol: float = DEFAULT_REL_TOL,
    abs_tol: float = DEFAULT_ABS_TOL,
    limit: int = 500,
    scale: float = 1.0,
) -> QuadratureResult:
    """Integrate ``f`` over ``[lo, hi]``; ``hi`` may be ``math.inf``.

    For an infinite upper limit ``x = lo + scale * t / (1 - t)``; ``scale``
    should be about the decay length of ``f``.
    """
    if not lo < hi:
        raise ValueError(f"need lo < hi, got [{lo}, {hi}]")
    if math.isinf(lo):
        raise ValueError("lower limit must be finite")

    if math.isinf(hi):
        def g(t: float) -> float:
            s = 1.0 - t
            return scale * f(lo + scale * t / s) / (s * s)

        a, b = 0.0, 1.0
    else:
        g, a, b = f, lo, hi

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        value, err, info, *rest = integrate.quad(
            g, a, b, epsabs=abs_tol, epsrel=rel_tol, limit=limit, full_output=1
        )
    neval = int(info["neval"])
    ier = rest[0] if rest and isinstance(rest[0], str) else None
    if not math.isfinite(value):
        raise QuadratureError("integral is not finite", value, err, neval)
    if ier is not None and err > max(abs_tol, rel_tol * abs(value)):
        raise QuadratureError(f"adaptive quadrature did not converge: {ier.splitlines()[0]}",
                              value, err, neval)
    return QuadratureResult(float(value), float(err), neval)


def periodic_quad(
    f: Callable[[np.ndarray], np.ndarray],
    period: float = 2.0 * math.pi,
    rel_tol: float = DEFAULT_REL_TOL,
    abs_tol: float = DEFAULT_ABS_TOL,
    n_start: int = 8,
    n_max: int = 1 << 16,
) -> QuadratureResult:
    """Integrate a smooth periodic ``f`` over one period.

    Each doubling reuses the previous nodes.  The error estimate is the change
    between the last two levels, which grossly overstates the true error once
    the rule is in its spectral regime.  ``rel_tol`` is measured against the
    integral of ``|f|`` so that integrands with near-total cancellation still
    terminate.
    """
    n = n_start
    h = period / n
    fx = f(np.arange(n) * h)
    total, total_abs = float(np.sum(fx)), float(np.sum(np.abs(fx)))
    prev = total * h
    evaluations = n
    while True:
        fx = f((np.arange(n) + 0.5) * h)
        total += float(np.sum(fx))
        total_abs += float(np.sum(np.abs(fx)))
        evaluations += n
        n *= 2
        h = period / n
        value = total * h
        err = abs(value - prev)
        if err <= max(abs_tol, rel_tol * total_abs * h):
            return QuadratureResult(value, err, evaluations)
        if n >= n_max:
            raise QuadratureError("periodic trapezoid did not converge", value, err, evaluations)
        prev = value
