"""Exact constants and closed forms used as ground truth by the rest of the lab.

Everything here is evaluated through the log-gamma function and exponentiated
once, so values stay accurate to ~1e-15 relative even for moderately large
``p`` and ``dim`` (no intermediate Gamma overflow).
"""

from __future__ import annotations

import math

from scipy.special import gammaln, psi

__all__ = [
    "kappa",
    "kappa_dp",
    "sphere_area",
    "halfline_closed_form",
]


def _check_regime(p: float, dim: int) -> None:
    if not p >= 1:
        raise ValueError(f"integrability exponent must satisfy p >= 1, got {p}")
    if not (isinstance(dim, (int,)) or float(dim).is_integer()) or dim < 1:
        raise ValueError(f"dimension must be a positive integer, got {dim}")


def kappa(p: float, dim: int) -> float:
    """Average of |e . w|^p over the unit sphere S^{dim-1}, times its area.

    Closed form: 2 Gamma((p+1)/2) pi^((dim-1)/2) / Gamma((dim+p)/2).
    For dim == 1 the sphere is the two-point set {-1, +1}, so the value is
    exactly 2 for every p.
    """
    _check_regime(p, dim)
    if dim == 1:
        return 2.0
    log_val = (
        math.log(2.0)
        + gammaln((p + 1.0) / 2.0)
        + 0.5 * (dim - 1) * math.log(math.pi)
        - gammaln((dim + p) / 2.0)
    )
    return float(math.exp(log_val))


def kappa_dp(p: float, dim: int) -> float:
    """Analytic d/dp of :func:`kappa` via the digamma function."""
    _check_regime(p, dim)
    return 0.5 * kappa(p, dim) * float(psi((p + 1.0) / 2.0) - psi((dim + p) / 2.0))


def sphere_area(dim: int) -> float:
    """Surface area of S^{dim-1}: 2 pi^{dim/2} / Gamma(dim/2).

    By convention the zero-sphere carries counting measure, so
    ``sphere_area(1) == 2``; this is what makes the one-dimensional rotation
    method and kappa(p, 1) == 2 consistent.
    """
    if not (isinstance(dim, (int,)) or float(dim).is_integer()) or dim < 1:
        raise ValueError(f"dimension must be a positive integer, got {dim}")
    if dim == 1:
        return 2.0
    return float(math.exp(math.log(2.0) + 0.5 * dim * math.log(math.pi) - gammaln(dim / 2.0)))


def halfline_closed_form(gamma: float, lam: float) -> float:
    """Exact weighted level-set measure for the unit step on the half line.

    Equals 2 / (|gamma + 1| * lambda) for every gamma != -1; at gamma == -1
    the measure is genuinely divergent and no closed form exists.  This is the
    primary quadrature oracle for the measure engine.
    """
    if gamma == -1:
        raise ValueError("gamma == -1 is excluded: the half-line measure diverges there")
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    return 2.0 / (abs(gamma + 1.0) * lam)
