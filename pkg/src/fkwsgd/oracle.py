"""Analytic reference solutions for constant potentials.

With ``U = c`` constant and ``f = 0`` the substitution ``G = exp(-t rho c) V``
turns the problem into plain subdiffusion, so a sine mode evolves as

    G(x, t) = exp(-t rho c) * E_alpha(-(k pi)^2 t^alpha) * sin(k pi x).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from .mesh_fem import Mesh, NodalField


class SeriesError(ArithmeticError):
    pass


@dataclass(frozen=True)
class MLParams:
    alpha: float
    z_limit: float = 15.0
    tol: float = 1e-14
    max_terms: int = 500

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")
        if self.z_limit <= 0:
            raise ValueError("z_limit must be positive")


def _peak_log10_term(alpha: float, r: float, max_terms: int) -> float:
    if r == 0.0:
        return 0.0
    k = np.arange(max_terms)
    logs = k * math.log(r) - np.array([math.lgamma(alpha * kk + 1.0) for kk in k])
    return float(logs.max() / math.log(10.0))


def mittag_leffler(alpha: float, z: complex, params: MLParams | None = None) -> complex:
    """One-parameter Mittag-Leffler function by its power series.

    Terms grow to ``~exp(|z|**(1/alpha))`` before decaying, so the sum is
    carried in extended precision with enough guard digits to absorb the
    cancellation, then rounded to a Python complex.
    """
    p = params or MLParams(alpha)
    if p.alpha != alpha:
        p = MLParams(alpha, p.z_limit, p.tol, p.max_terms)
    z = complex(z)
    r = abs(z)
    if r > p.z_limit:
        raise SeriesError(f"|z| = {r:.4g} exceeds z_limit = {p.z_limit}")
    if r == 0.0:
        return 1.0 + 0.0j

    digits = 20 + max(0.0, _peak_log10_term(alpha, r, p.max_terms))
    with mpmath.workdps(int(digits) + 5):
        zz = mpmath.mpc(z.real, z.imag)
        a = mpmath.mpf(alpha)
        terms = []
        power = mpmath.mpc(1)
        prev = None
        for k in range(p.max_terms):
            term = power / mpmath.gamma(a * k + 1)
            terms.append(term)
            mag = abs(term)
            # stop only once terms are decaying
            if k > 0 and prev is not None and mag < prev:
                total = mpmath.fsum(terms)
                if mag <= p.tol * max(abs(total), mpmath.mpf("1e-300")):
                    return complex(total)
            prev = mag
            power *= zz
    raise SeriesError(f"series did not converge within {p.max_terms} terms")


def exact_constantU_solution(
    alpha: float, rho: complex, c: float, k: int, t: float, mesh: Mesh
) -> NodalField:
    """Nodal values of the exact sine-mode solution in 1D."""
    if mesh.dim != 1:
        raise ValueError("the sine-mode solution is implemented for 1D meshes only")
    if k < 1:
        raise ValueError(f"mode number must be >= 1, got {k}")
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    lam = (k * np.pi) ** 2
    amp = np.exp(-t * complex(rho) * c) * mittag_leffler(alpha, -lam * t**alpha)
    x = mesh.free_coords[:, 0]
    return NodalField(amp * np.sin(k * np.pi * x), t)
