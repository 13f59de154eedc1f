"""Time marching for the backward fractional Feynman-Kac equation.

Each step solves

    (w_0 / tau^a) M G^n + S G^n = M R^n

where ``R^n`` gathers the WSGD history, the initial-data terms and the
substantial-integral quadrature of the source.  The left-hand matrix does not
depend on ``n`` and is factorised once per solve.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .fracweights import INTEGRAL_RULES, fsd_weights, integral_weights
from .mesh_fem import FemSystem, NodalField, interpolate, l2_norm
from .problems import FieldRef, resolve_source, resolve_spatial
from .substantial import build_factors

log = logging.getLogger(__name__)

# above this many table entries the exponential factors are formed per step
FULL_TABLE_LIMIT = 50_000_000


@dataclass(frozen=True)
class ProblemSpec:
    alpha: float
    rho: complex
    T: float
    U: FieldRef
    G0: FieldRef
    f: FieldRef
    dim: int = 1
    correction: bool = True
    source_weights: str = "generating"

    def __post_init__(self) -> None:
        if self.source_weights not in INTEGRAL_RULES:
            raise ValueError(f"source_weights must be one of {INTEGRAL_RULES}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie strictly in (0, 1), got {self.alpha}")
        if self.T <= 0:
            raise ValueError(f"T must be positive, got {self.T}")
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        for name in ("U", "G0", "f"):
            object.__setattr__(self, name, FieldRef.parse(getattr(self, name)))
        object.__setattr__(self, "rho", complex(self.rho))


@dataclass(frozen=True)
class SolveResult:
    fields: list[NodalField]
    tau: float
    n_steps: int
    trajectory: bool = field(default=False)

    @property
    def final(self) -> NodalField:
        return self.fields[-1]


class SolverError(RuntimeError):
    pass


def n_steps_for(T: float, tau: float) -> int:
    if tau <= 0:
        raise ValueError(f"tau must be positive, got {tau}")
    ratio = T / tau
    n = round(ratio)
    if n < 1 or abs(ratio - n) > 1e-12 * max(ratio, 1.0):
        raise ValueError(f"T/tau = {ratio!r} is not a positive integer")
    return int(n)


def _factorize(a: sp.spmatrix, cache: bool):
    if not cache:
        a = a.tocsc()
        return lambda b: spla.spsolve(a, b)
    try:
        lu = spla.splu(a.tocsc())
    except RuntimeError as exc:
        raise SolverError(f"factorization failed: {exc}") from exc
    return lu.solve


def solve(
    spec: ProblemSpec,
    sys: FemSystem,
    tau: float,
    *,
    trajectory: bool = False,
    cache_factorization: bool = True,
) -> SolveResult:
    """March the corrected (or uncorrected) WSGD scheme to ``T``."""
    if sys.mesh.dim != spec.dim:
        raise ValueError(f"problem is {spec.dim}D but mesh is {sys.mesh.dim}D")
    n_steps = n_steps_for(spec.T, tau)
    alpha, rho = spec.alpha, spec.rho
    mesh = sys.mesh
    n_free = mesh.n_free

    wa = fsd_weights(alpha, alpha, n_steps).weights
    wb = integral_weights(alpha, n_steps, spec.source_weights).weights
    scale_d = tau**-alpha
    scale_i = tau ** (1.0 - alpha)

    u = np.real(resolve_spatial(spec.U)(mesh.free_coords))
    if (n_steps + 1) * n_free <= FULL_TABLE_LIMIT:
        factors = build_factors(rho, u, tau, n_steps).factors
    else:
        # validates the overflow bound without storing the table
        build_factors(rho, u, tau, 0)
        factors = None

    def factor_rows(j0: int, j1: int) -> np.ndarray:
        if factors is not None:
            return factors[j0:j1]
        j = np.arange(j0, j1, dtype=float)
        return np.exp(-(j[:, None] * tau) * rho * u)

    g0 = interpolate(mesh, lambda x, t: resolve_spatial(spec.G0)(x)).values
    src = resolve_source(spec.f, rho, spec.U)
    fk = np.empty((n_steps + 1, n_free), dtype=complex)
    for k in range(n_steps + 1):
        fk[k] = interpolate(mesh, src, k * tau).values

    mass = sys.mass
    lhs = (wa[0] * scale_d) * mass + sys.stiffness
    solve_lin = _factorize(lhs, cache_factorization)

    hist = np.zeros((n_steps + 1, n_free), dtype=complex)
    hist[0] = g0
    out: list[NodalField] = []
    wsum = 0.0  # running sum of wa[0..n-1]
    for n in range(1, n_steps + 1):
        wsum += wa[n - 1]
        e_n = factor_rows(n, n + 1)[0]
        rhs = np.zeros(n_free, dtype=complex)
        if n > 1:
            j = slice(1, n)
            terms = wa[j, None] * factor_rows(1, n) * hist[n - 1 : 0 : -1]
            rhs -= scale_d * terms.sum(axis=0)
        g0_weight = wsum + (0.5 * wa[n - 1] if spec.correction else 0.0)
        rhs += (scale_d * g0_weight) * (e_n * g0)
        # source quadrature: j = 0..n-1 pairs with f^n..f^1
        terms = wb[:n, None] * factor_rows(0, n) * fk[n:0:-1]
        rhs += scale_i * terms.sum(axis=0)
        if spec.correction:
            rhs += (0.5 * scale_i * wb[n - 1]) * (factor_rows(n - 1, n)[0] * fk[0])
        else:
            rhs += (scale_i * wb[n]) * (e_n * fk[0])
        g = solve_lin(mass @ rhs)
        if not np.all(np.isfinite(g)):
            raise SolverError(f"non-finite solution at step {n}")
        hist[n] = g
        if trajectory:
            out.append(NodalField(g, n * tau))
    if not trajectory:
        out.append(NodalField(hist[n_steps], n_steps * tau))
    log.debug("solved %d steps, tau=%g, %d dofs", n_steps, tau, n_free)
    return SolveResult(out, tau, n_steps, trajectory)


def self_convergence_error(spec: ProblemSpec, sys: FemSystem, tau: float) -> float:
    """``||G_tau - G_{tau/2}||`` at the final time."""
    coarse = solve(spec, sys, tau).final
    fine = solve(spec, sys, tau / 2.0).final
    return l2_norm(sys, coarse.values - fine.values)


def fitted_rate(taus, errors) -> float:
    """Least-squares slope of ``log(error)`` against ``log(tau)``."""
    taus = np.asarray(taus, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if len(taus) < 2 or np.any(errors <= 0):
        return math.nan
    return float(np.polyfit(np.log(taus), np.log(errors), 1)[0])
