"""Nodal tempering factors ``exp(-t_j * rho * U(x_i))``.

The substantial derivative and integral multiply each history term by a
time-space coupled exponential.  With P1 elements this is realised as a
diagonal scaling of nodal values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh_fem import NodalField

# exp() overflows float64 just above 709
MAX_EXPONENT = 700.0


class FactorOverflowError(OverflowError):
    pass


@dataclass(frozen=True)
class ExpFactorTable:
    rho: complex
    u_values: np.ndarray
    tau: float
    n_max: int
    factors: np.ndarray  # (n_max + 1, n_nodes), complex

    def row(self, j: int) -> np.ndarray:
        if not 0 <= j <= self.n_max:
            raise IndexError(f"factor row {j} outside 0..{self.n_max}")
        return self.factors[j]


def factor_exponents(rho: complex, u, tau: float, j) -> np.ndarray:
    """Exponents ``-j * tau * rho * u`` (broadcasts over ``j`` and ``u``)."""
    j = np.asarray(j, dtype=float)
    return -(j[..., None] * tau) * complex(rho) * np.asarray(u, dtype=float)


def build_factors(rho: complex, u, tau: float, n_max: int) -> ExpFactorTable:
    """Tabulate ``exp(-j tau rho u_i)`` for ``j = 0..n_max`` by direct exponentiation."""
    if tau <= 0:
        raise ValueError(f"tau must be positive, got {tau}")
    if n_max < 0:
        raise ValueError(f"n_max must be non-negative, got {n_max}")
    u = np.asarray(u, dtype=float)
    expo = factor_exponents(rho, u, tau, np.arange(n_max + 1))
    if expo.size and expo.real.max() > MAX_EXPONENT:
        raise FactorOverflowError(
            f"exponent real part {expo.real.max():.4g} exceeds {MAX_EXPONENT}"
        )
    factors = np.exp(expo)
    factors.setflags(write=False)
    return ExpFactorTable(complex(rho), u, float(tau), int(n_max), factors)


def apply_factor(table: ExpFactorTable, j: int, v) -> NodalField:
    """Return ``factors[j] * v`` as a new field; ``v`` is left untouched."""
    vals = v.values if isinstance(v, NodalField) else np.asarray(v)
    row = table.row(j)
    if vals.shape != row.shape:
        raise ValueError(f"field has shape {vals.shape}, table has {row.shape}")
    time = v.time if isinstance(v, NodalField) else 0.0
    return NodalField(row * vals, time)
