"""Grünwald coefficients and WSGD convolution-quadrature weights.

The weights ``w_j^(sigma)`` are the Taylor coefficients of

    (1 - z)**sigma * (1 + alpha/2 - (alpha/2) z)**(sigma/alpha)

so that ``a_tau(z)**sigma = tau**(-sigma) * sum_j w_j z**j``.  The
``tau**(-sigma)`` scale is left to the caller; one table serves every step
size.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class WeightTable:
    alpha: float
    sigma: float
    n_max: int
    weights: np.ndarray

    def __post_init__(self) -> None:
        self.weights.setflags(write=False)

    def __len__(self) -> int:
        return self.n_max + 1

    def __getitem__(self, j):
        return self.weights[j]


def grunwald_coeffs(s: float, n: int) -> np.ndarray:
    """Taylor coefficients of ``(1 - z)**s`` up to degree ``n``."""
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    c = np.empty(n + 1)
    c[0] = 1.0
    for j in range(1, n + 1):
        c[j] = c[j - 1] * (1.0 - (s + 1.0) / j)
    return c


def binomial_power_series(s: float, c: float, n: int) -> np.ndarray:
    """Taylor coefficients of ``(1 - c z)**s`` up to degree ``n``, 0 < c < 1."""
    if not 0.0 < c < 1.0:
        raise ValueError(f"c must lie in (0, 1), got {c}")
    return grunwald_coeffs(s, n) * c ** np.arange(n + 1)


def cauchy_product(a: np.ndarray, b: np.ndarray, n: int | None = None) -> np.ndarray:
    """First ``n + 1`` coefficients of the product of two power series."""
    if n is None:
        n = max(len(a), len(b)) - 1
    dtype = np.result_type(a, b)
    aa = np.zeros(n + 1, dtype=dtype)
    bb = np.zeros(n + 1, dtype=dtype)
    aa[: min(len(a), n + 1)] = a[: n + 1]
    bb[: min(len(b), n + 1)] = b[: n + 1]
    out = np.empty(n + 1, dtype=dtype)
    for k in range(n + 1):
        out[k] = np.dot(aa[: k + 1], bb[k::-1])
    return out


def fsd_weights(alpha: float, sigma: float, n: int) -> WeightTable:
    """WSGD weights of order ``sigma`` for the substantial derivative/integral.

    ``sigma = alpha`` gives the derivative weights, ``sigma = alpha - 1`` the
    substantial-integral weights.  Any real ``sigma`` is accepted.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    half = alpha / 2.0
    expo = sigma / alpha
    g = grunwald_coeffs(sigma, n)
    b = binomial_power_series(expo, half / (1.0 + half), n)
    w = (1.0 + half) ** expo * cauchy_product(g, b, n)
    return WeightTable(alpha=alpha, sigma=sigma, n_max=n, weights=w)


def wsgd_closed_form(sigma: float, n: int) -> np.ndarray:
    """Two-term shifted formula ``w_j = (sigma+2)/2 g_j - sigma/2 g_{j-1}``.

    Generating function ``(1 - z)**sigma * (1 + sigma/2 - (sigma/2) z)``.
    For ``sigma = alpha`` this coincides with ``fsd_weights(alpha, alpha, n)``.
    """
    g = grunwald_coeffs(sigma, n)
    w = (sigma + 2.0) / 2.0 * g
    w[1:] -= sigma / 2.0 * g[:-1]
    return w


INTEGRAL_RULES = ("generating", "wsgd")


def integral_weights(alpha: float, n: int, rule: str = "generating") -> WeightTable:
    """Weights of order ``alpha - 1`` for the substantial integral.

    ``generating``: coefficients of ``a_tau(z)**(alpha - 1)``, the same
    generating function as the derivative weights.
    ``wsgd``: the two-term shifted Grünwald formula applied directly with
    ``sigma = alpha - 1``.  This is the rule that reproduces the reference
    error tables for inhomogeneous problems; see the README.
    """
    sigma = alpha - 1.0
    if rule == "generating":
        return fsd_weights(alpha, sigma, n)
    if rule == "wsgd":
        if not 0.0 < alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
        return WeightTable(alpha, sigma, n, wsgd_closed_form(sigma, n))
    raise ValueError(f"unknown integral weight rule {rule!r}; expected one of {INTEGRAL_RULES}")
