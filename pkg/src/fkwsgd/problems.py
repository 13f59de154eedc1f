"""Named scalar fields and space-time sources used by problem configs.

A field reference is ``{"name": ..., "params": {...}}`` (or a bare name).
Spatial fields are called as ``fn(x)`` with ``x`` of shape ``(n, dim)``;
sources are called as ``fn(x, t)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

SpatialField = Callable[[np.ndarray], np.ndarray]
SourceField = Callable[[np.ndarray, float], np.ndarray]


@dataclass(frozen=True)
class FieldRef:
    name: str
    params: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def parse(cls, obj) -> "FieldRef":
        if isinstance(obj, FieldRef):
            return obj
        if isinstance(obj, str):
            return cls(obj)
        if isinstance(obj, dict) and "name" in obj:
            return cls(obj["name"], dict(obj.get("params", {})))
        raise ValueError(f"cannot interpret field reference {obj!r}")

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {"name": self.name}
        if self.params:
            out["params"] = self.params
        return out


def _open(x, a, b):
    return ((x > a) & (x < b)).astype(float)


def _chi(x, a=0.0, b=0.5):
    # open interval: the endpoints themselves map to 0
    return _open(x[:, 0], a, b)


def _chi_box(x, a=0.0, b=0.5, c=0.0, d=0.5):
    return _open(x[:, 0], a, b) * _open(x[:, 1], c, d)


def _poly(x):
    return x[:, 0] * (1.0 - x[:, 0])


def _poly2(x):
    return x[:, 0] * (1.0 - x[:, 0]) * x[:, 1] * (1.0 - x[:, 1])


def _linear(x):
    return x[:, 0] + x[:, 1]


def _quadratic(x):
    return x[:, 0] ** 2 + x[:, 1] ** 2


def _zero(x):
    return np.zeros(len(x))


def _const(x, c=1.0):
    return np.full(len(x), float(c))


def _sin_mode(x, k=1):
    return np.prod(np.sin(k * np.pi * x), axis=1)


SPATIAL_FIELDS: dict[str, Callable[..., np.ndarray]] = {
    "chi": _chi,
    "chi-box": _chi_box,
    "poly": _poly,
    "poly2": _poly2,
    "linear": _linear,
    "quadratic": _quadratic,
    "zero": _zero,
    "const": _const,
    "sin-mode": _sin_mode,
}


def resolve_spatial(ref) -> SpatialField:
    ref = FieldRef.parse(ref)
    try:
        fn = SPATIAL_FIELDS[ref.name]
    except KeyError:
        raise KeyError(
            f"unknown field {ref.name!r}; known: {sorted(SPATIAL_FIELDS)}"
        ) from None
    params = dict(ref.params)
    return lambda x: fn(np.atleast_2d(x), **params)


def resolve_source(ref, rho: complex, potential) -> SourceField:
    """Space-time source.

    ``tempered`` multiplies a spatial field by ``exp(-t rho U(x))`` using the
    problem's own potential; any spatial field name gives a time-independent
    source.
    """
    ref = FieldRef.parse(ref)
    if ref.name == "tempered":
        base = resolve_spatial(ref.params.get("field", "zero"))
        u = resolve_spatial(potential)
        rho = complex(rho)
        return lambda x, t: base(x) * np.exp(-t * rho * u(x))
    base = resolve_spatial(ref)
    return lambda x, t: base(x)


def is_zero(ref) -> bool:
    ref = FieldRef.parse(ref)
    if ref.name == "tempered":
        return is_zero(ref.params.get("field", "zero"))
    return ref.name == "zero"
