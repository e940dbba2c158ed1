"""Smooth radial plateau functions used as tail-indicator surrogates.

The base profile is the degree-9 polynomial smoothstep on [0, 1],

    s(t) = 70 t^9 - 315 t^8 + 540 t^7 - 420 t^6 + 126 t^5,

the minimal-degree polynomial with four vanishing derivatives at both ends,
so every rescaled plateau is C^4 on the whole line.  ``PlateauSpec(m, eps)``
maps a radius r to s((r - m) / eps): identically 0 for r <= m, identically
1 for r >= m + eps, strictly increasing in between, and s has the odd
symmetry s(1 - t) = 1 - s(t) about the midpoint.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError


def smoothstep9(t):
    """Degree-9 smoothstep on [0,1], clamped outside; C^4 everywhere."""
    t = np.clip(t, 0.0, 1.0)
    return t**5 * (70.0 * t**4 - 315.0 * t**3 + 540.0 * t**2 - 420.0 * t + 126.0)


@dataclass(frozen=True)
class PlateauSpec:
    """p_{m,eps}: 0 on [0, m], 1 on [m + eps, inf), C^4 ramp in between."""

    m: float
    eps: float

    def __post_init__(self):
        if self.m > 1:
            raise ParameterError(f"plateau offset m must be <= 1, got {self.m}")
        if not self.eps > 0:
            raise ParameterError(f"plateau width eps must be > 0, got {self.eps}")


def plateau_eval(spec: PlateauSpec, r):
    """Evaluate p_{m,eps} at radius r (scalar or array), values in [0, 1]."""
    r = np.asarray(r, dtype=np.float64)
    out = smoothstep9((r - spec.m) / spec.eps)
    return float(out) if out.ndim == 0 else out
