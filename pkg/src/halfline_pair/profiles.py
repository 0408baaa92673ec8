"""Smooth step, cutoff and partition-of-unity profiles with closed-form derivatives.

All profiles are built from polynomial smoothsteps on [0, 1]:

* quintic ``s5(t) = 10t^3 - 15t^4 + 6t^5`` (C^2 at the junctions),
* septic ``s7(t) = 35t^4 - 84t^5 + 70t^6 - 20t^7`` (C^3 at the junctions).

Every function accepts scalars or arrays and is vectorised with numpy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HALF_PI = 0.5 * np.pi


def _clip01(t):
    return np.clip(np.asarray(t, dtype=float), 0.0, 1.0)


def smoothstep(t, order: int = 5, deriv: int = 0):
    """Polynomial smoothstep (or one of its first two derivatives), clamped to [0, 1]."""
    u = _clip01(t)
    inside = (np.asarray(t) > 0.0) & (np.asarray(t) < 1.0)
    if deriv == 0 and order in (5, 7):
        # s(1 - u) = 1 - s(u): evaluate the upper half by reflection to keep 1 - s accurate
        low = np.minimum(u, 1.0 - u)
        base = low**3 * (10.0 - 15.0 * low + 6.0 * low**2) if order == 5 else \
            low**4 * (35.0 - 84.0 * low + 70.0 * low**2 - 20.0 * low**3)
        return np.where(u <= 0.5, base, 1.0 - base)
    if order == 5:
        if deriv == 1:
            return np.where(inside, 30.0 * u**2 * (1.0 - u) ** 2, 0.0)
        if deriv == 2:
            return np.where(inside, 60.0 * u * (1.0 - u) * (1.0 - 2.0 * u), 0.0)
    elif order == 7:
        if deriv == 1:
            return np.where(inside, 140.0 * u**3 * (1.0 - u) ** 3, 0.0)
        if deriv == 2:
            return np.where(inside, 420.0 * u**2 * (1.0 - u) ** 2 * (1.0 - 2.0 * u), 0.0)
    else:
        raise ValueError(f"unsupported smoothstep order {order}")
    raise ValueError(f"unsupported derivative order {deriv}")


# max |s'| on [0, 1], attained at t = 1/2
SMOOTHSTEP_SLOPE = {5: 15.0 / 8.0, 7: 35.0 / 16.0}


@dataclass(frozen=True)
class Cutoff:
    """Decreasing cutoff: 1 for ``t <= start``, 0 for ``t >= start + width``."""

    start: float = 1.0
    width: float = 1.0
    order: int = 5

    def __post_init__(self):
        if self.width <= 0:
            raise ValueError("cutoff width must be positive")

    def _u(self, t):
        return (np.asarray(t, dtype=float) - self.start) / self.width

    def __call__(self, t):
        return 1.0 - smoothstep(self._u(t), self.order)

    def d1(self, t):
        return -smoothstep(self._u(t), self.order, 1) / self.width

    def d2(self, t):
        return -smoothstep(self._u(t), self.order, 2) / self.width**2

    @property
    def end(self) -> float:
        return self.start + self.width

    @property
    def sup_d1(self) -> float:
        return SMOOTHSTEP_SLOPE[self.order] / self.width


@dataclass(frozen=True)
class Ramp:
    """Increasing ramp: 0 for ``t <= 1``, 1 for ``t >= 2`` (quintic)."""

    def __call__(self, t):
        return smoothstep(np.asarray(t, dtype=float) - 1.0)

    def d1(self, t):
        return smoothstep(np.asarray(t, dtype=float) - 1.0, deriv=1)

    def d2(self, t):
        return smoothstep(np.asarray(t, dtype=float) - 1.0, deriv=2)


DEFAULT_CUTOFF = Cutoff()
SHIFTED_CUTOFF = Cutoff(start=1.1, width=0.9)
RAMP = Ramp()


def partition_pair(t):
    """Return ``(chi1, chi2)`` with ``chi1**2 + chi2**2 == 1`` pointwise."""
    angle = HALF_PI * smoothstep(np.asarray(t, dtype=float) - 1.0)
    return np.cos(angle), np.sin(angle)


def partition_pair_d1(t):
    """Derivatives ``(chi1', chi2')`` of :func:`partition_pair`."""
    u = np.asarray(t, dtype=float) - 1.0
    angle = HALF_PI * smoothstep(u)
    slope = HALF_PI * smoothstep(u, deriv=1)
    return -slope * np.sin(angle), slope * np.cos(angle)
