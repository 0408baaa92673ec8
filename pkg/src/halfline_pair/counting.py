"""Finiteness of the discrete spectrum: localisation energy, effective potential, Bargmann count.

The sector is split smoothly by ``chi1((x2 - x1)/R)`` and ``chi2((x2 - x1)/R)``
with ``chi1^2 + chi2^2 = 1``; the price is the localisation energy

    W_R = |grad chi1|^2 + |grad chi2|^2 = (2/R^2) (chi1'^2 + chi2'^2)(t),  t = (x2 - x1)/R.

Projecting the far sector onto the one-particle ground state leaves a
one-dimensional operator ``-d^2/dx2^2 - Z_R`` whose negative eigenvalues are
bounded by ``int |x| Z_R``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DomainError
from .oned import EigResult1D
from .potentials import PotentialSpec, eval_v, tail_value
from .profiles import HALF_PI, SMOOTHSTEP_SLOPE, partition_pair, partition_pair_d1
from .twod import Grid2D, assemble_sector, lowest_eigs, DENSE_LIMIT


@dataclass(frozen=True)
class CuttingProfile:
    R: float

    def __post_init__(self):
        if not (self.R > 0 and math.isfinite(self.R)):
            raise ConfigError(f"R must be positive and finite, got {self.R}")

    def chi(self, t):
        return partition_pair(t)

    def chi_d1(self, t):
        return partition_pair_d1(t)

    @property
    def sup_W(self) -> float:
        """Closed-form maximum of W_R, reached at t = 3/2."""
        return 2.0 * (HALF_PI * SMOOTHSTEP_SLOPE[5]) ** 2 / self.R**2


def cutting_profile(R: float) -> CuttingProfile:
    return CuttingProfile(float(R))


def wr_eval(profile: CuttingProfile, x1, x2):
    t = (np.asarray(x2, dtype=float) - np.asarray(x1, dtype=float)) / profile.R
    d1, d2 = profile.chi_d1(t)
    return 2.0 / profile.R**2 * (d1**2 + d2**2)


def _kernel(profile: CuttingProfile, d):
    """``W_R + R W_R^2`` as a function of ``d = x2 - x1``."""
    w = wr_eval(profile, 0.0, d)
    return w + profile.R * w**2


@dataclass(frozen=True)
class ZProfile:
    x: np.ndarray
    Z: np.ndarray
    R: float


def effective_Z(psi0: EigResult1D, profile: CuttingProfile, x2_grid=None) -> ZProfile:
    """``Z_R(x2) = int (W_R + R W_R^2)(x1, x2) psi0(x1)^2 dx1`` by midpoint quadrature in x1.

    Without ``x2_grid`` the result lives on the psi0 lattice continued to
    ``x_max + 2R`` and is computed as a direct discrete convolution, which keeps
    the exact zeros for ``x2 <= R``.
    """
    h = psi0.h
    weights = psi0.psi0**2 * h
    if x2_grid is None:
        R = profile.R
        n_kernel = int(math.ceil(2.0 * R / h)) + 1
        kernel = _kernel(profile, np.arange(n_kernel) * h)
        Z = np.convolve(weights, kernel)
        x = (np.arange(Z.size) + 0.5) * h
        return ZProfile(x, Z, R)
    x2 = np.asarray(x2_grid, dtype=float)
    x1 = psi0.x
    Z = np.empty_like(x2)
    for start in range(0, x2.size, 256):
        block = x2[start:start + 256]
        Z[start:start + 256] = _kernel(profile, block[:, None] - x1[None, :]) @ weights
    return ZProfile(x2, Z, profile.R)


def bargmann_bound(x, Z, fit_fraction: float = 0.25) -> float:
    """Trapezoid of ``|x| Z`` plus an exponential tail bound beyond the last sample.

    The tail rate is a least-squares fit of ``log Z`` over the last
    ``fit_fraction`` of the strictly positive samples.
    """
    x = np.asarray(x, dtype=float)
    Z = np.asarray(Z, dtype=float)
    if np.any(Z < 0):
        raise DomainError("effective potential must be non-negative")
    if not np.any(Z > 0):
        return 0.0
    body = float(np.trapezoid(np.abs(x) * Z, x))
    if Z[-1] == 0.0:
        return body
    pos = np.flatnonzero(Z > 1e-300)
    window = pos[int((1.0 - fit_fraction) * pos.size):]
    if window.size < 3:
        raise DomainError("Z_R tail not integrable on this grid")
    slope = np.polyfit(x[window], np.log(Z[window]), 1)[0]
    if slope >= 0:
        raise DomainError("Z_R tail not integrable on this grid")
    a = -slope
    x_last = abs(x[-1])
    return body + float(Z[-1] * (x_last / a + 1.0 / a**2))


def sturm_count(diag: np.ndarray, off: np.ndarray, shift: float) -> int:
    """Number of eigenvalues of a symmetric tridiagonal matrix below ``shift``.

    Counts negative pivots of ``LDL^T`` of ``T - shift`` (Sylvester's law of inertia).
    """
    count = 0
    d = diag[0] - shift
    tiny = np.finfo(float).tiny
    for i in range(diag.size):
        if i:
            d = diag[i] - shift - off[i - 1] ** 2 / d
        if d == 0.0:
            d = -tiny
        if d < 0:
            count += 1
    return count


@dataclass(frozen=True)
class Q0Count:
    count: int
    count_extended: int
    X: float
    h: float
    stable: bool


def _q0_tridiagonal(x, Z, X: float, h: float):
    n = int(round(2.0 * X / h))
    y = -X + (np.arange(n) + 0.5) * h
    z = np.interp(y, x, Z, left=0.0, right=0.0)
    inv = 1.0 / h**2
    diag = 2.0 * inv - z
    diag[0] += inv
    diag[-1] += inv
    return diag, np.full(n - 1, -inv)


def count_negative_q0(x, Z, X: float | None = None, h: float | None = None,
                      count_tol: float = 1e-10) -> Q0Count:
    """Negative eigenvalues of ``-d^2/dx^2 - Z`` on ``(-X, X)`` with Dirichlet ends.

    ``Z`` is sampled on ``x`` and taken as zero outside.  The count is repeated
    at ``1.5 X``; a change is reported through ``stable`` and a warning.
    """
    x = np.asarray(x, dtype=float)
    Z = np.asarray(Z, dtype=float)
    if X is None:
        X = 1.25 * float(np.max(np.abs(x)))
    if h is None:
        h = min(0.02, X / 1000.0)
    diag, off = _q0_tridiagonal(x, Z, X, h)
    count = sturm_count(diag, off, -count_tol)
    diag2, off2 = _q0_tridiagonal(x, Z, 1.5 * X, h)
    count2 = sturm_count(diag2, off2, -count_tol)
    stable = count == count2
    if not stable:
        warnings.warn(f"negative-eigenvalue count of q0 changed from {count} to {count2} under X -> 1.5 X")
    return Q0Count(count, count2, float(X), float(h), stable)


@dataclass
class CountingBoundReport:
    R: float
    sup_WR: float
    Z: ZProfile = field(repr=False)
    bargmann: float
    n_q0: int
    n_q0_stable: bool
    admissible_R: bool
    exterior_margin: float
    b_margin: float
    notes: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "R": self.R,
            "sup_WR": self.sup_WR,
            "sup_WR_times_R2": self.sup_WR * self.R**2,
            "bargmann": self.bargmann,
            "n_q0": self.n_q0,
            "n_q0_stable": self.n_q0_stable,
            "admissible_R": self.admissible_R,
            "exterior_margin": self.exterior_margin,
            "b_margin": self.b_margin,
            "notes": list(self.notes),
        }


def finiteness_audit(spec: PotentialSpec, psi0: EigResult1D, R: float) -> CountingBoundReport:
    """Check the two conditions on R and assemble the counting report.

    Exterior sector: ``v(x1) - sup W_R >= eps0`` for every sampled ``x1 > R``
    (and for the tail value).  Far sector: ``E2 - 1/R - sup W_R >= eps0``.
    """
    profile = cutting_profile(R)
    sup_w = profile.sup_W
    eps0 = psi0.eps0
    notes = []
    x = psi0.x
    far = x > R
    v_inf = tail_value(spec)
    candidates = []
    if np.any(far):
        candidates.append(float(np.min(eval_v(spec, x[far]))))
    if math.isfinite(v_inf):
        candidates.append(v_inf)
    if not candidates:
        candidates.append(float(eval_v(spec, x[-1])))
    exterior = min(candidates) - sup_w - eps0
    b_margin = psi0.e2 - 1.0 / R - sup_w - eps0
    if exterior < 0:
        notes.append(f"exterior condition v(x1) - sup W_R >= eps0 violated for x1 > R (margin {exterior:.6g})")
    if b_margin < 0:
        notes.append(f"condition E2 - 1/R - sup W_R >= eps0 violated (margin {b_margin:.6g})")
    if psi0.e2_is_continuum:
        notes.append("E2 taken as the tail value (second level belongs to the continuum)")

    Z = effective_Z(psi0, profile)
    bound = bargmann_bound(Z.x, Z.Z)
    q0 = count_negative_q0(Z.x, Z.Z)
    if not q0.stable:
        notes.append("q0 count changed under domain growth")
    return CountingBoundReport(
        R=float(R),
        sup_WR=sup_w,
        Z=Z,
        bargmann=bound,
        n_q0=q0.count,
        n_q0_stable=q0.stable,
        admissible_R=bool(exterior >= 0 and b_margin >= 0),
        exterior_margin=float(exterior),
        b_margin=float(b_margin),
        notes=notes,
    )


def interior_sector_count(spec: PotentialSpec, R: float, eps0: float, h: float = 0.1) -> int:
    """Eigenvalues below eps0 on ``{x1 < R, x2 - x1 < 2R}`` with potential ``v - W_R``.

    All cuts are Neumann, which can only raise the count.
    """
    profile = cutting_profile(R)
    X = round(3.0 * R / h) * h
    grid = Grid2D(X, h, "plus", "neumann")
    op = assemble_sector(
        lambda x1, x2: eval_v(spec, x1) - wr_eval(profile, x1, x2),
        grid,
        keep=lambda x1, x2: (x1 < R) & (x2 - x1 < 2.0 * R),
        cut_bc="neumann",
    )
    k = 4
    while True:
        w = lowest_eigs(op, min(k, op.dim - 2 if op.dim > DENSE_LIMIT else op.dim)).values
        if w[-1] >= eps0 or w.size >= op.dim - 2 or k > 512:
            return int(np.count_nonzero(w < eps0))
        k *= 2
