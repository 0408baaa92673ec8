"""Finite-difference solver for the one-particle operator -d^2/dx^2 + v on the half-line.

Nodes are cell-centred, ``x_i = (i + 1/2) h``, so the potential is never
evaluated at the origin.  Boundary conditions are imposed through ghost
values: a mirror ghost (``psi_{-1} = psi_0``) for Neumann and an
antisymmetric ghost (``psi_{-1} = -psi_0``) for Dirichlet, which places the
zero exactly on the boundary face.  The same rule applies at ``x_max``.

The ground state is reconstructed from its eigenvalue by a two-sided ratio
recurrence carried out in log space.  This keeps it strictly positive and
accurate far into the decaying tail where a dense eigenvector is just noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import AssemblyError, ConfigError, DomainError, GroundStateError
from .potentials import PotentialSpec, eval_v, tail_value
from .profiles import Cutoff

BCS = ("neumann", "dirichlet")

# ghost contribution to the boundary diagonal entry, in units of 1/h^2
_GHOST = {"neumann": -1.0, "dirichlet": 1.0}


@dataclass(frozen=True)
class Grid1D:
    x_max: float
    n_points: int
    bc_origin: str = "neumann"
    bc_outer: str = "dirichlet"

    def __post_init__(self):
        if not (self.x_max > 0 and math.isfinite(self.x_max)):
            raise ConfigError(f"x_max must be positive and finite, got {self.x_max}")
        if int(self.n_points) != self.n_points or self.n_points < 8:
            raise ConfigError(f"n_points must be an integer >= 8, got {self.n_points}")
        for bc in (self.bc_origin, self.bc_outer):
            if bc not in BCS:
                raise ConfigError(f"boundary condition must be one of {BCS}, got {bc!r}")

    @classmethod
    def from_spacing(cls, x_max: float, h: float, bc_origin: str = "neumann",
                     bc_outer: str = "dirichlet") -> "Grid1D":
        if not h > 0:
            raise ConfigError(f"spacing must be positive, got {h}")
        n = max(int(round(x_max / h)), 8)
        return cls(n * h, n, bc_origin, bc_outer)

    @property
    def h(self) -> float:
        return self.x_max / self.n_points

    @property
    def nodes(self) -> np.ndarray:
        return (np.arange(self.n_points) + 0.5) * self.h

    def with_(self, **changes) -> "Grid1D":
        fields = dict(x_max=self.x_max, n_points=self.n_points, bc_origin=self.bc_origin, bc_outer=self.bc_outer)
        fields.update(changes)
        return Grid1D(**fields)


@dataclass(frozen=True)
class Tridiagonal:
    """Symmetric tridiagonal matrix stored as its diagonal and off-diagonal."""

    diag: np.ndarray
    off: np.ndarray

    def __matmul__(self, u):
        u = np.asarray(u, dtype=float)
        out = self.diag * u
        out[:-1] += self.off * u[1:]
        out[1:] += self.off * u[:-1]
        return out

    def dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.off, 1) + np.diag(self.off, -1)

    def norm_bound(self) -> float:
        """Gershgorin bound on the spectral norm."""
        a = np.abs(self.off)
        row = np.abs(self.diag).copy()
        row[:-1] += a
        row[1:] += a
        return float(np.max(row))


def assemble_h1d(spec: PotentialSpec, grid: Grid1D) -> Tridiagonal:
    """Three-point stencil ``(-1, 2, -1)/h^2`` plus ``v(x_i)`` with ghost-node boundaries."""
    h = grid.h
    x = grid.nodes
    v = np.asarray(eval_v(spec, x), dtype=float)
    bad = np.flatnonzero(~np.isfinite(v))
    if bad.size:
        i = int(bad[0])
        raise AssemblyError(f"non-finite potential sample at node {i} (x = {x[i]!r})")
    inv_h2 = 1.0 / h**2
    diag = 2.0 * inv_h2 + v
    diag[0] += _GHOST[grid.bc_origin] * inv_h2
    diag[-1] += _GHOST[grid.bc_outer] * inv_h2
    off = np.full(grid.n_points - 1, -inv_h2)
    return Tridiagonal(diag, off)


def lowest_levels(op: Tridiagonal, k: int) -> tuple[np.ndarray, np.ndarray]:
    """The k lowest eigenpairs (bisection plus inverse iteration)."""
    k = min(k, op.diag.size)
    return eigh_tridiagonal(op.diag, op.off, select="i", select_range=(0, k - 1))


@dataclass(frozen=True)
class EigResult1D:
    eps0: float
    psi0: np.ndarray
    e2: float
    residual: float
    grid: Grid1D
    log_psi0: np.ndarray = field(repr=False)
    e2_discrete: float = math.nan
    e2_is_continuum: bool = False
    below_tail: bool = True
    gap_positive: bool = True
    truncation_shift: float | None = None
    b_confirmed: bool = True

    @property
    def x(self) -> np.ndarray:
        return self.grid.nodes

    @property
    def h(self) -> float:
        return self.grid.h

    def to_json(self) -> dict:
        return {
            "eps0": self.eps0,
            "e2": self.e2,
            "e2_discrete": self.e2_discrete,
            "residual": self.residual,
            "grid": {
                "x_max": self.grid.x_max,
                "n_points": self.grid.n_points,
                "h": self.grid.h,
                "bc_origin": self.grid.bc_origin,
                "bc_outer": self.grid.bc_outer,
            },
            "flags": {
                "e2_is_continuum": self.e2_is_continuum,
                "below_tail": self.below_tail,
                "gap_positive": self.gap_positive,
                "truncation_shift": self.truncation_shift,
                "b_confirmed": self.b_confirmed,
                "min_psi0_positive": bool(np.all(self.log_psi0 > -np.inf)),
            },
        }


def positive_ground_vector(op: Tridiagonal, eps: float, peak: int) -> np.ndarray:
    """log psi for the null vector of ``op - eps``, built from both ends toward ``peak``.

    Forward ratios ``psi_{i+1}/psi_i`` are stable where psi grows, backward ratios
    ``psi_{i-1}/psi_i`` where it decays; the two halves are glued at the peak.
    Any non-positive ratio means the discrete ground state has a node.
    """
    n = op.diag.size
    c = -op.off[0]  # uniform coupling 1/h^2
    a = (op.diag - eps) / c
    log_psi = np.zeros(n)
    r = a[0]
    for i in range(peak):
        if r <= 0:
            raise GroundStateError("ground state not positive: refine grid")
        log_psi[i + 1] = log_psi[i] + math.log(r)
        r = a[i + 1] - 1.0 / r
    s = a[n - 1]
    tail = np.zeros(n)
    for i in range(n - 1, peak, -1):
        if s <= 0:
            raise GroundStateError("ground state not positive: refine grid")
        tail[i - 1] = tail[i] + math.log(s)
        s = a[i - 1] - 1.0 / s
    # tail holds log(psi_i / psi_{n-1}); shift it so both halves agree at the peak
    log_psi[peak:] = tail[peak:] - tail[peak] + log_psi[peak]
    return log_psi


def _normalize_log(log_psi: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    top = np.max(log_psi)
    scale = 0.5 * math.log(h * np.sum(np.exp(2.0 * (log_psi - top)))) + top
    log_psi = log_psi - scale
    return np.exp(log_psi), log_psi


def _longer(grid: Grid1D) -> Grid1D:
    """About 50% more domain on the same lattice, so breakpoints stay on cell faces."""
    n = int(round(1.5 * grid.n_points))
    return grid.with_(x_max=n * grid.h, n_points=n)


def ground_state(spec: PotentialSpec, grid: Grid1D, check_stability: bool = True) -> EigResult1D:
    """Lowest two eigenvalues and the positive normalised ground state on ``grid``.

    ``e2`` is the second discrete eigenvalue unless it lies at or above the
    tail value, in which case it belongs to the discretised continuum and
    ``e2 = v_inf`` is reported instead.  With ``check_stability`` the bottom is
    re-solved on a 50% longer domain; a finite-tail bound state is confirmed
    only if it does not move.
    """
    op = assemble_h1d(spec, grid)
    w, vecs = lowest_levels(op, 2)
    eps0, e2_discrete = float(w[0]), float(w[1])
    peak = int(np.argmax(np.abs(vecs[:, 0])))
    log_psi = positive_ground_vector(op, eps0, peak)
    psi, log_psi = _normalize_log(log_psi, grid.h)

    scale = op.norm_bound()
    res0 = np.linalg.norm(op @ psi - eps0 * psi) / np.linalg.norm(psi)
    res1 = np.linalg.norm(op @ vecs[:, 1] - e2_discrete * vecs[:, 1])
    residual = float(max(res0, res1))

    v_inf = tail_value(spec)
    tol = 64 * np.finfo(float).eps * scale
    below_tail = eps0 < v_inf - tol
    e2_is_continuum = not e2_discrete < v_inf
    e2 = min(e2_discrete, v_inf)
    gap_positive = e2 - eps0 > tol

    shift = None
    stable = True
    if check_stability and math.isfinite(v_inf):
        longer = _longer(grid)
        w_long, _ = lowest_levels(assemble_h1d(spec, longer), 1)
        shift = float(w_long[0] - eps0)
        stable = abs(shift) <= max(1e-8 * (1.0 + abs(eps0)), tol)
    return EigResult1D(
        eps0=eps0,
        psi0=psi,
        e2=float(e2),
        residual=residual,
        grid=grid,
        log_psi0=log_psi,
        e2_discrete=e2_discrete,
        e2_is_continuum=e2_is_continuum,
        below_tail=bool(below_tail),
        gap_positive=bool(gap_positive),
        truncation_shift=shift,
        b_confirmed=bool(below_tail and gap_positive and stable),
    )


def auto_x_max(spec: PotentialSpec, eps0: float, cap: float = 400.0) -> float:
    """Truncation length for which the ground-state tail is negligible.

    Finite tail: ``exp(-sqrt(v_inf - eps0) x_max / 2) < 1e-12``.  Infinite tail:
    the first point where ``v >= eps0 + 50``.  Both are clipped to ``cap`` and
    kept beyond the potential's feature scale.
    """
    v_inf = tail_value(spec)
    floor = 4.0 * spec.feature_scale()
    if math.isfinite(v_inf):
        if not eps0 < v_inf:
            return cap
        length = 2.0 * math.log(1e12) / math.sqrt(v_inf - eps0) + spec.feature_scale()
        return float(min(max(length, floor), cap))
    x = max(spec.feature_scale(), 1e-3)
    while eval_v(spec, x) < eps0 + 50.0:
        x *= 1.05
        if x > cap:
            return cap
    return float(max(x, floor))


def solve_ground_state(spec: PotentialSpec, h: float = 1e-3, x_max: float | None = None,
                       bc_origin: str = "neumann", bc_outer: str = "dirichlet",
                       x_max_cap: float = 400.0) -> EigResult1D:
    """Ground state on an automatically sized domain (coarse pre-solve sets ``x_max``)."""
    if x_max is None:
        trial = Grid1D.from_spacing(min(max(20.0 * spec.feature_scale(), 20.0), x_max_cap),
                                    max(h, 0.02), bc_origin, bc_outer)
        eps_coarse = ground_state(spec, trial, check_stability=False).eps0
        x_max = auto_x_max(spec, eps_coarse, x_max_cap)
    return ground_state(spec, Grid1D.from_spacing(x_max, h, bc_origin, bc_outer))


def bound_levels(spec: PotentialSpec, grid: Grid1D, k: int = 6, tol: float = 1e-8) -> dict:
    """Lowest k discrete levels, split into bound states and discretised continuum.

    A level counts as a bound state if it lies below the tail value and moves
    by less than ``tol`` when ``x_max`` grows by 50%.
    """
    w, _ = lowest_levels(assemble_h1d(spec, grid), k)
    longer = _longer(grid)
    w_long, _ = lowest_levels(assemble_h1d(spec, longer), k)
    v_inf = tail_value(spec)
    below = w < v_inf
    shifts = np.abs(w_long[: w.size] - w)
    return {
        "eigenvalues": w,
        "below_tail": below,
        "stable": shifts < tol * (1.0 + np.abs(w)),
        "shifts": shifts,
    }


def truncated_bottom(spec: PotentialSpec, L: float, bc: str, h: float,
                     bc_origin: str = "neumann") -> float:
    """Lowest eigenvalue of the operator truncated to (0, L) with ``bc`` at L."""
    if not L > 0:
        raise ConfigError(f"L must be positive, got {L}")
    grid = Grid1D.from_spacing(L, h, bc_origin, bc)
    return float(lowest_levels(assemble_h1d(spec, grid), 1)[0][0])


def richardson_eps0(spec: PotentialSpec, x_max: float, h: float,
                    bc_origin: str = "neumann", bc_outer: str = "dirichlet") -> tuple[float, float]:
    """Second-order Richardson extrapolation of the bottom from spacings h and h/2.

    Returns ``(extrapolated value, error estimate of the h-value)``.
    """
    coarse = truncated_bottom(spec, x_max, bc_outer, h, bc_origin)
    fine = truncated_bottom(spec, x_max, bc_outer, 0.5 * h, bc_origin)
    extrapolated = (4.0 * fine - coarse) / 3.0
    return extrapolated, abs(coarse - extrapolated)


def _derivative(result: EigResult1D, u: np.ndarray) -> np.ndarray:
    """Central difference of node values using the grid's boundary ghosts."""
    h = result.h
    g = result.grid
    left = u[0] if g.bc_origin == "neumann" else -u[0]
    right = u[-1] if g.bc_outer == "neumann" else -u[-1]
    padded = np.concatenate([[left], u, [right]])
    return (padded[2:] - padded[:-2]) / (2.0 * h)


@dataclass(frozen=True)
class AgmonReport:
    weighted_norm: float
    fitted_rate: float
    R_used: float
    theta: float
    tail_fraction: float

    def to_json(self) -> dict:
        return dict(self.__dict__)


def agmon_check(spec: PotentialSpec, result: EigResult1D, theta: float) -> AgmonReport:
    """Agmon-weighted norm of psi0 and the fitted decay rate of log psi0^2.

    ``Phi(x) = int_R^x sqrt(v - eps0)`` with R the smallest node beyond which
    ``v >= eps0`` on the grid.  ``tail_fraction`` is the share of the weighted
    norm coming from the last quarter of the domain; it should be small when
    the weighted norm is genuinely finite.
    """
    if not 0.0 <= theta < 1.0:
        raise ConfigError(f"theta must lie in [0, 1), got {theta}")
    if not result.below_tail:
        raise DomainError("agmon_check needs eps0 below the tail value")
    x = result.x
    h = result.h
    v = np.asarray(eval_v(spec, x), dtype=float)
    above = v >= result.eps0
    if above[-1]:
        bad = np.flatnonzero(~above)
        start = 0 if bad.size == 0 else int(bad[-1]) + 1
    else:
        start = x.size
    if start >= x.size - 4:
        raise DomainError("tail condition v >= eps0 not reached")
    R = float(x[start])
    root = np.sqrt(np.maximum(v - result.eps0, 0.0))
    phi = np.zeros_like(x)
    phi[start + 1:] = np.cumsum(0.5 * (root[start + 1:] + root[start:-1]) * h)
    log_w = 2.0 * theta * phi + 2.0 * result.log_psi0
    weights = np.exp(log_w)
    weighted_norm = float(np.sum(weights) * h)
    last_quarter = x >= 0.75 * x[-1]
    tail_fraction = float(np.sum(weights[last_quarter]) * h / weighted_norm)

    stop = R + 0.75 * (x[-1] - R)
    sel = (x >= R) & (x <= stop) & (2.0 * result.log_psi0 > math.log(1e-280))
    if np.count_nonzero(sel) < 4:
        raise DomainError("tail window too short for a decay fit")
    slope = np.polyfit(x[sel], 2.0 * result.log_psi0[sel], 1)[0]
    return AgmonReport(weighted_norm, float(-slope), R, float(theta), tail_fraction)


@dataclass(frozen=True)
class AuditReport:
    flux_first: float
    flux_last: float
    product_rule_residual: float
    min_psi0: float
    positive: bool
    ibp_points: tuple[float, ...]
    ibp_defects: tuple[float, ...]

    def to_json(self) -> dict:
        d = dict(self.__dict__)
        d["ibp_points"] = list(self.ibp_points)
        d["ibp_defects"] = list(self.ibp_defects)
        return d


def default_audit_cutoff(result: EigResult1D) -> Cutoff:
    """C^3 bump: 1 on the first quarter of the domain, 0 beyond the half."""
    quarter = 0.25 * result.grid.x_max
    return Cutoff(start=quarter, width=quarter, order=7)


def appendix_audit(spec: PotentialSpec, result: EigResult1D, cutoff: Cutoff | None = None,
                   points=None) -> AuditReport:
    """Discrete checks of the identities the ground state satisfies.

    * boundary flux ``|psi psi'|`` at the first and last nodes;
    * product rule ``h(chi psi) = chi eps0 psi - 2 chi' psi' - chi'' psi`` (h-weighted
      L2 norm of the defect; second order in the spacing);
    * strict positivity of psi0;
    * integration by parts on ``(0, y)``:
      ``int psi'^2 + (v - eps0) psi^2 - psi(y) psi'(y)`` with midpoint rules for both
      integrals.  ``y`` is snapped to the nearest cell face.
    """
    cutoff = cutoff or default_audit_cutoff(result)
    g = result.grid
    h = g.h
    x = g.nodes
    psi = result.psi0
    op = assemble_h1d(spec, g)
    dpsi = _derivative(result, psi)
    flux_first = float(abs(psi[0] * dpsi[0]))
    flux_last = float(abs(psi[-1] * dpsi[-1]))

    chi, d1, d2 = cutoff(x), cutoff.d1(x), cutoff.d2(x)
    lhs = op @ (chi * psi)
    rhs = chi * result.eps0 * psi - 2.0 * d1 * dpsi - d2 * psi
    product = float(math.sqrt(np.sum((lhs - rhs) ** 2) * h))

    if points is None:
        points = (0.25 * g.x_max, 0.5 * g.x_max, 0.75 * g.x_max)
    v = np.asarray(eval_v(spec, x), dtype=float)
    face_slope = np.diff(psi) / h  # psi' at faces (i + 1) h
    energy_cells = (v - result.eps0) * psi**2 * h
    if g.bc_origin == "dirichlet":
        left_edge = 2.0 * psi[0] ** 2 / h  # psi'^2 over the half cell next to the wall
    else:
        left_edge = 0.0
    used, defects = [], []
    for y in points:
        m = int(round(y / h))
        if not 1 <= m <= g.n_points - 1:
            raise DomainError(f"integration-by-parts point {y} outside the grid interior")
        kinetic = left_edge + np.sum(face_slope[: m - 1] ** 2) * h + 0.5 * h * face_slope[m - 1] ** 2
        boundary = 0.5 * (psi[m - 1] + psi[m]) * face_slope[m - 1]
        defects.append(float(abs(kinetic + np.sum(energy_cells[:m]) - boundary)))
        used.append(m * h)
    return AuditReport(
        flux_first=flux_first,
        flux_last=flux_last,
        product_rule_residual=product,
        min_psi0=float(np.min(psi)),
        positive=bool(np.all(np.isfinite(result.log_psi0))),
        ibp_points=tuple(used),
        ibp_defects=tuple(defects),
    )
