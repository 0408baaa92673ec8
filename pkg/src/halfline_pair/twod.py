"""Two-particle operator in centre-of-mass coordinates on the sector 0 < x1 <= x2.

After rotating the quarter plane by 45 degrees, ``x1`` is the scaled particle
separation and ``x2`` the scaled centre of mass.  Exchange-symmetric states
satisfy a Neumann condition on ``x1 = 0``, antisymmetric ones a Dirichlet
condition; the diagonal ``x1 = x2`` (image of the walls) is Neumann for both.

Discretisation: cell-centred nodes ``((i + 1/2) h, (j + 1/2) h)`` with ``i <= j``.
Nodes on the diagonal carry half mass and every lattice edge inside the sector
has weight ``1/h^2``.  This is exactly the exchange-symmetric sector of the
full square lattice reflected across the diagonal, so the scheme inherits a
symmetric five-point stencil.  The assembled matrix is ``W^{-1/2} K W^{-1/2}``
with ``W`` the node masses, hence symmetric with the same spectrum as the
generalised problem ``K u = lambda W u``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .errors import AssemblyError, ConfigError, ConvergenceError, DomainError
from .oned import EigResult1D, Grid1D, ground_state, richardson_eps0
from .potentials import PotentialSpec, eval_v
from .profiles import RAMP

log = logging.getLogger(__name__)

SYMMETRIES = ("plus", "minus")
OUTER_BCS = ("dirichlet", "neumann")
CAPS = ("triangle", "square")
DENSE_LIMIT = 2000


@dataclass(frozen=True)
class Grid2D:
    """Truncated sector.

    ``cap="triangle"`` keeps ``x2 < X``.  ``cap="square"`` keeps the image of the
    square ``(0, X)^2`` of particle coordinates, ``x1 + x2 < sqrt(2) X``, whose
    outer edge is resolved as a staircase.  ``neumann_cut`` decouples the lattice
    across the lines ``x1 = L`` and ``x2 = L``.
    """

    X: float
    h: float
    symmetry: str = "plus"
    outer_bc: str = "dirichlet"
    q_minus_full_dirichlet: bool = False
    cap: str = "triangle"
    neumann_cut: float | None = None

    def __post_init__(self):
        if not (self.X > 0 and self.h > 0):
            raise ConfigError("X and h must be positive")
        if self.symmetry not in SYMMETRIES:
            raise ConfigError(f"symmetry must be one of {SYMMETRIES}, got {self.symmetry!r}")
        if self.outer_bc not in OUTER_BCS:
            raise ConfigError(f"outer_bc must be one of {OUTER_BCS}, got {self.outer_bc!r}")
        if self.cap not in CAPS:
            raise ConfigError(f"cap must be one of {CAPS}, got {self.cap!r}")
        if self.cap == "triangle" and abs(self.X / self.h - round(self.X / self.h)) > 1e-9 * self.X / self.h:
            raise ConfigError(f"X / h must be an integer, got {self.X / self.h}")
        if self.neumann_cut is not None:
            ratio = self.neumann_cut / self.h
            if abs(ratio - round(ratio)) > 1e-9 * max(ratio, 1.0) or not 0 < self.neumann_cut < self.X:
                raise ConfigError("neumann_cut must be a multiple of h inside (0, X)")

    @property
    def m(self) -> int:
        """Number of lattice lines in each direction."""
        if self.cap == "square":
            return int(math.ceil(math.sqrt(2.0) * self.X / self.h))
        return int(round(self.X / self.h))

    def with_(self, **changes) -> "Grid2D":
        d = {f: getattr(self, f) for f in self.__dataclass_fields__}
        d.update(changes)
        return Grid2D(**d)


@dataclass(frozen=True)
class Operator2D:
    matrix: sp.csr_matrix = field(repr=False)
    i: np.ndarray = field(repr=False)
    j: np.ndarray = field(repr=False)
    mass: np.ndarray = field(repr=False)
    h: float
    potential_floor: float

    @property
    def x1(self) -> np.ndarray:
        return (self.i + 0.5) * self.h

    @property
    def x2(self) -> np.ndarray:
        return (self.j + 0.5) * self.h

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def to_function(self, u: np.ndarray) -> np.ndarray:
        """Node values of the eigenfunction belonging to the symmetric-form vector u."""
        return u / np.sqrt(self.mass)

    def from_function(self, phi: np.ndarray) -> np.ndarray:
        return phi * np.sqrt(self.mass)


def assemble_sector(potential_values: Callable[[np.ndarray, np.ndarray], np.ndarray], grid: Grid2D,
                    keep: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None,
                    cut_bc: str = "neumann") -> Operator2D:
    """Assemble the sector operator for an arbitrary potential ``V(x1, x2)``.

    ``keep`` restricts the node set further; lattice edges leaving the kept set
    through such a cut get ``cut_bc``.  Edges crossing the outer cap get the
    grid's ``outer_bc``; edges crossing ``x1 = 0`` are Neumann for ``plus`` and
    Dirichlet for ``minus``; the diagonal fold is natural.
    """
    if cut_bc not in OUTER_BCS:
        raise ConfigError(f"cut_bc must be one of {OUTER_BCS}")
    h = grid.h
    m = grid.m
    I, J = np.triu_indices(m)
    x1, x2 = (I + 0.5) * h, (J + 0.5) * h
    inside = np.ones(I.size, dtype=bool)
    if grid.cap == "square":
        inside &= x1 + x2 < math.sqrt(2.0) * grid.X
    kept = inside.copy()
    if keep is not None:
        kept &= np.asarray(keep(x1, x2), dtype=bool)
    drop_diag = grid.symmetry == "minus" and grid.q_minus_full_dirichlet
    if drop_diag:
        kept &= I != J

    state = np.zeros((m, m), dtype=np.int8)  # 0 outside sector, 1 capped off, 2 cut by mask, 3 removed diagonal
    state[np.triu_indices(m)] = np.where(inside, 2, 1)
    if drop_diag:
        state[np.arange(m), np.arange(m)] = np.where(state[np.arange(m), np.arange(m)] == 2, 3, 1)
    I, J, x1, x2 = I[kept], J[kept], x1[kept], x2[kept]
    index = -np.ones((m, m), dtype=np.int64)
    index[I, J] = np.arange(I.size)
    mass = np.where(I == J, 0.5, 1.0)
    inv_h2 = 1.0 / h**2
    ghost = 2.0 * inv_h2  # antisymmetric ghost across a cell face
    on_node = inv_h2  # zero value sitting on a removed boundary node
    outer = ghost if grid.outer_bc == "dirichlet" else 0.0
    cut_term = ghost if cut_bc == "dirichlet" else 0.0

    V = np.asarray(potential_values(x1, x2), dtype=float)
    bad = np.flatnonzero(~np.isfinite(V))
    if bad.size:
        b = int(bad[0])
        raise AssemblyError(f"non-finite potential sample at node ({x1[b]!r}, {x2[b]!r})")
    diag = mass * V

    cut_line = None if grid.neumann_cut is None else int(round(grid.neumann_cut / h))
    rows, cols = [], []
    for di, dj in ((1, 0), (0, 1), (-1, 0), (0, -1)):
        I2, J2 = I + di, J + dj
        if cut_line is not None:
            if di:
                decoupled = np.maximum(I, I2) == cut_line
            else:
                decoupled = np.maximum(J, J2) == cut_line
        else:
            decoupled = np.zeros(I.size, dtype=bool)
        if di == -1:
            wall = (I2 < 0) & ~decoupled
            if grid.symmetry == "minus":
                diag[wall] += ghost
        if dj == 1:
            diag[(J2 >= m) & ~decoupled] += outer
        lattice = (I2 >= 0) & (J2 < m) & (I2 <= J2) & ~decoupled
        pos = np.flatnonzero(lattice)
        tgt = index[I2[pos], J2[pos]]
        linked = tgt >= 0
        if di + dj > 0:
            rows.append(pos[linked])
            cols.append(tgt[linked])
        lost = pos[~linked]
        st = state[I2[lost], J2[lost]]
        diag[lost] += np.select([st == 1, st == 2, st == 3], [outer, cut_term, on_node], 0.0)
        # a linked edge contributes 1/h^2 to both endpoint diagonals
        diag[pos[linked]] += inv_h2

    p = np.concatenate(rows)
    q = np.concatenate(cols)
    off = sp.coo_matrix((np.full(p.size, -inv_h2), (p, q)), shape=(I.size, I.size))
    K = (off + off.T + sp.diags(diag)).tocsr()
    s = sp.diags(1.0 / np.sqrt(mass))
    A = (s @ K @ s).tocsr()
    A.sum_duplicates()
    return Operator2D(A, I, J, mass, h, float(np.min(V)) if V.size else 0.0)


def assemble_Q2d(spec: PotentialSpec, grid: Grid2D) -> Operator2D:
    """Sector operator with the pair potential ``v(x1)``."""
    return assemble_sector(lambda x1, x2: eval_v(spec, x1), grid)


def export_triplets(op: Operator2D | sp.spmatrix, path) -> None:
    """Write the matrix as ``row col value`` lines (debugging aid)."""
    mat = (op.matrix if isinstance(op, Operator2D) else op).tocoo()
    order = np.lexsort((mat.col, mat.row))
    with open(path, "w") as fh:
        for r, c, v in zip(mat.row[order], mat.col[order], mat.data[order]):
            fh.write(f"{r} {c} {v:.17g}\n")


@dataclass(frozen=True)
class Eigenpairs:
    values: np.ndarray
    vectors: np.ndarray = field(repr=False)
    residuals: np.ndarray
    method: str


def _gershgorin_floor(mat: sp.spmatrix) -> float:
    d = mat.diagonal()
    absrow = np.asarray(abs(mat).sum(axis=1)).ravel() - np.abs(d)
    return float(np.min(d - absrow))


def lowest_eigs(op: Operator2D | sp.spmatrix, k: int, tol: float = 1e-8, seed: int = 0,
                sigma: float | None = None, maxiter: int | None = None) -> Eigenpairs:
    """The k smallest eigenpairs of a sparse symmetric matrix.

    Small problems go to dense LAPACK.  Larger ones use ARPACK in shift-invert
    mode with a shift below the spectrum (``potential_floor - 1``, which bounds
    the operator from below, or a Gershgorin bound for bare matrices), so that
    the largest eigenvalues of the inverse are the lowest of the operator.  The
    start vector comes from a seeded generator.  Residuals
    ``||A u - lambda u||`` are checked against ``tol * max(1, |lambda|)``.
    """
    mat = op.matrix if isinstance(op, Operator2D) else sp.csr_matrix(op)
    n = mat.shape[0]
    if k < 1:
        raise ConfigError("k must be at least 1")
    k = min(k, n)
    if n <= DENSE_LIMIT:
        w, vecs = sla.eigh(mat.toarray(), subset_by_index=(0, k - 1))
        method = "dense"
    else:
        if k >= n - 1:
            raise ConfigError(f"k = {k} too large for the iterative solver on dimension {n}")
        if sigma is None:
            floor = op.potential_floor if isinstance(op, Operator2D) else _gershgorin_floor(mat)
            sigma = floor - 1.0
        rng = np.random.default_rng(seed)
        v0 = rng.standard_normal(n)
        try:
            w, vecs = eigsh(mat.tocsc(), k=k, sigma=sigma, which="LM", v0=v0, tol=tol * 1e-2,
                            maxiter=maxiter)
        except ArpackNoConvergence as exc:
            vals = np.asarray(exc.eigenvalues)
            res = _residuals(mat, vals, np.asarray(exc.eigenvectors)) if vals.size else np.array([])
            raise ConvergenceError("iterative eigensolver did not converge", vals, res) from exc
        order = np.argsort(w)
        w, vecs = w[order], vecs[:, order]
        method = "shift-invert"
    res = _residuals(mat, w, vecs)
    bound = tol * np.maximum(1.0, np.abs(w))
    if np.any(res > bound):
        raise ConvergenceError(f"eigen-residuals {res.max():.3e} above tolerance", w, res)
    return Eigenpairs(np.asarray(w), vecs, res, method)


def _residuals(mat, w, vecs) -> np.ndarray:
    return np.linalg.norm(mat @ vecs - vecs * w, axis=0) / np.linalg.norm(vecs, axis=0)


@dataclass
class SpectrumReport2D:
    eps0_ref: float
    margin: float
    eigenvalues_below: list
    count: int
    symmetry: str
    grid: dict
    stability: dict = field(default_factory=dict)
    stable: bool = True
    k_used: int = 0

    def to_json(self) -> dict:
        return {
            "eps0_ref": self.eps0_ref,
            "margin": self.margin,
            "eigenvalues_below": list(self.eigenvalues_below),
            "count": self.count,
            "symmetry": self.symmetry,
            "grid": dict(self.grid),
            "stability": self.stability,
            "stable": self.stable,
            "k_used": self.k_used,
        }


def default_margin(spec: PotentialSpec, grid: Grid2D) -> float:
    """Five times the Richardson error of the one-particle bottom at the 2D spacing."""
    _, err = richardson_eps0(spec, grid.X, grid.h, "neumann", grid.outer_bc)
    return max(5.0 * err, 1e-6)


def _levels_below(spec: PotentialSpec, grid: Grid2D, threshold: float, k0: int = 4,
                  k_cap: int = 128) -> tuple[np.ndarray, int]:
    op = assemble_Q2d(spec, grid)
    k = k0
    while True:
        pairs = lowest_eigs(op, k)
        w = pairs.values
        if w[-1] >= threshold or k >= min(k_cap, op.dim):
            return w[w < threshold], k
        k *= 2


def discrete_below(spec: PotentialSpec, grid: Grid2D, eps0_ref: float, margin: float | None = None,
                   stability: bool = True) -> SpectrumReport2D:
    """All eigenvalues below ``eps0_ref - margin``, optionally re-solved at 1.5 X and h/2."""
    if margin is None:
        margin = default_margin(spec, grid)
    threshold = eps0_ref - margin
    below, k_used = _levels_below(spec, grid, threshold)
    report = SpectrumReport2D(
        eps0_ref=float(eps0_ref),
        margin=float(margin),
        eigenvalues_below=[float(x) for x in below],
        count=int(below.size),
        symmetry=grid.symmetry,
        grid={"X": grid.X, "h": grid.h, "outer_bc": grid.outer_bc, "cap": grid.cap,
              "q_minus_full_dirichlet": grid.q_minus_full_dirichlet},
        k_used=k_used,
    )
    if stability:
        stable = True
        for label, variant in (("X_x1.5", grid.with_(X=_on_lattice(1.5 * grid.X, grid.h))),
                               ("h_half", grid.with_(h=0.5 * grid.h))):
            other, _ = _levels_below(spec, variant, threshold)
            shared = min(other.size, below.size)
            shifts = [float(a - b) for a, b in zip(other[:shared], below[:shared])]
            moved = any(abs(d) > 10.0 * margin for d in shifts)
            changed = other.size != below.size
            report.stability[label] = {
                "count": int(other.size),
                "eigenvalues_below": [float(x) for x in other],
                "shifts": shifts,
                "count_changed": changed,
                "moved_beyond_10_margin": moved,
            }
            stable &= not (moved or changed)
        report.stable = bool(stable)
    return report


def _on_lattice(X: float, h: float) -> float:
    return round(X / h) * h


def grid_ground_state(spec: PotentialSpec, grid: Grid2D) -> EigResult1D:
    """One-particle ground state on the x1 lines of a 2D grid (same spacing and length)."""
    return ground_state(spec, Grid1D(grid.m * grid.h, grid.m, "neumann", grid.outer_bc), check_stability=False)


@dataclass(frozen=True)
class WeylReport:
    n: int
    k: float
    residual: float
    rayleigh: float
    target: float

    def to_json(self) -> dict:
        return dict(self.__dict__)


def weyl_residual(spec: PotentialSpec, psi0: EigResult1D | None, k: float, n: int, grid: Grid2D) -> WeylReport:
    """Relative residual of ``psi0(x1) tau(n - x1) cos(k x2) tau(x2 - n) tau(2n - x2)``.

    ``tau`` is the smooth ramp (0 below 1, 1 above 2).  The one-particle ground
    state is taken on the grid's own x1 lines so that the threshold matches the
    2D discretisation; ``psi0`` is used instead only if it already lives on that
    lattice.
    """
    if k < 0:
        raise ConfigError("k must be non-negative")
    if grid.symmetry != "plus" or grid.cap != "triangle":
        raise ConfigError("the Weyl construction uses the symmetric sector on the triangle")
    if not 2 * n < grid.X:
        raise DomainError(f"support up to x2 = {2 * n} does not fit inside X = {grid.X}")
    line = grid_ground_state(spec, grid)
    if psi0 is not None and psi0.grid.n_points == grid.m and abs(psi0.h - grid.h) < 1e-12 * grid.h \
            and psi0.grid.bc_outer == grid.outer_bc:
        line = psi0
    op = assemble_Q2d(spec, grid)
    x1, x2 = op.x1, op.x2
    f = line.psi0[op.i] * RAMP(n - x1)
    g = np.cos(k * x2) * RAMP(x2 - n) * RAMP(2 * n - x2)
    u = op.from_function(f * g)
    target = line.eps0 + k * k
    Au = op.matrix @ u
    norm = np.linalg.norm(u)
    residual = float(np.linalg.norm(Au - target * u) / norm)
    rayleigh = float(u @ Au / norm**2)
    return WeylReport(int(n), float(k), residual, rayleigh, float(target))


@dataclass
class CrosscheckReport:
    full_values: list
    parity: list
    plus_full: list
    minus_full: list
    plus_sector: list
    minus_sector: list
    max_abs_diff_plus: float
    max_abs_diff_minus: float
    matched: bool
    warnings: list = field(default_factory=list)

    def to_json(self) -> dict:
        return dict(self.__dict__)


def assemble_full_square(spec: PotentialSpec, X: float, h: float, outer_bc: str = "dirichlet") -> sp.csr_matrix:
    """H on ``(0, X)^2`` of particle coordinates: Neumann on the axes, ``outer_bc`` at X."""
    grid = Grid1D.from_spacing(X, h, "neumann", outer_bc)
    M = grid.n_points
    hh = grid.h
    main = np.full(M, 2.0 / hh**2)
    main[0] -= 1.0 / hh**2
    main[-1] += (1.0 if outer_bc == "dirichlet" else -1.0) / hh**2
    lap = sp.diags([np.full(M - 1, -1.0 / hh**2), main, np.full(M - 1, -1.0 / hh**2)], [-1, 0, 1])
    eye = sp.identity(M)
    y = grid.nodes
    sep = np.abs(y[:, None] - y[None, :]).ravel() / math.sqrt(2.0)
    tiny = np.finfo(float).tiny
    pot = np.asarray(eval_v(spec, np.maximum(sep, tiny)), dtype=float)
    return (sp.kron(lap, eye) + sp.kron(eye, lap) + sp.diags(pot)).tocsr()


def _swap_permutation(M: int) -> np.ndarray:
    idx = np.arange(M * M).reshape(M, M)
    return idx.T.ravel()


def full_square_crosscheck(spec: PotentialSpec, X: float, h: float, k: int, outer_bc: str = "dirichlet",
                           tol: float = 5e-2, cluster_tol: float = 1e-8) -> CrosscheckReport:
    """Compare H on the square of particle coordinates with the two sector operators.

    Eigenvectors of H are classified by their exchange parity ``<psi, S psi>``.
    Near-degenerate clusters are first rotated to diagonalise S inside the
    cluster; a parity that stays away from +-1 is reported as a warning.
    """
    H = assemble_full_square(spec, X, h, outer_bc)
    M = int(round(math.sqrt(H.shape[0])))
    perm = _swap_permutation(M)
    pairs = lowest_eigs(H, k)
    w, vecs = pairs.values, pairs.vectors
    parity = np.zeros(w.size)
    warnings = []
    start = 0
    while start < w.size:
        stop = start + 1
        while stop < w.size and w[stop] - w[stop - 1] < cluster_tol * max(1.0, abs(w[stop])):
            stop += 1
        block = vecs[:, start:stop]
        S = block.T @ block[perm]
        sv, rot = np.linalg.eigh(0.5 * (S + S.T))
        vecs[:, start:stop] = block @ rot
        parity[start:stop] = sv
        start = stop
    for idx, p in enumerate(parity):
        if abs(abs(p) - 1.0) > 1e-6:
            warnings.append(f"eigenvalue {w[idx]:.8g} has mixed exchange parity {p:.4f}")
    plus_full = [float(x) for x, p in zip(w, parity) if p > 0]
    minus_full = [float(x) for x, p in zip(w, parity) if p < 0]

    def sector(symmetry: str, count: int) -> list:
        if count == 0:
            return []
        grid = Grid2D(X, h, symmetry, outer_bc, cap="square")
        return [float(x) for x in lowest_eigs(assemble_Q2d(spec, grid), count).values]

    plus_sector = sector("plus", len(plus_full))
    minus_sector = sector("minus", len(minus_full))
    dp = max((abs(a - b) for a, b in zip(plus_full, plus_sector)), default=0.0)
    dm = max((abs(a - b) for a, b in zip(minus_full, minus_sector)), default=0.0)
    return CrosscheckReport(
        full_values=[float(x) for x in w],
        parity=[float(p) for p in parity],
        plus_full=plus_full,
        minus_full=minus_full,
        plus_sector=plus_sector,
        minus_sector=minus_sector,
        max_abs_diff_plus=float(dp),
        max_abs_diff_minus=float(dm),
        matched=bool(dp <= tol and dm <= tol),
        warnings=warnings,
    )
