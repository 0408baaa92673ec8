"""Interaction potentials on the half-line and checks of the standing assumptions.

A potential is described by an immutable :class:`PotentialSpec`.  Four kinds
are supported:

``harmonic``            ``v(x) = omega2 * x**2``
``square_well``         ``v = -depth`` on ``(0, width)``, ``0`` beyond
``lennard_jones_soft``  ``4 eps ((sigma/y)**12 - (sigma/y)**6)``, ``y = max(x, x_min)``
``tabulated``           linear interpolation of samples, declared tail value

JSON form::

    {"kind": "square_well", "params": {"depth": 4.0, "width": 1.0}, "tail": 0.0}

Parameter keys are ``omega2`` (harmonic), ``depth``/``width`` (square_well),
``epsilon``/``sigma``/``x_min`` (lennard_jones_soft) and ``x``/``v``
(tabulated).  ``tail`` is a number or the string ``"inf"``; it is computed for
the built-in kinds and must be declared for tabulated data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DomainError

KINDS = ("harmonic", "square_well", "lennard_jones_soft", "tabulated")


@dataclass(frozen=True)
class PotentialSpec:
    kind: str
    params: dict = field(default_factory=dict)
    declared_tail: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown potential kind {self.kind!r}; expected one of {KINDS}")
        p = dict(self.params)
        if self.kind == "harmonic":
            _require_positive(p, "omega2")
            object.__setattr__(self, "declared_tail", math.inf)
        elif self.kind == "square_well":
            if p.get("depth", -1.0) < 0:
                raise ConfigError("square_well needs depth >= 0")
            _require_positive(p, "width")
            object.__setattr__(self, "declared_tail", 0.0)
        elif self.kind == "lennard_jones_soft":
            _require_positive(p, "epsilon")
            _require_positive(p, "sigma")
            p.setdefault("x_min", 0.5 * p["sigma"])
            _require_positive(p, "x_min")
            object.__setattr__(self, "declared_tail", 0.0)
        else:
            xs = np.asarray(p.get("x", ()), dtype=float)
            vs = np.asarray(p.get("v", ()), dtype=float)
            if xs.ndim != 1 or xs.size < 2 or xs.shape != vs.shape:
                raise ConfigError("tabulated potential needs matching 1D arrays x and v (>= 2 samples)")
            if np.any(xs <= 0) or np.any(np.diff(xs) <= 0):
                raise ConfigError("tabulated abscissae must be positive and strictly increasing")
            if not np.all(np.isfinite(vs)):
                raise ConfigError("tabulated values must be finite")
            p["x"], p["v"] = tuple(xs.tolist()), tuple(vs.tolist())
        object.__setattr__(self, "params", p)

    # -- construction helpers -------------------------------------------------
    @classmethod
    def harmonic(cls, omega2: float = 1.0) -> "PotentialSpec":
        return cls("harmonic", {"omega2": float(omega2)})

    @classmethod
    def square_well(cls, depth: float = 4.0, width: float = 1.0) -> "PotentialSpec":
        return cls("square_well", {"depth": float(depth), "width": float(width)})

    @classmethod
    def lennard_jones_soft(cls, epsilon: float = 1.0, sigma: float = 1.0, x_min: float | None = None):
        params = {"epsilon": float(epsilon), "sigma": float(sigma)}
        if x_min is not None:
            params["x_min"] = float(x_min)
        return cls("lennard_jones_soft", params)

    @classmethod
    def tabulated(cls, x, v, tail: float | None = None) -> "PotentialSpec":
        return cls("tabulated", {"x": x, "v": v}, None if tail is None else float(tail))

    @classmethod
    def from_json(cls, data: dict) -> "PotentialSpec":
        if not isinstance(data, dict) or "kind" not in data:
            raise ConfigError("potential must be an object with a 'kind' key")
        tail = data.get("tail")
        if isinstance(tail, str):
            if tail.lower() not in ("inf", "+inf", "infinity"):
                raise ConfigError(f"tail must be a number or 'inf', got {tail!r}")
            tail = math.inf
        spec = cls(data["kind"], dict(data.get("params", {})), None if tail is None else float(tail))
        if spec.kind != "tabulated" and tail is not None and tail != spec.declared_tail:
            raise ConfigError(f"declared tail {tail} contradicts the {spec.kind} tail {spec.declared_tail}")
        return spec

    def to_json(self) -> dict:
        params = {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.params.items()}
        tail = self.declared_tail
        return {
            "kind": self.kind,
            "params": params,
            "tail": "inf" if tail == math.inf else tail,
        }

    def breakpoints(self) -> tuple[float, ...]:
        """Abscissae where v or its derivative is not smooth."""
        if self.kind == "square_well":
            return (self.params["width"],)
        if self.kind == "lennard_jones_soft":
            return (self.params["x_min"],)
        if self.kind == "tabulated":
            return tuple(self.params["x"])
        return ()

    def feature_scale(self) -> float:
        """Largest abscissa beyond which v has no further structure (rough)."""
        if self.kind == "harmonic":
            return 1.0 / math.sqrt(self.params["omega2"])
        if self.kind == "square_well":
            return self.params["width"]
        if self.kind == "lennard_jones_soft":
            return 3.0 * self.params["sigma"]
        return self.params["x"][-1]


def _require_positive(p: dict, key: str) -> None:
    value = p.get(key)
    if value is None or not np.isfinite(value) or value <= 0:
        raise ConfigError(f"parameter {key!r} must be a positive finite number, got {value!r}")


def eval_v(spec: PotentialSpec, x):
    """Evaluate the potential at ``x > 0`` (scalar or array)."""
    xa = np.asarray(x, dtype=float)
    if np.any(~(xa > 0)):
        raise DomainError("potential is defined for x > 0 only")
    p = spec.params
    if spec.kind == "harmonic":
        out = p["omega2"] * xa**2
    elif spec.kind == "square_well":
        out = np.where(xa < p["width"], -p["depth"], 0.0)
    elif spec.kind == "lennard_jones_soft":
        r = p["sigma"] / np.maximum(xa, p["x_min"])
        r6 = r**6
        out = 4.0 * p["epsilon"] * (r6 * r6 - r6)
    else:
        xs = np.asarray(p["x"])
        vs = np.asarray(p["v"])
        beyond = xa > xs[-1]
        if np.any(beyond):
            tail = spec.declared_tail
            if tail is None or not np.isfinite(tail):
                raise DomainError(
                    f"x = {float(np.max(xa))} lies beyond the table end {xs[-1]} and no finite tail is declared"
                )
        out = np.interp(xa, xs, vs)
        if np.any(beyond):
            out = np.where(beyond, spec.declared_tail, out)
    if np.ndim(x) == 0:
        return float(out)
    return out


def tail_value(spec: PotentialSpec) -> float:
    """v_inf = liminf of v at infinity (``math.inf`` allowed).

    Tabulated potentials without a declared tail fall back to the last sample,
    which is only a proxy; :func:`check_assumptions` flags that case.
    """
    if spec.declared_tail is not None:
        return spec.declared_tail
    return float(spec.params["v"][-1])


@dataclass(frozen=True)
class AssumptionReport:
    a_ok: bool
    sup_v_minus: float
    tail: float
    cond_case: str
    deficit_integral: float | None
    deficit_integral_coarse: float | None = None
    diagnostics: tuple[str, ...] = ()

    def to_json(self) -> dict:
        return {
            "a_ok": self.a_ok,
            "sup_v_minus": self.sup_v_minus,
            "tail": "inf" if self.tail == math.inf else self.tail,
            "cond_case": self.cond_case,
            "deficit_integral": self.deficit_integral,
            "deficit_integral_coarse": self.deficit_integral_coarse,
            "diagnostics": list(self.diagnostics),
        }


def probe_grid(spec: PotentialSpec, x_max: float, n: int = 2000, x_lo: float = 1e-6) -> list[np.ndarray]:
    """Geometric-then-uniform nodes on (0, x_max], split at the potential's breakpoints.

    Returned as a list of pieces; v is smooth inside each piece.
    """
    x_geo_end = min(1.0, 0.5 * x_max)
    n_geo = max(n // 4, 8)
    geo = np.geomspace(x_lo, x_geo_end, n_geo)
    uni = np.linspace(x_geo_end, x_max, max(n - n_geo, 8))
    nodes = np.unique(np.concatenate([geo, uni]))
    cuts = [b for b in spec.breakpoints() if x_lo < b < x_max]
    edges = [x_lo, *cuts, x_max]
    pieces = []
    for a, b in zip(edges[:-1], edges[1:]):
        inner = nodes[(nodes > a) & (nodes < b)]
        pieces.append(np.concatenate([[a], inner, [b]]))
    return pieces


def _piecewise_trapezoid(spec: PotentialSpec, pieces, shift: float,
                         x_partial: float | None = None) -> tuple[float, float, float]:
    """Trapezoid of ``v - shift`` over the pieces using one-sided endpoint limits.

    Returns ``(integral, partial integral up to x_partial, sup of v_minus)``.
    The missing ``(0, x_lo)`` sliver is filled with the first sample.
    """
    total = 0.0
    partial = 0.0
    sup_minus = 0.0
    for k, xs in enumerate(pieces):
        inner = xs.copy()
        inner[0] = np.nextafter(xs[0], np.inf)
        inner[-1] = np.nextafter(xs[-1], -np.inf)
        vals = eval_v(spec, inner) - shift
        sup_minus = max(sup_minus, float(np.max(np.maximum(-(vals + shift), 0.0))))
        if k == 0:
            total += vals[0] * xs[0]
            partial += vals[0] * xs[0]
        cells = 0.5 * (vals[1:] + vals[:-1]) * np.diff(xs)
        total += float(np.sum(cells))
        if x_partial is not None:
            partial += float(np.sum(cells[xs[1:] <= x_partial]))
    return total, partial, sup_minus


def check_assumptions(spec: PotentialSpec, probe_xmax: float = 50.0, tol: float = 1e-8,
                      n: int = 4000) -> AssumptionReport:
    """Check boundedness of v_minus and classify the case that guarantees a bound state.

    The probe grid must resolve the potential's features; that is the caller's
    responsibility.  ``integrable_deficit`` requires a finite tail and
    ``int (v - v_inf) < -tol``.  Anything else inconclusive means the one-particle
    solver has to confirm the isolated ground state a posteriori.
    """
    if probe_xmax <= 0 or tol <= 0:
        raise ConfigError("probe_xmax and tol must be positive")
    diagnostics = []
    tail = tail_value(spec)
    if spec.kind == "tabulated" and spec.declared_tail is None:
        diagnostics.append("tail not declared; last tabulated sample used as a proxy")
        probe_xmax = min(probe_xmax, spec.params["x"][-1])

    shift = 0.0 if tail == math.inf else tail
    fine, half, sup_minus = _piecewise_trapezoid(spec, probe_grid(spec, probe_xmax, 2 * n), shift, 0.5 * probe_xmax)
    a_ok = bool(np.isfinite(sup_minus))

    if tail == math.inf:
        return AssumptionReport(a_ok, sup_minus, tail, "infinite_tail", None, None, tuple(diagnostics))

    coarse, _, _ = _piecewise_trapezoid(spec, probe_grid(spec, probe_xmax, n), shift)
    if spec.declared_tail is None:
        return AssumptionReport(a_ok, sup_minus, tail, "inconclusive", float(fine), float(coarse), tuple(diagnostics))
    far_tail = eval_v(spec, np.nextafter(probe_xmax, 0.0)) - tail
    if abs(far_tail) > max(tol, 1e-6 * (1.0 + abs(tail))):
        diagnostics.append(f"v(probe_xmax) - v_inf = {far_tail:.3e}: declared tail not reached on the probe grid")
    if abs(fine - half) > max(10 * tol, 1e-6 * max(1.0, abs(fine))):
        diagnostics.append("partial integrals of v - v_inf have not settled; deficit may be non-integrable")
        return AssumptionReport(a_ok, sup_minus, tail, "inconclusive", float(fine), float(coarse), tuple(diagnostics))
    if fine < -tol:
        case = "integrable_deficit"
    else:
        case = "inconclusive"
        diagnostics.append("deficit integral is not negative; bound state must be confirmed by the solver")
    return AssumptionReport(a_ok, sup_minus, tail, case, float(fine), float(coarse), tuple(diagnostics))
