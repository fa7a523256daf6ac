"""Nevanlinna functionals of the closed-form families.

Proximity functions are circle means of ``log+`` computed with a global
adaptive Gauss-Kronrod (7/15) rule on ``[0, 2 pi]``; counting functions are
exact sums over the enumerated a-points.
"""

from __future__ import annotations

import cmath
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import NotEntire, QuadratureFailure, Unsupported
from .funcmodel import (
    ExpPoly,
    MeroFn,
    PartialFractionFn,
    Points,
    Polynomial,
    TruncatedQProduct,
    ZeroPoleFn,
)

TAU_QUAD = 1e-7
TAU_T = 1e-6
MAX_DEPTH = 24
NEAR_CIRCLE = 0.1
COUNT_SLACK = 1e-12
GRID_RATIO = 1.25
MAXMOD_SAMPLES = 2048

# Gauss-Kronrod 7/15 abscissae and weights on [-1, 1]
_XK = np.array(
    [
        0.991455371120812639206854697526329,
        0.949107912342758524526189684047851,
        0.864864423359769072789712788640926,
        0.741531185599394439863864773280788,
        0.586087235467691130294144845693013,
        0.405845151377397166906606412076961,
        0.207784955007898467600689403773245,
        0.0,
    ]
)
_WK = np.array(
    [
        0.022935322010529224963732008058970,
        0.063092092629978553290700663189204,
        0.104790010322250183839876322541518,
        0.140653259715525918745189590510238,
        0.169004726639267902826583426598550,
        0.190350578064785409913256402421014,
        0.204432940075298892414161999234649,
        0.209482141084727828012999174891714,
    ]
)
_WG = np.array(
    [
        0.129484966168869693270611432679082,
        0.279705391489276667901467771423780,
        0.381830050505118944950369775488975,
        0.417959183673469387755102040816327,
    ]
)
NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
W_KRONROD = np.concatenate([_WK[:-1], _WK[::-1]])
_wg_half = np.zeros(8)
_wg_half[1::2] = _WG
W_GAUSS = np.concatenate([_wg_half[:-1], _wg_half[::-1]])


def _panel_rule(func, a: np.ndarray, b: np.ndarray):
    c = (a + b) / 2
    h = (b - a) / 2
    t = c[:, None] + h[:, None] * NODES[None, :]
    v = np.asarray(func(t.ravel()), dtype=float).reshape(t.shape)
    if not np.all(np.isfinite(v)):
        raise QuadratureFailure("integrand is not finite at a quadrature node")
    k = h * (v @ W_KRONROD)
    g = h * (v @ W_GAUSS)
    return k, np.abs(k - g)


def adaptive_integrate(
    func: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    *,
    breakpoints: Sequence[float] = (),
    tol: float = TAU_QUAD,
    max_depth: int = MAX_DEPTH,
    initial_panels: int = 16,
) -> tuple[float, float]:
    """Integrate a vectorised real ``func`` over ``[a, b]``.

    Panels with the largest error estimates are bisected until the summed
    estimate is at most ``tol``.  Returns ``(value, error_estimate)``.
    """
    cuts = sorted({a, b, *(x for x in breakpoints if a < x < b)})
    lo, hi = [], []
    for u, v in zip(cuts[:-1], cuts[1:]):
        n = max(1, math.ceil(initial_panels * (v - u) / (b - a)))
        edges = np.linspace(u, v, n + 1)
        lo.extend(edges[:-1])
        hi.extend(edges[1:])
    lo_a, hi_a = np.array(lo), np.array(hi)
    depth = np.zeros(len(lo_a), dtype=int)
    vals, errs = _panel_rule(func, lo_a, hi_a)
    while errs.sum() > tol:
        sel = errs > tol / (4 * len(errs))
        if not sel.any():
            sel = errs == errs.max()
        sel &= depth < max_depth
        if not sel.any():
            raise QuadratureFailure(
                f"refinement cap reached with error estimate {errs.sum():.3g} > {tol:.3g}"
            )
        mid = (lo_a[sel] + hi_a[sel]) / 2
        new_lo = np.concatenate([lo_a[sel], mid])
        new_hi = np.concatenate([mid, hi_a[sel]])
        new_depth = np.concatenate([depth[sel], depth[sel]]) + 1
        nv, ne = _panel_rule(func, new_lo, new_hi)
        keep = ~sel
        lo_a = np.concatenate([lo_a[keep], new_lo])
        hi_a = np.concatenate([hi_a[keep], new_hi])
        depth = np.concatenate([depth[keep], new_depth])
        vals = np.concatenate([vals[keep], nv])
        errs = np.concatenate([errs[keep], ne])
    order = np.argsort(lo_a)
    return float(np.sum(vals[order])), float(errs.sum())


# ---------------------------------------------------------------------------
# targets and point enumeration


def _norm_target(a):
    """``None`` (or any infinity) means the pole target."""
    if a is None:
        return None
    a = complex(a)
    return None if cmath.isinf(a) else a


def a_points(f: MeroFn, a=None) -> Points:
    return f.a_points(_norm_target(a))


def singular_points(f: MeroFn, a=None) -> list[complex]:
    """Points where ``log+`` of the target function is singular (best effort)."""
    a = _norm_target(a)
    pts: list[complex] = []
    try:
        pts += [c for c, _ in f.pole_points()]
        pts += [c for c, _ in (f.zero_points() if a is None else f.a_points(a))]
    except Unsupported:
        pass
    extra = getattr(f, "extra_singularities", None)
    if extra is not None:
        pts += list(extra())
    return pts


# ---------------------------------------------------------------------------
# functionals


def circle_mean(
    logfun: Callable[[np.ndarray], np.ndarray],
    r: float,
    singular: Sequence[complex] = (),
    tol: float = TAU_QUAD,
) -> tuple[float, float]:
    """``(1/2pi) int_0^{2pi} logfun(r e^{it}) dt`` with singularity-aware breakpoints."""
    breaks = []
    for c in singular:
        if abs(abs(c) - r) <= NEAR_CIRCLE * r:
            breaks.append(cmath.phase(c) % (2 * math.pi))

    def integrand(t):
        return logfun(r * np.exp(1j * t))

    val, err = adaptive_integrate(integrand, 0.0, 2 * math.pi, breakpoints=breaks, tol=tol * 2 * math.pi)
    return val / (2 * math.pi), err / (2 * math.pi)


def prox_m(f: MeroFn, r: float, a=None, tol: float = TAU_QUAD) -> float:
    """Proximity function ``m(r, a, f)``; ``a=None`` is the pole target."""
    f.check_validity(r)
    a = _norm_target(a)
    if a is None:

        def logfun(x):
            return np.maximum(0.0, f.log_abs(x))

    elif a == 0:

        def logfun(x):
            return np.maximum(0.0, -np.asarray(f.log_abs(x)))

    else:

        def logfun(x):
            with np.errstate(divide="ignore"):
                return np.maximum(0.0, -np.log(np.abs(np.asarray(f.eval(x)) - a)))

    return circle_mean(logfun, r, singular_points(f, a), tol)[0]


def count_n(f: MeroFn, r: float, a=None) -> int:
    """Number of a-points in ``|x| <= r`` with multiplicity."""
    bound = r * (1 + COUNT_SLACK)
    return sum(m for c, m in a_points(f, a) if abs(c) <= bound)


def integrated_N(f: MeroFn, r: float, a=None) -> float:
    """``N(r, a, f)`` from the exact a-point list."""
    bound = r * (1 + COUNT_SLACK)
    total = 0.0
    for c, m in a_points(f, a):
        mod = abs(c)
        if mod == 0:
            total += m * math.log(r)
        elif mod <= bound:
            total += m * math.log(r / mod)
    return total


def characteristic_T(f: MeroFn, r: float, tol: float = TAU_QUAD) -> float:
    return prox_m(f, r, None, tol) + integrated_N(f, r, None)


def characteristic_T_reciprocal(f: MeroFn, r: float, tol: float = TAU_QUAD) -> float:
    """``T(r, 1/f) = m(r, 0, f) + N(r, 0, f)``."""
    return prox_m(f, r, 0, tol) + integrated_N(f, r, 0)


def log_max_modulus(f: MeroFn, r: float, samples: int = MAXMOD_SAMPLES) -> float:
    """``log M(r, f)`` refined to about 1e-10 in the angle."""
    try:
        inside = f.poles_in_disc(r)
    except Unsupported:
        inside = [] if f.is_entire else [None]
    if inside:
        raise NotEntire(f"{f!r} has poles in |x| <= {r}")
    f.check_validity(r)
    theta = 2 * math.pi * np.arange(samples) / samples
    vals = np.asarray(f.log_abs(r * np.exp(1j * theta)))
    k = int(np.argmax(vals))
    step = 2 * math.pi / samples

    def neg(t):
        return -float(f.log_abs(r * cmath.exp(1j * t)))

    res = minimize_scalar(
        neg, bounds=(theta[k] - step, theta[k] + step), method="bounded", options={"xatol": 1e-12}
    )
    return max(float(vals[k]), -float(res.fun))


def max_modulus(f: MeroFn, r: float) -> float:
    return math.exp(log_max_modulus(f, r))


# ---------------------------------------------------------------------------
# tables


@dataclass(frozen=True)
class NevanlinnaRow:
    r: float
    m: float
    N: float
    T: float
    n_zeros: int
    n_poles: int


@dataclass
class NevanlinnaTable:
    rows: list[NevanlinnaRow]
    ratio: float
    r_min: float
    r_max: float
    meta: dict = field(default_factory=dict)

    @property
    def r(self) -> np.ndarray:
        return np.array([row.r for row in self.rows])

    @property
    def T(self) -> np.ndarray:
        return np.array([row.T for row in self.rows])

    @property
    def m(self) -> np.ndarray:
        return np.array([row.m for row in self.rows])

    @property
    def N(self) -> np.ndarray:
        return np.array([row.N for row in self.rows])

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("r,m,N,T,n_zeros,n_poles\n")
        for row in self.rows:
            buf.write(
                f"{row.r:.14e},{row.m:.14e},{row.N:.14e},{row.T:.14e},{row.n_zeros},{row.n_poles}\n"
            )
        return buf.getvalue()


def geometric_grid(r_min: float, r_max: float, ratio: float = GRID_RATIO) -> np.ndarray:
    n = int(math.floor(math.log(r_max / r_min) / math.log(ratio) + 1e-9))
    return r_min * ratio ** np.arange(n + 1)


def default_r_max(f: MeroFn) -> float:
    if isinstance(f, TruncatedQProduct):
        return f.r_valid
    if isinstance(f, ExpPoly):
        d = max(f.degree, 1)
        lead = abs(f.poly.lead) if f.poly.degree() >= 1 else 1.0
        return 1000.0 * lead ** (-1.0 / d)
    base = getattr(f, "base", None)
    if base is not None:
        return default_r_max(base)
    if isinstance(f, (Polynomial, ZeroPoleFn, PartialFractionFn)):
        return 1e6
    return 1e6


def _count_or_zero(f: MeroFn, r: float, a) -> int:
    try:
        return count_n(f, r, a)
    except Unsupported:
        return 0


def nevanlinna_row(f: MeroFn, r: float, tol: float = TAU_QUAD) -> NevanlinnaRow:
    m = prox_m(f, r, None, tol)
    N = integrated_N(f, r, None)
    return NevanlinnaRow(float(r), m, N, m + N, _count_or_zero(f, r, 0), count_n(f, r, None))


def nevanlinna_table(
    f: MeroFn,
    grid: Sequence[float] | None = None,
    *,
    r_min: float = 1.0,
    r_max: float | None = None,
    ratio: float = GRID_RATIO,
    tol: float = TAU_QUAD,
) -> NevanlinnaTable:
    if grid is None:
        r_max = default_r_max(f) if r_max is None else r_max
        grid = geometric_grid(r_min, r_max, ratio)
    grid = sorted(float(r) for r in grid)
    rows = [nevanlinna_row(f, r, tol) for r in grid]
    return NevanlinnaTable(rows, ratio, grid[0], grid[-1])
