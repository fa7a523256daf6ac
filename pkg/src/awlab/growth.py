"""Growth scales ``phi`` and ``s``, growth parameters and order estimators.

Asymptotic quantities are estimated at finite scale: a limsup becomes the
largest trailing-window slope over the top half of a grid, and the liminf in
the growth parameters is extrapolated from two far-out windows in
``u = log r``.  Estimates always come with a dispersion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import (
    AlphaZero,
    BelowR0,
    DegenerateT,
    EmpiricalUnstable,
    InsufficientData,
    InvalidInput,
)
from .funcmodel import (
    ExpPoly,
    MeroFn,
    PartialFractionFn,
    Polynomial,
    ZeroPoleFn,
)

R0_DEFAULT = 10.0
SUBADD_PAIRS = 1000
SUBADD_SEED = 20240611
SUBADD_RTOL = 1e-12
MIN_ROWS = 12
WINDOW = 8
UNSTABLE_TOL = 5e-3
EMPIRICAL_WINDOWS = ((1e149, 1e150), (1e299, 1e300))
WINDOW_POINTS = 64
PHI_FAMILIES = ("log", "logpow", "explogpow", "pow")
S_FAMILIES = ("rlogr", "rpow", "linear")


@dataclass(frozen=True)
class PhiFn:
    """Growth scale ``phi``.

    ``log``: ``log r``; ``logpow``: ``(log r)^p`` with ``p`` in (1, 2];
    ``explogpow``: ``exp((log r)^p)``; ``pow``: ``r^p``, both with ``p`` in
    [1/e, 1].  Below ``1/e`` the lower bound ``phi(r) >= log r`` fails at
    ``r = exp(p^{-1/p})`` (explogpow) or ``r = exp(1/p)`` (pow).
    """

    family: str
    param: float = 1.0
    R0: float = R0_DEFAULT

    def __post_init__(self):
        fam = self.family.lower()
        object.__setattr__(self, "family", fam)
        object.__setattr__(self, "param", float(self.param))
        problems = phi_problems(fam, self.param)
        if problems:
            raise InvalidInput("; ".join(problems))

    @property
    def name(self) -> str:
        if self.family == "log":
            return "log"
        return f"{self.family}({self.param:g})"

    def log_value_u(self, u):
        """``log phi(e^u)`` (valid for huge ``u`` without overflow)."""
        u = np.asarray(u, dtype=float)
        p = self.param
        if self.family == "log":
            return np.log(u)
        if self.family == "logpow":
            return p * np.log(u)
        if self.family == "explogpow":
            return u**p
        return p * u

    def value_unchecked(self, r):
        r = np.asarray(r, dtype=float)
        u = np.log(r)
        p = self.param
        if self.family == "log":
            out = u
        elif self.family == "logpow":
            out = u**p
        elif self.family == "explogpow":
            out = np.exp(u**p)
        else:
            out = r**p
        return float(out) if out.ndim == 0 else out

    def __call__(self, r):
        rmin = float(np.min(r))
        if rmin < self.R0:
            raise BelowR0(f"phi evaluated at r = {rmin:.6g} below R0 = {self.R0:g}")
        return self.value_unchecked(r)

    def log_value(self, r):
        rmin = float(np.min(r))
        if rmin < self.R0:
            raise BelowR0(f"phi evaluated at r = {rmin:.6g} below R0 = {self.R0:g}")
        out = self.log_value_u(np.log(np.asarray(r, dtype=float)))
        return float(out) if np.ndim(out) == 0 else out

    @cached_property
    def subadditive(self) -> bool:
        rng = np.random.default_rng(SUBADD_SEED)
        logs = rng.uniform(math.log(self.R0), math.log(1e6), size=(SUBADD_PAIRS, 2))
        a, b = np.exp(logs[:, 0]), np.exp(logs[:, 1])
        lhs = self.value_unchecked(a + b)
        rhs = self.value_unchecked(a) + self.value_unchecked(b)
        return bool(np.all(lhs <= rhs * (1 + SUBADD_RTOL)))

    @property
    def vanishing_log_ratio(self) -> bool:
        """``limsup log phi(r) / log r = 0``."""
        if self.family in ("log", "logpow"):
            return True
        if self.family == "explogpow":
            return self.param < 1
        return False


def phi_problems(family: str, p: float) -> list[str]:
    if family not in PHI_FAMILIES:
        return [f"unknown phi family {family!r}"]
    if family == "logpow" and not 1 < p <= 2:
        return [f"logpow exponent {p} outside (1, 2]"]
    if family in ("explogpow", "pow"):
        if not 0 < p <= 1:
            return [f"{family} exponent {p} outside (0, 1]"]
        if p < 1 / math.e:
            return [f"{family} exponent {p} < 1/e violates log r <= phi(r)"]
    return []


def sandwich_holds(phi: PhiFn, u_max: float = 1e6, points: int = 4000) -> bool:
    """Check ``log r <= phi(r) <= r`` on a log-spaced grid of ``u = log r``."""
    u = np.geomspace(math.log(phi.R0), u_max, points)
    lp = phi.log_value_u(u)
    return bool(np.all(lp >= np.log(u) - 1e-12) and np.all(lp <= u + 1e-12))


@dataclass(frozen=True)
class SFn:
    """Comparison radius ``s(r)``: ``r log r``, ``r^p`` (p in (1, 2]) or ``c r`` (c > 1)."""

    family: str
    param: float = 2.0
    R0: float = R0_DEFAULT

    def __post_init__(self):
        fam = self.family.lower()
        object.__setattr__(self, "family", fam)
        object.__setattr__(self, "param", float(self.param))
        problems = s_problems(fam, self.param, self.R0)
        if problems:
            raise InvalidInput("; ".join(problems))

    @property
    def name(self) -> str:
        if self.family == "rlogr":
            return "rlogr"
        return f"{self.family}({self.param:g})"

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if self.family == "rlogr":
            out = r * np.log(r)
        elif self.family == "rpow":
            out = r**self.param
        else:
            out = self.param * r
        return float(out) if out.ndim == 0 else out

    def log_s_u(self, u):
        u = np.asarray(u, dtype=float)
        if self.family == "rlogr":
            return u + np.log(u)
        if self.family == "rpow":
            return self.param * u
        return math.log(self.param) + u

    def loglog_ratio_u(self, u):
        """``log log(s(r)/r)`` at ``r = e^u``."""
        u = np.asarray(u, dtype=float)
        if self.family == "rlogr":
            return np.log(np.log(u))
        if self.family == "rpow":
            return np.log((self.param - 1) * u)
        return np.full(u.shape, math.log(math.log(self.param)))

    @property
    def convex(self) -> bool:
        return True

    @property
    def differentiable(self) -> bool:
        return True

    @property
    def s_over_r_unbounded(self) -> bool:
        return self.family != "linear"

    @property
    def ratio_bound(self) -> float:
        """``limsup s(r)/r`` (infinite unless linear)."""
        return self.param if self.family == "linear" else math.inf


def s_problems(family: str, p: float, R0: float) -> list[str]:
    if family not in S_FAMILIES:
        return [f"unknown s family {family!r}"]
    if family == "rpow" and not 1 < p <= 2:
        return [f"rpow exponent {p} outside (1, 2]"]
    if family == "linear":
        if not p > 1:
            return [f"linear factor {p} must exceed 1"]
        if p > R0:
            return [f"linear factor {p} > R0 violates s(r) <= r^2"]
    return []


@dataclass(frozen=True)
class GrowthParams:
    alpha: float
    gamma: float
    source: str = "closed-form"
    dispersion: float = 0.0


def closed_form_alpha_gamma(phi: PhiFn, s: SFn) -> GrowthParams | None:
    if s.family in ("rlogr", "linear"):
        return GrowthParams(1.0, 0.0)
    a = s.param
    if phi.family == "log":
        return GrowthParams(1.0, 1.0)
    if phi.family == "logpow":
        return GrowthParams(1.0, 1.0 / phi.param)
    if phi.family == "explogpow":
        return GrowthParams(a ** (-phi.param), 0.0)
    if phi.family == "pow":
        return GrowthParams(1.0 / a, 0.0)
    return None


def _window_min(values: np.ndarray, u: np.ndarray) -> tuple[float, float]:
    k = int(np.argmin(values))
    variation = float(np.sum(np.abs(np.diff(values))))
    net = abs(float(values[-1] - values[0]))
    if variation - net > UNSTABLE_TOL:
        raise EmpiricalUnstable(f"ratio oscillates by {variation - net:.3g} inside a window")
    return float(values[k]), 1.0 / math.log(float(u[k]))


def empirical_alpha_gamma(phi: PhiFn, s: SFn) -> GrowthParams:
    """Liminf estimates of the defining ratios, extrapolated in ``t = 1/log u``."""
    estimates = {"alpha": [], "gamma": []}
    for lo, hi in EMPIRICAL_WINDOWS:
        u = np.geomspace(lo, hi, WINDOW_POINTS)
        log_phi = phi.log_value_u(u)
        log_phi_s = phi.log_value_u(s.log_s_u(u))
        estimates["alpha"].append(_window_min(log_phi / log_phi_s, u))
        estimates["gamma"].append(_window_min(s.loglog_ratio_u(u) / log_phi, u))
    out = {}
    spread = 0.0
    for key, ((e1, t1), (e2, t2)) in estimates.items():
        limit = e2 + (e2 - e1) * t2 / (t1 - t2)
        spread = max(spread, abs(limit - e2))
        out[key] = min(1.0, max(0.0, limit))
    return GrowthParams(out["alpha"], out["gamma"], "empirical", spread)


def alpha_gamma(phi: PhiFn, s: SFn, prefer: str = "closed-form") -> GrowthParams:
    if prefer == "closed-form":
        closed = closed_form_alpha_gamma(phi, s)
        if closed is not None:
            return closed
    return empirical_alpha_gamma(phi, s)


# ---------------------------------------------------------------------------
# order estimation


@dataclass(frozen=True)
class OrderEstimate:
    estimate: float
    dispersion: float
    windows: int
    source: str = "empirical"


def slope_estimate(x: Sequence[float], y: Sequence[float], window: int = WINDOW) -> OrderEstimate:
    """Largest least-squares slope of ``y`` on ``x`` over trailing windows ending in the top half."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(x)
    if n < max(MIN_ROWS, window):
        raise InsufficientData(f"need at least {max(MIN_ROWS, window)} rows, got {n}")
    slopes = []
    for end in range(max(window, (n + 1) // 2), n + 1):
        xs, ys = x[end - window : end], y[end - window : end]
        xc = xs - xs.mean()
        denom = float(xc @ xc)
        if denom == 0:
            continue
        slopes.append(float(xc @ (ys - ys.mean())) / denom)
    if not slopes:
        raise InsufficientData("no window with spread in log phi")
    return OrderEstimate(max(slopes), max(slopes) - min(slopes), len(slopes))


def phi_order(table, phi: PhiFn) -> OrderEstimate:
    """Estimate ``limsup log T / log phi`` from a Nevanlinna table."""
    r = table.r
    T = table.T
    keep = (r > phi.R0) & (T > 0)
    if keep.sum() < MIN_ROWS:
        raise InsufficientData(f"need {MIN_ROWS} rows with r > R0 and T > 0, got {int(keep.sum())}")
    Tk = T[keep]
    if float(Tk.max() - Tk.min()) <= 1e-12 * float(Tk.max()):
        raise DegenerateT("characteristic is constant on the grid")
    return slope_estimate(phi.log_value(r[keep]), np.log(Tk))


def phi_order_maxmod(f: MeroFn, phi: PhiFn, grid: Sequence[float]) -> OrderEstimate:
    from .nevanlinna import log_max_modulus

    r = np.array([x for x in grid if x > phi.R0], dtype=float)
    logm = np.array([log_max_modulus(f, x) for x in r])
    keep = logm > 0
    if keep.sum() < MIN_ROWS:
        raise InsufficientData(f"need {MIN_ROWS} rows with log M > 0, got {int(keep.sum())}")
    return slope_estimate(phi.log_value(r[keep]), np.log(logm[keep]))


def conv_exponent(moduli: Sequence[float], phi: PhiFn, r_max: float | None = None) -> OrderEstimate:
    """phi-exponent of convergence of a sequence of moduli.

    ``n(r)`` is evaluated at the distinct moduli beyond ``R0`` (and on a
    geometric extension up to ``r_max``, if given).
    """
    mods = np.sort(np.asarray([float(m) for m in moduli]))
    if len(mods) < 20:
        raise InsufficientData(f"need at least 20 moduli, got {len(mods)}")
    radii = np.unique(mods[mods > phi.R0])
    if r_max is not None and (len(radii) == 0 or r_max > radii[-1]):
        start = radii[-1] if len(radii) else phi.R0 * 1.25
        # long enough that every top-half window lies in the extension
        extra = len(radii) + 2 * WINDOW
        radii = np.concatenate([radii, np.geomspace(start, r_max, extra + 1)[1:]])
    counts = np.searchsorted(mods, radii, side="right")
    keep = counts > 0
    if keep.sum() < MIN_ROWS:
        raise InsufficientData(f"need {MIN_ROWS} radii with n(r) > 0, got {int(keep.sum())}")
    return slope_estimate(phi.log_value(radii[keep]), np.log(counts[keep]))


def rho_phi_k(rho: float, params: GrowthParams, k: int) -> float:
    """Upper bound for the phi-order of ``D_q^k f`` given ``rho_phi(f)``."""
    a, g = params.alpha, params.gamma
    if a <= 0:
        raise AlphaZero("alpha must be positive")
    if k < 1:
        raise ValueError("k must be >= 1")
    best = rho
    for l in range(1, k + 1):
        geometric = sum(a ** (-j) for j in range(l))
        best = max(best, rho / a**l - g * geometric)
    return best


def closed_form_order(f: MeroFn, phi: PhiFn) -> float | None:
    """phi-order for families where it is known exactly, else ``None``."""
    rational = isinstance(f, (Polynomial, ZeroPoleFn, PartialFractionFn))
    if rational or (isinstance(f, ExpPoly) and f.is_constant):
        if getattr(f, "is_constant", False):
            return 0.0
        if phi.family == "log":
            return 1.0
        if phi.family == "logpow":
            return 1.0 / phi.param
        return 0.0
    if isinstance(f, ExpPoly):
        d = f.degree
        if phi.family == "pow":
            return d / phi.param
        if phi.family == "explogpow" and phi.param == 1:
            return float(d)
        return math.inf
    return None
