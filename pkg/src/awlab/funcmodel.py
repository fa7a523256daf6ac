"""Closed-form meromorphic function families.

Every family supports vectorised evaluation, ``log|f|`` evaluation (used by the
circle quadrature, where overflow-free values matter), and enumeration of its
zeros and poles with multiplicity.  Point lists are plain ``list[tuple[complex,
int]]`` of (location, multiplicity).

A pole is reported by evaluation as :data:`POLE` (complex infinity); use
:func:`is_pole` to test for it.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import (
    IllConditioned,
    NonConvergence,
    OutOfValidity,
    ResidualError,
    Unsupported,
)

TAU_MATCH = 1e-8
TAU_ROOT = 1e-9
TAU_INTERP = 1e-9
# closure outputs carry root-finder noise (~sqrt(eps) at double roots)
TAU_CANCEL = 1e-6
CLUSTER_TOL = 1e-5
VALIDITY_MARGIN = 0.1
ROOT_MAXITER = 200

POLE = complex(math.inf, 0.0)

Points = list[tuple[complex, int]]


def is_pole(value) -> bool | np.ndarray:
    if np.ndim(value) == 0:
        return cmath.isinf(complex(value))
    return np.isinf(np.asarray(value))


def _as_array(x) -> tuple[np.ndarray, bool]:
    scalar = np.ndim(x) == 0
    return np.atleast_1d(np.asarray(x, dtype=complex)), scalar


def _ret(values: np.ndarray, scalar: bool):
    return complex(values[0]) if scalar else values


def _ret_real(values: np.ndarray, scalar: bool):
    return float(values[0]) if scalar else values


def _match(a: complex, b: complex, tol: float) -> bool:
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def merge_points(points: Sequence[tuple[complex, int]], tol: float = 1e-12) -> Points:
    """Combine entries that coincide within ``tol`` (relative) into one entry."""
    merged: list[list] = []
    for c, m in points:
        c = complex(c)
        if m <= 0:
            continue
        for entry in merged:
            if _match(entry[0], c, tol):
                total = entry[1] + m
                entry[0] = (entry[0] * entry[1] + c * m) / total
                entry[1] = total
                break
        else:
            merged.append([c, int(m)])
    merged.sort(key=lambda e: (abs(e[0]), cmath.phase(e[0])))
    return [(c, m) for c, m in merged]


def cancel_points(zeros: Points, poles: Points, tol: float = TAU_CANCEL) -> tuple[Points, Points]:
    """Remove common zero/pole factors (matching within ``tol`` relative)."""
    zs = [[c, m] for c, m in zeros]
    ps = [[c, m] for c, m in poles]
    for z in zs:
        for p in ps:
            if z[1] == 0 or p[1] == 0:
                continue
            if _match(z[0], p[0], tol):
                k = min(z[1], p[1])
                z[1] -= k
                p[1] -= k
    return merge_points([(c, m) for c, m in zs if m > 0]), merge_points(
        [(c, m) for c, m in ps if m > 0]
    )


def _in_disc(points: Points, r: float, closed: bool = True) -> Points:
    if closed:
        return [(c, m) for c, m in points if abs(c) <= r]
    return [(c, m) for c, m in points if abs(c) < r]


class MeroFn:
    """Common interface of the closed-form families."""

    r_valid: float = math.inf

    @property
    def is_entire(self) -> bool:
        return not self.pole_points()

    def eval(self, x):
        raise NotImplementedError

    def __call__(self, x):
        return self.eval(x)

    def log_abs(self, x):
        """``log|f(x)|``; ``-inf`` at zeros and ``+inf`` at poles."""
        xs, scalar = _as_array(x)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            out = np.log(np.abs(np.asarray(self.eval(xs))))
        return _ret_real(out, scalar)

    def zero_points(self) -> Points:
        raise NotImplementedError

    def pole_points(self) -> Points:
        raise NotImplementedError

    def a_points(self, a) -> Points:
        """Solutions of ``f = a`` with multiplicity; ``a=None`` means infinity."""
        if a is None:
            return self.pole_points()
        if a == 0:
            return self.zero_points()
        raise Unsupported(f"{type(self).__name__} cannot enumerate {a}-points")

    def zeros_in_disc(self, r: float, closed: bool = True) -> Points:
        return _in_disc(self.zero_points(), r, closed)

    def poles_in_disc(self, r: float, closed: bool = True) -> Points:
        return _in_disc(self.pole_points(), r, closed)

    def derivative_eval(self, x):
        raise Unsupported(f"{type(self).__name__} has no closed-form derivative")

    @property
    def is_constant(self) -> bool:
        return False

    def check_validity(self, x) -> None:
        if math.isinf(self.r_valid):
            return
        radius = float(np.max(np.abs(np.asarray(x)))) if np.size(x) else 0.0
        if radius > self.r_valid:
            raise OutOfValidity(
                f"|x| = {radius:.6g} exceeds validity radius {self.r_valid:.6g} of {self!r}"
            )


# ---------------------------------------------------------------------------
# polynomials and root finding


def _horner_scaled(coeffs: np.ndarray, z: np.ndarray):
    """Return ``p(z)/p'(z)`` and the backward-error ratio ``|p(z)|/sum|c_k||z|^k``.

    For ``|z| > 1`` the reversed polynomial is evaluated at ``1/z`` so that
    high degrees with large roots do not overflow.
    """
    d = len(coeffs) - 1
    inner = np.abs(z) <= 1.0
    ratio = np.empty_like(z)
    berr = np.empty(z.shape)
    with np.errstate(all="ignore"):
        if inner.any():
            zi = z[inner]
            p = np.zeros_like(zi)
            dp = np.zeros_like(zi)
            s = np.zeros(zi.shape)
            for c in coeffs[::-1]:
                dp = dp * zi + p
                p = p * zi + c
                s = s * np.abs(zi) + abs(c)
            ratio[inner] = p / dp
            berr[inner] = np.abs(p) / s
        outer = ~inner
        if outer.any():
            y = 1.0 / z[outer]
            r = np.zeros_like(y)
            dr = np.zeros_like(y)
            s = np.zeros(y.shape)
            for c in coeffs:  # reversed polynomial R(y) = sum c_k y^(d-k)
                dr = dr * y + r
                r = r * y + c
                s = s * np.abs(y) + abs(c)
            ratio[outer] = z[outer] * r / (d * r - y * dr)
            berr[outer] = np.abs(r) / s
    return ratio, berr


def _initial_guesses(coeffs: np.ndarray) -> np.ndarray:
    """Newton-polygon starting points (upper convex hull of log|c_k|)."""
    d = len(coeffs) - 1
    with np.errstate(divide="ignore"):
        logs = np.log(np.abs(coeffs))
    idx = [k for k in range(d + 1) if np.isfinite(logs[k])]
    hull: list[int] = []
    for k in idx:
        while len(hull) >= 2:
            i, j = hull[-2], hull[-1]
            # drop j if it lies on or below the chord i -> k
            if (logs[j] - logs[i]) * (k - i) <= (logs[k] - logs[i]) * (j - i):
                hull.pop()
            else:
                break
        hull.append(k)
    guesses = []
    for i, j in zip(hull[:-1], hull[1:]):
        n = j - i
        radius = math.exp((logs[i] - logs[j]) / n)
        offset = 0.4 + 2.1 * i / max(d, 1)
        for k in range(n):
            guesses.append(radius * cmath.exp(1j * (2 * math.pi * k / n + offset)))
    return np.array(guesses, dtype=complex)


def _aberth(coeffs: np.ndarray, z: np.ndarray, maxiter: int) -> tuple[np.ndarray, bool]:
    eps = np.finfo(float).eps
    active = np.ones(len(z), dtype=bool)
    for _ in range(maxiter):
        ratio, berr = _horner_scaled(coeffs, z)
        done = (berr <= 8 * eps) | ~np.isfinite(ratio)
        active &= ~done
        if not active.any():
            return z, True
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, np.inf)
        with np.errstate(all="ignore"):
            corr = (1.0 / diff).sum(axis=1)
            w = ratio / (1.0 - ratio * corr)
        w = np.where(active & np.isfinite(w), w, 0.0)
        z = z - w
        small = np.abs(w) <= 4 * eps * np.abs(z)
        active &= ~small
        if not active.any():
            return z, True
    return z, False


def _cluster(z: np.ndarray, tol: float = CLUSTER_TOL) -> Points:
    n = len(z)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(z[i] - z[j]) <= tol * max(abs(z[i]), abs(z[j])):
                parent[find(i)] = find(j)
    groups: dict[int, list[complex]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(complex(z[i]))
    return merge_points([(sum(g) / len(g), len(g)) for g in groups.values()], tol=0.0)


def _backward_error(coeffs: np.ndarray, points: Points) -> float:
    if not points:
        return 0.0
    _, berr = _horner_scaled(coeffs, np.array([c for c, _ in points], dtype=complex))
    return float(np.max(berr))


def roots(p: "Polynomial", maxiter: int = ROOT_MAXITER, tol: float = TAU_ROOT) -> Points:
    """Roots of ``p`` with multiplicities.

    Aberth-Ehrlich simultaneous iteration from Newton-polygon starting
    points, falling back to companion-matrix eigenvalues.  Roots closer than
    ``CLUSTER_TOL`` (relative) are merged into a multiple root.
    """
    c = np.array(p.coeffs, dtype=complex)
    if len(c) < 2:
        raise ValueError("roots() needs a polynomial of degree >= 1")
    n_zero = 0
    while c[n_zero] == 0:
        n_zero += 1
    core = c[n_zero:]
    found: Points = [(0j, n_zero)] if n_zero else []
    if len(core) == 1:
        return found
    if len(core) == 2:
        return merge_points(found + [(-core[0] / core[1], 1)], tol=0.0)

    z, ok = _aberth(core, _initial_guesses(core), maxiter)
    pts = _cluster(z)
    if not ok or _backward_error(core, pts) > tol:
        companion_roots = np.roots(core[::-1])
        z2, _ = _aberth(core, companion_roots.astype(complex), 20)
        pts = _cluster(z2)
        if _backward_error(core, pts) > tol:
            raise NonConvergence(
                f"root finder failed for degree {len(core) - 1} after {maxiter} iterations"
            )
    return merge_points(found + pts, tol=0.0)


@dataclass(frozen=True, eq=True)
class Polynomial(MeroFn):
    """``sum coeffs[k] x**k``; the zero polynomial has ``coeffs == ()``."""

    coeffs: tuple

    def __post_init__(self):
        c = [complex(v) for v in self.coeffs]
        while c and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))

    @classmethod
    def zero(cls) -> "Polynomial":
        return cls(())

    @classmethod
    def monomial(cls, n: int, c: complex = 1.0) -> "Polynomial":
        return cls((0,) * n + (c,))

    @classmethod
    def from_roots(cls, points: Points, lead: complex = 1.0) -> "Polynomial":
        rts = [c for c, m in points for _ in range(m)]
        base = npoly.polyfromroots(rts) if rts else np.array([1.0])
        return cls(tuple(lead * np.asarray(base, dtype=complex)))

    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def lead(self) -> complex:
        return self.coeffs[-1] if self.coeffs else 0j

    @property
    def is_constant(self) -> bool:
        return self.degree() <= 0

    def eval(self, x):
        xs, scalar = _as_array(x)
        acc = np.zeros_like(xs)
        with np.errstate(over="ignore", invalid="ignore"):
            for c in reversed(self.coeffs):
                acc = acc * xs + c
        return _ret(acc, scalar)

    def log_abs(self, x):
        xs, scalar = _as_array(x)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            out = np.log(np.abs(self.eval(xs)))
            bad = ~np.isfinite(out) & (np.abs(xs) > 1.0)
            if bad.any() and self.degree() >= 1:
                # overflow: fall back to the factored form
                val = np.full(bad.sum(), math.log(abs(self.lead)))
                for c, m in self.zero_points():
                    val += m * np.log(np.abs(xs[bad] - c))
                out[bad] = val
        return _ret_real(out, scalar)

    @cached_property
    def _roots(self) -> Points:
        return roots(self) if self.degree() >= 1 else []

    def zero_points(self) -> Points:
        return list(self._roots)

    def pole_points(self) -> Points:
        return []

    def a_points(self, a) -> Points:
        if a is None:
            return []
        if a == 0:
            return self.zero_points()
        shifted = self - Polynomial((a,))
        return shifted.zero_points() if shifted.degree() >= 1 else []

    def derivative(self) -> "Polynomial":
        return derivative(self)

    def derivative_eval(self, x):
        return self.derivative().eval(x)

    def __add__(self, other):
        other = _coerce_poly(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = list(self.coeffs) + [0j] * (n - len(self.coeffs))
        b = list(other.coeffs) + [0j] * (n - len(other.coeffs))
        return Polynomial(tuple(x + y for x, y in zip(a, b)))

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(tuple(-c for c in self.coeffs))

    def __sub__(self, other):
        return self + (-_coerce_poly(other))

    def __rsub__(self, other):
        return _coerce_poly(other) - self

    def __mul__(self, other):
        other = _coerce_poly(other)
        if not self.coeffs or not other.coeffs:
            return Polynomial.zero()
        return Polynomial(tuple(np.convolve(self.coeffs, other.coeffs)))

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"Polynomial(degree={self.degree()})"


def _coerce_poly(value) -> Polynomial:
    if isinstance(value, Polynomial):
        return value
    if isinstance(value, (int, float, complex, np.number)):
        return Polynomial((value,))
    return NotImplemented


def derivative(p: Polynomial) -> Polynomial:
    return Polynomial(tuple(k * c for k, c in enumerate(p.coeffs))[1:])


def chebyshev_nodes(n: int, radius: float = 1.0) -> np.ndarray:
    """First-kind Chebyshev points on ``[-radius, radius]`` (endpoints excluded)."""
    k = np.arange(n)
    return radius * np.cos((2 * k + 1) * np.pi / (2 * n)) + 0j


def circle_nodes(n: int, radius: float, offset: float = 0.1234) -> np.ndarray:
    """``n`` equispaced points on ``|x| = radius`` rotated off the real axis."""
    return radius * np.exp(1j * (2 * np.pi * np.arange(n) / n + offset))


def interpolate(samples, deg: int, *, tol: float = TAU_INTERP, cond_max: float = 1e12) -> Polynomial:
    """Least-squares polynomial of degree ``<= deg`` through ``(x, value)`` samples.

    Raises :class:`IllConditioned` when the scaled Vandermonde matrix has
    condition number above ``cond_max`` and :class:`ResidualError` when the
    fit misses a sample by more than ``tol`` relative to the largest sample.
    """
    pts = list(samples)
    if len(pts) < deg + 1:
        raise ValueError(f"need at least {deg + 1} samples for degree {deg}, got {len(pts)}")
    xs = np.array([complex(x) for x, _ in pts])
    vs = np.array([complex(v) for _, v in pts])
    gaps = np.abs(xs[:, None] - xs[None, :]) + np.eye(len(xs))
    if np.min(gaps) == 0:
        raise ValueError("interpolation nodes must be pairwise distinct")
    scale = float(np.max(np.abs(xs))) or 1.0
    powers = np.arange(deg + 1)
    vander = (xs / scale)[:, None] ** powers[None, :]
    cond = np.linalg.cond(vander)
    if not np.isfinite(cond) or cond > cond_max:
        raise IllConditioned(f"Vandermonde condition number {cond:.3g} exceeds {cond_max:.3g}")
    sol, *_ = np.linalg.lstsq(vander, vs, rcond=None)
    ref = float(np.max(np.abs(vs))) or 1.0
    residual = float(np.max(np.abs(vander @ sol - vs))) / ref
    if residual > tol:
        raise ResidualError(f"interpolation residual {residual:.3g} exceeds {tol:.3g}", residual)
    return Polynomial(tuple(sol / scale**powers))


# ---------------------------------------------------------------------------
# zero-pole form


@dataclass(frozen=True, eq=True)
class ZeroPoleFn(MeroFn):
    """``scale * prod (x - z_i)^m_i / prod (x - p_j)^n_j``."""

    scale: complex
    zeros: tuple = ()
    poles: tuple = ()

    def __post_init__(self):
        scale = complex(self.scale)
        if scale == 0 or not cmath.isfinite(scale):
            raise ValueError("ZeroPoleFn scale must be finite and nonzero")
        zs = merge_points([(complex(c), int(m)) for c, m in self.zeros])
        ps = merge_points([(complex(c), int(m)) for c, m in self.poles])
        for z, _ in zs:
            for p, _ in ps:
                if abs(z - p) <= TAU_MATCH * max(1.0, abs(p)):
                    raise ValueError(f"zero {z} and pole {p} coincide within tolerance")
        object.__setattr__(self, "scale", scale)
        object.__setattr__(self, "zeros", tuple(zs))
        object.__setattr__(self, "poles", tuple(ps))

    @property
    def num_degree(self) -> int:
        return sum(m for _, m in self.zeros)

    @property
    def den_degree(self) -> int:
        return sum(m for _, m in self.poles)

    @property
    def is_constant(self) -> bool:
        return not self.zeros and not self.poles

    def eval(self, x):
        xs, scalar = _as_array(x)
        zs = [c for c, m in self.zeros for _ in range(m)]
        ps = [c for c, m in self.poles for _ in range(m)]
        vals = np.full(xs.shape, self.scale, dtype=complex)
        with np.errstate(all="ignore"):
            for i in range(max(len(zs), len(ps))):
                if i < len(zs):
                    vals *= xs - zs[i]
                if i < len(ps):
                    vals /= xs - ps[i]
        for p, _ in self.poles:
            vals[np.abs(xs - p) <= TAU_MATCH * max(1.0, abs(p))] = POLE
        return _ret(vals, scalar)

    def log_abs(self, x):
        xs, scalar = _as_array(x)
        out = np.full(xs.shape, math.log(abs(self.scale)))
        with np.errstate(divide="ignore", invalid="ignore"):
            for c, m in self.zeros:
                out += m * np.log(np.abs(xs - c))
            for c, m in self.poles:
                out -= m * np.log(np.abs(xs - c))
        return _ret_real(out, scalar)

    def zero_points(self) -> Points:
        return list(self.zeros)

    def pole_points(self) -> Points:
        return list(self.poles)

    @cached_property
    def rational(self) -> tuple[Polynomial, Polynomial]:
        return (
            Polynomial.from_roots(list(self.zeros), self.scale),
            Polynomial.from_roots(list(self.poles)),
        )

    def a_points(self, a) -> Points:
        if a is None:
            return self.pole_points()
        if a == 0:
            return self.zero_points()
        num, den = self.rational
        shifted = num - den * a
        return shifted.zero_points() if shifted.degree() >= 1 else []

    def derivative_eval(self, x):
        num, den = self.rational
        dn, dd = num.derivative(), den.derivative()
        xs, scalar = _as_array(x)
        d = den.eval(xs)
        with np.errstate(all="ignore"):
            out = (dn.eval(xs) * d - num.eval(xs) * dd.eval(xs)) / (d * d)
        return _ret(out, scalar)

    def __repr__(self) -> str:
        return f"ZeroPoleFn(zeros={self.num_degree}, poles={self.den_degree})"


@dataclass(frozen=True, eq=True)
class PartialFractionFn(MeroFn):
    """``poly(x) + sum r_i / (x - p_i)`` with simple poles ``p_i``.

    Closures of rational functions with simple poles stay in this form, which
    evaluates accurately even when residues are tiny (where the zero-pole
    form suffers from near-cancelling zero/pole pairs).
    """

    poly: Polynomial
    residues: tuple = ()

    def __post_init__(self):
        res = []
        for p, r in self.residues:
            p, r = complex(p), complex(r)
            if r == 0:
                continue
            for entry in res:
                if _match(entry[0], p, 1e-12):
                    entry[1] += r
                    break
            else:
                res.append([p, r])
        res.sort(key=lambda e: (abs(e[0]), cmath.phase(e[0])))
        object.__setattr__(self, "residues", tuple((p, r) for p, r in res if r != 0))

    @property
    def is_constant(self) -> bool:
        return not self.residues and self.poly.degree() <= 0

    @property
    def den_degree(self) -> int:
        return len(self.residues)

    @property
    def num_degree(self) -> int:
        num = self.rational[0]
        return max(num.degree(), 0)

    def eval(self, x):
        xs, scalar = _as_array(x)
        vals = np.asarray(self.poly.eval(xs), dtype=complex)
        hit = np.zeros(xs.shape, dtype=bool)
        with np.errstate(all="ignore"):
            for p, r in self.residues:
                vals = vals + r / (xs - p)
                hit |= np.abs(xs - p) <= TAU_MATCH * max(1.0, abs(p))
        vals[hit] = POLE
        return _ret(vals, scalar)

    def pole_points(self) -> Points:
        return merge_points([(p, 1) for p, _ in self.residues], tol=0.0)

    @cached_property
    def rational(self) -> tuple[Polynomial, Polynomial]:
        poles = [(p, 1) for p, _ in self.residues]
        den = Polynomial.from_roots(poles)
        num = self.poly * den
        for i, (_, r) in enumerate(self.residues):
            others = [(p, 1) for j, (p, _) in enumerate(self.residues) if j != i]
            num = num + Polynomial.from_roots(others, r)
        return num, den

    @cached_property
    def _zeros(self) -> Points:
        num = self.rational[0]
        return num.zero_points() if num.degree() >= 1 else []

    def zero_points(self) -> Points:
        return list(self._zeros)

    def a_points(self, a) -> Points:
        if a is None:
            return self.pole_points()
        if a == 0:
            return self.zero_points()
        num, den = self.rational
        shifted = num - den * a
        return shifted.zero_points() if shifted.degree() >= 1 else []

    def derivative_eval(self, x):
        xs, scalar = _as_array(x)
        vals = np.asarray(self.poly.derivative_eval(xs), dtype=complex)
        with np.errstate(all="ignore"):
            for p, r in self.residues:
                vals = vals - r / (xs - p) ** 2
        return _ret(vals, scalar)

    def __repr__(self) -> str:
        return f"PartialFractionFn(poly_degree={self.poly.degree()}, poles={len(self.residues)})"


def to_partial_fractions(f: MeroFn) -> PartialFractionFn | None:
    """Partial-fraction form of a rational ``f`` with simple poles, else ``None``."""
    if isinstance(f, PartialFractionFn):
        return f
    if isinstance(f, Polynomial):
        return PartialFractionFn(f, ())
    if isinstance(f, TruncatedQProduct):
        return PartialFractionFn(f.polynomial, ())
    if not isinstance(f, ZeroPoleFn):
        return None
    if any(m > 1 for _, m in f.poles):
        return None
    poles = [p for p, _ in f.poles]
    residues = []
    for i, p in enumerate(poles):
        val = f.scale
        for z, m in f.zeros:
            val *= (p - z) ** m
        for j, other in enumerate(poles):
            if j != i:
                val /= p - other
        residues.append((p, val))
    num, den = f.rational
    quot, _ = npoly.polydiv(np.asarray(num.coeffs), np.asarray(den.coeffs))
    poly = Polynomial(tuple(quot)) if num.degree() >= den.degree() else Polynomial.zero()
    return PartialFractionFn(poly, tuple(residues))


# ---------------------------------------------------------------------------
# transcendental families


@dataclass(frozen=True)
class ExpPoly(MeroFn):
    """``exp(P(x))`` for a polynomial ``P``; entire and zero-free."""

    poly: Polynomial

    @property
    def degree(self) -> int:
        return max(self.poly.degree(), 0)

    @property
    def is_constant(self) -> bool:
        return self.poly.degree() <= 0

    @property
    def is_entire(self) -> bool:
        return True

    def eval(self, x):
        xs, scalar = _as_array(x)
        with np.errstate(over="ignore"):
            return _ret(np.exp(self.poly.eval(xs)), scalar)

    def log_abs(self, x):
        xs, scalar = _as_array(x)
        return _ret_real(np.real(self.poly.eval(xs)), scalar)

    def zero_points(self) -> Points:
        return []

    def pole_points(self) -> Points:
        return []

    def derivative_eval(self, x):
        xs, scalar = _as_array(x)
        with np.errstate(over="ignore", invalid="ignore"):
            out = self.poly.derivative().eval(xs) * np.exp(self.poly.eval(xs))
        return _ret(out, scalar)

    def __repr__(self) -> str:
        return f"ExpPoly(degree={self.degree})"


@dataclass(frozen=True)
class TruncatedQProduct(MeroFn):
    """``scale * prod_{n=1}^{M} (1 - x q^n)``.

    Stands in for the entire q-product of logarithmic order 2; queries are
    only accepted on ``|x| <= |q|^{-M} (1 - VALIDITY_MARGIN)``.
    """

    scale: complex
    q: complex
    M: int

    def __post_init__(self):
        q = complex(self.q)
        if not 0 < abs(q) < 1:
            raise ValueError("TruncatedQProduct needs 0 < |q| < 1")
        if int(self.M) < 1:
            raise ValueError("truncation M must be >= 1")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "scale", complex(self.scale))
        object.__setattr__(self, "M", int(self.M))

    @property
    def r_valid(self) -> float:
        return abs(self.q) ** (-self.M) * (1 - VALIDITY_MARGIN)

    @property
    def is_entire(self) -> bool:
        return True

    @cached_property
    def polynomial(self) -> Polynomial:
        coeffs = np.array([self.scale], dtype=complex)
        for n in range(1, self.M + 1):
            coeffs = np.convolve(coeffs, [1.0, -(self.q**n)])
        return Polynomial(tuple(coeffs))

    def eval(self, x):
        xs, scalar = _as_array(x)
        self.check_validity(xs)
        vals = np.full(xs.shape, self.scale, dtype=complex)
        for n in range(1, self.M + 1):
            vals *= 1 - xs * self.q**n
        return _ret(vals, scalar)

    def log_abs(self, x):
        xs, scalar = _as_array(x)
        self.check_validity(xs)
        out = np.full(xs.shape, math.log(abs(self.scale)))
        with np.errstate(divide="ignore"):
            for n in range(1, self.M + 1):
                out += np.log(np.abs(1 - xs * self.q**n))
        return _ret_real(out, scalar)

    def zero_points(self) -> Points:
        return [(self.q ** (-n), 1) for n in range(1, self.M + 1)]

    def pole_points(self) -> Points:
        return []

    def a_points(self, a) -> Points:
        if a is None or a == 0:
            return super().a_points(a)
        return self.polynomial.a_points(a)

    def derivative_eval(self, x):
        self.check_validity(x)
        return self.polynomial.derivative_eval(x)

    def __repr__(self) -> str:
        return f"TruncatedQProduct(q={self.q}, M={self.M})"


# ---------------------------------------------------------------------------
# conversions


def as_zeropole(f: MeroFn) -> ZeroPoleFn:
    if isinstance(f, ZeroPoleFn):
        return f
    if isinstance(f, Polynomial):
        if f.degree() < 0:
            raise ValueError("the zero polynomial has no zero-pole form")
        return ZeroPoleFn(f.lead, tuple(f.zero_points()), ())
    if isinstance(f, TruncatedQProduct):
        lead = f.scale * np.prod([-(f.q**n) for n in range(1, f.M + 1)])
        return ZeroPoleFn(lead, tuple(f.zero_points()), ())
    if isinstance(f, PartialFractionFn):
        num, _ = f.rational
        if num.degree() < 0:
            raise ValueError("identically zero function has no zero-pole form")
        return ZeroPoleFn(num.lead, tuple(f.zero_points()), tuple(f.pole_points()))
    raise Unsupported(f"{type(f).__name__} has no zero-pole form")


def as_rational(f: MeroFn) -> tuple[Polynomial, Polynomial]:
    if isinstance(f, Polynomial):
        return f, Polynomial((1.0,))
    if isinstance(f, TruncatedQProduct):
        return f.polynomial, Polynomial((1.0,))
    if isinstance(f, PartialFractionFn):
        return f.rational
    return as_zeropole(f).rational


def from_rational(num: Polynomial, den: Polynomial) -> MeroFn:
    """Reduced zero-pole form of ``num/den`` (zero polynomial if ``num == 0``)."""
    if num.degree() < 0:
        return Polynomial.zero()
    if den.degree() < 0:
        raise ZeroDivisionError("zero denominator")
    zs, ps = cancel_points(num.zero_points(), den.zero_points())
    return ZeroPoleFn(num.lead / den.lead, tuple(zs), tuple(ps))


def reciprocal(f: MeroFn) -> ZeroPoleFn:
    zp = as_zeropole(f)
    return ZeroPoleFn(1.0 / zp.scale, zp.poles, zp.zeros)


def zp_product(factors: Sequence[tuple[MeroFn, int]]) -> MeroFn:
    """Product of zero-pole forms raised to integer powers, with cancellation."""
    scale = 1.0 + 0j
    zeros: Points = []
    poles: Points = []
    for g, power in factors:
        zp = as_zeropole(g)
        if power >= 0:
            scale *= zp.scale**power
            zeros += [(c, m * power) for c, m in zp.zeros]
            poles += [(c, m * power) for c, m in zp.poles]
        else:
            scale *= zp.scale**power
            zeros += [(c, -m * power) for c, m in zp.poles]
            poles += [(c, -m * power) for c, m in zp.zeros]
    zs, ps = cancel_points(merge_points(zeros), merge_points(poles))
    return ZeroPoleFn(scale, tuple(zs), tuple(ps))


def rational_sum(terms: Sequence[MeroFn]) -> MeroFn:
    """Sum of polynomial / zero-pole terms, returned in reduced zero-pole form."""
    num = Polynomial.zero()
    den = Polynomial((1.0,))
    for t in terms:
        if isinstance(t, Polynomial) and t.degree() < 0:
            continue
        n2, d2 = as_rational(t)
        num = num * d2 + n2 * den
        den = den * d2
    return from_rational(num, den)
