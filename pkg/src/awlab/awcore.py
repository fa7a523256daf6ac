"""The Askey-Wilson divided-difference operator.

With ``x = (z + 1/z)/2`` the operator is

    D_q f(x) = (f(x_hat) - f(x_check)) / (x_hat - x_check),
    x_hat   = (q^{1/2} z + q^{-1/2} z^{-1}) / 2,
    x_check = (q^{-1/2} z + q^{1/2} z^{-1}) / 2,

and at ``x = +-1`` it is continued by ``f'(+-(q^{1/2} + q^{-1/2})/2)``.

Closed forms are computed in the Chebyshev basis, where the operator is
diagonal up to a change of kind: ``D_q T_k = [k]_q U_{k-1}`` with
``[k]_q = (q^{k/2} - q^{-k/2}) / (q^{1/2} - q^{-1/2})``.
"""

from __future__ import annotations

import cmath
import math
import threading
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from numpy.polynomial import chebyshev as npcheb

from .errors import (
    DegreeMismatch,
    DepthExceeded,
    DerivativeUnavailable,
    InvalidInput,
    PoleHit,
    Unsupported,
)
from .funcmodel import (
    TAU_CANCEL,
    ExpPoly,
    MeroFn,
    PartialFractionFn,
    Points,
    Polynomial,
    TruncatedQProduct,
    ZeroPoleFn,
    _as_array,
    _ret,
    as_rational,
    as_zeropole,
    cancel_points,
    circle_nodes,
    interpolate,
    is_pole,
    merge_points,
    to_partial_fractions,
)

TAU_EXC = 1e-7
K_MAX = 6
CROSSCHECK_NODES = 20
CROSSCHECK_TOL = 1e-8
FD_STEP = 1e-3


@dataclass(frozen=True)
class QParam:
    """Deformation parameter ``0 < |q| < 1`` with its derived constants.

    ``C`` is the largest constant a caller intends to use with ``B``; ``B``
    exceeds both ``C`` and ``2(|q^{1/2}| + |q^{-1/2}|)``.
    """

    q: complex
    C: float = 0.0

    def __post_init__(self):
        q = complex(self.q)
        if not 0 < abs(q) < 1:
            raise InvalidInput(f"0<|q|<1 violated: |q| = {abs(q):.6g}")
        object.__setattr__(self, "q", q)

    @cached_property
    def q_half(self) -> complex:
        return cmath.sqrt(self.q)

    @cached_property
    def q_minus_half(self) -> complex:
        return 1.0 / self.q_half

    @property
    def c_q(self) -> complex:
        return (self.q_minus_half - self.q_half) / 2

    @property
    def Q2(self) -> float:
        """``2(|q^{1/2}| + |q^{-1/2}|)``."""
        return 2 * (abs(self.q_half) + abs(self.q_minus_half))

    @property
    def K(self) -> float:
        """``|q^{1/2} - 1| + |q^{-1/2} - 1|``."""
        return abs(self.q_half - 1) + abs(self.q_minus_half - 1)

    @property
    def B(self) -> int:
        return max(math.floor(self.C), math.floor(self.Q2)) + 1

    @property
    def sigma(self) -> complex:
        """Image of ``x = 1`` under both shifts."""
        return (self.q_half + self.q_minus_half) / 2

    def bracket(self, n: int) -> complex:
        """``[n]_q``; equals ``n`` in the limit ``q -> 1``."""
        if n == 0:
            return 0j
        return (self.q_half**n - self.q_minus_half**n) / (self.q_half - self.q_minus_half)

    def __repr__(self) -> str:
        return f"QParam(q={self.q})"


@dataclass(frozen=True)
class HatCheckPair:
    x_hat: complex
    x_check: complex
    z: complex


def z_of_x(x, branch: int = 1):
    """Branch value ``z`` with ``(z + 1/z)/2 = x`` and ``|z| >= 1``.

    On the cut ``[-1, 1]`` both roots have modulus one; the one with
    ``Im z >= 0`` is taken.  ``branch=-1`` returns the reciprocal.
    """
    xs, scalar = _as_array(x)
    s = np.sqrt(xs - 1) * np.sqrt(xs + 1)
    z1 = xs + s
    z2 = xs - s
    a1, a2 = np.abs(z1), np.abs(z2)
    tie = np.abs(a1 - a2) <= 1e-12 * np.maximum(a1, a2)
    pick1 = np.where(tie, z1.imag >= z2.imag, a1 >= a2)
    z = np.where(pick1, z1, z2)
    if branch == -1:
        z = 1.0 / z
    elif branch != 1:
        raise ValueError("branch must be +1 or -1")
    return _ret(z, scalar)


def hat_check_arrays(x, q: QParam, branch: int = 1):
    """Vectorised ``(x_hat, x_check, z)``."""
    z, z_inv = _z_pair(x, branch)
    x_hat = (q.q_half * z + q.q_minus_half * z_inv) / 2
    x_check = (q.q_minus_half * z + q.q_half * z_inv) / 2
    return x_hat, x_check, z


def _z_pair(x, branch: int):
    # the opposite branch is the exact swap (z, 1/z) -> (1/z, z)
    z = np.atleast_1d(np.asarray(z_of_x(x), dtype=complex))
    z_inv = 1.0 / z
    if branch == -1:
        return z_inv, z
    if branch != 1:
        raise ValueError("branch must be +1 or -1")
    return z, z_inv


def hat_check(x: complex, q: QParam, branch: int = 1) -> HatCheckPair:
    xh, xc, z = hat_check_arrays(x, q, branch)
    return HatCheckPair(complex(xh[0]), complex(xc[0]), complex(z[0]))


def _finite_difference(f: MeroFn, x: np.ndarray) -> np.ndarray:
    h = FD_STEP * np.maximum(1.0, np.abs(x))
    vals = [np.asarray(f.eval(x + k * h), dtype=complex) for k in (-2, -1, 1, 2)]
    if any(np.any(is_pole(v)) for v in vals):
        raise DerivativeUnavailable("finite-difference stencil touches a pole")
    return (vals[0] - 8 * vals[1] + 8 * vals[2] - vals[3]) / (12 * h)


def _derivative(f: MeroFn, x: np.ndarray) -> np.ndarray:
    try:
        return np.asarray(f.derivative_eval(x), dtype=complex)
    except Unsupported:
        pass
    try:
        return _finite_difference(f, x)
    except Unsupported as exc:
        raise DerivativeUnavailable(str(exc)) from exc


def dq_eval(f: MeroFn, x, q: QParam, branch: int = 1):
    """Pointwise ``D_q f(x)``; vectorised over ``x``.

    Raises :class:`PoleHit` when a shifted point lands on a pole of ``f``.
    """
    xs, scalar = _as_array(x)
    z, z_inv = _z_pair(xs, branch)
    x_hat = (q.q_half * z + q.q_minus_half * z_inv) / 2
    x_check = (q.q_minus_half * z + q.q_half * z_inv) / 2
    out = np.empty_like(xs)
    near_p = np.abs(xs - 1) < TAU_EXC
    near_m = np.abs(xs + 1) < TAU_EXC
    regular = ~(near_p | near_m)
    if regular.any():
        fh = np.asarray(f.eval(x_hat[regular]), dtype=complex)
        fc = np.asarray(f.eval(x_check[regular]), dtype=complex)
        if np.any(is_pole(fh)) or np.any(is_pole(fc)):
            raise PoleHit("a shifted point coincides with a pole")
        den = (q.q_half - q.q_minus_half) * (z[regular] - z_inv[regular]) / 2
        out[regular] = (fh - fc) / den
    for mask, sign in ((near_p, 1), (near_m, -1)):
        if mask.any():
            point = np.full(int(mask.sum()), sign * q.sigma, dtype=complex)
            out[mask] = _derivative(f, point)
    return _ret(out, scalar)


# ---------------------------------------------------------------------------
# exact closures


def _u_to_monomial(coeffs_u: np.ndarray) -> np.ndarray:
    """Monomial coefficients of ``sum coeffs_u[k] U_k``."""
    n = len(coeffs_u)
    out = np.zeros(n, dtype=complex)
    prev = np.zeros(n, dtype=complex)
    cur = np.zeros(n, dtype=complex)
    cur[0] = 1.0
    for k in range(n):
        out += coeffs_u[k] * cur
        nxt = np.zeros(n, dtype=complex)
        nxt[1:] = 2 * cur[:-1]
        nxt -= prev
        prev, cur = cur, nxt
    return out


def _cheb(p: Polynomial) -> np.ndarray:
    c = np.asarray(p.coeffs, dtype=complex)
    out = np.zeros(len(c), dtype=complex)
    re, im = npcheb.poly2cheb(c.real), npcheb.poly2cheb(c.imag)
    out[: len(re)] += re
    out[: len(im)] += 1j * im
    return out


def _laurent(cheb: np.ndarray, qa: complex, qb: complex) -> np.ndarray:
    """Laurent coefficients (index ``k + d``) of ``sum b_k T_k`` at ``(qa z + qb/z)/2``.

    Passing ``(q^{1/2}, q^{-1/2})`` gives ``P(x_hat)``, the swap gives ``P(x_check)``.
    """
    d = len(cheb) - 1
    out = np.zeros(2 * d + 1, dtype=complex)
    for k, b in enumerate(cheb):
        out[d + k] += b * qa**k / 2
        out[d - k] += b * qb**k / 2
    return out


def _dq_polynomial(p: Polynomial, q: QParam) -> Polynomial:
    d = p.degree()
    if d <= 0:
        return Polynomial.zero()
    b = _cheb(p)
    u = np.array([q.bracket(k + 1) * b[k + 1] for k in range(d)], dtype=complex)
    mono = _u_to_monomial(u)
    mono[-1] = q.bracket(d) * p.lead  # exact leading term
    return Polynomial(tuple(mono))


def pullback_quadratic(p: complex, q: QParam) -> np.ndarray:
    """Ascending coefficients of ``(x_hat - p)(x_check - p)`` as a polynomial in x."""
    return np.array(
        [p * p + (q.q + 1 / q.q - 2) / 4, -p * (q.q_half + q.q_minus_half), 1.0],
        dtype=complex,
    )


def _quadratic_roots(c: np.ndarray) -> list[complex]:
    a0, a1, _ = c
    disc = cmath.sqrt(a1 * a1 - 4 * a0)
    r1 = (-a1 + disc) / 2 if abs(-a1 + disc) >= abs(-a1 - disc) else (-a1 - disc) / 2
    r2 = a0 / r1 if r1 != 0 else (-a1 - disc) / 2
    return [r1, r2]


def _pullback_groups(poles: Points, q: QParam) -> list[tuple[complex, int, int]]:
    """Pullbacks of the poles of ``f`` as ``(x0, order in the denominator, true order)``.

    ``prod (x_hat - p)(x_check - p)^m`` vanishes at ``x0`` to the sum of the
    orders of ``f`` at ``x_hat(x0)`` and ``x_check(x0)``, while ``D_q f`` has a
    pole of order at most the larger of the two.
    """
    raw = []
    for i, (p, m) in enumerate(poles):
        for r in _quadratic_roots(pullback_quadratic(p, q)):
            raw.append((r, m, i))
    groups: list[list] = []
    for r, m, i in raw:
        for g in groups:
            if abs(g[0] - r) <= 1e-9 * max(1.0, abs(r)):
                g[1].append((m, i))
                break
        else:
            groups.append([r, [(m, i)]])
    out = []
    for r, members in groups:
        total = sum(m for m, _ in members)
        sources = {i for _, i in members}
        true = max(m for m, _ in members) if len(sources) > 1 else total
        out.append((r, total, true))
    return out


def pullback_poles(poles: Points, q: QParam) -> Points:
    """Poles of ``D_q f`` contributed by the poles of ``f`` (generic orders)."""
    return merge_points([(r, true) for r, _, true in _pullback_groups(poles, q)], tol=0.0)


def _remove_nearest(zeros: Points, root: complex, times: int) -> Points:
    """Drop ``times`` copies of the computed zero closest to ``root``."""
    pts = [[c, m] for c, m in zeros]
    for _ in range(times):
        if not pts:
            break
        j = min(range(len(pts)), key=lambda i: abs(pts[i][0] - root))
        pts[j][1] -= 1
        if pts[j][1] == 0:
            pts.pop(j)
    return [(c, m) for c, m in pts]


def _dq_rational_numerator(zp: ZeroPoleFn, q: QParam) -> Polynomial:
    """Polynomial ``M`` with ``D_q f = M / prod (x_hat - p)(x_check - p)``."""
    num, den = as_rational(zp)
    n_deg, d_deg = num.degree(), den.degree()
    cn, cd = _cheb(num), _cheb(den)
    nh = _laurent(cn, q.q_half, q.q_minus_half)
    nc = _laurent(cn, q.q_minus_half, q.q_half)
    dh = _laurent(cd, q.q_half, q.q_minus_half)
    dc = _laurent(cd, q.q_minus_half, q.q_half)
    a = np.convolve(nh, dc) - np.convolve(nc, dh)
    top = n_deg + d_deg
    # a is antisymmetric under z -> 1/z; symmetrise away rounding
    ak = np.array([(a[top + k] - a[top - k]) / 2 for k in range(1, top + 1)])
    if n_deg == d_deg:
        ak[-1] = 0.0  # leading terms cancel identically
    u = ak * 2 / (q.q_half - q.q_minus_half)
    return Polynomial(tuple(_u_to_monomial(u)))


def _dq_rational(f: MeroFn, q: QParam) -> MeroFn:
    zp = as_zeropole(f)
    if zp.is_constant:
        return Polynomial.zero()
    if not zp.poles:
        return _dq_polynomial(as_rational(zp)[0], q)
    numer = _dq_rational_numerator(zp, q)
    if numer.degree() < 0:
        return Polynomial.zero()
    groups = _pullback_groups(list(zp.poles), q)
    zeros = numer.zero_points() if numer.degree() >= 1 else []
    for r, total, true in groups:
        if total > true:
            zeros = _remove_nearest(zeros, r, total - true)
    poles = merge_points([(r, true) for r, _, true in groups], tol=0.0)
    zeros, poles = cancel_points(zeros, poles, TAU_CANCEL)
    return ZeroPoleFn(numer.lead, tuple(zeros), tuple(poles))


def _dq_partial(f: PartialFractionFn, q: QParam) -> MeroFn | None:
    """``D_q`` of a partial-fraction form; ``None`` if a pullback is double.

    ``D_q [r/(x - p)] = -r / ((x_hat - p)(x_check - p))``, which splits over the
    two pullbacks ``a, b`` of ``p``.  Coincident pullbacks of different poles
    stay simple poles with summed residues.
    """
    terms = []
    for p, r in f.residues:
        a, b = _quadratic_roots(pullback_quadratic(p, q))
        if abs(a - b) <= 1e-9 * max(1.0, abs(a)):
            return None
        terms.append((a, -r / (a - b)))
        terms.append((b, r / (a - b)))
    merged: list[list] = []
    for p, r in terms:
        for entry in merged:
            if abs(entry[0] - p) <= 1e-9 * max(1.0, abs(p)):
                entry[1] += r
                break
        else:
            merged.append([p, r])
    scale = max((abs(r) for _, r in terms), default=0.0)
    kept = tuple((p, r) for p, r in merged if abs(r) > 1e-13 * scale)
    poly = _dq_polynomial(f.poly, q)
    if not kept:
        return poly
    return PartialFractionFn(poly, kept)


def _sample_nodes(q: QParam, count: int, offset: float) -> np.ndarray:
    radius = 2 * max(1.0, abs(q.q_minus_half))
    return circle_nodes(count, radius, offset)


def _dq_sampled(f: MeroFn, q: QParam) -> MeroFn:
    """Second route: reconstruct the closure from pointwise ``dq_eval`` samples."""
    if isinstance(f, PartialFractionFn) and not f.residues:
        f = f.poly
    zp = as_zeropole(f) if not isinstance(f, Polynomial) else None
    if isinstance(f, Polynomial) or (zp is not None and not zp.poles):
        p = f if isinstance(f, Polynomial) else as_rational(zp)[0]
        d = p.degree()
        if d <= 0:
            return Polynomial.zero()
        xs = _sample_nodes(q, 2 * d + 2, 0.1234)
        vals = dq_eval(p, xs, q)
        return interpolate(zip(xs, vals), d - 1)
    num, den = as_rational(zp)
    n_deg, d_deg = num.degree(), den.degree()
    xs = _sample_nodes(q, 2 * (n_deg + 2 * d_deg) + 2, 0.1234)
    x_hat, x_check, _ = hat_check_arrays(xs, q)
    den_vals = den.eval(x_hat) * den.eval(x_check)
    den_poly = interpolate(zip(xs, den_vals), 2 * d_deg)
    numer_vals = dq_eval(zp, xs, q) * den_vals
    bound = n_deg + d_deg - (2 if n_deg == d_deg else 1)
    numer = interpolate(zip(xs, numer_vals), max(bound, 0))
    zeros = numer.zero_points() if numer.degree() >= 1 else []
    poles = merge_points(den_poly.zero_points(), tol=1e-7)
    zeros, poles = cancel_points(zeros, poles, TAU_CANCEL)
    return ZeroPoleFn(numer.lead / den_poly.lead, tuple(zeros), tuple(poles))


def _cross_check(f: MeroFn, g: MeroFn, q: QParam) -> None:
    xs = _sample_nodes(q, CROSSCHECK_NODES, 0.577) * 0.87
    ref = np.asarray(dq_eval(f, xs, q), dtype=complex)
    got = np.asarray(g.eval(xs), dtype=complex)
    ok = np.isfinite(ref) & np.isfinite(got)
    err = np.abs(got[ok] - ref[ok]) / np.maximum(1.0, np.abs(ref[ok]))
    if err.size and float(np.max(err)) > CROSSCHECK_TOL:
        raise DegreeMismatch(
            f"closure disagrees with pointwise evaluation (max relative error {np.max(err):.3g})"
        )


def _dq_exact(f: MeroFn, q: QParam) -> MeroFn:
    if isinstance(f, Polynomial):
        return _dq_polynomial(f, q)
    pf = to_partial_fractions(f)
    if pf is not None:
        if not pf.residues:
            return _dq_polynomial(pf.poly, q)
        g = _dq_partial(pf, q)
        if g is not None:
            return g
    return _dq_rational(f, q)


def dq_closure(f: MeroFn, q: QParam, method: str = "exact", check: bool = True) -> MeroFn:
    """Closed form of ``D_q f`` for polynomial, rational and truncated-product input.

    Rational input with simple poles yields a :class:`PartialFractionFn`;
    multiple poles fall back to a zero-pole form built from the exact
    numerator and the pullback denominator.

    ``method="exact"`` uses the Chebyshev/Laurent identities; ``"sample"``
    interpolates pointwise values.  Both are cross-checked against
    :func:`dq_eval` at fresh nodes unless ``check`` is false.
    """
    if isinstance(f, TruncatedQProduct):
        f = f.polynomial
    if not isinstance(f, (Polynomial, ZeroPoleFn, PartialFractionFn)):
        raise Unsupported(f"no closed-form D_q for {type(f).__name__}")
    if method == "exact":
        g = _dq_exact(f, q)
    elif method == "sample":
        g = _dq_sampled(f, q)
    else:
        raise ValueError(f"unknown closure method {method!r}")
    if check:
        _cross_check(f, g, q)
    return g


# ---------------------------------------------------------------------------
# iterates


def _quantize(v: complex) -> tuple[float, float]:
    return (float(f"{v.real:.14e}"), float(f"{v.imag:.14e}"))


@dataclass(frozen=True, eq=False)
class NumericDq(MeroFn):
    """``D_q^depth base`` evaluated by the nested divided-difference tree."""

    base: MeroFn
    q: QParam
    depth: int
    _memo: dict = field(default_factory=dict, repr=False, compare=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    @property
    def is_entire(self) -> bool:
        return self.base.is_entire

    @property
    def r_valid(self) -> float:
        return self.base.r_valid

    def _level(self, k: int, xs: np.ndarray) -> np.ndarray:
        if k == 0:
            return np.asarray(self.base.eval(xs), dtype=complex)
        keys = [(k, *_quantize(v)) for v in xs]
        out = np.empty_like(xs)
        todo = []
        for i, key in enumerate(keys):
            hit = self._memo.get(key)
            if hit is None:
                todo.append(i)
            else:
                out[i] = hit
        if todo:
            sub = NumericDq(self.base, self.q, k - 1, self._memo, self._lock)
            vals = np.asarray(dq_eval(sub, xs[todo], self.q), dtype=complex)
            out[todo] = vals
            with self._lock:
                for i, v in zip(todo, vals):
                    self._memo.setdefault(keys[i], v)
        return out

    def eval(self, x):
        xs, scalar = _as_array(x)
        return _ret(self._level(self.depth, xs), scalar)

    def derivative_eval(self, x):
        xs, scalar = _as_array(x)
        return _ret(_finite_difference(self, xs), scalar)

    def zero_points(self) -> Points:
        raise Unsupported("NumericDq has no zero enumeration")

    def pole_points(self) -> Points:
        # D_q maps entire functions to entire functions
        if self.base.is_entire:
            return []
        raise Unsupported("NumericDq has no pole enumeration")

    def a_points(self, a) -> Points:
        if a is None:
            return self.pole_points()
        raise Unsupported("NumericDq has no a-point enumeration")

    def __repr__(self) -> str:
        return f"NumericDq({self.base!r}, depth={self.depth})"


def dq_iter(f: MeroFn, k: int, q: QParam, k_max: int = K_MAX, method: str = "exact") -> MeroFn:
    """``D_q^k f``: repeated closure for closed forms, else a :class:`NumericDq`."""
    if k < 0:
        raise ValueError("k must be >= 0")
    if k > k_max:
        raise DepthExceeded(f"iteration depth {k} exceeds k_max = {k_max}")
    if k == 0:
        return f
    if isinstance(f, (Polynomial, ZeroPoleFn, PartialFractionFn, TruncatedQProduct)):
        g = f
        for _ in range(k):
            g = dq_closure(g, q, method=method)
            if isinstance(g, Polynomial) and g.degree() < 0:
                break
        return g
    if isinstance(f, NumericDq) and f.q == q:
        if f.depth + k > k_max:
            raise DepthExceeded(f"iteration depth {f.depth + k} exceeds k_max = {k_max}")
        return NumericDq(f.base, q, f.depth + k)
    if isinstance(f, (ExpPoly, NumericDq)):
        return NumericDq(f, q, k)
    raise Unsupported(f"cannot iterate D_q on {type(f).__name__}")


def dq_numeric(f: MeroFn, k: int, q: QParam) -> NumericDq:
    """Nested pointwise ``D_q^k f`` regardless of family (second evaluation route)."""
    if k > K_MAX:
        raise DepthExceeded(f"iteration depth {k} exceeds k_max = {K_MAX}")
    return NumericDq(f, q, k)
