"""Finite-scale checks of the logarithmic-difference, counting and growth estimates.

Asymptotic ``O(.)`` claims are rendered checkable by a :class:`Verdict`: a
table of ``(r, lhs, rhs)`` rows together with a constant ``C`` and an onset
radius such that ``lhs <= C * rhs`` on every row beyond the onset.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .awcore import QParam, TAU_EXC, dq_closure, dq_eval, dq_iter, dq_numeric, hat_check_arrays
from .errors import (
    AWLabError,
    HypothesisViolation,
    InsufficientData,
    DegenerateT,
    InvalidInput,
    PreconditionRadius,
    SingularHit,
    SolutionDegenerate,
    Unsupported,
)
from .funcmodel import (
    ExpPoly,
    MeroFn,
    PartialFractionFn,
    Points,
    Polynomial,
    TruncatedQProduct,
    ZeroPoleFn,
    _as_array,
    _ret,
    _ret_real,
    as_rational,
    from_rational,
    is_pole,
)
from .growth import (
    GrowthParams,
    PhiFn,
    SFn,
    alpha_gamma,
    closed_form_order,
    phi_order,
    rho_phi_k,
)
from .nevanlinna import (
    characteristic_T,
    count_n,
    default_r_max,
    geometric_grid,
    integrated_N,
    nevanlinna_table,
    prox_m,
)

EPSILON_DEFAULT = 0.5
SPLIT_FRACTION = 0.1
O_SLACK = 2.0
ABS_TOL = 1e-9
SINGULAR_GUARD = 1e-14
TAU_RESID = 1e-9
RESID_PROBES = 50
ORDER_BOUND_TOL = 0.15
DQ_ORDER_TOL = 0.1
POINTWISE_ANGLES = 32
ANGLE_OFFSET = 0.1234
LEMMA_A_ANGLES = (0.3, 2.0, 4.1)
LEMMA_A_POINTS = 16
NEAR_PROBE_EXPONENTS = (3, 4)
DELTA_DEFAULT = 0.5


# ---------------------------------------------------------------------------
# verdicts


@dataclass
class Verdict:
    """Outcome of one check.

    ``holds`` is true exactly when ``lhs <= fitted_constant * rhs`` (up to
    ``ABS_TOL``) on every row with ``r >= onset_radius``.
    """

    name: str
    holds: bool
    fitted_constant: float
    onset_radius: float
    margin_min: float
    grid: list[tuple[float, float, float]]
    notes: str = ""
    hypotheses: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.grid:
            raise InsufficientData(f"verdict {self.name!r} has an empty grid")
        self.grid = sorted((float(r), float(a), float(b)) for r, a, b in self.grid)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "holds": bool(self.holds),
            "fitted_constant": float(self.fitted_constant),
            "onset_radius": float(self.onset_radius),
            "margin_min": float(self.margin_min),
            "grid": [list(row) for row in self.grid],
            "notes": self.notes,
            "hypotheses": dict(self.hypotheses),
            "provenance": dict(self.provenance),
            "diagnostics": dict(self.diagnostics),
        }


def _ratio(lhs: float, rhs: float) -> float:
    if not (math.isfinite(lhs) and math.isfinite(rhs)):
        return math.nan
    if rhs > 0:
        return lhs / rhs
    if lhs <= ABS_TOL:
        return 0.0
    return math.inf


def _margin(rows, C: float, onset: float) -> float:
    vals = [C * b - a for r, a, b in rows if r >= onset]
    return float(min(vals)) if vals else math.nan


def fixed_verdict(name: str, rows, constant: float = 1.0, **meta) -> Verdict:
    """Verdict for a bound with a prescribed constant (no fitting)."""
    rows = sorted(rows)
    if not rows:
        raise InsufficientData(f"verdict {name!r} has an empty grid")
    onset = rows[0][0]
    holds = all(
        math.isfinite(a) and math.isfinite(b) and a <= constant * b + ABS_TOL for _, a, b in rows
    )
    return Verdict(name, holds, constant, onset, _margin(rows, constant, onset), rows, **meta)


def o_verdict(name: str, rows, r_split: float | None = None, **meta) -> Verdict:
    """Verdict for ``lhs = O(rhs)`` on a finite radius grid.

    The onset is the first radius after which every ratio ``lhs/rhs`` is
    finite.  A constant fitted on the head ``[onset, r_split]`` (default
    ``r_split = r_max / 10``) and inflated by ``O_SLACK`` must bound every
    tail row; if it does, the reported constant is the smallest one that
    works on all rows, otherwise it is the inflated head constant.
    """
    rows = sorted(rows)
    if not rows:
        raise InsufficientData(f"verdict {name!r} has an empty grid")
    r_max = rows[-1][0]
    r_split = SPLIT_FRACTION * r_max if r_split is None else r_split
    ratios = [_ratio(a, b) for _, a, b in rows]
    start = len(rows)
    while start > 0 and math.isfinite(ratios[start - 1]):
        start -= 1
    if start == len(rows) or rows[start][0] > r_split:
        onset = rows[start][0] if start < len(rows) else r_max
        meta.setdefault("notes", "")
        meta["notes"] = (meta["notes"] + "; " if meta["notes"] else "") + "no onset below r_max/10"
        return Verdict(name, False, math.inf, onset, -math.inf, rows, **meta)
    onset = rows[start][0]
    head = [max(0.0, x) for (r, _, _), x in zip(rows[start:], ratios[start:]) if r <= r_split]
    allowed = O_SLACK * max(head)
    tail_ok = all(
        a <= allowed * b + ABS_TOL for r, a, b in rows[start:] if r > r_split
    )
    if tail_ok:
        C = max(0.0, max(ratios[start:]))
        # rows passing only through ABS_TOL keep C finite
        holds = True
    else:
        C = allowed
        holds = False
    return Verdict(name, holds, C, onset, _margin(rows, C, onset), rows, **meta)


def _provenance(phi: PhiFn | None, s: SFn | None, q: QParam | None, eps: float | None) -> dict:
    return {
        "phi": phi.name if phi is not None else None,
        "s": s.name if s is not None else None,
        "q": None if q is None else [q.q.real, q.q.imag],
        "epsilon": eps,
    }


# ---------------------------------------------------------------------------
# order bookkeeping


@dataclass(frozen=True)
class OrderValue:
    value: float
    dispersion: float
    source: str


def order_estimate(f: MeroFn, phi: PhiFn, grid: Sequence[float] | None = None) -> OrderValue:
    """Empirical phi-order from a Nevanlinna table (constants are exactly 0)."""
    if getattr(f, "is_constant", False):
        return OrderValue(0.0, 0.0, "closed-form")
    try:
        est = phi_order(nevanlinna_table(f, grid), phi)
    except (InsufficientData, DegenerateT):
        closed = closed_form_order(f, phi)
        if closed is None:
            raise
        return OrderValue(closed, 0.0, "closed-form")
    return OrderValue(est.estimate, est.dispersion, "empirical")


def order_for_bounds(f: MeroFn, phi: PhiFn) -> OrderValue:
    """Closed-form phi-order when the family has one, else the empirical estimate."""
    closed = closed_form_order(f, phi)
    if closed is not None:
        return OrderValue(closed, 0.0, "closed-form")
    return order_estimate(f, phi)


def _require_nonconstant_dq(f: MeroFn) -> None:
    if getattr(f, "is_constant", False):
        raise InvalidInput("D_q f vanishes identically for constant f")


# ---------------------------------------------------------------------------
# the logarithmic difference D_q f / f


class LogDiffFn(MeroFn):
    """``D_q f / f`` evaluated through the closed form of ``D_q f`` when one exists."""

    def __init__(self, f: MeroFn, q: QParam):
        self.f = f
        self.q = q
        try:
            self.g: MeroFn | None = dq_closure(f, q)
        except (Unsupported, AWLabError):
            self.g = None
        self.r_valid = f.r_valid

    @property
    def route(self) -> str:
        return "closure" if self.g is not None else "pointwise"

    @property
    def is_entire(self) -> bool:
        return False

    def eval(self, x):
        xs, scalar = _as_array(x)
        num = self.g.eval(xs) if self.g is not None else dq_eval(self.f, xs, self.q)
        with np.errstate(all="ignore"):
            out = np.asarray(num, dtype=complex) / np.asarray(self.f.eval(xs), dtype=complex)
        return _ret(out, scalar)

    def log_abs(self, x):
        xs, scalar = _as_array(x)
        if self.g is None:
            return super().log_abs(x)
        with np.errstate(all="ignore"):
            out = np.asarray(self.g.log_abs(xs)) - np.asarray(self.f.log_abs(xs))
        return _ret_real(out, scalar)

    def zero_points(self) -> Points:
        raise Unsupported("zeros of D_q f / f are not enumerated")

    def pole_points(self) -> Points:
        raise Unsupported("poles of D_q f / f are not enumerated")

    def extra_singularities(self) -> list[complex]:
        pts = [c for c, _ in self.f.zero_points()] + [c for c, _ in self.f.pole_points()]
        if self.g is not None:
            pts += [c for c, _ in self.g.pole_points()]
        return pts

    def __repr__(self) -> str:
        return f"LogDiffFn({self.f!r})"


def log_plus_logdiff(f: MeroFn, x, q: QParam):
    """``log+ |D_q f(x) / f(x)|`` by pointwise evaluation."""
    xs, scalar = _as_array(x)
    with np.errstate(all="ignore"):
        val = np.abs(np.asarray(dq_eval(f, xs, q))) / np.abs(np.asarray(f.eval(xs)))
        out = np.maximum(0.0, np.log(val))
    return _ret_real(out, scalar)


# ---------------------------------------------------------------------------
# pointwise logarithmic-difference inequality with explicit constants


@dataclass(frozen=True)
class LemmaATerms:
    """The six summands of the pointwise bound, the last three scaled by ``C``."""

    m_term: float
    n_term: float
    s_plain: float
    s_minus: float
    s_plus: float
    log2: float = math.log(2)

    @property
    def total(self) -> float:
        return self.m_term + self.n_term + self.s_plain + self.s_minus + self.s_plus + self.log2

    @property
    def constant_free(self) -> float:
        return self.m_term + self.n_term + self.log2

    @property
    def singular(self) -> float:
        return self.s_plain + self.s_minus + self.s_plus


def combined_points(f: MeroFn) -> list[complex]:
    """Zeros and poles of ``f`` repeated by multiplicity."""
    pts = []
    for c, m in list(f.zero_points()) + list(f.pole_points()):
        pts += [complex(c)] * int(m)
    return pts


def _singular_sum(values: np.ndarray, alpha1: float) -> float:
    mods = np.abs(values)
    if mods.size and float(mods.min()) < SINGULAR_GUARD:
        raise SingularHit(f"singular-sum denominator {float(mods.min()):.3g} below {SINGULAR_GUARD}")
    return float(np.sum(mods ** (-alpha1)))


def _lemma_a_from_parts(x, R, alpha1, C, q, m_sum, n_sum, points) -> LemmaATerms:
    x = complex(x)
    ax = abs(x)
    Q2, K = q.Q2, q.K
    if not Q2 * ax < R:
        raise PreconditionRadius(f"2(|q^1/2|+|q^-1/2|)|x| = {Q2 * ax:.6g} is not below R = {R:.6g}")
    qh, qm = q.q_half, q.q_minus_half
    z = complex(hat_check_arrays(x, q)[2][0])
    cq = q.c_q
    inside = np.array([c for c in points if abs(c) < R], dtype=complex)
    m_term = 4 * R * K * ax / ((R - ax) * (R - Q2 * ax)) * m_sum
    n_term = 2 * K * ax * (1 / (R - ax) + 1 / (R - Q2 * ax)) * n_sum
    a1 = alpha1
    s_plain = (
        2 * C * (abs(qh - 1) ** a1 + abs(qm - 1) ** a1) * ax**a1 * _singular_sum(x - inside, a1)
    )
    s_minus = 2 * C * abs(qm - 1) ** a1 * ax**a1 * _singular_sum(x + cq * qm / z - qm * inside, a1)
    s_plus = 2 * C * abs(qh - 1) ** a1 * ax**a1 * _singular_sum(x - cq * qh / z - qh * inside, a1)
    return LemmaATerms(m_term, n_term, s_plain, s_minus, s_plus)


def _lemma_a_parts(f: MeroFn, R: float) -> tuple[float, float]:
    m_sum = prox_m(f, R, None) + prox_m(f, R, 0)
    n_sum = count_n(f, R, None) + count_n(f, R, 0)
    return m_sum, float(n_sum)


def lemma_a_terms(f: MeroFn, x: complex, R: float, alpha1: float, C: float, q: QParam) -> LemmaATerms:
    """Individual summands of the pointwise bound for ``log+ |D_q f(x)/f(x)|``."""
    if not 0 < alpha1 < 1:
        raise InvalidInput(f"alpha1 = {alpha1} outside (0, 1)")
    if not C > 0:
        raise InvalidInput(f"C = {C} must be positive")
    if not q.Q2 * abs(x) < R:
        raise PreconditionRadius(
            f"2(|q^1/2|+|q^-1/2|)|x| = {q.Q2 * abs(x):.6g} is not below R = {R:.6g}"
        )
    m_sum, n_sum = _lemma_a_parts(f, R)
    return _lemma_a_from_parts(x, R, alpha1, C, q, m_sum, n_sum, combined_points(f))


def lemma_a_rhs(f: MeroFn, x: complex, R: float, alpha1: float, C: float, q: QParam) -> float:
    """Right-hand side of the pointwise bound: the sum of all six terms."""
    return lemma_a_terms(f, x, R, alpha1, C, q).total


def radius_rule(rule: str | Callable[[float], float], q: QParam) -> Callable[[float], float]:
    """``"Br"``: ``R = B|x|``; ``"rlogr"``: ``R = |x| log |x|``; or a callable of ``|x|``."""
    if callable(rule):
        return rule
    if rule == "Br":
        B = q.B
        return lambda r: B * r
    if rule == "rlogr":
        return lambda r: r * math.log(r)
    raise InvalidInput(f"unknown radius rule {rule!r}")


def lemma_a_grid(
    f: MeroFn,
    r_min: float = 5.0,
    r_max: float = 50.0,
    points: int = LEMMA_A_POINTS,
    angles: Sequence[float] = LEMMA_A_ANGLES,
) -> list[complex]:
    """Rays of radii in ``[r_min, r_max]`` plus probes next to zeros and poles in that range."""
    radii = np.geomspace(r_min, r_max, points)
    xs = [complex(r * np.exp(1j * t)) for t in angles for r in radii]
    for c in sorted({c for c in combined_points(f)}, key=lambda c: (abs(c), c.real, c.imag)):
        if r_min <= abs(c) <= r_max:
            for k in NEAR_PROBE_EXPONENTS:
                xs.append(c + abs(c) * 10.0 ** (-k) * np.exp(1j * ANGLE_OFFSET))
    return xs


def check_lemma_a(
    f: MeroFn,
    q: QParam,
    alpha1: float,
    x_grid: Sequence[complex] | None = None,
    R_rule: str | Callable[[float], float] = "Br",
    C: float | None = None,
) -> Verdict:
    """Fit the smallest constant for the pointwise bound over ``x_grid``.

    Rows are ``(|x|, lhs - constant-free terms, singular sums at C = 1)``, so
    the bound reads ``row.lhs <= C * row.rhs``.  With ``C`` given, that value
    is tested instead of fitted.
    """
    _require_nonconstant_dq(f)
    if not 0 < alpha1 < 1:
        raise InvalidInput(f"alpha1 = {alpha1} outside (0, 1)")
    if x_grid is None:
        x_grid = lemma_a_grid(f)
    rule = radius_rule(R_rule, q)
    points = combined_points(f)
    cache: dict[float, tuple[float, float]] = {}
    rows = []
    for x in x_grid:
        x = complex(x)
        R = float(rule(abs(x)))
        if R not in cache:
            if not q.Q2 * abs(x) < R:
                raise PreconditionRadius(
                    f"2(|q^1/2|+|q^-1/2|)|x| = {q.Q2 * abs(x):.6g} is not below R = {R:.6g}"
                )
            cache[R] = _lemma_a_parts(f, R)
        terms = _lemma_a_from_parts(x, R, alpha1, 1.0, q, *cache[R], points)
        lhs = float(log_plus_logdiff(f, x, q))
        rows.append((abs(x), lhs - terms.constant_free, terms.singular))
    meta = dict(
        hypotheses={"alpha1": alpha1, "R_rule": R_rule if isinstance(R_rule, str) else "custom"},
        provenance=_provenance(None, None, q, None),
    )
    name = "lemma_a"
    if C is not None:
        return fixed_verdict(name, rows, C, notes="constant prescribed", **meta)
    finite = all(math.isfinite(a) and math.isfinite(b) for _, a, b in rows)
    ratios = [_ratio(a, b) for _, a, b in rows]
    fitted = max(0.0, max(ratios)) if finite else math.inf
    holds = finite and math.isfinite(fitted)
    onset = min(r for r, _, _ in rows)
    margin = _margin(sorted(rows), fitted, onset) if holds else -math.inf
    return Verdict(name, holds, fitted, onset, margin, rows, notes="minimal constant over the grid", **meta)


# ---------------------------------------------------------------------------
# logarithmic difference in the mean


def _case_hypotheses(phi: PhiFn, s: SFn, case: str) -> dict:
    if case == "a":
        flags = {
            "s_over_r_unbounded": s.s_over_r_unbounded,
            "s_convex": s.convex,
            "s_differentiable": s.differentiable,
        }
    elif case == "b":
        flags = {"s_over_r_bounded": not s.s_over_r_unbounded, "phi_subadditive": phi.subadditive}
    else:
        raise InvalidInput(f"case must be 'a' or 'b', got {case!r}")
    failed = [k for k, v in flags.items() if not v]
    if failed:
        raise HypothesisViolation(f"case ({case}) needs {', '.join(failed)}")
    return flags


def logdiff_rhs(r, phi: PhiFn, s: SFn, rho: float, eps: float, case: str):
    """Bound shape: ``phi(s(r))^{rho+eps/2} / log(s(r)/r) + 1`` or ``phi(r)^{rho+eps}``."""
    r = np.asarray(r, dtype=float)
    if case == "a":
        sr = s(r)
        return phi.value_unchecked(sr) ** (rho + eps / 2) / np.log(sr / r) + 1
    return phi.value_unchecked(r) ** (rho + eps)


def _grid_for(f: MeroFn, phi: PhiFn, grid, r_max: float | None) -> list[float]:
    if grid is not None:
        return sorted(float(r) for r in grid)
    r_max = default_r_max(f) if r_max is None else r_max
    return [float(r) for r in geometric_grid(phi.R0, r_max)]


def check_logdiff_m(
    f: MeroFn,
    q: QParam,
    phi: PhiFn,
    s: SFn,
    eps: float = EPSILON_DEFAULT,
    case: str = "a",
    grid: Sequence[float] | None = None,
    r_max: float | None = None,
) -> Verdict:
    """``m(r, D_q f / f)`` against the case-(a) or case-(b) bound shape."""
    flags = _case_hypotheses(phi, s, case)
    _require_nonconstant_dq(f)
    rho = order_for_bounds(f, phi)
    quotient = LogDiffFn(f, q)
    radii = _grid_for(f, phi, grid, r_max)
    rows = []
    for r in radii:
        lhs = prox_m(quotient, r, None)
        rhs = float(logdiff_rhs(r, phi, s, rho.value, eps, case))
        rows.append((r, lhs, rhs))
    return o_verdict(
        f"logdiff_m[{case}]",
        rows,
        hypotheses={**flags, "case": case, "rho": rho.value, "rho_source": rho.source},
        provenance=_provenance(phi, s, q, eps),
        diagnostics={"quotient_route": quotient.route},
    )


# ---------------------------------------------------------------------------
# exceptional sets


@dataclass(frozen=True)
class ExceptionalSet:
    """Union of intervals ``[|d| - w|d|, |d| + w|d|]``, ``w = phi(|d|+3)^{-(rho+eps)/alpha}``."""

    intervals: tuple[tuple[float, float], ...]
    d_moduli: tuple[float, ...]
    phi: PhiFn
    rho: float
    eps: float
    alpha: float

    @property
    def exponent(self) -> float:
        return (self.rho + self.eps) / self.alpha

    def merged(self) -> list[tuple[float, float]]:
        out: list[list[float]] = []
        for lo, hi in sorted(self.intervals):
            if out and lo <= out[-1][1]:
                out[-1][1] = max(out[-1][1], hi)
            else:
                out.append([lo, hi])
        return [(lo, hi) for lo, hi in out]

    def contains(self, r: float) -> bool:
        return any(lo <= r <= hi for lo, hi in self.intervals)


def exceptional_set_from_moduli(
    d_moduli: Sequence[float], phi: PhiFn, rho: float, eps: float, alpha: float
) -> ExceptionalSet:
    if not alpha > 0:
        raise HypothesisViolation("the exceptional set needs alpha > 0")
    mods = tuple(sorted(float(d) for d in d_moduli))
    e = (rho + eps) / alpha
    intervals = []
    for d in mods:
        w = d / phi.value_unchecked(d + 3.0) ** e
        intervals.append((d - w, d + w))
    return ExceptionalSet(tuple(intervals), mods, phi, rho, eps, alpha)


def shifted_points(f: MeroFn, q: QParam) -> list[complex]:
    """``{c_n} U {q^{1/2} c_n} U {q^{-1/2} c_n}`` with multiplicity."""
    try:
        cs = combined_points(f)
    except NotImplementedError as exc:
        raise Unsupported(f"{type(f).__name__} has no root enumeration") from exc
    return [c * k for k in (1.0, q.q_half, q.q_minus_half) for c in cs]


def build_exceptional_set(
    f: MeroFn, q: QParam, phi: PhiFn, rho: float, eps: float, alpha: float
) -> ExceptionalSet:
    return exceptional_set_from_moduli(
        [abs(d) for d in shifted_points(f, q)], phi, rho, eps, alpha
    )


def log_measure(E: ExceptionalSet, cutoff: float) -> float:
    """Logarithmic measure of ``E`` intersected with ``[1, cutoff]``."""
    if cutoff < 1:
        raise InvalidInput("cutoff must be >= 1")
    total = 0.0
    for lo, hi in E.merged():
        lo, hi = max(lo, 1.0), min(hi, cutoff)
        if hi > lo:
            total += math.log(hi / lo)
    return total


@dataclass(frozen=True)
class TailBound:
    value: float
    d_N: float
    index: int
    c_delta: float
    tail_sum: float


def tail_bound(E: ExceptionalSet, lam: float | None = None, delta: float = DELTA_DEFAULT) -> TailBound:
    """``log h_N + C_delta * sum_{n>=N} phi(|d_n|)^{-(lam + eps/alpha)}``.

    ``N`` is the first index with ``|d_N| >= R0`` and
    ``phi(|d_N|)^{-(rho+eps)/alpha} < delta``; ``lam`` defaults to
    ``rho/alpha``, the available upper bound for the exponent of convergence.
    ``h_N`` is the larger of ``|d_N|`` and the right end of the intervals
    with ``n < N``, so ``log h_N`` bounds their part of the log-measure.
    Without such an ``N`` the set is finite and the bound is ``log h``.
    """
    if not 0 < delta < 1:
        raise InvalidInput("delta must lie in (0, 1)")
    lam = E.rho / E.alpha if lam is None else lam
    mods = E.d_moduli
    ends = [hi for _, hi in E.intervals]
    c_delta = 2 / (1 - delta)
    for N, d in enumerate(mods):
        if d >= E.phi.R0 and E.phi.value_unchecked(d) ** (-E.exponent) < delta:
            break
    else:
        head = max(ends, default=1.0)
        return TailBound(math.log(max(head, 1.0)), math.nan, len(mods), c_delta, 0.0)
    tail = float(
        np.sum(np.asarray(E.phi.value_unchecked(np.array(mods[N:]))) ** (-(lam + E.eps / E.alpha)))
    )
    d_N = mods[N]
    head = max([d_N] + ends[:N])
    return TailBound(math.log(head) + c_delta * tail, d_N, N, c_delta, tail)


# ---------------------------------------------------------------------------
# pointwise logarithmic difference outside the exceptional set


def separation_bound(r, phi: PhiFn, exponent: float):
    """``|x| / (2 phi(|x|+3)^exponent)``."""
    r = np.asarray(r, dtype=float)
    return r / (2 * phi.value_unchecked(r + 3.0) ** exponent)


def pointwise_logdiff_verdicts(
    f: MeroFn,
    q: QParam,
    phi: PhiFn,
    s: SFn,
    eps: float = EPSILON_DEFAULT,
    case: str = "a",
    grid: Sequence[float] | None = None,
    r_max: float | None = None,
    angles: int = POINTWISE_ANGLES,
) -> tuple[Verdict, Verdict]:
    """The pointwise bound and the separation estimate on non-excluded radii."""
    if not phi.vanishing_log_ratio:
        raise HypothesisViolation(
            f"phi = {phi.name} violates limsup log phi(r) / log r = 0"
        )
    flags = _case_hypotheses(phi, s, case)
    params = alpha_gamma(phi, s)
    if not params.alpha > 0:
        raise HypothesisViolation("the pointwise bound needs alpha > 0")
    _require_nonconstant_dq(f)
    rho = order_for_bounds(f, phi)
    E = build_exceptional_set(f, q, phi, rho.value, eps, params.alpha)
    radii = [r for r in _grid_for(f, phi, grid, r_max) if not E.contains(r)]
    if not radii:
        raise InsufficientData("every grid radius lies in the exceptional set")
    quotient = LogDiffFn(f, q)
    d_pts = np.array(shifted_points(f, q), dtype=complex)
    theta = ANGLE_OFFSET + 2 * math.pi * np.arange(angles) / angles
    rows, sep_rows = [], []
    for r in radii:
        x = r * np.exp(1j * theta)
        with np.errstate(all="ignore"):
            lhs = float(np.max(np.maximum(0.0, np.asarray(quotient.log_abs(x)))))
        rows.append((r, lhs, float(logdiff_rhs(r, phi, s, rho.value, eps, case))))
        if d_pts.size:
            dist = float(np.min(np.abs(x[:, None] - d_pts[None, :])))
            sep_rows.append((r, float(separation_bound(r, phi, E.exponent)), dist))
    meta = dict(
        hypotheses={
            **flags,
            "case": case,
            "vanishing_log_ratio": True,
            "alpha": params.alpha,
            "gamma": params.gamma,
            "rho": rho.value,
            "rho_source": rho.source,
        },
        provenance=_provenance(phi, s, q, eps),
    )
    excluded = len(_grid_for(f, phi, grid, r_max)) - len(radii)
    main = o_verdict(
        f"pointwise_logdiff[{case}]",
        rows,
        diagnostics={"excluded_radii": excluded, "quotient_route": quotient.route},
        **meta,
    )
    if not sep_rows:
        sep_rows = [(r, 0.0, math.inf) for r in radii]
    sep = fixed_verdict("separation", [(r, a, b if math.isfinite(b) else 1e300) for r, a, b in sep_rows], 1.0, **meta)
    main.diagnostics["separation_holds"] = sep.holds
    return main, sep


def check_pointwise_logdiff(
    f: MeroFn,
    q: QParam,
    phi: PhiFn,
    s: SFn,
    eps: float = EPSILON_DEFAULT,
    case: str = "a",
    grid: Sequence[float] | None = None,
    r_max: float | None = None,
) -> Verdict:
    return pointwise_logdiff_verdicts(f, q, phi, s, eps, case, grid, r_max)[0]


# ---------------------------------------------------------------------------
# counting functions


def pullback_points(c: complex, q: QParam, direction: str = "hat") -> list[complex]:
    """Points ``x`` whose shifted image (``x_hat`` or ``x_check``) equals ``c``.

    Solves ``q^{+-1/2} z + q^{-+1/2} z^{-1} = 2c`` and keeps the roots that
    the principal branch of :func:`awcore.z_of_x` reproduces, so
    ``hat_check(x).x_hat == c`` (resp. ``x_check``) for every returned point.
    """
    c = complex(c)
    if direction == "hat":
        a, b = q.q_half, q.q_minus_half
    elif direction == "check":
        a, b = q.q_minus_half, q.q_half
    else:
        raise InvalidInput(f"direction must be 'hat' or 'check', got {direction!r}")
    if _pullback_multiplicity(c, q, direction) == 2:
        zs = [c / a]
    else:
        zs = np.roots([a, -2 * c, b])
    out: list[complex] = []
    for z in zs:
        x = complex((z + 1 / z) / 2)
        xh, xc, _ = hat_check_arrays(x, q)
        img = complex((xh if direction == "hat" else xc)[0])
        if abs(img - c) <= 1e-10 * max(1.0, abs(c)):
            if not any(abs(x - y) <= 1e-12 * max(1.0, abs(x)) for y in out):
                out.append(x)
    return out


def _pullback_multiplicity(c: complex, q: QParam, direction: str) -> int:
    a, b = (q.q_half, q.q_minus_half) if direction == "hat" else (q.q_minus_half, q.q_half)
    disc = 4 * complex(c) ** 2 - 4 * a * b
    return 2 if abs(disc) <= 1e-12 * max(1.0, abs(c) ** 2) else 1


def shifted_counting_N(f: MeroFn, r: float, q: QParam, a=None, direction: str = "hat") -> float:
    """``N(r, a, f(x_hat))`` (or ``f(x_check)``) from the pulled-back a-points."""
    total = 0.0
    bound = r * (1 + 1e-12)
    pts = f.pole_points() if a is None else f.a_points(a)
    for c, m in pts:
        mult = m * _pullback_multiplicity(c, q, direction)
        for x in pullback_points(c, q, direction):
            mod = abs(x)
            if mod == 0:
                total += mult * math.log(r)
            elif mod <= bound:
                total += mult * math.log(r / mod)
    return total


def counting_error_shape(r, phi: PhiFn, rho: float, params: GrowthParams, eps: float, case: str):
    """``phi(r)^{rho/alpha - gamma + eps} + log r`` (case a) or ``phi(r)^{rho+eps} + log r``."""
    r = np.asarray(r, dtype=float)
    if case == "a":
        expo = rho / params.alpha - params.gamma + eps
    else:
        expo = rho + eps
    return phi.value_unchecked(r) ** expo + np.log(r)


def _counting_case(phi: PhiFn, s: SFn) -> tuple[str, GrowthParams, dict]:
    params = alpha_gamma(phi, s)
    if not params.alpha > 0:
        raise HypothesisViolation("counting estimates need alpha > 0")
    if not phi.subadditive:
        raise HypothesisViolation(f"phi = {phi.name} is not subadditive")
    if s.s_over_r_unbounded:
        case = "a"
        if not (s.convex and s.differentiable):
            raise HypothesisViolation("case (a) needs convex differentiable s")
    else:
        case = "b"
    return case, params, {"case": case, "alpha": params.alpha, "gamma": params.gamma, "phi_subadditive": True}


def check_counting_bounds(
    f: MeroFn,
    q: QParam,
    phi: PhiFn,
    s: SFn,
    eps: float = EPSILON_DEFAULT,
    grid: Sequence[float] | None = None,
    r_max: float | None = None,
) -> list[Verdict]:
    """Shifted counting functions, ``N(r, D_q f)`` and ``T(r, D_q f)``."""
    case, params, hyp = _counting_case(phi, s)
    if getattr(f, "is_constant", False):
        raise InvalidInput("counting estimates need a non-constant f")
    rho = order_for_bounds(f, phi)
    g = dq_closure(f, q)
    radii = _grid_for(f, phi, grid, r_max)
    shift_rows, n_rows, t_rows = [], [], []
    for r in radii:
        shape = float(counting_error_shape(r, phi, rho.value, params, eps, case))
        diffs = []
        for a in (None, 0):
            base = integrated_N(f, r, a)
            for direction in ("hat", "check"):
                diffs.append(abs(shifted_counting_N(f, r, q, a, direction) - base))
        shift_rows.append((r, max(diffs), shape))
        n_rows.append((r, integrated_N(g, r, None) - 2 * integrated_N(f, r, None), shape))
        t_rows.append((r, characteristic_T(g, r) - 2 * characteristic_T(f, r), shape))
    meta = lambda: dict(  # noqa: E731
        hypotheses={**hyp, "rho": rho.value, "rho_source": rho.source},
        provenance=_provenance(phi, s, q, eps),
    )
    return [
        o_verdict(f"shifted_counting[{case}]", shift_rows, **meta()),
        o_verdict(f"counting_N[{case}]", n_rows, **meta()),
        o_verdict(f"characteristic_T[{case}]", t_rows, **meta()),
    ]


def check_dq_order(
    f: MeroFn,
    q: QParam,
    phi: PhiFn,
    s: SFn,
    tol: float = DQ_ORDER_TOL,
    grid: Sequence[float] | None = None,
) -> Verdict:
    """``rho(D_q f) <= max{rho(f), rho(f)/alpha - gamma} + tol`` with estimated orders."""
    params = alpha_gamma(phi, s)
    if not params.alpha > 0:
        raise HypothesisViolation("the order bound needs alpha > 0")
    if grid is None:
        grid = geometric_grid(1.0, default_r_max(f))
    rho_f = order_estimate(f, phi, grid)
    g = dq_closure(f, q)
    rho_g = order_estimate(g, phi, grid)
    bound = rho_phi_k(rho_f.value, params, 1)
    return fixed_verdict(
        "dq_order",
        [(float(max(grid)), rho_g.value, bound + tol)],
        1.0,
        hypotheses={"alpha": params.alpha, "gamma": params.gamma},
        provenance=_provenance(phi, s, q, None),
        diagnostics={
            "rho_f": rho_f.value,
            "rho_dqf": rho_g.value,
            "bound": bound,
            "tolerance": tol,
        },
    )


# ---------------------------------------------------------------------------
# manufactured equations


def _renorm(m: np.ndarray, e: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mod = np.abs(m)
    ok = mod > 0
    e = np.where(ok, e + np.log(np.where(ok, mod, 1.0)), -np.inf)
    m = np.where(ok, m / np.where(ok, mod, 1.0), 0.0)
    return m, e


def exp_dq_ratio(P: Polynomial, q: QParam, k: int, x) -> tuple[np.ndarray, np.ndarray]:
    """``D_q^k exp(P)(x) / exp(P(x))`` as ``(unit mantissa, log modulus)``.

    Values are carried as ``m * e^e`` through the divided-difference tree so
    that large exponents never overflow.
    """
    xs = np.atleast_1d(np.asarray(x, dtype=complex))
    ref = P.eval(xs)

    def level(j: int, y: np.ndarray, ref_y: np.ndarray):
        if j == 0:
            E = P.eval(y) - ref_y
            return np.exp(1j * E.imag), E.real
        yh, yc, z = hat_check_arrays(y, q)
        den = (q.q_half - q.q_minus_half) * (z - 1 / z) / 2
        m1, e1 = level(j - 1, yh, ref_y)
        m2, e2 = level(j - 1, yc, ref_y)
        e = np.maximum(e1, e2)
        with np.errstate(all="ignore"):
            m = (m1 * np.exp(e1 - e) - m2 * np.exp(e2 - e)) / den
        if j == 1:
            for sign in (1, -1):
                near = np.abs(y - sign) < TAU_EXC
                if near.any():
                    pt = sign * q.sigma
                    E = P.eval(np.full(int(near.sum()), pt)) - ref_y[near]
                    m[near] = P.derivative().eval(np.full(int(near.sum()), pt)) * np.exp(1j * E.imag)
                    e = e.copy()
                    e[near] = E.real
        return _renorm(m, e)

    return level(k, xs, ref)


class ExpCoefficient(MeroFn):
    """``-sum_{j>=1} w_j(x) D_q^j f(x) / f(x)`` for ``f = exp(P)``; entire."""

    def __init__(self, f: ExpPoly, q: QParam, weights: Sequence[Polynomial]):
        self.base = f
        self.q = q
        self.weights = tuple(weights)

    @property
    def is_entire(self) -> bool:
        return True

    def _mantissa(self, xs: np.ndarray):
        parts = []
        for j, w in enumerate(self.weights, start=1):
            if w.degree() < 0:
                continue
            m, e = exp_dq_ratio(self.base.poly, self.q, j, xs)
            parts.append((np.asarray(w.eval(xs), dtype=complex) * m, e))
        e = np.max(np.stack([p[1] for p in parts]), axis=0)
        with np.errstate(all="ignore"):
            m = -sum(mm * np.exp(ee - e) for mm, ee in parts)
        return _renorm(m, e)

    def eval(self, x):
        xs, scalar = _as_array(x)
        m, e = self._mantissa(xs)
        with np.errstate(over="ignore"):
            return _ret(m * np.exp(e), scalar)

    def log_abs(self, x):
        xs, scalar = _as_array(x)
        return _ret_real(self._mantissa(xs)[1], scalar)

    def zero_points(self) -> Points:
        raise Unsupported("zeros of a manufactured transcendental coefficient are not enumerated")

    def pole_points(self) -> Points:
        return []

    def __repr__(self) -> str:
        return f"ExpCoefficient({self.base!r}, n={len(self.weights)})"


@dataclass
class EquationSpec:
    """``sum_j a_j D_q^j f = rhs`` with an attached solution."""

    n: int
    coefficients: tuple
    q: QParam
    solution: MeroFn
    rhs: MeroFn | None = None
    residual: float = math.nan

    def __post_init__(self):
        if self.n < 1 or len(self.coefficients) != self.n + 1:
            raise InvalidInput("need n >= 1 and coefficients a_0..a_n")
        for j in (0, self.n):
            a = self.coefficients[j]
            if isinstance(a, Polynomial) and a.degree() < 0:
                raise InvalidInput("a_0 a_n must not vanish identically")

    @property
    def homogeneous(self) -> bool:
        return self.rhs is None


def residual_probes(count: int = RESID_PROBES, radius: float = 2.7) -> np.ndarray:
    return radius * np.exp(1j * (ANGLE_OFFSET + 2 * math.pi * np.arange(count) / count))


def equation_residual(eq: EquationSpec, f: MeroFn, probes: np.ndarray | None = None) -> float:
    """Max relative residual of the equation at the probes, using nested pointwise D_q."""
    xs = residual_probes() if probes is None else np.asarray(probes, dtype=complex)
    total = np.zeros(xs.shape, dtype=complex)
    scale = np.zeros(xs.shape)
    for j, a in enumerate(eq.coefficients):
        dj = np.asarray(dq_numeric(f, j, eq.q).eval(xs), dtype=complex) if j else np.asarray(f.eval(xs))
        term = np.asarray(a.eval(xs), dtype=complex) * dj
        total += term
        scale = np.maximum(scale, np.abs(term))
    if eq.rhs is not None:
        r = np.asarray(eq.rhs.eval(xs), dtype=complex)
        total -= r
        scale = np.maximum(scale, np.abs(r))
    return float(np.max(np.abs(total) / np.maximum(1.0, scale)))


def _default_weights(n: int) -> list[Polynomial]:
    # a_1..a_{n-1} = 1 + j/2 and a_n = 1
    return [Polynomial((1.0 + j / 2,)) for j in range(1, n)] + [Polynomial((1.0,))]


def manufacture_equation(
    f: MeroFn,
    n: int,
    q: QParam,
    coefficients: Sequence[MeroFn] | None = None,
    homogeneous: bool = True,
) -> EquationSpec:
    """Build an equation solved by ``f``.

    Homogeneous: ``a_n = 1``, ``a_1..a_{n-1}`` given (default constants) and
    ``a_0 = -(sum_{j>=1} a_j D_q^j f) / f``.  Non-homogeneous: all ``a_j``
    given and the right-hand side is ``sum_j a_j D_q^j f``.
    """
    if n < 1:
        raise InvalidInput("n must be >= 1")
    if getattr(f, "is_constant", False):
        raise SolutionDegenerate("D_q f vanishes identically for constant f")
    rational = isinstance(f, (Polynomial, ZeroPoleFn, PartialFractionFn, TruncatedQProduct))
    if not rational and not isinstance(f, ExpPoly):
        raise Unsupported(f"cannot manufacture equations for {type(f).__name__}")
    if rational:
        for j in range(1, n):
            g = dq_iter(f, j, q)
            if isinstance(g, Polynomial) and g.degree() < 0:
                raise SolutionDegenerate(f"D_q^{j} f vanishes identically")
    if not homogeneous:
        if coefficients is None or len(coefficients) != n + 1:
            raise InvalidInput("non-homogeneous equations need a_0..a_n")
        coeffs = tuple(coefficients)
        if rational:
            rhs = _RationalCombination(coeffs, [dq_iter(f, j, q) for j in range(n + 1)])
        else:
            rhs = _PointwiseSum(coeffs, f, q)
        eq = EquationSpec(n, coeffs, q, f, rhs)
        eq.residual = equation_residual(eq, f)
        return eq
    if coefficients is None:
        weights = _default_weights(n)
    else:
        if len(coefficients) != n - 1:
            raise InvalidInput("homogeneous equations take a_1..a_{n-1}")
        weights = [_as_poly(a) for a in coefficients] + [Polynomial((1.0,))]
    if rational:
        num_f, den_f = as_rational(f)
        acc_num, acc_den = Polynomial.zero(), Polynomial((1.0,))
        for j, w in enumerate(weights, start=1):
            gn, gd = as_rational(dq_iter(f, j, q))
            acc_num = acc_num * gd + w * gn * acc_den
            acc_den = acc_den * gd
        a0 = from_rational(-(acc_num * den_f), acc_den * num_f)
        if getattr(a0, "is_constant", False) or (isinstance(a0, Polynomial) and a0.degree() <= 0):
            raise SolutionDegenerate("a_0 reduces to a constant")
    else:
        a0 = ExpCoefficient(f, q, weights)
    eq = EquationSpec(n, (a0, *weights), q, f)
    eq.residual = equation_residual(eq, f)
    return eq


def _as_poly(a) -> Polynomial:
    if isinstance(a, Polynomial):
        return a
    if isinstance(a, (int, float, complex)):
        return Polynomial((complex(a),))
    raise InvalidInput("prescribed coefficients must be polynomials")


def _rational_product(a: MeroFn, g: MeroFn) -> tuple[Polynomial, Polynomial]:
    an, ad = as_rational(a)
    gn, gd = as_rational(g)
    return an * gn, ad * gd


def _rational_sum(terms) -> MeroFn:
    num, den = Polynomial.zero(), Polynomial((1.0,))
    for tn, td in terms:
        num = num * td + tn * den
        den = den * td
    return from_rational(num, den)


class _RationalCombination(MeroFn):
    """``sum_j a_j g_j`` evaluated term by term; zeros and poles from the reduced form."""

    def __init__(self, coeffs, terms):
        self.coeffs = tuple(coeffs)
        self.terms = tuple(terms)
        self.reduced = _rational_sum([_rational_product(a, g) for a, g in zip(self.coeffs, self.terms)])

    @property
    def is_constant(self) -> bool:
        return getattr(self.reduced, "is_constant", False)

    def eval(self, x):
        xs, scalar = _as_array(x)
        out = np.zeros(xs.shape, dtype=complex)
        with np.errstate(all="ignore"):
            for a, g in zip(self.coeffs, self.terms):
                out += np.asarray(a.eval(xs), dtype=complex) * np.asarray(g.eval(xs), dtype=complex)
        return _ret(out, scalar)

    def zero_points(self) -> Points:
        return self.reduced.zero_points()

    def pole_points(self) -> Points:
        return self.reduced.pole_points()

    def __repr__(self) -> str:
        return f"RationalCombination({len(self.terms)} terms)"


class _PointwiseSum(MeroFn):
    """``sum_j a_j D_q^j f`` by nested pointwise evaluation."""

    def __init__(self, coeffs, f: MeroFn, q: QParam):
        self.coeffs = tuple(coeffs)
        self.f = f
        self.q = q

    def eval(self, x):
        xs, scalar = _as_array(x)
        out = np.zeros(xs.shape, dtype=complex)
        for j, a in enumerate(self.coeffs):
            dj = dq_numeric(self.f, j, self.q).eval(xs) if j else self.f.eval(xs)
            out += np.asarray(a.eval(xs), dtype=complex) * np.asarray(dj, dtype=complex)
        return _ret(out, scalar)

    def zero_points(self) -> Points:
        raise Unsupported("zeros not enumerated")

    def pole_points(self) -> Points:
        if all(a.is_entire for a in self.coeffs) and self.f.is_entire:
            return []
        raise Unsupported("poles not enumerated")


def _finite_order(g: MeroFn, phi: PhiFn) -> None:
    closed = closed_form_order(g, phi)
    if closed is not None and not math.isfinite(closed):
        raise HypothesisViolation(f"{g!r} has infinite {phi.name}-order")


def check_theorem_order(
    eq: EquationSpec,
    f: MeroFn,
    phi: PhiFn,
    s: SFn,
    tol: float = ORDER_BOUND_TOL,
    grid: Sequence[float] | None = None,
) -> Verdict:
    """Compare the estimated order of the solution with the predicted lower bound."""
    if getattr(f, "is_constant", False):
        raise InvalidInput("the growth bound concerns non-constant solutions")
    if not phi.subadditive:
        raise HypothesisViolation(f"phi = {phi.name} is not subadditive")
    resid = equation_residual(eq, f)
    if not resid <= TAU_RESID:
        raise HypothesisViolation(f"f does not solve the equation (residual {resid:.3g})")
    coeffs = list(eq.coefficients) + ([eq.rhs] if eq.rhs is not None else [])
    for a in coeffs:
        _finite_order(a, phi)
    params = alpha_gamma(phi, s)
    # dominance is a hypothesis on true orders: exact values where known
    orders = []
    for a in coeffs:
        closed = closed_form_order(a, phi)
        orders.append(
            OrderValue(closed, 0.0, "closed-form") if closed is not None else order_estimate(a, phi, grid)
        )
    rho0 = order_estimate(coeffs[0], phi, grid)
    dom0 = orders[0]
    others = orders[1:]
    top = max(others, key=lambda o: o.value)
    margin = dom0.dispersion + top.dispersion
    if not dom0.value > top.value + margin:
        raise HypothesisViolation(
            f"dominance fails: rho(a_0) = {dom0.value:.4g} vs max rho(a_j) = {top.value:.4g} + {margin:.3g}"
        )
    rho_f = order_estimate(f, phi, grid)
    a, g, n = params.alpha, params.gamma, eq.n
    entire = all(c.is_entire for c in eq.coefficients)
    if eq.rhs is not None:
        variant = "non-homogeneous"
        bound = a ** (n - 1) * rho0.value
    elif s.s_over_r_unbounded:
        if entire:
            variant = "a-entire"
            bound = a**n * rho0.value + a**n * g
        else:
            variant = "a"
            bound = a**n * rho0.value
    else:
        variant = "b"
        bound = a ** (n - 1) * rho0.value
    r_top = float(max(grid)) if grid is not None else float(default_r_max(f))
    return fixed_verdict(
        f"theorem_order[{variant}]",
        [(r_top, bound, rho_f.value + tol)],
        1.0,
        hypotheses={
            "variant": variant,
            "alpha": a,
            "gamma": g,
            "n": n,
            "dominance_margin": margin,
            "coefficients_entire": entire,
        },
        provenance=_provenance(phi, s, eq.q, None),
        diagnostics={
            "rho_f": rho_f.value,
            "rho_f_dispersion": rho_f.dispersion,
            "rho_a0": rho0.value,
            "rho_a_max_other": top.value,
            "bound": bound,
            "tolerance": tol,
            "residual": resid,
        },
    )
