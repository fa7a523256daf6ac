from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from awlab import verify as V
from awlab.awcore import QParam, dq_eval, hat_check
from awlab.errors import (
    HypothesisViolation,
    InsufficientData,
    InvalidInput,
    PreconditionRadius,
    SolutionDegenerate,
)
from awlab.funcmodel import ExpPoly, Polynomial
from awlab.growth import PhiFn, SFn
from awlab.nevanlinna import count_n, geometric_grid, integrated_N, prox_m

from oracles import lemma_a_rhs_terms
from witnesses import EXP1, QPROD, U1, U4, zp

LOG = PhiFn("log")
R2 = SFn("rpow", 2.0)
POW_HALF = PhiFn("pow", 0.5)
LIN2 = SFn("linear", 2.0)


# --- verdict semantics -------------------------------------------------------


def test_verdict_empty_grid_rejected():
    with pytest.raises(InsufficientData):
        V.fixed_verdict("x", [])


def test_fixed_verdict():
    rows = [(1.0, 1.0, 2.0), (2.0, 3.0, 2.0)]
    assert not V.fixed_verdict("x", rows, 1.0).holds
    assert V.fixed_verdict("x", rows, 1.5).holds


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 100.0))
def test_o_verdict_fits_proportional_rows(c):
    rows = [(r, c * math.log(r), math.log(r)) for r in geometric_grid(2, 1e4)]
    v = V.o_verdict("x", rows)
    assert v.holds and v.fitted_constant == pytest.approx(c, rel=1e-9)


def test_o_verdict_detects_faster_growth():
    rows = [(r, r, math.log(r)) for r in geometric_grid(2, 1e4)]
    v = V.o_verdict("x", rows)
    assert not v.holds


def test_o_verdict_onset_skips_undefined_head():
    rows = [(1.0, 1.0, 0.0)] + [(r, 1.0, 1.0) for r in geometric_grid(2, 1e4)]
    v = V.o_verdict("x", rows)
    assert v.holds and v.onset_radius == 2.0


def test_verdict_dict_round_trip():
    v = V.fixed_verdict("x", [(2.0, 1.0, 1.0), (1.0, 0.5, 1.0)], hypotheses={"case": "a"})
    d = v.to_dict()
    assert d["grid"][0][0] == 1.0 and d["hypotheses"] == {"case": "a"}


# --- pointwise bound ---------------------------------------------------------


def test_lemma_a_rhs_without_singularities():
    q = QParam(0.5)
    t = V.lemma_a_terms(EXP1, 2.0 + 1j, 30.0, 0.5, 1.0, q)
    assert t.s_plain == t.s_minus == t.s_plus == 0.0
    assert t.n_term == 0.0
    assert t.total == pytest.approx(t.m_term + math.log(2))


def test_lemma_a_rhs_against_oracle():
    f = Polynomial((-5, 1))
    q = QParam(0.25)
    x, R, a1, C = 1.0, 20.0, 0.5, 1.0
    t = V.lemma_a_terms(f, x, R, a1, C, q)
    m_sum = prox_m(f, R, None) + prox_m(f, R, 0)
    n_sum = count_n(f, R, None) + count_n(f, R, 0)
    ref = lemma_a_rhs_terms(x, R, a1, C, 0.25, m_sum, n_sum, [5.0])
    got = (t.m_term, t.n_term, t.s_plain, t.s_minus, t.s_plus, t.log2)
    assert got == pytest.approx(ref, rel=1e-12)
    assert all(math.isfinite(v) and v > 0 for v in got)


@settings(max_examples=30, deadline=None)
@given(
    st.floats(2.0, 6.0),
    st.floats(0.2, math.pi - 0.2),
    st.sampled_from([0.25, 0.5, 0.3 + 0.2j]),
    st.floats(0.1, 0.9),
)
def test_lemma_a_terms_match_oracle_on_rational(r, t, q, a1):
    f = U1
    # upper half plane, away from the real zeros and pole
    x = r * complex(math.cos(t), math.sin(t))
    qp = QParam(q)
    R = qp.B * r
    terms = V.lemma_a_terms(f, x, R, a1, 1.3, qp)
    m_sum = prox_m(f, R, None) + prox_m(f, R, 0)
    n_sum = count_n(f, R, None) + count_n(f, R, 0)
    ref = lemma_a_rhs_terms(x, R, a1, 1.3, q, m_sum, n_sum, [1, -2, 3])
    got = (terms.m_term, terms.n_term, terms.s_plain, terms.s_minus, terms.s_plus, terms.log2)
    assert got == pytest.approx(ref, rel=1e-10)


def test_lemma_a_linear_in_C():
    f = U1
    q = QParam(0.5)
    a = V.lemma_a_terms(f, 4.0 + 1j, 60.0, 0.5, 1.0, q)
    b = V.lemma_a_terms(f, 4.0 + 1j, 60.0, 0.5, 2.0, q)
    assert (b.m_term, b.n_term, b.log2) == (a.m_term, a.n_term, a.log2)
    assert b.singular == pytest.approx(2 * a.singular, rel=1e-14)


def test_lemma_a_precondition():
    with pytest.raises(PreconditionRadius):
        V.lemma_a_terms(U1, 10.0, 20.0, 0.5, 1.0, QParam(0.5))


def test_check_lemma_a_example():
    v = V.check_lemma_a(Polynomial((-2, 1, 1)), QParam(0.3), 0.5)
    assert v.holds and math.isfinite(v.fitted_constant)


def test_check_lemma_a_constant_rejected():
    with pytest.raises(InvalidInput):
        V.check_lemma_a(Polynomial((3,)), QParam(0.3), 0.5)


def test_check_lemma_a_grid_monotone():
    f = zp(1.0, [7, -12 + 5j], [20j])
    q = QParam(0.9)
    small = V.lemma_a_grid(f, 5, 50)
    big = small + V.lemma_a_grid(f, 50, 200)
    c1 = V.check_lemma_a(f, q, 0.5, small).fitted_constant
    c2 = V.check_lemma_a(f, q, 0.5, big).fitted_constant
    assert c2 >= c1 > 0


def test_lemma_a_lhs_is_log_plus_of_quotient():
    q = QParam(0.5)
    x = 3.0 + 2j
    ratio = dq_eval(U1, x, q) / U1.eval(x)
    assert V.log_plus_logdiff(U1, x, q) == pytest.approx(max(0.0, math.log(abs(ratio))), abs=1e-12)


# --- logarithmic difference in the mean ---------------------------------------


def test_logdiff_m_case_a():
    v = V.check_logdiff_m(U1, QParam(0.5), LOG, R2, case="a")
    assert v.holds and math.isfinite(v.fitted_constant)
    r = 100.0
    rhs = V.logdiff_rhs(r, LOG, R2, 1.0, 0.5, "a")
    assert rhs == pytest.approx((2 * math.log(r)) ** 1.25 / math.log(r) + 1)


def test_logdiff_m_case_b():
    v = V.check_logdiff_m(U1, QParam(0.5), POW_HALF, LIN2, case="b")
    assert v.holds
    assert V.logdiff_rhs(100.0, POW_HALF, LIN2, 0.0, 0.5, "b") == pytest.approx(100.0**0.25)


def test_logdiff_case_mismatch():
    with pytest.raises(HypothesisViolation):
        V.check_logdiff_m(U1, QParam(0.5), LOG, R2, case="b")


# --- exceptional set ---------------------------------------------------------


def test_exceptional_set_single_zero():
    f = Polynomial((-100, 1))
    E = V.build_exceptional_set(f, QParam(0.25), LOG, 1.0, 0.5, 1.0)
    assert sorted(E.d_moduli) == pytest.approx([50.0, 100.0, 200.0])
    for (lo, hi), d in zip(sorted(E.intervals), sorted(E.d_moduli)):
        w = d / math.log(d + 3) ** 1.5
        assert (lo, hi) == pytest.approx((d - w, d + w))
        assert lo < d < hi


def test_exceptional_set_empty_for_entire_nonvanishing():
    E = V.build_exceptional_set(EXP1, QParam(0.5), LOG, 1.0, 0.5, 1.0)
    assert E.intervals == () and V.log_measure(E, 1e6) == 0.0


def test_log_measure_single_interval():
    E = V.ExceptionalSet(((2.0, 4.0),), (3.0,), LOG, 1.0, 0.5, 1.0)
    assert V.log_measure(E, 100.0) == pytest.approx(math.log(2))


def test_geometric_moduli_below_tail_bound():
    E = V.exceptional_set_from_moduli([2.0**n for n in range(1, 40)], LOG, 1.0, 0.5, 1.0)
    tb = V.tail_bound(E)
    partial = [V.log_measure(E, c) for c in geometric_grid(1, 2.0**40, 2.0)]
    assert all(p <= tb.value for p in partial)
    assert np.all(np.diff(partial) >= 0)


# --- pointwise bound outside the exceptional set -------------------------------


def test_pointwise_holds_with_separation():
    main, sep = V.pointwise_logdiff_verdicts(U1, QParam(0.5), LOG, R2)
    assert main.holds and sep.holds


def test_pointwise_rejects_pow():
    with pytest.raises(HypothesisViolation, match="limsup log phi"):
        V.check_pointwise_logdiff(U1, QParam(0.5), POW_HALF, LIN2, case="b")


# --- counting ----------------------------------------------------------------


@settings(max_examples=40, deadline=None)
@given(
    st.builds(complex, st.floats(-20, 20), st.floats(-20, 20)),
    st.sampled_from([0.25, 0.5, 0.3 + 0.2j, 0.9]),
)
def test_pullback_residual(c, q):
    qp = QParam(q)
    for direction in ("hat", "check"):
        for x in V.pullback_points(c, qp, direction):
            pair = hat_check(x, qp)
            img = pair.x_hat if direction == "hat" else pair.x_check
            assert abs(img - c) <= 1e-10 * max(1.0, abs(c))


def test_pullback_fixed_point():
    q = QParam(0.5)
    xs = V.pullback_points(q.sigma, q, "hat")
    assert any(abs(x - 1) < 1e-9 for x in xs)


def test_pullback_double_root_coincides():
    q = QParam(0.5)
    c = math.sqrt((q.q_half * q.q_minus_half).real)
    assert V._pullback_multiplicity(c, q, "hat") == 2
    assert len(V.pullback_points(c, q, "hat")) == 1


def test_shifted_counting_far_zero():
    # a zero at c = 100 pulls back to a single point near q^{-1/2} c
    q = QParam(0.5)
    f = Polynomial((-100, 1))
    pts = V.pullback_points(100.0, q, "hat")
    assert len(pts) == 1 and abs(pts[0]) == pytest.approx(100 * math.sqrt(2), rel=1e-3)
    r = 1000.0
    assert V.shifted_counting_N(f, r, q, 0, "hat") == pytest.approx(math.log(r / abs(pts[0])))


def test_counting_rational():
    vs = V.check_counting_bounds(U1, QParam(0.5), LOG, R2)
    assert [v.holds for v in vs] == [True, True, True]
    assert all(math.isfinite(v.fitted_constant) for v in vs)


def test_counting_polynomial_has_no_pole_count():
    vs = V.check_counting_bounds(U4, QParam(0.5), LOG, R2)
    n_rows = vs[1].grid
    assert all(a == 0.0 for _, a, _ in n_rows)
    assert vs[1].holds


def test_dq_order_unit_witness():
    v = V.check_dq_order(U1, QParam(0.5), LOG, R2)
    assert v.holds


# --- manufactured equations ----------------------------------------------------


def test_manufacture_square():
    eq = V.manufacture_equation(Polynomial((0, 0, 1)), 1, QParam(0.25))
    xs = np.array([1.0 + 2j, -3.0, 0.5j])
    assert np.allclose(eq.coefficients[0].eval(xs), -2.5 / xs)
    assert eq.residual < 1e-12


def test_manufacture_constant_rejected():
    with pytest.raises(SolutionDegenerate):
        V.manufacture_equation(Polynomial((2,)), 1, QParam(0.5))


def test_manufacture_non_homogeneous():
    coeffs = [Polynomial((1, 1)), Polynomial((2,)), Polynomial((0, 1))]
    eq = V.manufacture_equation(U1, 2, QParam(0.5), coeffs, homogeneous=False)
    assert not eq.homogeneous and eq.residual < 1e-12


def test_manufacture_exppoly_residual():
    eq = V.manufacture_equation(EXP1, 2, QParam(0.5))
    assert eq.residual < 1e-9


def test_theorem_rational_case_a():
    eq = V.manufacture_equation(U1, 1, QParam(0.5))
    v = V.check_theorem_order(eq, U1, LOG, R2)
    assert v.holds and v.hypotheses["variant"] == "a"


def test_theorem_exp_case_b():
    eq = V.manufacture_equation(EXP1, 1, QParam(0.5))
    v = V.check_theorem_order(eq, EXP1, PhiFn("pow", 1.0), LIN2, grid=geometric_grid(1, 1e6))
    assert v.holds and v.hypotheses["variant"] == "b"


def test_theorem_dominance_violation():
    eq = V.manufacture_equation(U1, 2, QParam(0.5), [Polynomial((0, 0, 0, 1))])
    with pytest.raises(HypothesisViolation, match="dominance"):
        V.check_theorem_order(eq, U1, LOG, R2)


def test_qproduct_logdiff_and_counting():
    q = QParam(0.5)
    assert V.check_logdiff_m(QPROD, q, LOG, R2, case="a", r_max=1e5).holds
    assert all(v.holds for v in V.check_counting_bounds(QPROD, q, LOG, R2, r_max=1e5))


def test_exppoly_quotient_uses_pointwise_route():
    assert V.LogDiffFn(ExpPoly(Polynomial((0, 1))), QParam(0.5)).route != "closure"
