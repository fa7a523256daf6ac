from __future__ import annotations

import cmath

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from awlab.awcore import (
    QParam,
    dq_closure,
    dq_eval,
    dq_iter,
    dq_numeric,
    hat_check,
    hat_check_arrays,
    z_of_x,
)
from awlab.errors import DepthExceeded, InvalidInput
from awlab.funcmodel import ExpPoly, Polynomial, ZeroPoleFn

from oracles import dq_direct, poly_value, shifts, z_branch, zero_pole_value
from witnesses import Q_VALUES, U1, zp

coord = st.floats(-4, 4, allow_nan=False, allow_infinity=False)
points = st.builds(complex, coord, coord).filter(lambda x: abs(x * x - 1) > 1e-3)
qs = st.sampled_from(Q_VALUES)


def test_qparam_rejects_outside_unit_disc():
    with pytest.raises(InvalidInput, match="0<|q|<1"):
        QParam(1.5)


@pytest.mark.parametrize("q", Q_VALUES)
def test_qparam_invariants(q):
    p = QParam(q, C=7.3)
    assert abs(p.q_half**2 - q) <= 1e-14 * abs(q)
    assert abs(p.q_half * p.q_minus_half - 1) <= 1e-14
    assert p.B > p.Q2 and p.B > 7.3


def test_z_of_x_fixed_points():
    assert z_of_x(1.0) == 1
    assert abs(z_of_x(0.0) - 1j) < 1e-15
    z = z_of_x(2.5)
    assert abs(z - (2.5 + np.sqrt(5.25))) < 1e-12 and abs((z + 1 / z) / 2 - 2.5) < 1e-12


@settings(max_examples=100, deadline=None)
@given(points, qs)
def test_hat_check_against_oracle(x, q):
    pair = hat_check(x, QParam(q))
    xh, xc = shifts(x, q)
    assert abs(pair.x_hat - xh) <= 1e-12 * max(1, abs(xh))
    assert abs(pair.x_check - xc) <= 1e-12 * max(1, abs(xc))
    assert abs(pair.z) >= 1 - 1e-12
    assert abs((pair.z + 1 / pair.z) / 2 - x) <= 1e-12 * max(1, abs(x))
    p = QParam(q)
    assert abs(pair.x_hat + pair.x_check - (p.q_half + p.q_minus_half) * x) <= 1e-12 * max(1, abs(x))


def test_hat_check_q_quarter_at_one():
    pair = hat_check(1.0, QParam(0.25))
    assert pair.x_hat == pytest.approx(1.25) and pair.x_check == pytest.approx(1.25)


@pytest.mark.parametrize("x", [1.5, 3.0, 10.0])
def test_real_q_real_x_gives_real_shifts(x):
    pair = hat_check(x, QParam(0.4))
    assert abs(pair.x_hat.imag) < 1e-14 and abs(pair.x_check.imag) < 1e-14


def test_dq_eval_examples():
    q = QParam(0.25)
    xs = np.array([0.3 + 0.2j, 2.0, -5 + 1j])
    assert np.allclose(dq_eval(Polynomial((5,)), xs, q), 0)
    assert np.allclose(dq_eval(Polynomial((0, 1)), xs, q), 1)
    assert dq_eval(Polynomial((0, 0, 1)), 2.0, q) == pytest.approx(5.0, rel=1e-13)


@settings(max_examples=60, deadline=None)
@given(points, qs)
def test_dq_eval_matches_extended_precision(x, q):
    c = [1, -2, 0.5, 3]
    got = dq_eval(Polynomial(tuple(c)), x, QParam(q))
    ref = dq_direct(lambda y: poly_value(c, y), x, q)
    assert abs(got - ref) <= 1e-9 * max(1, abs(ref))


@settings(max_examples=60, deadline=None)
@given(points, qs)
def test_dq_eval_rational_matches_extended_precision(x, q):
    zeros, poles = [1, -2], [3]
    got = dq_eval(U1, x, QParam(q))
    ref = dq_direct(lambda y: zero_pole_value(1, zeros, poles, y), x, q)
    assert abs(got - ref) <= 1e-8 * max(1, abs(ref))


@settings(max_examples=50, deadline=None)
@given(points, qs, coord, coord)
def test_linearity(x, q, a, b):
    f = Polynomial((1, 2, 3))
    g = zp(1.0, [0.5], [-2j])
    qp = QParam(q)
    lhs = dq_direct(lambda y: a * poly_value([1, 2, 3], y) + b * (y - 0.5) / (y + 2j), x, q)
    rhs = a * dq_eval(f, x, qp) + b * dq_eval(g, x, qp)
    assert abs(lhs - rhs) <= 1e-9 * max(1, abs(lhs))


def test_closure_of_square():
    g = dq_closure(Polynomial((0, 0, 1)), QParam(0.25))
    assert np.allclose(g.coeffs, [0, 2.5], atol=1e-13)


def test_closure_of_constant_is_zero():
    g = dq_closure(Polynomial((4,)), QParam(0.5))
    assert isinstance(g, Polynomial) and g.degree() < 0


@pytest.mark.parametrize("q", Q_VALUES)
def test_closure_of_cube_cross_checked(q):
    qp = QParam(q)
    g = dq_closure(Polynomial((0, 0, 0, 1)), qp)
    assert g.degree() == 2
    xs = 1.7 * np.exp(1j * (0.3 + np.arange(20)))
    assert np.allclose(g.eval(xs), dq_eval(Polynomial((0, 0, 0, 1)), xs, qp), rtol=1e-9)
    assert not g.pole_points()


def test_iter_examples():
    q = QParam(0.5)
    f = Polynomial((0, 0, 0, 1))
    assert dq_iter(f, 0, q) is f
    assert dq_iter(f, 3, q).degree() == 0
    assert dq_iter(f, 4, q).degree() < 0


def test_iter_closure_vs_numeric():
    q = QParam(0.3 + 0.2j)
    f = Polynomial((-2, 1, 1))
    xs = 2.2 * np.exp(1j * (0.1 + np.arange(50) * 0.37))
    a = dq_iter(f, 2, q).eval(xs)
    b = dq_numeric(f, 2, q).eval(xs)
    assert np.allclose(a, b, rtol=1e-8, atol=1e-8)


def test_iter_depth_cap():
    with pytest.raises(DepthExceeded):
        dq_iter(ExpPoly(Polynomial((0, 1))), 7, QParam(0.5))


def test_branch_swap_bitwise():
    q = QParam(0.3 + 0.2j)
    xs = np.array([2.0 + 1j, -3.5, 0.2 + 4j])
    a = dq_eval(U1, xs, q, branch=1)
    b = dq_eval(U1, xs, q, branch=-1)
    assert np.max(np.abs(a - b)) < 1e-12


def test_exceptional_point_uses_derivative():
    q = QParam(0.25)
    f = Polynomial((0, 0, 0, 1))
    sigma = (q.q_half + q.q_minus_half) / 2
    assert dq_eval(f, 1.0, q) == pytest.approx(3 * sigma**2, rel=1e-12)


def test_rational_closure_agrees_pointwise():
    f = ZeroPoleFn(1.5, ((2, 1), (-1j, 1)), ((3, 1), (-0.5 + 2j, 2)))
    q = QParam(0.5)
    g = dq_closure(f, q)
    xs = 4.1 * np.exp(1j * (0.2 + np.arange(30) * 0.21))
    assert np.allclose(g.eval(xs), dq_eval(f, xs, q), rtol=1e-8)


def test_oracle_branch_matches_module():
    for x in (2.5, -0.3 + 0.1j, 4j):
        assert abs(z_of_x(x) - z_branch(x)) < 1e-12
    xh, xc, _ = hat_check_arrays(np.array([2.5]), QParam(0.5))
    ref = shifts(2.5, 0.5)
    assert abs(xh[0] - ref[0]) < 1e-13 and abs(xc[0] - ref[1]) < 1e-13
    assert cmath.isfinite(xh[0])
