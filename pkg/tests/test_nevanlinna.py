from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from awlab.awcore import QParam
from awlab.errors import NotEntire
from awlab.funcmodel import ExpPoly, Polynomial, TruncatedQProduct
from awlab.growth import PhiFn, phi_order
from awlab.nevanlinna import (
    characteristic_T,
    count_n,
    geometric_grid,
    integrated_N,
    log_max_modulus,
    max_modulus,
    nevanlinna_table,
    prox_m,
)

from oracles import counting_integral, exp_characteristic, riemann_mean_logplus
from witnesses import EXP1, JENSEN, R1, U1, U2, U3, U5, zp

IDENT = Polynomial((0, 1))


def test_prox_of_identity():
    assert prox_m(IDENT, math.e) == pytest.approx(1.0, abs=1e-9)


def test_prox_vanishes_away_from_pole():
    f = zp(1.0, [], [2])
    assert prox_m(f, 1.0) == pytest.approx(0.0, abs=1e-9)
    assert riemann_mean_logplus(f.eval, 1.0) == pytest.approx(0.0, abs=1e-12)


def test_prox_of_square():
    assert prox_m(Polynomial((0, 0, 1)), 10.0) == pytest.approx(2 * math.log(10), abs=1e-9)


@pytest.mark.parametrize("f", [U1, U2, U3, U5])
@pytest.mark.parametrize("r", [0.7, 2.3, 5.0])
def test_prox_against_riemann_oracle(f, r):
    assert prox_m(f, r) == pytest.approx(riemann_mean_logplus(f.eval, r), abs=1e-6)


def test_count_examples():
    f = zp(1.0, [1, 3], [2])
    assert count_n(f, 2.5, 0) == 1
    assert count_n(f, 2.5, None) == 1
    g = TruncatedQProduct(1.0, 0.5, 10)
    assert count_n(g, 10.0, 0) == 3


def test_count_rescaling_law():
    q = QParam(0.5)
    c = q.q_minus_half
    f = U5
    scaled = zp(1.0, [z / c for z, _ in f.zero_points()], [p / c for p, _ in f.pole_points()])
    for r in geometric_grid(0.1, 100.0):
        for a in (0, None):
            assert count_n(scaled, r, a) == count_n(f, abs(c) * r, a)


def test_integrated_N_examples():
    assert integrated_N(zp(1.0, [], [2]), 4.0) == pytest.approx(math.log(2), abs=1e-15)
    assert integrated_N(EXP1, 50.0) == 0.0


@pytest.mark.parametrize("f", JENSEN)
@pytest.mark.parametrize("a", [0, None])
def test_integrated_N_matches_quadrature(f, a):
    moduli = [abs(c) for c, m in (f.zero_points() if a == 0 else f.pole_points()) for _ in range(m)]
    for r1, r2 in [(0.5, 3.0), (1.0, 40.0), (2.0, 1e4)]:
        got = integrated_N(f, r2, a) - integrated_N(f, r1, a)
        assert got == pytest.approx(counting_integral(moduli, r1, r2), abs=1e-9)


def test_characteristic_of_identity():
    assert characteristic_T(IDENT, math.e) == pytest.approx(1.0, abs=1e-9)


def test_rational_slope():
    f = zp(1.0, [1, -2, 3j], [5])
    r = geometric_grid(1e3, 1e6)
    T = np.array([characteristic_T(f, x) for x in r])
    slope = np.polyfit(np.log(r), T, 1)[0]
    assert slope == pytest.approx(3.0, rel=0.01)


@pytest.mark.parametrize("r", [10.0, 31.6, 100.0])
def test_exp_characteristic(r):
    assert characteristic_T(EXP1, r) / exp_characteristic(r) == pytest.approx(1.0, abs=0.01)


def test_max_modulus_examples():
    assert max_modulus(Polynomial((0, 0, 1)), 3.0) == pytest.approx(9.0, rel=1e-12)
    assert max_modulus(EXP1, 5.0) == pytest.approx(math.exp(5), rel=1e-10)
    with pytest.raises(NotEntire):
        max_modulus(U1, 5.0)


def test_max_modulus_slope():
    p = Polynomial((1, -3, 0, 2, 1))
    r = geometric_grid(1e3, 1e6)
    lm = [log_max_modulus(p, x) for x in r]
    assert np.polyfit(np.log(r), lm, 1)[0] == pytest.approx(4.0, rel=0.01)


def test_table_invariants():
    tab = nevanlinna_table(R1, geometric_grid(1, 1e4))
    assert np.allclose(tab.T, tab.m + tab.N, rtol=0, atol=1e-15)
    assert np.all(np.diff(tab.T) >= -1e-6)
    assert list(tab.r) == sorted(tab.r)
    lines = tab.to_csv().splitlines()
    assert lines[0] == "r,m,N,T,n_zeros,n_poles" and len(lines) == len(tab.rows) + 1


@settings(max_examples=25, deadline=None)
@given(st.floats(0.2, 200.0))
def test_first_main_theorem_on_rational(r):
    f = U3
    f0 = abs(f.eval(0.0))
    lhs = characteristic_T(f, r) - (prox_m(f, r, 0) + integrated_N(f, r, 0))
    assert lhs == pytest.approx(math.log(f0), abs=1e-6)


def test_order_of_exp_from_table():
    tab = nevanlinna_table(EXP1)
    est = phi_order(tab, PhiFn("pow", 1.0))
    assert 0.95 <= est.estimate <= 1.05


def test_exppoly_unscaled_r_max():
    tab = nevanlinna_table(ExpPoly(Polynomial((0, 0, 1))))
    assert tab.r_max <= 1000.0
