"""Shared test functions."""

from __future__ import annotations

from awlab.funcmodel import ExpPoly, Polynomial, TruncatedQProduct, ZeroPoleFn


def zp(scale, zeros, poles=()):
    return ZeroPoleFn(scale, tuple((c, 1) for c in zeros), tuple((c, 1) for c in poles))


# unit-scale rationals
U1 = zp(1.0, [1, -2], [3])
U2 = zp(1.0, [0.5], [-0.8j])
U3 = ZeroPoleFn(2.0, ((1 + 1j, 2),), ((-1.5, 1), (0.5j, 1)))
U4 = Polynomial((1, 0.5, -1, 1))
U5 = zp(1.0, [2, -1j, 0.5], [1.5j])

# rationals with zeros and poles of moderate modulus
R1 = zp(1.0, [7, -12 + 5j], [20j])
R2 = ZeroPoleFn(2.0, ((8, 2),), ((-15, 1), (30 + 30j, 1)))
R3 = zp(0.5, [6 + 6j, -9, 25], [11j, -30])
R4 = Polynomial((3, -1, 0, 0.02))

JENSEN = [U1, U2, U3, U5, R1]
RATIONALS = [U1, U2, U3, U4, U5]
LEMMA_A = [R1, R2, R3, R4]

QPROD = TruncatedQProduct(1.0, 0.5, 30)
EXP1 = ExpPoly(Polynomial((0, 1)))
EXP_HALF = ExpPoly(Polynomial((0, 0.5)))

Q_VALUES = [0.25, 0.5, 0.3 + 0.2j, 0.9]
