"""Independent reference computations frozen for the test-suite.

Nothing here imports ``awlab``: each oracle recomputes its quantity from the
defining formula with mpmath or scipy so that agreement is evidence of
correctness rather than of shared code.
"""

from __future__ import annotations

import cmath
import math

import mpmath as mp
import numpy as np
from scipy import integrate


def z_branch(x: complex) -> complex:
    """Root of ``z^2 - 2xz + 1`` of modulus >= 1 (ties: nonnegative imaginary part)."""
    s = cmath.sqrt(x * x - 1)
    z1, z2 = x + s, x - s
    if abs(abs(z1) - abs(z2)) <= 1e-12 * max(abs(z1), abs(z2)):
        return z1 if z1.imag >= z2.imag else z2
    return z1 if abs(z1) > abs(z2) else z2


def shifts(x: complex, q: complex) -> tuple[complex, complex]:
    qh = cmath.sqrt(q)
    z = z_branch(complex(x))
    return (qh * z + 1 / (qh * z)) / 2, (z / qh + qh / z) / 2


def dq_direct(f, x: complex, q: complex, dps: int = 40) -> complex:
    """Divided difference in extended precision from the defining quotient."""
    with mp.workdps(dps):
        x = mp.mpc(x)
        qh = mp.sqrt(mp.mpc(q))
        s = mp.sqrt(x * x - 1)
        z1, z2 = x + s, x - s
        z = z1 if abs(z1) >= abs(z2) else z2
        xh = (qh * z + 1 / (qh * z)) / 2
        xc = (z / qh + qh / z) / 2
        return complex((f(xh) - f(xc)) / (xh - xc))


def poly_value(coeffs, x):
    """Ascending coefficients, evaluated in mpmath (or numpy) arithmetic."""
    acc = 0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def zero_pole_value(scale, zeros, poles, x):
    out = scale
    for z in zeros:
        out = out * (x - z)
    for p in poles:
        out = out / (x - p)
    return out


def riemann_mean_logplus(f, r: float, n: int = 1_000_000) -> float:
    """``(1/2pi) int log+|f(r e^{it})| dt`` by an n-point midpoint rule."""
    t = (np.arange(n) + 0.5) * (2 * math.pi / n)
    v = np.abs(f(r * np.exp(1j * t)))
    with np.errstate(divide="ignore"):
        return float(np.mean(np.maximum(0.0, np.log(v))))


def counting_integral(moduli, r1: float, r2: float) -> float:
    """``int_{r1}^{r2} n(t)/t dt`` for the step function n counting ``moduli``."""
    mods = np.sort(np.asarray(moduli, dtype=float))
    breaks = [r1] + [m for m in mods if r1 < m < r2] + [r2]
    total = 0.0
    for a, b in zip(breaks[:-1], breaks[1:]):
        mid = 0.5 * (a + b)
        n = int(np.searchsorted(mods, mid, side="right"))
        val, _ = integrate.quad(lambda t: n / t, a, b, epsabs=1e-14, epsrel=1e-13)
        total += val
    return total


def lemma_a_rhs_terms(x, R, alpha1, C, q, m_sum, n_sum, points):
    """Term-by-term pointwise bound written from the formula.

    Returns the six summands ``(m, n, plain, minus, plus, log 2)``.
    """
    x = complex(x)
    qh = cmath.sqrt(q)
    qm = 1 / qh
    ax = abs(x)
    Q2 = 2 * (abs(qh) + abs(qm))
    K = abs(qh - 1) + abs(qm - 1)
    cq = (qm - qh) / 2
    z = z_branch(x)
    t1 = 4 * R * K * ax / ((R - ax) * (R - Q2 * ax)) * m_sum
    t2 = 2 * K * ax * (1 / (R - ax) + 1 / (R - Q2 * ax)) * n_sum
    inside = [c for c in points if abs(c) < R]
    t3 = t4 = t5 = 0.0
    for c in inside:
        t3 += 2 * C * (abs(qh - 1) ** alpha1 + abs(qm - 1) ** alpha1) * ax**alpha1 / abs(x - c) ** alpha1
        t4 += 2 * C * abs(qm - 1) ** alpha1 * ax**alpha1 / abs(x + cq * qm / z - qm * c) ** alpha1
        t5 += 2 * C * abs(qh - 1) ** alpha1 * ax**alpha1 / abs(x - cq * qh / z - qh * c) ** alpha1
    return t1, t2, t3, t4, t5, math.log(2)


def exp_characteristic(r: float) -> float:
    """``T(r, e^x) = r / pi`` (closed form)."""
    return r / math.pi
