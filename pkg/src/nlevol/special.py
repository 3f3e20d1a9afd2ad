"""Bernoulli polynomials and the generating function z / (e^z - 1).

Both objects are needed by the series expansion: the polynomial part of the
expansion is a Bernoulli sum, and the exact propagator weights are built from
psi1(z) = z / (e^z - 1).
"""

from fractions import Fraction
from math import comb

import numpy as np

DEFAULT_MAX_DEGREE = 9


def bernoulli_numbers(count):
    """First `count` Bernoulli numbers B_0 .. B_{count-1} as Fractions.

    Convention B_1 = -1/2, which is the one consistent with
    z/(e^z - 1) = sum B_j z^j / j!.
    """
    b = [Fraction(0)] * count
    b[0] = Fraction(1)
    for m in range(1, count):
        # sum_{j=0}^{m} C(m+1, j) B_j = 0
        acc = Fraction(0)
        for j in range(m):
            acc += comb(m + 1, j) * b[j]
        b[m] = -acc / (m + 1)
    return b


class BernoulliTable:
    """Exact coefficients of B_0(x) .. B_max(x), with float Horner evaluation.

    Coefficients are computed once with rational arithmetic and mirrored to
    floats; evaluation never touches Fraction again.
    """

    def __init__(self, max_degree: int = DEFAULT_MAX_DEGREE):
        self.max_degree = max_degree
        numbers = bernoulli_numbers(max_degree + 1)
        # B_n(x) = sum_k C(n,k) B_{n-k} x^k, coefficients stored low to high
        self.coeffs = []
        for n in range(max_degree + 1):
            row = [comb(n, k) * numbers[n - k] for k in range(n + 1)]
            self.coeffs.append(row)
        self._float_coeffs = [np.array([float(c) for c in row]) for row in self.coeffs]

    def eval(self, degree: int, x):
        """Evaluate B_degree at x (scalar or ndarray)."""
        if degree > self.max_degree:
            raise ValueError(
                f"degree {degree} above table limit {self.max_degree}; "
                "build a larger table"
            )
        row = self._float_coeffs[degree]
        x = np.asarray(x, dtype=float)
        out = np.full_like(x, row[-1])
        for c in row[-2::-1]:
            out = out * x + c
        return out


# tolerance below which the Taylor series of psi1 is used
_TAYLOR_RADIUS = 0.5
_TAYLOR_TERMS = 13
_POLE_RTOL = 1e-8
_EXP_SWITCH = 350.0

_psi1_taylor = None


def _taylor_coeffs():
    global _psi1_taylor
    if _psi1_taylor is None:
        numbers = bernoulli_numbers(_TAYLOR_TERMS)
        fact = Fraction(1)
        coeffs = []
        for j, bj in enumerate(numbers):
            if j > 0:
                fact *= j
            coeffs.append(float(bj / fact))
        _psi1_taylor = np.array(coeffs)
    return _psi1_taylor


def psi1(z):
    """Evaluate z / (e^z - 1) with care near 0, near the poles, and for
    large |Re z|.

    The function has simple poles at z = 2*pi*i*k, k nonzero. Arguments
    closer to a pole than 1e-8 (relative to max(1, |z|)) are rejected,
    because no accurate value can be returned there.
    """
    z = np.asarray(z, dtype=complex)
    out = np.empty_like(z)

    k_near = np.round(z.imag / (2.0 * np.pi))
    pole_dist = np.abs(z - 2j * np.pi * k_near)
    near_pole = (k_near != 0) & (pole_dist <= _POLE_RTOL * np.maximum(1.0, np.abs(z)))
    if np.any(near_pole):
        raise IllPoleError(z[near_pole].ravel()[0])

    small = np.abs(z) < _TAYLOR_RADIUS
    if np.any(small):
        c = _taylor_coeffs()
        zs = z[small]
        val = np.full_like(zs, c[-1])
        for cj in c[-2::-1]:
            val = val * zs + cj
        out[small] = val

    big = ~small
    if np.any(big):
        zb = z[big]
        val = np.empty_like(zb)
        grow = zb.real > _EXP_SWITCH
        # rewrite with e^{-z} so nothing overflows on the growing side
        if np.any(grow):
            e = np.exp(-zb[grow])
            val[grow] = zb[grow] * e / (1.0 - e)
        rest = ~grow
        if np.any(rest):
            val[rest] = zb[rest] / np.expm1(zb[rest])
        out[big] = val

    if out.ndim == 0:
        return complex(out)
    return out


class IllPoleError(ValueError):
    def __init__(self, z):
        super().__init__(f"psi1 evaluated too close to a pole, z = {z}")
        self.z = z


def propagator_weight(lam, t):
    """Exact mode weight e^{lam t} * psi1(2 pi lam) for t in [0, 2 pi].

    For strongly growing modes the two exponentials are combined before
    evaluation, so the weight stays finite whenever the product does.
    """
    lam = np.asarray(lam, dtype=complex)
    z = 2.0 * np.pi * lam
    out = np.empty_like(lam)
    grow = z.real > _EXP_SWITCH
    if np.any(grow):
        lg = lam[grow]
        # z e^{lam(t - 2 pi)} / (1 - e^{-z})
        out[grow] = (
            2.0 * np.pi * lg * np.exp(lg * (t - 2.0 * np.pi))
            / (1.0 - np.exp(-2.0 * np.pi * lg))
        )
    rest = ~grow
    if np.any(rest):
        lr = lam[rest]
        out[rest] = np.exp(lr * t) * psi1(2.0 * np.pi * lr)
    return out
