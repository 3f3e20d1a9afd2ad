"""Operator backends.

Every backend knows its own spectrum, which serves three purposes: exact
reference solutions, the conditioning guard for the shifted solves, and
deterministic construction of probe data. The application of the operator
and the resolvent products used by the expansion go through structure
specific routes (stencils, circular convolution, Givens sweeps), not
through the eigendecomposition, except where the eigenbasis is the natural
fast transform (sine transform, FFT).
"""

import numpy as np
import scipy.fft
import scipy.linalg

from .errors import IllConditionedOperatorError
from .special import propagator_weight

# a shifted system is rejected when the spectrum comes this close to the
# shift, relative to the farthest eigenvalue
SHIFT_RTOL = 1e-12

# probe data constants, see make_data
BAND_LEVEL = 1.0713
BAND_WEIGHT = 3.2655
POLE_CLEARANCE = 0.25


def check_shifts(lam, ks):
    """Reject resolvent shifts +-ik that fall onto the spectrum.

    lam: eigenvalue array. ks: array of positive integers.
    """
    lam = np.asarray(lam)
    ks = np.atleast_1d(np.asarray(ks, dtype=float))
    for sign in (1.0, -1.0):
        d = np.abs(lam[None, :] - sign * 1j * ks[:, None])
        bad = d.min(axis=1) <= SHIFT_RTOL * d.max(axis=1)
        if bad.any():
            k = ks[bad][0]
            i = int(np.argmax(bad))
            raise IllConditionedOperatorError(
                f"shift {sign * 1j * k} is within {SHIFT_RTOL:g} of the "
                f"spectrum (closest eigenvalue distance {d[i].min():.3e}); "
                "the shifted systems are numerically singular"
            )


class DiagonalOperator:
    """A = diag(values). Covers the scalar problem as the 1x1 case."""

    def __init__(self, values):
        self.lam = np.atleast_1d(np.asarray(values, dtype=complex))
        self.n = self.lam.size
        self.real = bool(np.all(self.lam.imag == 0.0))

    def apply(self, x):
        y = self.lam * x
        return y.real if self.real and not np.iscomplexobj(x) else y

    def vk_apply(self, ks, rhs):
        ks = np.asarray(ks)
        check_shifts(self.lam, ks)
        denom = self.lam[None, None, :] ** 2 + (ks.astype(float) ** 2)[:, None, None]
        out = np.asarray(rhs)[None, :, :] / denom
        if self.real and not np.iscomplexobj(rhs):
            out = out.real
        return out

    def to_modes(self, x):
        return np.asarray(x, dtype=complex)

    def from_modes(self, xh):
        return xh.real if self.real else xh

    def mode_partner(self, i):
        return None

    def dense_matrix(self):
        return np.diag(self.lam.real if self.real else self.lam)


class LaplacianOperator:
    """A = coef * tridiag(1, -2, 1) + shift * I on N interior points.

    Dirichlet second difference stencil. Diagonalized by the orthonormal
    sine transform, eigenvalues shift - 4*coef*sin^2(j pi / (2(N+1))).
    """

    def __init__(self, n: int, coef: float = 1.0, shift: float = 0.0):
        self.n = n
        self.coef = float(coef)
        self.shift = float(shift)
        j = np.arange(1, n + 1)
        self.lam = self.shift - 4.0 * self.coef * np.sin(j * np.pi / (2 * (n + 1))) ** 2
        self.real = True

    def apply(self, x):
        # assembled coefficient form, matching an explicit tridiagonal matvec
        y = (self.shift - 2.0 * self.coef) * x
        y[..., 1:] += self.coef * x[..., :-1]
        y[..., :-1] += self.coef * x[..., 1:]
        return y

    def to_modes(self, x):
        return scipy.fft.dst(x, type=1, norm="ortho", axis=-1)

    def from_modes(self, xh):
        return scipy.fft.idst(xh, type=1, norm="ortho", axis=-1)

    def vk_apply(self, ks, rhs):
        """(A^2 + k^2)^{-1} rhs for each k in ks; rhs shape (r, N)."""
        ks = np.asarray(ks)
        check_shifts(self.lam, ks)
        rh = self.to_modes(np.asarray(rhs, dtype=float))
        denom = self.lam[None, None, :] ** 2 + (ks.astype(float) ** 2)[:, None, None]
        return self.from_modes(rh[None, :, :] / denom)

    def mode_partner(self, i):
        return None

    def dense_matrix(self):
        t = np.diag(np.full(self.n, -2.0))
        t += np.diag(np.ones(self.n - 1), 1) + np.diag(np.ones(self.n - 1), -1)
        return self.coef * t + self.shift * np.eye(self.n)


class CirculantOperator:
    """Banded circulant operator given by its first column coefficients.

    apply uses the cyclic stencil directly; the resolvent products go
    through the FFT. Keeping the two routes separate lets the tests check
    one against the other.
    """

    def __init__(self, coeffs, n: int):
        self.coeffs = np.asarray(coeffs, dtype=float)
        self.n = n
        first_col = np.zeros(n)
        first_col[: self.coeffs.size] = self.coeffs
        self.first_col = first_col
        self.lam = np.fft.fft(first_col)
        self.real = True

    def apply(self, x):
        y = self.coeffs[0] * x
        for m in range(1, self.coeffs.size):
            y = y + self.coeffs[m] * np.roll(x, m, axis=-1)
        return y

    def to_modes(self, x):
        return np.fft.fft(x, axis=-1, norm="ortho")

    def from_modes(self, xh):
        return np.fft.ifft(xh, axis=-1, norm="ortho")

    def vk_apply(self, ks, rhs):
        ks = np.asarray(ks)
        check_shifts(self.lam, ks)
        rhs = np.asarray(rhs)
        rh = np.fft.fft(rhs, axis=-1)
        denom = self.lam[None, None, :] ** 2 + (ks.astype(float) ** 2)[:, None, None]
        out = np.fft.ifft(rh[None, :, :] / denom, axis=-1)
        if self.real and not np.iscomplexobj(rhs):
            out = out.real
        return out

    def mode_partner(self, i):
        return (self.n - i) % self.n

    def dense_matrix(self):
        return scipy.linalg.circulant(self.first_col)


def haar_unitary(n, rng):
    """Haar distributed unitary matrix via QR of a complex Ginibre draw."""
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(g / np.sqrt(2.0))
    d = np.diagonal(r)
    return q * (d / np.abs(d))


class HessenbergOperator:
    """Upper Hessenberg unitary matrix with prescribed unimodular spectrum.

    Built as H = W^H D W where D is a random unitary diagonal and W is the
    product of a Haar unitary with the Hessenberg reduction transform, so
    the eigenpairs are known exactly.
    """

    def __init__(self, n: int, seed: int):
        rng = np.random.default_rng(seed)
        phases = rng.uniform(0.0, 2.0 * np.pi, size=n)
        self.lam = np.exp(1j * phases)
        q = haar_unitary(n, rng)
        b = q.conj().T @ np.diag(self.lam) @ q
        h, p = scipy.linalg.hessenberg(b, calc_q=True)
        # b = p h p^H, hence h = (q p)^H diag(lam) (q p) up to roundoff
        self.h = h
        self.w = q @ p
        self.n = n
        self.real = False

    def apply(self, x):
        return self.h @ x

    def to_modes(self, x):
        return np.tensordot(x, self.w.T, axes=([-1], [0]))

    def from_modes(self, xh):
        return np.tensordot(xh, self.w.conj(), axes=([-1], [0]))

    def vk_apply(self, ks, rhs):
        ks = np.asarray(ks)
        check_shifts(self.lam, ks)
        rhs = np.asarray(rhs, dtype=complex)
        out = np.empty((ks.size,) + rhs.shape, dtype=complex)
        for idx, k in enumerate(ks):
            y = solve_hessenberg_shifted(self.h, 1j * float(k), rhs.T)
            out[idx] = solve_hessenberg_shifted(self.h, -1j * float(k), y).T
        return out

    def mode_partner(self, i):
        return None

    def dense_matrix(self):
        return self.h


def solve_hessenberg_shifted(h, shift, b):
    """Solve (H - shift I) X = B for upper Hessenberg H, O(N^2) per column.

    B has shape (N, r). Givens rotations clear the subdiagonal, then back
    substitution.
    """
    n = h.shape[0]
    r = h.astype(complex, copy=True)
    r[np.diag_indices(n)] -= shift
    x = np.array(b, dtype=complex, copy=True)
    if x.ndim == 1:
        x = x[:, None]
    for i in range(n - 1):
        a, bb = r[i, i], r[i + 1, i]
        nrm = np.sqrt(abs(a) ** 2 + abs(bb) ** 2)
        if nrm == 0.0:
            raise IllConditionedOperatorError("singular shifted Hessenberg system")
        c, s = a / nrm, bb / nrm
        top = np.conj(c) * r[i, i:] + np.conj(s) * r[i + 1, i:]
        r[i + 1, i:] = -s * r[i, i:] + c * r[i + 1, i:]
        r[i, i:] = top
        topx = np.conj(c) * x[i] + np.conj(s) * x[i + 1]
        x[i + 1] = -s * x[i] + c * x[i + 1]
        x[i] = topx
    out = np.empty_like(x)
    for i in range(n - 1, -1, -1):
        if r[i, i] == 0.0:
            raise IllConditionedOperatorError("singular shifted Hessenberg system")
        acc = x[i] - r[i, i + 1 :] @ out[i + 1 :]
        out[i] = acc / r[i, i]
    if np.ndim(b) == 1:
        return out[:, 0]
    return out


def band_probe(model, level: float = BAND_LEVEL, weight: float = BAND_WEIGHT):
    """Deterministic probe vector with two spectral components.

    A unit carrier sits on the mode of smallest |lambda|, keeping the
    solution norm anchored over the whole period. The second component, of
    size `weight`, sits on the mode whose |lambda| is closest to `level`
    among modes at distance at least POLE_CLEARANCE from every resolvent
    pole ik. Pinning the second component to a fixed eigenvalue magnitude
    makes truncation lengths measure the intrinsic decay of the expansion,
    comparable across operators and sizes. For complex transforms the
    conjugate partner of each mode receives the same weight so the probe
    stays real.
    """
    lam = model.lam
    n = lam.size
    kmax = int(np.ceil(np.max(np.abs(lam)))) + 2
    kk = np.arange(1, kmax + 1)
    poles = np.concatenate([1j * kk, -1j * kk])
    dist = np.min(np.abs(lam[:, None] - poles[None, :]), axis=1)
    score = np.where(dist >= POLE_CLEARANCE, np.abs(np.abs(lam) - level), np.inf)
    if not np.isfinite(score).any():
        raise IllConditionedOperatorError(
            "no mode clears the resolvent poles; probe data undefined"
        )
    i_car = int(np.argmin(np.abs(lam)))
    i_band = int(np.argmin(score))
    c = np.zeros(n, dtype=complex)
    for i, w in ((i_car, 1.0), (i_band, weight)):
        c[i] += w
        partner = model.mode_partner(i)
        if partner is not None and partner != i:
            c[partner] += w
    f = model.from_modes(c)
    if model.real:
        f = np.real(f)
    return f


def make_data(model, kind: str = "band", seed=None, level: float = BAND_LEVEL,
              weight: float = BAND_WEIGHT):
    """Data vector for an experiment. Random kinds require a seed."""
    if kind == "band":
        return band_probe(model, level=level, weight=weight)
    if kind == "ones":
        return np.ones(model.n)
    if kind in ("uniform", "normal"):
        if seed is None:
            raise ValueError(f"data kind {kind!r} requires a seed")
        rng = np.random.default_rng(seed)
        if kind == "uniform":
            return rng.uniform(-1.0, 1.0, size=model.n)
        return rng.standard_normal(model.n)
    raise ValueError(f"unknown data kind {kind!r}")


def reference_solution(model, f, times):
    """Exact solution samples v(t_i) through the eigendecomposition.

    Returns an array of shape (len(times), N).
    """
    fh = model.to_modes(np.asarray(f))
    times = np.atleast_1d(np.asarray(times, dtype=float))
    out = np.empty((times.size, model.n), dtype=complex)
    for i, t in enumerate(times):
        out[i] = model.from_modes(propagator_weight(model.lam, t) * fh)
    if model.real and not np.iscomplexobj(f):
        return out.real
    return out


def power_reference(model, f, times):
    """Propagate v along a uniform grid with the matrix exponential.

    v(t_0) is taken exact, then v(t_{i+1}) = expm(A dt) v(t_i). The grid
    must be uniform.
    """
    times = np.asarray(times, dtype=float)
    steps = np.diff(times)
    if steps.size and (steps.max() - steps.min()) > 1e-12 * max(times.max(), 1.0):
        raise ValueError("power propagation needs a uniform time grid")
    a = model.dense_matrix()
    b = scipy.linalg.expm(a * steps[0]) if steps.size else None
    out = np.empty((times.size, model.n), dtype=complex)
    out[0] = reference_solution(model, f, times[:1])[0]
    for i in range(1, times.size):
        out[i] = b @ out[i - 1]
    if model.real and not np.iscomplexobj(f):
        return out.real
    return out
