"""Parabolic problems with a time-average constraint, on (0,1) with
homogeneous Dirichlet boundary, and the two solution routes.

Route one (method of lines) replaces u_xx by the second difference matrix
and runs the matrix series. Route two (functional) keeps the operator
continuous and obtains each tail coefficient from refined boundary value
solves, so no large matrix powers ever appear.
"""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import bvp
from .backends import LaplacianOperator
from .expansion import (
    TWO_PI,
    adaptive_solve,
    error_measure,
    fine_grid,
    polynomial_part,
)


@dataclass
class ParabolicProblem:
    """u_t = sigma u_xx + c u with the period average of u prescribed.

    chain_fn(j, x) returns the j-th operator power applied to the data,
    evaluated analytically; exact_fn(t, x) the solution samples with
    shapes (T,), (X,) -> (T, X).
    """

    sigma: float
    c: float
    chain_fn: Callable = field(repr=False)
    exact_fn: Callable = field(repr=False)
    name: str = ""

    def data(self, x):
        return self.chain_fn(0, x)


def model_problem_1(sigma: float) -> ParabolicProblem:
    """Pure diffusion, data mixing the second and third sine modes."""
    lam2 = sigma * (2.0 * np.pi) ** 2
    lam3 = sigma * (3.0 * np.pi) ** 2
    c2 = -np.expm1(-TWO_PI * lam2) / (TWO_PI * lam2)
    c3 = -np.expm1(-TWO_PI * lam3) / (TWO_PI * lam3)

    def chain_fn(j, x):
        return (
            12.0 * c3 * (-lam3) ** j * np.sin(3.0 * np.pi * x)
            - 7.0 * c2 * (-lam2) ** j * np.sin(2.0 * np.pi * x)
        )

    def exact_fn(t, x):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return (
            12.0 * np.outer(np.exp(-lam3 * t), np.sin(3.0 * np.pi * x))
            - 7.0 * np.outer(np.exp(-lam2 * t), np.sin(2.0 * np.pi * x))
        )

    return ParabolicProblem(sigma=sigma, c=0.0, chain_fn=chain_fn,
                            exact_fn=exact_fn, name="diffusion-two-modes")


def model_problem_2() -> ParabolicProblem:
    """Diffusion plus a zero order term tuned so the data is an
    eigenfunction with eigenvalue -1."""
    c = 4.0 * np.pi ** 2 - 1.0
    amp = -np.expm1(-TWO_PI) / TWO_PI

    def chain_fn(j, x):
        return amp * (-1.0) ** j * np.sin(2.0 * np.pi * x)

    def exact_fn(t, x):
        # the data is the period average of e^{-t} sin(2 pi x)
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return np.outer(np.exp(-t), np.sin(2.0 * np.pi * x))

    return ParabolicProblem(sigma=1.0, c=c, chain_fn=chain_fn,
                            exact_fn=exact_fn, name="shifted-diffusion")


def semidiscretize(problem: ParabolicProblem, n_space: int):
    """Second difference discretization on n_space interior nodes."""
    x = np.arange(1, n_space + 1) / (n_space + 1)
    op = LaplacianOperator(
        n_space,
        coef=problem.sigma * (n_space + 1) ** 2,
        shift=problem.c,
    )
    return op, problem.data(x), x


@dataclass
class MolOutcome:
    ell_hat: int
    ell_per_point: np.ndarray
    err: float
    times: np.ndarray
    rel_err: np.ndarray
    x: np.ndarray = field(repr=False)
    v: np.ndarray = field(repr=False)
    u: np.ndarray = field(repr=False)


def mol_solve(problem, n_space: int, n: int, tol: float, m: int,
              max_terms=None, fine_refine: int = 4, workers=None) -> MolOutcome:
    """Method of lines run; error against the exact solution samples."""
    op, fh, x = semidiscretize(problem, n_space)
    kwargs = {} if max_terms is None else {"max_terms": max_terms}
    res = adaptive_solve(op, fh, n, tol=tol, m=m, workers=workers, **kwargs)
    tf = fine_grid(m, fine_refine)
    v = res.evaluate(tf)
    u = problem.exact_fn(tf, x)
    num = np.max(np.abs(u - v), axis=-1)
    den = np.maximum(np.max(np.abs(u), axis=-1), 1e-300)
    rel = num / den
    return MolOutcome(
        ell_hat=res.ell_hat, ell_per_point=res.ell_per_point,
        err=float(rel.max()), times=tf, rel_err=rel, x=x, v=v, u=u,
    )


def functional_solve(problem, n: int, ell: int, t_grid, x_grid,
                     refine_tol: float = bvp.DEFAULT_REFINE_TOL,
                     start_mesh: int = bvp.DEFAULT_START_MESH,
                     max_doublings: int = bvp.MAX_DOUBLINGS):
    """Evaluate the order n series with a fixed tail length ell on a
    space-time grid, all coefficients obtained from boundary value solves.

    Returns (v, u, max_abs_err) with v, u of shape (T, X).
    """
    t_grid = np.atleast_1d(np.asarray(t_grid, dtype=float))
    x_grid = np.atleast_1d(np.asarray(x_grid, dtype=float))
    chain_vecs = [problem.chain_fn(j, x_grid) for j in range(2 * n + 2)]
    v = polynomial_part(chain_vecs, n, t_grid)
    sign = -1.0 if n % 2 else 1.0

    def interp(nodes, vals):
        xs = np.concatenate([[0.0], nodes, [1.0]])
        ys = np.concatenate([[0.0], vals.real, [0.0]])
        return np.interp(x_grid, xs, ys)

    g_even = lambda x: problem.chain_fn(2 * n + 2, x)
    g_odd = lambda x: problem.chain_fn(2 * n + 3, x)
    for k in range(1, ell + 1):
        xa, za = bvp.resolvent_pair(problem.sigma, problem.c, k, g_even,
                                    refine_tol, start_mesh, max_doublings)
        xb, zb = bvp.resolvent_pair(problem.sigma, problem.c, k, g_odd,
                                    refine_tol, start_mesh, max_doublings)
        a = interp(xa, za)
        b = interp(xb, zb) / k
        ck = sign * 2.0 * float(k) ** (-2 * n)
        v += ck * (
            np.outer(np.cos(k * t_grid), a) + np.outer(np.sin(k * t_grid), b)
        )

    u = problem.exact_fn(t_grid, x_grid)
    return v, u, float(np.max(np.abs(v - u)))
