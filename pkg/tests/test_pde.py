"""Model problems and the two discretization routes."""

import numpy as np
import pytest
from scipy.integrate import simpson

from nlevol.pde import (
    functional_solve,
    model_problem_1,
    model_problem_2,
    mol_solve,
    semidiscretize,
)

TWO_PI = 2.0 * np.pi


@pytest.mark.parametrize("problem", [model_problem_1(1e-2), model_problem_2()],
                         ids=["diffusion", "shifted"])
def test_exact_solution_average_is_data(problem):
    t = np.linspace(0.0, TWO_PI, 2001)
    x = np.linspace(0.0, 1.0, 23)
    u = problem.exact_fn(t, x)
    avg = simpson(u, x=t, axis=0) / TWO_PI
    assert np.max(np.abs(avg - problem.data(x))) < 1e-10


def test_model1_chain_is_repeated_operator():
    # finite difference check that chain_fn(j+1) = sigma chain_fn(j)''
    mp = model_problem_1(1e-2)
    x = np.linspace(0.05, 0.95, 19)
    h = 1e-4
    for j in (0, 1):
        second = (mp.chain_fn(j, x - h) - 2 * mp.chain_fn(j, x)
                  + mp.chain_fn(j, x + h)) / h ** 2
        want = mp.sigma * second
        got = mp.chain_fn(j + 1, x)
        assert np.max(np.abs(got - want)) < 1e-5 * np.max(np.abs(got))


def test_model2_chain_alternates_sign():
    mp = model_problem_2()
    x = np.linspace(0.0, 1.0, 17)
    assert np.allclose(mp.chain_fn(3, x), -mp.chain_fn(2, x), atol=1e-15)
    assert np.allclose(mp.chain_fn(4, x), mp.chain_fn(0, x), atol=1e-15)


def test_semidiscretize_spectrum_and_stencil():
    mp = model_problem_1(1e-2)
    op, fh, x = semidiscretize(mp, 500)
    assert x[0] == pytest.approx(1.0 / 501) and x.size == 500
    # low discrete eigenvalues approach -sigma (j pi)^2
    lam = np.sort(op.lam)[::-1]
    for j in (1, 2, 3, 4, 5):
        want = -mp.sigma * (j * np.pi) ** 2
        assert abs(lam[j - 1] - want) < 1e-3 * abs(want)
    # second order consistency of A_h f against the analytic chain
    e500 = np.max(np.abs(op.apply(fh.copy()) - mp.chain_fn(1, x)))
    op2, fh2, x2 = semidiscretize(mp, 1000)
    e1000 = np.max(np.abs(op2.apply(fh2.copy()) - mp.chain_fn(1, x2)))
    assert 3.5 < e500 / e1000 < 4.5


def test_mol_solve_two_mode_diffusion():
    out = mol_solve(model_problem_1(1e-2), 500, n=1, tol=1e-7, m=10)
    assert 40 <= out.ell_hat <= 200
    assert out.err < 2e-4
    assert out.v.shape == out.u.shape == (37, 500)
    assert out.rel_err.shape == (37,)
    assert np.max(out.rel_err) == pytest.approx(out.err)


def test_functional_solve_shifted_problem():
    tg = np.linspace(0.0, TWO_PI, 9)
    xg = np.linspace(0.0, 1.0, 17)
    v, u, err = functional_solve(model_problem_2(), n=1, ell=10,
                                 t_grid=tg, x_grid=xg, refine_tol=1e-7)
    assert v.shape == u.shape == (9, 17)
    assert err < 1e-3
    # boundary columns stay at roundoff scale
    assert np.max(np.abs(v[:, 0])) < 1e-13 and np.max(np.abs(v[:, -1])) < 1e-13


def test_functional_solve_tail_length_improves():
    tg = np.linspace(0.0, TWO_PI, 9)
    xg = np.linspace(0.0, 1.0, 17)
    errs = [functional_solve(model_problem_2(), n=1, ell=ell, t_grid=tg,
                             x_grid=xg, refine_tol=1e-7)[2]
            for ell in (5, 10, 40)]
    assert errs[0] > errs[1] > errs[2]


def test_functional_solve_two_mode_diffusion():
    tg = np.linspace(0.0, TWO_PI, 9)
    v, u, err = functional_solve(model_problem_1(1e-2), n=1, ell=20,
                                 t_grid=tg, x_grid=np.linspace(0.0, 1.0, 33))
    assert err < 1e-3
