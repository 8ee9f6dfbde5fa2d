import math

import numpy as np
import pytest

from cmcslab import (
    SolverConfig,
    TridiagonalPencil,
    eig_lowest,
    refine_extrapolate,
    solve_deflated,
    sturm_count,
)


def dirichlet_laplacian(m, length=1.0, w=0.0):
    """Pencil of -u'' - w u with Dirichlet ends on m intervals."""
    h = length / m
    size = m - 1
    diag = np.full(size, 2.0 / h) - h * w
    off = np.full(size - 1, -1.0 / h)
    bdiag = np.full(size, h)
    return TridiagonalPencil(diag, off, bdiag)


def neumann_laplacian(m, length=1.0, w=0.0):
    """Pencil of -u'' - w u with free ends on m intervals."""
    h = length / m
    size = m + 1
    diag = np.full(size, 2.0 / h)
    diag[0] = diag[-1] = 1.0 / h
    weights = np.full(size, h)
    weights[0] = weights[-1] = h / 2
    diag = diag - weights * w
    off = np.full(size - 1, -1.0 / h)
    return TridiagonalPencil(diag, off, weights)


def test_dirichlet_ground_state():
    pairs = eig_lowest(dirichlet_laplacian(1000), 1)
    lam, u = pairs[0]
    assert abs(lam - math.pi**2) / math.pi**2 < 1e-3
    assert u[np.argmax(np.abs(u))] != 0.0


def test_pencil_shift_identity():
    pen = dirichlet_laplacian(200)
    c = 3.7
    base = [lam for lam, _ in eig_lowest(pen, 4)]
    shifted = [lam for lam, _ in eig_lowest(pen.shifted(c), 4)]
    for a, b in zip(base, shifted):
        assert abs((a + c) - b) <= 1e-12 * (1.0 + abs(a) + c)


def test_neumann_shifted_cosine_modes():
    # -u'' - u on [0, pi]: eigenvalues k^2 - 1
    pairs = eig_lowest(neumann_laplacian(1000, length=math.pi, w=1.0), 3)
    lams = [lam for lam, _ in pairs]
    assert abs(lams[0] + 1.0) < 1e-3
    assert abs(lams[1]) < 1e-3
    assert abs(lams[2] - 3.0) < 1e-2


def test_sturm_count_matches_returned():
    pen = neumann_laplacian(400, length=math.pi, w=1.0)
    lams = [lam for lam, _ in eig_lowest(pen, 5)]
    for i in range(4):
        mid = 0.5 * (lams[i] + lams[i + 1])
        assert sturm_count(pen, mid) == i + 1


def test_residual_invariant():
    pen = dirichlet_laplacian(500, w=2.0)
    anorm = pen.norm_inf()
    for lam, u in eig_lowest(pen, 4):
        resid = np.max(np.abs(pen.matvec(u) - lam * pen.bdiag * u))
        assert resid <= 1e-8 * anorm * np.max(np.abs(u))


def test_rayleigh_quotient_matches_eigenvalue():
    pen = neumann_laplacian(300, length=math.pi, w=1.0)
    for lam, u in eig_lowest(pen, 4):
        quotient = float(u @ pen.matvec(u)) / float(u @ (pen.bdiag * u))
        assert abs(quotient - lam) <= 1e-10 * (1.0 + abs(lam))


def test_eig_validation():
    pen = dirichlet_laplacian(10)
    with pytest.raises(ValueError):
        eig_lowest(pen, 0)
    with pytest.raises(ValueError):
        eig_lowest(pen, pen.size + 1)
    with pytest.raises(ValueError):
        TridiagonalPencil([1.0, 1.0], [0.0], [1.0, -1.0])


def test_solve_plain_matches_dense():
    pen = dirichlet_laplacian(60, w=1.5)
    rhs = np.sin(np.linspace(0.3, 2.0, pen.size))
    u = solve_deflated(pen, 0.0, rhs)
    dense = np.diag(pen.diag) + np.diag(pen.off, 1) + np.diag(pen.off, -1)
    expect = np.linalg.solve(dense, -pen.bdiag * rhs)
    assert np.max(np.abs(u - expect)) < 1e-10 * np.max(np.abs(expect))


def test_solve_circle_constant():
    # (Delta + 1/rho^2) u = 1 on the circle has the constant solution rho^2;
    # the even reflection half is a free interval with constant potential
    rho = 1.7
    m = 300
    pen = neumann_laplacian(m, length=math.pi * rho, w=1.0 / rho**2)
    u = solve_deflated(pen, 0.0, np.ones(pen.size))
    assert np.max(np.abs(u - rho**2)) < 1e-9


def test_solve_deflated_singular_kernel():
    pen = neumann_laplacian(250, length=2.0)  # free Laplacian: constants in kernel
    kernel = eig_lowest(pen, 1)[0][1]
    s = np.linspace(0.0, 2.0, pen.size)
    u = solve_deflated(pen, 0.0, np.cos(math.pi * s), [kernel])
    # B-orthogonality of the result to the deflated vector
    assert abs(u @ (pen.bdiag * kernel)) <= 1e-10
    # residual of the projected system
    resid = pen.matvec(u) + pen.bdiag * np.cos(math.pi * s)
    proj = resid - (kernel @ (pen.bdiag * resid)) * kernel
    assert np.max(np.abs(proj)) <= 1e-10 * pen.norm_inf() * max(np.max(np.abs(u)), 1.0)


def test_refine_extrapolate_dirichlet():
    res = refine_extrapolate(
        lambda m: eig_lowest(dirichlet_laplacian(m), 1)[0][0], 100, 3
    )
    assert abs(res.order - 2.0) < 0.2
    assert abs(res.value - math.pi**2) < abs(res.values[-1] - math.pi**2)
    assert abs(res.value - math.pi**2) < 1e-6


def test_refine_extrapolate_exact_value_not_degraded():
    # constant-coefficient Neumann: lowest eigenvalue is -w at any grid
    res = refine_extrapolate(
        lambda m: eig_lowest(neumann_laplacian(m, length=2.0, w=0.7), 1)[0][0], 50, 3
    )
    assert abs(res.value + 0.7) < 1e-8


def test_refine_extrapolate_warns_nonmonotone():
    values = {100: 1.0, 200: 1.5, 400: 0.2}
    with pytest.warns(UserWarning):
        res = refine_extrapolate(lambda m: values[m], 100, 3)
    assert res.value == 0.2


def test_refine_extrapolate_levels_validation():
    with pytest.raises(ValueError):
        refine_extrapolate(lambda m: 0.0, 100, 2)


def test_solver_config_defaults():
    cfg = SolverConfig()
    assert cfg.eig_tol == 1e-10
    assert cfg.residual_cap == 1e-8
    assert cfg.max_restarts == 5
