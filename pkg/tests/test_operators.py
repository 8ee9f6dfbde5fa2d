import math

import numpy as np
import pytest

from cmcslab import (
    BoundaryCondition,
    DegenerateOrbitError,
    GeodesicSphere,
    SpaceForm,
    Spectrum,
    SpectrumEntry,
    SturmLiouvilleProblem,
    assemble_mode,
    circle_factor_spectrum,
    cylinder_free_spectrum,
    cylinder_surface,
    discretize,
    eig_lowest,
    merge_modes,
    sphere_spectrum,
)

NEU = BoundaryCondition.neumann()
DIR = BoundaryCondition.dirichlet()


def flat_problem(m, length=1.0, w=0.0, bc=NEU):
    s = np.linspace(0.0, length, m + 1)
    return SturmLiouvilleProblem(
        grid=s, p=np.ones_like(s), w_pot=np.full_like(s, w), mu=0.0,
        bc_bottom=bc, bc_top=bc,
    )


def test_textbook_single_node_stencil():
    prob = flat_problem(2, bc=DIR)
    pen = discretize(prob)
    h = 0.5
    assert pen.size == 1
    assert pen.diag[0] == pytest.approx(2.0 / h)
    assert pen.bdiag[0] == pytest.approx(h)
    lam = eig_lowest(pen, 1)[0][0]
    assert lam == pytest.approx(2.0 / h**2)


def test_neumann_constant_potential_exact():
    pen = discretize(flat_problem(40, w=0.93))
    # the stencil reproduces the constant eigenfunction exactly
    ones = np.ones(pen.size)
    rayleigh = float(ones @ pen.matvec(ones)) / float(ones @ (pen.bdiag * ones))
    assert abs(rayleigh + 0.93) < 1e-12  # cancellation noise ~ eps * 2/h^2
    lam, u = eig_lowest(pen, 1)[0]
    assert abs(lam + 0.93) < 1e-10
    assert np.max(np.abs(u - u[0])) < 1e-9 * abs(u[0])


def robin_oracle(q, tol=1e-14):
    """Lowest eigenvalue of -u'' on [0,1] with du/dnu = q u: bisection on
    w tanh(w/2) = q for lambda = -w^2."""
    f = lambda w: w * math.tanh(w / 2.0) - q
    lo, hi = 1e-9, 10.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        (lo, hi) = (mid, hi) if f(mid) < 0 else (lo, mid)
    return -(0.5 * (lo + hi)) ** 2


def test_robin_negative_ground_state():
    rob = BoundaryCondition.robin(1.0)
    prob = flat_problem(800, bc=rob)
    lam = eig_lowest(discretize(prob), 1)[0][0]
    oracle = robin_oracle(1.0)
    assert lam < 0.0
    assert abs(lam - oracle) < 1e-4 * abs(oracle)
    assert abs(oracle + 2.3820978778908408) < 1e-12


def test_boundary_condition_parse():
    assert BoundaryCondition.parse("dirichlet").kind == "dirichlet"
    assert BoundaryCondition.parse("neumann") == BoundaryCondition.robin(0.0)
    assert BoundaryCondition.parse("robin:-1.5").q == -1.5
    with pytest.raises(ValueError):
        BoundaryCondition.parse("periodic")


def test_assemble_mode_validations():
    surf = cylinder_surface(0, 2, 1.0, 2.0)
    with pytest.raises(ValueError):
        assemble_mode(surf, 0, NEU, NEU, 8)
    with pytest.raises(ValueError):
        assemble_mode(surf, -1, NEU, NEU, 64)


def test_interior_orbit_degeneracy_rejected():
    s = np.linspace(0.0, 1.0, 33)
    p = np.ones_like(s)
    p[16] = 0.0
    with pytest.raises(DegenerateOrbitError):
        SturmLiouvilleProblem(grid=s, p=p, w_pot=np.zeros_like(s), mu=0.0,
                              bc_bottom=NEU, bc_top=NEU)


def test_pole_needs_dirichlet_for_higher_modes():
    s = np.linspace(0.0, 1.0, 33)
    rho = np.sin(math.pi * s)  # poles at both ends
    with pytest.raises(DegenerateOrbitError):
        SturmLiouvilleProblem(grid=s, p=rho, w_pot=np.zeros_like(s), mu=1.0,
                              bc_bottom=NEU, bc_top=NEU, rho=rho)


def quadrature_form(problem, u):
    """Independent trapezoid evaluation of the mode-restricted index form."""
    g, p, w = problem.grid, problem.p, problem.w_pot
    h = problem.h
    du = np.diff(u) / h
    pmid = 0.5 * (p[:-1] + p[1:])
    stiff = float(np.sum(pmid * du**2) * h)
    weights = np.full_like(g, h)
    weights[0] = weights[-1] = h / 2
    cent = problem.mu / problem.rho**2 if problem.mu > 0 else 0.0
    mass = float(np.sum(weights * p * (cent - w) * u**2))
    total = stiff + mass
    for idx, bc in ((0, problem.bc_bottom), (-1, problem.bc_top)):
        if bc.kind == "robin":
            total -= bc.q * p[idx] * u[idx] ** 2
    return total


def test_discrete_form_matches_index_form():
    surf = cylinder_surface(1, 3, 0.8, 2.0)
    rob = BoundaryCondition.robin(0.4)
    prob = assemble_mode(surf, 2, rob, rob, 200)
    pen = discretize(prob)
    s = prob.grid
    u = np.cos(1.3 * s) + 0.2 * s
    ua = u[pen.nodes]
    assert float(ua @ pen.matvec(ua)) == pytest.approx(quadrature_form(prob, u), rel=1e-12)


def test_cylinder_free_spectrum_flat_base():
    base = Spectrum((SpectrumEntry(0.0, 1, 0, 0),))
    spec = cylinder_free_spectrum(base, 1.0, 4)
    assert np.allclose(spec.eigenvalues(3), [0.0, math.pi**2, 4 * math.pi**2])


def test_cylinder_free_spectrum_circle_base():
    base = sphere_spectrum(GeodesicSphere(SpaceForm(0, 2), 1.0), 5)
    spec = cylinder_free_spectrum(base, math.pi, 6)
    eigs = spec.eigenvalues(4)
    assert eigs[0] == -1.0
    assert np.allclose(eigs[1:], [0.0, 0.0, 0.0], atol=1e-14)


def test_cylinder_free_spectrum_min_is_base_lambda1():
    base = sphere_spectrum(GeodesicSphere(SpaceForm(-1, 3), 0.7), 6)
    for l in (0.5, 2.0, 9.0):
        assert cylinder_free_spectrum(base, l, 8).lambda1 == base.lambda1


def test_circle_factor_flat_base():
    base = Spectrum((SpectrumEntry(0.0, 1, 0, 0),))
    spec = circle_factor_spectrum(base, 1.0, 5)
    assert np.allclose(spec.eigenvalues(5), [0.0, 1.0, 1.0, 4.0, 4.0])


def test_circle_factor_reflection_doubling():
    base = sphere_spectrum(GeodesicSphere(SpaceForm(0, 2), 1.3), 8)
    l = 2.2
    cyl = cylinder_free_spectrum(base, l, 16)
    circ = circle_factor_spectrum(base, l / math.pi, 16)
    cyl_by_key = {(e.mode_j, e.index_k): e for e in cyl.entries}
    for e in circ.entries:
        mate = cyl_by_key.get((e.mode_j, e.index_k))
        if mate is None:
            continue
        assert e.multiplicity == mate.multiplicity * (1 if e.index_k == 0 else 2)
        assert e.lam == pytest.approx(mate.lam, rel=1e-12)


def test_circle_factor_lambda1_is_base():
    base = sphere_spectrum(GeodesicSphere(SpaceForm(1, 2), 0.9), 6)
    assert circle_factor_spectrum(base, 3.7, 8).lambda1 == base.lambda1


def test_merge_modes_matches_product_formula():
    rho, l = 1.0, math.pi
    surf = cylinder_surface(0, 2, rho, l)
    direct = merge_modes(surf, NEU, NEU, 400, count=10)
    base = sphere_spectrum(GeodesicSphere(SpaceForm(0, 2), rho), 10)
    closed = cylinder_free_spectrum(base, l, 10)
    a, b = direct.eigenvalues(10), closed.eigenvalues(10)
    assert np.max(np.abs(a - b) / (1.0 + np.abs(b))) < 1e-4


def test_mode_lowest_eigenvalue_monotone_in_j():
    surf = cylinder_surface(-1, 3, 0.9, 1.7)
    lows = []
    for j in range(4):
        pen = discretize(assemble_mode(surf, j, NEU, NEU, 150))
        lows.append(eig_lowest(pen, 1)[0][0])
    assert all(lows[i] <= lows[i + 1] + 1e-12 for i in range(3))


def test_dirichlet_dominates_neumann():
    surf = cylinder_surface(0, 2, 1.0, 2.0)
    pen_d = discretize(assemble_mode(surf, 0, DIR, DIR, 200))
    pen_n = discretize(assemble_mode(surf, 0, NEU, NEU, 200))
    assert eig_lowest(pen_d, 1)[0][0] >= eig_lowest(pen_n, 1)[0][0]


def test_positive_mode_bound_means_positive_eigenvalues():
    surf = cylinder_surface(0, 2, 1.0, 2.0)
    # mu_j / max(rho)^2 - max(W) > 0 for j >= 2 here
    pen = discretize(assemble_mode(surf, 2, DIR, DIR, 100))
    assert eig_lowest(pen, 1)[0][0] > 0.0


def test_spectrum_csv_roundtrip():
    spec = sphere_spectrum(GeodesicSphere(SpaceForm(-1, 2), 1.1), 7)
    text = spec.to_csv()
    assert text.splitlines()[0] == "lambda,multiplicity,mode_j,index_k"
    back = Spectrum.from_csv(text)
    assert back == spec


def test_spectrum_lambda2_with_multiplicity():
    spec = Spectrum((SpectrumEntry(-1.0, 2, 0, 0), SpectrumEntry(3.0, 1, 1, 0)))
    assert spec.lambda2 == -1.0


def test_mesh_refinement_second_order():
    surf = cylinder_surface(0, 2, 1.0, 2.0)

    def lam_k1(m):
        pen = discretize(assemble_mode(surf, 0, NEU, NEU, m))
        return eig_lowest(pen, 2)[0 + 1][0]

    errors = [abs(lam_k1(m) - ((math.pi / 2.0) ** 2 - 1.0)) for m in (100, 200, 400)]
    ratios = [errors[i] / errors[i + 1] for i in range(2)]
    assert all(3.0 <= r <= 5.0 for r in ratios)
