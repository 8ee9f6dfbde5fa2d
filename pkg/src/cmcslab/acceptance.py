"""Acceptance battery: one callable per criterion, aggregated by run_all.

Each criterion returns a CriterionResult with a pass flag and a short
numeric summary.  The CLI ``verify`` command runs the battery and exits
nonzero when anything fails; ``fast=True`` shrinks grids for a quick
plumbing check without changing any tolerance.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .geometry import GeodesicSphere, SpaceForm, WarpedSlab, slice_shape, sn_ct, sphere_spectrum
from .operators import (
    BoundaryCondition,
    Spectrum,
    SpectrumEntry,
    SturmLiouvilleProblem,
    assemble_mode,
    circle_factor_spectrum,
    cylinder_free_spectrum,
    discretize,
    merge_modes,
)
from .profile import cylinder_surface, shoot_profiles
from .spectral import eig_lowest, refine_extrapolate, solve_deflated, sturm_count
from .stability import (
    CapillaryBoundary,
    ClosedFormSphereContext,
    ModeHandle,
    SpectralKoisoContext,
    StabilityVerdict,
    capillary_q,
    curve_lambda1_upper,
    cylinder_stable,
    decide_surface,
    dirichlet_kernel_diagnostic,
    koiso_decide,
    nonexistence_width,
    orbit_volume,
    rosenberg_bound,
    tube_threshold_numeric,
    tube_verdict,
)

NEU = BoundaryCondition.neumann()
DIR = BoundaryCondition.dirichlet()


@dataclass(frozen=True)
class CriterionResult:
    name: str
    passed: bool
    detail: str
    elapsed: float


def _result(name, t0, passed, detail) -> CriterionResult:
    return CriterionResult(name, bool(passed), detail, time.time() - t0)


# ----------------------------------------------------------------------
# shared builders


def round_sphere_problems(rho: float, m: int):
    """Mode-0/mode-1 problems of the closed round sphere S^2(rho) in R^3.

    The sphere is the pole-to-pole rotational profile r = rho sin(s/rho)
    over [0, pi rho] in R^2 x R, with constant potential 2/rho^2.
    """
    s = np.linspace(0.0, math.pi * rho, m + 1)
    r = rho * np.sin(s / rho)
    r[0] = r[-1] = 0.0
    w = np.full_like(s, 2.0 / rho**2)
    mode0 = SturmLiouvilleProblem(grid=s, p=r, w_pot=w, mu=0.0,
                                  bc_bottom=NEU, bc_top=NEU, rho=r)
    mode1 = SturmLiouvilleProblem(grid=s, p=r, w_pot=w, mu=1.0,
                                  bc_bottom=DIR, bc_top=DIR, rho=r)
    return mode0, mode1


def sphere_koiso_level(rho: float, m: int):
    """One mesh level of the numerical Koiso decision for the round sphere."""
    mode0, mode1 = round_sphere_problems(rho, m)
    pen0, pen1 = discretize(mode0), discretize(mode1)
    entries = []
    for idx, (lam, _) in enumerate(eig_lowest(pen0, 3)):
        entries.append(SpectrumEntry(lam, 1, 0, idx))
    for idx, (lam, _) in enumerate(eig_lowest(pen1, 2)):
        entries.append(SpectrumEntry(lam, 2, 1, idx))
    spectrum = Spectrum(tuple(entries))
    context = SpectralKoisoContext(
        ModeHandle(pen0, factor=orbit_volume(2), deflatable=True),
        extra_handles=(ModeHandle(pen1, factor=orbit_volume(2), exact_zero_integral=True),),
    )
    eps = 3.0 * (math.pi * rho / m) ** 2
    verdict = koiso_decide(spectrum, context, eps=eps)
    return verdict


def circle_koiso_level(rho: float, m: int):
    """One mesh level for the round circle, via reflection splitting.

    Periodic functions on the circle of circumference 2 pi rho decompose
    into even (Neumann) and odd (Dirichlet) families on the half interval
    [0, pi rho]; surface integrals carry the doubling factor 2.
    """
    s = np.linspace(0.0, math.pi * rho, m + 1)
    ones = np.ones_like(s)
    w = np.full_like(s, 1.0 / rho**2)
    even = SturmLiouvilleProblem(grid=s, p=ones, w_pot=w, mu=0.0,
                                 bc_bottom=NEU, bc_top=NEU)
    odd = SturmLiouvilleProblem(grid=s, p=ones, w_pot=w, mu=0.0,
                                bc_bottom=DIR, bc_top=DIR)
    pen_e, pen_o = discretize(even), discretize(odd)
    entries = []
    for idx, (lam, _) in enumerate(eig_lowest(pen_e, 3)):
        entries.append(SpectrumEntry(lam, 1, 0, idx))
    for idx, (lam, _) in enumerate(eig_lowest(pen_o, 2)):
        entries.append(SpectrumEntry(lam, 1, 1, idx))
    spectrum = Spectrum(tuple(entries))
    context = SpectralKoisoContext(
        ModeHandle(pen_e, factor=2.0, deflatable=True),
        extra_handles=(ModeHandle(pen_o, factor=2.0, exact_zero_integral=True),),
    )
    eps = 3.0 * (math.pi * rho / m) ** 2
    return koiso_decide(spectrum, context, eps=eps)


_BRIDGES: dict = {}


def bridge_surface(kappa: int):
    """Non-cylindrical free-boundary bridge over the radius-1 cylinder (n=2).

    Bridges bifurcate off the cylinder at the critical width pi sn_k(1);
    at 0.9 of it a half-period bridge exists with the starting radius
    inside (0.3, 0.97).
    """
    if kappa not in _BRIDGES:
        sn, ct = {-1: (math.sinh(1.0), math.cosh(1.0) / math.sinh(1.0)),
                  0: (1.0, 1.0),
                  1: (math.sin(1.0), math.cos(1.0) / math.sin(1.0))}[kappa]
        surfaces = shoot_profiles(
            kappa, 2, ct / 2.0, 0.9 * math.pi * sn, (0.3, 0.97),
            scan=48, samples=4096, tol=1e-10,
        )
        _BRIDGES[kappa] = next(s for s in surfaces if not s.is_cylinder)
    return _BRIDGES[kappa]


def jacobi_residual(surface, m: int) -> float:
    """Max-norm of the mode-0 Dirichlet stencil applied to v = cos(phi)."""
    pencil = discretize(assemble_mode(surface, 0, DIR, DIR, m))
    _, _, _, v = surface.fields_on_grid(m)
    va = v[pencil.nodes]
    return float(np.max(np.abs(pencil.matvec(va) / pencil.bdiag)))


# ----------------------------------------------------------------------
# criteria


def criterion_1(fast: bool = False) -> CriterionResult:
    """Tube thresholds match pi sn_k(rho)/sqrt(n-1) to 1e-6 relative."""
    t0 = time.time()
    worst = 0.0
    checked = 0
    for kappa in (-1, 0, 1):
        radii = np.linspace(0.15, 2.95, 12) if kappa == 1 else np.linspace(0.1, 3.0, 12)
        for n in (2, 3, 4):
            for rho in radii:
                sn, _ = sn_ct(SpaceForm(kappa, n), float(rho))
                closed = math.pi * sn / math.sqrt(n - 1)
                numeric = tube_threshold_numeric(kappa, n, float(rho))
                worst = max(worst, abs(numeric - closed) / closed)
                checked += 1
    return _result("1 tube thresholds", t0, worst <= 1e-6,
                   f"{checked} radii, max rel err {worst:.2e}")


def criterion_2(fast: bool = False) -> CriterionResult:
    """Numerical cylinder verdicts agree with the closed criterion off-band."""
    t0 = time.time()
    if fast:
        rhos, ls, m = np.linspace(0.7, 1.3, 4), np.linspace(2.0, 4.4, 6), 600
    else:
        rhos, ls, m = np.linspace(0.6, 1.4, 10), np.linspace(1.8, 4.6, 20), 2000
    band = 1e-4
    points = in_band = disagree = 0
    for rho in rhos:
        lam1 = -1.0 / rho**2
        for l in ls:
            points += 1
            criterion = lam1 + (math.pi / l) ** 2
            if abs(criterion) <= band:
                in_band += 1
                continue
            closed = cylinder_stable(lam1, "Stable", float(l), eps=0.0)
            numerical = decide_surface(
                cylinder_surface(0, 2, float(rho), float(l)), m=m,
                with_dirichlet_diagnostic=False,
            )
            if numerical.status != closed.status:
                disagree += 1
    return _result("2 cylinder criterion", t0, disagree == 0 and points >= (24 if fast else 200),
                   f"{points} points, {in_band} in band {band:g}, {disagree} disagreements (m={m})")


def criterion_3(fast: bool = False) -> CriterionResult:
    """Round sphere and circle decide Stable via case IV with the exact int u."""
    t0 = time.time()
    rho = 1.3
    ok = True
    notes = []

    # closed-form (oracle) routes
    sphere = GeodesicSphere(SpaceForm(0, 3), rho)
    v_sph = koiso_decide(sphere_spectrum(sphere, 8), ClosedFormSphereContext(sphere))
    circle = GeodesicSphere(SpaceForm(0, 2), rho)
    v_cir = koiso_decide(sphere_spectrum(circle, 8), ClosedFormSphereContext(circle))
    for v, exact, tag in ((v_sph, 2 * math.pi * rho**4, "sphere"),
                          (v_cir, 2 * math.pi * rho**3, "circle")):
        rel = abs(v.int_u - exact) / exact
        ok &= v.status == "Stable" and v.case == "IV" and rel <= 1e-12
        notes.append(f"{tag}-closed rel {rel:.1e}")

    # numerical routes with extrapolation
    base = 128 if fast else 256
    cases = []
    for v_m in (sphere_koiso_level(rho, m) for m in (base, 2 * base, 4 * base)):
        ok &= v_m.status == "Stable" and v_m.case == "IV"
        cases.append(v_m)
    ext = refine_extrapolate(lambda m: sphere_koiso_level(rho, m).int_u, base, 3)
    rel_sphere = abs(ext.value - 2 * math.pi * rho**4) / (2 * math.pi * rho**4)
    ok &= rel_sphere <= 1e-6
    notes.append(f"sphere-numeric rel {rel_sphere:.1e}")

    vc = circle_koiso_level(rho, 256)
    ext_c = refine_extrapolate(lambda m: circle_koiso_level(rho, m).int_u, 128, 3)
    rel_circle = abs(ext_c.value - 2 * math.pi * rho**3) / (2 * math.pi * rho**3)
    ok &= vc.status == "Stable" and vc.case == "IV" and rel_circle <= 1e-6
    notes.append(f"circle-numeric rel {rel_circle:.1e}")
    return _result("3 Koiso worked cases", t0, ok, ", ".join(notes))


def criterion_4(fast: bool = False) -> CriterionResult:
    """Closed-form product spectra match the direct mode solver."""
    t0 = time.time()
    rho, l = 1.1, 2.6
    m = 600 if fast else 2000
    base = sphere_spectrum(GeodesicSphere(SpaceForm(0, 2), rho), 24)
    closed = cylinder_free_spectrum(base, l, 20)
    direct = merge_modes(cylinder_surface(0, 2, rho, l), NEU, NEU, m,
                         k_per_mode=8, count=20)
    a = direct.eigenvalues(20)
    b = closed.eigenvalues(20)
    worst = float(np.max(np.abs(a - b) / (1.0 + np.abs(b))))
    ok = worst <= 1e-3

    r = l / math.pi
    circ = circle_factor_spectrum(base, r, 20)
    ok &= circ.lambda1 == base.lambda1
    lam2_formula = min(base.lambda1 + (1.0 / r) ** 2, base.lambda2)
    ok &= circ.lambda2 == lam2_formula

    cyl_by_key = {(e.mode_j, e.index_k): e for e in closed.entries}
    doubling_ok = True
    for e in circ.entries:
        mate = cyl_by_key.get((e.mode_j, e.index_k))
        if mate is None:
            continue
        expect = mate.multiplicity * (1 if e.index_k == 0 else 2)
        doubling_ok &= e.multiplicity == expect
        doubling_ok &= abs(e.lam - mate.lam) <= 1e-12 * (1.0 + abs(mate.lam))
    ok &= doubling_ok
    return _result("4 spectrum formulas", t0, ok,
                   f"20 eigenvalues, max rel dev {worst:.2e} (m={m}), doubling {doubling_ok}")


def criterion_5(fast: bool = False) -> CriterionResult:
    """The vertical Jacobi field is a Dirichlet kernel element on bridges."""
    t0 = time.time()
    base = 150 if fast else 250
    ms = (base, 2 * base, 4 * base)
    ok = True
    notes = []
    for kappa in (-1, 0, 1):
        surf = bridge_surface(kappa)
        v_ends = max(abs(surf.v[0]), abs(surf.v[-1]))
        res = [jacobi_residual(surf, m) for m in ms]
        ratios = [res[i] / res[i + 1] for i in range(2)]
        ext = refine_extrapolate(
            lambda m: dirichlet_kernel_diagnostic(surf, m)["lambda"], base, 3
        )
        overlap = dirichlet_kernel_diagnostic(surf, ms[-1])["overlap_v"]
        good = (
            v_ends <= 1e-8
            and all(3.0 <= r <= 5.0 for r in ratios)
            and abs(ext.value) <= 1e-6
            and overlap >= 0.999
        )
        ok &= good
        notes.append(
            f"k={kappa}: ends {v_ends:.1e}, ratios {ratios[0]:.2f}/{ratios[1]:.2f}, "
            f"lam {ext.value:.1e}, overlap {overlap:.5f}"
        )
    return _result("5 Jacobi field v", t0, ok, "; ".join(notes))


def criterion_6(fast: bool = False) -> CriterionResult:
    """Width bounds, the kappa=+1 consistency scan, and the curve bound."""
    t0 = time.time()
    ok = True
    w1 = nonexistence_width(1.0)
    ok &= w1 == 4.0 * math.pi / math.sqrt(3.0)
    ok &= abs(w1 - 7.2551974569368714) <= 1e-12
    for kap in (1.0, 3.0, 0.7):
        dist, diam = rosenberg_bound(kap)
        ok &= dist == 2.0 * math.pi / math.sqrt(3.0 * kap)
        ok &= diam == 4.0 * math.pi / math.sqrt(3.0 * kap)

    side = 32 if fast else 100
    violations = 0
    stable_count = 0
    for rho in np.linspace(0.03, 3.11, side):
        for l in np.linspace(0.05, 7.5, side):
            verdict = tube_verdict(1, 2, float(rho), float(l))
            if verdict.status == "Stable":
                stable_count += 1
                if not (l <= math.pi * math.sin(rho) + 1e-12 and l <= math.pi < w1):
                    violations += 1
    ok &= violations == 0 and stable_count > 0

    rng = np.random.default_rng(20260810)
    curves = 40 if fast else 120
    worst_gap = math.inf
    for _ in range(curves):
        kap = float(rng.uniform(0.3, 2.0))
        length = float(rng.uniform(3.0, 12.0))
        s = np.linspace(0.0, length, 257)[:-1]
        h = sum(rng.normal(0, 0.5) * np.cos(2 * math.pi * k * s / length)
                + rng.normal(0, 0.5) * np.sin(2 * math.pi * k * s / length)
                for k in range(4))
        bump = sum(rng.normal(0, 0.4) * np.cos(2 * math.pi * k * s / length)
                   for k in range(3))
        K = kap + bump**2
        val = curve_lambda1_upper(h, K, length / s.size, kappa=kap)
        worst_gap = min(worst_gap, -kap - val)
        ok &= val <= -kap + 1e-10
    return _result(
        "6 bounds", t0, ok,
        f"scan {side * side} pts, {stable_count} stable, {violations} violations; "
        f"{curves} curves, min slack {worst_gap:.2e}",
    )


def criterion_7(fast: bool = False) -> CriterionResult:
    """Capillary Robin coefficient identities to 1e-12."""
    t0 = time.time()
    ok = True
    worst = 0.0
    for II in (-1.0, 0.0, 0.35, 2.0):
        for sig in (-0.7, 0.0, 1.3):
            q = capillary_q(CapillaryBoundary(math.pi / 2, II, sig))
            worst = max(worst, abs(q - II))
    ok &= worst <= 1e-12

    slab = WarpedSlab.horosphere(2.0)
    q_bot = capillary_q(CapillaryBoundary(math.pi / 2, slice_shape(slab, "bottom"), 0.9))
    q_top = capillary_q(CapillaryBoundary(math.pi / 2, slice_shape(slab, "top"), -0.4))
    ok &= abs(q_bot + 1.0) <= 1e-12 and abs(q_top - 1.0) <= 1e-12

    product = WarpedSlab.product(1.5)
    dev = 0.0
    for theta in np.linspace(0.2, math.pi - 0.2, 9):
        for sig in (-1.1, 0.6):
            q = capillary_q(
                CapillaryBoundary(float(theta), slice_shape(product, "bottom"), sig)
            )
            dev = max(dev, abs(q - sig * math.cos(theta) / math.sin(theta)))
    ok &= dev <= 1e-12
    return _result("7 capillary q", t0, ok,
                   f"orthogonal dev {worst:.1e}, horosphere -/+1, product dev {dev:.1e}")


def _pencil_battery(fast: bool):
    """Representative pencils exercising every assembly path."""
    out = []
    cyl = cylinder_surface(0, 2, 1.0, 2.8)
    for j, bc in ((0, NEU), (1, NEU), (0, DIR)):
        out.append((f"cylinder j={j} {bc.kind}", discretize(assemble_mode(cyl, j, bc, bc, 500)), 4))
    robin = BoundaryCondition.robin(1.0)
    s = np.linspace(0.0, 1.0, 401)
    prob = SturmLiouvilleProblem(grid=s, p=np.ones_like(s), w_pot=np.zeros_like(s),
                                 mu=0.0, bc_bottom=robin, bc_top=robin)
    out.append(("robin interval", discretize(prob), 3))
    mode0, mode1 = round_sphere_problems(1.3, 400)
    out.append(("sphere pole-folded", discretize(mode0), 3))
    out.append(("sphere mode-1", discretize(mode1), 3))
    if not fast:
        bridge = bridge_surface(0)
        out.append(("bridge dirichlet", discretize(assemble_mode(bridge, 0, DIR, DIR, 500)), 3))
    return out


def criterion_8(fast: bool = False, others_passed: bool = True) -> CriterionResult:
    """Residual, Sturm-count and deflation invariants on a pencil battery."""
    t0 = time.time()
    ok = True
    checked = 0
    for name, pencil, k in _pencil_battery(fast):
        pairs = eig_lowest(pencil, k)
        anorm = pencil.norm_inf()
        lams = [lam for lam, _ in pairs]
        for i, (lam, u) in enumerate(pairs):
            resid = float(np.max(np.abs(pencil.matvec(u) - lam * pencil.bdiag * u)))
            ok &= resid <= 1e-8 * anorm * float(np.max(np.abs(u)))
            checked += 1
        for i in range(len(lams) - 1):
            if lams[i + 1] - lams[i] > 1e-9 * (1.0 + abs(lams[i])):
                mid = 0.5 * (lams[i] + lams[i + 1])
                ok &= sturm_count(pencil, mid) == i + 1

    # deflation orthogonality on a singular pencil (free Laplacian kernel)
    s = np.linspace(0.0, 2.0, 301)
    prob = SturmLiouvilleProblem(grid=s, p=np.ones_like(s), w_pot=np.zeros_like(s),
                                 mu=0.0, bc_bottom=NEU, bc_top=NEU)
    pen = discretize(prob)
    kernel = eig_lowest(pen, 1)[0][1]
    rhs = np.sin(math.pi * s)
    u = solve_deflated(pen, 0.0, rhs, [kernel])
    ortho = abs(float(u @ (pen.bdiag * kernel)))
    ok &= ortho <= 1e-10
    ok &= others_passed
    return _result("8 kernel quality", t0, ok,
                   f"{checked} eigenpairs certified, deflation ortho {ortho:.1e}, "
                   f"criteria 1-7 {'pass' if others_passed else 'FAIL'}")


CRITERIA = (
    criterion_1,
    criterion_2,
    criterion_3,
    criterion_4,
    criterion_5,
    criterion_6,
    criterion_7,
)


def run_all(fast: bool = False) -> list[CriterionResult]:
    """Run every acceptance criterion; criterion 8 aggregates the battery."""
    results = [fn(fast) for fn in CRITERIA]
    results.append(criterion_8(fast, others_passed=all(r.passed for r in results)))
    return results
