"""Volume-constrained stability verdicts.

The decision procedure for a closed CMC hypersurface runs on the two
lowest eigenvalues of the stability operator (convention ``Lu + lam u = 0``):

* lam1 >= 0: strongly stable (case I);
* lam2 < 0: unstable (case V);
* lam1 < 0 <= lam2: solve ``Lu = 1`` (orthogonally to the kernel of L if
  lam2 = 0) and read the sign of ``int u``; a kernel eigenfunction with
  nonvanishing mean makes the surface unstable outright (case III).

Numerically every sharp (in)equality gets a tolerance band ``eps``;
verdicts inside a band come back Marginal with both branches recorded
rather than silently picking a side.

Cylinders over a stable closed base of first eigenvalue ``lam1`` in a slab
of width ``l`` are stable exactly when ``lam1 + (pi/l)^2 >= 0``; for tubes
over geodesic spheres that criterion collapses to the closed form
``pi sn_k(rho) >= sqrt(n-1) l``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Protocol, Sequence

import numpy as np

from ._serialize import canonical_json
from .errors import GeometryDomainError
from .geometry import GeodesicSphere, SpaceForm, sn_ct, sphere_potential, sphere_spectrum
from .operators import (
    BoundaryCondition,
    Spectrum,
    assemble_mode,
    discretize,
    merge_modes,
)
from .spectral import (
    DEFAULT_CONFIG,
    SolverConfig,
    TridiagonalPencil,
    eig_lowest,
    solve_deflated,
    sturm_count,
)

STRONGLY_STABLE = "StronglyStable"
STABLE = "Stable"
UNSTABLE = "Unstable"
MARGINAL = "Marginal"


def orbit_volume(n: int) -> float:
    """Volume of the unit orbit sphere S^{n-1}."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


@dataclass(frozen=True)
class StabilityVerdict:
    """Decision record; diagnostics carry the quantities the branch used."""

    status: str
    case: str
    lambda1: float | None
    lambda2: float | None
    int_u: float | None
    epsilon: float
    provenance: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "status": self.status,
            "case": self.case,
            "lambda1": self.lambda1,
            "lambda2": self.lambda2,
            "int_u": self.int_u,
            "epsilon": self.epsilon,
            "provenance": self.provenance,
        }

    def to_json(self) -> str:
        return canonical_json(self.as_dict())


@dataclass(frozen=True)
class CapillaryBoundary:
    """Contact data at one boundary circle of a capillary surface."""

    theta: float
    II_nn: float
    sigma_nn: float

    def __post_init__(self):
        if not 0.0 < self.theta < math.pi:
            raise GeometryDomainError("contact angle must lie in (0, pi)")

    @property
    def q(self) -> float:
        return capillary_q(self)


def capillary_q(boundary: CapillaryBoundary) -> float:
    """Robin coefficient ``q = II(nu,nu)/sin(theta) + cot(theta) sigma(nu,nu)``."""
    s = math.sin(boundary.theta)
    if abs(s) < 1e-12:
        raise GeometryDomainError("sin(theta) underflow in Robin coefficient")
    return boundary.II_nn / s + (math.cos(boundary.theta) / s) * boundary.sigma_nn


@dataclass(frozen=True)
class KernelFunction:
    """Near-kernel eigenfunction handed to the decision procedure."""

    lam: float
    integral: float
    norm: float
    vector: np.ndarray | None = None
    deflatable: bool = False


@dataclass(frozen=True)
class UnitSolve:
    int_u: float
    norm_u: float
    u: np.ndarray | None


class KoisoContext(Protocol):
    """Solve capability the decision procedure needs besides the spectrum."""

    @property
    def area(self) -> float: ...

    def near_kernel(self, eps: float) -> list[KernelFunction]: ...

    def solve_unit(self, deflate: Sequence[KernelFunction]) -> UnitSolve: ...


@dataclass(frozen=True)
class ModeHandle:
    """One radial problem feeding a spectral Koiso context.

    ``factor`` converts B-weighted sums into surface integrals.  Handles
    whose eigenfunctions integrate to zero exactly (orbit harmonics of
    degree >= 1, odd reflection families) set ``exact_zero_integral``.
    """

    pencil: TridiagonalPencil
    factor: float
    exact_zero_integral: bool = False
    deflatable: bool = False


class SpectralKoisoContext:
    """Koiso context backed by discretized radial problems.

    ``solve_handle`` must carry the rotationally invariant functions
    (the mode-0 problem); the unit solve and the kernel deflation happen
    there.  Additional handles participate only in the near-kernel scan.
    """

    def __init__(
        self,
        solve_handle: ModeHandle,
        extra_handles: Sequence[ModeHandle] = (),
        config: SolverConfig = DEFAULT_CONFIG,
    ):
        self.solve_handle = solve_handle
        self.extra_handles = tuple(extra_handles)
        self.config = config

    @property
    def area(self) -> float:
        p = self.solve_handle.pencil
        return self.solve_handle.factor * float(np.sum(p.bdiag))

    def _kernel_of(self, handle: ModeHandle, eps: float) -> list[KernelFunction]:
        pencil = handle.pencil
        below = sturm_count(pencil, eps)
        if below == 0:
            return []
        out = []
        for lam, g in eig_lowest(pencil, min(below, pencil.size), config=self.config):
            if lam < -eps:
                continue
            if handle.exact_zero_integral:
                integral = 0.0
            else:
                integral = handle.factor * float(np.sum(pencil.bdiag * g))
            norm = math.sqrt(handle.factor * float(g @ (pencil.bdiag * g)))
            out.append(
                KernelFunction(lam, integral, norm, vector=g, deflatable=handle.deflatable)
            )
        return out

    def near_kernel(self, eps: float) -> list[KernelFunction]:
        kernel = self._kernel_of(self.solve_handle, eps)
        for handle in self.extra_handles:
            kernel.extend(self._kernel_of(handle, eps))
        return kernel

    def solve_unit(self, deflate: Sequence[KernelFunction]) -> UnitSolve:
        pencil = self.solve_handle.pencil
        vectors = [k.vector for k in deflate if k.deflatable and k.vector is not None]
        ones = np.ones(pencil.size)
        u = solve_deflated(pencil, 0.0, ones, vectors, config=self.config)
        int_u = self.solve_handle.factor * float(np.sum(pencil.bdiag * u))
        norm_u = math.sqrt(self.solve_handle.factor * float(u @ (pencil.bdiag * u)))
        return UnitSolve(int_u, norm_u, u)


class ClosedFormSphereContext:
    """Exact context for a geodesic sphere: constants solve Lu = 1.

    The kernel band (degree-1 harmonics) integrates to zero by symmetry
    and is orthogonal to constants, so no numerical deflation is needed:
    u = 1/W and ``int u = area / W``.
    """

    def __init__(self, sphere: GeodesicSphere):
        self.sphere = sphere
        self.w = sphere_potential(sphere)
        sf = sphere.space_form
        sn, _ = sn_ct(sf, sphere.rho)
        self._area = orbit_volume(sf.n) * sn ** (sf.n - 1)

    @property
    def area(self) -> float:
        return self._area

    def near_kernel(self, eps: float) -> list[KernelFunction]:
        spec = sphere_spectrum(self.sphere, count=8)
        out = []
        for e in spec.entries:
            if abs(e.lam) <= eps and e.mode_j >= 1:
                for _ in range(e.multiplicity):
                    out.append(KernelFunction(e.lam, 0.0, 1.0, vector=None, deflatable=False))
        return out

    def solve_unit(self, deflate: Sequence[KernelFunction]) -> UnitSolve:
        u_const = 1.0 / self.w
        return UnitSolve(self._area * u_const, abs(u_const) * math.sqrt(self._area), None)


def default_epsilon(lambda1: float) -> float:
    return 1e-7 * (1.0 + abs(lambda1))


def koiso_decide(
    spectrum: Spectrum,
    context: KoisoContext,
    eps: float | None = None,
) -> StabilityVerdict:
    """Run the closed-surface stability decision on a computed spectrum.

    Branches on (lam1, lam2) with tolerance band ``eps``; inside the
    lam1 band the verdict is Marginal and both branch outcomes are kept
    in the provenance.
    """
    if len(spectrum.eigenvalues(2)) < 2:
        raise ValueError("spectrum must cover at least the two lowest eigenvalues")
    lam1 = spectrum.lambda1
    lam2 = spectrum.lambda2
    if eps is None:
        eps = default_epsilon(lam1)

    if lam2 < -eps:
        return StabilityVerdict(UNSTABLE, "V", lam1, lam2, None, eps)
    if lam1 > eps:
        return StabilityVerdict(STRONGLY_STABLE, "I", lam1, lam2, None, eps)
    if abs(lam1) <= eps:
        weak = _negative_lambda1_branch(spectrum, context, eps, lam1, lam2)
        return StabilityVerdict(
            MARGINAL, "I", lam1, lam2, weak.int_u, eps,
            provenance={
                "band": "lambda1",
                "branch_strongly_stable": STRONGLY_STABLE,
                "branch_negative_lambda1": {"status": weak.status, "case": weak.case},
            },
        )
    return _negative_lambda1_branch(spectrum, context, eps, lam1, lam2)


def _negative_lambda1_branch(spectrum, context, eps, lam1, lam2) -> StabilityVerdict:
    """Cases II-IV: lam1 < 0 <= lam2 up to the tolerance band."""
    kernel = context.near_kernel(eps) if lam2 <= eps else []
    area = context.area
    case = "IV" if (kernel or abs(lam2) <= eps) else "II"
    for g in kernel:
        if abs(g.integral) > eps * math.sqrt(area) * g.norm:
            return StabilityVerdict(
                UNSTABLE, "III", lam1, lam2, None, eps,
                provenance={"kernel_integral": g.integral, "kernel_lambda": g.lam},
            )
    solve = context.solve_unit([g for g in kernel if g.deflatable])
    scale = eps * math.sqrt(area) * solve.norm_u
    prov = {"int_u_scale": scale, "kernel_dim": len(kernel)}
    if solve.int_u > scale:
        status = STABLE
    elif solve.int_u < -scale:
        status = UNSTABLE
    else:
        status = MARGINAL
        prov["band"] = "int_u"
    return StabilityVerdict(status, case, lam1, lam2, solve.int_u, eps, provenance=prov)


def cylinder_stable(
    lambda1_base: float,
    base_verdict: StabilityVerdict | str,
    l: float,
    eps: float | None = None,
) -> StabilityVerdict:
    """Stability of the free-boundary cylinder over a closed base.

    An unstable base makes the cylinder unstable outright; over a stable
    base the criterion is ``lam1(base) + (pi/l)^2 >= 0`` with the equality
    case resolving to Stable.
    """
    if l <= 0:
        raise GeometryDomainError("slab width must be positive")
    if eps is None:
        eps = default_epsilon(lambda1_base)
    base_status = base_verdict.status if isinstance(base_verdict, StabilityVerdict) else str(base_verdict)
    criterion = lambda1_base + (math.pi / l) ** 2
    prov = {"criterion": criterion, "l": l, "base_status": base_status}
    if abs(criterion) <= eps:
        prov["within_band"] = True
    if base_status == UNSTABLE:
        return StabilityVerdict(UNSTABLE, "cylinder", lambda1_base, None, None, eps, prov)
    status = STABLE if criterion >= -eps else UNSTABLE
    return StabilityVerdict(status, "cylinder", lambda1_base, None, None, eps, prov)


def tube_verdict(kappa: int, n: int, rho: float, l: float) -> StabilityVerdict:
    """Closed-form tube criterion: stable iff ``pi sn_k(rho) >= sqrt(n-1) l``."""
    sf = SpaceForm(kappa, n)
    sn, _ = sn_ct(sf, rho)
    if l <= 0:
        raise GeometryDomainError("slab width must be positive")
    margin = math.pi * sn - math.sqrt(n - 1) * l
    lam1 = -(n - 1) / sn**2
    status = STABLE if margin >= 0.0 else UNSTABLE
    return StabilityVerdict(
        status, "closed-form", lam1, None, None, 0.0,
        provenance={
            "margin": margin,
            "threshold_l": math.pi * sn / math.sqrt(n - 1),
            "base_status": STABLE,
        },
    )


def tube_threshold_numeric(kappa: int, n: int, rho: float, tol: float = 1e-10) -> float:
    """Critical slab width via the base sphere's first eigenvalue.

    Computes ``lam1`` of the geodesic sphere spectrum and returns
    ``pi / sqrt(-lam1)``, verifying that the cylinder criterion actually
    flips there.  A nonnegative ``lam1`` means no finite threshold.
    """
    sphere = GeodesicSphere(SpaceForm(kappa, n), rho)
    lam1 = sphere_spectrum(sphere, count=1).lambda1
    if lam1 >= 0.0:
        return math.inf
    l_star = math.pi / math.sqrt(-lam1)
    below = cylinder_stable(lam1, STABLE, l_star * (1.0 - 4.0 * tol), eps=0.0)
    above = cylinder_stable(lam1, STABLE, l_star * (1.0 + 4.0 * tol), eps=0.0)
    if below.status != STABLE or above.status != UNSTABLE:
        raise RuntimeError("cylinder criterion does not flip at the computed threshold")
    return l_star


def nonexistence_width(kappa: float) -> float:
    """Slab width ``4 pi / sqrt(3 kappa)`` beyond which no stable connecting
    free-boundary CMC surface exists over a base with curvature >= kappa > 0."""
    if kappa <= 0:
        raise GeometryDomainError("the nonexistence width needs kappa > 0")
    return 4.0 * math.pi / math.sqrt(3.0 * kappa)


def rosenberg_bound(kappa_eff: float) -> tuple[float, float]:
    """Distance-to-boundary and diameter bounds ``(2 pi, 4 pi)/sqrt(3 kappa_eff)``.

    ``kappa_eff`` is a positive lower bound for ``3 H^2 + S`` along the
    surface (S the ambient scalar curvature).
    """
    if kappa_eff <= 0:
        raise GeometryDomainError("bounds need a positive curvature quantity")
    root = math.sqrt(3.0 * kappa_eff)
    return 2.0 * math.pi / root, 4.0 * math.pi / root


def curve_lambda1_upper(h, K, ds, kappa: float | None = None) -> float:
    """Rayleigh upper bound for lam1 of a closed curve's stability operator.

    Uses the constant test function: ``-int (h^2 + K) ds / int ds`` for a
    curve of geodesic curvature ``h`` in a surface of Gauss curvature ``K``.
    When a lower curvature bound ``kappa <= K`` is declared the result is
    checked against the guaranteed ``<= -kappa``.
    """
    h = np.asarray(h, dtype=float)
    K = np.asarray(K, dtype=float)
    w = np.broadcast_to(np.asarray(ds, dtype=float), h.shape)
    if h.shape != K.shape or np.any(w <= 0):
        raise ValueError("need matching samples and positive lengths")
    value = -float(np.sum((h**2 + K) * w) / np.sum(w))
    if kappa is not None:
        if float(K.min()) < kappa - 1e-12 * (1.0 + abs(kappa)):
            raise ValueError("declared curvature bound exceeds a sample")
        if value > -kappa + 1e-10 * (1.0 + abs(kappa)):
            raise RuntimeError("Rayleigh bound failed its guaranteed inequality")
    return value


def surface_koiso_context(
    surface,
    bc_bottom: BoundaryCondition,
    bc_top: BoundaryCondition,
    m: int,
    config: SolverConfig = DEFAULT_CONFIG,
) -> SpectralKoisoContext:
    """Mode-0 context for a rotational surface.

    Orbit modes of degree >= 1 integrate to zero over the orbit, so they
    can neither witness case III nor obstruct the rotationally invariant
    unit solve; only the mode-0 pencil is carried.
    """
    n = surface.profile.n
    pencil = discretize(assemble_mode(surface, 0, bc_bottom, bc_top, m))
    handle = ModeHandle(pencil, factor=orbit_volume(n), deflatable=True)
    return SpectralKoisoContext(handle, config=config)


def dirichlet_kernel_diagnostic(
    surface, m: int, config: SolverConfig = DEFAULT_CONFIG
) -> dict:
    """Mode-0 Dirichlet eigenvalue nearest zero and its overlap with v = cos(phi).

    A stable non-cylindrical free-boundary surface has vertical-translation
    Jacobi field v vanishing on the boundary, so the Dirichlet problem is
    expected to show a zero eigenvalue carried by v.
    """
    bc = BoundaryCondition.dirichlet()
    problem = assemble_mode(surface, 0, bc, bc, m)
    pencil = discretize(problem)
    below = sturm_count(pencil, 0.0)
    k = min(below + 1, pencil.size)
    pairs = eig_lowest(pencil, max(k, 1), config=config)
    lam, g = min(pairs, key=lambda p: abs(p[0]))
    _, _, _, v = surface.fields_on_grid(m)
    v_active = v[pencil.nodes]
    gg = float(g @ (pencil.bdiag * g))
    vv = float(v_active @ (pencil.bdiag * v_active))
    gv = float(g @ (pencil.bdiag * v_active))
    overlap = abs(gv) / math.sqrt(gg * vv) if vv > 0 else 0.0
    return {"lambda": lam, "overlap_v": overlap, "m": m}


def decide_surface(
    surface,
    bc: str | tuple[BoundaryCondition, BoundaryCondition] = "free",
    m: int = 512,
    k_per_mode: int = 8,
    count: int = 8,
    eps: float | None = None,
    config: SolverConfig = DEFAULT_CONFIG,
    with_dirichlet_diagnostic: bool | None = None,
) -> StabilityVerdict:
    """Full numerical pipeline: modes -> spectrum -> decision.

    ``bc`` is "free" (Neumann ends, q = 0) or an explicit pair of boundary
    conditions.  For non-cylindrical surfaces the mode-0 Dirichlet kernel
    diagnostic is attached to the provenance.
    """
    if bc == "free":
        bcs = (BoundaryCondition.neumann(), BoundaryCondition.neumann())
    elif isinstance(bc, tuple):
        bcs = bc
    else:
        raise ValueError(f"unknown boundary policy {bc!r}")
    eps_guess = eps if eps is not None else 1e-7
    spectrum = merge_modes(
        surface, bcs[0], bcs[1], m,
        k_per_mode=k_per_mode, count=count, stop_above=2.0 * eps_guess, config=config,
    )
    context = surface_koiso_context(surface, bcs[0], bcs[1], m, config=config)
    verdict = koiso_decide(spectrum, context, eps=eps)
    prov = dict(verdict.provenance)
    prov.update({
        "grid_m": m,
        "modes": sorted({e.mode_j for e in spectrum.entries}),
        "is_cylinder": surface.is_cylinder,
    })
    if with_dirichlet_diagnostic is None:
        with_dirichlet_diagnostic = not surface.is_cylinder
    if with_dirichlet_diagnostic:
        prov["dirichlet_kernel"] = dirichlet_kernel_diagnostic(surface, m, config=config)
    return StabilityVerdict(
        verdict.status, verdict.case, verdict.lambda1, verdict.lambda2,
        verdict.int_u, verdict.epsilon, provenance=prov,
    )
