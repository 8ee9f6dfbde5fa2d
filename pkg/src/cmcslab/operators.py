"""Mode decomposition and discretization of the Jacobi operator.

A rotational hypersurface carries the operator ``L = Delta + W`` with
``W = |sigma|^2 + Ric(N)``.  Separating an orbit harmonic of degree ``j``
leaves the radial operator

    L_j u = rho^{1-n} (rho^{n-1} u')' - mu_j rho^{-2} u + W u,

with ``mu_j = j (j + n - 2)``.  Eigenvalues follow the convention
``L_j u + lam u = 0`` so that ``lam`` equals the Rayleigh quotient of the
index form, and "stable" means the constrained form is nonnegative.

Discretization is a second-order mass-lumped scheme assembled directly
from the quadratic form: trapezoid weights for the mass, midpoint
coefficients for the stiffness, Robin data as boundary form terms (which
is the symmetric equivalent of ghost-node elimination), Dirichlet rows
eliminated.  A vanishing orbit radius at an endpoint (a pole of a closed
profile) folds the end node into its neighbour, enforcing the regularity
condition there.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateOrbitError
from .spectral import DEFAULT_CONFIG, SolverConfig, TridiagonalPencil, eig_lowest


def harmonic_multiplicity(n: int, j: int) -> int:
    """Multiplicity of the degree-j Laplace eigenvalue on the orbit S^{n-1}."""
    if j < 0:
        raise ValueError("harmonic degree must be >= 0")
    if j == 0:
        return 1
    if n == 2:
        return 2
    if n == 3:
        return 2 * j + 1
    lower = math.comb(n - 3 + j, j - 2) if j >= 2 else 0
    return math.comb(n - 1 + j, j) - lower


@dataclass(frozen=True)
class BoundaryCondition:
    """Dirichlet or Robin end condition; Neumann is Robin with q = 0.

    Robin data enters through the outward normal derivative,
    ``du/dnu = q u`` on the boundary.
    """

    kind: str
    q: float = 0.0

    def __post_init__(self):
        if self.kind not in ("dirichlet", "robin"):
            raise ValueError(f"unknown boundary kind {self.kind!r}")
        if not math.isfinite(self.q):
            raise ValueError("Robin coefficient must be finite")

    @classmethod
    def dirichlet(cls) -> "BoundaryCondition":
        return cls("dirichlet")

    @classmethod
    def neumann(cls) -> "BoundaryCondition":
        return cls("robin", 0.0)

    @classmethod
    def robin(cls, q: float) -> "BoundaryCondition":
        return cls("robin", float(q))

    @classmethod
    def parse(cls, text: str) -> "BoundaryCondition":
        """Parse 'dirichlet', 'neumann' or 'robin:Q'."""
        low = text.strip().lower()
        if low == "dirichlet":
            return cls.dirichlet()
        if low == "neumann":
            return cls.neumann()
        if low.startswith("robin:"):
            return cls.robin(float(low.split(":", 1)[1]))
        raise ValueError(f"cannot parse boundary condition {text!r}")


@dataclass(frozen=True)
class SpectrumEntry:
    lam: float
    multiplicity: int
    mode_j: int
    index_k: int

    def __post_init__(self):
        if self.multiplicity < 1:
            raise ValueError("multiplicity must be >= 1")


@dataclass(frozen=True)
class Spectrum:
    """Sorted eigenvalues with multiplicities and mode provenance."""

    entries: tuple[SpectrumEntry, ...]

    def __post_init__(self):
        entries = tuple(sorted(self.entries, key=lambda e: (e.lam, e.mode_j, e.index_k)))
        object.__setattr__(self, "entries", entries)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def lambda1(self) -> float:
        return self.entries[0].lam

    @property
    def lambda2(self) -> float:
        """Second eigenvalue counted with multiplicity."""
        first = self.entries[0]
        if first.multiplicity >= 2:
            return first.lam
        return self.entries[1].lam

    def eigenvalues(self, count: int | None = None) -> np.ndarray:
        """Eigenvalues repeated by multiplicity, ascending."""
        out = []
        for e in self.entries:
            out.extend([e.lam] * e.multiplicity)
            if count is not None and len(out) >= count:
                break
        return np.array(out[:count] if count is not None else out)

    def truncated(self, count: int) -> "Spectrum":
        """Keep whole entries until at least ``count`` eigenvalues are covered."""
        kept, total = [], 0
        for e in self.entries:
            kept.append(e)
            total += e.multiplicity
            if total >= count:
                break
        return Spectrum(tuple(kept))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("lambda,multiplicity,mode_j,index_k\n")
        for e in self.entries:
            buf.write(f"{e.lam:.17g},{e.multiplicity},{e.mode_j},{e.index_k}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "Spectrum":
        lines = [ln for ln in text.strip().splitlines() if ln.strip()]
        if not lines or lines[0].strip() != "lambda,multiplicity,mode_j,index_k":
            raise ValueError("bad spectrum CSV header")
        entries = []
        for ln in lines[1:]:
            lam, mult, j, k = ln.split(",")
            entries.append(SpectrumEntry(float(lam), int(mult), int(j), int(k)))
        return cls(tuple(entries))


@dataclass(frozen=True)
class SturmLiouvilleProblem:
    """One rotational mode of the Jacobi operator on a uniform arclength grid.

    ``p = rho^{n-1}`` is the orbit volume density, ``mu`` the orbit harmonic
    eigenvalue, ``w_pot`` the Jacobi potential sampled on the grid.  The
    represented quadratic form is the mode restriction of the index form:
    ``int (u'^2 + mu u^2 / rho^2 - W u^2) p ds - [q p u^2]`` at Robin ends.
    """

    grid: np.ndarray
    p: np.ndarray
    w_pot: np.ndarray
    mu: float
    bc_bottom: BoundaryCondition
    bc_top: BoundaryCondition
    rho: np.ndarray | None = None

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        p = np.asarray(self.p, dtype=float)
        w = np.asarray(self.w_pot, dtype=float)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "w_pot", w)
        if self.rho is not None:
            object.__setattr__(self, "rho", np.asarray(self.rho, dtype=float))
        if grid.ndim != 1 or grid.size < 3:
            raise ValueError("grid needs at least 3 nodes")
        steps = np.diff(grid)
        h = steps[0]
        if h <= 0 or np.any(np.abs(steps - h) > 1e-9 * abs(h)):
            raise ValueError("grid must be uniform and strictly increasing")
        if p.shape != grid.shape or w.shape != grid.shape:
            raise ValueError("coefficient arrays must match the grid")
        if np.any(p[1:-1] <= 0.0):
            raise DegenerateOrbitError("volume density vanishes at an interior node")
        if self.mu < 0:
            raise ValueError("mode constant must be >= 0")
        if self.mu > 0:
            if self.rho is None:
                raise ValueError("mu > 0 requires the orbit radius samples")
            if np.any(self.rho[1:-1] <= 0.0):
                raise DegenerateOrbitError("orbit radius vanishes at an interior node")
            for idx, bc in ((0, self.bc_bottom), (-1, self.bc_top)):
                if self.rho[idx] <= 0.0 and bc.kind != "dirichlet":
                    raise DegenerateOrbitError(
                        "modes j >= 1 need a Dirichlet condition at a pole"
                    )

    @property
    def h(self) -> float:
        return float(self.grid[1] - self.grid[0])

    @property
    def m(self) -> int:
        return self.grid.size - 1


_POLE_REL = 1e-12


def discretize(problem: SturmLiouvilleProblem) -> TridiagonalPencil:
    """Symmetric tridiagonal pencil of the mode problem.

    Returns (A, B) with B the lumped mass (trapezoid weights times p) and
    A assembled from the quadratic form, so the discrete Rayleigh quotient
    matches the mode-restricted index form to second order.  The pencil's
    ``nodes`` records surviving grid indices.
    """
    g, p, w = problem.grid, problem.p, problem.w_pot
    h = problem.h
    msize = g.size
    pmid = 0.5 * (p[:-1] + p[1:])

    weights = np.full(msize, h)
    weights[0] = weights[-1] = 0.5 * h

    cent = np.zeros(msize)
    if problem.mu > 0:
        rho = problem.rho
        inner = slice(1, -1)
        cent[inner] = problem.mu / rho[inner] ** 2
        for idx in (0, -1):
            cent[idx] = problem.mu / rho[idx] ** 2 if rho[idx] > 0.0 else 0.0

    diag = np.zeros(msize)
    diag[:-1] += pmid / h
    diag[1:] += pmid / h
    off = -pmid / h
    diag += weights * p * (cent - w)
    bdiag = weights * p

    for i, bc in ((0, problem.bc_bottom), (msize - 1, problem.bc_top)):
        if bc.kind == "robin":
            diag[i] -= bc.q * p[i]

    pole_cut = _POLE_REL * float(p.max(initial=0.0))
    nodes = np.arange(msize)

    def trim_bottom(fold: bool):
        nonlocal diag, off, bdiag, nodes
        if fold:
            diag[1] += diag[0] + 2.0 * off[0]
            bdiag[1] += bdiag[0]
        diag, bdiag, off, nodes = diag[1:], bdiag[1:], off[1:], nodes[1:]

    def trim_top(fold: bool):
        nonlocal diag, off, bdiag, nodes
        if fold:
            diag[-2] += diag[-1] + 2.0 * off[-1]
            bdiag[-2] += bdiag[-1]
        diag, bdiag, off, nodes = diag[:-1], bdiag[:-1], off[:-1], nodes[:-1]

    if problem.bc_bottom.kind == "dirichlet":
        trim_bottom(fold=False)
    elif p[0] <= pole_cut:
        trim_bottom(fold=True)
    if problem.bc_top.kind == "dirichlet":
        trim_top(fold=False)
    elif p[-1] <= pole_cut:
        trim_top(fold=True)

    return TridiagonalPencil(diag, off, bdiag, nodes)


def assemble_mode(
    surface,
    j: int,
    bc_bottom: BoundaryCondition,
    bc_top: BoundaryCondition,
    m: int,
) -> SturmLiouvilleProblem:
    """Mode-j radial problem of a rotational surface on an m-interval grid.

    The surface fields are resampled onto the uniform grid by a cubic
    spline (the single resampling rule used everywhere).
    """
    if m < 16:
        raise ValueError("assemble_mode needs m >= 16")
    if j < 0:
        raise ValueError("mode index must be >= 0")
    n = surface.profile.n
    s, rho, w_pot, _ = surface.fields_on_grid(m)
    p = rho ** (n - 1)
    mu = float(j * (j + n - 2))
    return SturmLiouvilleProblem(
        grid=s, p=p, w_pot=w_pot, mu=mu,
        bc_bottom=bc_bottom, bc_top=bc_top, rho=rho,
    )


def mode_lower_bound(problem: SturmLiouvilleProblem) -> float:
    """Certified lower bound for every eigenvalue of the discretized mode.

    The stiffness part of the form is nonnegative, so termwise bounding
    gives ``min(mu/rho^2 - W)`` over active nodes, corrected by the
    (h-dependent) worst case of positive Robin boundary terms.
    """
    active = np.ones(problem.grid.size, dtype=bool)
    if problem.bc_bottom.kind == "dirichlet" or problem.p[0] <= _POLE_REL * problem.p.max():
        active[0] = False
    if problem.bc_top.kind == "dirichlet" or problem.p[-1] <= _POLE_REL * problem.p.max():
        active[-1] = False
    if problem.mu > 0:
        cent = problem.mu / problem.rho[active] ** 2
    else:
        cent = 0.0
    bound = float(np.min(cent - problem.w_pot[active]))
    q_pos = 0.0
    for bc in (problem.bc_bottom, problem.bc_top):
        if bc.kind == "robin":
            q_pos += max(bc.q, 0.0)
    return bound - 2.0 * q_pos / problem.h


def merge_modes(
    surface,
    bc_bottom: BoundaryCondition,
    bc_top: BoundaryCondition,
    m: int,
    k_per_mode: int = 8,
    count: int = 12,
    stop_above: float = 0.0,
    j_max: int = 128,
    config: SolverConfig = DEFAULT_CONFIG,
) -> Spectrum:
    """Global spectrum of a rotational surface from its radial modes.

    Modes j = 0, 1, 2, ... are solved until the a-priori lower bound of
    the next mode exceeds both the count-th collected eigenvalue and
    ``stop_above``, which certifies that no further mode can contribute
    below that level.  Each radial eigenvalue carries the orbit harmonic
    multiplicity of its mode.
    """
    n = surface.profile.n
    entries: list[SpectrumEntry] = []
    j = 0
    while True:
        problem = assemble_mode(surface, j, bc_bottom, bc_top, m)
        bound = mode_lower_bound(problem)
        if j > 0 and _count_with_mult(entries) >= count:
            cutoff = max(_kth_smallest(entries, count), stop_above)
            if bound > cutoff:
                break
        pencil = discretize(problem)
        k_eff = min(k_per_mode, pencil.size)
        for idx, (lam, _) in enumerate(eig_lowest(pencil, k_eff, config=config)):
            entries.append(SpectrumEntry(lam, harmonic_multiplicity(n, j), j, idx))
        j += 1
        if j > j_max:
            raise RuntimeError(f"mode truncation not reached by j_max={j_max}")
    return Spectrum(tuple(entries))


def _count_with_mult(entries: Iterable[SpectrumEntry]) -> int:
    return sum(e.multiplicity for e in entries)


def _kth_smallest(entries: Sequence[SpectrumEntry], count: int) -> float:
    vals: list[float] = []
    for e in sorted(entries, key=lambda e: e.lam):
        vals.extend([e.lam] * e.multiplicity)
        if len(vals) >= count:
            break
    return vals[count - 1]


def cylinder_free_spectrum(base_spectrum: Spectrum, l: float, count: int) -> Spectrum:
    """Spectrum of the free-boundary cylinder over a closed base.

    The interval factor contributes Neumann eigenvalues ``(k pi / l)^2``,
    so the cylinder spectrum is the merge of ``lam_m + (k pi / l)^2`` over
    the base eigenvalues, with multiplicities inherited from the base.
    """
    if l <= 0:
        raise ValueError("slab width must be positive")
    k_max = count + 2
    cands = [
        SpectrumEntry(e.lam + (k * math.pi / l) ** 2, e.multiplicity, e.mode_j, k)
        for e in base_spectrum.entries
        for k in range(k_max + 1)
    ]
    return Spectrum(tuple(cands)).truncated(count)


def circle_factor_spectrum(base_spectrum: Spectrum, r: float, count: int) -> Spectrum:
    """Spectrum on (base) x S^1(r): ``lam_m + (k/r)^2`` with k >= 1 doubled."""
    if r <= 0:
        raise ValueError("circle radius must be positive")
    k_max = count + 2
    cands = [
        SpectrumEntry(
            e.lam + (k / r) ** 2,
            e.multiplicity * (1 if k == 0 else 2),
            e.mode_j,
            k,
        )
        for e in base_spectrum.entries
        for k in range(k_max + 1)
    ]
    return Spectrum(tuple(cands)).truncated(count)
