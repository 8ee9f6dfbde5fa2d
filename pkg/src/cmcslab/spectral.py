"""Numerical kernels for symmetric tridiagonal pencils.

Everything downstream reduces to the generalized problem ``A u = lam B u``
with ``A`` symmetric tridiagonal and ``B`` positive diagonal.  The lowest
eigenpairs are found by bisection plus inverse iteration (LAPACK
``stebz``/``stein`` through scipy) after the ``B^{-1/2}`` reduction, and
every returned pair is certified by an independent Sturm-sequence count,
which doubles as the exact negative-eigenvalue counter the stability
verdicts rely on.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import eigh_tridiagonal, solve_banded

from .errors import SolverFailure


@dataclass(frozen=True)
class SolverConfig:
    """Tolerances for the spectral kernels, with documented defaults."""

    eig_tol: float = 1e-10
    residual_cap: float = 1e-8
    max_restarts: int = 5
    deflation_tol: float = 1e-10


DEFAULT_CONFIG = SolverConfig()


@dataclass(frozen=True)
class TridiagonalPencil:
    """Pencil (A, B): A symmetric tridiagonal, B positive diagonal.

    ``nodes`` optionally records which grid nodes of the originating
    problem the rows correspond to (Dirichlet ends are eliminated).
    """

    diag: np.ndarray
    off: np.ndarray
    bdiag: np.ndarray
    nodes: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        diag = np.asarray(self.diag, dtype=float)
        off = np.asarray(self.off, dtype=float)
        bdiag = np.asarray(self.bdiag, dtype=float)
        object.__setattr__(self, "diag", diag)
        object.__setattr__(self, "off", off)
        object.__setattr__(self, "bdiag", bdiag)
        if diag.ndim != 1 or bdiag.shape != diag.shape:
            raise ValueError("diag and bdiag must be 1-d arrays of equal length")
        if off.shape != (max(diag.size - 1, 0),):
            raise ValueError("off-diagonal must have length size-1")
        if np.any(bdiag <= 0.0):
            raise ValueError("B must be positive definite (diagonal entries > 0)")

    @property
    def size(self) -> int:
        return self.diag.size

    def matvec(self, u: np.ndarray) -> np.ndarray:
        """A @ u for the tridiagonal A."""
        out = self.diag * u
        if self.size > 1:
            out[:-1] += self.off * u[1:]
            out[1:] += self.off * u[:-1]
        return out

    def norm_inf(self) -> float:
        row = np.abs(self.diag).copy()
        if self.size > 1:
            row[:-1] += np.abs(self.off)
            row[1:] += np.abs(self.off)
        return float(row.max(initial=0.0))

    def shifted(self, c: float) -> "TridiagonalPencil":
        """Pencil of (A + c B, B); shifts every eigenvalue by +c."""
        return TridiagonalPencil(
            self.diag + c * self.bdiag, self.off.copy(), self.bdiag.copy(), self.nodes
        )


def sturm_count(pencil: TridiagonalPencil, shift: float) -> int:
    """Exact number of pencil eigenvalues strictly below ``shift``.

    Counts the negative pivots of the LDL^T factorization of A - shift*B;
    zero pivots are nudged negative following the LAPACK convention, so
    eigenvalues equal to the shift count as below it.
    """
    a = pencil.diag - shift * pencil.bdiag
    b2 = pencil.off * pencil.off
    scale = pencil.norm_inf() + abs(shift) * float(np.max(pencil.bdiag))
    pivmin = max(scale, 1.0) * 1e-300
    count = 0
    d = a[0]
    if abs(d) < pivmin:
        d = -pivmin
    if d < 0.0:
        count += 1
    for i in range(1, pencil.size):
        d = a[i] - b2[i - 1] / d
        if abs(d) < pivmin:
            d = -pivmin
        if d < 0.0:
            count += 1
    return count


def _reduced_norm_inf(pencil) -> float:
    """Inf-norm bound of B^{-1/2} A B^{-1/2}; sets the lambda resolution."""
    bound = float(np.max(np.abs(pencil.diag / pencil.bdiag)))
    if pencil.size > 1:
        rootb = np.sqrt(pencil.bdiag)
        bound += 2.0 * float(np.max(np.abs(pencil.off) / (rootb[:-1] * rootb[1:])))
    return bound


def _certify(pencil, lams, tol):
    """Sturm-count certification of a computed batch of lowest eigenvalues.

    The certification window cannot be tighter than the floating-point
    resolution of the pencil's eigenvalues, which scales with the norm of
    the reduced standard-form matrix.
    """
    resolution = 64.0 * np.finfo(float).eps * _reduced_norm_inf(pencil)
    for i, lam in enumerate(lams):
        delta = max(max(tol, 1e-12) * (1.0 + abs(lam)), resolution)
        above = sturm_count(pencil, lam + delta)
        below = sturm_count(pencil, lam - delta)
        if above < i + 1 or below > i:
            raise SolverFailure(
                "Sturm count disagrees with returned eigenvalues",
                {"index": i, "lambda": lam, "count_above": above, "count_below": below},
            )


def eig_lowest(
    pencil: TridiagonalPencil,
    k: int,
    tol: float | None = None,
    config: SolverConfig = DEFAULT_CONFIG,
) -> list[tuple[float, np.ndarray]]:
    """k smallest eigenpairs of ``A u = lam B u``, B-normalized and certified.

    The pencil is reduced by ``B^{-1/2}`` scaling to a standard symmetric
    tridiagonal problem solved by Sturm bisection with inverse iteration
    for the vectors.  Each returned pair is checked against the residual
    cap and the Sturm count before being handed back.
    """
    if not 1 <= k <= pencil.size:
        raise ValueError(f"need 1 <= k <= {pencil.size}, got {k}")
    tol = config.eig_tol if tol is None else tol
    rootb = np.sqrt(pencil.bdiag)
    d = pencil.diag / pencil.bdiag
    e = pencil.off / (rootb[:-1] * rootb[1:]) if pencil.size > 1 else np.empty(0)

    last_exc: Exception | None = None
    for attempt in range(config.max_restarts + 1):
        try:
            if pencil.size == 1:
                lams, vecs = np.array([d[0]]), np.array([[1.0]])
            else:
                lams, vecs = eigh_tridiagonal(
                    d, e, select="i", select_range=(0, k - 1), tol=tol * (2.0**attempt)
                )
            break
        except np.linalg.LinAlgError as exc:  # pragma: no cover - rare LAPACK failure
            last_exc = exc
    else:  # pragma: no cover
        raise SolverFailure(
            "inverse iteration failed to converge",
            {"restarts": config.max_restarts, "cause": repr(last_exc)},
        )

    pairs = []
    anorm = pencil.norm_inf()
    for i in range(k):
        u = vecs[:, i] / rootb
        u /= math.sqrt(float(u @ (pencil.bdiag * u)))
        resid = pencil.matvec(u) - lams[i] * pencil.bdiag * u
        cap = config.residual_cap * max(anorm, 1.0) * float(np.abs(u).max())
        if float(np.abs(resid).max()) > cap:
            raise SolverFailure(
                "eigenpair residual exceeds cap",
                {"index": i, "lambda": float(lams[i]), "residual": float(np.abs(resid).max())},
            )
        pairs.append((float(lams[i]), u))
    _certify(pencil, [lam for lam, _ in pairs], tol)
    return pairs


def _b_orthonormalize(pencil, vectors, tol):
    """Modified Gram-Schmidt in the B inner product; drops dependent vectors."""
    basis = []
    for v in vectors:
        w = np.array(v, dtype=float)
        for q in basis:
            w -= float(w @ (pencil.bdiag * q)) * q
        nrm2 = float(w @ (pencil.bdiag * w))
        if nrm2 > tol:
            basis.append(w / math.sqrt(nrm2))
    return basis


def solve_deflated(
    pencil: TridiagonalPencil,
    shift: float,
    rhs: np.ndarray,
    deflate: Sequence[np.ndarray] = (),
    config: SolverConfig = DEFAULT_CONFIG,
) -> np.ndarray:
    """Solve ``L u + shift u = rhs`` on the complement of the deflated span.

    In pencil form this is ``(A - shift B) u = -B rhs`` with the right-hand
    side and the iterate projected B-orthogonally against the deflation
    vectors, so the result lies in their B-orthogonal complement even when
    the shifted pencil is singular on that span.
    """
    f = np.asarray(rhs, dtype=float).copy()
    if f.shape != (pencil.size,):
        raise ValueError("rhs length must match pencil size")
    basis = _b_orthonormalize(pencil, deflate, config.deflation_tol**2)

    def project(x):
        for q in basis:
            x -= float(x @ (pencil.bdiag * q)) * q
        return x

    f = project(f)
    b = -pencil.bdiag * f
    # an exactly singular LU pivot is dodged by a lambda-resolution nudge of
    # the shift; the projected solution is unaffected at that scale
    nudge = 64.0 * np.finfo(float).eps * max(_reduced_norm_inf(pencil), 1.0)
    u = None
    last_exc: Exception | None = None
    for delta in (0.0, nudge, -nudge, 8.0 * nudge, -8.0 * nudge):
        ab = np.zeros((3, pencil.size))
        ab[1] = pencil.diag - (shift + delta) * pencil.bdiag
        if pencil.size > 1:
            ab[0, 1:] = pencil.off
            ab[2, :-1] = pencil.off
        try:
            u = solve_banded((1, 1), ab, b)
            break
        except np.linalg.LinAlgError as exc:
            last_exc = exc
    if u is None:
        raise SolverFailure("shifted pencil is singular beyond the deflated span",
                            {"shift": shift, "cause": repr(last_exc)}) from last_exc
    u = project(u)

    # residual of the projected system: P((A - shift B) u + B f)
    resid = project(pencil.matvec(u) - shift * pencil.bdiag * u + pencil.bdiag * f)
    scale = (pencil.norm_inf() + abs(shift) * float(np.max(pencil.bdiag))) * max(
        float(np.abs(u).max(initial=0.0)), 1e-30
    ) + float(np.abs(pencil.bdiag * f).max(initial=0.0))
    if float(np.abs(resid).max(initial=0.0)) > 1e-8 * scale:
        raise SolverFailure(
            "deflated solve residual too large",
            {"residual": float(np.abs(resid).max()), "scale": scale},
        )
    return u


@dataclass(frozen=True)
class ExtrapolationResult:
    value: float
    error: float
    order: float
    grids: tuple[int, ...]
    values: tuple[float, ...]


def refine_extrapolate(
    value_fn: Callable[[int], float],
    base_m: int,
    levels: int = 3,
    order: int = 2,
) -> ExtrapolationResult:
    """Richardson extrapolation of a grid quantity under mesh halving.

    ``value_fn(m)`` is evaluated on grids ``base_m * 2^i``; the assumed
    convergence order is used for the final correction while the observed
    order is estimated from the last three grids.  If convergence is
    non-monotone a warning is issued and the finest-grid value returned;
    when successive values agree to roundoff no extrapolation is applied.
    """
    if levels < 3:
        raise ValueError("levels must be >= 3")
    grids = tuple(base_m * 2**i for i in range(levels))
    values = tuple(float(value_fn(m)) for m in grids)
    d1 = values[-2] - values[-3]
    d2 = values[-1] - values[-2]
    # attainable precision: near-singular solves and eigensolves leave noise
    # a few orders above machine epsilon; below it there is nothing to fit
    floor = 1e-10 * (1.0 + abs(values[-1]))
    if abs(d2) <= floor:
        return ExtrapolationResult(values[-1], floor, math.nan, grids, values)
    if abs(d1) <= abs(d2) or d1 * d2 < 0.0:
        warnings.warn("non-monotone mesh convergence; returning finest-grid value")
        return ExtrapolationResult(values[-1], abs(d2), math.nan, grids, values)
    observed = math.log2(abs(d1) / abs(d2))
    factor = 2.0**order - 1.0
    value = values[-1] + d2 / factor
    return ExtrapolationResult(value, abs(d2) / factor, observed, grids, values)
