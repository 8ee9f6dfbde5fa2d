"""Model spaces, geodesic spheres, and slab boundary geometry.

The three simply connected model geometries are handled through the usual
generalized trigonometric functions::

    sn_k(r) = sinh r | r | sin r      for kappa = -1 | 0 | +1
    ct_k(r) = coth r | 1/r | cot r

A geodesic sphere of radius ``rho`` in ``M^n(kappa)`` has all principal
curvatures equal to ``ct_k(rho)``, so its Jacobi potential is
``(n-1)(ct_k(rho)^2 + kappa)``, which collapses to ``(n-1)/sn_k(rho)^2``
in every model space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import GeometryDomainError
from .operators import Spectrum, SpectrumEntry, harmonic_multiplicity


@dataclass(frozen=True)
class SpaceForm:
    """Simply connected model space of constant curvature kappa in {-1, 0, +1}."""

    kappa: int
    n: int

    def __post_init__(self):
        if self.kappa not in (-1, 0, 1):
            raise GeometryDomainError(f"kappa must be -1, 0 or +1, got {self.kappa}")
        if self.n < 2:
            raise GeometryDomainError(f"ambient dimension must be >= 2, got {self.n}")

    def valid_radius(self, r: float) -> bool:
        if r <= 0.0:
            return False
        return r < math.pi if self.kappa == 1 else True


def _check_radius(space_form: SpaceForm, r: float) -> None:
    if not space_form.valid_radius(r):
        raise GeometryDomainError(
            f"radius {r} outside valid range for kappa={space_form.kappa}"
        )


def sn_ct(space_form: SpaceForm, r):
    """Generalized sine and cotangent of a geodesic radius.

    Returns ``(sn, ct)`` with ``sn = sinh r / r / sin r`` and
    ``ct = coth r / (1/r) / cot r`` for kappa = -1 / 0 / +1.
    Accepts scalars or arrays; the domain check uses the extremes.
    """
    arr = np.asarray(r, dtype=float)
    _check_radius(space_form, float(arr.min(initial=np.inf)) if arr.size else 1.0)
    if space_form.kappa == 1 and arr.size and float(arr.max()) >= math.pi:
        raise GeometryDomainError("radius must be < pi when kappa=+1")
    if space_form.kappa == -1:
        sn, ct = np.sinh(arr), np.cosh(arr) / np.sinh(arr)
    elif space_form.kappa == 0:
        sn, ct = arr, 1.0 / arr
    else:
        sn, ct = np.sin(arr), np.cos(arr) / np.sin(arr)
    if np.isscalar(r) or arr.ndim == 0:
        return float(sn), float(ct)
    return sn, ct


def c_kappa(space_form: SpaceForm, rho: float) -> float:
    """Squared generalized tangent: tanh^2 / rho^2 / tan^2 for kappa=-1/0/+1.

    At kappa=+1, rho=pi/2 the value diverges; callers that need the
    reciprocal should use :func:`c_kappa_inv`, which is finite there.
    """
    _check_radius(space_form, rho)
    if space_form.kappa == -1:
        return math.tanh(rho) ** 2
    if space_form.kappa == 0:
        return rho**2
    c = math.cos(rho)
    if c == 0.0:
        return math.inf
    return math.tan(rho) ** 2


def c_kappa_inv(space_form: SpaceForm, rho: float) -> float:
    """Reciprocal of :func:`c_kappa`, i.e. ``ct_k(rho)^2``; zero at the equator."""
    _, ct = sn_ct(space_form, rho)
    return ct * ct


@dataclass(frozen=True)
class GeodesicSphere:
    """Geodesic sphere of radius rho in M^n(kappa); the base of a tube."""

    space_form: SpaceForm
    rho: float

    def __post_init__(self):
        _check_radius(self.space_form, self.rho)


def sphere_potential(sphere: GeodesicSphere) -> float:
    """Jacobi potential ``|sigma|^2 + Ric(N) = (n-1)(c_k(rho)^{-1} + kappa)``."""
    sf = sphere.space_form
    return (sf.n - 1) * (c_kappa_inv(sf, sphere.rho) + sf.kappa)


def sphere_spectrum(sphere: GeodesicSphere, count: int) -> Spectrum:
    """Spectrum of the stability operator on a geodesic sphere.

    The sphere is intrinsically round of radius ``sn_k(rho)``, so the
    eigenvalues are ``j(j+n-2)/sn_k(rho)^2 - W`` with the spherical-harmonic
    multiplicities on S^{n-1}.  Bands are appended whole until at least
    ``count`` eigenvalues (with multiplicity) are collected.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    sf = sphere.space_form
    sn, _ = sn_ct(sf, sphere.rho)
    w = sphere_potential(sphere)
    entries = []
    total = 0
    j = 0
    while total < count:
        mu = j * (j + sf.n - 2)
        mult = harmonic_multiplicity(sf.n, j)
        entries.append(SpectrumEntry(mu / sn**2 - w, mult, j, 0))
        total += mult
        j += 1
    return Spectrum(entries)


_WarpKind = Literal["product", "horosphere", "samples"]


@dataclass(frozen=True)
class WarpedSlab:
    """Slab ``[0, l]`` warped by a positive function f: metric dt^2 + f(t)^2 g0.

    Only the warp selectors the boundary machinery needs are supported:
    the trivial product (f = 1), the horosphere warp (f = exp(-t)),
    and tabulated samples interpolated by a cubic spline.
    """

    l: float
    kind: _WarpKind = "product"
    _spline: Callable | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.l <= 0.0:
            raise GeometryDomainError(f"slab width must be positive, got {self.l}")

    @classmethod
    def product(cls, l: float) -> "WarpedSlab":
        return cls(l=l, kind="product")

    @classmethod
    def horosphere(cls, l: float) -> "WarpedSlab":
        return cls(l=l, kind="horosphere")

    @classmethod
    def from_samples(cls, ts, fs, l: float | None = None) -> "WarpedSlab":
        ts = np.asarray(ts, dtype=float)
        fs = np.asarray(fs, dtype=float)
        if ts.ndim != 1 or ts.shape != fs.shape or ts.size < 4:
            raise GeometryDomainError("need >= 4 matching (t, f) samples")
        if np.any(np.diff(ts) <= 0):
            raise GeometryDomainError("sample abscissae must be strictly increasing")
        if np.any(fs <= 0):
            raise GeometryDomainError("warping function must be positive")
        width = float(ts[-1] - ts[0]) if l is None else float(l)
        spline = CubicSpline(ts - ts[0], fs)
        return cls(l=width, kind="samples", _spline=spline)

    def f(self, t: float) -> float:
        if self.kind == "product":
            return 1.0
        if self.kind == "horosphere":
            return math.exp(-t)
        return float(self._spline(t))

    def f_prime(self, t: float) -> float:
        if self.kind == "product":
            return 0.0
        if self.kind == "horosphere":
            return -math.exp(-t)
        return float(self._spline(t, 1))


def slice_shape(slab: WarpedSlab, end: Literal["bottom", "top"]) -> float:
    """Second fundamental form II(nu, nu) of a slab wall.

    The wall normal convention points into the slab, so the bottom slice
    returns ``f'(0)/f(0)`` and the top slice ``-f'(l)/f(l)``.  A product
    slab has totally geodesic walls and returns 0 at both ends.
    """
    if end == "bottom":
        return slab.f_prime(0.0) / slab.f(0.0)
    if end == "top":
        return -slab.f_prime(slab.l) / slab.f(slab.l)
    raise ValueError(f"end must be 'bottom' or 'top', got {end!r}")
