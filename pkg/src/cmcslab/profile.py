"""Generation of rotational CMC profiles in slabs by ODE shooting.

In geodesic polar coordinates around the rotation axis the ambient metric
is ``dr^2 + dt^2 + sn_k(r)^2 g_{S^{n-1}}``, so the generating curve lives
in a flat (r, t) half-plane.  Parametrized by arclength with tangent angle
``phi`` measured from the r-axis, a hypersurface of revolution has
constant mean curvature H (average of the n principal curvatures) exactly
when

    r' = cos phi,   t' = sin phi,   phi' = n H - (n-1) ct_k(r) sin phi.

Free-boundary contact with the slab walls means ``phi = pi/2`` at both
ends; a capillary contact angle ``theta`` translates to
``phi(0) = pi - theta_0`` at the bottom wall and ``phi(end) = theta_1``
at the top wall.  Shooting varies the starting radius ``r0`` until the
top-wall angle residual vanishes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from .errors import (
    AxisCrossingError,
    GeometryDomainError,
    NoSolutionError,
    StiffnessError,
)

_AXIS_REL = 1e-13


def _ct(kappa: int, r):
    if kappa == -1:
        return np.cosh(r) / np.sinh(r)
    if kappa == 0:
        return 1.0 / r
    return np.cos(r) / np.sin(r)


def _sn(kappa: int, r):
    if kappa == -1:
        return np.sinh(r)
    if kappa == 0:
        return np.asarray(r, dtype=float) if not np.isscalar(r) else r
    return np.sin(r)


def ode_rhs(state, kappa: int, n: int, H: float):
    """Right side of the profile system for state (r, t, phi)."""
    r, _, phi = state
    if r <= 0.0:
        raise AxisCrossingError(f"profile reached the axis (r={r})")
    if kappa == 1 and r >= math.pi:
        raise GeometryDomainError("radius must stay below pi when kappa=+1")
    sphi = math.sin(phi)
    return (math.cos(phi), sphi, n * H - (n - 1) * _ct(kappa, r) * sphi)


@dataclass(frozen=True)
class ProfileCurve:
    """Arclength-sampled generating curve of a rotational hypersurface."""

    kappa: int
    n: int
    H: float
    s: np.ndarray
    r: np.ndarray
    t: np.ndarray
    phi: np.ndarray

    def __post_init__(self):
        for name in ("s", "r", "t", "phi"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        if not (self.s.shape == self.r.shape == self.t.shape == self.phi.shape):
            raise ValueError("sample arrays must share one shape")
        if self.s.size < 2:
            raise ValueError("need at least two samples")
        steps = np.diff(self.s)
        if np.any(steps <= 0) or np.any(np.abs(steps - steps[0]) > 1e-9 * steps[0]):
            raise ValueError("samples must be uniform in arclength")
        if np.any(self.r[1:-1] <= 0.0):
            raise AxisCrossingError("interior profile radius must be positive")

    @property
    def length(self) -> float:
        return float(self.s[-1] - self.s[0])

    def phi_prime(self) -> np.ndarray:
        """phi' from the ODE right side (not finite differences)."""
        out = np.empty_like(self.phi)
        pos = self.r > 0.0
        out[pos] = self.n * self.H - (self.n - 1) * _ct(self.kappa, self.r[pos]) * np.sin(
            self.phi[pos]
        )
        if not pos.all():
            # axis endpoints of a closed profile: extrapolate from the interior
            good = np.flatnonzero(pos)
            for i in np.flatnonzero(~pos):
                nb = good[np.argsort(np.abs(good - i))[:3]]
                out[i] = float(np.polyval(np.polyfit(self.s[nb], out[nb], 2), self.s[i]))
        return out


@dataclass(frozen=True)
class RotationalSurface:
    """Profile plus the geometric fields the Jacobi operator needs."""

    profile: ProfileCurve
    l: float
    theta0: float
    theta1: float
    rho: np.ndarray
    w_pot: np.ndarray
    v: np.ndarray
    is_cylinder: bool = False

    def __post_init__(self):
        for name in ("rho", "w_pot", "v"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        if not (self.rho.shape == self.w_pot.shape == self.v.shape == self.profile.s.shape):
            raise ValueError("field arrays must match the profile samples")

    @property
    def free_boundary(self) -> bool:
        return (
            abs(self.theta0 - math.pi / 2) < 1e-12
            and abs(self.theta1 - math.pi / 2) < 1e-12
        )

    def fields_on_grid(self, m: int):
        """Resample (rho, W, v) by cubic splines onto an m-interval grid."""
        s = self.profile.s
        s_new = np.linspace(s[0], s[-1], m + 1)
        rho = CubicSpline(s, self.rho)(s_new)
        w = CubicSpline(s, self.w_pot)(s_new)
        v = CubicSpline(s, self.v)(s_new)
        rho[np.abs(rho) < _AXIS_REL * max(1.0, float(np.abs(self.rho).max()))] = 0.0
        np.clip(rho, 0.0, None, out=rho)
        return s_new, rho, w, v

    def to_json(self) -> str:
        pf = self.profile
        doc = {
            "version": 1,
            "kappa": pf.kappa,
            "n": pf.n,
            "H": pf.H,
            "l": self.l,
            "theta0": self.theta0,
            "theta1": self.theta1,
            "is_cylinder": self.is_cylinder,
            "samples": [
                {
                    "s": float(pf.s[i]),
                    "r": float(pf.r[i]),
                    "t": float(pf.t[i]),
                    "phi": float(pf.phi[i]),
                    "rho": float(self.rho[i]),
                    "W": float(self.w_pot[i]),
                    "v": float(self.v[i]),
                }
                for i in range(pf.s.size)
            ],
        }
        return json.dumps(doc, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RotationalSurface":
        doc = json.loads(text)
        if doc.get("version") != 1:
            raise ValueError(f"unsupported surface document version {doc.get('version')}")
        cols = {k: np.array([smp[k] for smp in doc["samples"]]) for k in
                ("s", "r", "t", "phi", "rho", "W", "v")}
        profile = ProfileCurve(doc["kappa"], doc["n"], doc["H"],
                               cols["s"], cols["r"], cols["t"], cols["phi"])
        return cls(
            profile=profile,
            l=doc["l"],
            theta0=doc["theta0"],
            theta1=doc["theta1"],
            rho=cols["rho"],
            w_pot=cols["W"],
            v=cols["v"],
            is_cylinder=bool(doc.get("is_cylinder", False)),
        )


def surface_fields(
    profile: ProfileCurve,
    theta0: float = math.pi / 2,
    theta1: float = math.pi / 2,
    l: float | None = None,
    is_cylinder: bool = False,
) -> RotationalSurface:
    """Fill the derived geometric fields of a profile.

    ``rho = sn_k(r)`` is the orbit radius, ``v = cos phi`` the vertical
    normal component, and the Jacobi potential is

        W = phi'^2 + (n-1)(ct_k(r) sin phi)^2 + (n-1) kappa sin^2 phi,

    with phi' taken from the ODE right side.  At axis endpoints of a
    closed profile the orbital term tends to phi'^2 (umbilic pole).
    """
    kap, n = profile.kappa, profile.n
    r, phi = profile.r, profile.phi
    pos = r > 0.0
    rho = np.zeros_like(r)
    rho[pos] = _sn(kap, r[pos])
    phi_p = profile.phi_prime()
    orb = np.empty_like(r)
    orb[pos] = _ct(kap, r[pos]) * np.sin(phi[pos])
    orb[~pos] = phi_p[~pos]
    w = phi_p**2 + (n - 1) * orb**2 + (n - 1) * kap * np.sin(phi) ** 2
    v = np.cos(phi)
    width = float(profile.t[-1]) if l is None else float(l)
    return RotationalSurface(
        profile=profile, l=width, theta0=theta0, theta1=theta1,
        rho=rho, w_pot=w, v=v, is_cylinder=is_cylinder,
    )


def cylinder_surface(kappa: int, n: int, rho: float, l: float, samples: int = 256) -> RotationalSurface:
    """Exact cylinder (tube) profile of radius rho and height l."""
    if rho <= 0 or (kappa == 1 and rho >= math.pi):
        raise GeometryDomainError(f"invalid tube radius {rho} for kappa={kappa}")
    if l <= 0:
        raise GeometryDomainError("slab width must be positive")
    H = (n - 1) * float(_ct(kappa, rho)) / n
    s = np.linspace(0.0, l, samples + 1)
    profile = ProfileCurve(
        kappa, n, H,
        s=s, r=np.full_like(s, rho), t=s.copy(), phi=np.full_like(s, math.pi / 2),
    )
    return surface_fields(profile, l=l, is_cylinder=True)


def _events(kappa: int, l: float):
    def hit_top(s, y):
        return y[1] - l

    hit_top.terminal = True
    hit_top.direction = 1.0

    def hit_axis(s, y):
        return y[0]

    hit_axis.terminal = True
    hit_axis.direction = -1.0

    evts = [hit_top, hit_axis]
    if kappa == 1:
        def hit_polar(s, y):
            return y[0] - (math.pi - 1e-9)

        hit_polar.terminal = True
        hit_polar.direction = 1.0
        evts.append(hit_polar)
    return evts


def _integrate(kappa, n, H, r0, phi0, l, s_max, rtol, atol):
    # the axis/polar events terminate invalid trajectories, but the stepper
    # may still evaluate trial points past them; clamp to keep ct finite
    r_hi = math.pi - 1e-12 if kappa == 1 else math.inf

    def fun(s, y):
        r, _, phi = y
        r = min(max(r, 1e-12), r_hi)
        sphi = math.sin(phi)
        return (math.cos(phi), sphi, n * H - (n - 1) * _ct(kappa, r) * sphi)

    return solve_ivp(
        fun, (0.0, s_max), (r0, 0.0, phi0),
        method="DOP853", rtol=rtol, atol=atol,
        events=_events(kappa, l), dense_output=True,
    )


def _shot_residual(sol):
    """Top-angle residual target value, or None when the top was not reached."""
    if sol.status == 1 and sol.t_events[0].size:
        return float(sol.y_events[0][0][2])
    return None


def shoot_profiles(
    kappa: int,
    n: int,
    H: float,
    l: float,
    bracket: tuple[float, float],
    theta0: float = math.pi / 2,
    theta1: float = math.pi / 2,
    tol: float = 1e-8,
    scan: int = 64,
    samples: int = 1024,
    s_max: float | None = None,
    rtol: float = 1e-11,
    atol: float = 1e-12,
) -> list[RotationalSurface]:
    """All profile solutions with starting radius inside the bracket.

    The bracket is scanned on a uniform grid for sign changes of the
    top-angle residual; each change is refined by a bracketing root
    finder.  Every root is returned (half-period, full-period, ...)
    rather than collapsed, sorted by starting radius, with cylinder
    solutions flagged.
    """
    if H < 0:
        raise GeometryDomainError("mean curvature is normalized to H >= 0")
    if l <= 0:
        raise GeometryDomainError("slab width must be positive")
    if not (0.0 < theta0 < math.pi and 0.0 < theta1 < math.pi):
        raise GeometryDomainError("contact angles must lie in (0, pi)")
    lo, hi = float(bracket[0]), float(bracket[1])
    if not (0.0 < lo < hi) or (kappa == 1 and hi >= math.pi):
        raise GeometryDomainError(f"bad shooting bracket {bracket}")
    span = s_max if s_max is not None else 20.0 * l + 10.0
    phi0 = math.pi - theta0

    underflow = 0

    def residual(r0: float):
        nonlocal underflow
        sol = _integrate(kappa, n, H, r0, phi0, l, span, rtol, atol)
        if sol.status == -1:
            underflow += 1
            return None
        res = _shot_residual(sol)
        return None if res is None else res - theta1

    grid = np.linspace(lo, hi, scan)
    vals = [residual(r0) for r0 in grid]

    roots: list[float] = []
    for i in range(scan - 1):
        va, vb = vals[i], vals[i + 1]
        if va is None or vb is None:
            continue
        if va == 0.0:
            roots.append(float(grid[i]))
        elif va * vb < 0.0:
            roots.append(
                brentq(lambda r0: residual(r0), grid[i], grid[i + 1],
                       xtol=1e-13 * (1.0 + hi), rtol=8.9e-16)
            )
    if vals and vals[-1] == 0.0:
        roots.append(float(grid[-1]))

    surfaces = []
    for r0 in sorted(set(roots)):
        sol = _integrate(kappa, n, H, r0, phi0, l, span, rtol, atol)
        res = _shot_residual(sol)
        if res is None or abs(res - theta1) > tol:
            continue
        s_end = float(sol.t_events[0][0])
        s_nodes = np.linspace(0.0, s_end, samples + 1)
        y = sol.sol(s_nodes)
        r_arr, t_arr, phi_arr = y[0].copy(), y[1].copy(), y[2].copy()
        t_arr[0], phi_arr[0], r_arr[0] = 0.0, phi0, r0
        profile = ProfileCurve(kappa, n, H, s_nodes, r_arr, t_arr, phi_arr)
        if abs(t_arr[-1] - l) > tol:  # pragma: no cover - event localization guarantees this
            raise StiffnessError(f"top-wall event missed the slab height by {t_arr[-1] - l}")
        is_cyl = bool(np.max(np.abs(r_arr - r0)) < 1e-10 * (1.0 + r0))
        surfaces.append(surface_fields(profile, theta0, theta1, l=l, is_cylinder=is_cyl))
    if not surfaces:
        if underflow and underflow >= scan // 2:
            raise StiffnessError("integrator step size underflow across the bracket")
        raise NoSolutionError(
            f"no top-angle sign change in bracket {bracket} "
            f"(kappa={kappa}, n={n}, H={H}, l={l})"
        )
    return surfaces


def shoot_free_boundary(
    kappa: int, n: int, H: float, l: float,
    bracket: tuple[float, float], tol: float = 1e-8, **kw,
) -> RotationalSurface:
    """First free-boundary solution in the bracket (contact angles pi/2)."""
    return shoot_profiles(kappa, n, H, l, bracket, tol=tol, **kw)[0]


def shoot_capillary(
    kappa: int, n: int, H: float, l: float,
    theta0: float, theta1: float,
    bracket: tuple[float, float], tol: float = 1e-8, **kw,
) -> RotationalSurface:
    """First capillary solution with prescribed contact angles."""
    return shoot_profiles(
        kappa, n, H, l, bracket, theta0=theta0, theta1=theta1, tol=tol, **kw
    )[0]
