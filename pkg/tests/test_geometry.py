import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cmcslab import (
    GeodesicSphere,
    GeometryDomainError,
    SpaceForm,
    WarpedSlab,
    c_kappa,
    c_kappa_inv,
    slice_shape,
    sn_ct,
    sphere_potential,
    sphere_spectrum,
)
from cmcslab.operators import harmonic_multiplicity

# frozen via a 40-digit series evaluation
SINH1 = 1.1752011936438014569
COTH1 = 1.3130352854993313036
TANH1_SQ = 0.58002565838597393061
CSCH1_SQ = 0.72406166096631046641  # coth^2(1) - 1


def test_sn_ct_flat():
    sn, ct = sn_ct(SpaceForm(0, 2), 2.0)
    assert sn == 2.0 and ct == 0.5


def test_sn_ct_equator():
    sn, ct = sn_ct(SpaceForm(1, 2), math.pi / 2)
    assert abs(sn - 1.0) < 1e-15
    assert abs(ct) < 1e-15


def test_sn_ct_hyperbolic_oracle():
    sn, ct = sn_ct(SpaceForm(-1, 3), 1.0)
    assert abs(sn - SINH1) < 1e-15
    assert abs(ct - COTH1) < 1e-15


def test_sn_ct_domain():
    with pytest.raises(GeometryDomainError):
        sn_ct(SpaceForm(0, 2), -1.0)
    with pytest.raises(GeometryDomainError):
        sn_ct(SpaceForm(1, 2), 3.2)


def test_c_kappa_values():
    assert c_kappa(SpaceForm(0, 2), 2.0) == 4.0
    assert abs(c_kappa(SpaceForm(1, 2), math.pi / 4) - 1.0) < 1e-12
    assert abs(c_kappa(SpaceForm(-1, 2), 1.0) - TANH1_SQ) < 1e-15


def test_c_kappa_equator_reciprocal():
    # c itself blows up at the equator; callers use the finite reciprocal
    assert c_kappa(SpaceForm(1, 2), math.pi / 2) > 1e30
    assert c_kappa_inv(SpaceForm(1, 2), math.pi / 2) < 1e-30


@given(
    kappa=st.sampled_from([-1, 0, 1]),
    r=st.floats(min_value=0.05, max_value=3.0),
)
def test_ct_squared_times_c_is_one(kappa, r):
    if kappa == 1:
        r = min(r, math.pi - 0.05)
    sf = SpaceForm(kappa, 2)
    _, ct = sn_ct(sf, r)
    product = ct * ct * c_kappa(sf, r)
    assert abs(product - 1.0) <= 1e-12


def test_sphere_potential_values():
    assert sphere_potential(GeodesicSphere(SpaceForm(0, 2), 1.0)) == 1.0
    w_eq = sphere_potential(GeodesicSphere(SpaceForm(1, 3), math.pi / 2))
    assert abs(w_eq - 2.0) < 1e-12
    w_hyp = sphere_potential(GeodesicSphere(SpaceForm(-1, 2), 1.0))
    assert abs(w_hyp - CSCH1_SQ) < 1e-15


def test_sphere_spectrum_circle():
    spec = sphere_spectrum(GeodesicSphere(SpaceForm(0, 2), 1.0), 5)
    assert np.allclose(spec.eigenvalues(5), [-1.0, 0.0, 0.0, 3.0, 3.0], atol=1e-14)


def test_sphere_spectrum_round_sphere():
    spec = sphere_spectrum(GeodesicSphere(SpaceForm(0, 3), 1.0), 5)
    assert np.allclose(spec.eigenvalues(5), [-2.0, 0.0, 0.0, 0.0, 4.0], atol=1e-14)


@given(
    kappa=st.sampled_from([-1, 0, 1]),
    n=st.integers(min_value=2, max_value=5),
    rho=st.floats(min_value=0.1, max_value=2.5),
)
@settings(max_examples=60)
def test_sphere_spectrum_bands(kappa, n, rho):
    if kappa == 1:
        rho = min(rho, math.pi - 0.1)
    sphere = GeodesicSphere(SpaceForm(kappa, n), rho)
    spec = sphere_spectrum(sphere, 10)
    w = sphere_potential(sphere)
    sn, _ = sn_ct(sphere.space_form, rho)
    # lowest band is the constant eigenfunction, exactly -W
    assert spec.entries[0].lam == -w
    # degree-1 band equals the literal formula and is the ambient-isometry kernel
    j1 = next(e for e in spec.entries if e.mode_j == 1)
    assert j1.lam == (n - 1) / sn**2 - w
    assert abs(j1.lam) <= 1e-12 * (1.0 + w)


def test_harmonic_multiplicities():
    assert [harmonic_multiplicity(2, j) for j in range(4)] == [1, 2, 2, 2]
    assert [harmonic_multiplicity(3, j) for j in range(4)] == [1, 3, 5, 7]
    assert [harmonic_multiplicity(4, j) for j in range(4)] == [1, 4, 9, 16]
    # dimension identity: harmonics = degree-j polys minus degree-(j-2) polys
    for n in (4, 5, 6):
        for j in range(2, 6):
            expect = math.comb(n - 1 + j, j) - math.comb(n - 3 + j, j - 2)
            assert harmonic_multiplicity(n, j) == expect
        assert harmonic_multiplicity(n, 1) == n


def test_slice_shape_product():
    slab = WarpedSlab.product(2.0)
    assert slice_shape(slab, "bottom") == 0.0
    assert slice_shape(slab, "top") == 0.0


def test_slice_shape_horosphere():
    slab = WarpedSlab.horosphere(1.5)
    assert abs(slice_shape(slab, "bottom") + 1.0) < 1e-12
    assert abs(slice_shape(slab, "top") - 1.0) < 1e-12


def test_slice_shape_tabulated():
    ts = np.linspace(0.0, 1.0, 60)
    slab = WarpedSlab.from_samples(ts, np.exp(-ts))
    assert abs(slice_shape(slab, "bottom") + 1.0) < 1e-4
    assert abs(slice_shape(slab, "top") - 1.0) < 1e-4


def test_slice_shape_reflection_swaps_ends():
    ts = np.linspace(0.0, 1.0, 80)
    fs = 1.0 + 0.3 * np.sin(2.1 * ts) + 0.1 * ts**2
    slab = WarpedSlab.from_samples(ts, fs)
    reflected = WarpedSlab.from_samples(ts, fs[::-1])
    assert abs(slice_shape(reflected, "bottom") - slice_shape(slab, "top")) < 1e-4
    assert abs(slice_shape(reflected, "top") - slice_shape(slab, "bottom")) < 1e-4


def test_warped_slab_validation():
    with pytest.raises(GeometryDomainError):
        WarpedSlab.product(0.0)
    with pytest.raises(GeometryDomainError):
        WarpedSlab.from_samples([0, 1, 2, 3], [1.0, 0.5, -0.1, 0.2])


def test_space_form_validation():
    with pytest.raises(GeometryDomainError):
        SpaceForm(2, 3)
    with pytest.raises(GeometryDomainError):
        SpaceForm(0, 1)
    with pytest.raises(GeometryDomainError):
        GeodesicSphere(SpaceForm(1, 2), math.pi)
