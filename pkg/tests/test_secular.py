import math
import warnings

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from expwell.oracle import numerov_energy
from expwell.rootfind import parity_roots
from expwell.secular import (
    AsymptoticDecay,
    Parity,
    RegularMatch,
    SecularSpec,
    WavefunctionSample,
    coupling,
    dpsi_regular,
    equivalent_even_forms_residual,
    ode_residual,
    psi_asym,
    psi_fullline,
    psi_regular,
    regular_coeffs,
    sample_wavefunction,
    secular_asym,
    secular_regular,
    turning_point,
)
from expwell.specfun import bessel_I, bessel_K_imag, bessel_K_shifted, hankel1

mp = mpmath.mp.clone()
mp.prec = 256
SQRT2 = coupling(g2=2)


@pytest.fixture(autouse=True)
def wide_arithmetic():
    # reference arithmetic on returned values must not round them to 53 bits
    with mpmath.workprec(256):
        yield


def odd_asym(g):
    return SecularSpec(Parity.ODD, AsymptoticDecay(), g)


def test_parity_of_level():
    assert [Parity.of_level(n) for n in range(4)] == [Parity.EVEN, Parity.ODD] * 2
    assert Parity.EVEN.sign == 1 and Parity.ODD.sign == -1


def test_value_types_validate():
    with pytest.raises(ValueError):
        RegularMatch(0)
    with pytest.raises(ValueError):
        SecularSpec(Parity.EVEN, AsymptoticDecay(), 0)
    with pytest.raises(ValueError):
        coupling(g=1, g2=1)
    with pytest.raises(ValueError):
        secular_asym(odd_asym(1), 0.0)


def test_coupling_from_square():
    assert abs(coupling(g2=2) ** 2 - 2) < mpmath.mpf(2) ** -8000


def test_odd_secular_changes_sign_across_roots():
    spec = odd_asym(SQRT2)
    for br in parity_roots(SQRT2, Parity.ODD, 3):
        a, b = spec(br.k_lo - 1e-6), spec(br.k_hi + 1e-6)
        assert (a > 0) != (b > 0)


@settings(max_examples=15, deadline=None)
@given(k=st.floats(0.01, 15), g=st.floats(0.05, 5), parity=st.sampled_from(list(Parity)))
def test_asymptotic_secular_is_real(k, g, parity):
    v = secular_asym(SecularSpec(parity, AsymptoticDecay(), g), k)
    assert isinstance(v, mpmath.mpf)


def test_odd_ground_root_matches_oracle():
    k1 = parity_roots(1.0, Parity.ODD, 1)[0].k_mid
    lo, hi = numerov_energy(1.0, 1)
    assert abs(k1 - math.sqrt(0.5 * (lo + hi))) < 1e-8


def test_even_secular_is_real_part_of_shifted_K():
    k, g = 1.3, 0.8
    v = secular_asym(SecularSpec(Parity.EVEN, AsymptoticDecay(), g), k)
    assert abs(v - mp.mpc(bessel_K_shifted(2 * k, 1, 2 * g)).real) < 1e-30 * abs(v)


def test_odd_zero_set_matches_hankel_form():
    g = SQRT2
    for br in parity_roots(g, Parity.ODD, 3):
        signs = []
        for k in (br.k_lo, br.k_hi):
            h = mp.mpc(hankel1(mp.mpc(0, 2 * k), 2 * g))
            # (i pi / 2) e^{-pi k} H^(1)_{2ik}(2ig) = K_{2ik}(2g) is real
            signs.append((h * 1j * mp.pi / 2 * mp.exp(-mp.pi * mp.mpf(k))).real > 0)
        assert signs[0] != signs[1]


# -- even forms -------------------------------------------------------------

def test_even_forms_share_a_nonzero_factor_off_root():
    f = equivalent_even_forms_residual(1.0, 1.0)
    assert f.hankel_difference != 0 and f.derivative != 0
    factor = f.hankel_difference / f.derivative
    assert abs(factor + 2 / mp.pi * mp.exp(mp.pi)) < 1e-25 * abs(factor)


def test_even_forms_vanish_together_at_roots():
    for br in parity_roots(2.0, Parity.EVEN, 2):
        lo = equivalent_even_forms_residual(br.k_lo, 2.0)
        hi = equivalent_even_forms_residual(br.k_hi, 2.0)
        assert (lo.hankel_difference > 0) != (hi.hankel_difference > 0)
        assert (lo.derivative > 0) != (hi.derivative > 0)


def test_ratio_coefficient_k_over_g_is_the_derivative_condition():
    f = equivalent_even_forms_residual(1.0, 2.0)
    half = f.hankel_difference / 2
    assert abs(mp.mpc(f.derived_ratio) - half) < 1e-25 * abs(half)
    assert abs(mp.mpc(f.printed_ratio) - half) > 1e-2 * abs(half)


# -- regular solution ---------------------------------------------------------

def test_odd_regular_coefficients():
    k, g = 1.7, 0.9
    c = regular_coeffs(Parity.ODD, k, g)
    nu = mp.mpc(0, 2 * k)
    assert abs(mp.mpc(c.D1) + bessel_I(nu, 2 * g)) < 1e-30 * abs(c.D1)
    assert abs(mp.mpc(c.D2) - bessel_K_imag(2 * k, 2 * g)) < 1e-30 * abs(c.D2)


def test_even_regular_coefficients():
    k, g = 1.7, 0.9
    c = regular_coeffs(Parity.EVEN, k, g)
    nu = mp.mpc(0, 2 * k)
    D1 = g * mp.mpc(bessel_I(nu + 1, 2 * g)) + 1j * k * mp.mpc(bessel_I(nu, 2 * g))
    D2 = g * mp.mpc(bessel_K_shifted(2 * k, 1, 2 * g)) - 1j * k * bessel_K_imag(2 * k, 2 * g)
    assert abs(mp.mpc(c.D1) - D1) < 1e-28 * abs(D1)
    assert abs(mp.mpc(c.D2) - D2) < 1e-28 * abs(D2)


@settings(max_examples=15, deadline=None)
@given(k=st.floats(0.05, 12), g=st.floats(0.05, 6))
def test_regular_origin_data(k, g):
    assert abs(psi_regular(Parity.EVEN, k, g, 0) - 0.5) < 1e-25
    assert abs(dpsi_regular(Parity.EVEN, k, g, 0)) < 1e-25
    assert abs(psi_regular(Parity.ODD, k, g, 0)) < 1e-25
    assert abs(dpsi_regular(Parity.ODD, k, g, 0) - 0.5) < 1e-25


def test_regular_derivative_agrees_with_difference_quotient():
    h = mpmath.mpf("1e-8")
    for parity in Parity:
        fd = (psi_regular(parity, 2.0, 1.0, 1 + h) - psi_regular(parity, 2.0, 1.0, 1 - h)) / (2 * h)
        d = dpsi_regular(parity, 2.0, 1.0, 1)
        assert abs(fd - d) < 1e-13 * abs(d)


def test_table1_lowest_bracket_with_wall_at_3():
    br = parity_roots(SQRT2, Parity.EVEN, 1, RegularMatch(3.0))[0]
    assert 4.12005 < br.E_lo < br.E_hi < 4.12010


def test_table1_fifth_level_with_wall_at_3_4():
    br = parity_roots(SQRT2, Parity.EVEN, 3, RegularMatch(3.4))[2]
    assert 18.2822 < br.E_lo < br.E_hi < 18.2830


def test_wall_at_3_puts_second_even_level_just_above_11_0075():
    # the Dirichlet root itself, not a rounding artifact of the bracket
    br = parity_roots(SQRT2, Parity.EVEN, 2, RegularMatch(3.0))[1]
    assert abs(br.E_mid - mpmath.mpf("11.0075023")) < 1e-6


def test_wall_convergence_is_monotone():
    exact = parity_roots(SQRT2, Parity.EVEN, 1)[0].k_mid
    x0 = turning_point(exact ** 2, SQRT2)
    errs = []
    for extra in (1, 2, 3, 4):
        br = parity_roots(SQRT2, Parity.EVEN, 1, RegularMatch(x0 + extra), k_tol=1e-14)[0]
        errs.append(abs(br.k_mid - exact))
    assert all(b < a for a, b in zip(errs, errs[1:]))


def test_secular_regular_is_psi_at_wall():
    spec = SecularSpec(Parity.ODD, RegularMatch(2.5), 1.0)
    assert secular_regular(spec, 2.0) == psi_regular(Parity.ODD, 2.0, 1.0, 2.5)
    with pytest.raises(TypeError):
        secular_regular(odd_asym(1.0), 2.0)


# -- asymptotic solution ----------------------------------------------------

def test_psi_asym_substitution():
    assert psi_asym(1, 1, 2) == bessel_K_imag(2, 2 * mp.e)


def test_psi_asym_tail_decreases():
    k, g = 3.0, 1.0
    x0 = turning_point(k * k, g)
    r = np.linspace(x0, x0 + 3, 40)
    vals = np.abs(sample_wavefunction("asymptotic", k, g, r).as_array(False))
    assert np.all(np.diff(vals) < 0)


def test_psi_asym_vanishes_at_odd_eigenvalue():
    br = parity_roots(1.0, Parity.ODD, 1)[0]
    scale = max(abs(psi_asym(br.k_mid, 1.0, r)) for r in (0.5, 1.0, 1.5))
    assert abs(psi_asym(br.k_mid, 1.0, 0)) < 1e-8 * scale


def test_representations_are_proportional_at_eigenvalue():
    g = 1.0
    for parity, j in ((Parity.EVEN, 1), (Parity.ODD, 1)):
        k = parity_roots(g, parity, j + 1)[j].k_mid
        x0 = turning_point(k ** 2, g)
        r = np.linspace(0, x0 + 1, 25)
        a = sample_wavefunction("asymptotic", k, g, r).as_array(False)
        b = sample_wavefunction("regular", k, g, r, parity).as_array(False)
        i = int(np.argmax(np.abs(b)))
        a = a * b[i] / a[i]
        assert np.max(np.abs(a - b)) < 1e-6 * np.max(np.abs(b))


# -- samples ------------------------------------------------------------------

def test_sample_validation():
    with pytest.raises(ValueError):
        WavefunctionSample("regular", np.array([0.0, 0.0]), (1, 2), 1, 1)
    with pytest.raises(ValueError):
        WavefunctionSample("bogus", np.array([0.0]), (1,), 1, 1)
    with pytest.raises(ValueError):
        WavefunctionSample("regular", np.array([0.0, 1.0]), (1,), 1, 1)
    with pytest.raises(ValueError):
        sample_wavefunction("regular", 1.0, 1.0, [-1.0, 0.0])


def test_fullline_extension():
    grid = np.linspace(0, 1, 11)
    for parity in Parity:
        half = sample_wavefunction("regular", 2.0, 1.0, grid, parity)
        full = psi_fullline(half, parity)
        assert full.representation == "fullline"
        assert np.allclose(full.grid, np.linspace(-1, 1, 21))
        v = full.values
        for j in range(10):
            assert v[j] == parity.sign * v[20 - j]
        if parity is Parity.ODD:
            assert v[10] == 0


def test_ode_residuals_of_both_representations():
    grid = np.round(np.arange(0, 1.0 + 5e-4, 1e-3), 12)
    for rep in ("asymptotic", "regular"):
        s = sample_wavefunction(rep, 1.0, 1.0, grid)
        assert ode_residual(s, 1.0, 1.0) < 1e-4


def test_mirrored_sample_keeps_its_residual():
    E = 2.0 ** 2
    grid = np.round(np.arange(0, 0.5 + 5e-4, 1e-3), 12)
    half = sample_wavefunction("regular", 2.0, 1.0, grid, Parity.ODD)
    full = psi_fullline(half, Parity.ODD)
    assert ode_residual(full, 1.0, E) < 2 * ode_residual(half, 1.0, E) + 1e-6


def test_zero_sample_has_zero_residual():
    s = WavefunctionSample("regular", np.linspace(0, 1, 11), (mpmath.mpf(0),) * 11, 1, 1)
    assert ode_residual(s, 1.0, 1.0) == 0


def test_coarse_grid_warns():
    s = WavefunctionSample("regular", np.linspace(0, 8, 6), (mpmath.mpf(1),) * 6, 1, 1)
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        ode_residual(s, 1.0, 1.0)
    assert any(issubclass(w.category, RuntimeWarning) for w in rec)
