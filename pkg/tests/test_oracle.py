import math

import mpmath
import numpy as np
import pytest

from expwell.oracle import (
    DomainTooSmall,
    GeneralSolutionCoeffs,
    NumerovConfig,
    general_solution_samples,
    general_solution_value,
    numerov_endpoint,
    numerov_energy,
    numerov_shot,
)
from expwell.rootfind import parity_roots
from expwell.secular import Parity, psi_asym

G_SQRT2 = math.sqrt(2)


# -- shooting -----------------------------------------------------------------

def test_config_validation():
    for kwargs in (dict(h=0), dict(R_max=-1), dict(E_tol=0)):
        with pytest.raises(ValueError):
            NumerovConfig(**kwargs)


def test_cutoff_follows_turning_point():
    cfg = NumerovConfig(tail=4)
    assert cfg.cutoff(1.0, math.e ** 2) == pytest.approx(6.0)
    assert NumerovConfig(R_max=8).cutoff(1.0, 100.0) == 8


def test_coarse_step_is_rejected():
    with pytest.raises(ValueError):
        numerov_endpoint(1.0, 4.0, Parity.EVEN, NumerovConfig(h=0.1, R_max=10))


def test_endpoint_requires_energy_above_floor():
    with pytest.raises(ValueError):
        numerov_endpoint(2.0, 3.9, Parity.EVEN)


def test_endpoint_flips_across_the_ground_state():
    cfg = NumerovConfig(R_max=8)
    below = numerov_endpoint(G_SQRT2, 4.12005, Parity.EVEN, cfg)
    above = numerov_endpoint(G_SQRT2, 4.12010, Parity.EVEN, cfg)
    assert below > 0 > above


def test_node_count_tracks_level():
    cfg = NumerovConfig(R_max=9)
    for n in range(6):
        lo, hi = numerov_energy(1.0, n, cfg=cfg)
        parity = Parity.of_level(n)
        assert numerov_shot(1.0, lo, parity, cfg).nodes == n // 2
        assert numerov_shot(1.0, hi, parity, cfg).nodes == n // 2 + 1


@pytest.mark.parametrize("n, lo, hi", [(0, 4.12005, 4.12010), (4, 18.2822, 18.2830)])
def test_energies_fall_in_reference_intervals(n, lo, hi):
    a, b = numerov_energy(G_SQRT2, n)
    assert lo < a <= b < hi
    assert b - a <= NumerovConfig().E_tol


def test_energy_matches_secular_root():
    k = parity_roots(1.0, Parity.ODD, 2)[1].k_mid
    a, b = numerov_energy(1.0, 3)
    assert abs(0.5 * (a + b) - float(k) ** 2) < 1e-8 * float(k) ** 2


def test_fourth_order_convergence():
    def E(h):
        lo, hi = numerov_energy(1.0, 0, cfg=NumerovConfig(h=h, tail=3, E_tol=1e-14))
        return 0.5 * (lo + hi)

    e1, e2, e3 = E(0.02), E(0.01), E(0.005)
    order = math.log2(abs(e1 - e2) / abs(e2 - e3))
    assert 3.6 < order < 4.4


def test_level_beyond_cutoff_is_reported():
    with pytest.raises(DomainTooSmall):
        numerov_energy(1.0, 30, cfg=NumerovConfig(R_max=3))


def test_parity_must_match_level():
    with pytest.raises(ValueError):
        numerov_energy(1.0, 2, Parity.ODD)


# -- two-term general solution ---------------------------------------------------

def _residual(coeffs, x, h=mpmath.mpf("1e-12")):
    with mpmath.workprec(256):
        f = [mpmath.mpc(general_solution_value(coeffs, x + d)) for d in (-h, 0, h)]
        second = (f[0] - 2 * f[1] + f[2]) / h ** 2
        rhs = (coeffs.a * mpmath.exp(coeffs.b * mpmath.mpf(x)) - coeffs.c) * f[1]
        return abs(second - rhs) / max(abs(f[1]), abs(rhs), 1e-300)


@pytest.mark.parametrize("b", [1.0, 0.7, -0.8])
def test_general_solution_solves_ode(b):
    coeffs = GeneralSolutionCoeffs(1.3, b, 2.0, 0.4 + 0.3j, -1.1j)
    for x in (-1.0, 0.0, 0.9):
        assert _residual(coeffs, x) < 1e-8


def test_real_pair_is_real():
    coeffs = GeneralSolutionCoeffs.real_pair(1.0, 1.0, 3.0, 0.2 + 0.7j)
    vals = general_solution_samples(coeffs, np.linspace(-1, 2, 7))
    assert np.max(np.abs(vals.imag)) < 1e-12 * np.max(np.abs(vals.real))
    with pytest.raises(ValueError):
        GeneralSolutionCoeffs.real_pair(1.0, 1.0, -1.0, 1)


def test_decaying_combination_is_the_K_solution():
    g, k = 0.9, 1.7
    coeffs = GeneralSolutionCoeffs.decaying(g, k * k)
    for r in (0.0, 0.5, 2.0, 3.0):
        v = mpmath.mpc(general_solution_value(coeffs, r))
        ref = psi_asym(k, g, r)
        assert abs(v - ref) < 1e-8 * abs(ref)


def test_general_coeff_validation():
    with pytest.raises(ValueError):
        GeneralSolutionCoeffs(1.0, 0.0, 1.0, 1, 1)
    with pytest.raises(ValueError):
        GeneralSolutionCoeffs(-1.0, 1.0, 1.0, 1, 1)
