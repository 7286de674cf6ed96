import math

import pytest

from expwell.rootfind import (
    EnergyBracket,
    LostSignChange,
    MissedRootError,
    RawBracket,
    SweepPoint,
    assign_indices,
    continuity_violations,
    detect_precision_loss,
    parity_roots,
    refine,
    scan_sign_changes,
    spectrum,
    sweep_g,
    wkb_momentum,
)
from expwell.secular import AsymptoticDecay, Parity, SecularSpec, coupling
from expwell.specfun import PrecisionPolicy

SQRT2 = coupling(g2=2)


def spec(parity=Parity.ODD, g=SQRT2):
    return SecularSpec(parity, AsymptoticDecay(), g)


def bracket(n, parity, lo, hi, g=1.0):
    return EnergyBracket(n, parity, lo, hi, -1, 1, g, AsymptoticDecay())


# -- scanning -----------------------------------------------------------------

def test_scan_finds_odd_roots():
    found = scan_sign_changes(spec(), 0.01, 8, 800)
    assert len(found) >= 3
    assert not found.failures
    for raw in found:
        assert raw.k_lo < raw.k_hi
        assert (raw.f_lo > 0) != (raw.f_hi > 0)


def test_scan_of_constant_function_is_empty():
    assert len(scan_sign_changes(lambda k: 1.0, 0.01, 5, 50)) == 0


def test_finer_scan_keeps_every_root():
    coarse = scan_sign_changes(spec(), 0.5, 6, 300)
    fine = scan_sign_changes(spec(), 0.5, 6, 600)
    assert len(fine) == len(coarse)
    for a, b in zip(coarse, fine):
        assert a.k_lo <= b.k_lo and b.k_hi <= a.k_hi


@pytest.mark.parametrize("args", [(0.01, 5, 1), (0.0, 5, 10), (5, 5, 10)])
def test_scan_rejects_bad_grids(args):
    with pytest.raises(ValueError):
        scan_sign_changes(spec(), *args)


# -- refinement ---------------------------------------------------------------

def test_refine_meets_tolerance():
    raw = scan_sign_changes(spec(), 0.01, 8, 800)[0]
    br = refine(spec(), raw, 1e-12)
    assert br.k_hi - br.k_lo < 1e-12
    assert raw.k_lo <= br.k_lo < br.k_hi <= raw.k_hi
    assert (br.f_lo > 0) != (br.f_hi > 0)
    assert br.status == "ok" and br.n is None


def test_refine_without_sign_change_raises():
    raw = scan_sign_changes(spec(), 0.01, 8, 800)[0]
    with pytest.raises(LostSignChange):
        refine(spec(), RawBracket(raw.k_lo, raw.k_lo + 1e-9, raw.f_lo, raw.f_lo))


def test_easy_root_shows_no_precision_loss():
    br = parity_roots(2.0, Parity.EVEN, 1)[0]
    assert not detect_precision_loss(spec(Parity.EVEN, 2.0), br, bits=53)


# -- indexing -----------------------------------------------------------------

def test_bracket_invariants():
    with pytest.raises(ValueError):
        bracket(0, Parity.EVEN, 2.0, 1.0)
    with pytest.raises(ValueError):
        bracket(1, Parity.EVEN, 1.0, 2.0)
    b = bracket(0, Parity.EVEN, 2.0, 3.0)
    assert (b.E_lo, b.E_hi, b.k_mid, b.E_mid) == (4.0, 9.0, 2.5, 6.5)
    assert b.x0 == pytest.approx(math.log(6.5))


def test_assign_indices_alternates():
    even = [bracket(None, Parity.EVEN, 1.0, 1.1), bracket(None, Parity.EVEN, 3.0, 3.1)]
    odd = [bracket(None, Parity.ODD, 2.0, 2.1)]
    table = assign_indices(even, odd)
    assert [b.n for b in table] == [0, 1, 2]
    assert [b.parity for b in table] == [Parity.EVEN, Parity.ODD, Parity.EVEN]


def test_assign_indices_detects_gap():
    even = [bracket(None, Parity.EVEN, 1.0, 1.1), bracket(None, Parity.EVEN, 2.0, 2.1)]
    with pytest.raises(MissedRootError):
        assign_indices(even, [bracket(None, Parity.ODD, 3.0, 3.1)])


def test_wkb_estimate_is_close():
    table = spectrum(SQRT2, 9)
    for br in table:
        assert abs(wkb_momentum(br.n, SQRT2) - float(br.k_mid)) < 0.1 * float(br.k_mid)


# -- spectra and sweeps -------------------------------------------------------

@pytest.mark.parametrize("method", ["asymptotic", "regular"])
def test_spectrum_invariants(method):
    table = spectrum(1.0, 5, method)
    assert [b.n for b in table] == list(range(6))
    assert all(b.E_lo > 1.0 for b in table)
    assert all(s > 0 for s in table.spacings())
    assert all(b.k_hi - b.k_lo < 1e-9 for b in table)


def test_spectrum_rejects_unknown_method():
    with pytest.raises(ValueError):
        spectrum(1.0, 3, "nonsense")
    with pytest.raises(ValueError):
        spectrum(1.0, -1)


def test_methods_agree():
    a = spectrum(0.7, 4, "asymptotic").energies()
    b = spectrum(0.7, 4, "regular").energies()
    assert all(abs(x - y) < 1e-6 * x for x, y in zip(a, b))


def test_sweep_levels_grow_with_g():
    rows = sweep_g([0.5, 1.0, 1.5, 2.0], 4)
    assert {p.status for p in rows} == {"ok"}
    for n in range(5):
        ks = [float(p.k) for p in rows if p.n == n]
        assert len(ks) == 4 and all(b > a for a, b in zip(ks, ks[1:]))
    assert continuity_violations(rows) == []


def test_sweep_parity_filter():
    rows = sweep_g([1.0], 5, Parity.ODD)
    assert [p.n for p in rows] == [1, 3, 5]


def test_sweep_reports_failures_as_rows():
    tight = PrecisionPolicy(base_bits=64, max_bits=64)
    rows = sweep_g([20.0], 2, policy=tight)
    assert rows and all(p.status == "failed" and p.k is None for p in rows)
    assert all(p.message for p in rows)


@pytest.mark.parametrize("grid", [[1.0, 0.5], [0.0, 1.0], [-1.0]])
def test_sweep_rejects_bad_grid(grid):
    with pytest.raises(ValueError):
        sweep_g(grid, 2)


def test_continuity_flags_jumps():
    rows = [SweepPoint(1.0, 0, Parity.EVEN, 1.0, 1.0, "ok"),
            SweepPoint(1.1, 0, Parity.EVEN, 50.0, 50.0, "ok")]
    assert continuity_violations(rows) == [(0, 1.0, 1.1)]
