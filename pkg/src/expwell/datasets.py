"""Row builders behind the CLI commands and the acceptance checks.

Every builder returns ``(header, rows)`` where rows hold raw numbers (mpf,
float, int, str or None); formatting to text is left to the caller.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import mpmath
import numpy as np

from .oracle import NumerovConfig, numerov_energy
from .rootfind import (
    DEFAULT_K_TOL,
    DEFAULT_MARGIN,
    EnergyBracket,
    LostSignChange,
    MissedRootError,
    parity_roots,
    spectrum,
    sweep_g,
    wkb_momentum,
)
from .secular import (
    AsymptoticDecay,
    ImaginaryResidueError,
    Parity,
    RegularMatch,
    SecularSpec,
    psi_regular,
    sample_wavefunction,
    turning_point,
)
from .specfun import PrecisionExhausted, PrecisionPolicy

# failures that become a ``failed`` status instead of aborting a dataset
POINT_FAILURES = (PrecisionExhausted, ImaginaryResidueError, LostSignChange, MissedRootError)


@dataclass(frozen=True)
class Table1Ref:
    n: int
    E_lo: str
    E_hi: str
    R: float
    x0: float


# Reference even-parity brackets at g^2 = 2 with their Dirichlet cutoffs.
TABLE1_REFERENCE = (
    Table1Ref(0, "4.12005", "4.12010", 3.0, 0.72),
    Table1Ref(2, "11.0065", "11.0075", 3.0, 1.71),
    Table1Ref(4, "18.2822", "18.2830", 3.4, 2.21),
)


@dataclass(frozen=True)
class Table1Row:
    ref: Table1Ref
    bracket: EnergyBracket
    R: float | None

    @property
    def x0(self) -> float:
        return turning_point(self.bracket.E_mid, self.bracket.g)

    @property
    def intersects(self) -> bool:
        lo, hi = mpmath.mpf(self.ref.E_lo), mpmath.mpf(self.ref.E_hi)
        return bool(self.bracket.E_lo < hi and self.bracket.E_hi > lo)


def table1(g, method: str = "regular", k_tol: float = DEFAULT_K_TOL,
           policy: PrecisionPolicy = PrecisionPolicy(), R: float | None = None
           ) -> list[Table1Row]:
    """Even brackets for n = 0, 2, 4 next to the reference intervals.

    ``method="regular"`` uses each row's reference cutoff unless ``R``
    overrides it for all rows.
    """
    out = []
    asym = None
    for ref in TABLE1_REFERENCE:
        j = ref.n // 2
        if method == "asymptotic":
            if asym is None:
                asym = parity_roots(g, Parity.EVEN, len(TABLE1_REFERENCE), "asymptotic",
                                    policy, k_tol)
            out.append(Table1Row(ref, asym[j], None))
        elif method == "regular":
            cut = ref.R if R is None else R
            roots = parity_roots(g, Parity.EVEN, j + 1, RegularMatch(cut), policy, k_tol)
            out.append(Table1Row(ref, roots[j], cut))
        else:
            raise ValueError(f"unknown method {method!r}")
    return out


def _bracket_R(br: EnergyBracket):
    return br.method.R if isinstance(br.method, RegularMatch) else None


SPECTRUM_HEADER_ONE = ("n", "parity", "E_lo", "E_hi", "method", "R", "precision_flag", "status")
SPECTRUM_HEADER_BOTH = ("n", "parity", "asymptotic_E_lo", "asymptotic_E_hi",
                        "asymptotic_precision_flag", "regular_E_lo", "regular_E_hi", "regular_R",
                        "regular_precision_flag", "status")


def spectrum_rows(g, n_max: int, method: str = "asymptotic", policy=PrecisionPolicy(),
                  k_tol: float = DEFAULT_K_TOL, margin: float = DEFAULT_MARGIN,
                  R: float | None = None, oracle: bool = False):
    """Rows for ``spectrum``; ``method="both"`` puts the methods side by side."""
    reg_method = "regular" if R is None else RegularMatch(R)
    if method == "both":
        a = spectrum(g, n_max, "asymptotic", policy, k_tol)
        r = spectrum(g, n_max, reg_method, policy, k_tol, margin)
        header = list(SPECTRUM_HEADER_BOTH)
        rows = [[x.n, x.parity.value, x.E_lo, x.E_hi, x.precision_flag,
                 y.E_lo, y.E_hi, _bracket_R(y), y.precision_flag,
                 "precision_flagged" if (x.precision_flag or y.precision_flag) else "ok"]
                for x, y in zip(a, r)]
    else:
        m = reg_method if method == "regular" else method
        tab = spectrum(g, n_max, m, policy, k_tol, margin)
        header = list(SPECTRUM_HEADER_ONE)
        rows = [[b.n, b.parity.value, b.E_lo, b.E_hi, tab.method, _bracket_R(b),
                 b.precision_flag, b.status] for b in tab]
    if oracle:
        header[-1:-1] = ["oracle_E_lo", "oracle_E_hi"]
        for row in rows:
            lo, hi = numerov_energy(float(g), row[0])
            row[-1:-1] = [lo, hi]
    return header, rows


FIGURE3_HEADER = ("g", "k", "secular_odd", "scaled", "status")


def figure3_rows(g_grid: Sequence[float], k_grid: Sequence[float],
                 policy: PrecisionPolicy = PrecisionPolicy()):
    """Odd secular surface K_{2ik}(2g) over a (g, k) grid.

    ``scaled`` multiplies by e^{pi k}, the modulus that separates K_{2ik} from
    the first Hankel function H_{2ik}(2ig); it keeps the surface O(1).
    """
    rows = []
    for g in g_grid:
        for k in k_grid:
            spec = SecularSpec(Parity.ODD, AsymptoticDecay(), g, policy)
            try:
                v = spec(k)
            except POINT_FAILURES:
                rows.append([g, k, None, None, "failed"])
                continue
            rows.append([g, k, v, v * mpmath.exp(mpmath.pi * k), "ok"])
    return FIGURE3_HEADER, rows


SWEEP_HEADER = ("g", "n", "parity", "k", "k_lo", "k_hi", "status")


def _sweep_rows(points):
    return [[p.g, p.n, p.parity.value, p.k, p.k_lo, p.k_hi, p.status] for p in points]


def figure4_rows(g_grid: Sequence[float], n_max: int = 45, policy=PrecisionPolicy(),
                 k_tol: float = 1e-8):
    """Odd zero curves k_n(g), n = 1, 3, ..., n_max."""
    pts = sweep_g(g_grid, n_max, Parity.ODD, "asymptotic", policy, k_tol)
    return SWEEP_HEADER, _sweep_rows(pts)


def figure6_rows(g_grid: Sequence[float], k_window=(25.0, 40.0), policy=PrecisionPolicy(),
                 k_tol: float = 1e-8, parity: Parity = Parity.EVEN):
    """Zero curves of one parity restricted to ``k_lo < k < k_hi``.

    All roots below the window are found as well so the level index n stays
    exact; only those inside the window are reported.
    """
    k_lo, k_hi = k_window
    rows = []
    for g in g_grid:
        first = 0 if parity is Parity.EVEN else 1
        # enough same-parity levels to pass k_hi, from the semiclassical count
        n_top = first
        while wkb_momentum(n_top, g) < k_hi:
            n_top += 2
        count = n_top // 2 + 2
        while True:
            try:
                roots = parity_roots(g, parity, count, "asymptotic", policy, k_tol)
            except POINT_FAILURES:
                rows.append([g, None, parity.value, None, None, None, "failed"])
                break
            if roots[-1].k_lo > k_hi:
                for br in roots:
                    if k_lo < br.k_mid < k_hi:
                        rows.append([g, br.n, parity.value, br.k_mid, br.k_lo, br.k_hi,
                                     br.status])
                break
            count += 2
    return SWEEP_HEADER, rows


FIGURE5_HEADER = ("r", "psi_lower", "psi_upper", "status")


def figure5_rows(g, n: int = 8, delta: float = 1e-4, r_max: float = 5.0,
                 step: float = 0.01, policy=PrecisionPolicy()):
    """Regular wavefunctions at k_n - delta and k_n + delta on [0, r_max]."""
    parity = Parity.of_level(n)
    roots = parity_roots(g, parity, n // 2 + 1, "asymptotic", policy)
    k = roots[n // 2].k_mid
    grid = np.round(np.arange(0.0, r_max + step / 2, step), 12)
    cols = []
    for kk in (k - delta, k + delta):
        try:
            cols.append(list(sample_wavefunction("regular", kk, g, grid, parity, policy).values))
        except POINT_FAILURES:
            vals = []
            for r in grid:
                try:
                    vals.append(psi_regular(parity, kk, g, float(r), policy))
                except POINT_FAILURES:
                    vals.append(None)
            cols.append(vals)
    rows = [[float(r), a, b, "ok" if a is not None and b is not None else "failed"]
            for r, a, b in zip(grid, *cols)]
    return FIGURE5_HEADER, rows, k


WAVEFUNCTION_HEADER = ("x", "psi", "status")


def wavefunction_rows(g, k, parity: Parity, representation: str, grid: Iterable[float],
                      policy=PrecisionPolicy()):
    from .secular import psi_fullline
    grid = np.asarray(list(grid), dtype=float)
    rep = "regular" if representation == "fullline" else representation
    sample = sample_wavefunction(rep, k, g, grid, parity, policy)
    if representation == "fullline":
        sample = psi_fullline(sample, parity)
    return WAVEFUNCTION_HEADER, [[float(x), v, "ok"] for x, v in zip(sample.grid, sample.values)]


def oracle_energy(g, n: int, cfg: NumerovConfig = NumerovConfig()) -> float:
    lo, hi = numerov_energy(float(g), n, cfg=cfg)
    return 0.5 * (lo + hi)
