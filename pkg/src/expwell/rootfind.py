"""Bracketing, bisection and level indexing for the secular functions.

Every accepted :class:`EnergyBracket` carries two momenta at which the
secular function has certified opposite signs, so ``(k_lo**2, k_hi**2)`` is
a two-sided bound on the energy.  A sign is certified when the function value
exceeds ``SIGN_GUARD`` times its estimated absolute error at the working
precision; otherwise the precision is escalated along the policy ladder.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import mpmath

from .secular import (
    K_MIN,
    AsymptoticDecay,
    ImaginaryResidueError,
    Method,
    Parity,
    RegularMatch,
    SecularSpec,
    evaluate,
)
from .specfun import PrecisionExhausted, PrecisionPolicy, export

SIGN_GUARD = 8
DEFAULT_DENSITY = 40  # scan points per unit k
DEFAULT_K_TOL = 1e-10
DEFAULT_MARGIN = 2.5  # R = x0 + margin for the regular method
MAX_WIDENINGS = 12  # factor 1.5 each, ~130x the initial scan range


class LostSignChange(ArithmeticError):
    """A bracket no longer shows a sign change when re-evaluated."""


class MissedRootError(RuntimeError):
    """Merged levels do not alternate in parity, so a root was skipped."""


class _SignUncertain(Exception):
    pass


@dataclass(frozen=True)
class RawBracket:
    k_lo: float
    k_hi: float
    f_lo: object
    f_hi: object


@dataclass
class ScanResult:
    """Sign-change intervals of a scan plus the grid points that failed."""

    brackets: list[RawBracket] = field(default_factory=list)
    failures: list[tuple[float, str]] = field(default_factory=list)

    def __len__(self):
        return len(self.brackets)

    def __iter__(self):
        return iter(self.brackets)

    def __getitem__(self, i):
        return self.brackets[i]


@dataclass(frozen=True)
class EnergyBracket:
    n: int | None
    parity: Parity
    k_lo: object
    k_hi: object
    f_lo: object
    f_hi: object
    g: object
    method: Method
    precision_flag: bool = False
    bits: int = 0

    def __post_init__(self):
        if not self.k_lo < self.k_hi:
            raise ValueError("bracket needs k_lo < k_hi")
        if self.n is not None and Parity.of_level(self.n) is not self.parity:
            raise ValueError(f"level {self.n} cannot have {self.parity.value} parity")

    @property
    def E_lo(self):
        return self.k_lo ** 2

    @property
    def E_hi(self):
        return self.k_hi ** 2

    @property
    def k_mid(self):
        return (self.k_lo + self.k_hi) / 2

    @property
    def E_mid(self):
        return (self.E_lo + self.E_hi) / 2

    @property
    def x0(self) -> float:
        return math.log(float(self.E_mid) / float(self.g) ** 2)

    @property
    def status(self) -> str:
        return "precision_flagged" if self.precision_flag else "ok"


@dataclass
class SpectrumTable:
    g: object
    brackets: list[EnergyBracket]
    method: str
    policy: PrecisionPolicy
    k_tol: float

    def __post_init__(self):
        E = [b.E_mid for b in self.brackets]
        if any(b <= a for a, b in zip(E, E[1:])):
            raise MissedRootError("energies are not strictly increasing")

    def __len__(self):
        return len(self.brackets)

    def __iter__(self):
        return iter(self.brackets)

    def __getitem__(self, n):
        return self.brackets[n]

    def energies(self) -> list[float]:
        return [float(b.E_mid) for b in self.brackets]

    def spacings(self) -> list[float]:
        E = self.energies()
        return [b - a for a, b in zip(E, E[1:])]


def _sign(x) -> int:
    return 1 if x >= 0 else -1


def _safe_eval(f: Callable, k):
    try:
        return f(k), None
    except (PrecisionExhausted, ImaginaryResidueError) as exc:
        return None, f"{type(exc).__name__}: {exc}"


def scan_sign_changes(spec: SecularSpec | Callable, k_lo, k_hi, steps: int) -> ScanResult:
    """Evaluate on ``steps + 1`` equispaced points and collect sign changes.

    ``spec`` may be any callable of k.  Failed grid points are listed in
    ``failures``; brackets only join consecutive successful evaluations.
    """
    if steps < 2:
        raise ValueError("steps must be >= 2")
    if not k_lo >= K_MIN:
        raise ValueError(f"k_lo must be >= {K_MIN}")
    if not k_hi > k_lo:
        raise ValueError("empty scan interval")
    ks = [float(k_lo) + (float(k_hi) - float(k_lo)) * i / steps for i in range(steps + 1)]
    return _brackets_from_samples(spec, ks, {})


def _brackets_from_samples(f, ks, cache) -> ScanResult:
    out = ScanResult()
    prev = None
    for k in ks:
        if k in cache:
            val, why = cache[k]
        else:
            val, why = cache[k] = _safe_eval(f, k)
        if val is None:
            out.failures.append((k, why))
            continue
        if prev is not None and _sign(prev[1]) != _sign(val):
            out.brackets.append(RawBracket(prev[0], k, prev[1], val))
        prev = (k, val)
    return out


def _certified(spec, k, bits):
    val, err = evaluate(spec, k, bits)
    if abs(val) <= SIGN_GUARD * err:
        raise _SignUncertain(k)
    return val


def refine(spec: SecularSpec, raw: RawBracket, k_tol: float = DEFAULT_K_TOL) -> EnergyBracket:
    """Bisect a sign-change bracket until ``k_hi - k_lo < k_tol``.

    Bisection starts at the policy's base precision.  If a sign cannot be
    certified there the bracket is flagged and the remaining bisection runs at
    escalated precision from the last certified interval.
    """
    policy = spec.policy
    flagged = False
    bits = policy.base_bits
    with mpmath.workprec(max(policy.max_bits, 128)):
        a, b = mpmath.mpf(raw.k_lo), mpmath.mpf(raw.k_hi)
        fa = fb = None
        for bits in policy.ladder():
            try:
                fa = _certified(spec, a, bits)
                fb = _certified(spec, b, bits)
                if _sign(fa) == _sign(fb):
                    raise LostSignChange(
                        f"no sign change on [{mpmath.nstr(a, 15)}, {mpmath.nstr(b, 15)}] at {bits} bits")
                while b - a >= k_tol:
                    m = (a + b) / 2
                    fm = _certified(spec, m, bits)
                    if _sign(fm) == _sign(fa):
                        a, fa = m, fm
                    else:
                        b, fb = m, fm
                break
            except (_SignUncertain, PrecisionExhausted):
                flagged = True
                continue
        else:
            raise PrecisionExhausted("refine", bits)
    br = EnergyBracket(None, spec.parity, export(a), export(b), export(fa), export(fb),
                       spec.g, spec.method, flagged, bits)
    if not flagged and detect_precision_loss(spec, br):
        br = dataclasses.replace(br, precision_flag=True)
    return br


def detect_precision_loss(spec: SecularSpec, bracket: EnergyBracket,
                          bits: int | None = None) -> bool:
    """True if the bracket's signs are not certifiable at ``bits``.

    ``bits`` defaults to the policy's base precision.  A sign is uncertain when
    |f| is within ``SIGN_GUARD`` of the error estimate from the cancellation
    tracker, or when the evaluation itself cannot meet the policy target.
    """
    bits = spec.policy.base_bits if bits is None else bits
    try:
        fa = _certified(spec, bracket.k_lo, bits)
        fb = _certified(spec, bracket.k_hi, bits)
    except (_SignUncertain, PrecisionExhausted, ImaginaryResidueError):
        return True
    return _sign(fa) == _sign(fb)


def assign_indices(even: Sequence[EnergyBracket], odd: Sequence[EnergyBracket],
                   *, method: str = "", policy: PrecisionPolicy | None = None,
                   k_tol: float = DEFAULT_K_TOL, g=None) -> SpectrumTable:
    """Merge per-parity roots into one table numbered 0, 1, 2, ... by energy."""
    merged = sorted(list(even) + list(odd), key=lambda b: b.k_mid)
    out = []
    for n, br in enumerate(merged):
        want = Parity.of_level(n)
        if br.parity is not want:
            raise MissedRootError(
                f"level {n} at E ~ {float(br.E_mid):.6g} is {br.parity.value}, expected {want.value}")
        out.append(dataclasses.replace(br, n=n))
    if g is None and out:
        g = out[0].g
    return SpectrumTable(g, out, method, policy or PrecisionPolicy(), k_tol)


# ---------------------------------------------------------------------------
# spectrum assembly

def wkb_momentum(n: int, g) -> float:
    """Semiclassical k_n, only used to size scan ranges.

    Solves 2 (k artanh(s0/k) - s0) = (n + 1/2) pi/2 with s0 = sqrt(k^2 - g^2).
    """
    g = float(g)
    target = (n + 0.5) * math.pi / 2

    def phase(k):
        s0 = math.sqrt(max(k * k - g * g, 0.0))
        return 2 * (k * math.atanh(min(s0 / k, 1 - 1e-16)) - s0)

    lo, hi = g, 2 * g + 1
    while phase(hi) < target:
        hi *= 2
    for _ in range(100):
        mid = (lo + hi) / 2
        if phase(mid) < target:
            lo = mid
        else:
            hi = mid
    return hi


def _levels_of(parity: Parity, n_max: int) -> list[int]:
    start = 0 if parity is Parity.EVEN else 1
    return list(range(start, n_max + 1, 2))


def find_roots(spec_for: Callable[[float], SecularSpec], count: int, g,
               k_tol: float = DEFAULT_K_TOL, density: int = DEFAULT_DENSITY,
               k_hi: float | None = None, max_doublings: int = 4) -> list[EnergyBracket]:
    """Lowest ``count`` roots of the spec returned by ``spec_for(k_hi)``.

    The scan starts just below k = g (no eigenvalue lies below) and grows until
    ``count`` sign changes are seen.  The scan density is then doubled until the
    number of roots under the count-th one stops changing.
    """
    g_f = float(g)
    k_start = max(K_MIN, 0.999 * g_f)
    if k_hi is None:
        k_hi = wkb_momentum(2 * count - 1, g_f) * 1.15 + 0.5
    for _ in range(MAX_WIDENINGS):
        spec = spec_for(k_hi)
        n_pts = max(4, int(math.ceil((k_hi - k_start) * density)))
        ks = [k_start + (k_hi - k_start) * i / n_pts for i in range(n_pts + 1)]
        cache: dict = {}
        scan = _brackets_from_samples(spec, ks, cache)
        if len(scan) >= count:
            break
        if len(scan.failures) == len(ks):
            raise PrecisionExhausted(f"every scan point in [{k_start:.6g}, {k_hi:.6g}] failed",
                                     spec.policy.max_bits)
        k_hi *= 1.5
    else:
        raise MissedRootError(f"found {len(scan)} of {count} roots below k = {k_hi:.6g}")
    # densify until the root count below the count-th root is stable
    for _ in range(max_doublings):
        cutoff = scan[count - 1].k_hi
        ks = sorted(set(ks) | {(a + b) / 2 for a, b in zip(ks, ks[1:]) if b <= cutoff})
        finer = _brackets_from_samples(spec, ks, cache)
        below = [br for br in finer if br.k_hi <= cutoff]
        if len(below) == len([br for br in scan if br.k_hi <= cutoff]):
            scan = finer
            break
        scan = finer
    if scan.failures:
        bad = ", ".join(f"{k:.6g}" for k, _ in scan.failures[:5])
        raise PrecisionExhausted(f"scan failed at k = {bad}", spec.policy.max_bits)
    return [refine(spec, raw, k_tol) for raw in scan.brackets[:count]]


def _rebracket(spec: SecularSpec, k0, step: float) -> RawBracket:
    """Sign-change bracket for ``spec`` around a nearby known root ``k0``."""
    k0 = float(k0)
    for _ in range(40):
        a, b = max(K_MIN, k0 - step), k0 + step
        fa, fb = spec(a), spec(b)
        if _sign(fa) != _sign(fb):
            return RawBracket(a, b, fa, fb)
        step *= 2
    raise LostSignChange(f"could not re-bracket root near k = {k0}")


def regular_spectrum_roots(parity: Parity, g, count: int, policy: PrecisionPolicy,
                           k_tol: float = DEFAULT_K_TOL, margin: float = DEFAULT_MARGIN,
                           density: int = DEFAULT_DENSITY, max_doublings: int = 3
                           ) -> list[EnergyBracket]:
    """Dirichlet-wall roots with a per-level cutoff R_n = x0(E_n) + margin.

    Each root is recomputed with the margin doubled until the two agree to
    ``10 * k_tol``; low levels at small g need the wall deeper in the
    forbidden region than the nominal margin puts it.
    """
    g_f = float(g)

    def spec_for(k_hi):
        R = 2 * math.log(k_hi / g_f) + margin
        return SecularSpec(parity, RegularMatch(R), g, policy)

    def at_margin(k0, m):
        R = 2 * math.log(float(k0) / g_f) + m
        spec = SecularSpec(parity, RegularMatch(R), g, policy)
        return refine(spec, _rebracket(spec, k0, 1e-5), k_tol)

    coarse = find_roots(spec_for, count, g, k_tol=1e-6, density=density)
    out = []
    for br in coarse:
        m = margin
        cur = at_margin(br.k_mid, m)
        for _ in range(max_doublings):
            m *= 2
            nxt = at_margin(cur.k_mid, m)
            converged = abs(nxt.k_mid - cur.k_mid) <= 10 * k_tol
            cur = nxt
            if converged:
                break
        out.append(cur)
    return out


def spectrum(g, n_max: int, method: str | Method = "asymptotic",
             policy: PrecisionPolicy = PrecisionPolicy(), k_tol: float = DEFAULT_K_TOL,
             margin: float = DEFAULT_MARGIN, density: int = DEFAULT_DENSITY) -> SpectrumTable:
    """Levels n = 0..n_max of one secular method, indexed and parity-checked.

    ``method`` is ``"asymptotic"``, ``"regular"`` (per-level cutoff
    ``x0 + margin``) or an explicit :class:`AsymptoticDecay` /
    :class:`RegularMatch` instance (fixed cutoff for every level).
    """
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    per_parity = {}
    for parity in Parity:
        count = len(_levels_of(parity, n_max))
        if count == 0:
            per_parity[parity] = []
            continue
        if method == "regular":
            roots = regular_spectrum_roots(parity, g, count, policy, k_tol, margin, density)
        else:
            m = AsymptoticDecay() if method == "asymptotic" else method
            if not isinstance(m, (AsymptoticDecay, RegularMatch)):
                raise ValueError(f"unknown method {method!r}")
            spec = SecularSpec(parity, m, g, policy)
            roots = find_roots(lambda _k, s=spec: s, count, g, k_tol, density)
        per_parity[parity] = roots
    name = method if isinstance(method, str) else method.name
    return assign_indices(per_parity[Parity.EVEN], per_parity[Parity.ODD],
                          method=name, policy=policy, k_tol=k_tol, g=g)


def parity_roots(g, parity: Parity, count: int, method: str | Method = "asymptotic",
                 policy: PrecisionPolicy = PrecisionPolicy(), k_tol: float = DEFAULT_K_TOL,
                 margin: float = DEFAULT_MARGIN, density: int = DEFAULT_DENSITY
                 ) -> list[EnergyBracket]:
    """Lowest ``count`` roots of one parity, numbered n = 0, 2, ... or 1, 3, ..."""
    if method == "regular":
        roots = regular_spectrum_roots(parity, g, count, policy, k_tol, margin, density)
    else:
        m = AsymptoticDecay() if method == "asymptotic" else method
        spec = SecularSpec(parity, m, g, policy)
        roots = find_roots(lambda _k: spec, count, g, k_tol, density)
    first = 0 if parity is Parity.EVEN else 1
    return [dataclasses.replace(br, n=first + 2 * j) for j, br in enumerate(roots)]


@dataclass(frozen=True)
class SweepPoint:
    g: float
    n: int
    parity: Parity
    k_lo: object
    k_hi: object
    status: str
    message: str = ""

    @property
    def k(self):
        return None if self.k_lo is None else (self.k_lo + self.k_hi) / 2


def sweep_g(g_grid: Iterable[float], n_max: int, parity: Parity | None = None,
            method: str | Method = "asymptotic", policy: PrecisionPolicy = PrecisionPolicy(),
            k_tol: float = 1e-8, density: int = DEFAULT_DENSITY) -> list[SweepPoint]:
    """Zero curves k_n(g) over a coupling grid.

    With ``parity`` set only that parity's levels up to ``n_max`` are traced.
    A coupling whose solve fails contributes rows with status ``failed``.
    """
    g_grid = [float(x) for x in g_grid]
    if any(x <= 0 for x in g_grid) or any(b <= a for a, b in zip(g_grid, g_grid[1:])):
        raise ValueError("g grid must be positive and ascending")
    parities = [parity] if parity is not None else list(Parity)
    rows: list[SweepPoint] = []
    for gv in g_grid:
        for par in parities:
            levels = _levels_of(par, n_max)
            if not levels:
                continue
            try:
                roots = parity_roots(gv, par, len(levels), method, policy, k_tol, density=density)
            except (PrecisionExhausted, LostSignChange, MissedRootError, ImaginaryResidueError) as exc:
                rows.extend(SweepPoint(gv, n, par, None, None, "failed", str(exc)) for n in levels)
                continue
            rows.extend(SweepPoint(gv, br.n, par, br.k_lo, br.k_hi, br.status) for br in roots)
    rows.sort(key=lambda p: (p.g, p.n))
    return rows


def continuity_violations(rows: Sequence[SweepPoint], factor: float = 10.0) -> list[tuple]:
    """(n, g_a, g_b) pairs where |dk| exceeds ``factor`` * (k/g) * dg.

    dk/dg of a level is below k/g for this potential, so the bound is a loose
    sanity check for jumps between neighbouring curves.
    """
    by_n: dict[int, list[SweepPoint]] = {}
    for p in rows:
        if p.status != "failed":
            by_n.setdefault(p.n, []).append(p)
    bad = []
    for n, pts in by_n.items():
        pts.sort(key=lambda p: p.g)
        for a, b in zip(pts, pts[1:]):
            dk = abs(float(b.k) - float(a.k))
            if dk > factor * float(b.k) / b.g * (b.g - a.g):
                bad.append((n, a.g, b.g))
    return bad
