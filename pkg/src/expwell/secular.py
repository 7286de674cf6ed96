"""Secular functions and wavefunctions for the well V(x) = g^2 exp|x|.

Only the half line r = |x| >= 0 is handled; parity fixes the data at the
origin.  Two exact representations are available:

* the asymptotically decaying solution ``K_{2ik}(2g e^{r/2})``, whose value
  (odd) or slope (even) at r = 0 gives the secular function;
* the regular solution ``D1 K_nu(w) + D2 I_nu(w)``, ``w = 2g e^{r/2}``,
  built from the origin conditions, with the eigenvalue imposed by a
  Dirichlet wall ``psi(R) = 0``.

The asymptotic secular functions are real by construction: the odd one is
``K_{2ik}(2g)`` and the even one ``Re K_{1+2ik}(2g)``, which equals
``-dK_{2ik}(x)/dx`` at ``x = 2g``.  The complex Hankel forms differ from these
by nonzero factors and are only used to cross-check zero sets.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence, Union

import mpmath
import numpy as np

from .specfun import (
    PrecisionExhausted,
    PrecisionPolicy,
    _escalate,
    _k_imag_shift,
    bessel_K_shifted,
    context,
    export,
    hankel1,
)

# Scan floor for the trial momentum; eigenvalues satisfy k > g > 0.
K_MIN = 1e-6


class Parity(enum.Enum):
    EVEN = "even"
    ODD = "odd"

    @property
    def sign(self) -> int:
        return 1 if self is Parity.EVEN else -1

    @classmethod
    def of_level(cls, n: int) -> "Parity":
        return cls.EVEN if n % 2 == 0 else cls.ODD


@dataclass(frozen=True)
class AsymptoticDecay:
    """Impose the origin condition on the decaying K solution."""

    name = "asymptotic"


@dataclass(frozen=True)
class RegularMatch:
    """Impose psi(R) = 0 on the regular solution."""

    R: float
    name = "regular"

    def __post_init__(self):
        if not self.R > 0:
            raise ValueError("cutoff R must be positive")


Method = Union[AsymptoticDecay, RegularMatch]


def coupling(g=None, g2=None, bits: int = 8192 + 64):
    """Return g as an mpf, given either g or g^2 (exactly one)."""
    if (g is None) == (g2 is None):
        raise ValueError("give exactly one of g and g2")
    with mpmath.workprec(bits):
        val = mpmath.mpf(g) if g is not None else mpmath.sqrt(mpmath.mpf(g2))
    if not val > 0:
        raise ValueError("coupling must be positive")
    return val


def turning_point(E, g) -> float:
    """x0 with g^2 e^{x0} = E."""
    return math.log(float(E) / float(g) ** 2)


@dataclass(frozen=True)
class SecularSpec:
    """One real secular function of k: parity x method at fixed coupling."""

    parity: Parity
    method: Method
    g: object
    policy: PrecisionPolicy = field(default_factory=PrecisionPolicy)

    def __post_init__(self):
        if not self.g > 0:
            raise ValueError("coupling g must be positive")

    def __call__(self, k):
        return secular_value(self, k)

    def with_policy(self, policy: PrecisionPolicy) -> "SecularSpec":
        return SecularSpec(self.parity, self.method, self.g, policy)


@dataclass(frozen=True)
class RegularCoefficients:
    D1: object
    D2: object


class EvenForms(NamedTuple):
    """Four evaluations of the even-parity condition at one (k, g).

    ``hankel_difference`` is H_{nu-1}(2ig) - H_{nu+1}(2ig) (real up to
    rounding), ``derivative`` is d/dg K_{2ik}(2g).  The two ratio forms are
    H_{nu-1}(2ig) - c H_nu(2ig) with c = g/k and c = k/g respectively.
    """

    hankel_difference: object
    derivative: object
    printed_ratio: object
    derived_ratio: object


class ImaginaryResidueError(ArithmeticError):
    """A wavefunction that must be real came out with a sizeable imaginary part."""


def _check_k(k):
    if not k >= K_MIN:
        raise ValueError(f"trial momentum must be >= {K_MIN}, got {k}")


# ---------------------------------------------------------------------------
# fixed-precision kernels returning (value, abs_err)

def _asym_at_origin(ctx, parity: Parity, k, g, bits):
    mu = 2 * ctx.mpf(k)
    x = 2 * ctx.mpf(g)
    s = 0 if parity is Parity.ODD else 1
    vals, _ = _k_imag_shift(ctx, mu, (s,), x, bits)
    val, err = vals[s]
    return val.real, err


def _regular_coeffs(ctx, parity: Parity, k, g, bits):
    """(D1, D2, err1, err2) at working precision ``bits``."""
    k = ctx.mpf(k)
    g = ctx.mpf(g)
    mu = 2 * k
    x = 2 * g
    if parity is Parity.ODD:
        kv, iv = _k_imag_shift(ctx, mu, (0,), x, bits)
        K0, eK0 = kv[0]
        I0, eI0 = iv[0]
        return -I0, K0, eI0, eK0
    kv, iv = _k_imag_shift(ctx, mu, (0, 1), x, bits)
    (K0, eK0), (K1, eK1) = kv[0], kv[1]
    (I0, eI0), (I1, eI1) = iv[0], iv[1]
    ik = ctx.mpc(0, k)
    D1 = g * I1 + ik * I0
    D2 = g * K1 - ik * K0
    return D1, D2, g * eI1 + k * eI0, g * eK1 + k * eK0


def _regular_at(ctx, coeffs, k, g, r, bits):
    """(psi, err, scale) of the regular solution at radius r."""
    D1, D2, e1, e2 = coeffs
    w = 2 * ctx.mpf(g) * ctx.exp(ctx.mpf(r) / 2)
    kv, iv = _k_imag_shift(ctx, 2 * ctx.mpf(k), (0,), w, bits)
    Kw, eKw = kv[0]
    Iw, eIw = iv[0]
    a = D1 * Kw
    b = D2 * Iw
    psi = a + b
    err = abs(D1) * eKw + abs(Kw) * e1 + abs(D2) * eIw + abs(Iw) * e2
    scale = max(abs(a), abs(b))
    err += scale * ctx.ldexp(1, -bits + 4)
    tol = 4 * err + ctx.ldexp(scale, -bits + 8)
    if abs(psi.imag) > tol:
        raise ImaginaryResidueError(
            f"imaginary residue {mpmath.nstr(abs(psi.imag), 5)} exceeds {mpmath.nstr(tol, 5)}")
    return psi.real, err, scale


def evaluate(spec: SecularSpec, k, bits: int):
    """Secular function at fixed working precision: ``(value, abs_err)``."""
    ctx = context()
    with ctx.workprec(bits):
        if isinstance(spec.method, AsymptoticDecay):
            val, err = _asym_at_origin(ctx, spec.parity, k, spec.g, bits)
        else:
            coeffs = _regular_coeffs(ctx, spec.parity, k, spec.g, bits)
            val, err, _ = _regular_at(ctx, coeffs, k, spec.g, spec.method.R, bits)
    return val, err


# ---------------------------------------------------------------------------
# public secular functions

def secular_asym(spec: SecularSpec, k):
    """K_{2ik}(2g) (odd) or Re K_{1+2ik}(2g) (even); zeros are eigen-momenta."""
    if not isinstance(spec.method, AsymptoticDecay):
        raise TypeError("secular_asym needs an AsymptoticDecay spec")
    _check_k(k)
    return _escalate(spec.policy, "secular_asym",
                     lambda ctx, bits: _asym_at_origin(ctx, spec.parity, k, spec.g, bits))


def secular_regular(spec: SecularSpec, k):
    """psi_regular(R) for the spec's cutoff; zeros approximate eigen-momenta."""
    if not isinstance(spec.method, RegularMatch):
        raise TypeError("secular_regular needs a RegularMatch spec")
    _check_k(k)

    def run(ctx, bits):
        coeffs = _regular_coeffs(ctx, spec.parity, k, spec.g, bits)
        val, err, _ = _regular_at(ctx, coeffs, k, spec.g, spec.method.R, bits)
        return val, err
    return _escalate(spec.policy, "secular_regular", run)


def secular_value(spec: SecularSpec, k):
    if isinstance(spec.method, AsymptoticDecay):
        return secular_asym(spec, k)
    return secular_regular(spec, k)


def regular_coeffs(parity: Parity, k, g, policy: PrecisionPolicy = PrecisionPolicy()
                   ) -> RegularCoefficients:
    """Coefficients of the regular solution fixed by the parity data at r = 0.

    Even: D1 = g I_{nu+1}(2g) + ik I_nu(2g), D2 = g K_{nu+1}(2g) - ik K_nu(2g).
    Odd:  D1 = -I_nu(2g), D2 = K_nu(2g).  Here nu = 2ik.
    """
    _check_k(k)
    ctx = context()
    bits = policy.base_bits
    for bits in policy.ladder():
        with ctx.workprec(bits):
            D1, D2, e1, e2 = _regular_coeffs(ctx, parity, k, g, bits)
        t = policy.target_rel_err
        if e1 <= t * abs(D1) and e2 <= t * abs(D2):
            return RegularCoefficients(export(D1), export(D2))
    raise PrecisionExhausted("regular_coeffs", bits)


def psi_regular(parity: Parity, k, g, r, policy: PrecisionPolicy = PrecisionPolicy()):
    """Regular solution at radius r >= 0 (psi(0) = 1/2 even, psi'(0) = 1/2 odd)."""
    _check_k(k)
    if r < 0:
        raise ValueError("r must be nonnegative")

    def run(ctx, bits):
        coeffs = _regular_coeffs(ctx, parity, k, g, bits)
        return _regular_at(ctx, coeffs, k, g, r, bits)
    return _escalate(policy, "psi_regular", run)


def dpsi_regular(parity: Parity, k, g, r, policy: PrecisionPolicy = PrecisionPolicy()):
    """d psi_regular / dr from the order-shift recurrences.

    With w = 2g e^{r/2}, dw/dr = w/2, 2 I'_nu = I_{nu-1} + I_{nu+1} and
    2 K'_nu = -(K_{nu-1} + K_{nu+1}).
    """
    _check_k(k)
    if r < 0:
        raise ValueError("r must be nonnegative")

    def run(ctx, bits):
        D1, D2, e1, e2 = _regular_coeffs(ctx, parity, k, g, bits)
        w = 2 * ctx.mpf(g) * ctx.exp(ctx.mpf(r) / 2)
        kv, iv = _k_imag_shift(ctx, 2 * ctx.mpf(k), (-1, 1), w, bits)
        dK = -(kv[-1][0] + kv[1][0]) / 2
        dI = (iv[-1][0] + iv[1][0]) / 2
        a = D1 * dK * w / 2
        b = D2 * dI * w / 2
        val = a + b
        eK = (kv[-1][1] + kv[1][1]) / 2
        eI = (iv[-1][1] + iv[1][1]) / 2
        err = w / 2 * (abs(D1) * eK + abs(dK) * e1 + abs(D2) * eI + abs(dI) * e2)
        scale = max(abs(a), abs(b))
        err += scale * ctx.ldexp(1, -bits + 4)
        if abs(val.imag) > 4 * err + ctx.ldexp(scale, -bits + 8):
            raise ImaginaryResidueError("imaginary residue in d psi/dr")
        return val.real, err, scale
    return _escalate(policy, "dpsi_regular", run)


def psi_asym(k, g, r, policy: PrecisionPolicy = PrecisionPolicy()):
    """Decaying solution K_{2ik}(2g e^{r/2})."""
    _check_k(k)
    if r < 0:
        raise ValueError("r must be nonnegative")

    def run(ctx, bits):
        w = 2 * ctx.mpf(g) * ctx.exp(ctx.mpf(r) / 2)
        vals, _ = _k_imag_shift(ctx, 2 * ctx.mpf(k), (0,), w, bits)
        val, err = vals[0]
        return val.real, err
    return _escalate(policy, "psi_asym", run)


def equivalent_even_forms_residual(k, g, policy: PrecisionPolicy = PrecisionPolicy()
                                   ) -> EvenForms:
    """Evaluate the even condition in its Hankel, derivative and ratio forms."""
    _check_k(k)
    ctx = context()
    with ctx.workprec(policy.max_bits):
        kk = ctx.mpf(k)
        gg = ctx.mpf(g)
        nu = ctx.mpc(0, 2 * kk)
    t = 2 * gg
    h_minus = hankel1(nu - 1, t, policy)
    h_plus = hankel1(nu + 1, t, policy)
    h_zero = hankel1(nu, t, policy)
    k_minus = bessel_K_shifted(2 * kk, -1, t, policy)
    k_plus = bessel_K_shifted(2 * kk, 1, t, policy)
    with ctx.workprec(policy.max_bits):
        h_minus, h_plus, h_zero = ctx.mpc(h_minus), ctx.mpc(h_plus), ctx.mpc(h_zero)
        diff = h_minus - h_plus
        # d/dg K_nu(2g) = 2 K'_nu(2g) = -(K_{nu-1} + K_{nu+1})(2g)
        deriv = -(ctx.mpc(k_minus) + ctx.mpc(k_plus))
        printed = h_minus - gg / kk * h_zero
        derived = h_minus - kk / gg * h_zero
        for name, v in (("hankel difference", diff), ("derivative", deriv)):
            if abs(v.imag) > 1e3 * policy.target_rel_err * abs(v):
                raise ImaginaryResidueError(f"{name} is not real")
        return EvenForms(export(diff.real), export(deriv.real), export(printed), export(derived))


# ---------------------------------------------------------------------------
# wavefunction samples

_REPRESENTATIONS = ("asymptotic", "regular", "fullline")


@dataclass(frozen=True)
class WavefunctionSample:
    """psi on an increasing grid, with values kept in full precision."""

    representation: str
    grid: np.ndarray
    values: tuple
    k: object
    g: object

    def __post_init__(self):
        if self.representation not in _REPRESENTATIONS:
            raise ValueError(f"unknown representation {self.representation!r}")
        grid = np.asarray(self.grid, dtype=float)
        object.__setattr__(self, "grid", grid)
        if len(grid) != len(self.values):
            raise ValueError("grid and values differ in length")
        if len(grid) > 1 and not np.all(np.diff(grid) > 0):
            raise ValueError("grid must be strictly increasing")
        if not all(mpmath.isfinite(v) for v in self.values):
            raise ValueError("wavefunction values must be finite")

    def as_array(self, normalize: bool = True) -> np.ndarray:
        """Values as floats, divided by max|psi| unless ``normalize`` is False."""
        vals = [mpmath.mpf(v) for v in self.values]
        if normalize:
            peak = max((abs(v) for v in vals), default=mpmath.mpf(0))
            if peak:
                vals = [v / peak for v in vals]
        return np.array([float(v) for v in vals])


def sample_wavefunction(representation: str, k, g, grid: Sequence[float],
                        parity: Parity = Parity.EVEN,
                        policy: PrecisionPolicy = PrecisionPolicy()) -> WavefunctionSample:
    """Evaluate the asymptotic or regular solution on a half-line grid.

    Values are certified relative to the larger of the two terms of the
    regular combination (or to |psi| for the asymptotic one), so grid points
    that sit on a node do not force runaway precision.
    """
    grid = np.asarray(grid, dtype=float)
    if np.any(grid < 0):
        raise ValueError("half-line grid must be nonnegative")
    if representation == "asymptotic":
        values = tuple(psi_asym(k, g, float(r), policy) for r in grid)
    elif representation == "regular":
        _check_k(k)
        cache = {}

        def coeffs(ctx, bits):
            if bits not in cache:
                cache[bits] = _regular_coeffs(ctx, parity, k, g, bits)
            return cache[bits]

        values = tuple(
            _escalate(policy, "psi_regular",
                      lambda ctx, bits, r=r: _regular_at(ctx, coeffs(ctx, bits), k, g, float(r), bits))
            for r in grid)
    else:
        raise ValueError("sample either the 'asymptotic' or the 'regular' representation")
    return WavefunctionSample(representation, grid, values, k, g)


def psi_fullline(sample: WavefunctionSample, parity: Parity) -> WavefunctionSample:
    """Mirror a half-line sample to x < 0 using psi(-x) = +-psi(x)."""
    r = sample.grid
    if len(r) == 0 or r[0] < 0:
        raise ValueError("expected a half-line sample starting at r >= 0")
    vals = list(sample.values)
    if r[0] == 0:
        left_r, left_v = r[1:], vals[1:]
        if parity is Parity.ODD:
            vals[0] = mpmath.mpf(0)
    else:
        left_r, left_v = r, vals
    s = parity.sign
    grid = np.concatenate([-left_r[::-1], r])
    values = tuple(s * v for v in reversed(left_v)) + tuple(vals)
    return WavefunctionSample("fullline", grid, values, sample.k, sample.g)


def ode_residual(sample: WavefunctionSample, g, E) -> float:
    """max_j |-psi'' + g^2 e^{|x_j|} psi - E psi| / max|psi| on a uniform grid.

    The second derivative is the three-point difference, so the residual of an
    exact solution is O(h^2).
    """
    x = sample.grid
    if len(x) < 5:
        raise ValueError("need at least 5 grid points")
    h = (x[-1] - x[0]) / (len(x) - 1)
    if not np.allclose(np.diff(x), h, rtol=1e-6, atol=1e-12):
        raise ValueError("ode_residual needs a uniform grid")
    g2 = float(g) ** 2
    V = g2 * np.exp(np.abs(x))
    if h * h * V.max() > 0.1:
        warnings.warn("grid too coarse for the potential: h^2 max V > 0.1", RuntimeWarning)
    psi = sample.as_array(normalize=True)
    if not np.any(psi):
        return 0.0
    lap = (psi[:-2] - 2 * psi[1:-1] + psi[2:]) / (h * h)
    res = -lap + (V[1:-1] - float(E)) * psi[1:-1]
    return float(np.max(np.abs(res)))
