"""Arbitrary-precision gamma and modified Bessel functions of complex order.

All evaluations run on a thread-local :class:`mpmath.MPContext`, so working
precision is never shared between threads.  Public functions take a
:class:`PrecisionPolicy` and escalate the working precision until the
estimated relative error of the result drops below the policy target; if
``max_bits`` is not enough they raise :class:`PrecisionExhausted` instead of
returning a degraded value.

Internally every evaluator works at a fixed precision and returns a
``(value, abs_err)`` pair.  The error estimate is driven by the size of the
largest series term, which is what makes the cancellation between ``I_{-nu}``
and ``I_nu`` (and hence the loss in ``K_nu``) visible.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator

import mpmath

__all__ = [
    "PrecisionPolicy",
    "PrecisionExhausted",
    "GammaPoleError",
    "bernoulli_b2",
    "gamma_complex",
    "bessel_I",
    "bessel_K",
    "bessel_K_imag",
    "bessel_K_shifted",
    "hankel1",
    "wronskian_residual",
    "context",
    "export",
]

# Slack bits on top of the policy target before a value is accepted.
GUARD_BITS = 8


class PrecisionExhausted(ArithmeticError):
    """The requested accuracy could not be reached within ``max_bits``."""

    def __init__(self, what: str, bits: int, lost_bits: float | None = None):
        msg = f"{what}: target accuracy not reached at {bits} bits"
        if lost_bits is not None:
            msg += f" (estimated {lost_bits:.0f} bits lost to cancellation)"
        super().__init__(msg)
        self.bits = bits
        self.lost_bits = lost_bits


class GammaPoleError(ValueError):
    """Gamma evaluated at a nonpositive integer."""


@dataclass(frozen=True)
class PrecisionPolicy:
    """Working-precision schedule shared by all multiprecision evaluators.

    Parameters
    ----------
    base_bits : int
        First working precision tried.
    max_bits : int
        Hard ceiling; exceeding it raises :class:`PrecisionExhausted`.
    escalation_factor : int
        Multiplier applied to the working precision on each retry.
    target_rel_err : float
        Accepted relative error of a returned value.
    """

    base_bits: int = 128
    max_bits: int = 8192
    escalation_factor: int = 2
    target_rel_err: float = 1e-30

    def __post_init__(self):
        if self.base_bits < 53:
            raise ValueError("base_bits must be >= 53")
        if self.base_bits > self.max_bits:
            raise ValueError("base_bits must not exceed max_bits")
        if self.escalation_factor < 2:
            raise ValueError("escalation_factor must be >= 2")
        if not 0.0 < self.target_rel_err < 1.0:
            raise ValueError("target_rel_err must lie in (0, 1)")

    @classmethod
    def fixed(cls, bits: int, target_rel_err: float | None = None) -> "PrecisionPolicy":
        """Single-rung policy emulating plain fixed-precision arithmetic.

        The default target leaves 12 bits of the mantissa as slack.
        """
        if target_rel_err is None:
            target_rel_err = 2.0 ** -(bits - 12 - GUARD_BITS)
        return cls(base_bits=bits, max_bits=bits, escalation_factor=2,
                   target_rel_err=target_rel_err)

    @property
    def target_bits(self) -> int:
        return math.ceil(-math.log2(self.target_rel_err))

    def ladder(self) -> Iterator[int]:
        """Working precisions in the order they are tried."""
        bits = self.base_bits
        while bits < self.max_bits:
            yield bits
            bits *= self.escalation_factor
        yield self.max_bits

    def escalated(self) -> "PrecisionPolicy":
        """Policy whose base rung is the next rung of this one."""
        nxt = min(self.base_bits * self.escalation_factor, self.max_bits)
        if nxt == self.base_bits:
            raise PrecisionExhausted("policy escalation", self.max_bits)
        return PrecisionPolicy(nxt, self.max_bits, self.escalation_factor,
                               self.target_rel_err)


_local = threading.local()


def context() -> mpmath.MPContext:
    """Thread-local multiprecision context used by every evaluator."""
    ctx = getattr(_local, "ctx", None)
    if ctx is None:
        ctx = _local.ctx = mpmath.MPContext()
    return ctx


def _log2(ctx, v) -> float:
    """log2 |v| as a float; -inf for zero."""
    if not v:
        return -math.inf
    a = abs(v)
    m, e = ctx.frexp(a)
    return math.log2(float(m)) + e


def export(v):
    """Rebind a context value to the global mpmath context, keeping every bit."""
    if hasattr(v, "_mpc_"):
        return mpmath.mp.make_mpc(v._mpc_)
    if hasattr(v, "_mpf_"):
        return mpmath.mp.make_mpf(v._mpf_)
    return v


def _accept(value, err, rel_err: float, scale=None) -> bool:
    ref = abs(value) if scale is None else scale
    return err <= rel_err * ref


def _escalate(policy: PrecisionPolicy, what: str,
              fn: Callable[[mpmath.MPContext, int], tuple]):
    """Run ``fn(ctx, bits) -> (value, err[, scale])`` up the policy ladder."""
    ctx = context()
    lost = None
    bits = policy.base_bits
    for bits in policy.ladder():
        with ctx.workprec(bits):
            out = fn(ctx, bits)
        value, err = out[0], out[1]
        scale = out[2] if len(out) > 2 else None
        if _accept(value, err, policy.target_rel_err, scale):
            return export(value)
        ref = abs(value) if scale is None else scale
        lost = bits - (_log2(ctx, ref) - _log2(ctx, err)) if err else None
    raise PrecisionExhausted(what, bits, lost)


# ---------------------------------------------------------------------------
# Bernoulli numbers

_bern_lock = threading.Lock()
_bern_cache: tuple[Fraction, ...] = ()


def _tangent_numbers(n: int) -> list[int]:
    # Brent & Harvey in-place tangent-number recurrence; T[k] = T_k, k >= 1.
    t = [0] * (n + 1)
    t[1] = 1
    for k in range(2, n + 1):
        t[k] = (k - 1) * t[k - 1]
    for k in range(2, n + 1):
        for j in range(k, n + 1):
            t[j] = (j - k) * t[j - 1] + (j - k + 2) * t[j]
    return t


def bernoulli_b2(n: int) -> tuple[Fraction, ...]:
    """Exact ``(B_2, B_4, ..., B_2n)``.

    The cache only grows, under a lock, and is replaced atomically, so readers
    never see a partially built table.
    """
    global _bern_cache
    cache = _bern_cache
    if len(cache) >= n:
        return cache[:n]
    with _bern_lock:
        if len(_bern_cache) < n:
            size = max(n, 2 * len(_bern_cache), 32)
            t = _tangent_numbers(size)
            out = []
            for k in range(1, size + 1):
                four_k = 1 << (2 * k)
                b = Fraction(2 * k * t[k], four_k * (four_k - 1))
                out.append(b if k % 2 else -b)
            _bern_cache = tuple(out)
        return _bern_cache[:n]


# ---------------------------------------------------------------------------
# Gamma

def _is_nonpositive_integer(ctx, z) -> bool:
    return z.imag == 0 and z.real <= 0 and z.real == ctx.floor(z.real)


def _lngamma_stirling(ctx, w, bits: int):
    """Stirling series for log Gamma(w), Re w >= threshold.

    Returns None when the series cannot reach ``2**-bits`` at this ``|w|``.
    The truncation bound is the first omitted term times sec^(2N+2)(arg(w)/2).
    """
    aw = abs(w)
    log2_aw = _log2(ctx, aw)
    # sec^2(theta/2) = 2|w| / (|w| + Re w)
    log2_sec2 = math.log2(2.0 * float(aw) / (float(aw) + float(w.real)))
    s = (w - 0.5) * ctx.log(w) - w + ctx.log(2 * ctx.pi) / 2
    inv = 1 / w
    inv2 = inv * inv
    power = inv
    n = 1
    prev_bound = math.inf
    bern = bernoulli_b2(64)
    while True:
        if len(bern) <= n:
            bern = bernoulli_b2(2 * n)
        b_next = bern[n]
        # bound on the remainder after n-1 terms: |B_2n| / (2n(2n-1)|w|^(2n-1))
        log2_bound = (math.log2(abs(b_next.numerator)) - math.log2(b_next.denominator)
                      - math.log2((2 * n + 2) * (2 * n + 1))
                      - (2 * n + 1) * log2_aw + (n + 1) * log2_sec2)
        b = bern[n - 1]
        s += ctx.mpf(b.numerator) / b.denominator / ((2 * n) * (2 * n - 1)) * power
        if log2_bound < -bits:
            return s
        if log2_bound > prev_bound:
            return None
        prev_bound = log2_bound
        power *= inv2
        n += 1


def _gamma(ctx, z, bits: int):
    """Gamma(z) at ``bits`` precision (relative error a few ulps)."""
    z = ctx.mpc(z)
    if _is_nonpositive_integer(ctx, z):
        raise GammaPoleError(f"Gamma has a pole at {z}")
    extra = 12 + max(0, int(_log2(ctx, abs(z) + 2)) * 2)
    wp = bits + extra
    with ctx.workprec(wp):
        threshold = max(8.0, 0.2 * wp)
        while True:
            shift = max(0, int(math.ceil(threshold - float(z.real))))
            w = z + shift
            lg = _lngamma_stirling(ctx, w, wp)
            if lg is not None:
                break
            threshold *= 1.5
        prod = ctx.mpc(1)
        for j in range(shift):
            prod *= z + j
        val = ctx.exp(lg) / prod
    return +val


def gamma_complex(z, policy: PrecisionPolicy = PrecisionPolicy()):
    """Complex gamma function by upward argument shift and Stirling series.

    >>> float(gamma_complex(5).real)
    24.0
    """
    def run(ctx, bits):
        val = _gamma(ctx, z, bits)
        # shift/Stirling keeps the relative error within a few ulps
        return val, abs(val) * ctx.ldexp(1, -bits + 4)
    return _escalate(policy, "gamma_complex", run)


def _rgamma(ctx, z, bits: int):
    if _is_nonpositive_integer(ctx, ctx.mpc(z)):
        return ctx.mpc(0)
    return 1 / _gamma(ctx, z, bits)


# ---------------------------------------------------------------------------
# Modified Bessel I: ascending series

def _i_series(ctx, nu, x, bits: int, rgamma_nu1=None):
    """I_nu(x) for x > 0 from the ascending series, with an error estimate.

    ``rgamma_nu1`` is 1/Gamma(nu+1) if the caller already has it.
    Returns ``(value, abs_err, log2_max_term)``.
    """
    nu = ctx.mpc(nu)
    if rgamma_nu1 is None:
        rgamma_nu1 = _rgamma(ctx, nu + 1, bits)
    if not rgamma_nu1:
        # nu a negative integer: I_{-n} = I_n
        return _i_series(ctx, -nu, x, bits)
    half = ctx.mpf(x) / 2
    lh = ctx.log(half)
    with ctx.workprec(bits + 8 + max(0, int(_log2(ctx, abs(nu * lh) + 1)))):
        t = ctx.exp(nu * lh)
    t *= rgamma_nu1
    q = half * half
    qf = float(q)
    nr, ni = float(nu.real), float(nu.imag)
    mag = ctx.mag
    total = t
    m = 0
    max_mag = mag(t)
    small = 0
    cap = 200 + 4 * int(float(x)) + bits
    while small < 3:
        d = (m + 1) * math.hypot(nr + m + 1, ni)
        ratio = qf / d if d else math.inf
        t = t * (q / (m + 1)) / (nu + m + 1)
        total += t
        m += 1
        tm = mag(t)
        if tm > max_mag:
            max_mag = tm
        if ratio < 1 and (tm < mag(total) - bits or tm < max_mag - 2 * bits):
            small += 1
        else:
            small = 0
        if m > cap:
            raise PrecisionExhausted("bessel_I series did not converge", bits)
    # each term carries O(m) accumulated rounding errors
    log2_err = max_mag + math.log2((3 * m + 8) * (m + 1)) - bits
    return total, ctx.ldexp(1, int(math.ceil(log2_err))), max_mag


def _check_x(x):
    if not x > 0:
        raise ValueError(f"argument must be positive, got {x}")


def bessel_I(nu, x, policy: PrecisionPolicy = PrecisionPolicy()):
    """Modified Bessel function of the first kind, I_nu(x), x > 0."""
    _check_x(x)

    def run(ctx, bits):
        val, err, _ = _i_series(ctx, nu, ctx.mpf(x), bits)
        return val, err
    return _escalate(policy, "bessel_I", run)


# ---------------------------------------------------------------------------
# Modified Bessel K

def _k_integer(ctx, n: int, x, bits: int):
    """K_n(x) for integer n >= 0 (Abramowitz & Stegun 9.6.11)."""
    n = abs(int(n))
    x = ctx.mpf(x)
    half = x / 2
    q = half * half
    head = ctx.mpf(0)
    max_mag = -math.inf
    if n:
        term = ctx.factorial(n - 1)
        for k in range(n):
            if k:
                term = term * (-q) / (k * (n - k))
            head += term
            max_mag = max(max_mag, _log2(ctx, term))
        head = head / (2 * half ** n)
        max_mag -= _log2(ctx, 2 * half ** n)
    i_n, i_err, i_mag = _i_series(ctx, n, x, bits)
    log_term = (-1) ** (n + 1) * ctx.log(half) * i_n.real
    max_mag = max(max_mag, i_mag + _log2(ctx, ctx.log(half)))
    # psi(k+1) + psi(n+k+1) with psi(j+1) = -euler + H_j
    h_k = ctx.mpf(0)
    h_nk = sum(ctx.mpf(1) / j for j in range(1, n + 1))
    t = half ** n / ctx.factorial(n)
    tail = ctx.mpf(0)
    k = 0
    small = 0
    while small < 3:
        term = (h_k + h_nk - 2 * ctx.euler) * t
        tail += term
        tm = _log2(ctx, term)
        max_mag = max(max_mag, tm + 1)
        k += 1
        h_k += ctx.mpf(1) / k
        h_nk += ctx.mpf(1) / (n + k)
        t = t * q / (k * (n + k))
        small = small + 1 if (tm < _log2(ctx, tail) - bits and float(q) < k * (n + k)) else 0
    val = head + log_term + (-1) ** n * tail / 2
    log2_err = max_mag + math.log2((3 * k + 8) * (k + 1)) - bits
    err = ctx.ldexp(1, int(math.ceil(log2_err))) + i_err * abs(ctx.log(half))
    return ctx.mpc(val), err


def _k_imag_shift(ctx, mu, shifts, x, bits: int):
    """K_{i mu + s}(x) for each s in ``shifts``; mu > 0 real, x > 0.

    Uses K_nu = pi (I_{-nu} - I_nu) / (2 sin(nu pi)) with
    I_{-i mu - s}(x) = conj(I_{i mu - s}(x)) and
    sin((i mu + s) pi) = (-1)^s i sinh(mu pi).
    Returns ``{s: (value, err)}`` plus the I values that were computed.
    """
    mu = ctx.mpf(mu)
    x = ctx.mpf(x)
    need = sorted({s for s in shifts} | {-s for s in shifts})
    base = ctx.mpc(0, mu)
    rg0 = _rgamma(ctx, base + 1, bits)
    rg = {}
    for s in need:
        # 1/Gamma(z - 1) = (z - 1)/Gamma(z), 1/Gamma(z + 1) = 1/(z Gamma(z))
        r = rg0
        if s > 0:
            for j in range(1, s + 1):
                r = r / (base + j)
        else:
            for j in range(0, -s):
                r = r * (base - j)
        rg[s] = r
    series = {s: _i_series(ctx, base + s, x, bits, rg[s]) for s in need}
    with ctx.workprec(bits + 8 + int(_log2(ctx, mu * ctx.pi + 1))):
        sh = ctx.sinh(mu * ctx.pi)
    out = {}
    for s in shifts:
        ip, ip_err, _ = series[s]
        im, im_err, _ = series[-s]
        den = 2 * sh * ctx.mpc(0, 1 if s % 2 == 0 else -1)
        val = ctx.pi * (ctx.conj(im) - ip) / den
        err = ctx.pi * (ip_err + im_err) / (2 * sh) + abs(val) * ctx.ldexp(1, -bits + 6)
        out[s] = (val, err)
    return out, {s: series[s][:2] for s in need}


def _k_general(ctx, nu, x, bits: int):
    """K_nu(x) for complex non-integer nu through the connection formula."""
    nu = ctx.mpc(nu)
    a, a_err, _ = _i_series(ctx, -nu, x, bits)
    b, b_err, _ = _i_series(ctx, nu, x, bits)
    with ctx.workprec(bits + 8 + int(_log2(ctx, abs(nu) * ctx.pi + 1))):
        sn = ctx.sin(nu * ctx.pi)
    val = ctx.pi * (a - b) / (2 * sn)
    err = ctx.pi * (a_err + b_err) / (2 * abs(sn)) + abs(val) * ctx.ldexp(1, -bits + 6)
    return val, err


def _split_order(ctx, nu):
    """Write nu = i mu + s with integer s if possible; else None."""
    nu = ctx.mpc(nu)
    re = nu.real
    if re == ctx.floor(re):
        return nu.imag, int(re)
    return None


def _k_any(ctx, nu, x, bits: int):
    split = _split_order(ctx, nu)
    if split is None:
        return _k_general(ctx, nu, x, bits)
    mu, s = split
    if mu == 0:
        return _k_integer(ctx, s, x, bits)
    if mu < 0:
        # K_nu = K_{-nu}
        mu, s = -mu, -s
    vals, _ = _k_imag_shift(ctx, mu, (s,), x, bits)
    return vals[s]


def bessel_K(nu, x, policy: PrecisionPolicy = PrecisionPolicy()):
    """K_nu(x) for complex order nu and real x > 0."""
    _check_x(x)
    return _escalate(policy, "bessel_K", lambda ctx, bits: _k_any(ctx, nu, x, bits))


def bessel_K_shifted(mu, s: int, x, policy: PrecisionPolicy = PrecisionPolicy()):
    """K_{i mu + s}(x) for real mu >= 0, integer shift |s| <= 2, x > 0."""
    _check_x(x)
    if mu < 0:
        raise ValueError("mu must be nonnegative")
    if abs(int(s)) > 2 or int(s) != s:
        raise ValueError("shift must be an integer with |s| <= 2")
    s = int(s)

    def run(ctx, bits):
        m = ctx.mpf(mu)
        if m == 0:
            return _k_integer(ctx, s, x, bits)
        vals, _ = _k_imag_shift(ctx, m, (s,), x, bits)
        return vals[s]
    return _escalate(policy, "bessel_K_shifted", run)


def bessel_K_imag(mu, x, policy: PrecisionPolicy = PrecisionPolicy()):
    """Real-valued K_{i mu}(x) = -pi Im I_{i mu}(x) / sinh(mu pi)."""
    val = bessel_K_shifted(mu, 0, x, policy)
    # conj(I) - I is purely imaginary in floating point, so this is exact
    if val.imag and abs(val.imag) > policy.target_rel_err * abs(val.real):
        raise ArithmeticError("K_{i mu}(x) acquired an imaginary part")
    return val.real


def hankel1(nu, t, policy: PrecisionPolicy = PrecisionPolicy()):
    """H^(1)_nu(i t) for real t > 0, from H^(1)_nu(i t) = 2/(i pi) e^{-i pi nu/2} K_nu(t)."""
    _check_x(t)

    def run(ctx, bits):
        k, err = _k_any(ctx, nu, t, bits)
        with ctx.workprec(bits + 8 + int(_log2(ctx, abs(ctx.mpc(nu)) + 1))):
            pref = 2 / (ctx.mpc(0, 1) * ctx.pi) * ctx.exp(ctx.mpc(0, -1) * ctx.pi * ctx.mpc(nu) / 2)
        return pref * k, abs(pref) * err + abs(pref * k) * ctx.ldexp(1, -bits + 4)
    return _escalate(policy, "hankel1", run)


def wronskian_residual(nu, x, policy: PrecisionPolicy = PrecisionPolicy()):
    """|I_nu K_{nu+1} + I_{nu+1} K_nu - 1/x|, which vanishes identically."""
    _check_x(x)
    ctx = context()
    i0 = bessel_I(nu, x, policy)
    i1 = bessel_I(ctx.mpc(nu) + 1, x, policy)
    k0 = bessel_K(nu, x, policy)
    k1 = bessel_K(ctx.mpc(nu) + 1, x, policy)
    with ctx.workprec(policy.max_bits):
        return export(abs(ctx.mpc(i0) * k1 + ctx.mpc(i1) * k0 - 1 / ctx.mpf(x)))
