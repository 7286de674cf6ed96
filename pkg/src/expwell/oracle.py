"""Independent reference solvers.

``numerov_*`` integrate -psi'' + (g^2 e^r - E) psi = 0 outward from r = 0 in
hardware floating point and never touch the multiprecision Bessel stack.
``general_solution_value`` evaluates the two-term I-Bessel solution of
-y'' + a e^{bx} y = c y for residual checks against finite differences.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import mpmath
import numba
import numpy as np

from .secular import Parity
from .specfun import PrecisionPolicy, bessel_I, context, export, gamma_complex

# Renormalize once |psi| passes 2**RESCALE_EXP.
RESCALE_EXP = 600


class DomainTooSmall(ValueError):
    """The requested level does not fit below the integration cutoff."""


@dataclass(frozen=True)
class NumerovConfig:
    """Step, cutoff and energy tolerance of the shooting oracle.

    ``R_max=None`` picks ln(E/g^2) + ``tail`` for each energy searched, so the
    cutoff always sits ``tail`` units past the turning point.
    """

    h: float = 1e-4
    R_max: float | None = None
    E_tol: float = 1e-10
    tail: float = 6.0

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("h must be positive")
        if self.R_max is not None and not self.R_max > 0:
            raise ValueError("R_max must be positive")
        if not self.E_tol > 0:
            raise ValueError("E_tol must be positive")

    def cutoff(self, g: float, E: float) -> float:
        if self.R_max is not None:
            return self.R_max
        return max(math.log(max(E, g * g) / (g * g)), 0.0) + self.tail

    def check_resolution(self, g: float, R: float) -> None:
        limit = 0.25 / (g * math.exp(R / 2))
        if self.h > limit:
            raise ValueError(f"h = {self.h} too coarse for R_max = {R:.3f}; need h <= {limit:.3g}")


class Shot(NamedTuple):
    value: float  # psi(R) up to a positive power-of-two factor
    log2_scale: int  # psi(R) = value * 2**log2_scale
    nodes: int  # sign changes of psi on (0, R]


@numba.njit(cache=True)
def _numerov(g2, E, odd, h, n_steps):
    # Taylor start: psi'' = f psi, f = g2 e^r - E, f'(0) = f''(0) = g2
    f0 = g2 - E
    if odd:
        y0 = 0.0
        y1 = h + f0 * h ** 3 / 6.0 + 2.0 * g2 * h ** 4 / 24.0
    else:
        y0 = 1.0
        y1 = 1.0 + f0 * h * h / 2.0 + g2 * h ** 3 / 6.0 + (g2 + f0 * f0) * h ** 4 / 24.0
    # summed form of Numerov: u = (1 - h^2 f/12) psi, d_n = u_{n+1} - u_n,
    # d_n = d_{n-1} + h^2 f_n psi_n keeps rounding at O(eps) per step
    c = h * h / 12.0
    h2 = h * h
    eh = math.exp(h)
    f_cur = g2 * eh - E
    u0 = (1.0 - c * f0) * y0
    u1 = (1.0 - c * f_cur) * y1
    d = u1 - u0
    nodes = 0
    scale = 0
    big = 2.0 ** 600
    # the odd solution starts at its origin node, which is not counted
    last_sign = 1.0 if (odd or y1 >= 0.0) else -1.0
    if not odd and y1 < 0.0:
        nodes += 1
    for i in range(2, n_steps + 1):
        d += h2 * f_cur * y1
        u1 += d
        v = g2 * math.exp(i * h)
        f_cur = v - E
        y1 = u1 / (1.0 - c * f_cur)
        s = 1.0 if y1 >= 0.0 else -1.0
        if s != last_sign:
            nodes += 1
            last_sign = s
        if abs(y1) > big:
            y1 *= 2.0 ** -600
            u1 *= 2.0 ** -600
            d *= 2.0 ** -600
            scale += 600
    return y1, scale, nodes


def _shoot(g: float, E: float, parity: Parity, cfg: NumerovConfig, R: float) -> Shot:
    n_steps = max(2, int(round(R / cfg.h)))
    h = R / n_steps
    y, scale, nodes = _numerov(g * g, float(E), parity is Parity.ODD, h, n_steps)
    return Shot(float(y), int(scale), int(nodes))


def numerov_shot(g, E, parity: Parity, cfg: NumerovConfig = NumerovConfig()) -> Shot:
    """Endpoint value, its power-of-two scale and the node count on (0, R]."""
    g = float(g)
    R = cfg.cutoff(g, float(E))
    cfg.check_resolution(g, R)
    return _shoot(g, float(E), parity, cfg, R)


def numerov_endpoint(g, E, parity: Parity, cfg: NumerovConfig = NumerovConfig()) -> float:
    """psi(R_max) with psi(0) = 1 (even) or psi'(0) = 1 (odd).

    The returned number may carry a positive power-of-two rescaling applied
    during integration, so only its sign and zero set are meaningful once the
    solution has grown past 2**600.
    """
    g = float(g)
    E = float(E)
    if not E > g * g:
        raise ValueError("E must exceed g^2, the bottom of the well")
    R = cfg.cutoff(g, E)
    cfg.check_resolution(g, R)
    return _shoot(g, E, parity, cfg, R).value


def _wkb_energy(n: int, g: float) -> float:
    from .rootfind import wkb_momentum
    return wkb_momentum(n, g) ** 2


def numerov_energy(g, n: int, parity: Parity | None = None,
                   cfg: NumerovConfig = NumerovConfig()) -> tuple[float, float]:
    """Two-sided bound (E_lo, E_hi) on level n, width <= ``cfg.E_tol``.

    Half-line level j = n // 2 of either parity has j nodes on (0, R); the
    bisection keeps E_lo with <= j nodes and E_hi with > j nodes.
    """
    g = float(g)
    if parity is None:
        parity = Parity.of_level(n)
    if Parity.of_level(n) is not parity:
        raise ValueError(f"level {n} is not {parity.value}")
    j = n // 2
    # with R_max=None the cutoff follows an energy above the searched level
    E_ref = 1.5 * _wkb_energy(n, g) + 1.0
    R = cfg.cutoff(g, E_ref)
    cfg.check_resolution(g, R)

    def too_high(E):
        return _shoot(g, E, parity, cfg, R).nodes > j

    lo = g * g * (1 + 1e-12)
    if too_high(lo):
        raise DomainTooSmall(f"R_max = {R:.3f} cannot host level {n}")
    hi = max(E_ref, 2 * lo)
    while not too_high(hi):
        hi *= 2
        if math.log(hi / (g * g)) > R:
            raise DomainTooSmall(f"level {n} needs a cutoff beyond R_max = {R:.3f}")
    while hi - lo > cfg.E_tol:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if too_high(mid):
            hi = mid
        else:
            lo = mid
    if math.log(hi / (g * g)) > R - 1.0:
        raise DomainTooSmall(f"level {n} turning point lies within 1 of R_max = {R:.3f}")
    return lo, hi


# ---------------------------------------------------------------------------
# two-term I-Bessel general solution

@dataclass(frozen=True)
class GeneralSolutionCoeffs:
    """y = k1 e^{pi s/b} G(1 - 2is/b) I_{-2is/b}(z) + k2 e^{-pi s/b} G(1 + 2is/b) I_{2is/b}(z)

    with s = sqrt(c) and z = 2 sqrt(a e^{bx}) / b.
    """

    a: float
    b: float
    c: float
    k1: complex
    k2: complex

    def __post_init__(self):
        if self.b == 0:
            raise ValueError("b must be nonzero")
        if not self.a > 0:
            raise ValueError("a must be positive")

    @classmethod
    def real_pair(cls, a, b, c, k1) -> "GeneralSolutionCoeffs":
        """k2 chosen so that the two terms are complex conjugates (needs c > 0)."""
        if not c > 0:
            raise ValueError("real pairing needs c > 0")
        with mpmath.workprec(256):
            k1 = mpmath.mpc(k1)
            k2 = mpmath.conj(k1) * mpmath.exp(2 * mpmath.pi * mpmath.sqrt(c) / b)
        return cls(a, b, c, k1, k2)

    @classmethod
    def decaying(cls, g, E) -> "GeneralSolutionCoeffs":
        """Coefficients reproducing K_{2ik}(2g e^{x/2}) for a = g^2, b = 1, c = E."""
        ctx = context()
        with ctx.workprec(256):
            k = ctx.sqrt(ctx.mpf(E))
            pre = ctx.pi / (2j * ctx.sinh(2 * ctx.pi * k))
            g_minus = gamma_complex(ctx.mpc(1, -2 * k))
            g_plus = gamma_complex(ctx.mpc(1, 2 * k))
            k1 = pre / (ctx.exp(ctx.pi * k) * g_minus)
            k2 = -pre / (ctx.exp(-ctx.pi * k) * g_plus)
            return cls(ctx.mpf(g) ** 2, 1, E, export(k1), export(k2))


def general_solution_value(coeffs: GeneralSolutionCoeffs, x,
                           policy: PrecisionPolicy = PrecisionPolicy()):
    """Complex value of the two-term solution at x."""
    ctx = context()
    with ctx.workprec(policy.max_bits if policy.max_bits <= 512 else 512):
        a, b, c = ctx.mpf(coeffs.a), ctx.mpf(coeffs.b), ctx.mpf(coeffs.c)
        s = ctx.sqrt(ctx.mpc(c))
        nu = 2j * s / b
        z = 2 * ctx.sqrt(a * ctx.exp(b * ctx.mpf(x))) / b
        y = abs(z)
        i_minus = bessel_I(-nu, y, policy)
        i_plus = bessel_I(nu, y, policy)
        if z < 0:
            # I_nu(-y) = e^{i pi nu} I_nu(y)
            i_minus *= ctx.exp(-1j * ctx.pi * nu)
            i_plus *= ctx.exp(1j * ctx.pi * nu)
        t1 = ctx.mpc(coeffs.k1) * ctx.exp(ctx.pi * s / b) * gamma_complex(1 - nu, policy) * i_minus
        t2 = ctx.mpc(coeffs.k2) * ctx.exp(-ctx.pi * s / b) * gamma_complex(1 + nu, policy) * i_plus
        return export(t1 + t2)


def general_solution_samples(coeffs: GeneralSolutionCoeffs, grid,
                             policy: PrecisionPolicy = PrecisionPolicy()) -> np.ndarray:
    return np.array([complex(general_solution_value(coeffs, x, policy)) for x in grid])
