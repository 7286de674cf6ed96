"""
Levels of the exponential well, three ways
==========================================

The potential g^2 exp|x| is symmetric, so every level is either even or odd
and only the half line r >= 0 needs solving.  This script finds the lowest
levels at g^2 = 2 with both secular functions and then checks them against
the floating-point shooting solver.
"""

from expwell import Parity, RegularMatch, coupling, numerov_energy, spectrum
from expwell.rootfind import parity_roots

g = coupling(g2=2)

# The asymptotic secular function uses the solution that decays at infinity,
# so its roots are the exact levels with nothing to tune.
table = spectrum(g, 6, k_tol=1e-13)
for br in table:
    print(f"n={br.n} {br.parity.value:4s}  {float(br.E_lo):.12f} < E < {float(br.E_hi):.12f}")

# The regular function instead starts from the origin data and imposes
# psi(R) = 0 at a finite wall.  A wall too close to the turning point pushes
# the level up; moving it out converges quickly because the wavefunction dies
# off doubly exponentially past x0.
exact = table[0].E_mid
for R in (2.0, 2.5, 3.0, 4.0, 5.0):
    br = parity_roots(g, Parity.EVEN, 1, RegularMatch(R), k_tol=1e-13)[0]
    print(f"R={R:3.1f}  E0={float(br.E_mid):.12f}  shift={float(br.E_mid - exact):+.2e}")

# Node counting with Numerov in hardware floats gives an independent bound.
for n in range(4):
    lo, hi = numerov_energy(float(g), n)
    rel = abs(0.5 * (lo + hi) - float(table[n].E_mid)) / lo
    print(f"n={n}  Numerov [{lo:.12f}, {hi:.12f}]  relative offset {rel:.1e}")
