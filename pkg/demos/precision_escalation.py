"""
Why the Bessel sums need extra bits
===================================

K_{i mu}(x) is built from two power series for I_{+i mu} and I_{-i mu}
whose terms grow to about e^x before they cancel down to a result of size
e^{-x}.  At x = 40 that loses more than 100 bits, so a fixed 53-bit or even
128-bit evaluation returns noise.  The precision policy watches the largest
term and retries with more bits until the requested accuracy is certified.
"""

import mpmath

from expwell.specfun import PrecisionExhausted, PrecisionPolicy, bessel_K_imag

mu, x = 1.0, 40.0
reference = mpmath.besselk(mpmath.mpc(0, mu), x).real

for max_bits in (64, 128, 256, 1024):
    policy = PrecisionPolicy(base_bits=64, max_bits=max_bits)
    try:
        value = bessel_K_imag(mu, x, policy)
    except PrecisionExhausted as exc:
        print(f"max_bits={max_bits:5d}: refused ({exc})")
        continue
    print(f"max_bits={max_bits:5d}: {mpmath.nstr(value, 20)}  rel. error {float(abs(value / reference - 1)):.1e}")

# The same guard drives root bracketing: a bracket whose end signs cannot be
# certified at the base precision is marked precision_flagged in every table.
