"""
Plotting the CSV datasets
=========================

The figure commands of the command-line tool write plain CSV.  This script
builds the same rows in-process and draws them with matplotlib, which is not
a dependency of the library itself (``pip install matplotlib``).

Run it from the repository root; PNG files land in the current directory.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from expwell import coupling
from expwell.datasets import figure3_rows, figure4_rows, figure5_rows

# Odd secular function over k at a few couplings.  Multiplying by e^{pi k}
# keeps the oscillation visible; the zeros are the odd levels.
ks = np.linspace(0.2, 8, 200)
_, rows = figure3_rows([0.5, 1.0, 2.0], ks)
fig, ax = plt.subplots()
for g in (0.5, 1.0, 2.0):
    sel = [r for r in rows if r[0] == g and r[4] == "ok"]
    ax.plot([r[1] for r in sel], [float(r[3]) for r in sel], label=f"g={g}")
ax.axhline(0, color="k", lw=0.5)
ax.set(xlabel="k", ylabel="e^{pi k} K_{2ik}(2g)", ylim=(-3, 3))
ax.legend()
fig.savefig("odd_secular.png", dpi=120)

# Odd zero curves k_n(g) for the first few levels.
_, rows = figure4_rows(np.linspace(0.2, 4, 20), n_max=9)
fig, ax = plt.subplots()
for n in (1, 3, 5, 7, 9):
    sel = [r for r in rows if r[1] == n and r[6] != "failed"]
    ax.plot([r[0] for r in sel], [float(r[3]) for r in sel], label=f"n={n}")
ax.set(xlabel="g", ylabel="k_n")
ax.legend()
fig.savefig("odd_zero_curves.png", dpi=120)

# Regular wavefunctions just below and above a level: indistinguishable until
# the forbidden region, where the mismatch in k grows doubly exponentially.
_, rows, k = figure5_rows(coupling(g2=2), n=8, r_max=5.0, step=0.02)
r = np.array([row[0] for row in rows])
lower = np.array([float(row[1]) for row in rows])
upper = np.array([float(row[2]) for row in rows])
fig, ax = plt.subplots()
ax.plot(r, lower, label="k - 1e-4")
ax.plot(r, upper, "--", label="k + 1e-4")
bound = 2 * np.abs(lower[r < 3.5]).max()
ax.set(xlabel="r", ylabel="psi", ylim=(-bound, bound))
ax.legend()
fig.savefig("wavefunction_bounds.png", dpi=120)
print(f"wrote three PNG files; level 8 sits at k = {float(k):.10f}")
