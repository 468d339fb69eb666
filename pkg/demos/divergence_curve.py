"""Divergence loss of tranche/C pools as the tranche price moves.

Compares the closed form with a real fee-less pool that an arbitrageur
trades to each terminal price. Pass --plot to draw the curves (needs
matplotlib, which is not a package dependency).

Run:  python demos/divergence_curve.py [--plot]
"""
import sys

import numpy as np

from tranchesim.amm import arbitrage_divergence, divergence_loss

r = np.linspace(0.90, 1.20, 31)
d_ac = divergence_loss(1.02, r)
d_bc = divergence_loss(0.98, r)

worst = 0.0
for p_star, closed in zip(r, d_ac):
    traded = arbitrage_divergence(1.0, 1.02, p_star)["divergence_loss_float"]
    if closed:
        worst = max(worst, abs(traded - closed) / closed)
print(f"largest relative gap between pool and formula: {worst:.2e}")

for p_star, a, b in list(zip(r, d_ac, d_bc))[::5]:
    print(f"r={p_star:.2f}  D_AC={a:.6f}  D_BC={b:.6f}")

# a 4x price move costs an LP 20% against holding
print("r=4:", divergence_loss(1.0, 4.0))

if "--plot" in sys.argv:
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots()
    ax.plot(r, d_ac, label="A/C, from 1.02")
    ax.plot(r, d_bc, label="B/C, from 0.98")
    ax.set_xlabel("terminal tranche price in C")
    ax.set_ylabel("divergence loss")
    ax.legend()
    fig.savefig("divergence.png")
