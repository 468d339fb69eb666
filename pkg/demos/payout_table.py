"""Liquid-mode payouts for 100 C of insured capital as the redeemed amount varies.

Run:  python demos/payout_table.py
"""
import numpy as np

from tranchesim.fixedpoint import WAD, fmt, to_units
from tranchesim.insurance import compute_liquid_payouts, liquid_case, split_interest

c_s = to_units(100)
half = c_s // 2

print(f"{'C_T1':>8} {'i':>8} {'row':>4} {'A pays':>8} {'B pays':>8}")
for c_t1_dec in np.arange(0, 121, 10):
    c_t1 = to_units(int(c_t1_dec))
    # half of the redemption comes back from each venue
    interest = split_interest((half, half), (c_t1 // 2, c_t1 - c_t1 // 2))
    a, b = compute_liquid_payouts(c_s, c_t1, interest, half, half)
    print(f"{fmt(c_t1):>8} {fmt(interest):>8} {liquid_case(c_s, c_t1):>4} {fmt(a):>8} {fmt(b):>8}")

# A holders are made whole down to C_T1 = 50; below that B is wiped out first.
a, b = compute_liquid_payouts(c_s, to_units(60), 0, half, half)
assert a == WAD and b == to_units("0.2")
