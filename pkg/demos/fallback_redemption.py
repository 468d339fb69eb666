"""A venue freezes before maturity: holders take venue shares instead of C.

Builds the protocol by hand on a shared ledger, so every balance is visible.

Run:  python demos/fallback_redemption.py
"""
from tranchesim import Ledger, Policy, YieldVenue
from tranchesim.fixedpoint import WAD, fmt, to_units
from tranchesim.insurance import PeriodConfig

ledger = Ledger()
ledger.register_token("C", "genesis")
vx = YieldVenue("x", ledger, rate_per_step=to_units("0.001"))
vy = YieldVenue("y", ledger, rate_per_step=to_units("0.001"))
policy = Policy(PeriodConfig(10, 110, 120, 130), ledger, vx, vy)

ledger.mint("C", "alice", to_units(100), "genesis")
policy.split_risk("alice", to_units(100), 0)
ledger.transfer("B", "alice", "bob", to_units(50))   # bob insures alice's A
policy.invest(10)
vx.accrue(110)
vy.accrue(110)
vy.set_liquidity(False)                              # y freezes; divest would fail

print("state at T1 with y frozen:", policy.state(115).value)
print("state after T2:", policy.state(121).value)
print("state after T3:", policy.state(131).value)

to_x, to_y = policy.feasible_split(to_units(50))
cx, cy = policy.claim_a("alice", to_x, to_y, 121)
print(f"alice 50 A -> {fmt(cx)} Cx + {fmt(cy)} Cy")
to_x, to_y = policy.feasible_split(to_units(50))
cx, cy = policy.claim_b("bob", to_x, to_y, 131)
print(f"bob   50 B -> {fmt(cx)} Cx + {fmt(cy)} Cy")

for who in ("alice", "bob"):
    # Cx is still liquid, so it can be turned back into C
    shares = ledger.balance_of("Cx", who)
    if shares:
        got = vx.withdraw(who, shares)
        print(f"{who} withdraws {fmt(got)} C from x")
print("tranches outstanding:", policy.num_a() + policy.num_b())
print("Cx left in policy:", ledger.balance_of("Cx", "policy"), "base units")
print("bob's Cy stays frozen until y reopens:", fmt(ledger.balance_of("Cy", "bob")))
