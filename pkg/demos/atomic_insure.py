"""Buying insurance in one step: split C, sell the B tranche, keep A.

Runs the bundled scenario and reports what the insurance cost carol.

Run:  python demos/atomic_insure.py
"""
from pathlib import Path

from tranchesim.config import load_scenario
from tranchesim.scenario import run

here = Path(__file__).resolve().parent.parent / "scenarios"
report = run(load_scenario(here / "atomic_insure.yaml"))

carol = report.agents["carol"]
print("final state:", report.policy["final_state"])
print("carol:", {k: carol[k] for k in ("c_paid", "a_redeemed", "b_redeemed")})
for ev in report.events:
    if ev.get("agent") == "carol":
        print(ev)
print("C conserved:", report.conservation["c_conserved"])
