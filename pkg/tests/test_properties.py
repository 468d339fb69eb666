"""Hypothesis properties that span several modules."""
from hypothesis import given, settings, strategies as st

from tranchesim.config import load_scenario, parse_scenario
from tranchesim.errors import SimulationError
from tranchesim.fixedpoint import WAD
from tranchesim.insurance import OPERATIONS, PolicyState, liquid_totals, split_interest
from tranchesim.ledger import POLICY
from tranchesim.scenario import simulate

from conftest import SCENARIOS, Bench
from scenario_gen import random_scenario

units = st.integers(min_value=0, max_value=10**24)


@given(st.lists(st.tuples(st.sampled_from(["dep", "wd"]), units), max_size=25))
def test_zero_rate_venue_returns_deposits_exactly(seq):
    b = Bench()
    b.fund("u", 10**7)
    deposited = withdrawn = 0
    for op, n in seq:
        if op == "dep":
            amt = n % (b.bal("C", "u") + 1)
            b.vx.deposit("u", amt)
            deposited += amt
        else:
            withdrawn += b.vx.withdraw("u", n % (b.bal("Cx", "u") + 1))
    withdrawn += b.vx.withdraw("u", b.bal("Cx", "u"))
    assert withdrawn == deposited
    assert b.vx.reserve == 0


@given(st.lists(st.tuples(st.sampled_from(["dep", "wd", "acc", "loss"]), units), max_size=25),
       st.integers(0, 10**16))
def test_reserve_tracks_shares_times_rate(seq, rate):
    b = Bench(rate_x=rate)
    b.fund("u", 10**6)
    ops = 0
    for op, n in seq:
        try:
            if op == "dep":
                b.vx.deposit("u", n % (b.bal("C", "u") + 1))
            elif op == "wd":
                b.vx.withdraw("u", n % (b.bal("Cx", "u") + 1))
            elif op == "acc":
                b.vx.accrue(n % 100)
            else:
                b.vx.apply_loss(n % WAD)
        except SimulationError:
            continue
        ops += 1
        # at most one unit of floor dust per operation
        assert 0 <= b.vx.reserve - b.vx.backing() <= ops


@given(st.lists(st.tuples(st.sampled_from(OPERATIONS), st.sampled_from("hk"), units, units,
                          st.integers(0, 140)), max_size=30))
def test_equal_issuance_under_any_call_sequence(calls):
    b = Bench(rate_x=10**15, rate_y=10**14)
    b.fund("h", 10**6)
    b.fund("k", 10**6)
    clock = 0
    for op, who, n, m, dt in sorted(calls, key=lambda c: c[4]):
        b.accrue(dt - clock)
        clock = dt
        pol = b.policy
        try:
            if op == "split_risk":
                pol.split_risk(who, 2 * (n % 10**24), clock)
            elif op == "invest":
                pol.invest(clock)
            elif op == "divest":
                pol.divest(clock)
            elif op == "claim":
                pol.claim(who, n % (b.bal("A", who) + 1), m % (b.bal("B", who) + 1), clock)
            elif op == "claim_all":
                pol.claim_all(who, clock)
            elif op == "claim_a":
                pol.claim_a(who, n % (b.bal("A", who) + 1), 0, clock)
            else:
                pol.claim_b(who, 0, m % (b.bal("B", who) + 1), clock)
        except SimulationError:
            pass
        assert b.ledger.check_conservation()
        burned_a = pol.num_a()
        burned_b = pol.num_b()
        assert burned_a >= 0 and burned_b >= 0
        if op == "split_risk":
            assert pol.num_a() == pol.num_b()


@given(units, st.integers(0, 2 * 10**24), st.integers(0, 10**20))
def test_seniority_on_totals(c_half, c_t1, extra):
    c_s = 2 * c_half
    x = min(c_t1, c_half + extra)
    i = split_interest((c_half, c_half), (x, c_t1 - x))
    if c_s == 0:
        return
    a_total, b_total = liquid_totals(c_s, c_t1, i)
    assert a_total >= b_total
    if c_t1 > 0:
        assert (a_total == b_total) == (c_t1 >= c_s)


def _fallback_round(half, cx, cy, claimers):
    """Policy stuck in fallback with ``cx``/``cy`` shares; every holder redeems with its preferred mix."""
    b = Bench()
    b.ledger.mint("C", "seed", 2 * half + 2 * cx + 2 * cy + 2, "genesis")
    b.policy.split_risk("seed", 2 * half, 0)
    b.policy.invest(10)
    for v, tok, want in ((b.vx, "Cx", cx), (b.vy, "Cy", cy)):
        have = b.bal(tok, POLICY)
        if have > want:
            b.ledger.transfer(tok, POLICY, "sink", have - want)
        elif want > have:
            v.deposit("seed", want - have)
            b.ledger.transfer(tok, "seed", POLICY, want - have)
    b.vy.set_liquidity(False)
    n = len(claimers)
    holders = []
    for idx, (kind, pref) in enumerate(claimers):
        tok = "A" if kind == "a" else "B"
        b.ledger.transfer(tok, "seed", f"c{idx}", b.bal(tok, "seed") // (n - idx + 1))
        holders.append((f"c{idx}", tok, pref))
    holders += [("seed", "A", None), ("seed", "B", None)]
    for who, tok, pref in sorted(holders, key=lambda h: h[1]):
        amount = b.bal(tok, who)
        if amount:
            to_x, to_y = b.policy.feasible_split(amount, pref)
            fn = b.policy.claim_a if tok == "A" else b.policy.claim_b
            fn(who, to_x, to_y, 130)
    return b


claimer_lists = st.lists(st.tuples(st.sampled_from("ab"), st.integers(0, WAD)), min_size=1, max_size=6)


@given(st.integers(1, 10**22), st.integers(0, 10**24), st.integers(0, 10**24), claimer_lists)
def test_fallback_every_tranche_redeems(half, cx, cy, claimers):
    b = _fallback_round(half, cx, cy, claimers)
    assert b.policy.num_a() == b.policy.num_b() == 0


shares = st.one_of(st.just(0), st.integers(10**9, 10**24))


@given(st.integers(10**9, 10**22), shares, shares, claimer_lists)
def test_fallback_leaves_only_dust(half, cx, cy, claimers):
    b = _fallback_round(half, cx, cy, claimers)
    assert b.bal("Cx", POLICY) < 2 * half
    assert b.bal("Cy", POLICY) < 2 * half


@settings(max_examples=40)
@given(st.integers(0, 10**6))
def test_random_runs_conserve_c_at_every_snapshot(seed):
    doc = random_scenario(seed) | {"snapshots": True}
    world, rep = simulate(parse_scenario(doc))
    assert all(s["c_conserved"] for s in rep.snapshots)
    assert world.state() in (PolicyState.LIQUID, PolicyState.FALLBACK_ALL)
    assert world.policy.num_a() == world.policy.num_b() == 0


def test_cover_from_market_alone():
    world, rep = simulate(load_scenario(SCENARIOS / "atomic_insure.yaml"))
    # carol used atomic_insure, dave bought A on the A/C pool; neither ever held B at the end of a step
    buy = next(e for e in rep.events if e["agent"] == "dave" and e["kind"] == "swap")
    assert buy["ok"]
    for agent in ("carol", "dave"):
        book = world.books[agent]
        assert book.a_redeemed > 0 and book.b_redeemed == 0
