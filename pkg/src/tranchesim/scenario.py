"""Deterministic simulation driver.

``build_world`` turns a validated ``Scenario`` into live objects sharing one
ledger; ``run`` walks every scheduled time in order and returns a
``RunReport``. At any one timestamp the order is fixed: venue events, then
invest/divest calls (keeper first, then agents), then the remaining agent
actions in declaration order, then horizon settlement. A failing action is
logged and the run continues.
"""
from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import __version__
from .amm import Pool
from .config import PROTOCOL_ACTIONS, AgentSpec, Divest, Invest, Scenario, Swap
from .errors import EmptyPool, InvalidAmount, PoolError, SimulationError, WrongState
from .fixedpoint import WAD, fmt
from .insurance import PeriodConfig, Policy, PolicyState
from .ledger import GENESIS, Ledger
from .state import atomic
from .venues import YieldVenue

FLASH_LENDER = GENESIS


@dataclass
class AgentBook:
    """What an agent got out of the policy and put into pools."""

    c_paid: int = 0
    cx_paid: int = 0
    cy_paid: int = 0
    a_redeemed: int = 0
    b_redeemed: int = 0
    lp: dict[str, list[int]] = field(default_factory=dict)  # pool -> [dep0, dep1, wd0, wd1]


class World:
    def __init__(self, scenario: Scenario):
        sc = scenario
        self.scenario = sc
        t = sc.tokens
        self.underlying = t.underlying
        self.ledger = Ledger()
        self.ledger.register_token(t.underlying, GENESIS)
        vx, vy = sc.venues
        self.venues: dict[str, YieldVenue] = {}
        self.accrue_from: dict[str, int] = {}
        for v in (vx, vy):
            self.venues[v.id] = YieldVenue(
                v.id, self.ledger, underlying=t.underlying, share_token=v.token,
                c_authority=GENESIS, rate_per_step=v.rate_per_step,
            )
            self.accrue_from[v.id] = sc.period.S if v.accrue_from is None else v.accrue_from
        self.policy = Policy(
            PeriodConfig(sc.period.S, sc.period.T1, sc.period.T2, sc.period.T3,
                         underlying=t.underlying, tranche_a=t.tranche_a, tranche_b=t.tranche_b),
            self.ledger, self.venues[vx.id], self.venues[vy.id],
        )
        self.pools: dict[str, Pool] = {
            p.id: Pool(p.id, p.token0, p.token1, self.ledger, fee_rate=p.fee) for p in sc.pools
        }
        self.last_price: dict[str, Fraction] = {}
        self.agents: list[AgentSpec] = list(sc.agents)
        self.books: dict[str, AgentBook] = {a.id: AgentBook() for a in sc.agents}
        self.initial_c = 0
        for a in sc.agents:
            self.ledger.mint(t.underlying, a.id, a.initial_c, GENESIS)
            self.initial_c += a.initial_c
        self.clock = sc.period.deploy
        events = []
        for order, v in enumerate((vx, vy)):
            events += [(e.time, order, i, v.id, "loss", e.fraction) for i, e in enumerate(v.losses)]
            events += [(e.time, order, 1000 + i, v.id, "liquidity", e.liquid) for i, e in enumerate(v.liquidity)]
        # venue declaration order, then losses before liquidity flips, then declared order
        self.pending_events = sorted(events, key=lambda e: e[:3])
        self.log: list[dict] = []

    # -- time ------------------------------------------------------------

    def _accrue_to(self, t: int) -> None:
        for vid, venue in self.venues.items():
            start = max(self.clock, self.accrue_from[vid])
            if t > start:
                venue.accrue(t - start)
        self.clock = t

    def advance_to(self, t: int) -> None:
        """Accrue interest up to ``t`` and apply venue events scheduled at or before it."""
        if t < self.clock:
            raise ValueError(f"cannot move the clock back from {self.clock} to {t}")
        while self.pending_events and self.pending_events[0][0] <= t:
            when, _, _, vid, kind, value = self.pending_events.pop(0)
            self._accrue_to(max(when, self.clock))
            venue = self.venues[vid]
            if kind == "loss":
                venue.apply_loss(value)
            else:
                venue.set_liquidity(value)
            self.log.append({"t": self.clock, "agent": None, "kind": f"venue_{kind}", "venue": vid,
                             "value": fmt(value) if kind == "loss" else value, "ok": True})
        self._accrue_to(t)

    # -- inspection ------------------------------------------------------

    def state(self) -> PolicyState:
        return self.policy.state(self.clock)

    def _stateful(self):
        return [self.ledger, self.policy, *self.venues.values(), *self.pools.values()]

    def fingerprint(self) -> str:
        """Canonical dump of all mutable world state, for bit-identity checks."""
        blob = {
            "clock": self.clock,
            "parts": [o.snapshot() for o in self._stateful()],
            "pending": self.pending_events,
            "last_price": self.last_price,
        }
        return json.dumps(blob, sort_keys=True, default=repr)

    def total_c(self) -> int:
        return self.ledger.total_supply_of(self.underlying)

    def venue_accrued(self) -> int:
        return sum(v.accrued for v in self.venues.values())

    def venue_lost(self) -> int:
        return sum(v.lost for v in self.venues.values())

    def c_conserved(self) -> bool:
        return self.total_c() == self.initial_c + self.venue_accrued() - self.venue_lost()

    def snapshot(self) -> dict:
        led = self.ledger
        pools = {}
        for pid, pool in self.pools.items():
            price = None if pool.is_empty() else fmt(pool.reserve1 * WAD // pool.reserve0)
            pools[pid] = {"reserve0": fmt(pool.reserve0), "reserve1": fmt(pool.reserve1), "price": price}
        return {
            "t": self.clock,
            "state": self.state().value,
            "balances": {tok: {acct: fmt(v) for acct, v in sorted(led.holders(tok).items())} for tok in led.tokens},
            "venues": {
                vid: {"exchange_rate": fmt(v.exchange_rate), "reserve": fmt(v.reserve), "liquid": v.liquid}
                for vid, v in self.venues.items()
            },
            "pools": pools,
            "c_conserved": self.c_conserved(),
        }

    # -- composite operations -------------------------------------------

    def atomic_insure(self, caller: str, c_amount: int, pool_id: str, min_proceeds: int = 0) -> int:
        """Insure ``c_amount`` C in one step using a simulated flash loan.

        Borrows twice the amount, splits it into A and B, sells every B into
        the B/C pool, repays the loan from the sale plus the caller's own C,
        and leaves the caller holding ``c_amount`` A. All or nothing.
        """
        pol = self.policy
        if pol.state(self.clock) is not PolicyState.READY_TO_ACCEPT:
            raise WrongState(f"atomic_insure needs ReadyToAccept, policy is {pol.state(self.clock).value}")
        if isinstance(c_amount, bool) or not isinstance(c_amount, int) or c_amount < 0:
            raise InvalidAmount(f"bad amount {c_amount!r}")
        pool = self.pools.get(pool_id)
        b_tok, c_tok = pol.config.tranche_b, self.underlying
        if pool is None or {pool.token0, pool.token1} != {b_tok, c_tok}:
            raise PoolError(f"{pool_id!r} is not a B/C pool")
        if c_amount == 0:
            return 0
        if pool.is_empty():
            raise EmptyPool(f"pool {pool_id} has no liquidity")
        loan = 2 * c_amount
        with atomic(*self._stateful()):
            self.ledger.mint(c_tok, caller, loan, FLASH_LENDER)
            a_got, b_got = pol.split_risk(caller, loan, self.clock)
            pool.swap_exact_in(caller, b_tok, b_got, min_out=min_proceeds)
            self.ledger.burn(c_tok, caller, loan, FLASH_LENDER)
        self.last_price[pool_id] = pool.spot_price()
        return a_got

    # -- dispatch --------------------------------------------------------

    def _remember_price(self, pool: Pool) -> None:
        if not pool.is_empty():
            self.last_price[pool.pool_id] = pool.spot_price()

    def execute(self, agent_id: str, act) -> object:
        """Run one action for ``agent_id`` at the current clock; raise on failure."""
        pol, now, book = self.policy, self.clock, self.books.get(agent_id)
        kind = act.kind
        if kind == "split_risk":
            return pol.split_risk(agent_id, act.amount, now)
        if kind == "invest":
            return pol.invest(now)
        if kind == "divest":
            return pol.divest(now)
        if kind in ("claim", "claim_all"):
            a_bal = self.ledger.balance_of(pol.config.tranche_a, agent_id)
            b_bal = self.ledger.balance_of(pol.config.tranche_b, agent_id)
            if kind == "claim":
                paid = pol.claim(agent_id, act.a, act.b, now)
                a_used, b_used = act.a, act.b
            else:
                paid = pol.claim_all(agent_id, now)
                a_used, b_used = a_bal, b_bal
            book.c_paid += paid
            book.a_redeemed += a_used
            book.b_redeemed += b_used
            return paid
        if kind in ("claim_a", "claim_b"):
            fn = pol.claim_a if kind == "claim_a" else pol.claim_b
            px, py = fn(agent_id, act.to_x, act.to_y, now)
            self._book_fallback(book, kind, act.to_x + act.to_y, px, py)
            return px, py
        if kind == "swap":
            pool = self.pools[act.pool]
            out = pool.swap_exact_in(agent_id, act.token_in, act.amount, min_out=act.min_out)
            self._remember_price(pool)
            return out
        if kind == "add_liquidity":
            pool = self.pools[act.pool]
            minted = pool.add_liquidity(agent_id, act.amount0, act.amount1)
            rec = book.lp.setdefault(act.pool, [0, 0, 0, 0])
            rec[0] += act.amount0
            rec[1] += act.amount1
            self._remember_price(pool)
            return minted
        if kind == "remove_liquidity":
            pool = self.pools[act.pool]
            self._remember_price(pool)
            shares = self.ledger.balance_of(pool.lp_token, agent_id) if act.shares == "all" else act.shares
            if shares == 0 and act.shares == "all":
                return 0, 0
            out0, out1 = pool.remove_liquidity(agent_id, shares)
            rec = book.lp.setdefault(act.pool, [0, 0, 0, 0])
            rec[2] += out0
            rec[3] += out1
            return out0, out1
        if kind == "transfer":
            self.ledger.transfer(act.token, agent_id, act.to, act.amount)
            return act.amount
        if kind == "deposit":
            return self.venues[act.venue].deposit(agent_id, act.amount)
        if kind == "withdraw":
            venue = self.venues[act.venue]
            shares = self.ledger.balance_of(venue.share_token, agent_id) if act.shares == "all" else act.shares
            return venue.withdraw(agent_id, shares)
        if kind == "atomic_insure":
            return self.atomic_insure(agent_id, act.amount, act.pool, act.min_proceeds)
        raise ValueError(f"unknown action kind {kind!r}")

    def _book_fallback(self, book: AgentBook, kind: str, n: int, px: int, py: int) -> None:
        book.cx_paid += px
        book.cy_paid += py
        if kind == "claim_a":
            book.a_redeemed += n
        else:
            book.b_redeemed += n

    def settle(self, agent: AgentSpec) -> list[tuple[str, object]]:
        """Redeem everything ``agent`` holds in whatever way the current state allows. All or nothing."""
        book_before = copy.deepcopy(self.books[agent.id])
        try:
            with atomic(*self._stateful()):
                return self._settle(agent)
        except SimulationError:
            self.books[agent.id] = book_before
            raise

    def _settle(self, agent: AgentSpec) -> list[tuple[str, object]]:
        pol, now, book = self.policy, self.clock, self.books[agent.id]
        st = pol.state(now)
        done = []
        # Unwind LP positions first so pooled tranches are redeemed too.
        for pid, pool in self.pools.items():
            shares = self.ledger.balance_of(pool.lp_token, agent.id)
            if shares:
                self._remember_price(pool)
                out0, out1 = pool.remove_liquidity(agent.id, shares)
                rec = book.lp.setdefault(pid, [0, 0, 0, 0])
                rec[2] += out0
                rec[3] += out1
                done.append(("remove_liquidity", (out0, out1)))
        if st is PolicyState.LIQUID:
            a_bal = self.ledger.balance_of(pol.config.tranche_a, agent.id)
            b_bal = self.ledger.balance_of(pol.config.tranche_b, agent.id)
            paid = pol.claim_all(agent.id, now)
            book.c_paid += paid
            book.a_redeemed += a_bal
            book.b_redeemed += b_bal
            done.append(("claim_all", paid))
        elif st in (PolicyState.FALLBACK_ONLY_A, PolicyState.FALLBACK_ALL):
            legs = [("claim_a", pol.config.tranche_a, pol.claim_a)]
            if st is PolicyState.FALLBACK_ALL:
                legs.append(("claim_b", pol.config.tranche_b, pol.claim_b))
            for kind, tok, fn in legs:
                n = self.ledger.balance_of(tok, agent.id)
                if not n:
                    continue
                to_x, to_y = pol.feasible_split(n, agent.fallback_x_share)
                px, py = fn(agent.id, to_x, to_y, now)
                self._book_fallback(book, kind, n, px, py)
                done.append((kind, (px, py)))
        return done


def build_world(scenario: Scenario) -> World:
    return World(scenario)


def _random_swaps(scenario: Scenario, agent_index: int, agent: AgentSpec) -> list:
    pools = {p.id: p for p in scenario.pools}
    rng = np.random.default_rng([scenario.seed, agent_index])
    out = []
    for spec in agent.random_swaps:
        pair = (pools[spec.pool].token0, pools[spec.pool].token1)
        for _ in range(spec.count):
            t = int(rng.integers(spec.start, spec.end + 1))
            side = pair[int(rng.integers(0, 2))]
            ppm = int(rng.integers(1, 1_000_001))
            amount = spec.max_amount * ppm // 1_000_000
            if amount:
                out.append(Swap(kind="swap", time=t, pool=spec.pool, token_in=side, amount=amount))
    return out


def schedule(scenario: Scenario) -> dict[int, list[tuple[str | None, object]]]:
    """Actions keyed by time, each list already in execution order."""
    p = scenario.period
    buckets: dict[int, list[tuple[tuple, str | None, object]]] = {}

    def put(t, key, who, act):
        buckets.setdefault(t, []).append((key, who, act))

    invest_at = scenario.keeper.invest if scenario.keeper.invest is not None else [p.S]
    divest_at = scenario.keeper.divest if scenario.keeper.divest is not None else [p.T1]
    for j, t in enumerate(invest_at):
        put(t, (0, -1, 0, j), None, Invest(kind="invest", time=t))
    for j, t in enumerate(divest_at):
        put(t, (0, -1, 1, j), None, Divest(kind="divest", time=t))
    for i, agent in enumerate(scenario.agents):
        acts = list(agent.actions) + _random_swaps(scenario, i, agent)
        for j, act in enumerate(acts):
            tier = 0 if act.kind in PROTOCOL_ACTIONS else 1
            put(act.time, (tier, i, j, 0), agent.id, act)
    return {t: [(who, act) for _, who, act in sorted(items, key=lambda x: x[0])] for t, items in buckets.items()}


@dataclass
class RunReport:
    tool: str
    version: str
    scenario_name: str
    scenario_hash: str
    seed: int
    snapshots: list[dict]
    events: list[dict]
    policy: dict
    agents: dict
    divergence: dict
    conservation: dict

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def scenario_hash(scenario: Scenario) -> str:
    canon = json.dumps(scenario.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def _describe(result) -> object:
    if isinstance(result, bool) or result is None:
        return result
    if isinstance(result, int):
        return fmt(result)
    if isinstance(result, tuple):
        return [_describe(r) for r in result]
    return str(result)


def _realized_divergence(world: World) -> dict:
    out: dict[str, dict[str, float]] = {}
    for agent_id, book in world.books.items():
        for pid, (dep0, dep1, wd0, wd1) in sorted(book.lp.items()):
            pool = world.pools[pid]
            price = pool.spot_price() if not pool.is_empty() else world.last_price.get(pid)
            if price is None or not (dep0 or dep1):
                continue
            shares = world.ledger.balance_of(pool.lp_token, agent_id)
            supply = pool.lp_supply
            held0 = shares * pool.reserve0 // supply if supply else 0
            held1 = shares * pool.reserve1 // supply if supply else 0
            hold = price * dep0 + dep1
            lp = price * (wd0 + held0) + (wd1 + held1)
            out.setdefault(agent_id, {})[pid] = float((hold - lp) / hold)
    return out


def run(scenario: Scenario) -> RunReport:
    return simulate(scenario)[1]


def simulate(scenario: Scenario) -> tuple[World, RunReport]:
    """Run ``scenario`` and return the final world along with the report."""
    world = build_world(scenario)
    plan = schedule(scenario)
    times = sorted(set(plan) | {e[0] for e in world.pending_events} | {scenario.period.deploy, scenario.horizon})
    snapshots = []
    for t in times:
        world.advance_to(t)
        for who, act in plan.get(t, []):
            entry = {"t": t, "agent": who, "kind": act.kind}
            try:
                entry["result"] = _describe(world.execute(who, act))
                entry["ok"] = True
            except SimulationError as exc:
                entry["ok"] = False
                entry["error"] = f"{type(exc).__name__}: {exc}"
            world.log.append(entry)
        if t == scenario.horizon and scenario.settle:
            for agent in world.agents:
                entry = {"t": t, "agent": agent.id, "kind": "settle"}
                try:
                    entry["result"] = [[k, _describe(r)] for k, r in world.settle(agent)]
                    entry["ok"] = True
                except SimulationError as exc:
                    entry["ok"] = False
                    entry["error"] = f"{type(exc).__name__}: {exc}"
                world.log.append(entry)
        if scenario.snapshots:
            snapshots.append(world.snapshot())
    return world, _report(scenario, world, snapshots)


def _report(scenario: Scenario, world: World, snapshots: list[dict]) -> RunReport:
    pol = world.policy
    cxp, cyp = pol.fallback_ratios() if pol.is_invested and not pol.in_liquid_mode else (pol.cx_payout, pol.cy_payout)
    pay_a, pay_b = pol.liquid_payouts() if pol.state(world.clock) is PolicyState.LIQUID else (pol.c_payout_a, pol.c_payout_b)
    policy = {
        "final_state": world.state().value,
        "is_invested": pol.is_invested,
        "in_liquid_mode": pol.in_liquid_mode,
        "c_invested": fmt(pol.c_invested),
        "c_redeemed": fmt(pol.c_redeemed),
        "interest": fmt(pol.interest),
        "c_payout_a": fmt(pay_a),
        "c_payout_b": fmt(pay_b),
        "cx_payout": fmt(cxp),
        "cy_payout": fmt(cyp),
        "tranches_minted": fmt(pol.num_a() + pol.num_b()),
        "holdings": {tok: fmt(v) for tok, v in pol.holdings().items()},
    }
    agents = {}
    for a in world.agents:
        book = world.books[a.id]
        agents[a.id] = {
            "c_paid": fmt(book.c_paid),
            "cx_paid": fmt(book.cx_paid),
            "cy_paid": fmt(book.cy_paid),
            "a_redeemed": fmt(book.a_redeemed),
            "b_redeemed": fmt(book.b_redeemed),
            "final_balances": {
                tok: fmt(world.ledger.balance_of(tok, a.id))
                for tok in world.ledger.tokens
                if world.ledger.balance_of(tok, a.id)
            },
        }
    conservation = {
        "initial_c": fmt(world.initial_c),
        "venue_accrued": fmt(world.venue_accrued()),
        "venue_lost": fmt(world.venue_lost()),
        "final_c_supply": fmt(world.total_c()),
        "c_conserved": world.c_conserved(),
        "ledger_balanced": world.ledger.check_conservation(),
    }
    return RunReport(
        tool="tranchesim",
        version=__version__,
        scenario_name=scenario.name,
        scenario_hash=scenario_hash(scenario),
        seed=scenario.seed,
        snapshots=snapshots,
        events=world.log,
        policy=policy,
        agents=agents,
        divergence=_realized_divergence(world),
        conservation=conservation,
    )
