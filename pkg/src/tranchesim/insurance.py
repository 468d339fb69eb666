"""Tranche insurance policy: one insurance period over two yield venues.

Users deposit C before ``S`` and receive equal amounts of senior (A) and
junior (B) tranche tokens. Between ``S`` and ``T1`` the pooled C sits in two
venues. From ``T1`` the pool is either converted back to C and paid out by a
fixed waterfall (liquid mode), or, if conversion fails before ``T2``, the
venue shares themselves are handed out at frozen ratios, A holders first and
B holders only from ``T3`` (fallback mode). If nobody invests before ``T1``,
everyone gets their C back.

Time is an explicit argument. Like a contract, the policy never transitions
on its own: each call works out its state from the clock and the two flags
``is_invested``/``in_liquid_mode`` and reverts if the call is not allowed.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

from .errors import InsufficientBalance, InvalidAmount, PolicyError, WrongState
from .fixedpoint import WAD
from .ledger import POLICY, Ledger
from .state import Stateful, atomic
from .venues import YieldVenue


class PolicyState(str, enum.Enum):
    READY_TO_ACCEPT = "ReadyToAccept"
    READY_TO_INVEST = "ReadyToInvest"
    MAIN_COVER_ACTIVE = "MainCoverActive"
    READY_TO_DIVEST = "ReadyToDivest"
    LIQUID = "Liquid"
    FALLBACK_ONLY_A = "FallbackOnlyA"
    FALLBACK_ALL = "FallbackAll"


# Operations callable in each state. Everything else reverts.
FUNCTION_SETS: dict[PolicyState, frozenset[str]] = {
    PolicyState.READY_TO_ACCEPT: frozenset({"split_risk"}),
    PolicyState.READY_TO_INVEST: frozenset({"invest"}),
    PolicyState.MAIN_COVER_ACTIVE: frozenset(),
    PolicyState.READY_TO_DIVEST: frozenset({"divest"}),
    PolicyState.LIQUID: frozenset({"claim", "claim_all"}),
    PolicyState.FALLBACK_ONLY_A: frozenset({"claim_a"}),
    PolicyState.FALLBACK_ALL: frozenset({"claim_a", "claim_b"}),
}
OPERATIONS = ("split_risk", "invest", "divest", "claim", "claim_all", "claim_a", "claim_b")


@dataclass(frozen=True)
class PeriodConfig:
    S: int
    T1: int
    T2: int
    T3: int
    underlying: str = "C"
    tranche_a: str = "A"
    tranche_b: str = "B"

    def __post_init__(self):
        if not self.S < self.T1 < self.T2 < self.T3:
            raise ValueError(f"period must satisfy S < T1 < T2 < T3, got {self.S}, {self.T1}, {self.T2}, {self.T3}")


def state_at(cfg: PeriodConfig, clock: int, is_invested: bool, in_liquid_mode: bool) -> PolicyState:
    if clock < cfg.S:
        return PolicyState.READY_TO_ACCEPT
    if not is_invested:
        # No successful invest before T1: refund path.
        return PolicyState.READY_TO_INVEST if clock < cfg.T1 else PolicyState.LIQUID
    if clock < cfg.T1:
        return PolicyState.MAIN_COVER_ACTIVE
    if in_liquid_mode:
        return PolicyState.LIQUID
    if clock < cfg.T2:
        return PolicyState.READY_TO_DIVEST
    if clock < cfg.T3:
        return PolicyState.FALLBACK_ONLY_A
    return PolicyState.FALLBACK_ALL


def liquid_case(c_s: int, c_t1: int) -> int:
    """Which waterfall row applies: 1 gain, 2 partial loss, 3 heavy loss."""
    if c_t1 >= c_s:
        return 1
    if 2 * c_t1 > c_s:
        return 2
    return 3


def liquid_totals(c_s: int, c_t1: int, interest: int) -> tuple[int, int]:
    """Total C owed to all A holders and to all B holders."""
    case = liquid_case(c_s, c_t1)
    if case == 1:
        half = c_t1 // 2
        return half, half
    if case == 2:
        a_total = c_s // 2 + interest
        if a_total > c_t1:
            raise ValueError(f"interest {interest} exceeds what {c_t1} redeemed can cover")
        return a_total, c_t1 - a_total
    return c_t1, 0


def compute_liquid_payouts(c_s: int, c_t1: int, interest: int, num_a: int, num_b: int) -> tuple[int, int]:
    """Per-token C payouts (fixed point) for A and B tranches in liquid mode.

    >>> W = 10**18
    >>> compute_liquid_payouts(100 * W, 105 * W, 5 * W, 50 * W, 50 * W) == (105 * W // 100, 105 * W // 100)
    True
    """
    if min(c_s, c_t1, interest, num_a, num_b) < 0:
        raise InvalidAmount("payout inputs must be non-negative")
    if num_a != num_b:
        raise PolicyError(f"tranche supplies differ: {num_a} A vs {num_b} B")
    if num_a == 0:
        if c_t1:
            raise PolicyError("redeemed C but no tranches to pay it to")
        return 0, 0
    a_total, b_total = liquid_totals(c_s, c_t1, interest)
    return a_total * WAD // num_a, b_total * WAD // num_b


def compute_fallback_ratios(total_tranches: int, cx_held: int, cy_held: int) -> tuple[int, int]:
    """Venue shares paid per tranche token, each asset spread over half the tranches."""
    half = total_tranches // 2
    if half == 0:
        return 0, 0
    return cx_held * WAD // half, cy_held * WAD // half


def split_interest(deposited: tuple[int, int], redeemed: tuple[int, int]) -> int:
    """Yield earned across venues; a venue that lost money contributes zero."""
    return sum(max(0, r - d) for d, r in zip(deposited, redeemed))


class Policy(Stateful):
    _refs = ("ledger", "venue_x", "venue_y")

    def __init__(self, config: PeriodConfig, ledger: Ledger, venue_x: YieldVenue, venue_y: YieldVenue, account: str = POLICY):
        self.config = config
        self.ledger = ledger
        self.venue_x = venue_x
        self.venue_y = venue_y
        self.account = account
        self.is_invested = False
        self.in_liquid_mode = False
        self.c_invested = 0
        self.c_invested_x = 0
        self.c_invested_y = 0
        self.c_redeemed = 0
        self.c_redeemed_x = 0
        self.c_redeemed_y = 0
        self.interest = 0
        self.c_payout_a = 0
        self.c_payout_b = 0
        self.payouts_set = False
        self.cx_payout = 0
        self.cy_payout = 0
        self.ratios_frozen = False
        ledger.register_token(config.tranche_a, account)
        ledger.register_token(config.tranche_b, account)

    # -- reads -----------------------------------------------------------

    @property
    def tokens(self):
        c = self.config
        return c.underlying, self.venue_x.share_token, self.venue_y.share_token, c.tranche_a, c.tranche_b

    def state(self, clock: int) -> PolicyState:
        return state_at(self.config, clock, self.is_invested, self.in_liquid_mode)

    def num_a(self) -> int:
        return self.ledger.total_supply_of(self.config.tranche_a)

    def num_b(self) -> int:
        return self.ledger.total_supply_of(self.config.tranche_b)

    def holdings(self) -> dict[str, int]:
        return {t: self.ledger.balance_of(t, self.account) for t in self.tokens[:3]}

    def _gate(self, op: str, clock: int) -> PolicyState:
        st = self.state(clock)
        if op not in FUNCTION_SETS[st]:
            raise WrongState(f"{op}() not callable in state {st.value} at t={clock}")
        return st

    def fallback_ratios(self) -> tuple[int, int]:
        """Ratios in force: the frozen ones, or what they would freeze to now."""
        if self.ratios_frozen:
            return self.cx_payout, self.cy_payout
        h = self.holdings()
        return compute_fallback_ratios(
            self.num_a() + self.num_b(), h[self.venue_x.share_token], h[self.venue_y.share_token]
        )

    def fallback_capacity(self) -> tuple[int, int]:
        """Max tranches the remaining Cx / Cy can still pay (0 when a ratio is zero)."""
        cxp, cyp = self.fallback_ratios()
        h = self.holdings()
        cap_x = h[self.venue_x.share_token] * WAD // cxp if cxp else 0
        cap_y = h[self.venue_y.share_token] * WAD // cyp if cyp else 0
        return cap_x, cap_y

    # -- risk splitting --------------------------------------------------

    def split_risk(self, caller: str, c_amount: int, clock: int) -> tuple[int, int]:
        self._gate("split_risk", clock)
        if isinstance(c_amount, bool) or not isinstance(c_amount, int) or c_amount < 0:
            raise InvalidAmount(f"bad amount {c_amount!r}")
        if c_amount % 2:
            raise InvalidAmount("split_risk needs an even number of base units")
        c = self.config
        have = self.ledger.balance_of(c.underlying, caller)
        if have < c_amount:
            raise InsufficientBalance(f"{caller!r} holds {have} C, cannot split {c_amount}")
        half = c_amount // 2
        self.ledger.transfer(c.underlying, caller, self.account, c_amount)
        self.ledger.mint(c.tranche_a, caller, half, self.account)
        self.ledger.mint(c.tranche_b, caller, half, self.account)
        return half, half

    # -- invest / divest -------------------------------------------------

    def invest(self, clock: int) -> tuple[int, int]:
        self._gate("invest", clock)
        held = self.ledger.balance_of(self.config.underlying, self.account)
        to_x = held // 2
        to_y = held - to_x
        with atomic(self, self.ledger, self.venue_x, self.venue_y):
            sx = self.venue_x.deposit(self.account, to_x)
            sy = self.venue_y.deposit(self.account, to_y)
            self.is_invested = True
            self.c_invested = held
            self.c_invested_x, self.c_invested_y = to_x, to_y
        return sx, sy

    def divest(self, clock: int) -> int:
        self._gate("divest", clock)
        sx_token, sy_token = self.venue_x.share_token, self.venue_y.share_token
        with atomic(self, self.ledger, self.venue_x, self.venue_y):
            rx = self.venue_x.withdraw(self.account, self.ledger.balance_of(sx_token, self.account))
            ry = self.venue_y.withdraw(self.account, self.ledger.balance_of(sy_token, self.account))
            self.c_redeemed_x, self.c_redeemed_y = rx, ry
            self.c_redeemed = rx + ry
            self.interest = split_interest((self.c_invested_x, self.c_invested_y), (rx, ry))
            self.c_payout_a, self.c_payout_b = compute_liquid_payouts(
                self.c_invested, self.c_redeemed, self.interest, self.num_a(), self.num_b()
            )
            self.payouts_set = True
            self.in_liquid_mode = True
        return self.c_redeemed

    # -- liquid-mode redemption -----------------------------------------

    def liquid_payouts(self) -> tuple[int, int]:
        """Per-token C payouts in force, or those the refund path would set now."""
        if self.payouts_set:
            return self.c_payout_a, self.c_payout_b
        # Refund path: never invested, every tranche gets an equal share of the held C.
        held = self.ledger.balance_of(self.config.underlying, self.account)
        total = self.num_a() + self.num_b()
        rate = held * WAD // total if total else 0
        return rate, rate

    def claim(self, caller: str, a_amount: int, b_amount: int, clock: int) -> int:
        self._gate("claim", clock)
        c = self.config
        for tok, amt in ((c.tranche_a, a_amount), (c.tranche_b, b_amount)):
            if isinstance(amt, bool) or not isinstance(amt, int) or amt < 0:
                raise InvalidAmount(f"bad amount {amt!r}")
            have = self.ledger.balance_of(tok, caller)
            if have < amt:
                raise InsufficientBalance(f"{caller!r} holds {have} {tok}, cannot claim {amt}")
        pay_a, pay_b = self.liquid_payouts()
        paid = (a_amount * pay_a + b_amount * pay_b) // WAD
        if paid > self.ledger.balance_of(c.underlying, self.account):
            raise PolicyError("policy cannot cover the claim")
        if not (a_amount or b_amount):
            return 0
        self.c_payout_a, self.c_payout_b = pay_a, pay_b
        self.payouts_set = True
        self.ledger.burn(c.tranche_a, caller, a_amount, self.account)
        self.ledger.burn(c.tranche_b, caller, b_amount, self.account)
        self.ledger.transfer(c.underlying, self.account, caller, paid)
        return paid

    def claim_all(self, caller: str, clock: int) -> int:
        self._gate("claim_all", clock)
        c = self.config
        return self.claim(
            caller, self.ledger.balance_of(c.tranche_a, caller), self.ledger.balance_of(c.tranche_b, caller), clock
        )

    # -- fallback-mode redemption ---------------------------------------

    def _redeem_shares(self, tranche: str, caller: str, amount_to_x: int, amount_to_y: int) -> tuple[int, int]:
        for amt in (amount_to_x, amount_to_y):
            if isinstance(amt, bool) or not isinstance(amt, int) or amt < 0:
                raise InvalidAmount(f"bad amount {amt!r}")
        need = amount_to_x + amount_to_y
        have = self.ledger.balance_of(tranche, caller)
        if have < need:
            raise InsufficientBalance(f"{caller!r} holds {have} {tranche}, cannot redeem {need}")
        cxp, cyp = self.fallback_ratios()
        pay_x = amount_to_x * cxp // WAD
        pay_y = amount_to_y * cyp // WAD
        h = self.holdings()
        sx, sy = self.venue_x.share_token, self.venue_y.share_token
        if pay_x > h[sx] or pay_y > h[sy]:
            raise PolicyError("remaining venue shares cannot cover this redemption mix")
        if not need:
            return 0, 0
        if not self.ratios_frozen:
            self.cx_payout, self.cy_payout = cxp, cyp
            self.ratios_frozen = True
        self.ledger.burn(tranche, caller, need, self.account)
        self.ledger.transfer(sx, self.account, caller, pay_x)
        self.ledger.transfer(sy, self.account, caller, pay_y)
        return pay_x, pay_y

    def claim_a(self, caller: str, amount_to_x: int, amount_to_y: int, clock: int) -> tuple[int, int]:
        self._gate("claim_a", clock)
        return self._redeem_shares(self.config.tranche_a, caller, amount_to_x, amount_to_y)

    def claim_b(self, caller: str, amount_to_x: int, amount_to_y: int, clock: int) -> tuple[int, int]:
        self._gate("claim_b", clock)
        return self._redeem_shares(self.config.tranche_b, caller, amount_to_x, amount_to_y)

    def feasible_split(self, amount: int, x_share: int | None = None) -> tuple[int, int]:
        """Split ``amount`` tranches between Cx and Cy so both legs can be paid.

        ``x_share`` (fixed point) is the preferred fraction sent to Cx; the
        split is shifted as little as possible to fit what is left. Without a
        preference Cx is filled first. An asset whose ratio is zero pays
        nothing, so it only takes what the other one cannot.
        """
        cxp, cyp = self.fallback_ratios()
        cap_x, cap_y = self.fallback_capacity()
        want_x = amount if x_share is None else amount * x_share // WAD
        to_x = min(want_x, cap_x)
        to_y = min(amount - to_x, cap_y)
        rest = amount - to_x - to_y
        extra_x = min(rest, cap_x - to_x)
        to_x += extra_x
        rest -= extra_x
        if rest:
            # only a zero-ratio leg can absorb the remainder; otherwise the claim will revert
            if cyp == 0 and cxp != 0:
                to_y += rest
            else:
                to_x += rest
        return to_x, to_y
