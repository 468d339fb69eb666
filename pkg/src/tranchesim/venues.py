"""Mock interest-bearing venues standing in for lending markets.

A venue wraps the underlying C into share tokens. The exchange rate (C per
share) grows by simple interest on an anchor rate; losses scale the anchor,
so accrual and haircuts commute and splitting an accrual interval in two
gives the same rate as doing it in one step.

The venue's C balance on the ledger *is* its reserve. After each operation
the reserve is re-synced to ``floor(shares * rate) + surplus``, where
``surplus`` is the rounding dust left behind by floored deposits and
withdrawals. Accrual mints C into the reserve and losses burn it, both via
the authority of the underlying token, and both are tallied so global C
conservation can be audited.
"""
from __future__ import annotations

from .errors import IlliquidVenue, InsufficientBalance, InvalidAmount, VenueError
from .fixedpoint import WAD
from .ledger import Ledger, venue_account
from .state import Stateful


class YieldVenue(Stateful):
    _refs = ("ledger",)

    def __init__(
        self,
        venue_id: str,
        ledger: Ledger,
        *,
        underlying: str = "C",
        share_token: str | None = None,
        c_authority: str = "genesis",
        rate_per_step: int = 0,
        liquid: bool = True,
    ):
        if rate_per_step < 0:
            raise InvalidAmount("rate_per_step must be non-negative")
        self.venue_id = venue_id
        self.ledger = ledger
        self.underlying = underlying
        self.share_token = share_token or f"C{venue_id}"
        self.account = venue_account(venue_id)
        self.c_authority = c_authority
        self.rate_per_step = rate_per_step
        self.liquid = liquid
        self.anchor_rate = WAD
        self.elapsed = 0
        self.exchange_rate = WAD
        self.surplus = 0
        self.accrued = 0
        self.lost = 0
        ledger.register_token(self.share_token, self.account)

    @property
    def reserve(self) -> int:
        return self.ledger.balance_of(self.underlying, self.account)

    @property
    def outstanding_shares(self) -> int:
        return self.ledger.total_supply_of(self.share_token)

    def backing(self) -> int:
        """Redeemable value of all outstanding shares at the current rate."""
        return self.outstanding_shares * self.exchange_rate // WAD

    def _resync(self) -> None:
        target = self.backing() + self.surplus
        delta = target - self.reserve
        if delta > 0:
            self.ledger.mint(self.underlying, self.account, delta, self.c_authority)
            self.accrued += delta
        elif delta < 0:
            self.ledger.burn(self.underlying, self.account, -delta, self.c_authority)
            self.lost -= delta

    def _refresh_rate(self) -> None:
        self.exchange_rate = self.anchor_rate * (WAD + self.rate_per_step * self.elapsed) // WAD

    def deposit(self, caller: str, c_amount: int) -> int:
        if not self.liquid:
            raise IlliquidVenue(f"venue {self.venue_id} is illiquid")
        if self.exchange_rate == 0:
            raise VenueError(f"venue {self.venue_id} has lost all collateral")
        have = self.ledger.balance_of(self.underlying, caller)
        if have < c_amount:
            raise InsufficientBalance(f"{caller!r} holds {have} {self.underlying}, cannot deposit {c_amount}")
        shares = c_amount * WAD // self.exchange_rate
        self.ledger.transfer(self.underlying, caller, self.account, c_amount)
        self.ledger.mint(self.share_token, caller, shares, self.account)
        self.surplus = self.reserve - self.backing()
        return shares

    def withdraw(self, caller: str, share_amount: int) -> int:
        if not self.liquid:
            raise IlliquidVenue(f"venue {self.venue_id} is illiquid")
        have = self.ledger.balance_of(self.share_token, caller)
        if have < share_amount:
            raise InsufficientBalance(f"{caller!r} holds {have} {self.share_token}, cannot redeem {share_amount}")
        c_amount = share_amount * self.exchange_rate // WAD
        self.ledger.burn(self.share_token, caller, share_amount, self.account)
        self.ledger.transfer(self.underlying, self.account, caller, c_amount)
        self.surplus = self.reserve - self.backing()
        return c_amount

    def accrue(self, dt: int) -> None:
        if dt < 0:
            raise ValueError("cannot accrue over negative time")
        if not dt:
            return
        self.elapsed += dt
        self._refresh_rate()
        self._resync()

    def apply_loss(self, fraction: int) -> None:
        """Haircut the venue by ``fraction`` (fixed point, 0..WAD)."""
        if not 0 <= fraction <= WAD:
            raise InvalidAmount(f"loss fraction must lie in [0, 1], got {fraction / WAD}")
        keep = WAD - fraction
        self.anchor_rate = self.anchor_rate * keep // WAD
        self.surplus = self.surplus * keep // WAD
        self._refresh_rate()
        self._resync()

    def set_liquidity(self, liquid: bool) -> None:
        self.liquid = bool(liquid)
