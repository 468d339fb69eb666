"""Fungible-token ledger shared by the policy, the venues and the pools.

All quantities are non-negative ints in 10**-18 units (see ``fixedpoint``).
Every operation validates before it mutates, so a raised error leaves the
ledger exactly as it was.
"""
from __future__ import annotations

from .errors import DuplicateToken, InsufficientBalance, InvalidAmount, Unauthorized, UnknownToken
from .state import Stateful

# Reserved account ids.
GENESIS = "genesis"
POLICY = "policy"


def venue_account(venue_id: str) -> str:
    return f"venue:{venue_id}"


def pool_account(pool_id: str) -> str:
    return f"pool:{pool_id}"


def _check_amount(amt) -> None:
    if isinstance(amt, bool) or not isinstance(amt, int):
        raise InvalidAmount(f"amount must be an int of base units, got {amt!r}")
    if amt < 0:
        raise InvalidAmount(f"negative amount {amt}")


class Ledger(Stateful):
    def __init__(self):
        self.balances: dict[str, dict[str, int]] = {}
        self.supply: dict[str, int] = {}
        self.authority: dict[str, str] = {}

    def register_token(self, token: str, authority: str) -> None:
        if token in self.supply:
            raise DuplicateToken(f"token {token!r} already registered")
        self.supply[token] = 0
        self.balances[token] = {}
        self.authority[token] = authority

    @property
    def tokens(self) -> list[str]:
        return list(self.supply)

    def _require(self, token: str) -> dict[str, int]:
        try:
            return self.balances[token]
        except KeyError:
            raise UnknownToken(f"token {token!r} is not registered") from None

    def _require_authority(self, token: str, caller: str) -> None:
        if self.authority[token] != caller:
            raise Unauthorized(f"{caller!r} may not mint or burn {token!r}")

    def balance_of(self, token: str, account: str) -> int:
        return self._require(token).get(account, 0)

    def total_supply_of(self, token: str) -> int:
        self._require(token)
        return self.supply[token]

    def holders(self, token: str) -> dict[str, int]:
        return dict(self._require(token))

    def _credit(self, bal: dict[str, int], account: str, amt: int) -> None:
        if amt:
            bal[account] = bal.get(account, 0) + amt

    def _debit(self, bal: dict[str, int], account: str, amt: int) -> None:
        if not amt:
            return
        left = bal[account] - amt
        if left:
            bal[account] = left
        else:
            del bal[account]

    def mint(self, token: str, to: str, amt: int, caller: str) -> None:
        bal = self._require(token)
        _check_amount(amt)
        self._require_authority(token, caller)
        self._credit(bal, to, amt)
        self.supply[token] += amt

    def burn(self, token: str, frm: str, amt: int, caller: str) -> None:
        bal = self._require(token)
        _check_amount(amt)
        self._require_authority(token, caller)
        have = bal.get(frm, 0)
        if have < amt:
            raise InsufficientBalance(f"{frm!r} holds {have} {token}, cannot burn {amt}")
        self._debit(bal, frm, amt)
        self.supply[token] -= amt

    def transfer(self, token: str, frm: str, to: str, amt: int) -> None:
        bal = self._require(token)
        _check_amount(amt)
        have = bal.get(frm, 0)
        if have < amt:
            raise InsufficientBalance(f"{frm!r} holds {have} {token}, cannot send {amt}")
        if frm == to:
            return
        self._debit(bal, frm, amt)
        self._credit(bal, to, amt)

    def check_conservation(self) -> bool:
        return all(sum(self.balances[t].values()) == s for t, s in self.supply.items())
