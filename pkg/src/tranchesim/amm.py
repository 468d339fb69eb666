"""Constant-product pools for tranche tokens, plus divergence-loss analytics.

Two layers live here. The closed-form analytics (``spot_price_from_k``,
``post_trade_reserves``, ``hold_value``, ``lp_value``, ``divergence_loss``)
work on real numbers and accept numpy arrays. ``Pool`` is the discrete market:
integer reserves on the shared ledger, floored outputs, LP shares as ledger
tokens. ``arbitrage_divergence`` ties the two together by actually trading a
pool to a target price and measuring what the LP lost.
"""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .errors import EmptyPool, InsufficientBalance, InvalidAmount, PoolError, RatioMismatch, SlippageExceeded
from .fixedpoint import WAD
from .ledger import Ledger, pool_account
from .state import Stateful

DEFAULT_FEE = 3 * WAD // 1000
# add_liquidity accepts deposits within 1 part in 10**6 of the pool ratio.
RATIO_TOLERANCE = Fraction(1, 10**6)


def _positive(name, x):
    arr = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr <= 0):
        raise ValueError(f"{name} must be positive and finite")
    return arr


def _out(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


def spot_price_from_k(k, a):
    """Price of token0 in token1 for reserve ``a`` of token0 on the curve a*b = k."""
    k, a = _positive("k", k), _positive("a", a)
    return _out(k / a**2)


def post_trade_reserves(k, p_star):
    """Reserves (a*, b*) on the curve a*b = k at which the spot price is ``p_star``."""
    k, p_star = _positive("k", k), _positive("p_star", p_star)
    return _out(np.sqrt(k / p_star)), _out(np.sqrt(k * p_star))


def hold_value(a, b, p_star):
    """Value in token1 of simply holding ``a`` token0 and ``b`` token1 at price ``p_star``."""
    a, b, p_star = _positive("a", a), _positive("b", b), _positive("p_star", p_star)
    return _out(p_star * a + b)


def hold_value_from_k(k, p, p_star):
    """Hold value of the position that entered the curve a*b = k at price ``p``."""
    k, p, p_star = _positive("k", k), _positive("p", p), _positive("p_star", p_star)
    return _out(p_star * np.sqrt(k / p) + np.sqrt(k * p))


def lp_value(k, p_star):
    """Value in token1 of the whole pool on a*b = k once the price is ``p_star``."""
    k, p_star = _positive("k", k), _positive("p_star", p_star)
    return _out(2.0 * np.sqrt(k * p_star))


def divergence_loss(p, p_star):
    """Relative shortfall of providing liquidity versus holding, as a magnitude.

    Depends only on r = p_star / p: |2 sqrt(r) - r - 1| / (r + 1). Evaluated
    as ((p_star - p) / (sqrt(p_star) + sqrt(p)))**2 / (p + p_star), which is
    the same quantity, symmetric in its arguments and free of cancellation
    near r = 1.

    >>> divergence_loss(1.0, 4.0)
    0.2
    """
    p, p_star = _positive("p", p), _positive("p_star", p_star)
    root_gap = (p_star - p) / (np.sqrt(p_star) + np.sqrt(p))
    return _out(root_gap**2 / (p + p_star))


class Pool(Stateful):
    """Constant-product pool over two ledger tokens.

    ``fee_rate`` is a fixed-point fraction of each swap's input retained by
    the pool. Reserves are tracked here, not read from the ledger, so stray
    transfers into the pool account do not move the price.
    """

    _refs = ("ledger",)

    def __init__(self, pool_id: str, token0: str, token1: str, ledger: Ledger, fee_rate: int = DEFAULT_FEE):
        if token0 == token1:
            raise PoolError("a pool needs two distinct tokens")
        if not 0 <= fee_rate < WAD:
            raise InvalidAmount("fee_rate must lie in [0, 1)")
        self.pool_id = pool_id
        self.token0 = token0
        self.token1 = token1
        self.ledger = ledger
        self.fee_rate = fee_rate
        self.account = pool_account(pool_id)
        self.lp_token = f"LP:{pool_id}"
        self.reserve0 = 0
        self.reserve1 = 0
        ledger.register_token(self.lp_token, self.account)

    @property
    def k(self) -> int:
        return self.reserve0 * self.reserve1

    @property
    def lp_supply(self) -> int:
        return self.ledger.total_supply_of(self.lp_token)

    def is_empty(self) -> bool:
        return self.reserve0 == 0 or self.reserve1 == 0

    def spot_price(self) -> Fraction:
        """Price of token0 in units of token1, exactly: b / a (= k / a**2)."""
        if self.is_empty():
            raise EmptyPool(f"pool {self.pool_id} has no liquidity")
        return Fraction(self.reserve1, self.reserve0)

    def quote_exact_in(self, token_in: str, amount_in: int) -> int:
        if token_in not in (self.token0, self.token1):
            raise PoolError(f"pool {self.pool_id} does not trade {token_in!r}")
        if isinstance(amount_in, bool) or not isinstance(amount_in, int) or amount_in <= 0:
            raise InvalidAmount("swap input must be a positive int")
        if self.is_empty():
            raise EmptyPool(f"pool {self.pool_id} has no liquidity")
        r_in, r_out = (self.reserve0, self.reserve1) if token_in == self.token0 else (self.reserve1, self.reserve0)
        effective = amount_in * (WAD - self.fee_rate) // WAD
        # out = floor(r_out - k / (r_in + effective)) = r_out - ceil(k / (r_in + effective))
        denom = r_in + effective
        out = r_out - (-(-(r_in * r_out) // denom))
        if out <= 0:
            raise PoolError("swap output rounds to zero")
        return out

    def swap_exact_in(self, caller: str, token_in: str, amount_in: int, min_out: int = 0) -> int:
        out = self.quote_exact_in(token_in, amount_in)
        if out < min_out:
            raise SlippageExceeded(f"swap returns {out}, below minimum {min_out}")
        token_out = self.token1 if token_in == self.token0 else self.token0
        have = self.ledger.balance_of(token_in, caller)
        if have < amount_in:
            raise InsufficientBalance(f"{caller!r} holds {have} {token_in}, cannot swap {amount_in}")
        self.ledger.transfer(token_in, caller, self.account, amount_in)
        self.ledger.transfer(token_out, self.account, caller, out)
        if token_in == self.token0:
            self.reserve0 += amount_in
            self.reserve1 -= out
        else:
            self.reserve1 += amount_in
            self.reserve0 -= out
        return out

    def add_liquidity(self, caller: str, amt0: int, amt1: int) -> int:
        for amt in (amt0, amt1):
            if isinstance(amt, bool) or not isinstance(amt, int) or amt <= 0:
                raise InvalidAmount("liquidity amounts must be positive ints")
        for tok, amt in ((self.token0, amt0), (self.token1, amt1)):
            have = self.ledger.balance_of(tok, caller)
            if have < amt:
                raise InsufficientBalance(f"{caller!r} holds {have} {tok}, cannot add {amt}")
        supply = self.lp_supply
        if supply == 0 or self.is_empty():
            minted = math.isqrt(amt0 * amt1)
        else:
            lhs, rhs = amt0 * self.reserve1, amt1 * self.reserve0
            if abs(lhs - rhs) > RATIO_TOLERANCE * max(lhs, rhs):
                raise RatioMismatch(
                    f"deposit {amt0}:{amt1} is off the pool ratio {self.reserve0}:{self.reserve1}"
                )
            minted = min(amt0 * supply // self.reserve0, amt1 * supply // self.reserve1)
        if minted == 0:
            raise PoolError("deposit too small to mint LP shares")
        self.ledger.transfer(self.token0, caller, self.account, amt0)
        self.ledger.transfer(self.token1, caller, self.account, amt1)
        self.ledger.mint(self.lp_token, caller, minted, self.account)
        self.reserve0 += amt0
        self.reserve1 += amt1
        return minted

    def remove_liquidity(self, caller: str, lp_amount: int) -> tuple[int, int]:
        if isinstance(lp_amount, bool) or not isinstance(lp_amount, int) or lp_amount <= 0:
            raise InvalidAmount("LP amount must be a positive int")
        have = self.ledger.balance_of(self.lp_token, caller)
        if have < lp_amount:
            raise InsufficientBalance(f"{caller!r} holds {have} LP shares, cannot remove {lp_amount}")
        supply = self.lp_supply
        amt0 = lp_amount * self.reserve0 // supply
        amt1 = lp_amount * self.reserve1 // supply
        self.ledger.burn(self.lp_token, caller, lp_amount, self.account)
        self.ledger.transfer(self.token0, self.account, caller, amt0)
        self.ledger.transfer(self.token1, self.account, caller, amt1)
        self.reserve0 -= amt0
        self.reserve1 -= amt1
        return amt0, amt1

    def arbitrage_amount(self, p_star: Fraction) -> tuple[str, int]:
        """Token and input amount that move the spot price to ``p_star``.

        Targets reserve0 = sqrt(k / p_star) in integers, grossed up for the
        fee; exact when the fee is zero. The amount is 0 if already there.
        """
        p_star = Fraction(p_star)
        if p_star <= 0:
            raise InvalidAmount("target price must be positive")
        if self.is_empty():
            raise EmptyPool(f"pool {self.pool_id} has no liquidity")
        k = self.k
        target0 = math.isqrt(k * p_star.denominator // p_star.numerator)
        if target0 > self.reserve0:
            token_in, amount_in = self.token0, target0 - self.reserve0
        else:
            target1 = math.isqrt(k * p_star.numerator // p_star.denominator)
            token_in, amount_in = self.token1, max(0, target1 - self.reserve1)
        if self.fee_rate:
            amount_in = amount_in * WAD // (WAD - self.fee_rate)
        return token_in, amount_in

    def arbitrage_to(self, caller: str, p_star: Fraction) -> int:
        """Trade the pool so its spot price lands on ``p_star`` (as close as integers allow)."""
        token_in, amount_in = self.arbitrage_amount(p_star)
        if amount_in <= 0:
            return 0
        self.swap_exact_in(caller, token_in, amount_in)
        return amount_in


def arbitrage_divergence(k, p, p_star, scale: int = 10**60) -> dict:
    """Measure divergence loss by trading a real pool from ``p`` to ``p_star``.

    Seeds a fee-less pool on the curve a*b = k at price ``p`` (one token is
    ``scale`` base units, so rounding is far below float precision), lets an
    arbitrageur push the spot price to ``p_star``, withdraws all liquidity and
    compares it with the untouched deposit, both priced at the realized
    post-trade price. Returns exact fractions alongside floats.
    """
    ledger = Ledger()
    ledger.register_token("X", "genesis")
    ledger.register_token("Y", "genesis")
    k, p = Fraction(k), Fraction(p)
    # a = sqrt(k / p), b = sqrt(k * p), to within one base unit
    ra = math.isqrt(math.floor(k / p * scale * scale))
    rb = math.isqrt(math.floor(k * p * scale * scale))
    pool = Pool("oracle", "X", "Y", ledger, fee_rate=0)
    ledger.mint("X", "lp", ra, "genesis")
    ledger.mint("Y", "lp", rb, "genesis")
    shares = pool.add_liquidity("lp", ra, rb)
    p_start = pool.spot_price()
    target = Fraction(p_star)
    token_in, amount_in = pool.arbitrage_amount(target)
    if amount_in:
        ledger.mint(token_in, "arb", amount_in, "genesis")
        pool.arbitrage_to("arb", target)
    p_end = pool.spot_price()
    k_after = pool.k
    out0, out1 = pool.remove_liquidity("lp", shares)
    lp_val = p_end * out0 + out1
    hold_val = p_end * ra + rb
    loss = (hold_val - lp_val) / hold_val
    return {
        "p": p_start,
        "p_star": p_end,
        "k": Fraction(ra * rb, scale * scale),
        "k_after": Fraction(k_after, scale * scale),
        "lp_value": lp_val / scale,
        "hold_value": hold_val / scale,
        "divergence_loss": loss,
        "divergence_loss_float": float(loss),
    }
