import pytest
from hypothesis import given, strategies as st

from tranchesim.errors import IlliquidVenue, InsufficientBalance, InvalidAmount, VenueError
from tranchesim.fixedpoint import WAD, to_units
from tranchesim.ledger import GENESIS, Ledger
from tranchesim.venues import YieldVenue


def make(rate="0.0005"):
    led = Ledger()
    led.register_token("C", GENESIS)
    v = YieldVenue("x", led, rate_per_step=to_units(rate))
    led.mint("C", "u", 1000 * WAD, GENESIS)
    return led, v


def test_deposit_accrue_withdraw():
    led, v = make()
    shares = v.deposit("u", 100 * WAD)
    assert shares == 100 * WAD
    v.accrue(100)
    assert v.exchange_rate == to_units("1.05")
    assert v.withdraw("u", shares) == 105 * WAD
    assert led.balance_of("C", "u") == 1005 * WAD
    assert v.accrued == 5 * WAD


def test_loss_haircut_applies_once():
    led, v = make()
    v.deposit("u", 100 * WAD)
    v.accrue(50)
    v.apply_loss(to_units("0.5"))
    assert v.exchange_rate == to_units("0.5125")
    v.accrue(50)
    # anchor halved, so the full 100 steps of interest are also halved
    assert v.exchange_rate == to_units("0.525")
    assert v.reserve == 52 * WAD + WAD // 2


def test_total_loss_zeroes_rate_and_blocks_deposits():
    led, v = make()
    v.deposit("u", 100 * WAD)
    v.apply_loss(WAD)
    assert v.exchange_rate == 0
    assert v.reserve == 0
    assert v.withdraw("u", 100 * WAD) == 0
    with pytest.raises(VenueError):
        v.deposit("u", WAD)


def test_illiquid_rejects():
    led, v = make()
    v.deposit("u", 10 * WAD)
    v.set_liquidity(False)
    before = (led.snapshot(), v.snapshot())
    with pytest.raises(IlliquidVenue):
        v.deposit("u", WAD)
    with pytest.raises(IlliquidVenue):
        v.withdraw("u", WAD)
    assert (led.snapshot(), v.snapshot()) == before


def test_bad_inputs():
    led, v = make()
    with pytest.raises(InvalidAmount):
        v.apply_loss(WAD + 1)
    with pytest.raises(InsufficientBalance):
        v.deposit("u", 10**30)
    with pytest.raises(ValueError):
        v.accrue(-1)


@given(st.integers(0, 500), st.integers(0, 500), st.integers(0, WAD), st.integers(1, 10**6))
def test_accrual_composes_and_commutes_with_loss(d1, d2, loss, ppm):
    rate = WAD * ppm // 10**8
    _, one = make()
    _, two = make()
    one.rate_per_step = two.rate_per_step = rate
    one.deposit("u", 777 * WAD)
    two.deposit("u", 777 * WAD)
    one.accrue(d1 + d2)
    one.apply_loss(loss)
    two.accrue(d1)
    two.apply_loss(loss)
    two.accrue(d2)
    assert one.exchange_rate == two.exchange_rate
    assert one.reserve == two.reserve


@given(st.lists(st.tuples(st.sampled_from(["dep", "wd", "acc", "loss"]), st.integers(0, 10**21)), max_size=30))
def test_reserve_backs_shares(seq):
    led, v = make()
    for op, n in seq:
        try:
            if op == "dep":
                v.deposit("u", n % (led.balance_of("C", "u") + 1))
            elif op == "wd":
                v.withdraw("u", n % (led.balance_of(v.share_token, "u") + 1))
            elif op == "acc":
                v.accrue(n % 50)
            else:
                v.apply_loss(n % (WAD // 10))
        except VenueError:
            pass
        assert v.reserve >= v.backing()
        assert led.total_supply_of("C") == 1000 * WAD + v.accrued - v.lost
