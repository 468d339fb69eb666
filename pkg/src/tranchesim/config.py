"""Scenario and sweep documents: YAML on disk, pydantic models in memory.

YAML floats are loaded as ``Decimal`` so ``0.05`` means exactly 0.05; amounts
are converted straight to 18-decimal base units. Unknown keys are rejected.
Problems come back as ``(field_path, message)`` diagnostics.
"""
from __future__ import annotations

from decimal import Decimal
from pathlib import Path
from typing import Annotated, Any, Literal, Union

import yaml
from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, ValidationError

from .errors import ConfigError
from .fixedpoint import WAD, to_units
from .ledger import GENESIS, POLICY


class _DecimalLoader(yaml.SafeLoader):
    pass


def _construct_decimal(loader, node):
    text = loader.construct_scalar(node).replace("_", "")
    return Decimal(text)


_DecimalLoader.add_constructor("tag:yaml.org,2002:float", _construct_decimal)


def load_yaml(path: str | Path) -> Any:
    with open(path, encoding="utf-8") as fh:
        return yaml.load(fh, Loader=_DecimalLoader)


def _amount(v):
    if isinstance(v, float):
        raise ValueError("write amounts as decimal strings, not binary floats")
    try:
        units = to_units(v)
    except (TypeError, ValueError) as exc:
        raise ValueError(str(exc)) from None
    if units < 0:
        raise ValueError("must be non-negative")
    return units


def _fraction(v):
    units = _amount(v)
    if units > WAD:
        raise ValueError("must lie in [0, 1]")
    return units


def _decimal(v):
    if isinstance(v, float):
        raise ValueError("write numbers as decimal strings, not binary floats")
    if isinstance(v, bool):
        raise ValueError("expected a number")
    return Decimal(v) if isinstance(v, (int, str)) else v


Amount = Annotated[int, BeforeValidator(_amount)]
Fraction01 = Annotated[int, BeforeValidator(_fraction)]
Dec = Annotated[Decimal, BeforeValidator(_decimal)]


class Model(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class Tokens(Model):
    underlying: str = "C"
    tranche_a: str = "A"
    tranche_b: str = "B"


class Period(Model):
    deploy: int = 0
    S: int
    T1: int
    T2: int
    T3: int


class LossEvent(Model):
    time: int
    fraction: Fraction01


class LiquidityEvent(Model):
    time: int
    liquid: bool


class VenueSpec(Model):
    id: str
    share_token: str | None = None
    rate_per_step: Amount = 0
    accrue_from: int | None = None
    losses: list[LossEvent] = []
    liquidity: list[LiquidityEvent] = []

    @property
    def token(self) -> str:
        return self.share_token or f"C{self.id}"


class PoolSpec(Model):
    id: str
    token0: str
    token1: str
    fee: Fraction01 = 3 * WAD // 1000


class Keeper(Model):
    invest: list[int] | None = None
    divest: list[int] | None = None


class _Action(Model):
    time: int


class SplitRisk(_Action):
    kind: Literal["split_risk"]
    amount: Amount


class Invest(_Action):
    kind: Literal["invest"]


class Divest(_Action):
    kind: Literal["divest"]


class Claim(_Action):
    kind: Literal["claim"]
    a: Amount = 0
    b: Amount = 0


class ClaimAll(_Action):
    kind: Literal["claim_all"]


class ClaimA(_Action):
    kind: Literal["claim_a"]
    to_x: Amount = 0
    to_y: Amount = 0


class ClaimB(_Action):
    kind: Literal["claim_b"]
    to_x: Amount = 0
    to_y: Amount = 0


class Swap(_Action):
    kind: Literal["swap"]
    pool: str
    token_in: str
    amount: Amount
    min_out: Amount = 0


class AddLiquidity(_Action):
    kind: Literal["add_liquidity"]
    pool: str
    amount0: Amount
    amount1: Amount


class RemoveLiquidity(_Action):
    kind: Literal["remove_liquidity"]
    pool: str
    shares: Union[Literal["all"], Amount] = "all"


class Transfer(_Action):
    kind: Literal["transfer"]
    token: str
    to: str
    amount: Amount


class Deposit(_Action):
    kind: Literal["deposit"]
    venue: str
    amount: Amount


class Withdraw(_Action):
    kind: Literal["withdraw"]
    venue: str
    shares: Union[Literal["all"], Amount] = "all"


class AtomicInsure(_Action):
    kind: Literal["atomic_insure"]
    amount: Amount
    pool: str
    min_proceeds: Amount = 0


Action = Annotated[
    Union[
        SplitRisk, Invest, Divest, Claim, ClaimAll, ClaimA, ClaimB,
        Swap, AddLiquidity, RemoveLiquidity, Transfer, Deposit, Withdraw, AtomicInsure,
    ],
    Field(discriminator="kind"),
]
PROTOCOL_ACTIONS = ("invest", "divest")


class RandomSwaps(Model):
    """Noise trading: ``count`` swaps at seeded random times in [start, end]."""

    pool: str
    count: int = Field(ge=0)
    max_amount: Amount
    start: int
    end: int


class AgentSpec(Model):
    id: str
    initial_c: Amount = 0
    actions: list[Action] = []
    random_swaps: list[RandomSwaps] = []
    # Preferred share of fallback redemptions taken in Cx (default: Cx first).
    fallback_x_share: Fraction01 | None = None


class Scenario(Model):
    name: str = ""
    tokens: Tokens = Tokens()
    period: Period
    venues: list[VenueSpec]
    pools: list[PoolSpec] = []
    agents: list[AgentSpec] = []
    keeper: Keeper = Keeper()
    horizon: int
    seed: int = 0
    settle: bool = False
    snapshots: bool = True


RESERVED_ACCOUNTS = (GENESIS, POLICY)


def _cross_check(sc: Scenario) -> list[tuple[str, str]]:
    diags: list[tuple[str, str]] = []
    p = sc.period
    if not p.S < p.T1 < p.T2 < p.T3:
        diags.append(("period", f"need S < T1 < T2 < T3, got S={p.S} T1={p.T1} T2={p.T2} T3={p.T3}"))
    if p.deploy > p.S:
        diags.append(("period.deploy", "deployment must not come after S"))
    if sc.horizon < p.deploy:
        diags.append(("horizon", "horizon precedes deployment"))

    def in_window(path, t):
        if not p.deploy <= t <= sc.horizon:
            diags.append((path, f"time {t} outside [{p.deploy}, {sc.horizon}]"))

    if len(sc.venues) != 2:
        diags.append(("venues", f"exactly two venues required, got {len(sc.venues)}"))
    venue_ids = [v.id for v in sc.venues]
    if len(set(venue_ids)) != len(venue_ids):
        diags.append(("venues", "duplicate venue id"))
    tokens = {sc.tokens.underlying, sc.tokens.tranche_a, sc.tokens.tranche_b}
    share_tokens = [v.token for v in sc.venues]
    if len(tokens | set(share_tokens)) != 3 + len(share_tokens):
        diags.append(("tokens", "token symbols must be distinct"))
    tokens |= set(share_tokens)
    for i, v in enumerate(sc.venues):
        for j, ev in enumerate(v.losses):
            in_window(f"venues.{i}.losses.{j}.time", ev.time)
        for j, ev in enumerate(v.liquidity):
            in_window(f"venues.{i}.liquidity.{j}.time", ev.time)

    pool_ids: set[str] = set()
    pairs: set[frozenset] = set()
    for i, pl in enumerate(sc.pools):
        if pl.id in pool_ids:
            diags.append((f"pools.{i}.id", f"duplicate pool id {pl.id!r}"))
        pool_ids.add(pl.id)
        pair = frozenset((pl.token0, pl.token1))
        if len(pair) != 2:
            diags.append((f"pools.{i}", "pool tokens must differ"))
        elif pair in pairs:
            diags.append((f"pools.{i}", f"duplicate pool pair {pl.token0}/{pl.token1}"))
        pairs.add(pair)
        for side in ("token0", "token1"):
            if getattr(pl, side) not in tokens:
                diags.append((f"pools.{i}.{side}", f"unknown token {getattr(pl, side)!r}"))
    pool_tokens = {pl.id: (pl.token0, pl.token1) for pl in sc.pools}
    all_tokens = tokens | {f"LP:{pid}" for pid in pool_ids}

    agent_ids = [a.id for a in sc.agents]
    for i, a in enumerate(sc.agents):
        if agent_ids.count(a.id) > 1:
            diags.append((f"agents.{i}.id", f"duplicate agent id {a.id!r}"))
        if a.id in RESERVED_ACCOUNTS or ":" in a.id:
            diags.append((f"agents.{i}.id", f"{a.id!r} is reserved"))
        for j, act in enumerate(a.actions):
            path = f"agents.{i}.actions.{j}"
            in_window(f"{path}.time", act.time)
            pool = getattr(act, "pool", None)
            if pool is not None and pool not in pool_ids:
                diags.append((f"{path}.pool", f"unknown pool {pool!r}"))
            if act.kind == "swap" and pool in pool_tokens and act.token_in not in pool_tokens[pool]:
                diags.append((f"{path}.token_in", f"pool {pool!r} does not trade {act.token_in!r}"))
            if act.kind == "atomic_insure" and pool in pool_tokens:
                if set(pool_tokens[pool]) != {sc.tokens.tranche_b, sc.tokens.underlying}:
                    diags.append((f"{path}.pool", "atomic_insure needs a B/C pool"))
            if act.kind == "transfer":
                if act.token not in all_tokens:
                    diags.append((f"{path}.token", f"unknown token {act.token!r}"))
                if act.to not in agent_ids and act.to != POLICY:
                    diags.append((f"{path}.to", f"unknown recipient {act.to!r}"))
            if act.kind in ("deposit", "withdraw") and act.venue not in venue_ids:
                diags.append((f"{path}.venue", f"unknown venue {act.venue!r}"))
        for j, rs in enumerate(a.random_swaps):
            path = f"agents.{i}.random_swaps.{j}"
            if rs.pool not in pool_ids:
                diags.append((f"{path}.pool", f"unknown pool {rs.pool!r}"))
            if rs.start > rs.end:
                diags.append((path, "start after end"))
            in_window(f"{path}.start", rs.start)
            in_window(f"{path}.end", rs.end)
    for name in ("invest", "divest"):
        for j, t in enumerate(getattr(sc.keeper, name) or []):
            in_window(f"keeper.{name}.{j}", t)
    return diags


def _pydantic_diags(err: ValidationError) -> list[tuple[str, str]]:
    return [(".".join(str(x) for x in e["loc"]), e["msg"]) for e in err.errors()]


def parse_scenario(data: Any) -> Scenario:
    """Validate a raw document; raise ``ConfigError`` with every diagnostic."""
    if not isinstance(data, dict):
        raise ConfigError([("", "scenario document must be a mapping")])
    try:
        sc = Scenario.model_validate(data)
    except ValidationError as err:
        raise ConfigError(_pydantic_diags(err)) from None
    diags = _cross_check(sc)
    if diags:
        raise ConfigError(diags)
    return sc


def load_scenario(path: str | Path) -> Scenario:
    return parse_scenario(load_yaml(path))


def validate_file(path: str | Path) -> list[tuple[str, str]]:
    """Diagnostics for a scenario file; empty when it is valid. IO errors propagate."""
    data = load_yaml(path)
    try:
        parse_scenario(data)
    except ConfigError as err:
        return err.diagnostics
    return []


def scenario_schema() -> dict:
    """JSON schema of the scenario document."""
    return Scenario.model_json_schema()
