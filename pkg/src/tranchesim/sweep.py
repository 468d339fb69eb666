"""Parameter sweeps producing plot-ready tables.

Three kinds of sweep share one document format:

``divergence``
    Divergence loss of A/C and B/C pools as the terminal tranche price ``r``
    (in C) varies. Columns ``r, D_AC, D_BC``. Every row is re-derived by
    trading a real fee-less pool from the starting price to ``r`` and the
    sweep fails if the two disagree beyond ``ORACLE_TOLERANCE``.
``payouts``
    The liquid-mode waterfall for a fixed ``c_s`` as ``c_t1`` varies.
``scenario``
    Substitutes each axis value into a scenario template at a dotted path,
    runs the scenarios on a process pool, and reports one row per run.
    Rows come back in axis order whatever the completion order.
"""
from __future__ import annotations

import copy
from concurrent.futures import ProcessPoolExecutor
from decimal import Decimal
from pathlib import Path
from typing import Annotated, Any, Literal, Union

import numpy as np
from pydantic import Field, TypeAdapter, ValidationError, model_validator

from .amm import arbitrage_divergence, divergence_loss
from .config import Dec, Model, _pydantic_diags, load_yaml, parse_scenario
from .errors import ConfigError
from .fixedpoint import WAD, fmt, to_units
from .insurance import compute_liquid_payouts, liquid_case, split_interest
from .scenario import run

ORACLE_TOLERANCE = 1e-9
MAX_POINTS = 1_000_000


class Axis(Model):
    """Either an inclusive ``start``/``stop``/``step`` range or explicit ``values``."""

    name: str
    path: str | None = None
    start: Dec | None = None
    stop: Dec | None = None
    step: Dec | None = None
    values: list[Dec] | None = None

    @model_validator(mode="after")
    def _check(self):
        ranged = (self.start, self.stop, self.step)
        if self.values is not None:
            if any(v is not None for v in ranged):
                raise ValueError("give either values or start/stop/step, not both")
            if not self.values:
                raise ValueError("values must not be empty")
            return self
        if any(v is None for v in ranged):
            raise ValueError("start, stop and step are all required")
        if self.step <= 0:
            raise ValueError("step must be positive")
        if self.stop < self.start:
            raise ValueError("empty range: stop is below start")
        if (self.stop - self.start) / self.step > MAX_POINTS:
            raise ValueError(f"more than {MAX_POINTS} points")
        return self

    def points(self) -> list[Decimal]:
        if self.values is not None:
            return list(self.values)
        n = int((self.stop - self.start) // self.step)
        return [self.start + i * self.step for i in range(n + 1)]


class DivergenceSweep(Model):
    kind: Literal["divergence"]
    axis: Axis
    p_a_start: Dec = Decimal(1)
    p_b_start: Dec = Decimal(1)
    check_oracle: bool = True

    @model_validator(mode="after")
    def _positive(self):
        if self.p_a_start <= 0 or self.p_b_start <= 0:
            raise ValueError("starting prices must be positive")
        if min(self.axis.points()) <= 0:
            raise ValueError("terminal prices must be positive")
        return self


class PayoutSweep(Model):
    kind: Literal["payouts"]
    axis: Axis
    c_s: Dec
    # Share of C_T1 coming back from venue x; drives the interest term i.
    x_share: Dec = Decimal("0.5")

    @model_validator(mode="after")
    def _check(self):
        if self.c_s <= 0:
            raise ValueError("c_s must be positive")
        if not 0 <= self.x_share <= 1:
            raise ValueError("x_share must lie in [0, 1]")
        if min(self.axis.points()) < 0:
            raise ValueError("c_t1 must be non-negative")
        return self


class ScenarioSweep(Model):
    kind: Literal["scenario"]
    axis: Axis
    template: str
    workers: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def _check(self):
        if not self.axis.path:
            raise ValueError("scenario sweeps need axis.path")
        return self


SweepSpec = Annotated[Union[DivergenceSweep, PayoutSweep, ScenarioSweep], Field(discriminator="kind")]


_SWEEP = TypeAdapter(SweepSpec)


def parse_sweep(data: Any) -> DivergenceSweep | PayoutSweep | ScenarioSweep:
    if not isinstance(data, dict):
        raise ConfigError([("", "sweep document must be a mapping")])
    try:
        return _SWEEP.validate_python(data)
    except ValidationError as err:
        # drop the union tag pydantic puts in front of every path
        tag = f"{data.get('kind')}."
        raise ConfigError([(p.removeprefix(tag), m) for p, m in _pydantic_diags(err)]) from None


def load_sweep(path: str | Path):
    return parse_sweep(load_yaml(path))


# -- evaluation ----------------------------------------------------------


def divergence_rows(spec: DivergenceSweep) -> tuple[list[str], list[list[str]]]:
    r = np.array([float(x) for x in spec.axis.points()])
    d_ac = divergence_loss(float(spec.p_a_start), r)
    d_bc = divergence_loss(float(spec.p_b_start), r)
    d_ac, d_bc = np.atleast_1d(d_ac), np.atleast_1d(d_bc)
    if spec.check_oracle:
        for start, curve in ((spec.p_a_start, d_ac), (spec.p_b_start, d_bc)):
            for x, d in zip(r, curve):
                _oracle_check(float(start), float(x), float(d))
    rows = [[_num(x), _num(a), _num(b)] for x, a, b in zip(spec.axis.points(), d_ac, d_bc)]
    return ["r", "D_AC", "D_BC"], rows


def _oracle_check(p: float, p_star: float, d: float) -> None:
    got = arbitrage_divergence(1.0, p, p_star)["divergence_loss_float"]
    if abs(got - d) > ORACLE_TOLERANCE * d:
        raise ArithmeticError(f"arbitrage oracle disagrees at p={p} p*={p_star}: {got} vs {d}")


def payout_rows(spec: PayoutSweep) -> tuple[list[str], list[list[str]]]:
    c_s = to_units(spec.c_s)
    half = c_s // 2
    x_share = to_units(spec.x_share)
    rows = []
    for c_t1_dec in spec.axis.points():
        c_t1 = to_units(c_t1_dec)
        from_x = c_t1 * x_share // WAD
        interest = split_interest((half, c_s - half), (from_x, c_t1 - from_x))
        a, b = compute_liquid_payouts(c_s, c_t1, interest, half, half)
        rows.append([
            fmt(c_t1), fmt(interest), str(liquid_case(c_s, c_t1)),
            fmt(a), fmt(b), fmt(a * half // WAD), fmt(b * half // WAD),
        ])
    return ["c_t1", "interest", "row", "payout_a", "payout_b", "total_a", "total_b"], rows


def _set_path(doc: Any, path: str, value: Any) -> None:
    keys = path.split(".")
    node = doc
    for k in keys[:-1]:
        node = node[int(k)] if isinstance(node, list) else node[k]
    last = keys[-1]
    if isinstance(node, list):
        node[int(last)] = value
    else:
        node[last] = value


def _run_point(args: tuple[dict, str, Decimal, int | None]) -> list[str]:
    doc, path, value, seed = args
    doc = copy.deepcopy(doc)
    _set_path(doc, path, value)
    if seed is not None:
        doc["seed"] = seed
    report = run(parse_scenario(doc))
    pol = report.policy
    return [
        _num(value), pol["final_state"], pol["c_payout_a"], pol["c_payout_b"],
        pol["cx_payout"], pol["cy_payout"], pol["interest"], str(report.conservation["c_conserved"]),
    ]


def scenario_rows(spec: ScenarioSweep, base_dir: Path, seed: int | None = None):
    doc = load_yaml(base_dir / spec.template)
    points = spec.axis.points()
    # Validate every point up front so a bad value is a config error, not a crash.
    diags = []
    for i, value in enumerate(points):
        trial = copy.deepcopy(doc)
        try:
            _set_path(trial, spec.axis.path, value)
            parse_scenario(trial)
        except ConfigError as err:
            diags += [(f"axis[{i}]={value}: {p}", m) for p, m in err.diagnostics]
        except (KeyError, IndexError, ValueError, TypeError) as err:
            diags.append((f"axis.path", f"cannot set {spec.axis.path!r}: {err!r}"))
            break
    if diags:
        raise ConfigError(diags)
    jobs = [(doc, spec.axis.path, v, seed) for v in points]
    if spec.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            rows = list(pool.map(_run_point, jobs))
    else:
        rows = [_run_point(j) for j in jobs]
    header = [spec.axis.name, "final_state", "c_payout_a", "c_payout_b",
              "cx_payout", "cy_payout", "interest", "c_conserved"]
    return header, rows


def run_sweep(spec, base_dir: str | Path = ".", seed: int | None = None):
    """Evaluate a parsed sweep; returns ``(header, rows)`` with string cells."""
    if isinstance(spec, DivergenceSweep):
        return divergence_rows(spec)
    if isinstance(spec, PayoutSweep):
        return payout_rows(spec)
    return scenario_rows(spec, Path(base_dir), seed)


def _num(x) -> str:
    if isinstance(x, Decimal):
        return format(x.normalize(), "f") if x else "0"
    return repr(float(x))
