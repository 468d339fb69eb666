"""Random full scenarios for the no-stranded-funds property."""
from __future__ import annotations

import random


def _dec(rng: random.Random, lo: int, hi: int, places: int = 3) -> str:
    q = 10**places
    return f"{rng.randint(lo * q, hi * q) / q:.{places}f}"


def random_scenario(seed: int) -> dict:
    rng = random.Random(seed)
    S = rng.randint(4, 20)
    T1 = S + rng.randint(5, 100)
    T2 = T1 + rng.randint(1, 20)
    T3 = T2 + rng.randint(1, 20)
    horizon = T3 + rng.randint(0, 10)

    def when(lo=0, hi=None):
        return rng.randint(lo, horizon if hi is None else hi)

    venues = []
    for vid in ("x", "y"):
        v = {"id": vid, "rate_per_step": rng.choice(["0", "0.0001", "0.0005", "0.001", "0.0023"])}
        if rng.random() < 0.5:
            v["losses"] = [{"time": when(), "fraction": rng.choice(["1", _dec(rng, 0, 1)])}
                           for _ in range(rng.randint(1, 2))]
        if rng.random() < 0.4:
            v["liquidity"] = [{"time": when(), "liquid": rng.random() < 0.4} for _ in range(rng.randint(1, 3))]
        if rng.random() < 0.2:
            v["accrue_from"] = rng.randint(0, S)
        venues.append(v)

    pools = []
    if rng.random() < 0.7:
        pools.append({"id": "ab", "token0": "A", "token1": "B", "fee": rng.choice(["0", "0.003"])})
    if rng.random() < 0.5:
        pools.append({"id": "bc", "token0": "B", "token1": "C"})
    pool_tokens = {p["id"]: (p["token0"], p["token1"]) for p in pools}

    n = rng.randint(1, 5)
    ids = [f"a{i}" for i in range(n)]
    agents = []
    for aid in ids:
        acts = []
        c = rng.randint(0, 1000)
        if rng.random() < 0.9 and c:
            acts.append({"time": rng.randint(0, S // 2 - 1), "kind": "split_risk",
                         "amount": _dec(rng, 0, c // 2, 2)})
        if rng.random() < 0.2:
            acts.append({"time": rng.randint(0, S + 3), "kind": "split_risk", "amount": _dec(rng, 0, 50, 2)})
        for pid, (t0, t1) in pool_tokens.items():
            if rng.random() < 0.6:
                amt = _dec(rng, 1, 40, 2)
                acts.append({"time": rng.randint(S // 2, S - 1), "kind": "add_liquidity", "pool": pid,
                             "amount0": amt, "amount1": amt})
            for _ in range(rng.randint(0, 3)):
                acts.append({"time": when(), "kind": "swap", "pool": pid,
                             "token_in": rng.choice((t0, t1)), "amount": _dec(rng, 0, 20)})
            if rng.random() < 0.3:
                acts.append({"time": when(), "kind": "remove_liquidity", "pool": pid})
        if "bc" in pool_tokens and rng.random() < 0.3:
            acts.append({"time": rng.randint(0, S), "kind": "atomic_insure", "pool": "bc",
                         "amount": _dec(rng, 0, 10, 2)})
        if n > 1 and rng.random() < 0.4:
            acts.append({"time": when(), "kind": "transfer", "token": rng.choice("AB"),
                         "to": rng.choice([i for i in ids if i != aid]), "amount": _dec(rng, 0, 20)})
        for kind in ("claim_all", "claim_a", "claim_b", "invest", "divest"):
            if rng.random() < 0.25:
                act = {"time": when(S), "kind": kind}
                if kind in ("claim_a", "claim_b"):
                    act["to_x"] = _dec(rng, 0, 5)
                    act["to_y"] = _dec(rng, 0, 5)
                acts.append(act)
        agent = {"id": aid, "initial_c": str(c), "actions": acts}
        if pools and rng.random() < 0.3:
            agent["random_swaps"] = [{"pool": rng.choice(list(pool_tokens)), "count": rng.randint(1, 5),
                                      "max_amount": "10", "start": 0, "end": horizon}]
        if rng.random() < 0.5:
            agent["fallback_x_share"] = _dec(rng, 0, 1, 2)
        agents.append(agent)

    keeper = {}
    if rng.random() < 0.3:
        keeper["invest"] = sorted(rng.randint(S, T1) for _ in range(rng.randint(0, 2)))
    if rng.random() < 0.5:
        keeper["divest"] = sorted(rng.randint(T1, T2 + 2) for _ in range(rng.randint(0, 3)))
    return {
        "name": f"random-{seed}",
        "period": {"S": S, "T1": T1, "T2": T2, "T3": T3},
        "venues": venues,
        "pools": pools,
        "agents": agents,
        "keeper": keeper,
        "horizon": horizon,
        "seed": seed,
        "settle": True,
        "snapshots": False,
    }
