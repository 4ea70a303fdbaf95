"""Seeded random straight-line programs for property testing.

Every generated statement is a fresh write over previously defined values,
so no value is ever mutated: each wire has a single-operation modification
path and all cross-path dependencies point backwards.  On such programs
the eager scheduler should always achieve a full early cleanup.
"""

from __future__ import annotations

import random

from .boolexpr import band, bnot, bor, bvar, bxor
from .frontend import Compute, FlatProgram


def _random_expr(rng: random.Random, live: list[int], depth: int):
    if depth <= 0 or rng.random() < 0.35:
        return bvar(rng.choice(live))
    op = rng.choice(("and", "xor", "or", "not"))
    if op == "not":
        return bnot(_random_expr(rng, live, depth - 1))
    k = rng.randint(2, 3)
    args = [_random_expr(rng, live, depth - 1) for _ in range(k)]
    return {"and": band, "xor": bxor, "or": bor}[op](args)


def random_program(seed: int, n_inputs: int | None = None,
                   n_stmts: int | None = None) -> FlatProgram:
    rng = random.Random(seed)
    n = n_inputs if n_inputs is not None else rng.randint(2, 6)
    m = n_stmts if n_stmts is not None else rng.randint(3, 12)
    input_slots = list(range(n))
    live = list(input_slots)
    statements = []
    next_slot = n
    for _ in range(m):
        expr = _random_expr(rng, live, depth=3)
        if expr.op == "const":  # constant folding collapsed it; use a var
            expr = bvar(rng.choice(live))
        statements.append(Compute(next_slot, expr, fresh=True))
        live.append(next_slot)
        next_slot += 1
    temps = live[n:]
    n_out = rng.randint(1, max(1, len(temps)))
    output_slots = sorted(rng.sample(temps, n_out)) if temps else [input_slots[0]]
    return FlatProgram(name=f"rand{seed}", input_slots=input_slots,
                       output_slots=output_slots, statements=statements,
                       slot_count=next_slot,
                       input_layout=[(f"x{i}", 1) for i in range(n)])
