"""Reversible pebble game on a directed line.

Nodes are numbered 1..T; node 0 is the input and is always available.
Placing or removing a pebble on node i requires a pebble on node i-1
(the reversible rule).  Strategy generators: Bennett (place everything,
then unwind), incremental (checkpointing under a pebble budget), a
log-space recursive strategy, and an optimal search via the midpoint
recursion solved with dynamic programming.  A brute-force breadth-first
search over game states doubles as the referee for the optimizer.
"""

from __future__ import annotations

import csv
import functools
import io
from collections import deque
from dataclasses import dataclass, field
from math import ceil, log2

PLACE = "place"
REMOVE = "remove"
INF = float("inf")


@dataclass(frozen=True)
class Move:
    action: str  # PLACE | REMOVE
    node: int


@dataclass
class ValidationReport:
    ok: bool
    peak_pebbles: int = 0
    steps: int = 0
    placements: int = 0
    clean: bool = False  # final state is exactly {T}
    final_state: frozenset = frozenset()
    violation: str | None = None


class InfeasibleError(Exception):
    def __init__(self, message: str, minimum: int):
        super().__init__(message)
        self.minimum = minimum  # smallest feasible budget


def validate(moves, T: int, k: int, require_clean: bool = False) -> ValidationReport:
    """Replay a move list, enforcing legality and the pebble budget.

    The final state must contain a pebble on node T.  Checkpoint pebbles
    left behind (as the incremental strategy does) are reported via
    `clean=False`; pass `require_clean=True` to reject them.
    """
    state: set[int] = set()
    peak = 0
    placements = 0
    for idx, m in enumerate(moves):
        if not (1 <= m.node <= T):
            return ValidationReport(False, peak, idx, placements,
                                    violation=f"move {idx}: node {m.node} outside 1..{T}")
        if m.node != 1 and (m.node - 1) not in state:
            return ValidationReport(False, peak, idx, placements,
                                    violation=f"move {idx}: node {m.node - 1} not pebbled")
        if m.action == PLACE:
            if m.node in state:
                return ValidationReport(False, peak, idx, placements,
                                        violation=f"move {idx}: node {m.node} already pebbled")
            state.add(m.node)
            placements += 1
            if len(state) > k:
                return ValidationReport(False, len(state), idx, placements,
                                        violation=f"move {idx}: budget {k} exceeded")
        elif m.action == REMOVE:
            if m.node not in state:
                return ValidationReport(False, peak, idx, placements,
                                        violation=f"move {idx}: node {m.node} not pebbled")
            state.remove(m.node)
        else:
            return ValidationReport(False, peak, idx, placements,
                                    violation=f"move {idx}: bad action {m.action!r}")
        peak = max(peak, len(state))
    if T not in state:
        return ValidationReport(False, peak, len(moves), placements,
                                violation=f"node {T} not pebbled at the end")
    clean = state == {T}
    if require_clean and not clean:
        extra = sorted(state - {T})
        return ValidationReport(False, peak, len(moves), placements, clean=False,
                                final_state=frozenset(state),
                                violation=f"leftover pebbles at {extra}")
    return ValidationReport(True, peak, len(moves), placements, clean=clean,
                            final_state=frozenset(state))


def bennett_strategy(T: int) -> list[Move]:
    """Place 1..T, then remove T-1..1: 2T-1 moves, peak T."""
    if T < 1:
        raise ValueError("T must be >= 1")
    moves = [Move(PLACE, i) for i in range(1, T + 1)]
    moves += [Move(REMOVE, i) for i in range(T - 1, 0, -1)]
    return moves


def incremental_strategy(T: int, k: int) -> list[Move]:
    """Pebble forward in shrinking segments, leaving a checkpoint per segment.

    Reaches at most k(k+1)/2; peak k.  Checkpoint pebbles stay on the board
    (a fully clean finish is unreachable at the bound: removing a checkpoint
    would need one more free pebble than ever remains).
    """
    if k < 1:
        raise ValueError("need at least one pebble")
    reach = k * (k + 1) // 2
    if T > reach:
        raise InfeasibleError(f"{k} pebbles reach at most node {reach}, not {T}",
                              minimum=_min_pebbles_for(T))
    moves: list[Move] = []
    pos = 0  # last checkpoint (0 = input)
    free = k
    while pos < T:
        seg = min(free, T - pos)
        for i in range(pos + 1, pos + seg + 1):
            moves.append(Move(PLACE, i))
        for i in range(pos + seg - 1, pos, -1):
            moves.append(Move(REMOVE, i))
        pos += seg
        free -= 1
    return moves


def _min_pebbles_for(T: int) -> int:
    k = 1
    while k * (k + 1) // 2 < T:
        k += 1
    return k


def lmt_strategy(T: int) -> list[Move]:
    """Log-space strategy: optimal play under a ceil(log2 T)+1 pebble budget.

    Peak pebbles is logarithmic in T; the step count grows superpolynomially
    (it is the budget-constrained optimum, e.g. 193 steps for T=32).
    """
    if T < 1:
        raise ValueError("T must be >= 1")
    k = 1 if T == 1 else ceil(log2(T)) + 1
    _, moves = knill_optimal(T, k)
    return moves


@functools.lru_cache(maxsize=None)
def _min_steps(n: int, k: int):
    """Minimal moves to pebble distance n past a fixed base and clean up,
    using at most k pebbles beyond the base (the midpoint recursion)."""
    if n == 0:
        return 0
    if k <= 0:
        return INF
    if n == 1:
        return 1
    best = INF
    for j in range(1, n):
        c = _min_steps(j, k) + _min_steps(n - j, k - 1) + _min_steps(j, k - 1)
        if c < best:
            best = c
    return best


def _dp_moves(base: int, n: int, k: int, out: list[Move], unpebble: bool = False) -> None:
    if n == 0:
        return
    if n == 1:
        out.append(Move(REMOVE if unpebble else PLACE, base + 1))
        return
    best, best_j = INF, None
    for j in range(1, n):
        c = _min_steps(j, k) + _min_steps(n - j, k - 1) + _min_steps(j, k - 1)
        if c < best:
            best, best_j = c, j
    j = best_j
    if unpebble:
        # exact mirror of the placement sequence
        sub: list[Move] = []
        _dp_moves(base, n, k, sub, unpebble=False)
        out.extend(Move(REMOVE if m.action == PLACE else PLACE, m.node)
                   for m in reversed(sub))
        return
    _dp_moves(base, j, k, out)                 # pebble the midpoint
    _dp_moves(base + j, n - j, k - 1, out)     # pebble the far half from it
    _dp_moves(base, j, k - 1, out, unpebble=True)  # clean the midpoint


def knill_optimal(T: int, k: int) -> tuple[int, list[Move]]:
    """Minimal-step strategy under a budget of k pebbles (DP over midpoints).

    Feasible exactly when T <= 2^(k-1).  Practical for T up to a few
    hundred (the table is O(T*k) entries of O(T) work each).
    """
    if T < 1:
        raise ValueError("T must be >= 1")
    steps = _min_steps(T, k)
    if steps == INF:
        kmin = 1 if T == 1 else ceil(log2(T)) + 1
        raise InfeasibleError(f"{k} pebbles cannot reach node {T} cleanly; "
                              f"need at least {kmin}", minimum=kmin)
    moves: list[Move] = []
    _dp_moves(0, T, k, moves)
    return steps, moves


def exhaustive_min_steps(T: int, k: int):
    """Brute-force BFS referee over game states; None if unreachable.

    States are bitmasks of pebbled nodes, so keep T small (<= ~20).
    """
    start, goal = 0, 1 << (T - 1)
    if T == 0:
        return 0
    dist = {start: 0}
    queue = deque([start])
    while queue:
        s = queue.popleft()
        if s == goal:
            return dist[s]
        count = bin(s).count("1")
        for i in range(1, T + 1):
            if i > 1 and not (s >> (i - 2)) & 1:
                continue
            bit = 1 << (i - 1)
            if s & bit:
                t = s ^ bit
            else:
                if count >= k:
                    continue
                t = s | bit
            if t not in dist:
                dist[t] = dist[s] + 1
                queue.append(t)
    return None


@dataclass
class TradeoffRow:
    pebbles: int
    gates: int
    min_steps: int | None


def tradeoff_table(T_max: int, k_list) -> list[TradeoffRow]:
    rows = []
    for k in k_list:
        for T in range(1, T_max + 1):
            steps = _min_steps(T, k)
            rows.append(TradeoffRow(k, T, None if steps == INF else steps))
    return rows


def tradeoff_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["pebbles", "gates", "min_steps"])
    for r in rows:
        w.writerow([r.pebbles, r.gates, "" if r.min_steps is None else r.min_steps])
    return buf.getvalue()
