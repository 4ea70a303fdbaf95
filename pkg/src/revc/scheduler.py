"""Cleanup scheduling: turn an MDD into a linear plan of circuit actions.

Three strategies:

  bennett      compute everything, copy the outputs to fresh wires, run the
               exact mirror image;
  eager        walk the graph backwards and, for every garbage value whose
               inputs are still intact at its last use, insert the reversed
               mutation path (plus a release of the wire) right after that
               use; values that cannot be cleaned this way are marked
               Unclean and swept up by one final copy-out + full reversal;
  incremental  run forward under a total qubit budget; when the next step
               would exceed the budget, copy the values still needed to
               fresh wires (a checkpoint), reverse the current segment to
               release its wires, and continue from the checkpoint; the
               checkpoints themselves are cleaned by the final copy-out +
               full reversal.

A plan is a flat list of Actions executed in order by the emitter:
  fwd/bwd      run a flat statement forwards / in reverse,
  copy/uncopy  CNOT-fanout a slot list onto fresh wires / undo it,
  remap/unremap  switch slots over to their checkpoint copies and back.

Every action has an exact inverse, so reversing a plan segment is just
inverting its actions in reverse order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .boolexpr import variables
from .frontend import CleanSlot, Compute, FlatProgram, InPlaceBlock
from .mdd import CLEAN, INIT, INPUT, MDD, OP, OUTPUT, build_mdd

# node dispositions
CLEANED_EAGERLY = "CleanedEagerly"
BENNETT_CLEANED = "BennettCleaned"
CHECKPOINTED = "CheckpointedThenCleaned"
UNCLEAN = "Unclean"


@dataclass
class Action:
    kind: str  # fwd | bwd | copy | uncopy | remap | unremap
    stmt: object = None
    slots: tuple = ()
    tag: str = ""  # copy purpose: "output" | "checkpoint"
    ref: "Action | None" = None  # remap/unremap -> their copy action
    # filled in by the emitter on first execution:
    src_wires: list | None = None
    dst_wires: list | None = None
    prev_map: dict | None = None


def invert(a: Action) -> Action:
    """Exact inverse action; `ref` links back so the emitter can recover the
    wires recorded when the original ran (copy fanout targets, remap's saved
    slot map)."""
    flip = {"fwd": "bwd", "bwd": "fwd", "copy": "uncopy", "uncopy": "copy",
            "remap": "unremap", "unremap": "remap"}
    return Action(flip[a.kind], stmt=a.stmt, slots=a.slots, tag=a.tag, ref=a)


def mirror(actions) -> list[Action]:
    return [invert(a) for a in reversed(actions)]


@dataclass
class CleanupPlan:
    strategy: str
    program: FlatProgram
    mdd: MDD
    actions: list = field(default_factory=list)
    dispositions: dict = field(default_factory=dict)  # node id -> tag
    copied_outputs: bool = False
    checkpoints: int = 0

    @property
    def unclean_nodes(self) -> list:
        return [n for n, d in self.dispositions.items() if d == UNCLEAN]


class BudgetError(Exception):
    def __init__(self, message: str, minimum: int | None = None):
        super().__init__(message)
        self.minimum = minimum  # smallest budget known to work


# ---------------------------------------------------------------------------
# Bennett


def bennett_cleanup(g: MDD) -> CleanupPlan:
    program = g.program
    forward = [Action("fwd", stmt=s) for s in program.statements]
    actions = forward + [Action("copy", slots=tuple(program.output_slots),
                                tag="output")] + mirror(forward)
    plan = CleanupPlan("bennett", program, g, actions, copied_outputs=True)
    for n in g.nodes:
        if n.kind == INIT:
            plan.dispositions[n.id] = BENNETT_CLEANED
    return plan


# ---------------------------------------------------------------------------
# Eager (Alg. 2 style)


@dataclass
class _Event:
    action: Action
    reads: frozenset  # node ids whose values this event consumes
    destroys: frozenset = frozenset()  # node states undone by this event


def _stmt_reads(g: MDD, stmt_index: int) -> set:
    out: set = set()
    for n in g.nodes:
        if n.stmt_index == stmt_index and n.kind == OP:
            out |= set(g.reads[n.id])
    return out


def eager_cleanup(g: MDD) -> CleanupPlan:
    program = g.program
    plan = CleanupPlan("eager", program, g)

    # one event per top-level statement
    events: list[_Event] = []
    stmt_pos: dict[int, int] = {}  # stmt index -> event position (initial)
    for i, stmt in enumerate(program.statements):
        stmt_pos[i] = len(events)
        events.append(_Event(Action("fwd", stmt=stmt),
                             reads=frozenset(_stmt_reads(g, i))))

    def event_pos_of_node(nid: int) -> int:
        n = g.node(nid)
        if n.stmt_index is None:
            return -1  # inputs exist before every event
        # positions shift as we insert; find the event carrying this stmt
        for p, ev in enumerate(events):
            if ev.action.kind == "fwd" and ev.action.stmt is program.statements[n.stmt_index]:
                return p
        return -1

    # garbage terminals: last state of a mutation path that is not an
    # output, not a clean node and not an untouched input
    output_holders = {g.mutation_prev[o] for o in g.output_ids}
    terminals = []
    for n in g.nodes:
        if n.id in g.mutation_next or n.id in output_holders:
            continue
        if n.kind in (OUTPUT, CLEAN, INPUT):
            continue
        if n.kind == INIT:
            continue  # an init with no op is dead weight; nothing to undo
        terminals.append(n)

    for term in sorted(terminals, key=lambda n: -n.id):
        path = g.modification_path(term.id)
        path_ops = [g.node(x) for x in path if g.node(x).kind == OP]
        if any(n.group is not None for n in path_ops):
            # the path runs through an in-place block: reversing it would
            # disturb the block's other targets, so it cannot be cleaned
            # in isolation
            plan.dispositions[term.id] = UNCLEAN
            continue

        # last event (in the current, already-extended list) reading term
        d_pos = event_pos_of_node(term.id)
        for p, ev in enumerate(events):
            if term.id in ev.reads:
                d_pos = max(d_pos, p)

        # the reversal re-reads the path inputs: they must be unmodified
        # and un-cleaned up to and including d_pos
        ok = True
        inputs = g.input_nodes(path)
        for u in inputs:
            w = g.mutation_next.get(u)
            if w is not None and g.node(w).kind != OUTPUT:
                if event_pos_of_node(w) <= d_pos:
                    ok = False
                    break
            if any(u in ev.destroys for ev in events[:d_pos + 1]):
                ok = False
                break
        if not ok:
            plan.dispositions[term.id] = UNCLEAN
            continue

        destroyed = frozenset(path)
        inserted = [
            _Event(Action("bwd", stmt=n.stmt), reads=frozenset(g.reads[n.id]),
                   destroys=destroyed)
            for n in reversed(path_ops)
        ]
        events[d_pos + 1:d_pos + 1] = inserted
        plan.dispositions[term.id] = CLEANED_EAGERLY

    actions = [ev.action for ev in events]
    if plan.unclean_nodes:
        # copy & reverse: sweep everything that is left
        actions = actions + [Action("copy", slots=tuple(program.output_slots),
                                    tag="output")] + mirror(actions)
        plan.copied_outputs = True
    plan.actions = actions
    return plan


# ---------------------------------------------------------------------------
# Incremental (checkpointing under a qubit budget)


def _slots_used_by(stmt) -> set:
    """Slots whose *current value* a statement consumes or extends."""
    if isinstance(stmt, Compute):
        used = set(variables(stmt.expr))
        if not stmt.fresh:
            used.add(stmt.slot)
        return used
    if isinstance(stmt, InPlaceBlock):
        return set(stmt.arg_slots) | set(stmt.target_slots)
    if isinstance(stmt, CleanSlot):
        return {stmt.slot}
    raise TypeError(stmt)


def _written_slots(stmt) -> set:
    if isinstance(stmt, Compute):
        return {stmt.slot}
    if isinstance(stmt, InPlaceBlock):
        return set(stmt.target_slots)
    return set()


def _plan_incremental(g: MDD, budget: int) -> CleanupPlan:
    from .emitter import Emitter

    program = g.program
    stmts = program.statements
    plan = CleanupPlan("incremental", program, g, copied_outputs=True)

    # future[i]: slots whose current value is consumed by statements >= i
    # or by the output
    future: list[set] = [set() for _ in range(len(stmts) + 1)]
    future[len(stmts)] = set(program.output_slots)
    for i in range(len(stmts) - 1, -1, -1):
        future[i] = future[i + 1] | _slots_used_by(stmts[i])

    em = Emitter(program)
    actions: list[Action] = []
    seg_start = 0
    seg_written: set = set()
    i = 0
    just_checkpointed = False
    while i < len(stmts):
        snap = em.snapshot()
        act = Action("fwd", stmt=stmts[i])
        em.apply(act)
        if em.live <= budget:
            actions.append(act)
            seg_written |= _written_slots(stmts[i])
            if isinstance(stmts[i], CleanSlot):
                seg_written.discard(stmts[i].slot)
            i += 1
            just_checkpointed = False
            continue
        em.restore(snap)
        if just_checkpointed or seg_start == len(actions):
            raise BudgetError(
                f"budget of {budget} qubits cannot fit statement {i}")
        # checkpoint: save segment values needed later, then roll the
        # segment back to release its wires.  The copy itself may push the
        # width past the budget by up to |needed| wires; the budget bounds
        # the computation segments, not the instantaneous fanout.
        needed = sorted(s for s in seg_written if s in future[i])
        copy = Action("copy", slots=tuple(needed), tag="checkpoint")
        em.apply(copy)
        rev = mirror(actions[seg_start:])
        for a in rev:
            em.apply(a)
        remap = Action("remap", slots=tuple(needed), ref=copy)
        em.apply(remap)
        actions += [copy] + rev + [remap]
        plan.checkpoints += 1
        seg_start = len(actions)
        seg_written = set()
        just_checkpointed = True

    out_copy = Action("copy", slots=tuple(program.output_slots), tag="output")
    actions = actions + [out_copy] + mirror(actions)
    plan.actions = actions
    for n in g.nodes:
        if n.kind == INIT:
            plan.dispositions[n.id] = (CHECKPOINTED if plan.checkpoints
                                       else BENNETT_CLEANED)
    return plan


def incremental_cleanup(g: MDD, qubit_budget: int | None = None) -> CleanupPlan:
    """Checkpointing cleanup under a total-width budget.

    With no budget (or a budget at least the Bennett width) this reduces to
    the Bennett plan.  An infeasible budget raises BudgetError carrying the
    smallest budget that does work.
    """
    from .emitter import emit

    if qubit_budget is None:
        return _plan_incremental(g, budget=1 << 62)
    try:
        return _plan_incremental(g, qubit_budget)
    except BudgetError:
        pass
    # find and report the minimal feasible budget
    hi = emit(bennett_cleanup(g)).width
    lo = qubit_budget
    while lo < hi:
        mid = (lo + hi) // 2
        try:
            _plan_incremental(g, mid)
            hi = mid
        except BudgetError:
            lo = mid + 1
    raise BudgetError(
        f"budget of {qubit_budget} qubits is infeasible; "
        f"minimum is {hi}", minimum=hi)


STRATEGIES = {
    "bennett": lambda g, budget=None: bennett_cleanup(g),
    "eager": lambda g, budget=None: eager_cleanup(g),
    "incremental": lambda g, budget=None: incremental_cleanup(g, budget),
}


def schedule(program: FlatProgram, strategy: str, qubit_budget: int | None = None) -> CleanupPlan:
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    g = build_mdd(program)
    return STRATEGIES[strategy](g, qubit_budget)
