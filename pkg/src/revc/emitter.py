"""Execute a cleanup plan into a concrete reversible circuit.

The emitter owns the slot-to-wire mapping and the ancilla pool.  Program
inputs are pinned to wires 0..n-1; every other value lives on a wire taken
from the pool when its slot first materializes and returned when the slot
is reversed away or cleaned.  Only zero-valued wires are ever returned, so
a freshly allocated wire always reads 0.

Correctness is tracked per slot, not per wire: a backwards statement is
re-synthesized against the *current* mapping (gates are never cached), so
a mirror may run on different wires than the forward pass without changing
the computed values.

The emitter is also usable as an oracle while planning: `snapshot` /
`restore` roll the whole emission state back, which is how the incremental
scheduler measures whether the next statement fits in the qubit budget.
"""

from __future__ import annotations

from .ancilla import AncillaHeap
from .boolexpr import substitute, synthesize, variables
from .circuit import Circuit, Gate, cnot, stats as circuit_stats
from .frontend import CleanSlot, Compute, FlatProgram, InPlaceBlock
from .scheduler import Action, CleanupPlan


def _origin(action: Action, attr: str) -> Action:
    """Walk the ref chain back to the action that recorded `attr`."""
    a = action
    while getattr(a, attr) is None and a.ref is not None:
        a = a.ref
    if getattr(a, attr) is None:
        raise RuntimeError(f"action {action.kind} has no recorded {attr}")
    return a


class Emitter:
    def __init__(self, program: FlatProgram):
        self.program = program
        n = len(program.input_slots)
        self.heap = AncillaHeap(base=n)
        self.slot_map: dict[int, int] = {s: i for i, s in enumerate(program.input_slots)}
        self.gates: list[Gate] = []
        self.output_wires: list[int] | None = None

    @property
    def width(self) -> int:
        return self.heap.frontier

    @property
    def live(self) -> int:
        """Inputs plus currently live ancillas (the reusable-width measure)."""
        return self.heap.base + self.heap.live_count

    def snapshot(self):
        return (self.heap.state(), dict(self.slot_map), len(self.gates),
                self.output_wires)

    def restore(self, snap) -> None:
        heap_state, slot_map, ngates, out = snap
        self.heap.restore(heap_state)
        self.slot_map = dict(slot_map)
        del self.gates[ngates:]
        self.output_wires = out

    # -- wiring helpers -----------------------------------------------------

    def _wire_of(self, slot: int) -> int:
        """Current wire of a slot; an unwritten slot materializes as zero."""
        w = self.slot_map.get(slot)
        if w is None:
            w = self.heap.alloc()
            self.slot_map[slot] = w
        return w

    def _synth(self, expr, target_slot: int, fresh: bool) -> list[Gate]:
        mapping = {v: self._wire_of(v) for v in variables(expr)}
        if fresh:
            if target_slot in self.slot_map:
                raise RuntimeError(f"fresh write to live slot {target_slot}")
            w = self.heap.alloc()
            self.slot_map[target_slot] = w
        else:
            w = self._wire_of(target_slot)
        return synthesize(substitute(expr, mapping), w, self.heap)

    # -- actions ------------------------------------------------------------

    def apply(self, action: Action) -> None:
        getattr(self, f"_do_{action.kind}")(action)

    def _do_fwd(self, action: Action) -> None:
        self._fwd_stmt(action.stmt)

    def _do_bwd(self, action: Action) -> None:
        self._bwd_stmt(action.stmt)

    def _fwd_stmt(self, stmt) -> None:
        if isinstance(stmt, Compute):
            self.gates += self._synth(stmt.expr, stmt.slot, stmt.fresh)
        elif isinstance(stmt, InPlaceBlock):
            for s in stmt.body:
                self._fwd_stmt(s)
            # locals not explicitly cleaned are zero again at block end
            for l in stmt.local_slots:
                if l in self.slot_map:
                    self.heap.free(self.slot_map.pop(l))
        elif isinstance(stmt, CleanSlot):
            if stmt.slot in self.slot_map:
                self.heap.free(self.slot_map.pop(stmt.slot))
        else:
            raise TypeError(stmt)

    def _bwd_stmt(self, stmt) -> None:
        if isinstance(stmt, Compute):
            gates = self._synth(stmt.expr, stmt.slot, fresh=False)
            self.gates += reversed(gates)
            if stmt.fresh:
                self.heap.free(self.slot_map.pop(stmt.slot))
        elif isinstance(stmt, InPlaceBlock):
            # re-materialize the locals the forward pass released at the end
            live: set[int] = set()
            for s in stmt.body:
                if isinstance(s, Compute) and s.fresh:
                    live.add(s.slot)
                elif isinstance(s, CleanSlot):
                    live.discard(s.slot)
            for l in stmt.local_slots:
                if l in live:
                    self.slot_map[l] = self.heap.alloc()
            for s in reversed(stmt.body):
                self._bwd_stmt(s)
        elif isinstance(stmt, CleanSlot):
            self.slot_map[stmt.slot] = self.heap.alloc()
        else:
            raise TypeError(stmt)

    def _do_copy(self, action: Action) -> None:
        src = [self._wire_of(s) for s in action.slots]
        dst = [self.heap.alloc() for _ in action.slots]
        self.gates += [cnot(a, b) for a, b in zip(src, dst)]
        action.src_wires, action.dst_wires = src, dst
        if action.tag == "output":
            self.output_wires = dst

    def _do_uncopy(self, action: Action) -> None:
        # the copied-to wires are pinned for the copy's whole lifetime, but
        # the source values may have migrated to other wires by now: resolve
        # them through the current slot map
        orig = _origin(action, "dst_wires")
        src = [self._wire_of(s) for s in orig.slots]
        self.gates += [cnot(a, b)
                       for a, b in zip(reversed(src), reversed(orig.dst_wires))]
        for d in orig.dst_wires:
            self.heap.free(d)

    def _do_remap(self, action: Action) -> None:
        copy = _origin(action, "dst_wires")
        action.prev_map = {s: self.slot_map.get(s) for s in action.slots}
        for s, d in zip(action.slots, copy.dst_wires):
            self.slot_map[s] = d

    def _do_unremap(self, action: Action) -> None:
        remap = _origin(action, "prev_map")
        for s in action.slots:
            prev = remap.prev_map[s]
            if prev is None:
                del self.slot_map[s]
            else:
                self.slot_map[s] = prev

    def finish(self) -> Circuit:
        program = self.program
        if self.output_wires is not None:
            outputs = list(self.output_wires)
        else:
            outputs = [self._wire_of(s) for s in program.output_slots]
        return Circuit(width=self.width, gates=list(self.gates),
                       inputs=list(range(len(program.input_slots))),
                       outputs=outputs)


def emit(plan: CleanupPlan) -> Circuit:
    em = Emitter(plan.program)
    for a in plan.actions:
        em.apply(a)
    return em.finish()


def compile_flat(program: FlatProgram, strategy: str = "bennett",
                 qubit_budget: int | None = None):
    """Schedule and emit in one step; returns (plan, circuit)."""
    from .scheduler import schedule

    plan = schedule(program, strategy, qubit_budget)
    return plan, emit(plan)


def circuit_report(plan: CleanupPlan, circ: Circuit) -> dict:
    rep = circuit_stats(circ)
    rep.update({
        "strategy": plan.strategy,
        "input_count": len(circ.inputs),
        "output_count": len(circ.outputs),
        "gate_count": len(circ.gates),
        "unclean_count": len(plan.unclean_nodes),
        "checkpoints": plan.checkpoints,
    })
    return rep
