"""Mutable data dependency (MDD) graph over a FlatProgram.

One node per input bit, per zero-initialization, per operation and per
output designation.  Dependency edges connect a value being *read* to the
operation reading it; mutation edges connect successive states of the same
wire and therefore form vertex-disjoint paths (each state has at most one
predecessor and one successor).

An in-place call block contributes one member node per mutated target
element; the members share a `group` tag identifying the block as a single
emission unit (its internal locals are invisible at this level, they are
allocated and returned inside the unit).

The cleanup scheduler consumes three queries: the last node depending on a
given node, the mutation path leading to a node, and the inputs read along
a path.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .boolexpr import variables
from .frontend import CleanSlot, Compute, FlatProgram, InPlaceBlock, interpret

INPUT = "input"
INIT = "init"
OP = "op"
CLEAN = "clean"
OUTPUT = "output"

ONE_WAY = "OneWay"
INTERDEPENDENT = "Interdependent"


@dataclass
class MddNode:
    id: int
    kind: str
    slot: int | None = None
    stmt_index: int | None = None  # top-level statement producing this node
    stmt: object = None
    group: int | None = None  # in-place block unit id
    label: str = ""


@dataclass
class MDD:
    nodes: list = field(default_factory=list)
    # dependency edges: reads[v] = nodes whose values v reads
    reads: dict = field(default_factory=dict)
    dependents: dict = field(default_factory=dict)  # reverse of reads
    mutation_next: dict = field(default_factory=dict)
    mutation_prev: dict = field(default_factory=dict)
    current: dict = field(default_factory=dict)  # slot -> node id (final state)
    input_ids: list = field(default_factory=list)
    output_ids: list = field(default_factory=list)
    program: FlatProgram | None = None

    def node(self, nid: int) -> MddNode:
        return self.nodes[nid]

    def topo_order(self) -> list:
        """Creation order is a topological order (ties broken by id)."""
        return list(self.nodes)

    def last_dependent_node(self, nid: int) -> int:
        """Topological index of the last node depending on nid (nid itself
        if nothing reads it)."""
        deps = self.dependents.get(nid, ())
        return max(deps, default=nid)

    def modification_path(self, nid: int) -> list:
        """Node ids from the Init/Input head of nid's mutation path to nid."""
        path = [nid]
        while self.mutation_prev.get(path[0]) is not None:
            path.insert(0, self.mutation_prev[path[0]])
        return path

    def input_nodes(self, path) -> set:
        """All nodes read by operations on the path, excluding path members."""
        members = set(path)
        out: set = set()
        for nid in path:
            out |= set(self.reads.get(nid, ())) - members
        return out

    def mutation_paths(self) -> list:
        """All maximal mutation paths (heads are Init or Input nodes)."""
        heads = [n.id for n in self.nodes
                 if self.mutation_prev.get(n.id) is None
                 and (n.id in self.mutation_next or n.kind in (INIT, INPUT))]
        paths = []
        for h in heads:
            p = [h]
            while p[-1] in self.mutation_next:
                p.append(self.mutation_next[p[-1]])
            paths.append(p)
        return paths

    def classify_paths(self):
        """Pairwise OneWay/Interdependent classification of mutation paths."""
        paths = self.mutation_paths()
        member_of = {}
        for i, p in enumerate(paths):
            for nid in p:
                member_of[nid] = i
        out = {}
        for i in range(len(paths)):
            for j in range(i + 1, len(paths)):
                fwd = bwd = False  # i->j and j->i cross dependencies
                for nid in paths[j]:
                    for src in self.reads.get(nid, ()):
                        if member_of.get(src) == i:
                            fwd = True
                for nid in paths[i]:
                    for src in self.reads.get(nid, ()):
                        if member_of.get(src) == j:
                            bwd = True
                out[(i, j)] = INTERDEPENDENT if (fwd and bwd) else ONE_WAY
        return out


def _add_node(g: MDD, kind: str, **kw) -> MddNode:
    n = MddNode(id=len(g.nodes), kind=kind, **kw)
    g.nodes.append(n)
    g.reads[n.id] = []
    g.dependents[n.id] = []
    return n


def _read(g: MDD, reader: int, src: int) -> None:
    g.reads[reader].append(src)
    g.dependents[src].append(reader)


def _mutate(g: MDD, prev: int, new: int) -> None:
    assert prev not in g.mutation_next, "mutation paths must be vertex-disjoint"
    g.mutation_next[prev] = new
    g.mutation_prev[new] = prev


def build_mdd(program: FlatProgram) -> MDD:
    """One linear pass over the flat statements (O(n))."""
    g = MDD(program=program)
    names: dict[int, str] = {}
    pos = 0
    for name, width in (program.input_layout or []):
        for k in range(width):
            slot = program.input_slots[pos]
            names[slot] = name if width == 1 else f"{name}[{k}]"
            pos += 1
    for slot in program.input_slots:
        n = _add_node(g, INPUT, slot=slot,
                      label=f"var {names.get(slot, slot)}")
        g.input_ids.append(n.id)
        g.current[slot] = n.id

    def current_of(slot: int) -> int:
        if slot not in g.current:
            # read of a never-written slot: an implicit zero init
            n = _add_node(g, INIT, slot=slot, label=f"init {slot}")
            g.current[slot] = n.id
        return g.current[slot]

    for idx, stmt in enumerate(program.statements):
        if isinstance(stmt, Compute):
            srcs = [current_of(w) for w in sorted(variables(stmt.expr))]
            if stmt.fresh:
                init = _add_node(g, INIT, slot=stmt.slot,
                                 stmt_index=idx, label=f"init {stmt.slot}")
                g.current[stmt.slot] = init.id
            prev = current_of(stmt.slot)
            op = _add_node(g, OP, slot=stmt.slot, stmt_index=idx, stmt=stmt,
                           label=repr(stmt.expr))
            _mutate(g, prev, op.id)
            for s in srcs:
                _read(g, op.id, s)
            g.current[stmt.slot] = op.id
        elif isinstance(stmt, InPlaceBlock):
            srcs = [current_of(w) for w in stmt.arg_slots]
            group = idx
            for t in stmt.target_slots:
                prev = current_of(t)
                op = _add_node(g, OP, slot=t, stmt_index=idx, stmt=stmt,
                               group=group, label=f"inplace {t}")
                _mutate(g, prev, op.id)
                for s in srcs:
                    _read(g, op.id, s)
                g.current[t] = op.id
        elif isinstance(stmt, CleanSlot):
            prev = current_of(stmt.slot)
            cl = _add_node(g, CLEAN, slot=stmt.slot, stmt_index=idx,
                           stmt=stmt, label=f"clean {stmt.slot}")
            _mutate(g, prev, cl.id)
            g.current[stmt.slot] = cl.id
        else:
            raise TypeError(f"unknown statement {stmt!r}")

    for slot in program.output_slots:
        holder = current_of(slot)
        out = _add_node(g, OUTPUT, slot=slot, label="Out")
        _mutate(g, holder, out.id)
        g.output_ids.append(out.id)
    return g


def evaluate_mdd(g: MDD, bits) -> list[int]:
    """Walk nodes in topological order, applying each emission unit once.

    Cross-checks graph construction against the statement interpreter.
    """
    program = g.program
    env = {s: b & 1 for s, b in zip(program.input_slots, bits)}
    from .frontend import _stmt_eval
    done: set[int] = set()
    for n in g.topo_order():
        if n.kind != OP or n.stmt_index in done:
            continue
        done.add(n.stmt_index)
        _stmt_eval(n.stmt, env)
    for n in g.topo_order():
        if n.kind == CLEAN and env.get(n.slot, 0) != 0:
            raise AssertionError(f"clean of non-zero slot {n.slot}")
    return [env.get(s, 0) for s in program.output_slots]


def to_dot(g: MDD) -> str:
    """GraphViz rendering: mutation edges bold, dependency edges dashed."""
    lines = ["digraph mdd {", "  rankdir=TB;"]
    for n in g.nodes:
        shape = {INPUT: "ellipse", INIT: "circle", OP: "box",
                 CLEAN: "diamond", OUTPUT: "doublecircle"}[n.kind]
        label = n.label or f"{n.kind} {n.slot}"
        lines.append(f'  n{n.id} [shape={shape} label="{n.id}: {label}"];')
    for src, dst in g.mutation_next.items():
        lines.append(f"  n{src} -> n{dst} [style=bold];")
    for reader, srcs in g.reads.items():
        for s in srcs:
            lines.append(f"  n{s} -> n{reader} [style=dashed];")
    lines.append("}")
    return "\n".join(lines) + "\n"
