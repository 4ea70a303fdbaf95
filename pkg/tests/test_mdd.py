import random
import time
from importlib import resources

from revc.frontend import flatten, interpret, parse
from revc.mdd import (
    CLEAN, INIT, INPUT, INTERDEPENDENT, ONE_WAY, OP, OUTPUT, build_mdd,
    evaluate_mdd, to_dot,
)


def corpus(name: str) -> str:
    return (resources.files("revc") / "corpus" / name).read_text()


def prog_of(src: str, params=None):
    return flatten(parse(src, params=params))


AND_SRC = """
let f (a : bool) (b : bool) = a && b

f
"""

# a garbage value computed from an input that is itself later mutated
MUTATED_INPUT_SRC = """
let f (a : bool) (bin : bool) =
    let mutable b = bin
    let c = a && b
    b <- b <> c
    b

f
"""


def test_single_and_graph_shape():
    g = build_mdd(prog_of(AND_SRC))
    kinds = [n.kind for n in g.nodes]
    # two inputs, one init+op for the fresh AND, one output designation
    assert kinds.count(INPUT) == 2
    assert kinds.count(INIT) == 1
    assert kinds.count(OP) == 1
    assert kinds.count(OUTPUT) == 1
    op = next(n for n in g.nodes if n.kind == OP)
    assert sorted(g.reads[op.id]) == g.input_ids
    # mutation: init -> op -> output
    init = next(n for n in g.nodes if n.kind == INIT)
    assert g.mutation_next[init.id] == op.id
    assert g.node(g.mutation_next[op.id]).kind == OUTPUT


def test_mutated_input_has_mutation_edge_and_is_interdependent():
    g = build_mdd(prog_of(MUTATED_INPUT_SRC))
    b_input = g.node(g.input_ids[1])
    assert b_input.id in g.mutation_next, "mutated input must start a path"
    cls = g.classify_paths()
    assert INTERDEPENDENT in cls.values()


def test_one_way_classification():
    g = build_mdd(prog_of(AND_SRC))
    assert set(g.classify_paths().values()) <= {ONE_WAY}


def test_modification_path_and_inputs():
    g = build_mdd(prog_of(MUTATED_INPUT_SRC))
    c_op = next(n for n in g.nodes if n.kind == OP and n.id not in
                {g.mutation_next.get(i) for i in g.input_ids})
    path = g.modification_path(c_op.id)
    assert path[-1] == c_op.id
    assert g.node(path[0]).kind == INIT
    ins = g.input_nodes(path)
    assert set(ins) == set(g.input_ids)


def test_last_dependent_node():
    g = build_mdd(prog_of(MUTATED_INPUT_SRC))
    a_in = g.input_ids[0]
    assert g.last_dependent_node(a_in) > a_in
    out = g.output_ids[0]
    assert g.last_dependent_node(out) == out


def test_mutation_paths_are_vertex_disjoint():
    for name, params in [("adder_ripple.rev", {"n": 6}), ("sha2.rev", None)]:
        g = build_mdd(prog_of(corpus(name), params))
        seen = set()
        for p in g.mutation_paths():
            assert not (set(p) & seen)
            seen |= set(p)


def test_evaluate_mdd_matches_interpreter():
    rng = random.Random(11)
    for name, params in [("adder_ripple.rev", {"n": 8}),
                         ("adder_select.rev", {"n": 10}),
                         ("sha2.rev", {"rounds": 1})]:
        prog = prog_of(corpus(name), params)
        g = build_mdd(prog)
        n = len(prog.input_slots)
        for _ in range(20):
            bits = [rng.randrange(2) for _ in range(n)]
            assert evaluate_mdd(g, bits) == interpret(prog, bits)


def test_dot_output():
    g = build_mdd(prog_of(AND_SRC))
    dot = to_dot(g)
    assert dot.startswith("digraph")
    assert "style=bold" in dot and "style=dashed" in dot


def test_build_scales_linearly_enough():
    # ~4x the statements should take well under ~10x the time; this is a
    # coarse smoke check that the build is a single pass
    small = prog_of(corpus("sha2.rev"), {"rounds": 1})
    big = prog_of(corpus("sha2.rev"), {"rounds": 4})
    t0 = time.perf_counter()
    for _ in range(3):
        build_mdd(small)
    t_small = time.perf_counter() - t0
    t0 = time.perf_counter()
    for _ in range(3):
        build_mdd(big)
    t_big = time.perf_counter() - t0
    assert t_big < max(t_small, 1e-3) * 40


def test_clean_nodes_recorded():
    src = """
let f (a : bool) (b : bool) =
    let mutable t = a && b
    t <- t <> (a && b)
    clean t
    a <> true

f
"""
    g = build_mdd(prog_of(src))
    assert any(n.kind == CLEAN for n in g.nodes)
