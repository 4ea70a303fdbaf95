import random
from importlib import resources

import pytest

from revc.frontend import flatten, parse
from revc.mdd import build_mdd
from revc.scheduler import (
    BENNETT_CLEANED, CLEANED_EAGERLY, UNCLEAN, Action, BudgetError,
    bennett_cleanup, eager_cleanup, incremental_cleanup, invert, mirror,
    schedule,
)


def corpus(name: str) -> str:
    return (resources.files("revc") / "corpus" / name).read_text()


def prog_of(src: str, params=None):
    return flatten(parse(src, params=params))


def ripple(n: int):
    return prog_of(corpus("adder_ripple.rev"), {"n": n})


MUTATED_INPUT_SRC = """
let f (a : bool) (bin : bool) =
    let mutable b = bin
    let c = a && b
    b <- b <> c
    b

f
"""


def chain_program(k: int):
    lines = ["let chain (x : bool[2]) ="]
    prev = ("x.[0]", "x.[1]")
    for i in range(k):
        lines.append(f"    let t{i} = {prev[0]} && {prev[1]}")
        prev = (f"t{i}", prev[0])
    lines += [f"    {prev[0]}", "", "chain"]
    return prog_of("\n".join(lines))


def test_invert_is_involutive():
    a = Action("fwd", stmt="s")
    assert invert(a).kind == "bwd"
    assert invert(invert(a)).kind == "fwd"
    c = Action("copy", slots=(1, 2), tag="output")
    assert invert(c).kind == "uncopy"
    assert invert(c).ref is c


def test_bennett_shape():
    prog = ripple(6)
    plan = bennett_cleanup(build_mdd(prog))
    acts = plan.actions
    n = len(prog.statements)
    assert len(acts) == 2 * n + 1
    assert [a.kind for a in acts[:n]] == ["fwd"] * n
    assert acts[n].kind == "copy" and acts[n].tag == "output"
    assert [a.kind for a in acts[n + 1:]] == ["bwd"] * n
    # exact mirror: same statements in reverse order
    for f, b in zip(acts[:n], reversed(acts[n + 1:])):
        assert f.stmt is b.stmt
    assert set(plan.dispositions.values()) == {BENNETT_CLEANED}


def test_eager_cleans_ripple_without_copy():
    plan = eager_cleanup(build_mdd(ripple(8)))
    assert not plan.unclean_nodes
    assert not plan.copied_outputs
    # every carry reversal is present: bwd count equals garbage count
    bwd = sum(1 for a in plan.actions if a.kind == "bwd")
    assert bwd == 7  # n-1 garbage carries
    assert set(plan.dispositions.values()) == {CLEANED_EAGERLY}


def test_eager_marks_mutated_input_dependency_unclean():
    plan = eager_cleanup(build_mdd(prog_of(MUTATED_INPUT_SRC)))
    assert len(plan.unclean_nodes) == 1
    assert plan.copied_outputs
    # copy & reverse: the residue is swept by a full mirror
    kinds = [a.kind for a in plan.actions]
    assert kinds.count("copy") == 1


def test_eager_single_path_equals_bennett_on_that_path():
    # a lone AND feeding the output has nothing to clean early
    plan = eager_cleanup(build_mdd(prog_of("let f (a : bool) (b : bool) = a && b\n\nf")))
    assert [a.kind for a in plan.actions] == ["fwd"]
    assert not plan.unclean_nodes


def test_incremental_without_budget_equals_bennett():
    g = build_mdd(ripple(6))
    inc = incremental_cleanup(g)
    ben = bennett_cleanup(g)
    assert [a.kind for a in inc.actions] == [a.kind for a in ben.actions]
    assert [a.stmt for a in inc.actions] == [a.stmt for a in ben.actions]
    assert inc.checkpoints == 0


def test_incremental_tight_budget_inserts_reverse_segment():
    plan = incremental_cleanup(build_mdd(chain_program(24)), qubit_budget=12)
    assert plan.checkpoints >= 1
    kinds = [a.kind for a in plan.actions]
    assert "remap" in kinds and "unremap" in kinds
    # a reverse segment appears before the final output copy
    out_pos = next(i for i, a in enumerate(plan.actions)
                   if a.kind == "copy" and a.tag == "output")
    assert "bwd" in kinds[:out_pos]


def test_incremental_infeasible_reports_minimum():
    g = build_mdd(chain_program(24))
    with pytest.raises(BudgetError) as exc:
        incremental_cleanup(g, qubit_budget=4)
    minimum = exc.value.minimum
    assert minimum is not None
    plan = incremental_cleanup(g, qubit_budget=minimum)
    assert plan.checkpoints >= 1
    with pytest.raises(BudgetError):
        incremental_cleanup(g, qubit_budget=minimum - 1)


def test_schedule_rejects_unknown_strategy():
    with pytest.raises(ValueError):
        schedule(ripple(4), "magic")


def test_mirror_round_trip():
    acts = [Action("fwd", stmt=i) for i in range(5)]
    back = mirror(mirror(acts))
    assert [a.kind for a in back] == ["fwd"] * 5
    assert [a.stmt for a in back] == [a.stmt for a in acts]
