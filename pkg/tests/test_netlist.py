import pytest
from hypothesis import given, settings

from redundis.library import braun_multiplier, full_adder, majority_voter
from redundis.netlist import (
    CycleError,
    Gate,
    GateKind,
    Netlist,
    NetlistError,
    NetlistSchemaError,
    export_structural_verilog,
    from_json,
    instantiate,
    normalize_two_input,
    to_json,
    topological_order,
    validate,
)
from redundis.simulator import truth_table

from .conftest import random_netlists

NOT1 = Netlist("inv", ("a",), ("y",), (Gate("g", GateKind.NOT, ("a",), "y"),))


def test_majority_voter_validates():
    assert validate(majority_voter(3)) == []


def test_multiple_drivers_reported():
    n = Netlist("bad", ("a", "b"), ("y",), (
        Gate("g1", GateKind.AND, ("a", "b"), "y"),
        Gate("g2", GateKind.OR, ("a", "b"), "y"),
    ))
    issues = validate(n)
    assert [i.kind for i in issues] == ["multiple drivers"]
    assert issues[0].subject == "y"


def test_cycle_reported_with_members():
    n = Netlist("loop", ("a",), ("y",), (
        Gate("g1", GateKind.AND, ("a", "z"), "y"),
        Gate("g2", GateKind.BUF, ("y",), "z"),
    ))
    issues = validate(n)
    assert [i.kind for i in issues] == ["cycle"]
    assert {"g1", "g2"} <= set(issues[0].detail.split(" -> "))
    with pytest.raises(CycleError) as e:
        topological_order(n)
    assert set(e.value.cycle) & {"g1", "g2"}


def test_other_violations():
    n = Netlist("bad", ("a",), ("y", "q"), (
        Gate("g1", GateKind.NOT, ("a", "a"), "y"),
        Gate("g1", GateKind.AND, ("a", "ghost"), "x"),
    ))
    kinds = sorted(i.kind for i in validate(n))
    assert kinds == ["bad fan-in", "duplicate gate id", "undriven net", "undriven output"]


def test_topological_order_small_cases():
    one = Netlist("and", ("a", "b"), ("y",), (Gate("g", GateKind.AND, ("a", "b"), "y"),))
    assert topological_order(one) == ["g"]
    assert topological_order(Netlist("wires", ("a",), ("a",))) == []


def test_topological_order_majority():
    m = majority_voter(3, "sop")
    order = topological_order(m)
    or_gate = next(g.id for g in m.gates if g.kind is GateKind.OR)
    ands = [g.id for g in m.gates if g.kind is GateKind.AND]
    assert len(order) == 4
    assert all(order.index(a) < order.index(or_gate) for a in ands)


@settings(max_examples=150, deadline=None)
@given(random_netlists())
def test_topological_order_is_linear_extension(n):
    order = topological_order(n)
    assert sorted(order) == sorted(g.id for g in n.gates)
    pos = {gid: k for k, gid in enumerate(order)}
    drv = n.driver
    for g in n.gates:
        for i in g.ins:
            if i in drv:
                assert pos[drv[i].id] < pos[g.id]


def test_instantiate_not_into_empty_parent():
    parent = Netlist("top", (), ())
    r = instantiate(parent, NOT1, {"a": "x", "y": "x_n"}, "u0_")
    assert len(r.gates) == 1
    assert validate(r) == []
    assert r.inputs == ("x",)


def test_instantiate_full_adder_twice():
    fa = full_adder()
    top = Netlist("top", ("a", "b", "c"), ())
    top = instantiate(top, fa, {"a": "a", "b": "b", "cin": "c", "sum": "s0", "carry": "c0"}, "fa0")
    top = instantiate(top, fa, {"a": "a", "b": "b", "cin": "c0", "sum": "s1", "carry": "c1"}, "fa1")
    assert len(top.gates) == 2 * len(fa.gates)
    assert validate(top) == []


def test_instantiate_errors():
    parent = Netlist("top", ("a",), ("y",), (Gate("g", GateKind.BUF, ("a",), "y"),))
    with pytest.raises(NetlistError, match="double driver"):
        instantiate(parent, NOT1, {"a": "a", "y": "y"}, "u_")
    with pytest.raises(NetlistError, match="unbound"):
        instantiate(parent, NOT1, {"a": "a"}, "u_")
    # prefix "" reuses the child gate id "g", which the parent already has
    with pytest.raises(NetlistError, match="collision"):
        instantiate(parent, NOT1, {"a": "a", "y": "z"}, "")


def test_json_round_trip_majority():
    m = majority_voter(3)
    back = from_json(to_json(m))
    assert back == m
    assert back.inputs == m.inputs and back.outputs == m.outputs
    assert [(g.id, g.kind, g.ins, g.out) for g in back.gates] == [(g.id, g.kind, g.ins, g.out) for g in m.gates]


def test_json_round_trip_braun_truth_table(braun4):
    back = from_json(to_json(braun4))
    assert back == braun4
    assert truth_table(back) == truth_table(braun4)


def test_json_key_order_stable():
    text = to_json(NOT1)
    assert text.index('"name"') < text.index('"inputs"') < text.index('"outputs"') < text.index('"gates"')
    assert text.index('"id"') < text.index('"kind"') < text.index('"ins"') < text.index('"out"')


def test_json_schema_errors():
    with pytest.raises(NetlistSchemaError, match="outputs"):
        from_json('{"name": "x", "inputs": [], "gates": []}')
    with pytest.raises(NetlistSchemaError) as e:
        from_json('{"name": "x", "inputs": [], "outputs": [], "gates": [{"id": "g", "kind": "MUX", "ins": ["a"], "out": "y"}]}')
    assert e.value.path == "gates/0/kind"
    with pytest.raises(NetlistSchemaError):
        from_json("not json")


def test_verilog_single_and():
    n = Netlist("t", ("a", "b"), ("y",), (Gate("g", GateKind.AND, ("a", "b"), "y"),))
    text = export_structural_verilog(n).text
    assert text.count("\n  and ") == 1
    assert text.startswith("module t (a, b, y);")


def test_verilog_majority_counts_and_determinism():
    text = export_structural_verilog(majority_voter(3, "sop")).text
    assert text.count("\n  and ") == 3
    assert text.count("\n  or ") == 1
    assert export_structural_verilog(braun_multiplier(4)).text == export_structural_verilog(braun_multiplier(4)).text


def test_verilog_sanitizes_identifiers():
    n = Netlist("my-mod", ("a[0]", "wire"), ("y.out",), (Gate("1g", GateKind.OR, ("a[0]", "wire"), "y.out"),))
    exp = export_structural_verilog(n)
    originals = {o for o, _ in exp.renamed}
    assert {"my-mod", "a[0]", "wire", "y.out", "1g"} <= originals
    assert "a[0]" not in exp.text


def test_verilog_passthrough_output():
    n = Netlist("w", ("a",), ("a",))
    text = export_structural_verilog(n).text
    assert "buf" in text


@settings(max_examples=100, deadline=None)
@given(random_netlists(max_inputs=4))
def test_two_input_normalization_preserves_function(n):
    norm = normalize_two_input(n)
    assert validate(norm) == []
    assert all(len(g.ins) <= 2 for g in norm.gates)
    assert truth_table(norm) == truth_table(n)
