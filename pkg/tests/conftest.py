import pytest
from hypothesis import strategies as st

from redundis.library import braun_multiplier
from redundis.netlist import Gate, GateKind, Netlist

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def braun4():
    return braun_multiplier(4)


def reference_eval(netlist: Netlist, bits: dict[str, int], overlay=None) -> dict[str, int]:
    """Slow recursive evaluator, independent of the packed simulator."""
    overlay = overlay or {}
    drv = {g.out: g for g in netlist.gates}
    memo: dict[str, int] = {}

    def fn(kind, xs):
        if kind == "AND":
            return int(all(xs))
        if kind == "OR":
            return int(any(xs))
        if kind == "XOR":
            return sum(xs) % 2
        if kind == "NAND":
            return 1 - int(all(xs))
        if kind == "NOR":
            return 1 - int(any(xs))
        if kind == "XNOR":
            return 1 - sum(xs) % 2
        if kind == "NOT":
            return 1 - xs[0]
        return xs[0]

    def val(n):
        if n in memo:
            return memo[n]
        if n in bits:
            v = bits[n]
        else:
            g = drv[n]
            v = fn(g.kind.value, [val(i) for i in g.ins])
        f = overlay.get(n)
        if f is not None:
            v = {"stuck0": 0, "stuck1": 1, "invert": 1 - v}[getattr(f, "value", f)]
        memo[n] = v
        return v

    return {o: val(o) for o in netlist.outputs}


@st.composite
def random_netlists(draw, max_inputs=5, max_gates=14):
    """Random valid acyclic netlists; gates only read earlier nets."""
    n_in = draw(st.integers(1, max_inputs))
    inputs = [f"i{k}" for k in range(n_in)]
    nets = list(inputs)
    gates = []
    for k in range(draw(st.integers(0, max_gates))):
        kind = draw(st.sampled_from(list(GateKind)))
        fanin = 1 if kind.unary else draw(st.integers(2, 4))
        ins = tuple(draw(st.sampled_from(nets)) for _ in range(fanin))
        out = f"w{k}"
        gates.append(Gate(f"g{k}", kind, ins, out))
        nets.append(out)
    outs = draw(st.lists(st.sampled_from(nets), min_size=1, max_size=4, unique=True))
    # shuffle gate order so nothing relies on construction order
    perm = draw(st.permutations(gates))
    return Netlist("rand", tuple(inputs), tuple(outs), tuple(perm))
