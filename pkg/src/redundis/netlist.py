"""Flat combinational gate-level netlists.

A :class:`Netlist` is an immutable bag of gates over string-named nets. Every
net is driven either by a primary input or by exactly one gate output.
Hierarchy only exists while building: :func:`instantiate` copies a child
netlist into a parent under a name prefix and returns a new flat netlist.
"""

from __future__ import annotations

import enum
import json
import re
from collections import defaultdict, deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

import jsonschema


class NetlistError(ValueError):
    """Raised for structurally invalid netlists or bad composition requests."""


class CycleError(NetlistError):
    def __init__(self, cycle: list[str]):
        self.cycle = cycle
        super().__init__(f"combinational cycle through gate(s): {' -> '.join(cycle)}")


class NetlistSchemaError(NetlistError):
    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


class GateKind(str, enum.Enum):
    AND = "AND"
    OR = "OR"
    NAND = "NAND"
    NOR = "NOR"
    XOR = "XOR"
    XNOR = "XNOR"
    NOT = "NOT"
    BUF = "BUF"

    @property
    def unary(self) -> bool:
        return self in (GateKind.NOT, GateKind.BUF)

    def accepts(self, fanin: int) -> bool:
        return fanin == 1 if self.unary else fanin >= 2


@dataclass(frozen=True)
class Gate:
    id: str
    kind: GateKind
    ins: tuple[str, ...]
    out: str

    def __post_init__(self):
        object.__setattr__(self, "kind", GateKind(self.kind))
        object.__setattr__(self, "ins", tuple(self.ins))


@dataclass(frozen=True)
class Issue:
    kind: str
    subject: str
    detail: str = ""

    def __str__(self):
        return f"{self.kind}: {self.subject}" + (f" ({self.detail})" if self.detail else "")


@dataclass(frozen=True)
class Netlist:
    name: str
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    gates: tuple[Gate, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        object.__setattr__(self, "gates", tuple(self.gates))

    @cached_property
    def driver(self) -> dict[str, Gate]:
        """Map from net to the gate driving it (last writer wins on conflicts)."""
        return {g.out: g for g in self.gates}

    @cached_property
    def gate_by_id(self) -> dict[str, Gate]:
        return {g.id: g for g in self.gates}

    @cached_property
    def nets(self) -> frozenset[str]:
        """Every driven net."""
        return frozenset(self.inputs) | frozenset(g.out for g in self.gates)

    @cached_property
    def fanout(self) -> dict[str, list[Gate]]:
        fo: dict[str, list[Gate]] = defaultdict(list)
        for g in self.gates:
            for n in g.ins:
                fo[n].append(g)
        return dict(fo)

    def __len__(self):
        return len(self.gates)


def validate(netlist: Netlist) -> list[Issue]:
    """Return every invariant violation found in ``netlist``; empty means valid."""
    issues: list[Issue] = []

    drivers: dict[str, list[str]] = defaultdict(list)
    for n in netlist.inputs:
        drivers[n].append(f"input:{n}")
    seen_ids: set[str] = set()
    for g in netlist.gates:
        if g.id in seen_ids:
            issues.append(Issue("duplicate gate id", g.id))
        seen_ids.add(g.id)
        if not g.kind.accepts(len(g.ins)):
            issues.append(Issue("bad fan-in", g.id, f"{g.kind.value} with {len(g.ins)} input(s)"))
        drivers[g.out].append(g.id)
    for net, ds in drivers.items():
        if len(ds) > 1:
            issues.append(Issue("multiple drivers", net, ", ".join(ds)))

    for g in netlist.gates:
        for n in g.ins:
            if n not in drivers:
                issues.append(Issue("undriven net", n, f"read by {g.id}"))
    for n in netlist.outputs:
        if n not in drivers:
            issues.append(Issue("undriven output", n))

    cycle = _find_cycle(netlist)
    if cycle:
        issues.append(Issue("cycle", cycle[0], " -> ".join(cycle)))
    return issues


def _find_cycle(netlist: Netlist) -> list[str] | None:
    # iterative DFS over gates; edges go driver gate -> reading gate
    drv = netlist.driver
    WHITE, GREY, BLACK = 0, 1, 2
    color = {g.id: WHITE for g in netlist.gates}
    for root in netlist.gates:
        if color[root.id] != WHITE:
            continue
        stack = [(root, iter(root.ins))]
        path = [root.id]
        color[root.id] = GREY
        while stack:
            g, it = stack[-1]
            for n in it:
                d = drv.get(n)
                if d is None:
                    continue
                if color[d.id] == GREY:
                    return path[path.index(d.id):] + [d.id]
                if color[d.id] == WHITE:
                    color[d.id] = GREY
                    stack.append((d, iter(d.ins)))
                    path.append(d.id)
                    break
            else:
                color[g.id] = BLACK
                stack.pop()
                path.pop()
    return None


def topological_order(netlist: Netlist) -> list[str]:
    """Gate ids ordered so every gate follows the gates that drive its inputs."""
    drv = netlist.driver
    indeg = {g.id: 0 for g in netlist.gates}
    for g in netlist.gates:
        indeg[g.id] = sum(1 for n in g.ins if n in drv)
    ready = deque(g.id for g in netlist.gates if indeg[g.id] == 0)
    order: list[str] = []
    fo = netlist.fanout
    by_id = netlist.gate_by_id
    while ready:
        gid = ready.popleft()
        order.append(gid)
        for reader in fo.get(by_id[gid].out, ()):
            # fanout holds one entry per input pin, matching the indegree count
            indeg[reader.id] -= 1
            if indeg[reader.id] == 0:
                ready.append(reader.id)
    if len(order) != len(netlist.gates):
        raise CycleError(_find_cycle(netlist) or [next(i for i, d in indeg.items() if d > 0)])
    return order


PortBinding = Mapping[str, str]


def instantiate(parent: Netlist, child: Netlist, binding: PortBinding, prefix: str) -> Netlist:
    """Flatten ``child`` into ``parent``.

    ``binding`` maps each child port (input or output net name) to a parent
    net. Child inputs bound to nets the parent does not have yet become new
    primary inputs of the result. Child-internal nets and gate ids get
    ``prefix`` prepended.
    """
    ports = list(dict.fromkeys(child.inputs + child.outputs))
    missing = [p for p in ports if p not in binding]
    if missing:
        raise NetlistError(f"unbound port(s) of {child.name}: {', '.join(missing)}")
    extra = [p for p in binding if p not in ports]
    if extra:
        raise NetlistError(f"{child.name} has no port(s) {', '.join(extra)}")
    through = set(child.inputs) & set(child.outputs)
    if through:
        raise NetlistError(f"{child.name} passes input(s) straight to outputs: {', '.join(sorted(through))}")
    out_targets = [binding[p] for p in dict.fromkeys(child.outputs)]
    if len(set(out_targets)) != len(out_targets):
        raise NetlistError(f"output ports of {child.name} bound to the same parent net")

    parent_nets = set(parent.inputs) | {g.out for g in parent.gates}
    for p in dict.fromkeys(child.outputs):
        if binding[p] in parent_nets:
            raise NetlistError(f"double driver: {binding[p]} already driven in {parent.name}")

    # child output nets that the child does not drive itself need a buffer
    child_driven = {g.out for g in child.gates}
    rename: dict[str, str] = {n: binding[n] for n in child.inputs}
    buffers: list[Gate] = []
    for p in dict.fromkeys(child.outputs):
        if p in child_driven and p not in rename:
            rename[p] = binding[p]
        else:
            src = rename.get(p, prefix + p)
            buffers.append(Gate(f"{prefix}buf_{p}", GateKind.BUF, (src,), binding[p]))

    def net(n: str) -> str:
        return rename.get(n, prefix + n)

    taken = parent_nets | {n for g in parent.gates for n in g.ins} | {g.id for g in parent.gates}
    new_gates = [Gate(prefix + g.id, g.kind, tuple(net(n) for n in g.ins), net(g.out)) for g in child.gates]
    new_gates += buffers
    for g in new_gates:
        if g.id in taken:
            raise NetlistError(f"name collision: gate id {g.id} already used in {parent.name}")
        if g.out not in out_targets and g.out in taken:
            raise NetlistError(f"name collision: net {g.out} already used in {parent.name}")

    new_inputs = list(parent.inputs)
    known = parent_nets | set(out_targets)
    for p in child.inputs:
        t = binding[p]
        if t not in known and t not in new_inputs:
            new_inputs.append(t)
    return Netlist(parent.name, tuple(new_inputs), parent.outputs, parent.gates + tuple(new_gates))


def normalize_two_input(netlist: Netlist) -> Netlist:
    """Rewrite every gate with fan-in above 2 as a balanced tree of 2-input gates.

    The root keeps the original gate id and output net, so port names and
    fault-injection targets survive normalization.
    """
    inner = {
        GateKind.AND: GateKind.AND,
        GateKind.OR: GateKind.OR,
        GateKind.NAND: GateKind.AND,
        GateKind.NOR: GateKind.OR,
        GateKind.XOR: GateKind.XOR,
        GateKind.XNOR: GateKind.XOR,
    }
    gates: list[Gate] = []
    for g in netlist.gates:
        if len(g.ins) <= 2:
            gates.append(g)
            continue
        counter = 0
        level = list(g.ins)
        # reduce to two operands, then the root applies the original kind
        while len(level) > 2:
            nxt = []
            for i in range(0, len(level) - 1, 2):
                nid = f"{g.id}__t{counter}"
                counter += 1
                gates.append(Gate(nid, inner[g.kind], (level[i], level[i + 1]), nid))
                nxt.append(nid)
            if len(level) % 2:
                nxt.append(level[-1])
            level = nxt
        gates.append(Gate(g.id, g.kind, tuple(level), g.out))
    return Netlist(netlist.name, netlist.inputs, netlist.outputs, tuple(gates))


# --- JSON ------------------------------------------------------------------

NETLIST_SCHEMA = {
    "type": "object",
    "required": ["name", "inputs", "outputs", "gates"],
    "properties": {
        "name": {"type": "string"},
        "inputs": {"type": "array", "items": {"type": "string"}},
        "outputs": {"type": "array", "items": {"type": "string"}},
        "gates": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "kind", "ins", "out"],
                "properties": {
                    "id": {"type": "string"},
                    "kind": {"enum": [k.value for k in GateKind]},
                    "ins": {"type": "array", "items": {"type": "string"}, "minItems": 1},
                    "out": {"type": "string"},
                },
                "additionalProperties": False,
            },
        },
    },
}


def to_dict(netlist: Netlist) -> dict:
    return {
        "name": netlist.name,
        "inputs": list(netlist.inputs),
        "outputs": list(netlist.outputs),
        "gates": [{"id": g.id, "kind": g.kind.value, "ins": list(g.ins), "out": g.out} for g in netlist.gates],
    }


def from_dict(data) -> Netlist:
    try:
        jsonschema.validate(data, NETLIST_SCHEMA)
    except jsonschema.ValidationError as e:
        path = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise NetlistSchemaError(path, e.message) from None
    gates = tuple(Gate(g["id"], GateKind(g["kind"]), tuple(g["ins"]), g["out"]) for g in data["gates"])
    return Netlist(data["name"], tuple(data["inputs"]), tuple(data["outputs"]), gates)


def to_json(netlist: Netlist, indent: int | None = 1) -> str:
    return json.dumps(to_dict(netlist), indent=indent)


def from_json(text: str) -> Netlist:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise NetlistSchemaError("<root>", f"not JSON: {e}") from None
    return from_dict(data)


# --- Verilog ---------------------------------------------------------------

_VERILOG_ID = re.compile(r"^[A-Za-z_][A-Za-z0-9_$]*$")
_VERILOG_KEYWORDS = frozenset(
    "module endmodule input output inout wire reg assign and or nand nor xor xnor not buf "
    "begin end always initial if else case endcase for while function task integer".split()
)


@dataclass
class VerilogExport:
    text: str
    renamed: list[tuple[str, str]] = field(default_factory=list)

    def __str__(self):
        return self.text


def export_structural_verilog(netlist: Netlist) -> VerilogExport:
    """Emit one Verilog module using gate primitives.

    Identifiers Verilog cannot express are sanitized; each substitution is
    listed in ``renamed`` as ``(original, sanitized)``.
    """
    used: set[str] = set()
    mapping: dict[str, str] = {}
    renamed: list[tuple[str, str]] = []

    def ident(name: str) -> str:
        if name in mapping:
            return mapping[name]
        cand = name
        if not _VERILOG_ID.match(cand) or cand in _VERILOG_KEYWORDS:
            cand = re.sub(r"[^A-Za-z0-9_$]", "_", cand)
            if not re.match(r"[A-Za-z_]", cand) or cand in _VERILOG_KEYWORDS:
                cand = "n_" + cand
        base, k = cand, 1
        while cand in used:
            cand = f"{base}_{k}"
            k += 1
        used.add(cand)
        mapping[name] = cand
        if cand != name:
            renamed.append((name, cand))
        return cand

    mod = ident(netlist.name)
    ins = [ident(n) for n in netlist.inputs]
    input_set = set(netlist.inputs)

    # outputs read straight off an input (or listed twice) need their own port
    outs: list[str] = []
    aliases: list[tuple[str, str]] = []
    seen_out: set[str] = set()
    for n in netlist.outputs:
        if n in input_set or n in seen_out:
            port = ident(f"{n}__o{len(aliases)}")
            aliases.append((port, mapping[n] if n in mapping else ident(n)))
            outs.append(port)
        else:
            outs.append(ident(n))
            seen_out.add(n)

    lines = [f"module {mod} ({', '.join(ins + outs)});"]
    lines += [f"  input {n};" for n in ins]
    lines += [f"  output {n};" for n in outs]
    port_nets = set(netlist.inputs) | set(netlist.outputs)
    wires = [g.out for g in netlist.gates if g.out not in port_nets]
    lines += [f"  wire {ident(n)};" for n in wires]
    for g in netlist.gates:
        args = ", ".join([ident(g.out)] + [ident(n) for n in g.ins])
        lines.append(f"  {g.kind.value.lower()} {ident(g.id)} ({args});")
    for port, src in aliases:
        lines.append(f"  buf {port}_buf ({port}, {src});")
    lines.append("endmodule")
    return VerilogExport("\n".join(lines) + "\n", renamed)


class NetlistBuilder:
    """Incremental gate-by-gate construction with automatic net naming."""

    def __init__(self, name: str, inputs: Iterable[str]):
        self.name = name
        self.inputs = list(inputs)
        self.gates: list[Gate] = []
        self._n = 0

    def gate(self, kind: GateKind | str, ins: Iterable[str], out: str | None = None, gid: str | None = None) -> str:
        kind = GateKind(kind)
        self._n += 1
        out = out or f"n{self._n}"
        self.gates.append(Gate(gid or f"g{self._n}_{kind.value.lower()}", kind, tuple(ins), out))
        return out

    def build(self, outputs: Mapping[str, str]) -> Netlist:
        """Finish with ``outputs`` mapping port name to the net that carries it.

        Gate-driven nets are renamed to their port name; nets that are
        primary inputs or already claimed by another port get a buffer.
        """
        rename: dict[str, str] = {}
        extra: list[Gate] = []
        driven = {g.out for g in self.gates}
        for port, net in outputs.items():
            if port == net:
                continue
            if net in driven and net not in rename and net not in self.inputs:
                rename[net] = port
            else:
                extra.append(Gate(f"buf_{port}", GateKind.BUF, (rename.get(net, net),), port))
        gates = [
            Gate(g.id, g.kind, tuple(rename.get(n, n) for n in g.ins), rename.get(g.out, g.out))
            for g in self.gates
        ]
        return Netlist(self.name, tuple(self.inputs), tuple(outputs), tuple(gates + extra))
