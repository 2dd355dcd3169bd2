"""Two-valued combinational simulation with net-level fault overlays.

Simulation is bit-parallel: every net carries a Python int whose bit ``r``
is the net's value on input row ``r``. Row ordering follows the netlist's
input list with the first input as the most significant bit, so row ``r``
of a truth table is the binary expansion of ``r``.
"""

from __future__ import annotations

import enum
from functools import reduce
from operator import and_, or_, xor
from typing import Mapping, Sequence

from .netlist import GateKind, Netlist, topological_order

MAX_ENUM_INPUTS = 20


class Fault(str, enum.Enum):
    STUCK0 = "stuck0"
    STUCK1 = "stuck1"
    INVERT = "invert"


FaultOverlay = Mapping[str, Fault]


class SimulationError(ValueError):
    pass


def _program(netlist: Netlist) -> list[tuple[GateKind, str, tuple[str, ...]]]:
    prog = netlist.__dict__.get("_sim_program")
    if prog is None:
        by_id = netlist.gate_by_id
        prog = [(g.kind, g.out, g.ins) for g in (by_id[i] for i in topological_order(netlist))]
        netlist.__dict__["_sim_program"] = prog
    return prog


def _check_overlay(netlist: Netlist, overlay: FaultOverlay | None) -> dict[str, Fault]:
    if not overlay:
        return {}
    bad = [n for n in overlay if n not in netlist.nets]
    if bad:
        raise SimulationError(f"overlay names unknown net(s): {', '.join(sorted(bad))}")
    return {n: Fault(f) for n, f in overlay.items()}


def _apply(fault: Fault, value: int, mask: int) -> int:
    if fault is Fault.STUCK0:
        return 0
    if fault is Fault.STUCK1:
        return mask
    return value ^ mask


def simulate_words(
    netlist: Netlist,
    words: Mapping[str, int],
    mask: int,
    overlay: FaultOverlay | None = None,
) -> dict[str, int]:
    """Propagate packed input words; returns the packed value of every net.

    ``mask`` has one set bit per simulated row. Overlay faults take effect
    right after the net's driver (gate or primary input) produces its value.
    """
    ov = _check_overlay(netlist, overlay)
    vals: dict[str, int] = {}
    for n in netlist.inputs:
        if n not in words:
            raise SimulationError(f"stimulus is missing input {n!r}")
        v = words[n] & mask
        vals[n] = _apply(ov[n], v, mask) if n in ov else v
    for kind, out, ins in _program(netlist):
        a = [vals[i] for i in ins]
        if kind is GateKind.AND:
            v = reduce(and_, a)
        elif kind is GateKind.OR:
            v = reduce(or_, a)
        elif kind is GateKind.XOR:
            v = reduce(xor, a)
        elif kind is GateKind.NAND:
            v = reduce(and_, a) ^ mask
        elif kind is GateKind.NOR:
            v = reduce(or_, a) ^ mask
        elif kind is GateKind.XNOR:
            v = reduce(xor, a) ^ mask
        elif kind is GateKind.NOT:
            v = a[0] ^ mask
        else:
            v = a[0]
        if out in ov:
            v = _apply(ov[out], v, mask)
        vals[out] = v
    return vals


def exhaustive_words(n_inputs: int) -> tuple[list[int], int]:
    """Packed words enumerating all ``2**n_inputs`` rows, MSB-first."""
    rows = 1 << n_inputs
    mask = (1 << rows) - 1
    words = []
    for i in range(n_inputs):
        half = 1 << (n_inputs - 1 - i)
        w = ((1 << half) - 1) << half
        period = 2 * half
        while period < rows:
            w |= w << period
            period *= 2
        words.append(w)
    return words, mask


def _guard(netlist: Netlist, limit: int = MAX_ENUM_INPUTS):
    if len(netlist.inputs) > limit:
        raise SimulationError(
            f"{netlist.name} has {len(netlist.inputs)} inputs; exhaustive enumeration is "
            f"limited to {limit}. Use sampled evaluation (evaluate on chosen vectors) instead."
        )


def exhaustive_outputs(netlist: Netlist, overlay: FaultOverlay | None = None) -> tuple[list[int], int]:
    """Packed output words over every input row, in ``netlist.outputs`` order."""
    _guard(netlist)
    words, mask = exhaustive_words(len(netlist.inputs))
    vals = simulate_words(netlist, dict(zip(netlist.inputs, words)), mask, overlay)
    return [vals[o] for o in netlist.outputs], mask


def evaluate(netlist: Netlist, stimulus: Mapping[str, int], overlay: FaultOverlay | None = None) -> dict[str, int]:
    """Evaluate one input assignment; returns a value for every primary output."""
    unknown = set(stimulus) - set(netlist.inputs)
    if unknown:
        raise SimulationError(f"stimulus names non-input net(s): {', '.join(sorted(unknown))}")
    vals = simulate_words(netlist, {k: int(v) & 1 for k, v in stimulus.items()}, 1, overlay)
    return {o: vals[o] for o in netlist.outputs}


def evaluate_vector(netlist: Netlist, bits: Sequence[int], overlay: FaultOverlay | None = None) -> tuple[int, ...]:
    if len(bits) != len(netlist.inputs):
        raise SimulationError(f"expected {len(netlist.inputs)} input bits, got {len(bits)}")
    out = evaluate(netlist, dict(zip(netlist.inputs, bits)), overlay)
    return tuple(out[o] for o in netlist.outputs)


def to_bits(value: int, width: int) -> tuple[int, ...]:
    return tuple((value >> (width - 1 - i)) & 1 for i in range(width))


def from_bits(bits: Sequence[int]) -> int:
    v = 0
    for b in bits:
        v = (v << 1) | (b & 1)
    return v


def truth_table(netlist: Netlist, overlay: FaultOverlay | None = None) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    outs, _ = exhaustive_outputs(netlist, overlay)
    p = len(netlist.inputs)
    return [
        (to_bits(r, p), tuple((w >> r) & 1 for w in outs))
        for r in range(1 << p)
    ]
