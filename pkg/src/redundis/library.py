"""Netlist builders for the function modules and voters used by the workbench."""

from __future__ import annotations

import enum
from itertools import combinations

from .netlist import GateKind, Netlist, NetlistBuilder

AND, OR, XOR = GateKind.AND, GateKind.OR, GateKind.XOR


class VoterConstruction(str, enum.Enum):
    SUM_OF_PRODUCTS = "sop"
    COUNT_COMPARE = "count"

    @classmethod
    def default_for(cls, n: int) -> "VoterConstruction":
        return cls.SUM_OF_PRODUCTS if n <= 5 else cls.COUNT_COMPARE


def _full_adder(b: NetlistBuilder, x: str, y: str, z: str) -> tuple[str, str]:
    s = b.gate(XOR, (b.gate(XOR, (x, y)), z))
    c = b.gate(OR, (b.gate(AND, (x, y)), b.gate(AND, (y, z)), b.gate(AND, (x, z))))
    return s, c


def _half_adder(b: NetlistBuilder, x: str, y: str) -> tuple[str, str]:
    return b.gate(XOR, (x, y)), b.gate(AND, (x, y))


def full_adder() -> Netlist:
    b = NetlistBuilder("full_adder", ["a", "b", "cin"])
    s, c = _full_adder(b, "a", "b", "cin")
    return b.build({"sum": s, "carry": c})


def half_adder() -> Netlist:
    b = NetlistBuilder("half_adder", ["a", "b"])
    s, c = _half_adder(b, "a", "b")
    return b.build({"sum": s, "carry": c})


def braun_multiplier(width: int = 4) -> Netlist:
    """Unsigned ``width`` x ``width`` Braun array multiplier.

    Inputs are ``a{w-1}..a0, b{w-1}..b0`` and outputs ``p{2w-1}..p0`` so that,
    read MSB-first, input row ``(A << w) | B`` produces the integer ``A * B``.

    The array is the usual carry-save layout: an AND plane of partial
    products, ``w - 1`` rows of half/full adders passing sums diagonally and
    carries straight down, and a final ripple-carry row for the top half.
    """
    if not isinstance(width, int) or width < 2:
        raise ValueError(f"multiplier width must be an integer >= 2, got {width!r}")
    w = width
    a = [f"a{j}" for j in range(w)]
    bb = [f"b{i}" for i in range(w)]
    b = NetlistBuilder(f"braun{w}", a[::-1] + bb[::-1])
    pp = [[b.gate(AND, (a[j], bb[i])) for j in range(w)] for i in range(w)]

    p: dict[int, str] = {}
    # sums[j] has weight (row + j), carries[j] has weight (row + j + 1)
    sums: list[str | None] = list(pp[0])
    carries: list[str | None] = [None] * w
    p[0] = sums[0]
    for i in range(1, w):
        new_s: list[str | None] = []
        new_c: list[str | None] = []
        for j in range(w):
            ops = [x for x in (pp[i][j], sums[j + 1] if j + 1 < w else None, carries[j]) if x is not None]
            if len(ops) == 3:
                s, c = _full_adder(b, *ops)
            elif len(ops) == 2:
                s, c = _half_adder(b, *ops)
            else:
                s, c = ops[0], None
            new_s.append(s)
            new_c.append(c)
        sums, carries = new_s, new_c
        p[i] = sums[0]

    # final row: weight w + k combines sums[k + 1], carries[k] and the ripple
    ripple: str | None = None
    for k in range(w):
        ops = [x for x in (sums[k + 1] if k + 1 < w else None, carries[k], ripple) if x is not None]
        top = k == w - 1
        if len(ops) == 1:
            s, c = ops[0], None
        elif top:
            # the product fits in 2w bits, so the carry out of the top column is always 0
            s, c = b.gate(XOR, ops), None
        elif len(ops) == 3:
            s, c = _full_adder(b, *ops)
        else:
            s, c = _half_adder(b, *ops)
        p[w + k] = s
        ripple = c
    return b.build({f"p{k}": p[k] for k in reversed(range(2 * w))})


def _check_voter_n(n: int):
    if not isinstance(n, int) or n % 2 == 0 or not 3 <= n <= 15:
        raise ValueError(f"majority voter size must be odd and in [3, 15], got {n!r}")


def majority_voter(n: int = 3, construction: VoterConstruction | str | None = None) -> Netlist:
    """n-input majority: output is 1 iff at least ``(n + 1) // 2`` inputs are 1.

    ``sop`` builds one AND per threshold-sized subset feeding a single wide OR
    (for n=3 that is exactly three AND2 and one OR3). ``count`` builds a
    full/half-adder popcount tree followed by a constant comparator.
    """
    _check_voter_n(n)
    construction = VoterConstruction(construction) if construction else VoterConstruction.default_for(n)
    ins = [f"F{i}" for i in range(1, n + 1)]
    t = (n + 1) // 2
    b = NetlistBuilder(f"maj{n}_{construction.value}", ins)
    if construction is VoterConstruction.SUM_OF_PRODUCTS:
        terms = [b.gate(AND, c) for c in combinations(ins, t)]
        out = b.gate(OR, terms)
    else:
        out = _threshold(b, _popcount(b, ins), t)
    return b.build({"MAJ": out})


def _popcount(b: NetlistBuilder, bits: list[str]) -> list[str]:
    """Column-compression counter; returns count bits LSB first."""
    cols: list[list[str]] = [list(bits)]
    k = 0
    while k < len(cols):
        col = cols[k]
        while len(col) > 1:
            if len(col) >= 3:
                x, y, z = col.pop(0), col.pop(0), col.pop(0)
                s, c = _full_adder(b, x, y, z)
            else:
                x, y = col.pop(0), col.pop(0)
                s, c = _half_adder(b, x, y)
            col.append(s)
            if k + 1 == len(cols):
                cols.append([])
            cols[k + 1].append(c)
        k += 1
    return [c[0] for c in cols if c]


def _threshold(b: NetlistBuilder, count: list[str], t: int) -> str:
    """Net that is 1 iff the unsigned value on ``count`` (LSB first) is >= t."""

    def ge(k: int, rest: int) -> str | bool:
        # compare count bits k..0 against the low k+1 bits of t
        if rest == 0:
            return True
        if k < 0:
            return False
        bit = (rest >> k) & 1
        sub = ge(k - 1, rest & ((1 << k) - 1))
        if bit:
            if sub is False:
                return False
            return count[k] if sub is True else b.gate(AND, (count[k], sub))
        if sub is True:
            return True
        return count[k] if sub is False else b.gate(OR, (count[k], sub))

    if t >= 1 << len(count):
        raise ValueError("threshold exceeds counter range")
    res = ge(len(count) - 1, t)
    assert isinstance(res, str)
    return res


def dmmr_voter(m: int = 5, *, two_input: bool = False) -> Netlist:
    """(3-of-m) distributed minority/majority voter.

    ``MAJ`` is the 2-of-3 vote of F1..F3, ``MIN`` the OR of F4..Fm and the
    output ``DMMRO`` their conjunction. With ``two_input`` the wide OR is
    built as a balanced tree of OR2 gates.
    """
    if not isinstance(m, int) or m < 5:
        raise ValueError(f"DMMR voter needs m >= 5 modules, got {m!r}")
    ins = [f"F{i}" for i in range(1, m + 1)]
    b = NetlistBuilder(f"dmmr3of{m}", ins)
    f1, f2, f3 = ins[:3]
    terms = [b.gate(AND, (f1, f2)), b.gate(AND, (f2, f3)), b.gate(AND, (f1, f3))]
    maj = b.gate(OR, terms, out="MAJ", gid="g_maj")
    minority = ins[3:]
    if two_input:
        level = minority
        while len(level) > 2:
            nxt = [b.gate(OR, level[i:i + 2]) for i in range(0, len(level) - 1, 2)]
            if len(level) % 2:
                nxt.append(level[-1])
            level = nxt
        mn = b.gate(OR, level, out="MIN", gid="g_min")
    else:
        mn = b.gate(OR, minority, out="MIN", gid="g_min")
    out = b.gate(AND, (maj, mn))
    return b.build({"DMMRO": out})


def module_by_name(spec: str) -> Netlist:
    """Resolve a module selector: ``braun4``, ``braun:<w>``, ``fulladder`` or ``halfadder``."""
    s = spec.strip().lower()
    if s == "braun4":
        return braun_multiplier(4)
    if s.startswith("braun:"):
        return braun_multiplier(int(s.split(":", 1)[1]))
    if s in ("fulladder", "full_adder"):
        return full_adder()
    if s in ("halfadder", "half_adder"):
        return half_adder()
    raise ValueError(f"unknown module {spec!r}")
