"""NMR and (3-of-M) DMMR system construction around a function module."""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property

from .library import VoterConstruction, dmmr_voter, majority_voter
from .netlist import Netlist, instantiate, validate

NMR_RANGE = (3, 9)
DMMR_RANGE = (5, 9)


class SchemeError(ValueError):
    pass


@dataclass(frozen=True)
class RedundancyScheme:
    """``kind`` is ``"nmr"`` or ``"dmmr"``; ``size`` is N or M (replica count)."""

    kind: str
    size: int
    majority_size: int = 3

    def __post_init__(self):
        if self.kind == "nmr":
            if self.size < 3 or self.size % 2 == 0:
                raise SchemeError(f"NMR n must be odd and >= 3, got {self.size}")
        elif self.kind == "dmmr":
            if self.size < 5:
                raise SchemeError(f"DMMR m must be >= 5, got {self.size}")
            if self.majority_size != 3:
                raise SchemeError("only the 3-of-M DMMR variant is supported")
        else:
            raise SchemeError(f"unknown scheme kind {self.kind!r}")

    @classmethod
    def nmr(cls, n: int) -> "RedundancyScheme":
        return cls("nmr", n)

    @classmethod
    def dmmr(cls, m: int) -> "RedundancyScheme":
        return cls("dmmr", m)

    @classmethod
    def parse(cls, text: str) -> "RedundancyScheme":
        """Parse ``nmr:<odd n>`` or ``dmmr:3of<m>``."""
        s = text.strip().lower()
        mt = re.fullmatch(r"nmr:(\d+)", s)
        if mt:
            n = int(mt.group(1))
            if n % 2 == 0:
                raise SchemeError(f"n must be odd (got nmr:{n})")
            return cls.nmr(n)
        mt = re.fullmatch(r"dmmr:(\d+)of(\d+)", s)
        if mt:
            if int(mt.group(1)) != 3:
                raise SchemeError(f"only 3-of-M DMMR is supported (got {text!r})")
            return cls.dmmr(int(mt.group(2)))
        raise SchemeError(f"cannot parse scheme {text!r}; expected nmr:<odd n> or dmmr:3of<m>")

    def __str__(self):
        return f"nmr:{self.size}" if self.kind == "nmr" else f"dmmr:3of{self.size}"

    @property
    def label(self) -> str:
        return f"{self.size}MR" if self.kind == "nmr" else f"3-of-{self.size} DMMR"

    @property
    def replicas(self) -> int:
        return self.size

    @property
    def majority_group(self) -> tuple[int, ...]:
        """1-based replica indices voted 2-of-3 (DMMR) or all replicas (NMR)."""
        return (1, 2, 3) if self.kind == "dmmr" else tuple(range(1, self.size + 1))

    @property
    def minority_group(self) -> tuple[int, ...]:
        return tuple(range(4, self.size + 1)) if self.kind == "dmmr" else ()


@dataclass(frozen=True)
class ToleranceDescriptor:
    total_guaranteed: int
    conditional_total: int
    majority_budget: int | None = None
    minority_budget: int | None = None


def tolerance(scheme: RedundancyScheme) -> ToleranceDescriptor:
    if scheme.kind == "nmr":
        t = (scheme.size - 1) // 2
        return ToleranceDescriptor(t, t)
    # two arbitrary faults can both hit the majority group, so only 1 is unconditional
    m = scheme.size
    return ToleranceDescriptor(1, m - 3, majority_budget=1, minority_budget=m - 4)


def conforms(scheme: RedundancyScheme, faulty) -> bool:
    """True iff the set of faulty replica indices respects the scheme's budgets."""
    faulty = set(faulty)
    tol = tolerance(scheme)
    if scheme.kind == "nmr":
        return len(faulty) <= tol.conditional_total
    maj = len(faulty & set(scheme.majority_group))
    return maj <= tol.majority_budget and len(faulty) - maj <= tol.minority_budget


@dataclass(frozen=True)
class RedundantSystem:
    netlist: Netlist
    scheme: RedundancyScheme
    module_output_nets: tuple[tuple[str, ...], ...]
    golden_module: Netlist
    voter_construction: str

    @property
    def replica_prefixes(self) -> list[str]:
        return [replica_prefix(self.golden_module, k) for k in range(1, self.scheme.replicas + 1)]

    def replica_nets(self, replica: int) -> tuple[str, ...]:
        """Output nets of 1-based ``replica``."""
        if not 1 <= replica <= self.scheme.replicas:
            raise SchemeError(f"replica {replica} out of range 1..{self.scheme.replicas}")
        return self.module_output_nets[replica - 1]

    def with_netlist(self, netlist: Netlist) -> "RedundantSystem":
        """Same system metadata over a replacement netlist (e.g. a hand-edited voter)."""
        missing = [n for nets in self.module_output_nets for n in nets if n not in netlist.nets]
        if missing:
            raise SchemeError(f"replacement netlist lacks replica output net(s): {', '.join(missing[:5])}")
        if netlist.inputs != self.netlist.inputs or netlist.outputs != self.netlist.outputs:
            raise SchemeError("replacement netlist must keep the system's input and output ports")
        return RedundantSystem(netlist, self.scheme, self.module_output_nets, self.golden_module, self.voter_construction)

    @cached_property
    def voting_cones(self) -> list[frozenset[str]]:
        """Per system output, the replica output nets it structurally depends on.

        The backward traversal stops at replica outputs, so only the voter
        logic between replicas and system outputs is explored.
        """
        boundary = {n for nets in self.module_output_nets for n in nets}
        drv = self.netlist.driver
        cones = []
        for out in self.netlist.outputs:
            seen: set[str] = set()
            hit: set[str] = set()
            stack = [out]
            while stack:
                n = stack.pop()
                if n in seen:
                    continue
                seen.add(n)
                if n in boundary:
                    hit.add(n)
                    continue
                g = drv.get(n)
                if g is not None:
                    stack.extend(g.ins)
            cones.append(frozenset(hit))
        return cones

    def bitwise_independent(self) -> bool:
        """Each output bit j sees only the j-th output of each replica (and all of them)."""
        for j, cone in enumerate(self.voting_cones):
            if cone != {nets[j] for nets in self.module_output_nets}:
                return False
        return True


def replica_prefix(module: Netlist, k: int) -> str:
    return f"{module.name}_r{k}_"


def _check_range(n: int, lo_hi: tuple[int, int], what: str):
    lo, hi = lo_hi
    if not isinstance(n, int) or not lo <= n <= hi:
        raise SchemeError(f"{what} must be in [{lo}, {hi}], got {n!r}")


def _replicate(module: Netlist, count: int, name: str) -> tuple[Netlist, tuple[tuple[str, ...], ...]]:
    issues = validate(module)
    if issues:
        raise SchemeError(f"module {module.name} is invalid: {issues[0]}")
    sys = Netlist(name, module.inputs, module.outputs, ())
    outs = []
    for k in range(1, count + 1):
        pre = replica_prefix(module, k)
        binding = {i: i for i in module.inputs}
        binding.update({o: pre + o for o in module.outputs})
        sys = instantiate(sys, module, binding, pre)
        outs.append(tuple(pre + o for o in module.outputs))
    return sys, tuple(outs)


def _attach_voters(sys: Netlist, module: Netlist, voter: Netlist, outs) -> Netlist:
    for j, o in enumerate(module.outputs):
        binding = {f"F{k + 1}": outs[k][j] for k in range(len(outs))}
        binding[voter.outputs[0]] = o
        sys = instantiate(sys, voter, binding, f"vote_{o}_")
    return sys


def build_nmr(module: Netlist, n: int, construction: VoterConstruction | str | None = None) -> RedundantSystem:
    """``n`` replicas sharing the primary inputs, one majority voter per output bit."""
    if isinstance(n, int) and n % 2 == 0:
        raise SchemeError(f"n must be odd, got {n}")
    _check_range(n, NMR_RANGE, "NMR n")
    scheme = RedundancyScheme.nmr(n)
    construction = VoterConstruction(construction) if construction else VoterConstruction.default_for(n)
    sys, outs = _replicate(module, n, f"{module.name}_{n}mr")
    sys = _attach_voters(sys, module, majority_voter(n, construction), outs)
    return RedundantSystem(sys, scheme, outs, module, f"majority-{construction.value}")


def build_dmmr(module: Netlist, m: int) -> RedundantSystem:
    """``m`` replicas: 1-3 form the majority group, 4..m the minority group."""
    _check_range(m, DMMR_RANGE, "DMMR m")
    scheme = RedundancyScheme.dmmr(m)
    sys, outs = _replicate(module, m, f"{module.name}_dmmr3of{m}")
    sys = _attach_voters(sys, module, dmmr_voter(m), outs)
    return RedundantSystem(sys, scheme, outs, module, "dmmr")


def build(module: Netlist, scheme: RedundancyScheme | str, construction=None) -> RedundantSystem:
    if isinstance(scheme, str):
        scheme = RedundancyScheme.parse(scheme)
    if scheme.kind == "nmr":
        return build_nmr(module, scheme.size, construction)
    return build_dmmr(module, scheme.size)
