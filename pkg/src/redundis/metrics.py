"""Area, critical-path delay and area-delay product (ADP) under abstract cost models.

Units are technology neutral: one area unit per gate and one delay unit per
gate level by default. Interconnect delay is not modeled.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Mapping

from .netlist import GateKind, Netlist, normalize_two_input, topological_order
from .redundancy import RedundantSystem

INTERCONNECT_NOTE = "interconnect delay not modeled; abstract unit-area/unit-delay proxies, not FPGA BELs/ns"


@dataclass(frozen=True)
class DelayModel:
    delays: Mapping[GateKind, float] = field(default_factory=dict)
    fanin_scale: float = 0.0
    default: float = 1.0
    name: str = "unit"

    def __post_init__(self):
        d = {GateKind(k): float(v) for k, v in dict(self.delays).items()}
        object.__setattr__(self, "delays", d)
        if any(v < 0 for v in d.values()) or self.default < 0 or self.fanin_scale < 0:
            raise ValueError("gate delays and fan-in scaling must be non-negative")

    def gate_delay(self, kind: GateKind, fanin: int) -> float:
        return self.delays.get(kind, self.default) + self.fanin_scale * max(0, fanin - 2)

    def scaled(self, c: float) -> "DelayModel":
        return DelayModel({k: v * c for k, v in self.delays.items()}, self.fanin_scale * c, self.default * c, f"{self.name}*{c:g}")

    @property
    def key(self) -> tuple:
        return (tuple(sorted((k.value, v) for k, v in self.delays.items())), self.fanin_scale, self.default)

    @classmethod
    def from_dict(cls, d: Mapping) -> "DelayModel":
        return cls(d.get("delays", {}), float(d.get("fanin_scale", 0.0)), float(d.get("default", 1.0)), d.get("name", "custom"))

    @classmethod
    def from_file(cls, path) -> "DelayModel":
        with open(path) as f:
            return cls.from_dict(json.load(f))


UNIT_DELAY = DelayModel()


def area(netlist: Netlist, weights: Mapping[GateKind | str, float] | None = None) -> tuple[int, float]:
    """``(gate_count, weighted_area)``; unlisted kinds weigh 1."""
    w = {GateKind(k): float(v) for k, v in (weights or {}).items()}
    if any(v < 0 for v in w.values()):
        raise ValueError("area weights must be non-negative")
    return len(netlist.gates), float(sum(w.get(g.kind, 1.0) for g in netlist.gates))


def critical_path_delay(netlist: Netlist, model: DelayModel = UNIT_DELAY) -> tuple[float, list[str]]:
    """Longest input-to-output delay and the gate ids along one such path."""
    by_id = netlist.gate_by_id
    arrival: dict[str, float] = {n: 0.0 for n in netlist.inputs}
    via: dict[str, str | None] = {n: None for n in netlist.inputs}
    for gid in topological_order(netlist):
        g = by_id[gid]
        src = max(g.ins, key=lambda n: arrival[n])
        arrival[g.out] = arrival[src] + model.gate_delay(g.kind, len(g.ins))
        via[g.out] = gid
    if not netlist.outputs:
        return 0.0, []
    end = max(netlist.outputs, key=lambda n: arrival[n])
    path: list[str] = []
    net = end
    while via.get(net) is not None:
        gid = via[net]
        path.append(gid)
        g = by_id[gid]
        net = max(g.ins, key=lambda n: arrival[n])
    return arrival[end], path[::-1]


@dataclass(frozen=True)
class MetricsReport:
    name: str
    gate_count: int
    weighted_area: float
    critical_path_delay: float
    adp: float
    voter_construction: str
    normalization: str
    delay_model: str = "unit"
    module: str | None = None
    modules: int | None = None
    critical_path: tuple[str, ...] = ()
    model_key: tuple = field(default=(), compare=False, repr=False)
    weights_key: tuple = field(default=(), compare=False, repr=False)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["critical_path"] = list(self.critical_path)
        d.pop("model_key")
        d.pop("weights_key")
        return d


def adp(
    netlist: Netlist,
    model: DelayModel = UNIT_DELAY,
    weights: Mapping | None = None,
    *,
    normalization: str = "two-input",
    voter_construction: str = "n/a",
    module: str | None = None,
    modules: int | None = None,
) -> MetricsReport:
    """Full metrics report; ``normalization`` is ``"two-input"`` or ``"wide-gates"``."""
    if normalization not in ("two-input", "wide-gates"):
        raise ValueError(f"unknown normalization {normalization!r}")
    net = normalize_two_input(netlist) if normalization == "two-input" else netlist
    count, warea = area(net, weights)
    delay, path = critical_path_delay(net, model)
    wkey = tuple(sorted((GateKind(k).value, float(v)) for k, v in (weights or {}).items()))
    return MetricsReport(
        netlist.name, count, warea, delay, warea * delay, voter_construction, normalization,
        model.name, module, modules, tuple(path), model.key, wkey,
    )


def system_report(system: RedundantSystem, model: DelayModel = UNIT_DELAY, weights=None, *, normalization="two-input") -> MetricsReport:
    r = adp(
        system.netlist, model, weights, normalization=normalization,
        voter_construction=system.voter_construction, module=system.golden_module.name,
        modules=system.scheme.replicas,
    )
    # label by scheme so comparison tables read naturally
    return MetricsReport(**{**r.__dict__, "name": system.scheme.label})


@dataclass(frozen=True)
class ComparisonRow:
    baseline: str
    candidate: str
    adp_reduction_percent: float
    area_reduction_percent: float
    delay_reduction_percent: float
    module_count_delta: int | None

    def to_dict(self) -> dict:
        return asdict(self)


def reduction_percent(baseline: float, candidate: float) -> float:
    if baseline == 0:
        raise ValueError("baseline value is zero; reduction undefined")
    return (baseline - candidate) / baseline * 100.0


def compare(baseline: MetricsReport, candidate: MetricsReport) -> ComparisonRow:
    """Like-for-like reduction of candidate against baseline (positive = candidate smaller)."""
    if baseline.model_key != candidate.model_key:
        raise ValueError("reports use different delay models")
    if baseline.normalization != candidate.normalization:
        raise ValueError("reports use different normalizations")
    if baseline.weights_key != candidate.weights_key:
        raise ValueError("reports use different area weights")
    if baseline.module and candidate.module and baseline.module != candidate.module:
        raise ValueError(f"reports wrap different modules ({baseline.module} vs {candidate.module})")
    delta = None
    if baseline.modules is not None and candidate.modules is not None:
        delta = baseline.modules - candidate.modules
    return ComparisonRow(
        baseline.name, candidate.name,
        reduction_percent(baseline.adp, candidate.adp),
        reduction_percent(baseline.weighted_area, candidate.weighted_area),
        reduction_percent(baseline.critical_path_delay, candidate.critical_path_delay),
        delta,
    )


def render_table(rows: list[dict], columns: list[str] | None = None, floatfmt: str = "{:.3f}") -> str:
    """Aligned plain-text table."""
    if not rows:
        return ""
    columns = columns or list(rows[0])

    def fmt(v):
        if isinstance(v, float):
            return floatfmt.format(v)
        return "" if v is None else str(v)

    cells = [[fmt(r.get(c)) for c in columns] for r in rows]
    widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(columns)]
    out = ["  ".join(c.ljust(w) for c, w in zip(columns, widths))]
    out.append("  ".join("-" * w for w in widths))
    out += ["  ".join(v.rjust(w) if _numeric(v) else v.ljust(w) for v, w in zip(row, widths)) for row in cells]
    return "\n".join(out)


def _numeric(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False
