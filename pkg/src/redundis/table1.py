"""Published FPGA synthesis figures (bundled CSV) and their ADP reduction summaries.

The delay/area/ADP values are device- and tool-specific and are shipped as
data only. Nothing in the workbench tries to reproduce their absolute values.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from importlib import resources
from statistics import mean

from .metrics import reduction_percent

COLUMNS = ["family", "process", "type", "scheme", "delay_ns", "area_bels", "adp"]
PAIRS = [("5MR", "3-of-5 DMMR"), ("7MR", "3-of-6 DMMR"), ("9MR", "3-of-7 DMMR")]
# four-family aggregate ADP reductions quoted alongside the published figures
CLAIMED_FOUR_FAMILY = {("7MR", "3-of-6 DMMR"): 44.5, ("9MR", "3-of-7 DMMR"): 56.5}
# pair averages quoted in the discussion of results: (commercial, radiation+military)
CLAIMED_PAIR_AVERAGES = {
    ("7MR", "3-of-6 DMMR"): (34.1, 46.0),
    ("9MR", "3-of-7 DMMR"): (46.7, 58.3),
}


class FixtureError(ValueError):
    pass


@dataclass(frozen=True)
class Table1Row:
    family: str
    process: str
    type: str
    scheme: str
    delay_ns: float
    area_bels: int
    adp: float

    @property
    def recomputed_adp(self) -> float:
        return self.delay_ns * self.area_bels


def load_table1(text: str | None = None) -> list[Table1Row]:
    """Parse the fixture CSV (the bundled copy when ``text`` is None)."""
    if text is None:
        text = resources.files("redundis").joinpath("data/table1.csv").read_text()
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames != COLUMNS:
        raise FixtureError(f"fixture header must be {','.join(COLUMNS)}, got {reader.fieldnames}")
    rows = []
    for k, rec in enumerate(reader, start=2):
        try:
            rows.append(Table1Row(
                rec["family"], rec["process"], rec["type"], rec["scheme"],
                float(rec["delay_ns"]), int(rec["area_bels"]), float(rec["adp"]),
            ))
        except (TypeError, ValueError) as e:
            raise FixtureError(f"line {k}: {e}") from None
    return rows


def _is_commercial(row: Table1Row) -> bool:
    return row.type.strip().lower() == "commercial"


@dataclass
class Table1Summary:
    families: list[str]
    commercial: list[str]
    hardened: list[str]
    per_family: dict[str, dict[str, float]]
    commercial_average: dict[str, float]
    hardened_average: dict[str, float]
    four_family_mean: dict[str, float]
    mean_of_pair_averages: dict[str, float]
    pooled: dict[str, float]
    adp_checks: list[tuple[str, str, float, float]]
    flags: list[str] = field(default_factory=list)

    @property
    def max_adp_error(self) -> float:
        return max(abs(printed - recomputed) for _, _, printed, recomputed in self.adp_checks)

    def to_dict(self) -> dict:
        return {
            "per_family": self.per_family,
            "commercial_average": self.commercial_average,
            "radiation_military_average": self.hardened_average,
            "four_family_mean": self.four_family_mean,
            "mean_of_pair_averages": self.mean_of_pair_averages,
            "pooled_adp_reduction": self.pooled,
            "claimed_four_family": {_pair_name(p): v for p, v in CLAIMED_FOUR_FAMILY.items()},
            "max_adp_recompute_error": self.max_adp_error,
            "flags": self.flags,
        }


def _pair_name(pair: tuple[str, str]) -> str:
    return f"{pair[0]} vs {pair[1]}"


def table1_reductions(rows: list[Table1Row]) -> Table1Summary:
    """Per-family ADP reductions plus several aggregation variants.

    * ``commercial_average`` / ``hardened_average``: mean of per-family
      reductions within the commercial and the radiation-tolerant/military pair.
    * ``four_family_mean``: mean of the four per-family reductions.
    * ``mean_of_pair_averages``: mean of the two pair averages.
    * ``pooled``: reduction of the ADP summed over all families.
    """
    index = {(r.family, r.scheme): r for r in rows}
    families = list(dict.fromkeys(r.family for r in rows))
    ftype = {r.family: _is_commercial(r) for r in rows}
    commercial = [f for f in families if ftype[f]]
    hardened = [f for f in families if not ftype[f]]

    def get(f, s) -> Table1Row:
        try:
            return index[(f, s)]
        except KeyError:
            raise FixtureError(f"fixture has no row for ({f}, {s})") from None

    per_family = {
        f: {_pair_name(p): reduction_percent(get(f, p[0]).adp, get(f, p[1]).adp) for p in PAIRS}
        for f in families
    }
    names = [_pair_name(p) for p in PAIRS]
    com = {n: mean(per_family[f][n] for f in commercial) for n in names} if commercial else {}
    hard = {n: mean(per_family[f][n] for f in hardened) for n in names} if hardened else {}
    four = {n: mean(per_family[f][n] for f in families) for n in names}
    pair_mean = {n: mean([com[n], hard[n]]) for n in names} if com and hard else {}
    pooled = {
        _pair_name(p): reduction_percent(sum(get(f, p[0]).adp for f in families), sum(get(f, p[1]).adp for f in families))
        for p in PAIRS
    }
    checks = [(r.family, r.scheme, r.adp, r.recomputed_adp) for r in rows]
    summary = Table1Summary(families, commercial, hardened, per_family, com, hard, four, pair_mean, pooled, checks)

    for pair, claimed in CLAIMED_FOUR_FAMILY.items():
        n = _pair_name(pair)
        if n in four and abs(four[n] - claimed) > 0.5:
            summary.flags.append(
                f"{n}: claimed four-family average {claimed:.1f}% is not the arithmetic mean of "
                f"per-family reductions ({four[n]:.1f}%) nor of the pair averages "
                f"({pair_mean.get(n, float('nan')):.1f}%); reduction of summed ADP gives {pooled[n]:.1f}%"
            )
    bad = [c for c in checks if abs(c[2] - c[3]) > 0.01]
    for f, s, printed, rec in bad:
        summary.flags.append(f"{f} {s}: printed ADP {printed} differs from delay x area {rec:.3f}")
    return summary


def render_summary(s: Table1Summary) -> str:
    names = [_pair_name(p) for p in PAIRS]
    lines = ["ADP reduction of DMMR vs NMR from published FPGA figures (percent)", ""]
    w = max(len(f) for f in s.families + ["radiation+military average"]) + 2
    lines.append("".ljust(w) + "".join(n.rjust(22) for n in names))
    for f in s.families:
        lines.append(f.ljust(w) + "".join(f"{s.per_family[f][n]:22.1f}" for n in names))
    for label, d in [
        ("commercial average", s.commercial_average),
        ("radiation+military average", s.hardened_average),
        ("four-family mean", s.four_family_mean),
        ("mean of pair averages", s.mean_of_pair_averages),
        ("pooled (summed ADP)", s.pooled),
    ]:
        lines.append(label.ljust(w) + "".join(f"{d[n]:22.1f}" if n in d else "".rjust(22) for n in names))
    lines.append("")
    lines.append(f"max |printed ADP - delay x area| = {s.max_adp_error:.4f}")
    lines.append("absolute delay/area values are FPGA tool outputs and are not modeled")
    for fl in s.flags:
        lines.append(f"FLAG: {fl}")
    return "\n".join(lines)
