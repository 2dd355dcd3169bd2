"""System reliability as a function of per-module reliability ``r``.

Modules are assumed to fail independently with the same probability
``1 - r``; voters are assumed fault-free.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .faults import FaultBehavior, stimulus
from .redundancy import RedundancyScheme, RedundantSystem, conforms
from .simulator import simulate_words

ASSUMPTIONS = "modules fail independently with identical reliability r; voters are fault-free"
Z95 = 1.959963984540054
CHUNK = 1 << 16


def _check_r(r: float):
    if not 0.0 <= r <= 1.0 or math.isnan(r):
        raise ValueError(f"module reliability must lie in [0, 1], got {r}")


def analytic_reliability(scheme: RedundancyScheme, r: float) -> float:
    _check_r(r)
    if scheme.kind == "nmr":
        n = scheme.size
        return math.fsum(math.comb(n, i) * r**i * (1 - r) ** (n - i) for i in range((n + 1) // 2, n + 1))
    majority = 3 * r**2 - 2 * r**3
    minority = 1 - (1 - r) ** (scheme.size - 3)
    return majority * minority


@dataclass(frozen=True)
class MonteCarloResult:
    estimate: float
    half_width: float
    trials: int
    seed: int
    mode: str
    behavior: str | None = None
    per_input_mean: float | None = None


def _scheme_of(target) -> RedundancyScheme:
    return target.scheme if isinstance(target, RedundantSystem) else target


def _conforming_table(scheme: RedundancyScheme) -> np.ndarray:
    n = scheme.replicas
    return np.array(
        [conforms(scheme, [i + 1 for i in range(n) if mask >> i & 1]) for mask in range(1 << n)], dtype=bool
    )


class CircuitJudge:
    """Caches, per failure mask, whether the circuit still matches the golden module."""

    def __init__(self, system: RedundantSystem, behavior: FaultBehavior, input_samples, seed):
        if behavior is FaultBehavior.ADVERSARIAL:
            raise ValueError("circuit mode needs a concrete fault behavior")
        self.system = system
        self.fault = behavior.overlay_fault()
        self.stim = stimulus(system, input_samples, seed)
        self.cache: dict[int, tuple[bool, float]] = {}

    def __call__(self, mask: int) -> tuple[bool, float]:
        hit = self.cache.get(mask)
        if hit is not None:
            return hit
        sysm = self.system
        overlay = {}
        for i in range(sysm.scheme.replicas):
            if mask >> i & 1:
                overlay.update({n: self.fault for n in sysm.replica_nets(i + 1)})
        vals = simulate_words(sysm.netlist, self.stim.words, self.stim.mask, overlay)
        bad = 0
        for o, g in zip(sysm.netlist.outputs, self.stim.golden):
            bad |= vals[o] ^ g
        res = (bad == 0, 1.0 - bin(bad).count("1") / self.stim.rows)
        self.cache[mask] = res
        return res


def monte_carlo_reliability(
    target: RedundantSystem | RedundancyScheme,
    r: float,
    trials: int,
    mode: str = "guarantee",
    seed: int = 0,
    *,
    behavior: FaultBehavior | str = FaultBehavior.INVERTED,
    input_samples: int | None = None,
    stream: int = 0,
    judge: CircuitJudge | None = None,
) -> MonteCarloResult:
    """Estimate system reliability by sampling module failure patterns.

    ``guarantee`` scores a trial as a success when the failure pattern is
    within the scheme's masking budget. ``circuit`` injects ``behavior`` on
    the failed replicas' outputs and requires the system to match the golden
    module on every enumerated (or sampled) input. Trials are drawn in fixed
    chunks, each seeded from ``(seed, stream, chunk index)``, so results do not
    depend on how chunks are scheduled.
    """
    _check_r(r)
    if not isinstance(trials, (int, np.integer)) or trials < 1:
        raise ValueError(f"trials must be a positive integer, got {trials!r}")
    if mode not in ("guarantee", "circuit"):
        raise ValueError(f"unknown Monte Carlo mode {mode!r}")
    scheme = _scheme_of(target)
    n = scheme.replicas
    weights = 1 << np.arange(n, dtype=np.int64)

    table = None
    if mode == "circuit":
        if not isinstance(target, RedundantSystem):
            raise ValueError("circuit mode needs a built RedundantSystem")
        judge = judge or CircuitJudge(target, FaultBehavior(behavior), input_samples, seed)
    else:
        table = _conforming_table(scheme)

    successes = 0
    per_input_total = 0.0
    for c, start in enumerate(range(0, trials, CHUNK)):
        size = min(CHUNK, trials - start)
        rng = np.random.default_rng([seed, stream, c])
        failed = rng.random((size, n)) < (1.0 - r)
        masks = failed.astype(np.int64) @ weights
        if table is not None:
            successes += int(table[masks].sum())
        else:
            uniq, counts = np.unique(masks, return_counts=True)
            for mask, cnt in zip(uniq.tolist(), counts.tolist()):
                ok, frac = judge(mask)
                successes += ok * cnt
                per_input_total += frac * cnt

    p = successes / trials
    hw = Z95 * math.sqrt(p * (1 - p) / trials)
    return MonteCarloResult(
        p, hw, int(trials), seed, mode,
        FaultBehavior(behavior).value if mode == "circuit" else None,
        per_input_total / trials if mode == "circuit" else None,
    )


@dataclass
class ReliabilityCurve:
    scheme: str
    mode: str
    samples: list[tuple[float, float]]
    half_widths: list[float]
    seed: int | None = None
    trials: int | None = None
    behavior: str | None = None
    notes: list[str] = field(default_factory=lambda: [ASSUMPTIONS])

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# scheme={self.scheme} mode={self.mode} seed={self.seed} trials={self.trials}")
        if self.behavior:
            buf.write(f" behavior={self.behavior}")
        buf.write("\n")
        for note in self.notes:
            buf.write(f"# {note}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["r", "R", "halfwidth"])
        for (r, R), hw in zip(self.samples, self.half_widths):
            w.writerow([repr(float(r)), repr(float(R)), repr(float(hw))])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({
            "scheme": self.scheme,
            "mode": self.mode,
            "seed": self.seed,
            "trials": self.trials,
            "behavior": self.behavior,
            "notes": self.notes,
            "samples": [{"r": r, "R": R, "halfwidth": hw} for (r, R), hw in zip(self.samples, self.half_widths)],
        }, indent=1)


def curve(
    target: RedundantSystem | RedundancyScheme,
    r_min: float = 0.0,
    r_max: float = 1.0,
    steps: int = 101,
    mode: str = "analytic",
    *,
    trials: int = 100_000,
    seed: int = 0,
    behavior: FaultBehavior | str = FaultBehavior.INVERTED,
    input_samples: int | None = None,
) -> ReliabilityCurve:
    """Sample R(r) on an evenly spaced grid including both endpoints."""
    _check_r(r_min)
    _check_r(r_max)
    if not r_min < r_max:
        raise ValueError("r_min must be below r_max")
    if steps < 2:
        raise ValueError("steps must be >= 2")
    scheme = _scheme_of(target)
    grid = np.linspace(r_min, r_max, steps).tolist()
    if mode == "analytic":
        pts = [(r, analytic_reliability(scheme, r)) for r in grid]
        return ReliabilityCurve(str(scheme), mode, pts, [0.0] * steps)
    if mode not in ("guarantee", "circuit"):
        raise ValueError(f"unknown mode {mode!r}")
    judge = None
    if mode == "circuit":
        if not isinstance(target, RedundantSystem):
            raise ValueError("circuit mode needs a built RedundantSystem")
        judge = CircuitJudge(target, FaultBehavior(behavior), input_samples, seed)
    pts, hws = [], []
    for k, r in enumerate(grid):
        res = monte_carlo_reliability(target, r, trials, mode, seed, behavior=behavior,
                                      input_samples=input_samples, stream=k, judge=judge)
        pts.append((r, res.estimate))
        hws.append(res.half_width)
    return ReliabilityCurve(str(scheme), mode, pts, hws, seed, trials,
                            FaultBehavior(behavior).value if mode == "circuit" else None)
