"""Fault patterns and exhaustive masking verification for redundant systems.

Faults sit on replica output nets and persist across all inputs. The
``ADVERSARIAL`` behavior lets each faulty replica drive arbitrary output
values; it is resolved by enumerating every choice of those values.

When every system output bit only sees the matching output bit of each
replica (checked structurally, see
:meth:`~redundis.redundancy.RedundantSystem.bitwise_independent`) the
choices can be enumerated per output bit: forcing all outputs of faulty
replica ``i`` to bit ``c_i`` and checking each system bit separately covers
every per-bit assignment with ``2**k`` simulations instead of ``2**(q*k)``.
Because the same choice is applied on every input row, this also covers an
adversary that changes its values from one input to the next.
"""

from __future__ import annotations

import enum
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Iterable, Sequence

import numpy as np

from .redundancy import RedundancyScheme, RedundantSystem, conforms, tolerance
from .simulator import Fault, exhaustive_words, evaluate_vector, simulate_words, to_bits

MAX_VERIFY_INPUTS = 16
MAX_WHOLE_VECTOR_BITS = 16


class FaultBehavior(str, enum.Enum):
    STUCK0 = "stuck0"
    STUCK1 = "stuck1"
    INVERTED = "inverted"
    ADVERSARIAL = "adversarial"

    def overlay_fault(self) -> Fault:
        if self is FaultBehavior.ADVERSARIAL:
            raise ValueError("adversarial faults are enumerated, not simulated directly")
        return {"stuck0": Fault.STUCK0, "stuck1": Fault.STUCK1, "inverted": Fault.INVERT}[self.value]


class VerificationError(ValueError):
    pass


@dataclass(frozen=True)
class FaultPattern:
    assignments: tuple[tuple[int, FaultBehavior], ...]

    def __post_init__(self):
        idx = [i for i, _ in self.assignments]
        if len(set(idx)) != len(idx):
            raise ValueError(f"replica listed twice in fault pattern {idx}")
        object.__setattr__(
            self, "assignments", tuple(sorted((int(i), FaultBehavior(b)) for i, b in self.assignments))
        )

    @classmethod
    def of(cls, replicas: Iterable[int], behavior: FaultBehavior | str = FaultBehavior.ADVERSARIAL) -> "FaultPattern":
        return cls(tuple((i, FaultBehavior(behavior)) for i in replicas))

    @property
    def replicas(self) -> tuple[int, ...]:
        return tuple(i for i, _ in self.assignments)

    def __len__(self):
        return len(self.assignments)


@dataclass(frozen=True)
class Counterexample:
    pattern: tuple[int, ...]
    behavior: str
    input: int
    bit: int
    output: str
    got: int
    expected: int
    # per faulty adversarial replica (pattern order), the forced output word, MSB = first output
    choice: tuple[int, ...] | None = None

    def to_dict(self) -> dict:
        d = {
            "pattern": list(self.pattern),
            "behavior": self.behavior,
            "input": hex(self.input),
            "bit": self.bit,
            "got": self.got,
            "expected": self.expected,
            "output": self.output,
        }
        if self.choice is not None:
            d["choice"] = [hex(c) for c in self.choice]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "Counterexample":
        choice = d.get("choice")
        return cls(
            tuple(d["pattern"]), d["behavior"], int(d["input"], 16), int(d["bit"]), d.get("output", ""),
            int(d["got"]), int(d["expected"]), None if choice is None else tuple(int(c, 16) for c in choice),
        )


@dataclass
class MaskingVerdict:
    verified: bool
    patterns_checked: int
    inputs_per_pattern: int
    counterexample: Counterexample | None = None
    mode: str = "per-bit"
    simulations: int = 0
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "verified": self.verified,
            "patterns_checked": self.patterns_checked,
            "inputs_per_pattern": self.inputs_per_pattern,
            "mode": self.mode,
            "simulations": self.simulations,
            "counterexample": None if self.counterexample is None else self.counterexample.to_dict(),
            "notes": list(self.notes),
        }


# --- pattern enumeration ---------------------------------------------------

def conforming_patterns(scheme: RedundancyScheme, cardinality: int) -> list[tuple[int, ...]]:
    """Replica index sets (1-based, lexicographic) of the given size that the scheme must mask."""
    if cardinality < 0:
        raise ValueError("cardinality must be >= 0")
    return [c for c in combinations(range(1, scheme.replicas + 1), cardinality) if conforms(scheme, c)]


def non_conforming_patterns(scheme: RedundancyScheme, cardinality: int) -> list[tuple[int, ...]]:
    return [c for c in combinations(range(1, scheme.replicas + 1), cardinality) if not conforms(scheme, c)]


# --- verification core -----------------------------------------------------

@dataclass
class _Stimulus:
    words: dict[str, int]
    mask: int
    rows: int
    golden: list[int]
    row_input: Sequence[int] | None  # None: row index is the input value

    def input_of(self, row: int) -> int:
        return row if self.row_input is None else int(self.row_input[row])


def stimulus(system: RedundantSystem, samples: int | None = None, seed: int = 0) -> _Stimulus:
    golden = system.golden_module
    p = len(golden.inputs)
    if samples is None:
        if p > MAX_VERIFY_INPUTS:
            raise VerificationError(
                f"module has {p} inputs; exhaustive verification is limited to {MAX_VERIFY_INPUTS}. "
                "Pass samples=<count> for sampled verification."
            )
        ws, mask = exhaustive_words(p)
        words = dict(zip(golden.inputs, ws))
        row_input = None
        rows = 1 << p
    else:
        if samples < 1:
            raise VerificationError("samples must be >= 1")
        rng = np.random.default_rng(seed)
        vecs = [int(v) for v in rng.integers(0, 1 << p, size=samples, dtype=np.uint64)] if p < 64 else None
        if vecs is None:
            raise VerificationError("sampled mode supports modules with fewer than 64 inputs")
        words = {}
        for i, name in enumerate(golden.inputs):
            shift = p - 1 - i
            w = 0
            for r, v in enumerate(vecs):
                if (v >> shift) & 1:
                    w |= 1 << r
            words[name] = w
        mask = (1 << samples) - 1
        row_input = vecs
        rows = samples
    vals = simulate_words(golden, words, mask)
    return _Stimulus(words, mask, rows, [vals[o] for o in golden.outputs], row_input)


def _pattern_of(pattern, behavior) -> FaultPattern:
    if isinstance(pattern, FaultPattern):
        return pattern
    return FaultPattern.of(pattern, behavior or FaultBehavior.ADVERSARIAL)


def _first_mismatch(system, stim, outs, pattern, behavior_label, choice):
    for j, (got, exp) in enumerate(zip(outs, stim.golden)):
        diff = got ^ exp
        if diff:
            row = (diff & -diff).bit_length() - 1
            return Counterexample(
                pattern.replicas, behavior_label, stim.input_of(row), j, system.netlist.outputs[j],
                (got >> row) & 1, (exp >> row) & 1, choice,
            )
    return None


def _verify_one(system: RedundantSystem, pattern: FaultPattern, stim: _Stimulus) -> MaskingVerdict:
    net = system.netlist
    q = len(system.golden_module.outputs)
    for i in pattern.replicas:
        system.replica_nets(i)  # range check
    concrete = {}
    adversarial: list[int] = []
    for i, b in pattern.assignments:
        if b is FaultBehavior.ADVERSARIAL:
            adversarial.append(i)
        else:
            for n in system.replica_nets(i):
                concrete[n] = b.overlay_fault()
    kinds = [b.value for _, b in pattern.assignments]
    # mixed patterns carry one behavior per replica so replay can rebuild them
    label = kinds[0] if len(set(kinds)) == 1 else ",".join(kinds)
    if not kinds:
        label = "none"

    def run(forced: dict[str, Fault]):
        vals = simulate_words(net, stim.words, stim.mask, {**concrete, **forced})
        return [vals[o] for o in net.outputs]

    k = len(adversarial)
    if k == 0:
        cex = _first_mismatch(system, stim, run({}), pattern, label, None)
        return MaskingVerdict(cex is None, 1, stim.rows, cex, "concrete", 1)

    full = (1 << q) - 1
    if system.bitwise_independent():
        for c in range(1 << k):
            bits = to_bits(c, k)
            forced = {}
            for i, bit in zip(adversarial, bits):
                f = Fault.STUCK1 if bit else Fault.STUCK0
                forced.update({n: f for n in system.replica_nets(i)})
            cex = _first_mismatch(system, stim, run(forced), pattern, label, tuple(full if b else 0 for b in bits))
            if cex:
                return MaskingVerdict(False, 1, stim.rows, cex, "per-bit", c + 1)
        return MaskingVerdict(True, 1, stim.rows, None, "per-bit", 1 << k)

    if k * q > MAX_WHOLE_VECTOR_BITS:
        raise VerificationError(
            f"voting cones are not bitwise independent and whole-vector enumeration would need "
            f"2**{k * q} simulations; refusing"
        )
    sims = 0
    for words in product(range(1 << q), repeat=k):
        forced = {}
        for i, w in zip(adversarial, words):
            for n, b in zip(system.replica_nets(i), to_bits(w, q)):
                forced[n] = Fault.STUCK1 if b else Fault.STUCK0
        sims += 1
        cex = _first_mismatch(system, stim, run(forced), pattern, label, tuple(words))
        if cex:
            return MaskingVerdict(False, 1, stim.rows, cex, "whole-vector", sims)
    return MaskingVerdict(True, 1, stim.rows, None, "whole-vector", sims)


def verify_masking(
    system: RedundantSystem,
    pattern: FaultPattern | Iterable[int],
    behavior: FaultBehavior | str | None = None,
    *,
    samples: int | None = None,
    seed: int = 0,
) -> MaskingVerdict:
    """Check that ``system`` masks ``pattern`` on every input row.

    ``pattern`` is either a :class:`FaultPattern` or 1-based replica indices
    that all get ``behavior`` (default adversarial). ``samples`` switches to
    random input vectors for modules too wide to enumerate.
    """
    pat = _pattern_of(pattern, behavior)
    return _verify_one(system, pat, stimulus(system, samples, seed))


def _verify_chunk(system, patterns, samples, seed):
    stim = stimulus(system, samples, seed)
    checked = sims = 0
    modes = set()
    for p in patterns:
        v = _verify_one(system, FaultPattern.of(p), stim)
        checked += 1
        sims += v.simulations
        modes.add(v.mode)
        if not v.verified:
            return checked, sims, modes, v.counterexample
    return checked, sims, modes, None


def worker_count(workers: int | None = None) -> int:
    if workers is not None:
        return max(1, int(workers))
    try:
        return max(1, int(os.environ.get("REDUNDIS_THREADS", "1")))
    except ValueError:
        return 1


def verify_patterns(
    system: RedundantSystem,
    patterns: Sequence[tuple[int, ...]],
    *,
    workers: int | None = None,
    samples: int | None = None,
    seed: int = 0,
) -> MaskingVerdict:
    """Adversarial verification over many patterns; the first failing pattern (in order) is reported."""
    stim = stimulus(system, samples, seed)  # guard errors surface before any fan-out
    n = worker_count(workers)
    if n == 1 or len(patterns) < 2 * n:
        results = [_verify_chunk(system, patterns, samples, seed)]
    else:
        size = -(-len(patterns) // n)
        chunks = [patterns[i:i + size] for i in range(0, len(patterns), size)]
        with ProcessPoolExecutor(n) as ex:
            results = list(ex.map(_verify_chunk, [system] * len(chunks), chunks, [samples] * len(chunks), [seed] * len(chunks)))
    checked = sims = 0
    modes: set[str] = set()
    cex = None
    for c, s, m, x in results:
        checked += c
        sims += s
        modes |= m
        if x is not None:
            cex = x
            break
    mode = "/".join(sorted(modes)) or "per-bit"
    return MaskingVerdict(cex is None, checked, stim.rows, cex, mode, sims)


def verify_guarantee(system: RedundantSystem, **kw) -> MaskingVerdict:
    """Adversarial verification of every conforming pattern up to the scheme's conditional tolerance."""
    tol = tolerance(system.scheme)
    patterns = [p for c in range(1, tol.conditional_total + 1) for p in conforming_patterns(system.scheme, c)]
    v = verify_patterns(system, patterns, **kw)
    v.notes.append(f"conditional tolerance {tol.conditional_total}, unconditional {tol.total_guaranteed}")
    return v


def find_counterexample(
    system: RedundantSystem,
    cardinality: int,
    patterns: Sequence[tuple[int, ...]] | None = None,
    **kw,
) -> Counterexample | None:
    """First adversarial witness among non-conforming patterns of ``cardinality``, or None."""
    if patterns is None:
        patterns = non_conforming_patterns(system.scheme, cardinality)
    stim = stimulus(system, kw.get("samples"), kw.get("seed", 0))
    for p in patterns:
        v = _verify_one(system, FaultPattern.of(p), stim)
        if not v.verified:
            return v.counterexample
    return None


def tightness_patterns(scheme: RedundancyScheme) -> tuple[int, list[tuple[int, ...]]]:
    """Smallest non-conforming fault sets that should defeat the scheme."""
    if scheme.kind == "nmr":
        c = (scheme.size + 1) // 2
        return c, non_conforming_patterns(scheme, c)
    return 2, [p for p in combinations(scheme.majority_group, 2)]


def replay(system: RedundantSystem, cex: Counterexample) -> tuple[int, int]:
    """Re-simulate a counterexample one vector at a time; returns ``(got, expected)``."""
    q = len(system.golden_module.outputs)
    p = len(system.golden_module.inputs)
    overlay: dict[str, Fault] = {}
    behaviors = cex.behavior.split(",") if "," in cex.behavior else [cex.behavior] * len(cex.pattern)
    choices = iter(cex.choice or ())
    for i, b in zip(cex.pattern, behaviors):
        b = FaultBehavior(b)
        if b is FaultBehavior.ADVERSARIAL:
            word = next(choices)
            for n, bit in zip(system.replica_nets(i), to_bits(word, q)):
                overlay[n] = Fault.STUCK1 if bit else Fault.STUCK0
        else:
            overlay.update({n: b.overlay_fault() for n in system.replica_nets(i)})
    bits = to_bits(cex.input, p)
    got = evaluate_vector(system.netlist, bits, overlay)[cex.bit]
    expected = evaluate_vector(system.golden_module, bits)[cex.bit]
    return got, expected
