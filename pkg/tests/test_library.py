import itertools
import random

import pytest

from redundis.library import (
    braun_multiplier,
    dmmr_voter,
    full_adder,
    half_adder,
    majority_voter,
    module_by_name,
)
from redundis.netlist import GateKind, validate
from redundis.simulator import evaluate, from_bits, simulate_words, truth_table


def popcount_majority(bits):
    return int(sum(bits) >= (len(bits) + 1) // 2)


def test_full_adder_examples():
    fa = full_adder()
    assert evaluate(fa, {"a": 1, "b": 1, "cin": 1}) == {"sum": 1, "carry": 1}
    assert evaluate(fa, {"a": 1, "b": 0, "cin": 0}) == {"sum": 1, "carry": 0}
    for i, o in truth_table(fa):
        assert o == (sum(i) % 2, int(sum(i) >= 2))


def test_carry_equals_majority3():
    carry = [o[1] for _, o in truth_table(full_adder())]
    maj = [o[0] for _, o in truth_table(majority_voter(3))]
    assert carry == maj


def test_half_adder():
    assert [o for _, o in truth_table(half_adder())] == [(0, 0), (1, 0), (1, 0), (0, 1)]


def _braun_eval(w, a, b):
    m = braun_multiplier(w)
    bits = {f"a{j}": (a >> j) & 1 for j in range(w)} | {f"b{j}": (b >> j) & 1 for j in range(w)}
    out = evaluate(m, bits)
    return from_bits([out[o] for o in m.outputs])


def test_braun4_examples():
    assert _braun_eval(4, 15, 15) == 225
    assert all(_braun_eval(4, 0, x) == 0 for x in range(16))


@pytest.mark.parametrize("w", [2, 3, 4])
def test_braun_exhaustive(w):
    m = braun_multiplier(w)
    assert validate(m) == []
    assert len(m.inputs) == len(m.outputs) == 2 * w
    for i, o in truth_table(m):
        assert from_bits(o) == from_bits(i[:w]) * from_bits(i[w:])


@pytest.mark.parametrize("w", [5, 6, 7, 8])
def test_braun_random_samples(w):
    m = braun_multiplier(w)
    assert validate(m) == []
    rng = random.Random(w)
    samples = [(rng.randrange(1 << w), rng.randrange(1 << w)) for _ in range(10_000)]
    words = {}
    for j in range(w):
        words[f"a{j}"] = sum(1 << r for r, (a, _) in enumerate(samples) if a >> j & 1)
        words[f"b{j}"] = sum(1 << r for r, (_, b) in enumerate(samples) if b >> j & 1)
    vals = simulate_words(m, words, (1 << len(samples)) - 1)
    outs = [vals[o] for o in m.outputs]
    for r, (a, b) in enumerate(samples):
        assert from_bits([(x >> r) & 1 for x in outs]) == a * b


def test_braun_bad_width():
    with pytest.raises(ValueError):
        braun_multiplier(1)


def test_majority3_sop_structure():
    m = majority_voter(3, "sop")
    kinds = sorted((g.kind.value, len(g.ins)) for g in m.gates)
    assert kinds == [("AND", 2), ("AND", 2), ("AND", 2), ("OR", 3)]


def test_majority5_two_ones():
    m = majority_voter(5)
    for bits in itertools.product((0, 1), repeat=5):
        if sum(bits) == 2:
            assert evaluate(m, dict(zip(m.inputs, bits))) == {"MAJ": 0}


@pytest.mark.parametrize("n", [3, 5, 7, 9])
def test_majority_constructions_agree_with_popcount(n):
    sop = truth_table(majority_voter(n, "sop"))
    cnt = truth_table(majority_voter(n, "count"))
    assert sop == cnt
    assert all(o == (popcount_majority(i),) for i, o in sop)


@pytest.mark.parametrize("n", [11, 13, 15])
def test_large_count_compare(n):
    assert all(o == (popcount_majority(i),) for i, o in truth_table(majority_voter(n)))


@pytest.mark.parametrize("n", [3, 5, 7, 9])
def test_majority_monotone_and_self_dual(n):
    table = {i: o[0] for i, o in truth_table(majority_voter(n))}
    for x, y in table.items():
        assert table[tuple(1 - b for b in x)] == 1 - y
        for k in range(n):
            if x[k] == 0:
                up = x[:k] + (1,) + x[k + 1:]
                assert table[up] >= y


@pytest.mark.parametrize("n", [2, 4, 1, 17, 0])
def test_majority_bad_n(n):
    with pytest.raises(ValueError):
        majority_voter(n)


def _dmmr_internal(m, bits):
    v = dmmr_voter(m)
    vals = simulate_words(v, dict(zip(v.inputs, bits)), 1)
    return vals["MAJ"], vals["MIN"], vals["DMMRO"]


def test_dmmr_worked_scenarios():
    # correct value 1; replicas 3 and 5..7 corrupted to 0
    assert _dmmr_internal(7, (1, 1, 0, 1, 0, 0, 0)) == (1, 1, 1)
    # correct value 0; replicas 3 and 5..7 corrupted to 1
    assert _dmmr_internal(7, (0, 0, 1, 0, 1, 1, 1)) == (0, 1, 0)
    assert _dmmr_internal(5, (1,) * 5)[2] == 1


@pytest.mark.parametrize("m", [5, 6, 7])
def test_dmmr_equations_exhaustive(m):
    v = dmmr_voter(m)
    assert validate(v) == []
    for bits in itertools.product((0, 1), repeat=m):
        f = (None,) + bits
        maj = (f[1] & f[2]) | (f[2] & f[3]) | (f[1] & f[3])
        mn = int(any(bits[3:]))
        assert _dmmr_internal(m, bits) == (maj, mn, maj & mn)


@pytest.mark.parametrize("m", [5, 6, 7])
def test_dmmr_properties(m):
    table = {i: o[0] for i, o in truth_table(dmmr_voter(m))}
    for x, y in table.items():
        for k in range(m):
            if x[k] == 0:
                assert table[x[:k] + (1,) + x[k + 1:]] >= y
        if all(x[3:]):
            assert y == popcount_majority(x[:3])
        if x[0] == x[1] == 1:
            assert y == int(any(x[3:]))


def test_dmmr_two_input_variant():
    wide, narrow = dmmr_voter(7), dmmr_voter(7, two_input=True)
    assert truth_table(wide) == truth_table(narrow)
    assert max(len(g.ins) for g in narrow.gates if g.id != "g_maj") == 2


def test_dmmr_bad_m():
    with pytest.raises(ValueError):
        dmmr_voter(4)


def test_module_selectors():
    assert module_by_name("braun4") == braun_multiplier(4)
    assert module_by_name("braun:3") == braun_multiplier(3)
    assert module_by_name("fulladder") == full_adder()
    with pytest.raises(ValueError):
        module_by_name("adder64")


def test_library_gate_kinds_in_range():
    for n in (braun_multiplier(4), majority_voter(9), dmmr_voter(9), full_adder()):
        assert all(g.kind.accepts(len(g.ins)) for g in n.gates)
        assert any(g.kind is GateKind.AND for g in n.gates)
