import re

import pytest

from redundis.library import braun_multiplier, dmmr_voter, full_adder, majority_voter
from redundis.netlist import validate
from redundis.redundancy import (
    RedundancyScheme,
    SchemeError,
    build,
    build_dmmr,
    build_nmr,
    conforms,
    tolerance,
)
from redundis.simulator import Fault, exhaustive_outputs


def test_parse_and_labels():
    assert RedundancyScheme.parse("nmr:5") == RedundancyScheme.nmr(5)
    s = RedundancyScheme.parse("dmmr:3of6")
    assert (s.kind, s.size, s.replicas) == ("dmmr", 6, 6)
    assert str(s) == "dmmr:3of6" and s.label == "3-of-6 DMMR"
    assert RedundancyScheme.nmr(7).label == "7MR"
    assert s.majority_group == (1, 2, 3) and s.minority_group == (4, 5, 6)


@pytest.mark.parametrize("text", ["nmr:4", "nmr:1", "dmmr:3of4", "dmmr:5of7", "tmr", "nmr:x"])
def test_parse_errors(text):
    with pytest.raises(SchemeError):
        RedundancyScheme.parse(text)


def test_parse_even_message():
    with pytest.raises(SchemeError, match="n must be odd"):
        RedundancyScheme.parse("nmr:4")


def test_tolerance_examples():
    t5 = tolerance(RedundancyScheme.nmr(5))
    assert t5.conditional_total == t5.total_guaranteed == 2
    t = tolerance(RedundancyScheme.dmmr(7))
    assert (t.majority_budget, t.minority_budget, t.conditional_total, t.total_guaranteed) == (1, 3, 4, 1)
    assert tolerance(RedundancyScheme.dmmr(5)).conditional_total == 2
    assert tolerance(RedundancyScheme.dmmr(6)).conditional_total == 3
    assert [tolerance(RedundancyScheme.nmr(n)).conditional_total for n in (3, 7, 9)] == [1, 3, 4]


def test_conforms():
    d5 = RedundancyScheme.dmmr(5)
    assert conforms(d5, {1, 4})
    assert not conforms(d5, {1, 2})
    assert not conforms(d5, {4, 5})
    assert conforms(RedundancyScheme.nmr(5), {1, 2})
    assert not conforms(RedundancyScheme.nmr(5), {1, 2, 3})


def _count_gates_with_prefix(netlist, prefix):
    return sum(1 for g in netlist.gates if g.id.startswith(prefix))


def test_build_nmr5_structure(braun4):
    sys = build_nmr(braun4, 5)
    assert validate(sys.netlist) == []
    assert sys.netlist.inputs == braun4.inputs and sys.netlist.outputs == braun4.outputs
    replica_gates = sum(_count_gates_with_prefix(sys.netlist, p) for p in sys.replica_prefixes)
    assert replica_gates == 5 * len(braun4.gates)
    voters = {g.id.split("_")[1] for g in sys.netlist.gates if g.id.startswith("vote_")}
    assert voters == set(braun4.outputs)
    assert len(sys.netlist.gates) == 5 * len(braun4.gates) + 8 * len(majority_voter(5).gates)


def test_build_dmmr5_structure(braun4):
    sys = build_dmmr(braun4, 5)
    assert validate(sys.netlist) == []
    assert len(sys.module_output_nets) == 5
    assert len(sys.netlist.gates) == 5 * len(braun4.gates) + 8 * len(dmmr_voter(5).gates)


@pytest.mark.parametrize("scheme", ["nmr:3", "nmr:5", "nmr:7", "dmmr:3of5", "dmmr:3of6", "dmmr:3of7"])
def test_fault_free_transparency(braun4, scheme):
    sys = build(braun4, scheme)
    assert exhaustive_outputs(sys.netlist) == exhaustive_outputs(braun4)


def test_3mr_masks_one_inverted_replica(braun4):
    sys = build_nmr(braun4, 3)
    golden = exhaustive_outputs(braun4)
    for k in (1, 2, 3):
        overlay = {n: Fault.INVERT for n in sys.replica_nets(k)}
        assert exhaustive_outputs(sys.netlist, overlay) == golden


def test_3mr_two_inverted_replicas_break(braun4):
    sys = build_nmr(braun4, 3)
    overlay = {n: Fault.INVERT for k in (1, 2) for n in sys.replica_nets(k)}
    assert exhaustive_outputs(sys.netlist, overlay) != exhaustive_outputs(braun4)


def test_dmmr6_uses_one_module_less_than_7mr(braun4):
    assert build_nmr(braun4, 7).scheme.replicas - build_dmmr(braun4, 6).scheme.replicas == 1
    assert build_nmr(braun4, 9).scheme.replicas - build_dmmr(braun4, 7).scheme.replicas == 2


@pytest.mark.parametrize("scheme", ["nmr:3", "nmr:9", "dmmr:3of5", "dmmr:3of9"])
def test_bitwise_independence(braun4, scheme):
    assert build(braun4, scheme).bitwise_independent()


def test_replica_isomorphism(braun4):
    sys = build_dmmr(braun4, 6)
    shared = set(braun4.inputs)
    golden = sorted((g.id, g.kind, g.ins, g.out) for g in braun4.gates)
    for pre in sys.replica_prefixes:
        def strip(n):
            return n if n in shared else re.sub("^" + re.escape(pre), "", n)
        mine = sorted(
            (strip(g.id), g.kind, tuple(strip(i) for i in g.ins), strip(g.out))
            for g in sys.netlist.gates if g.id.startswith(pre)
        )
        assert mine == golden


def test_monotone_growth(braun4):
    nmr = [len(build_nmr(braun4, n).netlist.gates) for n in (3, 5, 7, 9)]
    assert nmr == sorted(set(nmr))
    g = len(braun4.gates)
    q = len(braun4.outputs)
    for m in (5, 6, 7, 8):
        a = len(build_dmmr(braun4, m).netlist.gates)
        b = len(build_dmmr(braun4, m + 1).netlist.gates)
        assert b - a == g + q * (len(dmmr_voter(m + 1).gates) - len(dmmr_voter(m).gates))


@pytest.mark.parametrize("bad", [2, 4, 1, 11])
def test_build_nmr_bad_n(braun4, bad):
    with pytest.raises(SchemeError):
        build_nmr(braun4, bad)


@pytest.mark.parametrize("bad", [4, 10])
def test_build_dmmr_bad_m(braun4, bad):
    with pytest.raises(SchemeError):
        build_dmmr(braun4, bad)


def test_voter_construction_recorded():
    fa = full_adder()
    assert build_nmr(fa, 5).voter_construction == "majority-sop"
    assert build_nmr(fa, 7).voter_construction == "majority-count"
    assert build_nmr(fa, 7, "sop").voter_construction == "majority-sop"
    assert build_dmmr(fa, 5).voter_construction == "dmmr"


def test_with_netlist_requires_ports(braun4):
    sys = build_nmr(braun4, 3)
    with pytest.raises(SchemeError):
        sys.with_netlist(braun_multiplier(3))
    with pytest.raises(SchemeError):
        sys.replica_nets(4)
