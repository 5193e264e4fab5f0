"""Labeled subcube partitions, validation, composition, and the two searches."""

import itertools

import pytest

from qlab.boolfn import IteratedMajority, TruthTable, fmaj
from qlab.subcube import (
    LabeledPartition,
    Pattern,
    canonical_fmaj_partition,
    compose_partitions,
    computes,
    partition_cost,
    partition_from_text,
    partition_to_text,
    save_partition,
    load_partition,
    search_min_cost,
    search_min_weight,
    validate,
)


def all_patterns(n):
    for combo in itertools.product("01*", repeat=n):
        yield Pattern("".join(combo))


def brute_partitions(n):
    """Every partition of the n-cube into subcubes, by direct set cover."""
    pats = list(all_patterns(n))
    full = (1 << (1 << n)) - 1

    def extend(covered, chosen):
        if covered == full:
            yield tuple(chosen)
            return
        lowest = ((covered + 1) & ~covered).bit_length() - 1
        for p in pats:
            mask = p.member_mask() if hasattr(p, "member_mask") else None
            members = list(p.members())
            if lowest not in members:
                continue
            bitmask = 0
            for m in members:
                bitmask |= 1 << m
            if bitmask & covered:
                continue
            chosen.append(p)
            yield from extend(covered | bitmask, chosen)
            chosen.pop()

    yield from extend(0, [])


def brute_min_cost_and_weight(f):
    best_cost = None
    best_weight = None
    for parts in brute_partitions(f.n):
        mono = True
        for p in parts:
            vals = {f.bit(i) for i in p.members()}
            if len(vals) != 1:
                mono = False
                break
        if not mono:
            continue
        cost = max(p.fixed_count for p in parts)
        weight = sum(1 << p.fixed_count for p in parts)
        if best_cost is None or cost < best_cost:
            best_cost = cost
        if best_weight is None or weight < best_weight:
            best_weight = weight
    return best_cost, best_weight


def test_pattern_members_and_contains():
    p = Pattern("01*0")
    assert p.fixed_count == 3
    assert p.free_count == 1
    assert sorted(p.members()) == [0b0100, 0b0110]
    assert p.contains(0b0100) and p.contains(0b0110)
    assert not p.contains(0b0101)


def test_pattern_intersects():
    assert Pattern("0**1").intersects(Pattern("**11"))
    assert not Pattern("1***").intersects(Pattern("0***"))
    assert not Pattern("01*0").intersects(Pattern("111*"))
    assert Pattern("****").intersects(Pattern("1111"))


def test_pattern_rejects_bad_text():
    with pytest.raises(ValueError):
        Pattern("01x0")
    with pytest.raises(ValueError):
        Pattern("")


def test_canonical_partition_shape():
    part = canonical_fmaj_partition()
    assert len(part.entries) == 8
    rep = validate(part)
    assert rep.ok, rep
    assert computes(part, fmaj())
    cost = partition_cost(part)
    assert cost.cost == 3
    assert cost.weight == 64


def test_canonical_partition_labels_match_function():
    f = fmaj()
    for pat, label in canonical_fmaj_partition().entries:
        for idx in pat.members():
            assert f.bit(idx) == label, pat.text


def test_validate_detects_overlap():
    part = LabeledPartition(2, ((Pattern("0*"), 0), (Pattern("*0"), 0), (Pattern("11"), 1)))
    rep = validate(part)
    assert not rep.ok
    assert rep.error == "overlap"


def test_validate_detects_gap():
    part = LabeledPartition(2, ((Pattern("0*"), 0), (Pattern("11"), 1)))
    rep = validate(part)
    assert not rep.ok
    assert rep.error == "gap"


def test_computes_raises_on_invalid_partition():
    part = LabeledPartition(2, ((Pattern("0*"), 0), (Pattern("11"), 1)))
    f = TruthTable.from_values(2, [0, 0, 0, 1])
    with pytest.raises(ValueError):
        computes(part, f)


def test_computes_detects_wrong_label():
    f = TruthTable.from_values(2, [0, 0, 0, 1])
    part = LabeledPartition(2, ((Pattern("0*"), 0), (Pattern("10"), 0), (Pattern("11"), 0)))
    assert validate(part).ok
    assert not computes(part, f)


def test_search_matches_brute_force_on_two_variables():
    for bits in range(16):
        f = TruthTable(2, bits)
        want_cost, want_weight = brute_min_cost_and_weight(f)
        got_weight = search_min_weight(f)
        assert got_weight.weight == want_weight, bits
        found = None
        for budget in range(0, 3):
            res = search_min_cost(f, budget)
            if res.partition is not None:
                found = budget
                break
        assert found == want_cost, bits


def test_search_min_cost_exhausts_below_three():
    res = search_min_cost(fmaj(), 2)
    assert res.partition is None
    assert res.nodes >= 1


def test_search_min_cost_finds_three():
    res = search_min_cost(fmaj(), 3)
    assert res.partition is not None
    part = res.partition
    assert validate(part).ok
    assert computes(part, fmaj())
    assert partition_cost(part).cost == 3


def test_search_min_weight_fmaj():
    res = search_min_weight(fmaj())
    assert res.weight == 64
    assert validate(res.partition).ok
    assert computes(res.partition, fmaj())
    assert partition_cost(res.partition).weight == 64


def test_search_guards_reject_large_inputs():
    g2 = IteratedMajority(2).truth_table()
    with pytest.raises(ValueError):
        search_min_cost(g2, 3)
    with pytest.raises(ValueError):
        search_min_weight(g2)


def test_compose_partitions_canonical_square():
    p = canonical_fmaj_partition()
    comp = compose_partitions(p, p)
    assert len(comp.entries) == 512
    assert {pat.fixed_count for pat, _ in comp.entries} == {9}
    assert validate(comp).ok
    cost = partition_cost(comp)
    assert cost.cost == 9
    assert cost.weight == 512 * 2 ** 9


def test_compose_partitions_computes_composed_function():
    p = canonical_fmaj_partition()
    comp = compose_partitions(p, p)
    assert computes(comp, IteratedMajority(2).truth_table())


def test_compose_agrees_with_membership_semantics():
    # every input's composed label equals the outer label of its per-block
    # inner labels
    p = canonical_fmaj_partition()
    comp = compose_partitions(p, p)
    f = fmaj()

    def inner_label(block):
        for pat, label in p.entries:
            if pat.contains(block):
                return label
        raise AssertionError("no part")

    for idx in range(0, 1 << 16, 4097):
        blocks = [(idx >> (12 - 4 * k)) & 0xF for k in range(4)]
        labels = tuple(inner_label(b) for b in blocks)
        outer = f.bit((labels[0] << 3) | (labels[1] << 2) | (labels[2] << 1) | labels[3])
        hit = [label for pat, label in comp.entries if pat.contains(idx)]
        assert len(hit) == 1
        assert hit[0] == outer


def test_partition_text_round_trip(tmp_path):
    part = canonical_fmaj_partition()
    text = partition_to_text(part)
    back = partition_from_text(text)
    assert back == part
    path = tmp_path / "c.part"
    save_partition(part, path)
    assert load_partition(path) == part


def test_partition_text_rejects_garbage():
    with pytest.raises(ValueError):
        partition_from_text("01x0 0\n")
    with pytest.raises(ValueError):
        partition_from_text("01*0 2\n")
    with pytest.raises(ValueError):
        partition_from_text("01*0 0\n011 1\n")  # mixed widths
