"""Truth tables, the tie-favoring 4-bit majority, and block composition."""

import pytest

from qlab.boolfn import (
    IteratedMajority,
    MAX_VARS,
    TreeAddress,
    TruthTable,
    bits_to_index,
    compose,
    fmaj,
    index_to_bits,
    iter_eval,
    load_table,
    node_value,
    parse_bits,
    save_table,
    table_from_text,
    table_to_text,
)


def formula_reference(bits):
    # independent transcription: x1 and (x2 or x3 or x4), or x2 and x3 and x4
    x1, x2, x3, x4 = bits
    return (x1 & (x2 | x3 | x4)) | (x2 & x3 & x4)


def majority5_reference(bits):
    # doubling the first vote in a 5-way majority is the same function
    x1, x2, x3, x4 = bits
    return 1 if 2 * x1 + x2 + x3 + x4 >= 3 else 0


def test_parse_bits_accepts_strings_and_sequences():
    assert parse_bits("1010") == (1, 0, 1, 0)
    assert parse_bits([1, 0]) == (1, 0)
    assert parse_bits((0,)) == (0,)
    with pytest.raises(ValueError):
        parse_bits("10x0")
    with pytest.raises(ValueError):
        parse_bits([0, 2])


def test_index_convention_first_bit_most_significant():
    assert bits_to_index("1000") == 8
    assert bits_to_index("0001") == 1
    assert bits_to_index("1100") == 12
    for i in range(16):
        assert bits_to_index(index_to_bits(i, 4)) == i


def test_fmaj_matches_formula_on_all_inputs():
    f = fmaj()
    assert f.n == 4
    for i in range(16):
        bits = index_to_bits(i, 4)
        assert f.bit(i) == formula_reference(bits), bits


def test_fmaj_equals_doubled_first_vote_majority():
    f = fmaj()
    for i in range(16):
        assert f.bit(i) == majority5_reference(index_to_bits(i, 4))


def test_fmaj_packed_value():
    # frozen from the formula oracle above
    assert fmaj().bits == 0xFE80


def test_fmaj_point_evaluations():
    f = fmaj()
    assert f.eval("1100") == 1
    assert f.eval("0011") == 0
    assert f.eval("1000") == 0
    assert f.eval("0111") == 1
    assert f.eval("1010") == 1


def test_truth_table_from_values_round_trip():
    vals = [formula_reference(index_to_bits(i, 4)) for i in range(16)]
    t = TruthTable.from_values(4, vals)
    assert t == fmaj()
    assert list(t.ones()) == [i for i in range(16) if vals[i]]


def test_constant_tables():
    zero = TruthTable.constant(3, 0)
    one = TruthTable.constant(3, 1)
    assert zero.is_constant() and one.is_constant()
    assert not fmaj().is_constant()
    assert zero.bits == 0 and one.bits == (1 << 8) - 1


def test_table_rejects_out_of_range():
    with pytest.raises(ValueError):
        TruthTable(2, 1 << 4)
    with pytest.raises(ValueError):
        TruthTable(MAX_VARS + 1, 0)
    with pytest.raises(ValueError):
        fmaj().bit(16)


def test_compose_block_order():
    # outer variable 1 reads the most significant block
    f = fmaj()
    g2 = compose(f, f)
    assert g2.n == 16
    inner = ["0111", "1000", "1000", "1000"]
    outer_bits = tuple(f.eval(b) for b in inner)
    assert outer_bits == (1, 0, 0, 0)
    assert g2.eval("".join(inner)) == f.eval(outer_bits) == 0
    inner = ["1000", "0111", "0111", "0111"]
    assert g2.eval("".join(inner)) == f.eval((0, 1, 1, 1)) == 1


def test_iterated_majority_heights():
    assert IteratedMajority(0).truth_table() == TruthTable(1, 0b10)
    assert IteratedMajority(1).truth_table() == fmaj()
    g2 = IteratedMajority(2)
    assert g2.truth_table() == compose(fmaj(), fmaj())
    assert g2.eval("0111100010001000") == 0


def test_iter_eval_matches_table():
    g2 = IteratedMajority(2).truth_table()
    for i in range(0, 1 << 16, 997):
        bits = index_to_bits(i, 16)
        assert iter_eval(2, bits) == g2.bit(i)


def test_node_value_inner_nodes():
    x = parse_bits("0111100010001000")
    quarters = ["0111", "1000", "1000", "1000"]
    f = fmaj()
    for k in range(4):
        v = TreeAddress(1, k)
        assert node_value(2, x, v) == f.eval(quarters[k])
    assert node_value(2, x, TreeAddress(2, 0)) == 0
    leaf = TreeAddress(0, 5)
    assert node_value(2, x, leaf) == x[5]


def test_tree_address_structure():
    root = TreeAddress(2, 0)
    kids = root.children()
    assert [c.index for c in kids] == [0, 1, 2, 3]
    assert all(c.level == 1 for c in kids)
    assert kids[2].children()[1] == TreeAddress(0, 9)
    assert TreeAddress(0, 9).parent() == kids[2]
    assert root.leaf_range() == range(0, 16)
    assert kids[1].leaf_range() == range(4, 8)
    with pytest.raises(ValueError):
        TreeAddress(0, 0).children()


def test_table_text_round_trip(tmp_path):
    f = fmaj()
    text = table_to_text(f)
    assert text.splitlines()[0] == "n=4"
    assert table_from_text(text) == f
    path = tmp_path / "f.tt"
    save_table(f, path)
    assert load_table(path) == f
    g2 = IteratedMajority(2).truth_table()
    save_table(g2, path)
    assert load_table(path) == g2


def test_table_text_rejects_garbage():
    with pytest.raises(ValueError):
        table_from_text("n=4\nzz\n")
    with pytest.raises(ValueError):
        table_from_text("4\nfe80\n")
    with pytest.raises(ValueError):
        table_from_text("n=2\nfe80\n")
