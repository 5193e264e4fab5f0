"""Deterministic decision trees: exact minimax depth, exact minimum
weighted zero-error cost, and the level-weighted query functionals of
the minority-path process.

Both optimizations run over the subcube lattice: a restriction state is
a base-3 code with one trit per variable (0/1 fixed, 2 free), variable
x_j occupying trit place n - j so the all-free state is the last code.
A child state re-fixes one free trit, hence has a smaller code, so a
single ascending sweep sees children before parents.  Ties between
query variables are broken toward the lowest variable index, which
makes witness trees canonical.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from .boolfn import TruthTable, index_to_bits, parse_bits
from .subcube import LabeledPartition, Pattern

MAX_EXACT_VARS = 16
MAX_WEIGHTED_VARS = 8
DEFAULT_MEMORY_LIMIT = 2 * 1024**3


class MemoryGuardError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# trees

@dataclass(frozen=True)
class Leaf:
    value: int


@dataclass(frozen=True)
class Node:
    var: int  # 0-based, so var 0 is x_1
    low: "DecisionTree"  # taken when the queried bit is 0
    high: "DecisionTree"


DecisionTree = Union[Leaf, Node]


def dt_eval(tree: DecisionTree, x: "str | Sequence[int]") -> tuple[int, list[int]]:
    """Run the tree on x; returns (output, variables queried in order)."""
    bits = parse_bits(x)
    queried: list[int] = []
    t = tree
    while isinstance(t, Node):
        queried.append(t.var)
        t = t.high if bits[t.var] else t.low
    return t.value, queried


def tree_depth(tree: DecisionTree) -> int:
    if isinstance(tree, Leaf):
        return 0
    return 1 + max(tree_depth(tree.low), tree_depth(tree.high))


def tree_computes(tree: DecisionTree, f: TruthTable) -> bool:
    return all(
        dt_eval(tree, index_to_bits(idx, f.n))[0] == f.bit(idx)
        for idx in range(f.size)
    )


def tree_to_partition(tree: DecisionTree, n: int) -> LabeledPartition:
    """Leaves of the tree as a labeled partition; each part fixes the
    variables queried on the way down."""
    entries: list[tuple[Pattern, int]] = []

    def walk(t: DecisionTree, assignment: dict[int, int]) -> None:
        if isinstance(t, Leaf):
            chars = ["*"] * n
            for var, b in assignment.items():
                chars[var] = "01"[b]
            entries.append((Pattern("".join(chars)), t.value))
            return
        walk(t.low, {**assignment, t.var: 0})
        walk(t.high, {**assignment, t.var: 1})

    walk(tree, {})
    return LabeledPartition(n, tuple(entries))


# serialized as "(j low high)" with 1-based variable numbers and "=0" /
# "=1" leaves, e.g. "(1 =0 (2 =0 =1))"

def tree_to_text(tree: DecisionTree) -> str:
    if isinstance(tree, Leaf):
        return f"={tree.value}"
    return f"({tree.var + 1} {tree_to_text(tree.low)} {tree_to_text(tree.high)})"


def tree_from_text(text: str) -> DecisionTree:
    tokens = text.replace("(", " ( ").replace(")", " ) ").split()
    pos = 0

    def parse() -> DecisionTree:
        nonlocal pos
        if pos >= len(tokens):
            raise ValueError("unexpected end of tree text")
        tok = tokens[pos]
        pos += 1
        if tok in ("=0", "=1"):
            return Leaf(int(tok[1]))
        if tok != "(":
            raise ValueError(f"unexpected token {tok!r}")
        var = int(tokens[pos]) - 1
        pos += 1
        low = parse()
        high = parse()
        if tokens[pos] != ")":
            raise ValueError("expected ')'")
        pos += 1
        if var < 0:
            raise ValueError("variable numbers are 1-based")
        return Node(var, low, high)

    tree = parse()
    if pos != len(tokens):
        raise ValueError("trailing tokens after tree")
    return tree


def save_tree(tree: DecisionTree, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(tree_to_text(tree) + "\n")


def load_tree(path: str) -> DecisionTree:
    with open(path) as fh:
        return tree_from_text(fh.read().strip())


# ---------------------------------------------------------------------------
# exact minimax depth over the full subcube lattice

def _table_as_array(f: TruthTable) -> np.ndarray:
    raw = f.bits.to_bytes((f.size + 7) // 8, "little")
    return np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")[
        : f.size
    ].astype(np.uint8)


def exact_depth(
    f: TruthTable,
    *,
    want_tree: bool = False,
    memory_limit: int = DEFAULT_MEMORY_LIMIT,
) -> "int | tuple[int, DecisionTree]":
    """Minimum worst-case query count of a deterministic tree computing
    f, by dynamic programming over all 3**n restriction states.  With
    ``want_tree`` also returns a canonical optimal tree."""
    n = f.n
    if n > MAX_EXACT_VARS:
        raise ValueError(f"exact depth supports n <= {MAX_EXACT_VARS}")
    size = 3**n
    # value/color/freecount/argvar arrays plus one int64 level index
    estimate = size * (5 if want_tree else 4) + 12 * _max_level_size(n)
    if estimate > memory_limit:
        raise MemoryGuardError(
            f"estimated {estimate} bytes exceeds limit {memory_limit}"
        )
    pow3 = np.array([3**k for k in range(n)], dtype=np.int64)

    # color: 0/1 constant on the subcube, 2 mixed
    color = np.full(size, 2, dtype=np.uint8)
    idx = np.arange(1 << n, dtype=np.int64)
    code = np.zeros(1 << n, dtype=np.int64)
    for k in range(n):
        code += ((idx >> k) & 1) * int(pow3[k])
    color[code] = _table_as_array(f)
    del idx

    freecount = np.zeros(size, dtype=np.uint8)
    chunk = 1 << 22
    for start in range(0, size, chunk):
        s = np.arange(start, min(start + chunk, size), dtype=np.int64)
        for k in range(n):
            freecount[start : start + s.size] += ((s // int(pow3[k])) % 3 == 2).astype(
                np.uint8
            )

    value = np.zeros(size, dtype=np.uint8)
    argvar = np.full(size, 255, dtype=np.uint8) if want_tree else None

    for u in range(1, n + 1):
        lvl = np.flatnonzero(freecount == u).astype(np.int64)
        # color from any one free trit; scan places until all states hit
        rem = lvl
        for k in range(n):
            if rem.size == 0:
                break
            free_here = (rem // int(pow3[k])) % 3 == 2
            sel = rem[free_here]
            if sel.size:
                c0 = color[sel - 2 * int(pow3[k])]
                c1 = color[sel - int(pow3[k])]
                color[sel] = np.where(c0 == c1, c0, 2)
            rem = rem[~free_here]
        mixed = lvl[color[lvl] == 2]
        del lvl, rem
        if mixed.size == 0:
            continue
        best = np.full(mixed.size, 255, dtype=np.uint8)
        barg = np.full(mixed.size, 255, dtype=np.uint8) if want_tree else None
        # x_1 sits at trit place n-1; descending places = ascending
        # variable index, strict improvement keeps the lowest
        for k in range(n - 1, -1, -1):
            free_here = (mixed // int(pow3[k])) % 3 == 2
            sel = mixed[free_here]
            if sel.size == 0:
                continue
            worst = np.maximum(
                value[sel - 2 * int(pow3[k])], value[sel - int(pow3[k])]
            )
            cur = best[free_here]
            improve = worst < cur
            cur[improve] = worst[improve]
            best[free_here] = cur
            if want_tree:
                assert barg is not None
                ba = barg[free_here]
                ba[improve] = k
                barg[free_here] = ba
        value[mixed] = best + 1
        if want_tree:
            assert argvar is not None and barg is not None
            argvar[mixed] = barg
        del mixed, best, barg

    root = size - 1
    depth = int(value[root]) if color[root] == 2 else 0
    if not want_tree:
        return depth

    assert argvar is not None
    pow3_list = [3**k for k in range(n)]

    def build(state: int) -> DecisionTree:
        if color[state] != 2:
            return Leaf(int(color[state]))
        k = int(argvar[state])
        return Node(
            n - 1 - k,
            build(state - 2 * pow3_list[k]),
            build(state - pow3_list[k]),
        )

    return depth, build(root)


def _max_level_size(n: int) -> int:
    from math import comb

    return max(comb(n, u) * 2 ** (n - u) for u in range(n + 1))


# ---------------------------------------------------------------------------
# minimum weighted zero-error cost

@dataclass(frozen=True)
class CostMatrix:
    """Per-query charges: rows[i][idx] is the price of querying variable
    i (0-based) while the input is idx.  All entries nonnegative."""

    n: int
    rows: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self) -> None:
        if len(self.rows) != self.n:
            raise ValueError(f"expected {self.n} rows")
        for i, row in enumerate(self.rows):
            if len(row) != 1 << self.n:
                raise ValueError(f"row {i} has {len(row)} entries")
            if any(c < 0 for c in row):
                raise ValueError(f"row {i} has a negative charge")

    @classmethod
    def from_lists(cls, n: int, rows: Sequence[Sequence[Fraction]]) -> "CostMatrix":
        return cls(n, tuple(tuple(Fraction(c) for c in row) for row in rows))

    @classmethod
    def uniform(cls, dist: Sequence[Fraction]) -> "CostMatrix":
        """Every query costs the input's probability mass, so tree cost
        is expected query count under the distribution."""
        size = len(dist)
        n = size.bit_length() - 1
        if 1 << n != size:
            raise ValueError("distribution length must be a power of two")
        row = tuple(Fraction(m) for m in dist)
        return cls(n, tuple(row for _ in range(n)))

    def scale(self, factor: Fraction) -> "CostMatrix":
        return CostMatrix(
            self.n, tuple(tuple(c * factor for c in row) for row in self.rows)
        )


def tree_cost(tree: DecisionTree, cost: CostMatrix) -> Fraction:
    """Total charge of the tree: sum over inputs of the charges of the
    queries made on that input."""
    total = Fraction(0)
    for idx in range(1 << cost.n):
        _, queried = dt_eval(tree, index_to_bits(idx, cost.n))
        for i in queried:
            total += cost.rows[i][idx]
    return total


def min_weighted_zero_error(
    f: TruthTable, cost: CostMatrix, *, want_tree: bool = False
) -> "Fraction | tuple[Fraction, DecisionTree]":
    """Minimum of tree_cost over all zero-error trees for f, by exact
    rational DP over the subcube lattice.  Querying variable i on the
    subcube S charges the sum of rows[i] over members of S."""
    n = f.n
    if n != cost.n:
        raise ValueError(f"function arity {n} != cost arity {cost.n}")
    if n > MAX_WEIGHTED_VARS:
        raise ValueError(f"weighted DP supports n <= {MAX_WEIGHTED_VARS}")
    size = 3**n
    pow3 = [3**k for k in range(n)]
    color = bytearray([2]) * size
    member_sum: list[list[Fraction]] = [[Fraction(0)] * size for _ in range(n)]
    fbits = f.bits
    for idx in range(1 << n):
        st = 0
        for k in range(n):
            if (idx >> k) & 1:
                st += pow3[k]
        color[st] = (fbits >> idx) & 1
        for i in range(n):
            member_sum[i][st] = cost.rows[i][idx]

    opt: list[Optional[Fraction]] = [None] * size
    argvar: list[int] = [-1] * size
    for st in range(size):
        trits = []
        c = st
        for _ in range(n):
            trits.append(c % 3)
            c //= 3
        free = [k for k in range(n) if trits[k] == 2]
        if not free:
            opt[st] = Fraction(0)
            continue
        k0 = free[0]
        lo, hi = st - 2 * pow3[k0], st - pow3[k0]
        c0, c1 = color[lo], color[hi]
        color[st] = c0 if c0 == c1 else 2
        for i in range(n):
            member_sum[i][st] = member_sum[i][lo] + member_sum[i][hi]
        if color[st] != 2:
            opt[st] = Fraction(0)
            continue
        best: Optional[Fraction] = None
        barg = -1
        # descending trit place = ascending variable index
        for k in reversed(free):
            olo = opt[st - 2 * pow3[k]]
            ohi = opt[st - pow3[k]]
            assert olo is not None and ohi is not None
            cand = member_sum[n - 1 - k][st] + olo + ohi
            if best is None or cand < best:
                best = cand
                barg = k
        opt[st] = best
        argvar[st] = barg

    root = size - 1
    result = opt[root]
    assert result is not None
    if not want_tree:
        return result

    def build(state: int) -> DecisionTree:
        if color[state] != 2:
            return Leaf(color[state])
        k = argvar[state]
        return Node(n - 1 - k, build(state - 2 * pow3[k]), build(state - pow3[k]))

    return result, build(root)


# ---------------------------------------------------------------------------
# distributional zero-error complexity and the minority-path functionals

def delta0(f: TruthTable, dist: Sequence[Fraction]) -> Fraction:
    """Minimum expected query count under the given input distribution
    over zero-error trees for f."""
    masses = [Fraction(m) for m in dist]
    if len(masses) != f.size:
        raise ValueError(f"distribution length {len(masses)} != {f.size}")
    if any(m < 0 for m in masses):
        raise ValueError("distribution has a negative mass")
    if sum(masses) != 1:
        raise ValueError("distribution does not sum to 1")
    result = min_weighted_zero_error(f, CostMatrix.uniform(masses))
    assert isinstance(result, Fraction)
    return result


class UnsupportedHeight(ValueError):
    pass


def j_value(h: int = 1, level: int = 1) -> Fraction:
    """Minimum over zero-error trees of the expected number of queried
    leaves lying under the level-``level`` node the minority path
    passes through.  At level h that node is the root and this is plain
    expected query count under the hard distribution; at level 0 it
    charges each leaf only when it is itself the minority leaf.  Exact
    rational DP; only height 1 is within its reach."""
    from . import harddist  # local import avoids an import cycle
    from .boolfn import fmaj

    if h != 1 or level not in (0, 1):
        raise UnsupportedHeight(f"j_value supports h=1, level 0 or 1, got ({h}, {level})")
    if level == 1:
        cost = CostMatrix.uniform(harddist.d().dense())
    else:
        cost, _ = harddist.jk_cost_matrices()
    result = min_weighted_zero_error(fmaj(), cost)
    assert isinstance(result, Fraction)
    return result


def k_value(h: int = 1, level: int = 1) -> Fraction:
    """Minimum over zero-error trees of the cross-charge functional that
    prices queries of one child of the minority node against the
    sibling the minority path actually enters."""
    from . import harddist
    from .boolfn import fmaj

    if h != 1 or level != 1:
        raise UnsupportedHeight(f"k_value supports h=1, level=1, got ({h}, {level})")
    _, ck = harddist.jk_cost_matrices()
    result = min_weighted_zero_error(fmaj(), ck)
    assert isinstance(result, Fraction)
    return result
