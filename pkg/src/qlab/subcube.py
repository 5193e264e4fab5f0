"""Labeled subcube partitions of the hypercube.

A subcube is written as a pattern over the alphabet {0, 1, *}: position
j (0-based, so position 0 is x_1) is either fixed to a bit or free.  A
labeled partition is a set of disjoint subcubes covering {0,1}^n, each
carrying an output label; it computes f when every subcube is
f-monochromatic with matching label.  Two cost measures:

  * cost   = max number of fixed positions over the parts, and
  * weight = sum over parts of 2**(fixed positions).

Searches below are exhaustive over a canonical order, so an empty
result is a proof that no partition within the budget exists.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Optional

from .boolfn import TruthTable

MAX_SEARCH_COST_VARS = 5
MAX_SEARCH_WEIGHT_VARS = 4


@dataclass(frozen=True)
class Pattern:
    """One subcube, e.g. Pattern("0*01"): mask has a 1 bit at every
    fixed position (in truth-table bit order), vals holds the fixed
    bits."""

    text: str

    def __post_init__(self) -> None:
        if not re.fullmatch(r"[01*]+", self.text):
            raise ValueError(f"pattern must be over 0/1/*: {self.text!r}")

    @property
    def n(self) -> int:
        return len(self.text)

    @property
    def mask(self) -> int:
        m = 0
        for j, c in enumerate(self.text):
            if c != "*":
                m |= 1 << (self.n - 1 - j)
        return m

    @property
    def vals(self) -> int:
        v = 0
        for j, c in enumerate(self.text):
            if c == "1":
                v |= 1 << (self.n - 1 - j)
        return v

    @property
    def fixed_count(self) -> int:
        return sum(1 for c in self.text if c != "*")

    @property
    def free_count(self) -> int:
        return self.n - self.fixed_count

    def contains(self, idx: int) -> bool:
        return (idx & self.mask) == self.vals

    def members(self) -> Iterator[int]:
        """All input indices inside the subcube."""
        full = (1 << self.n) - 1
        free = full & ~self.mask
        sub = free
        while True:
            yield self.vals | sub
            if sub == 0:
                return
            sub = (sub - 1) & free

    def intersects(self, other: "Pattern") -> bool:
        common = self.mask & other.mask
        return (self.vals & common) == (other.vals & common)

    @classmethod
    def from_mask_vals(cls, n: int, mask: int, vals: int) -> "Pattern":
        chars = []
        for j in range(n):
            bit = 1 << (n - 1 - j)
            if mask & bit:
                chars.append("1" if vals & bit else "0")
            else:
                chars.append("*")
        return cls("".join(chars))


@dataclass(frozen=True)
class LabeledPartition:
    """Subcubes with 0/1 labels, intended to tile {0,1}^n."""

    n: int
    entries: tuple[tuple[Pattern, int], ...]

    def __post_init__(self) -> None:
        for p, z in self.entries:
            if p.n != self.n:
                raise ValueError(f"pattern {p.text} has length {p.n}, expected {self.n}")
            if z not in (0, 1):
                raise ValueError(f"label must be 0 or 1, got {z!r}")

    def __len__(self) -> int:
        return len(self.entries)

    def label_of(self, idx: int) -> Optional[int]:
        for p, z in self.entries:
            if p.contains(idx):
                return z
        return None


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    error: Optional[str] = None  # "overlap" | "gap" | None
    detail: Optional[str] = None


@dataclass(frozen=True)
class PartitionCost:
    cost: int
    weight: int


def validate(part: LabeledPartition) -> ValidationReport:
    """Check pairwise disjointness and exact coverage of {0,1}^n."""
    entries = part.entries
    for a in range(len(entries)):
        pa = entries[a][0]
        for b in range(a + 1, len(entries)):
            pb = entries[b][0]
            if pa.intersects(pb):
                return ValidationReport(
                    False, "overlap", f"{pa.text} and {pb.text} share a point"
                )
    total = sum(1 << p.free_count for p, _ in entries)
    if total != 1 << part.n:
        return ValidationReport(
            False, "gap", f"parts cover {total} of {1 << part.n} points"
        )
    return ValidationReport(True)


def computes(part: LabeledPartition, f: TruthTable) -> bool:
    """True when every part is f-monochromatic with matching label.
    Requires a valid partition, so together this checks f on every
    input exactly once."""
    if part.n != f.n:
        raise ValueError(f"partition arity {part.n} != function arity {f.n}")
    report = validate(part)
    if not report.ok:
        raise ValueError(f"not a partition ({report.error}: {report.detail})")
    for p, z in part.entries:
        for idx in p.members():
            if f.bit(idx) != z:
                return False
    return True


def partition_cost(part: LabeledPartition) -> PartitionCost:
    cost = max(p.fixed_count for p, _ in part.entries)
    weight = sum(1 << p.fixed_count for p, _ in part.entries)
    return PartitionCost(cost, weight)


def canonical_fmaj_partition() -> LabeledPartition:
    """The eight-part tiling of the four-bit gadget with every part
    fixing exactly three positions."""
    entries = tuple(
        (Pattern(text), z)
        for text, z in (
            ("001*", 0),
            ("0*01", 0),
            ("01*0", 0),
            ("*000", 0),
            ("110*", 1),
            ("1*10", 1),
            ("10*1", 1),
            ("*111", 1),
        )
    )
    return LabeledPartition(4, entries)


def compose_partitions(p: LabeledPartition, q: LabeledPartition) -> LabeledPartition:
    """Partition for the block composition f(g, ..., g) given partitions
    for f (outer, on n blocks) and g (inner, on m bits per block): each
    outer part fixing positions i_1 < ... < i_r expands into one
    composed part per choice, for each i_k, of an inner part labeled
    with the bit the outer part fixes there; unfixed blocks stay free."""
    n, m = p.n, q.n
    by_label: dict[int, list[Pattern]] = {0: [], 1: []}
    for pat, z in q.entries:
        by_label[z].append(pat)
    free_block = "*" * m
    out: list[tuple[Pattern, int]] = []
    for outer, z in p.entries:
        fixed_positions = [j for j, c in enumerate(outer.text) if c != "*"]
        blocks_template = [free_block] * n
        choices: list[list[Pattern]] = [
            by_label[int(outer.text[j])] for j in fixed_positions
        ]

        def emit(k: int, blocks: list[str]) -> None:
            if k == len(fixed_positions):
                out.append((Pattern("".join(blocks)), z))
                return
            j = fixed_positions[k]
            for inner in choices[k]:
                blocks[j] = inner.text
                emit(k + 1, blocks)
            blocks[j] = free_block

        emit(0, list(blocks_template))
    return LabeledPartition(n * m, tuple(out))


# ---------------------------------------------------------------------------
# exhaustive searches

def _monochromatic_patterns(f: TruthTable) -> list[tuple[Pattern, int]]:
    """Every f-monochromatic subcube, with its forced label."""
    n = f.n
    out: list[tuple[Pattern, int]] = []
    for code in range(3**n):
        chars = []
        c = code
        for _ in range(n):
            chars.append("01*"[c % 3])
            c //= 3
        pat = Pattern("".join(reversed(chars)))
        it = pat.members()
        z = f.bit(next(it))
        if all(f.bit(idx) == z for idx in it):
            out.append((pat, z))
    return out


def _order_key(pat: Pattern) -> tuple[int, str]:
    # canonical order: fewer fixed positions first, then pattern text
    # with * < 0 < 1
    return (pat.fixed_count, pat.text.replace("*", " "))


@dataclass(frozen=True)
class SearchResult:
    partition: Optional[LabeledPartition]
    nodes: int


def search_min_cost(f: TruthTable, budget: int) -> SearchResult:
    """Exhaustive search for a labeled partition computing f in which
    every part fixes at most ``budget`` positions.  Always covers the
    lowest uncovered input first, so the search space is finite and an
    empty result proves none exists."""
    n = f.n
    if n > MAX_SEARCH_COST_VARS:
        raise ValueError(f"cost search supports n <= {MAX_SEARCH_COST_VARS}")
    cubes = [(p, z) for p, z in _monochromatic_patterns(f) if p.fixed_count <= budget]
    cubes.sort(key=lambda e: _order_key(e[0]))
    per_point: list[list[tuple[Pattern, int]]] = [[] for _ in range(1 << n)]
    for p, z in cubes:
        for idx in p.members():
            per_point[idx].append((p, z))
    full = (1 << (1 << n)) - 1
    nodes = 0
    chosen: list[tuple[Pattern, int]] = []

    def member_bits(p: Pattern) -> int:
        bits = 0
        for idx in p.members():
            bits |= 1 << idx
        return bits

    member_cache = {p.text: member_bits(p) for p, _ in cubes}

    def extend(covered: int) -> bool:
        nonlocal nodes
        nodes += 1
        if covered == full:
            return True
        lowest = ((covered + 1) & ~covered).bit_length() - 1  # lowest uncovered
        for p, z in per_point[lowest]:
            bits = member_cache[p.text]
            if bits & covered:
                continue
            chosen.append((p, z))
            if extend(covered | bits):
                return True
            chosen.pop()
        return False

    found = extend(0)
    if not found:
        return SearchResult(None, nodes)
    part = LabeledPartition(n, tuple(chosen))
    return SearchResult(part, nodes)


@dataclass(frozen=True)
class WeightSearchResult:
    weight: int
    partition: LabeledPartition
    nodes: int


def search_min_weight(f: TruthTable) -> WeightSearchResult:
    """Branch-and-bound over the same canonical order minimizing the
    total weight sum(2**fixed).  The lower bound charges every
    uncovered point the cheapest weight-per-point among cubes that
    could cover it."""
    n = f.n
    if n > MAX_SEARCH_WEIGHT_VARS:
        raise ValueError(f"weight search supports n <= {MAX_SEARCH_WEIGHT_VARS}")
    cubes = _monochromatic_patterns(f)
    cubes.sort(key=lambda e: _order_key(e[0]))
    size = 1 << n
    per_point: list[list[tuple[Pattern, int]]] = [[] for _ in range(size)]
    member_cache: dict[str, int] = {}
    for p, z in cubes:
        bits = 0
        for idx in p.members():
            bits |= 1 << idx
        member_cache[p.text] = bits
        for idx in p.members():
            per_point[idx].append((p, z))
    # cheapest weight-per-point of any cube through each point
    rate: list[Fraction] = []
    for idx in range(size):
        best = min(
            Fraction(1 << p.fixed_count, 1 << p.free_count) for p, _ in per_point[idx]
        )
        rate.append(best)
    full = (1 << size) - 1
    nodes = 0
    best_weight: Optional[int] = None
    best_entries: Optional[tuple[tuple[Pattern, int], ...]] = None
    chosen: list[tuple[Pattern, int]] = []

    def lower_bound(covered: int) -> Fraction:
        lb = Fraction(0)
        rem = ~covered & full
        while rem:
            idx = (rem & -rem).bit_length() - 1
            lb += rate[idx]
            rem &= rem - 1
        return lb

    def extend(covered: int, weight: int) -> None:
        nonlocal nodes, best_weight, best_entries
        nodes += 1
        if covered == full:
            if best_weight is None or weight < best_weight:
                best_weight = weight
                best_entries = tuple(chosen)
            return
        if best_weight is not None and weight + lower_bound(covered) >= best_weight:
            return
        lowest = ((covered + 1) & ~covered).bit_length() - 1
        for p, z in per_point[lowest]:
            bits = member_cache[p.text]
            if bits & covered:
                continue
            chosen.append((p, z))
            extend(covered | bits, weight + (1 << p.fixed_count))
            chosen.pop()

    extend(0, 0)
    assert best_weight is not None and best_entries is not None
    return WeightSearchResult(best_weight, LabeledPartition(n, best_entries), nodes)


# ---------------------------------------------------------------------------
# on-disk format: one "<pattern> <label>" pair per line, '#' comments

def partition_to_text(part: LabeledPartition) -> str:
    lines = [f"{p.text} {z}" for p, z in part.entries]
    return "\n".join(lines) + "\n"


def partition_from_text(text: str) -> LabeledPartition:
    entries: list[tuple[Pattern, int]] = []
    n: Optional[int] = None
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2 or parts[1] not in ("0", "1"):
            raise ValueError(f"expected '<pattern> <label>': {raw!r}")
        pat = Pattern(parts[0])
        if n is None:
            n = pat.n
        elif pat.n != n:
            raise ValueError(f"pattern length mismatch on line {raw!r}")
        entries.append((pat, int(parts[1])))
    if n is None:
        raise ValueError("no patterns in partition text")
    return LabeledPartition(n, tuple(entries))


def save_partition(part: LabeledPartition, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(partition_to_text(part))


def load_partition(path: str) -> LabeledPartition:
    with open(path) as fh:
        return partition_from_text(fh.read())
