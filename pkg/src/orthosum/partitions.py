"""Set partitions of {1..m}: lattice enumeration, refinement order, Mobius inversion.

Everything here is exact integer combinatorics on immutable values, so all
operations are safe to call concurrently and identity sweeps can be split
across workers with order-independent integer accumulation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Hashable, Iterable, Sequence

from .errors import SizeLimitError

#: Bell(12) = 4,213,597 partitions is the practical enumeration ceiling.
MAX_ENUMERATION_SIZE = 12
#: Identity sweeps visit every refinement pair and stop earlier.
MAX_IDENTITY_SIZE = 9


@dataclass(frozen=True, order=True)
class SetPartition:
    """A partition of {1..m} into non-empty disjoint blocks, canonically stored.

    Blocks are ordered by least element with elements ascending, so two
    partitions are equal iff their fields compare equal.
    """

    ground_size: int
    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        elements = [e for block in self.blocks for e in block]
        if len(elements) != self.ground_size or set(elements) != set(
            range(1, self.ground_size + 1)
        ):
            raise ValueError(
                f"blocks {self.blocks} do not partition 1..{self.ground_size}"
            )
        least = None
        for block in self.blocks:
            if not block:
                raise ValueError("empty block")
            if list(block) != sorted(block):
                raise ValueError(f"block {block} not ascending")
            if least is not None and block[0] < least:
                raise ValueError("blocks not ordered by least element")
            least = block[0]

    @classmethod
    def from_blocks(
        cls, blocks: Iterable[Iterable[int]], ground_size: int | None = None
    ) -> "SetPartition":
        """Build a partition from blocks in any order, canonicalizing them."""
        canon = sorted((tuple(sorted(b)) for b in blocks), key=lambda b: b[0] if b else 0)
        if ground_size is None:
            ground_size = max((b[-1] for b in canon if b), default=0)
        return cls(ground_size, tuple(canon))

    @classmethod
    def singletons(cls, m: int) -> "SetPartition":
        """The minimal partition: every element is its own block."""
        return cls(m, tuple((i,) for i in range(1, m + 1)))

    @classmethod
    def one_block(cls, m: int) -> "SetPartition":
        """The maximal partition {{1..m}}."""
        return cls(m, (tuple(range(1, m + 1)),))

    @property
    def num_blocks(self) -> int:
        return len(self.blocks)

    def block_map(self) -> dict[int, int]:
        """Element -> position of its block in the canonical ordering."""
        out = {}
        for i, block in enumerate(self.blocks):
            for e in block:
                out[e] = i
        return out

    def singleton_elements(self) -> tuple[int, ...]:
        return tuple(b[0] for b in self.blocks if len(b) == 1)

    def __str__(self) -> str:
        return format_partition(self)


def _rgs_strings(m: int):
    """Yield all restricted growth strings of length m in ascending lex order."""
    a = [0] * m
    b = [1] * m  # b[i] = 1 + max(a[:i]); a[i] may range over 0..b[i]
    while True:
        yield tuple(a)
        i = m - 1
        while i >= 1 and a[i] == b[i]:
            i -= 1
        if i == 0:
            return
        a[i] += 1
        top = max(b[i], a[i] + 1)
        for j in range(i + 1, m):
            a[j] = 0
            b[j] = top


def _from_rgs(rgs: Sequence[int]) -> SetPartition:
    blocks: list[list[int]] = []
    for pos, label in enumerate(rgs, start=1):
        if label == len(blocks):
            blocks.append([pos])
        else:
            blocks[label].append(pos)
    # first-appearance order is exactly the canonical order
    return SetPartition(len(rgs), tuple(tuple(b) for b in blocks))


def all_partitions(m: int) -> list[SetPartition]:
    """Every partition of {1..m} exactly once, finest first, coarsest last.

    The order is restricted-growth-string lexicographic read backwards, so the
    all-singletons partition comes first and {{1..m}} comes last; it is stable
    across runs.
    """
    if not 1 <= m <= MAX_ENUMERATION_SIZE:
        raise SizeLimitError(
            f"partition enumeration supports 1 <= m <= {MAX_ENUMERATION_SIZE}, got {m}"
        )
    out = [_from_rgs(r) for r in _rgs_strings(m)]
    out.reverse()
    return out


@lru_cache(maxsize=16)
def _partitions_cached(m: int) -> tuple[SetPartition, ...]:
    return tuple(all_partitions(m))


@lru_cache(maxsize=1 << 18)
def refines(rho: SetPartition, sigma: SetPartition) -> bool:
    """True iff rho <= sigma, i.e. every block of rho sits inside a block of sigma."""
    if rho.ground_size != sigma.ground_size:
        raise ValueError(
            f"ground sizes differ: {rho.ground_size} vs {sigma.ground_size}"
        )
    where = sigma.block_map()
    for block in rho.blocks:
        target = where[block[0]]
        if any(where[e] != target for e in block[1:]):
            return False
    return True


def kernel_partition(values: Sequence[Hashable]) -> SetPartition:
    """Group positions 1..m by equal values: r ~ s iff values[r-1] == values[s-1]."""
    if not values:
        raise ValueError("kernel_partition needs at least one value")
    groups: dict[Hashable, list[int]] = {}
    for pos, v in enumerate(values, start=1):
        groups.setdefault(v, []).append(pos)
    # insertion order == order of first occurrence == canonical block order
    return SetPartition(len(values), tuple(tuple(g) for g in groups.values()))


def mobius(rho: SetPartition, sigma: SetPartition) -> int:
    """Mobius function of the refinement order, in exact integer arithmetic.

    Uses the product formula over the blocks B of sigma: each contributes
    (-1)^(n_B - 1) * (n_B - 1)! where n_B counts the blocks of rho inside B.
    """
    if not refines(rho, sigma):
        raise ValueError("mobius requires rho <= sigma")
    where = sigma.block_map()
    counts = [0] * sigma.num_blocks
    for block in rho.blocks:
        counts[where[block[0]]] += 1
    out = 1
    for n_b in counts:
        out *= (-1) ** (n_b - 1) * math.factorial(n_b - 1)
    return out


def refinements(sigma: SetPartition) -> list[SetPartition]:
    """All rho <= sigma, built blockwise (the interval [0., sigma])."""
    per_block: list[list[tuple[tuple[int, ...], ...]]] = []
    for block in sigma.blocks:
        size = len(block)
        relabeled = []
        for q in _partitions_cached(size):
            relabeled.append(tuple(tuple(block[e - 1] for e in qb) for qb in q.blocks))
        per_block.append(relabeled)
    out = []
    for choice in product(*per_block):
        blocks = [b for part in choice for b in part]
        out.append(SetPartition.from_blocks(blocks, sigma.ground_size))
    return out


def interval(rho: SetPartition, sigma: SetPartition) -> list[SetPartition]:
    """All pi with rho <= pi <= sigma."""
    if not refines(rho, sigma):
        raise ValueError("interval requires rho <= sigma")
    return [pi for pi in refinements(sigma) if refines(rho, pi)]


def mobius_recursive(rho: SetPartition, sigma: SetPartition) -> int:
    """Independent Mobius oracle: mu(rho,rho) = 1 and interval sums vanish.

    Computed by enumerating the interval [rho, sigma] and solving the
    recursion mu(rho, pi) = -sum of mu(rho, pi') over rho <= pi' < pi.
    No closed form is used, so this cross-checks :func:`mobius`.
    """
    members = interval(rho, sigma)
    members.sort(key=lambda p: -p.num_blocks)  # finest first
    values: dict[SetPartition, int] = {}
    for pi in members:
        if pi == rho:
            values[pi] = 1
            continue
        acc = 0
        for prev, val in values.items():
            if prev != pi and refines(prev, pi):
                acc += val
        values[pi] = -acc
    return values[sigma]


@dataclass(frozen=True)
class MobiusIdentityReport:
    abs_sum: int
    interval_sums_ok: bool


def verify_mobius_identities(m: int) -> MobiusIdentityReport:
    """Check sum of |mu(0., sigma)| = m! and vanishing interval sums on P_m.

    ``abs_sum`` is the exact integer total; ``interval_sums_ok`` is True iff
    every sigma above the minimal partition has a vanishing interval sum
    (vacuously true for m = 1).
    """
    if not 1 <= m <= MAX_IDENTITY_SIZE:
        raise SizeLimitError(
            f"identity sweeps support 1 <= m <= {MAX_IDENTITY_SIZE}, got {m}"
        )
    zero = SetPartition.singletons(m)
    parts = _partitions_cached(m)
    abs_sum = sum(abs(mobius(zero, sigma)) for sigma in parts)
    ok = True
    for sigma in parts:
        if sigma == zero:
            continue
        if sum(mobius(rho, sigma) for rho in refinements(sigma)) != 0:
            ok = False
            break
    return MobiusIdentityReport(abs_sum=abs_sum, interval_sums_ok=ok)


def format_partition(p: SetPartition) -> str:
    """Render blocks as '1,3|2|4'."""
    return "|".join(",".join(str(e) for e in block) for block in p.blocks)


def parse_partition(text: str) -> SetPartition:
    """Parse '1,3|2|4', optionally prefixed with an explicit size as 'm=4:1,3|2'.

    Without the prefix the ground size is the largest element mentioned.
    """
    text = text.strip()
    ground = None
    if text.startswith("m="):
        head, _, rest = text.partition(":")
        ground = int(head[2:])
        text = rest
    if not text:
        raise ValueError("empty partition text")
    blocks = [
        tuple(int(e) for e in chunk.split(",") if e.strip() != "")
        for chunk in text.split("|")
    ]
    return SetPartition.from_blocks(blocks, ground)
