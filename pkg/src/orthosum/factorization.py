"""Constructive factorization of dominated moment sums.

Given partitions sigma_1..sigma_d of the positions 1..p, each with at least
one non-singleton block, the dominated moment sum factors as one trace of an
ordered product of p group-algebra elements F_1..F_p.  Each F_s couples the
family coefficients to telescoping generator words placed per block, so that
the group trace of a product is 1 exactly when every kernel condition holds
and 0 otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .algebra import (
    MATRIX,
    GroupAlgebraElement,
    OperatorFamily,
    ga_even_norm,
    ga_multiply,
    ga_trace,
    schatten_even_norm,
)
from .errors import DEFAULT_BUDGET, KindError
from .freegroup import Word, WordTuple
from .orthogonality import MomentTable, psi
from .partitions import SetPartition


def xi_family(m: int, n: int) -> list[Callable[[int], GroupAlgebraElement]]:
    """The telescoping family xi_1..xi_m over F_n^(m-1), each a function of i.

    xi_1(i) carries g_i^-1 in the first factor, xi_m(i) carries g_i in the
    last, and each middle xi_r(i) carries g_i in factor r-1 and g_i^-1 in
    factor r.  The trace of xi_1(g(1)) ... xi_m(g(m)) is 1 when g is constant
    and 0 otherwise.
    """
    if m < 2:
        raise ValueError(f"need m >= 2, got {m}")
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")

    def make(r: int) -> Callable[[int], GroupAlgebraElement]:
        def xi(i: int) -> GroupAlgebraElement:
            words = [Word()] * (m - 1)
            if r == 1:
                words[0] = Word(((i, -1),))
            elif r == m:
                words[m - 2] = Word(((i, 1),))
            else:
                words[r - 2] = Word(((i, 1),))
                words[r - 1] = Word(((i, -1),))
            return GroupAlgebraElement.monomial(
                m - 1, n, WordTuple(tuple(words)), np.eye(1)
            )

        return xi

    return [make(r) for r in range(1, m + 1)]


@dataclass(frozen=True)
class BlockAnatomy:
    """Per-position block data of a partition tuple.

    For each coordinate k and position s: ``block_index[k][s-1]`` is the
    0-based block of sigma_k containing s and ``block_rank[k][s-1]`` the
    1-based rank of s inside that block.  ``q[s-1]`` counts the coordinates
    where s is a singleton, and ``b_sets[q]`` lists the positions with that
    count; ``b_sets[d]`` holds the common singletons.
    """

    sigmas: tuple[SetPartition, ...]
    p: int
    block_index: tuple[tuple[int, ...], ...]
    block_rank: tuple[tuple[int, ...], ...]
    q: tuple[int, ...]
    b_sets: tuple[tuple[int, ...], ...]

    @classmethod
    def from_sigmas(cls, sigmas: Sequence[SetPartition]) -> "BlockAnatomy":
        sigmas = tuple(sigmas)
        if not sigmas:
            raise ValueError("need at least one partition")
        p = sigmas[0].ground_size
        if any(s.ground_size != p for s in sigmas):
            raise ValueError("partitions must share a ground size")
        d = len(sigmas)
        block_index = []
        block_rank = []
        for sigma in sigmas:
            idx = [0] * p
            rank = [0] * p
            for j, block in enumerate(sigma.blocks):
                for r, s in enumerate(block, start=1):
                    idx[s - 1] = j
                    rank[s - 1] = r
            block_index.append(tuple(idx))
            block_rank.append(tuple(rank))
        singles = [set(sigma.singleton_elements()) for sigma in sigmas]
        q = tuple(sum(1 for k in range(d) if s in singles[k]) for s in range(1, p + 1))
        b_sets = tuple(
            tuple(s for s in range(1, p + 1) if q[s - 1] == level)
            for level in range(d + 1)
        )
        return cls(
            sigmas=sigmas,
            p=p,
            block_index=tuple(block_index),
            block_rank=tuple(block_rank),
            q=q,
            b_sets=b_sets,
        )

    @property
    def d(self) -> int:
        return len(self.sigmas)

    @property
    def common_singletons(self) -> tuple[int, ...]:
        return self.b_sets[self.d]


def _slot_layout(anatomy: BlockAnatomy) -> tuple[int, dict[tuple[int, int], int]]:
    """Assign m-1 free-group factors to every block of size m >= 2.

    Returns the total factor count and a map (coordinate, block) -> offset.
    """
    offsets: dict[tuple[int, int], int] = {}
    total = 0
    for k, sigma in enumerate(anatomy.sigmas):
        for j, block in enumerate(sigma.blocks):
            if len(block) >= 2:
                offsets[(k, j)] = total
                total += len(block) - 1
    return total, offsets


def build_factors(
    f: OperatorFamily, sigmas: Sequence[SetPartition], p: int
) -> list[GroupAlgebraElement]:
    """The factors F_1..F_p realizing the dominated moment sum as one trace.

    Position s in a block of size m at rank r contributes, in the factors
    assigned to that block, the telescoping word of xi_r; singleton blocks
    contribute nothing.  The coefficient of F_s is f_gamma* for odd s and
    f_gamma for even s, and coefficients of indices that agree on every
    non-singleton coordinate merge by addition.
    """
    if f.kind != MATRIX:
        raise KindError("factor construction needs a matrix-valued family")
    anatomy = BlockAnatomy.from_sigmas(sigmas)
    if anatomy.d != f.d or anatomy.p != p:
        raise ValueError(
            f"partition tuple shape ({anatomy.d}, {anatomy.p}) does not match "
            f"family/posn shape ({f.d}, {p})"
        )
    for sigma in anatomy.sigmas:
        if sigma.num_blocks == p:
            raise ValueError("every partition must exceed the all-singleton one")
    total, offsets = _slot_layout(anatomy)
    dim = f.coeff_dim
    factors = []
    for s in range(1, p + 1):
        terms: dict[WordTuple, np.ndarray] = {}
        for gamma in f.gammas():
            letters: list[Word] = [Word()] * total
            for k in range(f.d):
                j = anatomy.block_index[k][s - 1]
                block_size = len(anatomy.sigmas[k].blocks[j])
                if block_size == 1:
                    continue
                base = offsets[(k, j)]
                r = anatomy.block_rank[k][s - 1]
                i = gamma[k]
                if r == 1:
                    letters[base] = Word(((i, -1),))
                elif r == block_size:
                    letters[base + block_size - 2] = Word(((i, 1),))
                else:
                    letters[base + r - 2] = Word(((i, 1),))
                    letters[base + r - 1] = Word(((i, -1),))
            wt = WordTuple(tuple(letters))
            coeff = f.values[gamma].conj().T if s % 2 else f.values[gamma]
            terms[wt] = terms[wt] + coeff if wt in terms else coeff
        factors.append(
            GroupAlgebraElement.build(total, f.n, (dim, dim), terms)
        )
    return factors


@dataclass(frozen=True)
class FactorizationReport:
    psi_direct: complex
    psi_factored: complex
    abs_err: float


def factorization_check(
    f: OperatorFamily,
    sigmas: Sequence[SetPartition],
    p: int,
    budget: int = DEFAULT_BUDGET,
    table: MomentTable | None = None,
) -> FactorizationReport:
    """Dominated moment sum versus the trace of the ordered factor product."""
    psi_direct = psi(f, sigmas, p, budget, table)
    factors = build_factors(f, sigmas, p)
    acc = factors[0]
    for factor in factors[1:]:
        acc = ga_multiply(acc, factor)
    psi_factored = ga_trace(acc)
    return FactorizationReport(
        psi_direct=psi_direct,
        psi_factored=psi_factored,
        abs_err=abs(psi_direct - psi_factored),
    )


@dataclass(frozen=True)
class FactorRecord:
    s: int
    q: int
    norm: float


@dataclass(frozen=True)
class FactorNormReport:
    records: tuple[FactorRecord, ...]
    sum_norm: float
    bd_max_rel_err: float
    norms_product: float
    psi_abs: float
    holder_ok: bool


def factor_norm_report(
    f: OperatorFamily,
    sigmas: Sequence[SetPartition],
    p: int,
    budget: int = DEFAULT_BUDGET,
    table: MomentTable | None = None,
) -> FactorNormReport:
    """Per-factor even-p norms, the common-singleton equality, and Hoelder.

    Factors at common-singleton positions must match the norm of the family
    sum exactly; the product of all factor norms must dominate the absolute
    value of the factored sum.
    """
    anatomy = BlockAnatomy.from_sigmas(sigmas)
    factors = build_factors(f, sigmas, p)
    check = factorization_check(f, sigmas, p, budget, table)
    records = []
    norms_product = 1.0
    for s, factor in enumerate(factors, start=1):
        norm = ga_even_norm(factor, p, budget)
        records.append(FactorRecord(s=s, q=anatomy.q[s - 1], norm=norm))
        norms_product *= norm
    sum_norm = schatten_even_norm(f.sum_value(), p)
    bd_rel = 0.0
    for s in anatomy.common_singletons:
        err = abs(records[s - 1].norm - sum_norm) / max(sum_norm, 1e-300)
        bd_rel = max(bd_rel, err)
    psi_abs = abs(check.psi_factored)
    holder_ok = bool(psi_abs <= norms_product * (1.0 + 1e-9) + 1e-12)
    return FactorNormReport(
        records=tuple(records),
        sum_norm=sum_norm,
        bd_max_rel_err=bd_rel,
        norms_product=norms_product,
        psi_abs=psi_abs,
        holder_ok=holder_ok,
    )
