"""Index-function combinatorics and the Mobius decomposition of moment sums.

An index function h maps positions 1..p to the grid [n]^d.  Its alternating
moment is the trace of f(h1)* f(h2) f(h3)* ... f(hp); the adjoint pattern can
be flipped with ``adjoint_first=False``, which has no effect on any of the
identities checked here.  Kernel partitions group positions with equal k-th
coordinate, and the decomposition identity rewrites the full moment sum as the
injective-projection part plus a signed Mobius combination of the dominated
sums.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Sequence

import numpy as np

from .algebra import (
    MATRIX,
    OperatorFamily,
    ga_adjoint,
    ga_multiply,
    ga_trace,
    ntrace,
)
from .errors import DEFAULT_BUDGET, check_budget
from .partitions import SetPartition, kernel_partition, mobius, refinements, refines

#: An index function: p multi-indices from [n]^d, 1-based.
IndexFunction = tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class MomentReport:
    max_abs_violation: float
    worst_h: IndexFunction | None
    count_checked: int


@dataclass(frozen=True)
class DecompositionReport:
    lhs: complex
    rhs: complex
    abs_err: float
    injective_sum: complex


def has_injective_projection(h: Sequence[tuple[int, ...]], d: int) -> bool:
    """True iff some coordinate k has pairwise distinct values along h."""
    p = len(h)
    return any(len({gamma[k] for gamma in h}) == p for k in range(d))


def sigma_of(h: Sequence[tuple[int, ...]], k: int) -> SetPartition:
    """Kernel partition of the k-th coordinate function (k is 1-based)."""
    if not h:
        raise ValueError("empty index function")
    if not 1 <= k <= len(h[0]):
        raise ValueError(f"coordinate {k} out of range 1..{len(h[0])}")
    return kernel_partition([gamma[k - 1] for gamma in h])


def delta_of(h: Sequence[tuple[int, ...]]) -> tuple[SetPartition, ...]:
    """The tuple of all d kernel partitions of h."""
    return tuple(sigma_of(h, k) for k in range(1, len(h[0]) + 1))


def _alternate(s: int, adjoint_first: bool) -> bool:
    """Whether position s (1-based) carries the adjoint."""
    return (s % 2 == 1) == adjoint_first


def alternating_moment(
    f: OperatorFamily, h: Sequence[tuple[int, ...]], adjoint_first: bool = True
) -> complex:
    """Trace of the alternating adjoint product f(h1)* f(h2) ... f(hp)."""
    if len(h) % 2:
        raise ValueError("index functions must have even length")
    if f.kind == MATRIX:
        acc = None
        for s, gamma in enumerate(h, start=1):
            v = f.values[gamma]
            m = v.conj().T if _alternate(s, adjoint_first) else v
            acc = m if acc is None else acc @ m
        return ntrace(acc)
    acc = None
    for s, gamma in enumerate(h, start=1):
        v = f.values[gamma]
        e = ga_adjoint(v) if _alternate(s, adjoint_first) else v
        acc = e if acc is None else ga_multiply(acc, e)
    return ga_trace(acc)


def is_p_orthogonal(
    f: OperatorFamily,
    p: int,
    tol: float,
    budget: int = DEFAULT_BUDGET,
    adjoint_first: bool = True,
) -> MomentReport:
    """Largest alternating moment over index functions with an injective projection."""
    if p < 2 or p % 2:
        raise ValueError(f"p must be an even integer >= 2, got {p}")
    check_budget(f.n ** (f.d * p), budget, "index-function enumeration")
    gammas = f.gammas()
    worst: IndexFunction | None = None
    worst_abs = 0.0
    count = 0
    for h in product(gammas, repeat=p):
        if not has_injective_projection(h, f.d):
            continue
        count += 1
        val = abs(alternating_moment(f, h, adjoint_first))
        if val > worst_abs:
            worst_abs = val
            worst = h
    if worst_abs <= tol:
        worst = None
    return MomentReport(max_abs_violation=worst_abs, worst_h=worst, count_checked=count)


class MomentTable:
    """All alternating moments of a family at fixed p, grouped by kernel tuple.

    Precomputes, in one lexicographic pass over index functions:

    * ``total``: the full moment sum (equal to the p-th power of the norm of
      the family sum);
    * ``injective_sum``: the sub-sum over h with an injective projection;
    * ``phi_map``: kernel tuple -> sum of moments of the h with that kernel.
    """

    def __init__(
        self,
        f: OperatorFamily,
        p: int,
        budget: int = DEFAULT_BUDGET,
        adjoint_first: bool = True,
    ):
        if p < 2 or p % 2:
            raise ValueError(f"p must be an even integer >= 2, got {p}")
        check_budget(f.n ** (f.d * p), budget, "index-function enumeration")
        self.family = f
        self.p = p
        self.adjoint_first = adjoint_first
        gammas = f.gammas()
        zero = SetPartition.singletons(p)

        moment = self._moment_fn(f, adjoint_first)
        kern_cache: dict[tuple[int, ...], SetPartition] = {}

        def kern(coords: tuple[int, ...]) -> SetPartition:
            got = kern_cache.get(coords)
            if got is None:
                got = kernel_partition(coords)
                kern_cache[coords] = got
            return got

        total = 0j
        injective = 0j
        phi_map: dict[tuple[SetPartition, ...], complex] = {}
        for h in product(gammas, repeat=p):
            m = moment(h)
            total += m
            eta = tuple(kern(tuple(g[k] for g in h)) for k in range(f.d))
            phi_map[eta] = phi_map.get(eta, 0j) + m
            if zero in eta:
                injective += m
        self.total = total
        self.injective_sum = injective
        self.phi_map = phi_map
        self.count = len(gammas) ** p

    @staticmethod
    def _moment_fn(f: OperatorFamily, adjoint_first: bool):
        """Specialized moment evaluator for the hot enumeration loop."""
        if f.kind == MATRIX:
            plain = {g: f.values[g] for g in f.gammas()}
            adj = {g: v.conj().T for g, v in plain.items()}
            odd, even = (adj, plain) if adjoint_first else (plain, adj)

            def moment(h):
                acc = odd[h[0]]
                for s in range(1, len(h)):
                    acc = acc @ (even[h[s]] if s % 2 else odd[h[s]])
                return complex(np.trace(acc) / acc.shape[0])

            return moment

        if all(v.term_count <= 1 for v in f.values.values()):
            # single-term elements: track one word and one coefficient chain
            def pair(v, adjoint):
                if not v.terms:
                    return None
                (wt, c), = v.terms.items()
                return (wt.inverse(), c.conj().T) if adjoint else (wt, c)

            plain_p = {g: pair(f.values[g], False) for g in f.gammas()}
            adj_p = {g: pair(f.values[g], True) for g in f.gammas()}
            odd_p, even_p = (adj_p, plain_p) if adjoint_first else (plain_p, adj_p)

            def moment(h):
                first = odd_p[h[0]]
                if first is None:
                    return 0j
                wt, coeff = first
                for s in range(1, len(h)):
                    entry = even_p[h[s]] if s % 2 else odd_p[h[s]]
                    if entry is None:
                        return 0j
                    wt = wt * entry[0]
                    coeff = coeff @ entry[1]
                if not wt.is_identity:
                    return 0j
                return complex(np.trace(coeff) / coeff.shape[0])

            return moment

        def moment(h):
            return alternating_moment(f, h, adjoint_first)

        return moment


def moment_table(
    f: OperatorFamily,
    p: int,
    budget: int = DEFAULT_BUDGET,
    adjoint_first: bool = True,
) -> MomentTable:
    return MomentTable(f, p, budget, adjoint_first)


def _check_partition_tuple(entries: Sequence[SetPartition], d: int, p: int) -> None:
    if len(entries) != d:
        raise ValueError(f"expected {d} partitions, got {len(entries)}")
    for sigma in entries:
        if sigma.ground_size != p:
            raise ValueError(f"partition ground size {sigma.ground_size} != {p}")


def phi(
    f: OperatorFamily,
    eta: Sequence[SetPartition],
    p: int,
    budget: int = DEFAULT_BUDGET,
    table: MomentTable | None = None,
) -> complex:
    """Sum of alternating moments over exactly the h with kernel tuple eta."""
    _check_partition_tuple(eta, f.d, p)
    if table is None:
        table = moment_table(f, p, budget)
    return table.phi_map.get(tuple(eta), 0j)


def psi(
    f: OperatorFamily,
    sigmas: Sequence[SetPartition],
    p: int,
    budget: int = DEFAULT_BUDGET,
    table: MomentTable | None = None,
) -> complex:
    """Sum of alternating moments over h whose kernels dominate each sigma_k."""
    _check_partition_tuple(sigmas, f.d, p)
    if table is None:
        table = moment_table(f, p, budget)
    acc = 0j
    for eta, val in table.phi_map.items():
        if all(refines(sigmas[k], eta[k]) for k in range(f.d)):
            acc += val
    return acc


def mobius_decomposition_check(
    f: OperatorFamily,
    p: int,
    budget: int = DEFAULT_BUDGET,
    adjoint_first: bool = True,
) -> DecompositionReport:
    """Compare the full moment sum against its injective + Mobius resummation.

    The right-hand side is the injective-projection part plus
    (-1)^d * sum over partition tuples (all strictly above the singleton
    partition) of the Mobius weights times the dominated sums; the inner sums
    are evaluated by grouping index functions by kernel tuple.
    """
    table = moment_table(f, p, budget, adjoint_first)
    lhs = table.total
    zero = SetPartition.singletons(p)
    parts = sorted({part for eta in table.phi_map for part in eta})
    # weight(eta_k) = sum of mu(0., sigma) over 0. < sigma <= eta_k
    weight: dict[SetPartition, int] = {}
    for part in parts:
        weight[part] = sum(
            mobius(zero, sigma) for sigma in refinements(part) if sigma != zero
        )
    noninjective = 0j
    for eta, val in table.phi_map.items():
        w = 1
        for part in eta:
            w *= weight[part]
        noninjective += w * val
    rhs = table.injective_sum + (-1) ** f.d * noninjective
    return DecompositionReport(
        lhs=lhs,
        rhs=rhs,
        abs_err=abs(lhs - rhs),
        injective_sum=table.injective_sum,
    )
