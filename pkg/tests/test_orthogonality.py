"""Moments, kernel partitions, and the decomposition identity, with brute-force sums."""

from itertools import product

import numpy as np
import pytest

from orthosum.algebra import MATRIX, OperatorFamily, family_scale
from orthosum.errors import SizeLimitError
from orthosum.freegroup import gamma_indices
from orthosum.lab import FamilySpec, make_family
from orthosum.orthogonality import (
    alternating_moment,
    delta_of,
    has_injective_projection,
    is_p_orthogonal,
    mobius_decomposition_check,
    moment_table,
    phi,
    psi,
    sigma_of,
)
from orthosum.partitions import SetPartition, all_partitions, refines


def rng(seed=0):
    return np.random.default_rng(seed)


def rand_matrix(r, dim):
    return r.standard_normal((dim, dim)) + 1j * r.standard_normal((dim, dim))


def random_family(n, d, dim, seed):
    r = rng(seed)
    return OperatorFamily(
        n, d, MATRIX, {g: rand_matrix(r, dim) for g in gamma_indices(n, d)}
    )


def all_index_functions(n, d, p):
    return product(gamma_indices(n, d), repeat=p)


def test_has_injective_projection():
    assert not has_injective_projection(((1, 1), (1, 1)), 2)
    assert has_injective_projection(((1,), (2,), (3,), (4,)), 1)
    assert has_injective_projection(((1, 1), (1, 2)), 2)
    assert not has_injective_projection(((1, 1), (1, 2), (2, 1), (2, 2)), 2)


def test_alternating_moment_identity_family():
    fam = OperatorFamily(
        2, 1, MATRIX, {(1,): np.eye(3), (2,): np.eye(3)}
    )
    assert alternating_moment(fam, ((1,), (2,), (1,), (2,))) == pytest.approx(1.0)


def test_alternating_moment_free_generators_vanishes_exactly():
    fam = make_family(FamilySpec("free_generators", n=2, d=2, p=2))
    h = ((1, 1), (1, 2))  # second coordinate injective
    assert has_injective_projection(h, 2)
    assert alternating_moment(fam, h) == 0


def test_alternating_moment_disjoint_diagonal_supports():
    e11 = np.diag([1.0, 0.0]).astype(complex)
    e22 = np.diag([0.0, 1.0]).astype(complex)
    fam = OperatorFamily(2, 1, MATRIX, {(1,): e11, (2,): e22})
    assert alternating_moment(fam, ((1,), (2,))) == 0


def test_alternating_moment_flip_order():
    fam = random_family(2, 1, 2, seed=3)
    h = ((1,), (2,))
    a = alternating_moment(fam, h, adjoint_first=True)
    b = alternating_moment(fam, h, adjoint_first=False)
    v1, v2 = fam.values[(1,)], fam.values[(2,)]
    assert a == pytest.approx(np.trace(v1.conj().T @ v2) / 2)
    assert b == pytest.approx(np.trace(v1 @ v2.conj().T) / 2)


def test_sigma_of_examples():
    h = ((1, 1), (1, 1), (2, 1), (2, 2))
    assert sigma_of(h, 1) == SetPartition.from_blocks([[1, 2], [3, 4]])
    assert sigma_of(h, 2) == SetPartition.from_blocks([[1, 2, 3], [4]])
    constant = ((1, 1),) * 4
    assert sigma_of(constant, 1) == SetPartition.one_block(4)
    inj = ((1,), (2,), (3,), (4,))
    assert sigma_of(inj, 1) == SetPartition.singletons(4)
    with pytest.raises(ValueError):
        sigma_of(h, 3)


def test_is_p_orthogonal_free_generators():
    fam = make_family(FamilySpec("free_generators", n=2, d=2, p=4))
    report = is_p_orthogonal(fam, 4, 0.0)
    assert report.max_abs_violation == 0.0
    assert report.worst_h is None


def test_is_p_orthogonal_identity_family_fails():
    fam = OperatorFamily(2, 1, MATRIX, {(1,): np.eye(2), (2,): np.eye(2)})
    report = is_p_orthogonal(fam, 2, 1e-9)
    assert report.max_abs_violation == pytest.approx(1.0)
    assert report.worst_h is not None
    assert has_injective_projection(report.worst_h, 1)


def test_is_p_orthogonal_rademacher():
    fam = make_family(FamilySpec("rademacher", n=2, d=2, p=4, seed=5))
    report = is_p_orthogonal(fam, 4, 1e-12)
    assert report.max_abs_violation <= 1e-12


def test_is_p_orthogonal_budget():
    fam = random_family(2, 2, 2, seed=1)
    with pytest.raises(SizeLimitError):
        is_p_orthogonal(fam, 4, 1e-9, budget=10)


def brute_force_phi(fam, eta, p):
    acc = 0j
    for h in all_index_functions(fam.n, fam.d, p):
        if delta_of(h) == tuple(eta):
            acc += alternating_moment(fam, h)
    return acc


def brute_force_psi(fam, sigmas, p):
    acc = 0j
    for h in all_index_functions(fam.n, fam.d, p):
        kernels = delta_of(h)
        if all(refines(sigmas[k], kernels[k]) for k in range(fam.d)):
            acc += alternating_moment(fam, h)
    return acc


def test_phi_impossible_kernel_is_zero():
    fam = random_family(2, 1, 2, seed=7)
    eta = (SetPartition.singletons(4),)  # 4 blocks > n = 2 values
    assert phi(fam, eta, 4) == 0


def test_phi_top_kernel_is_constant_sum():
    fam = random_family(2, 2, 2, seed=8)
    eta = (SetPartition.one_block(4), SetPartition.one_block(4))
    expect = sum(
        alternating_moment(fam, (g,) * 4) for g in gamma_indices(2, 2)
    )
    assert phi(fam, eta, 4) == pytest.approx(expect)


@pytest.mark.parametrize("n,d,p,dim", [(2, 1, 4, 2), (2, 2, 4, 2)])
def test_phi_sums_to_total_moment(n, d, p, dim):
    fam = random_family(n, d, dim, seed=n * 10 + d)
    table = moment_table(fam, p)
    total_by_phi = sum(
        phi(fam, eta, p, table=table)
        for eta in product(all_partitions(p), repeat=d)
    )
    total = sum(alternating_moment(fam, h) for h in all_index_functions(n, d, p))
    scale = family_scale(fam, p)
    assert abs(total_by_phi - total) <= 1e-10 * scale
    assert abs(table.total - total) <= 1e-10 * scale


def test_phi_matches_brute_force():
    fam = random_family(2, 2, 2, seed=9)
    eta = (
        SetPartition.from_blocks([[1, 2], [3, 4]]),
        SetPartition.from_blocks([[1, 3], [2, 4]]),
    )
    assert phi(fam, eta, 4) == pytest.approx(brute_force_phi(fam, eta, 4))


def test_psi_no_constraint_gives_total():
    fam = random_family(2, 2, 2, seed=10)
    sig = (SetPartition.singletons(4), SetPartition.singletons(4))
    total = sum(alternating_moment(fam, h) for h in all_index_functions(2, 2, 4))
    assert psi(fam, sig, 4) == pytest.approx(total)


def test_psi_top_constraint_gives_constant_sum():
    fam = random_family(2, 2, 2, seed=11)
    sig = (SetPartition.one_block(4), SetPartition.one_block(4))
    expect = sum(alternating_moment(fam, (g,) * 4) for g in gamma_indices(2, 2))
    assert psi(fam, sig, 4) == pytest.approx(expect)


def test_psi_equals_sum_of_dominating_phi():
    fam = random_family(2, 2, 2, seed=12)
    table = moment_table(fam, 4)
    sig = (
        SetPartition.from_blocks([[1, 2], [3], [4]]),
        SetPartition.from_blocks([[1], [2], [3, 4]]),
    )
    by_phi = sum(
        phi(fam, eta, 4, table=table)
        for eta in product(all_partitions(4), repeat=2)
        if refines(sig[0], eta[0]) and refines(sig[1], eta[1])
    )
    direct = brute_force_psi(fam, sig, 4)
    assert psi(fam, sig, 4, table=table) == pytest.approx(by_phi)
    assert psi(fam, sig, 4, table=table) == pytest.approx(direct)


def test_decomposition_single_index_pair_is_exact():
    # integer entries make both sides exact in floating point
    fam = OperatorFamily(
        2,
        1,
        MATRIX,
        {(1,): np.array([[1.0, 2.0], [0.0, 1.0]]), (2,): np.array([[3.0, 0.0], [1.0, 1.0]])},
    )
    report = mobius_decomposition_check(fam, 2)
    assert report.abs_err == 0.0


@pytest.mark.parametrize("seed", range(3))
def test_decomposition_random_matrix_family(seed):
    fam = random_family(2, 2, 3, seed=100 + seed)
    report = mobius_decomposition_check(fam, 4)
    assert report.abs_err <= 1e-9 * family_scale(fam, 4)


def test_decomposition_free_generators_all_in_noninjective_part():
    fam = make_family(FamilySpec("free_generators", n=2, d=2, p=4))
    report = mobius_decomposition_check(fam, 4)
    assert report.injective_sum == 0
    assert report.abs_err == 0.0
    assert report.lhs == pytest.approx(report.rhs)


def test_decomposition_flip_order_also_holds():
    fam = random_family(2, 2, 2, seed=55)
    report = mobius_decomposition_check(fam, 4, adjoint_first=False)
    assert report.abs_err <= 1e-9 * family_scale(fam, 4)


def test_moment_table_counts():
    fam = random_family(2, 2, 2, seed=13)
    table = moment_table(fam, 4)
    assert table.count == 4**4
    assert sum(table.phi_map.values()) == pytest.approx(table.total)


def test_group_algebra_moment_table_matches_generic_path():
    fam = make_family(FamilySpec("free_generators", n=2, d=1, p=4))
    table = moment_table(fam, 4)
    total = sum(alternating_moment(fam, h) for h in all_index_functions(2, 1, 4))
    assert table.total == pytest.approx(total)
