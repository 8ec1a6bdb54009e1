"""Algebra closure, commutants, block decompositions, DFS finders, the
error-correction matrix condition, and symmetrization."""

from __future__ import annotations

import itertools

import numpy as np
import pytest

from dfskit.algebra import (
    IrrepDecomposition,
    OperatorAlgebra,
    close_algebra,
    commutant,
    decompose_irreps,
    find_df_subspaces,
    find_df_subsystems,
    kl_condition,
    subsystem_trace,
    symmetrize,
)
from dfskit.channels import (
    LindbladModel,
    SystemBathModel,
    apply_channel,
    osr_from_model,
    sme_evolve,
)
from dfskit.core import kron, kron_all, qubits, trace_distance

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
I2 = np.eye(2, dtype=complex)


def single(op, i, n):
    ops = [I2] * n
    ops[i] = op
    return kron_all(*ops)


def collective(op, n):
    return sum(single(op, i, n) for i in range(n)) / 2


def span_projector(mats):
    rows = np.array([m.reshape(-1) for m in mats])
    rows = rows / np.linalg.norm(rows, axis=1)[:, None]
    _, s, vh = np.linalg.svd(rows, full_matrices=False)
    vh = vh[: int(np.sum(s > 1e-8))]
    return vh.conj().T @ vh


def perm_matrix(perm, n):
    d = 2**n
    p = np.zeros((d, d), dtype=complex)
    for x in range(d):
        bits = [(x >> (n - 1 - i)) & 1 for i in range(n)]
        nb = [0] * n
        for i in range(n):
            nb[perm[i]] = bits[i]
        y = sum(b << (n - 1 - i) for i, b in enumerate(nb))
        p[y, x] = 1
    return p


class TestCloseAlgebra:
    def test_collective_dephasing_span(self):
        a = close_algebra([kron(SZ, I2) + kron(I2, SZ)])
        assert a.dim == 3

    def test_anticommuting_pair_span(self):
        a = close_algebra([kron_all(*[SX] * 3), kron_all(*[SZ] * 3)])
        assert a.dim == 4
        proj = span_projector(list(a.span_basis))
        for m in (np.eye(8, dtype=complex), kron_all(*[SY] * 3)):
            v = m.reshape(-1) / np.linalg.norm(m)
            assert np.linalg.norm(proj @ v - v) < 1e-9

    def test_identity_alone(self):
        assert close_algebra([np.eye(4, dtype=complex)]).dim == 1

    def test_idempotent_and_closed(self):
        rng = np.random.default_rng(2)
        g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        a = close_algebra([g])
        again = close_algebra(list(a.span_basis))
        assert again.dim == a.dim
        proj = span_projector(list(a.span_basis))
        for b in a.span_basis:
            for c in a.span_basis:
                v = (b @ c).reshape(-1)
                assert np.linalg.norm(proj @ v - v) < 1e-8 * max(
                    1.0, np.linalg.norm(v)
                )
            v = b.conj().T.reshape(-1)
            assert np.linalg.norm(proj @ v - v) < 1e-8


class TestCommutant:
    def test_anticommuting_pair_commutant(self):
        a = close_algebra([kron_all(*[SX] * 3), kron_all(*[SZ] * 3)])
        c = commutant(a)
        assert c.dim == 16
        dec = decompose_irreps(c)
        assert [(b.degeneracy, b.dim) for b in dec.blocks] == [(2, 4)]

    def test_full_matrix_algebra_commutant_is_scalars(self):
        shift = np.zeros((3, 3), dtype=complex)
        shift[0, 1] = shift[1, 2] = 1
        a = close_algebra([np.diag([1.0, 2.0, 3.0]).astype(complex), shift])
        assert a.dim == 9
        assert commutant(a).dim == 1

    def test_double_commutant(self):
        for gens in (
            [kron_all(*[SX] * 3), kron_all(*[SZ] * 3)],
            [collective(SZ, 2)],
            [collective(SX, 3), collective(SY, 3), collective(SZ, 3)],
        ):
            a = close_algebra(gens)
            back = commutant(commutant(a))
            assert back.dim == a.dim
            pa = span_projector(list(a.span_basis))
            pb = span_projector(list(back.span_basis))
            assert np.max(np.abs(pa - pb)) < 1e-8


class TestDecomposeIrreps:
    def test_strong_collective_three_qubits(self):
        a = close_algebra([collective(s, 3) for s in (SX, SY, SZ)])
        dec = decompose_irreps(a)
        assert [(b.degeneracy, b.dim) for b in dec.blocks] == [(2, 2), (1, 4)]
        assert dec.residual < 1e-7
        assert sum(b.degeneracy * b.dim for b in dec.blocks) == 8

    def test_weak_collective_three_qubits(self):
        dec = decompose_irreps(close_algebra([collective(SZ, 3)]))
        assert sorted(b.dim for b in dec.blocks) == [1, 1, 1, 1]
        assert sorted(b.degeneracy for b in dec.blocks) == [1, 1, 3, 3]

    def test_full_matrix_single_block(self):
        shift = np.zeros((3, 3), dtype=complex)
        shift[0, 1] = shift[1, 2] = 1
        a = close_algebra([np.diag([1.0, 2.0, 3.0]).astype(complex), shift])
        dec = decompose_irreps(a)
        assert [(b.degeneracy, b.dim) for b in dec.blocks] == [(1, 3)]

    def test_dimension_sum_rules(self):
        for gens in (
            [collective(s, 3) for s in (SX, SY, SZ)],
            [collective(SZ, 3)],
            [kron_all(*[SX] * 3), kron_all(*[SZ] * 3)],
        ):
            a = close_algebra(gens)
            dec = decompose_irreps(a)
            assert sum(b.dim**2 for b in dec.blocks) == a.dim
            assert sum(b.degeneracy**2 for b in dec.blocks) == commutant(a).dim

    def test_conjugation_into_block_form(self):
        a = close_algebra([collective(s, 3) for s in (SX, SY, SZ)])
        dec = decompose_irreps(a)
        for blk in dec.blocks:
            v = blk.isometry
            for b in a.span_basis:
                t = (v.conj().T @ b @ v).reshape(
                    blk.degeneracy, blk.dim, blk.degeneracy, blk.dim
                )
                small = np.einsum("iaib->ab", t) / blk.degeneracy
                full = np.einsum("ac,bm->abcm", np.eye(blk.degeneracy), small)
                assert np.max(np.abs(t - full)) < 1e-7

    def test_deterministic_given_seed(self):
        a = close_algebra([collective(s, 3) for s in (SX, SY, SZ)])
        d1 = decompose_irreps(a, seed=11)
        d2 = decompose_irreps(a, seed=11)
        assert d1.seed == d2.seed
        for b1, b2 in zip(d1.blocks, d2.blocks):
            np.testing.assert_array_equal(b1.isometry, b2.isometry)


class TestFindDfSubspaces:
    def test_collective_dephasing_two_qubits(self):
        res = find_df_subspaces([kron(SZ, I2) + kron(I2, SZ)])
        dims = sorted(q.shape[1] for q, _ in res)
        assert dims == [1, 1, 2]
        big = next(q for q, cs in res if q.shape[1] == 2)
        cs = next(cs for q, cs in res if q.shape[1] == 2)
        assert abs(cs[0]) < 1e-10
        proj = big @ big.conj().T
        for ket in (np.eye(4)[1], np.eye(4)[2]):
            assert np.linalg.norm(proj @ ket - ket) < 1e-9

    def test_lambda_system_dark_states(self):
        e02 = np.zeros((3, 3), dtype=complex)
        e02[0, 2] = 1
        e12 = np.zeros((3, 3), dtype=complex)
        e12[1, 2] = 1
        res = find_df_subspaces([e02, e12])
        assert len(res) == 1
        q, cs = res[0]
        assert q.shape[1] == 2
        assert max(abs(c) for c in cs) < 1e-10
        proj = q @ q.conj().T
        target = np.diag([1.0, 1.0, 0.0])
        assert np.max(np.abs(proj - target)) < 1e-9

    def test_cascade_has_no_multidim_dfs(self):
        ops = []
        for i in range(4):
            for j in range(i + 1, 4):
                m = np.zeros((4, 4), dtype=complex)
                m[i, j] = 1
                ops.append(m)
        res = find_df_subspaces(ops)
        assert all(q.shape[1] == 1 for q, _ in res)

    def test_evolution_freeze(self):
        s = collective(SZ, 2) * 2
        subspaces = find_df_subspaces([s])
        rng = np.random.default_rng(9)
        for q, _ in subspaces:
            x = rng.normal(size=q.shape[1]) + 1j * rng.normal(size=q.shape[1])
            ket = q @ (x / np.linalg.norm(x))
            rho = np.outer(ket, ket.conj())
            for _ in range(3):
                b = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
                b = (b + b.conj().T) / 2
                chi = rng.normal(size=2) + 1j * rng.normal(size=2)
                chi = chi / np.linalg.norm(chi)
                model = SystemBathModel(
                    qubits(2), qubits(1), kron(s, b), np.outer(chi, chi.conj())
                )
                for t in (0.4, 1.1, 2.7):
                    chan = osr_from_model(model, t, [np.eye(2)[0], np.eye(2)[1]])
                    evolved = apply_channel(chan, rho)
                    assert trace_distance(evolved, rho) < 1e-8

    def test_lowering_operator_caveat(self):
        # The dagger-closed family has no common eigenvector, so the
        # algebraic criterion finds nothing; the master equation still
        # holds the ground state fixed (sufficiency, not necessity).
        sm = np.array([[0, 1], [0, 0]], dtype=complex)
        assert find_df_subspaces([sm, sm.conj().T]) == []
        model = LindbladModel(np.zeros((2, 2), dtype=complex), [(sm, 0.8)])
        rho0 = np.diag([1.0, 0.0]).astype(complex)
        out = sme_evolve(model, rho0, 1.5, 0.01)
        assert trace_distance(out, rho0) < 1e-9


class TestFindDfSubsystems:
    def test_anticommuting_pair_carries_two_qubits(self):
        dec = find_df_subsystems([kron_all(*[SX] * 3), kron_all(*[SZ] * 3)])
        assert [(b.degeneracy, b.dim) for b in dec.blocks] == [(4, 2)]
        assert [b.label for b in dec.dfs_blocks] == [0]

    def test_strong_collective_four_qubits(self):
        dec = find_df_subsystems([collective(s, 4) for s in (SX, SY, SZ)])
        assert [(b.degeneracy, b.dim) for b in dec.blocks] == [(2, 1), (3, 3), (1, 5)]
        assert [b.degeneracy for b in dec.dfs_blocks] == [2, 3]

    def test_full_single_qubit_algebra_unprotected(self):
        dec = find_df_subsystems([SX, SZ])
        assert dec.dfs_blocks == ()


class TestKLCondition:
    def test_repetition_code_corrects_bit_flips(self):
        c0 = np.zeros(8)
        c0[0] = 1
        c1 = np.zeros(8)
        c1[7] = 1
        errs = [np.eye(8, dtype=complex)] + [single(SX, i, 3) for i in range(3)]
        rep = kl_condition([c0, c1], errs)
        assert rep.passes
        assert rep.degeneracy_rank == 4
        np.testing.assert_allclose(rep.c_matrix, np.eye(4), atol=1e-12)

    def test_df_subspace_is_fully_degenerate_code(self):
        a = close_algebra([kron(SZ, I2) + kron(I2, SZ)])
        code = [np.eye(4)[1].astype(complex), np.eye(4)[2].astype(complex)]
        rep = kl_condition(code, list(a.span_basis))
        assert rep.passes
        assert rep.degeneracy_rank == 1

    def test_bare_qubit_fails_bit_flip(self):
        rep = kl_condition([np.eye(2)[0], np.eye(2)[1]], [SX])
        assert not rep.passes

    def test_rejects_non_orthonormal(self):
        with pytest.raises(ValueError, match="orthonormal"):
            kl_condition([np.array([1.0, 0.0]), np.array([1.0, 1.0])], [SX])


class TestSubsystemTrace:
    def test_recovers_encoded_state(self):
        dec = find_df_subsystems([kron_all(*[SX] * 3), kron_all(*[SZ] * 3)])
        blk = dec.blocks[0]
        rng = np.random.default_rng(4)
        j = rng.normal(size=4) + 1j * rng.normal(size=4)
        j = j / np.linalg.norm(j)
        m = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        gauge = m @ m.conj().T
        gauge = gauge / np.trace(gauge).real
        rho = blk.isometry @ kron(np.outer(j, j.conj()), gauge) @ blk.isometry.conj().T
        out = subsystem_trace(rho, dec, blk.label)
        np.testing.assert_allclose(out, np.outer(j, j.conj()), atol=1e-10)

    def test_maximally_mixed_weight(self):
        a = close_algebra([collective(s, 3) for s in (SX, SY, SZ)])
        dec = decompose_irreps(a)
        total = 0.0
        for blk in dec.blocks:
            out = subsystem_trace(np.eye(8, dtype=complex) / 8, dec, blk.label)
            w = np.trace(out).real
            assert abs(w - blk.degeneracy * blk.dim / 8) < 1e-10
            np.testing.assert_allclose(
                out, (blk.dim / 8) * np.eye(blk.degeneracy), atol=1e-10
            )
            total += w
        assert abs(total - 1.0) < 1e-10

    def test_invariant_under_algebra_action(self):
        from dfskit.core import expm_hermitian_generator

        gens = [kron_all(*[SX] * 3), kron_all(*[SZ] * 3)]
        a = close_algebra(gens)
        dec = decompose_irreps(a)
        blk = dec.dfs_blocks[0]
        rng = np.random.default_rng(6)
        j = rng.normal(size=4) + 1j * rng.normal(size=4)
        j = j / np.linalg.norm(j)
        rho = blk.isometry @ kron(
            np.outer(j, j.conj()), np.diag([0.7, 0.3]).astype(complex)
        ) @ blk.isometry.conj().T
        x = sum(
            c * b
            for c, b in zip(rng.normal(size=a.dim) + 1j * rng.normal(size=a.dim), a.span_basis)
        )
        h = (x + x.conj().T) / 2
        u = expm_hermitian_generator(h, 0.8)
        before = subsystem_trace(rho, dec, blk.label)
        after = subsystem_trace(u @ rho @ u.conj().T, dec, blk.label)
        np.testing.assert_allclose(after, before, atol=1e-9)

    def test_unknown_block(self):
        dec = find_df_subsystems([kron_all(*[SX] * 3), kron_all(*[SZ] * 3)])
        with pytest.raises(ValueError, match="block"):
            subsystem_trace(np.eye(8, dtype=complex) / 8, dec, 99)


class TestSymmetrize:
    def test_swap_average(self):
        swap = np.eye(4)[[0, 2, 1, 3]].astype(complex)
        out = symmetrize(kron(SZ, I2), [np.eye(4, dtype=complex), swap])
        np.testing.assert_allclose(
            out, 0.5 * (kron(SZ, I2) + kron(I2, SZ)), atol=1e-12
        )

    def test_trivial_group(self):
        out = symmetrize(SX + 2 * SZ, [np.eye(2, dtype=complex)])
        np.testing.assert_allclose(out, SX + 2 * SZ, atol=1e-14)

    def test_permutation_group_gives_collective_span(self):
        group = [perm_matrix(p, 3) for p in itertools.permutations(range(3))]
        symmetrized = [symmetrize(single(s, 0, 3), group) for s in (SX, SY, SZ)]
        pa = span_projector(symmetrized)
        pb = span_projector([collective(s, 3) for s in (SX, SY, SZ)])
        assert np.max(np.abs(pa - pb)) < 1e-9

    def test_commutes_and_idempotent(self):
        group = [perm_matrix(p, 3) for p in itertools.permutations(range(3))]
        rng = np.random.default_rng(8)
        x = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
        out = symmetrize(x, group)
        for g in group:
            assert np.max(np.abs(out @ g - g @ out)) < 1e-9
        np.testing.assert_allclose(symmetrize(out, group), out, atol=1e-10)

    def test_rejects_non_unitary(self):
        with pytest.raises(ValueError, match="non-unitary"):
            symmetrize(SX, [2.0 * np.eye(2)])

    def test_rejects_unclosed_group(self):
        g12 = perm_matrix((1, 0, 2), 3)
        g13 = perm_matrix((2, 1, 0), 3)
        with pytest.raises(ValueError, match="closed"):
            symmetrize(single(SX, 0, 3), [np.eye(8, dtype=complex), g12, g13])


def test_operator_algebra_validates():
    with pytest.raises(ValueError, match="orthonormal"):
        OperatorAlgebra([SX, SX], [SX])
    with pytest.raises(ValueError, match="identity"):
        OperatorAlgebra([SX / np.sqrt(2)], [SX])


def test_irrep_decomposition_validates():
    from dfskit.algebra import IrrepBlock

    bad = IrrepBlock(0, 1, 2, np.eye(4, dtype=complex)[:, :2])
    with pytest.raises(ValueError, match="complete"):
        IrrepDecomposition([bad], seed=0, residual=0.0)
