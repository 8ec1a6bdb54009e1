"""Stationary control: joint-eigenvector checks, coherent-state steering,
and the worst-case gate error metric."""

from __future__ import annotations

import numpy as np
import pytest

from dfskit.control import (
    ControlExpansion,
    check_stationary_control,
    check_stationary_control_mixed,
    coherent_control_residual,
    coherent_state,
    expand_control,
    gate_error,
    truncated_boson,
)
from dfskit.core import expm_hermitian_generator, kron, partial_trace, qubits

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
I2 = np.eye(2, dtype=complex)

KET0 = np.array([1.0, 0.0], dtype=complex)
KET1 = np.array([0.0, 1.0], dtype=complex)
PLUS = np.array([1.0, 1.0], dtype=complex) / np.sqrt(2)


def diagonal_coupling(lam=0.7):
    """One qubit steered by one apparatus qubit: both couplers commute
    with sigma_z on the apparatus."""
    h = lam * (kron(SZ, I2) + kron(SX, SZ) + kron(I2, SZ))
    return expand_control(h, 2, 2)


def transverse_coupling(lam=0.7):
    """Same skeleton but the coupler reads sigma_x on the apparatus, so no
    apparatus state is a joint eigenvector."""
    h = lam * (kron(SZ, I2) + kron(SX, SX) + kron(I2, SZ))
    return expand_control(h, 2, 2)


def find_coupler(e, target):
    for f, a in e.couplers:
        if np.allclose(f, target / np.sqrt(2), atol=1e-12):
            return a
    raise AssertionError("expected coupler missing from expansion")


class TestExpandControl:
    def test_diagonal_example_operators(self):
        lam = 0.7
        e = diagonal_coupling(lam)
        np.testing.assert_allclose(e.apparatus_h, lam * SZ, atol=1e-12)
        a_x = find_coupler(e, SX)
        a_z = find_coupler(e, SZ)
        np.testing.assert_allclose(a_x, lam * np.sqrt(2) * SZ, atol=1e-12)
        np.testing.assert_allclose(a_z, lam * np.sqrt(2) * I2, atol=1e-12)
        assert len(e.couplers) == 2

    def test_pure_system_hamiltonian(self):
        h_s = 0.7 * SX + 0.2 * SZ
        e = expand_control(kron(h_s, np.eye(3)), 2, 3)
        np.testing.assert_allclose(e.apparatus_h, np.zeros((3, 3)), atol=1e-12)
        for _, a in e.couplers:
            c = np.trace(a) / 3.0
            np.testing.assert_allclose(a, c * np.eye(3), atol=1e-12)

    def test_jaynes_cummings_quadratures(self):
        g = 0.4 - 0.3j
        cutoff = 12
        a, adag = truncated_boson(cutoff)
        sp = SX + 1j * SY
        sm = SX - 1j * SY
        h = kron(g * sm, adag) + kron(np.conj(g) * sp, a)
        e = expand_control(h, 2, cutoff + 1)
        a_x = find_coupler(e, SX)
        a_y = find_coupler(e, SY)
        np.testing.assert_allclose(
            a_x, np.sqrt(2) * (g * adag + np.conj(g) * a), atol=1e-12
        )
        np.testing.assert_allclose(
            a_y, 1j * np.sqrt(2) * (-g * adag + np.conj(g) * a), atol=1e-12
        )

    def test_reconstruction(self):
        rng = np.random.default_rng(7)
        m = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
        h = (m + m.conj().T) / 2
        e = expand_control(h, 4, 2)
        rebuilt = kron(np.eye(4), e.apparatus_h)
        for f, a in e.couplers:
            rebuilt = rebuilt + kron(f, a)
        np.testing.assert_allclose(rebuilt, h, atol=1e-10)

    def test_rejects_non_hermitian(self):
        h = kron(SZ, I2).astype(complex)
        h[0, 1] = 1.0
        with pytest.raises(ValueError, match="hermitian"):
            expand_control(h, 2, 2)

    def test_rejects_bad_dims(self):
        with pytest.raises(ValueError, match="power of 2"):
            expand_control(np.eye(6, dtype=complex), 3, 2)
        with pytest.raises(ValueError, match="joint dimension"):
            expand_control(np.eye(4, dtype=complex), 2, 3)


class TestStationaryControl:
    def test_diagonal_example_verdicts(self):
        lam = 0.7
        e = diagonal_coupling(lam)
        v0, v1 = check_stationary_control(e, [KET0, KET1])
        assert v0.controllable and v1.controllable
        np.testing.assert_allclose(v0.h_controlled, lam * (SZ + SX + I2), atol=1e-10)
        # The conditioned Hamiltonian on |1> picks up lambda_1 = -lambda,
        # so the identity term enters with a minus sign; an identity shift
        # is a global phase, invisible to the reduced dynamics below.
        np.testing.assert_allclose(v1.h_controlled, lam * (SZ - SX - I2), atol=1e-10)

    def test_transverse_coupler_never_steers(self):
        e = transverse_coupling()
        rng = np.random.default_rng(3)
        states = [KET0, KET1, PLUS]
        for _ in range(4):
            v = rng.normal(size=2) + 1j * rng.normal(size=2)
            states.append(v / np.linalg.norm(v))
        for verdict in check_stationary_control(e, states):
            assert not verdict.controllable
            assert verdict.h_controlled is None
            assert verdict.max_residual > 1e-3

    def test_zero_coupling_everything_passes(self):
        h_s = 0.9 * SZ + 0.4 * SX
        e = expand_control(kron(h_s, np.eye(3)), 2, 3)
        rng = np.random.default_rng(11)
        states = []
        for _ in range(5):
            v = rng.normal(size=3) + 1j * rng.normal(size=3)
            states.append(v / np.linalg.norm(v))
        for verdict in check_stationary_control(e, states):
            assert verdict.controllable
            np.testing.assert_allclose(verdict.h_controlled, h_s, atol=1e-10)

    def test_reduced_dynamics_match(self):
        lam = 0.7
        e = diagonal_coupling(lam)
        h = lam * (kron(SZ, I2) + kron(SX, SZ) + kron(I2, SZ))
        space = qubits(2)
        rng = np.random.default_rng(5)
        m = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        rho = m @ m.conj().T
        rho = rho / np.trace(rho).real
        for a, verdict in zip([KET0, KET1], check_stationary_control(e, [KET0, KET1])):
            joint0 = kron(rho, np.outer(a, a.conj()))
            for t in (0.3, 0.9, 2.1):
                u = expm_hermitian_generator(h, t)
                reduced = partial_trace(u @ joint0 @ u.conj().T, space, keep=(0,))
                v = expm_hermitian_generator(verdict.h_controlled, t)
                np.testing.assert_allclose(reduced, v @ rho @ v.conj().T, atol=1e-7)

    def test_rejects_unnormalized(self):
        e = diagonal_coupling()
        with pytest.raises(ValueError, match="normalized"):
            check_stationary_control(e, [2.0 * KET0])

    def test_mixed_state_needs_common_eigenvalue(self):
        # |0> and |1> each pass, but they see different eigenvalues of the
        # sigma_z coupler, so their equal mixture is not stationary.
        e = diagonal_coupling()
        verdict = check_stationary_control_mixed(e, 0.5 * np.eye(2, dtype=complex))
        assert not verdict.controllable
        pure = check_stationary_control(e, [KET0, KET1])
        assert all(v.controllable for v in pure)

    def test_mixed_state_on_degenerate_coupler(self):
        d = np.diag([1.0, 1.0, -1.0]).astype(complex)
        h = kron(SX, d) + kron(I2, np.diag([2.0, 2.0, 5.0]).astype(complex))
        e = expand_control(h, 2, 3)
        rho = np.diag([0.5, 0.5, 0.0]).astype(complex)
        verdict = check_stationary_control_mixed(e, rho)
        assert verdict.controllable
        np.testing.assert_allclose(
            verdict.h_controlled, 2.0 * I2 + SX, atol=1e-10
        )

    def test_mixed_reduction_property(self):
        # A commuting mixed state passes exactly when every support
        # eigenvector passes with one shared eigenvalue per operator.
        rng = np.random.default_rng(13)
        d = np.diag([1.0, 1.0, -1.0]).astype(complex)
        h = kron(SX, d) + kron(I2, np.diag([2.0, 2.0, 5.0]).astype(complex))
        e = expand_control(h, 2, 3)
        for _ in range(6):
            w = rng.uniform(size=3)
            support = rng.choice([0, 1], size=3)
            w = w * support
            if w.sum() == 0:
                w[0] = 1.0
            rho = np.diag(w / w.sum()).astype(complex)
            idx = [i for i in range(3) if w[i] > 0]
            basis = np.eye(3, dtype=complex)
            pure = check_stationary_control(e, [basis[i] for i in idx])
            all_pass = all(v.controllable for v in pure)
            shared = all_pass and (2 not in idx or len(idx) == 1)
            assert check_stationary_control_mixed(e, rho).controllable == shared


class TestCoherentControl:
    def test_overlap_formula(self):
        for amp in (0.5, 2.0, 10.0):
            cutoff = max(25, int(4 * amp**2) + 10)
            report = coherent_control_residual(0.3, amp, cutoff)
            expected = amp / np.sqrt(1 + amp**2)
            assert abs(report.overlap - expected) < 1e-6
            assert report.truncation_weight < 1e-9

    def test_large_amplitude_overlap_value(self):
        report = coherent_control_residual(0.3 + 0.1j, 10.0, 401)
        assert abs(report.overlap - 0.99504) < 1e-4

    def test_vacuum_overlap_zero(self):
        report = coherent_control_residual(0.5, 0.0, 4)
        assert report.overlap == pytest.approx(0.0, abs=1e-12)

    def test_residual_decreases_with_amplitude(self):
        small = coherent_control_residual(0.4, 5.0, 101)
        large = coherent_control_residual(0.4, 10.0, 401)
        assert large.residual_x < small.residual_x
        assert large.residual_x < 0.1
        # Both quadratures shrink when the coupling phase exercises both;
        # at real g and real alpha the y expectation vanishes identically.
        g = 0.4 * np.exp(0.6j)
        small = coherent_control_residual(g, 5.0, 101)
        large = coherent_control_residual(g, 10.0, 401)
        assert large.residual_x < small.residual_x
        assert large.residual_y < small.residual_y

    def test_phase_of_alpha_irrelevant_to_overlap(self):
        a = coherent_control_residual(0.2, 3.0, 40)
        b = coherent_control_residual(0.2, 3.0 * np.exp(0.7j), 40)
        assert abs(a.overlap - b.overlap) < 1e-9

    def test_cutoff_guard(self):
        with pytest.raises(ValueError, match="cutoff too small"):
            coherent_control_residual(0.3, 5.0, 99)

    def test_coherent_state_is_annihilation_eigenvector(self):
        alpha = 1.3 - 0.4j
        cutoff = 40
        a, _ = truncated_boson(cutoff)
        ket = coherent_state(alpha, cutoff)
        np.testing.assert_allclose(a @ ket, alpha * ket, atol=1e-10)


class TestGateError:
    def test_identical_unitaries(self):
        u = expm_hermitian_generator(0.3 * SX + 0.7 * SZ, 1.2)
        assert gate_error(u, u) == pytest.approx(0.0, abs=1e-12)

    def test_small_time_slope(self):
        h = 0.8 * SX + 0.5 * SY - 0.3 * SZ
        dt = 1e-3
        norm = np.linalg.norm(h, ord=2)
        err = gate_error(np.eye(2), expm_hermitian_generator(h, -dt))
        assert err == pytest.approx(dt * norm, rel=1e-4)

    def test_metric_and_subadditive(self):
        rng = np.random.default_rng(17)
        def random_unitary():
            m = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
            q, r = np.linalg.qr(m)
            return q * (np.diag(r) / np.abs(np.diag(r)))
        for _ in range(5):
            u1, u2, v1, v2 = (random_unitary() for _ in range(4))
            assert gate_error(u1, v1) == pytest.approx(gate_error(v1, u1))
            assert gate_error(u1, v1) <= gate_error(u1, u2) + gate_error(u2, v1) + 1e-12
            assert (
                gate_error(u1 @ u2, v1 @ v2)
                <= gate_error(u1, v1) + gate_error(u2, v2) + 1e-12
            )

    def test_rejects_non_unitary(self):
        with pytest.raises(ValueError, match="non-unitary"):
            gate_error(np.eye(2), 2.0 * np.eye(2))

    def test_rejects_shape_mismatch(self):
        with pytest.raises(ValueError, match="dimension"):
            gate_error(np.eye(2), np.eye(3))


def test_expansion_type_validates():
    with pytest.raises(ValueError, match="hermitian"):
        ControlExpansion(np.array([[0.0, 1.0], [0.0, 0.0]]), [])
    with pytest.raises(ValueError, match="apparatus dim"):
        ControlExpansion(I2, [(SX / np.sqrt(2), np.eye(3, dtype=complex))])
