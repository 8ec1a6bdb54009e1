"""Steering a system through an attached apparatus.

A joint Hamiltonian H = I⊗H_A + Σ_α F_α⊗A_α couples the system to an
apparatus through the fixed operator basis {F_α}.  Whenever the apparatus
sits in a joint eigenvector of H_A and every coupler A_α, the system
evolves unitarily under the conditioned Hamiltonian
H_a = λ_a·I + Σ_α c_α F_α, so the apparatus state acts as a control knob.
This module extracts the expansion from a joint Hamiltonian, tests pure
and commuting mixed apparatus states against the eigenvector conditions,
quantifies how nearly a coherent oscillator state steers a qubit coupled
by an exchange-of-excitation interaction, and supplies the worst-case
gate error metric for comparing a target unitary with the one achieved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import (
    ATOL,
    ComplexMatrix,
    TensorSpace,
    as_matrix,
    kron,
    partial_trace,
)
from .channels import pauli_product_basis

# A candidate apparatus state counts as a joint eigenvector when every
# residual ||A|a> - c|a>|| falls below this; near-threshold cases should be
# judged by the reported residual rather than the boolean alone.
RESIDUAL_TOL = 1e-8

# Couplers whose apparatus operator vanishes below this are dropped from
# the expansion; they contribute nothing to the joint Hamiltonian.
_COUPLER_TOL = 1e-12


def _hermitian_or_raise(m: np.ndarray, what: str, atol: float) -> np.ndarray:
    if np.max(np.abs(m - m.conj().T)) > atol:
        raise ValueError(f"{what} must be hermitian")
    return 0.5 * (m + m.conj().T)


@dataclass(frozen=True, eq=False)
class ControlExpansion:
    """A joint Hamiltonian split into I⊗H_A plus system-apparatus couplers.

    ``couplers`` holds (F_alpha, A_alpha) pairs: a trace-orthonormal
    hermitian system operator and the hermitian apparatus operator it
    multiplies.  Reassembling kron(F, A) over the pairs plus the identity
    part reproduces the Hamiltonian the expansion came from.
    """

    apparatus_h: ComplexMatrix
    couplers: tuple

    def __init__(
        self,
        apparatus_h: ComplexMatrix,
        couplers: Sequence[tuple[ComplexMatrix, ComplexMatrix]],
        atol: float = ATOL,
    ) -> None:
        h_a = _hermitian_or_raise(as_matrix(apparatus_h), "apparatus part", 10 * atol)
        d_app = h_a.shape[0]
        pairs = []
        sys_dim = None
        for f, a in couplers:
            f = as_matrix(f)
            a = _hermitian_or_raise(as_matrix(a), "coupler apparatus operator", 10 * atol)
            if sys_dim is None:
                sys_dim = f.shape[0]
            if f.shape != (sys_dim, sys_dim):
                raise ValueError("system basis operators must share one dimension")
            if a.shape != (d_app, d_app):
                raise ValueError("coupler apparatus operators must match apparatus dim")
            pairs.append((f, a))
        object.__setattr__(self, "apparatus_h", h_a)
        object.__setattr__(self, "couplers", tuple(pairs))

    @property
    def app_dim(self) -> int:
        return self.apparatus_h.shape[0]


@dataclass(frozen=True)
class ControlVerdict:
    """Outcome of the joint-eigenvector test for one apparatus state.

    ``max_residual`` is the largest ||Op|a> - <Op>|a>|| over H_A and all
    couplers (Frobenius norm of Op·rho - c·rho for mixed states, which
    reduces to the vector norm on pure states).  ``h_controlled`` is the
    conditioned system Hamiltonian when the state passes, else None.
    """

    controllable: bool
    max_residual: float
    h_controlled: Optional[np.ndarray]


def expand_control(
    h_joint: ComplexMatrix, sys_dim: int, app_dim: int
) -> ControlExpansion:
    """Expand a system-apparatus Hamiltonian over the Pauli product basis.

    Each apparatus operator is A_alpha = Tr_S[(F_alpha^dag ⊗ I)·H]; the
    identity component is pulled out as H_A.  The system dimension must be
    a power of two so the fixed basis exists.
    """
    h = _hermitian_or_raise(as_matrix(h_joint), "joint hamiltonian", 10 * ATOL)
    sys_dim = int(sys_dim)
    app_dim = int(app_dim)
    if sys_dim * app_dim != h.shape[0]:
        raise ValueError("sys_dim * app_dim must match the joint dimension")
    n_qubits = int(round(math.log2(sys_dim)))
    if 2**n_qubits != sys_dim:
        raise ValueError("system dimension must be a power of 2")
    basis = pauli_product_basis(n_qubits)
    space = TensorSpace((sys_dim, app_dim))
    eye_app = np.eye(app_dim, dtype=np.complex128)
    apparatus_ops = [
        partial_trace(kron(f.conj().T, eye_app) @ h, space, keep=(1,)) for f in basis
    ]
    h_app = apparatus_ops[0] / math.sqrt(sys_dim)
    pairs = [
        (f, a)
        for f, a in zip(basis[1:], apparatus_ops[1:])
        if np.max(np.abs(a)) > _COUPLER_TOL
    ]
    expansion = ControlExpansion(h_app, pairs)
    rebuilt = kron(np.eye(sys_dim, dtype=np.complex128), h_app)
    for f, a in pairs:
        rebuilt = rebuilt + kron(f, a)
    if np.max(np.abs(rebuilt - h)) > 10 * ATOL:
        raise RuntimeError("expansion failed to reproduce the joint hamiltonian")
    return expansion


def _verdict(
    e: ControlExpansion, residuals: list[float], coeffs: list[float], lam: float
) -> ControlVerdict:
    worst = max(residuals)
    if worst >= RESIDUAL_TOL:
        return ControlVerdict(False, worst, None)
    sys_dim = e.couplers[0][0].shape[0] if e.couplers else 1
    h_c = lam * np.eye(sys_dim, dtype=np.complex128)
    for (f, _), c in zip(e.couplers, coeffs):
        h_c = h_c + c * f
    return ControlVerdict(True, worst, h_c)


def check_stationary_control(
    e: ControlExpansion, states: Sequence[np.ndarray]
) -> list[ControlVerdict]:
    """Test pure apparatus states as joint eigenvectors of H_A and couplers.

    A state passes when every residual ||Op|a> - <a|Op|a>·|a>|| stays
    below RESIDUAL_TOL; the conditioned Hamiltonian
    H_a = λ_a·I + Σ c_alpha·F_alpha is returned for passing states.
    """
    results = []
    for raw in states:
        a = np.asarray(raw, dtype=np.complex128).reshape(-1)
        if a.shape[0] != e.app_dim:
            raise ValueError("state dimension must match the apparatus")
        if abs(np.linalg.norm(a) - 1.0) > 1e-8:
            raise ValueError("states must be normalized")
        residuals = []
        coeffs = []
        va = e.apparatus_h @ a
        lam = float(np.vdot(a, va).real)
        residuals.append(float(np.linalg.norm(va - lam * a)))
        for _, op in e.couplers:
            v = op @ a
            c = float(np.vdot(a, v).real)
            residuals.append(float(np.linalg.norm(v - c * a)))
            coeffs.append(c)
        results.append(_verdict(e, residuals, coeffs, lam))
    return results


def check_stationary_control_mixed(
    e: ControlExpansion, rho: ComplexMatrix
) -> ControlVerdict:
    """Test a mixed apparatus state against the operator eigen-equations.

    A density matrix passes when Op·rho = c·rho holds for H_A and every
    coupler, which is strictly stronger than each support eigenvector
    passing alone: the eigenvalues must also agree across the support
    (the purification of rho must itself be a joint eigenvector).
    """
    r = as_matrix(rho)
    r = _hermitian_or_raise(r, "apparatus state", 1e-8)
    if r.shape[0] != e.app_dim:
        raise ValueError("state dimension must match the apparatus")
    if abs(np.trace(r).real - 1.0) > 1e-8:
        raise ValueError("apparatus state must have unit trace")
    if np.min(np.linalg.eigvalsh(r)) < -1e-9:
        raise ValueError("apparatus state must be positive semidefinite")
    residuals = []
    coeffs = []
    lam = float(np.trace(e.apparatus_h @ r).real)
    residuals.append(float(np.linalg.norm(e.apparatus_h @ r - lam * r)))
    for _, op in e.couplers:
        c = float(np.trace(op @ r).real)
        residuals.append(float(np.linalg.norm(op @ r - c * r)))
        coeffs.append(c)
    return _verdict(e, residuals, coeffs, lam)


def truncated_boson(cutoff: int) -> tuple[np.ndarray, np.ndarray]:
    """Annihilation and creation operators on Fock states |0>..|cutoff>."""
    if cutoff < 1:
        raise ValueError("cutoff too small")
    dim = cutoff + 1
    a = np.zeros((dim, dim), dtype=np.complex128)
    for n in range(1, dim):
        a[n - 1, n] = math.sqrt(n)
    return a, a.conj().T


def coherent_state(alpha: complex, cutoff: int) -> np.ndarray:
    """Truncated, renormalized coherent state with amplitude alpha.

    Amplitudes are built in log space so large cutoffs stay finite.
    """
    if cutoff < 1:
        raise ValueError("cutoff too small")
    alpha = complex(alpha)
    r = abs(alpha)
    ket = np.zeros(cutoff + 1, dtype=np.complex128)
    if r == 0.0:
        ket[0] = 1.0
        return ket
    phase = alpha / r
    log_r = math.log(r)
    for n in range(cutoff + 1):
        mag = math.exp(n * log_r - 0.5 * math.lgamma(n + 1))
        ket[n] = mag * phase**n
    return ket / np.linalg.norm(ket)


@dataclass(frozen=True)
class CoherentControl:
    """Eigen-residuals of the two quadrature couplers at a coherent state,
    the overlap between the state and its image under the raising operator
    (normalized), and the coherent-state probability weight discarded by
    the Fock-space truncation."""

    residual_x: float
    residual_y: float
    overlap: float
    truncation_weight: float


def coherent_control_residual(
    g: complex, alpha: complex, cutoff: int
) -> CoherentControl:
    """How nearly a coherent state is a joint eigenvector of the couplers.

    The exchange-of-excitation coupling expands into the quadrature pair
    A_x = √2(g·a† + g*·a) and A_y = i√2(−g·a† + g*·a).  Residuals are
    relative, ||A|α> − <A>|α>|| / ||A|α>||, since the absolute residual
    is the constant √2|g| at every amplitude.  The overlap reported is
    |<α|ψ_α>| with ψ_α ∝ a†|α>, which approaches 1 as |α| grows.
    """
    alpha = complex(alpha)
    if cutoff < max(1, 4 * abs(alpha) ** 2):
        raise ValueError("cutoff too small for this amplitude")
    a, adag = truncated_boson(cutoff)
    g = complex(g)
    a_x = math.sqrt(2.0) * (g * adag + np.conj(g) * a)
    a_y = 1j * math.sqrt(2.0) * (-g * adag + np.conj(g) * a)
    ket = coherent_state(alpha, cutoff)
    residuals = []
    for op in (a_x, a_y):
        v = op @ ket
        scale = np.linalg.norm(v)
        if scale == 0.0:
            residuals.append(0.0)
            continue
        c = np.vdot(ket, v).real
        residuals.append(float(np.linalg.norm(v - c * ket) / scale))
    psi = adag @ ket
    psi = psi / np.linalg.norm(psi)
    overlap = float(abs(np.vdot(ket, psi)))
    r2 = abs(alpha) ** 2
    kept = sum(
        math.exp(-r2 + n * math.log(r2) - math.lgamma(n + 1)) if r2 > 0.0 else (n == 0)
        for n in range(cutoff + 1)
    )
    tail = max(0.0, 1.0 - kept)
    return CoherentControl(residuals[0], residuals[1], overlap, tail)


def gate_error(u: ComplexMatrix, v: ComplexMatrix) -> float:
    """Worst-case state error between two unitaries.

    max over normalized psi of ||(U − V)psi||, i.e. the largest singular
    value of U − V.  Symmetric, obeys the triangle inequality, and is
    subadditive under composition.
    """
    u = as_matrix(u)
    v = as_matrix(v)
    if u.shape != v.shape:
        raise ValueError("unitaries must have the same dimension")
    eye = np.eye(u.shape[0])
    for m in (u, v):
        if np.max(np.abs(m.conj().T @ m - eye)) > 1e-8:
            raise ValueError("non-unitary input")
    return float(np.linalg.norm(u - v, ord=2))
