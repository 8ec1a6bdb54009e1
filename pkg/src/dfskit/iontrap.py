"""Effective bichromatic gates on trapped-ion code pairs.

A pair of lasers detuned symmetrically about a vibrational sideband drives
a string of ions through the collective operator
J_y(φ⃗) = (i/2) Σ_i [e^{iφ_i}σ₊^{(i)} − e^{-iφ_i}σ₋^{(i)}].  The evolution
entangles the qubits with the mode, but whenever (ν−δ)t = 2πk the mode
factors return to the identity and the ions are left with the pure qubit
gate S(φ⃗, k) = exp[−i A J_y²(φ⃗)], A = 2π η² Ω² k / (ν−δ)².  Two phase
choices turn 2J_y² on an ion pair into σ_x σ_x + I or σ_y σ_x + I, which
rotate the excitation-preserving code {|01⟩, |10⟩} about x and y; four
equal phases give the pairwise σ_y σ_y sum whose quarter turn is an
entangling gate between two such codes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import ComplexMatrix, expm_hermitian_generator, kron_all
from .pauli import ID2, SX, SY, SZ

TWO_PI = 2.0 * math.pi

# sigma_plus excites an ion, |0> -> |1>; with qubit 0 leftmost and
# sigma_z = diag(1, -1) that is the lower off-diagonal unit matrix.
_SP = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=np.complex128)
_SM = _SP.conj().T

_ROTATION_PHASES = {
    "x": (-math.pi / 2.0, -math.pi / 2.0),
    "y": (0.0, -math.pi / 2.0),
}

_CODE_INDICES = (1, 2)  # |01> and |10>
_COMPLEMENT_INDICES = (0, 3)  # |00> and |11>


def _one_ion(op: np.ndarray, n: int, pos: int) -> np.ndarray:
    factors = [ID2] * n
    factors[pos] = op
    return kron_all(*factors)


def jy_collective(phases: Sequence[float]) -> ComplexMatrix:
    """Phase-dressed collective operator (i/2) Σ [e^{iφ}σ₊ − e^{-iφ}σ₋].

    One phase per ion.  A zero phase contributes σ_y/2 for its ion and a
    −π/2 phase contributes σ_x/2, which is what makes the two-ion pulse
    generators below come out as σσ + I.
    """
    phis = [float(p) for p in phases]
    if not phis:
        raise ValueError("need at least one ion phase")
    n = len(phis)
    out = np.zeros((2**n, 2**n), dtype=np.complex128)
    for i, phi in enumerate(phis):
        local = 0.5j * (np.exp(1j * phi) * _SP - np.exp(-1j * phi) * _SM)
        out = out + _one_ion(local, n, i)
    return out


@dataclass(frozen=True)
class SMGateParams:
    """Laser parameters for one bichromatic pulse train.

    ``phases`` are the per-ion laser phases, ``k`` counts the completed
    vibrational cycles (ν−δ)t = 2πk at which the ion-mode entangling
    factors vanish, ``eta`` is the Lamb-Dicke parameter, ``omega_rabi``
    the common Rabi frequency and ``nu_minus_delta`` the detuning of the
    beat note from the sideband.
    """

    phases: tuple
    k: int
    eta: float
    omega_rabi: float
    nu_minus_delta: float

    def __init__(self, phases, k: int, eta: float, omega_rabi: float, nu_minus_delta: float) -> None:
        phases = tuple(float(p) for p in phases)
        if not phases:
            raise ValueError("need at least one ion phase")
        k = int(k)
        if k < 1:
            raise ValueError("k counts completed mode cycles, so k >= 1")
        nu_minus_delta = float(nu_minus_delta)
        if nu_minus_delta == 0.0:
            raise ValueError("the detuning nu - delta must be nonzero")
        object.__setattr__(self, "phases", phases)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "eta", float(eta))
        object.__setattr__(self, "omega_rabi", float(omega_rabi))
        object.__setattr__(self, "nu_minus_delta", nu_minus_delta)

    @property
    def pulse_area(self) -> float:
        """|A(t_k)| = 2π η² Ω² k / (ν−δ)², nonnegative by construction.

        The factorization U = e^{−iA J_y²} e^{−iF J_y x} e^{−iG J_y p} of the
        exact evolution forces dA/dt = −F(t)g(t), so the signed coefficient
        at the cycle endpoint is −pulse_area; ``sm_gate`` applies that sign.
        """
        return TWO_PI * self.eta**2 * self.omega_rabi**2 * self.k / self.nu_minus_delta**2

    @property
    def pulse_time(self) -> float:
        """The gate time t_k = 2πk / (ν−δ)."""
        return TWO_PI * self.k / self.nu_minus_delta

    @classmethod
    def for_pulse_area(cls, phases, area: float, k: int = 1) -> "SMGateParams":
        """Parameters reaching a given area with unit Lamb-Dicke and detuning."""
        area = float(area)
        if area < 0.0:
            raise ValueError("the accumulated area is nonnegative")
        return cls(phases, k, 1.0, math.sqrt(area / (TWO_PI * k)), 1.0)


def sm_gate(params: SMGateParams) -> ComplexMatrix:
    """The ion-only evolution exp[−i A(t_k) J_y²] left after k mode cycles.

    A(t_k) carries a minus sign from the factorization noted on
    ``pulse_area``, so the returned matrix is exp[+i pulse_area J_y²];
    this sign is what reproduces the four-ion image list below.
    """
    jy = jy_collective(params.phases)
    return expm_hermitian_generator(jy @ jy, -params.pulse_area)


def pauli_rotation(axis: str, angle: float) -> np.ndarray:
    """Single-qubit rotation cos(θ/2) I − i sin(θ/2) σ_axis."""
    sigma = {"x": SX, "y": SY, "z": SZ}.get(axis)
    if sigma is None:
        raise ValueError("axis must be one of 'x', 'y', 'z'")
    half = 0.5 * float(angle)
    return math.cos(half) * ID2 - 1j * math.sin(half) * sigma


@dataclass(frozen=True, eq=False)
class EncodedRotation:
    """Code-block restriction of a two-ion pulse.

    ``matrix`` is the raw 2x2 block on {|01>, |10>}; dividing out
    ``global_phase`` (contributed by the identity term in 2J_y²) leaves
    the named rotation, with ``residual`` the entrywise gap.  The
    complement {|00>, |11>} is mixed among itself and its block is
    recorded; ``leakage`` bounds the coupling between the two sectors.
    """

    axis: str
    angle: float
    matrix: ComplexMatrix
    global_phase: complex
    leakage: float
    complement_block: ComplexMatrix
    residual: float

    @property
    def rotation(self) -> np.ndarray:
        return np.asarray(self.matrix) / self.global_phase


def encoded_bloch_rotation(axis: str, angle: float) -> EncodedRotation:
    """Rotate the {|01>, |10>} code about x or y with one two-ion pulse.

    The pulse generators 2J_y² = σ_x σ_x + I (axis x) and σ_y σ_x + I
    (axis y) preserve the code span exactly, so the code block equals the
    rotation by ``angle`` times the recorded identity-term phase.
    """
    if axis not in _ROTATION_PHASES:
        raise ValueError("axis must be 'x' or 'y'")
    area = (-float(angle)) % TWO_PI
    gate = sm_gate(SMGateParams.for_pulse_area(_ROTATION_PHASES[axis], area))
    code = np.ix_(_CODE_INDICES, _CODE_INDICES)
    comp = np.ix_(_COMPLEMENT_INDICES, _COMPLEMENT_INDICES)
    cross1 = np.ix_(_COMPLEMENT_INDICES, _CODE_INDICES)
    cross2 = np.ix_(_CODE_INDICES, _COMPLEMENT_INDICES)
    block = gate[code]
    leakage = float(max(np.max(np.abs(gate[cross1])), np.max(np.abs(gate[cross2]))))
    if leakage > 1e-10:
        raise ValueError(f"pulse leaks out of the code span ({leakage:.2e})")
    target = pauli_rotation(axis, angle)
    phase = complex(np.trace(target.conj().T @ block) / 2.0)
    phase = phase / abs(phase)
    residual = float(np.max(np.abs(block - phase * target)))
    return EncodedRotation(
        axis=axis,
        angle=float(angle),
        matrix=block,
        global_phase=phase,
        leakage=leakage,
        complement_block=gate[comp],
        residual=residual,
    )


_ENTANGLER_PAIRS = (("0101", "1010"), ("0110", "1001"), ("1001", "0110"), ("1010", "0101"))


@dataclass(frozen=True)
class FourIonReport:
    """Image check for the quarter-turn pairwise σ_y σ_y pulse.

    Each conjoined basis state |b> must map to (|b> − i|b̄>)/√2 with b̄
    the bitwise complement, after dividing out ``global_phase`` (which
    collects the 2I term in 2J_y² and comes out e^{iπ/4}).  The whole
    16x16 gate also equals e^{iπ/4}/√2 (I − i σ_y⊗σ_y⊗σ_y⊗σ_y);
    ``closed_form_residual`` measures that identity.  ``commutes_with_sz``
    is computed, not assumed: the σ_y σ_y sum anticommutes with S_z, so
    the gate preserves the span only because the four states share the
    S_z = 0 eigenvalue.
    """

    global_phase: complex
    image_residuals: tuple
    span_leakage: float
    unitarity: float
    closed_form_residual: float
    commutes_with_sz: bool
    passed: bool


def four_ion_entangler_check(atol: float = 1e-9) -> FourIonReport:
    """Check the four listed images of the area-π/2 four-ion pulse."""
    gate = sm_gate(SMGateParams.for_pulse_area((0.0, 0.0, 0.0, 0.0), math.pi / 2.0))
    dim = 16
    unitarity = float(np.max(np.abs(gate.conj().T @ gate - np.eye(dim))))
    yyyy = kron_all(SY, SY, SY, SY)
    closed_form = np.exp(1j * math.pi / 4.0) / math.sqrt(2.0) * (np.eye(dim) - 1j * yyyy)
    closed_form_residual = float(np.max(np.abs(gate - closed_form)))

    targets = []
    images = []
    for src, dst in _ENTANGLER_PAIRS:
        t = np.zeros(dim, dtype=np.complex128)
        t[int(src, 2)] = 1.0 / math.sqrt(2.0)
        t[int(dst, 2)] = -1j / math.sqrt(2.0)
        targets.append(t)
        images.append(gate[:, int(src, 2)])
    phase = complex(np.vdot(targets[0], images[0]))
    phase = phase / abs(phase)
    residuals = tuple(
        float(np.linalg.norm(img / phase - t)) for img, t in zip(images, targets)
    )

    span = sorted(int(src, 2) for src, _ in _ENTANGLER_PAIRS)
    outside = [i for i in range(dim) if i not in span]
    span_leakage = float(np.max(np.abs(gate[np.ix_(outside, span)])))

    sz = sum(_one_ion(SZ, 4, i) for i in range(4)) / 2.0
    commutes = bool(np.max(np.abs(gate @ sz - sz @ gate)) <= 1e-9)

    passed = (
        max(residuals) <= atol and span_leakage <= atol and unitarity <= atol
    )
    report = FourIonReport(
        global_phase=phase,
        image_residuals=residuals,
        span_leakage=span_leakage,
        unitarity=unitarity,
        closed_form_residual=closed_form_residual,
        commutes_with_sz=commutes,
        passed=passed,
    )
    if not passed:
        raise ValueError(
            "four-ion images off target: residuals "
            f"{residuals}, leakage {span_leakage:.2e}, unitarity {unitarity:.2e}"
        )
    return report
