"""Collective-decoherence operators and their decoherence-free bases.

When n qubits couple identically to a shared bath, the error operators
are the total-spin components S_alpha = sum_i sigma_alpha^(i)/2.  The
register then splits into sectors labelled by angular-momentum data, and
quantum information survives inside the degeneracy labels of those
sectors.  This module builds the collective operators, enumerates the
weak basis (fixed Hamming weight) and the strong basis (angular-momentum
addition paths with explicit amplitudes), lists the states annihilated
by the collective lowering operator, and provides the operators that act
purely on the protected labels: the exchange interaction and the general
two-qubit Hamiltonian commuting with S_z.  A discrete-mode dephasing
coefficient matrix rounds out the model-building side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .core import ComplexMatrix, as_matrix
from .pauli import SX, SY, SZ

HALF = Fraction(1, 2)

# Dense matrices on more than ten qubits stop being practical; every
# entry point that builds register-sized operators enforces this cap.
MAX_QUBITS = 10

_E0 = np.array([1.0, 0.0], dtype=np.complex128)
_E1 = np.array([0.0, 1.0], dtype=np.complex128)

# Single-qubit lowering operator |1><0| = (sigma_x - i sigma_y)/2.
_LOWER = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=np.complex128)


def _check_qubit_count(n: int) -> int:
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
        raise ValueError("qubit count must be an integer")
    if not 1 <= n <= MAX_QUBITS:
        raise ValueError(f"qubit count must be between 1 and {MAX_QUBITS}")
    return int(n)


def _as_spin(value) -> Fraction:
    """Coerce a spin label to an exact integer or half-integer Fraction."""
    try:
        j = Fraction(value)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"not a valid spin label: {value!r}") from exc
    if j.denominator not in (1, 2):
        raise ValueError(f"spin labels must be integers or half-integers, got {value!r}")
    return j


def _embed_single(op: np.ndarray, n: int, pos: int) -> np.ndarray:
    """Place a one-qubit operator at ``pos`` (qubit 0 is the leftmost factor)."""
    left = np.eye(2**pos, dtype=np.complex128)
    right = np.eye(2 ** (n - 1 - pos), dtype=np.complex128)
    return np.kron(np.kron(left, op), right)


def _collective_sum(op: np.ndarray, n: int) -> np.ndarray:
    dim = 2**n
    total = np.zeros((dim, dim), dtype=np.complex128)
    for pos in range(n):
        total += _embed_single(op, n, pos)
    return total


@dataclass(frozen=True, eq=False)
class CollectiveOps:
    """Total-spin operators S_alpha = sum_i sigma_alpha^(i)/2 on n qubits.

    The six matrices form a spin-n/2-compatible su(2) representation:
    [S_x, S_y] = i S_z and cyclic, S_pm = S_x +- i S_y, and S_squared is
    the Casimir S_x^2 + S_y^2 + S_z^2.  All of that is checked here, so a
    constructed instance can be trusted downstream.
    """

    n: int
    s_x: ComplexMatrix
    s_y: ComplexMatrix
    s_z: ComplexMatrix
    s_plus: ComplexMatrix
    s_minus: ComplexMatrix
    s_squared: ComplexMatrix

    def __init__(self, n, s_x, s_y, s_z, s_plus, s_minus, s_squared) -> None:
        n = _check_qubit_count(n)
        dim = 2**n
        mats = {}
        for name, raw in (
            ("s_x", s_x),
            ("s_y", s_y),
            ("s_z", s_z),
            ("s_plus", s_plus),
            ("s_minus", s_minus),
            ("s_squared", s_squared),
        ):
            m = as_matrix(raw)
            if m.shape != (dim, dim):
                raise ValueError(f"{name} must be {dim}x{dim} for {n} qubits")
            mats[name] = m

        tol = 1e-9 * n
        x, y, z = mats["s_x"], mats["s_y"], mats["s_z"]
        for a, b, c in ((x, y, z), (y, z, x), (z, x, y)):
            if np.max(np.abs(a @ b - b @ a - 1j * c)) > tol:
                raise ValueError("collective components do not satisfy the su(2) relations")
        if np.max(np.abs(mats["s_plus"] - (x + 1j * y))) > tol:
            raise ValueError("s_plus must equal s_x + i s_y")
        if np.max(np.abs(mats["s_minus"] - (x - 1j * y))) > tol:
            raise ValueError("s_minus must equal s_x - i s_y")
        if np.max(np.abs(mats["s_squared"] - (x @ x + y @ y + z @ z))) > tol:
            raise ValueError("s_squared must equal the sum of squared components")

        object.__setattr__(self, "n", n)
        for name, m in mats.items():
            object.__setattr__(self, name, m)

    @property
    def dim(self) -> int:
        return 2**self.n


def collective_ops(n: int) -> CollectiveOps:
    """Build the collective spin operators for ``n`` qubits."""
    n = _check_qubit_count(n)
    s_x = 0.5 * _collective_sum(SX, n)
    s_y = 0.5 * _collective_sum(SY, n)
    s_z = 0.5 * _collective_sum(SZ, n)
    return CollectiveOps(
        n,
        s_x,
        s_y,
        s_z,
        s_x + 1j * s_y,
        s_x - 1j * s_y,
        s_x @ s_x + s_y @ s_y + s_z @ s_z,
    )


@dataclass(frozen=True)
class WeakPath:
    """A computational basis state tracked by its running S_z eigenvalues.

    ``partial_sums[k-1]`` is the S_z eigenvalue of the first k qubits,
    (k - 2*prefix_weight)/2, so the tuple traces the state's path when
    qubits are revealed one at a time.
    """

    bits: str
    hamming: int
    partial_sums: tuple

    def __post_init__(self) -> None:
        if not self.bits or any(b not in "01" for b in self.bits):
            raise ValueError("bits must be a nonempty string of 0s and 1s")
        if self.hamming != self.bits.count("1"):
            raise ValueError("hamming weight does not match the bit string")
        expected = []
        weight = 0
        for k, b in enumerate(self.bits, start=1):
            weight += b == "1"
            expected.append(Fraction(k - 2 * weight, 2))
        if tuple(expected) != tuple(self.partial_sums):
            raise ValueError("partial sums do not match the bit string")

    @classmethod
    def from_bits(cls, bits: str) -> "WeakPath":
        weight = 0
        sums = []
        for k, b in enumerate(bits, start=1):
            weight += b == "1"
            sums.append(Fraction(k - 2 * weight, 2))
        return cls(bits=bits, hamming=bits.count("1"), partial_sums=tuple(sums))

    @property
    def n(self) -> int:
        return len(self.bits)

    @property
    def index(self) -> int:
        return int(self.bits, 2)

    @property
    def state(self) -> np.ndarray:
        vec = np.zeros(2**self.n, dtype=np.complex128)
        vec[self.index] = 1.0
        return vec


def weak_degeneracy(n: int, h: int) -> int:
    """Dimension of the weight-h sector: C(n, h)."""
    return math.comb(n, h)


def weak_dfs_basis(n: int, h: int) -> list:
    """All weight-h computational states, ascending by binary value."""
    n = _check_qubit_count(n)
    if not isinstance(h, (int, np.integer)) or not 0 <= h <= n:
        raise ValueError("Hamming weight out of range")
    paths = []
    for index in range(2**n):
        if index.bit_count() == int(h):
            paths.append(WeakPath.from_bits(format(index, f"0{n}b")))
    return paths


@dataclass(frozen=True, eq=False)
class StrongPath:
    """One angular-momentum addition path together with its state.

    ``j_seq`` records the total spin after each qubit is adjoined,
    starting at 1/2 and moving by +-1/2 without dipping below zero;
    ``amplitudes`` is the unit vector at z-projection ``m`` in the
    computational basis.
    """

    j_seq: tuple
    m: Fraction
    amplitudes: np.ndarray

    def __init__(self, j_seq, m, amplitudes) -> None:
        seq = tuple(_as_spin(j) for j in j_seq)
        if not seq or seq[0] != HALF:
            raise ValueError("a path must start at total spin 1/2")
        for prev, cur in zip(seq, seq[1:]):
            if abs(cur - prev) != HALF:
                raise ValueError("consecutive path spins must differ by 1/2")
            if cur < 0:
                raise ValueError("path spins cannot be negative")
        j = seq[-1]
        m = _as_spin(m)
        if not -j <= m <= j or (j - m).denominator != 1:
            raise ValueError(f"projection {m} is not compatible with total spin {j}")
        amps = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
        if amps.shape[0] != 2 ** len(seq):
            raise ValueError("amplitude vector length must be 2**n")
        if abs(np.linalg.norm(amps) - 1.0) > 1e-8:
            raise ValueError("amplitudes must form a unit vector")
        object.__setattr__(self, "j_seq", seq)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def n(self) -> int:
        return len(self.j_seq)

    @property
    def j(self) -> Fraction:
        return self.j_seq[-1]


def reachable_strong_j(n: int) -> tuple:
    """Total spins that n qubits can reach, ascending."""
    n = _check_qubit_count(n)
    lowest = Fraction(n % 2, 2)
    return tuple(lowest + k for k in range(n // 2 + 1))


def strong_degeneracy(n: int, j) -> int:
    """Number of paths reaching total spin j on n qubits."""
    n = _check_qubit_count(n)
    j = _as_spin(j)
    if j not in reachable_strong_j(n):
        raise ValueError(f"total spin {j} is not reachable with {n} qubits")
    top = Fraction(n, 2) + j + 1
    bottom = Fraction(n, 2) - j
    count = Fraction(
        int(2 * j + 1) * math.factorial(n),
        math.factorial(int(top)) * math.factorial(int(bottom)),
    )
    return int(count)


def _strong_paths(n: int, j: Fraction) -> list:
    """All valid j_seq tuples ending at j, in lexicographic order."""
    found = []

    def extend(seq: list) -> None:
        k = len(seq)
        if k == n:
            if seq[-1] == j:
                found.append(tuple(seq))
            return
        steps_after = n - k - 1
        for step in (-HALF, HALF):
            nxt = seq[-1] + step
            if nxt < 0:
                continue
            if abs(nxt - j) > Fraction(steps_after, 2):
                continue
            seq.append(nxt)
            extend(seq)
            seq.pop()

    extend([HALF])
    return found


def _ladder_down(top: np.ndarray, j: Fraction, s_minus: np.ndarray) -> dict:
    """From the m=j state, produce every projection via the lowering operator."""
    states = {j: top}
    vec = top
    m = j
    while m > -j:
        coeff = math.sqrt(float(j * (j + 1) - m * (m - 1)))
        vec = (s_minus @ vec) / coeff
        m -= 1
        states[m] = vec
    return states


def _extend_top_state(parent: dict, j_prev: Fraction, j_cur: Fraction) -> np.ndarray:
    """Maximal-m state after adjoining one qubit to a laddered parent.

    Raising the spin appends |0> to the parent's top state.  Lowering it
    combines the two parent projections around the new maximum with the
    fixed coefficients alpha = -sqrt((2J+1)/(2J+2)), beta = 1/sqrt(2J+2);
    a step landing at spin zero flips the overall sign of that pair so
    that the two-qubit singlet comes out as (|01> - |10>)/sqrt(2).
    """
    if j_cur == j_prev + HALF:
        return np.kron(parent[j_prev], _E0)
    if j_cur == 0:
        return (np.kron(parent[HALF], _E1) - np.kron(parent[-HALF], _E0)) / math.sqrt(2.0)
    two_j = float(2 * j_cur)
    alpha = -math.sqrt((two_j + 1.0) / (two_j + 2.0))
    beta = 1.0 / math.sqrt(two_j + 2.0)
    return alpha * np.kron(parent[j_cur + HALF], _E1) + beta * np.kron(parent[j_cur - HALF], _E0)


def strong_dfs_basis(n: int, j) -> list:
    """Every path state reaching total spin j: all paths, all projections.

    Paths come out in lexicographic order of their spin sequence, and
    within each path the projection runs from +j down to -j.
    """
    n = _check_qubit_count(n)
    j = _as_spin(j)
    if j not in reachable_strong_j(n):
        raise ValueError(f"total spin {j} is not reachable with {n} qubits")

    paths = _strong_paths(n, j)
    if len(paths) != strong_degeneracy(n, j):
        raise RuntimeError("path enumeration disagrees with the degeneracy formula")

    lowering = [None, None]
    for k in range(2, n + 1):
        lowering.append(_collective_sum(_LOWER, k))

    out = []
    for seq in paths:
        parent = {HALF: _E0, -HALF: _E1}
        for k in range(2, n + 1):
            top = _extend_top_state(parent, seq[k - 2], seq[k - 1])
            parent = _ladder_down(top, seq[k - 1], lowering[k])
        m = j
        while m >= -j:
            out.append(StrongPath(j_seq=seq, m=m, amplitudes=parent[m]))
            m -= 1
    return out


def amplitude_damping_dfs(n: int) -> list:
    """States annihilated by the collective lowering operator.

    These are the lowest-projection (m = -J) states of every path, the
    fixed points of a register whose only jump operator is S_minus; there
    are C(n, floor(n/2)) of them.  Returned grouped by ascending total
    spin, paths in lexicographic order within each spin.
    """
    n = _check_qubit_count(n)
    vectors = []
    for j in reachable_strong_j(n):
        for path in strong_dfs_basis(n, j):
            if path.m == -j:
                vectors.append(path.amplitudes)
    if len(vectors) != math.comb(n, n // 2):
        raise RuntimeError("lowest-projection count disagrees with the expected dimension")
    return vectors


def _check_pair(n: int, i: int, j: int) -> tuple:
    for label in (i, j):
        if not isinstance(label, (int, np.integer)) or not 0 <= label < n:
            raise ValueError(f"qubit position {label} is out of range for {n} qubits")
    if i == j:
        raise ValueError("need two distinct qubit positions")
    return int(i), int(j)


def embed_pair(op: ComplexMatrix, n: int, i: int, j: int) -> ComplexMatrix:
    """Act with a two-qubit operator on qubits i and j of an n-qubit register.

    The operator's first tensor factor lands on qubit i, the second on
    qubit j; qubit 0 is the leftmost register position.
    """
    op = as_matrix(op)
    if op.shape != (4, 4):
        raise ValueError("expected a two-qubit (4x4) operator")
    n = _check_qubit_count(n)
    i, j = _check_pair(n, i, j)
    shift_i = n - 1 - i
    shift_j = n - 1 - j
    clear = ~((1 << shift_i) | (1 << shift_j))
    dim = 2**n
    out = np.zeros((dim, dim), dtype=np.complex128)
    for col in range(dim):
        src = 2 * ((col >> shift_i) & 1) + ((col >> shift_j) & 1)
        base = col & clear
        for dst in range(4):
            val = op[dst, src]
            if val == 0.0:
                continue
            row = base | ((dst >> 1) << shift_i) | ((dst & 1) << shift_j)
            out[row, col] += val
    return out


def exchange(n: int, i: int, j: int) -> ComplexMatrix:
    """The exchange interaction E swapping qubits i and j (0-based).

    E = (I + sigma_x sigma_x + sigma_y sigma_y + sigma_z sigma_z)/2 on
    the pair, which permutes the two tensor factors, squares to the
    identity, and commutes with every collective spin component.
    """
    n = _check_qubit_count(n)
    i, j = _check_pair(n, i, j)
    shift_i = n - 1 - i
    shift_j = n - 1 - j
    clear = ~((1 << shift_i) | (1 << shift_j))
    dim = 2**n
    out = np.zeros((dim, dim), dtype=np.complex128)
    for col in range(dim):
        bi = (col >> shift_i) & 1
        bj = (col >> shift_j) & 1
        row = (col & clear) | (bj << shift_i) | (bi << shift_j)
        out[row, col] = 1.0
    return out


def weak_commutant_twoqubit(z1, z2, z3, z4, h) -> ComplexMatrix:
    """The general two-qubit Hamiltonian commuting with collective S_z.

    In the computational basis of the pair it is diag(z1, z2, z3, z4)
    plus an exchange-like coupling h between |01> and |10>; embedded on
    any pair of a register it preserves every Hamming-weight sector.
    """
    diag = []
    for z in (z1, z2, z3, z4):
        zc = complex(z)
        if abs(zc.imag) > 0.0:
            raise ValueError("diagonal entries must be real")
        diag.append(zc.real)
    hc = complex(h)
    return np.array(
        [
            [diag[0], 0.0, 0.0, 0.0],
            [0.0, diag[1], hc, 0.0],
            [0.0, np.conj(hc), diag[2], 0.0],
            [0.0, 0.0, 0.0, diag[3]],
        ],
        dtype=np.complex128,
    )


def dephasing_gamma(
    positions: Sequence[float],
    modes: Sequence[tuple],
    temperature: float,
    t: float,
) -> ComplexMatrix:
    """Dephasing coefficient matrix for qubits coupled to discrete bath modes.

    Each mode is a (k, g, omega) triple: wavenumber, coupling amplitude,
    and frequency.  Qubit q couples to the mode with amplitude
    g * exp(i k r_q); passing a sequence of per-qubit amplitudes for g
    overrides the common prefactor, which is how physically disjoint
    couplings are expressed.  The entry Gamma_ij accumulates, per mode,

        (2<N> + 1) * (c_j conj(c_i) zeta + conj(c_j) c_i conj(zeta)),

    where <N> is the thermal occupation 1/(exp(omega/T) - 1) and
    zeta = integral_0^t exp(-i omega (t - tau)) d tau.  The result is
    hermitized, since only the symmetric part drives the dissipator.
    Equal positions give a constant matrix (collective dephasing);
    one-hot per-qubit amplitudes give a diagonal one (independent
    dephasing).
    """
    pos = np.array([float(r) for r in positions], dtype=float)
    n = pos.shape[0]
    if n == 0:
        raise ValueError("need at least one qubit position")
    if temperature < 0:
        raise ValueError("temperature must be nonnegative")
    t = float(t)

    gamma = np.zeros((n, n), dtype=np.complex128)
    for k, g, omega in modes:
        k = float(k)
        omega = float(omega)
        if omega <= 0:
            raise ValueError("mode frequencies must be positive")
        if np.isscalar(g) or isinstance(g, complex):
            amps = np.full(n, complex(g), dtype=np.complex128)
        else:
            amps = np.asarray(g, dtype=np.complex128).reshape(-1)
            if amps.shape[0] != n:
                raise ValueError("per-qubit amplitudes must match the position count")
        couplings = amps * np.exp(1j * k * pos)
        if temperature == 0:
            occupation = 0.0
        else:
            occupation = 1.0 / math.expm1(omega / temperature)
        zeta = complex(math.sin(omega * t), -(1.0 - math.cos(omega * t))) / omega
        weight = 2.0 * occupation + 1.0
        cross = np.outer(np.conj(couplings), couplings)
        gamma += weight * (cross * zeta + np.conj(cross) * np.conj(zeta))
    return 0.5 * (gamma + gamma.conj().T)
