"""Symplectic Pauli strings, stabilizer groups, and logical operators.

A Pauli string is stored as X/Z bit vectors plus a phase in {1, i, -1, -i};
the operator it denotes is phase * prod_j X_j^{x_j} Z_j^{z_j}.  Qubit 0 is
the leftmost tensor factor everywhere in this package.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import kron_all

ID2 = np.eye(2, dtype=np.complex128)
SX = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SY = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SZ = np.array([[1, 0], [0, -1]], dtype=np.complex128)

PAULI_BY_LETTER = {"I": ID2, "X": SX, "Y": SY, "Z": SZ}

# letter -> (x bit, z bit); Y = i * X Z
_LETTER_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_LETTER = {v: k for k, v in _LETTER_BITS.items()}
_PHASE_TEXT = {0: "+", 1: "+i", 2: "-", 3: "-i"}
_TEXT_PHASE = {"+": 0, "+i": 1, "-": 2, "-i": 3}


@dataclass(frozen=True)
class PauliString:
    """n-qubit Pauli operator in symplectic form.

    ``phase_power`` is the exponent k of i**k, kept exact so that
    commutator constructions like Y = (i/2)[Z, X] come out right.
    """

    n: int
    x_bits: tuple[int, ...]
    z_bits: tuple[int, ...]
    phase_power: int = 0

    def __post_init__(self) -> None:
        if len(self.x_bits) != self.n or len(self.z_bits) != self.n:
            raise ValueError("bit vectors must have length n")
        object.__setattr__(self, "x_bits", tuple(int(b) & 1 for b in self.x_bits))
        object.__setattr__(self, "z_bits", tuple(int(b) & 1 for b in self.z_bits))
        object.__setattr__(self, "phase_power", int(self.phase_power) % 4)

    @property
    def phase(self) -> complex:
        return 1j ** self.phase_power

    def is_hermitian(self) -> bool:
        # (X(x)Z(z))^dagger = (-1)^(x.z) X(x)Z(z), so hermiticity needs
        # phase^2 = (-1)^(x.z), i.e. matching parities
        xz = sum(a & b for a, b in zip(self.x_bits, self.z_bits))
        return self.phase_power % 2 == xz % 2

    def weight(self) -> int:
        return sum(1 for a, b in zip(self.x_bits, self.z_bits) if a or b)

    def mul(self, other: "PauliString") -> "PauliString":
        if self.n != other.n:
            raise ValueError("size mismatch")
        # X(x1)Z(z1) X(x2)Z(z2) = (-1)^(z1.x2) X(x1+x2) Z(z1+z2)
        swap = sum(a & b for a, b in zip(self.z_bits, other.x_bits))
        x = tuple(a ^ b for a, b in zip(self.x_bits, other.x_bits))
        z = tuple(a ^ b for a, b in zip(self.z_bits, other.z_bits))
        power = (self.phase_power + other.phase_power + 2 * swap) % 4
        return PauliString(self.n, x, z, power)

    def __mul__(self, other: "PauliString") -> "PauliString":
        return self.mul(other)

    def to_matrix(self) -> np.ndarray:
        factors = []
        for xb, zb in zip(self.x_bits, self.z_bits):
            f = ID2
            if xb:
                f = SX
            if zb:
                f = f @ SZ
            factors.append(f)
        return self.phase * kron_all(*factors)

    def apply(self, vec: np.ndarray) -> np.ndarray:
        """The image of a state vector, without building the dense matrix.

        X(x)Z(z)|b> = (-1)^(z.b) |b xor x>, so the action is an index
        permutation times a sign pattern; qubit q sits at bit n-1-q of the
        basis index.
        """
        v = np.asarray(vec, dtype=np.complex128).reshape(-1)
        dim = 2 ** self.n
        if v.shape[0] != dim:
            raise ValueError("vector length must be 2**n")
        xmask = 0
        zmask = 0
        for q in range(self.n):
            bit = 1 << (self.n - 1 - q)
            if self.x_bits[q]:
                xmask |= bit
            if self.z_bits[q]:
                zmask |= bit
        idx = np.arange(dim, dtype=np.int64)
        par = idx & zmask
        for shift in (32, 16, 8, 4, 2, 1):
            par ^= par >> shift
        signed = np.where(par & 1, -v, v)
        out = np.empty(dim, dtype=np.complex128)
        out[idx ^ xmask] = signed
        if self.phase_power:
            out *= self.phase
        return out

    def to_text(self) -> str:
        letters = []
        y_count = 0
        for xb, zb in zip(self.x_bits, self.z_bits):
            letters.append(_BITS_LETTER[(xb, zb)])
            y_count += xb & zb
        # letter operators carry i per Y, so the emitted sign absorbs i^(-y)
        sign_power = (self.phase_power - y_count) % 4
        return _PHASE_TEXT[sign_power] + "".join(letters)

    @classmethod
    def from_text(cls, text: str) -> "PauliString":
        s = text.strip()
        sign_power = 0
        for prefix in ("+i", "-i", "+", "-"):
            if s.startswith(prefix):
                sign_power = _TEXT_PHASE[prefix]
                s = s[len(prefix):]
                break
        if not s or any(c not in _LETTER_BITS for c in s):
            raise ValueError(f"not a Pauli string: {text!r}")
        x, z, y_count = [], [], 0
        for c in s:
            xb, zb = _LETTER_BITS[c]
            x.append(xb)
            z.append(zb)
            y_count += xb & zb
        return cls(len(s), tuple(x), tuple(z), (sign_power + y_count) % 4)

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n, (0,) * n, (0,) * n, 0)

    @classmethod
    def single(cls, n: int, qubit: int, letter: str, sign: int = 1) -> "PauliString":
        if not 0 <= qubit < n:
            raise IndexError("qubit index out of range")
        xb, zb = _LETTER_BITS[letter]
        x = [0] * n
        z = [0] * n
        x[qubit], z[qubit] = xb, zb
        power = (xb & zb) + (0 if sign == 1 else 2)
        return cls(n, tuple(x), tuple(z), power)


def commute(a: PauliString, b: PauliString) -> bool:
    """True iff the symplectic form x_a.z_b + z_a.x_b vanishes mod 2."""
    if a.n != b.n:
        raise ValueError("size mismatch")
    form = sum(xa & zb for xa, zb in zip(a.x_bits, b.z_bits))
    form += sum(za & xb for za, xb in zip(a.z_bits, b.x_bits))
    return form % 2 == 0


def _symplectic_rank(strings: list[PauliString]) -> int:
    if not strings:
        return 0
    rows = [list(p.x_bits) + list(p.z_bits) for p in strings]
    m = np.array(rows, dtype=np.uint8)
    rank = 0
    cols = m.shape[1]
    for c in range(cols):
        pivot = None
        for r in range(rank, m.shape[0]):
            if m[r, c]:
                pivot = r
                break
        if pivot is None:
            continue
        m[[rank, pivot]] = m[[pivot, rank]]
        for r in range(m.shape[0]):
            if r != rank and m[r, c]:
                m[r] ^= m[rank]
        rank += 1
    return rank


@dataclass(frozen=True)
class StabilizerGroup:
    generators: tuple[PauliString, ...]

    def __init__(self, generators) -> None:
        gens = tuple(generators)
        object.__setattr__(self, "generators", gens)
        if not gens:
            return
        n = gens[0].n
        for g in gens:
            if g.n != n:
                raise ValueError("generators act on different qubit counts")
            if not g.is_hermitian():
                raise ValueError(f"generator {g.to_text()} is not hermitian")
        for i, a in enumerate(gens):
            for b in gens[i + 1:]:
                if not commute(a, b):
                    raise ValueError("generators must mutually commute")
        if _symplectic_rank(list(gens)) != len(gens):
            raise ValueError("generators are not independent")
        # independence + hermitian generators together exclude -I from
        # the generated group, so no further check is needed

    @property
    def n(self) -> int:
        return self.generators[0].n if self.generators else 0

    def __len__(self) -> int:
        return len(self.generators)


def codespace_projector(s: StabilizerGroup, n: int | None = None) -> np.ndarray:
    """Dense projector prod_g (I+g)/2 onto the joint +1 eigenspace."""
    qubit_count = s.n or n
    if qubit_count is None:
        raise ValueError("empty group needs an explicit qubit count")
    dim = 2 ** qubit_count
    p = np.eye(dim, dtype=np.complex128)
    for g in s.generators:
        p = p @ (np.eye(dim) + g.to_matrix()) / 2.0
    return p


def syndrome(s: StabilizerGroup, e: PauliString) -> tuple[int, ...]:
    if s.generators and e.n != s.n:
        raise ValueError("size mismatch")
    return tuple(0 if commute(g, e) else 1 for g in s.generators)


def is_in_normalizer(s: StabilizerGroup, p: PauliString) -> bool:
    return all(b == 0 for b in syndrome(s, p))


@dataclass(frozen=True)
class LogicalOperatorSet:
    """(X, Z) pairs that anticommute within a pair and commute across pairs."""

    pairs: tuple[tuple[PauliString, PauliString], ...]

    def __init__(self, pairs) -> None:
        ps = tuple((x, z) for x, z in pairs)
        object.__setattr__(self, "pairs", ps)
        for k, (x, z) in enumerate(ps):
            if commute(x, z):
                raise ValueError(f"pair {k}: X and Z must anticommute")
            for j, (x2, z2) in enumerate(ps):
                if j == k:
                    continue
                for a in (x, z):
                    for b in (x2, z2):
                        if not commute(a, b):
                            raise ValueError(f"pairs {k} and {j} overlap")

    def check_against(self, s: StabilizerGroup) -> None:
        for x, z in self.pairs:
            for op in (x, z):
                if not is_in_normalizer(s, op):
                    raise ValueError(
                        f"{op.to_text()} anticommutes with a stabilizer generator"
                    )


def _string_on(n: int, letter: str, qubits) -> PauliString:
    x = [0] * n
    z = [0] * n
    xb, zb = _LETTER_BITS[letter]
    for q in qubits:
        x[q], z[q] = xb, zb
    return PauliString(n, tuple(x), tuple(z), 0)


def four_two_two() -> tuple[StabilizerGroup, LogicalOperatorSet]:
    """The [[4,2,2]] detection code: stabilizers XXXX, ZZZZ and the logical
    pairs (XXII, IZZI) and (IXXI, ZZII)."""
    stab = StabilizerGroup([
        PauliString.from_text("+XXXX"),
        PauliString.from_text("+ZZZZ"),
    ])
    logicals = LogicalOperatorSet([
        (PauliString.from_text("+XXII"), PauliString.from_text("+IZZI")),
        (PauliString.from_text("+IXXI"), PauliString.from_text("+ZZII")),
    ])
    logicals.check_against(stab)
    return stab, logicals


def grid_index(row: int, col: int, side: int = 3) -> int:
    """Row-major qubit index of site (row, col), both 1-based."""
    if not (1 <= row <= side and 1 <= col <= side):
        raise IndexError("site off the grid")
    return (row - 1) * side + (col - 1)


def lattice33_stabilizers() -> StabilizerGroup:
    """Four stabilizers of the 3x3 grid model: sigma_z over row pairs (1,2)
    and (2,3), sigma_x over column pairs (1,2) and (2,3)."""
    n = 9
    rows = lambda *rs: [grid_index(r, c) for r in rs for c in (1, 2, 3)]
    cols = lambda *cs: [grid_index(r, c) for c in cs for r in (1, 2, 3)]
    return StabilizerGroup([
        _string_on(n, "Z", rows(1, 2)),
        _string_on(n, "Z", rows(2, 3)),
        _string_on(n, "X", cols(1, 2)),
        _string_on(n, "X", cols(2, 3)),
    ])


def lattice33_logicals() -> LogicalOperatorSet:
    """Logical pairs 1..4 of the 3x3 grid model, the ones its Hamiltonian
    is written in."""
    n = 9
    g = grid_index
    pair = lambda xq, zq: (_string_on(n, "X", xq), _string_on(n, "Z", zq))
    return LogicalOperatorSet([
        pair([g(1, 1), g(1, 2)], [g(1, 1), g(2, 1)]),
        pair([g(1, 2), g(1, 3)], [g(1, 3), g(2, 3)]),
        pair([g(3, 1), g(3, 2)], [g(2, 1), g(3, 1)]),
        pair([g(3, 2), g(3, 3)], [g(2, 3), g(3, 3)]),
    ])


def lattice33_fifth_pair() -> tuple[PauliString, PauliString]:
    """The fifth anticommuting normalizer pair that labels the grid model's
    two-fold level degeneracy: X down the first column, Z across the first
    row.

    Each line operator crosses every stabilizer slab and every grid bond in
    an even number of sites, so both commute with the stabilizers and with
    the grid Hamiltonian, while sharing exactly one site with each other.
    Every overlap with the four corner pairs is even as well, so appending
    this pair to lattice33_logicals yields the full five-pair normalizer
    basis of the code.
    """
    n = 9
    g = grid_index
    x5 = _string_on(n, "X", [g(1, 1), g(2, 1), g(3, 1)])
    z5 = _string_on(n, "Z", [g(1, 1), g(1, 2), g(1, 3)])
    return x5, z5
