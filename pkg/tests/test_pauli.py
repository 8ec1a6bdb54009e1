import itertools

import numpy as np
import pytest

from dfskit.pauli import (
    PauliString,
    StabilizerGroup,
    codespace_projector,
    commute,
    four_two_two,
    is_in_normalizer,
    lattice33_fifth_pair,
    lattice33_logicals,
    lattice33_stabilizers,
    syndrome,
)

LETTERS = "IXYZ"


def random_string(rng, n):
    x = tuple(int(b) for b in rng.integers(0, 2, n))
    z = tuple(int(b) for b in rng.integers(0, 2, n))
    return PauliString(n, x, z, int(rng.integers(0, 4)))


def test_text_round_trip():
    for text in ["+XIZY", "-YYXZ", "+IIII", "-Z", "+iXZ", "-iY"]:
        p = PauliString.from_text(text)
        assert p.to_text() == text
        np.testing.assert_allclose(
            PauliString.from_text(p.to_text()).to_matrix(), p.to_matrix()
        )


def test_single_letter_matrices():
    y = PauliString.from_text("+Y")
    np.testing.assert_allclose(y.to_matrix(), [[0, -1j], [1j, 0]])
    assert y.is_hermitian()
    minus_z = PauliString.from_text("-Z")
    np.testing.assert_allclose(minus_z.to_matrix(), [[-1, 0], [0, 1]])


def test_commute_examples():
    assert commute(PauliString.from_text("+XI"), PauliString.from_text("+IZ"))
    assert not commute(PauliString.from_text("+X"), PauliString.from_text("+Z"))
    assert commute(PauliString.from_text("+XXXX"), PauliString.from_text("+ZZZZ"))


def test_product_matrix_faithfulness():
    rng = np.random.default_rng(11)
    for n in range(1, 6):
        for _ in range(8):
            a, b = random_string(rng, n), random_string(rng, n)
            np.testing.assert_allclose(
                (a * b).to_matrix(), a.to_matrix() @ b.to_matrix(), atol=1e-12
            )


def test_y_from_commutator_phase():
    # (1/2i)[Z, X] = Y, exactly, through the symplectic product
    z = PauliString.from_text("+Z")
    x = PauliString.from_text("+X")
    zx = z * x
    xz = x * z
    assert zx.x_bits == xz.x_bits and zx.z_bits == xz.z_bits
    assert (zx.phase_power - xz.phase_power) % 4 == 2
    y = PauliString(1, xz.x_bits, xz.z_bits, (xz.phase_power + 1) % 4)
    assert y.to_text() == "+Y"
    commutator = z.to_matrix() @ x.to_matrix() - x.to_matrix() @ z.to_matrix()
    np.testing.assert_allclose(commutator / 2j, y.to_matrix(), atol=1e-15)


def test_syndrome_linearity():
    stab, _ = four_two_two()
    rng = np.random.default_rng(3)
    for _ in range(20):
        e1, e2 = random_string(rng, 4), random_string(rng, 4)
        s12 = syndrome(stab, e1 * e2)
        s1 = syndrome(stab, e1)
        s2 = syndrome(stab, e2)
        assert s12 == tuple(a ^ b for a, b in zip(s1, s2))


def test_four_two_two_code():
    stab, logicals = four_two_two()
    p = codespace_projector(stab)
    np.testing.assert_allclose(p @ p, p, atol=1e-12)
    assert np.trace(p).real == pytest.approx(4.0)
    assert syndrome(stab, PauliString.single(4, 0, "Z")) == (1, 0)
    assert syndrome(stab, PauliString.identity(4)) == (0, 0)
    assert is_in_normalizer(stab, PauliString.from_text("+XXII"))
    assert not is_in_normalizer(stab, PauliString.single(4, 0, "X"))
    logicals.check_against(stab)


def test_stabilizer_validation():
    with pytest.raises(ValueError):
        StabilizerGroup([PauliString.from_text("+X"), PauliString.from_text("+Z")])
    with pytest.raises(ValueError):
        StabilizerGroup([PauliString.from_text("+XX"), PauliString.from_text("+XX")])
    with pytest.raises(ValueError):
        # -iY has phase -i with a single Y: not hermitian
        StabilizerGroup([PauliString(1, (1,), (1,), 0)])


def test_lattice_stabilizers_rank():
    stab = lattice33_stabilizers()
    assert len(stab) == 4
    p = codespace_projector(stab)
    assert np.trace(p).real == pytest.approx(32.0)
    np.testing.assert_allclose(p @ p, p, atol=1e-10)


def test_lattice_logicals_consistent():
    stab = lattice33_stabilizers()
    logicals = lattice33_logicals()
    logicals.check_against(stab)
    assert len(logicals.pairs) == 4
    x5, z5 = lattice33_fifth_pair()
    assert x5.to_text() == "+XIIXIIXII"
    assert z5.to_text() == "+ZZZIIIIII"
    assert not commute(x5, z5)
    assert is_in_normalizer(stab, x5)
    assert is_in_normalizer(stab, z5)
    # the pair commutes with the four logical pairs but shares a site with
    # them, so it stays outside the strict set
    for xbar, zbar in logicals.pairs:
        assert commute(x5, zbar) and commute(z5, xbar)


def test_weight1_syndromes_nonzero():
    # every weight-1 Pauli on the grid trips at least one stabilizer
    stab = lattice33_stabilizers()
    for q, letter in itertools.product(range(9), "XYZ"):
        assert any(syndrome(stab, PauliString.single(9, q, letter)))


def test_projector_empty_group():
    empty = StabilizerGroup([])
    np.testing.assert_allclose(codespace_projector(empty, n=2), np.eye(4))
