"""Open-system evolution in three interchangeable representations.

A system coupled to a finite bath evolves unitarily on the joint space;
tracing out the bath yields a completely positive map on the system.  This
module carries that map between its operator-sum (Kraus) form, its fixed
operator-basis (chi matrix) form, and the Markovian semigroup master
equation, and computes the short-time decoherence rate hierarchy used to
quantify how fast a state leaves its initial condition.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import (
    ATOL,
    ComplexMatrix,
    TensorSpace,
    as_matrix,
    eigh,
    expm_hermitian_generator,
    kron,
    parallel_map,
    partial_trace,
    trace_distance,
)

_SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)
_SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=np.complex128)
_SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=np.complex128)

# Spectral support cutoff for bath eigenvalues: eigenvectors of the bath
# state with weight below this contribute nothing to the reduced dynamics.
_SUPPORT_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """A trace-preserving operator-sum map rho -> sum_i A_i rho A_i^dag."""

    ops: tuple

    def __init__(self, ops: Sequence[ComplexMatrix], atol: float = ATOL) -> None:
        mats = tuple(as_matrix(a) for a in ops)
        if not mats:
            raise ValueError("channel needs at least one operator")
        d = mats[0].shape[0]
        for a in mats:
            if a.shape != (d, d):
                raise ValueError("all channel operators must be square and same-dim")
        total = sum(a.conj().T @ a for a in mats)
        if np.max(np.abs(total - np.eye(d))) > 10 * atol:
            raise ValueError("operators do not resolve the identity")
        object.__setattr__(self, "ops", mats)

    @property
    def dim(self) -> int:
        return self.ops[0].shape[0]


@dataclass(frozen=True, eq=False)
class SystemBathModel:
    """A finite system-bath pair: joint hamiltonian plus initial bath state.

    The joint space is ordered system factors first, bath factors after.
    """

    sys_space: TensorSpace
    bath_space: TensorSpace
    hamiltonian: ComplexMatrix
    bath_state: ComplexMatrix

    def __init__(
        self,
        sys_space: TensorSpace,
        bath_space: TensorSpace,
        hamiltonian,
        bath_state,
        atol: float = ATOL,
    ) -> None:
        h = as_matrix(hamiltonian)
        rho_e = as_matrix(bath_state)
        d = sys_space.total_dim * bath_space.total_dim
        if h.shape != (d, d):
            raise ValueError("hamiltonian must act on the joint space")
        if np.max(np.abs(h - h.conj().T)) > 10 * atol:
            raise ValueError("hamiltonian must be hermitian")
        de = bath_space.total_dim
        if rho_e.shape != (de, de):
            raise ValueError("bath state must act on the bath space")
        if np.max(np.abs(rho_e - rho_e.conj().T)) > 10 * atol:
            raise ValueError("bath state must be hermitian")
        if np.min(np.linalg.eigvalsh((rho_e + rho_e.conj().T) / 2)) < -100 * atol:
            raise ValueError("bath state must be positive semidefinite")
        if abs(np.trace(rho_e) - 1.0) > 100 * atol:
            raise ValueError("bath state must have unit trace")
        object.__setattr__(self, "sys_space", sys_space)
        object.__setattr__(self, "bath_space", bath_space)
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "bath_state", rho_e)

    @property
    def joint_space(self) -> TensorSpace:
        return TensorSpace(self.sys_space.dims + self.bath_space.dims)

    @property
    def sys_dim(self) -> int:
        return self.sys_space.total_dim


def _validate_fixed_basis(basis: Sequence[ComplexMatrix], atol: float) -> tuple:
    mats = tuple(as_matrix(f) for f in basis)
    if not mats:
        raise ValueError("bad basis: empty")
    d = mats[0].shape[0]
    if len(mats) != d * d:
        raise ValueError("bad basis: need d^2 operators for a complete basis")
    if np.max(np.abs(mats[0] - np.eye(d) / np.sqrt(d))) > 1e-9:
        raise ValueError("bad basis: first element must be I/sqrt(d)")
    for k, f in enumerate(mats):
        if f.shape != (d, d):
            raise ValueError("bad basis: mixed dimensions")
        if k > 0:
            if np.max(np.abs(f - f.conj().T)) > 1e-9:
                raise ValueError("bad basis: non-hermitian element")
            if abs(np.trace(f)) > 1e-9:
                raise ValueError("bad basis: traceless part has nonzero trace")
    gram = np.array([[np.trace(a.conj().T @ b) for b in mats] for a in mats])
    if np.max(np.abs(gram - np.eye(d * d))) > 1e-8:
        raise ValueError("bad basis: not trace-orthonormal")
    return mats


@dataclass(frozen=True, eq=False)
class ChiMatrix:
    """Process matrix chi over a fixed trace-orthonormal operator basis.

    The first basis element is I/sqrt(d); the rest are traceless hermitian.
    The map acts as rho -> sum_ab chi[a,b] F_a rho F_b^dag.
    """

    basis: tuple
    chi: ComplexMatrix

    def __init__(self, basis: Sequence[ComplexMatrix], chi, atol: float = ATOL) -> None:
        mats = _validate_fixed_basis(basis, atol)
        d = mats[0].shape[0]
        c = as_matrix(chi)
        if c.shape != (d * d, d * d):
            raise ValueError("chi must be d^2 x d^2")
        if np.max(np.abs(c - c.conj().T)) > 10 * atol:
            raise ValueError("chi must be hermitian")
        if np.min(np.linalg.eigvalsh((c + c.conj().T) / 2)) < -1e-9:
            raise ValueError("chi must be positive semidefinite")
        if abs(np.trace(c).real - d) > 1e-8:
            raise ValueError("chi diagonal must sum to the space dimension")
        object.__setattr__(self, "basis", mats)
        object.__setattr__(self, "chi", c)

    @property
    def dim(self) -> int:
        return self.basis[0].shape[0]

    def evolve(self, rho) -> np.ndarray:
        r = as_matrix(rho)
        if r.shape != (self.dim, self.dim):
            raise ValueError("dimension mismatch")
        out = np.zeros_like(r)
        for a, fa in enumerate(self.basis):
            for b, fb in enumerate(self.basis):
                if abs(self.chi[a, b]) > 1e-15:
                    out += self.chi[a, b] * (fa @ r @ fb.conj().T)
        return out


@dataclass(frozen=True, eq=False)
class LindbladModel:
    """Markovian generator data: a hamiltonian and (operator, rate) pairs.

    The dissipator follows the convention with the 1/2 prefactor on the
    double-commutator form, i.e. each pair (L, g) contributes
    g * (L rho L^dag - {L^dag L, rho}/2).
    """

    hamiltonian: ComplexMatrix
    lindblads: tuple

    def __init__(self, hamiltonian, lindblads: Sequence, atol: float = ATOL) -> None:
        h = as_matrix(hamiltonian)
        if np.max(np.abs(h - h.conj().T)) > 10 * atol:
            raise ValueError("hamiltonian must be hermitian")
        d = h.shape[0]
        pairs = []
        for op, rate in lindblads:
            m = as_matrix(op)
            if m.shape != (d, d):
                raise ValueError("lindblad operator dimension mismatch")
            r = float(rate)
            if r < 0.0:
                raise ValueError("rates must be non-negative")
            pairs.append((m, r))
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "lindblads", tuple(pairs))

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]


def _fix_vector_phase(v: np.ndarray) -> np.ndarray:
    """Rotate a vector so its largest-magnitude entry is real positive."""
    j = int(np.argmax(np.abs(v)))
    piv = v[j]
    if abs(piv) < 1e-300:
        return v
    return v * (piv.conjugate() / abs(piv))


def osr_from_model(m: SystemBathModel, t: float, env_basis: Sequence) -> KrausChannel:
    """Kraus operators sqrt(p_nu) <mu|U(t)|nu> of the reduced dynamics.

    ``nu`` runs over the spectral support of the bath state and ``mu`` over
    the supplied orthonormal bath basis; zero operators are kept so the
    returned list always has len(env_basis) operators per support vector.
    """
    de = m.bath_space.total_dim
    ds = m.sys_dim
    basis = [np.asarray(v, dtype=np.complex128).reshape(-1) for v in env_basis]
    if len(basis) != de or any(v.shape != (de,) for v in basis):
        raise ValueError("basis not orthonormal: wrong size for the bath space")
    bmat = np.column_stack(basis)
    if np.max(np.abs(bmat.conj().T @ bmat - np.eye(de))) > 1e-9:
        raise ValueError("basis not orthonormal")

    u = expm_hermitian_generator(m.hamiltonian, t)
    u4 = u.reshape(ds, de, ds, de)
    probs, vecs = eigh(m.bath_state)
    order = np.argsort(probs)[::-1]
    ops = []
    for idx in order:
        p = float(probs[idx].real)
        if p <= _SUPPORT_TOL:
            continue
        nu = _fix_vector_phase(vecs[:, idx])
        for mu in basis:
            block = np.einsum("e,setf,f->st", mu.conj(), u4, nu)
            ops.append(np.sqrt(p) * block)
    return KrausChannel(ops)


def apply_channel(c: KrausChannel, rho) -> np.ndarray:
    """Evolve a state through the operator sum rho -> sum A rho A^dag."""
    r = as_matrix(rho)
    if r.shape != (c.dim, c.dim):
        raise ValueError("dimension mismatch")
    out = np.zeros_like(r)
    for a in c.ops:
        out += a @ r @ a.conj().T
    return out


def is_unitary_channel(
    c: KrausChannel, atol: float = 1e-9
) -> Optional[tuple[np.ndarray, np.ndarray]]:
    """Detect whether every Kraus operator is proportional to one unitary.

    Returns (U, coefficients) with A_i = c_i U and sum |c_i|^2 = 1 when the
    channel acts unitarily, and None otherwise.
    """
    d = c.dim
    norms = [float(np.trace(a.conj().T @ a).real) for a in c.ops]
    k = int(np.argmax(norms))
    scale = np.sqrt(norms[k] / d)
    u = c.ops[k] / scale
    if np.max(np.abs(u.conj().T @ u - np.eye(d))) > 100 * atol:
        return None
    coeffs = np.zeros(len(c.ops), dtype=np.complex128)
    for i, a in enumerate(c.ops):
        ci = np.trace(u.conj().T @ a) / d
        if np.max(np.abs(a - ci * u)) > 100 * atol:
            return None
        coeffs[i] = ci
    return u, coeffs


def pauli_product_basis(n_qubits: int) -> list[np.ndarray]:
    """Trace-orthonormal n-qubit basis of Pauli products over sqrt(2^n).

    The identity term comes first, so the list is a valid fixed basis for
    chi extraction.
    """
    if n_qubits < 1:
        raise ValueError("need at least one qubit")
    singles = [np.eye(2, dtype=np.complex128), _SIGMA_X, _SIGMA_Y, _SIGMA_Z]
    mats = [np.array([[1.0]], dtype=np.complex128)]
    for _ in range(n_qubits):
        mats = [kron(m, s) for m in mats for s in singles]
    norm = np.sqrt(2.0**n_qubits)
    return [m / norm for m in mats]


def chi_from_kraus(c: KrausChannel, basis: Sequence) -> ChiMatrix:
    """Expand each Kraus operator in the fixed basis and form chi.

    With A_i = sum_a b[i,a] F_a the process matrix is
    chi[a,b] = sum_i b[i,a] conj(b[i,b]).
    """
    mats = _validate_fixed_basis(basis, ATOL)
    if mats[0].shape[0] != c.dim:
        raise ValueError("bad basis: dimension mismatch with channel")
    b = np.array([[np.trace(f.conj().T @ a) for f in mats] for a in c.ops])
    chi = b.T @ b.conj()
    return ChiMatrix(mats, chi)


def lindblad_generator(m: LindbladModel) -> np.ndarray:
    """The vectorized semigroup generator G with vec(drho/dt) = G vec(rho).

    Row-major vectorization: vec(A X B) = (A kron B^T) vec(X).
    """
    d = m.dim
    eye = np.eye(d, dtype=np.complex128)
    h = m.hamiltonian
    g = -1j * (kron(h, eye) - kron(eye, h.T))
    for op, rate in m.lindblads:
        anti = op.conj().T @ op
        g += rate * (
            kron(op, op.conj())
            - 0.5 * kron(anti, eye)
            - 0.5 * kron(eye, anti.T)
        )
    return g


def _lindblad_apply(m: LindbladModel, rho: np.ndarray) -> np.ndarray:
    out = -1j * (m.hamiltonian @ rho - rho @ m.hamiltonian)
    for op, rate in m.lindblads:
        anti = op.conj().T @ op
        out += rate * (op @ rho @ op.conj().T - 0.5 * (anti @ rho + rho @ anti))
    return out


def sme_evolve(m: LindbladModel, rho0, t: float, dt: float) -> np.ndarray:
    """Integrate the master equation with fixed-step RK4 on vec(rho).

    The step must satisfy ||G|| * dt <= 0.05 with G the vectorized
    generator; trace drift and negativity are checked on the result.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    if t < 0.0:
        raise ValueError("t must be non-negative")
    r = as_matrix(rho0)
    if r.shape != (m.dim, m.dim):
        raise ValueError("dimension mismatch")
    if np.max(np.abs(r - r.conj().T)) > 1e-8:
        raise ValueError("initial state is not a density matrix (not hermitian)")
    if abs(np.trace(r).real - 1.0) > 1e-8:
        raise ValueError("initial state is not a density matrix (trace != 1)")
    if np.min(np.linalg.eigvalsh((r + r.conj().T) / 2)) < -1e-8:
        raise ValueError("initial state is not a density matrix (negative)")

    gen = lindblad_generator(m)
    gnorm = float(np.linalg.norm(gen, 2))
    if gnorm * dt > 0.05 + 1e-12:
        raise ValueError("step too large: require ||generator|| * dt <= 0.05")
    if t == 0.0:
        return r.copy()

    steps = max(1, int(np.ceil(t / dt - 1e-12)))
    h = t / steps
    v = r.reshape(-1)
    for _ in range(steps):
        k1 = gen @ v
        k2 = gen @ (v + 0.5 * h * k1)
        k3 = gen @ (v + 0.5 * h * k2)
        k4 = gen @ (v + h * k3)
        v = v + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    out = v.reshape(m.dim, m.dim)

    drift = abs(np.trace(out).real - 1.0)
    if drift >= 1e-8:
        raise RuntimeError(f"trace drift {drift:.2e} exceeds 1e-8")
    low = float(np.min(np.linalg.eigvalsh((out + out.conj().T) / 2)))
    if low <= -1e-6:
        raise RuntimeError(f"negative eigenvalue {low:.2e} below -1e-6")
    return out


def _signed_root(x: float, n: int) -> float:
    if x == 0.0:
        return 0.0
    return float(np.copysign(abs(x) ** (1.0 / n), x))


def _derivatives_system_bath(
    m: SystemBathModel, rho_s: np.ndarray, n_max: int
) -> list[np.ndarray]:
    """Reduced derivatives Tr_E[(-i ad_H)^n (rho_S x rho_E)] at t = 0."""
    joint = kron(rho_s, m.bath_state)
    space = m.joint_space
    keep = tuple(range(len(m.sys_space.dims)))
    out = []
    cur = joint
    for _ in range(n_max):
        cur = -1j * (m.hamiltonian @ cur - cur @ m.hamiltonian)
        out.append(partial_trace(cur, space, keep))
    return out


def decoherence_rates(model, rho0, n_max: int) -> list[float]:
    """Short-time rate hierarchy 1/tau_n = {Tr[rho(0) rho^(n)(0)]}^(1/n).

    Derivatives are exact: nested commutators for a system-bath model
    (traced over the bath), repeated generator application for a semigroup
    model.  Negative traces map to negative rates through a signed root.
    """
    if not 1 <= n_max <= 4:
        raise ValueError("n_max must be between 1 and 4")
    r = as_matrix(rho0)
    if isinstance(model, SystemBathModel):
        if r.shape != (model.sys_dim, model.sys_dim):
            raise ValueError("dimension mismatch")
        derivs = _derivatives_system_bath(model, r, n_max)
    elif isinstance(model, LindbladModel):
        if r.shape != (model.dim, model.dim):
            raise ValueError("dimension mismatch")
        derivs = []
        cur = r
        for _ in range(n_max):
            cur = _lindblad_apply(model, cur)
            derivs.append(cur)
    else:
        raise TypeError("model must be SystemBathModel or LindbladModel")
    rates = []
    for n, dn in enumerate(derivs, start=1):
        overlap = float(np.trace(r @ dn).real)
        rates.append(_signed_root(overlap, n))
    return rates


def phase_damping_kraus(lam: float, t: float) -> KrausChannel:
    """Single-qubit phase damping: off-diagonals shrink by exp(-lam*t)."""
    if lam < 0.0 or t < 0.0:
        raise ValueError("rate and time must be non-negative")
    decay = np.exp(-lam * t)
    a1 = np.sqrt((1.0 + decay) / 2.0) * np.eye(2, dtype=np.complex128)
    a2 = np.sqrt((1.0 - decay) / 2.0) * _SIGMA_Z
    return KrausChannel([a1, a2])


def phase_damping_lindblad(lam: float) -> LindbladModel:
    """Semigroup twin of phase_damping_kraus.

    The pair (sigma_z, lam/2) under the 1/2-prefactor dissipator gives
    d rho01/dt = -lam rho01, matching the Kraus family at every t.
    """
    if lam < 0.0:
        raise ValueError("rate must be non-negative")
    zero = np.zeros((2, 2), dtype=np.complex128)
    return LindbladModel(zero, [(_SIGMA_Z, lam / 2.0)])


@dataclass(frozen=True)
class PerturbationScaling:
    """Log-log scaling of the second and third short-time coefficients.

    ``second_order``/``third_order`` hold |Tr[rho0 rho^(n)(0)]| per epsilon;
    the slopes are fit over the strictly positive entries and are None when
    fewer than two such points exist (e.g. a commutant perturbation that
    leaves every coefficient at zero).
    """

    eps: tuple
    second_order: tuple
    third_order: tuple
    slope_second: Optional[float]
    slope_third: Optional[float]


def _fit_slope(eps: np.ndarray, coeffs: np.ndarray) -> Optional[float]:
    mask = (eps > 0.0) & (coeffs > 1e-18)
    if int(np.sum(mask)) < 2:
        return None
    return float(np.polyfit(np.log(eps[mask]), np.log(coeffs[mask]), 1)[0])


def perturbed_rate_scaling(
    base: SystemBathModel,
    perturbation,
    eps_grid: Sequence[float],
    dfs_state,
) -> PerturbationScaling:
    """Fit how the decoherence coefficients of a protected state grow with
    the strength of a hamiltonian perturbation.

    For each epsilon the joint hamiltonian becomes H + eps*V and the n-th
    short-time coefficient |Tr[rho0 rho^(n)(0)]| is computed exactly; the
    returned slopes are the log-log exponents for n = 2 and n = 3.  A
    generic perturbation of a protected state scales as eps^2.
    """
    v = as_matrix(perturbation)
    d = base.joint_space.total_dim
    if v.shape != (d, d):
        raise ValueError("perturbation must act on the joint space")
    if np.max(np.abs(v - v.conj().T)) > 1e-9:
        raise ValueError("perturbation must be hermitian")
    eps = np.asarray([float(e) for e in eps_grid], dtype=np.float64)
    if eps.size < 2 or np.any(eps < 0.0):
        raise ValueError("eps_grid must hold at least two non-negative strengths")
    pos = eps[eps > 0.0]
    if pos.size < 2 or np.max(pos) / np.min(pos) < 10.0:
        raise ValueError("eps_grid must span at least one decade")

    psi = np.asarray(dfs_state, dtype=np.complex128)
    if psi.ndim == 1:
        rho0 = np.outer(psi, psi.conj()) / float(np.vdot(psi, psi).real)
    else:
        rho0 = as_matrix(dfs_state)
    if rho0.shape != (base.sys_dim, base.sys_dim):
        raise ValueError("dfs_state must live on the system space")

    scale = max(float(np.linalg.norm(base.hamiltonian, 2)), 1e-9)
    env = list(np.eye(base.bath_space.total_dim, dtype=np.complex128).T)
    for t in (0.7 / scale, 1.9 / scale):
        evolved = apply_channel(osr_from_model(base, t, env), rho0)
        if trace_distance(evolved, rho0) > 1e-8:
            raise ValueError("dfs_state is not decoherence-free for the base model")

    def coeffs_at(e: float) -> tuple[float, float]:
        model = SystemBathModel(
            base.sys_space,
            base.bath_space,
            base.hamiltonian + e * v,
            base.bath_state,
        )
        derivs = _derivatives_system_bath(model, rho0, 3)
        c2 = abs(float(np.trace(rho0 @ derivs[1]).real))
        c3 = abs(float(np.trace(rho0 @ derivs[2]).real))
        return c2, c3

    pairs = parallel_map(coeffs_at, eps)
    second = np.array([p[0] for p in pairs])
    third = np.array([p[1] for p in pairs])
    return PerturbationScaling(
        eps=tuple(float(e) for e in eps),
        second_order=tuple(float(x) for x in second),
        third_order=tuple(float(x) for x in third),
        slope_second=_fit_slope(eps, second),
        slope_third=_fit_slope(eps, third),
    )
