"""Associative operator algebras and their protected structure.

A noise process touches the system only through the operators it applies,
and everything those operators can do is captured by the complex
associative algebra they generate (closed under products and adjoints).
Finite-dimensional †-closed algebras split into blocks I_{n_J}⊗M_{d_J};
information stored in a degeneracy factor n_J is untouched by the noise.
This module computes the closure, the commutant, and the block
decomposition, finds decoherence-free subspaces and subsystems directly
from a set of noise operators, checks the error-correction matrix
condition for a candidate code, traces a state down to a degeneracy
factor, and symmetrizes operators over a finite unitary group.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import (
    ATOL,
    DEGENERACY_TOL,
    RANK_TOL,
    ComplexMatrix,
    as_matrix,
    eigh,
)

# Residual threshold separating "this subspace is a joint eigenspace"
# from "it is not"; mirrors the stationary-control boundary.
EIGEN_TOL = 1e-8

# Block-diagonalization failures above this residual are errors rather
# than reportable noise.
_BLOCK_TOL = 1e-6


def _orthonormal_rows(rows: np.ndarray, tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal basis for the row space, rank cut at singular value tol."""
    if rows.size == 0:
        return rows.reshape(0, rows.shape[-1])
    norms = np.linalg.norm(rows, axis=1)
    keep = rows[norms > 1e-14]
    if keep.shape[0] == 0:
        return rows[:0]
    keep = keep / np.linalg.norm(keep, axis=1)[:, None]
    _, svals, vh = np.linalg.svd(keep, full_matrices=False)
    rank = int(np.sum(svals > tol))
    return vh[:rank]


def _null_rows(mat: np.ndarray, tol: float = RANK_TOL) -> np.ndarray:
    """Rows y with y @ mat = 0, orthonormal, via SVD of the transpose."""
    if mat.shape[0] == 0:
        return np.eye(0, dtype=np.complex128)
    _, svals, vh = np.linalg.svd(mat.T, full_matrices=True)
    rank = int(np.sum(svals > tol * max(1.0, svals[0] if svals.size else 0.0)))
    return vh[rank:].conj()


def _group_indices(values: np.ndarray, tol: float) -> list[np.ndarray]:
    """Split sorted real values into runs of near-equal entries."""
    groups = []
    start = 0
    for i in range(1, len(values) + 1):
        if i == len(values) or values[i] - values[i - 1] > tol:
            groups.append(np.arange(start, i))
            start = i
    return groups


def _fix_phase(v: np.ndarray) -> complex:
    """Phase that makes the largest-magnitude entry of v real positive."""
    k = int(np.argmax(np.abs(v)))
    z = v[k]
    if abs(z) < 1e-14:
        return 1.0 + 0.0j
    return np.conj(z) / abs(z)


@dataclass(frozen=True, eq=False)
class OperatorAlgebra:
    """A †-closed associative algebra given by a trace-orthonormal span.

    ``span_basis`` lists matrices whose flattenings are orthonormal;
    ``generators`` keeps the operators the algebra was built from, which
    later computations use as a small generating set for commutation
    constraints.
    """

    span_basis: tuple
    generators: tuple

    def __init__(
        self,
        span_basis: Sequence[ComplexMatrix],
        generators: Sequence[ComplexMatrix],
    ) -> None:
        span = tuple(as_matrix(b) for b in span_basis)
        if not span:
            raise ValueError("algebra needs a nonempty span")
        d = span[0].shape[0]
        for b in span:
            if b.shape != (d, d):
                raise ValueError("span elements must be square and same-dim")
        flat = np.array([b.reshape(-1) for b in span])
        gram = flat @ flat.conj().T
        if np.max(np.abs(gram - np.eye(len(span)))) > 1e-7:
            raise ValueError("span basis must be trace-orthonormal")
        eye = np.eye(d, dtype=np.complex128).reshape(-1)
        resid = eye - flat.T @ (flat.conj() @ eye)
        if np.linalg.norm(resid) > 1e-7 * np.sqrt(d):
            raise ValueError("algebra must contain the identity direction")
        object.__setattr__(self, "span_basis", span)
        object.__setattr__(self, "generators", tuple(as_matrix(g) for g in generators))

    @property
    def dim(self) -> int:
        return len(self.span_basis)

    @property
    def space_dim(self) -> int:
        return self.span_basis[0].shape[0]


@dataclass(frozen=True, eq=False)
class IrrepBlock:
    """One isotypic block: the algebra acts on its range as I_n ⊗ M_d."""

    label: int
    degeneracy: int
    dim: int
    isometry: ComplexMatrix

    @property
    def carries_dfs(self) -> bool:
        """True when the degeneracy factor can hold encoded information."""
        return self.degeneracy >= 2


@dataclass(frozen=True, eq=False)
class IrrepDecomposition:
    """Block decomposition of a †-closed algebra.

    Each isometry maps C^{n_J} ⊗ C^{d_J} into the full space; together
    they are orthogonal and complete.  ``seed`` records the probe draw
    that produced the labeling and ``residual`` the worst deviation of a
    conjugated span element from exact I_n ⊗ block form.
    """

    blocks: tuple
    seed: int
    residual: float

    def __init__(self, blocks: Sequence[IrrepBlock], seed: int, residual: float) -> None:
        blocks = tuple(blocks)
        if not blocks:
            raise ValueError("decomposition needs at least one block")
        d = blocks[0].isometry.shape[0]
        total = np.zeros((d, d), dtype=np.complex128)
        for b in blocks:
            v = b.isometry
            if v.shape != (d, b.degeneracy * b.dim):
                raise ValueError("isometry shape must be dim x (n*d)")
            if np.max(np.abs(v.conj().T @ v - np.eye(v.shape[1]))) > 1e-6:
                raise ValueError("isometry columns must be orthonormal")
            total = total + v @ v.conj().T
        if np.max(np.abs(total - np.eye(d))) > 1e-6:
            raise ValueError("block isometries must be complete and orthogonal")
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "seed", int(seed))
        object.__setattr__(self, "residual", float(residual))

    @property
    def dfs_blocks(self) -> tuple:
        return tuple(b for b in self.blocks if b.carries_dfs)


def close_algebra(gens: Sequence[ComplexMatrix]) -> OperatorAlgebra:
    """Smallest †-closed associative algebra with identity containing gens.

    The span is grown by right-multiplying the current basis with the
    generators and their adjoints until the rank stabilizes; since the
    seed span contains the identity, this reaches every product word.
    """
    mats = [as_matrix(g) for g in gens]
    if not mats:
        raise ValueError("need at least one generator")
    d = mats[0].shape[0]
    for m in mats:
        if m.shape != (d, d):
            raise ValueError("generators must be square and same-dim")
    multipliers = mats + [m.conj().T for m in mats]
    seed_rows = np.array(
        [m.reshape(-1) for m in multipliers] + [np.eye(d, dtype=np.complex128).reshape(-1)]
    )
    basis = _orthonormal_rows(seed_rows)
    while True:
        cur = basis.reshape(-1, d, d)
        prods = [cur @ m for m in multipliers]
        stacked = np.vstack([basis] + [p.reshape(-1, d * d) for p in prods])
        new_basis = _orthonormal_rows(stacked)
        if new_basis.shape[0] == basis.shape[0]:
            basis = new_basis
            break
        basis = new_basis
    span = [basis[i].reshape(d, d) for i in range(basis.shape[0])]
    return OperatorAlgebra(span, mats)


def _constraint_elements(a: OperatorAlgebra) -> list[np.ndarray]:
    """Hermitian operators whose centralizer equals the commutant of a."""
    gens = list(a.generators) if a.generators else list(a.span_basis)
    d = a.space_dim
    out = []
    for g in gens:
        for h in ((g + g.conj().T) / 2, (g - g.conj().T) / 2j):
            traceless = h - (np.trace(h) / d) * np.eye(d)
            if np.max(np.abs(traceless)) > 1e-12:
                out.append(h)
    return out


def commutant(a: OperatorAlgebra) -> OperatorAlgebra:
    """All operators commuting with every element of the algebra.

    Commuting with a hermitian operator means preserving its eigenspaces,
    so the first constraint yields a block parametrization; the remaining
    constraints are imposed as null spaces in that parameter space.
    """
    d = a.space_dim
    constraints = _constraint_elements(a)
    if not constraints:
        units = [
            np.outer(np.eye(d)[:, i], np.eye(d)[:, j]).astype(np.complex128)
            for i in range(d)
            for j in range(d)
        ]
        return OperatorAlgebra(units, units)
    vals, vecs = eigh(constraints[0])
    params = []
    for idx in _group_indices(vals, DEGENERACY_TOL):
        w = vecs[:, idx]
        for i in range(len(idx)):
            for j in range(len(idx)):
                params.append(np.outer(w[:, i], w[:, j].conj()).reshape(-1))
    basis = np.array(params)
    for h in constraints[1:]:
        xs = basis.reshape(-1, d, d)
        rows = (xs @ h - h @ xs).reshape(xs.shape[0], -1)
        coeffs = _null_rows(rows)
        basis = coeffs @ basis
        if basis.shape[0] == 0:
            raise RuntimeError("commutant lost the identity; input is not an algebra")
    span = [basis[i].reshape(d, d) for i in range(basis.shape[0])]
    return OperatorAlgebra(span, span)


def _center_rows(a: OperatorAlgebra) -> np.ndarray:
    """Orthonormal coefficient rows spanning the center of the algebra."""
    d = a.space_dim
    stack = np.array([b for b in a.span_basis])
    constraints = _constraint_elements(a)
    if not constraints:
        return np.eye(a.dim, dtype=np.complex128)
    pieces = []
    for h in constraints:
        pieces.append((stack @ h - h @ stack).reshape(a.dim, -1))
    rows = np.hstack(pieces)
    return _null_rows(rows)


class _RetryProbe(Exception):
    pass


def _decompose_attempt(a: OperatorAlgebra, seed: int) -> IrrepDecomposition:
    d = a.space_dim
    k = a.dim
    flat = np.array([b.reshape(-1) for b in a.span_basis])
    rng = np.random.default_rng(seed)

    center = _center_rows(a) @ flat
    zmats = center.reshape(-1, d, d)
    zx = np.tensordot(
        rng.normal(size=len(zmats)) + 1j * rng.normal(size=len(zmats)), zmats, axes=1
    )
    zc = (zx + zx.conj().T) / 2
    vals, vecs = eigh(zc)
    components = [vecs[:, idx] for idx in _group_indices(vals, DEGENERACY_TOL)]

    ax = np.tensordot(
        rng.normal(size=k) + 1j * rng.normal(size=k), flat.reshape(-1, d, d), axes=1
    )
    ha = (ax + ax.conj().T) / 2
    rb = np.tensordot(
        rng.normal(size=k) + 1j * rng.normal(size=k), flat.reshape(-1, d, d), axes=1
    )

    raw_blocks = []
    for w in components:
        dim_c = w.shape[1]
        hc = w.conj().T @ ha @ w
        hc = (hc + hc.conj().T) / 2
        vals2, v2 = eigh(hc)
        groups = _group_indices(vals2, DEGENERACY_TOL)
        sizes = {len(g) for g in groups}
        if len(sizes) != 1:
            raise _RetryProbe
        n = len(groups[0])
        d_block = len(groups)
        if n * d_block != dim_c:
            raise _RetryProbe

        u0 = v2[:, groups[0]]
        q0 = w @ u0
        proj = q0 @ q0.conj().T
        cols = []
        for i in range(d):
            v = proj[:, i].copy()
            for c in cols:
                v = v - c * np.vdot(c, v)
            nv = np.linalg.norm(v)
            if nv > 1e-6:
                cols.append(v / nv)
            if len(cols) == n:
                break
        if len(cols) < n:
            raise _RetryProbe
        lam_c = w.conj().T @ np.array(cols).T

        rc = w.conj().T @ rb @ w
        slices = [lam_c]
        for gi in range(1, d_block):
            um = v2[:, groups[gi]]
            cols_m = (um @ (um.conj().T @ rc)) @ lam_c
            norms = np.linalg.norm(cols_m, axis=0)
            if norms[0] < 1e-8 or np.max(norms) - np.min(norms) > 1e-6 * norms[0]:
                raise _RetryProbe
            cols_m = cols_m / np.mean(norms)
            cols_m = cols_m * _fix_phase(w @ cols_m[:, 0])
            if np.max(np.abs(cols_m.conj().T @ cols_m - np.eye(n))) > 1e-6:
                raise _RetryProbe
            slices.append(cols_m)

        iso_c = np.zeros((dim_c, n * d_block), dtype=np.complex128)
        for lam in range(n):
            for m in range(d_block):
                iso_c[:, lam * d_block + m] = slices[m][:, lam]
        raw_blocks.append((d_block, n, w @ iso_c))

    if sum(n * dd for dd, n, _ in raw_blocks) != d:
        raise _RetryProbe
    raw_blocks.sort(key=lambda t: (t[0], t[1]))
    blocks = [
        IrrepBlock(i, n, dd, iso) for i, (dd, n, iso) in enumerate(raw_blocks)
    ]

    residual = 0.0
    for b in a.span_basis:
        for blk in blocks:
            v = blk.isometry
            t = (v.conj().T @ b @ v).reshape(
                blk.degeneracy, blk.dim, blk.degeneracy, blk.dim
            )
            small = np.einsum("iaib->ab", t) / blk.degeneracy
            target = np.einsum("ac,bm->abcm", np.eye(blk.degeneracy), small)
            residual = max(residual, float(np.max(np.abs(t - target))))
    if residual > _BLOCK_TOL:
        raise _RetryProbe
    return IrrepDecomposition(blocks, seed, residual)


def decompose_irreps(a: OperatorAlgebra, seed: int = 7) -> IrrepDecomposition:
    """Split the space into isotypic blocks I_{n_J} ⊗ M_{d_J}.

    Isotypic components are eigenspaces of a random hermitian element of
    the center; inside each component the eigenspaces of a random
    hermitian algebra element give the d_J gauge levels, and a third
    random algebra element transports the degeneracy basis between
    levels.  The draw is seeded for reproducible labeling; labels sort
    by (d_J, n_J).
    """
    last = None
    for attempt in range(8):
        try:
            return _decompose_attempt(a, seed + attempt)
        except _RetryProbe as exc:
            last = exc
    raise RuntimeError(
        "failed to block-diagonalize the algebra within 1e-6"
    ) from last


def find_df_subspaces(
    sys_ops: Sequence[ComplexMatrix],
) -> list[tuple[np.ndarray, tuple]]:
    """Maximal common eigenspaces of the given noise operators.

    Returns (orthonormal basis matrix, eigenvalue tuple) pairs with
    S_alpha q = c_alpha q within 1e-8 on every basis column.  Operators
    are used exactly as given: for system-bath expansions this is the
    full protection criterion, for master-equation jump operators it is
    the sufficient condition only (adjoints are deliberately not added).
    """
    ops = [as_matrix(s) for s in sys_ops]
    if not ops:
        return []
    d = ops[0].shape[0]
    for s in ops:
        if s.shape != (d, d):
            raise ValueError("operators must be square and same-dim")

    def split(q: np.ndarray, op: np.ndarray) -> list[np.ndarray]:
        # Shrink to the part op maps back into the subspace, then split
        # into geometric eigenspaces of the compression.
        for _ in range(d):
            m = q.conj().T @ op @ q
            out = op @ q - q @ m
            coeffs = _null_rows(out.T, tol=EIGEN_TOL)
            if coeffs.shape[0] == q.shape[1]:
                break
            if coeffs.shape[0] == 0:
                return []
            q = q @ coeffs.T
        m = q.conj().T @ op @ q
        if np.max(np.abs(m - m.conj().T)) < 1e-10:
            vals, vecs = eigh((m + m.conj().T) / 2)
            return [q @ vecs[:, idx] for idx in _group_indices(vals, DEGENERACY_TOL)]
        evals = np.linalg.eigvals(m)
        order = np.lexsort((evals.imag, evals.real))
        evals = evals[order]
        clusters: list[list[complex]] = []
        for ev in evals:
            if clusters and abs(ev - clusters[-1][-1]) < 1e-8:
                clusters[-1].append(ev)
            else:
                clusters.append([ev])
        children = []
        for cl in clusters:
            c = np.mean(cl)
            kern = _null_rows((m - c * np.eye(m.shape[0])).T, tol=EIGEN_TOL)
            if kern.shape[0]:
                children.append(q @ kern.T)
        return children

    spaces = [np.eye(d, dtype=np.complex128)]
    prev_sig = None
    for _ in range(50):
        for op in ops:
            spaces = [child for q in spaces for child in split(q, op)]
        sig = sorted(q.shape[1] for q in spaces)
        total = sum(
            (q @ q.conj().T for q in spaces), np.zeros((d, d), dtype=np.complex128)
        )
        key = (tuple(sig), np.round(total, 10).tobytes())
        if key == prev_sig:
            break
        prev_sig = key

    merged: dict[tuple, list[np.ndarray]] = {}
    results = []
    for q in spaces:
        cs = []
        ok = True
        for op in ops:
            c = np.trace(q.conj().T @ op @ q) / q.shape[1]
            if np.max(np.abs(op @ q - c * q)) > EIGEN_TOL:
                ok = False
                break
            cs.append(complex(c))
        if not ok:
            continue
        keyc = tuple((round(c.real, 6), round(c.imag, 6)) for c in cs)
        merged.setdefault(keyc, []).append(q)
    for keyc, qs in merged.items():
        stack = np.hstack(qs)
        basis = _orthonormal_rows(stack.T).T
        cs = tuple(
            complex(np.trace(basis.conj().T @ op @ basis) / basis.shape[1])
            for op in ops
        )
        results.append((basis, cs))
    results.sort(
        key=lambda t: (-t[0].shape[1], [(c.real, c.imag) for c in t[1]])
    )
    return results


def find_df_subsystems(sys_ops: Sequence[ComplexMatrix]) -> IrrepDecomposition:
    """Noise-algebra block decomposition; blocks with degeneracy >= 2 are
    the decoherence-free subsystem carriers (see dfs_blocks)."""
    return decompose_irreps(close_algebra(sys_ops))


@dataclass(frozen=True, eq=False)
class KLReport:
    """Outcome of the error-correction matrix condition.

    ``c_matrix`` collects <i|E_a†E_b|i> means; ``degeneracy_rank`` is its
    numerical rank (1 = fully degenerate code); ``residual`` the largest
    violation of the delta structure."""

    passes: bool
    c_matrix: np.ndarray
    degeneracy_rank: int
    residual: float


def kl_condition(
    code_basis: Sequence[np.ndarray], errors: Sequence[ComplexMatrix]
) -> KLReport:
    """Check <i|E_a†E_b|j> = C_ab δ_ij over all error pairs.

    The identity (the no-error outcome) is adjoined to the error list
    unless already present, so a code whose words are mapped onto each
    other by a single error fails as it should.
    """
    q = np.array([np.asarray(v, dtype=np.complex128).reshape(-1) for v in code_basis]).T
    gram = q.conj().T @ q
    if np.max(np.abs(gram - np.eye(q.shape[1]))) > 1e-8:
        raise ValueError("code basis must be orthonormal")
    errs = [as_matrix(e) for e in errors]
    d = q.shape[0]
    eye = np.eye(d, dtype=np.complex128)
    if not any(
        e.shape == (d, d) and np.max(np.abs(e - (np.trace(e) / d) * eye)) < 1e-10
        for e in errs
    ):
        errs = [eye] + errs
    images = [e @ q for e in errs]
    n = len(errs)
    c = np.zeros((n, n), dtype=np.complex128)
    residual = 0.0
    for a in range(n):
        for b in range(n):
            g = images[a].conj().T @ images[b]
            diag = np.diag(g)
            mean = np.mean(diag)
            c[a, b] = mean
            residual = max(residual, float(np.max(np.abs(g - np.diag(diag)))))
            residual = max(residual, float(np.max(np.abs(diag - mean))))
    passes = residual < 1e-8
    svals = np.linalg.svd(c, compute_uv=False)
    top = svals[0] if svals.size else 0.0
    rank = int(np.sum(svals > 1e-8 * max(1.0, top)))
    return KLReport(passes, c, rank, residual)


def subsystem_trace(
    rho: ComplexMatrix, decomp: IrrepDecomposition, block: int
) -> np.ndarray:
    """Trace a state down to the degeneracy factor of one block.

    Returns the n_J x n_J matrix sum_m <J,·,m| rho |J,·,m>; for a state
    encoded as |j><j| ⊗ rho_gauge on the block this recovers |j><j|.
    """
    target = None
    for b in decomp.blocks:
        if b.label == block:
            target = b
            break
    if target is None:
        raise ValueError("unknown block label")
    r = as_matrix(rho)
    v = target.isometry
    t = (v.conj().T @ r @ v).reshape(
        target.degeneracy, target.dim, target.degeneracy, target.dim
    )
    return np.einsum("ambm->ab", t)


def symmetrize(
    x: ComplexMatrix, group_ops: Sequence[ComplexMatrix]
) -> np.ndarray:
    """Average U† x U over a finite unitary group.

    The result commutes with every group element and the map is
    idempotent.  The element list must be the full group: closure under
    products is checked.
    """
    m = as_matrix(x)
    ops = [as_matrix(u) for u in group_ops]
    if not ops:
        raise ValueError("need at least one group element")
    d = ops[0].shape[0]
    eye = np.eye(d)
    for u in ops:
        if u.shape != (d, d):
            raise ValueError("group elements must be square and same-dim")
        if np.max(np.abs(u.conj().T @ u - eye)) > 1e-8:
            raise ValueError("non-unitary group element")
    if m.shape != (d, d):
        raise ValueError("operator dimension must match the group")
    for u in ops:
        for v in ops:
            p = u @ v
            if min(np.max(np.abs(p - w)) for w in ops) > 1e-8:
                raise ValueError("group is not closed under products")
    acc = np.zeros((d, d), dtype=np.complex128)
    for u in ops:
        acc = acc + u.conj().T @ m @ u
    return acc / len(ops)
