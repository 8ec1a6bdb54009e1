"""Dense complex linear algebra over labeled tensor-product spaces.

Everything downstream (channels, noise algebras, lattice spectra) is built
on the handful of primitives here: Kronecker products, partial traces,
eigendecompositions, and matrix exponentials of hermitian generators.
Operators are plain ``numpy`` arrays of ``complex128``; dense storage only,
sized for dimensions up to 2**10.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np

_T = TypeVar("_T")
_R = TypeVar("_R")

ComplexMatrix = np.ndarray

ATOL = 1e-10
RANK_TOL = 1e-8
DEGENERACY_TOL = 1e-8


@dataclass(frozen=True)
class Tolerance:
    """Absolute tolerance for entrywise checks and a singular-value cutoff
    for rank/span decisions."""

    atol: float = ATOL
    rank_tol: float = RANK_TOL

    def __post_init__(self) -> None:
        if self.atol <= 0.0 or self.rank_tol <= 0.0:
            raise ValueError("tolerances must be positive")


@dataclass(frozen=True)
class TensorSpace:
    """An ordered tensor product of finite-dimensional subsystems."""

    dims: tuple[int, ...]

    def __init__(self, dims) -> None:
        object.__setattr__(self, "dims", tuple(int(d) for d in dims))
        if not self.dims:
            raise ValueError("need at least one subsystem")
        if any(d < 2 for d in self.dims):
            raise ValueError("subsystem dimensions must be >= 2")

    @property
    def total_dim(self) -> int:
        return math.prod(self.dims)

    def __len__(self) -> int:
        return len(self.dims)


def qubits(n: int) -> TensorSpace:
    return TensorSpace((2,) * n)


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2:
        raise ValueError("expected a matrix")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    return a


def kron(a, b) -> np.ndarray:
    return np.kron(as_matrix(a), as_matrix(b))


def kron_all(*ops) -> np.ndarray:
    """Kronecker product of any number of factors, left to right."""
    out = as_matrix(ops[0])
    for op in ops[1:]:
        out = np.kron(out, as_matrix(op))
    return out


def _check_square(m: np.ndarray) -> int:
    if m.shape[0] != m.shape[1]:
        raise ValueError("matrix must be square")
    return m.shape[0]


def _check_hermitian(h: np.ndarray, atol: float) -> np.ndarray:
    if np.max(np.abs(h - h.conj().T)) >= atol:
        raise ValueError("matrix is not hermitian within tolerance")
    # symmetrize to suppress accumulated numeric drift
    return 0.5 * (h + h.conj().T)


def partial_trace(m, space: TensorSpace, keep) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep``.

    ``keep`` preserves the original subsystem ordering regardless of the
    order given.  The full trace is preserved.
    """
    a = as_matrix(m)
    dims = space.dims
    n = len(dims)
    d = space.total_dim
    if _check_square(a) != d:
        raise ValueError("matrix dimension does not match the space")
    keep_set = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= n for k in keep_set):
        raise IndexError("subsystem index out of range")
    t = a.reshape(dims + dims)
    remaining = list(range(n))
    for r in range(n):
        if r in keep_set:
            continue
        p = remaining.index(r)
        t = np.trace(t, axis1=p, axis2=p + len(remaining))
        remaining.remove(r)
    kept_dim = math.prod(dims[k] for k in keep_set) if keep_set else 1
    return np.asarray(t).reshape(kept_dim, kept_dim)


def eigh(h, atol: float = ATOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a hermitian matrix.

    Returns eigenvalues sorted ascending (numpy's stable ordering) and the
    matching unitary of column eigenvectors.
    """
    a = _check_hermitian(as_matrix(h), atol)
    _check_square(a)
    vals, vecs = np.linalg.eigh(a)
    return vals, vecs


def expm_hermitian_generator(h, t: float, atol: float = ATOL) -> np.ndarray:
    """exp(-i h t) for hermitian h, by eigendecomposition (no series)."""
    vals, vecs = eigh(h, atol=atol)
    phases = np.exp(-1j * vals * t)
    return (vecs * phases) @ vecs.conj().T


def trace_distance(a, b, atol: float = ATOL) -> float:
    """Trace distance (1/2)Tr|a - b| between two hermitian matrices."""
    ma, mb = as_matrix(a), as_matrix(b)
    if ma.shape != mb.shape:
        raise ValueError("dimension mismatch")
    diff = _check_hermitian(ma - mb, 10 * atol)
    vals = np.linalg.eigvalsh(diff)
    return 0.5 * float(np.sum(np.abs(vals)))


def group_degeneracies(values, tol: float = DEGENERACY_TOL) -> list[tuple[float, int]]:
    """Group a sorted eigenvalue list into (level, multiplicity) pairs.

    Neighbors within ``tol`` of each other merge into one level reported at
    the group mean.
    """
    vals = np.sort(np.asarray(values, dtype=np.float64))
    groups: list[tuple[float, int]] = []
    start = 0
    for i in range(1, len(vals) + 1):
        if i == len(vals) or vals[i] - vals[i - 1] > tol:
            block = vals[start:i]
            groups.append((float(np.mean(block)), len(block)))
            start = i
    return groups


def thread_count() -> int:
    """Worker count from the DFS_KIT_THREADS environment variable (min 1)."""
    raw = os.environ.get("DFS_KIT_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def parallel_map(fn: Callable[[_T], _R], items: Iterable[_T]) -> list[_R]:
    """Map ``fn`` over ``items``, preserving order.

    Runs on a thread pool when DFS_KIT_THREADS asks for more than one
    worker; results are identical either way since every call is pure.
    """
    seq: Sequence[_T] = list(items)
    workers = thread_count()
    if workers <= 1 or len(seq) <= 1:
        return [fn(x) for x in seq]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, seq))
