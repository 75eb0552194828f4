"""Projector bases, dyad bases, unitary basis changes and joint diagonalization."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .core import Observable, Projector, PseudoObservable, scaled_atol
from .errors import (
    DimensionMismatch,
    IndexOutOfRange,
    NotCommuting,
    NotHermitian,
    NotInFamily,
    NotOrthonormal,
    NotUnitary,
)

ATOL_ORTH = 1e-9
ATOL_UNIT = 1e-9
ATOL_COMM = 1e-9
# Eigenvalues closer than this, relative to the spectral diameter, count as
# one degenerate level.
EIG_GROUP_RTOL = 1e-8


def group_close(values, tol):
    """Group near-equal reals: list of (representative, original indices), ascending."""
    values = np.asarray(values, dtype=float)
    order = np.argsort(values, kind="stable")
    groups = []
    current = [order[0]]
    for idx in order[1:]:
        if values[idx] - values[current[-1]] <= tol:
            current.append(idx)
        else:
            groups.append(current)
            current = [idx]
    groups.append(current)
    return [(float(np.mean(values[g])), [int(i) for i in g]) for g in groups]


def fix_phase(vector):
    """Rotate a vector so its largest-magnitude entry is real positive."""
    idx = int(np.argmax(np.abs(vector)))
    pivot = vector[idx]
    return vector * (pivot.conjugate() / abs(pivot))


def is_unitary(matrix, atol=ATOL_UNIT):
    d = matrix.shape[0]
    dev = float(np.linalg.norm(matrix @ matrix.conj().T - np.eye(d)))
    return dev <= scaled_atol(atol, matrix)


class ProjectorBasis:
    """Ordered family of d orthonormal vectors, each generating a rank-1 projector.

    The projectors are mutually exclusive (I_j I_k = delta_jk I_j) and resolve
    the identity (sum_j I_j = 1); both follow from orthonormality, which is
    validated on construction.
    """

    def __init__(self, vectors, atol: float = ATOL_ORTH):
        rows = np.array([np.asarray(v, dtype=complex).reshape(-1) for v in vectors])
        if rows.ndim != 2 or rows.shape[0] != rows.shape[1]:
            raise DimensionMismatch(
                f"need d vectors of length d, got {rows.shape[0]} of length {rows.shape[1] if rows.ndim == 2 else '?'}"
            )
        if not np.all(np.isfinite(rows)):
            raise ValueError("basis vectors must be finite")
        vmat = rows.T.copy()  # columns are the basis vectors
        d = vmat.shape[0]
        gram = vmat.conj().T @ vmat
        dev = float(np.max(np.abs(gram - np.eye(d))))
        if dev > atol:
            raise NotOrthonormal(f"Gram matrix deviates from identity by {dev:.3e}")
        vmat.setflags(write=False)
        self._vmat = vmat

    @classmethod
    def computational(cls, dim: int) -> "ProjectorBasis":
        return cls(np.eye(dim))

    @property
    def dim(self) -> int:
        return self._vmat.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        """Unitary whose column j is the j-th basis vector (read-only)."""
        return self._vmat

    def vector(self, j: int) -> np.ndarray:
        if not 0 <= j < self.dim:
            raise IndexOutOfRange(f"index {j} out of range for dimension {self.dim}")
        return self._vmat[:, j]

    def projector(self, j: int) -> Projector:
        v = self.vector(j)
        return Projector(np.outer(v, v.conj()))

    @cached_property
    def projectors(self) -> tuple:
        return tuple(self.projector(j) for j in range(self.dim))

    @cached_property
    def dyads(self) -> "DyadBasis":
        return DyadBasis(self)

    def conjugated(self, u: PseudoObservable) -> "ProjectorBasis":
        """Basis obtained by applying a unitary to every vector."""
        if not is_unitary(u.components):
            raise NotUnitary("conjugating element is not unitary")
        return ProjectorBasis((u.components @ self._vmat).T)

    def __repr__(self):
        return f"<ProjectorBasis dim={self.dim}>"


class DyadBasis:
    """All rank-1 products G_jk = v_j v_k† of a projector basis.

    The d^2 dyads form an orthonormal basis of the full algebra under the
    trace inner product, and G_jj coincides with the j-th projector.
    """

    def __init__(self, source: ProjectorBasis):
        self._source = source

    @property
    def source(self) -> ProjectorBasis:
        return self._source

    @property
    def dim(self) -> int:
        return self._source.dim

    def dyad(self, j: int, k: int) -> PseudoObservable:
        vj = self._source.vector(j)
        vk = self._source.vector(k)
        return PseudoObservable(np.outer(vj, vk.conj()))

    def __repr__(self):
        return f"<DyadBasis dim={self.dim}>"


@dataclass(frozen=True)
class BasisChange:
    """Unitary Omega carrying one dyad basis onto another.

    For all j, k the target dyads satisfy G'_jk = Omega G_jk Omega†.
    """

    omega: PseudoObservable
    source: DyadBasis
    target: DyadBasis

    def then(self, other: "BasisChange") -> "BasisChange":
        """Composite change: apply self (A to B), then other (B to C)."""
        return BasisChange(
            PseudoObservable(other.omega.components @ self.omega.components),
            self.source,
            other.target,
        )


def _as_dyad_basis(basis) -> DyadBasis:
    if isinstance(basis, DyadBasis):
        return basis
    if isinstance(basis, ProjectorBasis):
        return basis.dyads
    raise TypeError(f"expected a basis, got {type(basis).__name__}")


def basis_change(source, target) -> BasisChange:
    """Unitary sending the source basis vectors onto the target ones.

    Omega = sum_k w_k v_k† with v, w the source and target vectors; its
    matrix is W V†.
    """
    src = _as_dyad_basis(source)
    tgt = _as_dyad_basis(target)
    if src.dim != tgt.dim:
        raise DimensionMismatch(f"bases have different dimensions: {src.dim} vs {tgt.dim}")
    omega = tgt.source.matrix @ src.source.matrix.conj().T
    return BasisChange(PseudoObservable(omega), src, tgt)


def index_swap(basis, k0: int, k1: int) -> PseudoObservable:
    """Unitary exchanging the k0-th and k1-th basis directions.

    S = G_k1k0 + G_k0k1 + sum of the remaining diagonal dyads, so that
    G_jk1 S = G_jk0 for every j.
    """
    src = _as_dyad_basis(basis).source
    d = src.dim
    if not (0 <= k0 < d and 0 <= k1 < d):
        raise IndexOutOfRange(f"indices ({k0}, {k1}) out of range for dimension {d}")
    perm = np.eye(d, dtype=complex)
    perm[[k0, k1]] = perm[[k1, k0]]
    v = src.matrix
    return PseudoObservable(v @ perm @ v.conj().T)


def _hermitian_matrix(value, what="observable"):
    if isinstance(value, Observable):
        return value.components
    if isinstance(value, PseudoObservable):
        if not value.is_hermitian():
            raise NotHermitian(f"{what} is not Hermitian")
        return value.components
    raise TypeError(f"expected an observable, got {type(value).__name__}")


def complete_compatible_basis(
    observables,
    atol_comm: float = ATOL_COMM,
    group_rtol: float = EIG_GROUP_RTOL,
) -> ProjectorBasis:
    """Joint eigenprojector basis of a mutually commuting Hermitian family.

    Every input decomposes as sum_j o_j I_j over the returned basis.  Within
    a shared eigenspace of the whole family the vectors are an arbitrary (but
    deterministic) orthonormal completion.  Basis elements come out sorted by
    their eigenvalue tuples, lexicographically descending, with each vector's
    largest entry phased real positive.
    """
    if not observables:
        raise ValueError("need at least one observable")
    mats = [_hermitian_matrix(o) for o in observables]
    d = mats[0].shape[0]
    for m in mats[1:]:
        if m.shape[0] != d:
            raise DimensionMismatch("observables have mixed dimensions")
    for a in range(len(mats)):
        for b in range(a + 1, len(mats)):
            dev = float(np.linalg.norm(mats[a] @ mats[b] - mats[b] @ mats[a]))
            lim = atol_comm * max(1.0, float(np.linalg.norm(mats[a])) * float(np.linalg.norm(mats[b])))
            if dev > lim:
                raise NotCommuting(f"observables {a} and {b} do not commute (|[A,B]| = {dev:.3e})")

    vmat = np.eye(d, dtype=complex)
    blocks = [list(range(d))]
    labels = [[] for _ in range(d)]
    for m in mats:
        spectrum = np.linalg.eigvalsh(m)
        tol = group_rtol * max(1.0, float(spectrum[-1] - spectrum[0]))
        next_blocks = []
        for blk in blocks:
            sub = vmat[:, blk]
            h = sub.conj().T @ m @ sub
            h = (h + h.conj().T) / 2.0
            w, u = np.linalg.eigh(h)
            vmat[:, blk] = sub @ u
            for rep, idxs in group_close(w, tol):
                cols = [blk[i] for i in idxs]
                for c in cols:
                    labels[c].append(rep)
                next_blocks.append(cols)
        blocks = next_blocks

    order = sorted(range(d), key=lambda c: tuple(labels[c]), reverse=True)
    vmat = vmat[:, order]
    for j in range(d):
        vmat[:, j] = fix_phase(vmat[:, j])
    return ProjectorBasis(vmat.T)


def diagonal_coefficients(observable, basis, atol: float = ATOL_COMM) -> np.ndarray:
    """Spectral coefficients of an observable compatible with the basis.

    Returns the reals o_j with O = sum_j o_j I_j; raises NotInFamily when the
    observable fails to be diagonal over the basis.
    """
    m = _hermitian_matrix(observable)
    src = basis.source if isinstance(basis, DyadBasis) else basis
    if m.shape[0] != src.dim:
        raise DimensionMismatch(f"dimensions differ: {m.shape[0]} vs {src.dim}")
    rotated = src.matrix.conj().T @ m @ src.matrix
    off = rotated - np.diag(np.diag(rotated))
    dev = float(np.max(np.abs(off)))
    if dev > scaled_atol(atol, m):
        raise NotInFamily(f"observable is not compatible with the basis (off-diagonal {dev:.3e})")
    return np.real(np.diag(rotated)).copy()
