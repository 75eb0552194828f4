"""State-vector sets, the eigenstate space and wave functions.

A state-vector set stores the information acquired in a maximal observation:
its members are the auxiliary elements Psi_j = G_jk0 K for a dyad basis, an
anchor index k0 and a unitary K.  Their mutual products reproduce the dyad
basis, they are orthonormal under the trace inner product, and they span the
eigenstate space on which wave functions live.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .bases import (
    ATOL_UNIT,
    BasisChange,
    DyadBasis,
    ProjectorBasis,
    _as_dyad_basis,
    is_unitary,
)
from .core import ATOL_TRACE_ONE, Projector, PseudoObservable, scaled_atol
from .errors import (
    DimensionMismatch,
    IndexOutOfRange,
    LinearlyDependent,
    NotElementary,
    NotInSpan,
    NotOrthonormal,
    NotUnitary,
    VerificationFailure,
)

ATOL_STATE = 1e-9
ATOL_LIN = 1e-10
ATOL_LEMMA = 1e-9


class StateVectorSet:
    """Family Psi_j = G_jk0 K whose mutual products reproduce a dyad basis.

    Members satisfy Psi_j Psi_k† = G_jk and are orthonormal; they are
    simultaneous right eigenstates of every observable compatible with the
    underlying projector basis.  The anchor index k0 is immaterial: switching
    it amounts to replacing K by a swap unitary times K.
    """

    def __init__(self, basis, k0: int, unitary: PseudoObservable, atol: float = ATOL_UNIT):
        dyads = _as_dyad_basis(basis)
        d = dyads.dim
        if not 0 <= k0 < d:
            raise IndexOutOfRange(f"anchor index {k0} out of range for dimension {d}")
        if unitary.dim != d:
            raise DimensionMismatch(f"unitary dimension {unitary.dim} does not match basis dimension {d}")
        if not is_unitary(unitary.components, atol):
            raise NotUnitary("K is not unitary")
        self._basis = dyads
        self._k0 = int(k0)
        self._unitary = unitary

    @property
    def basis(self) -> DyadBasis:
        return self._basis

    @property
    def k0(self) -> int:
        return self._k0

    @property
    def unitary(self) -> PseudoObservable:
        return self._unitary

    @property
    def dim(self) -> int:
        return self._basis.dim

    @cached_property
    def members(self) -> tuple:
        v = self._basis.source.matrix
        anchor_row = v[:, self._k0].conj() @ self._unitary.components
        return tuple(
            PseudoObservable(np.outer(v[:, j], anchor_row))
            for j in range(self.dim)
        )

    def member(self, j: int) -> PseudoObservable:
        if not 0 <= j < self.dim:
            raise IndexOutOfRange(f"index {j} out of range for dimension {self.dim}")
        return self.members[j]

    def __repr__(self):
        return f"<StateVectorSet dim={self.dim} k0={self._k0}>"


def _orthonormal_completion(vector: np.ndarray) -> np.ndarray:
    """Unitary whose first column is the given unit vector (deterministic)."""
    d = vector.size
    seed = np.concatenate([vector.reshape(-1, 1), np.eye(d, dtype=complex)], axis=1)
    q, _ = np.linalg.qr(seed)
    q = q.copy()
    q[:, 0] = vector
    return q


def verify_characterization(members, basis, atol: float = ATOL_STATE):
    """Check a candidate family against the dyad products, recovering (k0, K).

    Returns (True, (k0, K)) when Psi_j Psi_k† = G_jk for all j, k, with a
    deterministic unitary K that re-expands to the given members; otherwise
    (False, None).  Only the anchor row of K is pinned by the family, the
    rest is a fixed orthonormal completion.
    """
    dyads = _as_dyad_basis(basis)
    d = dyads.dim
    members = list(members)
    if len(members) != d:
        raise DimensionMismatch(f"need {d} members, got {len(members)}")
    for psi in members:
        if psi.dim != d:
            raise DimensionMismatch("member dimension does not match the basis")
    v = dyads.source.matrix
    for j in range(d):
        pj = members[j].components
        for k in range(d):
            product = pj @ members[k].components.conj().T
            target = np.outer(v[:, j], v[:, k].conj())
            if float(np.max(np.abs(product - target))) > atol:
                return False, None

    k0 = 0
    anchor = v[:, k0]
    row = anchor.conj() @ members[k0].components  # equals v_k0† K for any valid K
    left = _orthonormal_completion(anchor)
    right = _orthonormal_completion(row.conj())
    recovered = PseudoObservable(left @ right.conj().T)

    rebuilt = StateVectorSet(dyads, k0, recovered).members
    worst = max(
        float(np.max(np.abs(rebuilt[j].components - members[j].components)))
        for j in range(d)
    )
    if worst > 10 * atol:
        raise VerificationFailure(f"recovered factorization missed the family by {worst:.3e}")
    return True, (k0, recovered)


def equivalent_set(sset: StateVectorSet, phases, y: PseudoObservable, atol: float = ATOL_UNIT) -> StateVectorSet:
    """Equivalent family with members e^(i phase_j) Psi_j Y.

    Per-member phases re-phase the underlying basis vectors (the projectors
    are untouched), and Y folds into the unitary, so the result is again a
    valid set whose own dyad products close.
    """
    phases = np.asarray(phases, dtype=float)
    d = sset.dim
    if phases.shape != (d,):
        raise DimensionMismatch(f"need {d} phases, got shape {phases.shape}")
    if y.dim != d:
        raise DimensionMismatch(f"unitary dimension {y.dim} does not match set dimension {d}")
    if not is_unitary(y.components, atol):
        raise NotUnitary("Y is not unitary")
    factors = np.exp(1j * phases)
    v = sset.basis.source.matrix * factors  # re-phase column j by e^(i phase_j)
    new_basis = ProjectorBasis(v.T)
    new_unitary = PseudoObservable(
        factors[sset.k0] * (sset.unitary.components @ y.components)
    )
    return StateVectorSet(new_basis, sset.k0, new_unitary)


def left_action(p: PseudoObservable, sset: StateVectorSet, j: int) -> np.ndarray:
    """Expansion coefficients of P Psi_j over the set: P Psi_j = sum c_j' Psi_j'.

    The column equals the j-th column of P's component matrix in the set's
    dyad basis; for an observable compatible with that basis it collapses to
    the eigenvalue relation O Psi_j = o_j Psi_j.
    """
    d = sset.dim
    if p.dim != d:
        raise DimensionMismatch(f"operand dimension {p.dim} does not match set dimension {d}")
    if not 0 <= j < d:
        raise IndexOutOfRange(f"index {j} out of range for dimension {d}")
    v = sset.basis.source.matrix
    return (v.conj().T @ p.components @ v)[:, j].copy()


def gram_schmidt(elements, atol: float = ATOL_LIN):
    """Orthonormalize algebra elements under the trace inner product.

    Modified Gram-Schmidt with one re-orthogonalization pass; the first
    output stays proportional to the first input by a positive real factor.
    """
    out = []
    for i, x in enumerate(elements):
        r = np.array(x.components, dtype=complex)
        for _ in range(2):
            for u in out:
                r -= np.vdot(u, r) * u
        nrm = float(np.linalg.norm(r))
        if nrm <= scaled_atol(atol, x.components):
            raise LinearlyDependent(f"element {i} is linearly dependent on the previous ones")
        out.append(r / nrm)
    return [PseudoObservable(u) for u in out]


@dataclass(frozen=True)
class WaveFunction:
    """Amplitudes of an eigenstate-space element over a state-vector basis.

    Labels are the eigenvalue tuples of the complete compatible family that
    indexes the basis; amplitude m belongs to label m.
    """

    labels: tuple
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        if len(self.labels) != amps.size:
            raise DimensionMismatch("one label per amplitude required")

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.probabilities())))

    def is_normalized(self, atol: float = 1e-9) -> bool:
        return abs(float(np.sum(self.probabilities())) - 1.0) <= atol


def wave_function(phi: PseudoObservable, sset: StateVectorSet, labels=None, atol: float = ATOL_LIN) -> WaveFunction:
    """Expand an eigenstate-space element: amplitude(m) = <Psi_m, phi>.

    Inner products of two such elements reduce to the amplitude sums, and a
    normalized element has squared amplitudes summing to one.
    """
    d = sset.dim
    if phi.dim != d:
        raise DimensionMismatch(f"element dimension {phi.dim} does not match set dimension {d}")
    member_mats = [psi.components for psi in sset.members]
    amps = np.array([np.vdot(m, phi.components) for m in member_mats])
    rebuilt = sum(a * m for a, m in zip(amps, member_mats))
    residual = float(np.linalg.norm(phi.components - rebuilt))
    if residual > scaled_atol(atol, phi.components):
        raise NotInSpan(f"element lies outside the eigenstate space (residual {residual:.3e})")
    if labels is None:
        labels = tuple((float(j),) for j in range(d))
    else:
        labels = tuple(tuple(float(x) for x in lab) for lab in labels)
    return WaveFunction(labels=labels, amplitudes=amps)


def orthonormal_basis_to_eigenstate_set(family, sset: StateVectorSet, atol: float = ATOL_STATE):
    """Realize an orthonormal basis of the eigenstate space as a new set.

    Builds the unitary Omega = sum phi_kk' G_kk' from the expansion
    coefficients phi_kj = <Psi_k, Phi_j>; the returned set has members equal
    to the family and dyads Omega G_jj' Omega†.  Returns (set, change).
    """
    d = sset.dim
    family = list(family)
    if len(family) != d:
        raise DimensionMismatch(f"need {d} elements, got {len(family)}")
    member_mats = [psi.components for psi in sset.members]
    coeff = np.empty((d, d), dtype=complex)
    for j, phi in enumerate(family):
        if phi.dim != d:
            raise DimensionMismatch("family member dimension does not match the set")
        coeff[:, j] = [np.vdot(m, phi.components) for m in member_mats]
        rebuilt = sum(coeff[k, j] * member_mats[k] for k in range(d))
        residual = float(np.linalg.norm(phi.components - rebuilt))
        if residual > scaled_atol(ATOL_LIN, phi.components):
            raise NotInSpan(f"family member {j} lies outside the eigenstate space")
    gram_dev = float(np.max(np.abs(coeff.conj().T @ coeff - np.eye(d))))
    if gram_dev > atol:
        raise NotOrthonormal(f"family is not orthonormal (Gram deviation {gram_dev:.3e})")

    v = sset.basis.source.matrix
    omega = PseudoObservable(v @ coeff @ v.conj().T)
    new_basis = ProjectorBasis((v @ coeff).T)
    new_set = StateVectorSet(
        new_basis, sset.k0, PseudoObservable(omega.components @ sset.unitary.components)
    )
    worst = max(
        float(np.max(np.abs(new_set.member(j).components - family[j].components)))
        for j in range(d)
    )
    if worst > 10 * atol:
        raise VerificationFailure(f"realized set missed the family by {worst:.3e}")
    return new_set, BasisChange(omega, sset.basis, new_basis.dyads)


def lemma_elementary_equality(
    i: Projector,
    j: Projector,
    premise_atol: float = ATOL_LEMMA,
    conclusion_atol: float = ATOL_LEMMA,
) -> bool:
    """Check the implication: for elementary projectors, I J I = I forces I = J.

    Returns whether the premise holds; when it does, a violated conclusion
    raises VerificationFailure.
    """
    for name, proj in (("I", i), ("J", j)):
        if not isinstance(proj, Projector):
            raise TypeError(f"{name} must be a Projector")
        if abs(complex(np.trace(proj.components)) - 1.0) > ATOL_TRACE_ONE:
            raise NotElementary(f"{name} is not elementary (trace != 1)")
    im, jm = i.components, j.components
    premise = float(np.linalg.norm(im @ jm @ im - im)) <= premise_atol
    if premise:
        gap = float(np.linalg.norm(im - jm))
        if gap > conclusion_atol:
            raise VerificationFailure(
                f"elementary equality lemma violated: premise held but |I - J| = {gap:.3e}"
            )
    return premise
