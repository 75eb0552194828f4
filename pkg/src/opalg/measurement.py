"""Expectation values, density observables, projections and the Born rule.

The density observable D = sum_j p_j I_j carries all statistical information
an observer holds about a system relative to one complete compatible space.
Updating it for an incompatible measurement is a pure projection producing a
new value; nothing is mutated and no record is rewritten.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .bases import (
    EIG_GROUP_RTOL,
    ProjectorBasis,
    diagonal_coefficients,
    group_close,
)
from .core import Observable, PseudoObservable, commutator, scaled_atol
from .errors import (
    DimensionMismatch,
    IndexOutOfRange,
    InvalidDistribution,
    NotInSpectrum,
    NotNormalized,
    VerificationFailure,
)
from .spectral import _hermitian_components, decompose, norm
from .states import StateVectorSet, wave_function

ATOL_PROB = 1e-9
ATOL_CONS = 1e-10
ATOL_UNC = 1e-10


class DensityObservable(Observable):
    """Observable whose spectrum is a probability distribution over a basis.

    Tiny negative probabilities (within tolerance) are clamped to zero and
    the vector renormalized; the ``clamped`` flag records that this happened.
    """

    def __init__(self, basis: ProjectorBasis, probabilities, atol: float = ATOL_PROB):
        p = np.array(probabilities, dtype=float)
        if p.shape != (basis.dim,):
            raise DimensionMismatch(
                f"need {basis.dim} probabilities, got shape {p.shape}"
            )
        if not np.all(np.isfinite(p)):
            raise InvalidDistribution("probabilities must be finite")
        clamped = False
        low = float(np.min(p))
        if low < 0.0:
            if low < -atol:
                raise InvalidDistribution(f"negative probability {low:.3e}")
            p = np.clip(p, 0.0, None)
            clamped = True
        high = float(np.max(p))
        if high > 1.0 + atol:
            raise InvalidDistribution(f"probability {high:.6f} exceeds 1")
        total = float(np.sum(p))
        if abs(total - 1.0) > atol:
            raise InvalidDistribution(f"probabilities sum to {total:.12f}, not 1")
        if clamped:
            p = p / float(np.sum(p))
        v = basis.matrix
        m = (v * p) @ v.conj().T
        super().__init__((m + m.conj().T) / 2.0)
        p.setflags(write=False)
        self._basis = basis
        self._p = p
        self._clamped = clamped

    @classmethod
    def pure(cls, basis: ProjectorBasis, index: int) -> "DensityObservable":
        if not 0 <= index < basis.dim:
            raise IndexOutOfRange(f"index {index} out of range for dimension {basis.dim}")
        p = np.zeros(basis.dim)
        p[index] = 1.0
        return cls(basis, p)

    @property
    def basis(self) -> ProjectorBasis:
        return self._basis

    @property
    def probabilities(self) -> np.ndarray:
        return self._p

    @property
    def clamped(self) -> bool:
        return self._clamped

    def is_pure(self, atol: float = ATOL_PROB) -> bool:
        return bool(np.max(self._p) >= 1.0 - atol)


def expectation(z: PseudoObservable, density: DensityObservable) -> complex:
    """Expectation value trace(D Z), the inner product of D with Z.

    Linear, scalar homogeneous, order preserving on comparable observables,
    conjugates under transposition, and maps constants to themselves.
    """
    if z.dim != density.dim:
        raise DimensionMismatch(f"dimensions differ: {z.dim} vs {density.dim}")
    return complex(np.trace(density.components @ z.components))


def _real_expectation(z, density, atol=1e-9):
    value = expectation(z, density)
    if abs(value.imag) > scaled_atol(atol, z.components):
        raise VerificationFailure(f"expected a real expectation value, got {value}")
    return float(value.real)


def project_observable(b, basis: ProjectorBasis) -> Observable:
    """Projection sum_j I_j B I_j of an observable onto a compatible space.

    The result commutes with every basis projector and equals B exactly when
    B is already compatible with the basis.
    """
    m = _hermitian_components(b)
    if m.shape[0] != basis.dim:
        raise DimensionMismatch(f"dimensions differ: {m.shape[0]} vs {basis.dim}")
    v = basis.matrix
    coeffs = np.real(np.diag(v.conj().T @ m @ v))
    projected = (v * coeffs) @ v.conj().T
    return Observable((projected + projected.conj().T) / 2.0)


@dataclass(frozen=True)
class TransitionMatrix:
    """Transition probabilities between the pure states of two bases.

    entries[j, k] = trace(I_source,j I_target,k); every row and every column
    sums to one, and swapping the bases transposes the matrix.
    """

    source: ProjectorBasis
    target: ProjectorBasis
    entries: np.ndarray

    @property
    def dim(self) -> int:
        return self.source.dim


def transition_matrix(source: ProjectorBasis, target: ProjectorBasis) -> TransitionMatrix:
    """Doubly stochastic matrix of trace(I_source,j I_target,k) entries."""
    if source.dim != target.dim:
        raise DimensionMismatch(f"bases have different dimensions: {source.dim} vs {target.dim}")
    overlap = source.matrix.conj().T @ target.matrix
    entries = np.real(overlap * overlap.conj())
    entries.setflags(write=False)
    return TransitionMatrix(source=source, target=target, entries=entries)


def project_density(density: DensityObservable, basis: ProjectorBasis) -> DensityObservable:
    """Density after a maximal observation in a new space.

    New probabilities are p'_k = sum_j p_j trace(I_j I'_k); this is the pure
    information update, not a physical process acting on the system.
    """
    if density.dim != basis.dim:
        raise DimensionMismatch(f"dimensions differ: {density.dim} vs {basis.dim}")
    entries = transition_matrix(density.basis, basis).entries
    return DensityObservable(basis, density.probabilities @ entries)


def conditional_expectation(b, density: DensityObservable, atol: float = ATOL_CONS) -> float:
    """Expectation of B conditioned on the maximal observation behind D.

    Evaluates trace(D B) and cross-checks it against trace(D B_A) and
    trace(D' B) with D' the density projected onto an eigenbasis of B; the
    three expressions must agree, independently of that choice.
    """
    m = _hermitian_components(b)
    if m.shape[0] != density.dim:
        raise DimensionMismatch(f"dimensions differ: {m.shape[0]} vs {density.dim}")
    direct = float(np.real(np.trace(density.components @ m)))
    projected = project_observable(b, density.basis)
    via_projection = float(np.real(np.trace(density.components @ projected.components)))
    compatible_basis = decompose(b).basis
    reprojected = project_density(density, compatible_basis)
    via_density = float(np.real(np.trace(reprojected.components @ m)))
    spread = max(direct, via_projection, via_density) - min(direct, via_projection, via_density)
    if spread > scaled_atol(atol, m):
        raise VerificationFailure(
            f"conditioned expectation expressions disagree by {spread:.3e}"
        )
    return direct


def deviation_variance(a, density: DensityObservable) -> tuple:
    """Deviation A - <A>, its variance and standard deviation under D."""
    m = _hermitian_components(a)
    if m.shape[0] != density.dim:
        raise DimensionMismatch(f"dimensions differ: {m.shape[0]} vs {density.dim}")
    mean = float(np.real(np.trace(density.components @ m)))
    dev = Observable(m - mean * np.eye(density.dim))
    second = float(np.real(np.trace(density.components @ dev.components @ dev.components)))
    variance = max(second, 0.0)
    return dev, variance, float(np.sqrt(variance))


class UncertaintyCheck(NamedTuple):
    lhs: float
    rhs: float
    holds: bool


def uncertainty_check(a, b, density: DensityObservable, atol: float = ATOL_UNC) -> UncertaintyCheck:
    """Evaluate sigma_A sigma_B >= |<i[A,B]>| / 2 under the given density."""
    am = _hermitian_components(a, "first observable")
    bm = _hermitian_components(b, "second observable")
    dev_a, _, sigma_a = deviation_variance(a, density)
    dev_b, _, sigma_b = deviation_variance(b, density)
    comm = commutator(PseudoObservable(am), PseudoObservable(bm))
    dev_comm = commutator(dev_a, dev_b)
    drift = float(np.max(np.abs(dev_comm.components - comm.components)))
    if drift > scaled_atol(1e-9, am, bm):
        raise VerificationFailure(f"deviation commutator drifted from [A,B] by {drift:.3e}")
    rhs = 0.5 * abs(complex(np.trace(density.components @ (1j * comm.components))))
    lhs = sigma_a * sigma_b
    return UncertaintyCheck(lhs=lhs, rhs=rhs, holds=bool(lhs >= rhs - atol))


def matrix_element(p: PseudoObservable, sset: StateVectorSet, j: int, k: int) -> complex:
    """<Psi_j, P Psi_k>: the (j, k) component of P in the set's dyad basis.

    The diagonal element is the expectation value of P in the pure state j.
    """
    d = sset.dim
    if not (0 <= j < d and 0 <= k < d):
        raise IndexOutOfRange(f"indices ({j}, {k}) out of range for dimension {d}")
    if p.dim != d:
        raise DimensionMismatch(f"operand dimension {p.dim} does not match set dimension {d}")
    psi_j = sset.member(j).components
    psi_k = sset.member(k).components
    return complex(np.trace(psi_j.conj().T @ p.components @ psi_k))


def _outcome_groups(observable, sset: StateVectorSet):
    values = diagonal_coefficients(observable, sset.basis.source)
    tol = EIG_GROUP_RTOL * max(1.0, float(np.max(values) - np.min(values)))
    return values, group_close(values, tol), tol


def born_distribution(phi: PseudoObservable, sset: StateVectorSet, observable, atol: float = 1e-9):
    """Outcome probabilities for measuring a compatible observable on a pure state.

    Returns (value, probability) pairs over the distinct outcomes, descending
    by value; the probabilities are squared wave-function amplitudes summed
    within each eigenvalue level and add up to one.
    """
    n = norm(phi)
    if abs(n - 1.0) > atol:
        raise NotNormalized(f"state has norm {n:.12f}, expected 1")
    amps = wave_function(phi, sset).amplitudes
    weights = np.abs(amps) ** 2
    _, groups, _ = _outcome_groups(observable, sset)
    dist = [(rep, float(np.sum(weights[idxs]))) for rep, idxs in groups]
    dist.sort(key=lambda pair: pair[0], reverse=True)
    return tuple(dist)


def born_rule(phi: PseudoObservable, sset: StateVectorSet, observable, outcome: float, atol: float = 1e-9) -> float:
    """Probability that measuring the observable on the pure state phi yields outcome."""
    n = norm(phi)
    if abs(n - 1.0) > atol:
        raise NotNormalized(f"state has norm {n:.12f}, expected 1")
    amps = wave_function(phi, sset).amplitudes
    weights = np.abs(amps) ** 2
    _, groups, tol = _outcome_groups(observable, sset)
    for rep, idxs in groups:
        if abs(outcome - rep) <= tol:
            return float(np.sum(weights[idxs]))
    raise NotInSpectrum(f"{outcome} is not an outcome of the observable")
