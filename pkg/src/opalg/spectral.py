"""Spectral structure of observables plus the trace and inner-product functionals."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bases import EIG_GROUP_RTOL, ProjectorBasis, fix_phase, group_close
from .core import Observable, PseudoObservable
from .errors import DimensionMismatch, NotHermitian, NotInSpectrum, ZeroInput

ATOL_EIG = 1e-8


def trace(z: PseudoObservable) -> complex:
    """Sum of diagonal components; basis independent, linear and cyclic."""
    return complex(np.trace(z.components))


def inner(x: PseudoObservable, y: PseudoObservable) -> complex:
    """Frobenius inner product trace(X† Y), antilinear in the first slot."""
    if x.dim != y.dim:
        raise DimensionMismatch(f"operands have different dimensions: {x.dim} vs {y.dim}")
    return complex(np.vdot(x.components, y.components))


def norm(x: PseudoObservable) -> float:
    """sqrt of the inner product of X with itself; zero only for X = 0."""
    return float(np.linalg.norm(x.components))


def _hermitian_components(o, what="observable"):
    if isinstance(o, Observable):
        return o.components
    if isinstance(o, PseudoObservable):
        if not o.is_hermitian():
            raise NotHermitian(f"{what} is not Hermitian")
        return o.components
    raise TypeError(f"expected an observable, got {type(o).__name__}")


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigen decomposition O = sum_j o_j I_j over an orthonormal projector basis.

    coefficients holds the d eigenvalues aligned with the basis order
    (descending); distinct_spectrum pairs each distinct level with its
    multiplicity, also descending.
    """

    basis: ProjectorBasis
    coefficients: np.ndarray
    distinct_spectrum: tuple

    @property
    def dim(self) -> int:
        return self.basis.dim

    def reconstruct(self) -> Observable:
        v = self.basis.matrix
        m = (v * self.coefficients) @ v.conj().T
        return Observable((m + m.conj().T) / 2.0)

    def level_tolerance(self) -> float:
        w = self.coefficients
        return EIG_GROUP_RTOL * max(1.0, float(np.max(w) - np.min(w)))


@dataclass(frozen=True)
class BilateralEigenspace:
    """Span of the dyads G_jk with o_j, o_k matching a fixed eigenvalue pair."""

    pair: tuple
    dyad_indices: tuple
    dimension: int


def decompose(o, group_rtol: float = EIG_GROUP_RTOL) -> SpectralDecomposition:
    """Spectral decomposition of a Hermitian element.

    The associated dyads are bilateral eigenvectors: O G_jk = o_j G_jk and
    G_jk O = o_k G_jk.  Eigenvalues come out descending; levels closer than
    group_rtol (relative to the spectral diameter) merge into one distinct
    value.
    """
    m = _hermitian_components(o)
    w, u = np.linalg.eigh(m)
    w = w[::-1].copy()
    u = u[:, ::-1].copy()
    for j in range(u.shape[1]):
        u[:, j] = fix_phase(u[:, j])
    basis = ProjectorBasis(u.T)
    tol = group_rtol * max(1.0, float(w[0] - w[-1]))
    distinct = tuple(
        (rep, len(idxs)) for rep, idxs in reversed(group_close(w, tol))
    )
    w.setflags(write=False)
    return SpectralDecomposition(basis=basis, coefficients=w, distinct_spectrum=distinct)


def _match_level(dec: SpectralDecomposition, value: float):
    tol = dec.level_tolerance()
    for rep, mult in dec.distinct_spectrum:
        if abs(value - rep) <= tol:
            return rep, mult
    raise NotInSpectrum(f"{value} is not an eigenvalue (spectrum {dec.distinct_spectrum})")


def bilateral_eigenspace(o, right_value: float, left_value: float) -> BilateralEigenspace:
    """Bilateral eigenspace for an eigenvalue pair; its dimension is the product
    of the two multiplicities."""
    dec = o if isinstance(o, SpectralDecomposition) else decompose(o)
    tol = dec.level_tolerance()
    rep_r, mult_r = _match_level(dec, right_value)
    rep_l, mult_l = _match_level(dec, left_value)
    right_idx = [j for j in range(dec.dim) if abs(dec.coefficients[j] - rep_r) <= tol]
    left_idx = [k for k in range(dec.dim) if abs(dec.coefficients[k] - rep_l) <= tol]
    indices = tuple((j, k) for j in right_idx for k in left_idx)
    assert len(indices) == mult_r * mult_l
    return BilateralEigenspace(pair=(rep_r, rep_l), dyad_indices=indices, dimension=len(indices))


def check_right_eigenvector(o, phi: PseudoObservable, atol: float = ATOL_EIG):
    """Right eigenvalue of phi under O, or None.

    The right eigenvalues of an observable are exactly the terms of its
    spectrum, so candidates are drawn from there and the one with the
    smallest residual |O phi - w phi| is accepted when it falls within
    atol * |phi|.
    """
    return _check_eigenvector(o, phi, atol, side="right")


def check_left_eigenvector(o, phi: PseudoObservable, atol: float = ATOL_EIG):
    """Left counterpart of check_right_eigenvector (phi O = w phi)."""
    return _check_eigenvector(o, phi, atol, side="left")


def _check_eigenvector(o, phi, atol, side):
    m = _hermitian_components(o)
    if phi.dim != m.shape[0]:
        raise DimensionMismatch(f"dimensions differ: {m.shape[0]} vs {phi.dim}")
    p = phi.components
    scale = float(np.linalg.norm(p))
    if scale == 0.0:
        raise ZeroInput("candidate eigenvector is zero")
    applied = m @ p if side == "right" else p @ m
    dec = decompose(o) if not isinstance(o, SpectralDecomposition) else o
    best_value = None
    best_residual = np.inf
    for rep, _ in dec.distinct_spectrum:
        residual = float(np.linalg.norm(applied - rep * p))
        if residual < best_residual:
            best_residual = residual
            best_value = rep
    if best_residual <= atol * scale:
        return float(best_value)
    return None


def apply_function(o, fn) -> PseudoObservable:
    """Observable function sum_j fn(o_j) I_j; fn may be complex valued.

    Eigenstates of O stay right eigenvectors, now with eigenvalue fn(o_j).
    The map is only ever evaluated on the spectrum.
    """
    m = _hermitian_components(o)
    w, u = np.linalg.eigh(m)
    values = np.array([fn(float(x)) for x in w], dtype=complex)
    return PseudoObservable((u * values) @ u.conj().T)
