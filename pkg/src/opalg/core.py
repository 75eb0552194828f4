"""Carrier algebra: complex component matrices over a fixed reference dyad basis.

Every value is a d x d complex matrix of components relative to one global
reference ("computational") dyad basis.  All other bases are data built on
top of this representation, never alternative representations.  Values are
immutable after construction and safe to share between threads.
"""

from __future__ import annotations

import numbers

import numpy as np

from .errors import (
    DimensionMismatch,
    IndexOutOfRange,
    NotHermitian,
    NotIdempotent,
)

# Default absolute tolerances; scaled by the Frobenius norm when it exceeds 1.
ATOL_HERM = 1e-9
ATOL_IDEM = 1e-9
ATOL_TRACE_ONE = 1e-9


def scaled_atol(atol, *matrices):
    """Absolute tolerance, inflated for inputs with Frobenius norm above 1."""
    scale = 1.0
    for m in matrices:
        scale = max(scale, float(np.linalg.norm(m)))
    return atol * scale


def _square_complex(values):
    m = np.array(values, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"components must form a square matrix, got shape {m.shape}")
    if m.shape[0] < 1:
        raise DimensionMismatch("dimension must be at least 1")
    if not np.all(np.isfinite(m)):
        raise ValueError("components must be finite (no NaN or Inf entries)")
    return m


class PseudoObservable:
    """A general element of the algebra: an arbitrary complex matrix.

    Scalars embed as multiples of the identity, so ``P + 2`` and ``P - mean``
    behave like the corresponding constant shifts.  The ``*`` operator accepts
    both scalars and other elements; ``@`` is the operator product only.
    """

    def __init__(self, components):
        m = _square_complex(components)
        m.setflags(write=False)
        self._m = m

    @property
    def dim(self) -> int:
        return self._m.shape[0]

    @property
    def components(self) -> np.ndarray:
        """Component matrix relative to the reference dyad basis (read-only)."""
        return self._m

    def dagger(self) -> "PseudoObservable":
        """Conjugate transpose; an involution and product anti-automorphism."""
        return PseudoObservable(self._m.conj().T)

    def is_hermitian(self, atol: float = ATOL_HERM) -> bool:
        dev = float(np.max(np.abs(self._m - self._m.conj().T)))
        return dev <= scaled_atol(atol, self._m)

    def as_observable(self, atol: float = ATOL_HERM) -> "Observable":
        return Observable(self._m, atol=atol)

    # arithmetic always yields a plain PseudoObservable; callers re-wrap when
    # they need the stronger invariants checked again

    def _other_matrix(self, other):
        if isinstance(other, PseudoObservable):
            if other.dim != self.dim:
                raise DimensionMismatch(
                    f"operands have different dimensions: {self.dim} vs {other.dim}"
                )
            return other._m
        if isinstance(other, numbers.Number):
            return complex(other) * np.eye(self.dim)
        return None

    def __add__(self, other):
        m = self._other_matrix(other)
        if m is None:
            return NotImplemented
        return PseudoObservable(self._m + m)

    __radd__ = __add__

    def __sub__(self, other):
        m = self._other_matrix(other)
        if m is None:
            return NotImplemented
        return PseudoObservable(self._m - m)

    def __rsub__(self, other):
        m = self._other_matrix(other)
        if m is None:
            return NotImplemented
        return PseudoObservable(m - self._m)

    def __neg__(self):
        return PseudoObservable(-self._m)

    def __mul__(self, other):
        if isinstance(other, PseudoObservable):
            return self.__matmul__(other)
        if isinstance(other, numbers.Number):
            return PseudoObservable(complex(other) * self._m)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, numbers.Number):
            return PseudoObservable(complex(other) * self._m)
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, numbers.Number):
            return PseudoObservable(self._m / complex(other))
        return NotImplemented

    def __matmul__(self, other):
        if not isinstance(other, PseudoObservable):
            return NotImplemented
        if other.dim != self.dim:
            raise DimensionMismatch(
                f"operands have different dimensions: {self.dim} vs {other.dim}"
            )
        return PseudoObservable(self._m @ other._m)

    def __pow__(self, exponent):
        if not isinstance(exponent, numbers.Integral) or exponent < 0:
            return NotImplemented
        return PseudoObservable(np.linalg.matrix_power(self._m, int(exponent)))

    def __repr__(self):
        return f"<{type(self).__name__} dim={self.dim}>"


class Observable(PseudoObservable):
    """Hermitian element: a measurable quantity with real spectrum."""

    def __init__(self, components, atol: float = ATOL_HERM):
        super().__init__(components)
        dev = float(np.max(np.abs(self._m - self._m.conj().T)))
        if dev > scaled_atol(atol, self._m):
            raise NotHermitian(f"matrix deviates from Hermitian symmetry by {dev:.3e}")


class Projector(Observable):
    """Idempotent observable; elementary exactly when its trace is 1."""

    def __init__(self, components, atol: float = ATOL_IDEM):
        super().__init__(components)
        dev = float(np.linalg.norm(self._m @ self._m - self._m))
        if dev > scaled_atol(atol, self._m):
            raise NotIdempotent(f"matrix deviates from idempotency by {dev:.3e}")

    @property
    def is_elementary(self) -> bool:
        return abs(complex(np.trace(self._m)) - 1.0) <= ATOL_TRACE_ONE


def real_imag_parts(z: PseudoObservable) -> tuple[Observable, Observable]:
    """Split Z into Hermitian parts with Z = R + i*I.

    R = (Z + Z†)/2 and I = (Z - Z†)/(2i); both come back exactly Hermitian.
    """
    m = z.components
    re = (m + m.conj().T) / 2.0
    im = (m - m.conj().T) / 2j
    return Observable(re), Observable(im)


def commutator(x: PseudoObservable, y: PseudoObservable) -> PseudoObservable:
    """XY - YX; traceless for every pair of equal-dimension elements."""
    if x.dim != y.dim:
        raise DimensionMismatch(f"operands have different dimensions: {x.dim} vs {y.dim}")
    xm, ym = x.components, y.components
    return PseudoObservable(xm @ ym - ym @ xm)


def component(p: PseudoObservable, j: int, k: int, basis=None) -> complex:
    """Component of P relative to the (j, k) dyad of a basis.

    With no basis this is the raw reference-basis entry.  For a dyad basis
    built on vectors v it equals v_j† P v_k, which is the Frobenius inner
    product of the dyad with P.  Reassembling P from all components over the
    same basis reproduces it.
    """
    d = p.dim
    if not (0 <= j < d and 0 <= k < d):
        raise IndexOutOfRange(f"indices ({j}, {k}) out of range for dimension {d}")
    if basis is None:
        return complex(p.components[j, k])
    source = getattr(basis, "source", basis)
    if source.dim != d:
        raise DimensionMismatch(f"basis dimension {source.dim} does not match value dimension {d}")
    vj = source.vector(j)
    vk = source.vector(k)
    return complex(vj.conj() @ p.components @ vk)
