"""Seeded random constructions for the test and verification suites.

All randomness flows from numpy Generators over the PCG64 bit generator;
suites derive independent child generators from one root seed through
SeedSequence spawning, so every report is reproducible from that seed.
"""

from __future__ import annotations

import numpy as np

from .bases import ProjectorBasis
from .core import Observable, Projector, PseudoObservable
from .measurement import DensityObservable
from .states import StateVectorSet


def spawn_generators(seed: int, count: int) -> list:
    """Independent child generators derived from one root seed."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(count)]


def haar_unitary(dim: int, rng) -> np.ndarray:
    """Haar-distributed unitary: QR of a complex Ginibre sample with the
    R diagonal phases folded back into Q."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_pseudo(dim: int, rng, scale: float = 1.0) -> PseudoObservable:
    m = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return PseudoObservable(scale * m)


def random_observable(dim: int, rng, scale: float = 1.0) -> Observable:
    m = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return Observable(scale * (m + m.conj().T) / 2.0)


def random_basis(dim: int, rng) -> ProjectorBasis:
    return ProjectorBasis(haar_unitary(dim, rng).T)


def random_probabilities(dim: int, rng) -> np.ndarray:
    return rng.dirichlet(np.ones(dim))


def random_density(dim: int, rng) -> DensityObservable:
    return DensityObservable(random_basis(dim, rng), random_probabilities(dim, rng))


def random_commuting_family(dim: int, size: int, rng) -> list:
    """Commuting observables built by conjugating random diagonals by one unitary."""
    u = haar_unitary(dim, rng)
    family = []
    for _ in range(size):
        diag = rng.standard_normal(dim)
        m = (u * diag) @ u.conj().T
        family.append(Observable((m + m.conj().T) / 2.0))
    return family


def random_unit_vector(dim: int, rng) -> np.ndarray:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def random_elementary_projector(dim: int, rng) -> Projector:
    v = random_unit_vector(dim, rng)
    return Projector(np.outer(v, v.conj()))


def random_state_vector_set(dim: int, rng) -> StateVectorSet:
    basis = random_basis(dim, rng)
    k0 = int(rng.integers(dim))
    return StateVectorSet(basis, k0, PseudoObservable(haar_unitary(dim, rng)))
