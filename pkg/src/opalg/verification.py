"""Randomized property suites behind the ``verify`` command.

Every suite draws from an independent child generator of the root seed and
reports its worst observed deviation against the suite tolerance, so a
verification run is reproducible byte for byte from (dims, trials, seed,
tol_scale).  A tolerance scale of zero turns every suite into a forced
failure, which is the intended fault-injection handle.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from . import rng as rnd
from .bases import ProjectorBasis, complete_compatible_basis, diagonal_coefficients
from .core import PseudoObservable, commutator, real_imag_parts
from .errors import VerificationFailure
from .measurement import (
    DensityObservable,
    expectation,
    project_density,
    project_observable,
    transition_matrix,
    uncertainty_check,
)
from .scenario import bundled_scenario_path, load_scenario, loads_scenario, dumps_scenario, run_scenario
from .spectral import decompose, inner, norm, trace
from .states import (
    StateVectorSet,
    equivalent_set,
    gram_schmidt,
    lemma_elementary_equality,
    orthonormal_basis_to_eigenstate_set,
    verify_characterization,
    wave_function,
)


@dataclass
class PropertyResult:
    module: str
    name: str
    passed: bool
    worst_error: float
    tolerance: float
    trials: int
    seed: int
    detail: str = ""


@dataclass
class VerificationReport:
    seed: int
    dims: tuple
    trials: int
    tol_scale: float
    results: tuple

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def to_json(self) -> str:
        payload = {
            "seed": self.seed,
            "dims": list(self.dims),
            "trials": self.trials,
            "tol_scale": self.tol_scale,
            "passed": self.passed,
            "results": [asdict(r) for r in self.results],
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"


class _Worst:
    """Track the largest deviation and where it happened."""

    def __init__(self):
        self.value = 0.0
        self.where = ""
        self.count = 0

    def update(self, error, where=""):
        error = float(error)
        self.count += 1
        if error > self.value:
            self.value = error
            self.where = where


def _per_dim(trials, dims, cap=None):
    n = max(1, trials // max(1, len(dims)))
    if cap is not None:
        n = min(n, cap)
    return n


def _clip(dims, lo=1, hi=None):
    out = tuple(d for d in dims if d >= lo and (hi is None or d <= hi))
    if out:
        return out
    fallback = min(dims, key=lambda d: abs(d - (hi or lo)))
    return (max(lo, min(fallback, hi)) if hi else max(lo, fallback),)


# ---------------------------------------------------------------------------
# algebra core


def _suite_product_laws(dims, trials, rng):
    worst = _Worst()
    for d in dims:
        for t in range(_per_dim(trials, dims)):
            p, q, r = (rnd.random_pseudo(d, rng) for _ in range(3))
            scale = max(1.0, norm(p) * norm(q) * norm(r))
            assoc = norm((p @ q) @ r - p @ (q @ r)) / scale
            dist = norm(p @ (q + r) - (p @ q + p @ r)) / scale
            worst.update(max(assoc, dist), f"d={d} trial={t}")
    return worst, 1e-12


def _suite_dagger_laws(dims, trials, rng):
    worst = _Worst()
    for d in dims:
        for t in range(_per_dim(trials, dims)):
            p, q = rnd.random_pseudo(d, rng), rnd.random_pseudo(d, rng)
            invol = norm(p.dagger().dagger() - p)
            anti = norm((p @ q).dagger() - q.dagger() @ p.dagger()) / max(1.0, norm(p) * norm(q))
            worst.update(max(invol, anti), f"d={d} trial={t}")
    return worst, 1e-12


def _suite_real_imag(dims, trials, rng):
    worst = _Worst()
    for d in dims:
        for t in range(_per_dim(trials, dims)):
            z = rnd.random_pseudo(d, rng)
            re, im = real_imag_parts(z)
            recomb = float(np.max(np.abs(re.components + 1j * im.components - z.components)))
            herm = max(
                float(np.max(np.abs(re.components - re.components.conj().T))),
                float(np.max(np.abs(im.components - im.components.conj().T))),
            )
            worst.update(max(recomb, herm), f"d={d} trial={t}")
    return worst, 1e-14


def _suite_trace_commutator(dims, trials, rng):
    worst = _Worst()
    for d in _clip(dims, 2, 16):
        for t in range(_per_dim(trials, dims)):
            x, y = rnd.random_pseudo(d, rng), rnd.random_pseudo(d, rng)
            worst.update(abs(trace(commutator(x, y))), f"d={d} trial={t}")
    return worst, 1e-11


# ---------------------------------------------------------------------------
# bases


def _suite_projector_relations(dims, trials, rng):
    worst = _Worst()
    for d in dims:
        for t in range(_per_dim(trials, dims, cap=40)):
            basis = rnd.random_basis(d, rng)
            mats = [p.components for p in basis.projectors]
            closure = float(np.linalg.norm(sum(mats) - np.eye(d)))
            worst.update(closure, f"d={d} trial={t} closure")
            for j in range(d):
                for k in range(d):
                    target = mats[j] if j == k else 0.0
                    dev = float(np.linalg.norm(mats[j] @ mats[k] - target))
                    worst.update(dev, f"d={d} trial={t} ({j},{k})")
    return worst, 1e-10


def _suite_dyad_products(dims, trials, rng):
    worst = _Worst()
    for d in _clip(dims, 1, 8):
        for t in range(_per_dim(trials, dims, cap=3)):
            dyads = rnd.random_basis(d, rng).dyads
            mats = {(j, k): dyads.dyad(j, k).components for j in range(d) for k in range(d)}
            for (j, k), left in mats.items():
                for (kp, l), right in mats.items():
                    target = mats[(j, l)] if k == kp else 0.0
                    dev = float(np.linalg.norm(left @ right - target))
                    worst.update(dev, f"d={d} trial={t} ({j},{k},{kp},{l})")
    return worst, 1e-10


def _suite_basis_conjugation(dims, trials, rng):
    worst = _Worst()
    for d in dims:
        for t in range(_per_dim(trials, dims, cap=50)):
            basis = rnd.random_basis(d, rng)
            rotated = basis.conjugated(PseudoObservable(rnd.haar_unitary(d, rng)))
            gram = rotated.matrix.conj().T @ rotated.matrix
            worst.update(float(np.max(np.abs(gram - np.eye(d)))), f"d={d} trial={t}")
    return worst, 1e-10


def _suite_family_reconstruction(dims, trials, rng):
    worst = _Worst()
    for d in dims:
        for t in range(_per_dim(trials, dims, cap=50)):
            family = rnd.random_commuting_family(d, int(rng.integers(1, 4)), rng)
            basis = complete_compatible_basis(family)
            v = basis.matrix
            for obs in family:
                coeffs = diagonal_coefficients(obs, basis)
                rebuilt = (v * coeffs) @ v.conj().T
                worst.update(float(np.linalg.norm(rebuilt - obs.components)), f"d={d} trial={t}")
    return worst, 1e-8


# ---------------------------------------------------------------------------
# spectral


def _suite_trace_basis_independence(dims, trials, rng):
    worst = _Worst()
    for d in dims:
        for t in range(_per_dim(trials, dims)):
            p = rnd.random_pseudo(d, rng)
            total = trace(p)
            for _ in range(2):
                v = rnd.haar_unitary(d, rng)
                diag_sum = complex(np.sum(np.diag(v.conj().T @ p.components @ v)))
                worst.update(abs(diag_sum - total), f"d={d} trial={t}")
    return worst, 1e-10


def _suite_spectral_reconstruction(dims, trials, rng):
    worst = _Worst()
    for d in _clip(dims, 2, 16):
        for t in range(_per_dim(trials, dims)):
            obs = rnd.random_observable(d, rng)
            dec = decompose(obs)
            rec = float(np.linalg.norm(dec.reconstruct().components - obs.components))
            v = dec.basis.matrix
            right = float(np.max(np.linalg.norm(obs.components @ v - v * dec.coefficients, axis=0)))
            worst.update(max(rec, right), f"d={d} trial={t}")
    return worst, 1e-9


def _suite_eigenvalue_invariance(dims, trials, rng):
    worst = _Worst()
    for d in dims:
        for t in range(_per_dim(trials, dims, cap=80)):
            obs = rnd.random_observable(d, rng)
            u = rnd.haar_unitary(d, rng)
            rotated = PseudoObservable(u @ obs.components @ u.conj().T).as_observable(atol=1e-8)
            w1 = np.sort(decompose(obs).coefficients)
            w2 = np.sort(decompose(rotated).coefficients)
            worst.update(float(np.max(np.abs(w1 - w2))), f"d={d} trial={t}")
    return worst, 1e-8


def _suite_cauchy_schwarz(dims, trials, rng):
    worst = _Worst()
    for d in dims:
        for t in range(_per_dim(trials, dims)):
            x, y = rnd.random_pseudo(d, rng), rnd.random_pseudo(d, rng)
            excess = abs(inner(x, y)) - norm(x) * norm(y)
            worst.update(max(0.0, excess), f"d={d} trial={t}")
    return worst, 1e-12


def _suite_eigenvector_orthogonality(dims, trials, rng):
    worst = _Worst()
    for d in _clip(dims, 2):
        for t in range(_per_dim(trials, dims, cap=60)):
            dec = decompose(rnd.random_observable(d, rng))
            tol = dec.level_tolerance()
            dyads = dec.basis.dyads
            j1, j2 = rng.integers(d), rng.integers(d)
            if abs(dec.coefficients[j1] - dec.coefficients[j2]) <= tol:
                continue
            coeff = rng.standard_normal((2, d)) + 1j * rng.standard_normal((2, d))
            phi1 = sum(coeff[0, k] * dyads.dyad(int(j1), k).components for k in range(d))
            phi2 = sum(coeff[1, k] * dyads.dyad(int(j2), k).components for k in range(d))
            overlap = abs(complex(np.vdot(phi1, phi2)))
            scale = float(np.linalg.norm(phi1) * np.linalg.norm(phi2))
            worst.update(overlap / max(scale, 1e-300), f"d={d} trial={t}")
    return worst, 1e-10


# ---------------------------------------------------------------------------
# states


def _suite_member_projectors(dims, trials, rng):
    worst = _Worst()
    for d in dims:
        for t in range(_per_dim(trials, dims, cap=40)):
            sset = rnd.random_state_vector_set(d, rng)
            mats = [psi.components for psi in sset.members]
            shared = mats[0].conj().T @ mats[0]
            worst.update(abs(complex(np.trace(shared)) - 1.0), f"d={d} trial={t} trace")
            worst.update(float(np.linalg.norm(shared @ shared - shared)), f"d={d} trial={t} idem")
            for j, m in enumerate(mats):
                own = m.conj().T @ m
                worst.update(float(np.max(np.abs(own - shared))), f"d={d} trial={t} j={j}")
                proj = sset.basis.source.projector(j).components
                worst.update(float(np.linalg.norm(m @ own - m)), f"d={d} trial={t} psiJ")
                worst.update(float(np.linalg.norm(proj @ m - m)), f"d={d} trial={t} Ipsi")
    return worst, 1e-10


def _suite_characterization_roundtrip(dims, trials, rng):
    worst = _Worst()
    for d in dims:
        for t in range(_per_dim(trials, dims, cap=40)):
            sset = rnd.random_state_vector_set(d, rng)
            ok, recovered = verify_characterization(sset.members, sset.basis)
            if not ok:
                worst.update(1.0, f"d={d} trial={t} rejected")
                continue
            k0, unitary = recovered
            rebuilt = StateVectorSet(sset.basis, k0, unitary)
            dev = max(
                float(np.max(np.abs(a.components - b.components)))
                for a, b in zip(rebuilt.members, sset.members)
            )
            worst.update(dev, f"d={d} trial={t}")
    return worst, 1e-9


def _suite_superposition(dims, trials, rng):
    worst = _Worst()
    for d in _clip(dims, 2):
        for t in range(_per_dim(trials, dims, cap=30)):
            sset = rnd.random_state_vector_set(d, rng)
            coeff = rng.standard_normal(d) + 1j * rng.standard_normal(d)
            coeff /= np.linalg.norm(coeff)
            phi = PseudoObservable(sum(c * psi.components for c, psi in zip(coeff, sset.members)))
            others = [sset.member(j) for j in range(d) if j != int(np.argmax(np.abs(coeff)))]
            family = gram_schmidt([phi] + others)
            worst.update(norm(family[0] - phi), f"d={d} trial={t} head")
            new_set, change = orthonormal_basis_to_eigenstate_set(family, sset)
            ok, _ = verify_characterization(family, new_set.basis)
            if not ok:
                worst.update(1.0, f"d={d} trial={t} characterization")
            gram = change.omega.components @ change.omega.components.conj().T
            worst.update(float(np.max(np.abs(gram - np.eye(d)))), f"d={d} trial={t} omega")
    return worst, 1e-9


def _suite_equivalence_composition(dims, trials, rng):
    worst = _Worst()
    for d in dims:
        for t in range(_per_dim(trials, dims, cap=40)):
            sset = rnd.random_state_vector_set(d, rng)
            ph1, ph2 = rng.uniform(0, 2 * np.pi, d), rng.uniform(0, 2 * np.pi, d)
            y1 = PseudoObservable(rnd.haar_unitary(d, rng))
            y2 = PseudoObservable(rnd.haar_unitary(d, rng))
            stepwise = equivalent_set(equivalent_set(sset, ph1, y1), ph2, y2)
            combined = equivalent_set(sset, ph1 + ph2, y1 @ y2)
            dev = max(
                float(np.max(np.abs(a.components - b.components)))
                for a, b in zip(stepwise.members, combined.members)
            )
            worst.update(dev, f"d={d} trial={t}")
    return worst, 1e-10


def _suite_simultaneous_eigenstates(dims, trials, rng):
    worst = _Worst()
    for d in dims:
        for t in range(_per_dim(trials, dims, cap=40)):
            family = rnd.random_commuting_family(d, int(rng.integers(1, 4)), rng)
            basis = complete_compatible_basis(family)
            sset = StateVectorSet(basis, int(rng.integers(d)), PseudoObservable(rnd.haar_unitary(d, rng)))
            for obs in family:
                coeffs = diagonal_coefficients(obs, basis)
                for j, psi in enumerate(sset.members):
                    dev = float(np.linalg.norm(obs.components @ psi.components - coeffs[j] * psi.components))
                    worst.update(dev, f"d={d} trial={t} j={j}")
    return worst, 1e-9


def _suite_lemma_fuzz(dims, trials, rng):
    worst = _Worst()
    for d in dims:
        for t in range(_per_dim(trials, dims)):
            first = rnd.random_elementary_projector(d, rng)
            second = first if t % 5 == 0 else rnd.random_elementary_projector(d, rng)
            try:
                premise = lemma_elementary_equality(first, second, conclusion_atol=1e-8)
            except VerificationFailure:
                worst.update(1.0, f"d={d} trial={t} violated")
                continue
            if premise:
                worst.update(
                    float(np.linalg.norm(first.components - second.components)),
                    f"d={d} trial={t} premise",
                )
    return worst, 1e-8


# ---------------------------------------------------------------------------
# measurement


def _suite_null_expectation(dims, trials, rng):
    worst = _Worst()
    for d in dims:
        for t in range(_per_dim(trials, dims, cap=30)):
            obs = rnd.random_observable(d, rng)
            dec = decompose(obs)
            for j in range(d):
                pure = DensityObservable.pure(dec.basis, j)
                recovered = float(np.real(expectation(obs, pure)))
                worst.update(abs(recovered - float(dec.coefficients[j])), f"d={d} trial={t} recover")
            # force all eigenbasis expectations below 1e-10; the norm must vanish
            top = float(np.max(np.abs(dec.coefficients)))
            tiny = obs * (0.5e-10 / top) if top > 0 else obs
            bound = 0.0
            for _ in range(10):
                basis = rnd.random_basis(d, rng)
                for j in range(d):
                    bound = max(bound, abs(float(np.real(expectation(tiny, DensityObservable.pure(basis, j))))))
            worst.update(0.0 if bound <= 1e-10 else 1.0, f"d={d} trial={t} premise")
            worst.update(norm(tiny), f"d={d} trial={t} null")
    return worst, 1e-8


def _suite_consistency_identity(dims, trials, rng):
    worst = _Worst()
    for d in _clip(dims, 2, 12):
        for t in range(_per_dim(trials, dims)):
            density = rnd.random_density(d, rng)
            other = rnd.random_basis(d, rng)
            coeffs = rng.standard_normal(d)
            v = other.matrix
            b = PseudoObservable((v * coeffs) @ v.conj().T).as_observable(atol=1e-8)
            lhs = float(np.real(np.trace(density.components @ project_observable(b, density.basis).components)))
            rhs = float(np.real(np.trace(project_density(density, other).components @ b.components)))
            direct = float(np.real(np.trace(density.components @ b.components)))
            spread = max(lhs, rhs, direct) - min(lhs, rhs, direct)
            worst.update(spread, f"d={d} trial={t}")
    return worst, 1e-10


def _suite_density_idempotence(dims, trials, rng):
    worst = _Worst()
    for d in dims:
        for t in range(_per_dim(trials, dims, cap=80)):
            density = rnd.random_density(d, rng)
            target = rnd.random_basis(d, rng)
            once = project_density(density, target)
            twice = project_density(once, target)
            worst.update(float(np.max(np.abs(once.probabilities - twice.probabilities))), f"d={d} trial={t}")
    return worst, 1e-10


def _suite_transition_matrices(dims, trials, rng):
    worst = _Worst()
    for d in dims:
        for t in range(_per_dim(trials, dims, cap=80)):
            a, b = rnd.random_basis(d, rng), rnd.random_basis(d, rng)
            forward = transition_matrix(a, b).entries
            backward = transition_matrix(b, a).entries
            worst.update(float(np.max(np.abs(forward - backward.T))), f"d={d} trial={t} transpose")
            rows = float(np.max(np.abs(forward.sum(axis=1) - 1.0)))
            cols = float(np.max(np.abs(forward.sum(axis=0) - 1.0)))
            inside = float(max(np.max(forward) - 1.0, -np.min(forward), 0.0))
            worst.update(max(rows, cols, inside), f"d={d} trial={t} stochastic")
    return worst, 1e-12


def _suite_expectation_linearity(dims, trials, rng):
    worst = _Worst()
    for d in dims:
        for t in range(_per_dim(trials, dims)):
            density = rnd.random_density(d, rng)
            z1, z2 = rnd.random_pseudo(d, rng), rnd.random_pseudo(d, rng)
            gamma = complex(rng.standard_normal(), rng.standard_normal())
            combined = expectation(z1 + gamma * z2, density)
            split = expectation(z1, density) + gamma * expectation(z2, density)
            worst.update(abs(combined - split), f"d={d} trial={t}")
    return worst, 1e-12


def _suite_order_preservation(dims, trials, rng):
    worst = _Worst()
    for d in dims:
        for t in range(_per_dim(trials, dims)):
            density = rnd.random_density(d, rng)
            obs = rnd.random_observable(d, rng)
            root = rnd.random_pseudo(d, rng)
            psd = root.dagger() @ root
            lower = float(np.real(expectation(obs, density)))
            upper = float(np.real(expectation(obs + psd, density)))
            worst.update(max(0.0, lower - upper), f"d={d} trial={t}")
    return worst, 1e-12


def _suite_uncertainty_bound(dims, trials, rng):
    worst = _Worst()
    for d in _clip(dims, 1, 8):
        for t in range(_per_dim(trials, dims)):
            a, b = rnd.random_observable(d, rng), rnd.random_observable(d, rng)
            density = rnd.random_density(d, rng)
            check = uncertainty_check(a, b, density)
            worst.update(max(0.0, check.rhs - check.lhs), f"d={d} trial={t}")
    return worst, 1e-10


# ---------------------------------------------------------------------------
# scenario


def _suite_scenario_roundtrip(dims, trials, rng):
    worst = _Worst()
    scenario = load_scenario(str(bundled_scenario_path("qubit")))
    again = loads_scenario(dumps_scenario(scenario))
    worst.update(0.0 if again == scenario else 1.0, "bundled qubit")
    return worst, 0.5


def _suite_scenario_sampling(dims, trials, rng):
    worst = _Worst()
    scenario = load_scenario(str(bundled_scenario_path("qubit")))
    report = run_scenario(scenario, samples=max(2000, min(20000, trials * 20)))
    for step in report.steps:
        for freq, p, se in zip(step.empirical, step.analytic, step.std_errors):
            if se == 0.0:
                worst.update(0.0 if freq == p else 10.0, f"step {step.index}")
            else:
                worst.update(abs(freq - p) / se, f"step {step.index}")
    return worst, 4.0


def _suite_report_determinism(dims, trials, rng):
    worst = _Worst()
    scenario = load_scenario(str(bundled_scenario_path("qubit")))
    first = run_scenario(scenario, samples=2000).render()
    second = run_scenario(scenario, samples=2000).render()
    worst.update(0.0 if first == second else 1.0, "render bytes")
    return worst, 0.5


SUITES = (
    ("algebra-core", "product_associativity_distributivity", _suite_product_laws),
    ("algebra-core", "dagger_involution_antiautomorphism", _suite_dagger_laws),
    ("algebra-core", "real_imag_recombination", _suite_real_imag),
    ("algebra-core", "trace_commutator_zero", _suite_trace_commutator),
    ("bases", "projector_exclusivity_closure", _suite_projector_relations),
    ("bases", "dyad_product_relation", _suite_dyad_products),
    ("bases", "unitary_conjugation_closure", _suite_basis_conjugation),
    ("bases", "commuting_family_reconstruction", _suite_family_reconstruction),
    ("spectral", "trace_basis_independence", _suite_trace_basis_independence),
    ("spectral", "reconstruction_and_dyad_equations", _suite_spectral_reconstruction),
    ("spectral", "eigenvalue_unitary_invariance", _suite_eigenvalue_invariance),
    ("spectral", "cauchy_schwarz", _suite_cauchy_schwarz),
    ("spectral", "distinct_eigenvalue_orthogonality", _suite_eigenvector_orthogonality),
    ("states", "member_projector_identities", _suite_member_projectors),
    ("states", "characterization_roundtrip", _suite_characterization_roundtrip),
    ("states", "superposition_extension", _suite_superposition),
    ("states", "equivalence_composition", _suite_equivalence_composition),
    ("states", "simultaneous_eigenstates", _suite_simultaneous_eigenstates),
    ("states", "elementary_lemma_fuzz", _suite_lemma_fuzz),
    ("measurement", "null_expectation", _suite_null_expectation),
    ("measurement", "consistency_identity", _suite_consistency_identity),
    ("measurement", "density_projection_idempotence", _suite_density_idempotence),
    ("measurement", "transition_matrix_structure", _suite_transition_matrices),
    ("measurement", "expectation_linearity", _suite_expectation_linearity),
    ("measurement", "expectation_order_preservation", _suite_order_preservation),
    ("measurement", "uncertainty_bound", _suite_uncertainty_bound),
    ("scenario", "file_round_trip", _suite_scenario_roundtrip),
    ("scenario", "analytic_empirical_agreement", _suite_scenario_sampling),
    ("scenario", "report_determinism", _suite_report_determinism),
)


def run_verification(dims=None, trials: int = 1000, seed: int = 0, tol_scale: float = 1.0) -> VerificationReport:
    """Run every property suite on independent child streams of the seed."""
    dims = tuple(dims) if dims else tuple(range(2, 13))
    children = np.random.SeedSequence(seed).spawn(len(SUITES))
    results = []
    for (module, name, fn), child in zip(SUITES, children):
        worst, base_tol = fn(dims, trials, np.random.default_rng(child))
        limit = float(base_tol) * float(tol_scale)
        results.append(
            PropertyResult(
                module=module,
                name=name,
                passed=bool(worst.value <= limit),
                worst_error=float(worst.value),
                tolerance=limit,
                trials=worst.count,
                seed=int(seed),
                detail=worst.where if worst.value > limit else "",
            )
        )
    return VerificationReport(
        seed=int(seed),
        dims=dims,
        trials=int(trials),
        tol_scale=float(tol_scale),
        results=tuple(results),
    )
