"""Scenario files, sequential-measurement simulation and report emission.

A scenario names a family of Hermitian observables, an initial density over
one complete compatible space, and an ordered list of measurement steps.
Running it chains density projections step by step (the information update:
each new maximal observation deletes the information incompatible with it),
records the analytic statistics, and cross-checks them against Monte Carlo
outcome sampling.

File format (YAML, see SCENARIO_SCHEMA): top-level keys ``dim``,
``observables``, ``initial``, ``steps``, ``samples``, ``seed``.  Matrix and
vector entries are complex literals written ``a``, ``a+bi`` or ``a-bi``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from itertools import combinations

import numpy as np
import yaml

from .bases import ProjectorBasis, complete_compatible_basis, diagonal_coefficients
from .core import Observable, commutator, scaled_atol
from .errors import (
    AlgebraError,
    NotHermitian,
    ParseError,
    ValidationError,
)
from .measurement import (
    DensityObservable,
    deviation_variance,
    project_density,
    transition_matrix,
    uncertainty_check,
)

_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


# ---------------------------------------------------------------------------
# complex literals


def parse_complex(token, where: str = "value") -> complex:
    """Parse a scalar entry: bare real, or ``a+bi`` / ``a-bi`` / ``bi`` forms."""
    if isinstance(token, bool):
        raise ParseError(f"{where}: booleans are not numbers")
    if isinstance(token, (int, float)):
        return complex(token)
    if not isinstance(token, str):
        raise ParseError(f"{where}: expected a number or complex literal, got {type(token).__name__}")
    text = token.strip().replace(" ", "")
    if not text:
        raise ParseError(f"{where}: empty entry")
    try:
        if text[-1] in "iI":
            body = text[:-1]
            if body == "" or body[-1] in "+-":
                body += "1"
            return complex(body + "j")
        return complex(float(text))
    except ValueError:
        raise ParseError(f"{where}: cannot parse complex literal {token!r}") from None


def format_complex(value: complex) -> str:
    value = complex(value)
    if value.imag == 0.0:
        return repr(float(value.real))
    sign = "+" if value.imag >= 0 else "-"
    return f"{value.real!r}{sign}{abs(value.imag)!r}i"


def _parse_matrix(rows, dim: int, where: str) -> np.ndarray:
    if not isinstance(rows, list) or len(rows) != dim:
        raise ParseError(f"{where}: expected {dim} rows")
    out = np.empty((dim, dim), dtype=complex)
    for r, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != dim:
            raise ParseError(f"{where}: row {r} must hold {dim} entries")
        for c, entry in enumerate(row):
            out[r, c] = parse_complex(entry, where=f"{where}[{r}][{c}]")
    return out


def _parse_vectors(rows, dim: int, where: str) -> np.ndarray:
    return _parse_matrix(rows, dim, where)


# ---------------------------------------------------------------------------
# scenario data model


@dataclass
class Scenario:
    """Validated scenario: observables, initial density and measurement plan."""

    dim: int
    observables: dict
    initial_basis: object  # "computational" | tuple of names | ndarray of vectors
    initial_probabilities: np.ndarray
    steps: tuple
    samples: int
    seed: int
    name: str = "<memory>"

    def __eq__(self, other):
        if not isinstance(other, Scenario):
            return NotImplemented
        if (
            self.dim != other.dim
            or self.samples != other.samples
            or self.seed != other.seed
            or self.steps != other.steps
            or list(self.observables) != list(other.observables)
        ):
            return False
        for key in self.observables:
            if not np.array_equal(
                self.observables[key].components, other.observables[key].components
            ):
                return False
        if isinstance(self.initial_basis, np.ndarray) != isinstance(other.initial_basis, np.ndarray):
            return False
        if isinstance(self.initial_basis, np.ndarray):
            if not np.array_equal(self.initial_basis, other.initial_basis):
                return False
        elif self.initial_basis != other.initial_basis:
            return False
        return np.array_equal(self.initial_probabilities, other.initial_probabilities)

    def initial_projector_basis(self) -> ProjectorBasis:
        if isinstance(self.initial_basis, np.ndarray):
            return ProjectorBasis(self.initial_basis)
        if self.initial_basis == "computational":
            return ProjectorBasis.computational(self.dim)
        return complete_compatible_basis([self.observables[n] for n in self.initial_basis])

    def initial_basis_label(self) -> str:
        if isinstance(self.initial_basis, np.ndarray):
            return "explicit vectors"
        if self.initial_basis == "computational":
            return "computational"
        return ", ".join(self.initial_basis)


def _require(mapping, key, kind, where):
    if key not in mapping:
        raise ParseError(f"field '{where}{key}': missing")
    value = mapping[key]
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ParseError(f"field '{where}{key}': expected an integer")
    elif not isinstance(value, kind):
        raise ParseError(f"field '{where}{key}': expected {kind.__name__}")
    return value


def loads_scenario(text: str, name: str = "<string>") -> Scenario:
    """Parse and validate a scenario document."""
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = f"line {mark.line + 1}" if mark is not None else "unknown line"
        raise ParseError(f"{name}: {line}: {getattr(exc, 'problem', exc)}") from None
    if not isinstance(raw, dict):
        raise ParseError(f"{name}: document must be a mapping")

    dim = _require(raw, "dim", int, "")
    if dim < 1:
        raise ParseError("field 'dim': must be at least 1")
    samples = _require(raw, "samples", int, "")
    if samples < 0:
        raise ParseError("field 'samples': must be non-negative")
    seed = _require(raw, "seed", int, "")
    if seed < 0:
        raise ParseError("field 'seed': must be non-negative")

    raw_obs = _require(raw, "observables", dict, "")
    observables = {}
    for obs_name, rows in raw_obs.items():
        if not isinstance(obs_name, str) or not _NAME_RE.match(obs_name):
            raise ParseError(f"field 'observables': invalid name {obs_name!r}")
        matrix = _parse_matrix(rows, dim, where=f"observables.{obs_name}")
        try:
            observables[obs_name] = Observable(matrix)
        except NotHermitian:
            raise ValidationError(f"observable {obs_name} not Hermitian") from None

    initial = _require(raw, "initial", dict, "")
    basis_spec = initial.get("basis", "computational")
    if isinstance(basis_spec, str):
        if basis_spec != "computational":
            basis_spec = (basis_spec,)
    elif isinstance(basis_spec, list):
        if basis_spec and all(isinstance(x, str) for x in basis_spec):
            basis_spec = tuple(basis_spec)
        else:
            basis_spec = _parse_vectors(basis_spec, dim, where="initial.basis")
    else:
        raise ParseError("field 'initial.basis': expected a name, name list or vector rows")
    if isinstance(basis_spec, tuple):
        for n in basis_spec:
            if n not in observables:
                raise ValidationError(f"initial basis references unknown observable {n!r}")
        _check_commuting(observables, basis_spec, "initial basis")
    elif isinstance(basis_spec, np.ndarray):
        try:
            ProjectorBasis(basis_spec)
        except AlgebraError as exc:
            raise ValidationError(f"initial basis vectors invalid: {exc}") from None

    probs_raw = _require(initial, "probabilities", list, "initial.")
    if len(probs_raw) != dim:
        raise ParseError(f"field 'initial.probabilities': expected {dim} entries")
    try:
        probs = np.array([float(x) for x in probs_raw])
    except (TypeError, ValueError):
        raise ParseError("field 'initial.probabilities': entries must be real numbers") from None

    raw_steps = _require(raw, "steps", list, "")
    steps = []
    for idx, step in enumerate(raw_steps, start=1):
        if not isinstance(step, dict) or set(step) != {"measure"}:
            raise ParseError(f"field 'steps[{idx}]': expected a 'measure' mapping")
        names = step["measure"]
        if not isinstance(names, list) or not names or not all(isinstance(n, str) for n in names):
            raise ParseError(f"field 'steps[{idx}].measure': expected a list of names")
        for n in names:
            if n not in observables:
                raise ValidationError(f"step {idx} references unknown observable {n!r}")
        _check_commuting(observables, names, f"step {idx}")
        steps.append(tuple(names))

    unknown = set(raw) - {"dim", "observables", "initial", "steps", "samples", "seed"}
    if unknown:
        raise ParseError(f"unknown top-level field(s): {sorted(unknown)}")

    scenario = Scenario(
        dim=dim,
        observables=observables,
        initial_basis=basis_spec,
        initial_probabilities=probs,
        steps=tuple(steps),
        samples=samples,
        seed=seed,
        name=name,
    )
    try:
        DensityObservable(scenario.initial_projector_basis(), probs)
    except AlgebraError as exc:
        raise ValidationError(f"initial distribution invalid: {exc}") from None
    return scenario


def _check_commuting(observables, names, where):
    for a, b in combinations(names, 2):
        dev = float(np.linalg.norm(commutator(observables[a], observables[b]).components))
        lim = scaled_atol(1e-9, observables[a].components, observables[b].components)
        if dev > lim:
            raise ValidationError(f"{where}: family not commuting ({a}, {b})")


def load_scenario(path) -> Scenario:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror or exc}") from None
    return loads_scenario(text, name=str(path))


def _emit_matrix(lines, rows, indent):
    for row in rows:
        entries = ", ".join(f'"{format_complex(x)}"' for x in row)
        lines.append(f"{indent}- [{entries}]")


def dumps_scenario(s: Scenario) -> str:
    """Serialize back to the file format; reparsing yields an equal scenario."""
    lines = [f"dim: {s.dim}", "observables:"]
    for name, obs in s.observables.items():
        lines.append(f"  {name}:")
        _emit_matrix(lines, obs.components, "    ")
    lines.append("initial:")
    if isinstance(s.initial_basis, np.ndarray):
        lines.append("  basis:")
        _emit_matrix(lines, s.initial_basis, "    ")
    elif s.initial_basis == "computational":
        lines.append("  basis: computational")
    else:
        lines.append(f"  basis: [{', '.join(s.initial_basis)}]")
    probs = ", ".join(repr(float(p)) for p in s.initial_probabilities)
    lines.append(f"  probabilities: [{probs}]")
    lines.append("steps:")
    for step in s.steps:
        lines.append(f"  - measure: [{', '.join(step)}]")
    lines.append(f"samples: {s.samples}")
    lines.append(f"seed: {s.seed}")
    return "\n".join(lines) + "\n"


def save_scenario(s: Scenario, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_scenario(s))


def bundled_scenario_path(name: str = "qubit"):
    """Filesystem path of a scenario shipped with the package."""
    return resources.files("opalg").joinpath(f"scenarios/{name}.yaml")


# ---------------------------------------------------------------------------
# execution


@dataclass(frozen=True)
class ObserverRecord:
    """Density bookkeeping of one observer along the measurement chain."""

    history: tuple  # (step index, ProjectorBasis, DensityObservable)

    @property
    def current(self) -> DensityObservable:
        return self.history[-1][2]


@dataclass(frozen=True)
class StepReport:
    index: int
    family: tuple
    labels: tuple  # per outcome, tuple of eigenvalues aligned with the family
    transition: np.ndarray
    analytic: np.ndarray
    expectations: tuple  # (name, mean, variance, std)
    uncertainty: tuple  # (name_a, name_b, lhs, rhs, holds)
    empirical: np.ndarray | None
    std_errors: np.ndarray | None
    status: tuple


@dataclass(frozen=True)
class Report:
    scenario_name: str
    dim: int
    seed: int
    samples: int
    observable_names: tuple
    initial_label: str
    initial_probabilities: np.ndarray
    steps: tuple
    observer: ObserverRecord

    @property
    def sampling_ok(self) -> bool:
        return all(st in ("ok", "flag") for step in self.steps for st in step.status)

    def render(self) -> str:
        out = [
            f"scenario: {self.scenario_name}",
            f"dim: {self.dim}",
            f"seed: {self.seed}",
            f"samples: {self.samples}",
            f"observables: {', '.join(self.observable_names)}",
            "",
            "[initial]",
            f"basis: {self.initial_label}",
            "analytic:",
        ]
        for j, p in enumerate(self.initial_probabilities):
            out.append(f"  p[{j}] = {_fmt(p)}")
        for step in self.steps:
            out.append("")
            out.append(f"[step {step.index}] measure: {', '.join(step.family)}")
            out.append("transition:")
            for j, row in enumerate(step.transition):
                out.append(f"  row {j}: " + " ".join(_fmt(x) for x in row))
            out.append("analytic:")
            for k, p in enumerate(step.analytic):
                label = ", ".join(
                    f"{name}={_short(v)}" for name, v in zip(step.family, step.labels[k])
                )
                out.append(f"  p[{k}] = {_fmt(p)}  ({label})")
            if step.empirical is not None:
                out.append("empirical:")
                for k, f in enumerate(step.empirical):
                    se = step.std_errors[k]
                    dev = abs(f - step.analytic[k])
                    dev_se = dev / se if se > 0 else (0.0 if dev == 0 else float("inf"))
                    out.append(
                        f"  f[{k}] = {_fmt(f)}  se = {_fmt(se)}  dev = {dev_se:.2f}se  {step.status[k]}"
                    )
            out.append("observables:")
            for name, mean, variance, std in step.expectations:
                out.append(f"  <{name}> = {_fmt(mean)}  var = {_fmt(variance)}  std = {_fmt(std)}")
            if step.uncertainty:
                out.append("uncertainty:")
                for name_a, name_b, lhs, rhs, holds in step.uncertainty:
                    verdict = "yes" if holds else "NO"
                    out.append(
                        f"  ({name_a}, {name_b}): lhs = {_fmt(lhs)}  rhs = {_fmt(rhs)}  holds = {verdict}"
                    )
        out.append("")
        return "\n".join(out)


def _fmt(x) -> str:
    x = float(x)
    if abs(x) < 5e-13:
        x = 0.0
    return f"{x:.12f}"


def _short(x) -> str:
    return f"{float(x):.6g}"


def run_scenario(s: Scenario, samples: int | None = None, seed: int | None = None) -> Report:
    """Chain the measurement steps, collecting analytic and sampled statistics.

    Sampling draws each trajectory step from the transition row of the
    realized pure state, so empirical frequencies estimate exactly the
    chained projected-density probabilities.
    """
    samples = s.samples if samples is None else int(samples)
    seed = s.seed if seed is None else int(seed)

    basis = s.initial_projector_basis()
    density = DensityObservable(basis, s.initial_probabilities)
    history = [(0, basis, density)]
    pair_list = list(combinations(s.observables, 2))

    analytic_steps = []
    for index, family in enumerate(s.steps, start=1):
        target = complete_compatible_basis([s.observables[n] for n in family])
        coeff_rows = [diagonal_coefficients(s.observables[n], target) for n in family]
        labels = tuple(
            tuple(float(coeff_rows[a][k]) for a in range(len(family)))
            for k in range(s.dim)
        )
        trans = transition_matrix(basis, target)
        density = project_density(density, target)
        expectations = tuple(
            (name,) + _moments(s.observables[name], density)
            for name in s.observables
        )
        uncertainty = tuple(
            (a, b) + _bound(s.observables[a], s.observables[b], density)
            for a, b in pair_list
        )
        analytic_steps.append(
            {
                "index": index,
                "family": tuple(family),
                "labels": labels,
                "transition": trans.entries,
                "analytic": density.probabilities,
                "expectations": expectations,
                "uncertainty": uncertainty,
            }
        )
        history.append((index, target, density))
        basis = target

    counts = _sample_trajectories(s, analytic_steps, samples, seed)

    steps = []
    for data, count in zip(analytic_steps, counts):
        if count is None:
            empirical = std_errors = None
            status = ()
        else:
            empirical = count / samples
            p = data["analytic"]
            std_errors = np.sqrt(np.clip(p * (1.0 - p), 0.0, None) / samples)
            status = tuple(_status(f, pk, se) for f, pk, se in zip(empirical, p, std_errors))
        steps.append(
            StepReport(
                index=data["index"],
                family=data["family"],
                labels=data["labels"],
                transition=data["transition"],
                analytic=data["analytic"],
                expectations=data["expectations"],
                uncertainty=data["uncertainty"],
                empirical=empirical,
                std_errors=std_errors,
                status=status,
            )
        )

    return Report(
        scenario_name=s.name,
        dim=s.dim,
        seed=seed,
        samples=samples,
        observable_names=tuple(s.observables),
        initial_label=s.initial_basis_label(),
        initial_probabilities=s.initial_probabilities,
        steps=tuple(steps),
        observer=ObserverRecord(history=tuple(history)),
    )


def _moments(observable, density):
    _, variance, std = deviation_variance(observable, density)
    mean = float(np.real(np.trace(density.components @ observable.components)))
    return (mean, variance, std)


def _bound(a, b, density):
    check = uncertainty_check(a, b, density)
    return (check.lhs, check.rhs, check.holds)


def _status(freq, p, se) -> str:
    dev = abs(freq - p)
    if se == 0.0:
        return "ok" if dev == 0.0 else "fail"
    if dev <= 3.0 * se:
        return "ok"
    if dev <= 4.0 * se:
        return "flag"
    return "fail"


def _sample_trajectories(s: Scenario, analytic_steps, samples: int, seed: int):
    """Outcome counts per step; None entries when sampling is disabled."""
    if samples <= 0 or not analytic_steps:
        return [None] * len(analytic_steps)
    rng = np.random.default_rng(seed)
    cum0 = np.cumsum(s.initial_probabilities)
    states = np.searchsorted(cum0, rng.random(samples), side="right")
    states = np.minimum(states, s.dim - 1)
    counts = []
    for data in analytic_steps:
        rows = np.cumsum(data["transition"], axis=1)
        draws = rng.random(samples)
        below = draws[:, None] < rows[states]
        states = np.where(below.any(axis=1), below.argmax(axis=1), s.dim - 1)
        counts.append(np.bincount(states, minlength=s.dim).astype(float))
    return counts


SCENARIO_SCHEMA = """\
Scenario file schema (YAML mapping; all six top-level keys required)

dim: positive integer, the Hilbert space dimension d.
observables: mapping of name -> d x d matrix, rows as lists.  Every matrix
  must be Hermitian.  Entries are complex literals: 'a', 'a+bi' or 'a-bi'
  (also plain YAML numbers for reals).
initial:
  basis: 'computational', a list of observable names (a mutually commuting
    family whose joint eigenbasis is used, ordered by descending eigenvalue
    tuples), or explicit rows of d orthonormal complex vectors.
  probabilities: list of d reals in [0, 1] summing to 1, aligned with the
    basis order.
steps: list of mappings '- measure: [names]'; each step's family must be
  mutually commuting.
samples: non-negative integer, Monte Carlo trajectory count (0 disables
  sampling).
seed: non-negative integer; all randomness derives from it, so equal
  (scenario, seed) pairs reproduce reports byte for byte.

Example:

dim: 2
observables:
  Z:
    - ["1.0", "0.0"]
    - ["0.0", "-1.0"]
  X:
    - ["0.0", "1.0"]
    - ["1.0", "0.0"]
initial:
  basis: [Z]
  probabilities: [1.0, 0.0]
steps:
  - measure: [X]
  - measure: [Z]
samples: 20000
seed: 7
"""
