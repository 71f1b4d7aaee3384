"""Shared types: collapse parameters, particle configurations, density matrices,
Lindblad models, and their JSON file formats.

Unit conventions (fixed once, here): lengths in nm, times in s, hbar = 1, so
Hamiltonian entries are angular frequencies in rad/s.  The localization
strength ``alpha`` is in nm^-2 and the hitting-rate constant ``gamma`` in
nm^3/s; with r_c = 100 nm and gamma = 1e-9 nm^3/s these reproduce the usual
order-of-magnitude single-particle localization rate of ~1e-17 /s.

All types are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "CslLabError",
    "ValidationError",
    "StructuralError",
    "PreconditionError",
    "ConstructionError",
    "CoverageError",
    "IntegratorError",
    "SizeLimitError",
    "CslParams",
    "Position",
    "Particle",
    "ParticleConfiguration",
    "SpeciesTable",
    "DensityMatrix",
    "LindbladModel",
    "ModelReport",
    "canonicalize",
    "configs_equal",
    "validate_model",
    "load_model_json",
    "save_model_json",
    "load_basis_json",
    "save_basis_json",
]


class CslLabError(Exception):
    """Base class for all library errors."""


class ValidationError(CslLabError):
    """Invalid input values (non-finite coordinates, bad parameters, ...)."""


class StructuralError(CslLabError):
    """Dimension or shape mismatch between structurally related objects."""


class PreconditionError(CslLabError):
    """Documented operation precondition violated (non-Hermitian, non-commuting, ...)."""


class ConstructionError(CslLabError):
    """A geometric construction is infeasible or degenerates to identical configs."""


class CoverageError(CslLabError):
    """Quadrature grid does not cover the particles plus the required margin."""


class IntegratorError(CslLabError):
    """Evolution aborted because an invariant left its certified bound."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics


class SizeLimitError(CslLabError):
    """A combinatorial enumeration bound was exceeded."""


# A spatial point is a plain tuple of floats, one entry per dimension.
Position = tuple[float, ...]


def as_position(x, dim: int) -> Position:
    """Coerce to a finite d-tuple, checking dimension and finiteness."""
    pos = tuple(float(c) for c in x)
    if len(pos) != dim:
        raise StructuralError(f"position has dimension {len(pos)}, expected {dim}")
    if not all(math.isfinite(c) for c in pos):
        raise ValidationError(f"non-finite position component in {pos}")
    return pos


@dataclass(frozen=True)
class CslParams:
    """Collapse-model constants.

    alpha : inverse localization length squared, nm^-2 (r_c = 1/sqrt(alpha))
    gamma : hitting-rate constant, nm^3 s^-1
    dim   : spatial dimension, 1..3
    """

    alpha: float
    gamma: float
    dim: int = 3

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise ValidationError(f"alpha must be finite and > 0, got {self.alpha}")
        if not (math.isfinite(self.gamma) and self.gamma >= 0):
            raise ValidationError(f"gamma must be finite and >= 0, got {self.gamma}")
        if self.dim not in (1, 2, 3):
            raise ValidationError(f"dim must be 1, 2 or 3, got {self.dim}")

    @classmethod
    def from_rc(cls, rc_nm: float, gamma: float, dim: int = 3) -> "CslParams":
        if not (math.isfinite(rc_nm) and rc_nm > 0):
            raise ValidationError(f"r_c must be finite and > 0, got {rc_nm}")
        return cls(alpha=1.0 / rc_nm**2, gamma=gamma, dim=dim)

    @property
    def r_c(self) -> float:
        return 1.0 / math.sqrt(self.alpha)

    @property
    def position_tol(self) -> float:
        """Positional tolerance for configuration equality (1e-12 r_c)."""
        return 1e-12 * self.r_c


@dataclass(frozen=True)
class Particle:
    """One particle: position plus inert species/spin labels.

    Spin never enters density eigenvalues; it is carried only as a label.
    """

    pos: Position
    species: int = 0
    spin: int = 0

    def __post_init__(self):
        object.__setattr__(self, "pos", tuple(float(c) for c in self.pos))
        if not all(math.isfinite(c) for c in self.pos):
            raise ValidationError(f"non-finite particle position {self.pos}")


@dataclass(frozen=True)
class ParticleConfiguration:
    """An ordered multiset of particles labelling one density eigenvector."""

    particles: tuple[Particle, ...]
    canonical: bool = False

    def __post_init__(self):
        parts = tuple(
            p if isinstance(p, Particle) else Particle(*p) for p in self.particles
        )
        if len(parts) < 1:
            raise ValidationError("configuration needs at least one particle")
        dims = {len(p.pos) for p in parts}
        if len(dims) != 1:
            raise StructuralError(f"mixed particle dimensions {sorted(dims)}")
        object.__setattr__(self, "particles", parts)

    @classmethod
    def from_points(cls, points, species: int = 0, spin: int = 0) -> "ParticleConfiguration":
        return cls(tuple(Particle(tuple(p), species, spin) for p in points))

    @property
    def n_particles(self) -> int:
        return len(self.particles)

    @property
    def dim(self) -> int:
        return len(self.particles[0].pos)

    def positions(self) -> np.ndarray:
        """(N, d) array of positions."""
        return np.array([p.pos for p in self.particles], dtype=float)

    def species_labels(self) -> tuple[int, ...]:
        return tuple(p.species for p in self.particles)


def canonicalize(config: ParticleConfiguration) -> ParticleConfiguration:
    """Lexicographically sort particles by (species, coords, spin).

    Idempotent, and preserves the multiset equality class (it only reorders).
    """
    parts = tuple(sorted(config.particles, key=lambda p: (p.species, p.pos, p.spin)))
    return ParticleConfiguration(parts, canonical=True)


def configs_equal(
    a: ParticleConfiguration, b: ParticleConfiguration, params: CslParams
) -> bool:
    """Multiset equality of (position, species) pairs with positional tolerance.

    Tolerance is 1e-12 r_c (well below any quadrature resolution, above
    double-precision noise).  Spin labels are ignored.  Exact greedy matching
    is fine at this tolerance: distinct physical particles are never this close
    unless the configurations genuinely coincide.
    """
    if a.n_particles != b.n_particles or a.dim != b.dim:
        return False
    tol = params.position_tol
    remaining = list(b.particles)
    for pa in a.particles:
        match = None
        for i, pb in enumerate(remaining):
            if pa.species != pb.species:
                continue
            if math.dist(pa.pos, pb.pos) <= tol:
                match = i
                break
        if match is None:
            return False
        remaining.pop(match)
    return True


@dataclass(frozen=True)
class SpeciesTable:
    """Mass ratios m_k/m_0 per species label; label 0 is the nucleon reference."""

    mass_ratio: dict[int, float] = field(default_factory=lambda: {0: 1.0})

    def __post_init__(self):
        ratios = dict(self.mass_ratio)
        ratios.setdefault(0, 1.0)
        for label, r in ratios.items():
            if not (math.isfinite(r) and r > 0):
                raise ValidationError(f"mass ratio for species {label} must be > 0, got {r}")
        if ratios[0] != 1.0:
            raise ValidationError("species 0 is the reference and must have ratio 1")
        object.__setattr__(self, "mass_ratio", ratios)

    def ratio(self, label: int) -> float:
        try:
            return self.mass_ratio[label]
        except KeyError:
            raise ValidationError(f"unknown species label {label}") from None


def _hermiticity_deviation(m: np.ndarray) -> float:
    if m.size == 0:
        return 0.0
    scale = max(np.abs(m).max(), 1.0)
    return float(np.abs(m - m.conj().T).max() / scale)


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, PSD, trace-1 matrix over an opaque finite basis."""

    matrix: np.ndarray
    labels: tuple = ()

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise StructuralError(f"density matrix must be square, got shape {m.shape}")
        if self.labels and len(self.labels) != m.shape[0]:
            raise StructuralError(
                f"{len(self.labels)} labels for a {m.shape[0]}-dim matrix"
            )
        if _hermiticity_deviation(m) > 1e-12:
            raise ValidationError("density matrix is not Hermitian to 1e-12 relative")
        if abs(np.trace(m).real - 1.0) > 1e-10 or abs(np.trace(m).imag) > 1e-10:
            raise ValidationError(f"trace must be 1 to 1e-10, got {np.trace(m)}")
        if np.linalg.eigvalsh(0.5 * (m + m.conj().T)).min() < -1e-9:
            raise ValidationError("density matrix has eigenvalue below -1e-9")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class LindbladModel:
    """System Hamiltonian, jump operators, and bath coupling matrix.

    hamiltonian : K x K Hermitian (rad/s, hbar = 1)
    jump_ops    : M operators, each K x K
    coupling    : M x M Hermitian PSD matrix
    """

    hamiltonian: np.ndarray
    jump_ops: tuple[np.ndarray, ...]
    coupling: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.hamiltonian, dtype=complex)
        ops = tuple(np.asarray(f, dtype=complex) for f in self.jump_ops)
        a = np.asarray(self.coupling, dtype=complex)
        h.setflags(write=False)
        a.setflags(write=False)
        for f in ops:
            f.setflags(write=False)
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "jump_ops", ops)
        object.__setattr__(self, "coupling", a)

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    @property
    def n_jumps(self) -> int:
        return len(self.jump_ops)


@dataclass(frozen=True)
class ModelReport:
    """Validation findings; empty `violations` iff the model is valid."""

    violations: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_model(model: LindbladModel) -> ModelReport:
    """Check Hermiticity of H, Hermiticity + PSD of the coupling, and shapes.

    Shape mismatches are structural (raised, with the offending index); value
    violations are collected into the report.
    """
    h = model.hamiltonian
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise StructuralError(f"hamiltonian must be square, got {h.shape}")
    k = h.shape[0]
    for i, f in enumerate(model.jump_ops):
        if f.shape != (k, k):
            raise StructuralError(f"jump operator {i} has shape {f.shape}, expected {(k, k)}")
    m = len(model.jump_ops)
    if model.coupling.shape != (m, m):
        raise StructuralError(
            f"coupling has shape {model.coupling.shape}, expected {(m, m)}"
        )

    violations = []
    if _hermiticity_deviation(h) > 1e-12:
        violations.append("hamiltonian not Hermitian to 1e-12 relative")
    a = model.coupling
    if _hermiticity_deviation(a) > 1e-12:
        violations.append("coupling not Hermitian to 1e-12 relative")
    elif m and np.linalg.eigvalsh(0.5 * (a + a.conj().T)).min() < -1e-9:
        violations.append("coupling has eigenvalue below -1e-9 (not PSD)")
    return ModelReport(tuple(violations))


# ---------------------------------------------------------------------------
# JSON file formats
# ---------------------------------------------------------------------------

def _matrix_to_json(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m, dtype=complex)]


def _matrix_from_json(rows, what: str) -> np.ndarray:
    if not rows:
        return np.zeros((0, 0), dtype=complex)
    try:
        return np.array([[complex(re, im) for re, im in row] for row in rows], dtype=complex)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"malformed {what}: entries must be [re, im] pairs") from exc


def save_model_json(path, model: LindbladModel) -> None:
    """Model file: {"hamiltonian": [[[re,im],...],...], "jump_ops": [...], "coupling": [...]}."""
    doc = {
        "hamiltonian": _matrix_to_json(model.hamiltonian),
        "jump_ops": [_matrix_to_json(f) for f in model.jump_ops],
        "coupling": _matrix_to_json(model.coupling),
    }
    Path(path).write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")


def load_model_json(path) -> LindbladModel:
    """Load and validate a model file; raises ValidationError if invalid."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"model file is not valid JSON: {exc}") from exc
    for key in ("hamiltonian", "jump_ops", "coupling"):
        if key not in doc:
            raise ValidationError(f"model file missing key {key!r}")
    model = LindbladModel(
        hamiltonian=_matrix_from_json(doc["hamiltonian"], "hamiltonian"),
        jump_ops=tuple(_matrix_from_json(f, "jump operator") for f in doc["jump_ops"]),
        coupling=_matrix_from_json(doc["coupling"], "coupling"),
    )
    report = validate_model(model)
    if not report.ok:
        raise ValidationError("invalid model: " + "; ".join(report.violations))
    return model


def save_basis_json(path, basis) -> None:
    """Configuration-basis file: [{"particles": [{"pos": [...], "species": 0, "spin": 0}, ...]}, ...]."""
    doc = [
        {
            "particles": [
                {"pos": list(p.pos), "species": p.species, "spin": p.spin}
                for p in config.particles
            ]
        }
        for config in basis
    ]
    Path(path).write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")


def load_basis_json(path) -> list[ParticleConfiguration]:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"basis file is not valid JSON: {exc}") from exc
    if not isinstance(doc, list):
        raise ValidationError("basis file must be a JSON list of configurations")
    basis = []
    for entry in doc:
        try:
            parts = tuple(
                Particle(tuple(p["pos"]), int(p.get("species", 0)), int(p.get("spin", 0)))
                for p in entry["particles"]
            )
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed configuration entry: {entry!r}") from exc
        basis.append(ParticleConfiguration(parts))
    return basis
