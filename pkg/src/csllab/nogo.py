"""Constructive checks that configuration-basis degeneracy cannot extend over
space: geometric constructions that are degenerate at one anchor point,
witness-point searches that break the degeneracy elsewhere, and brute-force
lattice enumeration certifying that no pair of distinct configurations
dephases at rate zero.

A decoherence-free subspace of the collapse dynamics would need two distinct
configurations with equal density eigenvalues at *every* probe point; these
tools exhibit the failure explicitly.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import (
    ConstructionError,
    CslParams,
    Particle,
    ParticleConfiguration,
    Position,
    SizeLimitError,
    ValidationError,
    as_position,
    canonicalize,
    configs_equal,
)
from .density import build_dephasing_matrix, density_eigenvalue
from .dfs import DfsReport, csl_dfs_scan

__all__ = [
    "DegeneratePair",
    "WitnessReport",
    "sphere_construction",
    "mirror_construction",
    "make_degenerate_pair",
    "find_witness",
    "BruteForceCertificate",
    "brute_force_no_dfs",
    "lattice_1d",
    "lattice_grid",
    "certificate_to_json",
]

DEGENERACY_RTOL = 1e-10
WITNESS_RTOL = 1e-8
MAX_CONFIGURATIONS = 100_000


@dataclass(frozen=True)
class DegeneratePair:
    """Two configurations with equal density eigenvalues at the anchor point.

    Built via `sphere_construction`, `mirror_construction`, or
    `make_degenerate_pair`, all of which verify the degeneracy invariant.
    The bare dataclass is an unchecked container (tests feed it edge cases).
    """

    q_a: ParticleConfiguration
    q_b: ParticleConfiguration
    anchor: Position
    construction: str = "custom"


def make_degenerate_pair(
    q_a: ParticleConfiguration,
    q_b: ParticleConfiguration,
    anchor,
    params: CslParams,
    construction: str = "custom",
) -> DegeneratePair:
    """Wrap two configurations after verifying distinctness and anchor degeneracy."""
    p = as_position(anchor, params.dim)
    if configs_equal(q_a, q_b, params):
        raise ConstructionError("configurations are equal as multisets")
    na = density_eigenvalue(p, q_a, params)
    nb = density_eigenvalue(p, q_b, params)
    if abs(na - nb) > DEGENERACY_RTOL * max(na, nb):
        raise ConstructionError(
            f"not degenerate at anchor: n_a = {na:.15g}, n_b = {nb:.15g}"
        )
    return DegeneratePair(q_a=q_a, q_b=q_b, anchor=p, construction=construction)


def _sphere_point(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Uniform direction on the (d-1)-sphere."""
    if dim == 1:
        return np.array([1.0 if rng.random() < 0.5 else -1.0])
    while True:
        v = rng.normal(size=dim)
        norm = np.linalg.norm(v)
        if norm > 1e-12:
            return v / norm


def sphere_construction(
    p,
    r: float,
    n_particles: int,
    n_configs: int,
    params: CslParams,
    rng_seed: int = 0,
) -> list[ParticleConfiguration]:
    """Place particles on the sphere of radius r about p; every output
    configuration shares the anchor eigenvalue n_particles * g(r).

    In one dimension the sphere is just two points, so more than two
    particles cannot sit on distinct sites: that case is infeasible.
    """
    center = np.array(as_position(p, params.dim))
    if not (math.isfinite(r) and r > 0):
        raise ValidationError(f"radius must be > 0, got {r}")
    if n_particles < 1:
        raise ValidationError(f"need at least one particle, got {n_particles}")
    if n_configs < 2:
        raise ValidationError(f"need at least two configurations, got {n_configs}")
    if params.dim == 1 and n_particles > 2:
        raise ConstructionError(
            "a 0-sphere has two points; cannot place more than 2 distinct particles in 1d"
        )

    rng = np.random.Generator(np.random.PCG64(rng_seed))
    configs: list[ParticleConfiguration] = []
    attempts = 0
    while len(configs) < n_configs:
        attempts += 1
        if attempts > 200 * n_configs:
            raise ConstructionError(
                f"could not sample {n_configs} distinct configurations on the sphere"
            )
        pts = [center + r * _sphere_point(rng, params.dim) for _ in range(n_particles)]
        candidate = canonicalize(ParticleConfiguration.from_points(pts))
        if any(configs_equal(candidate, q, params) for q in configs):
            continue
        configs.append(candidate)
    return configs


def mirror_construction(
    p,
    q_b: ParticleConfiguration,
    flip_mask,
    params: CslParams,
) -> DegeneratePair:
    """Reflect selected coordinates of q_b through the anchor componentwise:
    flipped components become 2 p_j - q_{b,i,j}.  Per-particle squared
    distances to the anchor are preserved, so the pair is degenerate at p.
    """
    center = as_position(p, params.dim)
    mask = [tuple(bool(m) for m in row) for row in flip_mask]
    if len(mask) != q_b.n_particles or any(len(row) != params.dim for row in mask):
        raise ValidationError("flip_mask must be n_particles x dim booleans")
    if not any(any(row) for row in mask):
        raise ConstructionError("flip_mask must flip at least one component")

    flipped = []
    for particle, row in zip(q_b.particles, mask):
        coords = tuple(
            2.0 * center[j] - c if row[j] else c for j, c in enumerate(particle.pos)
        )
        flipped.append(Particle(coords, particle.species, particle.spin))
    q_a = ParticleConfiguration(tuple(flipped))
    if configs_equal(q_a, q_b, params):
        raise ConstructionError(
            "mask produced identical configurations (flipped components sit on the anchor)"
        )
    return make_degenerate_pair(q_a, q_b, center, params, construction="mirror")


@dataclass(frozen=True)
class WitnessReport:
    """Outcome of a witness-point search.

    witness is None when every probe was exhausted without breaking the
    degeneracy; for distinct configurations that outcome would contradict
    the no-go and is surfaced by callers as an anomaly.
    """

    witness: Position | None
    delta: float
    probes_tried: int
    symmetry_note: str | None
    seed: int


def _detect_axis_reflection(
    pair: DegeneratePair, params: CslParams
) -> str | None:
    """Detect a reflection through an anchor-aligned coordinate hyperplane
    mapping q_a onto q_b; degeneracy then holds on that whole hyperplane."""
    for axis in range(params.dim):
        reflected = []
        for particle in pair.q_a.particles:
            coords = list(particle.pos)
            coords[axis] = 2.0 * pair.anchor[axis] - coords[axis]
            reflected.append(Particle(tuple(coords), particle.species, particle.spin))
        mirrored = ParticleConfiguration(tuple(reflected))
        if configs_equal(mirrored, pair.q_b, params):
            return (
                f"reflection symmetry about the hyperplane x_{axis} = {pair.anchor[axis]:g}; "
                "degeneracy holds on that locus, witnesses lie off it"
            )
    return None


def find_witness(
    pair: DegeneratePair,
    params: CslParams,
    rng_seed: int = 0,
    max_random_probes: int = 64,
) -> WitnessReport:
    """Search for a probe point where the two density eigenvalues differ.

    Probes, in order: every particle center of q_a and q_b, then uniform
    random points in the particle bounding box inflated by 3 r_c (random
    points avoid any reflection locus almost surely).  The first probe with
    relative gap above 1e-8 is returned and should be independently
    re-verified by the caller; exhaustion is reported, not raised.
    """
    anchor = np.array(pair.anchor)
    pts = np.vstack([pair.q_a.positions(), pair.q_b.positions()])
    probes: list[np.ndarray] = []
    for candidate in pts:
        if any(np.array_equal(candidate, q) for q in probes):
            continue
        probes.append(candidate)

    rng = np.random.Generator(np.random.PCG64(rng_seed))
    lo = pts.min(axis=0) - 3.0 * params.r_c
    hi = pts.max(axis=0) + 3.0 * params.r_c
    note = _detect_axis_reflection(pair, params)

    tried = 0
    for k in range(len(probes) + max_random_probes):
        probe = probes[k] if k < len(probes) else rng.uniform(lo, hi)
        if np.linalg.norm(probe - anchor) <= params.position_tol:
            continue
        tried += 1
        na = density_eigenvalue(tuple(probe), pair.q_a, params)
        nb = density_eigenvalue(tuple(probe), pair.q_b, params)
        scale = max(na, nb, 1e-300)
        delta = abs(na - nb)
        if delta > WITNESS_RTOL * scale:
            return WitnessReport(
                witness=tuple(map(float, probe)),
                delta=delta,
                probes_tried=tried,
                symmetry_note=note,
                seed=rng_seed,
            )
    return WitnessReport(
        witness=None, delta=0.0, probes_tried=tried, symmetry_note=note, seed=rng_seed
    )


def lattice_1d(n_sites: int, spacing: float) -> list[Position]:
    """n sites at 0, spacing, ..., as 1-d positions."""
    return [(i * spacing,) for i in range(n_sites)]


def lattice_grid(shape, spacing: float) -> list[Position]:
    """Rectangular lattice with the given per-axis site counts."""
    axes = [range(n) for n in shape]
    return [tuple(spacing * i for i in idx) for idx in itertools.product(*axes)]


@dataclass(frozen=True)
class BruteForceCertificate:
    """Exhaustive-enumeration evidence that no two distinct lattice
    configurations share eigenvalues at every site."""

    n_configs: int
    min_pairwise_rate: float
    dfs_max_dimension: int
    seed: int

    @property
    def ok(self) -> bool:
        return (self.n_configs < 2 or self.min_pairwise_rate > 0.0) and (
            self.dfs_max_dimension <= 1 or self.n_configs < 2
        )


def brute_force_no_dfs(
    lattice_sites,
    n_particles: int,
    params: CslParams,
    seed: int = 0,
) -> tuple[BruteForceCertificate, DfsReport]:
    """Enumerate every placement of n particles on distinct lattice sites,
    compute all pairwise dephasing rates in closed form, and scan for joint
    degeneracies with probes at every site.

    The certificate records the minimum off-diagonal rate (positive means no
    two configurations dephase at rate zero) and the maximum joint-eigenspace
    dimension over the full probe set (1 means no DFS candidate survives).
    """
    sites = [as_position(s, params.dim) for s in lattice_sites]
    if n_particles < 1:
        raise ValidationError(f"need at least one particle, got {n_particles}")
    if n_particles > len(sites):
        raise ValidationError(
            f"cannot place {n_particles} particles on {len(sites)} distinct sites"
        )
    count = math.comb(len(sites), n_particles)
    if count > MAX_CONFIGURATIONS:
        raise SizeLimitError(
            f"{count} configurations exceed the {MAX_CONFIGURATIONS} bound"
        )

    basis = [
        canonicalize(ParticleConfiguration.from_points(combo))
        for combo in itertools.combinations(sites, n_particles)
    ]
    if len(basis) < 2:
        certificate = BruteForceCertificate(
            n_configs=len(basis),
            min_pairwise_rate=math.inf,
            dfs_max_dimension=1,
            seed=seed,
        )
        report = csl_dfs_scan(basis, sites, params)
        return certificate, report

    dephasing = build_dephasing_matrix(basis, params, method="closed_form")
    report = csl_dfs_scan(basis, sites, params)
    certificate = BruteForceCertificate(
        n_configs=len(basis),
        min_pairwise_rate=dephasing.min_offdiagonal(),
        dfs_max_dimension=report.max_dimension,
        seed=seed,
    )
    return certificate, report


def certificate_to_json(cert: BruteForceCertificate) -> dict:
    return {
        "n_configs": cert.n_configs,
        "min_pairwise_rate": cert.min_pairwise_rate if math.isfinite(cert.min_pairwise_rate) else None,
        "dfs_max_dimension": cert.dfs_max_dimension,
        "seed": cert.seed,
    }


def save_certificate_json(path, cert: BruteForceCertificate) -> None:
    Path(path).write_text(json.dumps(certificate_to_json(cert), indent=1) + "\n", encoding="utf-8")
