"""Decoherence-free subspace detection for commuting Hermitian jump operators.

A subspace is decoherence-free exactly when every basis vector is an
eigenvector of every jump operator with one shared eigenvalue per operator.
`joint_degenerate_subspaces` partitions the full space into maximal joint
eigenspaces by sequential refinement: diagonalize the first operator, split
into eigenvalue clusters, project the next operator into each block, recurse.
Clusters of dimension >= 2 are DFS candidates; over-merging from the
conservative clustering tolerance is caught afterwards by the residual check.

Scope is restricted to Hermitian, mutually commuting operator families (the
smeared density operators are such a family, as is collective dephasing).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import (
    CslParams,
    LindbladModel,
    ParticleConfiguration,
    PreconditionError,
    SpeciesTable,
    StructuralError,
    canonicalize,
)
from .density import build_density_operator

__all__ = [
    "JointEigenspace",
    "DfsReport",
    "joint_degenerate_subspaces",
    "is_dfs",
    "lindblad_residual",
    "csl_dfs_scan",
    "default_probe_points",
    "report_to_json",
    "save_report_json",
]

HERMITICITY_TOL = 1e-10
COMMUTATOR_TOL = 1e-8
CLUSTER_RTOL = 1e-9
CLUSTER_FLOOR = 1e-300
# eigh reports exactly-degenerate eigenvalues with ~eps * ||A|| scatter; gaps
# below this fraction of the operator norm are numerical noise, not structure
CLUSTER_NOISE_FRACTION = 1e-12
EIGEN_RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class JointEigenspace:
    """Orthonormal basis of one joint eigenvalue cluster.

    basis       : (K, dim) array, columns are the basis vectors
    eigenvalues : one scalar per operator, shared across the basis
    """

    basis: np.ndarray
    eigenvalues: tuple[complex, ...]

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=complex)
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)
        object.__setattr__(self, "eigenvalues", tuple(complex(c) for c in self.eigenvalues))

    @property
    def dim(self) -> int:
        return self.basis.shape[1]


@dataclass(frozen=True)
class DfsReport:
    subspaces: tuple[JointEigenspace, ...]
    max_dimension: int
    residuals: tuple[float, ...]


def _check_family(ops: list[np.ndarray]):
    if not ops:
        raise PreconditionError("need at least one operator")
    k = ops[0].shape[0]
    for i, a in enumerate(ops):
        if a.ndim != 2 or a.shape != (k, k):
            raise StructuralError(f"operator {i} has shape {a.shape}, expected {(k, k)}")
        scale = max(float(np.abs(a).max()), 1.0)
        if float(np.abs(a - a.conj().T).max()) > HERMITICITY_TOL * scale:
            raise PreconditionError(f"operator {i} is not Hermitian to {HERMITICITY_TOL}")
    for i in range(len(ops)):
        for j in range(i + 1, len(ops)):
            comm = ops[i] @ ops[j] - ops[j] @ ops[i]
            scale = max(float(np.abs(ops[i]).max() * np.abs(ops[j]).max()), 1.0)
            if float(np.abs(comm).max()) > COMMUTATOR_TOL * scale:
                raise PreconditionError(f"operators {i} and {j} do not commute")


def _cluster_indices(vals: np.ndarray, op_scale: float) -> list[np.ndarray]:
    """Group sorted real eigenvalues whose gap is below the degeneracy tolerance:
    1e-9 relative to the larger magnitude, with a roundoff-noise floor of
    1e-12 * ||A||.  Ties break toward merging; the residual check downstream
    catches over-merged clusters.
    """
    order = np.argsort(vals)
    groups = [[order[0]]]
    for idx in order[1:]:
        prev = groups[-1][-1]
        scale = max(abs(vals[idx]), abs(vals[prev]), CLUSTER_FLOOR)
        tol = max(CLUSTER_RTOL * scale, CLUSTER_NOISE_FRACTION * op_scale)
        if vals[idx] - vals[prev] <= tol:
            groups[-1].append(idx)
        else:
            groups.append([idx])
    return [np.array(g) for g in groups]


def joint_degenerate_subspaces(ops) -> list[JointEigenspace]:
    """Partition the space into maximal joint eigenspaces of a commuting family.

    Returns one JointEigenspace per common-eigenvalue cluster, sorted by
    eigenvalue tuple; the dimensions always sum to K.  Subspaces with
    dimension >= 2 are DFS candidates.
    """
    ops = [np.asarray(a, dtype=complex) for a in ops]
    _check_family(ops)
    k = ops[0].shape[0]

    blocks: list[tuple[np.ndarray, tuple[float, ...]]] = [(np.eye(k, dtype=complex), ())]
    for a in ops:
        op_scale = float(np.linalg.norm(a, 2))
        refined = []
        for basis, labels in blocks:
            sub = basis.conj().T @ a @ basis
            sub = 0.5 * (sub + sub.conj().T)
            vals, vecs = np.linalg.eigh(sub)
            for idx in _cluster_indices(vals, op_scale):
                refined.append((basis @ vecs[:, idx], labels + (float(vals[idx].mean()),)))
        blocks = refined

    blocks.sort(key=lambda item: item[1])
    return [JointEigenspace(basis, labels) for basis, labels in blocks]


def is_dfs(basis, ops, couplings=None) -> tuple[bool, float]:
    """Check that every basis vector is a joint eigenvector with shared eigenvalues.

    Returns (verdict, residual) with residual = max over operators and basis
    vectors of |F v - c v|; verdict is True when the residual stays within
    1e-8 * (1 + |c|) for every operator.  `couplings` does not enter the
    criterion, but is shape-checked when provided.
    """
    b = np.array(basis, dtype=complex)
    if b.ndim == 1:
        b = b[:, None]
    if b.ndim != 2 or b.size == 0:
        raise PreconditionError("basis must contain at least one vector")
    # columns are vectors (JointEigenspace convention); a wide array is taken
    # as a sequence of row vectors.  For square input both readings give the
    # same verdict (full-rank spanning set of the whole space).
    vectors = b if b.shape[0] >= b.shape[1] else b.T
    if np.linalg.matrix_rank(vectors, tol=1e-10) < vectors.shape[1]:
        raise PreconditionError("basis is rank-deficient")
    ops = [np.asarray(a, dtype=complex) for a in ops]
    if couplings is not None:
        c = np.asarray(couplings)
        if c.shape != (len(ops), len(ops)):
            raise StructuralError(f"coupling shape {c.shape} does not match {len(ops)} operators")

    norms = np.linalg.norm(vectors, axis=0)
    unit = vectors / norms

    ok = True
    worst = 0.0
    for a in ops:
        av = a @ unit
        eigs = np.einsum("ik,ik->k", unit.conj(), av)
        c = complex(eigs.mean())
        residual = float(np.linalg.norm(av - c * unit, axis=0).max())
        worst = max(worst, residual)
        if residual > EIGEN_RESIDUAL_TOL * (1.0 + abs(c)):
            ok = False
    return ok, worst


def lindblad_residual(rho, model: LindbladModel) -> float:
    """Frobenius norm of the dissipator applied to rho (zero on a DFS)."""
    from .evolution import dissipator

    return float(np.linalg.norm(dissipator(rho, model), "fro"))


def default_probe_points(
    basis: list[ParticleConfiguration],
    params: CslParams,
    seed: int = 0,
    n_random: int = 8,
) -> list[tuple[float, ...]]:
    """Default probe heuristic: all particle centers plus uniform random points
    in the bounding box inflated by 3 r_c."""
    pts = np.vstack([q.positions() for q in basis])
    probes = [tuple(map(float, p)) for p in pts]
    seen = set(probes)
    probes = [p for p in dict.fromkeys(probes)]
    rng = np.random.Generator(np.random.PCG64(seed))
    lo = pts.min(axis=0) - 3.0 * params.r_c
    hi = pts.max(axis=0) + 3.0 * params.r_c
    for _ in range(n_random):
        p = tuple(map(float, rng.uniform(lo, hi)))
        if p not in seen:
            probes.append(p)
    return probes


def csl_dfs_scan(
    basis: list[ParticleConfiguration],
    probes,
    params: CslParams,
    species: SpeciesTable | None = None,
) -> DfsReport:
    """Search for configuration subspaces degenerate under every probe operator.

    Builds the diagonal density operator at each probe point and clusters the
    joint eigenvalues; a reported subspace of dimension >= 2 would be a DFS
    candidate for those probes.  Residuals are dissipator norms of the
    normalized subspace projectors under the probe-operator model.
    """
    probes = list(probes)
    if not probes:
        raise PreconditionError("need at least one probe point")
    configs = [canonicalize(q) for q in basis]
    ops = [build_density_operator(p, configs, params, species) for p in probes]
    subspaces = joint_degenerate_subspaces(ops)

    model = LindbladModel(
        hamiltonian=np.zeros((len(configs), len(configs))),
        jump_ops=tuple(ops),
        coupling=np.eye(len(ops)),
    )
    residuals = []
    for sub in subspaces:
        proj = (sub.basis @ sub.basis.conj().T) / sub.dim
        residuals.append(lindblad_residual(proj, model))
    return DfsReport(
        subspaces=tuple(subspaces),
        max_dimension=max(s.dim for s in subspaces),
        residuals=tuple(residuals),
    )


def report_to_json(report: DfsReport) -> dict:
    """{"subspaces": [{"dim", "eigenvalues": [[re, im], ...], "residual"}], "max_dimension"}"""
    return {
        "subspaces": [
            {
                "dim": sub.dim,
                "eigenvalues": [[c.real, c.imag] for c in sub.eigenvalues],
                "residual": res,
            }
            for sub, res in zip(report.subspaces, report.residuals)
        ],
        "max_dimension": report.max_dimension,
    }


def save_report_json(path, report: DfsReport) -> None:
    Path(path).write_text(json.dumps(report_to_json(report), indent=1) + "\n", encoding="utf-8")
