"""Collapse-rate parameter arithmetic and grid scans.

The single-constituent localization rate is lambda = gamma * (alpha/4pi)^(d/2)
(the d = 3 default reproduces the usual ~1e-17 /s magnitude for gamma = 1e-9
nm^3/s and r_c = 100 nm).  A composite system with n constituents per r_c^3
volume across N such volumes collapses at Gamma = lambda * n^2 * N, bounding
coherence times by 1/Gamma.

Scans tabulate Gamma over log-spaced (lambda, r_c) grids for given defect
densities, writing CSV rows in deterministic lambda-major order.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import CslParams, ValidationError

__all__ = [
    "lambda_from_gamma",
    "gamma_from_lambda",
    "collapse_rate",
    "coherence_limit",
    "VolumeModel",
    "ExclusionRect",
    "ScanRecord",
    "scan",
    "write_scan_csv",
    "load_exclusions_json",
]

NM_PER_M = 1e9

SCAN_CSV_HEADER = (
    "lambda_s^-1,rc_nm,density_m^-3GHz^-1,n,N_volumes,Gamma_s^-1,coherence_s,excluded"
)


def lambda_from_gamma(gamma: float, params: CslParams) -> float:
    """Single-particle localization rate lambda = gamma * (alpha/4pi)^(d/2), 1/s."""
    if gamma < 0:
        raise ValidationError(f"gamma must be >= 0, got {gamma}")
    return gamma * (params.alpha / (4.0 * math.pi)) ** (params.dim / 2.0)


def gamma_from_lambda(lam: float, params: CslParams) -> float:
    """Inverse of lambda_from_gamma; round-trips to 1e-12 relative."""
    if lam < 0:
        raise ValidationError(f"lambda must be >= 0, got {lam}")
    return lam / (params.alpha / (4.0 * math.pi)) ** (params.dim / 2.0)


def collapse_rate(lam: float, n: float, n_volumes: float) -> float:
    """Center-of-mass collapse rate Gamma = lambda * n^2 * N, 1/s."""
    if lam < 0 or n < 0 or n_volumes < 0:
        raise ValidationError("lambda, n, and N must all be >= 0")
    return lam * n * n * n_volumes


def coherence_limit(rate: float) -> float | None:
    """Coherence bound 1/Gamma in seconds; None for zero rate."""
    return 1.0 / rate if rate > 0.0 else None


@dataclass(frozen=True)
class VolumeModel:
    """Bridge from a defect density to the per-volume constituent count:

        n = density [m^-3 GHz^-1] * window [GHz] * (r_c in m)^3

    The frequency window is a modelling choice (1 GHz default) and N is the
    number of r_c^3 volumes making up the system.
    """

    window_ghz: float = 1.0
    n_volumes: float = 1.0

    def __post_init__(self):
        if self.window_ghz < 0 or self.n_volumes < 0:
            raise ValidationError("window and volume count must be >= 0")

    def constituents(self, density_m3_ghz: float, rc_nm: float) -> float:
        rc_m = rc_nm / NM_PER_M
        return density_m3_ghz * self.window_ghz * rc_m**3


@dataclass(frozen=True)
class ExclusionRect:
    """Axis-aligned exclusion rectangle in (lambda, r_c) space."""

    lambda_min: float
    lambda_max: float
    rc_min: float
    rc_max: float

    def contains(self, lam: float, rc: float) -> bool:
        return self.lambda_min <= lam <= self.lambda_max and self.rc_min <= rc <= self.rc_max


@dataclass(frozen=True)
class ScanRecord:
    """One grid cell of a collapse-rate scan."""

    lambda_: float
    rc_nm: float
    density: float
    n: float
    n_volumes: float
    gamma_collapse: float
    coherence: float | None
    excluded: bool


def _log_grid(lo: float, hi: float, cells: int, what: str) -> np.ndarray:
    if cells < 1:
        raise ValidationError(f"{what}: need at least one cell, got {cells}")
    if not (lo > 0 and hi > 0 and math.isfinite(lo) and math.isfinite(hi)):
        raise ValidationError(f"{what}: bounds must be finite and > 0")
    if lo > hi:
        raise ValidationError(f"{what}: min {lo} exceeds max {hi}")
    if cells == 1:
        return np.array([lo])
    return np.geomspace(lo, hi, cells)


def scan(
    lambda_range: tuple[float, float, int],
    rc_range: tuple[float, float, int],
    densities,
    volume_model: VolumeModel | None = None,
    exclusions=(),
) -> list[ScanRecord]:
    """Tabulate Gamma = lambda n^2 N over a log-spaced (lambda, r_c) grid.

    Ranges are (min, max, cells); rows come out density-major, then
    lambda-major, then r_c.  A pure function of its inputs.
    """
    model = volume_model or VolumeModel()
    densities = list(densities)
    if not densities:
        raise ValidationError("need at least one density")
    lams = _log_grid(*lambda_range, what="lambda range")
    rcs = _log_grid(*rc_range, what="r_c range")
    records = []
    for density in densities:
        if density < 0:
            raise ValidationError(f"density must be >= 0, got {density}")
        for lam in lams:
            for rc in rcs:
                n = model.constituents(density, rc)
                gamma_c = collapse_rate(lam, n, model.n_volumes)
                records.append(
                    ScanRecord(
                        lambda_=float(lam),
                        rc_nm=float(rc),
                        density=float(density),
                        n=float(n),
                        n_volumes=float(model.n_volumes),
                        gamma_collapse=gamma_c,
                        coherence=coherence_limit(gamma_c),
                        excluded=any(r.contains(lam, rc) for r in exclusions),
                    )
                )
    return records


def _fmt(x: float) -> str:
    """Scientific notation with 9 significant digits."""
    return f"{x:.8e}"


def write_scan_csv(path, records) -> None:
    """Scan CSV with the documented column set; empty coherence for zero rate."""
    lines = [SCAN_CSV_HEADER]
    for r in records:
        coherence = _fmt(r.coherence) if r.coherence is not None else ""
        lines.append(
            ",".join(
                [
                    _fmt(r.lambda_),
                    _fmt(r.rc_nm),
                    _fmt(r.density),
                    _fmt(r.n),
                    _fmt(r.n_volumes),
                    _fmt(r.gamma_collapse),
                    coherence,
                    "true" if r.excluded else "false",
                ]
            )
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_exclusions_json(path) -> list[ExclusionRect]:
    """Exclusion file: [{"lambda_min": ..., "lambda_max": ..., "rc_min": ..., "rc_max": ...}, ...]."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"exclusion file is not valid JSON: {exc}") from exc
    if not isinstance(doc, list):
        raise ValidationError("exclusion file must be a JSON list of rectangles")
    rects = []
    for entry in doc:
        try:
            rects.append(
                ExclusionRect(
                    lambda_min=float(entry["lambda_min"]),
                    lambda_max=float(entry["lambda_max"]),
                    rc_min=float(entry["rc_min"]),
                    rc_max=float(entry["rc_max"]),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed exclusion rectangle: {entry!r}") from exc
    return rects
