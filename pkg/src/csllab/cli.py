"""Command-line entry point.

Subcommands (file-first: heavy outputs go to files, stdout carries summaries):

  dephase    two-configuration superposition decay vs. the analytic rate
  dfs-check  joint-eigenspace report for a Lindblad model file
  witness    constructed degenerate pairs and their witness points
  scan       collapse-rate grid over (lambda, r_c)
  brute      exhaustive lattice certificate

Exit codes: 0 ok, 2 usage/validation, 3 integrator, 4 precondition,
5 no-witness/no-go anomaly, 6 size bound.  Every run writes
"<out>.manifest.json" recording resolved parameters, input digests, and seed;
re-running with the same parameters reproduces byte-identical outputs.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from .core import (
    ConstructionError,
    CslLabError,
    CslParams,
    IntegratorError,
    LindbladModel,
    ParticleConfiguration,
    PreconditionError,
    SizeLimitError,
    StructuralError,
    ValidationError,
    load_model_json,
)
from .density import build_dephasing_matrix
from .dfs import joint_degenerate_subspaces, lindblad_residual, report_to_json
from .dfs import DfsReport
from .evolution import evolve_config_basis, extract_decay_rate, write_trajectory_csv
from .nogo import (
    brute_force_no_dfs,
    certificate_to_json,
    find_witness,
    make_degenerate_pair,
    mirror_construction,
    sphere_construction,
)
from .rates import VolumeModel, load_exclusions_json, scan, write_scan_csv
from .density import density_eigenvalue

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INTEGRATOR = 3
EXIT_PRECONDITION = 4
EXIT_ANOMALY = 5
EXIT_SIZE = 6


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _write_manifest(out, subcommand, parameters, inputs, outputs, seed, wall_time):
    manifest = {
        "subcommand": subcommand,
        "parameters": parameters,
        "input_digests": {str(p): _sha256(p) for p in inputs},
        "outputs": [str(p) for p in outputs],
        "seed": seed,
        "wall_time_s": wall_time,
    }
    Path(str(out) + ".manifest.json").write_text(
        json.dumps(manifest, indent=1) + "\n", encoding="utf-8"
    )


def _trial_seed(seed: int, index: int) -> int:
    """Deterministic per-trial child seed."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(index,))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _json_dump(path, doc):
    Path(path).write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# dephase
# ---------------------------------------------------------------------------

def cmd_dephase(args) -> int:
    start = time.perf_counter()
    if args.separation < 0:
        raise ValidationError("--separation must be >= 0")
    params = CslParams.from_rc(args.rc, args.gamma, dim=3)
    a = ParticleConfiguration.from_points([(0.0, 0.0, 0.0)])
    b = ParticleConfiguration.from_points([(args.separation, 0.0, 0.0)])

    lam = params.gamma * (params.alpha / (4.0 * math.pi)) ** 1.5
    analytic = lam * (1.0 - math.exp(-params.alpha * args.separation**2 / 4.0))

    if args.separation == 0.0:
        rate_matrix = np.zeros((2, 2))
        from .density import DephasingMatrix

        dephasing = DephasingMatrix(rate_matrix)
    else:
        dephasing = build_dephasing_matrix([a, b], params, method="closed_form")

    d01 = float(dephasing.rates[0, 1])
    t_max = args.tmax if args.tmax is not None else (3.0 / d01 if d01 > 0 else 1.0)
    dt = args.dt if args.dt is not None else t_max / 1000.0
    rho0 = np.full((2, 2), 0.5, dtype=complex)
    result = evolve_config_basis([a, b], dephasing, None, rho0, t_max, dt)
    write_trajectory_csv(args.out, result)

    fit = extract_decay_rate(result.times, result.offdiagonal(0, 1))
    print(f"fitted rate   : {fit.rate:.8e} 1/s")
    print(f"analytic rate : {analytic:.8e} 1/s")
    if analytic > 0:
        rel = abs(fit.rate - analytic) / analytic
        print(f"relative error: {rel:.3e}")
    else:
        print("relative error: n/a (zero analytic rate)")
    _write_manifest(
        args.out,
        "dephase",
        {
            "separation_nm": args.separation,
            "rc_nm": args.rc,
            "gamma_nm3_per_s": args.gamma,
            "tmax_s": t_max,
            "dt_s": dt,
        },
        inputs=[],
        outputs=[args.out],
        seed=None,
        wall_time=time.perf_counter() - start,
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# dfs-check
# ---------------------------------------------------------------------------

def collective_dephasing_model() -> LindbladModel:
    """Two qubits coupled to a common dephasing bath: the excitation-count
    operator diag(0, 1, 1, 2) on the basis |00>, |01>, |10>, |11>."""
    return LindbladModel(
        hamiltonian=np.zeros((4, 4)),
        jump_ops=(np.diag([0.0, 1.0, 1.0, 2.0]).astype(complex),),
        coupling=np.eye(1),
    )


def cmd_dfs_check(args) -> int:
    start = time.perf_counter()
    inputs = []
    if args.model == "collective-dephasing":
        model = collective_dephasing_model()
    else:
        model = load_model_json(args.model)
        inputs.append(args.model)

    subspaces = joint_degenerate_subspaces(model.jump_ops)
    residuals = []
    for sub in subspaces:
        proj = (sub.basis @ sub.basis.conj().T) / sub.dim
        residuals.append(lindblad_residual(proj, model))
    report = DfsReport(
        subspaces=tuple(subspaces),
        max_dimension=max(s.dim for s in subspaces),
        residuals=tuple(residuals),
    )
    _json_dump(args.out, report_to_json(report))
    dfs_dims = [s.dim for s in subspaces if s.dim >= 2]
    print(f"subspaces: {len(subspaces)}, max dimension: {report.max_dimension}")
    if dfs_dims:
        print(f"DFS candidates (dim >= 2): {dfs_dims}")
    else:
        print("no DFS candidate (all joint eigenspaces are one-dimensional)")
    _write_manifest(
        args.out,
        "dfs-check",
        {"model": args.model},
        inputs=inputs,
        outputs=[args.out],
        seed=None,
        wall_time=time.perf_counter() - start,
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# witness
# ---------------------------------------------------------------------------

def _random_mirror_pair(params: CslParams, n_particles: int, rng: np.random.Generator):
    box = 2.0 * params.r_c
    for _ in range(100):
        pts = rng.uniform(-box, box, size=(n_particles, params.dim))
        q_b = ParticleConfiguration.from_points([tuple(p) for p in pts])
        anchor = tuple(rng.uniform(-params.r_c, params.r_c, size=params.dim))
        mask = rng.random(size=(n_particles, params.dim)) < 0.5
        if not mask.any():
            continue
        try:
            return mirror_construction(anchor, q_b, mask.tolist(), params)
        except ConstructionError:
            continue
    raise ConstructionError("failed to draw a valid mirror pair")


def _random_sphere_pair(params: CslParams, n_particles: int, rng: np.random.Generator, seed: int):
    anchor = tuple(rng.uniform(-params.r_c, params.r_c, size=params.dim))
    radius = float(rng.uniform(0.5 * params.r_c, 3.0 * params.r_c))
    configs = sphere_construction(anchor, radius, n_particles, 2, params, rng_seed=seed)
    return make_degenerate_pair(configs[0], configs[1], anchor, params, construction="sphere")


def cmd_witness(args) -> int:
    start = time.perf_counter()
    if args.trials < 0:
        raise ValidationError("--trials must be >= 0")
    if args.particles < 1:
        raise ValidationError("--particles must be >= 1")
    params = CslParams.from_rc(args.rc, args.gamma, dim=args.dim)

    reports = []
    exhausted = []
    for trial in range(args.trials):
        child = _trial_seed(args.seed, trial)
        rng = np.random.Generator(np.random.PCG64(child))
        if args.construction == "mirror":
            pair = _random_mirror_pair(params, args.particles, rng)
        else:
            pair = _random_sphere_pair(params, args.particles, rng, seed=child)
        report = find_witness(pair, params, rng_seed=child)
        verified = False
        if report.witness is not None:
            na = density_eigenvalue(report.witness, pair.q_a, params)
            nb = density_eigenvalue(report.witness, pair.q_b, params)
            verified = abs(na - nb) > 1e-8 * max(na, nb, 1e-300)
        else:
            exhausted.append(trial)
        reports.append(
            {
                "trial": trial,
                "seed": child,
                "witness": list(report.witness) if report.witness is not None else None,
                "delta": report.delta,
                "probes_tried": report.probes_tried,
                "symmetry_note": report.symmetry_note,
                "verified": verified,
            }
        )

    summary = {
        "construction": args.construction,
        "dim": args.dim,
        "particles": args.particles,
        "trials": args.trials,
        "seed": args.seed,
        "witnesses_found": sum(1 for r in reports if r["witness"] is not None),
        "exhausted_trials": exhausted,
        "reports": reports,
    }
    _json_dump(args.out, summary)
    print(
        f"{summary['witnesses_found']}/{args.trials} witnesses found"
        + (f"; exhausted trials: {exhausted}" if exhausted else "")
    )
    _write_manifest(
        args.out,
        "witness",
        {
            "construction": args.construction,
            "dim": args.dim,
            "particles": args.particles,
            "trials": args.trials,
            "rc_nm": args.rc,
            "gamma_nm3_per_s": args.gamma,
        },
        inputs=[],
        outputs=[args.out],
        seed=args.seed,
        wall_time=time.perf_counter() - start,
    )
    if exhausted:
        print("anomaly: a distinct pair exhausted all probes without a witness", file=sys.stderr)
        return EXIT_ANOMALY
    return EXIT_OK


# ---------------------------------------------------------------------------
# scan
# ---------------------------------------------------------------------------

def cmd_scan(args) -> int:
    start = time.perf_counter()
    for name, lo, hi in (
        ("lambda", args.lambda_min, args.lambda_max),
        ("rc", args.rc_min, args.rc_max),
    ):
        if lo <= 0 or hi <= 0:
            raise ValidationError(f"--{name}-min/--{name}-max must be > 0")
        if lo >= hi:
            raise ValidationError(f"--{name}-min must be < --{name}-max")
    if args.density < 0:
        raise ValidationError("--density must be >= 0")

    exclusions = load_exclusions_json(args.exclude) if args.exclude else []
    inputs = [args.exclude] if args.exclude else []
    model = VolumeModel(window_ghz=args.window_ghz, n_volumes=args.n_volumes)
    records = scan(
        (args.lambda_min, args.lambda_max, args.cells),
        (args.rc_min, args.rc_max, args.cells),
        [args.density],
        model,
        exclusions,
    )
    write_scan_csv(args.out, records)
    rates_ = [r.gamma_collapse for r in records]
    n_excluded = sum(1 for r in records if r.excluded)
    print(f"{len(records)} cells; Gamma in [{min(rates_):.3e}, {max(rates_):.3e}] 1/s")
    print(f"excluded cells: {n_excluded}")
    _write_manifest(
        args.out,
        "scan",
        {
            "lambda_min": args.lambda_min,
            "lambda_max": args.lambda_max,
            "rc_min": args.rc_min,
            "rc_max": args.rc_max,
            "cells": args.cells,
            "density_m^-3GHz^-1": args.density,
            "window_ghz": args.window_ghz,
            "n_volumes": args.n_volumes,
            "exclude": args.exclude,
        },
        inputs=inputs,
        outputs=[args.out],
        seed=None,
        wall_time=time.perf_counter() - start,
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# brute
# ---------------------------------------------------------------------------

def _parse_lattice(spec: str, rc: float) -> list[tuple[float, ...]]:
    """"M,spacing" for a 1-d chain or "MxN,spacing" for a 2-d grid (nm)."""
    try:
        shape_part, spacing_part = spec.split(",")
        spacing = float(spacing_part)
        dims = [int(s) for s in shape_part.lower().split("x")]
    except ValueError as exc:
        raise ValidationError(f'bad --lattice {spec!r}: expected "M,spacing" or "MxN,spacing"') from exc
    if spacing <= 0 or any(d < 1 for d in dims) or len(dims) > 3:
        raise ValidationError(f"bad --lattice {spec!r}")
    from .nogo import lattice_grid

    return lattice_grid(dims, spacing)


def cmd_brute(args) -> int:
    start = time.perf_counter()
    if args.particles < 1:
        raise ValidationError("--particles must be >= 1")
    if bool(args.sites) == bool(args.lattice):
        raise ValidationError("provide exactly one of --sites or --lattice")

    inputs = []
    if args.sites:
        doc = json.loads(Path(args.sites).read_text(encoding="utf-8"))
        sites = [tuple(float(c) for c in p) for p in doc]
        inputs.append(args.sites)
    else:
        sites = _parse_lattice(args.lattice, args.rc)
    dim = len(sites[0])
    params = CslParams.from_rc(args.rc, args.gamma, dim=dim)

    certificate, report = brute_force_no_dfs(sites, args.particles, params, seed=args.seed)
    _json_dump(args.out, certificate_to_json(certificate))
    min_rate = certificate.min_pairwise_rate
    print(
        f"{certificate.n_configs} configurations; min pairwise rate "
        + (f"{min_rate:.6e} 1/s" if math.isfinite(min_rate) else "n/a")
        + f"; joint-eigenspace max dimension {certificate.dfs_max_dimension}"
    )
    _write_manifest(
        args.out,
        "brute",
        {
            "sites": args.sites,
            "lattice": args.lattice,
            "particles": args.particles,
            "rc_nm": args.rc,
            "gamma_nm3_per_s": args.gamma,
        },
        inputs=inputs,
        outputs=[args.out],
        seed=args.seed,
        wall_time=time.perf_counter() - start,
    )
    if not certificate.ok:
        print("anomaly: certificate reports a surviving degeneracy", file=sys.stderr)
        return EXIT_ANOMALY
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="csllab",
        description="Collapse-model dephasing and decoherence-free-subspace laboratory",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dephase", help="two-configuration superposition decay")
    p.add_argument("--separation", type=float, required=True, help="particle separation (nm)")
    p.add_argument("--rc", type=float, default=100.0, help="localization length r_c (nm)")
    p.add_argument("--gamma", type=float, default=1e-9, help="hitting-rate constant (nm^3/s)")
    p.add_argument("--tmax", type=float, default=None, help="evolution time (s); default 3 decay times")
    p.add_argument("--dt", type=float, default=None, help="time step (s); default tmax/1000")
    p.add_argument("--out", required=True, help="trajectory CSV path")
    p.set_defaults(func=cmd_dephase)

    p = sub.add_parser("dfs-check", help="joint-eigenspace report for a model file")
    p.add_argument(
        "--model",
        required=True,
        help='model JSON path, or "collective-dephasing" for the bundled example',
    )
    p.add_argument("--out", required=True, help="report JSON path")
    p.set_defaults(func=cmd_dfs_check)

    p = sub.add_parser("witness", help="degenerate pairs and their witness points")
    p.add_argument("--construction", choices=("sphere", "mirror"), default="mirror")
    p.add_argument("--dim", type=int, choices=(1, 2, 3), default=3, help="spatial dimension")
    p.add_argument("--particles", type=int, default=2, help="particles per configuration")
    p.add_argument("--trials", type=int, default=100, help="number of constructed pairs")
    p.add_argument("--seed", type=int, default=0, help="root RNG seed")
    p.add_argument("--rc", type=float, default=100.0, help="localization length r_c (nm)")
    p.add_argument("--gamma", type=float, default=1e-9, help="hitting-rate constant (nm^3/s)")
    p.add_argument("--out", required=True, help="summary JSON path")
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("scan", help="collapse-rate grid over (lambda, r_c)")
    p.add_argument("--lambda-min", type=float, default=1e-20, help="min lambda (1/s)")
    p.add_argument("--lambda-max", type=float, default=1e-10, help="max lambda (1/s)")
    p.add_argument("--rc-min", type=float, default=1.0, help="min r_c (nm)")
    p.add_argument("--rc-max", type=float, default=1e6, help="max r_c (nm)")
    p.add_argument("--cells", type=int, default=64, help="grid cells per axis")
    p.add_argument("--density", type=float, default=1e20, help="defect density (m^-3 GHz^-1)")
    p.add_argument("--window-ghz", type=float, default=1.0, help="frequency window (GHz)")
    p.add_argument("--n-volumes", type=float, default=1.0, help="number of r_c^3 volumes")
    p.add_argument("--exclude", default=None, help="JSON file of exclusion rectangles")
    p.add_argument("--out", required=True, help="scan CSV path")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("brute", help="exhaustive lattice certificate")
    p.add_argument("--sites", default=None, help="JSON file with a list of positions (nm)")
    p.add_argument("--lattice", default=None, help='"M,spacing" or "MxN,spacing" (nm)')
    p.add_argument("--particles", type=int, required=True, help="particles per configuration")
    p.add_argument("--rc", type=float, default=100.0, help="localization length r_c (nm)")
    p.add_argument("--gamma", type=float, default=1e-9, help="hitting-rate constant (nm^3/s)")
    p.add_argument("--seed", type=int, default=0, help="recorded RNG seed")
    p.add_argument("--out", required=True, help="certificate JSON path")
    p.set_defaults(func=cmd_brute)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, StructuralError, ConstructionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PreconditionError as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except IntegratorError as exc:
        print(f"integrator aborted: {exc}", file=sys.stderr)
        return EXIT_INTEGRATOR
    except SizeLimitError as exc:
        print(f"size bound exceeded: {exc}", file=sys.stderr)
        return EXIT_SIZE
    except CslLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
