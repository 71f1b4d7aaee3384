"""Numerical laboratory for collapse-model dephasing and
decoherence-free-subspace analysis."""

from .core import (
    ConstructionError,
    CoverageError,
    CslLabError,
    CslParams,
    DensityMatrix,
    IntegratorError,
    LindbladModel,
    Particle,
    ParticleConfiguration,
    PreconditionError,
    SizeLimitError,
    SpeciesTable,
    StructuralError,
    ValidationError,
    canonicalize,
    configs_equal,
    load_basis_json,
    load_model_json,
    save_basis_json,
    save_model_json,
    validate_model,
)
from .density import (
    DephasingMatrix,
    QuadratureGrid,
    build_dephasing_matrix,
    build_density_operator,
    density_eigenvalue,
    gaussian_overlap,
    gaussian_weight,
    mass_density_eigenvalue,
    pairwise_dephasing_rate,
)
from .dfs import (
    DfsReport,
    JointEigenspace,
    csl_dfs_scan,
    default_probe_points,
    is_dfs,
    joint_degenerate_subspaces,
    lindblad_residual,
)
from .evolution import (
    DecayFit,
    EvolutionResult,
    dissipator,
    evolve,
    evolve_config_basis,
    extract_decay_rate,
    write_trajectory_csv,
)
from .nogo import (
    BruteForceCertificate,
    DegeneratePair,
    WitnessReport,
    brute_force_no_dfs,
    find_witness,
    lattice_1d,
    lattice_grid,
    make_degenerate_pair,
    mirror_construction,
    sphere_construction,
)
from .rates import (
    ExclusionRect,
    ScanRecord,
    VolumeModel,
    collapse_rate,
    coherence_limit,
    gamma_from_lambda,
    lambda_from_gamma,
    scan,
    write_scan_csv,
)

__version__ = "0.1.0"
