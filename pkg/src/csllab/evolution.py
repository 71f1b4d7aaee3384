"""Density-matrix time evolution: a generic fixed-step RK4 integrator for the
full master equation, and an exact elementwise path for configuration-basis
models where the jump operators are all diagonal (pure dephasing).

The integrator never renormalizes the trace or re-symmetrizes the state;
trace, Hermiticity, and positivity drift are measured every step and the run
aborts if any leaves its certified bound, so integrator error cannot
masquerade as physics.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .core import (
    DensityMatrix,
    IntegratorError,
    LindbladModel,
    StructuralError,
    ValidationError,
    validate_model,
)
from .density import DephasingMatrix

__all__ = [
    "EvolutionDiagnostics",
    "EvolutionResult",
    "dissipator",
    "evolve",
    "evolve_config_basis",
    "DecayFit",
    "extract_decay_rate",
    "write_trajectory_csv",
]

TRACE_BOUND = 1e-8
HERMITICITY_BOUND = 1e-10
MIN_EIGENVALUE_BOUND = -1e-7
STEP_SCALE_LIMIT = 0.1
UNDERFLOW_FLOOR = 1e-14


@dataclass(frozen=True)
class EvolutionDiagnostics:
    """Worst-case invariant deviations observed over a run."""

    max_trace_dev: float
    max_herm_dev: float
    min_eigenvalue: float

    def within_bounds(self) -> bool:
        return (
            self.max_trace_dev <= TRACE_BOUND
            and self.max_herm_dev <= HERMITICITY_BOUND
            and self.min_eigenvalue >= MIN_EIGENVALUE_BOUND
        )


@dataclass(frozen=True)
class EvolutionResult:
    times: np.ndarray
    states: tuple[np.ndarray, ...]
    diagnostics: EvolutionDiagnostics

    def offdiagonal(self, i: int, j: int) -> np.ndarray:
        """Trajectory of one matrix entry rho_ij(t)."""
        return np.array([s[i, j] for s in self.states])


def _coerce_state(rho) -> np.ndarray:
    if isinstance(rho, DensityMatrix):
        return np.array(rho.matrix, dtype=complex)
    return np.array(DensityMatrix(np.asarray(rho, dtype=complex)).matrix, dtype=complex)


def dissipator(rho, model: LindbladModel) -> np.ndarray:
    """Dissipator (1/2) sum_vu a_vu ([F_v, rho F_u^+] + [F_v rho, F_u^+]).

    Traceless, and Hermiticity-preserving for Hermitian coupling matrices.
    """
    r = np.asarray(rho.matrix if isinstance(rho, DensityMatrix) else rho, dtype=complex)
    if r.shape != (model.dim, model.dim):
        raise StructuralError(f"state shape {r.shape} does not match model dim {model.dim}")
    if not model.jump_ops:
        return np.zeros_like(r)
    f = np.stack(model.jump_ops)
    fc = f.conj()
    a = model.coupling
    # sum_vu a_vu F_v rho F_u^+  with (F_u^+)_{jk} = conj(F_u[k, j])
    sandwich = np.einsum("vu,vij,jk,ulk->il", a, f, r, fc, optimize=True)
    # G = sum_vu a_vu F_u^+ F_v
    gram = np.einsum("vu,ulj,vlk->jk", a, fc, f, optimize=True)
    return sandwich - 0.5 * (gram @ r + r @ gram)


def _generator_scale(model: LindbladModel) -> float:
    """Crude spectral-scale bound from Frobenius norms of H and the jump terms."""
    scale = float(np.linalg.norm(model.hamiltonian, "fro"))
    if model.jump_ops:
        norms = np.array([np.linalg.norm(f, "fro") for f in model.jump_ops])
        scale += float(np.abs(model.coupling) @ norms @ norms) if model.coupling.ndim == 2 else 0.0
    return scale


def evolve(
    model: LindbladModel,
    rho0,
    t_max: float,
    dt: float,
    sample_every: int = 1,
) -> EvolutionResult:
    """Fixed-step RK4 on d(rho)/dt = -i [H, rho] + dissipator(rho).

    Requires dt * (generator scale) <= 0.1 (heuristic via Frobenius norms).
    Diagnostics are recorded every step; states every `sample_every` steps.
    """
    report = validate_model(model)
    if not report.ok:
        raise ValidationError("invalid model: " + "; ".join(report.violations))
    if dt <= 0:
        raise ValidationError(f"dt must be > 0, got {dt}")
    if t_max < 0:
        raise ValidationError(f"t_max must be >= 0, got {t_max}")
    scale = _generator_scale(model)
    if dt * scale > STEP_SCALE_LIMIT:
        raise ValidationError(
            f"step too large: dt * generator scale = {dt * scale:.3g} > {STEP_SCALE_LIMIT}"
        )

    rho = _coerce_state(rho0)
    h = model.hamiltonian
    f = np.stack(model.jump_ops) if model.jump_ops else None
    if f is not None:
        fc = f.conj()
        a = model.coupling
        gram = np.einsum("vu,ulj,vlk->jk", a, fc, f, optimize=True)

    def rhs(r):
        out = -1j * (h @ r - r @ h)
        if f is not None:
            sandwich = np.einsum("vu,vij,jk,ulk->il", a, f, r, fc, optimize=True)
            out = out + sandwich - 0.5 * (gram @ r + r @ gram)
        return out

    n_steps = max(int(round(t_max / dt)), 0)
    times = [0.0]
    states = [rho.copy()]
    max_trace = abs(np.trace(rho).real - 1.0) + abs(np.trace(rho).imag)
    max_herm = float(np.abs(rho - rho.conj().T).max())
    min_eig = float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min())

    for step in range(1, n_steps + 1):
        k1 = rhs(rho)
        k2 = rhs(rho + 0.5 * dt * k1)
        k3 = rhs(rho + 0.5 * dt * k2)
        k4 = rhs(rho + dt * k3)
        rho = rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

        tr = np.trace(rho)
        max_trace = max(max_trace, abs(tr.real - 1.0) + abs(tr.imag))
        max_herm = max(max_herm, float(np.abs(rho - rho.conj().T).max()))
        min_eig = min(min_eig, float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min()))
        diag = EvolutionDiagnostics(max_trace, max_herm, min_eig)
        if not diag.within_bounds():
            raise IntegratorError(
                f"invariant left certified bound at t = {step * dt:.6g}", diagnostics=diag
            )
        if step % sample_every == 0 or step == n_steps:
            times.append(step * dt)
            states.append(rho.copy())

    return EvolutionResult(
        times=np.array(times),
        states=tuple(states),
        diagnostics=EvolutionDiagnostics(max_trace, max_herm, min_eig),
    )


def evolve_config_basis(
    basis,
    dephasing: DephasingMatrix,
    hamiltonian_diag,
    rho0,
    t_max: float,
    dt: float,
) -> EvolutionResult:
    """Exact configuration-basis evolution under pure dephasing:

        rho_ij(t) = rho_ij(0) * exp(-i (h_i - h_j) t - D_ij t)

    Diagonals are constant.  `hamiltonian_diag` may be None for h = 0.
    """
    k = dephasing.dim
    if basis is not None and len(basis) != k:
        raise StructuralError(f"basis size {len(basis)} != dephasing matrix dim {k}")
    if hamiltonian_diag is None:
        h = np.zeros(k)
    else:
        h = np.asarray(hamiltonian_diag, dtype=float)
        if h.shape != (k,):
            raise StructuralError(f"hamiltonian_diag shape {h.shape}, expected ({k},)")
    if dt <= 0:
        raise ValidationError(f"dt must be > 0, got {dt}")
    rho = _coerce_state(rho0)
    if rho.shape != (k, k):
        raise StructuralError(f"state shape {rho.shape} does not match basis size {k}")

    n_steps = max(int(round(t_max / dt)), 0)
    times = dt * np.arange(n_steps + 1)
    phase = h[:, None] - h[None, :]
    states = []
    min_eig = math.inf
    for t in times:
        state = rho * np.exp((-1j * phase - dephasing.rates) * t)
        states.append(state)
        min_eig = min(min_eig, float(np.linalg.eigvalsh(0.5 * (state + state.conj().T)).min()))

    return EvolutionResult(
        times=times,
        states=tuple(states),
        diagnostics=EvolutionDiagnostics(0.0, 0.0, min_eig),
    )


@dataclass(frozen=True)
class DecayFit:
    """Least-squares exponential fit of a trajectory envelope."""

    rate: float
    residual: float
    truncated: bool
    n_used: int


def extract_decay_rate(times, values) -> DecayFit:
    """Fit |values| ~ exp(-rate * t) by least squares on -log|values|.

    Samples after the first underflow (|value| < 1e-14) are dropped and the
    fit flagged as truncated.
    """
    t = np.asarray(times, dtype=float)
    v = np.abs(np.asarray(values, dtype=complex))
    if t.shape != v.shape or t.ndim != 1:
        raise StructuralError("times and values must be 1-d arrays of equal length")
    if t.size < 10:
        raise ValidationError(f"need at least 10 samples, got {t.size}")
    if v[0] < UNDERFLOW_FLOOR:
        raise ValidationError("initial value underflows; nothing to fit")

    truncated = False
    under = np.nonzero(v < UNDERFLOW_FLOOR)[0]
    if under.size:
        truncated = True
        t = t[: under[0]]
        v = v[: under[0]]
    if t.size < 2:
        raise ValidationError("fewer than 2 usable samples after underflow truncation")

    y = np.log(v)
    slope, intercept = np.polyfit(t, y, 1)
    fit = slope * t + intercept
    residual = float(np.sqrt(np.mean((y - fit) ** 2)))
    # an envelope flat to double precision has no measurable rate
    rate = 0.0 if float(y.max() - y.min()) <= 1e-12 else float(-slope)
    return DecayFit(rate=rate, residual=residual, truncated=truncated, n_used=int(t.size))


def write_trajectory_csv(path, result: EvolutionResult) -> None:
    """Trajectory CSV: column t, then abs_rho_i_j and arg_rho_i_j per upper
    off-diagonal entry, scientific notation with 9 significant digits."""
    k = result.states[0].shape[0]
    pairs = [(i, j) for i in range(k) for j in range(i + 1, k)]
    header = ["t"]
    for i, j in pairs:
        header += [f"abs_rho_{i}_{j}", f"arg_rho_{i}_{j}"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for t, state in zip(result.times, result.states):
            row = [f"{t:.8e}"]
            for i, j in pairs:
                z = state[i, j]
                row += [f"{abs(z):.8e}", f"{np.angle(z):.8e}"]
            writer.writerow(row)
