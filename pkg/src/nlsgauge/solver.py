"""Time integration of 1-D NLSEs with complex nonlinearities, and the
verification harness that demonstrates gauge equivalence numerically.

Two schemes:

* ``CrankNicolsonFD`` (Dirichlet-decaying grids): implicit-midpoint Cayley
  step.  The full nonlinearity W + i calW is evaluated at an explicit
  half-step predictor and placed on the diagonal of the tridiagonal step
  matrix; for real W the matrix is Hermitian, the Cayley transform is exactly
  l2-unitary, and the particle number is conserved to roundoff.
* ``RK4Spectral`` (periodic grids): FFT Laplacian, classic explicit RK4.

The harness evolves a model and its gauge image side by side and reports the
density discrepancy, the phase-relation residual, and the current-collapse
residual.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import solve_banded

from . import equivalence, fieldgrid, gauge
from .errors import BlowUp, ConfigError, DomainError
from .fieldgrid import FLOOR_DEFAULT, ComplexField, Grid1D, HydroField
from .models import (
    FiveFunction,
    ModelSpec,
    RhoExpr,
    current_functional,
    eval_nonlinearity,
)

BLOWUP_THRESHOLD = 1e6


@dataclass(frozen=True)
class SolverConfig:
    scheme: str = "CrankNicolsonFD"
    dt: float = 1e-3
    t_end: float = 1.0
    snapshot_every: int = 100
    floor: float = FLOOR_DEFAULT

    def __post_init__(self) -> None:
        if self.scheme not in ("CrankNicolsonFD", "RK4Spectral"):
            raise ConfigError(f"unknown scheme {self.scheme!r}")
        if not (self.dt > 0 and self.t_end > 0 and math.isfinite(self.t_end / self.dt)):
            raise ConfigError("dt and t_end must be positive and finite")
        if self.snapshot_every < 1:
            raise ConfigError("snapshot_every must be >= 1")


@dataclass(frozen=True)
class Trajectory:
    times: tuple[float, ...]
    states: tuple[ComplexField, ...]
    diagnostics: tuple[dict, ...]  # per snapshot: {"N": ..., "continuity_residual": ...}

    @property
    def grid(self) -> Grid1D:
        return self.states[0].grid

    def n_drift(self) -> float:
        ns = [d["N"] for d in self.diagnostics]
        return max(abs(v - ns[0]) for v in ns)


def particle_number(psi: np.ndarray, grid: Grid1D) -> float:
    return float(np.sum(np.abs(psi) ** 2) * grid.h)


# ---------------------------------------------------------------------------
# integration
# ---------------------------------------------------------------------------


def _nonlinearity(model: ModelSpec, psi: np.ndarray, grid: Grid1D, floor: float):
    h = fieldgrid.to_hydro(ComplexField(psi, grid), floor)
    ev = eval_nonlinearity(model, h, floor)
    return ev.W + 1j * ev.calW


def _check_state(psi: np.ndarray, t: float) -> None:
    if not np.all(np.isfinite(psi)):
        raise BlowUp(t, f"non-finite values at t={t}")
    if np.max(np.abs(psi)) > BLOWUP_THRESHOLD:
        raise BlowUp(t, f"sup norm exceeded {BLOWUP_THRESHOLD:g} at t={t}")


# 4th-order Laplacian stencil used by the Crank-Nicolson scheme (zero ghost
# values outside the dirichlet grid; the fields decay well before the edge).
_LAP4 = ((-2, -1.0 / 12.0), (-1, 4.0 / 3.0), (0, -5.0 / 2.0), (1, 4.0 / 3.0), (2, -1.0 / 12.0))

_CORRECTOR_ITERATIONS = 2


def _apply_dirichlet_H(psi: np.ndarray, lam: np.ndarray, h: float) -> np.ndarray:
    """H psi with H = -Lap - diag(lam), 4th-order Laplacian, zero ghosts."""
    lap = np.zeros_like(psi)
    for off, cv in _LAP4:
        if off < 0:
            lap[-off:] += cv * psi[:off]
        elif off > 0:
            lap[:-off] += cv * psi[off:]
        else:
            lap += cv * psi
    return -lap / (h * h) - lam * psi


def _step_crank_nicolson(
    model: ModelSpec, psi: np.ndarray, grid: Grid1D, dt: float, floor: float
) -> np.ndarray:
    """Implicit-midpoint Cayley step (I + z H) psi_new = (I - z H) psi with
    z = i dt/2 and the nonlinearity evaluated at the step midpoint (explicit
    half-step predictor, then fixed-point corrector passes).  The pentadiagonal
    matrix is Hermitian for real W, so the step is exactly l2-unitary there."""
    h = grid.h
    n = grid.n
    lam_now = _nonlinearity(model, psi, grid, floor)
    psi_half = psi - 0.5j * dt * _apply_dirichlet_H(psi, lam_now, h)
    lam_half = _nonlinearity(model, psi_half, grid, floor)
    inv_h2 = 1.0 / (h * h)
    z = 0.5j * dt
    new = psi
    for it in range(_CORRECTOR_ITERATIONS):
        rhs = psi - z * _apply_dirichlet_H(psi, lam_half, h)
        ab = np.zeros((5, n), dtype=complex)
        ab[0, 2:] = z * (1.0 / 12.0) * inv_h2
        ab[1, 1:] = z * (-4.0 / 3.0) * inv_h2
        ab[2, :] = 1.0 + z * ((5.0 / 2.0) * inv_h2 - lam_half)
        ab[3, :-1] = z * (-4.0 / 3.0) * inv_h2
        ab[4, :-2] = z * (1.0 / 12.0) * inv_h2
        new = solve_banded((2, 2), ab, rhs)
        if it < _CORRECTOR_ITERATIONS - 1:
            lam_half = _nonlinearity(model, 0.5 * (psi + new), grid, floor)
    return new


def _step_rk4_spectral(
    model: ModelSpec, psi: np.ndarray, grid: Grid1D, dt: float, floor: float, k2: np.ndarray
) -> np.ndarray:
    def rhs(p):
        lap = np.fft.ifft(-k2 * np.fft.fft(p))
        lam = _nonlinearity(model, p, grid, floor)
        return 1j * (lap + lam * p)

    k1 = rhs(psi)
    k2_ = rhs(psi + 0.5 * dt * k1)
    k3 = rhs(psi + 0.5 * dt * k2_)
    k4 = rhs(psi + dt * k3)
    return psi + dt / 6.0 * (k1 + 2.0 * k2_ + 2.0 * k3 + k4)


def integrate(model: ModelSpec, psi0: ComplexField, cfg: SolverConfig) -> Trajectory:
    """Advance i psi_t = -Lap psi - (W + i calW) psi to t_end.

    Snapshot diagnostics: N = integral of rho, and the continuity residual
    max|Delta_t rho + div j| with j the model's full nonlinear current,
    evaluated with a midpoint rule over the step that leaves the snapshot.
    """
    grid = psi0.grid
    if cfg.scheme == "CrankNicolsonFD" and grid.boundary != "dirichlet":
        raise ConfigError("CrankNicolsonFD requires a dirichlet grid")
    if cfg.scheme == "RK4Spectral" and grid.boundary != "periodic":
        raise ConfigError("RK4Spectral requires a periodic grid")
    n_steps = max(1, round(cfg.t_end / cfg.dt))
    dt = cfg.t_end / n_steps
    k2 = None
    if cfg.scheme == "RK4Spectral":
        k = 2.0 * np.pi * np.fft.fftfreq(grid.n, d=grid.h)
        k2 = k * k

    def step(p):
        if cfg.scheme == "CrankNicolsonFD":
            return _step_crank_nicolson(model, p, grid, dt, cfg.floor)
        return _step_rk4_spectral(model, p, grid, dt, cfg.floor, k2)

    def continuity_residual(p_before, p_after, t):
        # each part of div j is discretized at the order the scheme generates
        # it: the bilinear current to 4th order (or spectrally), the nonlinear
        # current with the same central stencil that defines calW.
        rho_dot = (np.abs(p_after) ** 2 - np.abs(p_before) ** 2) / dt
        mid = 0.5 * (p_before + p_after)
        h_mid = fieldgrid.to_hydro(ComplexField(mid, grid), cfg.floor)
        if grid.boundary == "periodic":
            kd = 2.0j * np.pi * np.fft.fftfreq(grid.n, d=grid.h)
            spectral_d = lambda f: np.real(np.fft.ifft(kd * np.fft.fft(f)))
            j0 = 2.0 * h_mid.rho * spectral_d(h_mid.phase)
            div_j0 = spectral_d(j0)
        else:
            j0 = 2.0 * h_mid.rho * fieldgrid.derivative4(h_mid.phase, grid)
            div_j0 = fieldgrid.derivative4(j0, grid)
        div_J = fieldgrid.derivative4(
            current_functional(model, h_mid, cfg.floor), grid
        )
        return float(np.max(np.abs(rho_dot + div_j0 + div_J)))

    times = [0.0]
    states = [psi0]
    psi = psi0.values.copy()
    # diagnostics for the initial snapshot use the first step
    psi_next = step(psi)
    _check_state(psi_next, dt)
    diagnostics = [
        {
            "N": particle_number(psi, grid),
            "continuity_residual": continuity_residual(psi, psi_next, 0.0),
        }
    ]
    psi_prev, psi = psi, psi_next
    for k_step in range(1, n_steps + 1):
        if k_step > 1:
            psi_prev = psi
            psi = step(psi)
            _check_state(psi, k_step * dt)
        if k_step % cfg.snapshot_every == 0 or k_step == n_steps:
            t = k_step * dt
            times.append(t)
            states.append(ComplexField(psi.copy(), grid))
            diagnostics.append(
                {
                    "N": particle_number(psi, grid),
                    "continuity_residual": continuity_residual(psi_prev, psi, t),
                }
            )
    return Trajectory(times=tuple(times), states=tuple(states), diagnostics=tuple(diagnostics))


# ---------------------------------------------------------------------------
# verification harness
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EquivalenceReport:
    max_rho_discrepancy: float
    phase_relation_residual: float
    current_collapse_residual: float
    N_drift_original: float
    N_drift_transformed: float
    flags: dict = field(default_factory=dict)

    def to_report(self) -> dict:
        return {
            "max_rho_discrepancy": self.max_rho_discrepancy,
            "phase_relation_residual": self.phase_relation_residual,
            "current_collapse_residual": self.current_collapse_residual,
            "N_drift_original": self.N_drift_original,
            "N_drift_transformed": self.N_drift_transformed,
            "flags": dict(self.flags),
        }


# The phase comparison is restricted to points where rho exceeds this
# fraction of its maximum.  Below it the comparison is ill-conditioned, not
# merely noisy: sigma depends on the density (e.g. (D/2) ln rho), so a
# density error at the rho-discrepancy tolerance translates into a phase
# uncertainty ~ |dsigma/drho| * delta_rho that exceeds the phase tolerance
# once rho falls a few decades below its peak.
PHASE_MASK_RELATIVE = 1e-4


def verify_equivalence(
    model: ModelSpec,
    psi0: ComplexField,
    cfg: SolverConfig,
    transformed_override: Optional[ModelSpec] = None,
) -> EquivalenceReport:
    """Evolve psi under the model and phi = e^{i sigma[psi0]} psi0 under the
    transformed model, then compare:

    * density discrepancy between the two runs (gauge invariance of rho);
    * phase relation S~ - S - sigma constant in space (measured where
      rho exceeds a relative floor; the phase is meaningless in deep tails);
    * current collapse j0 of the gauge image of the evolved state against
      j0 + J of that same state (near-exact by the discrete inverse pair).

    Two representatives of the same generator are used on purpose: the
    pointwise/high-order analysis form for constructing phi_0 and comparing
    phases (accuracy matters there), and the inverse-pair discrete form for
    the collapse identity (exactness matters there).
    """
    tr = gauge.transform_model(model)
    transformed = transformed_override if transformed_override is not None else tr.transformed
    h0 = fieldgrid.to_hydro(psi0, cfg.floor)
    sigma0 = gauge.analysis_generator_field(model, h0, cfg.floor)
    phi0 = gauge.apply_gauge(psi0, sigma0)

    traj_psi = integrate(model, psi0, cfg)
    traj_phi = integrate(transformed, phi0, cfg)

    rho_disc = 0.0
    phase_res = 0.0
    collapse_res = 0.0
    mask_floor_hit = False
    for st_psi, st_phi in zip(traj_psi.states, traj_phi.states):
        h_psi = fieldgrid.to_hydro(st_psi, cfg.floor)
        h_phi = fieldgrid.to_hydro(st_phi, cfg.floor)
        rho_disc = max(rho_disc, float(np.max(np.abs(h_psi.rho - h_phi.rho))))
        sigma_t = gauge.analysis_generator_field(model, h_psi, cfg.floor)
        mask = (h_psi.rho > PHASE_MASK_RELATIVE * h_psi.rho.max()) & (
            h_phi.rho > PHASE_MASK_RELATIVE * h_phi.rho.max()
        )
        if not mask.all():
            mask_floor_hit = True
        rel = (h_phi.phase - h_psi.phase - sigma_t)[mask]
        phase_res = max(phase_res, float(np.max(np.abs(rel - rel.mean()))))
        # same-state current collapse, with the inverse-pair generator
        sigma_c = gauge.discrete_generator_field(model, h_psi, cfg.floor)
        phi_g = gauge.apply_gauge(st_psi, sigma_c)
        h_g = fieldgrid.to_hydro(phi_g, cfg.floor)
        j_img = fieldgrid.bilinear_current(h_g)
        j_exp = fieldgrid.bilinear_current(h_psi) + current_functional(
            model, h_psi, cfg.floor
        )
        collapse_res = max(collapse_res, float(np.max(np.abs(j_img - j_exp))))

    flags = dict(tr.flags)
    if transformed_override is not None:
        flags["transformed_override"] = True
    if mask_floor_hit:
        flags["phase_mask_active"] = True
    return EquivalenceReport(
        max_rho_discrepancy=rho_disc,
        phase_relation_residual=phase_res,
        current_collapse_residual=collapse_res,
        N_drift_original=traj_psi.n_drift(),
        N_drift_transformed=traj_phi.n_drift(),
        flags=flags,
    )


def log_diffusive_model(D: float) -> FiveFunction:
    """The real nonlinearity -(D^2/2)[lap rho / rho - (1/2)(grad rho / rho)^2]
    in five-function form: f3 = (D^2/4) rho^-2, f4 = -(D^2/2) rho^-1."""
    from fractions import Fraction

    Dq = Fraction(D).limit_denominator(10**12)
    z = RhoExpr.zero()
    return FiveFunction(
        f1=z,
        f2=z,
        f3=RhoExpr.monomial(Dq * Dq / 4, -2),
        f4=RhoExpr.monomial(-Dq * Dq / 2, -1),
        f5=z,
    )


@dataclass(frozen=True)
class LinearizationReport:
    kbar: float
    D: float
    max_rho_discrepancy: float

    def to_report(self) -> dict:
        return {
            "kbar": self.kbar,
            "D": self.D,
            "max_rho_discrepancy": self.max_rho_discrepancy,
        }


def verify_linearization(
    D: float, psi0: ComplexField, cfg: SolverConfig
) -> LinearizationReport:
    """Direct nonlinear evolution of the logarithmic diffusive model vs the
    phase-scaled linear route chi = sqrt(rho) e^{iS/kbar} propagated exactly
    in Fourier space (i kbar chi_t + kbar^2 lap chi = 0), mapped back to rho.

    The linear propagator is exact in time, so the reported discrepancy
    bounds the nonlinear solver's error."""
    lin = equivalence.guerra_map(D)
    model = log_diffusive_model(D)
    traj = integrate(model, psi0, cfg)

    h0 = fieldgrid.to_hydro(psi0, cfg.floor)
    chi0 = equivalence.guerra_field(h0, lin).values
    grid = psi0.grid
    k = 2.0 * np.pi * np.fft.fftfreq(grid.n, d=grid.h)
    chi0_hat = np.fft.fft(chi0)
    disc = 0.0
    for t, st in zip(traj.times, traj.states):
        chi_t = np.fft.ifft(np.exp(-1j * lin.kbar * k * k * t) * chi0_hat)
        rho_lin = np.abs(chi_t) ** 2
        rho_direct = np.abs(st.values) ** 2
        disc = max(disc, float(np.max(np.abs(rho_direct - rho_lin))))
    return LinearizationReport(kbar=lin.kbar, D=float(D), max_rho_discrepancy=disc)


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------


def export_trajectory(traj: Trajectory, out_dir: str, floor: float = FLOOR_DEFAULT) -> None:
    os.makedirs(out_dir, exist_ok=True)
    for i, (t, st) in enumerate(zip(traj.times, traj.states)):
        fieldgrid.write_field_csv(
            os.path.join(out_dir, f"snapshot_{i:04d}.csv"), st, floor
        )
    with open(os.path.join(out_dir, "diagnostics.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "N", "continuity_residual"])
        for t, d in zip(traj.times, traj.diagnostics):
            writer.writerow(
                ["%.17g" % t, "%.17g" % d["N"], "%.17g" % d["continuity_residual"]]
            )
