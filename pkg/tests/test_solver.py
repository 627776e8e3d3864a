"""Time integration and the verification harness: exact-solution oracles,
self-convergence, conservation, determinism, and the equivalence checks."""

import numpy as np
import pytest
from fractions import Fraction

from nlsgauge import equivalence, fieldgrid, solver
from nlsgauge.errors import BlowUp, ConfigError
from nlsgauge.fieldgrid import ComplexField, Grid1D
from nlsgauge.models import DNLS, DoebnerGoldin, Entropic, FiveFunction, RhoExpr


def _zero_model():
    z = RhoExpr.zero()
    return FiveFunction(z, z, z, z, z)


def _gaussian(grid, amp=0.8, width=16.0):
    x = grid.x
    return ComplexField((amp * np.exp(-(x**2) / width)).astype(complex), grid)


# ---------------------------------------------------------------------------
# exact-solution oracles
# ---------------------------------------------------------------------------


def test_free_evolution_matches_exact_gaussian():
    """i psi_t + psi_xx = 0 with Gaussian data has a closed-form solution."""
    grid = Grid1D(-20.0, 20.0, 512)
    x = grid.x
    a = 0.125  # psi0 = exp(-a x^2)
    psi0 = ComplexField(np.exp(-a * x**2).astype(complex), grid)
    cfg = solver.SolverConfig(dt=1e-3, t_end=1.0)
    traj = solver.integrate(_zero_model(), psi0, cfg)
    t = traj.times[-1]
    # with the convention i psi_t = -psi_xx: psi(t) = exp(-a x^2 s)/sqrt(s),
    # s = 1 + 4 i a t
    s = 1.0 + 4.0j * a * t
    exact = np.exp(-a * x**2 / s) / np.sqrt(s)
    err = np.max(np.abs(traj.states[-1].values - exact))
    assert err < 1e-6
    assert traj.n_drift() < 1e-10


def test_free_evolution_periodic_plane_wave():
    grid = Grid1D(0.0, 2.0 * np.pi, 64, "periodic")
    x = grid.x
    k = 3.0
    psi0 = ComplexField(np.exp(1j * k * x), grid)
    cfg = solver.SolverConfig(scheme="RK4Spectral", dt=1e-4, t_end=0.1)
    traj = solver.integrate(_zero_model(), psi0, cfg)
    exact = np.exp(1j * (k * x - k * k * traj.times[-1]))
    assert np.max(np.abs(traj.states[-1].values - exact)) < 1e-8


def test_cubic_defocusing_self_convergence():
    """No closed form at hand: halving dt four-fold must cut the error ~16x
    for the second-order scheme; the fine run is the reference."""
    grid = Grid1D(-20.0, 20.0, 256)
    x = grid.x
    psi0 = ComplexField((1.0 / np.cosh(x / 2.0)).astype(complex), grid)
    model = DNLS(0, -1, 0, 0)  # plain cubic nonlinearity
    sols = {}
    for dt in (4e-3, 1e-3, 2.5e-4):
        cfg = solver.SolverConfig(dt=dt, t_end=0.5)
        sols[dt] = solver.integrate(model, psi0, cfg).states[-1].values
    e_coarse = np.max(np.abs(sols[4e-3] - sols[2.5e-4]))
    e_fine = np.max(np.abs(sols[1e-3] - sols[2.5e-4]))
    assert e_coarse / e_fine > 8.0  # 2nd order in dt: ratio ~16 against reference
    assert e_fine < 1e-6


def test_norm_conserved_with_imaginary_nonlinearity():
    grid = Grid1D(-20.0, 20.0, 512)
    psi0 = _gaussian(grid)
    model = DNLS(0, 1, 0, "1/2")
    traj = solver.integrate(model, psi0, solver.SolverConfig(dt=1e-3, t_end=0.5))
    assert traj.n_drift() < 1e-10


# ---------------------------------------------------------------------------
# continuity diagnostic
# ---------------------------------------------------------------------------


def test_diffusive_continuity_residual_base_resolution():
    """Pure imaginary-nonlinearity diffusive model: the continuity law
    rho_t + div(j0 + J) = 0 holds to discretization accuracy."""
    grid = Grid1D(-20.0, 20.0, 512)
    psi0 = _gaussian(grid, amp=1.0, width=2.0)
    model = DoebnerGoldin(0, 0, 0, 0, 0, "1/10")
    traj = solver.integrate(model, psi0, solver.SolverConfig(dt=1e-3, t_end=1.0))
    res = max(d["continuity_residual"] for d in traj.diagnostics)
    assert res < 1e-4
    assert traj.n_drift() < 1e-9


def test_diffusive_continuity_residual_refines():
    """Refinement on a short horizon, before the fine-grid sawtooth
    instability of this explicitly-treated damping term can grow (see README
    known limitations)."""

    def run(n, dt):
        grid = Grid1D(-20.0, 20.0, n)
        psi0 = _gaussian(grid, amp=1.0, width=2.0)
        model = DoebnerGoldin(0, 0, 0, 0, 0, "1/10")
        traj = solver.integrate(model, psi0, solver.SolverConfig(dt=dt, t_end=0.2))
        return max(d["continuity_residual"] for d in traj.diagnostics)

    coarse = run(512, 1e-3)
    fine = run(1024, 5e-4)
    assert fine < coarse / 3.0


# ---------------------------------------------------------------------------
# equivalence harness
# ---------------------------------------------------------------------------


def test_identity_model_equivalence_residuals_vanish():
    """A model with zero nonlinearity transforms to itself with sigma = 0;
    every residual must vanish identically."""
    grid = Grid1D(-20.0, 20.0, 512)
    psi0 = _gaussian(grid)
    report = solver.verify_equivalence(
        _zero_model(), psi0, solver.SolverConfig(dt=1e-3, t_end=0.2)
    )
    assert report.max_rho_discrepancy <= 1e-10
    assert report.phase_relation_residual <= 1e-10
    assert report.current_collapse_residual <= 1e-10


def test_entropic_equivalence_short_horizon():
    grid = Grid1D(-20.0, 20.0, 512)
    psi0 = _gaussian(grid)
    model = Entropic(RhoExpr.rho(2), "1/4")
    report = solver.verify_equivalence(
        model, psi0, solver.SolverConfig(dt=1e-3, t_end=0.1)
    )
    assert report.max_rho_discrepancy < 1e-6
    assert report.phase_relation_residual < 1e-5


def test_transformed_override_changes_result():
    grid = Grid1D(-20.0, 20.0, 512)
    psi0 = _gaussian(grid)
    model = DNLS(0, 0, 1, "-1/2")
    good = solver.verify_equivalence(
        model, psi0, solver.SolverConfig(dt=1e-3, t_end=0.2)
    )
    bad = solver.verify_equivalence(
        model,
        psi0,
        solver.SolverConfig(dt=1e-3, t_end=0.2),
        transformed_override=DNLS(0, "3/4", 1, 0),
    )
    assert good.max_rho_discrepancy < 1e-6
    assert bad.max_rho_discrepancy > 1e-3
    assert bad.flags.get("transformed_override")


# ---------------------------------------------------------------------------
# linearization harness
# ---------------------------------------------------------------------------


def test_linearization_d06():
    grid = Grid1D(-20.0, 20.0, 512)
    psi0 = _gaussian(grid, amp=1.0, width=2.0)
    report = solver.verify_linearization(0.6, psi0, solver.SolverConfig(dt=1e-3, t_end=1.0))
    assert report.kbar == pytest.approx(0.8, abs=1e-15)
    assert report.max_rho_discrepancy < 1e-4


def test_log_diffusive_model_structure():
    m = solver.log_diffusive_model(0.6)
    D2 = Fraction(0.6).limit_denominator(10**12) ** 2
    assert m.f3 == RhoExpr.monomial(D2 / 4, -2)
    assert m.f4 == RhoExpr.monomial(-D2 / 2, -1)
    assert m.f1.is_zero and m.f2.is_zero and m.f5.is_zero


# ---------------------------------------------------------------------------
# guard rails and determinism
# ---------------------------------------------------------------------------


def test_scheme_grid_mismatch_rejected():
    grid = Grid1D(-20.0, 20.0, 64, "periodic")
    psi0 = ComplexField(np.exp(1j * grid.x).astype(complex), grid)
    with pytest.raises(ConfigError):
        solver.integrate(_zero_model(), psi0, solver.SolverConfig(dt=1e-3, t_end=0.01))
    with pytest.raises(ConfigError):
        solver.SolverConfig(scheme="nosuch")
    with pytest.raises(ConfigError):
        solver.SolverConfig(dt=-1.0)


def test_blow_up_detected():
    # an explicit step far outside its stability region grows without bound
    grid = Grid1D(0.0, 2.0 * np.pi, 64, "periodic")
    x = grid.x
    psi0 = ComplexField((1.0 + 0.5 * np.cos(x)).astype(complex), grid)
    with pytest.raises(BlowUp):
        solver.integrate(
            _zero_model(),
            psi0,
            solver.SolverConfig(scheme="RK4Spectral", dt=0.5, t_end=50.0),
        )


def test_determinism_bit_identical():
    grid = Grid1D(-20.0, 20.0, 256)
    psi0 = _gaussian(grid)
    model = DNLS(0, 1, 0, "1/2")
    cfg = solver.SolverConfig(dt=1e-3, t_end=0.1)
    a = solver.integrate(model, psi0, cfg)
    b = solver.integrate(model, psi0, cfg)
    for sa, sb in zip(a.states, b.states):
        assert np.array_equal(sa.values, sb.values)
    assert a.diagnostics == b.diagnostics


def test_export_trajectory(tmp_path):
    grid = Grid1D(-20.0, 20.0, 128)
    psi0 = _gaussian(grid)
    traj = solver.integrate(_zero_model(), psi0, solver.SolverConfig(dt=1e-2, t_end=0.1, snapshot_every=5))
    solver.export_trajectory(traj, str(tmp_path))
    files = sorted(p.name for p in tmp_path.iterdir())
    assert "diagnostics.csv" in files
    assert sum(f.startswith("snapshot_") for f in files) == len(traj.times)
