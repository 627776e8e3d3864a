"""Five-function classification engine: push-forward group action (with a
symbolic substitution oracle in test_gauge), equivalence decision with
generator recovery, linearizability conditions, and the phase-scaling map."""

import math
import numpy as np
import pytest
from fractions import Fraction

from nlsgauge import equivalence
from nlsgauge.equivalence import (
    NotEquivalent,
    NotLinearizable,
    equivalence_generator,
    guerra_field,
    guerra_field_inverse,
    guerra_map,
    linearizable,
    push_forward,
)
from nlsgauge.errors import DomainError
from nlsgauge.fieldgrid import ComplexField, Grid1D, HydroField
from nlsgauge.models import FiveFunction, RhoExpr
from conftest import random_fraction

_RHO = RhoExpr.rho()


def random_expr(rng, n_terms=2):
    return RhoExpr.make(
        [
            (random_fraction(rng), random_fraction(rng, 3, 3), int(rng.integers(0, 2)))
            for _ in range(n_terms)
        ]
    )


def random_vector(rng):
    return FiveFunction(*(random_expr(rng) for _ in range(5)))


def random_omega(rng):
    # generators must have expressible derivatives; any algebra element works
    return random_expr(rng)


# ---------------------------------------------------------------------------
# group action
# ---------------------------------------------------------------------------


def test_push_forward_group_law_50_random():
    rng = np.random.default_rng(31)
    for _ in range(50):
        f = random_vector(rng)
        w1, w2 = random_omega(rng), random_omega(rng)
        lhs = push_forward(push_forward(f, w1), w2)
        rhs = push_forward(f, w1 + w2)
        assert lhs.fvec == rhs.fvec


def test_push_forward_identity_and_inverse():
    rng = np.random.default_rng(32)
    for _ in range(20):
        f = random_vector(rng)
        w = random_omega(rng)
        assert push_forward(f, RhoExpr.zero()).fvec == f.fvec
        assert push_forward(push_forward(f, w), -w).fvec == f.fvec


def test_f2_is_invariant():
    rng = np.random.default_rng(33)
    for _ in range(20):
        f = random_vector(rng)
        w = random_omega(rng)
        assert push_forward(f, w).f2 == f.f2


# ---------------------------------------------------------------------------
# equivalence decision
# ---------------------------------------------------------------------------


def test_generator_round_trip():
    rng = np.random.default_rng(34)
    for _ in range(20):
        f = random_vector(rng)
        w = random_omega(rng).drop_constant()
        g = push_forward(f, w)
        rec = equivalence_generator(f, g)
        assert isinstance(rec, RhoExpr)
        assert rec == w
        assert push_forward(f, rec).fvec == g.fvec


def test_not_equivalent_witnesses():
    rng = np.random.default_rng(35)
    f = random_vector(rng)
    g = push_forward(f, random_omega(rng))
    bad = FiveFunction(g.f1, g.f2 + RhoExpr.const(1), g.f3, g.f4, g.f5)
    res = equivalence_generator(f, bad)
    assert isinstance(res, NotEquivalent)
    assert "f2" in res.witness
    bad = FiveFunction(g.f1 + RhoExpr.const(1), g.f2, g.f3, g.f4, g.f5)
    res = equivalence_generator(f, bad)
    assert isinstance(res, NotEquivalent)
    bad = FiveFunction(g.f1, g.f2, g.f3 + RhoExpr.const(1), g.f4, g.f5)
    res = equivalence_generator(f, bad)
    assert isinstance(res, NotEquivalent)
    assert "f~3" in res.witness


# ---------------------------------------------------------------------------
# linearizability
# ---------------------------------------------------------------------------


def linear_image(omega: RhoExpr) -> FiveFunction:
    """The vector gauge-equivalent to the free equation via e^{-i omega}."""
    z = FiveFunction(*(RhoExpr.zero() for _ in range(5)))
    return push_forward(z, -omega)


def test_linearizable_accepts_constructed_vectors():
    rng = np.random.default_rng(36)
    for _ in range(20):
        w = random_omega(rng).drop_constant()
        f = linear_image(w)
        rec = linearizable(f)
        assert isinstance(rec, RhoExpr)
        assert push_forward(f, rec).fvec == tuple(RhoExpr.zero() for _ in range(5))


def test_linearizable_rejects_20_perturbed_vectors():
    rng = np.random.default_rng(37)
    count = 0
    while count < 20:
        w = random_omega(rng).drop_constant()
        f = linear_image(w)
        slot = int(rng.integers(0, 5))
        bump = RhoExpr.monomial(random_fraction(rng, nonzero=True), int(rng.integers(0, 3)))
        fields = list(f.fvec)
        fields[slot] = fields[slot] + bump
        g = FiveFunction(*fields)
        res = linearizable(g)
        if not isinstance(res, NotLinearizable):
            # a perturbation can land on another linearizable vector only by
            # respecting all four conditions; verify and skip
            assert push_forward(g, res).fvec == tuple(RhoExpr.zero() for _ in range(5))
            continue
        assert res.witness  # a named violated condition
        count += 1


def test_linearizable_witness_names_condition():
    z = RhoExpr.zero()
    res = linearizable(FiveFunction(RhoExpr.const(1), z, z, z, z))
    assert isinstance(res, NotLinearizable)
    assert "f1" in res.witness
    res = linearizable(FiveFunction(z, RhoExpr.const(1), z, z, z))
    assert "f2" in res.witness
    res = linearizable(FiveFunction(z, z, RhoExpr.const(1), z, z))
    assert "f3" in res.witness
    res = linearizable(FiveFunction(z, z, z, RhoExpr.const(1), z))
    assert "f4" in res.witness


# ---------------------------------------------------------------------------
# phase-scaling map
# ---------------------------------------------------------------------------


def test_guerra_map_exact_identity():
    for D in (0.0, 0.3, 0.6, 0.8):
        lin = guerra_map(D)
        assert abs(lin.kbar**2 + lin.D**2 - 1.0) < 1e-15
    assert guerra_map(0.6).kbar == pytest.approx(0.8, abs=1e-15)
    with pytest.raises(DomainError):
        guerra_map(1.0)
    with pytest.raises(DomainError):
        guerra_map(-0.1)


def test_guerra_field_round_trip():
    grid = Grid1D(-10.0, 10.0, 256)
    x = grid.x
    h = HydroField(
        rho=np.exp(-x**2 / 8.0) + 1e-6,
        phase=0.4 * np.sin(x / 3.0),
        grid=grid,
    )
    lin = guerra_map(0.6)
    chi = guerra_field(h, lin)
    assert np.max(np.abs(np.abs(chi.values) ** 2 - h.rho)) < 1e-13
    back = guerra_field_inverse(chi, lin)
    assert np.max(np.abs(back.rho - h.rho)) < 1e-13
    mask = h.rho > 1e-4
    d = (back.phase - h.phase)[mask]
    assert np.max(np.abs(d - d.mean())) < 1e-10
