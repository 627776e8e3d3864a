"""Coupled-system engine: multiplet conservation analysis, generator vectors,
and transformation to a purely Hermitian nonlinearity.

The model class is the p-component system

    i dpsi_j/dt + a_j lap psi_j
      + [ sum_i rho_i (b_ij dS_j/dx + c_ij dS_i/dx) + f_j(rho) ] psi_j
      + i [ sum_i (d_ij (rho_i/rho_j) drho_j/dx + e_ij drho_i/dx) ] psi_j = 0,

with exact-rational matrices b, c, d, e and quadratic potentials
f_j = sum_ik lambda_jik rho_i rho_k.  Depending on the structure of d and e
the system conserves each density, only the total density, or per-multiplet
sums; in the conserving cases a vector of generators sigma_j removes the
anti-Hermitian part, leaving a real diagonal block plus (when only group sums
are conserved) an off-diagonal Hermitian block assembled from the functionals
F_j.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

import numpy as np

from . import fieldgrid
from .errors import NonConservingModel
from .fieldgrid import FLOOR_DEFAULT, Grid1D
from .models import Rational, _frac


def _mat(rows, p) -> tuple[tuple[Fraction, ...], ...]:
    out = tuple(tuple(_frac(v) for v in row) for row in rows)
    if len(out) != p or any(len(r) != p for r in out):
        raise ValueError(f"matrix must be {p}x{p}")
    return out


def _sym(mat: tuple[tuple[Fraction, ...], ...]) -> tuple[tuple[Fraction, ...], ...]:
    p = len(mat)
    return tuple(
        tuple((mat[i][k] + mat[k][i]) / 2 for k in range(p)) for i in range(p)
    )


@dataclass(frozen=True)
class CoupledModel:
    """p-component model; fpot holds one symmetric coefficient matrix per
    component j, with f_j = sum_ik fpot[j][i][k] rho_i rho_k (coefficients
    canonically symmetrized in i,k)."""

    p: int
    multiplets: tuple[tuple[int, ...], ...]  # partition of 0..p-1
    a: tuple[Fraction, ...]
    b: tuple[tuple[Fraction, ...], ...]
    c: tuple[tuple[Fraction, ...], ...]
    d: tuple[tuple[Fraction, ...], ...]
    e: tuple[tuple[Fraction, ...], ...]
    fpot: tuple[tuple[tuple[Fraction, ...], ...], ...]

    @staticmethod
    def make(p, a, b, c, d, e, fpot=None, multiplets=None) -> "CoupledModel":
        a = tuple(_frac(v) for v in a)
        if len(a) != p or any(v == 0 for v in a):
            raise ValueError("need p nonzero diffusion coefficients")
        if multiplets is None:
            multiplets = [list(range(p))]
        groups = tuple(tuple(int(i) for i in g) for g in multiplets)
        seen = sorted(i for g in groups for i in g)
        if seen != list(range(p)):
            raise ValueError("multiplets must partition 0..p-1")
        if fpot is None:
            fpot = [[[0] * p for _ in range(p)] for _ in range(p)]
        return CoupledModel(
            p=p,
            multiplets=groups,
            a=a,
            b=_mat(b, p),
            c=_mat(c, p),
            d=_mat(d, p),
            e=_mat(e, p),
            fpot=tuple(_sym(_mat(m, p)) for m in fpot),
        )

    @staticmethod
    def from_wave_params(p, a, alpha, beta, gamma, eps, fpot=None, multiplets=None):
        """Constructor from the symmetric/antisymmetric splitting
        b = alpha - beta, c = gamma - eps, d = (alpha+beta)/2, e = (gamma+eps)/2."""
        al, be = _mat(alpha, p), _mat(beta, p)
        ga, ep = _mat(gamma, p), _mat(eps, p)
        sub = lambda m, n: [[m[i][j] - n[i][j] for j in range(p)] for i in range(p)]
        avg = lambda m, n: [[(m[i][j] + n[i][j]) / 2 for j in range(p)] for i in range(p)]
        return CoupledModel.make(
            p, a, sub(al, be), sub(ga, ep), avg(al, be), avg(ga, ep), fpot, multiplets
        )

    def lam(self, i: int, j: int) -> Fraction:
        return self.d[i][j] + self.e[i][j]

    def group_of(self, i: int) -> int:
        for k, g in enumerate(self.multiplets):
            if i in g:
                return k
        raise IndexError(i)


# ---------------------------------------------------------------------------
# conservation analysis
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PerSpecies:
    pass


@dataclass(frozen=True)
class TotalOnly:
    pass


@dataclass(frozen=True)
class Custom:
    multiplets: tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class NonConserving:
    witness: tuple[int, int]


ConservationStructure = Union[PerSpecies, TotalOnly, Custom, NonConserving]


def conservation_structure(cm: CoupledModel) -> ConservationStructure:
    """PerSpecies iff d_ij = e_ij off the diagonal; otherwise check, within
    each declared multiplet, the symmetry d_ij + e_ji = d_ji + e_ij and,
    across multiplets, d_ij = e_ij."""
    p = cm.p
    if all(cm.d[i][j] == cm.e[i][j] for i in range(p) for j in range(p) if i != j):
        return PerSpecies()
    for i in range(p):
        for j in range(p):
            if i == j:
                continue
            if cm.group_of(i) == cm.group_of(j):
                if cm.d[i][j] + cm.e[j][i] != cm.d[j][i] + cm.e[i][j]:
                    return NonConserving((i, j))
            else:
                if cm.d[i][j] != cm.e[i][j]:
                    return NonConserving((i, j))
    if len(cm.multiplets) == 1:
        return TotalOnly()
    return Custom(cm.multiplets)


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpeciesGenerator:
    """sigma = sum_i weights[i] * int^x rho_i dx'."""

    weights: tuple[Fraction, ...]

    def evaluate(self, rhos: list[np.ndarray], grid: Grid1D) -> np.ndarray:
        integrand = np.zeros(grid.n)
        for w, rho in zip(self.weights, rhos):
            if w != 0:
                integrand = integrand + float(w) * rho
        return fieldgrid.cumulative_integral(integrand, grid)


def coupled_generators(cm: CoupledModel) -> list[SpeciesGenerator]:
    """sigma_j = -(1/2 a_j) sum_i lambda_ij int rho_i, lambda_ij = d_ij + e_ij."""
    verdict = conservation_structure(cm)
    if isinstance(verdict, NonConserving):
        raise NonConservingModel(
            f"neither species nor multiplet densities conserved; witness pair {verdict.witness}"
        )
    return [
        SpeciesGenerator(
            tuple(-cm.lam(i, j) / (2 * cm.a[j]) for i in range(cm.p))
        )
        for j in range(cm.p)
    ]


# ---------------------------------------------------------------------------
# transformation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HermitianResult:
    """Coefficient data of the transformed nonlinearity.

    Diagonal entry j:  sum_i rho_i (mu_ij dS~_j + nu_ij dS~_i)
                       + sum_ik omega[j][i][k] rho_i rho_k + f_j + R_j;
    off-diagonal (within a multiplet, between distinct components l, m):
        i (F_l - F_m) / (2 sqrt(rho_l rho_m)) * exp(i (S~_l - S~_m)),
    with F_j = sum_i g_ij (rho_i drho_j - rho_j drho_i), g = d - e.
    """

    model: CoupledModel
    mu: tuple[tuple[Fraction, ...], ...]
    nu: tuple[tuple[Fraction, ...], ...]
    omega: tuple[tuple[tuple[Fraction, ...], ...], ...]
    rpot: tuple[tuple[tuple[Fraction, ...], ...], ...]  # R_j coefficient matrices
    gmat: tuple[tuple[Fraction, ...], ...]  # d - e
    generators: tuple[SpeciesGenerator, ...]
    flags: dict = field(default_factory=dict)

    # -- numerical assembly --------------------------------------------------

    def evaluate_F(self, rhos: list[np.ndarray], grid: Grid1D) -> list[np.ndarray]:
        p = self.model.p
        drhos = [fieldgrid.derivative(r, grid) for r in rhos]
        out = []
        for j in range(p):
            F = np.zeros(grid.n)
            for i in range(p):
                g = self.gmat[i][j]
                if g != 0:
                    F = F + float(g) * (rhos[i] * drhos[j] - rhos[j] * drhos[i])
            out.append(F)
        return out

    def evaluate_diagonal(
        self, rhos: list[np.ndarray], phases: list[np.ndarray], grid: Grid1D
    ) -> list[np.ndarray]:
        p = self.model.p
        dS = [fieldgrid.derivative(s, grid) for s in phases]
        out = []
        for j in range(p):
            acc = np.zeros(grid.n)
            for i in range(p):
                acc = acc + rhos[i] * (
                    float(self.mu[i][j]) * dS[j] + float(self.nu[i][j]) * dS[i]
                )
                for k in range(p):
                    coeff = self.omega[j][i][k] + self.model.fpot[j][i][k]
                    if coeff != 0:
                        acc = acc + float(coeff) * rhos[i] * rhos[k]
            out.append(acc)
        return out

    def assemble_matrix(
        self,
        rhos: list[np.ndarray],
        phases: list[np.ndarray],
        grid: Grid1D,
        floor: float = FLOOR_DEFAULT,
    ) -> np.ndarray:
        """Full transformed nonlinearity matrix, shape (n, p, p), Hermitian in
        the last two axes at every grid point."""
        p = self.model.p
        n = grid.n
        out = np.zeros((n, p, p), dtype=complex)
        for j, diag in enumerate(self.evaluate_diagonal(rhos, phases, grid)):
            out[:, j, j] = diag
        F = self.evaluate_F(rhos, grid)
        for l in range(p):
            for m in range(p):
                if l == m or self.model.group_of(l) != self.model.group_of(m):
                    continue
                denom = 2.0 * np.sqrt(
                    np.maximum(rhos[l], floor) * np.maximum(rhos[m], floor)
                )
                out[:, l, m] = (
                    1j * (F[l] - F[m]) / denom * np.exp(1j * (phases[l] - phases[m]))
                )
        return out

    def to_report(self) -> dict:
        tostr = lambda m: [[str(v) for v in row] for row in m]
        return {
            "mu": tostr(self.mu),
            "nu": tostr(self.nu),
            "omega": [tostr(m) for m in self.omega],
            "R": [tostr(m) for m in self.rpot],
            "F_coefficients": tostr(self.gmat),
            "generator_weights": [[str(w) for w in g.weights] for g in self.generators],
            "flags": dict(self.flags),
        }


def transform_coupled(cm: CoupledModel) -> HermitianResult:
    verdict = conservation_structure(cm)
    if isinstance(verdict, NonConserving):
        raise NonConservingModel(
            f"neither species nor multiplet densities conserved; witness pair {verdict.witness}"
        )
    p = cm.p
    mu = tuple(
        tuple(cm.b[i][j] + cm.lam(i, j) for j in range(p)) for i in range(p)
    )
    nu = tuple(
        tuple(cm.c[i][j] - cm.a[i] / cm.a[j] * cm.lam(i, j) for j in range(p))
        for i in range(p)
    )
    omega = tuple(
        _sym(
            tuple(
                tuple(
                    (
                        cm.lam(i, j) * cm.lam(k, j)
                        + 2 * cm.b[i][j] * cm.lam(k, j)
                        + 2 * cm.a[j] / cm.a[i] * cm.c[i][j] * cm.lam(k, i)
                    )
                    / (4 * cm.a[j])
                    for k in range(p)
                )
                for i in range(p)
            )
        )
        for j in range(p)
    )
    # R_j = 0 for per-species conservation; otherwise the canonical choice
    # R_j = - sum_{i != j, same multiplet} lambda_ij rho_i rho_j.
    rpot_raw = [[[Fraction(0)] * p for _ in range(p)] for _ in range(p)]
    if not isinstance(verdict, PerSpecies):
        for j in range(p):
            for i in range(p):
                if i != j and cm.group_of(i) == cm.group_of(j):
                    rpot_raw[j][i][j] += -cm.lam(i, j)
    rpot = tuple(_sym(tuple(tuple(row) for row in m)) for m in rpot_raw)
    gmat = tuple(
        tuple(cm.d[i][j] - cm.e[i][j] for j in range(p)) for i in range(p)
    )
    flags = {
        "conservation": type(verdict).__name__,
        "offdiag_denominator": "2*sqrt(rho_l*rho_m) (component-count factor omitted)",
        "offdiag_phases": "transformed",
    }
    return HermitianResult(
        model=cm,
        mu=mu,
        nu=nu,
        omega=omega,
        rpot=rpot,
        gmat=gmat,
        generators=tuple(coupled_generators(cm)),
        flags=flags,
    )


# ---------------------------------------------------------------------------
# special reductions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DecoupledLinear:
    pass


@dataclass(frozen=True)
class JackiwLike:
    eta: tuple[Fraction, ...]


@dataclass(frozen=True)
class CurrentCoupled:
    eta: tuple[tuple[Fraction, ...], ...]


@dataclass(frozen=True)
class General:
    pass


def _fpot_matches(cm: CoupledModel, table) -> bool:
    """Exact comparison of f_j coefficients after symmetrization in (i, k)."""
    return all(
        _sym(_mat(table[j], cm.p)) == cm.fpot[j] for j in range(cm.p)
    )


def special_reduction(cm: CoupledModel):
    """Detect the three closed reduction regimes by exact rational equality."""
    p = cm.p
    rng = range(p)
    lam = cm.lam

    b_all = all(cm.b[i][j] == -lam(i, j) for i in rng for j in rng)
    b_off = all(cm.b[i][j] == -lam(i, j) for i in rng for j in rng if i != j)
    c_cond = all(cm.a[j] * cm.c[i][j] == 2 * cm.a[i] * lam(i, j) for i in rng for j in rng)

    if b_all and c_cond:
        table = [
            [
                [cm.b[i][j] * (cm.b[k][j] - 2 * cm.b[k][i]) / (4 * cm.a[j]) for k in rng]
                for i in rng
            ]
            for j in rng
        ]
        if _fpot_matches(cm, table):
            return DecoupledLinear()

    if b_off and c_cond:
        table = []
        for k in rng:
            m = [[Fraction(0)] * p for _ in rng]
            for j in rng:
                for i in rng:
                    if j == k and i == k:
                        m[j][i] = lam(k, k) * (cm.b[k][k] + Fraction(3, 2) * lam(k, k)) / (2 * cm.a[k])
                    elif i == k and j != k:
                        m[j][i] = lam(k, j) * (cm.b[k][k] + lam(k, k) / 2 + lam(j, k)) / (2 * cm.a[k])
                    elif j == k and i != k:
                        m[j][i] = lam(k, k) * lam(k, i) / (4 * cm.a[k])
                    else:
                        m[j][i] = lam(k, j) * (lam(j, i) - lam(k, i) / 2) / (2 * cm.a[k])
            table.append(m)
        if _fpot_matches(cm, table):
            return JackiwLike(
                eta=tuple((cm.b[j][j] + lam(j, j)) / (2 * cm.a[j]) for j in rng)
            )

    if b_all:
        table = [
            [
                [
                    cm.c[k][j] * lam(j, i) / (2 * cm.a[j])
                    - lam(k, j) * lam(k, i) / (4 * cm.a[k])
                    for i in rng
                ]
                for j in rng
            ]
            for k in rng
        ]
        if _fpot_matches(cm, table):
            return CurrentCoupled(
                eta=tuple(
                    tuple(
                        (cm.c[j][k] - cm.a[k] * lam(j, k) / cm.a[j]) / (2 * cm.a[k])
                        for k in rng
                    )
                    for j in rng
                )
            )

    return General()
