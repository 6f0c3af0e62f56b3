"""Almost paracontact metric structures (phi, xi, eta, g).

``phi`` is stored as mixed components ``phi[i, j]`` with
``phi(d_j) = sum_i phi[i, j] d_i``; ``eta`` as covariant components.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .checks import DEFAULT_TOL, CheckReport, compare, zero_check
from .chartcalc import (
    CurvatureCache,
    GeometryError,
    MetricField,
    TensorField,
    VectorField,
    object_array,
    coordinate_frame,
    expr_sum,
    is_const,
    lie_bracket,
    signature,
)
from .exprcore import Chart, Const, Expression, as_expr, diff, evaluate_many, sample

DETA_CONVENTION = "d eta(X,Y) = 1/2 {X eta(Y) - Y eta(X) - eta([X,Y])}"

PARACOSYMPLECTIC = "paracosymplectic"
QUASI_PARA_SASAKIAN = "quasi-para-Sasakian"
BETA_PARA_SASAKIAN = "beta-para-Sasakian"
PARA_SASAKIAN = "para-Sasakian"
ALPHA_PARA_KENMOTSU = "alpha-para-Kenmotsu"


@dataclass(frozen=True, eq=False)
class ParacontactStructure:
    chart: Chart
    phi: TensorField
    xi: VectorField
    eta: TensorField
    g: MetricField

    def __post_init__(self):
        if self.phi.valence != (1, 1):
            raise ValueError("phi must be a (1,1) tensor field")
        if self.eta.valence != (0, 1):
            raise ValueError("eta must be a 1-form")
        for part in (self.phi, self.xi, self.eta, self.g):
            if part.chart.dim != self.chart.dim:
                raise ValueError("all structure fields must live on the same chart")

    @classmethod
    def from_components(cls, g: MetricField, phi, xi, eta) -> "ParacontactStructure":
        chart = g.chart
        return cls(
            chart,
            TensorField(chart, (1, 1), phi),
            VectorField(chart, xi),
            TensorField(chart, (0, 1), eta),
            g,
        )

    @property
    def dim(self) -> int:
        return self.chart.dim

    def apply_phi(self, X: VectorField) -> VectorField:
        d = self.dim
        P = self.phi.components
        return VectorField(self.chart, [
            expr_sum(P[i, j] * X[j] for j in range(d) if not (is_const(P[i, j], 0) or is_const(X[j], 0)))
            for i in range(d)
        ])

    def eta_of(self, X: VectorField) -> Expression:
        e = self.eta.components
        return expr_sum(e[i] * X[i] for i in range(self.dim) if not (is_const(e[i], 0) or is_const(X[i], 0)))

    def sampled(self) -> dict[str, np.ndarray]:
        pts = self.chart.points
        return {
            "phi": self.phi.sampled(pts),
            "xi": self.xi.sampled(pts),
            "eta": self.eta.sampled(pts),
            "g": self.g.sampled(pts),
        }


def _require_odd(S: ParacontactStructure) -> int:
    if S.dim % 2 == 0:
        raise GeometryError(f"almost paracontact structures need odd dimension, got {S.dim}")
    return (S.dim - 1) // 2


def matrix_rank(m: np.ndarray, pivot_tol: float = 1e-10) -> int:
    """Rank by Gaussian elimination with partial pivoting."""
    a = np.array(m, dtype=float)
    rows, cols = a.shape
    rank = 0
    for c in range(cols):
        if rank == rows:
            break
        p = rank + int(np.argmax(np.abs(a[rank:, c])))
        if abs(a[p, c]) <= pivot_tol:
            continue
        a[[rank, p]] = a[[p, rank]]
        a[rank + 1:] -= np.outer(a[rank + 1:, c] / a[rank, c], a[rank])
        rank += 1
    return rank


def check_axioms(S: ParacontactStructure, tol: float = DEFAULT_TOL) -> list[CheckReport]:
    """One report per almost paracontact metric axiom."""
    n = _require_odd(S)
    pts = S.chart.points
    s = S.sampled()
    phi, xi, eta, g = s["phi"], s["xi"], s["eta"], s["g"]
    eye = np.eye(S.dim)[None]
    reports = [
        compare("phi^2 = I - eta (x) xi", phi @ phi, eye - np.einsum("ni,nj->nij", xi, eta), pts, tol),
        compare("eta(xi) = 1", np.einsum("ni,ni->n", eta, xi), 1.0, pts, tol),
        zero_check("phi xi = 0", np.einsum("nij,nj->ni", phi, xi), pts, tol),
        zero_check("eta o phi = 0", np.einsum("ni,nij->nj", eta, phi), pts, tol),
    ]
    ranks = np.array([matrix_rank(m) for m in phi], dtype=float)
    reports.append(compare(f"rank(phi) = {2 * n}", ranks, float(2 * n), pts, 0.0))
    reports.append(compare(
        "g(phi X, phi Y) = -g(X,Y) + eta(X) eta(Y)",
        np.einsum("nki,nlj,nkl->nij", phi, phi, g),
        -g + np.einsum("ni,nj->nij", eta, eta),
        pts, tol,
    ))
    reports.append(compare("g(X, xi) = eta(X)", np.einsum("nij,nj->ni", g, xi), eta, pts, tol))
    lowered = np.einsum("nki,nkj->nij", phi, g)  # g(phi d_i, d_j)
    reports.append(zero_check("g(phi X, Y) + g(X, phi Y) = 0", lowered + np.swapaxes(lowered, 1, 2), pts, tol))
    reports.append(_signature_report(S, n))
    return reports


def _signature_report(S: ParacontactStructure, n: int) -> CheckReport:
    expected = (n + 1, n)
    try:
        sig = signature(S.g)
        ok = sig == expected
        note = f"signature {sig}, expected {expected}"
    except GeometryError as exc:
        ok, note = False, str(exc)
    return CheckReport(
        f"signature = {expected}", ok, 0.0 if ok else 1.0, 0.0 if ok else 1.0, 0.0 if ok else 1.0,
        0.0, len(S.chart.points), note=note,
    )


# --------------------------------------------------------------------------
# Nijenhuis torsion and normality
# --------------------------------------------------------------------------


def d_eta(S: ParacontactStructure, X: VectorField, Y: VectorField) -> Expression:
    return (X.apply(S.eta_of(Y)) - Y.apply(S.eta_of(X)) - S.eta_of(lie_bracket(X, Y))) / 2


def phi_torsion(S: ParacontactStructure, X: VectorField, Y: VectorField) -> VectorField:
    """``[phi,phi](X,Y) = phi^2[X,Y] + [phi X, phi Y] - phi[phi X, Y] - phi[X, phi Y]``."""
    pX, pY = S.apply_phi(X), S.apply_phi(Y)
    return (
        S.apply_phi(S.apply_phi(lie_bracket(X, Y)))
        + lie_bracket(pX, pY)
        - S.apply_phi(lie_bracket(pX, Y))
        - S.apply_phi(lie_bracket(X, pY))
    )


def nijenhuis(S: ParacontactStructure) -> np.ndarray:
    """``N[k, i, j]``: k-th component of ``[phi,phi](d_i,d_j) - 2 d eta(d_i,d_j) xi``."""
    d = S.dim
    frame = coordinate_frame(S.chart)
    N = object_array((d, d, d))
    for i in range(d):
        for j in range(i + 1, d):
            torsion = phi_torsion(S, frame[i], frame[j])
            v = torsion - S.xi.scale(2 * d_eta(S, frame[i], frame[j]))
            for k in range(d):
                N[k, i, j] = v[k]
                N[k, j, i] = -v[k]
    return N


def normality_residual(S: ParacontactStructure, tol: float = DEFAULT_TOL) -> CheckReport:
    N = nijenhuis(S)
    return zero_check("N_phi = [phi,phi] - 2 d eta (x) xi = 0", sample(N, S.chart.points), S.chart.points,
                      tol, note=DETA_CONVENTION)


def contact_metric_residual(S: ParacontactStructure, tol: float = DEFAULT_TOL) -> CheckReport:
    """Informational: ``d eta(X,Y) = g(X, phi Y)`` on coordinate pairs."""
    d = S.dim
    frame = coordinate_frame(S.chart)
    lhs = object_array((d, d))
    rhs = object_array((d, d))
    for i in range(d):
        for j in range(d):
            lhs[i, j] = d_eta(S, frame[i], frame[j])
            rhs[i, j] = S.g.inner(frame[i], S.apply_phi(frame[j]))
    pts = S.chart.points
    return compare("d eta(X,Y) = g(X, phi Y)", sample(lhs, pts), sample(rhs, pts), pts, tol,
                   note="informational; " + DETA_CONVENTION)


# --------------------------------------------------------------------------
# structure functions alpha, beta
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class StructureFunctions:
    alpha: Expression
    beta: Expression
    alpha_is_constant: bool
    beta_is_constant: bool
    constancy_tol: float
    alpha_values: np.ndarray = field(repr=False)
    beta_values: np.ndarray = field(repr=False)
    reconstruction: CheckReport | None = None

    @classmethod
    def from_expressions(cls, alpha, beta, chart: Chart, tol: float = DEFAULT_TOL,
                         reconstruction: CheckReport | None = None) -> "StructureFunctions":
        alpha, beta = as_expr(alpha), as_expr(beta)
        pts = chart.points
        a = evaluate_many(alpha, pts)
        b = evaluate_many(beta, pts)
        return cls(alpha, beta, is_constant(a, tol), is_constant(b, tol), tol, a, b, reconstruction)

    @property
    def alpha_mean(self) -> float:
        return float(self.alpha_values.mean())

    @property
    def beta_mean(self) -> float:
        return float(self.beta_values.mean())

    def alpha_is_zero(self) -> bool:
        return bool(np.abs(self.alpha_values).max() <= self.constancy_tol)

    def beta_is_zero(self) -> bool:
        return bool(np.abs(self.beta_values).max() <= self.constancy_tol)


def is_constant(values: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    mean = float(np.mean(values))
    return bool(np.std(values) <= tol * max(1.0, abs(mean)))


def nabla_xi_matrix(S: ParacontactStructure, cache: CurvatureCache) -> np.ndarray:
    """Mixed components ``A[k, i]`` of ``X -> nabla_X xi`` (``A[k,i] = (nabla_{d_i} xi)^k``)."""
    d = S.dim
    G = cache.christoffel
    A = object_array((d, d))
    for k in range(d):
        for i in range(d):
            A[k, i] = diff(S.xi[k], i) + expr_sum(
                G[k, i, j] * S.xi[j] for j in range(d) if not (is_const(G[k, i, j], 0) or is_const(S.xi[j], 0))
            )
    return A


def alpha_beta(S: ParacontactStructure, cache: CurvatureCache, tol: float = DEFAULT_TOL) -> StructureFunctions:
    """``2 alpha = tr(X -> nabla_X xi)``, ``2 beta = tr(X -> phi nabla_X xi)``.

    The returned ``reconstruction`` report compares ``nabla_X xi`` against
    ``alpha (X - eta(X) xi) + beta phi X``.
    """
    if S.dim != 3:
        raise GeometryError("alpha and beta are defined here for 3-manifolds only")
    d = S.dim
    A = nabla_xi_matrix(S, cache)
    P = S.phi.components
    alpha = expr_sum(A[i, i] for i in range(d)) / 2
    beta = expr_sum(
        P[k, l] * A[l, k] for k in range(d) for l in range(d) if not (is_const(P[k, l], 0) or is_const(A[l, k], 0))
    ) / 2
    model = object_array((d, d))
    for k in range(d):
        for i in range(d):
            delta = Const(1 if k == i else 0)
            model[k, i] = alpha * (delta - S.eta[i] * S.xi[k]) + beta * P[k, i]
    pts = S.chart.points
    recon = compare("nabla_X xi = alpha (X - eta(X) xi) + beta phi X", sample(A, pts), sample(model, pts), pts, tol)
    return StructureFunctions.from_expressions(alpha, beta, S.chart, tol, recon)


def classify(f: StructureFunctions, tol: float | None = None) -> str:
    tol = f.constancy_tol if tol is None else tol
    a_zero, b_zero = f.alpha_is_zero(), f.beta_is_zero()
    if a_zero and b_zero:
        return PARACOSYMPLECTIC
    if a_zero:
        if f.beta_is_constant:
            if abs(f.beta_mean + 1.0) <= tol:
                return PARA_SASAKIAN
            return BETA_PARA_SASAKIAN
        return QUASI_PARA_SASAKIAN
    if b_zero and f.alpha_is_constant:
        return ALPHA_PARA_KENMOTSU
    return (
        f"unclassified(alpha in [{f.alpha_values.min():.6g}, {f.alpha_values.max():.6g}], "
        f"beta in [{f.beta_values.min():.6g}, {f.beta_values.max():.6g}])"
    )


def ksi_beta_identity(S: ParacontactStructure, f: StructureFunctions, tol: float = DEFAULT_TOL) -> CheckReport:
    """Sampled residual of ``xi(beta) + 2 alpha beta = 0``."""
    expr = S.xi.apply(f.beta) + 2 * f.alpha * f.beta
    pts = S.chart.points
    return zero_check("xi(beta) + 2 alpha beta = 0", evaluate_many(expr, pts), pts, tol)
