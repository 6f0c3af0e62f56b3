"""Instance checks of the curvature results for normal almost paracontact 3-manifolds.

Every check re-derives its own hypotheses (axioms, normality, alpha/beta,
classification) from the structure rather than trusting caller flags, so a
:class:`TheoremReport` is self-contained evidence for one manifold.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .checks import DEFAULT_TOL, CheckReport, all_passed, compare, zero_check
from .chartcalc import (
    CurvatureCache,
    MetricField,
    TensorField,
    curvature_cache,
    nabla_components,
)
from .exprcore import diff, evaluate_many, sample
from .paracontact import (
    ALPHA_PARA_KENMOTSU,
    ParacontactStructure,
    StructureFunctions,
    alpha_beta,
    check_axioms,
    classify,
    is_constant,
    ksi_beta_identity,
    normality_residual,
)

VERIFIED = "verified"
NOT_MET = "hypothesis-not-met"
FAILED = "FAILED"

PHI_BETA_READING = "phi(X beta) read as the derivative of beta along phi X"


@dataclass(frozen=True)
class TheoremReport:
    theorem: str
    hypothesis: str
    hypothesis_met: bool
    checks: tuple[CheckReport, ...]
    verdict: str
    details: dict = field(default_factory=dict)
    note: str = ""

    @property
    def passed(self) -> bool:
        return self.verdict != FAILED

    def as_dict(self) -> dict:
        return {
            "theorem": self.theorem,
            "hypothesis": self.hypothesis,
            "hypothesis_met": self.hypothesis_met,
            "verdict": self.verdict,
            "details": self.details,
            "note": self.note,
            "checks": [c.as_dict() for c in self.checks],
        }


def _report(theorem, hypothesis, met, checks, details=None, note="", verdict=None) -> TheoremReport:
    if verdict is None:
        if not met:
            verdict = NOT_MET
        else:
            verdict = VERIFIED if all_passed(checks) else FAILED
    return TheoremReport(theorem, hypothesis, met, tuple(checks), verdict, details or {}, note)


@dataclass(frozen=True, eq=False)
class Hypotheses:
    axioms: tuple[CheckReport, ...]
    normality: CheckReport
    functions: StructureFunctions | None
    classification: str | None

    @property
    def axioms_ok(self) -> bool:
        return all_passed(self.axioms)

    @property
    def normal(self) -> bool:
        return self.axioms_ok and self.normality.passed

    @property
    def alpha_para_kenmotsu(self) -> bool:
        return self.normal and self.classification == ALPHA_PARA_KENMOTSU


def derive_hypotheses(S: ParacontactStructure, cache: CurvatureCache, tol: float = DEFAULT_TOL) -> Hypotheses:
    axioms = tuple(check_axioms(S, tol))
    normality = normality_residual(S, tol)
    f = cls = None
    if S.dim == 3 and all_passed(axioms) and normality.passed:
        f = alpha_beta(S, cache, tol)
        cls = classify(f)
    return Hypotheses(axioms, normality, f, cls)


def _ensure_cache(S, cache):
    return curvature_cache(S.g) if cache is None else cache


class _Sampled:
    """Structure, curvature and alpha/beta data at the chart sample points."""

    def __init__(self, S: ParacontactStructure, cache: CurvatureCache, f: StructureFunctions):
        pts = S.chart.points
        c = cache.sampled
        s = S.sampled()
        self.points = pts
        self.d = S.dim
        self.g, self.R, self.ric, self.tau = c["g"], c["riemann"], c["ricci"], c["tau"]
        self.phi, self.xi, self.eta = s["phi"], s["xi"], s["eta"]
        self.phi2 = self.phi @ self.phi
        self.alpha = evaluate_many(f.alpha, pts)
        self.beta = evaluate_many(f.beta, pts)
        self.dalpha = sample([diff(f.alpha, i) for i in range(self.d)], pts)
        self.dbeta = sample([diff(f.beta, i) for i in range(self.d)], pts)
        self.eye = np.eye(self.d)[None]

    def R_xi(self):
        """``R(d_i, d_j) xi`` as ``[n, l, i, j]``."""
        return np.einsum("nlkij,nk->nlij", self.R, self.xi)

    def phi_beta(self):
        """``(phi d_i) beta``."""
        return np.einsum("nli,nl->ni", self.phi, self.dbeta)


# --------------------------------------------------------------------------
# curvature identities of normal structures
# --------------------------------------------------------------------------


def normal_curvature_identities(S: ParacontactStructure, cache: CurvatureCache | None = None,
                                tol: float = DEFAULT_TOL) -> TheoremReport:
    """``R(X,Y)xi``, ``Ric(X,Y)``, ``Ric(Y,xi)`` in terms of alpha, beta, and ``xi beta + 2 alpha beta = 0``."""
    name = "curvature identities of normal structures"
    hyp = "normal almost paracontact metric 3-manifold"
    if S.dim != 3:
        return _report(name, hyp, False, [], note="dimension is not 3")
    cache = _ensure_cache(S, cache)
    h = derive_hypotheses(S, cache, tol)
    if not h.normal:
        return _report(name, hyp, False, [*h.axioms, h.normality])
    f = h.functions
    v = _Sampled(S, cache, f)
    a, b = v.alpha[:, None], v.beta[:, None]
    ab2 = a**2 + b**2
    # R(X,Y)xi with X = d_i, Y = d_j; arrays indexed [n, l, i, j]
    coef_a = v.dalpha + ab2 * v.eta           # (Y alpha) + (a^2+b^2) eta(Y), indexed by the slot
    coef_b = v.dbeta + 2 * a * b * v.eta      # (Y beta) + 2 a b eta(Y)
    rhs = (
        np.einsum("nj,nli->nlij", coef_a, v.phi2)
        - np.einsum("ni,nlj->nlij", coef_a, v.phi2)
        + np.einsum("nj,nli->nlij", coef_b, v.phi)
        - np.einsum("ni,nlj->nlij", coef_b, v.phi)
    )
    checks = [compare("R(X,Y)xi in terms of alpha, beta", v.R_xi(), rhs, v.points, tol)]

    xi_alpha = np.einsum("nl,nl->n", v.xi, v.dalpha)[:, None, None]
    tau = v.tau[:, None, None]
    A = a[:, :, None]
    B = b[:, :, None]
    pb = v.phi_beta()
    ric_rhs = (
        (tau / 2 - xi_alpha - A**2 - B**2) * v.g
        + (xi_alpha + 3 * (A**2 + B**2) - tau / 2) * np.einsum("ni,nj->nij", v.eta, v.eta)
        + np.einsum("nj,ni->nij", v.eta, v.dalpha) + np.einsum("ni,nj->nij", v.eta, v.dalpha)
        - np.einsum("nj,ni->nij", v.eta, pb) - np.einsum("ni,nj->nij", v.eta, pb)
    )
    checks.append(compare("Ric(X,Y) in terms of alpha, beta, tau", v.ric, ric_rhs, v.points, tol * 10))

    ric_xi = np.einsum("njk,nk->nj", v.ric, v.xi)
    ric_xi_rhs = v.dalpha - pb + (xi_alpha[:, :, 0] + 2 * ab2) * v.eta
    checks.append(compare("Ric(Y,xi) in terms of alpha, beta", ric_xi, ric_xi_rhs, v.points, tol * 10))
    checks.append(ksi_beta_identity(S, f, tol))

    # g(R(X,xi)xi, xi) = 0
    rxx = np.einsum("nlkij,nj,nk,nlw,nw->ni", v.R, v.xi, v.xi, v.g, v.xi)
    checks.append(zero_check("g(R(X,xi)xi, xi) = 0", rxx, v.points, tol))
    note = "" if f.beta_is_zero() else PHI_BETA_READING
    return _report(name, hyp, True, checks, {"classification": h.classification}, note)


def kenmotsu_curvature_form(S: ParacontactStructure, cache: CurvatureCache | None = None,
                            tol: float = DEFAULT_TOL) -> TheoremReport:
    """Full curvature operator of an alpha-para-Kenmotsu 3-manifold from tau and alpha."""
    name = "curvature of alpha-para-Kenmotsu manifolds"
    hyp = "alpha-para-Kenmotsu"
    if S.dim != 3:
        return _report(name, hyp, False, [], note="dimension is not 3")
    cache = _ensure_cache(S, cache)
    h = derive_hypotheses(S, cache, tol)
    if not h.alpha_para_kenmotsu:
        return _report(name, hyp, False, [], {"classification": h.classification})
    v = _Sampled(S, cache, h.functions)
    tau = v.tau[:, None, None, None, None]
    a2 = v.alpha[:, None, None, None, None] ** 2
    E = np.broadcast_to(v.eye, (len(v.points), 3, 3))
    # indices [n, l, k, i, j]: X = d_i, Y = d_j, Z = d_k
    gYZ_X = np.einsum("njk,nli->nlkij", v.g, E)
    gXZ_Y = np.einsum("nik,nlj->nlkij", v.g, E)
    term2 = np.einsum("njk,ni,nl->nlkij", v.g, v.eta, v.xi) - np.einsum("nik,nj,nl->nlkij", v.g, v.eta, v.xi)
    term3 = np.einsum("nlj,ni,nk->nlkij", E, v.eta, v.eta) - np.einsum("nli,nj,nk->nlkij", E, v.eta, v.eta)
    rhs = (tau / 2 - 2 * a2) * (gYZ_X - gXZ_Y) - (tau / 2 - 3 * a2) * term2 + (tau / 2 - 3 * a2) * term3
    checks = [compare("R(X,Y)Z from tau and alpha", v.R, rhs, v.points, tol * 10)]
    return _report(name, hyp, True, checks, {"alpha": float(v.alpha.mean()), "tau": float(v.tau.mean())})


# --------------------------------------------------------------------------
# second-order parallel tensors
# --------------------------------------------------------------------------


def nabla_residual(cache: CurvatureCache, h: TensorField, tol: float = DEFAULT_TOL, name: str = "nabla h = 0") -> CheckReport:
    comps = nabla_components(cache, h)
    pts = cache.chart.points
    return zero_check(name, sample(comps, pts), pts, tol, note="indexed (derivative, slot 1, slot 2)")


def parallel_check(S: ParacontactStructure | None, cache: CurvatureCache | None, h: TensorField,
                   tol: float = DEFAULT_TOL) -> TheoremReport:
    """Is ``h`` parallel; if so, is it consistent with the parallel-tensor theorems?

    On an alpha-para-Kenmotsu manifold a parallel symmetric (0,2) tensor must
    be ``h(xi,xi) g`` with constant ``h(xi,xi)`` and a parallel 2-form must
    vanish. ``h`` is split into symmetric and skew parts, each of which is
    parallel when ``h`` is. This checks one instance; it proves nothing.
    """
    name = "second-order parallel tensor"
    hyp = "nabla h = 0 on an alpha-para-Kenmotsu manifold"
    if h.valence != (0, 2):
        raise ValueError("parallel_check needs a (0,2) tensor")
    if cache is None:
        cache = curvature_cache(S.g)
    pts = cache.chart.points
    nab = nabla_residual(cache, h, tol)
    hv = h.sampled(pts)
    sym = (hv + np.swapaxes(hv, 1, 2)) / 2
    skew = (hv - np.swapaxes(hv, 1, 2)) / 2
    details = {
        "is_parallel": nab.passed,
        "is_symmetric": bool(np.abs(skew).max() <= tol),
        "is_antisymmetric": bool(np.abs(sym).max() <= tol),
    }
    checks = [nab]
    if not nab.passed:
        return _report(name, hyp, False, checks, details, note="h is not parallel")
    if S is None:
        return _report(name, hyp, False, checks, details, note="no paracontact structure supplied")
    hyps = derive_hypotheses(S, cache, tol)
    details["classification"] = hyps.classification
    if not hyps.alpha_para_kenmotsu:
        return _report(name, hyp, False, checks, details)
    xi = S.xi.sampled(pts)
    g = cache.sampled["g"]
    h_xixi = np.einsum("nij,ni,nj->n", sym, xi, xi)
    details["h(xi,xi)"] = float(h_xixi.mean())
    checks.append(compare("sym(h) = h(xi,xi) g", sym, h_xixi[:, None, None] * g, pts, tol))
    checks.append(CheckReport(
        "h(xi,xi) constant", is_constant(h_xixi, tol), float(np.std(h_xixi)), float(np.std(h_xixi)),
        float(np.std(h_xixi)), tol, len(pts),
    ))
    checks.append(zero_check("skew(h) = 0", skew, pts, tol))
    return _report(name, hyp, True, checks, details,
                   note="consistent with the parallel-tensor theorems on this instance (not a proof)")


# --------------------------------------------------------------------------
# xi-concircular / xi-projective flatness and the Einstein condition
# --------------------------------------------------------------------------


def xi_concircular_flat(S: ParacontactStructure, cache: CurvatureCache | None = None,
                        tol: float = DEFAULT_TOL) -> TheoremReport:
    """``L(X,Y)xi = (alpha^2 - tau/6)(eta(Y)X - eta(X)Y)``; flat iff ``tau = 6 alpha^2``."""
    name = "xi-concircular flatness"
    hyp = "alpha-para-Kenmotsu, dimension 3"
    if S.dim != 3:
        return _report(name, hyp, False, [], note="dimension is not 3")
    cache = _ensure_cache(S, cache)
    h = derive_hypotheses(S, cache, tol)
    if not h.alpha_para_kenmotsu:
        return _report(name, hyp, False, [], {"classification": h.classification})
    v = _Sampled(S, cache, h.functions)
    E = np.broadcast_to(v.eye, (len(v.points), 3, 3))
    tau6 = (v.tau / 6)[:, None, None, None, None]
    model = np.einsum("njk,nli->nlkij", v.g, E) - np.einsum("nik,nlj->nlkij", v.g, E)
    L = v.R - tau6 * model
    L_xi = np.einsum("nlkij,nk->nlij", L, v.xi)
    flat = zero_check("L(X,Y)xi = 0", L_xi, v.points, tol)
    tau_match = compare("tau = 6 alpha^2", v.tau, 6 * v.alpha**2, v.points, tol * 10)
    coef = (v.alpha**2 - v.tau / 6)[:, None, None, None]
    rhs = coef * (np.einsum("nj,nli->nlij", v.eta, E) - np.einsum("ni,nlj->nlij", v.eta, E))
    identity = compare("L(X,Y)xi = (alpha^2 - tau/6)(eta(Y)X - eta(X)Y)", L_xi, rhs, v.points, tol)
    agree = flat.passed == tau_match.passed
    verdict = VERIFIED if identity.passed and agree else FAILED
    details = {
        "xi_concircularly_flat": flat.passed,
        "tau": float(v.tau.mean()),
        "six_alpha_squared": float((6 * v.alpha**2).mean()),
        "equivalence_agrees": agree,
    }
    return _report(name, hyp, True, [flat, tau_match, identity], details, verdict=verdict)


def ricci_parallel_einstein(S: ParacontactStructure | None, cache: CurvatureCache | None = None,
                            tol: float = DEFAULT_TOL, metric: MetricField | None = None) -> TheoremReport:
    """``Ric = (tau/3) g`` with constant tau, and ``nabla Ric = 0``.

    The consequence is asserted for xi-concircularly flat alpha-para-Kenmotsu
    manifolds; on other inputs the checks still run but the verdict is
    ``hypothesis-not-met``.
    """
    name = "Ricci-parallel and Einstein"
    hyp = "xi-concircularly flat alpha-para-Kenmotsu 3-manifold"
    if cache is None:
        cache = curvature_cache(S.g if S is not None else metric)
    if cache.dim != 3:
        return _report(name, hyp, False, [], note="dimension is not 3")
    pts = cache.chart.points
    s = cache.sampled
    einstein = compare("Ric = (tau/3) g", s["ricci"], (s["tau"] / 3)[:, None, None] * s["g"], pts, tol * 10)
    tau_const = CheckReport(
        "tau constant", is_constant(s["tau"], tol * 10), float(np.std(s["tau"])), float(np.std(s["tau"])),
        float(np.std(s["tau"])), tol * 10, len(pts),
    )
    ric = TensorField(cache.chart, (0, 2), cache.ricci)
    parallel = nabla_residual(cache, ric, tol * 10, "nabla Ric = 0")
    checks = [einstein, tau_const, parallel]
    met = False
    if S is not None:
        flat = xi_concircular_flat(S, cache, tol)
        met = flat.hypothesis_met and flat.details.get("xi_concircularly_flat", False)
    details = {"is_einstein": einstein.passed and tau_const.passed, "ricci_parallel": parallel.passed}
    return _report(name, hyp, met, checks, details)


def xi_projective_flat(S: ParacontactStructure, cache: CurvatureCache | None = None,
                       tol: float = DEFAULT_TOL) -> TheoremReport:
    """``P(X,Y)xi = 0``. The residual is reported even when the hypothesis fails."""
    name = "xi-projective flatness"
    hyp = "alpha-para-Kenmotsu"
    if S.dim != 3:
        return _report(name, hyp, False, [], note="dimension is not 3")
    cache = _ensure_cache(S, cache)
    h = derive_hypotheses(S, cache, tol)
    s = cache.sampled
    pts = cache.chart.points
    xi = S.xi.sampled(pts)
    E = np.broadcast_to(np.eye(3)[None], (len(pts), 3, 3))
    # n = 1 so the Ricci correction carries a factor 1/2
    model = np.einsum("njk,nli->nlkij", s["ricci"], E) - np.einsum("nik,nlj->nlkij", s["ricci"], E)
    P_xi = np.einsum("nlkij,nk->nlij", s["riemann"] - model / 2, xi)
    check = zero_check("P(X,Y)xi = 0", P_xi, pts, tol * 10)
    return _report(name, hyp, h.alpha_para_kenmotsu, [check], {"classification": h.classification})


def all_theorems(S: ParacontactStructure, cache: CurvatureCache | None = None, tol: float = DEFAULT_TOL):
    cache = _ensure_cache(S, cache)
    return [
        normal_curvature_identities(S, cache, tol),
        kenmotsu_curvature_form(S, cache, tol),
        xi_concircular_flat(S, cache, tol),
        ricci_parallel_einstein(S, cache, tol),
        xi_projective_flat(S, cache, tol),
    ]
