"""Full check pipeline for a manifold definition, plus text/JSON reports."""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .checks import DEFAULT_TOL, CheckReport, all_passed
from .chartcalc import CONVENTIONS, curvature_cache, curvature_self_checks
from .definitions import ManifoldDefinition
from .exprcore import render
from .paracontact import DETA_CONVENTION, alpha_beta, check_axioms, classify, normality_residual
from .theorems import (
    FAILED,
    NOT_MET,
    TheoremReport,
    kenmotsu_curvature_form,
    normal_curvature_identities,
    parallel_check,
    ricci_parallel_einstein,
    xi_concircular_flat,
    xi_projective_flat,
)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_PARSE = 2
EXIT_AXIOMS = 3
EXIT_THEOREMS = 4

SEED_ENV = "PARACURV_SEED"


def conventions() -> dict[str, str]:
    return {**CONVENTIONS, "d_eta": DETA_CONVENTION}


@dataclass
class RunOptions:
    seed: int | None = None
    samples: int | None = None
    tol: float | None = None


@dataclass
class RunReport:
    name: str
    version: str
    seed: int
    samples: int
    tol: float
    conventions: dict
    curvature: dict
    curvature_checks: list[CheckReport]
    axioms: list[CheckReport] | None = None
    normality: CheckReport | None = None
    alpha: dict | None = None
    beta: dict | None = None
    classification: str | None = None
    reconstruction: CheckReport | None = None
    theorems: list[TheoremReport] = field(default_factory=list)
    skipped: list[str] = field(default_factory=list)

    @property
    def axioms_ok(self) -> bool:
        return self.axioms is None or all_passed(self.axioms)

    @property
    def verification_ok(self) -> bool:
        return all_passed(self.curvature_checks) and all(t.verdict != FAILED for t in self.theorems)

    @property
    def passed(self) -> bool:
        return self.axioms_ok and self.verification_ok

    @property
    def exit_code(self) -> int:
        if not self.axioms_ok:
            return EXIT_AXIOMS
        if not self.verification_ok:
            return EXIT_THEOREMS
        return EXIT_OK


def _resolve_seed(options: RunOptions, defn: ManifoldDefinition) -> int:
    if options.seed is not None:
        return options.seed
    if "seed" in defn.options:
        return int(defn.options["seed"])
    env = os.environ.get(SEED_ENV)
    if env:
        return int(env)
    return 0


def _function_summary(expr, values) -> dict:
    return {
        "expression": render(expr),
        "mean": float(np.mean(values)),
        "min": float(np.min(values)),
        "max": float(np.max(values)),
    }


def run(defn: ManifoldDefinition, options: RunOptions | None = None) -> RunReport:
    """axioms -> normality -> alpha/beta -> classify -> curvature -> theorems -> parallel checks."""
    options = options or RunOptions()
    seed = _resolve_seed(options, defn)
    samples = options.samples if options.samples is not None else int(defn.options.get("samples", 32))
    tol = options.tol if options.tol is not None else float(defn.options.get("tol", DEFAULT_TOL))
    chart = defn.chart.with_sampling(samples=samples, seed=seed)

    g = defn.metric_field(chart)
    cache = curvature_cache(g)
    tau = cache.sampled["tau"]
    curvature = {
        "tau": _function_summary(cache.tau, tau),
        "tau_sampled_max_dev": float(np.max(np.abs(tau - np.mean(tau)))),
    }
    report = RunReport(
        name=defn.name, version=__version__, seed=seed, samples=samples, tol=tol,
        conventions=conventions(), curvature=curvature,
        curvature_checks=curvature_self_checks(cache, tol),
    )

    S = defn.structure(chart)
    tensors = defn.tensor_fields(chart)
    if S is None:
        report.skipped.append("structure checks: no [phi]/[xi]/[eta] blocks")
        if chart.dim == 3:
            report.theorems.append(ricci_parallel_einstein(None, cache, tol))
        report.theorems += _parallel_reports(None, cache, tensors, tol)
        return report

    report.axioms = check_axioms(S, tol)
    if not all_passed(report.axioms):
        report.skipped.append("normality, alpha/beta, theorems: axioms failed")
        return report
    report.normality = normality_residual(S, tol)
    if chart.dim == 3 and report.normality.passed:
        f = alpha_beta(S, cache, tol)
        report.alpha = {**_function_summary(f.alpha, f.alpha_values), "constant": f.alpha_is_constant}
        report.beta = {**_function_summary(f.beta, f.beta_values), "constant": f.beta_is_constant}
        report.classification = classify(f)
        report.reconstruction = f.reconstruction
    elif chart.dim != 3:
        report.skipped.append("alpha/beta: defined for 3-manifolds only")
    else:
        report.skipped.append("alpha/beta: structure is not normal")

    if chart.dim == 3:
        report.theorems += [
            normal_curvature_identities(S, cache, tol),
            kenmotsu_curvature_form(S, cache, tol),
            xi_concircular_flat(S, cache, tol),
            ricci_parallel_einstein(S, cache, tol),
            xi_projective_flat(S, cache, tol),
        ]
    report.theorems += _parallel_reports(S, cache, tensors, tol)
    return report


def _parallel_reports(S, cache, tensors, tol) -> list[TheoremReport]:
    out = []
    for name, h in tensors.items():
        t = parallel_check(S, cache, h, tol)
        t.details["tensor"] = name
        out.append(t)
    return out


# --------------------------------------------------------------------------
# rendering
# --------------------------------------------------------------------------


def _round(obj):
    """15 significant digits for every float; non-finite values become strings."""
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if not math.isfinite(v):
            return str(v)
        return float(f"{v:.15g}")
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


def as_dict(r: RunReport) -> dict:
    out = {
        "name": r.name,
        "version": r.version,
        "seed": r.seed,
        "samples": r.samples,
        "tol": r.tol,
        "conventions": r.conventions,
    }
    if r.axioms is not None:
        out["axioms"] = [c.as_dict() for c in r.axioms]
        out["normality"] = r.normality.as_dict() if r.normality else None
        out["alpha"] = r.alpha
        out["beta"] = r.beta
        out["classification"] = r.classification
        out["reconstruction"] = r.reconstruction.as_dict() if r.reconstruction else None
    out["tau"] = r.curvature["tau"]
    out["tau_sampled_max_dev"] = r.curvature["tau_sampled_max_dev"]
    out["curvature_checks"] = [c.as_dict() for c in r.curvature_checks]
    out["theorems"] = [t.as_dict() for t in r.theorems]
    out["skipped"] = r.skipped
    out["pass"] = r.passed
    return _round(out)


def _g(v: float) -> str:
    return f"{v:.15g}"


def _check_line(c: CheckReport) -> str:
    status = "ok  " if c.passed else "FAIL"
    return f"  [{status}] {c.name}: max rel {c.max_rel:.3g} (abs {c.max_abs:.3g}, tol {c.tol:g})"


def _text(r: RunReport) -> str:
    out = [f"paracurv {r.version} -- {r.name}", f"samples = {r.samples}, seed = {r.seed}, tol = {r.tol:g}", ""]
    out.append("== conventions")
    out += [f"  {k}: {v}" for k, v in r.conventions.items()]
    if r.axioms is not None:
        out += ["", "== axioms"]
        out += [_check_line(c) for c in r.axioms]
        if r.normality is not None:
            out += ["", "== normality", _check_line(r.normality)]
        if r.alpha is not None:
            out += ["", "== structure functions"]
            for label, f in (("alpha", r.alpha), ("beta", r.beta)):
                kind = "constant" if f["constant"] else "non-constant"
                out.append(f"  {label} = {f['expression']}  (sampled {_g(f['mean'])}, {kind})")
            out.append(_check_line(r.reconstruction))
            out.append(f"  classification: {r.classification}")
    out += ["", "== curvature"]
    tau = r.curvature["tau"]
    if r.alpha is not None:
        out.append(f"tau = {_g(tau['mean'])} (expected 6*alpha^2 = {_g(6 * r.alpha['mean'] ** 2)})")
    else:
        out.append(f"tau = {_g(tau['mean'])}")
    out.append(f"  tau range [{_g(tau['min'])}, {_g(tau['max'])}]")
    out += [_check_line(c) for c in r.curvature_checks]
    if r.theorems:
        out += ["", "== theorems"]
        for t in r.theorems:
            label = t.theorem + (f" [{t.details['tensor']}]" if "tensor" in t.details else "")
            verdict = "SKIPPED (hypothesis not met)" if t.verdict == NOT_MET else t.verdict
            out.append(f"  {label}: {verdict}")
            out += ["  " + _check_line(c) for c in t.checks]
            if t.note:
                out.append(f"      note: {t.note}")
    if r.skipped:
        out += ["", "== skipped"]
        out += [f"  {s}" for s in r.skipped]
    out += ["", f"overall: {'PASS' if r.passed else 'FAIL'}"]
    return "\n".join(out) + "\n"


def report(r: RunReport, format: str = "text") -> str:
    if format == "json":
        return json.dumps(as_dict(r), indent=2) + "\n"
    if format == "text":
        return _text(r)
    raise ValueError(f"unknown report format {format!r}")
