"""Metric geometry on a coordinate chart.

Conventions (fixed, see :data:`CONVENTIONS`):

* curvature ``R(X,Y)Z = nabla_[X,Y] Z - [nabla_X, nabla_Y] Z``, i.e. the
  negative of the usual textbook operator;
* ``Ric(X,Y) = trace(Z -> R(Z,X)Y)`` and ``tau = g^{jk} Ric_jk``.

With these, the warped metric ``diag(e^{2z}, -e^{2z}, 1)`` has ``Ric = 2g``
and ``tau = 6``.

Component layout: ``christoffel[k, i, j]`` is ``Gamma^k_ij``;
``riemann[l, k, i, j]`` is the ``l``-th component of ``R(d_i, d_j) d_k``;
``ricci[j, k]`` is ``Ric(d_j, d_k)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import product

import numpy as np

from .checks import CONTRACTED_TOL, DEFAULT_TOL, CheckReport, compare, zero_check
from .exprcore import (
    ONE,
    ZERO,
    Chart,
    Const,
    Expression,
    as_expr,
    check_index,
    diff,
    evaluate_many,
    is_const,
    sample,
)

CONVENTIONS = {
    "curvature_sign": "R(X,Y)Z = nabla_[X,Y]Z - [nabla_X, nabla_Y]Z (negative of the textbook operator)",
    "ricci_trace": "Ric(X,Y) = sum_ab g^ab g(R(d_a, X)Y, d_b); tau = g^jk Ric_jk",
    "christoffel": "Gamma^k_ij = 1/2 g^kl (d_i g_jl + d_j g_il - d_l g_ij)",
}


class GeometryError(Exception):
    pass


class DegenerateMetricError(GeometryError):
    def __init__(self, message, point=None):
        if point is not None:
            message = f"{message} at point {tuple(float(p) for p in point)}"
        super().__init__(message)
        self.point = point


def expr_sum(terms) -> Expression:
    total = ZERO
    for t in terms:
        total = total + t
    return total


def object_array(shape) -> np.ndarray:
    arr = np.empty(shape, dtype=object)
    arr.fill(ZERO)
    return arr


def _as_object_array(components, shape=None) -> np.ndarray:
    arr = np.empty(np.shape(components), dtype=object)
    for idx in np.ndindex(*arr.shape):
        arr[idx] = as_expr(np.asarray(components, dtype=object)[idx])
    if shape is not None and arr.shape != shape:
        raise ValueError(f"expected component shape {shape}, got {arr.shape}")
    return arr


# --------------------------------------------------------------------------
# field types
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class VectorField:
    chart: Chart
    components: tuple[Expression, ...]

    def __post_init__(self):
        comps = tuple(as_expr(c) for c in self.components)
        if len(comps) != self.chart.dim:
            raise ValueError(f"vector field needs {self.chart.dim} components, got {len(comps)}")
        for c in comps:
            check_index(c, self.chart.dim)
        object.__setattr__(self, "components", comps)

    def __getitem__(self, i):
        return self.components[i]

    def __add__(self, other: "VectorField") -> "VectorField":
        return VectorField(self.chart, [a + b for a, b in zip(self.components, other.components)])

    def __sub__(self, other: "VectorField") -> "VectorField":
        return VectorField(self.chart, [a - b for a, b in zip(self.components, other.components)])

    def scale(self, f) -> "VectorField":
        f = as_expr(f)
        return VectorField(self.chart, [f * c for c in self.components])

    def __neg__(self):
        return self.scale(-1)

    def apply(self, f: Expression) -> Expression:
        """Directional derivative ``X(f)``."""
        return expr_sum(c * diff(f, i) for i, c in enumerate(self.components) if not is_const(c, 0))

    def sampled(self, points=None) -> np.ndarray:
        return sample(list(self.components), self.chart.points if points is None else points)


def coordinate_field(chart: Chart, i: int) -> VectorField:
    comps = [ZERO] * chart.dim
    comps[i] = ONE
    return VectorField(chart, comps)


def coordinate_frame(chart: Chart) -> list[VectorField]:
    return [coordinate_field(chart, i) for i in range(chart.dim)]


@dataclass(frozen=True, eq=False)
class TensorField:
    """Components indexed contravariant slots first, then covariant ones."""

    chart: Chart
    valence: tuple[int, int]
    components: np.ndarray

    def __post_init__(self):
        r, s = self.valence
        shape = (self.chart.dim,) * (r + s)
        arr = _as_object_array(self.components, shape)
        for idx in np.ndindex(*arr.shape):
            check_index(arr[idx], self.chart.dim)
        arr.setflags(write=False)
        object.__setattr__(self, "components", arr)

    def __getitem__(self, idx):
        return self.components[idx]

    def sampled(self, points=None) -> np.ndarray:
        return sample(self.components, self.chart.points if points is None else points)

    def is_symmetric(self) -> bool:
        # (0,2) only
        return all(
            self.components[i, j] == self.components[j, i]
            for i in range(self.chart.dim)
            for j in range(i)
        )


@dataclass(frozen=True, eq=False)
class MetricField:
    chart: Chart
    components: np.ndarray

    def __post_init__(self):
        d = self.chart.dim
        arr = _as_object_array(self.components, (d, d))
        for idx in np.ndindex(d, d):
            check_index(arr[idx], d)
        arr.setflags(write=False)
        object.__setattr__(self, "components", arr)
        for i in range(d):
            for j in range(i):
                a, b = arr[i, j], arr[j, i]
                if a == b:
                    continue
                values = sample([a, b], self.chart.points)
                rel = np.abs(values[:, 0] - values[:, 1]) / np.maximum(1.0, np.abs(values).max(axis=1))
                if rel.max() > DEFAULT_TOL:
                    raise GeometryError(f"metric is not symmetric in components ({i + 1},{j + 1})")

    @classmethod
    def diagonal(cls, chart: Chart, entries) -> "MetricField":
        d = chart.dim
        comps = object_array((d, d))
        for i, e in enumerate(entries):
            comps[i, i] = as_expr(e)
        return cls(chart, comps)

    @property
    def dim(self) -> int:
        return self.chart.dim

    def __getitem__(self, idx):
        return self.components[idx]

    def is_diagonal(self) -> bool:
        d = self.dim
        return all(is_const(self.components[i, j], 0) for i in range(d) for j in range(d) if i != j)

    def as_tensor(self) -> TensorField:
        return TensorField(self.chart, (0, 2), self.components)

    def inner(self, X: VectorField, Y: VectorField) -> Expression:
        d = self.dim
        return expr_sum(
            self.components[i, j] * X[i] * Y[j]
            for i in range(d)
            for j in range(d)
            if not (is_const(self.components[i, j], 0) or is_const(X[i], 0) or is_const(Y[j], 0))
        )

    def sampled(self, points=None) -> np.ndarray:
        return sample(self.components, self.chart.points if points is None else points)


# --------------------------------------------------------------------------
# inverse, signature
# --------------------------------------------------------------------------


def determinant(m: np.ndarray) -> Expression:
    """Laplace expansion along the first row; fine for dim <= 4."""
    n = m.shape[0]
    if n == 1:
        return m[0, 0]
    total = ZERO
    for j in range(n):
        if is_const(m[0, j], 0):
            continue
        minor = np.delete(np.delete(m, 0, axis=0), j, axis=1)
        term = m[0, j] * determinant(minor)
        total = total + term if j % 2 == 0 else total - term
    return total


def _probe_points(chart: Chart) -> np.ndarray:
    """Sample points plus the box corners and centre."""
    box = np.asarray(chart.box, dtype=float)
    corners = np.array(list(product(*box)), dtype=float)
    return np.vstack([chart.points, corners, box.mean(axis=1)[None]])


def _check_nondegenerate(g: MetricField, det: Expression | None = None) -> np.ndarray:
    """|det| > 1e-12 at every probe point and no sign change across the box.

    The determinant is continuous on a connected box, so a sign change
    between two probes means it vanishes somewhere in between.
    """
    pts = _probe_points(g.chart)
    if det is None:
        dets = np.linalg.det(sample(g.components, pts))
    else:
        dets = evaluate_many(det, pts)
    bad = np.abs(dets) <= 1e-12
    if bad.any():
        raise DegenerateMetricError("degenerate metric", pts[np.argmax(bad)])
    if np.any(np.sign(dets) != np.sign(dets[0])):
        k = int(np.argmin(np.abs(dets)))
        raise DegenerateMetricError("metric determinant changes sign inside the box", pts[k])
    return dets


def inverse_metric(g: MetricField) -> TensorField:
    """Symbolic inverse ``g^{ij}`` via adjugate over determinant."""
    d = g.dim
    if d > 4:
        raise GeometryError("symbolic inverse is limited to dimension <= 4")
    m = g.components
    inv = object_array((d, d))
    if g.is_diagonal():
        _check_nondegenerate(g)
        for i in range(d):
            inv[i, i] = ONE / m[i, i]
        return TensorField(g.chart, (2, 0), inv)
    det = determinant(m)
    _check_nondegenerate(g, det)
    for i in range(d):
        for j in range(i, d):
            # adjugate entry (i, j) is the (j, i) cofactor
            minor = np.delete(np.delete(m, j, axis=0), i, axis=1)
            cof = determinant(minor) if d > 1 else ONE
            if (i + j) % 2:
                cof = -cof
            inv[i, j] = inv[j, i] = cof / det
    return TensorField(g.chart, (2, 0), inv)


def signature(g: MetricField) -> tuple[int, int]:
    """(plus, minus) eigenvalue counts; must be constant over the sample box."""
    pts = _probe_points(g.chart)
    eig = np.linalg.eigvalsh(sample(g.components, pts))
    if np.any(np.abs(eig) <= 1e-12):
        k = int(np.argmax(np.any(np.abs(eig) <= 1e-12, axis=1)))
        raise DegenerateMetricError("degenerate metric", pts[k])
    plus = (eig > 0).sum(axis=1)
    if np.any(plus != plus[0]):
        k = int(np.argmax(plus != plus[0]))
        raise DegenerateMetricError("signature changes across the box (degenerate crossing)", pts[k])
    return int(plus[0]), int(g.dim - plus[0])


# --------------------------------------------------------------------------
# connection
# --------------------------------------------------------------------------


def christoffel(g: MetricField, inverse: TensorField | None = None) -> np.ndarray:
    d = g.dim
    ginv = inverse_metric(g) if inverse is None else inverse
    m = g.components
    dg = [[[diff(m[i, j], k) for k in range(d)] for j in range(d)] for i in range(d)]
    # first kind: [ij, l] = 1/2 (d_i g_jl + d_j g_il - d_l g_ij)
    first = object_array((d, d, d))
    half = Const(1) / 2
    for i in range(d):
        for j in range(i, d):
            for l in range(d):
                first[i, j, l] = first[j, i, l] = half * (dg[j][l][i] + dg[i][l][j] - dg[i][j][l])
    gamma = object_array((d, d, d))
    for k in range(d):
        for i in range(d):
            for j in range(i, d):
                val = expr_sum(
                    ginv[k, l] * first[i, j, l]
                    for l in range(d)
                    if not (is_const(ginv[k, l], 0) or is_const(first[i, j, l], 0))
                )
                gamma[k, i, j] = gamma[k, j, i] = val
    return gamma


def lie_bracket(X: VectorField, Y: VectorField) -> VectorField:
    """``[X,Y]^i = X^j d_j Y^i - Y^j d_j X^i``."""
    return VectorField(X.chart, [X.apply(Y[i]) - Y.apply(X[i]) for i in range(X.chart.dim)])


# --------------------------------------------------------------------------
# curvature cache
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CurvatureCache:
    metric: MetricField
    inverse: TensorField
    christoffel: np.ndarray
    riemann: np.ndarray
    ricci: np.ndarray
    tau: Expression

    @property
    def chart(self) -> Chart:
        return self.metric.chart

    @property
    def dim(self) -> int:
        return self.metric.dim

    @cached_property
    def sampled(self) -> dict[str, np.ndarray]:
        """All cached components evaluated at the chart sample points."""
        pts = self.chart.points
        return {
            "g": self.metric.sampled(pts),
            "ginv": self.inverse.sampled(pts),
            "gamma": sample(self.christoffel, pts),
            "riemann": sample(self.riemann, pts),
            "ricci": sample(self.ricci, pts),
            "tau": evaluate_many(self.tau, pts),
        }


def _riemann_components(gamma: np.ndarray, d: int) -> np.ndarray:
    R = object_array((d, d, d, d))
    for l, k in product(range(d), repeat=2):
        for i in range(d):
            for j in range(i + 1, d):
                # textbook R^l_kij, then flip to the operator sign used here
                std = diff(gamma[l, j, k], i) - diff(gamma[l, i, k], j)
                std = std + expr_sum(
                    gamma[l, i, m] * gamma[m, j, k] - gamma[l, j, m] * gamma[m, i, k]
                    for m in range(d)
                )
                R[l, k, i, j] = -std
                R[l, k, j, i] = std
    return R


def curvature_cache(g: MetricField) -> CurvatureCache:
    """Compute Gamma, R, Ric, tau symbolically once for ``g``."""
    d = g.dim
    ginv = inverse_metric(g)
    gamma = christoffel(g, ginv)
    R = _riemann_components(gamma, d)
    ric = object_array((d, d))
    for j in range(d):
        for k in range(j, d):
            ric[j, k] = expr_sum(R[a, k, a, j] for a in range(d))
            if k != j:
                ric[k, j] = expr_sum(R[a, j, a, k] for a in range(d))
    tau = expr_sum(
        ginv[j, k] * ric[j, k]
        for j in range(d)
        for k in range(d)
        if not (is_const(ginv[j, k], 0) or is_const(ric[j, k], 0))
    )
    return CurvatureCache(g, ginv, gamma, R, ric, tau)


# --------------------------------------------------------------------------
# operations on fields
# --------------------------------------------------------------------------


def _nz(*exprs) -> bool:
    return not any(is_const(e, 0) for e in exprs)


def cov_deriv_vector(cache: CurvatureCache, X: VectorField, Y: VectorField) -> VectorField:
    """``(nabla_X Y)^k = X^i (d_i Y^k + Gamma^k_ij Y^j)``."""
    d = cache.dim
    G = cache.christoffel
    out = []
    for k in range(d):
        terms = [X.apply(Y[k])]
        terms += [X[i] * G[k, i, j] * Y[j] for i in range(d) for j in range(d) if _nz(X[i], G[k, i, j], Y[j])]
        out.append(expr_sum(terms))
    return VectorField(X.chart, out)


def cov_deriv_tensor(cache: CurvatureCache, X: VectorField, T: TensorField) -> TensorField:
    """``(nabla_X T)`` for a covariant tensor ``T`` of valence (0, s)."""
    r, s = T.valence
    if r != 0:
        raise ValueError("cov_deriv_tensor expects a covariant tensor")
    d = cache.dim
    G = cache.christoffel
    C = T.components
    out = object_array((d,) * s)
    for idx in np.ndindex(*((d,) * s)):
        terms = [X.apply(C[idx])]
        for slot in range(s):
            for i in range(d):
                if is_const(X[i], 0):
                    continue
                for l in range(d):
                    gam = G[l, i, idx[slot]]
                    moved = idx[:slot] + (l,) + idx[slot + 1:]
                    if _nz(gam, C[moved]):
                        terms.append(-(X[i] * gam * C[moved]))
        out[idx] = expr_sum(terms)
    return TensorField(T.chart, (0, s), out)


def nabla_components(cache: CurvatureCache, T: TensorField) -> np.ndarray:
    """Components ``(nabla_k T)_{...}`` with the derivative index first."""
    d = cache.dim
    frame = coordinate_frame(cache.chart)
    s = T.valence[1]
    out = object_array((d,) + (d,) * s)
    for k in range(d):
        out[k] = cov_deriv_tensor(cache, frame[k], T).components
    return out


def contract_tensor(T: TensorField, *vectors: VectorField) -> Expression:
    """Evaluate a covariant tensor on vector fields."""
    d = T.chart.dim
    terms = []
    for idx in np.ndindex(*((d,) * len(vectors))):
        factors = [T.components[idx]] + [v[i] for v, i in zip(vectors, idx)]
        if _nz(*factors):
            term = factors[0]
            for f in factors[1:]:
                term = term * f
            terms.append(term)
    return expr_sum(terms)


def riemann(cache: CurvatureCache, X: VectorField, Y: VectorField, Z: VectorField) -> VectorField:
    d = cache.dim
    R = cache.riemann
    out = []
    for l in range(d):
        out.append(expr_sum(
            R[l, k, i, j] * X[i] * Y[j] * Z[k]
            for i, j, k in product(range(d), repeat=3)
            if _nz(R[l, k, i, j], X[i], Y[j], Z[k])
        ))
    return VectorField(X.chart, out)


def riemann_lowered(cache, X, Y, Z, W) -> Expression:
    """``R~(X,Y,Z,W) = g(R(X,Y)Z, W)``."""
    return cache.metric.inner(riemann(cache, X, Y, Z), W)


def ricci(cache: CurvatureCache, X: VectorField, Y: VectorField) -> Expression:
    d = cache.dim
    return expr_sum(
        cache.ricci[j, k] * X[j] * Y[k]
        for j in range(d)
        for k in range(d)
        if _nz(cache.ricci[j, k], X[j], Y[k])
    )


def ricci_operator(cache: CurvatureCache) -> TensorField:
    """Mixed components ``S^i_j`` of ``g(SX, Y) = Ric(X, Y)``."""
    d = cache.dim
    S = object_array((d, d))
    for i in range(d):
        for j in range(d):
            S[i, j] = expr_sum(
                cache.inverse[i, k] * cache.ricci[k, j]
                for k in range(d)
                if _nz(cache.inverse[i, k], cache.ricci[k, j])
            )
    return TensorField(cache.chart, (1, 1), S)


def scalar_curvature(cache: CurvatureCache) -> Expression:
    return cache.tau


def _half_dim(cache: CurvatureCache) -> int:
    d = cache.dim
    if d % 2 == 0:
        raise GeometryError(f"odd dimension 2n+1 required, chart has dimension {d}")
    return (d - 1) // 2


def concircular(cache: CurvatureCache, X, Y, Z) -> VectorField:
    """``L(X,Y)Z = R(X,Y)Z - tau / (2n(2n+1)) (g(Y,Z)X - g(X,Z)Y)``."""
    n = _half_dim(cache)
    if n == 0:
        raise GeometryError("concircular tensor needs dimension >= 3")
    g = cache.metric
    coef = cache.tau / (2 * n * (2 * n + 1))
    model = X.scale(g.inner(Y, Z)) - Y.scale(g.inner(X, Z))
    return riemann(cache, X, Y, Z) - model.scale(coef)


def projective(cache: CurvatureCache, X, Y, Z) -> VectorField:
    """``P(X,Y)Z = R(X,Y)Z - 1/(2n) (Ric(Y,Z)X - Ric(X,Z)Y)``."""
    n = _half_dim(cache)
    if n == 0:
        raise GeometryError("projective tensor needs dimension >= 3")
    model = X.scale(ricci(cache, Y, Z)) - Y.scale(ricci(cache, X, Z))
    return riemann(cache, X, Y, Z) - model.scale(Const(1) / (2 * n))


# --------------------------------------------------------------------------
# sampled identity checks
# --------------------------------------------------------------------------


def _lowered(sampled) -> np.ndarray:
    """``R~[i,j,k,w] = g(R(d_i,d_j)d_k, d_w)`` at sample points."""
    return np.einsum("nlkij,nlw->nijkw", sampled["riemann"], sampled["g"])


def three_d_identity_residual(cache: CurvatureCache, tol: float = CONTRACTED_TOL) -> CheckReport:
    """Residual of the 3D decomposition of ``R~`` through Ric and tau."""
    if cache.dim != 3:
        raise GeometryError("the Ricci decomposition identity is specific to dimension 3")
    s = cache.sampled
    g, ric, tau = s["g"], s["ricci"], s["tau"][:, None, None, None, None]
    lhs = _lowered(s)
    # indices n, X=i, Y=j, Z=k, W=w
    rhs = (
        np.einsum("niw,njk->nijkw", g, ric)
        - np.einsum("nik,njw->nijkw", g, ric)
        + np.einsum("njk,niw->nijkw", g, ric)
        - np.einsum("njw,nik->nijkw", g, ric)
        - tau / 2 * (np.einsum("njk,niw->nijkw", g, g) - np.einsum("nik,njw->nijkw", g, g))
    )
    return compare("ricci decomposition in dimension 3", lhs, rhs, cache.chart.points, tol)


def check_christoffel_symmetry(cache: CurvatureCache, tol: float = DEFAULT_TOL) -> CheckReport:
    gam = cache.sampled["gamma"]
    return compare("Gamma^k_ij = Gamma^k_ji", gam, np.swapaxes(gam, 2, 3), cache.chart.points, tol)


def check_metric_compatibility(cache: CurvatureCache, tol: float = DEFAULT_TOL) -> CheckReport:
    comps = nabla_components(cache, cache.metric.as_tensor())
    return zero_check("nabla g = 0", sample(comps, cache.chart.points), cache.chart.points, tol)


def check_riemann_antisymmetry(cache: CurvatureCache, tol: float = CONTRACTED_TOL) -> CheckReport:
    R = cache.sampled["riemann"]
    return compare("R(X,Y)Z = -R(Y,X)Z", R, -np.swapaxes(R, 3, 4), cache.chart.points, tol)


def check_lowered_antisymmetry(cache: CurvatureCache, tol: float = CONTRACTED_TOL) -> CheckReport:
    low = _lowered(cache.sampled)
    return compare("R~(X,Y,Z,W) = -R~(X,Y,W,Z)", low, -np.swapaxes(low, 3, 4), cache.chart.points, tol)


def check_first_bianchi(cache: CurvatureCache, tol: float = CONTRACTED_TOL) -> CheckReport:
    R = cache.sampled["riemann"]  # n, l, k, i, j  ->  R(d_i, d_j) d_k
    total = (
        np.einsum("nlkij->nlijk", R)
        + np.einsum("nlijk->nlijk", R)   # R(d_j, d_k) d_i
        + np.einsum("nljki->nlijk", R)   # R(d_k, d_i) d_j
    )
    return zero_check("first Bianchi identity", total, cache.chart.points, tol)


def check_ricci_symmetry(cache: CurvatureCache, tol: float = DEFAULT_TOL) -> CheckReport:
    ric = cache.sampled["ricci"]
    return compare("Ric(X,Y) = Ric(Y,X)", ric, np.swapaxes(ric, 1, 2), cache.chart.points, tol)


def curvature_self_checks(cache: CurvatureCache, tol: float = DEFAULT_TOL) -> list[CheckReport]:
    reports = [
        check_christoffel_symmetry(cache, tol),
        check_metric_compatibility(cache, tol),
        check_riemann_antisymmetry(cache, tol * 10),
        check_first_bianchi(cache, tol * 10),
        check_ricci_symmetry(cache, tol),
    ]
    if cache.dim == 3:
        reports.append(three_d_identity_residual(cache, tol * 10))
    return reports
