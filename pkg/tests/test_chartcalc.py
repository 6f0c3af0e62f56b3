import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings

from conftest import chart, diag_metric, metric
from strategies import diagonal_metrics
from sympy_oracle import curvature as oracle_curvature
from sympy_oracle import lambdify

from paracurv.chartcalc import (
    DegenerateMetricError,
    GeometryError,
    MetricField,
    TensorField,
    VectorField,
    check_christoffel_symmetry,
    check_first_bianchi,
    check_lowered_antisymmetry,
    check_metric_compatibility,
    check_ricci_symmetry,
    check_riemann_antisymmetry,
    concircular,
    coordinate_frame,
    cov_deriv_tensor,
    cov_deriv_vector,
    curvature_cache,
    inverse_metric,
    lie_bracket,
    object_array,
    projective,
    ricci,
    ricci_operator,
    riemann,
    riemann_lowered,
    scalar_curvature,
    signature,
    three_d_identity_residual,
)
from paracurv.exprcore import Chart, equal_numeric, evaluate_many, parse, sample

TOL = 1e-9


def close(expr, expected, c, tol=TOL):
    ok, res = equal_numeric(expr, parse(expected, c) if isinstance(expected, str) else expected, c, tol)
    assert ok, res


def vclose(V, expected, c, tol=TOL):
    for comp, e in zip(V.components, expected):
        close(comp, str(e), c, tol)


def field(c, comps):
    return VectorField(c, [parse(str(s), c) for s in comps])


# -- inverse and signature ---------------------------------------------------


def test_inverse_of_example_metric(s5_metric, s5_chart):
    inv = inverse_metric(s5_metric).components
    for (i, j), e in {(0, 0): "exp(-2*z)", (1, 1): "-exp(-2*z)", (2, 2): "1", (0, 1): "0", (1, 2): "0"}.items():
        close(inv[i, j], e, s5_chart)


def test_inverse_identity():
    c = chart()
    inv = inverse_metric(diag_metric(c, [1, 1, 1])).components
    assert np.array_equal(sample(inv, c.points), np.broadcast_to(np.eye(3), (32, 3, 3)))


def test_inverse_general_metric_by_adjugate():
    c = chart()
    g = metric(c, [["2 + x^2", "x", "0"], ["x", "-1", "y/2"], ["0", "y/2", "exp(z)"]])
    inv = inverse_metric(g)
    prod = np.einsum("nik,nkj->nij", inv.sampled(), g.sampled())
    np.testing.assert_allclose(prod, np.broadcast_to(np.eye(3), prod.shape), atol=1e-12)


def test_degenerate_metric_example():
    c = chart()
    with pytest.raises(DegenerateMetricError) as info:
        inverse_metric(diag_metric(c, ["z", "1", "1"]))
    assert info.value.point is not None


def test_degenerate_metric_on_sample_point():
    c = chart()
    z0 = float(c.points[5, 2])
    g = diag_metric(c, ["1", "1", f"(z - ({z0!r}))^2 + 1"])
    inverse_metric(g)
    g = diag_metric(c, ["1", "1", f"(z - ({z0!r}))^2"])
    with pytest.raises(DegenerateMetricError) as info:
        inverse_metric(g)
    assert info.value.point[2] == z0


def test_signature_examples(s5_metric):
    c = chart()
    assert signature(s5_metric) == (2, 1)
    assert signature(diag_metric(c, [1, 1, 1])) == (3, 0)
    assert signature(diag_metric(c, [1, -1, -1])) == (1, 2)


def test_signature_change_is_an_error():
    c = chart()
    with pytest.raises(GeometryError):
        signature(diag_metric(c, ["1", "1", "z + 1/1000"]))


def test_asymmetric_metric_rejected():
    c = chart()
    with pytest.raises(GeometryError):
        metric(c, [["1", "x", "0"], ["y", "-1", "0"], ["0", "0", "1"]])


def _five_by_five(c):
    # non-diagonal so the adjugate path is taken
    comps = object_array((5, 5))
    for i in range(5):
        comps[i, i] = parse("2", c)
    comps[0, 1] = comps[1, 0] = parse("a", c)
    return comps


def test_inverse_dimension_limit():
    c = Chart(tuple("abcde"), ((0, 1),) * 5)
    g = MetricField(c, _five_by_five(c))
    with pytest.raises(GeometryError):
        inverse_metric(g)


# -- connection -------------------------------------------------------------

EXAMPLE_GAMMA = {(2, 0, 0): "-exp(2*z)", (2, 1, 1): "exp(2*z)", (0, 0, 2): "1", (0, 2, 0): "1", (1, 1, 2): "1", (1, 2, 1): "1"}


def test_example_christoffel_table(s5_cache, s5_chart):
    G = s5_cache.christoffel
    for idx in np.ndindex(3, 3, 3):
        close(G[idx], EXAMPLE_GAMMA.get(idx, "0"), s5_chart)


def test_flat_christoffel(flat_cache):
    assert np.all(sample(flat_cache.christoffel, flat_cache.chart.points) == 0)


def test_alpha2_christoffel(alpha2_cache):
    close(alpha2_cache.christoffel[0, 0, 2], "2", alpha2_cache.chart)


def test_alpha2_metric_compatibility_by_finite_differences(alpha2_cache):
    # d_k g_ij = Gamma^l_ki g_lj + Gamma^l_kj g_il, checked with central differences of g
    c = alpha2_cache.chart
    pts = c.points
    h = 1e-6
    G = sample(alpha2_cache.christoffel, pts)
    g = alpha2_cache.sampled["g"]
    rhs = np.einsum("nlki,nlj->nkij", G, g) + np.einsum("nlkj,nil->nkij", G, g)
    for k in range(3):
        step = np.zeros(3)
        step[k] = h
        fd = (sample(alpha2_cache.metric.components, pts + step) - sample(alpha2_cache.metric.components, pts - step)) / (2 * h)
        np.testing.assert_allclose(fd, rhs[:, k], rtol=1e-6, atol=1e-6)


def test_lie_bracket_examples():
    c = chart()
    ex, _, ez = coordinate_frame(c)
    vclose(lie_bracket(ex, ez), [0, 0, 0], c)
    vclose(lie_bracket(field(c, ["x", 0, 0]), ex), ["-1", 0, 0], c)
    vclose(lie_bracket(ez, field(c, ["exp(z)", 0, 0])), ["exp(z)", 0, 0], c)


def test_lie_bracket_antisymmetric():
    c = chart()
    X = field(c, ["x*y", "sin(z)", "1"])
    Y = field(c, ["exp(x)", "y^2", "x*z"])
    vclose(lie_bracket(X, Y) + lie_bracket(Y, X), [0, 0, 0], c)


def test_cov_deriv_vector_examples(s5_cache, flat_cache):
    c = s5_cache.chart
    e1, e2, e3 = coordinate_frame(c)
    vclose(cov_deriv_vector(s5_cache, e1, e3), ["1", 0, 0], c)
    vclose(cov_deriv_vector(s5_cache, e2, e2), [0, 0, "exp(2*z)"], c)
    f1, f2, _ = coordinate_frame(flat_cache.chart)
    vclose(cov_deriv_vector(flat_cache, f1, f2), [0, 0, 0], flat_cache.chart)


def test_connection_table(s5_cache):
    c = s5_cache.chart
    e = coordinate_frame(c)
    table = {
        (0, 0): [0, 0, "-exp(2*z)"], (0, 1): [0, 0, 0], (0, 2): ["1", 0, 0],
        (1, 0): [0, 0, 0], (1, 1): [0, 0, "exp(2*z)"], (1, 2): [0, "1", 0],
        (2, 0): ["1", 0, 0], (2, 1): [0, "1", 0], (2, 2): [0, 0, 0],
    }
    for (i, j), expected in table.items():
        vclose(cov_deriv_vector(s5_cache, e[i], e[j]), expected, c)


def test_cov_deriv_tensor_examples(s5_cache, s5_metric):
    c = s5_cache.chart
    e1, _, e3 = coordinate_frame(c)
    for T in (s5_metric.as_tensor(), TensorField(c, (0, 2), s5_metric.components * 5)):
        for X in coordinate_frame(c):
            assert np.abs(cov_deriv_tensor(s5_cache, X, T).sampled()).max() <= 1e-12
    eta_eta = object_array((3, 3))
    eta_eta[2, 2] = parse("1", c)
    D = cov_deriv_tensor(s5_cache, e1, TensorField(c, (0, 2), eta_eta)).components
    close(D[0, 2], "exp(2*z)", c)
    close(D[2, 0], "exp(2*z)", c)


def _fd_nabla(metric_fn, h_fn, pts, step=1e-5):
    """(nabla_k h)_ij from central differences only: Gamma from d g, then d h."""
    def d(fn, p, k):
        e = np.zeros(3)
        e[k] = step
        return (fn(p + e) - fn(p - e)) / (2 * step)

    out = []
    for p in pts:
        g = metric_fn(p)
        ginv = np.linalg.inv(g)
        dg = np.array([d(metric_fn, p, k) for k in range(3)])  # dg[k, i, j] = d_k g_ij
        gam = 0.5 * np.einsum("kl,ijl->kij", ginv, _koszul(dg))
        h = h_fn(p)
        dh = np.array([d(h_fn, p, k) for k in range(3)])
        out.append(dh - np.einsum("mki,mj->kij", gam, h) - np.einsum("mkj,im->kij", gam, h))
    return np.array(out)


def _koszul(dg):
    # K[i, j, l] = d_i g_jl + d_j g_il - d_l g_ij
    return dg + dg.transpose(1, 0, 2) - dg.transpose(1, 2, 0)


@pytest.mark.parametrize(
    "name, comps",
    [
        ("eta_eta", {(2, 2): "1"}),
        ("dx_dy", {(0, 1): "1", (1, 0): "-1"}),
        ("mixed", {(0, 0): "x*z", (0, 2): "sin(y)", (2, 0): "sin(y)", (1, 2): "exp(z)"}),
    ],
)
def test_nabla_tensor_against_finite_differences(s5_cache, name, comps):
    from paracurv.chartcalc import nabla_components

    c = s5_cache.chart
    T = object_array((3, 3))
    for (i, j), e in comps.items():
        T[i, j] = parse(e, c)
    T = TensorField(c, (0, 2), T)
    ours = sample(nabla_components(s5_cache, T), c.points)
    metric_fn = lambda p: np.diag([np.exp(2 * p[2]), -np.exp(2 * p[2]), 1.0])  # noqa: E731
    h_fn = lambda p: sample(T.components, p[None])[0]  # noqa: E731
    fd = _fd_nabla(metric_fn, h_fn, c.points)
    np.testing.assert_allclose(ours, fd, rtol=1e-6, atol=1e-6)
    if name == "eta_eta":
        # (nabla_{e1} h)(e1, e3) = exp(2z)
        np.testing.assert_allclose(fd[:, 0, 0, 2], np.exp(2 * c.points[:, 2]), rtol=1e-6)


# -- curvature ----------------------------------------------------------------

# the example's curvature table, R(e_i, e_j) e_k
EXAMPLE_R = {
    (0, 2, 0): [0, 0, "-exp(2*z)"],
    (0, 1, 1): ["-exp(2*z)", 0, 0],
    (0, 1, 0): [0, "-exp(2*z)", 0],
    (1, 2, 1): [0, 0, "exp(2*z)"],
    (0, 2, 2): ["1", 0, 0],
    (1, 2, 2): [0, "1", 0],
    (1, 2, 0): [0, 0, 0],
    (0, 2, 1): [0, 0, 0],
}


@pytest.mark.parametrize("ijk", sorted(EXAMPLE_R))
def test_example_curvature_table(s5_cache, ijk):
    c = s5_cache.chart
    e = coordinate_frame(c)
    i, j, k = ijk
    vclose(riemann(s5_cache, e[i], e[j], e[k]), EXAMPLE_R[ijk], c)


def test_r12_xi_vanishes(s5_cache):
    # R~(e1, e2, e3, e3) = 0 by antisymmetry, so R(e1,e2)e3 has no e3 part
    c = s5_cache.chart
    e = coordinate_frame(c)
    vclose(riemann(s5_cache, e[0], e[1], e[2]), [0, 0, 0], c)


def test_flat_curvature_vanishes(flat_cache):
    s = flat_cache.sampled
    for key in ("riemann", "ricci", "tau"):
        assert np.all(s[key] == 0)


def test_riemann_lowered_examples(s5_cache):
    c = s5_cache.chart
    e1, e2, e3 = coordinate_frame(c)
    close(riemann_lowered(s5_cache, e1, e3, e3, e1), "exp(2*z)", c)
    X = VectorField(c, [parse(s, c) for s in ("x", "1", "y")])
    close(riemann_lowered(s5_cache, X, X, e2, e1), "0", c)


def test_ricci_and_scalar(s5_cache, flat_cache):
    c = s5_cache.chart
    e = coordinate_frame(c)
    assert scalar_curvature(s5_cache) == parse("6", c)
    close(ricci(s5_cache, e[2], e[2]), "2", c)
    np.testing.assert_allclose(s5_cache.sampled["ricci"], 2 * s5_cache.sampled["g"], rtol=1e-12, atol=0)
    S = ricci_operator(s5_cache).sampled()
    np.testing.assert_allclose(S, np.broadcast_to(2 * np.eye(3), S.shape), atol=1e-12)
    assert np.all(flat_cache.sampled["tau"] == 0)


def test_concircular_examples(s5_cache, flat_cache):
    c = s5_cache.chart
    e1, e2, e3 = coordinate_frame(c)
    vclose(concircular(s5_cache, e1, e2, e3), [0, 0, 0], c)
    vclose(concircular(s5_cache, e1, e2, e2), [0, 0, 0], c)
    f = coordinate_frame(flat_cache.chart)
    vclose(concircular(flat_cache, f[0], f[1], f[2]), [0, 0, 0], flat_cache.chart)


def test_projective_examples(s5_cache, flat_cache):
    c = s5_cache.chart
    e1, e2, e3 = coordinate_frame(c)
    vclose(projective(s5_cache, e1, e2, e3), [0, 0, 0], c)
    vclose(projective(s5_cache, e1, e3, e3), [0, 0, 0], c)
    f = coordinate_frame(flat_cache.chart)
    vclose(projective(flat_cache, f[0], f[2], f[2]), [0, 0, 0], flat_cache.chart)


def test_even_dimension_rejected():
    c = Chart(("x", "y"), ((0, 1), (0, 1)))
    cache = curvature_cache(MetricField.diagonal(c, [parse("1", c), parse("exp(x)", c)]))
    e = coordinate_frame(c)
    with pytest.raises(GeometryError):
        concircular(cache, *e, e[0])
    with pytest.raises(GeometryError):
        projective(cache, *e, e[0])


def test_concircular_projective_are_tensorial():
    c = chart()
    cache = curvature_cache(diag_metric(c, ["exp(2*z)", "-exp(2*z)", "1 + x^2"]))
    e1, e2, e3 = coordinate_frame(c)
    f = parse("2 + sin(x*y)", c)
    for op in (concircular, projective):
        lhs = op(cache, e1.scale(f), e2 + e3, e3).sampled()
        rhs = op(cache, e1, e2 + e3, e3).sampled() * evaluate_many(f, c.points)[:, None]
        np.testing.assert_allclose(lhs, rhs, rtol=1e-12, atol=1e-12)


def test_three_d_identity_examples(s5_cache, flat_cache):
    r = three_d_identity_residual(s5_cache)
    assert r.passed and r.max_rel <= 1e-9
    r = three_d_identity_residual(flat_cache)
    assert r.passed and r.max_rel == 0
    other = curvature_cache(diag_metric(chart(), ["exp(2*z)", "-exp(2*z)", "1 + x^2"]))
    assert three_d_identity_residual(other).passed


def test_three_d_identity_is_not_vacuous():
    # same check, curvature with the opposite sign, must fail
    c = chart()
    cache = curvature_cache(diag_metric(c, ["exp(2*z)", "-exp(2*z)", "1 + x^2"]))
    s = dict(cache.sampled)
    flipped = type(cache)(cache.metric, cache.inverse, cache.christoffel, -cache.riemann, cache.ricci, cache.tau)
    flipped.__dict__["sampled"] = {**s, "riemann": -s["riemann"]}
    assert not three_d_identity_residual(flipped).passed


# -- independent oracle ---------------------------------------------------------

x, y, z = sp.symbols("x y z", real=True)

ORACLE_METRICS = {
    "example": [[sp.exp(2 * z), 0, 0], [0, -sp.exp(2 * z), 0], [0, 0, 1]],
    "alpha2": [[sp.exp(4 * z), 0, 0], [0, -sp.exp(4 * z), 0], [0, 0, 1]],
    "warped": [[sp.exp(2 * z), 0, 0], [0, -sp.exp(2 * z), 0], [0, 0, 1 + x**2]],
    "offdiag": [[2 + x**2, x, 0], [x, -1, y / 2], [0, y / 2, sp.exp(z)]],
}


@pytest.mark.parametrize("name", sorted(ORACLE_METRICS))
def test_curvature_against_sympy(name):
    rows = ORACLE_METRICS[name]
    c = chart(samples=12, seed=4)
    cache = curvature_cache(metric(c, [[sp.sstr(v).replace("**", "^") for v in r] for r in rows]))
    o = oracle_curvature(rows)
    pts = c.points
    args = (pts[:, 0], pts[:, 1], pts[:, 2])

    def num(expr):
        return np.broadcast_to(np.asarray(lambdify(expr)(*args), dtype=float), (len(pts),))

    s = cache.sampled
    gam = np.stack([num(o["gamma"][k][i][j]) for k, i, j in np.ndindex(3, 3, 3)], axis=1).reshape(-1, 3, 3, 3)
    np.testing.assert_allclose(s["gamma"], gam, rtol=1e-10, atol=1e-10)
    R = np.stack([num(o["riemann"][idx]) for idx in np.ndindex(3, 3, 3, 3)], axis=1).reshape(-1, 3, 3, 3, 3)
    np.testing.assert_allclose(s["riemann"], R, rtol=1e-9, atol=1e-9)
    ric = np.stack([num(o["ricci"][j, k]) for j, k in np.ndindex(3, 3)], axis=1).reshape(-1, 3, 3)
    np.testing.assert_allclose(s["ricci"], ric, rtol=1e-9, atol=1e-9)
    np.testing.assert_allclose(s["tau"], num(o["tau"]), rtol=1e-9, atol=1e-9)


def test_alpha2_frozen_oracle_values(alpha2_cache):
    # certified with tests/sympy_oracle.py: tau = 24, Ric = 8 g, Gamma^3_11 = -2 exp(4z)
    c = alpha2_cache.chart
    close(alpha2_cache.tau, "24", c)
    close(alpha2_cache.christoffel[2, 0, 0], "-2*exp(4*z)", c)
    np.testing.assert_allclose(alpha2_cache.sampled["ricci"], 8 * alpha2_cache.sampled["g"], rtol=1e-12)


# -- properties -----------------------------------------------------------------


@settings(max_examples=100, deadline=None)
@given(diagonal_metrics())
def test_curvature_identities_random_metrics(case):
    g, _ = case
    cache = curvature_cache(g)
    assert check_christoffel_symmetry(cache).passed
    assert check_metric_compatibility(cache, 1e-9).passed
    assert check_riemann_antisymmetry(cache, 1e-8).passed
    assert check_lowered_antisymmetry(cache, 1e-8).passed
    assert check_first_bianchi(cache, 1e-8).passed
    assert check_ricci_symmetry(cache, 1e-9).passed
    assert three_d_identity_residual(cache, 1e-8).passed
