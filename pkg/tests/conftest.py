import pytest

from paracurv.chartcalc import MetricField, curvature_cache, object_array
from paracurv.exprcore import Chart, parse
from paracurv.paracontact import ParacontactStructure

XYZ = ("x", "y", "z")


def chart(box=((-1, 1), (-1, 1), (-1, 1)), samples=32, seed=0):
    return Chart(XYZ, box, samples=samples, seed=seed)


def metric(c, rows):
    """Metric from a nested list of expression strings."""
    d = c.dim
    comps = object_array((d, d))
    for i in range(d):
        for j in range(d):
            comps[i, j] = parse(str(rows[i][j]), c)
    return MetricField(c, comps)


def diag_metric(c, entries):
    return MetricField.diagonal(c, [parse(str(e), c) for e in entries])


def structure(g, phi=((0, 1, 0), (1, 0, 0), (0, 0, 0)), xi=(0, 0, 1), eta=(0, 0, 1)):
    c = g.chart
    P = object_array((3, 3))
    for i in range(3):
        for j in range(3):
            P[i, j] = parse(str(phi[i][j]), c)
    return ParacontactStructure.from_components(
        g, P, [parse(str(v), c) for v in xi], [parse(str(v), c) for v in eta]
    )


@pytest.fixture(scope="session")
def s5_chart():
    return chart()


@pytest.fixture(scope="session")
def s5_metric(s5_chart):
    return diag_metric(s5_chart, ["exp(2*z)", "-exp(2*z)", "1"])


@pytest.fixture(scope="session")
def s5_cache(s5_metric):
    return curvature_cache(s5_metric)


@pytest.fixture(scope="session")
def s5(s5_metric):
    return structure(s5_metric)


@pytest.fixture(scope="session")
def flat_metric():
    return diag_metric(chart(), ["1", "-1", "1"])


@pytest.fixture(scope="session")
def flat_cache(flat_metric):
    return curvature_cache(flat_metric)


@pytest.fixture(scope="session")
def flat(flat_metric):
    return structure(flat_metric)


@pytest.fixture(scope="session")
def alpha2_metric():
    return diag_metric(chart(), ["exp(4*z)", "-exp(4*z)", "1"])


@pytest.fixture(scope="session")
def alpha2_cache(alpha2_metric):
    return curvature_cache(alpha2_metric)


@pytest.fixture(scope="session")
def alpha2(alpha2_metric):
    return structure(alpha2_metric)


def heisenberg(c, ch=None):
    """Frame e1 = d_x + c y d_z, e2 = d_y, e3 = d_z, orthonormal with signs (+,-,+),
    phi swapping e1 and e2, xi = d_z, eta = dz - c y dx. alpha = 0 and beta = -c/2."""
    ch = ch or chart()
    cy = f"({c})*y"
    g = metric(ch, [
        [f"1 + ({c})^2*y^2", "0", f"-{cy}"],
        ["0", "-1", "0"],
        [f"-{cy}", "0", "1"],
    ])
    return structure(g, phi=(("0", "1", "0"), ("1", "0", "0"), ("0", cy, "0")), xi=(0, 0, 1), eta=(f"-{cy}", 0, 1))
