"""Paracontact structure: axioms, normality and the functions alpha, beta."""
from paracurv.chartcalc import curvature_cache
from paracurv.definitions import load_bundled, loads
from paracurv.exprcore import render
from paracurv.paracontact import alpha_beta, check_axioms, classify, normality_residual


def show(defn):
    S = defn.structure()
    cache = curvature_cache(S.g)
    print(f"== {defn.name}")
    for r in check_axioms(S):
        print(f"  {'ok  ' if r.passed else 'FAIL'} {r.name}")
    n = normality_residual(S)
    print(f"  normal: {n.passed} (max rel {n.max_rel:.1e})")
    f = alpha_beta(S, cache)
    # the symbolic form is not always reduced, so show the sampled value too
    for label, e, v in (("alpha", f.alpha, f.alpha_values), ("beta", f.beta, f.beta_values)):
        text = render(e)
        print(f"  {label} = {text if len(text) < 30 else '...'}  (sampled {v.mean():.12g})")
    print(f"  classification: {classify(f)}")


for name in ("para_kenmotsu_s5", "para_kenmotsu_alpha2", "paracosymplectic_flat"):
    show(load_bundled(name))

# a Heisenberg-type metric gives alpha = 0 and a nonzero beta
heisenberg = """
[chart]
name = heisenberg
coordinates = x, y, z
x = -1, 1
y = -1, 1
z = -1, 1

[metric]
g 1 1 = 1 + y^2
g 2 1 = 0
g 2 2 = -1
g 3 1 = -y
g 3 2 = 0
g 3 3 = 1

[phi]
phi 1 2 = 1
phi 2 1 = 1
phi 3 2 = y

[xi]
xi 3 = 1

[eta]
eta 1 = -y
eta 3 = 1
"""
show(loads(heisenberg))
