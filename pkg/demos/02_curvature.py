"""Connection and curvature of the warped metric diag(e^2z, -e^2z, 1)."""
import numpy as np

from paracurv.chartcalc import coordinate_frame, curvature_cache, riemann, ricci, signature
from paracurv.definitions import load_bundled
from paracurv.exprcore import render, sample, simplify

defn = load_bundled("para_kenmotsu_s5")
g = defn.metric_field()
print("signature", signature(g))

cache = curvature_cache(g)
names = defn.chart.names

print("\nnonzero Christoffel symbols Gamma^k_ij")
for (k, i, j), G in np.ndenumerate(cache.christoffel):
    if i <= j and not (sample(G, defn.chart.points) == 0).all():
        print(f"  Gamma^{names[k]}_{names[i]}{names[j]} = {render(simplify(G))}")

# curvature uses R(X,Y) = nabla_[X,Y] - [nabla_X, nabla_Y]
e = coordinate_frame(defn.chart)
print("\nR(e_i, e_j) e_k")
for i, j, k in [(0, 2, 0), (0, 1, 1), (0, 1, 0), (1, 2, 1), (0, 2, 2), (1, 2, 2)]:
    v = riemann(cache, e[i], e[j], e[k])
    comps = [render(simplify(c)) for c in v.components]
    print(f"  R(e{i + 1}, e{j + 1}) e{k + 1} = ({', '.join(comps)})")

print("\nRic(e1, e1) =", render(simplify(ricci(cache, e[0], e[0]))))
print("tau         =", render(simplify(cache.tau)))
