"""Theorem checks with hypotheses derived from the structure itself."""
from paracurv.chartcalc import curvature_cache
from paracurv.definitions import load_bundled
from paracurv.theorems import all_theorems, parallel_check

for name in ("para_kenmotsu_s5", "paracosymplectic_flat"):
    defn = load_bundled(name)
    S = defn.structure()
    cache = curvature_cache(S.g)
    print(f"== {name}")
    for t in all_theorems(S, cache):
        worst = max((c.max_rel for c in t.checks), default=0.0)
        print(f"  {t.theorem:44s} {t.verdict:18s} worst residual {worst:.1e}")

# parallel tensors: a multiple of g is parallel, eta (x) eta is not
defn = load_bundled("para_kenmotsu_s5")
S = defn.structure()
cache = curvature_cache(S.g)
for label, h in defn.tensor_fields().items():
    r = parallel_check(S, cache, h)
    print(f"  {label:8s} parallel={r.details['is_parallel']}  {r.verdict}")
