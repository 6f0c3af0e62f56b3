"""Expressions: parse, differentiate, simplify and evaluate on a chart."""
import numpy as np

from paracurv import Chart, diff, equal_numeric, evaluate, parse, render, simplify

chart = Chart(("x", "y", "z"), ((-1, 1), (-1, 1), (-2, -0.1)), samples=16, seed=0)

e = parse("exp(2*z) * sin(x) + x^2 * y", chart)
print("e        =", render(e))

# derivatives are exact trees, not finite differences
for i, name in enumerate(chart.names):
    print(f"d/d{name} e  =", render(simplify(diff(e, i))))

p = (0.3, -0.4, -1.0)
print("e(p)     =", evaluate(e, p))

# compare against a central difference at the same point
h = 1e-6
shift = np.array([0.0, 0.0, h])
fd = (evaluate(e, np.add(p, shift)) - evaluate(e, np.subtract(p, shift))) / (2 * h)
print("d/dz e(p) =", evaluate(diff(e, 2), p), " central difference", fd)

# simplify only uses rules that keep the value unchanged
a = parse("x*1 + 0*y + (z - z)", chart)
print(render(a), "->", render(simplify(a)))
same, residual = equal_numeric(a, parse("x", chart), chart)
print("equal on the samples:", same, f"(residual {residual:.1e})")
