"""Walk the two competitor families toward the critical threshold and print the margins."""
import numpy as np

from mtlab import interval_test_family, line_test_family

for name, build in (("interval", interval_test_family), ("line", line_test_family)):
    print(f"{name} competitors")
    print(f"{'eps':>8} {'c^2':>9} {'B':>8} {'norm^2':>18} {'value':>9} {'threshold':>9} {'margin':>8}")
    for eps in (1e-3, 1e-4, 1e-5, 1e-6):
        r = build(eps)
        print(f"{eps:8.0e} {r.c**2:9.4f} {r.B:8.4f} {r.constraint_norm_sq:18.15f} "
              f"{r.functional_value:9.4f} {r.threshold:9.4f} {r.margin:8.4f}")
    print()

print(f"B tends to -log 2 = {-np.log(2):.4f}; c^2 grows like log(1/eps)/pi.")
