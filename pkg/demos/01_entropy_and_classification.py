"""Entropy and recurrence classification across the stock families.

Four systems, three independent routes to the same number:

  * the full 2-shift and the golden mean shift are finite graphs, so the
    entropy is the log of a Perron eigenvalue and loop counts are exact
    integer sequences;
  * the renewal system (one loop of every length) and the a_l = 2^l tower
    are infinite loop systems, where the entropy comes from the root of
    the loop generating function f(x) = sum a_l x^l = 1.

The classification is decided from certified bounds on f at its radius:
root strictly inside => positive recurrent, f(R) < 1 => transient,
f(R) = 1 with divergent mean loop length => null recurrent.
"""

import math

from cmshift import counting, families, thermo

PHI = (1 + math.sqrt(5)) / 2

systems = {
    "full 2-shift": (families.full_shift(2), math.log(2)),
    "golden mean": (families.golden_mean(), math.log(PHI)),
    "renewal": (families.renewal_shift(), math.log(2)),
    "powers 2^l": (families.power_loops(2), math.log(4)),
}

print("entropy, three ways")
print("-" * 72)
for name, (system, expected) in systems.items():
    report = thermo.gurevich_entropy(system, n_max=24)
    fit = counting.growth_rate(counting.loop_count(system, 1, 24))
    print(f"{name:14s} method={report.method:20s} "
          f"value={report.value:.6f} count-fit={fit.rate:.6f} "
          f"(expected {expected:.6f})")

print()
print("classification and strong positive recurrence")
print("-" * 72)
for name, system in (
    ("renewal", families.renewal_shift()),
    ("subexponential", families.subexponential_loops()),
    ("greedy-null", families.greedy_null_loops()),
    ("powers 2^l", families.power_loops(2)),
):
    cls = thermo.classify(system)
    spr = thermo.is_spr(system)
    print(f"{name:14s} {cls.verdict:18s} h={cls.entropy:.4f} "
          f"spr={spr.spr} margin={spr.margin:.4f}")
    print(f"{'':14s} {cls.reason}")
