"""Three forms of entropy at infinity agree.

Entropy at infinity measures the complexity that survives after orbits
are forced to spend almost all their time outside every fixed finite
part of the graph.  It has three very different-looking definitions:

  delta_inf  counts admissible words that visit the small symbols at a
             vanishing frequency (a combinatorial escape rate);
  h_inf      takes sequences of invariant measures drifting to the zero
             measure and asks how much entropy they can retain;
  b_inf      is a convex-duality bound: the pressure of -t*1_{small}
             plus t*lam, minimized over t, for a small mass level lam.

For the renewal system everything at infinity is trivial (one long loop
carries no choices): all three are 0, while the total entropy is log 2.
For the a_l = 2^l tower the choices never thin out: all three equal
log 2 while the total entropy is log 4.
"""

import math

from cmshift import families, infinity, thermo

for name, system, h_inf_true in (
    ("renewal", families.renewal_shift(), 0.0),
    ("powers 2^l", families.power_loops(2), math.log(2)),
):
    print(f"== {name} (true value {h_inf_true:.4f})")

    grid = thermo.delta_inf(system)
    print(f"  delta_inf grid headline: {grid.headline:.5f}")
    for (M, q), cell in sorted(grid.cells.items()):
        tag = "empty" if cell.empty else f"rate {cell.rate:.5f}"
        print(f"    M={M:<3d} q={q}: {tag}")

    h = infinity.h_inf_lower_bound(system)
    print(f"  h_inf lower bound: {h.value:.5f} "
          f"(escaping sequence: {h.escaping})")
    for (lo, hi), ent, mass in zip(h.windows, h.entropies, h.base_masses):
        print(f"    loops in [{lo},{hi}]: entropy {ent:.5f}, "
              f"small-symbol mass {mass:.5f}")

    b = infinity.b_inf_estimate(system, lam=1e-3)
    print(f"  b_inf dual bound at lam=0.001: {b.value:.5f} "
          f"(optimal t = {b.t_opt:.3f})")
    print()
