"""Entropy from covering numbers.

N(n, delta) is the smallest number of length-n cylinders whose union has
measure strictly greater than 1 - delta.  Its exponential growth rate in
n recovers the entropy of the measure — for any delta in (0, 1), which
the demo exhibits by fitting at two very different levels.

On Bernoulli(1/2, 1/2) every length-n cylinder has mass 2^-n, so the
covering number is exactly ceil((1 - delta) 2^n) and the demo doubles as
an exactness check of the greedy search.
"""

import math

from cmshift import families, katok, measures

PHI = (1 + math.sqrt(5)) / 2

full2 = families.full_shift(2)
bern = measures.bernoulli_measure(full2, (0.5, 0.5))

print("Bernoulli(1/2,1/2): exact covering numbers")
print("-" * 64)
for n in (4, 8, 12):
    for delta in (0.1, 0.4):
        got = katok.covering_number(bern, full2, n, delta)
        exact = math.ceil((1 - delta) * 2**n)
        print(f"  n={n:<3d} delta={delta}: N={got:<6d} closed form {exact}")

print()
print("fitted rates")
print("-" * 64)
r1 = katok.katok_estimate(bern, full2, delta=0.1, n_max=20)
r4 = katok.katok_estimate(bern, full2, delta=0.4, n_max=20)
print(f"  Bernoulli delta=0.1: {r1.rate:.5f}  (log 2 = {math.log(2):.5f})")
print(f"  Bernoulli delta=0.4: {r4.rate:.5f}  "
      f"(delta-independence gap {abs(r1.rate - r4.rate):.2e})")

golden = families.golden_mean()
rg = katok.katok_estimate(measures.parry_measure(golden), golden,
                          delta=0.1, n_max=22)
print(f"  golden-mean Parry:   {rg.rate:.5f}  (log phi = {math.log(PHI):.5f})")
