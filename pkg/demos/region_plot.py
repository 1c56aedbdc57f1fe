"""Boundedness region of the weighted Bergman projection in the (1/p, 1/q) square.

Writes ``region_n3_nu1.5.svg`` and the verdict grid as CSV into the
current directory, and prints the critical indices at a few p.
"""
from fractions import Fraction

from conelp.bergman import classify_region, critical_indices, region_csv, region_rows, region_svg

n, r, nu = 3, 2, Fraction(3, 2)

for p in (Fraction(2), Fraction(3), Fraction(4), Fraction(6)):
    ci = critical_indices(n, r, nu, p)
    print(f"p={p}: q_nu={ci.q_nu}  q_nu_p={ci.q_nu_p}  q_tilde={ci.q_tilde}")

for p, q in [(2, 2), (3, 5), (4, 10), (4, 25)]:
    v = classify_region(n, r, nu, p, q)
    print(f"(p, q) = ({p}, {q}): {v.verdict:<9} {v.reason}")

with open("region_n3_nu1.5.svg", "w") as fh:
    fh.write(region_svg(n, r, nu, steps=64))
with open("region_n3_nu1.5.csv", "w") as fh:
    fh.write(region_csv(region_rows(n, r, nu, steps=64)))
print("wrote region_n3_nu1.5.svg and region_n3_nu1.5.csv")
