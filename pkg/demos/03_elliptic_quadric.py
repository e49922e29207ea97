# Elliptic quadrics meet the bound for surfaces of degree 2.
#
# x0*x1 + x2^2 + x2*x3 + c*x3^2 with t^2 + t + c irreducible has q^2+1 points
# and contains no F_q-line, which is the value of the bound at (n, d) = (3, 2).

# %%
from linefree import analysis
from linefree.bounds import main_bound
from linefree.form import parse
from linefree.gf import GF

for q in (2, 3, 4, 5, 7, 8, 9):
    E = analysis.elliptic_quadric(q)
    v = analysis.check_bound(E)
    print(f"q={q}: {E}   {v}")

# %%
# The plane sections are conics (q+1 points) or tangent planes (1 point).
E = analysis.elliptic_quadric(4)
counts = analysis.section_counts(E)
print("section sizes over F_4:", sorted(set(counts.tolist())), " bound for conics:", main_bound(2, 2, 4))

# A hyperbolic quadric, by contrast, is ruled: (q+1)^2 points on 2(q+1) lines.
H = parse("x0*x3 + x1*x2", GF(2, 2))
print("hyperbolic over F_4:", analysis.count_points(H), "points,", len(analysis.lines_on(H)), "lines")
