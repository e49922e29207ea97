# Finite fields and projective spaces.
#
# Elements of GF(p^e) are small integers; the digits of the integer in base p
# are the coefficients of the residue polynomial.  Over F_4 the codes are
# 0, 1, w, w+1.

# %%
import numpy as np

from linefree import GF, enumerate_elements, frobenius
from linefree.projgeom import gaussian_binomial, line_through, points_on_line, space

F4 = GF(2, 2)
w = F4.w
print("F_4 =", enumerate_elements(F4))
print("w*w =", w * w, "  1/w =", w.inverse(), "  w^2 (Frobenius) =", frobenius(w, 2))
print("modulus coefficients (low degree first):", F4.modulus)

# Dense tables back the vectorised code paths.
print(F4.mul_table)

# %%
# P^2(F_4): 21 points, 21 lines with 5 points each.
P2 = space(2, 4)
print(P2.num_points, "points,", len(P2.lines), "lines")
print("first points:", P2.points[:6].tolist())

# Any two distinct points span exactly one line.
A, B = P2.point(3), P2.point(17)
L = line_through(A, B)
print(L, "->", points_on_line(L))

# %%
# Incidences: each point is on q+1 = 5 lines, each line has 5 points.
counts = np.bincount(P2.line_points.ravel(), minlength=P2.num_points)
print("lines through each point:", set(counts.tolist()))

# Lines of P^3(F_q) are 2-dimensional subspaces of F_q^4.
for q in (2, 3, 4):
    print(f"q={q}: lines of P^3 = {len(space(3, q).lines)} = [4 choose 2]_q = {gaussian_binomial(4, 2, q)}")
