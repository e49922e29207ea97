# The plane quartic K over F_4.
#
# K has 14 points, one more than the Sziklai bound (d-1)q+1 = 13, and it is
# the only plane curve without F_q-line components that does so.  Its points
# are exactly the points of P^2(F_4) that are not in the Baer subplane P^2(F_2).

# %%
import numpy as np

from linefree import analysis
from linefree.bounds import sziklai_bound
from linefree.projgeom import space

K = analysis.curve_K()
print("K =", K)
geo = space(2, 4)
zero = analysis.zero_mask(K)
print("N_4(K) =", zero.sum(), " Sziklai bound =", sziklai_bound(4, 4))

baer = (geo.points <= 1).all(axis=1)
print("off-curve points are the F_2-points:", np.array_equal(~zero, baer))

# %%
# Each of the 21 lines meets K, and none lies on it.
hits = zero[geo.line_points].sum(axis=1)
print("points of K per line:", np.bincount(hits).tolist())
print("lines on K:", analysis.lines_on(K))
print(analysis.check_bound(K))

# %%
# Projective equivalence.  The orbit of K under PGL(3,4) (60480 maps) has 360
# normalised members, so K's stabiliser has order 168.
orbit = analysis.k_orbit()
print("orbit size:", len(orbit))
