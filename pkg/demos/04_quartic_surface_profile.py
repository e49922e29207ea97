# Tangent planes of a quartic surface over F_4.
#
# For a smooth point P, t(H) counts the points whose tangent plane is H.
# On a line-free surface with no singular F_4-point the section size is
# capped by t(H): 14, 11, 10, 8, 6 for t = 0..4, and exactly 5 for t = 5,
# which happens only when the section is a double conic.

# %%
import numpy as np

from linefree import analysis, search
from linefree.form import HomogeneousForm, parse
from linefree.gf import GF

F4 = GF(2, 2)
(S,) = search.sample_forms(3, 4, 4, 1, seed=2013, line_free=True, singular=False)
prof = analysis.profile(S)
print("S =", S)
print("N =", prof.N, " bound 51;  t-histogram n_0..n_5 =", prof.n_histogram)

worst = {}
for count, t in prof.per_hyperplane:
    worst[t] = max(worst.get(t, 0), count)
print("largest section per t:", dict(sorted(worst.items())), " caps:", analysis.TANGENT_TABLE)
print("violations:", analysis.tangent_table_violations(S, prof))

# %%
# Forcing a t = 5 plane: C^2 + x3*G has the double conic C^2 in x3 = 0.
C = parse("x0^2 + x1*x2", F4, n_vars=4)
rng = np.random.default_rng(1)
while True:
    G = HomogeneousForm.from_vector(F4, 4, 3, rng.integers(0, 4, size=20))
    T = C * C + parse("x3", F4) * G
    p = analysis.profile(T)
    if p.line_free and not p.singular_points and p.max_t == 5:
        break
print("n_5 =", p.n_histogram[5], " violations:", analysis.tangent_table_violations(T, p))

# %%
# The full report is JSON; see docs/report-schema.md.
report = analysis.section_report(T)
print({k: report[k] for k in ("N", "bound", "status", "n_histogram", "max_t", "hypothesis")})
