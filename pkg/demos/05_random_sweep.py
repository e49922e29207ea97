# Random falsification sweeps.
#
# Draw forms uniformly, keep the line-free ones, and compare N with the bound.
# Every scan is seeded; the same seed gives the same summary on any number of
# threads.

# %%
from linefree import search
from linefree.bounds import main_bound

for n, d, q in [(3, 3, 2), (3, 4, 3), (3, 4, 4), (4, 3, 2)]:
    task = search.ScanTask(n, d, q, search.Mode.RANDOM, seed=1, sample_count=20_000, unit_size=2**13)
    s = search.run_scan(task, threads=2).summary
    print(f"(n,d,q)=({n},{d},{q}): {s.line_free} line-free of {s.total}, "
          f"max N {s.max_N} vs bound {main_bound(n, d, q)}, exceeding {s.exceeds_unflagged}")

# %%
# Quadric surfaces reach the bound, and the sweep reports them as ATTAINS.
res = search.random_sweep(search.ScanTask(3, 2, 5, search.Mode.RANDOM, seed=4, sample_count=5000))
print(res.summary.attains, "quadrics over F_5 attain", main_bound(3, 2, 5), "points")
print(res.records[0])
