# A slice of the plane-quartic census over F_4.
#
# Normalised quartics (first nonzero coefficient 1) are enumerated in lex
# order; there are (4^15 - 1)/3 = 357913941 of them.  The full census is
# `linefree scan --exhaustive --n 2 --d 4 --q 4`, about 7.5 minutes on one
# core; here we scan 2 of 4 units, stop, and resume from the checkpoint.

# %%
import tempfile
from pathlib import Path

from linefree import search

task = search.ScanTask(2, 4, 4, start=0, end=4 * 2**18, unit_size=2**18)
ckpt = Path(tempfile.mkdtemp()) / "census.ckpt"
state = search.run_scan(task, checkpoint_path=ckpt, max_units=2)
print("after 2 units:", state.watermark, "of", task.num_units)

state = search.run_scan(task, search.resume(ckpt, task), checkpoint_path=ckpt)
s = state.summary
print("histogram of N over line-free curves:", dict(sorted(s.histogram.items())))
print("max N =", s.max_N, " K-equivalent =", s.k_equivalent, " self-checks =", s.self_checks)

# %%
# The same numbers in one go; the canonical summaries are byte-identical.
direct = search.run_scan(task).summary
print("resume == direct:", direct.canonical_bytes() == s.canonical_bytes())
