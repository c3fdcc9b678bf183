"""The dyadic polynomial-approximation smoothness diagnostic.

Degree-2^k projections of boundary data through the kernel approximants
give error fields whose weighted dyadic sums converge exactly up to the
Hardy-Sobolev order of the function; the diagnostic fits the decay slope
and issues per-order verdicts, cross-checked against the level-norm oracle.
"""

import numpy as np

from hsconvex import ball, diagnose
from hsconvex.corpus import build_corpus, classify_norm

domain = ball()

print("entry              slope   verdicts (l = 1, 2, 3)      oracle (p=2)")
for entry in build_corpus(domain, with_labels=False):
    rep = diagnose(domain, entry.f, p=2.0, k_range=range(1, 6),
                   l_probe=(1, 2, 3))
    oracle = [classify_norm(domain, entry.f, l, 2.0)[0]
              if entry.family not in ("polynomial", "entire") else "f"
              for l in (1, 2, 3)]
    slope = f"{rep.slope:7.2f}" if np.isfinite(rep.slope) else "  floor"
    verdicts = ", ".join(rep.verdicts[l][:4] for l in (1, 2, 3))
    print(f"{entry.f.label:18s} {slope}  {verdicts:28s} {'/'.join(oracle)}")
