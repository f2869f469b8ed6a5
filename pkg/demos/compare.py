"""Histograms of T and S_2 from one high-height seed, against their densities,
and the flipped beta map escaping an interval that T keeps visiting."""
import sys

import numpy as np

from pisotdyn import make_field
from pisotdyn.equivalence import generic_report
from pisotdyn.maps import beta_map, dissipative_interval, flipped_beta_counterexample, kn_pair
from pisotdyn.orbits import orbit_floats, seed_point

N = int(sys.argv[1]) if len(sys.argv) > 1 else 200_000
seed = 20261015

T, S = kn_pair(2)
rep = generic_report(T, S, seed=seed, N=N, bins=16)
for name in ("T", "S"):
    print(f"{name}: sup |freq - mass| {rep.sup_distance[name]:.2e}, D* {rep.star_discrepancy[name]:.2e}")
    print("   ", np.array2string(rep.histograms[name] * 16, precision=3, max_line_width=100))

P = make_field([-1, -1, 0, 1], (1, 2))
lo, hi = (float(v) for v in dissipative_interval(P))
x0 = seed_point(P, seed)
for label, m in (("flipped", flipped_beta_counterexample(P)), ("T", beta_map(P))):
    v = orbit_floats(m, x0, N // 2, start=N // 2)
    print(f"{label:8s} frequency of [{lo:.4f}, {hi:.4f}] over the second half: {((v >= lo) & (v <= hi)).mean():.4f}")
