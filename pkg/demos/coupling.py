"""Couple T(x) = {beta x} with S_2 along one exact orbit and show the offsets."""
from collections import Counter
from fractions import Fraction

from pisotdyn.equivalence import coupling_forward, coupling_reverse, coupling_window
from pisotdyn.maps import kn_pair, tent_map, beta_map

pairs = [kn_pair(1), kn_pair(2)]
tent = tent_map()
pairs.append((beta_map(tent.field), tent))

for T, S in pairs:
    W = coupling_window(S)
    for run in (coupling_forward, coupling_reverse):
        rep = run(T, S, Fraction(1, 3), 5000, W)
        used = Counter(o.to_decimal(4) for o in rep.offsets)
        print(f"{T.label}/{S.label} {rep.direction:8s} window {len(W.elements):2d}"
              f"  violations {len(rep.violations)}  offsets {dict(used)}")
        print(f"    k(n) for n < 12: {rep.k[:12]}")
