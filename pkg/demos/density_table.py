"""Print the S_t density for beta = (3 + sqrt 5)/2 at a few exact t values,
together with the checks that certify each table."""
from pisotdyn import make_field
from pisotdyn.density import (admissible_t_grid, bounds_check, normalize_check,
                              off_breakpoint_samples, st_profile, transfer_residual)

F = make_field([1, -3, 1], (2, 3))

for t in admissible_t_grid(F, 5):
    prof = st_profile(F, t, N=64)
    res, bound = transfer_residual(prof.map, prof, off_breakpoint_samples(prof, 50))
    norm = normalize_check(prof)
    bnd = bounds_check(prof)
    print(f"t = {t.to_decimal(6)}  ({len(prof.breakpoints)} cells, tail {float(prof.tail):.1e})")
    for a, v, w in zip(prof.breakpoints, prof.values, prof.normalized_values):
        print(f"    x >= {a.to_decimal(6):>10}   h = {v.to_decimal(6)}   normalized {w.to_decimal(6)}")
    print(f"    residual {float(res):.1e} <= {float(bound):.1e}; integral ok {norm.passed}; bounds ok {bnd.passed}")
