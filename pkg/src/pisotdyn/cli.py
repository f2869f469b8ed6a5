"""Command line interface: ``pisotdyn <command> ...``.

Exit codes: 0 when every exact check passes, 1 on a violation, 2 on a usage
or input error.
"""

from __future__ import annotations

import argparse
import re
import sys
from fractions import Fraction
from pathlib import Path

from . import density, discreteness, equivalence, maps, orbits
from .errors import (BudgetExceeded, GapViolation, OffsetOutsideWindow, ParseError,
                     PisotDynError)
from .numberfield import classify, make_field, parse_field_spec

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2

_NEG_VALUE = re.compile(r"^-[\d.(]")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _join_negative_values(argv):
    """Glue ``--opt -1,2`` into ``--opt=-1,2`` so negative values are not read as flags."""
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if (tok.startswith("--") and "=" not in tok and i + 1 < len(argv)
                and _NEG_VALUE.match(argv[i + 1])):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


# ---------------------------------------------------------------------------
# input helpers


def _ints(text):
    try:
        return [int(c) for c in re.split(r"[,\s]+", text.replace("−", "-").strip("[] ")) if c]
    except ValueError as exc:
        raise ParseError(f"bad integer list {text!r}") from exc


def _fractions(text):
    try:
        return [Fraction(c) for c in re.split(r"[,\s]+", text.replace("−", "-").strip("[] ")) if c]
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad rational list {text!r}") from exc


def _field(args, required=True):
    if getattr(args, "field", None):
        return parse_field_spec(Path(args.field).read_text())
    if getattr(args, "poly", None):
        hint = None
        if getattr(args, "root", None):
            lo, hi = _fractions(args.root)
            hint = (lo, hi)
        return make_field(_ints(args.poly), hint)
    if required:
        raise ParseError("give --poly or --field")
    return None


def _map(args):
    if getattr(args, "map", None):
        return maps.parse_map_spec(Path(args.map).read_text())
    spec = getattr(args, "builtin", None) or "beta"
    return maps.builtin_map(spec, _field(args, required=False))


def _x0(field, text):
    return maps.parse_element(field, text)


def _write(path, text):
    if path:
        Path(path).write_text(text)


def _add_field_args(p):
    p.add_argument("--poly", help="minimal polynomial coefficients, constant term first")
    p.add_argument("--root", help="rational interval lo,hi isolating beta")
    p.add_argument("--field", help="field description file")


def _add_map_args(p):
    _add_field_args(p)
    p.add_argument("--builtin", help="named map, e.g. beta, kn2, tent, st(t=(1/10))")
    p.add_argument("--map", help="map description file")


# ---------------------------------------------------------------------------
# commands


def cmd_classify(args, out):
    field = _field(args)
    cls = classify(field)
    conj = field.conjugate_discs(64)[1:]
    parts = [f"{cls}, d={field.degree}"]
    if conj:
        vals = []
        for disc in conj:
            re_, im = disc.center
            if im == 0:
                vals.append(f"{float(re_):.6g}")
            else:
                vals.append(f"{float(re_):.6g}{float(im):+.6g}i")
        parts.append("conjugate" + ("s" if len(vals) > 1 else "") + " ≈ " + ", ".join(vals))
    print(", ".join(parts), file=out)
    return EXIT_OK


def cmd_orbit(args, out):
    plmap = _map(args)
    if args.numeric:
        orb = orbits.iterate_numeric(plmap, args.x0, args.n)
        print(f"# precision {orb.precision} bits, valid prefix {orb.valid_prefix}", file=out)
        for h, v in enumerate(orb.floats()):
            print(f"{h},{v!r},{orb.itinerary[h] if h < len(orb.itinerary) else ''}", file=out)
        return EXIT_OK
    x0 = _x0(plmap.field, args.x0) if not args.seed_point else orbits.seed_point(plmap.field, args.seed)
    orb = orbits.iterate_exact(plmap, x0, args.n)
    text = orbits.orbit_csv(orb, args.digits)
    if args.csv:
        _write(args.csv, text)
    else:
        out.write(text)
    return EXIT_OK


def cmd_period(args, out):
    plmap = _map(args)
    x0 = _x0(plmap.field, args.x0)
    try:
        cert = orbits.detect_eventual_period(plmap, x0, args.budget)
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=out)
        return EXIT_VIOLATION
    print(f"preperiod {cert.preperiod} period {cert.period}", file=out)
    _write(args.json, orbits.certificate_json(cert, plmap, x0))
    return EXIT_OK


def cmd_density(args, out):
    field = _field(args)
    if args.kind == "parry":
        dens = density.parry_density(field, args.N)
        norm = density.normalize_check(dens)
        prof = None
    else:
        t = maps.parse_element(field, args.t)
        prof = density.st_profile(field, t, args.N, exact=args.exact)
        dens = prof.density
        norm = density.normalize_check(prof)
    table = density.density_csv(dens, args.digits)
    if args.csv:
        _write(args.csv, table)
    else:
        out.write(table)
    ok = norm.passed
    print(f"# integral of normalised table: {norm.normalized_integral.to_decimal(15)} "
          f"(raw mass {norm.raw_integral.to_decimal(15)})", file=out)
    if prof is not None:
        b = density.bounds_check(prof)
        lo, hi = b.min_value, b.max_value
        print(f"# raw min {lo.to_decimal(12)} max {hi.to_decimal(12)} "
              f"bounds [{b.lower.to_decimal(12)}, {b.upper.to_decimal(12)}] tail {float(b.radius):.3e}",
              file=out)
        if b.beta_below_two:
            cells = ", ".join(f"[{a.to_decimal(6)}, {c.to_decimal(6)})" for a, c in b.nonpositive_cells)
            print(f"# beta < 2: density vanishes on {cells}", file=out)
        else:
            ok = ok and b.passed
        _write(args.json, density.profile_json(prof))
    print("# checks " + ("passed" if ok else "FAILED"), file=out)
    return EXIT_OK if ok else EXIT_VIOLATION


def _digit_set(field, text):
    parts = maps._split_top(maps._clean(text))
    return discreteness.DigitSet(field, [maps.parse_element(field, p) for p in parts])


def cmd_enum_fe(args, out):
    field = _field(args)
    E = _digit_set(field, args.E)
    if args.difference:
        E = E.difference()
    lo, hi = _fractions(args.window)
    enum = discreteness.enumerate_window(field, E, (lo, hi), args.method)
    R = discreteness.gap_bound(field, E)
    status = EXIT_OK
    gap = None
    if args.method == "digit-bfs":
        try:
            gap = discreteness.verify_min_gap(enum, R)
        except GapViolation as exc:
            print(f"gap violation: {exc}", file=out)
            status = EXIT_VIOLATION
    print(f"{len(enum)} points in [{lo}, {hi}] ({args.method}"
          + (", superset" if enum.is_superset else "") + ")", file=out)
    for z in enum.elements:
        print(f"  {maps.format_element(z)}  {z.to_decimal(12)}", file=out)
    if gap is not None:
        print(f"min gap {gap.min_gap.to_decimal(12) if gap.count > 1 else 'inf'} > R = {float(R):.12g}",
              file=out)
    _write(args.json, discreteness.enumeration_json(enum, R, gap))
    return status


def _pair(args):
    if args.pair:
        name = args.pair.lower()
        if name in ("kn1", "1"):
            return maps.kn_pair(1)
        if name in ("kn2", "2"):
            return maps.kn_pair(2)
        if name == "tent":
            S = maps.tent_map()
            return maps.beta_map(S.field), S
        raise ParseError(f"unknown pair {args.pair!r}")
    S = _map(args)
    return maps.beta_map(S.field), S


def cmd_couple(args, out):
    T, S = _pair(args)
    x0 = _x0(S.field, args.x0)
    W = equivalence.coupling_window(S)
    run = equivalence.coupling_forward if args.direction == "forward" else equivalence.coupling_reverse
    try:
        rep = run(T, S, x0, args.N, W, strict=False)
    except OffsetOutsideWindow as exc:
        print(str(exc), file=out)
        return EXIT_VIOLATION
    bad = 0
    if args.interval:
        lo, hi = _fractions(args.interval)
        ts = equivalence.tilde_set((lo, hi), W, S.M, args.direction, T)
        miss = equivalence.membership_implication_check(rep, (lo, hi), ts)
        bad = len(miss) + (0 if ts.certified else 1)
        print(f"I~ has {len(ts.union)} components, measure {float(ts.measure):.6g} "
              f"<= {float(ts.bound):.6g}; implication failures {len(miss)}", file=out)
    s = rep.summary()
    print(f"{args.direction} coupling {T.label}/{S.label}: M={s['M']} N={s['N']} window={s['window_size']} "
          f"distinct offsets={s['distinct_offsets']} violations={s['violations']}", file=out)
    _write(args.json, rep.to_json())
    return EXIT_OK if rep.ok and not bad else EXIT_VIOLATION


def cmd_compare(args, out):
    T, S = _pair(args)
    rep = equivalence.generic_report(T, S, args.seed, args.N, args.bins, coupling_steps=args.couple)
    for name in ("T", "S"):
        d = rep.sup_distance[name]
        if d is None:
            print(f"{name}: no reference density", file=out)
        else:
            print(f"{name}: sup |freq - mass| = {d:.3e}, star discrepancy = {rep.star_discrepancy[name]:.3e}, "
                  f"max freq/mass = {rep.max_ratio[name]:.4f}", file=out)
    _write(args.json, rep.to_json())
    if args.hist_csv:
        lines = ["bin,left,T,S"]
        for j in range(args.bins):
            lines.append(f"{j},{j / args.bins!r},{rep.histograms['T'][j]!r},{rep.histograms['S'][j]!r}")
        _write(args.hist_csv, "\n".join(lines) + "\n")
    bad = any(c.get("violations") for c in rep.coupling.values())
    return EXIT_VIOLATION if bad else EXIT_OK


def build_parser():
    p = _Parser(prog="pisotdyn", description="Piecewise linear maps with Pisot slopes.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("classify", help="Pisot / PerronOnly / Neither")
    _add_field_args(c)
    c.set_defaults(func=cmd_classify)

    c = sub.add_parser("orbit", help="exact (or numeric) orbit as CSV")
    _add_map_args(c)
    c.add_argument("--x0", default="1/2")
    c.add_argument("--n", type=int, default=20)
    c.add_argument("--digits", type=int, default=20)
    c.add_argument("--numeric", action="store_true", help="interval iteration from a real x0 expression")
    c.add_argument("--seed-point", action="store_true", help="start from a high-height seed point")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--csv")
    c.set_defaults(func=cmd_orbit)

    c = sub.add_parser("period", help="eventual period of a point of Q(beta)")
    _add_map_args(c)
    c.add_argument("--x0", required=True)
    c.add_argument("--budget", type=int, default=10**6)
    c.add_argument("--json")
    c.set_defaults(func=cmd_period)

    c = sub.add_parser("density", help="invariant density table")
    c.add_argument("kind", choices=["parry", "st"])
    _add_field_args(c)
    c.add_argument("--t", default="0")
    c.add_argument("--N", type=int, default=density.DEFAULT_N)
    c.add_argument("--exact", action="store_true", help="closed form when the boundary orbits are periodic")
    c.add_argument("--digits", type=int, default=15)
    c.add_argument("--csv")
    c.add_argument("--json")
    c.set_defaults(func=cmd_density)

    c = sub.add_parser("enum-fe", help="points of F_E in a window")
    _add_field_args(c)
    c.add_argument("--E", required=True, help="digits, e.g. '0,1' or '0,(0,1)'")
    c.add_argument("--difference", action="store_true", help="use E - E")
    c.add_argument("--window", default="-1,2")
    c.add_argument("--method", choices=["lattice-box", "digit-bfs"], default="digit-bfs")
    c.add_argument("--json")
    c.set_defaults(func=cmd_enum_fe)

    c = sub.add_parser("couple", help="coupling of S with the beta map")
    c.add_argument("direction", choices=["forward", "reverse"])
    _add_map_args(c)
    c.add_argument("--pair", help="kn1, kn2 or tent")
    c.add_argument("--x0", default="1/2")
    c.add_argument("--N", type=int, default=1000)
    c.add_argument("--interval", help="lo,hi: also check the I~ implication")
    c.add_argument("--json")
    c.set_defaults(func=cmd_couple)

    c = sub.add_parser("compare", help="histograms of T and S from one seed point")
    _add_map_args(c)
    c.add_argument("--pair", help="kn1, kn2 or tent")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--N", type=int, default=10**5)
    c.add_argument("--bins", type=int, default=32)
    c.add_argument("--couple", type=int, default=0, help="also run both couplings for this many steps")
    c.add_argument("--json")
    c.add_argument("--hist-csv")
    c.set_defaults(func=cmd_compare)
    return p


def main(argv=None, out=None):
    out = out or sys.stdout
    argv = _join_negative_values(list(sys.argv[1:] if argv is None else argv))
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        return args.func(args, out)
    except (ParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PisotDynError as exc:
        print(f"error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
