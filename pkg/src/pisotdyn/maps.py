"""Piecewise linear maps S(x) = eps * beta^m * x + b on exact partitions of [0, 1].

Every constructor returns a validated :class:`PLMap`.  Intervals are
half-open ``[a, b)`` with the final branch closed at 1 unless a constructor
says otherwise; singleton branches ``[a, a]`` are allowed and used to pin the
value at x = 1 for integer slopes.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

from .errors import (
    BadArrangement,
    BadIdentity,
    BetaOutOfRange,
    FieldMismatch,
    ImageEscapes,
    LengthMismatch,
    NoSidedNeighborhood,
    OutOfDomain,
    ParseError,
    PartitionGap,
    PartitionOverlap,
    TOutOfRange,
)
from .numberfield import FieldElement, NumberField, format_field_spec, make_field, parse_field_spec

__all__ = [
    "AffineForm",
    "Branch",
    "PLMap",
    "affine_form",
    "apply",
    "apply_one_sided",
    "beta_map",
    "build_map",
    "builtin_map",
    "digit_alpha",
    "digit_set",
    "dissipative_interval",
    "flip_radix_map",
    "flipped_beta_counterexample",
    "format_map_spec",
    "handelman_map",
    "handelman_search",
    "kn_pair",
    "parse_map_spec",
    "st_map",
    "tent_map",
    "golden_field",
    "t_max",
]

LEFT, RIGHT = "left", "right"


@dataclass(frozen=True)
class Branch:
    left: FieldElement
    right: FieldElement
    left_closed: bool
    right_closed: bool
    epsilon: int
    m: int
    b: FieldElement

    @property
    def is_singleton(self):
        return self.left == self.right

    def contains(self, x):
        s = (x - self.left).sign()
        if s < 0 or (s == 0 and not self.left_closed):
            return False
        s = (x - self.right).sign()
        return s < 0 or (s == 0 and self.right_closed)

    def interval_str(self):
        lb = "[" if self.left_closed else "("
        rb = "]" if self.right_closed else ")"
        return f"{lb}{self.left}, {self.right}{rb}"


@dataclass(frozen=True)
class AffineForm:
    """S^n(x) = sign * beta^exponent * x + intercept along a fixed itinerary."""

    sign: int
    exponent: int
    intercept: FieldElement

    def evaluate(self, x):
        f = self.intercept.field
        return self.sign * (f.beta ** self.exponent) * f.element(x) + self.intercept

    def then(self, branch, beta_m):
        """Compose with one more branch application (beta_m = beta ** branch.m)."""
        eps = branch.epsilon
        return AffineForm(eps * self.sign, self.exponent + branch.m,
                          eps * (beta_m * self.intercept) + branch.b)


@dataclass(eq=False)
class PLMap:
    field: NumberField
    branches: tuple
    label: str = ""
    kind: str = "custom"
    params: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        self.branches = tuple(self.branches)
        self._pow = {}

    def __eq__(self, other):
        return (isinstance(other, PLMap) and self.field == other.field
                and self.branches == other.branches and self.label == other.label)

    def __hash__(self):
        return hash((self.field.key, self.label, len(self.branches)))

    def __repr__(self):
        return f"PLMap({self.label or self.kind!r}, {len(self.branches)} branches)"

    @property
    def M(self):
        return max(br.m for br in self.branches)

    def beta_pow(self, m):
        p = self._pow.get(m)
        if p is None:
            p = self.field.beta ** m
            self._pow[m] = p
        return p

    def branch_at(self, x):
        for i, br in enumerate(self.branches):
            if br.contains(x):
                return i
        raise OutOfDomain(f"{x} is not in [0, 1]")

    def evaluate_branch(self, i, x):
        br = self.branches[i]
        y = self.beta_pow(br.m) * x
        return (y if br.epsilon > 0 else -y) + br.b

    def breakpoints(self):
        pts = []
        for br in self.branches:
            for p in (br.left, br.right):
                if not pts or pts[-1] != p:
                    pts.append(p)
        return pts

    def __call__(self, x):
        return apply(self, x)[0]


def _same_field(field, *elements):
    for e in elements:
        if e.field.key != field.key:
            raise FieldMismatch("branch data belongs to another field")


def build_map(field, branches, label="", kind="custom", params=None):
    """Validate a branch list and return a PLMap with branches sorted left to right."""
    if not branches:
        raise PartitionGap("a map needs at least one branch")
    brs = []
    for br in branches:
        if not isinstance(br, Branch):
            br = _branch_from_tuple(field, br)
        _same_field(field, br.left, br.right, br.b)
        if br.epsilon not in (1, -1):
            raise ValueError("epsilon must be +1 or -1")
        if int(br.m) != br.m or br.m < 1:
            raise ValueError("m must be a positive integer")
        s = (br.right - br.left).sign()
        if s < 0 or (s == 0 and not (br.left_closed and br.right_closed)):
            raise PartitionGap(f"empty branch interval {br.interval_str()}")
        brs.append(br)
    brs.sort(key=lambda br: (br.left, not br.left_closed, br.right))
    if brs[0].left.sign() != 0 and brs[0].left < 0:
        raise PartitionOverlap("branch extends below 0")
    pos = field.zero
    covered = False
    for br in brs:
        s = (br.left - pos).sign()
        if s < 0 or (s == 0 and covered and br.left_closed):
            raise PartitionOverlap(f"branch {br.interval_str()} overlaps its predecessor")
        if s > 0 or (not covered and not br.left_closed):
            raise PartitionGap(f"gap before {br.interval_str()}")
        pos, covered = br.right, br.right_closed
    if pos != field.one or not covered:
        if pos > 1:
            raise PartitionOverlap("branch extends beyond 1")
        raise PartitionGap(f"partition stops at {pos}")
    plmap = PLMap(field, tuple(brs), label, kind, dict(params or {}))
    for i, br in enumerate(plmap.branches):
        for x in (br.left, br.right):
            y = plmap.evaluate_branch(i, x)
            if y.sign() < 0 or y > 1:
                raise ImageEscapes(f"branch {i} sends {x} to {y}, outside [0, 1]")
    return plmap


def _branch_from_tuple(field, data):
    # (left, right, left_closed, right_closed, epsilon, m, b)
    left, right, lc, rc, eps, m, b = data
    return Branch(field.element(left), field.element(right), bool(lc), bool(rc), int(eps), int(m),
                  field.element(b))


def _br(field, left, right, eps, m, b, left_closed=True, right_closed=False):
    e = field.element
    return Branch(e(left), e(right), left_closed, right_closed, eps, m, e(b))


# ---------------------------------------------------------------------------
# evaluation


def apply(plmap, x):
    """Exact image of x and the index of the branch owning x."""
    x = plmap.field.element(x)
    i = plmap.branch_at(x)
    return plmap.evaluate_branch(i, x), i


def _sided_owner(plmap, x, side):
    for i, br in enumerate(plmap.branches):
        if br.is_singleton:
            continue
        lo = (x - br.left).sign()
        hi = (x - br.right).sign()
        if side == RIGHT and lo >= 0 and hi < 0:
            return i
        if side == LEFT and lo > 0 and hi <= 0:
            return i
    return None


def apply_one_sided(plmap, x, side, boundary="error"):
    """Limit of S at x from the given side, and the side the image is approached from.

    With ``boundary="owner"`` the points 0 (from the left) and 1 (from the
    right), which have no one-sided neighbourhood in [0, 1], are mapped by
    the branch that owns them and keep their side.
    """
    if side not in (LEFT, RIGHT):
        raise ValueError("side must be 'left' or 'right'")
    x = plmap.field.element(x)
    if x.sign() < 0 or x > 1:
        raise OutOfDomain(f"{x} is not in [0, 1]")
    i = _sided_owner(plmap, x, side)
    if i is None:
        if boundary != "owner":
            raise NoSidedNeighborhood(f"no {side} neighbourhood of {x} in [0, 1]")
        i = plmap.branch_at(x)
        return plmap.evaluate_branch(i, x), side, i
    br = plmap.branches[i]
    new_side = side if br.epsilon > 0 else (LEFT if side == RIGHT else RIGHT)
    return plmap.evaluate_branch(i, x), new_side, i


def affine_form(plmap, x0, n):
    """(sign, theta_n, intercept) with S^n(x0) = sign * beta^theta_n * x0 + intercept."""
    x = plmap.field.element(x0)
    form = AffineForm(1, 0, plmap.field.zero)
    for _ in range(n):
        x, i = apply(plmap, x)
        br = plmap.branches[i]
        form = form.then(br, plmap.beta_pow(br.m))
    return form


# ---------------------------------------------------------------------------
# constructors


def beta_map(field):
    """T(x) = {beta x}, with a singleton branch at 1 when beta is an integer."""
    beta = field.beta
    k = beta.floor()
    inv = beta.inverse()
    brs = [_br(field, j * inv, (j + 1) * inv, 1, 1, -j) for j in range(k)]
    last_left = k * inv
    brs.append(Branch(last_left, field.one, True, True, 1, 1, field.element(-k)))
    return build_map(field, brs, label="T", kind="beta")


def flip_radix_map(r, s):
    """Radix-r map whose i-th branch is flipped when s[i] = 1; 1 goes to 0."""
    r = int(r)
    if r < 2:
        raise ValueError("r must be at least 2")
    s = [int(v) for v in s]
    if len(s) != r:
        raise LengthMismatch(f"flip vector has length {len(s)}, expected {r}")
    if any(v not in (0, 1) for v in s):
        raise ValueError("flip vector entries must be 0 or 1")
    field = make_field([-r, 1], (1, r + 1))
    brs = []
    for i, si in enumerate(s):
        if si:
            brs.append(_br(field, Fraction(i, r), Fraction(i + 1, r), -1, 1, i + 1))
        else:
            brs.append(_br(field, Fraction(i, r), Fraction(i + 1, r), 1, 1, -i))
    brs.append(Branch(field.one, field.one, True, True, 1, 1, field.element(-r)))
    label = "tent" if (r == 2 and s == [0, 1]) else f"flip{r}({''.join(map(str, s))})"
    return build_map(field, brs, label=label, kind="flip", params={"r": r, "s": s})


def tent_map():
    return flip_radix_map(2, (0, 1))


def golden_field():
    return make_field([-1, -1, 1], (1, 2))


def kn_pair(which):
    """The pairs (T1, S1) over beta = 2 and (T2, S2) over the golden mean."""
    if which == 1:
        field = make_field([-2, 1], (1, 3))
        T = beta_map(field)
        T.label = "T1"
        h, q = Fraction(1, 2), Fraction(3, 4)
        S = build_map(field, [
            _br(field, 0, h, 1, 1, 0),
            _br(field, h, q, 1, 2, -2),
            _br(field, q, 1, 1, 2, -3, right_closed=True),
        ], label="S1", kind="kn", params={"which": 1})
        return T, S
    if which == 2:
        field = golden_field()
        T = beta_map(field)
        T.label = "T2"
        inv = field.beta.inverse()
        S = build_map(field, [
            Branch(field.zero, inv, True, False, 1, 1, field.zero),
            Branch(inv, field.one, True, True, 1, 2, -field.beta),
        ], label="S2", kind="kn", params={"which": 2})
        return T, S
    raise ValueError("which must be 1 or 2")


def handelman_search(field, max_l, max_coeff):
    """All (a_1..a_l), l <= max_l, entries <= max_coeff, a_l > 0, with 1 = sum a_i beta^-i."""
    beta = field.beta
    bf = float(beta)
    pows = [beta ** k for k in range(max_l + 1)]
    out = []
    for length in range(1, max_l + 1):
        target = pows[length]
        tf = bf ** length
        for head in itertools.product(range(max_coeff + 1), repeat=length - 1):
            for last in range(1, max_coeff + 1):
                vec = head + (last,)
                approx = sum(a * bf ** (length - i - 1) for i, a in enumerate(vec))
                if abs(approx - tf) > 1e-6 * (1 + tf):
                    continue
                total = field.zero
                for i, a in enumerate(vec):
                    if a:
                        total = total + a * pows[length - i - 1]
                if total == target:
                    out.append(vec)
    return out


def handelman_map(field, vector, arrangement=None, signs=None):
    """Map whose pieces of length beta^-i carry slope +-beta^i and cover [0, 1].

    ``arrangement`` lists the exponent i of each piece from left to right
    (default: increasing i); ``signs`` gives +1/-1 per piece.  A "+" piece is
    beta^i (x - left), a "-" piece is beta^i (right - x).
    """
    vector = [int(a) for a in vector]
    if any(a < 0 for a in vector) or not any(vector):
        raise BadIdentity("the vector must be nonnegative and nonzero")
    beta_inv = field.beta.inverse()
    total = field.zero
    for i, a in enumerate(vector, start=1):
        total = total + a * beta_inv ** i
    if total != 1:
        raise BadIdentity(f"sum a_i beta^-i = {total}, not 1")
    pieces = sorted(i for i, a in enumerate(vector, start=1) for _ in range(a))
    if arrangement is None:
        arrangement = pieces
    arrangement = [int(i) for i in arrangement]
    if sorted(arrangement) != pieces:
        raise BadArrangement(f"arrangement {arrangement} is not a permutation of {pieces}")
    if signs is None:
        signs = [1] * len(arrangement)
    signs = [_sign_value(s) for s in signs]
    if len(signs) != len(arrangement):
        raise LengthMismatch(f"{len(signs)} signs for {len(arrangement)} pieces")
    brs = []
    left = field.zero
    for k, (i, sg) in enumerate(zip(arrangement, signs)):
        right = left + beta_inv ** i if k < len(arrangement) - 1 else field.one
        scale = field.beta ** i
        b = -(scale * left) if sg > 0 else scale * right
        brs.append(Branch(left, right, True, k == len(arrangement) - 1, sg, i, b))
        left = right
    label = "handelman(" + ",".join(map(str, vector)) + ")"
    return build_map(field, brs, label=label, kind="handelman",
                     params={"vector": vector, "arrangement": arrangement, "signs": signs})


def _sign_value(s):
    if s in ("+", 1, "1", "+1"):
        return 1
    if s in ("-", -1, "-1", "−"):
        return -1
    raise ValueError(f"bad sign {s!r}")


def t_max(field):
    """Largest admissible t for S_t: ceil(beta)/beta - 1."""
    beta = field.beta
    k = beta.floor()
    ceil = k if beta == k else k + 1
    return ceil * beta.inverse() - 1


def st_map(field, t=0):
    """The S_t family: beta x - j below floor(beta)/beta - t, beta(x-1)+1 above."""
    t = field.element(t)
    if t.sign() < 0 or t > t_max(field):
        raise TOutOfRange(f"t = {t} outside [0, {t_max(field)}]")
    beta = field.beta
    k = beta.floor()
    if beta == k:
        plmap = beta_map(field)
        plmap.label, plmap.kind, plmap.params = "S_0", "st", {"t": t}
        return plmap
    inv = beta.inverse()
    cut = k * inv - t
    brs = [_br(field, j * inv, (j + 1) * inv, 1, 1, -j) for j in range(k - 1)]
    brs.append(Branch((k - 1) * inv, cut, True, False, 1, 1, field.element(-(k - 1))))
    brs.append(Branch(cut, field.one, True, True, 1, 1, 1 - beta))
    return build_map(field, brs, label=f"S_t(t={t})", kind="st", params={"t": t})


def flipped_beta_counterexample(field):
    """-beta x + 1 on [0, 1/beta), beta x - 1 on [1/beta, 1]; needs beta^2 < 2."""
    beta = field.beta
    if not (beta > 1 and beta * beta < 2):
        raise BetaOutOfRange("the flipped beta map needs 1 < beta < sqrt(2)")
    inv = beta.inverse()
    brs = [Branch(field.zero, inv, True, False, -1, 1, field.one),
           Branch(inv, field.one, True, True, 1, 1, -field.one)]
    return build_map(field, brs, label="flipped-beta", kind="flipped-beta")


def dissipative_interval(field):
    """[beta - 1, 1 + beta - beta^2] for the flipped beta map."""
    beta = field.beta
    return beta - 1, 1 + beta - beta * beta


# ---------------------------------------------------------------------------
# digits of S_t


def digit_set(field):
    """D = {0, .., floor(beta)-1} together with beta - 1."""
    k = field.beta.floor()
    return [field.element(j) for j in range(k)] + [field.beta - 1]


def digit_alpha(plmap, x):
    """alpha(x) = beta x - S(x) for maps whose branches all have slope beta."""
    x = plmap.field.element(x)
    if x.sign() < 0 or x >= 1:
        raise OutOfDomain("alpha is defined on [0, 1)")
    br = plmap.branches[plmap.branch_at(x)]
    if br.epsilon != 1 or br.m != 1:
        raise ValueError("digit_alpha needs a map with all slopes equal to beta")
    return -br.b


# ---------------------------------------------------------------------------
# map description files


def _clean(text):
    return text.replace("−", "-").strip()


def _split_top(text, sep=","):
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        if ch == sep and depth == 0:
            parts.append("".join(cur).strip())
            cur = []
        else:
            cur.append(ch)
    if "".join(cur).strip():
        parts.append("".join(cur).strip())
    return parts


def parse_element(field, text):
    """A scalar rational or a coordinate tuple ``(c0, c1, ...)``."""
    text = _clean(text)
    try:
        if text.startswith("(") and text.endswith(")"):
            coords = [Fraction(c) for c in _split_top(text[1:-1])]
            return field.element(coords)
        return field.element(Fraction(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad field element {text!r}") from exc


def format_element(x):
    return "(" + ", ".join(str(c) for c in x.coords) + ")"


def _parse_interval(field, text):
    text = _clean(text)
    if len(text) < 2 or text[0] not in "[(" or text[-1] not in "])":
        raise ParseError(f"bad interval {text!r}")
    parts = _split_top(text[1:-1])
    if len(parts) != 2:
        raise ParseError(f"bad interval {text!r}")
    return (parse_element(field, parts[0]), parse_element(field, parts[1]),
            text[0] == "[", text[-1] == "]")


def _parse_builtin_args(text):
    args = {}
    for part in _split_top(text, ";"):
        if not part:
            continue
        if "=" not in part:
            raise ParseError(f"builtin argument {part!r} needs key=value")
        k, v = part.split("=", 1)
        args[k.strip()] = v.strip()
    return args


def builtin_map(spec, field=None):
    """Construct a named map: kn1, kn2, T1, T2, tent, beta, st(t=..), flip(r=..; s=..),
    handelman(a=..; order=..; signs=..), flipped."""
    spec = _clean(spec)
    m = re.fullmatch(r"([A-Za-z0-9_\-]+)\s*(?:\((.*)\))?", spec)
    if not m:
        raise ParseError(f"bad builtin {spec!r}")
    name, argtext = m.group(1).lower(), m.group(2) or ""
    args = _parse_builtin_args(argtext)
    if name in ("kn1", "s1"):
        return kn_pair(1)[1]
    if name in ("kn2", "s2"):
        return kn_pair(2)[1]
    if name == "t1":
        return kn_pair(1)[0]
    if name == "t2":
        return kn_pair(2)[0]
    if name == "tent":
        return tent_map()
    if name == "flip":
        r = int(args.get("r", 2))
        s = [int(v) for v in re.split(r"[,\s]+", args.get("s", "")) if v]
        return flip_radix_map(r, s)
    if field is None:
        field = golden_field()
    if name == "beta":
        return beta_map(field)
    if name in ("st", "s_t"):
        return st_map(field, parse_element(field, args.get("t", "0")))
    if name == "flipped":
        return flipped_beta_counterexample(field)
    if name == "handelman":
        a = [int(v) for v in re.split(r"[,\s]+", args.get("a", "")) if v]
        order = args.get("order")
        order = [int(v) for v in re.split(r"[,\s]+", order) if v] if order else None
        signs = args.get("signs")
        if signs and re.fullmatch(r"[+\-]+", signs):
            signs = list(signs)  # compact form, e.g. "+-"
        elif signs:
            signs = [v for v in re.split(r"[,\s]+", signs) if v]
        return handelman_map(field, a, order, signs)
    raise ParseError(f"unknown builtin {name!r}")


def parse_map_spec(text):
    """Parse a map description (field line, optional label, branch or builtin lines)."""
    field = None
    label = None
    branches = []
    builtin = None
    for raw in text.splitlines():
        line = _clean(raw.split("#", 1)[0])
        if not line:
            continue
        if line.startswith("poly"):
            field = parse_field_spec(line)
        elif line.startswith("label"):
            label = line.split("=", 1)[1].strip()
        elif line.startswith("builtin"):
            builtin = line.split("=", 1)[1].strip()
        elif line.startswith("branch"):
            if field is None:
                raise ParseError("branch given before the field line")
            body = line.split(":", 1)[1] if ":" in line else line[len("branch"):]
            rec = {}
            for part in body.split(";"):
                if "=" in part:
                    k, v = part.split("=", 1)
                    rec[k.strip()] = v.strip()
            try:
                lo, hi, lc, rc = _parse_interval(field, rec["interval"])
                eps = int(rec.get("epsilon", "1"))
                mm = int(rec.get("m", "1"))
                b = parse_element(field, rec.get("b", "0"))
            except KeyError as exc:
                raise ParseError(f"branch record missing {exc}") from exc
            branches.append(Branch(lo, hi, lc, rc, eps, mm, b))
        else:
            raise ParseError(f"unrecognised line {raw!r}")
    if builtin is not None:
        plmap = builtin_map(builtin, field)
    elif branches:
        plmap = build_map(field, branches, label=label or "")
    else:
        raise ParseError("map description has neither branches nor a builtin")
    if label is not None:
        plmap.label = label
    return plmap


def format_map_spec(plmap):
    lines = [format_field_spec(plmap.field), f"label = {plmap.label}"]
    for br in plmap.branches:
        lb = "[" if br.left_closed else "("
        rb = "]" if br.right_closed else ")"
        lines.append(
            f"branch: interval = {lb}{format_element(br.left)}, {format_element(br.right)}{rb}; "
            f"epsilon = {br.epsilon}; m = {br.m}; b = {format_element(br.b)}")
    return "\n".join(lines) + "\n"
