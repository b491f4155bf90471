"""Paired partition, block-constant matrix enumeration, and growth scales.

The partition splits the naturals into infinitely many blocks, each
containing infinitely many adjacent pairs {2p, 2p+1}; the block of n is the
2-adic valuation of its pair index plus one, so membership is a pure rule
with no stored tables.  Matrices are assigned block-constantly through an
explicit bijection between blocks and integer matrices, ordered by largest
absolute entry and then lexicographically on the flattened entries.
"""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass

from .errors import HorizonExceeded
from .intlat import IntMatrix, _ceil_div
from .serialize import dec_to_ints, int_to_dec, ints_to_dec


def partition_block(n: int) -> int:
    """Block index of n; pairs {2p, 2p+1} land in block nu_2(p + 1)."""
    if n < 0:
        raise ValueError("natural expected")
    p = n // 2 + 1
    return (p & -p).bit_length() - 1


def first_pair_in_block(l: int) -> int:
    """Least even n with n and n+1 both in block l (witness schedule)."""
    return 2 * (2**l - 1)


def adjacent_pair_in_block(n: int, l: int) -> bool:
    """True when n and n+1 lie in the same block l."""
    return partition_block(n) == l and partition_block(n + 1) == l


# Matrix <-> block bijection -------------------------------------------------


def _shell_of(l: int, digits: int) -> int:
    s = 0
    while (2 * s + 1) ** digits <= l:
        s += 1
    return s


def matrix_for_block(l: int, k: int) -> IntMatrix:
    """Decode block l into a k x (k+1) matrix via the canonical order."""
    if l < 0:
        raise ValueError("block index must be a natural")
    digits = k * (k + 1)
    if l == 0:
        return IntMatrix(k, k + 1, (0,) * digits)
    s = _shell_of(l, digits)
    r = l - (2 * s - 1) ** digits
    flat = []
    has_extreme = False
    for pos in range(digits):
        rem = digits - pos - 1
        for v in range(-s, s + 1):
            if has_extreme or abs(v) == s:
                cnt = (2 * s + 1) ** rem
            else:
                cnt = (2 * s + 1) ** rem - (2 * s - 1) ** rem
            if r < cnt:
                flat.append(v)
                has_extreme = has_extreme or abs(v) == s
                break
            r -= cnt
        else:
            raise AssertionError("unrank fell off the shell")
    return IntMatrix(k, k + 1, tuple(flat))


def block_of_matrix(B: IntMatrix) -> int:
    """Inverse of matrix_for_block for B's own shape."""
    s = B.max_abs_entry()
    if s == 0:
        return 0
    digits = B.rows * B.cols
    flat = B.entries
    rank_full = 0
    for i, b in enumerate(flat):
        rank_full += (b + s) * (2 * s + 1) ** (digits - 1 - i)
    rank_small = 0
    for i, b in enumerate(flat):
        below = min(max(b + s - 1, 0), 2 * s - 1)
        rank_small += below * (2 * s - 1) ** (digits - 1 - i)
        if abs(b) > s - 1:
            break
    return (2 * s - 1) ** digits + (rank_full - rank_small)


@dataclass(frozen=True)
class MatrixEnumeration:
    """Block-constant assignment n -> A_n with every matrix owning a block."""

    k: int

    def matrix_at(self, n: int) -> IntMatrix:
        return matrix_for_block(partition_block(n), self.k)

    def block_limit(self, n: int) -> int:
        """Largest block index appearing among A_0 .. A_n."""
        return (n // 2 + 1).bit_length() - 1


# Scales ---------------------------------------------------------------------


def iroot(x: int, e: int) -> int:
    """floor(x ** (1/e)) for naturals, exact at any magnitude."""
    if x < 0 or e < 1:
        raise ValueError("iroot needs x >= 0, e >= 1")
    if x == 0 or e == 1:
        return x
    r = 1 << _ceil_div(x.bit_length(), e)
    while True:
        nr = ((e - 1) * r + x // r ** (e - 1)) // e
        if nr >= r:
            break
        r = nr
    while r**e > x:
        r -= 1
    while (r + 1) ** e <= x:
        r += 1
    return r


class Scale:
    """Nondecreasing function on the naturals with exact integer values.

    Either a finite table (optionally extended by the slope-1 linear tail)
    or the monomial rule n -> (n + shift) ** exp.  Tables beyond their last
    entry without a tail raise HorizonExceeded.
    """

    __slots__ = ("kind", "values", "tail", "shift", "exp")

    def __init__(self, kind, values=None, tail=None, shift=None, exp=None):
        self.kind = kind
        self.values = tuple(values) if values is not None else None
        self.tail = tail
        self.shift = shift
        self.exp = exp
        if kind == "table":
            if not self.values:
                raise ValueError("empty table")
            if any(b < a for a, b in zip(self.values, self.values[1:])):
                raise ValueError("table must be nondecreasing")
            if tail not in (None, "linear"):
                raise ValueError(f"unknown tail rule {tail!r}")
        elif kind == "poly":
            if shift is None or exp is None or exp < 1:
                raise ValueError("poly scale needs shift and exp >= 1")
        else:
            raise ValueError(f"unknown scale kind {kind!r}")

    @classmethod
    def from_table(cls, values, tail=None):
        return cls("table", values=values, tail=tail)

    @classmethod
    def poly(cls, shift, exp):
        return cls("poly", shift=shift, exp=exp)

    def eval(self, n: int) -> int:
        if n < 0:
            raise ValueError("natural expected")
        if self.kind == "poly":
            return (n + self.shift) ** self.exp
        if n < len(self.values):
            return self.values[n]
        if self.tail == "linear":
            return self.values[-1] + (n - (len(self.values) - 1))
        raise HorizonExceeded(f"scale table of length {len(self.values)} consulted at {n}")

    # Seed protocol used by the function algebra.
    def value_at(self, n: int) -> int:
        return self.eval(n)

    @property
    def is_nondecreasing_nonneg(self) -> bool:
        if self.kind == "poly":
            return True
        return self.values[0] >= 0

    def step_pieces(self):
        return None

    def __len__(self):
        if self.kind != "table":
            raise TypeError("rule scales have no table length")
        return len(self.values)

    def strictly_increasing(self) -> bool:
        if self.kind == "poly":
            return True
        return all(b > a for a, b in zip(self.values, self.values[1:]))

    def max_arg_below(self, bound: int) -> int:
        """Largest n with f(n) < bound, or -1; requires unbounded scales to
        be poly or linear-tailed tables."""
        if self.kind == "poly":
            if bound <= self.shift**self.exp:
                return -1
            return iroot(bound - 1, self.exp) - self.shift
        idx = bisect_left(self.values, bound) - 1
        if idx < len(self.values) - 1 or self.tail is None:
            return idx
        return (len(self.values) - 1) + (bound - 1 - self.values[-1])

    def to_json(self):
        if self.kind == "poly":
            return {"kind": "poly", "shift": self.shift, "exp": self.exp}
        return {
            "kind": "table",
            "values": ints_to_dec(self.values),
            "tail": self.tail,
        }

    @classmethod
    def from_json(cls, obj):
        if obj["kind"] == "poly":
            return cls.poly(int(obj["shift"]), int(obj["exp"]))
        return cls.from_table(dec_to_ints(obj["values"]), tail=obj.get("tail"))

    def __repr__(self):
        if self.kind == "poly":
            return f"Scale.poly({self.shift}, {self.exp})"
        return f"Scale.from_table(<{len(self.values)} values>, tail={self.tail!r})"


def standin_family(count: int):
    """Finite stand-in for a dominating family: d_i(n) = (n + 2) ** (i + 1)."""
    if count < 1:
        raise ValueError("need at least one member")
    return [Scale.poly(2, i + 1) for i in range(count)]


def _as_nat_fn(f):
    if isinstance(f, Scale):
        return f.eval
    if callable(f):
        return f
    if hasattr(f, "value_at"):
        return f.value_at
    raise TypeError(f"cannot evaluate {f!r} as a function on naturals")


def diag_scale(fs, length: int, horizon_cap=None) -> Scale:
    """Diagonal scale h over the listed functions.

    h(0) = 0 and h(n+1) = max(h(n), f_0(h(n)), ..., f_n(h(n))) + 1, with the
    list padded by the zero function beyond its end.  The result is strictly
    increasing and satisfies f_i(h(n)) < h(n+1) for every i <= n.
    """
    if length < 1:
        raise ValueError("need at least h(0)")
    fns = [_as_nat_fn(f) for f in fs]
    values = [0]
    for n in range(length - 1):
        x = values[-1]
        best = x
        for i in range(min(n + 1, len(fns))):
            v = fns[i](x)
            if v > best:
                best = v
        nxt = best + 1
        if horizon_cap is not None and nxt > horizon_cap:
            raise HorizonExceeded(
                f"h({n + 1}) = {nxt if nxt.bit_length() <= 64 else '<big>'} exceeds the configured cap"
            )
        values.append(nxt)
    return Scale.from_table(values)


def f_ll_h(f, h: Scale, horizon: int) -> set:
    """{n < horizon : f(h(n)) < h(n+1)}; h must be defined on [0, horizon]."""
    fn = _as_nat_fn(f)
    return {n for n in range(horizon) if fn(h.eval(n)) < h.eval(n + 1)}


@dataclass(frozen=True)
class DPrimeReport:
    L: int
    pairs_required: int
    horizon: int
    counts: tuple  # of (f_index, block, count)
    passed: bool

    def to_json(self):
        return {
            "L": self.L,
            "pairs_required": self.pairs_required,
            "horizon": self.horizon,
            "counts": [
                {"f": fi, "block": l, "pairs": int_to_dec(c)} for fi, l, c in self.counts
            ],
            "passed": self.passed,
        }


def dprime_condition(Y, h: Scale, L: int, pairs_required: int, horizon: int) -> DPrimeReport:
    """Finite surrogate of the paired-domination condition.

    For each listed f and each block l < L, counts n < horizon with n, n+1
    adjacent in block l and both inside [f << h]; passes when every count
    reaches pairs_required.  h must be defined on [0, horizon + 1].
    """
    rows = []
    ok = True
    for fi, f in enumerate(Y):
        fn = _as_nat_fn(f)
        inside = f_ll_h(fn, h, horizon + 1)
        for l in range(L):
            count = sum(
                1
                for n in range(horizon)
                if adjacent_pair_in_block(n, l) and n in inside and (n + 1) in inside
            )
            rows.append((fi, l, count))
            if count < pairs_required:
                ok = False
    return DPrimeReport(L, pairs_required, horizon, tuple(rows), ok)


def nwd_extend(s, f, l: int, m: int):
    """Extend an increasing sequence so every further extension escapes the
    meager trap indexed by (f, l, m).

    Finds the least n >= max(len(s), m) whose pair {n, n+1} sits in block l
    and grows s minimally to length n+3 with f(s(n)) < s(n+1) and
    f(s(n+1)) < s(n+2).  A sequence already long enough and satisfying both
    inequalities at some qualifying pair is returned unchanged.
    """
    s = tuple(s)
    if any(b <= a for a, b in zip(s, s[1:])):
        raise ValueError("sequence must be strictly increasing")
    fn = _as_nat_fn(f)
    for n in range(m, len(s) - 2):
        if adjacent_pair_in_block(n, l) and fn(s[n]) < s[n + 1] and fn(s[n + 1]) < s[n + 2]:
            return s
    n = max(len(s), m)
    while not adjacent_pair_in_block(n, l):
        n += 1
    vals = list(s) if s else [0]
    while len(vals) < n + 3:
        idx = len(vals)
        nxt = vals[-1] + 1
        if idx == n + 1:
            nxt = max(nxt, fn(vals[n]) + 1)
        elif idx == n + 2:
            nxt = max(nxt, fn(vals[n + 1]) + 1)
        vals.append(nxt)
    return tuple(vals)
