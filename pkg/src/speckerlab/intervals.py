"""Sets of naturals stored as sorted disjoint half-open intervals.

Witness sets (the J sets of the preservation induction, condition-(4)
witness sets) contain astronomically many elements; interval storage keeps
membership, counting and minima exact at any magnitude.  The final
interval may be unbounded (``end is None``).
"""

from .serialize import int_to_dec


class IntervalSet:
    __slots__ = ("parts",)

    def __init__(self, parts=()):
        norm = []
        for lo, hi in sorted(parts, key=lambda p: p[0]):
            if hi is not None and hi <= lo:
                continue
            if norm and (norm[-1][1] is None or lo <= norm[-1][1]):
                prev_lo, prev_hi = norm[-1]
                if prev_hi is None or (hi is not None and hi <= prev_hi):
                    new_hi = prev_hi
                elif hi is None:
                    new_hi = None
                else:
                    new_hi = max(prev_hi, hi)
                norm[-1] = (prev_lo, new_hi)
            else:
                norm.append((lo, hi))
        self.parts = tuple(norm)

    def __bool__(self):
        return bool(self.parts)

    def __eq__(self, other):
        return isinstance(other, IntervalSet) and self.parts == other.parts

    def __repr__(self):
        return f"IntervalSet({list(self.parts)!r})"

    def __contains__(self, x):
        for lo, hi in self.parts:
            if x < lo:
                return False
            if hi is None or x < hi:
                return True
        return False

    def intersect(self, lo, hi):
        """Restrict to [lo, hi); hi=None keeps unbounded tails."""
        out = []
        for a, b in self.parts:
            c = max(a, lo)
            if hi is None:
                d = b
            elif b is None:
                d = hi
            else:
                d = min(b, hi)
            if d is None or c < d:
                out.append((c, d))
        return IntervalSet(out)

    def is_bounded(self):
        return not self.parts or self.parts[-1][1] is not None

    def count(self):
        """Exact cardinality; requires a bounded set."""
        if not self.is_bounded():
            raise ValueError("count of unbounded interval set")
        return sum(hi - lo for lo, hi in self.parts)

    def count_below(self, horizon):
        return self.intersect(0, horizon).count()

    def min_element(self, at_least=0):
        """Least member >= at_least, or None."""
        for lo, hi in self.parts:
            if hi is not None and hi <= at_least:
                continue
            return max(lo, at_least)
        return None

    def first(self, k, at_least=0):
        """The k smallest members >= at_least (fewer if the set is smaller)."""
        out = []
        for lo, hi in self.parts:
            x = max(lo, at_least)
            while (hi is None or x < hi) and len(out) < k:
                out.append(x)
                x += 1
            if len(out) >= k:
                break
        return out

    def to_json(self):
        return [
            {"lo": int_to_dec(lo), "hi": None if hi is None else int_to_dec(hi)}
            for lo, hi in self.parts
        ]
