"""Lazily evaluated integer-sequence expressions closed under the five
pointwise operations: running absolute maximum, pairwise absolute maximum,
threshold locator, sum, and negation.

Expressions are immutable trees over named seeds.  Evaluation is exact at
any argument magnitude: running maxima use monotonicity metadata or the
piecewise-constant structure of their argument instead of scanning, and
the threshold locator resolves per piece.  Partiality of the locator is
encoded as an Unknown result, never as divergence.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import HorizonExceeded
from .intlat import _ceil_div
from .serialize import canonical_dumps, dec_to_int, int_to_dec

_SCAN_CAP = 2_000_000


@dataclass(frozen=True)
class Unknown:
    reason: str = "no witness below horizon"


def is_unknown(v) -> bool:
    return isinstance(v, Unknown)


# Seed backings ---------------------------------------------------------------


class TableSeed:
    """Total on [0, len(values)); anything beyond is a horizon error."""

    __slots__ = ("values",)

    def __init__(self, values):
        self.values = tuple(int(v) for v in values)

    def value_at(self, n):
        if n < 0:
            raise ValueError("natural expected")
        if n >= len(self.values):
            raise HorizonExceeded(f"table seed of length {len(self.values)} consulted at {n}")
        return self.values[n]

    @property
    def is_nondecreasing_nonneg(self):
        return self.values[0] >= 0 and all(
            b >= a for a, b in zip(self.values, self.values[1:])
        )

    def step_pieces(self):
        return tuple(range(len(self.values))), self.values, len(self.values)


class RuleSeed:
    """Total rule; flagged nondecreasing-nonnegative by the caller."""

    __slots__ = ("name", "fn", "_nn")

    def __init__(self, name, fn, nondecreasing_nonneg=True):
        self.name = name
        self.fn = fn
        self._nn = nondecreasing_nonneg

    def value_at(self, n):
        return self.fn(n)

    @property
    def is_nondecreasing_nonneg(self):
        return self._nn

    def step_pieces(self):
        return None


# Expression nodes ------------------------------------------------------------


@dataclass(frozen=True)
class Seed:
    name: str
    backing: object = field(compare=False, hash=False, repr=False)


@dataclass(frozen=True)
class Hat:
    child: object


@dataclass(frozen=True)
class MaxPair:
    left: object
    right: object


@dataclass(frozen=True)
class ThresholdMin:
    child: object
    c: int
    horizon: int


@dataclass(frozen=True)
class Sum:
    left: object
    right: object


@dataclass(frozen=True)
class Neg:
    child: object


FuncExpr = (Seed, Hat, MaxPair, ThresholdMin, Sum, Neg)


def seed(name, backing):
    return Seed(name, backing)


def hat(g):
    return Hat(g)


def max_pair(f, g):
    return MaxPair(f, g)


def threshold_min(g, c, horizon):
    if c < 1:
        raise ValueError("threshold constant must be >= 1")
    return ThresholdMin(g, int(c), int(horizon))


def add(f, g):
    return Sum(f, g)


def neg(g):
    return Neg(g)


# Structural metadata ---------------------------------------------------------


def is_nondecreasing_nonneg(expr) -> bool:
    if isinstance(expr, Seed):
        return bool(expr.backing.is_nondecreasing_nonneg)
    if isinstance(expr, Hat):
        return True
    if isinstance(expr, ThresholdMin):
        return True
    if isinstance(expr, (MaxPair, Sum)):
        return is_nondecreasing_nonneg(expr.left) and is_nondecreasing_nonneg(expr.right)
    return False


def step_pieces(expr):
    """(starts, values, defined_upto) when expr is piecewise constant with
    finitely many jumps; None otherwise.  defined_upto None means total."""
    if isinstance(expr, Seed):
        return expr.backing.step_pieces()
    if isinstance(expr, Neg):
        p = step_pieces(expr.child)
        if p is None:
            return None
        starts, values, upto = p
        return starts, tuple(-v for v in values), upto
    if isinstance(expr, Hat):
        p = step_pieces(expr.child)
        if p is None:
            return None
        starts, values, upto = p
        out, run = [], 0
        for v in values:
            run = max(run, abs(v))
            out.append(run)
        return starts, tuple(out), upto
    if isinstance(expr, (Sum, MaxPair)):
        pl = step_pieces(expr.left)
        pr = step_pieces(expr.right)
        if pl is None or pr is None:
            return None
        merged = sorted(set(pl[0]) | set(pr[0]))
        lv = _piece_values(pl, merged)
        rv = _piece_values(pr, merged)
        if isinstance(expr, Sum):
            values = tuple(a + b for a, b in zip(lv, rv))
        else:
            values = tuple(max(abs(a), abs(b)) for a, b in zip(lv, rv))
        upto = _min_upto(pl[2], pr[2])
        return tuple(merged), values, upto
    return None


def _piece_values(pieces, starts):
    p_starts, p_values, _ = pieces
    out = []
    i = -1
    for x in starts:
        while i + 1 < len(p_starts) and p_starts[i + 1] <= x:
            i += 1
        out.append(p_values[i] if i >= 0 else 0)
    return out


def _min_upto(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


# Evaluation ------------------------------------------------------------------


def evaluate(expr, n: int):
    """Exact value at n, or Unknown (threshold locator ran off its horizon)."""
    if n < 0:
        raise ValueError("natural expected")
    if isinstance(expr, Seed):
        return expr.backing.value_at(n)
    if isinstance(expr, Hat):
        return eval_hat(expr.child, n)
    if isinstance(expr, Neg):
        v = evaluate(expr.child, n)
        return v if is_unknown(v) else -v
    if isinstance(expr, Sum):
        a = evaluate(expr.left, n)
        if is_unknown(a):
            return a
        b = evaluate(expr.right, n)
        return b if is_unknown(b) else a + b
    if isinstance(expr, MaxPair):
        a = evaluate(expr.left, n)
        if is_unknown(a):
            return a
        b = evaluate(expr.right, n)
        return b if is_unknown(b) else max(abs(a), abs(b))
    if isinstance(expr, ThresholdMin):
        return _eval_threshold_min(expr, n)
    raise TypeError(f"not a FuncExpr: {expr!r}")


def eval_hat(expr, n: int):
    """max(|expr(m)| : m <= n) without scanning when structure permits."""
    if isinstance(expr, Neg):
        return eval_hat(expr.child, n)
    if isinstance(expr, Hat):
        return eval_hat(expr.child, n)
    if isinstance(expr, MaxPair):
        a = eval_hat(expr.left, n)
        if is_unknown(a):
            return a
        b = eval_hat(expr.right, n)
        return b if is_unknown(b) else max(a, b)
    if is_nondecreasing_nonneg(expr):
        return evaluate(expr, n)
    pieces = step_pieces(expr)
    if pieces is not None:
        starts, values, upto = pieces
        if upto is not None and n >= upto:
            raise HorizonExceeded(f"running max consulted at {n} beyond {upto}")
        best = 0
        for s, v in zip(starts, values):
            if s > n:
                break
            if abs(v) > best:
                best = abs(v)
        return best
    if n > _SCAN_CAP:
        raise ValueError("running max over an unstructured expression at a huge index")
    best = 0
    for m in range(n + 1):
        v = evaluate(expr, m)
        if is_unknown(v):
            return v
        if abs(v) > best:
            best = abs(v)
    return best


def _eval_threshold_min(expr, n: int):
    g, c, horizon = expr.child, expr.c, expr.horizon
    if n >= horizon:
        return Unknown(f"no witness in empty window [{n}, {horizon})")
    pieces = step_pieces(g)
    if pieces is not None:
        starts, values, upto = pieces
        limit = horizon if upto is None else min(horizon, upto)
        for i, (s, v) in enumerate(zip(starts, values)):
            end = starts[i + 1] if i + 1 < len(starts) else limit
            end = min(end, limit)
            cand = max(n, s, _ceil_div(v + 1, c) - 1)
            if cand < end:
                return cand
        if upto is not None and horizon > upto:
            raise HorizonExceeded(
                f"threshold scan needs values on [{upto}, {horizon}) beyond the table"
            )
        return Unknown("no witness below horizon")
    if horizon - n > _SCAN_CAP:
        raise ValueError("threshold scan over an unstructured expression on a huge window")
    for j in range(n, horizon):
        v = evaluate(g, j)
        if is_unknown(v):
            return v
        if v < c * (j + 1):
            return j
    return Unknown("no witness below horizon")


def eval_or_zero(expr, n: int) -> int:
    """Evaluation with Unknown collapsed to 0 (diagonal-scale convention)."""
    v = evaluate(expr, n)
    return 0 if is_unknown(v) else v


def as_diag_fn(expr):
    """Adapter: expr as a total function for the diagonal recurrence,
    running-max normalized and Unknown-as-zero."""

    def fn(x):
        v = eval_hat(expr, x)
        return 0 if is_unknown(v) else v

    return fn


# Stage seeds and the enumerated fragment -------------------------------------


@dataclass(frozen=True)
class StageSeeds:
    """Everything stage alpha's closure starts from: its own growth function
    plus all functions defined at earlier stages."""

    alpha: int
    phi: object
    earlier: tuple = ()  # (beta, phi_beta, h_beta, gens_beta) ascending


def closure_seeds(stage_data: StageSeeds):
    out = [seed(f"phi{stage_data.alpha}", stage_data.phi)]
    for beta, _phi_b, _h_b, gens_b in stage_data.earlier:
        out.extend(seed(f"g{beta}_{i}", g) for i, g in enumerate(gens_b))
    for beta, phi_b, h_b, _gens_b in stage_data.earlier:
        out.append(seed(f"phi{beta}", phi_b))
        out.append(seed(f"h{beta}", h_b))
    return out


def expr_depth(expr) -> int:
    if isinstance(expr, Seed):
        return 0
    if isinstance(expr, (Hat, Neg, ThresholdMin)):
        return expr_depth(expr.child) + 1
    return max(expr_depth(expr.left), expr_depth(expr.right)) + 1


def expr_size(expr) -> int:
    if isinstance(expr, Seed):
        return 1
    if isinstance(expr, (Hat, Neg, ThresholdMin)):
        return expr_size(expr.child) + 1
    return expr_size(expr.left) + expr_size(expr.right) + 1


def expr_key(expr) -> str:
    return canonical_dumps(expr_to_json(expr))


def _hat_is_cheap(expr) -> bool:
    if isinstance(expr, (Neg, Hat)):
        return _hat_is_cheap(expr.child)
    if isinstance(expr, MaxPair):
        return _hat_is_cheap(expr.left) and _hat_is_cheap(expr.right)
    return is_nondecreasing_nonneg(expr) or step_pieces(expr) is not None


def _tmin_horizon(expr):
    """Horizon for a threshold node over expr: the tightest table bound of
    the step backings involved, or None when expr is not step-structured."""
    pieces = step_pieces(expr)
    if pieces is None:
        return None
    upto = pieces[2]
    if upto is not None:
        return upto
    horizons = _backing_horizons(expr)
    return min(horizons) if horizons else None


def _backing_horizons(expr):
    if isinstance(expr, Seed):
        h = getattr(expr.backing, "horizon", None)
        return [h] if h is not None else []
    if isinstance(expr, (Hat, Neg, ThresholdMin)):
        return _backing_horizons(expr.child)
    if isinstance(expr, (Sum, MaxPair)):
        return _backing_horizons(expr.left) + _backing_horizons(expr.right)
    return []


def enumerate_fragment(seeds, depth=3, count=64, tmin_constants=(1, 2)):
    """Deterministic finite fragment of the closure over the given seeds.

    Breadth-first by expression size, capped at the given tree depth,
    truncated to at most count expressions.  Only expressions whose running
    max is computable without scanning are kept, and threshold nodes are
    formed only over piecewise-constant children (their horizon is the
    child's own table bound).
    """
    out = []
    seen = set()

    def push(e):
        key = expr_key(e)
        if key in seen:
            return
        seen.add(key)
        out.append(e)

    for s in seeds:
        push(s)
    if len(out) >= count:
        return out[:count]

    by_size = {}
    for e in out:
        by_size.setdefault(expr_size(e), []).append(e)

    max_size = 2 ** (depth + 1)
    for target in range(2, max_size + 1):
        new = []
        for e in by_size.get(target - 1, []):
            if expr_depth(e) + 1 > depth:
                continue
            cands = [hat(e), neg(e)]
            th = _tmin_horizon(e)
            if th is not None:
                cands.extend(threshold_min(e, c, th) for c in tmin_constants)
            new.extend(cands)
        for ls in range(1, target - 1):
            rs = target - 1 - ls
            if rs < ls:
                break
            for a in by_size.get(ls, []):
                for b in by_size.get(rs, []):
                    if ls == rs and expr_key(a) > expr_key(b):
                        continue
                    if max(expr_depth(a), expr_depth(b)) + 1 > depth:
                        continue
                    new.append(add(a, b))
                    new.append(max_pair(a, b))
        for e in new:
            if not _hat_is_cheap(e):
                continue
            push(e)
            by_size.setdefault(expr_size(e), []).append(e)
            if len(out) >= count:
                return out[:count]
    return out


# Serialization ---------------------------------------------------------------


def expr_to_json(expr):
    if isinstance(expr, Seed):
        return {"op": "seed", "name": expr.name}
    if isinstance(expr, Hat):
        return {"op": "hat", "child": expr_to_json(expr.child)}
    if isinstance(expr, Neg):
        return {"op": "neg", "child": expr_to_json(expr.child)}
    if isinstance(expr, ThresholdMin):
        return {
            "op": "tmin",
            "child": expr_to_json(expr.child),
            "c": expr.c,
            "horizon": int_to_dec(expr.horizon),
        }
    if isinstance(expr, Sum):
        return {"op": "sum", "left": expr_to_json(expr.left), "right": expr_to_json(expr.right)}
    if isinstance(expr, MaxPair):
        return {
            "op": "maxpair",
            "left": expr_to_json(expr.left),
            "right": expr_to_json(expr.right),
        }
    raise TypeError(f"not a FuncExpr: {expr!r}")


def expr_from_json(obj, seed_backings):
    op = obj["op"]
    if op == "seed":
        return Seed(obj["name"], seed_backings[obj["name"]])
    if op == "hat":
        return Hat(expr_from_json(obj["child"], seed_backings))
    if op == "neg":
        return Neg(expr_from_json(obj["child"], seed_backings))
    if op == "tmin":
        return ThresholdMin(
            expr_from_json(obj["child"], seed_backings),
            int(obj["c"]),
            dec_to_int(obj["horizon"]),
        )
    if op == "sum":
        return Sum(
            expr_from_json(obj["left"], seed_backings),
            expr_from_json(obj["right"], seed_backings),
        )
    if op == "maxpair":
        return MaxPair(
            expr_from_json(obj["left"], seed_backings),
            expr_from_json(obj["right"], seed_backings),
        )
    raise ValueError(f"unknown expression tag {op!r}")
