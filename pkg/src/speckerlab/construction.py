"""Finite-stage generator construction.

Each stage picks a member d of the stand-in dominating family, forms the
minimal-norm growth function phi (the largest minimal qualifying norm over
the matrices seen so far), diagonalizes the enumerated closure fragment
into a fast-growing breakpoint scale h, and writes interval-constant
generators whose value on [h(n), h(n+1)) is the minimal-norm solution of
A_n v = 0 with norm at least d(h(n+1)).

Generators are stored breakpoint-indexed, never densely: the scales grow
far too fast for dense tables and every downstream check is interval-wise.
Beyond its last breakpoint a generator keeps its final value, so each one
is a genuine integer sequence and combinations are exact everywhere.
"""

from __future__ import annotations

import itertools
from bisect import bisect_right
from dataclasses import dataclass

from .config import Config
from .errors import AuditFailure, StageMissing
from .funalg import StageSeeds, as_diag_fn, closure_seeds, enumerate_fragment
from .intlat import IntMatrix, _ceil_div, kernel_basis, min_solution, rank2_min_norm
from .scales import MatrixEnumeration, Scale, diag_scale
from .serialize import dec_to_int, dec_to_ints, int_to_dec, ints_to_dec


class StepFunction:
    """Integer sequence that is constant on [breaks[i], breaks[i+1]) and
    keeps its last value from breaks[-1] on.  The horizon records how far
    the construction pinned the values down; the frozen tail makes the
    object a total sequence either way."""

    __slots__ = ("breaks", "values", "horizon", "_absrun")

    def __init__(self, breaks, values, horizon):
        breaks = tuple(int(b) for b in breaks)
        values = tuple(int(v) for v in values)
        if not breaks or breaks[0] != 0:
            raise ValueError("breakpoints must start at 0")
        if any(b <= a for a, b in zip(breaks, breaks[1:])):
            raise ValueError("breakpoints must increase strictly")
        if len(breaks) != len(values):
            raise ValueError("one value per breakpoint")
        if horizon < breaks[-1]:
            raise ValueError("horizon before the last breakpoint")
        self.breaks = breaks
        self.values = values
        self.horizon = int(horizon)
        run, acc = [], 0
        for v in values:
            acc = max(acc, abs(v))
            run.append(acc)
        self._absrun = tuple(run)

    def value_at(self, x: int) -> int:
        if x < 0:
            raise ValueError("natural expected")
        return self.values[bisect_right(self.breaks, x) - 1]

    def hat_at(self, x: int) -> int:
        """max(|value| on [0, x]); hat_at(-1) == 0 by convention."""
        if x < 0:
            return 0
        return self._absrun[bisect_right(self.breaks, x) - 1]

    def hat_step(self) -> "StepFunction":
        return StepFunction(self.breaks, self._absrun, self.horizon)

    def max_abs_on(self, lo: int, hi) -> int:
        """sup of |value| over [lo, hi); hi=None means the whole tail."""
        if hi is not None and hi <= lo:
            return 0
        best = abs(self.value_at(max(lo, 0)))
        i = bisect_right(self.breaks, max(lo, 0))
        while i < len(self.breaks) and (hi is None or self.breaks[i] < hi):
            best = max(best, abs(self.values[i]))
            i += 1
        return best

    def equal_on(self, other: "StepFunction", lo: int, hi: int) -> bool:
        """Exact pointwise equality on [lo, hi)."""
        if hi <= lo:
            return True
        probes = {lo}
        for b in itertools.chain(self.breaks, other.breaks):
            if lo < b < hi:
                probes.add(b)
        return all(self.value_at(p) == other.value_at(p) for p in probes)

    # Seed protocol for the function algebra.
    @property
    def is_nondecreasing_nonneg(self) -> bool:
        return all(v >= 0 for v in self.values) and all(
            b >= a for a, b in zip(self.values, self.values[1:])
        )

    def step_pieces(self):
        return self.breaks, self.values, None

    @staticmethod
    def zero(horizon: int) -> "StepFunction":
        return StepFunction((0,), (0,), horizon)

    @staticmethod
    def combine(terms, horizon=None) -> "StepFunction":
        """Exact integer combination sum(coef * fn) of step functions."""
        terms = [(int(c), f) for c, f in terms]
        breaks = sorted({0} | {b for _, f in terms for b in f.breaks})
        values = [sum(c * f.value_at(b) for c, f in terms) for b in breaks]
        if horizon is None:
            horizon = min((f.horizon for _, f in terms), default=0)
            horizon = max(horizon, breaks[-1])
        return StepFunction(tuple(breaks), tuple(values), horizon)

    @staticmethod
    def sup_hat(funcs) -> "StepFunction":
        """Pointwise max of the running absolute maxima of the functions."""
        funcs = list(funcs)
        if not funcs:
            raise ValueError("need at least one function")
        hats = [f.hat_step() for f in funcs]
        breaks = sorted({b for h in hats for b in h.breaks})
        values = [max(h.value_at(b) for h in hats) for b in breaks]
        horizon = min(f.horizon for f in funcs)
        return StepFunction(tuple(breaks), tuple(values), max(horizon, breaks[-1]))

    def to_json(self):
        return {
            "breaks": ints_to_dec(self.breaks),
            "values": ints_to_dec(self.values),
            "horizon": int_to_dec(self.horizon),
        }

    @classmethod
    def from_json(cls, obj):
        return cls(
            dec_to_ints(obj["breaks"]),
            dec_to_ints(obj["values"]),
            dec_to_int(obj["horizon"]),
        )

    def __repr__(self):
        return f"StepFunction(<{len(self.breaks)} pieces, horizon {self.horizon.bit_length()} bits>)"


# Fast evaluation of the growth functions -------------------------------------


class _BlockSummary:
    """Incremental classification of the block -> matrix assignment.

    phi consults every matrix among A_0..A_n, i.e. every block up to about
    log2(n); grouping blocks by what their kernel looks like (a single
    primitive vector, a rank-2 lattice, or everything) turns the maximum
    over astronomically-indexed n into a few dozen exact solves.
    """

    def __init__(self, k: int):
        self.k = k
        self.count = 0
        self.w_first = {}  # sup norm of the kernel generator -> first block
        self.planes = []  # (first block, kernel basis) for rank-2 kernels
        self._plane_keys = set()
        self.others = []  # (first block, matrix) for rank >= 3 nonzero kernels
        self._stream = self._matrices()

    def _matrices(self):
        digits = self.k * (self.k + 1)
        yield IntMatrix(self.k, self.k + 1, (0,) * digits)
        s = 1
        while True:
            for flat in itertools.product(range(-s, s + 1), repeat=digits):
                if max(abs(e) for e in flat) == s:
                    yield IntMatrix(self.k, self.k + 1, flat)
            s += 1

    def ensure(self, limit: int) -> None:
        while self.count <= limit:
            mat = next(self._stream)
            l = self.count
            self.count += 1
            if l == 0:
                continue  # zero matrix: minimal qualifying norm is the threshold itself
            basis = kernel_basis(mat).basis
            if len(basis) == 1:
                self.w_first.setdefault(basis[0].sup_norm(), l)
            elif len(basis) == 2:
                key = _lattice_key(basis)
                if key not in self._plane_keys:
                    self._plane_keys.add(key)
                    self.planes.append((l, basis))
            else:
                self.others.append((l, mat))


def _lattice_key(basis):
    if len(basis[0]) == 3 and len(basis) == 2:
        a, b = basis
        n0 = a[1] * b[2] - a[2] * b[1]
        n1 = a[2] * b[0] - a[0] * b[2]
        n2 = a[0] * b[1] - a[1] * b[0]
        from math import gcd

        g = gcd(gcd(abs(n0), abs(n1)), abs(n2))
        normal = (n0 // g, n1 // g, n2 // g)
        lead = next(e for e in normal if e != 0)
        if lead < 0:
            normal = tuple(-e for e in normal)
        return ("normal", normal)
    return ("basis", tuple(v.entries for v in basis))


_SUMMARIES = {}


def _block_summary(k: int) -> _BlockSummary:
    if k not in _SUMMARIES:
        _SUMMARIES[k] = _BlockSummary(k)
    return _SUMMARIES[k]


class PhiScale:
    """n -> max over m <= n of the minimal qualifying norm for A_m at
    threshold d(n).  Nondecreasing; exact at any argument magnitude."""

    __slots__ = ("k", "d", "_summary", "_memo")

    def __init__(self, k: int, d: Scale):
        self.k = k
        self.d = d
        self._summary = _block_summary(k)
        self._memo = {}

    def value_at(self, n: int) -> int:
        got = self._memo.get(n)
        if got is not None:
            return got
        dval = self.d.eval(n)
        limit = (n // 2 + 1).bit_length() - 1
        summary = self._summary
        summary.ensure(limit)
        best = dval  # block 0 (the zero matrix) always contributes exactly d(n)
        for w, l in summary.w_first.items():
            if l <= limit:
                cand = _ceil_div(dval, w) * w
                if cand > best:
                    best = cand
        for l, basis in summary.planes:
            if l <= limit:
                cand = rank2_min_norm(basis, dval)
                if cand > best:
                    best = cand
        for l, mat in summary.others:
            if l <= limit:
                cand = min_solution(mat, dval).sup_norm()
                if cand > best:
                    best = cand
        self._memo[n] = best
        return best

    @property
    def is_nondecreasing_nonneg(self) -> bool:
        return True

    def step_pieces(self):
        return None


def phi_m(A: IntMatrix, d: Scale, n: int) -> int:
    """Minimal qualifying norm for one matrix: ||min_solution(A, d(n))||."""
    return min_solution(A, d.eval(n)).sup_norm()


def phi(stage: "StageResult", n: int) -> int:
    """max of the per-matrix minima over all matrices seen up to index n."""
    return stage.phi.value_at(n)


# Stage assembly ---------------------------------------------------------------


@dataclass(frozen=True)
class StageResult:
    alpha: int
    d: Scale
    phi: PhiScale
    h: Scale
    gens: tuple  # of k+1 StepFunction
    seeds_used: tuple = ()

    def breakpoint_count(self) -> int:
        return len(self.h) - 1

    def h_seed(self) -> Scale:
        """The breakpoint scale as a total seed for later stages (slope-1
        linear tail beyond the table)."""
        return Scale.from_table(self.h.values, tail="linear")

    def to_json(self):
        return {
            "alpha": self.alpha,
            "d": self.d.to_json(),
            "h": ints_to_dec(self.h.values),
            "gens": [g.to_json() for g in self.gens],
        }


@dataclass(frozen=True)
class GeneratorFamily:
    k: int
    stages: tuple  # of StageResult, ascending alpha
    horizon: int
    config: Config

    def stage(self, alpha: int) -> StageResult:
        for st in self.stages:
            if st.alpha == alpha:
                return st
        raise StageMissing(f"stage {alpha} not in family (have {[s.alpha for s in self.stages]})")

    def to_json(self):
        return {
            "format": "specker-family/1",
            "k": self.k,
            "horizon": int_to_dec(self.horizon),
            "config": self.config.to_json(),
            "stages": [st.to_json() for st in self.stages],
        }

    @classmethod
    def from_json(cls, obj):
        if obj.get("format") != "specker-family/1":
            raise ValueError("not a generator-family file")
        cfg = Config.from_json(obj["config"])
        stages = []
        for so in obj["stages"]:
            alpha = int(so["alpha"])
            d = Scale.from_json(so["d"])
            h = Scale.from_table(dec_to_ints(so["h"]))
            gens = tuple(StepFunction.from_json(g) for g in so["gens"])
            stages.append(StageResult(alpha, d, PhiScale(cfg.k, d), h, gens))
        return cls(cfg.k, tuple(stages), dec_to_int(obj["horizon"]), cfg)


def build_stage(alpha: int, prior: GeneratorFamily | None, cfg: Config) -> StageResult:
    """Run one induction step: growth function, diagonal scale, generators.

    Raises HorizonExceeded if the diagonal scale outruns cfg.horizon_cap.
    The breakpoint identities are checked before returning; their failure
    would mean a solver bug, reported as AuditFailure.
    """
    d = Scale.poly(2, alpha + 1)
    phi_fn = PhiScale(cfg.k, d)
    earlier = ()
    if prior is not None:
        earlier = tuple((st.alpha, st.phi, st.h_seed(), st.gens) for st in prior.stages)
    seeds = closure_seeds(StageSeeds(alpha, phi_fn, earlier))
    fragment = enumerate_fragment(seeds, depth=cfg.depth, count=cfg.count)
    h = diag_scale([as_diag_fn(e) for e in fragment], cfg.breakpoints + 1, horizon_cap=cfg.horizon_cap)

    enum = MatrixEnumeration(cfg.k)
    T = cfg.breakpoints
    witnesses = []
    for n in range(T):
        A_n = enum.matrix_at(n)
        target = d.eval(h.eval(n + 1))
        v = min_solution(A_n, target)
        if any(e != 0 for e in A_n.mul_vec(v)):
            raise AuditFailure(f"stage {alpha} breakpoint {n}", "kernel identity failed")
        if v.sup_norm() < target:
            raise AuditFailure(f"stage {alpha} breakpoint {n}", "threshold inequality failed")
        witnesses.append(v)
    breaks = tuple(h.eval(n) for n in range(T))
    horizon = h.eval(T)
    gens = tuple(
        StepFunction(breaks, tuple(w[i] for w in witnesses), horizon)
        for i in range(cfg.k + 1)
    )
    return StageResult(alpha, d, phi_fn, h, gens, tuple(fragment))


def build_family(cfg: Config) -> GeneratorFamily:
    stages = []
    fam = None
    for alpha in range(cfg.stages):
        st = build_stage(alpha, fam, cfg)
        stages.append(st)
        fam = GeneratorFamily(cfg.k, tuple(stages), st.h.eval(cfg.breakpoints), cfg)
    horizon = max(st.h.eval(cfg.breakpoints) for st in stages)
    return GeneratorFamily(cfg.k, tuple(stages), horizon, cfg)


# Combinations -----------------------------------------------------------------


@dataclass(frozen=True)
class CombinationResult:
    k: int
    terms: tuple  # (alpha, IntMatrix) ascending
    coords: tuple  # k StepFunctions: the element of the k-th power
    partials: tuple  # partials[m][i] = i-th coordinate after m terms

    def partial(self, m: int):
        return self.partials[m]


def eval_combination(fam: GeneratorFamily, terms) -> CombinationResult:
    """Exact coordinates of B_1 g^(a_1) + ... + B_M g^(a_M) plus all
    partial sums, as step functions."""
    terms = [(int(a), B) for a, B in terms]
    alphas = [a for a, _ in terms]
    if any(b <= a for a, b in zip(alphas, alphas[1:])):
        raise ValueError("stage indices must be strictly increasing")
    k = fam.k
    stages = []
    for a, B in terms:
        if B.rows != k or B.cols != k + 1:
            raise ValueError(f"coefficient matrix must be {k}x{k + 1}")
        stages.append(fam.stage(a))
    partials = [tuple(StepFunction.zero(fam.horizon) for _ in range(k))]
    for m in range(1, len(terms) + 1):
        coords = []
        for i in range(k):
            parts = []
            for (a, B), st in zip(terms[:m], stages[:m]):
                row = B.row(i)
                parts.extend((row[j], st.gens[j]) for j in range(k + 1))
            coords.append(StepFunction.combine(parts, horizon=fam.horizon))
        partials.append(tuple(coords))
    return CombinationResult(k, tuple(terms), partials[-1], tuple(partials))
