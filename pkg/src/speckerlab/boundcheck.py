"""Certificates and verifiers for the boundedness dichotomy.

Two halves, both in exact integer arithmetic:

* ``certify_unbounded`` emits the margin table showing that the k+1
  generators of one stage overrun any bound function that the stage's
  dominating-family member beats, so the (k+1)-st power fails condition (4).

* ``verify_preservation`` replays the induction that keeps the k-th power
  bounded for an explicit integer combination: partial sums, the constants
  c_m, the witness sets J_m, and the per-witness Case-1/Case-2 estimates,
  every inequality checked exactly and logged.

Witness sets are kept as interval unions, so counts and minima stay exact
at any magnitude.  A failed inequality raises AuditFailure: the underlying
statements are theorems, so a violation means a bug or corrupted data.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .config import Config
from .construction import CombinationResult, GeneratorFamily, StepFunction, eval_combination
from .errors import AuditFailure, DominationFails
from .intervals import IntervalSet
from .intlat import IntMatrix, _ceil_div
from .scales import (
    Scale,
    adjacent_pair_in_block,
    block_of_matrix,
    matrix_for_block,
    partition_block,
)
from .serialize import int_to_dec


# Condition checkers -----------------------------------------------------------


@dataclass(frozen=True)
class CondReport:
    variant: str
    witnesses: object  # IntervalSet for cond4, tuple of indices for cond2/3
    count: int
    min_hits: int
    horizon: int
    passed: bool

    def to_json(self):
        if isinstance(self.witnesses, IntervalSet):
            wit = self.witnesses.to_json()
        else:
            wit = [int_to_dec(n) for n in self.witnesses]
        return {
            "variant": self.variant,
            "witnesses": wit,
            "count": int_to_dec(self.count),
            "min_hits": self.min_hits,
            "horizon": int_to_dec(self.horizon),
            "passed": self.passed,
        }


def _sup_hat(F):
    return StepFunction.sup_hat(list(F))


def check_cond4(F, f: Scale, horizon: int, min_hits: int) -> CondReport:
    """Witnesses n < horizon with max over F of the running max on [0, n)
    at most f(n); the whole witness set is returned as intervals."""
    S = _sup_hat(F)
    pieces = []
    # n = 0 compares the empty restriction, bounded by any f(0) >= 0.
    if f.eval(0) >= 0:
        pieces.append((0, 1))
    for i, (b, v) in enumerate(zip(S.breaks, S.values)):
        lo = b + 1
        hi = S.breaks[i + 1] + 1 if i + 1 < len(S.breaks) else None
        n_star = f.max_arg_below(v) + 1  # least n with f(n) >= v
        pieces.append((max(lo, n_star), hi))
    witnesses = IntervalSet(pieces).intersect(0, horizon)
    count = witnesses.count()
    return CondReport("cond4", witnesses, count, min_hits, horizon, count >= min_hits)


def check_cond2_cond3(F, f, h: Scale, horizon: int, min_hits: int, variant: str) -> CondReport:
    """Witnesses n with max over F of the running max on [0, h(n)) at most
    f(n).  cond2 needs one witness, cond3 needs min_hits."""
    if variant not in ("cond2", "cond3"):
        raise ValueError("variant must be cond2 or cond3")
    S = _sup_hat(F)
    witnesses = []
    n = 0
    while True:
        try:
            hn = h.eval(n)
        except Exception:
            break
        if hn > horizon:
            break
        if S.hat_at(hn - 1) <= _f_eval(f, n):
            witnesses.append(n)
        n += 1
        if h.kind == "table" and h.tail is None and n >= len(h):
            break
    count = len(witnesses)
    need = 1 if variant == "cond2" else min_hits
    return CondReport(variant, tuple(witnesses), count, need, horizon, count >= need)


def _f_eval(f, n):
    if isinstance(f, Scale):
        return f.eval(n)
    if callable(f):
        return f(n)
    return f[n]


# Converters -------------------------------------------------------------------


def convert_4_to_3(f: Scale, h: Scale) -> Scale:
    """The shifted-composition bound: f~(n) = f(h(n+1)).

    Every condition-(4) witness n > h(0) inside [h(m), h(m+1)) makes m a
    condition-(3) witness for (f~, h); requires nondecreasing f.
    """
    if h.kind == "table" and h.tail is None:
        length = len(h) - 1
        values = [f.eval(h.eval(n + 1)) for n in range(length)]
        return Scale.from_table(values)
    raise ValueError("need a finite table scale for h")


def convert_cover_to_f(Fns, h: Scale):
    """Bound function from a sequence of finite function sets: the largest
    absolute value any member takes below h(n).  Returns a plain tuple
    (the result need not be monotone)."""
    out = []
    for n, members in enumerate(Fns):
        hn = h.eval(n)
        best = 0
        for a in members:
            best = max(best, _abs_max_below(a, hn))
        out.append(best)
    return tuple(out)


def _abs_max_below(a, upto):
    if upto <= 0:
        return 0
    if isinstance(a, StepFunction):
        return a.max_abs_on(0, upto)
    if len(a) < upto:
        raise ValueError(f"member defined on [0, {len(a)}) but needs [0, {upto})")
    return max(abs(x) for x in a[:upto])


def reshape_klem(Gsets):
    """Flatten sets of k-tuples into per-index coordinate sets; every tuple
    of G_n lies in the k-th power of the returned F_n."""
    out = []
    for G_n in Gsets:
        coords = set()
        for tup in G_n:
            coords.update(tup)
        out.append(tuple(sorted(coords)))
    return out


# Non-boundedness certificate ----------------------------------------------------


@dataclass(frozen=True)
class ViolationCertificate:
    alpha: int
    k: int
    f: Scale
    window: tuple  # [lo, hi)
    rows: tuple  # (m_first, m_last, family_norm, f_at_m_last)
    cond4_witnesses_in_window: int
    config: Config

    def to_json(self):
        lo, hi = self.window
        return {
            "format": "specker-violation/1",
            "stage": self.alpha,
            "k": self.k,
            "f": self.f.to_json(),
            "window": {"lo": int_to_dec(lo), "hi": int_to_dec(hi)},
            "rows": [
                {
                    "m_first": int_to_dec(a),
                    "m_last": int_to_dec(b),
                    "family_norm": int_to_dec(norm),
                    "f_at_m_last": int_to_dec(fb),
                }
                for a, b, norm, fb in self.rows
            ],
            "cond4_witnesses_in_window": int_to_dec(self.cond4_witnesses_in_window),
            "config": self.config.to_json(),
        }


def _poly_coeffs(scale: Scale):
    """Coefficients of (m + shift) ** exp, ascending powers of m."""
    from math import comb

    e, s = scale.exp, scale.shift
    return [comb(e, i) * s ** (e - i) for i in range(e + 1)]


def _check_dominates(f: Scale, d: Scale, lo: int, hi: int) -> None:
    """Verify f(m) < d(m) for every m in [lo, hi), exactly.

    Monomial pairs are settled by a sign test on the coefficients of
    d - f; other shapes fall back to a monotone chunk walk, guarded so
    windows this walk cannot cover are reported instead of looping."""
    if f.kind == "poly" and d.kind == "poly":
        fc, dc = _poly_coeffs(f), _poly_coeffs(d)
        width = max(len(fc), len(dc))
        diff = [
            (dc[i] if i < len(dc) else 0) - (fc[i] if i < len(fc) else 0)
            for i in range(width)
        ]
        if all(c >= 0 for c in diff) and d.eval(lo) > f.eval(lo):
            return
    m = lo
    steps = 0
    while m < hi:
        if f.eval(m) >= d.eval(m):
            raise DominationFails(f"f({m}) >= d({m})")
        # every m' in (m, reach] satisfies f(m') <= f(reach) < d(m) <= d(m')
        reach = f.max_arg_below(d.eval(m))
        m = max(reach + 1, m + 1)
        steps += 1
        if steps > 200_000:
            raise ValueError("domination window too wide for the chunk walk")


def certify_unbounded(fam: GeneratorFamily, alpha: int, f: Scale, window) -> ViolationCertificate:
    """Margin table for the stage generators against a dominated bound f.

    Requires f strictly below the stage's dominating-family member on the
    window; then the sup norm of the k+1 generators at m-1 strictly exceeds
    f(m) at every m of the window, which is recorded interval-chunked and
    verified exactly.
    """
    st = fam.stage(alpha)
    lo, hi = int(window[0]), int(window[1])
    T = st.breakpoint_count()
    stage_horizon = st.h.eval(T)
    if lo < 1 or hi <= lo:
        raise ValueError("window must be [lo, hi) with 1 <= lo < hi")
    if hi > stage_horizon + 1:
        raise ValueError("window reaches beyond the stage horizon")
    _check_dominates(f, st.d, lo, hi)
    rows = []
    for n in range(T):
        a, b = st.h.eval(n), st.h.eval(n + 1)
        m_first, m_last = max(a + 1, lo), min(b, hi - 1)
        if m_first > m_last:
            continue
        norm = max(abs(g.value_at(a)) for g in st.gens)
        f_top = f.eval(m_last)
        if norm <= f_top:
            raise AuditFailure(
                f"violation window m in [{m_first}, {m_last}]",
                f"family norm {norm} fails to exceed f = {f_top}",
            )
        rows.append((m_first, m_last, norm, f_top))
    cond4 = check_cond4(list(st.gens), f, hi, 1)
    in_window = cond4.witnesses.intersect(lo, hi).count()
    return ViolationCertificate(alpha, fam.k, f, (lo, hi), tuple(rows), in_window, fam.config)


# Preservation trace -------------------------------------------------------------


def good_set(sup_hat_step: StepFunction, c: int) -> IntervalSet:
    """{j : sup-hat(j) <= c * (j + 1)} as intervals, including the tail."""
    pieces = []
    steps = sup_hat_step
    for i, (b, v) in enumerate(zip(steps.breaks, steps.values)):
        hi = steps.breaks[i + 1] if i + 1 < len(steps.breaks) else None
        if c == 0:
            if v <= 0:
                pieces.append((b, hi))
            continue
        j0 = _ceil_div(v, c) - 1 if v > 0 else 0
        pieces.append((max(b, j0), hi))
    return IntervalSet(pieces)


@dataclass(frozen=True)
class AuditRow:
    n: int
    j: int
    case1_bound: int  # sup |g_m| on [h(n), j]
    case2_prev: int  # sup |g_{m-1}| on [0, j]
    case2_gen: int  # sup over i of gen running max at h(n) - 1
    conclusion: int  # sup over i of hat g_{i,m}(j)
    allowance: int  # c_{m-1} (j+1) + (k+1) C j

    def to_json(self):
        return {
            "n": self.n,
            "j": int_to_dec(self.j),
            "case1_bound": int_to_dec(self.case1_bound),
            "case2_prev": int_to_dec(self.case2_prev),
            "case2_gen": int_to_dec(self.case2_gen),
            "conclusion": int_to_dec(self.conclusion),
            "allowance": int_to_dec(self.allowance),
        }


@dataclass(frozen=True)
class StepTrace:
    m: int
    alpha: int
    B: IntMatrix
    C: int
    c: int
    J: IntervalSet  # restricted to the horizon, plus tail marker
    I: tuple
    audits: tuple  # of AuditRow

    def to_json(self):
        return {
            "m": self.m,
            "alpha": self.alpha,
            "B": self.B.to_json(),
            "C": int_to_dec(self.C),
            "c": int_to_dec(self.c),
            "J": self.J.to_json(),
            "I": list(self.I),
            "audits": [a.to_json() for a in self.audits],
        }


@dataclass(frozen=True)
class PreservationTrace:
    k: int
    terms: tuple
    horizon: int
    min_hits: int
    steps: tuple  # of StepTrace
    c_final: int
    tail_count: int  # |J_M intersect [c_M, horizon)|
    passed: bool
    config: Config

    def to_json(self):
        return {
            "format": "specker-preservation/1",
            "k": self.k,
            "terms": [{"alpha": a, "B": B.to_json()} for a, B in self.terms],
            "horizon": int_to_dec(self.horizon),
            "min_hits": self.min_hits,
            "steps": [s.to_json() for s in self.steps],
            "c_final": int_to_dec(self.c_final),
            "tail_count": int_to_dec(self.tail_count),
            "passed": self.passed,
            "config": self.config.to_json(),
        }


def verify_preservation(
    fam: GeneratorFamily, terms, horizon=None, min_hits: int = 3
) -> PreservationTrace:
    """Replay the bounding induction for one combination, exactly.

    For each summand the verifier locates the block of its coefficient
    matrix, walks the adjacent pairs of that block, picks the least witness
    j in the next breakpoint window, and audits both cases of the estimate;
    the conclusion j in J_m is asserted.  Passing requires at least
    min_hits members of J_M at or above c_M inside the horizon.
    """
    if horizon is None:
        horizon = fam.horizon
    comb = eval_combination(fam, terms)
    k = fam.k
    c_prev = 0
    J_prev = IntervalSet([(0, None)])
    steps = []
    for m in range(1, len(comb.terms) + 1):
        alpha_m, B_m = comb.terms[m - 1]
        st = fam.stage(alpha_m)
        C_m = B_m.max_abs_entry()
        c_m = c_prev + (k + 1) * C_m
        sup_m = _sup_hat(comb.partials[m])
        J_m = good_set(sup_m, c_m)
        block = block_of_matrix(B_m)
        T_m = st.breakpoint_count()
        I, audits = [], []
        for n in range(T_m - 1):
            if n + 2 > T_m or not adjacent_pair_in_block(n, block):
                continue
            hn, hn1, hn2 = st.h.eval(n), st.h.eval(n + 1), st.h.eval(n + 2)
            j = J_prev.min_element(at_least=hn1)
            if j is None or j >= hn2:
                continue
            gen_hat = max(g.hat_at(hn - 1) for g in st.gens)
            if gen_hat >= hn1:
                continue
            I.append(n)
            audits.append(
                _audit_witness(
                    comb, st, m, n, j, hn, hn1, hn2, c_prev, c_m, C_m, k, J_prev, J_m
                )
            )
        steps.append(
            StepTrace(m, alpha_m, B_m, C_m, c_m, J_m.intersect(0, horizon), tuple(I), tuple(audits))
        )
        c_prev, J_prev = c_m, J_m
    tail = J_prev.intersect(c_prev, horizon)
    tail_count = tail.count()
    passed = tail_count >= min_hits
    # Final quadratic bound at the reported witnesses and at the audited
    # witnesses of the last summand.
    final_sup = _sup_hat(comb.coords) if comb.terms else _sup_hat(comb.partials[0])
    probes = tail.first(min_hits)
    if steps:
        probes += [row.j for row in steps[-1].audits if row.j >= c_prev]
    for j in probes:
        if final_sup.hat_at(j) > (j + 1) ** 2:
            raise AuditFailure(
                f"final bound at witness {j}",
                "running max exceeds the quadratic bound",
            )
    return PreservationTrace(
        k,
        comb.terms,
        horizon,
        min_hits,
        tuple(steps),
        c_prev,
        tail_count,
        passed,
        fam.config,
    )


def _audit_witness(comb, st, m, n, j, hn, hn1, hn2, c_prev, c_m, C_m, k, J_prev, J_m):
    where = f"term {m}, pair n = {n}, witness j"
    gens = st.gens
    v_lo = tuple(g.value_at(hn) for g in gens)
    v_hi = tuple(g.value_at(hn1) for g in gens)
    _, B_m = comb.terms[m - 1]
    if any(e != 0 for e in B_m.mul_vec(v_lo)) or any(e != 0 for e in B_m.mul_vec(v_hi)):
        raise AuditFailure(where, "coefficient matrix does not cancel the pair values")
    if not (hn1 <= j < hn2):
        raise AuditFailure(where, "witness escaped the breakpoint window")
    if j not in J_prev:
        raise AuditFailure(where, "witness not in the previous good set")
    for i in range(comb.k):
        cur, prev = comb.partials[m][i], comb.partials[m - 1][i]
        if not cur.equal_on(prev, hn, min(j + 1, hn2)):
            raise AuditFailure(where, f"coordinate {i} changed on the cancelled window")
    allowance_prev = c_prev * (j + 1)
    case1 = max(f.max_abs_on(hn, j + 1) for f in comb.partials[m]) if comb.k else 0
    if case1 > allowance_prev:
        raise AuditFailure(where, "case 1 bound failed")
    case2_prev = max(f.hat_at(j) for f in comb.partials[m - 1]) if comb.k else 0
    if case2_prev > allowance_prev:
        raise AuditFailure(where, "previous partial sum exceeds its allowance")
    gen_hat = max(g.hat_at(hn - 1) for g in gens)
    if not (gen_hat < hn1 <= j):
        raise AuditFailure(where, "generator running max reaches the next breakpoint")
    allowance = allowance_prev + (k + 1) * C_m * j
    conclusion = max(f.hat_at(j) for f in comb.partials[m]) if comb.k else 0
    if conclusion > allowance:
        raise AuditFailure(where, "case 2 total exceeds its allowance")
    if allowance > c_m * (j + 1):
        raise AuditFailure(where, "allowance algebra failed")
    if j not in J_m:
        raise AuditFailure(where, "witness did not propagate to the new good set")
    return AuditRow(n, j, case1, case2_prev, gen_hat, conclusion, allowance)


# Power sweep --------------------------------------------------------------------


@dataclass(frozen=True)
class PowerReport:
    power: int
    families: int
    failing_families: int
    expected_bounded: bool
    passed: bool

    def to_json(self):
        return {
            "power": self.power,
            "families": self.families,
            "failing_families": self.failing_families,
            "expected_bounded": self.expected_bounded,
            "passed": self.passed,
        }


def _stage_settle(st) -> int:
    """Largest absolute generator value of the stage (the truncation noise
    any later witness window has to clear)."""
    return max(g.hat_at(g.breaks[-1]) for g in st.gens)


def _usable_blocks(fam: GeneratorFamily, alpha: int, settle_prev: int):
    """Blocks whose latest in-table adjacent pair opens a witness window
    beyond the earlier terms' value scale.

    In the unbounded construction every block eventually pairs past any
    noise; on a finite table only the blocks whose windows clear
    settle_prev can exhibit the cancellation witnesses."""
    st = fam.stage(alpha)
    T = st.breakpoint_count()
    latest = {}
    for n in range(T - 1):
        l = partition_block(n)
        if adjacent_pair_in_block(n, l):
            latest[l] = n
    clearance = 8 * (fam.k + 1) * settle_prev
    return {l: n for l, n in latest.items() if st.h.eval(n + 1) > clearance}


def cancelling_pool(fam: GeneratorFamily, alpha: int, settle_prev: int = 0):
    """Coefficient matrices usable for a term at the given stage: the zero
    matrix plus small multiples of the usable blocks' matrices.  Entries
    stay within [-2, 2]."""
    k = fam.k
    pool = [matrix_for_block(0, k)]  # the zero matrix contributes nothing, always safe
    seen = {pool[0].entries}
    for l in sorted(_usable_blocks(fam, alpha, settle_prev)):
        B = matrix_for_block(l, k)
        for u in (1, -1, 2, -2):
            cand = IntMatrix(B.rows, B.cols, tuple(u * e for e in B.entries))
            if cand.max_abs_entry() <= 2 and cand.entries not in seen:
                seen.add(cand.entries)
                pool.append(cand)
    return pool


def sample_combinations(fam: GeneratorFamily, count: int, seed: int, max_terms: int = 3):
    """Deterministic seeded list of combination term-lists whose witness
    windows exist at desk scale (see _usable_blocks)."""
    rng = random.Random(seed)
    alphas = [st.alpha for st in fam.stages]
    out = []
    while len(out) < count:
        M = rng.randint(1, min(max_terms, len(alphas)))
        chosen = sorted(rng.sample(alphas, M))
        terms = []
        settle_prev = 0
        for a in chosen:
            pool = cancelling_pool(fam, a, settle_prev)
            terms.append((a, pool[rng.randrange(len(pool))]))
            settle_prev = max(settle_prev, _stage_settle(fam.stage(a)))
        out.append(terms)
    return out


def scheepers_check(
    fam: GeneratorFamily,
    kmax: int,
    f: Scale,
    horizon=None,
    min_hits: int = 3,
    families_per_power: int = 5,
    seed: int = 0,
):
    """Per-power condition-(4) sweep.

    Powers up to k draw families from seeded combinations and must pass;
    power k+1 includes the designated stage-generator family, which must
    fail (zero witnesses above the degenerate indices).
    """
    if kmax < 1:
        raise ValueError("kmax must be >= 1")
    if horizon is None:
        horizon = fam.horizon
    k = fam.k
    reports = []
    for power in range(1, kmax + 1):
        families = _power_families(fam, power, families_per_power, seed + power)
        failing = 0
        for F in families:
            rep = check_cond4(F, f, horizon, min_hits)
            if rep.witnesses.intersect(2, horizon).count() < min_hits:
                failing += 1
        expected = power <= k
        ok = (failing == 0) if expected else (failing > 0)
        reports.append(PowerReport(power, len(families), failing, expected, ok))
    return reports


def _power_families(fam: GeneratorFamily, power: int, count: int, seed: int):
    k = fam.k
    families = []
    if power <= k:
        for terms in sample_combinations(fam, count, seed):
            coords = eval_combination(fam, terms).coords
            families.append(list(coords[:power]))
    else:
        top = fam.stages[-1]
        family = list(top.gens[: power if power <= k + 1 else k + 1])
        while len(family) < power:
            family.append(top.gens[-1])
        families.append(family)
    return families
