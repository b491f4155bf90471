"""Command-line surface: build families, emit certificates, run converters.

Exit codes: 0 success, 2 oracle mismatch, 3 horizon exceeded,
4 precondition failure (including trivial kernels and domination failures),
5 audit failure.  All outputs are canonical JSON with decimal-string
integers, so identical configurations replay byte-identically.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from .boundcheck import (
    certify_unbounded,
    check_cond4,
    convert_4_to_3,
    convert_cover_to_f,
    reshape_klem,
    sample_combinations,
    scheepers_check,
    verify_preservation,
)
from .config import Config
from .construction import GeneratorFamily, build_family
from .errors import AuditFailure, DominationFails, HorizonExceeded, NoNonzeroKernel, StageMissing
from .intlat import IntMatrix, brute_min_solution, min_feasible_box, min_solution
from .scales import Scale, diag_scale, dprime_condition, nwd_extend, standin_family
from .serialize import read_json, write_canonical

EXIT_OK = 0
EXIT_ORACLE_MISMATCH = 2
EXIT_HORIZON = 3
EXIT_PRECONDITION = 4
EXIT_AUDIT = 5


def thread_cap() -> int:
    raw = os.environ.get("SPECKER_LAB_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


def _parse_matrix(text: str) -> IntMatrix:
    rows = json.loads(text)
    return IntMatrix.from_rows(rows)


def cmd_solve(args) -> int:
    A = _parse_matrix(args.matrix)
    v = min_solution(A, args.threshold)
    box = args.box if args.box is not None else min_feasible_box(A, args.threshold)
    oracle = brute_min_solution(A, args.threshold, box)
    agree = oracle is not None and oracle.entries == v.entries
    print(f"solution: {list(v.entries)}")
    print(f"norm: {v.sup_norm()}")
    print(f"oracle: {'agree' if agree else 'disagree'} (box {box})")
    return EXIT_OK if agree else EXIT_ORACLE_MISMATCH


def _config_from_args(args) -> Config:
    return Config(
        k=args.k,
        stages=args.stages,
        breakpoints=args.breakpoints,
        depth=args.depth,
        count=args.count,
        min_hits=args.min_hits,
        seed=args.seed,
        horizon_cap=args.horizon_cap,
    )


def cmd_build(args) -> int:
    cfg = _config_from_args(args)
    fam = build_family(cfg)
    checked = sum(st.breakpoint_count() for st in fam.stages)
    write_canonical(args.out, fam.to_json())
    print(f"stages: {len(fam.stages)}")
    print(f"breakpoint identities verified: {checked}")
    print(f"horizon bits: {fam.horizon.bit_length()}")
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_certify(args) -> int:
    fam = GeneratorFamily.from_json(read_json(args.family))
    cfg = fam.config
    os.makedirs(args.out, exist_ok=True)
    alpha = fam.stages[-1].alpha if args.stage is None else args.stage
    st = fam.stage(alpha)
    f = Scale.poly(args.f_shift, args.f_exp)
    lo = args.window_lo
    hi = args.window_hi if args.window_hi is not None else st.h.eval(st.breakpoint_count()) + 1

    cert = certify_unbounded(fam, alpha, f, (lo, hi))
    write_canonical(os.path.join(args.out, "violation.json"), cert.to_json())
    violation_total = cert.cond4_witnesses_in_window == 0

    term_lists = sample_combinations(fam, args.families, cfg.seed, max_terms=args.max_terms)

    def run_trace(terms):
        return verify_preservation(fam, terms, min_hits=args.min_hits)

    workers = thread_cap()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            traces = list(pool.map(run_trace, term_lists))
    else:
        traces = [run_trace(t) for t in term_lists]
    for i, tr in enumerate(traces):
        write_canonical(os.path.join(args.out, f"trace_{i:02d}.json"), tr.to_json())
    traces_pass = all(tr.passed for tr in traces)

    kmax = args.kmax if args.kmax is not None else fam.k + 1
    powers = scheepers_check(fam, kmax, f, min_hits=args.min_hits, seed=cfg.seed)
    write_canonical(
        os.path.join(args.out, "scheepers.json"),
        {"format": "specker-powers/1", "powers": [p.to_json() for p in powers], "config": cfg.to_json()},
    )
    powers_pass = all(p.passed for p in powers)

    print(f"violation certificate: {'total' if violation_total else 'INCOMPLETE'} ({len(cert.rows)} rows)")
    print(f"preservation traces: {sum(tr.passed for tr in traces)}/{len(traces)} passed")
    print(f"power sweep: {'expected pattern' if powers_pass else 'UNEXPECTED'}")
    ok = violation_total and traces_pass and powers_pass
    return EXIT_OK if ok else EXIT_AUDIT


def cmd_convert_witness(args) -> int:
    data = read_json(args.input)
    if args.mode == "4to3":
        f = Scale.from_json(data["f"])
        h = Scale.from_json(data["h"])
        out = {"f_tilde": convert_4_to_3(f, h).to_json()}
    elif args.mode == "cover":
        h = Scale.from_json(data["h"])
        fns = data["Fns"]
        out = {"f": [str(v) for v in convert_cover_to_f(fns, h)]}
    elif args.mode == "reshape":
        gsets = [[tuple(t) for t in g] for g in data["Gsets"]]
        out = {"Fns": [list(fn) for fn in reshape_klem(gsets)]}
    else:
        raise ValueError(f"unknown mode {args.mode}")
    if args.out:
        write_canonical(args.out, out)
        print(f"wrote {args.out}")
    else:
        print(json.dumps(out, sort_keys=True))
    return EXIT_OK


def cmd_check_dprime(args) -> int:
    family = standin_family(args.count)
    h = diag_scale(family, args.length + 2)
    report = dprime_condition(family, h, args.blocks, args.pairs_required, args.length)
    payload = report.to_json()
    if args.out:
        write_canonical(args.out, payload)
        print(f"wrote {args.out}")
    else:
        print(json.dumps(payload, sort_keys=True))
    return EXIT_OK if report.passed else EXIT_PRECONDITION


def cmd_nwd_extend(args) -> int:
    s = tuple(int(x) for x in args.sequence.split(",")) if args.sequence else ()
    a, b = (int(x) for x in args.f_linear.split(","))
    extended = nwd_extend(s, lambda x: a * x + b, args.block, args.min_index)
    print(json.dumps({"extended": list(extended)}))
    return EXIT_OK


def cmd_report(args) -> int:
    fam = GeneratorFamily.from_json(read_json(args.family))
    print(f"family: k = {fam.k}, stages = {len(fam.stages)}, horizon ~ 2^{fam.horizon.bit_length()}")
    for st in fam.stages:
        T = st.breakpoint_count()
        top = st.h.eval(T)
        norms = [max(abs(g.value_at(st.h.eval(n))) for g in st.gens) for n in range(T)]
        print(
            f"  stage {st.alpha}: d = (n+2)^{st.alpha + 1}, {T} breakpoints,"
            f" h(T) ~ 2^{top.bit_length()}, top norm ~ 2^{max(norms).bit_length()}"
        )
    if args.certs:
        for name in sorted(os.listdir(args.certs)):
            if not name.endswith(".json"):
                continue
            data = read_json(os.path.join(args.certs, name))
            kind = data.get("format", "?")
            status = data.get("passed", data.get("cond4_witnesses_in_window"))
            print(f"  {name}: {kind} status={status}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="speckerlab", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("solve", help="minimal-norm kernel solution with oracle cross-check")
    ps.add_argument("--matrix", required=True, help='row-major JSON, e.g. "[[2,3]]"')
    ps.add_argument("--threshold", type=int, required=True)
    ps.add_argument("--box", type=int, default=None, help="oracle box (default: feasibility bound)")
    ps.set_defaults(fn=cmd_solve)

    pb = sub.add_parser("build", help="build a generator family and write it as JSON")
    pb.add_argument("--k", type=int, default=1)
    pb.add_argument("--stages", type=int, default=3)
    pb.add_argument("--breakpoints", type=int, default=8)
    pb.add_argument("--depth", type=int, default=3)
    pb.add_argument("--count", type=int, default=64)
    pb.add_argument("--min-hits", type=int, default=3)
    pb.add_argument("--seed", type=int, default=0)
    pb.add_argument("--horizon-cap", type=int, default=None)
    pb.add_argument("--out", required=True)
    pb.set_defaults(fn=cmd_build)

    pc = sub.add_parser("certify", help="emit violation certificate and preservation traces")
    pc.add_argument("--family", required=True)
    pc.add_argument("--out", required=True)
    pc.add_argument("--stage", type=int, default=None, help="stage for the violation half (default: last)")
    pc.add_argument("--f-shift", type=int, default=0)
    pc.add_argument("--f-exp", type=int, default=2)
    pc.add_argument("--window-lo", type=int, default=2)
    pc.add_argument("--window-hi", type=int, default=None)
    pc.add_argument("--families", type=int, default=6)
    pc.add_argument("--max-terms", type=int, default=3)
    pc.add_argument("--min-hits", type=int, default=3)
    pc.add_argument("--kmax", type=int, default=None)
    pc.set_defaults(fn=cmd_certify)

    pw = sub.add_parser("convert-witness", help="witness-shape converters")
    pw.add_argument("--mode", choices=["4to3", "cover", "reshape"], required=True)
    pw.add_argument("--input", required=True)
    pw.add_argument("--out", default=None)
    pw.set_defaults(fn=cmd_convert_witness)

    pd = sub.add_parser("check-dprime", help="paired-domination report for the stand-in family")
    pd.add_argument("--count", type=int, default=3)
    pd.add_argument("--length", type=int, default=24)
    pd.add_argument("--blocks", type=int, default=2)
    pd.add_argument("--pairs-required", type=int, default=1)
    pd.add_argument("--out", default=None)
    pd.set_defaults(fn=cmd_check_dprime)

    pn = sub.add_parser("nwd-extend", help="meager-trap escaping sequence extension")
    pn.add_argument("--sequence", default="", help="comma-separated start, may be empty")
    pn.add_argument("--f-linear", default="1,0", help="a,b for f(x) = a*x + b")
    pn.add_argument("--block", type=int, default=0)
    pn.add_argument("--min-index", type=int, default=0)
    pn.set_defaults(fn=cmd_nwd_extend)

    pr = sub.add_parser("report", help="human-readable family / certificate summary")
    pr.add_argument("--family", required=True)
    pr.add_argument("--certs", default=None)
    pr.set_defaults(fn=cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except HorizonExceeded as e:
        print(f"horizon exceeded: {e}", file=sys.stderr)
        return EXIT_HORIZON
    except (NoNonzeroKernel, DominationFails, StageMissing, ValueError) as e:
        print(f"precondition failed: {e}", file=sys.stderr)
        return EXIT_PRECONDITION
    except AuditFailure as e:
        print(f"audit failure: {e}", file=sys.stderr)
        return EXIT_AUDIT


if __name__ == "__main__":
    sys.exit(main())
