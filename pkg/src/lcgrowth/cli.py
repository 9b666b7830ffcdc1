"""Command line entry point: ``lcgrowth <subcommand> ...``.

Exit status: 0 when the command ran (whatever the verdict), 2 for malformed
input, 3 for model or window errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import random
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import __version__
from .errors import ModelError, SpecError
from .groups import AffineGrid, FiniteGroup, PAdicAffine, build_group, builtin_groups
from .minimizer import maximize_exact, maximize_heuristic, normalize_pair, pair_to_json, verify_claims
from .search import exceptional_set_scan, fast_slack, find_near_equality, random_mask, witnesses_to_json
from .setops import measure, mu, nu, parse_set, product_set, set_to_json
from .subgroups import compact_kernel_subgroups, enumerate_subgroups
from .theorems import (CORRECTED, ORIENTATIONS, REPORT_SCHEMA, build_example41, check_prop42,
                       verify_kemperman_connected, verify_kneser_abelian, verify_main,
                       verify_unimodular)
from .values import to_json

log = logging.getLogger("lcgrowth")


class _Inputs:
    """Loads JSON arguments (file paths or inline objects) and records their digests."""

    def __init__(self):
        self.digests: dict[str, str] = {}

    def load(self, name: str, arg: str):
        if arg is None:
            return None
        text = arg if arg.lstrip().startswith(("{", "[")) else None
        if text is None:
            try:
                raw = Path(arg).read_bytes()
            except OSError as exc:
                raise SpecError(f"cannot read {name}: {exc}") from None
        else:
            raw = text.encode()
        self.digests[name] = hashlib.sha256(raw).hexdigest()
        try:
            return json.loads(raw)
        except json.JSONDecodeError as exc:
            raise SpecError(f"{name} is not valid JSON: {exc}") from None


def _group_summary(G) -> dict:
    out = {"schema": REPORT_SCHEMA, "kind": "group", "name": getattr(G, "name", repr(G)),
           "unimodular": G.is_unimodular, "total_measure": to_json(G.total_measure)}
    if isinstance(G, FiniteGroup):
        out.update(order=G.n, abelian=G.is_abelian, model="finite")
    elif isinstance(G, PAdicAffine):
        out.update(model="padic_affine", p=G.p, k=list(G.k_window), d=list(G.d_window))
    elif isinstance(G, AffineGrid):
        out.update(model="affine_grid", h=G.h, i_range=list(G.i_range), j_range=list(G.j_range))
    else:
        out.update(model="product", factors=[_group_summary(f)["name"] for f in G.factors])
    return out


def _load_xy(inp: _Inputs, args):
    G = build_group(inp.load("group", args.group))
    X = parse_set(G, inp.load("x", args.x))
    Y = parse_set(G, inp.load("y", args.y))
    return G, X, Y


# subcommands: each returns the report object

def cmd_group(args, inp):
    return _group_summary(build_group(inp.load("group", args.group)))


def cmd_measure(args, inp):
    G = build_group(inp.load("group", args.group))
    S = parse_set(G, inp.load("set", args.set))
    return {"schema": REPORT_SCHEMA, "kind": "measure", "mu": to_json(mu(G, S)),
            "nu": to_json(nu(G, S))}


def cmd_product(args, inp):
    G, X, Y = _load_xy(inp, args)
    XY = product_set(G, X, Y)
    return {"schema": REPORT_SCHEMA, "kind": "product", "XY": set_to_json(G, XY),
            "exact": XY.exact, "mu": to_json(measure(G, XY, "left")),
            "nu": to_json(measure(G, XY, "right"))}


def cmd_subgroups(args, inp):
    G = build_group(inp.load("group", args.group))
    if isinstance(G, FiniteGroup) and not args.kernel_only:
        ws = enumerate_subgroups(G)
    else:
        ws = compact_kernel_subgroups(G)
    return [{"carrier": set_to_json(G, w.carrier), "mu": to_json(w.mu),
             "is_proper": w.is_proper, "in_kernel": w.in_kernel} for w in ws]


def cmd_verify(args, inp):
    G, X, Y = _load_xy(inp, args)
    E = parse_set(G, inp.load("e", args.e)) if args.e else None
    if args.law == "main":
        return verify_main(G, X, Y, E, args.orientation).to_json(G)
    if args.law == "unimodular":
        return verify_unimodular(G, X, Y, E).to_json(G)
    if args.law == "kemperman":
        return verify_kemperman_connected(G, X, Y).to_json(G)
    return verify_kneser_abelian(G, X, Y).to_json(G)


def cmd_minimizer(args, inp):
    G, X, Y = _load_xy(inp, args)
    ctx = normalize_pair(G, X, Y, args.orientation)
    pair = maximize_heuristic(ctx) if args.heuristic else maximize_exact(ctx, args.bound)
    return pair_to_json(G, pair, verify_claims(ctx, pair))


def cmd_prop42(args, inp):
    G, X, Y = _load_xy(inp, args)
    ctx = normalize_pair(G, X, Y, args.orientation)
    pair = maximize_exact(ctx, args.bound)
    out = check_prop42(G, X, Y, pair).to_json(G)
    out["H"] = set_to_json(G, pair.H)
    return out


def _ball_pairs(text):
    return None if text is None else [(c, int(d)) for c, d in json.loads(text)]


def cmd_example41(args, inp):
    G, X, Y, rep = build_example41(args.p, args.t, _ball_pairs(args.x_balls), _ball_pairs(args.w_balls))
    out = rep.to_json()
    out["X"] = set_to_json(G, X)
    out["Y"] = set_to_json(G, Y)
    out["verify"] = {o: verify_main(G, X, Y, orientation=o).to_json(G) for o in ORIENTATIONS}
    return out


def cmd_search(args, inp):
    G = build_group(inp.load("group", args.group))
    bad: list = []
    ws = find_near_equality(G, args.law, args.trials, args.seed, Fraction(args.threshold), bad)
    out = witnesses_to_json(G, ws)
    out["counterexamples"] = [{"X": set_to_json(G, x), "Y": set_to_json(G, y), "slack": to_json(v)}
                              for x, y, v in bad]
    if args.scan_exceptional:
        out["exceptional_set_hits"] = exceptional_set_scan(G, args.trials, args.seed)
    return out


def cmd_sweep(args, inp):
    rows = []
    for G in builtin_groups(args.max_order):
        rng = random.Random(args.seed)
        violations = 0
        for _ in range(args.pairs):
            if fast_slack(G, random_mask(G, rng), random_mask(G, rng)) < 0:
                violations += 1
        rows.append({"group": G.name, "order": G.n, "pairs": args.pairs, "violations": violations})
    total = sum(r["violations"] for r in rows)
    return {"schema": REPORT_SCHEMA, "kind": "sweep", "law": "unimodular", "seed": args.seed,
            "groups": rows, "violations": total, "verdict": "holds" if total == 0 else "violated"}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lcgrowth", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, helptext, xy=False, group=True):
        p = sub.add_parser(name, help=helptext)
        if group:
            p.add_argument("--group", required=True, help="group spec (path or inline JSON)")
        if xy:
            p.add_argument("--x", required=True)
            p.add_argument("--y", required=True)
        p.add_argument("--out", default=None, help="report path (default stdout)")
        p.add_argument("--log", default=None, help="append a run record to this JSON-lines file")
        p.set_defaults(func=fn)
        return p

    add("group", cmd_group, "validate a group spec")
    p = add("measure", cmd_measure, "left and right Haar measure of a set")
    p.add_argument("--set", required=True)
    add("product", cmd_product, "product set XY", xy=True)
    p = add("subgroups", cmd_subgroups, "enumerate compact subgroups")
    p.add_argument("--kernel-only", action="store_true")
    p = add("verify", cmd_verify, "check a growth inequality", xy=True)
    p.add_argument("--e", default=None)
    p.add_argument("--orientation", choices=ORIENTATIONS, default=CORRECTED)
    p.add_argument("--law", choices=("main", "unimodular", "kemperman", "kneser"), default="main")
    p = add("minimizer", cmd_minimizer, "maximal feasible pair and its claims", xy=True)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true", default=True)
    mode.add_argument("--heuristic", action="store_true")
    p.add_argument("--orientation", choices=ORIENTATIONS, default=CORRECTED)
    p.add_argument("--bound", type=int, default=14)
    p = add("prop42", cmd_prop42, "exceptional set and coset witnesses", xy=True)
    p.add_argument("--orientation", choices=ORIENTATIONS, default=CORRECTED)
    p.add_argument("--bound", type=int, default=14)
    p = add("example41", cmd_example41, "p-adic instance where the plain sum exceeds one", group=False)
    p.add_argument("--p", type=int, default=3)
    p.add_argument("--t", type=int, default=1)
    p.add_argument("--x-balls", default=None, help='JSON list of [center, depth] on slab 0')
    p.add_argument("--w-balls", default=None, help='JSON list of [center, depth] on slab 0')
    p = add("search", cmd_search, "near-equality pairs", )
    p.add_argument("--law", choices=("unimodular", "main"), default="unimodular")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threshold", default="0")
    p.add_argument("--scan-exceptional", action="store_true")
    p = add("sweep", cmd_sweep, "unimodular bound over builtin groups", group=False)
    p.add_argument("--max-order", type=int, default=12)
    p.add_argument("--pairs", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    return ap


def _verdicts(report) -> list:
    if isinstance(report, dict):
        out = [report["verdict"]] if "verdict" in report else []
        for key in ("verify",):
            if isinstance(report.get(key), dict):
                out += [v.get("verdict") for v in report[key].values()]
        return out
    return []


def _log_path(args) -> Path | None:
    if args.log:
        return Path(args.log)
    env = os.environ.get("LCG_LOG_DIR")
    return Path(env) / "runs.jsonl" if env else None


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    inp = _Inputs()
    t0 = time.perf_counter()
    try:
        report = args.func(args, inp)
    except SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ModelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    path = _log_path(args)
    if path is not None:
        record = {"argv": argv, "inputs": inp.digests, "seed": getattr(args, "seed", None),
                  "version": __version__, "verdicts": _verdicts(report),
                  "wall_time": round(time.perf_counter() - t0, 6)}
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("a") as fh:
            fh.write(json.dumps(record, sort_keys=True) + "\n")
    return 0


def main():
    try:
        code = run()
        sys.stdout.flush()
    except BrokenPipeError:
        # reader went away (e.g. piped into head); silence the flush at exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        code = 0
    sys.exit(code)


if __name__ == "__main__":
    main()
