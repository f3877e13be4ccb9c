"""Command-line front end.

Exit codes: 0 success, 1 an exact identity failed (a bug), 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional

from . import energy as en
from .errors import IdentityViolation, SumProdError
from .field import FieldCtx
from .incidence import construction_identity, swapped_construction
from .popularity import intersection_bound_check, popular_decompose, refine_43
from .report import csv_rows, jsonable, to_csv
from .search import OBJECTIVES, append_ledger, coset_or_truncation, exhaustive, hill_climb
from .setops import OPS, FSet, combine, parse_set, shift
from .verify import proof_trace_shift, verify_corollary, verify_e2, verify_e4, verify_shift

COMMANDS = ("energy", "decompose", "refine", "incidence", "verify", "trace", "search", "corollary")
SET_NAMES = ("A", "B", "C", "D")


@dataclass
class RunConfig:
    """Everything needed to replay a run; round-trips through JSON."""

    command: str
    p: str = "rational"
    sets: Dict[str, str] = field(default_factory=dict)
    format: str = "json"
    seed: int = 0
    force: bool = False
    jobs: int = 1
    options: Dict[str, object] = field(default_factory=dict)

    def to_text(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        return cls(**json.loads(text))

    def to_argv(self) -> List[str]:
        argv = [self.command, "--p", self.p, "--format", self.format, "--seed", str(self.seed), "--jobs", str(self.jobs)]
        if self.force:
            argv.append("--force")
        for name, desc in sorted(self.sets.items()):
            argv += [f"--{name}", desc]
        for key, val in sorted(self.options.items()):
            flag = "--" + key.replace("_", "-")
            if val is True:
                argv.append(flag)
            elif val is False or val is None:
                continue
            else:
                argv += [flag, str(val)]
        return argv


def _common(sp: argparse.ArgumentParser, sets=SET_NAMES):
    sp.add_argument("--p", default="rational", help="prime modulus or 'rational'")
    for name in sets:
        sp.add_argument(f"--{name}", dest=name, default=None, help=f"set {name}: comma list or gp/ap/subgroup/coset form")
    sp.add_argument("--format", choices=("json", "csv", "text"), default="json")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--force", action="store_true", help="allow small sets outside the guarantee regime")
    sp.add_argument("--strict", action="store_true", help="strip 0 from sets instead of warning")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sumprod", description="Shifted product sets and multiplicative energy lab.")
    ap.add_argument("--config", help="JSON RunConfig file; its flags come before any given on the command line")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("energy", help="representation histogram and moment energy")
    _common(sp)
    sp.add_argument("--op", choices=OPS, default="ratio")
    sp.add_argument("--n", default="2", help="moment, e.g. 2, 4 or 4/3")
    sp.add_argument("--histogram", action="store_true", help="include the histogram")
    sp.add_argument("--buckets", action="store_true", help="include dyadic buckets")
    sp.add_argument("--bruteforce", action="store_true", help="also run the enumeration oracle")

    sp = sub.add_parser("decompose", help="popular products P and popular subset A'")
    _common(sp)

    sp = sub.add_parser("refine", help="4/3-energy refinement of A")
    _common(sp)

    sp = sub.add_parser("incidence", help="incidence constructions for the E4 bound")
    _common(sp)
    sp.add_argument("--n", default="4", help="moment used to pick the rich bucket")
    sp.add_argument("--method", choices=("hashed", "bruteforce"), default="hashed")
    sp.add_argument("--all-buckets", action="store_true")

    sp = sub.add_parser("verify", help="check one theorem instance")
    _common(sp)
    sp.add_argument("--thm", choices=("e4", "e2", "shift"), required=True)

    sp = sub.add_parser("trace", help="full proof-chain trace for the shift theorem")
    _common(sp)

    sp = sub.add_parser("search", help="search for sets with small shifted products")
    _common(sp)
    sp.add_argument("--mode", choices=("exhaustive", "hill"), default="exhaustive")
    sp.add_argument("--n", type=int, default=3, help="set size")
    sp.add_argument("--objective", choices=OBJECTIVES, default="shift_product")
    sp.add_argument("--steps", type=int, default=1000)
    sp.add_argument("--ledger", help="append records to this CSV file")

    sp = sub.add_parser("corollary", help="|A(A+1)| and |AA|+|(A+1)(A+1)| against |A|^{11/9}")
    _common(sp)
    sp.add_argument("--orders", help="comma list of sizes: run a subgroup-coset ledger instead of --A")
    sp.add_argument("--x", default="3", help="coset representative for --orders")
    return ap


def _ctx(ns) -> FieldCtx:
    return FieldCtx.parse(ns.p)


def _sets(ns, ctx, needed) -> Dict[str, FSet]:
    out = {}
    if ns.A is None:
        raise SumProdError("--A is required")
    for name in needed:
        text = getattr(ns, name, None)
        if text is None:
            text = ns.A
        out[name] = parse_set(text, ctx)
    return out


def _emit(payload, fmt: str, out, instance: str = "0"):
    data = jsonable(payload)
    if fmt == "json":
        out.write(json.dumps(data, indent=2) + "\n")
    elif fmt == "csv":
        items = data if isinstance(data, list) else [data]
        if all(isinstance(it, dict) and "theorem_id" in it for it in items):
            rows = []
            for i, item in enumerate(items):
                rows += csv_rows(f"{instance}.{i}" if len(items) > 1 else instance, item)
            out.write(to_csv(rows))
        else:
            out.write(_flat_csv(items))
    else:
        out.write(_text(data) + "\n")


def _flat_csv(items) -> str:
    """Plain table for records that are not theorem reports (search, ledgers)."""
    buf = io.StringIO()
    fields = list(items[0].keys()) if items else []
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for it in items:
        w.writerow({k: json.dumps(v) if isinstance(v, (dict, list)) else v for k, v in it.items()})
    return buf.getvalue()


def _text(data, indent=0) -> str:
    pad = "  " * indent
    if isinstance(data, dict):
        lines = []
        for k, v in data.items():
            if isinstance(v, (dict, list)) and v:
                lines.append(f"{pad}{k}:")
                lines.append(_text(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {v}")
        return "\n".join(lines)
    if isinstance(data, list):
        if all(not isinstance(v, (dict, list)) for v in data):
            return pad + ", ".join(map(str, data))
        return "\n".join(_text(v, indent) for v in data)
    return f"{pad}{data}"


def _corollary_row(args):
    p, n, x = args
    ctx = FieldCtx.parse(p)
    A, exact = coset_or_truncation(ctx, n, int(x))
    A1 = shift(A, 1)
    sp = len(combine(A, A1, "product"))
    aa = len(combine(A, A, "product"))
    bb = len(combine(A1, A1, "product"))
    if sp < n:
        raise IdentityViolation(f"|A(A+1)| = {sp} < |A| = {n}")
    return {
        "n": n,
        "exact_coset": exact,
        "set": A.describe(),
        "A(A+1)": sp,
        "AA": aa,
        "(A+1)(A+1)": bb,
        "exp_shift_product": round(math.log(sp) / math.log(n), 4),
        "exp_two_products": round(math.log(aa + bb) / math.log(n), 4),
        "target_exponent": round(11 / 9, 4),
        "AA1_ge_A": sp >= n,
    }


def corollary_ledger(p: str, orders: List[int], x: str = "3", jobs: int = 1) -> List[dict]:
    tasks = [(p, n, x) for n in orders]
    if jobs <= 1:
        return [_corollary_row(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(_corollary_row, tasks))


def run(ns, out) -> None:
    cmd = ns.command
    ctx = _ctx(ns)
    if cmd == "energy":
        s = _sets(ns, ctx, ("A", "D"))
        h = en.rep_function(s["A"], s["D"], ns.op)
        n = en.parse_moment(ns.n)
        payload = {"op": ns.op, "n": str(n), "value": en.energy_moment(h, n), "mass": h.mass}
        if ns.bruteforce:
            payload["bruteforce"] = en.energy_bruteforce(s["A"], s["D"], ns.op, int(n))
        if ns.histogram:
            payload["histogram"] = h.to_json()["counts"]
        if ns.buckets:
            payload["buckets"] = [b.to_json() for b in en.dyadic_buckets(h, n)]
        if ns.format == "text" and not (ns.histogram or ns.buckets or ns.bruteforce):
            out.write(f"{jsonable(payload['value'])}\n")
            return
        _emit(payload, ns.format, out)
    elif cmd == "decompose":
        s = _sets(ns, ctx, ("A", "B"))
        dec = popular_decompose(s["A"], s["B"], force=ns.force)
        payload = dec.to_json()
        payload["min_intersection"] = intersection_bound_check(dec)
        _emit(payload, ns.format, out)
    elif cmd == "refine":
        s = _sets(ns, ctx, ("A", "B"))
        _emit(refine_43(s["A"], s["B"], force=ns.force), ns.format, out)
    elif cmd == "incidence":
        s = _sets(ns, ctx, ("A", "C", "D"))
        h = en.rep_function(s["A"], s["D"], "ratio")
        buckets = en.dyadic_buckets(h, ns.n) if ns.all_buckets else [en.richest_bucket(h, ns.n)]
        rows = []
        for b in buckets:
            rows.append(
                {
                    "bucket": b.to_json(),
                    "construction": construction_identity(s["A"], s["D"], s["C"], b, ns.method).to_json(),
                    "swapped": swapped_construction(s["A"], s["D"], s["C"], b, ns.method).to_json(),
                }
            )
        for r in rows:
            if not (r["construction"]["holds"] and r["swapped"]["holds"]):
                _emit(rows, ns.format, out)
                raise IdentityViolation("incidence construction produced too few incidences")
        _emit(rows if ns.all_buckets else rows[0], ns.format, out)
    elif cmd == "verify":
        if ns.thm == "shift":
            s = _sets(ns, ctx, SET_NAMES)
            rep = verify_shift(s["A"], s["B"], s["C"], s["D"], strict=ns.strict)
        else:
            s = _sets(ns, ctx, ("A", "C", "D"))
            fn = verify_e4 if ns.thm == "e4" else verify_e2
            rep = fn(s["A"], s["C"], s["D"], strict=ns.strict)
        _emit(rep, ns.format, out)
    elif cmd == "trace":
        s = _sets(ns, ctx, SET_NAMES)
        tr = proof_trace_shift(s["A"], s["B"], s["C"], s["D"], force=ns.force, strict=ns.strict)
        _emit(tr, ns.format, out)
    elif cmd == "search":
        if ctx.p is None:
            raise SumProdError("search needs --p <prime>")
        if ns.mode == "exhaustive":
            rec = exhaustive(ctx.p, ns.n, ns.objective, jobs=ns.jobs)
        else:
            start = parse_set(ns.A, ctx) if ns.A else _random_start(ctx.p, ns.n, ns.seed)
            rec = hill_climb(start, ns.objective, ns.steps, ns.seed)
        if ns.ledger:
            append_ledger(ns.ledger, [rec])
        _emit(rec, ns.format, out)
    elif cmd == "corollary":
        if ns.orders:
            if ctx.p is None:
                raise SumProdError("--orders needs --p <prime>")
            orders = [int(v) for v in ns.orders.split(",") if v.strip()]
            _emit(corollary_ledger(str(ctx.p), orders, ns.x, ns.jobs), ns.format, out)
        else:
            s = _sets(ns, ctx, ("A",))
            r1, r2 = verify_corollary(s["A"], strict=ns.strict)
            if r1.flags["AA1_ge_A"] is False and s["A"].elems != (ctx(-1),):
                raise IdentityViolation("|A(A+1)| < |A|")
            _emit([r1, r2], ns.format, out)


def _random_start(p: int, n: int, seed: int) -> FSet:
    rng = random.Random(seed)
    return FSet(FieldCtx.prime(p), tuple(rng.sample(range(1, p), n)))


def main(argv: Optional[List[str]] = None, out=None) -> int:
    out = out or sys.stdout
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    if argv[:1] == ["--config"] and len(argv) >= 2:
        try:
            with open(argv[1]) as fh:
                cfg = RunConfig.from_text(fh.read())
        except (OSError, ValueError, TypeError) as exc:
            print(f"sumprod: bad config: {exc}", file=sys.stderr)
            return 2
        argv = cfg.to_argv() + argv[2:]
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        run(ns, out)
    except IdentityViolation as exc:
        print(f"sumprod: exact identity violated: {exc}", file=sys.stderr)
        return 1
    except (SumProdError, ValueError, ZeroDivisionError) as exc:
        print(f"sumprod: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
