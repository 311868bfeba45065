"""Command-line entry point: ``levelagg <command> ...``.

Exit codes: 0 success, 1 usage error, 2 validation or budget error,
3 an audit found a violation of an axiom the method should satisfy.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from .aggregators import Method, aggregate
from .axioms import AXIOMS, InstanceSpace, manipulation_report, run_audit
from .errors import BudgetExceeded, FileFormatError, LevelAggError
from .io import (
    aggregates_csv,
    build_report,
    dumps_report,
    load_ballots,
    load_json,
    load_numbers,
    number_to_json,
    pmf_json,
    write_text,
)
from .scale import to_number
from .voting import mju_tally, referendum

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_VIOLATION = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _weights_override(election, path: str, exact: bool):
    doc = load_json(path)
    ids = election.voter_ids
    if isinstance(doc, dict):
        missing = [v for v in ids if v not in doc]
        if missing:
            raise FileFormatError(f"{path}: weights: no weight for voters {missing}")
        values = [to_number(doc[v], exact) for v in ids]
    else:
        values = load_numbers(path, "weights", exact)
        if len(values) != len(ids):
            raise FileFormatError(f"{path}: weights: {len(values)} weights for {len(ids)} voters")
    from .voting import Election

    return Election(election.scale, election.candidates, tuple(zip(ids, values)), election.ballots)


def _aggregates(election, method: Method) -> dict:
    return {c: aggregate(method, election.profile(c)).to_pmf() for c in election.candidates}


def cmd_aggregate(args, argv) -> int:
    election = load_ballots(args.ballots, args.exact)
    if args.weights:
        election = _weights_override(election, args.weights, args.exact)
    method = Method.parse(args.method)
    aggs = _aggregates(election, method)
    report = build_report(argv, args.exact, method=method.to_dict(), scale=list(election.scale.labels),
                          aggregates={c: {"pmf": pmf_json(p), "cdf": pmf_json(p.to_cdf())}
                                      for c, p in aggs.items()})
    write_text(args.out, dumps_report(report))
    if args.csv:
        write_text(args.csv, aggregates_csv(election.scale, aggs, args.exact))
    return EXIT_OK


def cmd_export(args, argv) -> int:
    election = load_ballots(args.ballots, args.exact)
    aggs = _aggregates(election, Method.parse(args.method))
    write_text(args.out, aggregates_csv(election.scale, aggs, args.exact))
    return EXIT_OK


def cmd_rank(args, argv) -> int:
    election = load_ballots(args.ballots, args.exact)
    method = Method.parse(args.method)
    ranking = mju_tally(election, method)
    report = build_report(argv, args.exact, method=method.to_dict(), ranking=ranking.to_dict())
    write_text(args.out, dumps_report(report))
    return EXIT_OK


def _space(args) -> InstanceSpace:
    return InstanceSpace(n=args.n, m=args.m, grid=args.grid, mode=args.mode, samples=args.samples,
                         seed=args.seed, budget=args.budget, exact=args.exact)


def _weight_list(text: Optional[str], exact: bool):
    if not text:
        return None
    try:
        return tuple(to_number(w, exact) for w in text.split(","))
    except (ValueError, ZeroDivisionError):
        raise FileFormatError(f"--weights: not a comma-separated number list: {text!r}") from None


def cmd_audit(args, argv) -> int:
    method = Method.parse(args.method)
    axioms = [a.strip() for a in args.axioms.split(",") if a.strip()]
    unknown = [a for a in axioms if a not in AXIOMS]
    if unknown:
        print(f"levelagg audit: unknown axioms {unknown}; choose from {', '.join(AXIOMS)}",
              file=sys.stderr)
        return EXIT_USAGE
    space = _space(args)
    weights = _weight_list(args.weights, args.exact)
    reports, partial, status = [], False, EXIT_OK
    for axiom in axioms:
        try:
            rep = run_audit(method, axiom, space, weights, r=to_number(args.r), scenarios=args.scenarios)
        except BudgetExceeded as exc:
            reports.append({"axiom": axiom, "verdict": "budget-exceeded", "error": str(exc)})
            partial = True
            status = max(status, EXIT_INVALID)
            continue
        reports.append(rep.to_dict())
        if rep.unexpected:
            status = EXIT_VIOLATION
    report = build_report(argv, args.exact, method=method.to_dict(), partial=partial, audits=reports)
    write_text(args.out, dumps_report(report))
    return status


def cmd_manipulate(args, argv) -> int:
    method = Method.parse(args.method)
    rep = manipulation_report(method, args.utility, _space(args), _weight_list(args.weights, args.exact))
    report = build_report(argv, args.exact, method=method.to_dict(), search=rep.to_dict())
    write_text(args.out, dumps_report(report))
    return EXIT_OK


def cmd_referendum(args, argv) -> int:
    priors = load_numbers(args.priors, "priors", args.exact)
    result = referendum(priors, to_number(args.alpha, args.exact), args.exact)
    report = build_report(argv, args.exact, referendum=result.to_dict())
    write_text(args.out, dumps_report(report))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="levelagg", description="Level-strategyproof probability aggregation toolkit.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--exact", action="store_true", help="rational arithmetic; fractions in output")
        sp.add_argument("--out", help="write the report here instead of stdout")

    a = sub.add_parser("aggregate", help="aggregate every candidate's ballots")
    a.add_argument("--ballots", required=True, help="BallotFile JSON (docs/ballots.schema.json)")
    a.add_argument("--method", required=True, help="e.g. proportional, order:2, weighted@1,2,1")
    a.add_argument("--weights", help="JSON file: array of weights or {voter id: weight}")
    a.add_argument("--csv", help="also write grade,candidate,cdf,pmf rows here")
    common(a)
    a.set_defaults(func=cmd_aggregate)

    r = sub.add_parser("rank", help="majority-judgment ranking of uncertain ballots")
    r.add_argument("--ballots", required=True, help="BallotFile JSON")
    r.add_argument("--method", default="weighted_proportional", help="aggregator before ranking")
    common(r)
    r.set_defaults(func=cmd_rank)

    def space_args(sp):
        sp.add_argument("--method", required=True)
        sp.add_argument("--n", type=int, default=3, help="voters")
        sp.add_argument("--m", type=int, default=3, help="grades")
        sp.add_argument("--grid", type=int, default=4, help="CDF values are multiples of 1/GRID")
        sp.add_argument("--mode", choices=("exhaustive", "random"), default="exhaustive")
        sp.add_argument("--samples", type=int, default=1000, help="profiles drawn in random mode")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--budget", type=int, default=10 ** 7, help="maximum aggregate evaluations")
        sp.add_argument("--weights", help="comma-separated profile weights")
        common(sp)

    au = sub.add_parser("audit", help="audit axioms on a discretized instance space")
    space_args(au)
    au.add_argument("--axioms", required=True, help="comma list from: " + ", ".join(AXIOMS))
    au.add_argument("--r", default="1", help="exponent for lr-cdf-sp")
    au.add_argument("--scenarios", type=int, default=1000, help="random scenarios for w-axioms")
    au.set_defaults(func=cmd_audit)

    mp = sub.add_parser("manipulate", help="search for a profitable deviation")
    space_args(mp)
    mp.add_argument("--utility", required=True, help="level[:grade], lr:R or l1-prob")
    mp.set_defaults(func=cmd_manipulate)

    rf = sub.add_parser("referendum", help="binary decision from individual probabilities")
    rf.add_argument("--priors", required=True, help="JSON array of probabilities")
    rf.add_argument("--alpha", required=True, help="reform iff the aggregate exceeds this, in (0, 1)")
    common(rf)
    rf.set_defaults(func=cmd_referendum)

    ex = sub.add_parser("export", help="CSV of aggregate CDF/PMF values for plotting")
    ex.add_argument("--ballots", required=True, help="BallotFile JSON")
    ex.add_argument("--method", required=True)
    common(ex)
    ex.set_defaults(func=cmd_export)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, argv)
    except (LevelAggError, ValueError) as exc:
        print(f"levelagg {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
