"""JSON ballot files, deterministic reports and CSV plot exports.

Exact numbers are written as strings ("1/3") or integers, floats as JSON
numbers; both forms are accepted on input.  Every parse error names the
file, the offending field path and the violated constraint.
"""

from __future__ import annotations

import csv
import io as _io
import json
from fractions import Fraction
from typing import Optional

from .errors import FileFormatError, InvalidDistribution, LevelAggError
from .scale import OutcomeScale, Pmf, TAU_MASS, to_number

FORMAT_VERSION = 1


def number_to_json(x):
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, int):
        return x
    return float(x)


def render_number(x, exact: bool) -> str:
    """CSV/text rendering: fractions in exact mode, decimals otherwise."""
    if exact:
        return str(Fraction(x)) if not isinstance(x, float) else str(Fraction(repr(x)))
    return f"{float(x):.12g}"


def load_json(path: str):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise FileFormatError(f"{path}: cannot read file: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None


def _number(value, where: str, source: str, exact: bool):
    if isinstance(value, bool) or not isinstance(value, (int, float, str)):
        raise FileFormatError(f"{source}: {where}: expected a number, got {value!r}")
    try:
        return to_number(value, exact)
    except (ValueError, ZeroDivisionError):
        raise FileFormatError(f"{source}: {where}: not a number: {value!r}") from None


def parse_ballots(doc: dict, source: str = "<ballots>", exact: bool = True):
    """Build an :class:`~levelagg.voting.Election` from a ballot document."""
    from .voting import Election

    if not isinstance(doc, dict):
        raise FileFormatError(f"{source}: top level must be an object")
    for key in ("scale", "candidates", "ballots"):
        if key not in doc:
            raise FileFormatError(f"{source}: missing field {key!r}")
    labels = doc["scale"]
    if not isinstance(labels, list) or not labels:
        raise FileFormatError(f"{source}: scale: must be a non-empty list of grade labels")
    try:
        scale = OutcomeScale(tuple(str(g) for g in labels))
    except LevelAggError as exc:
        raise FileFormatError(f"{source}: scale: {exc}") from None
    m = len(scale)
    candidates = doc["candidates"]
    if not isinstance(candidates, list) or not candidates:
        raise FileFormatError(f"{source}: candidates: must be a non-empty list")
    candidates = [str(c) for c in candidates]
    ballots = doc["ballots"]
    if not isinstance(ballots, dict):
        raise FileFormatError(f"{source}: ballots: must map voter id to per-candidate masses")

    voters_doc = doc.get("voters")
    if voters_doc is None:
        voters_doc = [{"id": vid} for vid in ballots]
    if not isinstance(voters_doc, list):
        raise FileFormatError(f"{source}: voters: must be a list of {{id, weight}}")
    voters = []
    for k, v in enumerate(voters_doc):
        if not isinstance(v, dict) or "id" not in v:
            raise FileFormatError(f"{source}: voters[{k}]: needs an 'id'")
        w = _number(v.get("weight", 1), f"voters[{k}].weight", source, exact)
        if w < 0:
            raise FileFormatError(f"{source}: voters[{k}].weight: must be >= 0, got {w}")
        voters.append((str(v["id"]), w))
    if voters and not sum(w for _, w in voters) > 0:
        raise FileFormatError(f"{source}: voters: weights must sum to a positive value")

    rows = {}
    for vid, _ in voters:
        if vid not in ballots:
            raise FileFormatError(f"{source}: ballots.{vid}: missing ballot for voter {vid!r}")
        cand_rows = ballots[vid]
        if not isinstance(cand_rows, dict):
            raise FileFormatError(f"{source}: ballots.{vid}: must map candidate to masses")
        rows[vid] = {}
        for cand in candidates:
            where = f"ballots.{vid}.{cand}"
            if cand not in cand_rows:
                raise FileFormatError(f"{source}: {where}: missing (every voter grades every candidate)")
            masses = cand_rows[cand]
            if not isinstance(masses, list) or len(masses) != m:
                raise InvalidDistribution(f"{source}: {where}: needs a list of {m} masses")
            values = tuple(_number(x, f"{where}[{j}]", source, exact) for j, x in enumerate(masses))
            try:
                rows[vid][cand] = Pmf(values, scale)
            except InvalidDistribution as exc:
                raise InvalidDistribution(
                    f"{source}: {where}: {exc} (masses must lie in [0, 1] and sum to 1 "
                    f"within {TAU_MASS:g})") from None
    extra = sorted(set(ballots) - {v for v, _ in voters})
    if extra:
        raise FileFormatError(f"{source}: ballots: voters {extra} are not listed in 'voters'")
    return Election(scale, tuple(candidates), tuple(voters), rows)


def load_ballots(path: str, exact: bool = True):
    return parse_ballots(load_json(path), path, exact)


def election_to_dict(election) -> dict:
    return {
        "scale": list(election.scale.labels),
        "voters": [{"id": vid, "weight": number_to_json(w)} for vid, w in election.voters],
        "candidates": list(election.candidates),
        "ballots": {vid: {c: [number_to_json(x) for x in election.ballots[vid][c].mass]
                          for c in election.candidates}
                    for vid in election.voter_ids},
    }


def load_numbers(path: str, field: str, exact: bool = True) -> list:
    """A JSON array of numbers (priors, weights)."""
    doc = load_json(path)
    if not isinstance(doc, list):
        raise FileFormatError(f"{path}: {field}: expected a JSON array of numbers")
    return [_number(x, f"{field}[{k}]", path, exact) for k, x in enumerate(doc)]


def build_report(command: list, exact: bool, **payload) -> dict:
    """Report envelope; deterministic (no timestamps, fixed key order)."""
    from . import __version__

    return {"tool": "levelagg", "version": __version__, "format": FORMAT_VERSION,
            "mode": "exact" if exact else "float", "command": list(command), **payload}


def dumps_report(report: dict) -> str:
    return json.dumps(report, indent=2, ensure_ascii=False) + "\n"


def pmf_json(pmf) -> list:
    return [number_to_json(v) for v in pmf]


CSV_HEADER = ("grade", "candidate", "cdf", "pmf")


def aggregates_csv(scale: OutcomeScale, aggregates: dict, exact: bool) -> str:
    """Rows ``grade,candidate,cdf,pmf`` for every candidate and grade."""
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for cand, pmf in aggregates.items():
        cdf = pmf.to_cdf()
        for j, label in enumerate(scale.labels):
            writer.writerow((label, cand, render_number(cdf[j], exact), render_number(pmf[j], exact)))
    return buf.getvalue()


def write_text(path: Optional[str], text: str):
    if path is None or path == "-":
        print(text, end="")
        return
    with open(path, "w") as fh:
        fh.write(text)
