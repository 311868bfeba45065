"""Majority Judgment, its extension to probabilistic ballots, and referendums.

Grades are ordered lowest first, so a larger quantile index is a better
grade.  Comparators return +1 when the first argument ranks strictly
above the second, -1 when below and 0 on a tie.
"""

from __future__ import annotations

import functools
from bisect import bisect_left
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Sequence

from .aggregators import Method, aggregate
from .errors import (
    ConfigError,
    DomainError,
    InvalidDistribution,
    InvalidWeights,
    PreconditionUnmet,
    ProfileError,
    TransitivityViolation,
)
from .scale import Cdf, OutcomeScale, Pmf, Profile, as_cdf, dominates, quantile, to_number

BREAKPOINT_DIGITS = 12


# -- classic MJ -------------------------------------------------------------

@dataclass(frozen=True)
class MajorityValue:
    """Grades in the order they become the majority grade."""

    grades: tuple

    @property
    def majority_grade(self):
        return self.grades[0]

    def __len__(self):
        return len(self.grades)


def majority_value(grades: Sequence, key=None) -> MajorityValue:
    """Fan-out sequence of a grade multiset.

    With r sorted best first, odd n = 2t-1 gives (r_t, r_t+1, r_t-1, ...)
    and even n = 2t-2 gives (r_t, r_t-1, r_t+1, ...).  ``key`` maps a
    grade to its rank when grades are labels.
    """
    if not grades:
        raise DomainError("majority value of an empty grade multiset")
    r = sorted(grades, key=key, reverse=True)
    n = len(r)
    if n % 2:
        t, steps = (n + 1) // 2, (1, -1)
    else:
        t, steps = (n + 2) // 2, (-1, 1)
    order = [t]
    d = 1
    while len(order) < n:
        for s in steps:
            pos = t + s * d
            if 1 <= pos <= n:
                order.append(pos)
        d += 1
    return MajorityValue(tuple(r[p - 1] for p in order))


def compare_majority_values(va: MajorityValue, vb: MajorityValue, key=None) -> int:
    """Lexicographic comparison of two majority values of equal length."""
    key = key or (lambda g: g)
    for x, y in zip(va.grades, vb.grades):
        if key(x) != key(y):
            return 1 if key(x) > key(y) else -1
    return 0


# -- comparator on distributions ---------------------------------------------

@dataclass(frozen=True)
class CompareTrace:
    """The three points of the comparison and its outcome.

    ``side`` is "b" when the decision was taken at or just above b, "a" when
    taken just below a, and "equal" for identical distributions.
    """

    a: object
    b: object
    c: object
    side: str
    result: int

    def to_dict(self) -> dict:
        from .io import number_to_json as nj

        return {"a": nj(self.a), "b": nj(self.b), "c": nj(self.c), "side": self.side,
                "result": self.result}


def _as_cdf(d) -> Cdf:
    if isinstance(d, (Cdf, Pmf)):
        return as_cdf(d)
    return Pmf.of(d).to_cdf()


def _breakpoints(PA: Cdf, PB: Cdf, exact: bool) -> list:
    half, one, zero = (Fraction(1, 2), Fraction(1), Fraction(0)) if exact else (0.5, 1.0, 0.0)
    points = {zero, half, one}
    for v in list(PA.cum) + list(PB.cum):
        if exact:
            points.add(v)
        else:
            points.add(round(float(v), BREAKPOINT_DIGITS))
    return sorted(p for p in points if zero <= p <= one)


def compare_trace(pA, pB) -> CompareTrace:
    """Rank two distributions on a shared scale by the closest disagreement to 1/2.

    The quantile functions are step functions, constant on each cell
    (x_k, x_k+1] of the merged breakpoints, so sup/inf of the disagreement
    set are read off the cell endpoints.
    """
    PA, PB = _as_cdf(pA), _as_cdf(pB)
    if len(PA) != len(PB) or (PA.scale and PB.scale and PA.scale != PB.scale):
        from .errors import ScaleMismatch

        raise ScaleMismatch(f"cannot compare distributions on {len(PA)} and {len(PB)} grades")
    exact = PA.exact and PB.exact
    half, zero, one = (Fraction(1, 2), Fraction(0), Fraction(1)) if exact else (0.5, 0.0, 1.0)
    if PA.cum == PB.cum or _same_quantiles(PA, PB, exact):
        return CompareTrace(half, half, half, "equal", 0)

    xs = _breakpoints(PA, PB, exact)
    qa, qb = _quantiles(PA, xs[1:], exact), _quantiles(PB, xs[1:], exact)
    cells = [(lo, hi, x, y) for lo, hi, x, y in zip(xs, xs[1:], qa, qb)]  # (left, right, qA, qB)
    differing = [c for c in cells if c[2] != c[3]]

    below = [c for c in differing if c[1] <= half]
    a = max(c[1] for c in below) if below else zero
    a_cell = max(below, key=lambda c: c[1]) if below else None

    at_half = next((c for c in differing if c[1] == half), None)
    if at_half is not None:
        b, b_cell = half, at_half
    else:
        above = [c for c in differing if c[0] >= half]
        b_cell = min(above, key=lambda c: c[0]) if above else None
        b = b_cell[0] if above else one

    if b - half < half - a or b == half:
        c, cell, side = b, b_cell, "b"
    else:
        c, cell, side = a, a_cell, "a"
    result = -1 if cell[2] < cell[3] else 1
    return CompareTrace(a, b, c, side, result)


def _quantiles(P: Cdf, xs, exact: bool) -> list:
    if exact:
        # the cumulative vector is sorted, so the lowest grade reaching x is a bisection point
        return [bisect_left(P.cum, x) for x in xs]
    return [quantile(P, x) for x in xs]


def _same_quantiles(PA: Cdf, PB: Cdf, exact: bool) -> bool:
    if exact:
        return False
    return all(abs(x - y) <= 1e-9 for x, y in zip(PA.cum, PB.cum))


def mj_compare(pA, pB) -> int:
    """+1 if A ranks above B, -1 if below, 0 if tied."""
    return compare_trace(pA, pB).result


# -- elections --------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Election:
    """Probabilistic ballots: ``ballots[voter_id][candidate]`` is a Pmf."""

    scale: OutcomeScale
    candidates: tuple
    voters: tuple  # (id, weight) pairs
    ballots: Mapping

    def __post_init__(self):
        cands = tuple(str(c) for c in self.candidates)
        if not cands:
            raise ProfileError("an election needs at least one candidate")
        if len(set(cands)) != len(cands):
            raise ProfileError(f"duplicate candidate labels in {cands}")
        voters = tuple((str(v), w) for v, w in self.voters)
        if not voters:
            raise ProfileError("an election needs at least one voter")
        if len({v for v, _ in voters}) != len(voters):
            raise ProfileError("duplicate voter ids")
        if any(w < 0 for _, w in voters):
            raise InvalidWeights("voter weights must be nonnegative")
        if not sum(w for _, w in voters) > 0:
            raise InvalidWeights("voter weights sum to zero")
        m = len(self.scale)
        ballots = {}
        for vid, _ in voters:
            row = self.ballots.get(vid)
            if row is None:
                raise ProfileError(f"voter {vid!r} has no ballot")
            ballots[vid] = {}
            for cand in cands:
                if cand not in row:
                    raise ProfileError(f"voter {vid!r} did not grade candidate {cand!r}")
                p = row[cand]
                p = p if isinstance(p, Pmf) else Pmf.of(p)
                if len(p) != m:
                    raise InvalidDistribution(
                        f"voter {vid!r}, candidate {cand!r}: {len(p)} masses for {m} grades")
                ballots[vid][cand] = Pmf(p.mass, self.scale)
        object.__setattr__(self, "candidates", cands)
        object.__setattr__(self, "voters", voters)
        object.__setattr__(self, "ballots", ballots)

    def __eq__(self, other):
        if not isinstance(other, Election):
            return NotImplemented
        return (self.scale == other.scale and self.candidates == other.candidates
                and self.voters == other.voters and self.ballots == other.ballots)

    @classmethod
    def from_grades(cls, scale: OutcomeScale, grades: Mapping[str, Sequence], weights=None,
                    exact: bool = True) -> "Election":
        """Classic MJ ballots: ``grades[candidate]`` lists one grade label per voter."""
        cands = tuple(grades)
        n = len(grades[cands[0]])
        if any(len(g) != n for g in grades.values()):
            raise ProfileError("every candidate needs one grade per voter")
        one = Fraction(1) if exact else 1.0
        weights = weights or [one] * n
        ids = [str(i + 1) for i in range(n)]
        ballots = {vid: {c: Pmf.dirac(len(scale), scale.index(grades[c][i]), scale, exact)
                         for c in cands} for i, vid in enumerate(ids)}
        return cls(scale, cands, tuple(zip(ids, weights)), ballots)

    @property
    def weights(self) -> tuple:
        return tuple(w for _, w in self.voters)

    @property
    def voter_ids(self) -> tuple:
        return tuple(v for v, _ in self.voters)

    def profile(self, candidate: str) -> Profile:
        return Profile(tuple(self.ballots[v][candidate].to_cdf() for v in self.voter_ids),
                       self.weights)

    def without(self, candidate: str) -> "Election":
        cands = tuple(c for c in self.candidates if c != candidate)
        ballots = {v: {c: row[c] for c in cands} for v, row in self.ballots.items()}
        return Election(self.scale, cands, self.voters, ballots)

    def relabel(self, mapping: Mapping[str, str]) -> "Election":
        cands = tuple(mapping[c] for c in self.candidates)
        ballots = {v: {mapping[c]: p for c, p in row.items()} for v, row in self.ballots.items()}
        return Election(self.scale, cands, self.voters, ballots)

    def with_ballot(self, voter: str, candidate: str, pmf) -> "Election":
        ballots = {v: dict(row) for v, row in self.ballots.items()}
        ballots[voter][candidate] = pmf
        return Election(self.scale, self.candidates, self.voters, ballots)


@dataclass(frozen=True)
class Ranking:
    """Candidates best first, tie classes, aggregates and adjacent-pair traces."""

    order: tuple
    classes: tuple
    aggregates: dict
    majority_grades: dict
    traces: tuple = field(default=())

    def position(self, candidate: str) -> int:
        """0-based index of the candidate's tie class."""
        return next(k for k, cls in enumerate(self.classes) if candidate in cls)

    def to_dict(self) -> dict:
        from .io import number_to_json as nj

        return {
            "order": list(self.order),
            "classes": [list(c) for c in self.classes],
            "candidates": {
                c: {"pmf": [nj(v) for v in self.aggregates[c].mass],
                    "cdf": [nj(v) for v in self.aggregates[c].to_cdf().cum],
                    "majority_grade": self.majority_grades[c]}
                for c in self.order},
            "pairwise": [{"above": x, "below": y, **t.to_dict()} for x, y, t in self.traces],
        }


def mju_tally(election: Election, method=None) -> Ranking:
    """Aggregate each candidate (weighted-proportional by default) and rank them."""
    if method is None:
        method = Method.weighted()
    elif isinstance(method, str):
        method = Method.parse(method)
    aggregates = {c: aggregate(method, election.profile(c)).to_pmf() for c in election.candidates}
    half = Fraction(1, 2)
    grades = {c: election.scale.labels[quantile(aggregates[c].to_cdf(), half)]
              for c in election.candidates}

    cache = {}

    def cmp(x, y):
        if (x, y) not in cache:
            cache[(x, y)] = compare_trace(aggregates[x], aggregates[y])
        return cache[(x, y)].result

    order = sorted(election.candidates, key=functools.cmp_to_key(lambda x, y: -cmp(x, y)))
    classes = []
    for c in order:
        if classes and cmp(classes[-1][0], c) == 0:
            classes[-1].append(c)
        else:
            classes.append([c])
    # the sorted order must agree with every pairwise comparison
    for i, x in enumerate(order):
        for y in order[i + 1:]:
            same = any(x in k and y in k for k in classes)
            expected = 0 if same else 1
            if cmp(x, y) != expected or cmp(y, x) != -expected:
                raise TransitivityViolation(f"comparator inconsistent on {x!r}, {y!r}")
    traces = tuple((x, y, cache[(x, y)]) for x, y in zip(order, order[1:]))
    return Ranking(tuple(order), tuple(tuple(k) for k in classes), aggregates, grades, traces)


# -- partial strategyproofness in ranking ------------------------------------

def _majority_index(method: Method, cdfs, weights) -> int:
    from .aggregators import evaluate_levels

    agg = evaluate_levels(method, cdfs, weights)
    half = Fraction(1, 2)
    return next(j for j, v in enumerate(agg) if v >= half)


def partial_sp_ranking_check(election: Election, voter: str, high: str, low: str,
                             space=None, method=None):
    """Can ``voter`` both raise ``low``'s majority grade and lower ``high``'s?

    Preconditions: society gives ``high`` a strictly better majority grade
    than ``low``, while the voter's ballot for ``low`` first-order dominates
    their ballot for ``high``.  Deviations range over the grid CDFs of
    ``space`` (an :class:`~levelagg.axioms.InstanceSpace`; only its grid is
    used).  Since the two candidates are aggregated separately, a two-sided
    manipulation exists iff a raising deviation for ``low`` and a lowering
    deviation for ``high`` both exist.
    """
    from .axioms import HOLDS, VIOLATED, AuditReport, Witness, grid_cdfs

    if method is None:
        method = Method.weighted()
    elif isinstance(method, str):
        method = Method.parse(method)
    grid = 4 if space is None else space.grid
    ids = election.voter_ids
    if voter not in ids:
        raise PreconditionUnmet(f"unknown voter {voter!r}")
    i = ids.index(voter)
    w = election.weights
    cdfs = {c: [tuple(election.ballots[v][c].to_cdf().cum) for v in ids] for c in (high, low)}
    mg = {c: _majority_index(method, cdfs[c], w) for c in (high, low)}
    if not mg[high] > mg[low]:
        raise PreconditionUnmet(
            f"society majority grade of {high!r} ({mg[high]}) does not exceed {low!r}'s ({mg[low]})")
    own_high, own_low = (Cdf(cdfs[c][i]) for c in (high, low))
    if not dominates(own_high, own_low):
        raise PreconditionUnmet(f"voter's ballot for {low!r} does not dominate the one for {high!r}")

    raise_low = lower_high = None
    for dev in grid_cdfs(len(election.scale), grid):
        for cand, better in ((low, True), (high, False)):
            rows = list(cdfs[cand])
            rows[i] = dev
            g = _majority_index(method, rows, w)
            if better and raise_low is None and g > mg[low]:
                raise_low = (dev, g)
            if not better and lower_high is None and g < mg[high]:
                lower_high = (dev, g)
    checked = 2 * len(grid_cdfs(len(election.scale), grid))
    details = {"voter": voter, "high": high, "low": low,
               "can_raise_low": raise_low is not None, "can_lower_high": lower_high is not None}
    witness = None
    if raise_low and lower_high:
        witness = Witness(profile=(tuple(own_high), tuple(own_low)), weights=tuple(w), voter=i,
                          before=(mg[high], mg[low]), after=(lower_high[1], raise_low[1]),
                          alt_profile=(lower_high[0], raise_low[0]),
                          note="two-sided: lowers high and raises low")
    return AuditReport("partial-sp-ranking", method, VIOLATED if witness else HOLDS, witness,
                       checked, None, details)


# -- referendum -------------------------------------------------------------

@dataclass(frozen=True)
class ReferendumResult:
    p: object
    decision: str
    alpha: object
    multiset: tuple

    @property
    def reform(self) -> bool:
        return self.decision == "reform"

    def to_dict(self) -> dict:
        from .io import number_to_json as nj

        return {"p": nj(self.p), "alpha": nj(self.alpha), "decision": self.decision,
                "multiset": [nj(v) for v in self.multiset]}


def referendum(priors: Sequence, alpha, exact: bool = True) -> ReferendumResult:
    """Median of the priors and 0, 1/n, ..., 1; reform iff it exceeds alpha."""
    alpha = to_number(alpha, exact)
    if not 0 < alpha < 1:
        raise ConfigError(f"threshold alpha = {alpha} outside (0, 1)")
    ps = [to_number(p, exact) for p in priors]
    n = len(ps)
    if n < 1:
        raise DomainError("a referendum needs at least one voter")
    for k, p in enumerate(ps):
        if not 0 <= p <= 1:
            raise InvalidDistribution(f"prior[{k}] = {p} outside [0, 1]")
    grid = [Fraction(k, n) if exact else k / n for k in range(n + 1)]
    pool = tuple(sorted(ps + grid))
    p = pool[n]
    return ReferendumResult(p, "reform" if p > alpha else "status quo", alpha, pool)
