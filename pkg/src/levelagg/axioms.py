"""Exhaustive and randomized axiom audits on a discretized instance space.

The instance space restricts every voter CDF (and every deviation) to the
grid {0, 1/g, ..., 1}: nondecreasing vectors of length m ending at 1.
Audits either hold on the whole space or return a replayable witness.

Arithmetic is exact by default: aggregate values are Fractions, and the
vectorized comparisons run on integers obtained by scaling every value in
a context by the common denominator.  In float mode strict comparisons use
the threshold :data:`STRICT_EPS`.

Exhaustive witnesses are the lexicographically smallest over
(profile, voter, deviation, grade), with profiles ordered by the index of
their CDFs in the grid enumeration; random-mode witnesses come from the
first violating sample.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .aggregators import Method, evaluate_levels
from .errors import BudgetExceeded, ConfigError, InvalidPhantoms, InvalidCurve, ProfileError
from .phantoms import (
    GradingCurve,
    coalition_weights,
    dictator_phantoms,
    is_certainty_preserving,
    is_plausibility_preserving,
)
from .scale import to_number

STRICT_EPS = 1e-9
DEFAULT_BUDGET = 10 ** 7

HOLDS = "holds-on-space"
VIOLATED = "violated"

AXIOMS = ("level-sp", "lr-cdf-sp", "l1-prob-sp", "certainty", "plausibility",
          "proportionality", "w-axioms")


def grid_cdfs(m: int, grid: int, exact: bool = True) -> list:
    """All nondecreasing CDFs on m grades with values in {0, 1/g, ..., 1}, last = 1.

    Enumerated in lexicographic order of their numerators.
    """
    if m < 1 or grid < 1:
        raise ConfigError(f"need m >= 1 and grid >= 1, got m={m}, grid={grid}")
    conv = (lambda k: Fraction(k, grid)) if exact else (lambda k: k / grid)
    return [tuple(conv(k) for k in ks) + (conv(grid),)
            for ks in itertools.combinations_with_replacement(range(grid + 1), m - 1)]


@dataclass(frozen=True)
class InstanceSpace:
    n: int = 3
    m: int = 3
    grid: int = 4
    mode: str = "exhaustive"
    samples: int = 1000
    seed: int = 0
    budget: int = DEFAULT_BUDGET
    exact: bool = True

    def __post_init__(self):
        if self.mode not in ("exhaustive", "random"):
            raise ConfigError(f"unknown enumeration mode {self.mode!r}")
        if self.n < 1:
            raise ConfigError("instance space needs n >= 1")

    @property
    def cdf_count(self) -> int:
        return math.comb(self.grid + self.m - 1, self.m - 1)

    def pool(self) -> list:
        return grid_cdfs(self.m, self.grid, self.exact)

    def profile_count(self) -> int:
        return self.cdf_count ** self.n if self.mode == "exhaustive" else self.samples

    def check_budget(self, per_profile: int = 1):
        cost = self.profile_count() * per_profile
        if cost > self.budget:
            raise BudgetExceeded(
                f"{self.mode} space n={self.n} m={self.m} grid={self.grid} needs {cost} "
                f"evaluations, budget is {self.budget}")


@dataclass(frozen=True)
class Witness:
    """Everything needed to replay a violation.

    ``profile`` holds voter CDFs as tuples.  Depending on the axiom, the
    violation is given by a deviation of ``voter`` at ``grade``, by a grade
    ``interval`` (inclusive 0-based bounds), or by an alternative
    profile/weight pair (``alt_profile`` / ``alt_weights``).
    """

    profile: tuple
    weights: tuple
    voter: Optional[int] = None
    deviation: Optional[tuple] = None
    grade: Optional[int] = None
    interval: Optional[tuple] = None
    before: object = None
    after: object = None
    alt_profile: Optional[tuple] = None
    alt_weights: Optional[tuple] = None
    note: str = ""

    def to_dict(self) -> dict:
        from .io import number_to_json as nj

        def vec(v):
            return None if v is None else [nj(x) for x in v]

        def val(v):
            if v is None:
                return None
            if isinstance(v, (tuple, list)):
                return [nj(x) for x in v]
            return nj(v)

        d = {"profile": [vec(c) for c in self.profile], "weights": vec(self.weights)}
        if self.voter is not None:
            d["voter"] = self.voter + 1
        if self.deviation is not None:
            d["deviation"] = vec(self.deviation)
        if self.grade is not None:
            d["grade"] = self.grade
        if self.interval is not None:
            d["interval"] = list(self.interval)
        d["before"] = val(self.before)
        d["after"] = val(self.after)
        if self.alt_profile is not None:
            d["alt_profile"] = [vec(c) for c in self.alt_profile]
        if self.alt_weights is not None:
            d["alt_weights"] = vec(self.alt_weights)
        if self.note:
            d["note"] = self.note
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Witness":
        def vec(v):
            return None if v is None else tuple(to_number(x) for x in v)

        def val(v):
            if v is None:
                return None
            if isinstance(v, list):
                return tuple(to_number(x) for x in v)
            return to_number(v)

        return cls(
            profile=tuple(vec(c) for c in d["profile"]),
            weights=vec(d["weights"]),
            voter=None if d.get("voter") is None else d["voter"] - 1,
            deviation=vec(d.get("deviation")),
            grade=d.get("grade"),
            interval=None if d.get("interval") is None else tuple(d["interval"]),
            before=val(d.get("before")),
            after=val(d.get("after")),
            alt_profile=None if d.get("alt_profile") is None else tuple(vec(c) for c in d["alt_profile"]),
            alt_weights=vec(d.get("alt_weights")),
            note=d.get("note", ""),
        )


@dataclass(frozen=True)
class AuditReport:
    axiom: str
    method: Method
    verdict: str
    witness: Optional[Witness] = None
    instances_checked: int = 0
    expected: Optional[bool] = None
    details: dict = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return self.verdict == HOLDS

    @property
    def unexpected(self) -> bool:
        """Violated although the theory does not predict a failure."""
        return self.verdict == VIOLATED and self.expected is not False

    def to_dict(self) -> dict:
        return {
            "axiom": self.axiom,
            "method": self.method.to_dict(),
            "verdict": self.verdict,
            "expected_to_hold": self.expected,
            "instances_checked": self.instances_checked,
            "witness": None if self.witness is None else self.witness.to_dict(),
            "details": self.details,
        }


# -- utilities --------------------------------------------------------------

@dataclass(frozen=True)
class Utility:
    """How a voter scores an aggregate against their sincere CDF.

    ``level`` uses |aggregate(a) - own(a)| at ``grade`` (or at every grade
    separately when ``grade`` is None); ``lr`` the L_r distance between
    CDFs; ``l1-prob`` the L1 distance between probability vectors.
    Smaller is better.
    """

    kind: str
    grade: Optional[int] = None
    r: object = 1

    def __post_init__(self):
        if self.kind not in ("level", "lr", "l1-prob"):
            raise ConfigError(f"unknown utility {self.kind!r}")
        if self.kind == "lr" and not self.r > 0:
            raise ConfigError(f"L_r exponent must be positive, got {self.r}")

    @classmethod
    def parse(cls, text: str) -> "Utility":
        name, _, arg = text.strip().partition(":")
        if name == "level":
            return cls("level", grade=int(arg) - 1 if arg else None)
        if name in ("lr", "lr-cdf"):
            return cls("lr", r=to_number(arg) if arg else 1)
        if name in ("l1-prob", "l1prob"):
            return cls("l1-prob")
        raise ConfigError(f"unknown utility descriptor {text!r}")

    def label(self) -> str:
        if self.kind == "level":
            return "level" if self.grade is None else f"level:{self.grade + 1}"
        if self.kind == "lr":
            return f"lr:{self.r}"
        return "l1-prob"

    def loss(self, agg: Sequence, own: Sequence):
        """Exact loss of a single aggregate (a tuple per grade for ``level`` with no grade)."""
        if self.kind == "level":
            if self.grade is None:
                return tuple(abs(a - b) for a, b in zip(agg, own))
            return abs(agg[self.grade] - own[self.grade])
        if self.kind == "lr":
            diffs = [abs(a - b) for a, b in zip(agg, own)]
            if _is_int(self.r):
                return sum(d ** int(self.r) for d in diffs)
            return sum(float(d) ** float(self.r) for d in diffs)
        pa, po = _pmf(agg), _pmf(own)
        return sum(abs(a - b) for a, b in zip(pa, po))

    def improves(self, before, after) -> bool:
        if self.kind == "level" and self.grade is None:
            return any(_lt(b, a) for a, b in zip(before, after))
        return _lt(after, before)


def _is_int(r) -> bool:
    return float(r).is_integer()


def _lt(a, b) -> bool:
    if isinstance(a, float) or isinstance(b, float):
        return a < b - STRICT_EPS
    return a < b


def _pmf(cum: Sequence) -> tuple:
    prev, out = 0, []
    for c in cum:
        out.append(c - prev)
        prev = c
    return tuple(out)


# -- engine -----------------------------------------------------------------

def _lcm_denominator(rows) -> int:
    L = 1
    for row in rows:
        for v in row:
            L = math.lcm(L, v.denominator)
    return L


def _arrays(rows, truths, exact):
    """Scale two lists of value tuples to a common comparable array form."""
    if not exact:
        return np.array(rows, dtype=float), np.array(truths, dtype=float), STRICT_EPS
    rows = [tuple(Fraction(v) for v in r) for r in rows]
    truths = [tuple(Fraction(v) for v in t) for t in truths]
    L = math.lcm(_lcm_denominator(rows), _lcm_denominator(truths))
    dtype = np.int64 if L <= 2 ** 28 else object
    R = np.array([[int(v * L) for v in r] for r in rows], dtype=dtype)
    T = np.array([[int(v * L) for v in t] for t in truths], dtype=dtype)
    return R, T, 0


class _Engine:
    def __init__(self, method: Method, space: InstanceSpace, weights=None):
        self.method = method
        self.space = space
        self.pool = space.pool()
        self.K = len(self.pool)
        self.n = space.n
        one = Fraction(1) if space.exact else 1.0
        self.weights = tuple(weights) if weights is not None else (one,) * self.n
        self._cache = {}
        # per profile: 1 honest evaluation + n*K deviations, all cached lookups
        space.check_budget(1 if space.mode == "exhaustive" else 1 + self.n * self.K)

    def agg(self, idx: tuple) -> tuple:
        out = self._cache.get(idx)
        if out is None:
            out = evaluate_levels(self.method, [self.pool[c] for c in idx], self.weights)
            self._cache[idx] = out
        return out

    def profile(self, idx) -> tuple:
        return tuple(self.pool[c] for c in idx)

    def flat(self, idx) -> int:
        f = 0
        for c in idx:
            f = f * self.K + c
        return f

    def contexts(self):
        """(voter, others, truths) triples; truths are the voter's sincere CDF indices."""
        K, n = self.K, self.n
        if self.space.mode == "exhaustive":
            for i in range(n):
                for others in itertools.product(range(K), repeat=n - 1):
                    yield i, others, range(K)
        else:
            rng = np.random.default_rng(self.space.seed)
            for _ in range(self.space.samples):
                idx = tuple(int(c) for c in rng.integers(0, K, size=n))
                for i in range(n):
                    yield i, idx[:i] + idx[i + 1:], (idx[i],)

    def profiles(self):
        K, n = self.K, self.n
        if self.space.mode == "exhaustive":
            yield from itertools.product(range(K), repeat=n)
        else:
            rng = np.random.default_rng(self.space.seed)
            for _ in range(self.space.samples):
                yield tuple(int(c) for c in rng.integers(0, K, size=n))

    @staticmethod
    def insert(others, i, c) -> tuple:
        return others[:i] + (c,) + others[i:]

    def rows(self, i, others) -> list:
        return [self.agg(self.insert(others, i, rep)) for rep in range(self.K)]

    def search(self, violating_truths, detail):
        """Run ``violating_truths(R, T, eps, truths)`` on every context.

        ``violating_truths`` returns a boolean per truth.  The smallest
        violating (profile, voter) is refined by ``detail(idx, i)``.
        """
        best = None
        checked = 0
        exhaustive = self.space.mode == "exhaustive"
        for i, others, truths in self.contexts():
            truths = list(truths)
            checked += len(truths) * self.K
            R, T, eps = _arrays(self.rows(i, others), [self.pool[c] for c in truths],
                                self.space.exact)
            hits = violating_truths(R, T, eps, truths)
            for c, hit in zip(truths, hits):
                if hit:
                    idx = self.insert(others, i, c)
                    key = (self.flat(idx), i)
                    if best is None or key < best[0]:
                        best = (key, idx, i)
            if best is not None and not exhaustive:
                break
        if best is None:
            return None, checked
        _, idx, i = best
        return detail(idx, i), checked


def _level_sp_hits(R, T, eps, truths):
    lowest = R.min(axis=0)
    highest = R.max(axis=0)
    H = R[truths]
    down = (T < H - eps) & (lowest < H - eps)
    up = (T > H + eps) & (highest > H + eps)
    return (down | up).any(axis=1)


def _loss_array(utility: Utility, X, t):
    if utility.kind == "l1-prob":
        X = np.diff(X, axis=-1, prepend=0)
        t = np.diff(t, axis=-1, prepend=0)
        return np.abs(X - t).sum(axis=-1)
    D = np.abs(X - t)
    if utility.kind == "level":
        return D if utility.grade is None else D[..., utility.grade]
    if _is_int(utility.r):
        return (D ** int(utility.r)).sum(axis=-1)
    return (D.astype(float) ** float(utility.r)).sum(axis=-1)


def _utility_hits(utility: Utility):
    def hits(R, T, eps, truths):
        out = []
        for c, t in zip(truths, T):
            loss = _loss_array(utility, R, t)
            honest = loss[c]
            tol = eps
            if utility.kind == "lr" and not _is_int(utility.r):
                tol = STRICT_EPS
            out.append(bool((loss < honest - tol).any()))
        return out
    return hits


def _method_of(method) -> Method:
    if isinstance(method, Method):
        return method
    if isinstance(method, dict):
        return Method.from_dict(method)
    return Method.parse(method)


def expected_verdict(method, axiom: str, n: int, m: int, weights=None) -> Optional[bool]:
    """Predicted verdict of ``axiom`` for ``method`` from its phantom structure (None = no prediction)."""
    method = _method_of(method)
    try:
        system = method.phantom_system(n, m, weights)
    except (InvalidPhantoms, InvalidCurve, ProfileError):
        return None
    if system is None:
        return None
    if axiom in ("level-sp", "lr-cdf-sp"):
        return True
    if axiom == "certainty":
        return is_certainty_preserving(system)
    if axiom == "plausibility":
        return is_plausibility_preserving(system)
    if axiom == "proportionality":
        w = method.effective_weights(weights if weights is not None else (Fraction(1),) * n)
        sums = coalition_weights(w)
        general = system.to_general()
        top = general.values[general.full][-1]
        return top == 1 and all(general.values[mask][j] == sums[mask]
                                for mask in range(1 << n) for j in range(m - 1))
    if axiom == "l1-prob-sp":
        if m <= 3:
            return True
        if not is_certainty_preserving(system):
            return None
        general = system.to_general()
        return any(general.values == dictator_phantoms(i, n, m).values for i in range(n))
    if axiom == "w-axioms":
        if method.name in ("grading_curve", "weighted_proportional"):
            return True
        # rules with a fixed phantom system ignore the voter weights
        return False
    return None


def _report(axiom, method, witness, checked, space_dict, expected=None, **details):
    return AuditReport(axiom, method, HOLDS if witness is None else VIOLATED, witness, checked,
                       expected, {"space": space_dict, **details})


def _space_dict(space: InstanceSpace) -> dict:
    return {"n": space.n, "m": space.m, "grid": space.grid, "mode": space.mode,
            "samples": space.samples if space.mode == "random" else None,
            "seed": space.seed if space.mode == "random" else None,
            "exact": space.exact}


def audit_level_sp(method, space: InstanceSpace, weights=None) -> AuditReport:
    """Uncompromisingness at every grade, for every voter and every grid deviation."""
    method = _method_of(method)
    eng = _Engine(method, space, weights)

    def detail(idx, i):
        honest = eng.agg(idx)
        own = eng.pool[idx[i]]
        for dev in range(eng.K):
            after = eng.agg(eng.insert(idx[:i] + idx[i + 1:], i, dev))
            for j in range(space.m):
                if (_lt(own[j], honest[j]) and _lt(after[j], honest[j])) or \
                        (_lt(honest[j], own[j]) and _lt(honest[j], after[j])):
                    return Witness(eng.profile(idx), eng.weights, voter=i, deviation=eng.pool[dev],
                                   grade=j, before=honest[j], after=after[j])
        raise AssertionError("vectorized and scalar level-SP checks disagree")

    witness, checked = eng.search(_level_sp_hits, detail)
    return _report("level-sp", method, witness, checked, _space_dict(space),
                   expected_verdict(method, "level-sp", space.n, space.m, weights))


def find_manipulation(method, utility, space: InstanceSpace, weights=None) -> Optional[Witness]:
    """First strict improvement of a voter's utility by a grid deviation, or None."""
    witness, _ = _manipulation(_method_of(method), utility, space, weights)
    return witness


def _manipulation(method, utility, space, weights):
    if isinstance(utility, str):
        utility = Utility.parse(utility)
    eng = _Engine(method, space, weights)

    def detail(idx, i):
        honest = eng.agg(idx)
        own = eng.pool[idx[i]]
        before = utility.loss(honest, own)
        for dev in range(eng.K):
            after_agg = eng.agg(eng.insert(idx[:i] + idx[i + 1:], i, dev))
            after = utility.loss(after_agg, own)
            if utility.improves(before, after):
                grade = utility.grade
                if utility.kind == "level" and grade is None:
                    grade = next(j for j in range(space.m) if _lt(after[j], before[j]))
                    before, after = before[grade], after[grade]
                return Witness(eng.profile(idx), eng.weights, voter=i, deviation=eng.pool[dev],
                               grade=grade, before=before, after=after, note=utility.label())
        raise AssertionError("vectorized and scalar manipulation checks disagree")

    return eng.search(_utility_hits(utility), detail)


def audit_lr_cdf_sp(method, r, space: InstanceSpace, weights=None) -> AuditReport:
    method = _method_of(method)
    witness, checked = _manipulation(method, Utility("lr", r=r), space, weights)
    return _report("lr-cdf-sp", method, witness, checked, _space_dict(space),
                   expected_verdict(method, "lr-cdf-sp", space.n, space.m, weights), r=str(r))


def audit_l1_prob_sp(method, space: InstanceSpace, weights=None) -> AuditReport:
    method = _method_of(method)
    witness, checked = _manipulation(method, Utility("l1-prob"), space, weights)
    return _report("l1-prob-sp", method, witness, checked, _space_dict(space),
                   expected_verdict(method, "l1-prob-sp", space.n, space.m, weights))


def _interval_audit(axiom, method, space, weights, premise, conclusion):
    method = _method_of(method)
    eng = _Engine(method, space, weights)
    m = space.m
    pairs = [(lo, hi) for hi in range(1, m + 1) for lo in range(hi)]
    checked = 0
    for idx in eng.profiles():
        checked += 1
        agg = (0,) + eng.agg(idx)
        cdfs = [(0,) + eng.pool[c] for c in idx]
        for lo, hi in pairs:
            if all(premise(P[lo], P[hi]) for P in cdfs) and not conclusion(agg[lo], agg[hi]):
                w = Witness(eng.profile(idx), eng.weights, interval=(lo, hi - 1),
                            before=agg[lo], after=agg[hi],
                            note=f"mass on grades {lo}..{hi - 1}")
                return _report(axiom, method, w, checked, _space_dict(space),
                               expected_verdict(method, axiom, space.n, m, weights))
    return _report(axiom, method, None, checked, _space_dict(space),
                   expected_verdict(method, axiom, space.n, m, weights))


def _eq(a, b):
    if isinstance(a, float) or isinstance(b, float):
        return abs(a - b) <= STRICT_EPS
    return a == b


def audit_certainty(method, space: InstanceSpace, weights=None) -> AuditReport:
    """Every voter puts zero mass on a grade interval => so does the aggregate."""
    return _interval_audit("certainty", method, space, weights, _eq, _eq)


def audit_plausibility(method, space: InstanceSpace, weights=None) -> AuditReport:
    """Every voter puts positive mass on a grade interval => so does the aggregate."""
    return _interval_audit("plausibility", method, space, weights,
                           lambda lo, hi: _lt(lo, hi), lambda lo, hi: _lt(lo, hi))


def audit_proportionality(method, n: int, m: int, weights=None, exact: bool = True,
                          budget: int = DEFAULT_BUDGET) -> AuditReport:
    """psi(dirac_{a_1}, ..., dirac_{a_n}) == sum_i w_i dirac_{a_i} on all m**n Dirac profiles."""
    method = _method_of(method)
    if m ** n > budget:
        raise BudgetExceeded(f"{m ** n} Dirac profiles exceed budget {budget}")
    one, zero = (Fraction(1), Fraction(0)) if exact else (1.0, 0.0)
    if weights is None:
        weights = (one,) * n
    weights = tuple(to_number(w, exact) for w in weights)
    w = method.effective_weights(weights)
    total = sum(w)
    diracs = [tuple(zero if j < a else one for j in range(m)) for a in range(m)]
    checked = 0
    for grades in itertools.product(range(m), repeat=n):
        checked += 1
        cdfs = [diracs[a] for a in grades]
        got = evaluate_levels(method, cdfs, weights)
        want = tuple(sum((wi for wi, a in zip(w, grades) if a <= j), zero) / total
                     for j in range(m))
        if not all(_eq(x, y) for x, y in zip(got, want)):
            wit = Witness(tuple(cdfs), weights, before=want, after=got,
                          note="dirac grades " + ",".join(str(a) for a in grades))
            return AuditReport("proportionality", method, VIOLATED, wit, checked,
                               expected_verdict(method, "proportionality", n, m, weights),
                               {"n": n, "m": m})
    return AuditReport("proportionality", method, HOLDS, None, checked,
                       expected_verdict(method, "proportionality", n, m, weights),
                       {"n": n, "m": m})


W_AXIOMS = ("additivity", "proportionality", "anonymity", "monotonicity")


def _random_weights(rng, n):
    while True:
        ws = tuple(Fraction(int(rng.integers(0, 7)), int(rng.integers(1, 5))) for _ in range(n))
        if sum(ws) > 0:
            return ws


def audit_w_axioms(curve: GradingCurve, scenarios: int = 1000, n: int = 3, m: int = 3,
                   grid: int = 4, seed: int = 0, method=None) -> AuditReport:
    """Check W-additivity, W-proportionality, W-anonymity and W-monotonicity of the
    weighted rule induced by ``curve`` on random scenarios (exact arithmetic).

    ``method`` replaces the curve's rule, e.g. to run a negative control.
    """
    if n < 2:
        raise ConfigError("the W-axiom scenarios need at least two voters")
    method = Method.grading(curve) if method is None else _method_of(method)
    if method.weights is not None:
        raise ConfigError("the W-axiom scenarios vary the weights; use a method without fixed weights")
    pool = grid_cdfs(m, grid)
    rng = np.random.default_rng(seed)
    counts = dict.fromkeys(W_AXIOMS, 0)
    failures = {}

    def run(cdfs, w):
        return evaluate_levels(method, cdfs, w)

    def fail(sub, cdfs, w, alt_cdfs, alt_w, before, after, **kw):
        if sub not in failures:
            failures[sub] = Witness(tuple(cdfs), tuple(w), before=before, after=after,
                                    alt_profile=tuple(alt_cdfs), alt_weights=tuple(alt_w),
                                    note=sub, **kw)

    for _ in range(scenarios):
        cdfs = [pool[int(c)] for c in rng.integers(0, len(pool), size=n)]
        w = _random_weights(rng, n)
        i, j = (int(x) for x in rng.choice(n, size=2, replace=False))

        # additivity: voters i and j share an input; merge them into one voter,
        # or redistribute their joint weight between them
        shared = list(cdfs)
        shared[j] = shared[i]
        joint = w[i] + w[j]
        merged = [c for k, c in enumerate(shared) if k != j]
        wmerged = [joint if k == i else x for k, x in enumerate(w) if k != j]
        counts["additivity"] += 1
        before, after = run(shared, w), run(merged, wmerged)
        if before != after:
            fail("additivity", shared, w, merged, wmerged, before, after)
        share = joint * Fraction(int(rng.integers(0, 5)), 4)
        w2 = list(w)
        w2[i], w2[j] = share, joint - share
        if sum(w2) > 0:
            counts["additivity"] += 1
            before, after = run(shared, w), run(shared, w2)
            if before != after:
                fail("additivity", shared, w, shared, w2, before, after)

        # proportionality: rescale every weight
        k = Fraction(int(rng.integers(1, 10)), int(rng.integers(1, 10)))
        wk = tuple(k * x for x in w)
        counts["proportionality"] += 1
        before, after = run(cdfs, w), run(cdfs, wk)
        if before != after:
            fail("proportionality", cdfs, w, cdfs, wk, before, after)

        # anonymity: equal-weight voters swap inputs
        we = list(w)
        we[j] = we[i]
        if sum(we) > 0:
            swapped = list(cdfs)
            swapped[i], swapped[j] = cdfs[j], cdfs[i]
            counts["anonymity"] += 1
            before, after = run(cdfs, we), run(swapped, we)
            if before != after:
                fail("anonymity", cdfs, we, swapped, we, before, after)

        # monotonicity: raising w_i never moves any level away from voter i
        wm = list(w)
        wm[i] = w[i] + Fraction(int(rng.integers(1, 7)), int(rng.integers(1, 5)))
        counts["monotonicity"] += 1
        before, after = run(cdfs, w), run(cdfs, wm)
        own = cdfs[i]
        for g in range(m):
            if abs(after[g] - own[g]) > abs(before[g] - own[g]):
                fail("monotonicity", cdfs, w, cdfs, wm, before, after, voter=i, grade=g)
                break

    sub = {name: {"verdict": VIOLATED if name in failures else HOLDS, "checked": counts[name]}
           for name in W_AXIOMS}
    first = next((failures[name] for name in W_AXIOMS if name in failures), None)
    return AuditReport("w-axioms", method, HOLDS if first is None else VIOLATED, first,
                       sum(counts.values()), expected_verdict(method, "w-axioms", n, m),
                       {"checks": sub, "scenarios": scenarios, "n": n, "m": m, "grid": grid,
                        "seed": seed})


def run_audit(method, axiom: str, space: InstanceSpace, weights=None, r=1,
              scenarios: int = 1000) -> AuditReport:
    """Dispatch one named axiom audit."""
    method = _method_of(method)
    if axiom == "level-sp":
        return audit_level_sp(method, space, weights)
    if axiom == "lr-cdf-sp":
        return audit_lr_cdf_sp(method, r, space, weights)
    if axiom == "l1-prob-sp":
        return audit_l1_prob_sp(method, space, weights)
    if axiom == "certainty":
        return audit_certainty(method, space, weights)
    if axiom == "plausibility":
        return audit_plausibility(method, space, weights)
    if axiom == "proportionality":
        return audit_proportionality(method, space.n, space.m, weights, space.exact, space.budget)
    if axiom == "w-axioms":
        curve = method.curve if method.name == "grading_curve" else GradingCurve.identity()
        return audit_w_axioms(curve, scenarios, space.n, space.m, space.grid, space.seed, method)
    raise ConfigError(f"unknown axiom {axiom!r}; choose from {', '.join(AXIOMS)}")


def replay(report: AuditReport) -> bool:
    """Recompute a violated report's witness; True iff the violation reproduces."""
    w = report.witness
    if report.verdict != VIOLATED or w is None:
        return False
    method = report.method

    def run(cdfs, weights):
        return evaluate_levels(method, [tuple(c) for c in cdfs], weights)

    axiom = report.axiom
    if axiom in ("level-sp", "lr-cdf-sp", "l1-prob-sp", "manipulation"):
        honest = run(w.profile, w.weights)
        deviated = list(w.profile)
        deviated[w.voter] = w.deviation
        after = run(deviated, w.weights)
        own = w.profile[w.voter]
        if axiom == "level-sp":
            j = w.grade
            ok = (_lt(own[j], honest[j]) and _lt(after[j], honest[j])) or \
                 (_lt(honest[j], own[j]) and _lt(honest[j], after[j]))
            return ok and honest[j] == w.before and after[j] == w.after
        if axiom == "l1-prob-sp":
            utility = Utility("l1-prob")
        elif axiom == "lr-cdf-sp":
            utility = Utility("lr", r=to_number(report.details.get("r", 1)))
        else:
            utility = Utility.parse(w.note)
            if utility.kind == "level":
                utility = replace(utility, grade=w.grade)
        before, after_loss = utility.loss(honest, own), utility.loss(after, own)
        return utility.improves(before, after_loss) and before == w.before and after_loss == w.after
    if axiom in ("certainty", "plausibility"):
        agg = (0,) + run(w.profile, w.weights)
        lo, hi = w.interval[0], w.interval[1] + 1
        cdfs = [(0,) + tuple(c) for c in w.profile]
        if axiom == "certainty":
            return all(_eq(P[lo], P[hi]) for P in cdfs) and not _eq(agg[lo], agg[hi])
        return all(_lt(P[lo], P[hi]) for P in cdfs) and not _lt(agg[lo], agg[hi])
    if axiom == "proportionality":
        return run(w.profile, w.weights) == w.after and w.after != w.before
    if axiom == "w-axioms":
        before, after = run(w.profile, w.weights), run(w.alt_profile, w.alt_weights)
        if w.note == "monotonicity":
            own = w.profile[w.voter]
            return abs(after[w.grade] - own[w.grade]) > abs(before[w.grade] - own[w.grade])
        return before != after
    raise ConfigError(f"cannot replay axiom {axiom!r}")


def manipulation_report(method, utility, space: InstanceSpace, weights=None) -> AuditReport:
    """find_manipulation wrapped as a report (axiom name ``manipulation``)."""
    method = _method_of(method)
    if isinstance(utility, str):
        utility = Utility.parse(utility)
    witness, checked = _manipulation(method, utility, space, weights)
    return _report("manipulation", method, witness, checked, _space_dict(space), None,
                   utility=utility.label())
