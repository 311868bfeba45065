"""Level-strategyproof aggregation rules, evaluated grade by grade.

Every rule here maps the n voter levels P_1(a), ..., P_n(a) at a grade a
to the aggregate level at a.  The per-grade kernels take plain number
sequences; the profile-level functions wrap them and return validated
:class:`~levelagg.scale.Cdf` values.

``mean`` (the weighted average of the CDFs) is included on purpose: it is
the standard example of a rule that is *not* Level-SP and serves as the
negative control of the audits.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .errors import ConfigError, InvalidWeights, NotDominated, ProfileError
from .phantoms import (
    ANONYMOUS,
    GradingCurve,
    PhantomSystem,
    _normalized,
    dictator_phantoms,
    order_phantoms,
    phantoms_from_grading_curve,
    phantoms_from_weights,
    proportional_phantoms,
)
from .scale import Cdf, Pmf, Profile, TAU_MASS, is_dominated_profile, is_exact, to_number


def _zero_like(values):
    return Fraction(0) if is_exact(values) else 0.0


def maxmin_level(system: PhantomSystem, levels: Sequence, grade: int):
    """max over coalitions S of min(f_S(grade), min_{i in S} levels[i])."""
    n = system.n
    if len(levels) != n:
        raise ProfileError(f"{len(levels)} levels for a {n}-voter phantom system")
    best = system.coalition_phantom(0)[grade]
    mins = [None] * (1 << n)
    for mask in range(1, 1 << n):
        low = mask & -mask
        i = low.bit_length() - 1
        rest = mask ^ low
        mins[mask] = levels[i] if rest == 0 else min(mins[rest], levels[i])
        v = min(system.coalition_phantom(mask)[grade], mins[mask])
        if v > best:
            best = v
    return best


def median_level(system: PhantomSystem, levels: Sequence, grade: int):
    """Median of the n levels together with the n + 1 anonymous phantoms."""
    if system.kind != ANONYMOUS:
        raise ProfileError("the median formula needs an anonymous phantom system")
    if len(levels) != system.n:
        raise ProfileError(f"{len(levels)} levels for a {system.n}-voter phantom system")
    pool = sorted(list(levels) + [f[grade] for f in system.values])
    return pool[system.n]


def _order_level(k: int, levels: Sequence):
    return sorted(levels)[k - 1]


def order_cumulative(k: int, prof: Profile) -> Cdf:
    """Pointwise k-th smallest input CDF (k = 1 is the min, k = n the max)."""
    from .errors import DomainError

    if not 1 <= k <= prof.n:
        raise DomainError(f"order index {k} outside 1..{prof.n}")
    return Cdf(tuple(_order_level(k, prof.levels(j)) for j in range(prof.m)), prof.scale)


def mu_w(w: Sequence, levels: Sequence):
    """sup{ y : total weight of voters with level >= y is >= y }.

    Closed form: with levels sorted decreasingly and W_k the cumulative
    normalized weight of the first k of them, the supremum is
    max(0, max_k min(W_k, r_(k))), and it is attained.
    """
    if len(w) != len(levels):
        raise InvalidWeights(f"{len(w)} weights for {len(levels)} levels")
    ws = _normalized(w, exact=is_exact(w))
    best = _zero_like(list(levels) + list(ws))
    acc = best
    for r, wi in sorted(zip(levels, ws), key=lambda t: t[0], reverse=True):
        acc = acc + wi
        v = min(acc, r)
        if v > best:
            best = v
    return best


def rational_weights_median(numerators: Sequence[int], d: int, levels: Sequence):
    """mu_w for weights s_i / d via duplication: each level repeated s_i times,
    plus the grid 0, 1/d, ..., 1; the median of that multiset."""
    if d <= 0:
        raise InvalidWeights(f"denominator must be positive, got {d}")
    if len(numerators) != len(levels):
        raise InvalidWeights(f"{len(numerators)} numerators for {len(levels)} levels")
    if any(s < 0 for s in numerators) or sum(numerators) != d:
        raise InvalidWeights(f"numerators {tuple(numerators)} must be nonnegative and sum to {d}")
    pool = [r for r, s in zip(levels, numerators) for _ in range(s)]
    pool += [Fraction(k, d) for k in range(d + 1)]
    pool.sort()
    return pool[len(pool) // 2]


def weighted_proportional(prof: Profile) -> Cdf:
    """Per-grade mu_w with the profile weights."""
    return Cdf(tuple(mu_w(prof.weights, prof.levels(j)) for j in range(prof.m)), prof.scale)


def proportional_cumulative(prof: Profile) -> Cdf:
    """Equal-weight rule: median of the levels and 0, 1/n, ..., 1."""
    n = prof.n
    phantoms = [Fraction(k, n) for k in range(n + 1)]
    return Cdf(tuple(sorted(list(prof.levels(j)) + phantoms)[n] for j in range(prof.m)),
               prof.scale)


def _curve_level(curve: GradingCurve, ws: Sequence, levels: Sequence, grade: int):
    # sup{y : gamma(grade, C(y)) >= y}; C is a step function of y that equals
    # the top-k weight on (r_(k+1), r_(k)], so take max_k min(r_(k), gamma(c_k)).
    best = curve(grade, _zero_like(list(ws)))
    acc = _zero_like(list(ws))
    for r, wi in sorted(zip(levels, ws), key=lambda t: t[0], reverse=True):
        acc = acc + wi
        v = min(r, curve(grade, acc))
        if v > best:
            best = v
    return best


def grading_curve_aggregate(curve: GradingCurve, prof: Profile) -> Cdf:
    curve.check_scale(prof.m)
    ws = _normalized(prof.weights, exact=prof.exact)
    return Cdf(tuple(_curve_level(curve, ws, prof.levels(j), j) for j in range(prof.m)),
               prof.scale)


def mean_aggregate(prof: Profile) -> Cdf:
    """Weighted average of the CDFs (not Level-SP; negative control)."""
    ws = prof.normalized_weights()
    return Cdf(tuple(sum(w * l for w, l in zip(ws, prof.levels(j))) for j in range(prof.m)),
               prof.scale)


def dominated_fastpath(prof: Profile) -> Pmf:
    """Weighted-proportional density of a chain profile, read off voter by voter.

    With voters sorted so that P_1 >= P_2 >= ... pointwise and W_k the
    cumulative weights, the aggregate CDF is
    sum_i clamp(P_i(a) - W_{i-1}, 0, w_i): voter i contributes exactly the
    part of their own CDF lying in the band [W_{i-1}, W_i].  The density
    therefore equals p_i(a) at every grade where voter i stays inside their
    band, and 0 where everybody is outside.
    """
    order = is_dominated_profile(prof)
    if order is None:
        raise NotDominated("profile CDFs cross; no dominance chain")
    ws = prof.normalized_weights()
    zero = _zero_like(list(ws))
    bands, acc = [], zero
    for i in order:
        bands.append((i, acc, ws[i]))
        acc = acc + ws[i]
    mass, prev = [], zero
    for j in range(prof.m):
        cum = zero
        for i, lo, wi in bands:
            cum = cum + min(max(prof.cdfs[i].cum[j] - lo, zero), wi)
        d = cum - prev
        mass.append(d if d > 0 else zero)
        prev = cum
    if not is_exact(mass):
        mass = [max(v, 0.0) for v in mass]
        if abs(sum(mass) - 1) <= TAU_MASS:
            mass[-1] += 1 - sum(mass)
    return Pmf(tuple(mass), prof.scale)


# -- method descriptors -----------------------------------------------------

METHOD_NAMES = ("maxmin", "median", "order", "proportional", "weighted_proportional",
                "grading_curve", "mean", "dictator")

_ALIASES = {"weighted": "weighted_proportional", "curve": "grading_curve",
            "prop": "proportional", "gc": "grading_curve"}


@dataclass(frozen=True)
class Method:
    """A serializable aggregation method.

    ``weights``, when set, overrides the profile weights (used by the
    weighted rules and ``mean``).  ``voter`` is 0-based; the string and
    JSON forms use 1-based voter numbers.
    """

    name: str
    k: Optional[int] = None
    voter: Optional[int] = None
    weights: Optional[tuple] = None
    curve: Optional[GradingCurve] = None
    system: Optional[PhantomSystem] = None

    def __post_init__(self):
        name = _ALIASES.get(self.name, self.name)
        if name not in METHOD_NAMES:
            raise ConfigError(f"unknown aggregation method {self.name!r}")
        object.__setattr__(self, "name", name)
        if name == "order" and (self.k is None or self.k < 1):
            raise ConfigError("order method needs k >= 1")
        if name == "dictator" and (self.voter is None or self.voter < 0):
            raise ConfigError("dictator method needs a voter")
        if name == "grading_curve" and self.curve is None:
            object.__setattr__(self, "curve", GradingCurve.identity())
        if name in ("maxmin", "median") and self.system is None:
            raise ConfigError(f"{name} method needs a phantom system")
        if name == "median" and self.system.kind != ANONYMOUS:
            raise ConfigError("median method needs an anonymous phantom system")
        if self.weights is not None:
            object.__setattr__(self, "weights", tuple(to_number(w) for w in self.weights))

    # constructors for the built-ins
    @classmethod
    def proportional(cls):
        return cls("proportional")

    @classmethod
    def weighted(cls, weights=None):
        return cls("weighted_proportional", weights=None if weights is None else tuple(weights))

    @classmethod
    def order(cls, k: int):
        return cls("order", k=k)

    @classmethod
    def grading(cls, curve: GradingCurve = None, weights=None):
        return cls("grading_curve", curve=curve or GradingCurve.identity(),
                   weights=None if weights is None else tuple(weights))

    @classmethod
    def mean(cls, weights=None):
        return cls("mean", weights=None if weights is None else tuple(weights))

    @classmethod
    def dictator(cls, voter: int):
        return cls("dictator", voter=voter)

    @classmethod
    def maxmin(cls, system: PhantomSystem):
        return cls("maxmin", system=system)

    @classmethod
    def median(cls, system: PhantomSystem):
        return cls("median", system=system)

    def label(self) -> str:
        """Compact human-readable descriptor."""
        if self.name == "order":
            s = f"order:{self.k}"
        elif self.name == "dictator":
            s = f"dictator:{self.voter + 1}"
        elif self.name == "grading_curve":
            s = "grading_curve:" + _curve_label(self.curve)
        elif self.name in ("maxmin", "median"):
            s = f"{self.name}:<{self.system.kind} n={self.system.n}>"
        else:
            s = self.name
        if self.weights is not None:
            s += "@" + ",".join(str(w) for w in self.weights)
        return s

    def to_dict(self) -> dict:
        from .io import number_to_json

        d = {"name": self.name}
        if self.k is not None:
            d["k"] = self.k
        if self.voter is not None:
            d["voter"] = self.voter + 1
        if self.weights is not None:
            d["weights"] = [number_to_json(w) for w in self.weights]
        if self.name == "grading_curve":
            d["curve"] = self.curve.to_dict()
        if self.system is not None:
            d["system"] = self.system.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Method":
        if "name" not in d:
            raise ConfigError("method descriptor needs a 'name'")
        voter = d.get("voter")
        return cls(
            d["name"],
            k=d.get("k"),
            voter=None if voter is None else int(voter) - 1,
            weights=None if d.get("weights") is None else tuple(d["weights"]),
            curve=GradingCurve.from_dict(d["curve"]) if "curve" in d else None,
            system=PhantomSystem.from_dict(d["system"]) if "system" in d else None,
        )

    @classmethod
    def parse(cls, text: str) -> "Method":
        """Parse ``name[:arg[:arg]][@w1,w2,...]`` or a JSON object.

        Examples: ``proportional``, ``order:2``, ``dictator:1``,
        ``weighted@0.3,0.5,0.2``, ``curve:majority``, ``curve:step:1/3``,
        ``median:phantoms.json``.
        """
        text = text.strip()
        if text.startswith("{"):
            try:
                return cls.from_dict(json.loads(text))
            except json.JSONDecodeError as exc:
                raise ConfigError(f"method descriptor is not valid JSON: {exc}") from None
        weights = None
        if "@" in text:
            text, _, wtext = text.partition("@")
            try:
                weights = tuple(to_number(w) for w in wtext.split(","))
            except (ValueError, ZeroDivisionError):
                raise ConfigError(f"bad weight list {wtext!r}") from None
        name, *args = text.split(":")
        name = _ALIASES.get(name, name)
        try:
            if name == "order":
                return cls("order", k=int(args[0]), weights=weights)
            if name == "dictator":
                return cls("dictator", voter=int(args[0]) - 1, weights=weights)
            if name == "grading_curve":
                return cls("grading_curve", curve=_parse_curve(args), weights=weights)
            if name in ("maxmin", "median"):
                with open(":".join(args)) as fh:
                    system = PhantomSystem.from_dict(json.load(fh))
                return cls(name, system=system, weights=weights)
        except (IndexError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"cannot parse method descriptor {text!r}: {exc}") from None
        if args:
            raise ConfigError(f"method {name!r} takes no ':' arguments")
        return cls(name, weights=weights)

    def effective_weights(self, prof_weights: Sequence) -> tuple:
        w = self.weights if self.weights is not None else tuple(prof_weights)
        if len(w) != len(prof_weights):
            raise ProfileError(f"method carries {len(w)} weights for {len(prof_weights)} voters")
        return w

    def phantom_system(self, n: int, m: int, weights: Sequence = None) -> Optional[PhantomSystem]:
        """Phantom system realising this method on n voters and m grades (None for mean)."""
        if weights is None:
            weights = (Fraction(1),) * n
        w = self.effective_weights(weights)
        if self.name == "proportional":
            return proportional_phantoms(n, m)
        if self.name == "weighted_proportional":
            return phantoms_from_weights(w, m)
        if self.name == "order":
            return order_phantoms(self.k, n, m)
        if self.name == "grading_curve":
            return phantoms_from_grading_curve(self.curve, w, m)
        if self.name == "dictator":
            return dictator_phantoms(self.voter, n, m)
        if self.name in ("maxmin", "median"):
            return self.system
        return None


def _curve_label(curve: GradingCurve) -> str:
    if len(curve.curves) == 1:
        c = curve.curves[0]
        if c.kind == "identity":
            return "identity"
        if c.kind == "step":
            return "majority" if c.threshold == Fraction(1, 2) else f"step:{c.threshold}"
        return json.dumps(c.to_dict(), separators=(",", ":"))
    return json.dumps(curve.to_dict(), separators=(",", ":"))


def _parse_curve(args) -> GradingCurve:
    if not args or args[0] == "identity":
        return GradingCurve.identity()
    if args[0] == "majority":
        return GradingCurve.majority()
    if args[0] == "step":
        return GradingCurve.step(args[1])
    raise ConfigError(f"unknown grading curve {':'.join(args)!r}")


def evaluate_levels(method: Method, cdfs: Sequence[Sequence], weights: Sequence) -> tuple:
    """Aggregate CDF values for raw per-voter cumulative tuples.

    This is the unchecked kernel behind :func:`aggregate`; the audit engine
    calls it directly on pre-validated grid CDFs.
    """
    n = len(cdfs)
    m = len(cdfs[0])
    levels = [tuple(c[j] for c in cdfs) for j in range(m)]
    name = method.name
    if name == "proportional":
        phantoms = [Fraction(k, n) for k in range(n + 1)]
        return tuple(sorted(list(l) + phantoms)[n] for l in levels)
    if name == "order":
        if method.k > n:
            raise ProfileError(f"order:{method.k} needs at least {method.k} voters")
        return tuple(_order_level(method.k, l) for l in levels)
    if name == "dictator":
        if method.voter >= n:
            raise ProfileError(f"dictator {method.voter + 1} is not among {n} voters")
        return tuple(cdfs[method.voter])
    w = method.effective_weights(weights)
    if name == "weighted_proportional":
        return tuple(mu_w(w, l) for l in levels)
    if name == "grading_curve":
        method.curve.check_scale(m)
        ws = _normalized(w, exact=is_exact(w))
        return tuple(_curve_level(method.curve, ws, l, j) for j, l in enumerate(levels))
    if name == "mean":
        ws = _normalized(w, exact=is_exact(w))
        return tuple(sum(wi * li for wi, li in zip(ws, l)) for l in levels)
    if name == "maxmin":
        return tuple(maxmin_level(method.system, l, j) for j, l in enumerate(levels))
    if name == "median":
        return tuple(median_level(method.system, l, j) for j, l in enumerate(levels))
    raise ConfigError(f"unknown aggregation method {name!r}")


def aggregate(method, prof: Profile) -> Cdf:
    """Dispatch ``method`` (a :class:`Method` or descriptor string) on ``prof``."""
    if isinstance(method, str):
        method = Method.parse(method)
    elif isinstance(method, dict):
        method = Method.from_dict(method)
    elif not isinstance(method, Method):
        raise ConfigError(f"not a method descriptor: {method!r}")
    if method.system is not None and method.system.m != prof.m:
        raise ProfileError(f"phantom system has {method.system.m} grades, profile {prof.m}")
    values = evaluate_levels(method, [c.cum for c in prof.cdfs], prof.weights)
    return Cdf(values, prof.scale)
