"""Outcome scales, probability vectors and their cumulatives.

Everything here is an immutable value.  Numbers are either exact
(:class:`fractions.Fraction` / ``int``) or 64-bit floats.  A vector whose
entries are all exact is validated exactly; as soon as one float is present
the float tolerance :data:`TAU_MASS` applies.

Grades are addressed by 0-based index into the scale, lowest first.
"""

from __future__ import annotations

import math
import numbers
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

from .errors import DomainError, InvalidCdf, InvalidDistribution, InvalidWeights, ScaleMismatch

Number = Union[Fraction, int, float]

TAU_MASS = 1e-9


def to_number(x, exact: bool = True) -> Number:
    """Coerce ``x`` to the arithmetic of the requested mode.

    In exact mode floats are read through their shortest decimal repr, so
    ``0.3`` becomes ``3/10`` rather than the binary expansion.  Strings such
    as ``"1/3"`` or ``"0.25"`` are accepted in both modes.
    """
    if isinstance(x, bool):
        raise TypeError("booleans are not probabilities")
    if exact:
        if isinstance(x, Fraction):
            return x
        if isinstance(x, int):
            return Fraction(x)
        if isinstance(x, float):
            if not math.isfinite(x):
                raise DomainError(f"non-finite value {x!r}")
            return Fraction(repr(x))
        if isinstance(x, str):
            return Fraction(x.strip())
        if isinstance(x, numbers.Rational):
            return Fraction(x.numerator, x.denominator)
        return Fraction(repr(float(x)))
    if isinstance(x, str):
        return float(Fraction(x.strip()))
    return float(x)


def is_exact(values: Iterable) -> bool:
    return all(isinstance(v, (Fraction, int)) and not isinstance(v, bool) for v in values)


def tolerance(*vectors: Iterable) -> float:
    """0 when every value is exact, :data:`TAU_MASS` otherwise."""
    return 0 if all(is_exact(v) for v in vectors) else TAU_MASS


@dataclass(frozen=True)
class OutcomeScale:
    """A finite linearly ordered set of grade labels, lowest first."""

    labels: tuple

    def __post_init__(self):
        labels = tuple(str(label) for label in self.labels)
        if not labels:
            raise DomainError("an outcome scale needs at least one grade")
        if len(set(labels)) != len(labels):
            raise DomainError(f"duplicate grade labels in {labels}")
        object.__setattr__(self, "labels", labels)

    @classmethod
    def of_size(cls, m: int) -> "OutcomeScale":
        return cls(tuple(str(j + 1) for j in range(m)))

    def __len__(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(str(label))
        except ValueError:
            raise DomainError(f"unknown grade {label!r}") from None

    def rank(self, label: str) -> int:
        """1-based rank of ``label`` (1 = lowest grade)."""
        return self.index(label) + 1


def _check_scale(size: int, scale: Optional[OutcomeScale]):
    if scale is not None and len(scale) != size:
        raise ScaleMismatch(f"vector of length {size} on a scale of {len(scale)} grades")


@dataclass(frozen=True)
class Pmf:
    """Probability mass over the grades of a scale."""

    mass: tuple
    scale: Optional[OutcomeScale] = field(default=None, compare=False)

    def __post_init__(self):
        mass = tuple(self.mass)
        if not mass:
            raise InvalidDistribution("empty probability vector")
        _check_scale(len(mass), self.scale)
        tol = tolerance(mass)
        for j, v in enumerate(mass):
            if not (-tol <= v <= 1 + tol):
                raise InvalidDistribution(f"mass[{j}] = {v} outside [0, 1]")
        total = sum(mass)
        if abs(total - 1) > tol:
            raise InvalidDistribution(f"masses sum to {total}, not 1")
        object.__setattr__(self, "mass", mass)

    @classmethod
    def of(cls, values: Sequence, scale: Optional[OutcomeScale] = None, exact: bool = True) -> "Pmf":
        return cls(tuple(to_number(v, exact) for v in values), scale)

    @classmethod
    def dirac(cls, m: int, j: int, scale: Optional[OutcomeScale] = None, exact: bool = True) -> "Pmf":
        one, zero = (Fraction(1), Fraction(0)) if exact else (1.0, 0.0)
        if not 0 <= j < m:
            raise DomainError(f"grade index {j} outside 0..{m - 1}")
        return cls(tuple(one if k == j else zero for k in range(m)), scale)

    @property
    def exact(self) -> bool:
        return is_exact(self.mass)

    def __len__(self):
        return len(self.mass)

    def __iter__(self):
        return iter(self.mass)

    def __getitem__(self, j):
        return self.mass[j]

    def to_cdf(self) -> "Cdf":
        return pmf_to_cdf(self)


@dataclass(frozen=True)
class Cdf:
    """Nondecreasing cumulative vector ending at one."""

    cum: tuple
    scale: Optional[OutcomeScale] = field(default=None, compare=False)

    def __post_init__(self):
        cum = tuple(self.cum)
        if not cum:
            raise InvalidCdf("empty cumulative vector")
        _check_scale(len(cum), self.scale)
        tol = tolerance(cum)
        prev = 0
        for j, v in enumerate(cum):
            if not (-tol <= v <= 1 + tol):
                raise InvalidCdf(f"cum[{j}] = {v} outside [0, 1]")
            if v < prev - tol:
                raise InvalidCdf(f"cum decreases at grade {j}: {prev} -> {v}")
            prev = v
        if abs(cum[-1] - 1) > tol:
            raise InvalidCdf(f"last cumulative value is {cum[-1]}, not 1")
        object.__setattr__(self, "cum", cum)

    @classmethod
    def of(cls, values: Sequence, scale: Optional[OutcomeScale] = None, exact: bool = True) -> "Cdf":
        return cls(tuple(to_number(v, exact) for v in values), scale)

    @property
    def exact(self) -> bool:
        return is_exact(self.cum)

    def __len__(self):
        return len(self.cum)

    def __iter__(self):
        return iter(self.cum)

    def __getitem__(self, j):
        return self.cum[j]

    def to_pmf(self) -> Pmf:
        return cdf_to_pmf(self)


def as_cdf(d, exact: bool = True) -> Cdf:
    """Accept a Cdf, a Pmf, or a raw cumulative sequence."""
    if isinstance(d, Cdf):
        return d
    if isinstance(d, Pmf):
        return pmf_to_cdf(d)
    return Cdf.of(d, exact=exact)


def pmf_to_cdf(p: Pmf) -> Cdf:
    """Prefix sums of the masses, i.e. P(a) = p(outcome <= a)."""
    cum, acc = [], 0
    for v in p.mass:
        acc = acc + v
        cum.append(acc)
    if not p.exact:
        # rounding may leave the last prefix sum a few ulps off 1
        cum = [min(max(c, 0.0), 1.0) for c in cum]
        cum[-1] = 1.0
    return Cdf(tuple(cum), p.scale)


def cdf_to_pmf(P: Cdf) -> Pmf:
    mass, prev = [], 0
    for c in P.cum:
        d = c - prev
        mass.append(d if d > 0 else d * 0)
        prev = c
    return Pmf(tuple(mass), P.scale)


def _same_scale(a, b):
    if len(a) != len(b):
        raise ScaleMismatch(f"scales of size {len(a)} and {len(b)}")
    if a.scale is not None and b.scale is not None and a.scale != b.scale:
        raise ScaleMismatch(f"{a.scale.labels} vs {b.scale.labels}")


def quantile(P: Cdf, x) -> int:
    """Index of the lowest grade with P(grade) >= x, for 0 < x <= 1.

    This is the left-continuous generalized inverse of the CDF.
    """
    if not (0 < x <= 1):
        raise DomainError(f"quantile level {x} outside (0, 1]")
    tol = tolerance(P.cum, (x,))
    for j, c in enumerate(P.cum):
        if c >= x - tol:
            return j
    return len(P) - 1


def cdf_distance(P: Cdf, Q: Cdf, r=1):
    """L_r distance between two CDFs under counting measure on the grades."""
    _same_scale(P, Q)
    if not r > 0:
        raise DomainError(f"L_r exponent must be positive, got {r}")
    diffs = [abs(a - b) for a, b in zip(P.cum, Q.cum)]
    if r == 1:
        return sum(diffs)
    return float(sum(float(d) ** r for d in diffs)) ** (1.0 / r)


def prob_distance_l1(p: Pmf, q: Pmf):
    _same_scale(p, q)
    return sum(abs(a - b) for a, b in zip(p.mass, q.mass))


def dominates(P: Cdf, Q: Cdf) -> bool:
    """True when P(a) >= Q(a) at every grade."""
    _same_scale(P, Q)
    tol = tolerance(P.cum, Q.cum)
    return all(a >= b - tol for a, b in zip(P.cum, Q.cum))


@dataclass(frozen=True)
class Profile:
    """One CDF per voter plus nonnegative voter weights (equal by default)."""

    cdfs: tuple
    weights: tuple = None

    def __post_init__(self):
        cdfs = tuple(as_cdf(c) for c in self.cdfs)
        if not cdfs:
            raise InvalidDistribution("a profile needs at least one voter")
        m = len(cdfs[0])
        for c in cdfs[1:]:
            _same_scale(cdfs[0], c)
        exact = all(c.exact for c in cdfs)
        if self.weights is None:
            weights = tuple(Fraction(1) if exact else 1.0 for _ in cdfs)
        else:
            weights = tuple(to_number(w, exact) for w in self.weights)
        if len(weights) != len(cdfs):
            raise InvalidWeights(f"{len(weights)} weights for {len(cdfs)} voters")
        if any(w < 0 for w in weights):
            raise InvalidWeights(f"negative weight in {weights}")
        if not sum(weights) > 0:
            raise InvalidWeights("weights sum to zero")
        object.__setattr__(self, "cdfs", cdfs)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "_m", m)

    @classmethod
    def from_pmfs(cls, pmfs: Sequence, weights: Optional[Sequence] = None, exact: bool = True) -> "Profile":
        cdfs = [pmf_to_cdf(p if isinstance(p, Pmf) else Pmf.of(p, exact=exact)) for p in pmfs]
        return cls(tuple(cdfs), None if weights is None else tuple(weights))

    @property
    def n(self) -> int:
        return len(self.cdfs)

    @property
    def m(self) -> int:
        return self._m

    @property
    def scale(self) -> Optional[OutcomeScale]:
        return self.cdfs[0].scale

    @property
    def exact(self) -> bool:
        return all(c.exact for c in self.cdfs) and is_exact(self.weights)

    def normalized_weights(self) -> tuple:
        total = sum(self.weights)
        return tuple(w / total for w in self.weights)

    def levels(self, j: int) -> tuple:
        """The n values P_i(grade j)."""
        return tuple(c.cum[j] for c in self.cdfs)

    def replace_voter(self, i: int, cdf) -> "Profile":
        cdfs = list(self.cdfs)
        cdfs[i] = as_cdf(cdf)
        return Profile(tuple(cdfs), self.weights)


def is_dominated_profile(prof: Profile) -> Optional[tuple]:
    """Permutation sorting the profile into a pointwise-decreasing chain.

    Returns ``None`` when two voters' CDFs cross.
    """
    order = sorted(range(prof.n), key=lambda i: (-sum(prof.cdfs[i].cum), i))
    for hi, lo in zip(order, order[1:]):
        if not dominates(prof.cdfs[hi], prof.cdfs[lo]):
            return None
    return tuple(order)
