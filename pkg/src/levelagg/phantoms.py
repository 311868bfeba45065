"""Phantom-function systems and grading curves.

A phantom system assigns to every coalition S of voters (general systems)
or every coalition size k (anonymous systems) a nondecreasing function of
the grade with values in [0, 1].  Coalitions of a general system are
bitmasks: bit ``i`` set means voter ``i`` (0-based) belongs to S.

On a finite scale right continuity is vacuous, so validity reduces to
monotonicity in the grade, monotonicity in the coalition, values in [0, 1]
and ``f_N(top grade) == 1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .errors import InvalidCurve, InvalidPhantoms, InvalidWeights
from .scale import is_exact, to_number

GENERAL_MAX_VOTERS = 12
FLOAT_GAP = 1e-12

ANONYMOUS = "anonymous"
GENERAL = "general"


@dataclass(frozen=True)
class PhantomSystem:
    kind: str
    n: int
    values: tuple

    def __post_init__(self):
        if self.kind not in (ANONYMOUS, GENERAL):
            raise InvalidPhantoms(f"unknown phantom system kind {self.kind!r}")
        if self.n < 1:
            raise InvalidPhantoms("a phantom system needs at least one voter")
        if self.kind == GENERAL and self.n > GENERAL_MAX_VOTERS:
            raise InvalidPhantoms(
                f"general systems are capped at {GENERAL_MAX_VOTERS} voters, got {self.n}")
        values = tuple(tuple(f) for f in self.values)
        expected = self.n + 1 if self.kind == ANONYMOUS else 1 << self.n
        if len(values) != expected:
            raise InvalidPhantoms(f"{self.kind} system on {self.n} voters needs {expected} "
                                  f"phantom functions, got {len(values)}")
        m = len(values[0])
        if m < 1 or any(len(f) != m for f in values):
            raise InvalidPhantoms("phantom functions must share one nonempty grade length")
        object.__setattr__(self, "values", values)

    @classmethod
    def anonymous(cls, values: Sequence[Sequence], exact: bool = True) -> "PhantomSystem":
        vals = tuple(tuple(to_number(v, exact) for v in f) for f in values)
        return cls(ANONYMOUS, len(vals) - 1, vals)

    @classmethod
    def general(cls, n: int, phantom: Callable[[int], Sequence], exact: bool = True) -> "PhantomSystem":
        """Build a general system from ``phantom(mask) -> per-grade values``."""
        if n > GENERAL_MAX_VOTERS:
            raise InvalidPhantoms(f"general systems are capped at {GENERAL_MAX_VOTERS} voters")
        vals = tuple(tuple(to_number(v, exact) for v in phantom(mask)) for mask in range(1 << n))
        return cls(GENERAL, n, vals)

    @property
    def m(self) -> int:
        return len(self.values[0])

    @property
    def full(self) -> int:
        """Index of the grand coalition N."""
        return self.n if self.kind == ANONYMOUS else (1 << self.n) - 1

    @property
    def exact(self) -> bool:
        return all(is_exact(f) for f in self.values)

    def phantom(self, s: int) -> tuple:
        """Phantom function of coalition mask ``s`` (general) or size ``s`` (anonymous)."""
        return self.values[s]

    def coalition_phantom(self, mask: int) -> tuple:
        """Phantom function of a coalition given as a bitmask, whatever the kind."""
        if self.kind == ANONYMOUS:
            return self.values[bin(mask).count("1")]
        return self.values[mask]

    def to_general(self) -> "PhantomSystem":
        if self.kind == GENERAL:
            return self
        return PhantomSystem(GENERAL, self.n,
                             tuple(self.values[bin(mask).count("1")] for mask in range(1 << self.n)))

    def _functions(self):
        """(label, function) pairs in canonical order."""
        if self.kind == ANONYMOUS:
            return [(f"k={k}", f) for k, f in enumerate(self.values)]
        return [(f"S={coalition_label(mask, self.n)}", f) for mask, f in enumerate(self.values)]

    def to_dict(self) -> dict:
        from .io import number_to_json

        if self.kind == ANONYMOUS:
            phantoms = [[number_to_json(v) for v in f] for f in self.values]
        else:
            phantoms = {coalition_key(mask, self.n): [number_to_json(v) for v in f]
                        for mask, f in enumerate(self.values)}
        return {"kind": self.kind, "n": self.n, "m": self.m, "phantoms": phantoms}

    @classmethod
    def from_dict(cls, d: dict, exact: bool = True) -> "PhantomSystem":
        kind = d.get("kind")
        if kind == ANONYMOUS:
            return cls.anonymous(d["phantoms"], exact)
        if kind == GENERAL:
            n = int(d["n"])
            table = d["phantoms"]
            missing = [coalition_key(mask, n) for mask in range(1 << n)
                       if coalition_key(mask, n) not in table]
            if missing:
                raise InvalidPhantoms(f"general system is missing coalitions {missing[:5]}")
            return cls.general(n, lambda mask: table[coalition_key(mask, n)], exact)
        raise InvalidPhantoms(f"unknown phantom system kind {kind!r}")


def coalition_key(mask: int, n: int) -> str:
    """JSON key of a coalition: comma-separated 1-based voter numbers."""
    return ",".join(str(i + 1) for i in range(n) if mask >> i & 1)


def coalition_label(mask: int, n: int) -> str:
    return "{" + coalition_key(mask, n) + "}"


@dataclass(frozen=True)
class Diagnostic:
    code: str
    where: str
    message: str


def _close(a, b, exact):
    return a == b if exact else abs(a - b) <= FLOAT_GAP


def validate(system: PhantomSystem) -> list:
    """Every violated invariant of ``system``; empty iff it defines a Level-SP rule."""
    exact = system.exact
    tol = 0 if exact else FLOAT_GAP
    out = []
    for label, f in system._functions():
        for j, v in enumerate(f):
            if not (-tol <= v <= 1 + tol):
                out.append(Diagnostic("range", f"{label}, grade {j}", f"value {v} outside [0, 1]"))
        for j in range(len(f) - 1):
            if f[j + 1] < f[j] - tol:
                out.append(Diagnostic("grade-monotonicity", f"{label}, grade {j}",
                                      f"decreases {f[j]} -> {f[j + 1]}"))
    if system.kind == ANONYMOUS:
        for k in range(system.n):
            for j, (lo, hi) in enumerate(zip(system.values[k], system.values[k + 1])):
                if lo > hi + tol:
                    out.append(Diagnostic("coalition-monotonicity", f"k={k} vs k={k + 1}, grade {j}",
                                          f"f_{k} = {lo} > f_{k + 1} = {hi}"))
    else:
        n = system.n
        for mask in range(1 << n):
            for i in range(n):
                if mask >> i & 1:
                    continue
                bigger = mask | (1 << i)
                for j, (lo, hi) in enumerate(zip(system.values[mask], system.values[bigger])):
                    if lo > hi + tol:
                        out.append(Diagnostic(
                            "coalition-monotonicity",
                            f"S={coalition_label(mask, n)} vs {coalition_label(bigger, n)}, grade {j}",
                            f"{lo} > {hi}"))
    top = system.values[system.full][-1]
    if not _close(top, 1, exact):
        out.append(Diagnostic("boundary", f"grade {system.m - 1}",
                              f"f_N must end at 1, ends at {top}"))
    return out


def is_certainty_preserving(system: PhantomSystem) -> bool:
    """Constant phantom functions with f_empty == 0 and f_N == 1."""
    exact = system.exact
    for f in system.values:
        if any(not _close(v, f[0], exact) for v in f):
            return False
    return (all(_close(v, 0, exact) for v in system.values[0])
            and all(_close(v, 1, exact) for v in system.values[system.full]))


def is_plausibility_preserving(system: PhantomSystem) -> bool:
    exact = system.exact
    gap = 0 if exact else FLOAT_GAP
    for f in system.values:
        for j in range(len(f) - 1):
            if gap < f[j] < 1 - gap and not f[j + 1] > f[j] + gap:
                return False
    f_empty, f_full = system.values[0], system.values[system.full]
    if any(not v < 1 - gap for v in f_empty[:-1]):
        return False
    return all(v > gap for v in f_full)


def is_weak_diversity(system: PhantomSystem) -> bool:
    if not is_certainty_preserving(system):
        return False
    general = system.to_general()
    gap = 0 if system.exact else FLOAT_GAP
    n = general.n
    for mask in range(1 << n):
        for i in range(n):
            if mask >> i & 1:
                continue
            if not general.values[mask | (1 << i)][0] > general.values[mask][0] + gap:
                return False
    return True


def _normalized(w, exact=True) -> tuple:
    ws = tuple(to_number(x, exact) for x in w)
    if not ws:
        raise InvalidWeights("empty weight vector")
    if any(x < 0 for x in ws):
        raise InvalidWeights(f"negative weight in {ws}")
    total = sum(ws)
    if not total > 0:
        raise InvalidWeights("weights sum to zero")
    return tuple(x / total for x in ws)


def coalition_weights(w, exact: bool = True) -> list:
    """Normalized weight of every coalition, indexed by bitmask."""
    ws = _normalized(w, exact)
    n = len(ws)
    sums = [0] * (1 << n)
    for mask in range(1, 1 << n):
        low = mask & -mask
        sums[mask] = sums[mask ^ low] + ws[low.bit_length() - 1]
    return sums


def phantoms_from_weights(w: Sequence, m: int = 1, exact: bool = True) -> PhantomSystem:
    """Constant phantoms f_S = (sum of weights in S) / (total weight)."""
    sums = coalition_weights(w, exact)
    return PhantomSystem(GENERAL, len(w), tuple((s,) * m for s in sums))


# -- built-in systems -------------------------------------------------------

def proportional_phantoms(n: int, m: int = 1) -> PhantomSystem:
    return PhantomSystem(ANONYMOUS, n, tuple((Fraction(k, n),) * m for k in range(n + 1)))


def order_phantoms(k: int, n: int, m: int = 1) -> PhantomSystem:
    """Phantoms of the k-th smallest order function: f_j = 1 iff j >= n - k + 1."""
    if not 1 <= k <= n:
        raise InvalidPhantoms(f"order index {k} outside 1..{n}")
    return PhantomSystem(ANONYMOUS, n, tuple(
        (Fraction(1 if j >= n - k + 1 else 0),) * m for j in range(n + 1)))


def dictator_phantoms(i: int, n: int, m: int = 1) -> PhantomSystem:
    if not 0 <= i < n:
        raise InvalidPhantoms(f"dictator {i} outside 0..{n - 1}")
    return PhantomSystem(GENERAL, n, tuple(
        (Fraction(1 if mask >> i & 1 else 0),) * m for mask in range(1 << n)))


# -- grading curves ---------------------------------------------------------

CURVE_KINDS = ("identity", "step", "affine", "table")


@dataclass(frozen=True)
class Curve:
    """A nondecreasing map [0, 1] -> [0, 1] of the weight fraction.

    ``step`` is 1 from ``threshold`` on (inclusive) and 0 below; ``affine``
    is ``intercept + slope * x`` clamped to [0, 1]; ``table`` interpolates
    linearly between the sample points ``xs`` (from 0 to 1) and ``ys``.
    """

    kind: str = "identity"
    threshold: Optional[Fraction] = None
    slope: Optional[Fraction] = None
    intercept: Optional[Fraction] = None
    xs: tuple = ()
    ys: tuple = ()

    def __post_init__(self):
        if self.kind not in CURVE_KINDS:
            raise InvalidCurve(f"unknown curve kind {self.kind!r}")
        if self.kind == "step":
            if self.threshold is None or not 0 <= self.threshold <= 1:
                raise InvalidCurve(f"step threshold {self.threshold} outside [0, 1]")
        elif self.kind == "affine":
            if self.slope is None or self.intercept is None:
                raise InvalidCurve("affine curve needs slope and intercept")
            if self.slope < 0:
                raise InvalidCurve(f"affine slope {self.slope} is negative")
        elif self.kind == "table":
            xs, ys = tuple(self.xs), tuple(self.ys)
            if len(xs) < 2 or len(xs) != len(ys):
                raise InvalidCurve("table curve needs matching xs/ys with at least two points")
            if xs[0] != 0 or xs[-1] != 1:
                raise InvalidCurve("table xs must run from 0 to 1")
            if any(b <= a for a, b in zip(xs, xs[1:])):
                raise InvalidCurve("table xs must be strictly increasing")
            if any(not 0 <= y <= 1 for y in ys):
                raise InvalidCurve("table ys must lie in [0, 1]")
            for k, (a, b) in enumerate(zip(ys, ys[1:])):
                if b < a:
                    raise InvalidCurve(f"table is not monotone between x={xs[k]} and x={xs[k + 1]}")
            object.__setattr__(self, "xs", xs)
            object.__setattr__(self, "ys", ys)

    def __call__(self, x):
        if self.kind == "identity":
            return x
        if self.kind == "step":
            return x * 0 + (1 if x >= self.threshold else 0)
        if self.kind == "affine":
            y = self.intercept + self.slope * x
            return min(max(y, x * 0), x * 0 + 1)
        xs, ys = self.xs, self.ys
        for k in range(len(xs) - 1):
            if x <= xs[k + 1]:
                return ys[k] + (ys[k + 1] - ys[k]) * (x - xs[k]) / (xs[k + 1] - xs[k])
        return ys[-1]

    def knots(self) -> tuple:
        """Abscissae where the curve changes slope or jumps."""
        if self.kind == "step":
            return (self.threshold,)
        if self.kind == "table":
            return self.xs
        if self.kind == "affine" and self.slope:
            return tuple(x for x in ((-self.intercept) / self.slope,
                                     (1 - self.intercept) / self.slope) if 0 <= x <= 1)
        return ()

    def to_dict(self) -> dict:
        from .io import number_to_json

        d = {"kind": self.kind}
        if self.kind == "step":
            d["threshold"] = number_to_json(self.threshold)
        elif self.kind == "affine":
            d["slope"] = number_to_json(self.slope)
            d["intercept"] = number_to_json(self.intercept)
        elif self.kind == "table":
            d["x"] = [number_to_json(v) for v in self.xs]
            d["y"] = [number_to_json(v) for v in self.ys]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Curve":
        kind = d.get("kind", "identity")
        num = to_number
        if kind == "identity":
            return cls()
        if kind == "step":
            return cls("step", threshold=num(d["threshold"]))
        if kind == "affine":
            return cls("affine", slope=num(d["slope"]), intercept=num(d["intercept"]))
        if kind == "table":
            return cls("table", xs=tuple(num(v) for v in d["x"]), ys=tuple(num(v) for v in d["y"]))
        raise InvalidCurve(f"unknown curve kind {kind!r}")


@dataclass(frozen=True)
class GradingCurve:
    """gamma(grade, weight fraction): one curve shared by all grades, or one per grade."""

    curves: tuple

    def __post_init__(self):
        curves = tuple(self.curves)
        if not curves:
            raise InvalidCurve("a grading curve needs at least one curve")
        object.__setattr__(self, "curves", curves)
        if len(curves) > 1:
            xs = sorted({Fraction(k, 100) for k in range(101)}
                        | {x for c in curves for x in c.knots()})
            for x in xs:
                for j, (lo, hi) in enumerate(zip(curves, curves[1:])):
                    if lo(x) > hi(x):
                        raise InvalidCurve(
                            f"not nondecreasing in the grade: gamma({j}, {x}) > gamma({j + 1}, {x})")

    @classmethod
    def identity(cls) -> "GradingCurve":
        return cls((Curve(),))

    @classmethod
    def majority(cls) -> "GradingCurve":
        """gamma(a, x) = 1 if x >= 1/2 else 0."""
        return cls((Curve("step", threshold=Fraction(1, 2)),))

    @classmethod
    def step(cls, threshold) -> "GradingCurve":
        return cls((Curve("step", threshold=to_number(threshold)),))

    @classmethod
    def per_grade(cls, curves: Sequence[Curve]) -> "GradingCurve":
        return cls(tuple(curves))

    def __call__(self, j: int, x):
        if len(self.curves) == 1:
            return self.curves[0](x)
        return self.curves[j](x)

    def check_scale(self, m: int):
        if len(self.curves) not in (1, m):
            raise InvalidCurve(f"{len(self.curves)} per-grade curves for a {m}-grade scale")
        if self(m - 1, Fraction(1)) != 1:
            raise InvalidCurve("gamma(top grade, 1) must be 1")

    @property
    def is_identity(self) -> bool:
        return all(c.kind == "identity" for c in self.curves)

    def to_dict(self) -> dict:
        if len(self.curves) == 1:
            return self.curves[0].to_dict()
        return {"kind": "per_grade", "curves": [c.to_dict() for c in self.curves]}

    @classmethod
    def from_dict(cls, d: dict) -> "GradingCurve":
        if d.get("kind") == "per_grade":
            return cls(tuple(Curve.from_dict(c) for c in d["curves"]))
        return cls((Curve.from_dict(d),))


def phantoms_from_grading_curve(curve: GradingCurve, w: Sequence, m: int,
                                exact: bool = True) -> PhantomSystem:
    """General system f_S(a) = gamma(a, w(S) / w(N))."""
    curve.check_scale(m)
    sums = coalition_weights(w, exact)
    system = PhantomSystem(GENERAL, len(w),
                           tuple(tuple(curve(j, s) for j in range(m)) for s in sums))
    problems = validate(system)
    if problems:
        raise InvalidCurve(f"curve yields an invalid phantom system: {problems[0].message}")
    return system
