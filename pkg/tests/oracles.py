"""Slow reference implementations written straight from the definitions.

None of these reuse the package kernels; they exist to cross-check them.
"""

import itertools
from fractions import Fraction


def sup_weight_condition(weights, levels):
    """sup{y in [0,1] : sum of weights with level >= y is >= y}.

    The left side is piecewise constant in y with jumps at the levels, so
    the supremum is attained at a level or at a cumulative weight value.
    """
    total = sum(weights)
    ws = [w / total for w in weights]
    candidates = {Fraction(0)} | set(levels)
    for subset in itertools.product((0, 1), repeat=len(ws)):
        candidates.add(sum(w for w, s in zip(ws, subset) if s))
    best = Fraction(0)
    for y in candidates:
        if 0 <= y <= 1 and sum(w for w, r in zip(ws, levels) if r >= y) >= y:
            best = max(best, y)
    return best


def maxmin_bruteforce(phantom, levels):
    """max over subsets S of min(phantom(S), min of levels in S); phantom takes a frozenset."""
    n = len(levels)
    best = None
    for size in range(n + 1):
        for s in itertools.combinations(range(n), size):
            v = min([phantom(frozenset(s))] + [levels[i] for i in s])
            best = v if best is None else max(best, v)
    return best


def majority_value_by_removal(grades):
    """Repeatedly take the (lower) middle grade and drop it."""
    rest = sorted(grades)
    out = []
    while rest:
        k = (len(rest) + 1) // 2 - 1
        out.append(rest.pop(k))
    return tuple(out)


def referendum_sup(priors):
    n = len(priors)
    candidates = set(priors) | {Fraction(k, n) for k in range(n + 1)}
    return max(q for q in candidates if Fraction(sum(1 for p in priors if p >= q), n) >= q)


def grid_cdfs(m, g):
    """Every nondecreasing tuple in {0, 1/g, ..., 1}^m ending at 1 (brute force)."""
    vals = [Fraction(k, g) for k in range(g + 1)]
    return [c for c in itertools.product(vals, repeat=m)
            if c[-1] == 1 and all(a <= b for a, b in zip(c, c[1:]))]


def level_sp_violations(f, m, g, n):
    """All (profile, voter, deviation, grade) violating uncompromisingness; f maps a
    list of CDF tuples to the aggregate tuple."""
    pool = grid_cdfs(m, g)
    out = []
    for prof in itertools.product(pool, repeat=n):
        honest = f(list(prof))
        for i in range(n):
            for dev in pool:
                alt = list(prof)
                alt[i] = dev
                after = f(alt)
                for a in range(m):
                    if prof[i][a] < honest[a] and after[a] < honest[a]:
                        out.append((prof, i, dev, a))
                    elif prof[i][a] > honest[a] and after[a] > honest[a]:
                        out.append((prof, i, dev, a))
    return out


def l1_prob_loss(agg, own):
    pa = [b - a for a, b in zip((0,) + tuple(agg), agg)]
    po = [b - a for a, b in zip((0,) + tuple(own), own)]
    return sum(abs(x - y) for x, y in zip(pa, po))


def profitable_deviations(f, loss, m, g, n):
    pool = grid_cdfs(m, g)
    out = []
    for prof in itertools.product(pool, repeat=n):
        honest = f(list(prof))
        for i in range(n):
            base = loss(honest, prof[i])
            for dev in pool:
                alt = list(prof)
                alt[i] = dev
                if loss(f(alt), prof[i]) < base:
                    out.append((prof, i, dev))
    return out


def median_of(values):
    s = sorted(values)
    return s[len(s) // 2]


def proportional_agg(cdfs):
    n = len(cdfs)
    return tuple(median_of([c[a] for c in cdfs] + [Fraction(k, n) for k in range(n + 1)])
                 for a in range(len(cdfs[0])))


def mean_agg(cdfs):
    n = len(cdfs)
    return tuple(sum(c[a] for c in cdfs) / n for a in range(len(cdfs[0])))
