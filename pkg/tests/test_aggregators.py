from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from levelagg.aggregators import (
    Method,
    aggregate,
    dominated_fastpath,
    evaluate_levels,
    grading_curve_aggregate,
    maxmin_level,
    mean_aggregate,
    median_level,
    mu_w,
    order_cumulative,
    proportional_cumulative,
    rational_weights_median,
    weighted_proportional,
)
from levelagg.errors import ConfigError, DomainError, InvalidWeights, NotDominated, ProfileError
from levelagg.phantoms import (
    GradingCurve,
    PhantomSystem,
    order_phantoms,
    phantoms_from_weights,
    proportional_phantoms,
)
from levelagg.scale import Cdf, Pmf, Profile

from oracles import maxmin_bruteforce, sup_weight_condition

levels = st.lists(st.fractions(0, 1, max_denominator=12), min_size=1, max_size=5)


def weights_for(n):
    return st.lists(st.integers(0, 6), min_size=n, max_size=n).filter(lambda w: sum(w) > 0)


@st.composite
def levels_and_weights(draw):
    ls = draw(levels)
    return ls, [F(x) for x in draw(weights_for(len(ls)))]


@st.composite
def cdf_profiles(draw, n=None, m=None):
    n = n or draw(st.integers(1, 4))
    m = m or draw(st.integers(1, 4))
    cdfs = []
    for _ in range(n):
        cuts = sorted(draw(st.lists(st.fractions(0, 1, max_denominator=8), min_size=m - 1,
                                    max_size=m - 1)))
        cdfs.append(Cdf(tuple(cuts) + (F(1),)))
    return Profile(tuple(cdfs))


GOLDEN = Profile.from_pmfs([["0", "1/2", "1/2"], ["1/2", "0", "1/2"], ["9/10", "0", "1/10"]])


class TestGoldenTable:
    def test_cdfs(self):
        assert [c.cum for c in GOLDEN.cdfs] == [(0, F(1, 2), 1), (F(1, 2), F(1, 2), 1),
                                                (F(9, 10), F(9, 10), 1)]

    def test_proportional(self):
        out = proportional_cumulative(GOLDEN)
        assert out.cum == (F(1, 2), F(1, 2), 1)
        assert out.to_pmf().mass == (F(1, 2), 0, F(1, 2))

    def test_order_rules(self):
        assert order_cumulative(1, GOLDEN).cum == (0, F(1, 2), 1)
        assert order_cumulative(3, GOLDEN).cum == (F(9, 10), F(9, 10), 1)
        assert order_cumulative(2, GOLDEN).cum == (F(1, 2), F(1, 2), 1)

    def test_order_out_of_range(self):
        with pytest.raises(DomainError):
            order_cumulative(4, GOLDEN)


class TestMuW:
    def test_weighted_example(self):
        # total weight of levels >= 1/2 is 0.3 + 0.5 = 0.8 >= 1/2; any y > 1/2 fails
        assert mu_w([F(3, 10), F(1, 2), F(1, 5)], [F(9, 10), F(1, 2), F(1, 10)]) == F(1, 2)

    def test_all_zero_levels(self):
        assert mu_w([1, 1], [F(0), F(0)]) == 0

    def test_length_mismatch(self):
        with pytest.raises(InvalidWeights):
            mu_w([1], [F(0), F(1)])

    @given(levels_and_weights())
    def test_matches_sup_definition(self, lw):
        ls, w = lw
        assert mu_w(w, ls) == sup_weight_condition(w, ls)

    @given(levels_and_weights())
    def test_proportional_is_equal_weight_case(self, lw):
        ls, _ = lw
        prof = Profile(tuple(Cdf((x, F(1))) if x < 1 else Cdf((F(1), F(1))) for x in ls))
        assert proportional_cumulative(prof).cum[0] == mu_w([1] * len(ls), ls)

    def test_rational_median_errors(self):
        with pytest.raises(InvalidWeights):
            rational_weights_median([1, 1], 3, [F(1, 2), F(1, 2)])
        with pytest.raises(InvalidWeights):
            rational_weights_median([1], 0, [F(1, 2)])

    @given(st.integers(1, 12).flatmap(lambda d: st.tuples(
        st.just(d), st.lists(st.integers(0, d), min_size=1, max_size=4))), st.data())
    def test_rational_median_matches(self, dn, data):
        d, raw = dn
        # turn raw into numerators summing to d
        total = sum(raw) or 1
        nums = [x * d // total for x in raw]
        nums[0] += d - sum(nums)
        ls = data.draw(st.lists(st.fractions(0, 1, max_denominator=12), min_size=len(nums),
                                max_size=len(nums)))
        assert rational_weights_median(nums, d, ls) == mu_w([F(s, d) for s in nums], ls)


class TestKernels:
    @given(levels, st.data())
    def test_median_equals_maxmin_on_anonymous(self, ls, data):
        n = len(ls)
        raw = sorted(data.draw(st.lists(st.fractions(0, 1, max_denominator=6), min_size=n + 1,
                                        max_size=n + 1)))
        raw[-1] = max(raw[-1], F(0))
        system = PhantomSystem.anonymous([[v] for v in raw])
        assert median_level(system, ls, 0) == maxmin_level(system.to_general(), ls, 0)

    @given(levels_and_weights())
    def test_maxmin_matches_bruteforce(self, lw):
        ls, w = lw
        system = phantoms_from_weights(w, 1)
        ws = [x / sum(w) for x in w]
        want = maxmin_bruteforce(lambda s: sum((ws[i] for i in s), F(0)), ls)
        assert maxmin_level(system, ls, 0) == want == mu_w(w, ls)

    def test_median_rejects_general(self):
        with pytest.raises(ProfileError):
            median_level(phantoms_from_weights([1, 1]), [F(0), F(1)], 0)

    def test_level_count_mismatch(self):
        with pytest.raises(ProfileError):
            maxmin_level(proportional_phantoms(2), [F(0)], 0)

    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_order_phantoms_realize_order_rule(self, k):
        system = order_phantoms(k, 3, 3)
        got = aggregate(Method.median(system), GOLDEN)
        assert got == order_cumulative(k, GOLDEN)


class TestProfileRules:
    @given(cdf_profiles(), st.data())
    @settings(max_examples=60)
    def test_identity_curve_is_weighted_proportional(self, prof, data):
        w = data.draw(weights_for(prof.n))
        prof = Profile(prof.cdfs, tuple(w))
        assert grading_curve_aggregate(GradingCurve.identity(), prof) == weighted_proportional(prof)

    @given(cdf_profiles(), st.data())
    @settings(max_examples=60)
    def test_curve_rule_matches_its_phantom_system(self, prof, data):
        w = data.draw(weights_for(prof.n))
        prof = Profile(prof.cdfs, tuple(w))
        curve = data.draw(st.sampled_from([GradingCurve.majority(), GradingCurve.step("1/3"),
                                           GradingCurve.identity()]))
        via_phantoms = aggregate(Method.maxmin(Method.grading(curve).phantom_system(prof.n, prof.m, w)),
                                 prof)
        assert grading_curve_aggregate(curve, prof) == via_phantoms

    @given(cdf_profiles())
    def test_outputs_are_valid_cdfs(self, prof):
        for name in ("proportional", "weighted", "curve:majority", "order:1", "mean"):
            assert isinstance(aggregate(name, prof), Cdf)

    def test_mean(self):
        prof = Profile.from_pmfs([[1, 0], [0, 1]], weights=[1, 3])
        assert mean_aggregate(prof).cum == (F(1, 4), 1)

    def test_unanimity(self):
        prof = Profile.from_pmfs([["1/3", "2/3"]] * 3)
        for name in ("proportional", "weighted", "curve", "order:2", "mean", "dictator:3"):
            assert aggregate(name, prof) == prof.cdfs[0]

    def test_float_mode(self):
        prof = Profile.from_pmfs([[0.2, 0.8], [0.6, 0.4]], exact=False)
        out = aggregate("proportional", prof)
        assert out.cum[0] == pytest.approx(0.5) and not out.exact


class TestDominatedFastpath:
    @given(st.integers(1, 4), st.integers(1, 4), st.data())
    def test_matches_weighted_proportional(self, n, m, data):
        # nested chain: sort each grade's levels so voter order is a dominance chain
        cols = [sorted(data.draw(st.lists(st.fractions(0, 1, max_denominator=8), min_size=n,
                                          max_size=n)), reverse=True) for _ in range(m - 1)]
        rows = []
        for i in range(n):
            vals = sorted(col[i] for col in cols)
            rows.append(vals)
        # re-sort so each row is nondecreasing and rows stay pointwise ordered
        cols = [sorted((r[j] for r in rows), reverse=True) for j in range(m - 1)]
        cdfs = tuple(Cdf(tuple(col[i] for col in cols) + (F(1),)) for i in range(n))
        w = data.draw(weights_for(n))
        prof = Profile(data.draw(st.permutations(cdfs)), tuple(w))
        assert dominated_fastpath(prof) == weighted_proportional(prof).to_pmf()

    def test_density_reading(self):
        # voter bands [0, 1/2] and [1/2, 1]: each contributes only its own slice
        prof = Profile((Cdf.of(["3/4", 1, 1]), Cdf.of(["1/4", "1/4", 1])))
        assert dominated_fastpath(prof).mass == (F(1, 2), 0, F(1, 2))

    def test_golden_profile_is_a_chain(self):
        assert dominated_fastpath(GOLDEN).mass == (F(1, 2), 0, F(1, 2))

    def test_crossing_profile(self):
        prof = Profile((Cdf.of(["1/4", 1, 1]), Cdf.of(["1/2", "1/2", 1])))
        with pytest.raises(NotDominated):
            dominated_fastpath(prof)


class TestMethodDescriptor:
    @pytest.mark.parametrize("text,name", [
        ("proportional", "proportional"), ("prop", "proportional"), ("order:2", "order"),
        ("dictator:1", "dictator"), ("weighted@0.3,0.5,0.2", "weighted_proportional"),
        ("curve:majority", "grading_curve"), ("curve:step:1/3", "grading_curve"), ("mean", "mean"),
    ])
    def test_parse(self, text, name):
        assert Method.parse(text).name == name

    def test_weights_parsed_exactly(self):
        assert Method.parse("weighted@0.3,0.5,0.2").weights == (F(3, 10), F(1, 2), F(1, 5))

    @pytest.mark.parametrize("text", ["nope", "order", "order:x", "proportional:3", "curve:wiggly"])
    def test_parse_errors(self, text):
        with pytest.raises(ConfigError):
            Method.parse(text)

    @pytest.mark.parametrize("method", [
        Method.proportional(), Method.order(2), Method.dictator(0), Method.weighted([1, 2, 3]),
        Method.grading(GradingCurve.majority()), Method.mean(),
        Method.median(proportional_phantoms(3, 3)), Method.maxmin(phantoms_from_weights([1, 2], 2)),
    ])
    def test_dict_roundtrip(self, method):
        assert Method.from_dict(method.to_dict()) == method
        assert Method.parse(__import__("json").dumps(method.to_dict())) == method

    def test_median_from_file(self, tmp_path):
        import json

        path = tmp_path / "ph.json"
        path.write_text(json.dumps(proportional_phantoms(3, 3).to_dict()))
        assert aggregate(f"median:{path}", GOLDEN) == proportional_cumulative(GOLDEN)

    def test_phantom_system_of_mean_is_none(self):
        assert Method.mean().phantom_system(3, 3) is None

    def test_grade_mismatch(self):
        with pytest.raises(ProfileError):
            aggregate(Method.median(proportional_phantoms(3, 2)), GOLDEN)

    def test_dictator_out_of_range(self):
        with pytest.raises(ProfileError):
            aggregate("dictator:4", GOLDEN)

    def test_method_weights_length(self):
        with pytest.raises(ProfileError):
            aggregate("weighted@1,2", GOLDEN)

    def test_evaluate_levels_raw(self):
        assert evaluate_levels(Method.proportional(), [c.cum for c in GOLDEN.cdfs], (1, 1, 1)) == \
            (F(1, 2), F(1, 2), 1)
