import json
from fractions import Fraction as F

import pytest

from levelagg.aggregators import Method, evaluate_levels
from levelagg.axioms import (
    HOLDS,
    VIOLATED,
    AuditReport,
    InstanceSpace,
    Utility,
    Witness,
    audit_certainty,
    audit_l1_prob_sp,
    audit_level_sp,
    audit_lr_cdf_sp,
    audit_plausibility,
    audit_proportionality,
    audit_w_axioms,
    expected_verdict,
    find_manipulation,
    grid_cdfs,
    replay,
    run_audit,
)
from levelagg.errors import BudgetExceeded, ConfigError
from levelagg.phantoms import GradingCurve, PhantomSystem, is_certainty_preserving, is_plausibility_preserving

import oracles

SMALL = InstanceSpace(n=2, m=3, grid=3)
DESK = InstanceSpace(n=3, m=3, grid=4)

BUILTINS = ["order:1", "order:2", "order:3", "proportional", "weighted@0.3,0.5,0.2", "curve",
            "curve:majority", "dictator:2"]
BUILTINS_N2 = ["order:1", "order:2", "proportional", "weighted@1,3", "curve", "curve:majority",
               "dictator:2"]


def key_of(pool, prof, voter, dev, grade):
    """Lexicographic witness key used by the engine."""
    return (tuple(pool.index(c) for c in prof), voter, pool.index(dev), grade)


class TestInstanceSpace:
    def test_pool_matches_bruteforce(self):
        assert grid_cdfs(3, 4) == oracles.grid_cdfs(3, 4)
        assert grid_cdfs(4, 2) == oracles.grid_cdfs(4, 2)

    def test_pool_size(self):
        assert InstanceSpace(m=3, grid=4).cdf_count == 15 == len(grid_cdfs(3, 4))
        assert InstanceSpace(m=4, grid=8).cdf_count == 165

    def test_budget(self):
        with pytest.raises(BudgetExceeded):
            audit_level_sp("proportional", InstanceSpace(n=3, m=4, grid=8, budget=10 ** 6))

    def test_random_budget_counts_deviations(self):
        with pytest.raises(BudgetExceeded):
            audit_level_sp("mean", InstanceSpace(mode="random", samples=10, budget=100))

    def test_bad_mode(self):
        with pytest.raises(ConfigError):
            InstanceSpace(mode="sometimes")


class TestLevelSp:
    @pytest.mark.parametrize("method", BUILTINS)
    def test_builtins_hold(self, method):
        rep = audit_level_sp(method, DESK)
        assert rep.verdict == HOLDS and rep.witness is None
        assert rep.instances_checked == 15 ** 3 * 3 * 15

    def test_mean_matches_oracle(self):
        pool = grid_cdfs(3, 3)
        violations = oracles.level_sp_violations(oracles.mean_agg, 3, 3, 2)
        assert violations
        rep = audit_level_sp("mean", SMALL)
        w = rep.witness
        assert rep.verdict == VIOLATED
        assert key_of(pool, w.profile, w.voter, w.deviation, w.grade) == \
            min(key_of(pool, *v) for v in violations)

    def test_proportional_matches_oracle(self):
        assert oracles.level_sp_violations(oracles.proportional_agg, 3, 3, 2) == []
        assert audit_level_sp("proportional", SMALL).holds

    def test_mean_witness_replays(self):
        rep = audit_level_sp("mean", DESK)
        assert replay(rep)
        w = rep.witness
        honest = evaluate_levels(rep.method, w.profile, w.weights)
        assert honest[w.grade] == w.before

    def test_float_mode_agrees(self):
        exact = audit_level_sp("mean", SMALL)
        approx = audit_level_sp("mean", InstanceSpace(n=2, m=3, grid=3, exact=False))
        assert approx.verdict == VIOLATED
        assert [float(x) for c in exact.witness.profile for x in c] == \
            [x for c in approx.witness.profile for x in c]
        assert audit_level_sp("proportional", InstanceSpace(n=2, m=3, grid=3, exact=False)).holds

    def test_random_mode_deterministic(self):
        space = InstanceSpace(mode="random", samples=50, seed=7)
        a, b = audit_level_sp("mean", space), audit_level_sp("mean", space)
        assert a.verdict == VIOLATED and a.witness == b.witness and replay(a)
        assert audit_level_sp("proportional", space).holds

    def test_weighted_profile(self):
        rep = audit_level_sp("weighted", DESK, weights=(F(3, 10), F(1, 2), F(1, 5)))
        assert rep.holds


class TestUtilityAudits:
    @pytest.mark.parametrize("r", [1, 2])
    def test_mean_lr_matches_oracle(self, r):
        pool = grid_cdfs(3, 3)

        def loss(agg, own):
            return sum(abs(a - b) ** r for a, b in zip(agg, own))

        found = oracles.profitable_deviations(oracles.mean_agg, loss, 3, 3, 2)
        rep = audit_lr_cdf_sp("mean", r, SMALL)
        w = rep.witness
        want = min((tuple(pool.index(c) for c in p), i, pool.index(d)) for p, i, d in found)
        assert (tuple(pool.index(c) for c in w.profile), w.voter, pool.index(w.deviation)) == want
        assert replay(rep)

    @pytest.mark.parametrize("method", BUILTINS_N2)
    @pytest.mark.parametrize("r", [1, 2, "1/2"])
    def test_level_sp_methods_pass_lr(self, method, r):
        r = F(r) if isinstance(r, str) else r
        assert audit_lr_cdf_sp(method, r, SMALL).holds

    def test_l1_prob_oracle_m4(self):
        space = InstanceSpace(n=2, m=4, grid=4)
        found = oracles.profitable_deviations(oracles.proportional_agg, oracles.l1_prob_loss, 4, 4, 2)
        rep = audit_l1_prob_sp("proportional", space)
        assert (rep.verdict == VIOLATED) == bool(found)

    def test_l1_prob_m3_small(self):
        assert audit_l1_prob_sp("proportional", InstanceSpace(n=2, m=3, grid=4)).holds
        assert audit_l1_prob_sp("proportional", InstanceSpace(n=3, m=3, grid=3)).holds

    @pytest.mark.parametrize("m", [3, 4])
    def test_dictator_l1_prob(self, m):
        assert audit_l1_prob_sp("dictator:1", InstanceSpace(n=2, m=m, grid=4)).holds

    def test_meta_level_sp_implies_lr(self):
        for method in BUILTINS_N2 + ["mean"]:
            if audit_level_sp(method, SMALL).holds:
                assert audit_lr_cdf_sp(method, 1, SMALL).holds
                assert audit_lr_cdf_sp(method, 2, SMALL).holds

    def test_bad_exponent(self):
        with pytest.raises(ConfigError):
            audit_lr_cdf_sp("mean", 0, SMALL)


class TestFindManipulation:
    def test_proportional_level(self):
        assert find_manipulation("proportional", "level", SMALL) is None

    def test_mean_level(self):
        w = find_manipulation("mean", "level", SMALL)
        assert w is not None and w.after < w.before

    def test_single_grade_utility(self):
        w = find_manipulation("mean", "level:1", SMALL)
        assert w.grade == 0

    def test_l1_prob_m4(self):
        w = find_manipulation("proportional", "l1-prob", InstanceSpace(n=2, m=4, grid=4))
        assert w is not None
        prof = list(w.profile)
        own = prof[w.voter]
        m = Method.proportional()
        prof[w.voter] = w.deviation
        after = evaluate_levels(m, prof, w.weights)
        assert oracles.l1_prob_loss(after, own) == w.after < w.before

    def test_utility_parse(self):
        assert Utility.parse("lr:2") == Utility("lr", r=2)
        assert Utility.parse("level:3").grade == 2
        with pytest.raises(ConfigError):
            Utility.parse("happiness")


class TestIntervalAudits:
    @pytest.mark.parametrize("method,space", [(m, DESK) for m in BUILTINS] +
                             [(m, InstanceSpace(n=2, m=4, grid=4)) for m in BUILTINS_N2])
    def test_syntactic_matches_semantic(self, method, space):
        meth = Method.parse(method)
        system = meth.phantom_system(space.n, space.m)
        cert, plaus = audit_certainty(meth, space), audit_plausibility(meth, space)
        assert cert.holds == is_certainty_preserving(system)
        assert plaus.holds == is_plausibility_preserving(system)
        for rep in (cert, plaus):
            assert rep.holds or replay(rep)

    def test_custom_systems(self):
        # plausibility-preserving but not certainty-preserving, and its reverse
        plaus = PhantomSystem.anonymous([[0, 0, "1/2"], ["1/4", "1/2", "3/4"], [1, 1, 1]])
        flat = PhantomSystem.anonymous([[0, 0, 0], ["1/2", "1/2", "1/2"], [1, 1, 1]])
        for system in (plaus, flat):
            meth = Method.median(system)
            space = InstanceSpace(n=2, m=3, grid=4)
            assert audit_certainty(meth, space).holds == is_certainty_preserving(system)
            assert audit_plausibility(meth, space).holds == is_plausibility_preserving(system)

    def test_proportional_plausibility_witness(self):
        rep = audit_plausibility("proportional", DESK)
        w = rep.witness
        lo, hi = w.interval
        assert rep.verdict == VIOLATED and replay(rep)
        assert w.before == w.after  # aggregate flat on the interval

    def test_mean_certainty_holds(self):
        assert audit_certainty("mean", DESK).holds


class TestProportionality:
    def test_weighted_holds(self):
        rep = audit_proportionality("weighted", 3, 3, weights=(1, 2, 3))
        assert rep.holds and rep.instances_checked == 27

    def test_method_weights_holds(self):
        assert audit_proportionality("weighted@0.3,0.5,0.2", 3, 3).holds

    def test_middlemost_fails(self):
        rep = audit_proportionality("order:2", 3, 3)
        assert rep.verdict == VIOLATED and replay(rep)
        w = rep.witness
        assert w.note == "dirac grades 0,0,1"
        assert w.before == (F(2, 3), 1, 1) and w.after == (1, 1, 1)

    @pytest.mark.parametrize("method", ["order:1", "proportional", "curve:majority", "dictator:1"])
    def test_single_voter(self, method):
        assert audit_proportionality(method, 1, 4).holds

    def test_budget(self):
        with pytest.raises(BudgetExceeded):
            audit_proportionality("weighted", 8, 8, budget=1000)

    def test_expected_matches_audit(self):
        for method in BUILTINS:
            rep = audit_proportionality(method, 3, 3)
            assert rep.holds == expected_verdict(method, "proportionality", 3, 3)


class TestWAxioms:
    @pytest.mark.parametrize("curve", [GradingCurve.identity(), GradingCurve.majority(),
                                       GradingCurve.step("1/3")])
    def test_curves_hold(self, curve):
        rep = audit_w_axioms(curve, scenarios=200)
        assert rep.holds
        assert set(rep.details["checks"]) == {"additivity", "proportionality", "anonymity",
                                              "monotonicity"}
        assert all(c["checked"] > 0 for c in rep.details["checks"].values())

    def test_weight_blind_rule_fails_additivity(self):
        rep = audit_w_axioms(GradingCurve.identity(), scenarios=200, method="proportional")
        assert rep.verdict == VIOLATED and rep.witness.note == "additivity"
        assert replay(rep) and not rep.unexpected

    def test_deterministic(self):
        a = audit_w_axioms(GradingCurve.identity(), scenarios=50, seed=3)
        b = audit_w_axioms(GradingCurve.identity(), scenarios=50, seed=3)
        assert a == b


class TestReports:
    def test_json_roundtrip_and_replay(self):
        rep = audit_level_sp("mean", SMALL)
        doc = json.loads(json.dumps(rep.to_dict()))
        assert doc["verdict"] == VIOLATED and doc["witness"]["voter"] == rep.witness.voter + 1
        restored = AuditReport(doc["axiom"], Method.from_dict(doc["method"]), doc["verdict"],
                               Witness.from_dict(doc["witness"]), doc["instances_checked"])
        assert restored.witness == rep.witness and replay(restored)

    def test_expected_flags(self):
        assert audit_level_sp("mean", SMALL).unexpected
        assert not audit_plausibility("proportional", DESK).unexpected

    def test_run_audit_dispatch(self):
        assert run_audit("order:2", "certainty", DESK).holds
        with pytest.raises(ConfigError):
            run_audit("order:2", "fairness", DESK)

    def test_exhaustive_deterministic(self):
        assert audit_level_sp("mean", SMALL) == audit_level_sp("mean", SMALL)
