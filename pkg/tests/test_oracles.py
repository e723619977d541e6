import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import swmlab as sl
from swmlab.errors import AxiomViolationError, InvalidQueryError, SizeGuardError
from swmlab.instances import ORACLE_GENERATORS, random_family_instance
from swmlab.oracles import TableOracle, mask_items, subset_key

TOL = 1e-12


def random_oracle(family, n, seed):
    return ORACLE_GENERATORS[family](n, np.random.default_rng(seed))


class TestValue:
    def test_duplicate_coverage(self):
        o = sl.make_coverage([1.0], [[0], [0]])
        assert sl.value(o, {0, 1}) == 1.0

    def test_empty_set_is_zero(self):
        for family in ORACLE_GENERATORS:
            o = random_oracle(family, 4, 0)
            assert sl.value(o, ()) == 0.0

    def test_budget_clamp(self):
        o = sl.make_budgeted_additive(5, [3, 4])
        assert sl.value(o, {0, 1}) == 5.0
        assert sl.value(o, {0}) == 3.0

    def test_out_of_range_item(self):
        o = sl.make_additive([1.0, 2.0])
        with pytest.raises(InvalidQueryError):
            sl.value(o, {0, 2})

    def test_deterministic(self):
        o = random_oracle("coverage", 5, 1)
        assert sl.value(o, {0, 3}) == sl.value(o, {3, 0})


class TestMarginalGain:
    def test_singleton_from_empty(self):
        o = random_oracle("b_matching", 4, 2)
        for e in range(4):
            assert sl.marginal_gain(o, (), e) == sl.value(o, {e})

    def test_additive(self):
        o = sl.make_additive([3, 4])
        assert sl.marginal_gain(o, {0}, 1) == 4.0

    def test_capacity_one_saturated(self):
        o = sl.make_b_matching(1, [5, 2])
        assert sl.marginal_gain(o, {0}, 1) == 0.0

    def test_element_already_present(self):
        o = random_oracle("coverage", 4, 3)
        assert sl.marginal_gain(o, {1, 2}, 1) == 0.0


class TestGainReduction:
    def test_empty_s_is_zero(self):
        o = random_oracle("cut", 4, 0)
        assert sl.gain_reduction(o, {0}, (), 2) == 0.0

    def test_additive_is_zero_everywhere(self):
        o = sl.make_additive([1.0, 2.5, 0.5])
        for amask in range(8):
            a = mask_items(amask)
            for smask in range(8):
                s = mask_items(smask)
                for e in range(3):
                    if (amask | smask) >> e & 1:
                        continue   # MG is degenerate once e is inside
                    assert sl.gain_reduction(o, a, s, e) == 0.0

    def test_coverage_overlap(self):
        o = sl.make_coverage([1.0, 1.0], [[0], [0], [0, 1]])
        assert sl.gain_reduction(o, (), {0}, 2) == 1.0

    def test_nonnegative_on_accepted_oracles(self):
        for family in ORACLE_GENERATORS:
            o = random_oracle(family, 4, 5)
            for amask in range(16):
                a = mask_items(amask)
                for smask in range(16):
                    s = mask_items(smask)
                    for e in range(4):
                        assert sl.gain_reduction(o, a, s, e) >= -TOL


class TestConstructors:
    def test_coverage_full_set(self):
        weights = [0.5, 1.5, 2.0]
        o = sl.make_coverage(weights, [[0], [1], [0, 1]])
        # element 2 is uncovered by every item
        assert sl.value(o, {0, 1, 2}) == 2.0

    def test_coverage_element_out_of_range(self):
        with pytest.raises(ValueError):
            sl.make_coverage([1.0], [[0, 1]])

    def test_b_matching_capacity_fits_all(self):
        o = sl.make_b_matching(2, [5, 2])
        assert sl.value(o, {0, 1}) == 7.0

    def test_b_matching_top_one(self):
        o = sl.make_b_matching(1, [5, 2])
        assert sl.value(o, {0, 1}) == 5.0

    def test_cut_single_sink_edge(self):
        o = sl.make_cut(1, [(0, -1, 2.5)])
        assert sl.value(o, {0}) == 2.5

    def test_cut_empty_graph(self):
        o = sl.make_cut(3, [])
        for mask in range(8):
            assert o.value_mask(mask) == 0.0

    def test_cut_two_unit_sink_edges(self):
        o = sl.make_cut(2, [(0, -1, 1.0), (1, -1, 1.0)])
        assert sl.value(o, {0, 1}) == 2.0

    def test_cut_rejects_non_monotone(self):
        # a pure item-item edge: adding the second endpoint closes the cut
        with pytest.raises(AxiomViolationError):
            sl.make_cut(2, [(0, 1, 1.0)])

    def test_table_additive_identity(self):
        weights = [1.0, 2.0]
        vals = {subset_key(mask_items(m)):
                sum(weights[i] for i in mask_items(m)) for m in range(4)}
        o = sl.make_table(2, vals)
        assert sl.value(o, {0, 1}) == 3.0

    def test_table_rejects_superadditive_pair(self):
        vals = {"": 0, "0": 0.5, "1": 1, "2": 1, "0,1": 1, "0,2": 1,
                "1,2": 3, "0,1,2": 3}
        with pytest.raises(AxiomViolationError) as err:
            sl.make_table(3, vals)
        assert err.value.witness is not None

    def test_table_or_function_accepted(self):
        o = sl.make_table(2, {"": 0, "0": 1, "1": 1, "0,1": 1})
        assert sl.value(o, {0, 1}) == 1.0

    def test_table_missing_subset(self):
        with pytest.raises(ValueError, match="missing"):
            sl.make_table(2, {"": 0, "0": 1, "1": 1})

    def test_tabulate_roundtrip(self):
        o = random_oracle("coverage", 4, 7)
        t = sl.tabulate(o)
        for mask in range(16):
            assert t.value_mask(mask) == o.value_mask(mask)


def _independent_axiom_check(oracle, tol=TOL):
    """Slower, differently-ordered re-verification of the three axioms."""
    n = oracle.n
    normalized = abs(oracle.value(())) <= tol
    monotone = True
    submodular = True
    subsets = [frozenset(c) for r in range(n + 1)
               for c in itertools.combinations(range(n), r)]
    for small in subsets:
        for big in subsets:
            if small <= big and oracle.value(small) > oracle.value(big) + tol:
                monotone = False
    for small in subsets:
        for big in subsets:
            if not small <= big:
                continue
            for e in range(n):
                if e in big:
                    continue
                if (sl.marginal_gain(oracle, small, e)
                        < sl.marginal_gain(oracle, big, e) - tol):
                    submodular = False
    return normalized, monotone, submodular


class TestCheckAxioms:
    @pytest.mark.parametrize("family", sorted(ORACLE_GENERATORS))
    @pytest.mark.parametrize("seed", range(5))
    def test_random_families_pass(self, family, seed):
        for n in (2, 4, 8):
            o = random_oracle(family, n, seed)
            assert sl.check_axioms(o).passed

    def test_cross_validated_against_independent_order(self):
        for family in sorted(ORACLE_GENERATORS):
            o = random_oracle(family, 4, 11)
            rep = sl.check_axioms(o)
            assert (rep.normalized, rep.monotone, rep.submodular) == \
                _independent_axiom_check(o)

    def test_bad_table_reports_witness(self):
        vals = {"": 0, "0": 1, "1": 1, "0,1": 3}
        o = TableOracle(2, vals, check=False)
        rep = sl.check_axioms(o)
        assert not rep.submodular
        a, s, e = rep.witnesses["submodular"]
        assert sl.gain_reduction(o, a, s, e) < -TOL

    def test_refuses_large_ground_set(self):
        o = sl.make_additive([1.0] * 13)
        with pytest.raises(SizeGuardError):
            sl.check_axioms(o)

    def test_spot_check_clean_and_dirty(self):
        clean = sl.make_additive([1.0] * 14)
        assert sl.spot_check_axioms(clean, samples=2000, seed=0).no_violation_found
        vals = {"": 0, "0": 1, "1": 1, "0,1": 3}
        dirty = TableOracle(2, vals, check=False)
        scan = sl.spot_check_axioms(dirty, samples=2000, seed=0)
        assert scan.violation is not None
        assert scan.violation[0] == "submodular"

    def test_spot_check_is_seed_deterministic(self):
        o = random_oracle("coverage", 6, 2)
        r1 = sl.spot_check_axioms(o, samples=500, seed=3)
        r2 = sl.spot_check_axioms(o, samples=500, seed=3)
        assert r1 == r2


class TestClassifySecondOrder:
    def test_additive_is_modular(self):
        assert sl.classify_second_order(sl.make_additive([1, 2, 3])).label \
            == "modular"

    @pytest.mark.parametrize("seed", range(10))
    def test_coverage_is_supermodular(self, seed):
        for n in (3, 4, 5, 6):
            o = random_oracle("coverage", n, seed)
            assert sl.classify_second_order(o).label == "supermodular"

    @pytest.mark.parametrize("seed", range(5))
    def test_cut_is_modular(self, seed):
        o = random_oracle("cut", 4, seed)
        assert sl.classify_second_order(o).label == "modular"

    def test_witness_replays(self):
        o = random_oracle("coverage", 4, 1)
        cls = sl.classify_second_order(o)
        assert cls.witness_supermodular is None
        a, b, s, e = cls.witness_submodular
        assert sl.gain_reduction(o, a, s, e) \
            > sl.gain_reduction(o, b, s, e) + TOL

    def test_modular_means_both_directions(self):
        cls = sl.classify_second_order(sl.make_additive([2.0, 1.0, 0.5]))
        assert cls.witness_supermodular is None
        assert cls.witness_submodular is None
        assert cls.is_second_order_supermodular

    def test_refuses_large_ground_set(self):
        with pytest.raises(SizeGuardError):
            sl.classify_second_order(sl.make_additive([1.0] * 11))


class TestRSubmodular:
    def test_empty_s_trivial(self):
        o = random_oracle("coverage", 4, 0)
        assert sl.check_R_submodular(o, (), {1}).passed

    def test_additive_r_is_zero(self):
        o = sl.make_additive([1, 2, 3, 4])
        assert sl.check_R_submodular(o, {0}, {1}).passed

    def test_random_coverage_passes(self):
        o = random_oracle("coverage", 6, 5)
        assert sl.check_R_submodular(o, {0, 1}, {2}).passed

    def test_overlap_rejected(self):
        o = random_oracle("coverage", 4, 0)
        with pytest.raises(ValueError):
            sl.check_R_submodular(o, {0, 1}, {1})

    def test_all_disjoint_pairs_on_supermodular_oracle(self):
        o = random_oracle("coverage", 5, 9)
        assert sl.classify_second_order(o).is_second_order_supermodular
        for smask in range(32):
            for zmask in range(32):
                if smask & zmask:
                    continue
                rep = sl.check_R_submodular(o, mask_items(smask),
                                            mask_items(zmask))
                assert rep.passed, rep.to_dict()


@given(weights=st.lists(st.floats(0, 100, allow_nan=False), min_size=1,
                        max_size=6),
       budget=st.floats(0, 300, allow_nan=False))
@settings(max_examples=50, deadline=None)
def test_budgeted_additive_always_passes_axioms(weights, budget):
    o = sl.make_budgeted_additive(budget, weights)
    assert sl.check_axioms(o).passed


@given(weights=st.lists(st.floats(0, 100, allow_nan=False), min_size=1,
                        max_size=6),
       capacity=st.integers(1, 6))
@settings(max_examples=50, deadline=None)
def test_b_matching_always_passes_axioms(weights, capacity):
    o = sl.make_b_matching(capacity, weights)
    assert sl.check_axioms(o).passed
