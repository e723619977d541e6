import itertools
import math

import numpy as np
import pytest

import swmlab as sl
from swmlab.errors import InvalidQueryError, SizeGuardError
from swmlab.instances import random_instance

TOL = 1e-12


class TestWelfare:
    def test_empty_allocation(self, additive_2x2):
        assert sl.welfare(additive_2x2, sl.Allocation.empty(2)) == 0.0

    def test_single_agent_gets_everything(self):
        o = sl.make_additive([1, 2, 3])
        inst = sl.Instance((o,))
        alloc = sl.Allocation.from_sets([{0, 1, 2}], 3)
        assert sl.welfare(inst, alloc) == sl.value(o, {0, 1, 2})

    def test_hand_sum(self, additive_2x2):
        alloc = sl.Allocation.from_sets([{0}, {1}], 2)
        assert sl.welfare(additive_2x2, alloc) == 6.0

    def test_dimension_mismatch(self, additive_2x2):
        with pytest.raises(ValueError):
            sl.welfare(additive_2x2, sl.Allocation.empty(3))


class TestUnion:
    def test_with_empty(self):
        a = sl.Allocation.from_sets([{0}, {1}], 2)
        assert sl.union(a, sl.Allocation.empty(2)).masks == a.masks

    def test_idempotent(self):
        a = sl.Allocation.from_sets([{0}, {1}], 2)
        u = sl.union(a, a)
        assert u.masks == a.masks and not u.multiset

    def test_cross_agent_overlap_sets_multiset_flag(self):
        a = sl.Allocation.from_sets([{0}, set()], 1 + 1)
        b = sl.Allocation.from_sets([set(), {0}], 2)
        u = sl.union(a, b)
        assert u.masks == (1, 1)
        assert u.multiset

    def test_disjointness_enforced_outside_union(self):
        with pytest.raises(ValueError):
            sl.Allocation((1, 1))


class TestGreedy:
    def test_single_agent(self):
        o = sl.make_additive([1, 2, 3])
        inst = sl.Instance((o,))
        run = sl.greedy(inst, (2, 0, 1))
        assert run.welfare == sl.value(o, {0, 1, 2})
        assert run.allocation.masks == (0b111,)

    def test_or_indicator_order_01(self, or_indicator):
        run = sl.greedy(or_indicator, (0, 1))
        assert run.choices == (0, 0)    # tie at item 0 goes to agent 0
        assert run.welfare == 1.0

    def test_or_indicator_order_10(self, or_indicator):
        run = sl.greedy(or_indicator, (1, 0))
        assert run.choices == (0, 1)
        assert run.welfare == 2.0

    def test_invalid_item(self, or_indicator):
        with pytest.raises(InvalidQueryError):
            sl.greedy(or_indicator, (0, 2))

    def test_repeated_item_is_worthless_to_holder(self):
        o = sl.make_additive([5.0, 1.0])
        inst = sl.Instance((o,))
        run = sl.greedy(inst, (0, 0, 1))
        assert run.marginals == (5.0, 0.0, 1.0)

    def test_all_items_assigned(self):
        for seed in range(5):
            inst = random_instance(5, 2, seed)
            run = sl.greedy(inst, range(5))
            assert run.allocation.assigned_mask == 0b11111

    def test_marginals_match_prefix_welfare_deltas(self):
        for seed in range(5):
            inst = random_instance(5, 3, seed)
            for order in [(0, 1, 2, 3, 4), (4, 2, 0, 3, 1)]:
                run = sl.greedy(inst, order)
                cum = 0.0
                masks = [0] * inst.m
                for pos, j in enumerate(order):
                    masks[run.choices[pos]] |= 1 << j
                    cum += run.marginals[pos]
                    prefix_welfare = sl.welfare(inst,
                                                sl.Allocation(tuple(masks)))
                    assert prefix_welfare == pytest.approx(cum, abs=TOL)


class TestOptimal:
    def test_single_agent(self):
        o = sl.make_additive([1, 2])
        inst = sl.Instance((o,))
        alloc, value, opt_map = sl.optimal(inst)
        assert alloc.masks == (0b11,)
        assert value == 3.0
        assert opt_map == {0: 0, 1: 0}

    def test_or_indicator(self, or_indicator):
        alloc, value, opt_map = sl.optimal(or_indicator)
        assert value == 2.0
        assert opt_map == {0: 1, 1: 0}

    def test_additive_2x2(self, additive_2x2):
        _, value, opt_map = sl.optimal(additive_2x2)
        assert value == 6.0
        assert opt_map == {0: 0, 1: 1}

    def test_first_maximizer_is_canonical(self):
        # identical agents: every assignment ties, so the all-to-agent-0
        # assignment (code 0) must win
        o = sl.make_additive([1.0, 1.0])
        inst = sl.Instance((o, o))
        alloc, _, opt_map = sl.optimal(inst)
        assert opt_map == {0: 0, 1: 0}

    def test_restricted_item_subset(self, additive_2x2):
        alloc, value, opt_map = sl.optimal(additive_2x2, items=[1])
        assert value == 3.0
        assert opt_map == {1: 1}
        assert alloc.assigned_mask == 0b10

    def test_size_guard(self):
        o = sl.make_additive([1.0] * 15)
        inst = sl.Instance(tuple([o] * 4))   # 4^15 > 10^7
        with pytest.raises(SizeGuardError):
            sl.optimal(inst)

    def test_beats_random_assignments(self):
        rng = np.random.default_rng(0)
        for seed in range(3):
            inst = random_instance(5, 3, seed)
            _, opt_value, _ = sl.optimal(inst)
            for _ in range(350):
                masks = [0] * 3
                for j in range(5):
                    masks[int(rng.integers(0, 3))] |= 1 << j
                v = sl.welfare(inst, sl.Allocation(tuple(masks)))
                assert v <= opt_value + TOL


class TestClassicalGuarantee:
    @pytest.mark.parametrize("seed", range(8))
    def test_greedy_at_least_half_of_opt_every_order(self, seed):
        inst = random_instance(4, 2, seed)    # m^n = 16 <= 10^4
        _, opt_value, _ = sl.optimal(inst)
        for order in itertools.permutations(range(4)):
            run = sl.greedy(inst, order)
            assert run.welfare >= 0.5 * opt_value - TOL
