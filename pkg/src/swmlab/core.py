"""Instances, allocations, the online greedy allocator and brute-force optimum.

Allocations store one bitmask per agent.  Items absent from every mask are
unallocated.  The greedy allocator accepts general item sequences, possibly
with repeats, because the simulated-sequence experiments replay items; a
repeated item contributes per the union semantics (second copy worth zero
to an agent that already holds it).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .errors import InvalidQueryError, SizeGuardError
from .oracles import ValuationOracle, as_mask, mask_items

OPTIMAL_MAX_ASSIGNMENTS = 10 ** 7


@dataclass(frozen=True)
class Instance:
    """n items, m agents, one valuation oracle per agent."""

    oracles: tuple[ValuationOracle, ...]
    name: Optional[str] = None
    seed: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "oracles", tuple(self.oracles))
        if not self.oracles:
            raise ValueError("instance needs at least one agent")
        n = self.oracles[0].n
        if any(o.n != n for o in self.oracles):
            raise ValueError("all oracles must share the same ground size")

    @property
    def n(self) -> int:
        return self.oracles[0].n

    @property
    def m(self) -> int:
        return len(self.oracles)


@dataclass(frozen=True)
class Allocation:
    """Per-agent item sets as bitmasks.

    ``multiset`` marks allocations produced by unions where the same item
    appears under several agents; welfare stays well-defined per agent.
    """

    masks: tuple[int, ...]
    multiset: bool = False

    def __post_init__(self):
        object.__setattr__(self, "masks", tuple(int(m) for m in self.masks))
        if not self.multiset:
            seen = 0
            for m in self.masks:
                if seen & m:
                    raise ValueError(
                        "agents share items; build via union() for multisets")
                seen |= m

    @property
    def m(self) -> int:
        return len(self.masks)

    @property
    def assigned_mask(self) -> int:
        out = 0
        for m in self.masks:
            out |= m
        return out

    def agent_sets(self) -> list[tuple[int, ...]]:
        return [mask_items(m) for m in self.masks]

    @classmethod
    def empty(cls, m: int) -> "Allocation":
        return cls((0,) * m)

    @classmethod
    def from_sets(cls, sets: Iterable[Iterable[int]], n: int,
                  multiset: bool = False) -> "Allocation":
        return cls(tuple(as_mask(s, n) for s in sets), multiset=multiset)


def welfare(instance: Instance, a: Allocation) -> float:
    """V(A) = sum of each agent's value for its assigned set."""
    if a.m != instance.m:
        raise ValueError(f"allocation has {a.m} agents, instance has {instance.m}")
    return sum(o.value_mask(m) for o, m in zip(instance.oracles, a.masks))


def union(a: Allocation, b: Allocation) -> Allocation:
    """Per-agent set union; duplicate copies of an item contribute nothing.

    The result may assign one item to several agents and is then flagged
    ``multiset``.
    """
    if a.m != b.m:
        raise ValueError("allocations have different agent counts")
    masks = tuple(x | y for x, y in zip(a.masks, b.masks))
    seen, overlap = 0, False
    for m in masks:
        if seen & m:
            overlap = True
            break
        seen |= m
    return Allocation(masks, multiset=overlap or a.multiset or b.multiset)


@dataclass(frozen=True)
class GreedyRun:
    order: tuple[int, ...]
    allocation: Allocation
    marginals: tuple[float, ...]
    choices: tuple[int, ...]          # chosen agent per position

    @property
    def welfare(self) -> float:
        return float(sum(self.marginals))


def greedy(instance: Instance, order: Sequence[int]) -> GreedyRun:
    """Process items in order, assigning each to the agent with the largest
    marginal gain; ties go to the lowest agent index."""
    n, m = instance.n, instance.m
    masks = [0] * m
    marginals = []
    choices = []
    for j in order:
        j = int(j)
        if j < 0 or j >= n:
            raise InvalidQueryError(f"item {j} outside ground set of size {n}")
        best_ell, best_gain = 0, -1.0
        for ell in range(m):
            g = instance.oracles[ell].marginal_gain_mask(masks[ell], j)
            if g > best_gain:
                best_ell, best_gain = ell, g
        masks[best_ell] |= 1 << j
        marginals.append(best_gain)
        choices.append(best_ell)
    multiset = False  # repeats merge into one copy per agent, masks stay disjoint
    seen = 0
    for msk in masks:
        if seen & msk:
            multiset = True
        seen |= msk
    return GreedyRun(tuple(int(j) for j in order),
                     Allocation(tuple(masks), multiset=multiset),
                     tuple(marginals), tuple(choices))


def optimal(instance: Instance, items: Optional[Iterable[int]] = None
            ) -> tuple[Allocation, float, dict[int, int]]:
    """Brute-force welfare maximizer over full assignments of ``items``
    (default: all items).

    Enumerates agent choices in lexicographic order with the first listed
    item as the least significant digit and returns the first maximizer, so
    opt_map is canonical.
    """
    n, m = instance.n, instance.m
    if items is None:
        items = range(n)
    items = [int(j) for j in items]
    for j in items:
        if j < 0 or j >= n:
            raise InvalidQueryError(f"item {j} outside ground set of size {n}")
    if len(set(items)) != len(items):
        raise ValueError("items to assign must be distinct")
    k = len(items)
    total = m ** k
    if total > OPTIMAL_MAX_ASSIGNMENTS:
        raise SizeGuardError(
            f"optimal enumerates m^k assignments; {m}^{k} = {total} exceeds "
            f"{OPTIMAL_MAX_ASSIGNMENTS}")
    best_masks: Optional[list[int]] = None
    best_value = -1.0
    for code in range(total):
        masks = [0] * m
        c = code
        for j in items:
            masks[c % m] |= 1 << j
            c //= m
        v = sum(o.value_mask(msk) for o, msk in zip(instance.oracles, masks))
        if v > best_value:
            best_value, best_masks = v, masks
    alloc = Allocation(tuple(best_masks))
    opt_map = {}
    for ell, msk in enumerate(best_masks):
        for j in mask_items(msk):
            opt_map[j] = ell
    return alloc, float(best_value), opt_map
