"""Gain instrumentation for greedy allocation traces.

For a fixed reference (optimal) allocation and indexing permutation sigma,
Gain(j, A) measures how much item j could still add by going to its
reference agent, given the current allocation A plus the reference agent's
earlier-sigma reference items.  The trace vectors w_i, a_i, b_i record, per
arrival position, greedy's welfare increment and the Gain reduction it
inflicts on already-arrived (b) and future (a) items; beta = sum of b_i.

Everything here enumerates permutations exhaustively on small instances or
samples them with a seeded generator, so results are reproducible.
"""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import Allocation, GreedyRun, Instance, greedy, optimal, union, welfare
from .errors import InvalidQueryError, SizeGuardError
from .oracles import mask_items

EXACT_TRACE_MAX_N = 8      # n! enumeration cap for expected_trace
LEMMA_MAX_N = 7            # verify_lemmas / conjecture_check cap
SECOND_HALF_MAX_N = 6      # verify_second_half caps
SECOND_HALF_MAX_M = 3
SWEEP_CHUNKS = 64          # fixed chunking keeps results independent of threads
DEFAULT_TOL = 1e-12
IDENTITY_TOL = 1e-10


class GainContext:
    """Instance plus the reference allocation and sigma that define Gain."""

    def __init__(self, instance: Instance,
                 opt_allocation: Optional[Allocation] = None,
                 sigma: Optional[Sequence[int]] = None):
        self.instance = instance
        n, m = instance.n, instance.m
        if opt_allocation is None:
            opt_allocation, opt_value, opt_map = optimal(instance)
        else:
            if opt_allocation.assigned_mask != (1 << n) - 1:
                raise ValueError("reference allocation must assign every item")
            opt_value = welfare(instance, opt_allocation)
            opt_map = {}
            for ell, msk in enumerate(opt_allocation.masks):
                for j in mask_items(msk):
                    opt_map[j] = ell
        self.opt_allocation = opt_allocation
        self.opt_value = float(opt_value)
        self.opt_map = opt_map
        if sigma is None:
            sigma = tuple(range(n))
        else:
            sigma = tuple(int(x) for x in sigma)
            if sorted(sigma) != list(range(n)):
                raise ValueError("sigma must be a permutation of the items")
        self.sigma = sigma

        # prior[j] = reference agent's reference items strictly before j in sigma
        self._prior = [0] * n
        before = 0
        for j in sigma:
            self._prior[j] = opt_allocation.masks[opt_map[j]] & before
            before |= 1 << j
        self._agent_items = [tuple(j for j in range(n) if opt_map[j] == ell)
                             for ell in range(m)]

    @property
    def n(self) -> int:
        return self.instance.n

    @property
    def m(self) -> int:
        return self.instance.m

    def gain_masks(self, j: int, masks: Sequence[int]) -> float:
        ell = self.opt_map[j]
        base = masks[ell] | self._prior[j]
        return self.instance.oracles[ell].marginal_gain_mask(base, j)

    def gain_set_masks(self, items, masks: Sequence[int]) -> float:
        return sum(self.gain_masks(j, masks) for j in items)


def gain(ctx: GainContext, j: int, a: Allocation) -> float:
    """Gain(j, A) per the fixed reference allocation and sigma."""
    if a.m != ctx.m:
        raise ValueError("allocation agent count mismatch")
    if j < 0 or j >= ctx.n:
        raise InvalidQueryError(f"item {j} outside ground set of size {ctx.n}")
    return ctx.gain_masks(j, a.masks)


def gain_set(ctx: GainContext, s, a: Allocation) -> float:
    """Gain(S, A) = sum of Gain(j, A) over j in S."""
    return sum(gain(ctx, j, a) for j in s)


@dataclass
class TraceOne:
    """Trace vectors for a single arrival order (not yet averaged)."""

    order: tuple[int, ...]
    w: np.ndarray
    a: np.ndarray
    b: np.ndarray
    gain_before: np.ndarray        # Gain(pi_i, A^{i-1}) per position
    welfare: float
    gains_initial: np.ndarray      # Gain(j, empty) per item
    gains_half: Optional[np.ndarray]  # Gain(j, A^G(S1)) per item, n even only


def trace_one(ctx: GainContext, order: Sequence[int]) -> TraceOne:
    """Run greedy along one order and split each step's Gain reduction into
    the part hitting already-arrived items (b) and future items (a).

    The arriving item itself counts as arrived, so its own Gain drop lands
    in b.  Only items whose reference agent is the chosen agent can change,
    which keeps the update incremental.
    """
    inst, n, m = ctx.instance, ctx.n, ctx.m
    order = tuple(int(j) for j in order)
    if sorted(order) != list(range(n)):
        raise ValueError("trace_one requires a permutation of the items")
    masks = [0] * m
    gains = [ctx.gain_masks(j, masks) for j in range(n)]
    gains_initial = np.array(gains)
    gains_half = None
    half = n // 2 if n % 2 == 0 else None
    w = np.zeros(n)
    av = np.zeros(n)
    bv = np.zeros(n)
    gb = np.zeros(n)
    arrived = 0
    for pos, j in enumerate(order):
        best_ell, best_gain = 0, -1.0
        for ell in range(m):
            g = inst.oracles[ell].marginal_gain_mask(masks[ell], j)
            if g > best_gain:
                best_ell, best_gain = ell, g
        gb[pos] = gains[j]
        arrived |= 1 << j
        masks[best_ell] |= 1 << j
        w[pos] = best_gain
        bi = ai = 0.0
        for k in ctx._agent_items[best_ell]:
            new = ctx.gain_masks(k, masks)
            d = gains[k] - new
            if d != 0.0:
                if arrived >> k & 1:
                    bi += d
                else:
                    ai += d
                gains[k] = new
        bv[pos] = bi
        av[pos] = ai
        if half is not None and pos + 1 == half:
            gains_half = np.array(gains)
    return TraceOne(order, w, av, bv, gb, float(w.sum()),
                    gains_initial, gains_half)


@dataclass
class GainTrace:
    """Expected trace vectors, exact or Monte-Carlo.

    ``w``, ``a``, ``b`` are normalized so the reference optimum is 1; the
    raw (unnormalized) vectors are kept alongside.  ``beta`` is the
    normalized sum of b.  In MC mode ``stderr`` holds standard-error
    estimates for the ratio and the vectors.
    """

    n: int
    opt_value: float
    mode: str
    w: np.ndarray
    a: np.ndarray
    b: np.ndarray
    raw_w: np.ndarray
    raw_a: np.ndarray
    raw_b: np.ndarray
    samples: Optional[int] = None
    seed: Optional[int] = None
    stderr: Optional[dict] = None

    @property
    def beta(self) -> float:
        return float(self.b.sum())

    @property
    def expected_welfare(self) -> float:
        return float(self.raw_w.sum())

    @property
    def ratio(self) -> float:
        return float(self.w.sum())

    def to_dict(self) -> dict:
        out = {
            "n": self.n,
            "opt_value": self.opt_value,
            "mode": self.mode,
            "w": [float(x) for x in self.w],
            "a": [float(x) for x in self.a],
            "b": [float(x) for x in self.b],
            "raw_w": [float(x) for x in self.raw_w],
            "raw_a": [float(x) for x in self.raw_a],
            "raw_b": [float(x) for x in self.raw_b],
            "beta": self.beta,
            "expected_welfare": self.expected_welfare,
            "ratio": self.ratio,
        }
        if self.samples is not None:
            out["samples"] = self.samples
        if self.seed is not None:
            out["seed"] = self.seed
        if self.stderr is not None:
            out["stderr"] = {k: ([float(x) for x in v]
                                 if isinstance(v, np.ndarray) else float(v))
                             for k, v in self.stderr.items()}
        return out

    def to_csv(self) -> str:
        lines = ["i,w,a,b"]
        for i in range(self.n):
            lines.append(f"{i + 1},{float(self.w[i])!r},"
                         f"{float(self.a[i])!r},{float(self.b[i])!r}")
        return "\n".join(lines) + "\n"


def _chunk_ranges(total: int) -> list[tuple[int, int]]:
    chunks = min(SWEEP_CHUNKS, total) or 1
    bounds = [total * c // chunks for c in range(chunks + 1)]
    return [(bounds[c], bounds[c + 1]) for c in range(chunks)
            if bounds[c] < bounds[c + 1]]


def _run_chunks(worker, total: int, threads: int):
    """Run worker(lo, hi) over fixed chunk ranges, reducing in chunk order.

    The chunking does not depend on the thread count, so results are
    identical for any number of threads.
    """
    ranges = _chunk_ranges(total)
    if threads <= 1:
        return [worker(lo, hi) for lo, hi in ranges]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(worker, lo, hi) for lo, hi in ranges]
        return [f.result() for f in futures]


def _mc_order(seed: int, k: int, n: int) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed,
                                                       spawn_key=(k,)))
    return rng.permutation(n)


def expected_trace(ctx: GainContext, mode: str = "exact",
                   samples: int = 10_000, seed: int = 0,
                   threads: int = 1) -> GainTrace:
    """Average trace_one over all n! orders (exact) or seeded samples (MC)."""
    n = ctx.n
    if mode == "exact":
        if n > EXACT_TRACE_MAX_N:
            raise SizeGuardError(
                f"exact expectation enumerates n! orders; n={n} exceeds "
                f"{EXACT_TRACE_MAX_N}")
        total = math.factorial(n)

        def worker(lo, hi):
            sw = np.zeros(n)
            sa = np.zeros(n)
            sb = np.zeros(n)
            perms = itertools.islice(itertools.permutations(range(n)), lo, hi)
            for order in perms:
                t = trace_one(ctx, order)
                sw += t.w
                sa += t.a
                sb += t.b
            return sw, sa, sb

        parts = _run_chunks(worker, total, threads)
        sw = sum(p[0] for p in parts)
        sa = sum(p[1] for p in parts)
        sb = sum(p[2] for p in parts)
        raw_w, raw_a, raw_b = sw / total, sa / total, sb / total
        return GainTrace(n, ctx.opt_value, "exact",
                         raw_w / ctx.opt_value, raw_a / ctx.opt_value,
                         raw_b / ctx.opt_value, raw_w, raw_a, raw_b)

    if mode in ("mc", "monte_carlo"):
        if samples < 1:
            raise ValueError("samples must be positive")

        def worker(lo, hi):
            sw = np.zeros(n)
            sa = np.zeros(n)
            sb = np.zeros(n)
            sw2 = np.zeros(n)
            sa2 = np.zeros(n)
            sb2 = np.zeros(n)
            swel = swel2 = 0.0
            for k in range(lo, hi):
                t = trace_one(ctx, _mc_order(seed, k, n))
                sw += t.w
                sa += t.a
                sb += t.b
                sw2 += t.w * t.w
                sa2 += t.a * t.a
                sb2 += t.b * t.b
                swel += t.welfare
                swel2 += t.welfare * t.welfare
            return sw, sa, sb, sw2, sa2, sb2, swel, swel2

        parts = _run_chunks(worker, samples, threads)
        sums = [sum(p[i] for p in parts) for i in range(8)]
        sw, sa, sb, sw2, sa2, sb2, swel, swel2 = sums
        raw_w, raw_a, raw_b = sw / samples, sa / samples, sb / samples

        def se(s, s2):
            var = np.maximum(s2 / samples - (s / samples) ** 2, 0.0)
            return np.sqrt(var / samples)

        stderr = {
            "w": se(sw, sw2) / ctx.opt_value,
            "a": se(sa, sa2) / ctx.opt_value,
            "b": se(sb, sb2) / ctx.opt_value,
            "ratio": float(se(np.array(swel), np.array(swel2))) / ctx.opt_value,
        }
        return GainTrace(n, ctx.opt_value, "monte_carlo",
                         raw_w / ctx.opt_value, raw_a / ctx.opt_value,
                         raw_b / ctx.opt_value, raw_w, raw_a, raw_b,
                         samples=samples, seed=seed, stderr=stderr)

    raise ValueError(f"unknown mode {mode!r}; use 'exact' or 'mc'")


# ---------------------------------------------------------------------------
# Per-lemma verification
# ---------------------------------------------------------------------------

@dataclass
class LemmaReport:
    """Verdicts for the per-step bounds, the expectation bounds, and the
    prefix identities (the latter only for even n)."""

    n: int
    m: int
    step_lower_bound_ok: bool          # marginal >= Gain of the arriving item
    step_reduction_ok: bool            # marginal >= total Gain reduction caused
    ratio_bound_ok: bool               # ratio >= 1/2 and >= 1/2 + beta/2
    position_bound_ok: bool            # w_i >= 1/n - sum_{j<i} a_j/(n-j)
    prefix_identities_ok: Optional[bool]  # the two half-prefix identities
    ratio: float
    beta: float
    violations: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return (self.step_lower_bound_ok and self.step_reduction_ok
                and self.ratio_bound_ok and self.position_bound_ok
                and self.prefix_identities_ok is not False)

    def to_dict(self) -> dict:
        return {"n": self.n, "m": self.m, "passed": self.passed,
                "step_lower_bound_ok": self.step_lower_bound_ok,
                "step_reduction_ok": self.step_reduction_ok,
                "ratio_bound_ok": self.ratio_bound_ok,
                "position_bound_ok": self.position_bound_ok,
                "prefix_identities_ok": self.prefix_identities_ok,
                "ratio": self.ratio, "beta": self.beta,
                "violations": [repr(v) for v in self.violations],
                "details": {k: (float(v) if np.isscalar(v) else
                                [float(x) for x in v])
                            for k, v in self.details.items()}}


def verify_lemmas(ctx: GainContext, tol: float = DEFAULT_TOL,
                  identity_tol: float = IDENTITY_TOL) -> LemmaReport:
    """Exhaustively check the per-permutation and expectation bounds.

    Per permutation: each greedy marginal is at least the arriving item's
    Gain, and at least the total Gain reduction the step causes.  In
    expectation (optimum normalized to 1): ratio >= 1/2 + beta/2, and
    w_i >= 1/n - sum_{j<i} a_j/(n-j) for every position.  For even n the
    two half-prefix identities are checked as equalities.
    """
    n, m = ctx.n, ctx.m
    if n > LEMMA_MAX_N:
        raise SizeGuardError(f"verify_lemmas enumerates n! orders; n={n} "
                             f"exceeds {LEMMA_MAX_N}")
    total = math.factorial(n)
    sw = np.zeros(n)
    sa = np.zeros(n)
    sb = np.zeros(n)
    lhs1 = lhs2 = 0.0
    violations = []
    step_lb_ok = step_red_ok = True
    half = n // 2 if n % 2 == 0 else None
    for order in itertools.permutations(range(n)):
        t = trace_one(ctx, order)
        sw += t.w
        sa += t.a
        sb += t.b
        for i in range(n):
            if t.w[i] < t.gain_before[i] - tol:
                step_lb_ok = False
                violations.append(("step_lower_bound", order, i,
                                   float(t.w[i]), float(t.gain_before[i])))
            if t.w[i] < t.a[i] + t.b[i] - tol:
                step_red_ok = False
                violations.append(("step_reduction", order, i,
                                   float(t.w[i]), float(t.a[i] + t.b[i])))
        if half is not None:
            first = t.order[:half]
            second = t.order[half:]
            lhs1 += sum(t.gains_initial[j] - t.gains_half[j] for j in second)
            lhs2 += sum(t.gains_initial[j] - t.gains_half[j] for j in first)
    opt = ctx.opt_value
    w = sw / (total * opt)
    a = sa / (total * opt)
    b = sb / (total * opt)
    ratio = float(w.sum())
    beta = float(b.sum())
    ratio_ok = ratio >= 0.5 - tol and ratio >= 0.5 + beta / 2 - tol
    if not ratio_ok:
        violations.append(("ratio_bound", ratio, beta))

    position_ok = True
    acc = 0.0
    for i in range(n):
        lower = 1.0 / n - acc
        if w[i] < lower - tol:
            position_ok = False
            violations.append(("position_bound", i + 1, float(w[i]), lower))
        if i + 1 < n:
            acc += a[i] / (n - (i + 1))  # positions are 1-based: a_j/(n-j)

    details = {"w": w, "a": a, "b": b}
    identities_ok: Optional[bool] = None
    if half is not None:
        lhs1 /= total * opt
        lhs2 /= total * opt
        rhs1 = sum(a[j - 1] * (n / 2) / (n - j) for j in range(1, half + 1))
        rhs2 = sum(a[j - 1] * (n / 2 - j) / (n - j) + b[j - 1]
                   for j in range(1, half + 1))
        identities_ok = bool(abs(lhs1 - rhs1) <= identity_tol
                             and abs(lhs2 - rhs2) <= identity_tol)
        if not identities_ok:
            violations.append(("prefix_identity", lhs1, rhs1, lhs2, rhs2))
        details.update(identity1_lhs=lhs1, identity1_rhs=rhs1,
                       identity2_lhs=lhs2, identity2_rhs=rhs2)

    return LemmaReport(n, m, step_lb_ok, step_red_ok, ratio_ok, position_ok,
                       identities_ok, ratio, beta, violations, details)


# ---------------------------------------------------------------------------
# Concatenated allocation A' and its expectation bound
# ---------------------------------------------------------------------------

def build_A_prime(ctx: GainContext, order: Sequence[int]
                  ) -> tuple[Allocation, float]:
    """Union of three allocations built from one order split as
    S1 (first n/2), S2 (next n/4), S3 (last n/4): greedy on the full order,
    greedy on (S2, S3) alone, and the optimum restricted to S2.

    Returns the unioned allocation and its welfare margin over greedy's
    allocation of S1 alone.
    """
    inst, n = ctx.instance, ctx.n
    if n % 4 != 0:
        raise ValueError(f"order length must be divisible by 4, got n={n}")
    order = tuple(int(j) for j in order)
    if sorted(order) != list(range(n)):
        raise ValueError("order must be a permutation of the items")
    half, three_q = n // 2, 3 * n // 4
    s1, s2 = order[:half], order[half:three_q]
    g_full = greedy(inst, order)
    g_23 = greedy(inst, order[half:])
    opt_s2, _, _ = optimal(inst, items=sorted(s2))
    a_prime = union(union(g_full.allocation, g_23.allocation), opt_s2)
    g_s1 = greedy(inst, s1)
    margin = welfare(inst, a_prime) - welfare(inst, g_s1.allocation)
    return a_prime, float(margin)


@dataclass
class Eq1Report:
    n: int
    m: int
    lhs: float
    rhs: float
    passed: bool

    @property
    def margin(self) -> float:
        return self.lhs - self.rhs

    def to_dict(self) -> dict:
        return {"n": self.n, "m": self.m, "lhs": self.lhs, "rhs": self.rhs,
                "margin": self.margin, "passed": self.passed}


def verify_eq1(ctx: GainContext, tol: float = IDENTITY_TOL) -> Eq1Report:
    """Check, in expectation over all orders with the optimum normalized
    to 1, that the unioned allocation's margin over greedy-on-S1 is at least
    1/4 + sum_{i<=n/2}((i - n/4)/(n - i) a_i - b_i)
        + sum_{n/2<i<=3n/4} (n/4)/(n - i) a_i.
    """
    n = ctx.n
    if n % 4 != 0:
        raise ValueError(f"n must be divisible by 4, got {n}")
    if n > EXACT_TRACE_MAX_N:
        raise SizeGuardError(f"exact enumeration capped at n={EXACT_TRACE_MAX_N}")
    total = math.factorial(n)
    lhs_sum = 0.0
    for order in itertools.permutations(range(n)):
        lhs_sum += build_A_prime(ctx, order)[1]
    lhs = lhs_sum / (total * ctx.opt_value)
    trace = expected_trace(ctx, mode="exact")
    a, b = trace.a, trace.b
    half, three_q = n // 2, 3 * n // 4
    rhs = 0.25
    for i in range(1, half + 1):
        rhs += (i - n / 4) / (n - i) * a[i - 1] - b[i - 1]
    for i in range(half + 1, three_q + 1):
        rhs += (n / 4) / (n - i) * a[i - 1]
    return Eq1Report(n, ctx.m, float(lhs), float(rhs),
                     bool(lhs >= rhs - tol))


# ---------------------------------------------------------------------------
# Second-half machinery: best counterfactual allocation, X and Y_i
# ---------------------------------------------------------------------------

@dataclass
class SecondHalfReport:
    n: int
    m: int
    ex_x: float
    reduction_rhs: float
    reduction_ok: bool                    # E[X] >= sum (a_j j/(n-j) - b_j)
    second_order_supermodular: bool
    recursion_ok: Optional[bool]          # E[Y_{i+1}] >= (n-i)/(n-i+1) E[Y_i] - b_i
    slack_ok: Optional[bool]              # sum g_i <= sum_{i>n/2} b_i
    ex_y: Optional[np.ndarray] = None
    g: Optional[np.ndarray] = None
    note: str = ""

    @property
    def passed(self) -> bool:
        return (self.reduction_ok and self.recursion_ok is not False
                and self.slack_ok is not False)

    def to_dict(self) -> dict:
        return {"n": self.n, "m": self.m, "passed": self.passed,
                "ex_x": self.ex_x, "reduction_rhs": self.reduction_rhs,
                "reduction_ok": self.reduction_ok,
                "second_order_supermodular": self.second_order_supermodular,
                "recursion_ok": self.recursion_ok, "slack_ok": self.slack_ok,
                "ex_y": None if self.ex_y is None else
                        [float(x) for x in self.ex_y],
                "g": None if self.g is None else [float(x) for x in self.g],
                "note": self.note}


def verify_second_half(ctx: GainContext, tol: float = IDENTITY_TOL
                       ) -> SecondHalfReport:
    """Exhaustively verify the second-half bounds.

    For each order, the best full assignment of the second-half items (the
    one maximizing the Gain reduction on the first half, given greedy's
    allocation of the first half) defines X, and its suffix restrictions
    define Y_i.  Checks: E[X] >= sum_{j<=n/2}(a_j j/(n-j) - b_j) for any
    oracles; the Y recursion and the slack/b inequality additionally, when
    every agent's oracle is second-order supermodular.
    """
    from .oracles import classify_second_order

    inst, n, m = ctx.instance, ctx.n, ctx.m
    if n % 2 != 0:
        raise ValueError(f"n must be even, got {n}")
    if n > SECOND_HALF_MAX_N or m > SECOND_HALF_MAX_M:
        raise SizeGuardError(
            f"verify_second_half capped at n <= {SECOND_HALF_MAX_N}, "
            f"m <= {SECOND_HALF_MAX_M} (got n={n}, m={m})")
    half = n // 2
    supermodular = all(
        classify_second_order(o).is_second_order_supermodular
        for o in inst.oracles)

    total = math.factorial(n)
    sum_x = 0.0
    sum_y = np.zeros(half)            # Y_i for i = n/2+1 .. n
    sa = np.zeros(n)
    sb = np.zeros(n)
    for order in itertools.permutations(range(n)):
        t = trace_one(ctx, order)
        sa += t.a
        sb += t.b
        first, rest = order[:half], order[half:]

        prefix = [(0,) * m]           # greedy agent masks after 0..n items
        masks = [0] * m
        for j in order:
            best_ell, best_gain = 0, -1.0
            for ell in range(m):
                g = inst.oracles[ell].marginal_gain_mask(masks[ell], j)
                if g > best_gain:
                    best_ell, best_gain = ell, g
            masks[best_ell] |= 1 << j
            prefix.append(tuple(masks))

        base = prefix[half]
        g_base = ctx.gain_set_masks(first, base)
        best_code, best_red = 0, -1.0
        for code in range(m ** half):
            c = code
            hat = [0] * m
            for j in rest:
                hat[c % m] |= 1 << j
                c //= m
            red = g_base - ctx.gain_set_masks(
                first, [b | h for b, h in zip(base, hat)])
            if red > best_red:
                best_code, best_red = code, red
        sum_x += best_red

        hat_agent = {}
        c = best_code
        for j in rest:
            hat_agent[j] = c % m
            c //= m
        # Y_i = Gain(S1, A^G_{i-1}) - Gain(S1, A^G_{i-1} + hat suffix from i)
        for i in range(half + 1, n + 1):
            before = prefix[i - 1]
            hat = [0] * m
            for pos in range(i - 1, n):
                j = order[pos]
                hat[hat_agent[j]] |= 1 << j
            y = (ctx.gain_set_masks(first, before)
                 - ctx.gain_set_masks(first,
                                      [b | h for b, h in zip(before, hat)]))
            sum_y[i - half - 1] += y

    ex_x = sum_x / total
    ex_y = sum_y / total
    a = sa / total
    b = sb / total
    rhs = sum(a[j - 1] * j / (n - j) - b[j - 1] for j in range(1, half + 1))
    reduction_ok = ex_x >= rhs - tol

    recursion_ok = slack_ok = None
    g = None
    if supermodular:
        recursion_ok = True
        for i in range(half + 1, n):   # relates Y_i and Y_{i+1}
            lhs = ex_y[i - half]
            bound = (n - i) / (n - i + 1) * ex_y[i - half - 1] - b[i - 1]
            if lhs < bound - tol:
                recursion_ok = False
        g = np.array([ex_x / half - ex_y[i - half - 1] / (n - i + 1)
                      for i in range(half + 1, n + 1)])
        slack_ok = bool(g.sum() <= b[half:].sum() + tol)

    note = "" if supermodular else \
        "recursion and slack checks skipped: not second-order supermodular"
    return SecondHalfReport(n, m, float(ex_x), float(rhs), bool(reduction_ok),
                            supermodular, recursion_ok, slack_ok, ex_y, g,
                            note)


# ---------------------------------------------------------------------------
# Move/copy permutation conjecture
# ---------------------------------------------------------------------------

@dataclass
class ConjectureReport:
    n: int
    m: int
    lhs: float                 # E[sum_i last marginal with pi_i copied to end]
    rhs: float                 # E[sum_i last marginal with pi_i moved to end]
    crosscheck: float          # n * E[last marginal], must equal rhs
    mode: str
    samples: Optional[int] = None
    seed: Optional[int] = None
    counterexample: bool = False

    @property
    def gap(self) -> float:
        return self.rhs - self.lhs

    @property
    def crosscheck_error(self) -> float:
        return abs(self.rhs - self.crosscheck)

    def to_dict(self) -> dict:
        return {"n": self.n, "m": self.m, "lhs": self.lhs, "rhs": self.rhs,
                "gap": self.gap, "crosscheck": self.crosscheck,
                "crosscheck_error": self.crosscheck_error, "mode": self.mode,
                "samples": self.samples, "seed": self.seed,
                "counterexample": self.counterexample}


def _conjecture_terms(inst: Instance, order) -> tuple[float, float, float]:
    """(copy-sum, move-sum, last marginal) for one order."""
    n, m = inst.n, inst.m
    run = greedy(inst, order)
    final = run.allocation.masks
    copy_sum = 0.0
    for j in order:
        copy_sum += max(inst.oracles[ell].marginal_gain_mask(final[ell], j)
                        for ell in range(m))
    move_sum = 0.0
    for i in range(n):
        moved = order[:i] + order[i + 1:] + (order[i],)
        move_sum += greedy(inst, moved).marginals[-1]
    return copy_sum, move_sum, run.marginals[-1]


def conjecture_check(instance: Instance, mode: str = "exact",
                     samples: int = 1000, seed: int = 0,
                     tol: float = IDENTITY_TOL) -> ConjectureReport:
    """Compare the expected total last-marginal under copy-to-end versus
    move-to-end reorderings.

    A negative gap is reported as a counterexample, never asserted; the
    move-side expectation is cross-checked against n times the expected
    last marginal, which is an exact identity under full enumeration.
    """
    n, m = instance.n, instance.m
    if mode == "exact":
        if n > LEMMA_MAX_N:
            raise SizeGuardError(f"exact mode enumerates n! orders; n={n} "
                                 f"exceeds {LEMMA_MAX_N}")
        total = math.factorial(n)
        lhs_sum = rhs_sum = last_sum = 0.0
        for order in itertools.permutations(range(n)):
            c, mv, last = _conjecture_terms(instance, order)
            lhs_sum += c
            rhs_sum += mv
            last_sum += last
        lhs, rhs = lhs_sum / total, rhs_sum / total
        cross = n * last_sum / total
        return ConjectureReport(n, m, lhs, rhs, cross, "exact",
                                counterexample=lhs > rhs + tol)
    if mode in ("mc", "monte_carlo"):
        lhs_sum = rhs_sum = last_sum = 0.0
        for k in range(samples):
            order = tuple(int(x) for x in _mc_order(seed, k, n))
            c, mv, last = _conjecture_terms(instance, order)
            lhs_sum += c
            rhs_sum += mv
            last_sum += last
        lhs, rhs = lhs_sum / samples, rhs_sum / samples
        cross = n * last_sum / samples
        return ConjectureReport(n, m, lhs, rhs, cross, "monte_carlo",
                                samples=samples, seed=seed,
                                counterexample=lhs > rhs + tol)
    raise ValueError(f"unknown mode {mode!r}; use 'exact' or 'mc'")
