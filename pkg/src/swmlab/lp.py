"""Factor-revealing linear programs and an embedded simplex solver.

All models are of the form: minimize c.x subject to A.x >= b, x >= 0.
Coefficients are built as exact rationals so the plain-text export can be
fed to external solvers verbatim; the embedded solver works in floats with
a dense two-phase tableau and Bland's anti-cycling rule.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

import numpy as np

PIVOT_TOL = 1e-9
FEAS_TOL = 1e-9

Rational = Union[int, Fraction]


def _to_fraction(x) -> Fraction:
    """Exact rational from int/Fraction, or the decimal literal of a float
    (so 0.01 becomes 1/100, not its binary approximation)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    return Fraction(str(x))


@dataclass
class LpModel:
    """Dense LP: minimize objective.x with rows.x >= rhs, x >= 0."""

    objective: list[Fraction]
    rows: list[list[Fraction]]
    rhs: list[Fraction]
    var_names: list[str]
    row_names: list[str]
    metadata: dict = field(default_factory=dict)
    constant: Fraction = Fraction(0)   # added to the objective on report

    def __post_init__(self):
        ncols = len(self.var_names)
        if len(self.objective) != ncols:
            raise ValueError("objective length does not match variable count")
        for name, row in zip(self.row_names, self.rows):
            if len(row) != ncols:
                raise ValueError(f"row {name} has wrong width")
        if len(self.rows) != len(self.rhs) or len(self.rows) != len(self.row_names):
            raise ValueError("row, rhs and name counts differ")

    @property
    def num_vars(self) -> int:
        return len(self.var_names)

    @property
    def num_rows(self) -> int:
        return len(self.rows)

    def to_text(self) -> str:
        """One-line-per-constraint listing with exact rational coefficients."""

        def terms(coeffs):
            parts = []
            for c, name in zip(coeffs, self.var_names):
                if c != 0:
                    parts.append(f"{'+' if c > 0 else '-'} {abs(c)} {name}")
            return " ".join(parts) if parts else "0"

        lines = [f"minimize: {terms(self.objective)}"]
        if self.constant:
            lines[0] += f" + {self.constant}"
        for name, row, b in zip(self.row_names, self.rows, self.rhs):
            lines.append(f"{name}: {terms(row)} >= {b}")
        lines.append("bounds: " + ", ".join(f"{v} >= 0" for v in self.var_names))
        return "\n".join(lines) + "\n"


@dataclass
class LpSolution:
    status: str                  # optimal | infeasible | unbounded
    objective: float             # includes the model constant
    x: Optional[np.ndarray]
    max_violation: float
    iterations: int

    def to_dict(self) -> dict:
        return {"status": self.status, "objective": self.objective,
                "x": None if self.x is None else [float(v) for v in self.x],
                "max_violation": self.max_violation,
                "iterations": self.iterations}


# ---------------------------------------------------------------------------
# Model builders
# ---------------------------------------------------------------------------

def _check_n(n: int):
    if n < 4 or n % 4 != 0:
        raise ValueError(f"n must be a multiple of 4 and at least 4, got {n}")


def build_lp_beta(n: int, beta) -> LpModel:
    """The full trace-constraint LP with slack variables for the second half.

    Variables w_i, a_i, b_i for i = 1..n and g_i for i = n/2+1..n; minimize
    sum w_i subject to:
      (1) w_i >= b_i + a_i                                     for all i
      (2) w_i >= 1/n - sum_{j<i} a_j/(n-j)                     for all i
      (3) w_i >= (sum_{j<=n/2}(a_j j/(n-j) - b_j))/(n/2) - g_i for i > n/2
      (4) beta >= sum_{i<=n/2} b_i + sum_{i>n/2} g_i
    """
    _check_n(n)
    return _build_trace_lp(n, _to_fraction(beta), pos_hi=n, sh_lo=n // 2,
                           metadata={"family": "beta", "n": n,
                                     "beta": _to_fraction(beta)})


def build_lp_beta_lambda(n: int, lam, beta) -> LpModel:
    """Relaxation keeping constraint (2) only for i <= lam*n and (3) only
    for i > lam*n; its optimum is at most the full model's."""
    _check_n(n)
    lam = _to_fraction(lam)
    beta = _to_fraction(beta)
    if lam < Fraction(1, 2):
        raise ValueError(f"lambda must be at least 1/2, got {lam}")
    if lam > 1:
        raise ValueError(f"lambda must be at most 1, got {lam}")
    lam_n = lam * n
    if lam_n.denominator != 1:
        raise ValueError(f"lambda*n must be an integer, got {lam}*{n} = {lam_n}")
    return _build_trace_lp(n, beta, pos_hi=int(lam_n), sh_lo=int(lam_n),
                           metadata={"family": "beta_lambda", "n": n,
                                     "lambda": lam, "beta": beta})


def _build_trace_lp(n: int, beta: Fraction, pos_hi: int, sh_lo: int,
                    metadata: dict) -> LpModel:
    """Shared builder: position rows for i <= pos_hi, second-half rows for
    i > sh_lo."""
    half = n // 2

    var_names = ([f"w_{i}" for i in range(1, n + 1)]
                 + [f"a_{i}" for i in range(1, n + 1)]
                 + [f"b_{i}" for i in range(1, n + 1)]
                 + [f"g_{i}" for i in range(half + 1, n + 1)])
    ncols = len(var_names)

    def w(i): return i - 1
    def a(i): return n + i - 1
    def b(i): return 2 * n + i - 1
    def g(i): return 3 * n + (i - half) - 1

    objective = [Fraction(0)] * ncols
    for i in range(1, n + 1):
        objective[w(i)] = Fraction(1)

    rows, rhs, row_names = [], [], []

    for i in range(1, n + 1):
        row = [Fraction(0)] * ncols
        row[w(i)] = Fraction(1)
        row[a(i)] = Fraction(-1)
        row[b(i)] = Fraction(-1)
        rows.append(row)
        rhs.append(Fraction(0))
        row_names.append(f"step_split_{i}")

    for i in range(1, pos_hi + 1):
        row = [Fraction(0)] * ncols
        row[w(i)] = Fraction(1)
        for j in range(1, i):
            row[a(j)] = Fraction(1, n - j)
        rows.append(row)
        rhs.append(Fraction(1, n))
        row_names.append(f"position_{i}")

    for i in range(sh_lo + 1, n + 1):
        row = [Fraction(0)] * ncols
        row[w(i)] = Fraction(1)
        row[g(i)] = Fraction(1)
        for j in range(1, half + 1):
            row[a(j)] = Fraction(-2, n) * Fraction(j, n - j)
            row[b(j)] = Fraction(2, n)
        rows.append(row)
        rhs.append(Fraction(0))
        row_names.append(f"second_half_{i}")

    row = [Fraction(0)] * ncols
    for i in range(1, half + 1):
        row[b(i)] = Fraction(-1)
    for i in range(half + 1, n + 1):
        row[g(i)] = Fraction(-1)
    rows.append(row)
    rhs.append(-beta)
    row_names.append("slack_budget")

    return LpModel(objective, rows, rhs, var_names, row_names, metadata)


def build_lp_general(n: int) -> LpModel:
    """The general lower-bound program over a_i, b_i for i <= 3n/4.

    Minimize sum_{i<=n/2}((1 + (i - n/4)/(6(n-i))) a_i + 5/6 b_i)
           + sum_{n/2<i<=3n/4}((5/6 + (n/4)/(6(n-i))) a_i + 5/6 b_i)
    subject to a_i + b_i >= 1/n - sum_{j<i} a_j/(n-j) for i = 1..3n/4.
    The additive constant 1/24 is carried in ``constant`` and included in
    reported objective values.
    """
    _check_n(n)
    half, three_q = n // 2, 3 * n // 4
    var_names = ([f"a_{i}" for i in range(1, three_q + 1)]
                 + [f"b_{i}" for i in range(1, three_q + 1)])
    ncols = len(var_names)

    def a(i): return i - 1
    def b(i): return three_q + i - 1

    objective = [Fraction(0)] * ncols
    quarter = Fraction(n, 4)
    for i in range(1, half + 1):
        objective[a(i)] = 1 + Fraction(i - quarter, 6 * (n - i))
        objective[b(i)] = Fraction(5, 6)
    for i in range(half + 1, three_q + 1):
        objective[a(i)] = Fraction(5, 6) + Fraction(quarter, 6 * (n - i))
        objective[b(i)] = Fraction(5, 6)

    rows, rhs, row_names = [], [], []
    for i in range(1, three_q + 1):
        row = [Fraction(0)] * ncols
        row[a(i)] = Fraction(1)
        row[b(i)] = Fraction(1)
        for j in range(1, i):
            row[a(j)] = Fraction(1, n - j)
        rows.append(row)
        rhs.append(Fraction(1, n))
        row_names.append(f"position_{i}")

    return LpModel(objective, rows, rhs, var_names, row_names,
                   {"family": "general_lb", "n": n},
                   constant=Fraction(1, 24))


# ---------------------------------------------------------------------------
# Two-phase primal simplex
# ---------------------------------------------------------------------------

def _pivot(tab: np.ndarray, basis: list[int], r: int, c: int):
    tab[r] /= tab[r, c]
    col = tab[:, c].copy()
    col[r] = 0.0
    tab -= np.outer(col, tab[r])
    basis[r] = c


def _bland_iterate(tab: np.ndarray, basis: list[int], ncols: int,
                   max_iter: int) -> tuple[str, int]:
    """Run simplex iterations on a tableau whose last row holds reduced
    costs (to be driven non-negative) and last column the rhs."""
    it = 0
    while True:
        cost = tab[-1, :ncols]
        entering = -1
        for jx in range(ncols):
            if cost[jx] < -PIVOT_TOL:
                entering = jx
                break
        if entering < 0:
            return "optimal", it
        ratios = []
        for r in range(tab.shape[0] - 1):
            if tab[r, entering] > PIVOT_TOL:
                ratios.append((tab[r, -1] / tab[r, entering], basis[r], r))
        if not ratios:
            return "unbounded", it
        ratios.sort(key=lambda t: (t[0], t[1]))   # Bland: lowest basis index
        _pivot(tab, basis, ratios[0][2], entering)
        it += 1
        if it > max_iter:
            raise RuntimeError("simplex iteration limit exceeded")


def simplex_solve(model: LpModel) -> LpSolution:
    """Two-phase dense primal simplex with Bland's rule.

    The model's >= rows get surplus variables; phase 1 drives artificial
    variables out, phase 2 minimizes the true objective.  Reported
    objective includes the model constant.
    """
    m, nv = model.num_rows, model.num_vars
    A = np.array([[float(c) for c in row] for row in model.rows])
    bvec = np.array([float(v) for v in model.rhs])
    cvec = np.array([float(v) for v in model.objective])

    # standard form: [A | -I_surplus] x = b, then flip rows to make b >= 0
    full = np.hstack([A, -np.eye(m)])
    for r in range(m):
        if bvec[r] < 0:
            full[r] *= -1.0
            bvec[r] *= -1.0
    ncols = nv + m
    tab = np.zeros((m + 1, ncols + m + 1))
    tab[:m, :ncols] = full
    tab[:m, ncols:ncols + m] = np.eye(m)       # artificials
    tab[:m, -1] = bvec
    basis = [ncols + r for r in range(m)]

    # phase 1: minimize the artificial sum
    tab[-1, ncols:ncols + m] = 1.0
    for r in range(m):
        tab[-1] -= tab[r]
    status, it1 = _bland_iterate(tab, basis, ncols + m, 10000 * (m + ncols))
    if status != "optimal" or tab[-1, -1] < -FEAS_TOL:
        return LpSolution("infeasible", math.nan, None, math.nan, it1)

    # drive any leftover artificial out of the basis or drop its row
    keep = []
    for r in range(m):
        if basis[r] >= ncols:
            pivot_col = -1
            for jx in range(ncols):
                if abs(tab[r, jx]) > PIVOT_TOL:
                    pivot_col = jx
                    break
            if pivot_col >= 0:
                _pivot(tab[:m + 1], basis, r, pivot_col)
                keep.append(r)
            # else: redundant row, drop it
        else:
            keep.append(r)
    tab = np.vstack([tab[keep][:, list(range(ncols)) + [-1]],
                     np.zeros(ncols + 1)])
    basis = [basis[r] for r in keep]

    # phase 2: true objective
    tab[-1, :nv] = cvec
    for r, bi in enumerate(basis):
        if tab[-1, bi] != 0.0:
            tab[-1] -= tab[-1, bi] * tab[r]
    status, it2 = _bland_iterate(tab, basis, ncols, 10000 * (m + ncols))
    if status == "unbounded":
        return LpSolution("unbounded", -math.inf, None, math.nan, it1 + it2)

    x = np.zeros(ncols)
    for r, bi in enumerate(basis):
        x[bi] = tab[r, -1]
    x = x[:nv]
    rhs0 = np.array([float(v) for v in model.rhs])
    violation = float(np.max(np.maximum(rhs0 - A @ x, 0.0), initial=0.0))
    obj = float(cvec @ x) + float(model.constant)
    return LpSolution("optimal", obj, x, violation, it1 + it2)


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------

# below this lambda the tight-solution structure breaks and the closed form
# stops matching the LP optimum
LAMBDA_THRESHOLD = 9 - math.sqrt(68)


@dataclass(frozen=True)
class ClosedFormBound:
    exact: float        # finite-n LP optimum (clamped at 0)
    asymptotic: float   # n -> infinity lower bound


def closed_form_beta_lambda(n: int, lam, beta) -> ClosedFormBound:
    """Exact optimum of the relaxed LP and its asymptotic limit.

    exact = sum_{i<=lam n}(n-i)/((n-1)n) + (1-lam) n (n/2+1)/(2(n-1)n) - beta,
    clamped below at 0; asymptotic = 1/2 - (1-lam)^2/2 + (1-lam)/4 - beta.
    Refuses lam at or below the structural threshold 9 - sqrt(68).
    """
    _check_n(n)
    lam = _to_fraction(lam)
    beta = _to_fraction(beta)
    if float(lam) <= LAMBDA_THRESHOLD:
        raise ValueError(
            f"lambda = {lam} is not above the threshold 9 - sqrt(68) "
            f"~ {LAMBDA_THRESHOLD:.6f}; the closed form does not apply")
    lam_n = lam * n
    if lam_n.denominator != 1:
        raise ValueError(f"lambda*n must be an integer, got {lam}*{n} = {lam_n}")
    lam_n = int(lam_n)
    exact = (sum(Fraction(n - i, (n - 1) * n) for i in range(1, lam_n + 1))
             + (1 - lam) * n * Fraction(n // 2 + 1, 2 * (n - 1) * n) - beta)
    exact = max(exact, Fraction(0))
    one_minus = 1 - lam
    asym = Fraction(1, 2) - one_minus ** 2 / 2 + one_minus / 4 - beta
    return ClosedFormBound(float(exact), float(asym))


def closed_form_general(n: int) -> float:
    """1/24 + (89 n^2/32 - 15 n/8) / (6 (n-1) n)."""
    _check_n(n)
    if n < 8:
        raise ValueError(f"closed form requires n >= 8, got {n}")
    val = Fraction(1, 24) + (Fraction(89 * n * n, 32) - Fraction(15 * n, 8)) \
        / (6 * (n - 1) * n)
    return float(val)


GENERAL_LIMIT = Fraction(1, 24) + Fraction(89, 192)   # = 97/192

# the two curves 1/2 + beta/2 and 0.5312 - beta cross here
COMBINED_BETA_STAR = float(2 * Fraction(312, 10000) / 3)


def combined_secondorder_bound() -> float:
    """max over beta >= 0 of min(1/2 + beta/2, 0.5312 - beta) = 0.5104."""
    return float(Fraction(1, 2) + Fraction(312, 10000) / 3)
