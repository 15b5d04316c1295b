"""Perturbation machinery and weighted-welfare maximization.

Integer-valued instances are perturbed by small per-entry rational
subtractions chosen deterministically so that the perturbed values are
non-degenerate: no entry is zero and no agent-item cycle has an
alternating value-ratio product of one.  Welfare maximization then uses
eta-shifted weights, and Pareto optimality of a candidate partition is
decided by exact rational linear-inequality feasibility.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .core import (
    Allocation,
    BudgetExceededError,
    Instance,
    as_rational,
)

CYCLE_BUDGET = 10**7


@dataclass(frozen=True)
class PerturbParams:
    """Perturbation bounds for an integer-valued instance."""

    lambda_lb: Fraction
    Lambda: Fraction
    omega_lb: Fraction
    eta: Fraction
    epsilon: Fraction

    def __post_init__(self):
        if self.eta <= 0:
            raise ValueError("eta must be positive")
        if self.eta * 2 * self.Lambda > self.lambda_lb:
            raise ValueError("eta exceeds lambda_lb / (2 * Lambda * n)")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")


@dataclass(frozen=True)
class WeightVector:
    """A point of the standard simplex with exact rational entries."""

    weights: tuple

    def __post_init__(self):
        ws = tuple(as_rational(w) for w in self.weights)
        if any(w < 0 for w in ws):
            raise ValueError("weights must be nonnegative")
        if sum(ws) != 1:
            raise ValueError("weights must sum to exactly 1")
        object.__setattr__(self, "weights", ws)

    @property
    def n(self) -> int:
        return len(self.weights)

    def support(self):
        return [i for i, w in enumerate(self.weights) if w > 0]


@dataclass(frozen=True)
class PerturbedInstance:
    """An instance plus its perturbation matrix and parameters."""

    base: Instance
    eps_matrix: tuple  # tuple[tuple[Fraction, ...], ...]
    params: PerturbParams

    def __post_init__(self):
        eps = tuple(tuple(as_rational(e) for e in row) for row in self.eps_matrix)
        if len(eps) != self.base.num_agents or any(
            len(row) != self.base.num_items for row in eps
        ):
            raise ValueError("eps matrix shape mismatch")
        object.__setattr__(self, "eps_matrix", eps)
        pert = tuple(
            tuple(
                self.base.values[i][t] - eps[i][t]
                for t in range(self.base.num_items)
            )
            for i in range(self.base.num_agents)
        )
        object.__setattr__(self, "_pert", pert)

    @property
    def pert_values(self) -> tuple:
        return self._pert

    def pert_value(self, agent: int, item: int) -> Fraction:
        return self._pert[agent][item]

    def pert_bundle_value(self, agent: int, bundle) -> Fraction:
        row = self._pert[agent]
        return sum((row[t] for t in bundle), Fraction(0))


@dataclass(frozen=True)
class TieGraph:
    """Bipartite agent/tie-item graph of the demand structure."""

    num_agents: int
    tie_items: tuple
    edges: frozenset  # frozenset[tuple[int, int]] of (agent, item)

    def is_acyclic(self) -> bool:
        parent: Dict[object, object] = {}

        def find(x):
            while parent.setdefault(x, x) != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for (i, t) in sorted(self.edges):
            ra, rt = find(("a", i)), find(("t", t))
            if ra == rt:
                return False
            parent[ra] = rt
        return True


def compute_params(inst: Instance) -> PerturbParams:
    """Perturbation parameters for an integer-valued instance.

    Integrality gives lower bounds of 1 on both the minimum envy gap and
    the minimum welfare gap; the maximum envy is computed exactly per
    agent as the value spread between its goods and its chores.
    """
    n, m = inst.num_agents, inst.num_items
    for row in inst.values:
        for v in row:
            if v.denominator != 1:
                raise ValueError("compute_params requires integer values")
    lambda_lb = Fraction(1)
    omega_lb = Fraction(1)
    spread = max(
        (sum((abs(v) for v in row), Fraction(0)) for row in inst.values),
    )
    Lambda = spread if spread > 0 else Fraction(1)
    eta = lambda_lb / (2 * Lambda * n)
    epsilon = eta / (8 * n * max(m, 1)) * min(lambda_lb, omega_lb, Fraction(1))
    return PerturbParams(lambda_lb, Lambda, omega_lb, eta, epsilon)


def _cycle_count(n: int, m: int) -> int:
    """Number of (directed, agent-anchored) bipartite cycle traversals."""
    import math

    total = 0
    for k in range(2, min(n, m) + 1):
        total += (
            math.comb(n, k)
            * math.factorial(k - 1)
            * math.comb(m, k)
            * math.factorial(k)
        )
    return total


def check_nondegenerate(values, budget: int = CYCLE_BUDGET) -> bool:
    """Decide the two non-degeneracy conditions by exhaustive enumeration.

    ``values`` is an n x m matrix of rationals.  Condition (i): no zero
    entry.  Condition (ii): every simple cycle of the complete agent-item
    bipartite graph has alternating value-ratio product != 1.
    """
    vals = [[as_rational(v) for v in row] for row in values]
    n = len(vals)
    m = len(vals[0]) if n else 0
    if any(v == 0 for row in vals for v in row):
        return False
    if _cycle_count(n, m) > budget:
        raise BudgetExceededError("too many bipartite cycles to enumerate")
    for k in range(2, min(n, m) + 1):
        for agents in itertools.combinations(range(n), k):
            first, rest = agents[0], agents[1:]
            for aperm in itertools.permutations(rest):
                aseq = (first,) + aperm
                for items in itertools.combinations(range(m), k):
                    for iseq in itertools.permutations(items):
                        prod = Fraction(1)
                        for idx in range(k):
                            nxt = aseq[(idx + 1) % k]
                            prod *= Fraction(
                                vals[nxt][iseq[idx]], 1
                            ) / vals[aseq[idx]][iseq[idx]]
                        if prod == 1:
                            return False
    return True


def _forbidden_eps(inst, pert, agent, item, is_set):
    """Perturbation values for (agent, item) ruled out by already-set cycles.

    Enumerates every simple bipartite cycle through the edge (agent, item)
    whose other edges are all set, and solves the product-one equation for
    the single unknown perturbed value.
    """
    n, m = inst.num_agents, inst.num_items
    forbidden = {inst.values[agent][item]}  # eps = v would zero the entry
    max_k = min(n, m)
    # entries are set in row-major order, so only rows before `agent` are
    # fully set and can participate in a closable cycle
    other_agents = list(range(agent))
    other_items = [b for b in range(m) if b != item]
    for k in range(2, max_k + 1):
        if len(other_agents) < k - 1 or len(other_items) < k - 1:
            continue
        for aperm in itertools.permutations(other_agents, k - 1):
            aseq = (agent,) + aperm
            for iperm in itertools.permutations(other_items, k - 1):
                iseq = (item,) + iperm
                # edges: (aseq[l], iseq[l]) and (aseq[l+1], iseq[l])
                ok = True
                for idx in range(k):
                    nxt = aseq[(idx + 1) % k]
                    if (aseq[idx], iseq[idx]) != (agent, item) and not is_set(
                        aseq[idx], iseq[idx]
                    ):
                        ok = False
                        break
                    if not is_set(nxt, iseq[idx]) and (nxt, iseq[idx]) != (
                        agent,
                        item,
                    ):
                        ok = False
                        break
                if not ok:
                    continue
                # product over l of pert[aseq[l+1]][iseq[l]] / pert[aseq[l]][iseq[l]]
                # equals 1; the unknown pert[agent][item] sits at l = 0 in the
                # denominator, so solve for it directly
                rest = Fraction(1)
                degenerate = False
                for idx in range(1, k):
                    nxt = aseq[(idx + 1) % k]
                    num = pert[nxt][iseq[idx]]
                    den = pert[aseq[idx]][iseq[idx]]
                    if den == 0:
                        degenerate = True
                        break
                    rest *= Fraction(num) / den
                if degenerate:
                    continue
                solved = pert[aseq[1]][iseq[0]] * rest
                forbidden.add(inst.values[agent][item] - solved)
    return forbidden


def perturb_nondegenerate(
    inst: Instance, params: Optional[PerturbParams] = None
) -> PerturbedInstance:
    """Deterministically choose perturbations yielding non-degenerate values.

    Entries are set in row-major order; each already-closable cycle forbids
    one rational value, and the perturbation is picked from a uniform grid
    in (0, epsilon) fine enough that an admissible point must exist.
    """
    if params is None:
        params = compute_params(inst)
    n, m = inst.num_agents, inst.num_items
    eps_matrix = [[None] * m for _ in range(n)]
    pert = [[None] * m for _ in range(n)]

    def is_set(a, b):
        return eps_matrix[a][b] is not None

    for i in range(n):
        for t in range(m):
            forbidden = _forbidden_eps(inst, pert, i, t, is_set)
            grid_size = len(forbidden) + 1
            chosen = None
            for k in range(1, grid_size + 1):
                candidate = params.epsilon * k / (grid_size + 1)
                if candidate not in forbidden:
                    chosen = candidate
                    break
            assert chosen is not None, "grid larger than forbidden set"
            eps_matrix[i][t] = chosen
            pert[i][t] = inst.values[i][t] - chosen
    return PerturbedInstance(
        inst, tuple(tuple(row) for row in eps_matrix), params
    )


def demand_sets(pert: PerturbedInstance, w: WeightVector):
    """Per-item demand sets, tie set, and tie graph under shifted weights.

    D(t) is the set of agents maximizing (w_i + eta) * vbar_i(t); the tie
    set collects items with at least two demanders.
    """
    n, m = pert.base.num_agents, pert.base.num_items
    if w.n != n:
        raise ValueError("weight vector length mismatch")
    eta = pert.params.eta
    demand: Dict[int, Tuple[int, ...]] = {}
    ties = []
    for t in range(m):
        scores = [(w.weights[i] + eta) * pert.pert_value(i, t) for i in range(n)]
        best = max(scores)
        d = tuple(i for i in range(n) if scores[i] == best)
        demand[t] = d
        if len(d) >= 2:
            ties.append(t)
    edges = frozenset(
        (i, t) for t in ties for i in demand[t]
    )
    return demand, tuple(ties), TieGraph(n, tuple(ties), edges)


def max_weighted_welfare(pert: PerturbedInstance, w: WeightVector) -> Allocation:
    """Allocation maximizing shifted weighted welfare under perturbed values.

    Additivity makes the per-item argmax optimal; ties go to the lowest
    agent index.
    """
    demand, _, _ = demand_sets(pert, w)
    bundles = [set() for _ in range(pert.base.num_agents)]
    for t in range(pert.base.num_items):
        bundles[min(demand[t])].add(t)
    return Allocation(tuple(frozenset(b) for b in bundles))


# --- exact linear feasibility (Fourier-Motzkin over rationals) ---------------


def _normalize(coeffs, rhs):
    """Scale a <=-constraint so its first nonzero coefficient is +/-1."""
    for c in coeffs:
        if c != 0:
            scale = abs(c)
            return tuple(x / scale for x in coeffs), rhs / scale
    return tuple(coeffs), rhs


def _dedupe(constraints):
    best: Dict[tuple, Fraction] = {}
    for coeffs, rhs in constraints:
        coeffs, rhs = _normalize(list(coeffs), rhs)
        if coeffs in best:
            if rhs < best[coeffs]:
                best[coeffs] = rhs
        else:
            best[coeffs] = rhs
    return [(list(c), r) for c, r in best.items()]


def solve_leq_system(constraints: List[Tuple[List[Fraction], Fraction]], nvars: int):
    """Feasible point of {c . x <= d} via Fourier-Motzkin, or None.

    All constraints are non-strict, so the feasible region is closed and a
    point can be recovered by back-substitution.
    """
    layers = []
    current = _dedupe(constraints)
    for var in range(nvars - 1, -1, -1):
        lowers, uppers, keep = [], [], []
        for coeffs, rhs in current:
            c = coeffs[var]
            if c > 0:
                uppers.append(([x / c for x in coeffs], rhs / c))
            elif c < 0:
                lowers.append(([x / -c for x in coeffs], rhs / -c))
            else:
                keep.append((coeffs, rhs))
        layers.append((var, lowers, uppers))
        merged = list(keep)
        for lc, lr in lowers:
            for uc, ur in uppers:
                # -x + l(x') <= lr  and  x + u(x') <= ur  combine to
                # l(x') + u(x') <= lr + ur
                coeffs = [lc[i] + uc[i] for i in range(nvars)]
                coeffs[var] = Fraction(0)
                merged.append((coeffs, lr + ur))
        current = _dedupe(merged)
    for coeffs, rhs in current:
        if rhs < 0:
            return None
    point = [Fraction(0)] * nvars
    for var, lowers, uppers in reversed(layers):
        lo, hi = None, None
        for coeffs, rhs in lowers:
            rest = sum(coeffs[i] * point[i] for i in range(nvars) if i != var)
            bound = rest - rhs  # from -x + rest <= rhs
            lo = bound if lo is None or bound > lo else lo
        for coeffs, rhs in uppers:
            rest = sum(coeffs[i] * point[i] for i in range(nvars) if i != var)
            bound = rhs - rest
            hi = bound if hi is None or bound < hi else hi
        if lo is not None and hi is not None:
            point[var] = (lo + hi) / 2
        elif lo is not None:
            point[var] = lo
        elif hi is not None:
            point[var] = hi
        else:
            point[var] = Fraction(0)
    return point


def po_certificate_lp(
    pert: PerturbedInstance,
    item_sets: Sequence,
    realloc,
    demand: Dict[int, Sequence[int]],
) -> Optional[WeightVector]:
    """Weight vector certifying the partition is shifted-welfare optimal.

    Feasibility of the system { (w_i+eta) vbar_i(t) >= (w_j+eta) vbar_j(t)
    for t in I_i, j != i;  equality for t in R across D(t);  w in the
    simplex } is decided exactly; a feasible w means the induced allocation
    is PO with respect to the original values.
    """
    n, m = pert.base.num_agents, pert.base.num_items
    if len(item_sets) != n:
        raise ValueError("need one item set per agent")
    covered = set(realloc)
    for s in item_sets:
        for t in s:
            if t in covered:
                raise ValueError("item sets and realloc set must be disjoint")
            covered.add(t)
    if covered != set(range(m)):
        raise ValueError("item sets plus realloc set must cover all items")
    eta = pert.params.eta

    # variables x_0 .. x_{n-2}; w_n-1 = 1 - sum(x)
    nv = n - 1
    constraints: List[Tuple[List[Fraction], Fraction]] = []

    def weight_coeffs(i):
        """Coefficient vector and constant so that w_i = c . x + d."""
        if i < nv:
            c = [Fraction(0)] * nv
            c[i] = Fraction(1)
            return c, Fraction(0)
        return [Fraction(-1)] * nv, Fraction(1)

    def add_leq(ci, di, cj, dj, vi, vj):
        # (w_i + eta) vj-side dominated: (w_j+eta) vbar_j - (w_i+eta) vbar_i <= 0
        coeffs = [cj[k] * vj - ci[k] * vi for k in range(nv)]
        rhs = (di + eta) * vi - (dj + eta) * vj
        constraints.append((coeffs, rhs))

    for i in range(n):
        ci, di = weight_coeffs(i)
        for t in item_sets[i]:
            vi = pert.pert_value(i, t)
            for j in range(n):
                if j == i:
                    continue
                cj, dj = weight_coeffs(j)
                add_leq(ci, di, cj, dj, vi, pert.pert_value(j, t))
    for t in realloc:
        d = sorted(demand[t])
        if len(d) < 2:
            raise ValueError(f"realloc item {t} needs at least two demanders")
        for i, j in itertools.combinations(d, 2):
            ci, di = weight_coeffs(i)
            cj, dj = weight_coeffs(j)
            vi, vj = pert.pert_value(i, t), pert.pert_value(j, t)
            add_leq(ci, di, cj, dj, vi, vj)
            add_leq(cj, dj, ci, di, vj, vi)
    for i in range(n):
        ci, di = weight_coeffs(i)
        constraints.append(([-c for c in ci], di))  # w_i >= 0
    if nv == 0:
        for coeffs, rhs in constraints:
            if rhs < 0:
                return None
        return WeightVector((Fraction(1),))
    point = solve_leq_system(constraints, nv)
    if point is None:
        return None
    weights = list(point) + [Fraction(1) - sum(point)]
    return WeightVector(tuple(weights))
