"""Exhaustive search for an EFR-(n-1) and Pareto-optimal allocation.

The search enumerates a reallocation set R, per-item demand sets over R,
and per-agent-pair separating items; the separators determine ratio-filter
sets whose intersection reconstructs each agent's uniquely-demanded
bundle.  Candidates that partition the items are then screened with the
reassignment-based envy-freeness test (under the original values) and an
exact weight-vector feasibility check.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .core import (
    Allocation,
    BudgetExceededError,
    EfrCertificate,
    Instance,
    bundle_value,
)
from .welfare import (
    PerturbedInstance,
    WeightVector,
    perturb_nondegenerate,
    po_certificate_lp,
)

HARD_AGENT_CAP = 3


@dataclass(frozen=True)
class SeparatorGuess:
    """Optional separating good/chore per ordered agent pair, plus empty flags."""

    goods: Dict[Tuple[int, int], Optional[int]]
    chores: Dict[Tuple[int, int], Optional[int]]
    empty: tuple  # tuple[bool, ...] per agent


def _sign_sets(pert: PerturbedInstance, i: int, j: int):
    """Items that are common goods, common chores, and i-good/j-chore."""
    m = pert.base.num_items
    plus, minus, q = [], [], []
    for t in range(m):
        vi, vj = pert.pert_value(i, t), pert.pert_value(j, t)
        if vi > 0 and vj > 0:
            plus.append(t)
        elif vi < 0 and vj < 0:
            minus.append(t)
        elif vi > 0 and vj < 0:
            q.append(t)
    return plus, minus, q


def build_f_ij(
    pert: PerturbedInstance, i: int, j: int, guess: SeparatorGuess
) -> frozenset:
    """Ratio-filter set F_ij = Q_ij | G_ij | B_ij for the guessed separators."""
    plus, minus, q = _sign_sets(pert, i, j)
    out = set(q)
    g = guess.goods.get((i, j))
    if g is not None:
        if g not in plus:
            raise ValueError(f"separating good {g} is not a common good")
        bound = Fraction(pert.pert_value(j, g)) / pert.pert_value(i, g)
        for t in plus:
            if Fraction(pert.pert_value(j, t)) / pert.pert_value(i, t) <= bound:
                out.add(t)
    c = guess.chores.get((i, j))
    if c is not None:
        if c not in minus:
            raise ValueError(f"separating chore {c} is not a common chore")
        bound = Fraction(abs(pert.pert_value(i, c))) / abs(pert.pert_value(j, c))
        for t in minus:
            ratio = Fraction(abs(pert.pert_value(i, t))) / abs(
                pert.pert_value(j, t)
            )
            if ratio <= bound:
                out.add(t)
    return frozenset(out)


def reconstruct_I(pert: PerturbedInstance, guess: SeparatorGuess):
    """Per-agent uniquely-demanded sets from the separator guess."""
    n = pert.base.num_agents
    all_items = frozenset(range(pert.base.num_items))
    result = []
    for i in range(n):
        if guess.empty[i]:
            result.append(frozenset())
            continue
        acc = all_items
        for j in range(n):
            if j != i:
                acc = acc & build_f_ij(pert, i, j, guess)
        result.append(acc)
    return result


def _demand_options(n: int):
    """Agent subsets of size >= 2, by increasing size then lexicographic."""
    opts = []
    for size in range(2, n + 1):
        opts.extend(itertools.combinations(range(n), size))
    return opts


def _pair_guess_options(pert, i, j):
    plus, minus, _ = _sign_sets(pert, i, j)
    goods = [None] + sorted(plus)
    chores = [None] + sorted(minus)
    return [(g, c) for g in goods for c in chores]


def _agent_guess_options(pert, i):
    """Either the empty-I flag or one (good, chore) choice per other agent."""
    n = pert.base.num_agents
    others = [j for j in range(n) if j != i]
    per_pair = [_pair_guess_options(pert, i, j) for j in others]
    options = [None]  # None encodes the empty-I flag
    for combo in itertools.product(*per_pair):
        options.append(dict(zip(others, combo)))
    return options


def _efr_witnesses(inst, item_sets, realloc, demand):
    """Per-agent envy-free witnesses over D(t)-respecting placements of R.

    Returns the list of witness allocations, or None when some agent has
    no envy-free placement.  Envy-freeness is evaluated under the
    original values.
    """
    n = inst.num_agents
    rlist = sorted(realloc)
    choices = [sorted(demand[t]) for t in rlist]
    witnesses: List[Optional[Allocation]] = [None] * n
    for assignment in itertools.product(*choices):
        bundles = [set(s) for s in item_sets]
        for t, a in zip(rlist, assignment):
            bundles[a].add(t)
        alloc = Allocation(tuple(bundles))
        own = [bundle_value(inst, i, alloc.bundles[i]) for i in range(n)]
        for i in range(n):
            if witnesses[i] is not None:
                continue
            if all(
                own[i] >= bundle_value(inst, i, alloc.bundles[j])
                for j in range(n)
                if j != i
            ):
                witnesses[i] = alloc
        if all(w is not None for w in witnesses):
            return witnesses
    return None


def search_efr_po(
    inst: Instance,
    max_candidates: int = 10**7,
    agent_cap: int = HARD_AGENT_CAP,
):
    """Find an EFR-(n-1) and Pareto-optimal allocation by enumeration.

    Returns (allocation, certificate, weight_vector).  Existence is
    guaranteed, so exhausting the full candidate space indicates an
    implementation bug; running out of `max_candidates` first raises
    BudgetExceededError.
    """
    n, m = inst.num_agents, inst.num_items
    if n > agent_cap:
        raise ValueError(
            f"search is exponential in n; capped at {agent_cap} agents"
        )
    if n == 1:
        alloc = Allocation((frozenset(range(m)),))
        cert = EfrCertificate(alloc, frozenset(), (alloc,))
        return alloc, cert, WeightVector((Fraction(1),))
    pert = perturb_nondegenerate(inst)
    demand_opts = _demand_options(n)
    agent_opts = [_agent_guess_options(pert, i) for i in range(n)]
    all_items = set(range(m))
    budget = max_candidates

    realloc_choices = []
    for size in range(n):
        realloc_choices.extend(itertools.combinations(range(m), size))

    for realloc in realloc_choices:
        rset = set(realloc)
        for demand_combo in itertools.product(demand_opts, repeat=len(realloc)):
            demand = dict(zip(realloc, demand_combo))
            for agent_combo in itertools.product(*agent_opts):
                budget -= 1
                if budget < 0:
                    raise BudgetExceededError(
                        "candidate budget exhausted before a solution"
                    )
                goods = {}
                chores = {}
                empty = []
                for i, pick in enumerate(agent_combo):
                    if pick is None:
                        empty.append(True)
                        continue
                    empty.append(False)
                    for j, (g, c) in pick.items():
                        goods[(i, j)] = g
                        chores[(i, j)] = c
                guess = SeparatorGuess(goods, chores, tuple(empty))
                item_sets = reconstruct_I(pert, guess)
                claimed = set()
                ok = True
                for s in item_sets:
                    if s & claimed or s & rset:
                        ok = False
                        break
                    claimed |= s
                if not ok or claimed | rset != all_items:
                    continue
                witnesses = _efr_witnesses(inst, item_sets, realloc, demand)
                if witnesses is None:
                    continue
                w = po_certificate_lp(pert, item_sets, realloc, demand)
                if w is None:
                    continue
                bundles = [set(s) for s in item_sets]
                for t in realloc:
                    bundles[min(demand[t])].add(t)
                alloc = Allocation(tuple(bundles))
                cert = EfrCertificate(
                    alloc, frozenset(realloc), tuple(witnesses)
                )
                return alloc, cert, w
    raise AssertionError(
        "enumeration exhausted without a solution; existence is guaranteed"
    )
