"""Polynomial-time constructions for mixed manna and for goods.

Pipeline for mixed manna: a double round-robin EF1 allocation, top-trading
envy-cycle resolution to expose an envy-free agent, then a per-agent
single-item move that certifies EFR-(n-1).  For goods-only instances the
conflict-aware picking sequence yields an EFR-floor(n/2) certificate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional

from .core import (
    Allocation,
    EfrCertificate,
    EnvyGraph,
    Instance,
    build_envy_graph,
    bundle_value,
    is_ef1,
    is_envy_free_for,
)


def double_round_robin_ef1(inst: Instance) -> Allocation:
    """EF1 allocation of mixed manna via double round robin.

    Round 1: shared chores (negative for every agent) are picked by agents
    0..n-1 in cyclic order, each taking its highest-valued remaining shared
    chore; implicit zero-valued dummies pad the round to a multiple of n.
    Round 2: agents n-1..0 in cyclic order pick their highest-valued
    remaining item, passing whenever every remaining item is negative for
    them.
    """
    n, m = inst.num_agents, inst.num_items
    values = inst.values
    shared = {
        t for t in range(m) if all(values[i][t] < 0 for i in range(n))
    }
    rest = set(range(m)) - shared
    bundles = [set() for _ in range(n)]

    remaining = set(shared)
    # dummies are worth 0, strictly above every shared chore, so the first
    # `dummies` picks take them and the chores fall to the later turns
    dummies = -len(shared) % n if shared else 0
    turn = 0
    while remaining:
        i = turn % n
        turn += 1
        if dummies > 0:
            dummies -= 1
            continue
        best = max(remaining, key=lambda t: (values[i][t], -t))
        bundles[i].add(best)
        remaining.discard(best)

    remaining = set(rest)
    while remaining:
        for i in reversed(range(n)):
            if not remaining:
                break
            best = max(remaining, key=lambda t: (values[i][t], -t))
            if values[i][best] < 0:
                continue  # pass: everything left is a chore for i
            bundles[i].add(best)
            remaining.discard(best)

    return Allocation(tuple(frozenset(b) for b in bundles))


def resolve_top_trading_cycles(inst: Instance, alloc: Allocation) -> Allocation:
    """Rotate top-trading envy cycles until some agent is envy-free.

    Each rotation hands every agent on the cycle its most-valued bundle, so
    total utility strictly increases and termination is guaranteed.  An
    input that already has an envy-free agent is returned unchanged.
    """
    n = inst.num_agents
    bundles = list(alloc.bundles)
    while True:
        vals = [
            [bundle_value(inst, i, bundles[j]) for j in range(n)]
            for i in range(n)
        ]
        if any(
            all(vals[i][i] >= vals[i][j] for j in range(n)) for i in range(n)
        ):
            break
        # everyone is envious: each agent points at the min-index holder of
        # its most-valued bundle, so the pointer graph contains a cycle
        point = []
        for i in range(n):
            best = max(vals[i])
            point.append(min(j for j in range(n) if vals[i][j] == best))
        seen = {}
        cur = 0
        while cur not in seen:
            seen[cur] = len(seen)
            cur = point[cur]
        cycle = [a for a, rank in sorted(seen.items(), key=lambda kv: kv[1])]
        cycle = cycle[cycle.index(cur):]
        rotated = [bundles[point[i]] for i in cycle]
        for agent, bundle in zip(cycle, rotated):
            bundles[agent] = bundle
    return Allocation(tuple(bundles))


def _lowest_chore(inst, bundle, agent):
    chores = [t for t in sorted(bundle) if inst.values[agent][t] < 0]
    if not chores:
        return None
    return min(chores, key=lambda t: (inst.values[agent][t], t))


def _best_outside_good(inst, bundle, agent):
    goods = [
        t
        for t in range(inst.num_items)
        if t not in bundle and inst.values[agent][t] >= 0
    ]
    if not goods:
        return None
    return max(goods, key=lambda t: (inst.values[agent][t], -t))


def efr_n_minus_1(inst: Instance) -> EfrCertificate:
    """EFR-(n-1) certificate whose base allocation is also EF1.

    The base is the double-round-robin allocation after top-trading cycle
    resolution, so some agent i-hat is envy-free.  Every other agent i
    contributes at most one item t_i: its lowest-valued held chore or the
    highest-valued good outside its bundle, whichever is larger in absolute
    value.  The witness for i moves a chore t_i to i-hat, or a good t_i to
    i itself.
    """
    n = inst.num_agents
    base = resolve_top_trading_cycles(inst, double_round_robin_ef1(inst))
    sink = min(build_envy_graph(inst, base).sinks())
    realloc = set()
    witnesses: List[Allocation] = []
    for i in range(n):
        if i == sink:
            witnesses.append(base)
            continue
        chore = _lowest_chore(inst, base.bundles[i], i)
        good = _best_outside_good(inst, base.bundles[i], i)
        if chore is None and good is None:
            witnesses.append(base)  # i holds only goods, owns all its goods
            continue
        if chore is None:
            chosen = good
        elif good is None:
            chosen = chore
        else:
            abs_c = -inst.values[i][chore]
            abs_g = inst.values[i][good]
            if abs_c > abs_g:
                chosen = chore
            elif abs_g > abs_c:
                chosen = good
            else:
                chosen = min(chore, good)
        realloc.add(chosen)
        if chosen == chore:
            witnesses.append(base.reassign({chosen: sink}))
        else:
            witnesses.append(base.reassign({chosen: i}))
    return EfrCertificate(base, frozenset(realloc), tuple(witnesses))


@dataclass(frozen=True)
class PickingState:
    """Snapshot of the conflict-aware picking loop after one outer iteration."""

    active: frozenset
    deferred: frozenset
    reserved: frozenset
    unallocated: frozenset
    partial: tuple  # tuple[frozenset[int], ...]


def run_picking_rounds(inst: Instance):
    """Run the conflict-aware picking loop, without dumping the reserve.

    Returns (partial_bundles, reserved, trace) where `trace` holds one
    PickingState per outer-loop iteration, recorded at iteration end.
    """
    n, m = inst.num_agents, inst.num_items
    values = inst.values
    if any(values[i][t] < 0 for i in range(n) for t in range(m)):
        raise ValueError("conflict-aware picking requires nonnegative values")

    active = set(range(n))
    deferred = set()
    reserved = set()
    unallocated = set(range(m))
    bundles = [set() for _ in range(n)]
    trace: List[PickingState] = []

    def favorites(agent):
        best = max(values[agent][t] for t in unallocated)
        return {t for t in unallocated if values[agent][t] == best}

    while unallocated:
        prefs = {i: favorites(i) for i in active}
        conflicts = {
            g: {i for i in active if g in prefs[i]} for g in unallocated
        }
        while any(len(v) >= 2 for v in conflicts.values()):
            hot = max(
                (g for g in conflicts if len(conflicts[g]) >= 2),
                key=lambda g: (len(conflicts[g]), -g),
            )
            movers = conflicts[hot]
            unallocated.discard(hot)
            reserved.add(hot)
            deferred |= movers
            active -= movers
            prefs = {i: favorites(i) for i in active} if unallocated else {}
            conflicts = {
                g: {i for i in active if g in prefs[i]} for g in unallocated
            }
        for group in (sorted(active), sorted(deferred)):
            for i in group:
                if not unallocated:
                    break
                pick = max(unallocated, key=lambda t: (values[i][t], -t))
                bundles[i].add(pick)
                unallocated.discard(pick)
        trace.append(
            PickingState(
                frozenset(active),
                frozenset(deferred),
                frozenset(reserved),
                frozenset(unallocated),
                tuple(frozenset(b) for b in bundles),
            )
        )
    return tuple(frozenset(b) for b in bundles), frozenset(reserved), trace


def conflict_aware_picking(inst: Instance) -> EfrCertificate:
    """EFR-floor(n/2) certificate for goods-only instances.

    The reserve R ends up on agent 0; the witness for agent i moves all of
    R to i, which the loop invariants make envy-free for i.
    """
    partial, reserved, _ = run_picking_rounds(inst)
    bundles = list(partial)
    bundles[0] = bundles[0] | reserved
    base = Allocation(tuple(bundles))
    witnesses = []
    for i in range(inst.num_agents):
        w = list(partial)
        w[i] = w[i] | reserved
        witnesses.append(Allocation(tuple(w)))
    return EfrCertificate(base, reserved, tuple(witnesses))


def extend_with_round_robin(inst: Instance, partial, reserved) -> Allocation:
    """Complete a picking-loop partial allocation by distributing R.

    Agents pick their favorite remaining reserved good one at a time, in a
    topological order of the partial allocation's envy graph, which keeps
    the result EF1 while the original reserve still certifies
    EFR-floor(n/2).
    """
    n = inst.num_agents
    bundles = [set(b) for b in partial]
    remaining = set(reserved)
    if not remaining:
        return Allocation(tuple(bundles))
    own = [bundle_value(inst, i, bundles[i]) for i in range(n)]
    edges = frozenset(
        (i, j)
        for i in range(n)
        for j in range(n)
        if i != j and own[i] < bundle_value(inst, i, bundles[j])
    )
    order = EnvyGraph(n, edges).topological_order()
    if order is None:
        raise RuntimeError("partial allocation envy graph has a cycle")
    while remaining:
        for i in order:
            if not remaining:
                break
            pick = max(remaining, key=lambda t: (inst.values[i][t], -t))
            bundles[i].add(pick)
            remaining.discard(pick)
    return Allocation(tuple(bundles))
