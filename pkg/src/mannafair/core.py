"""Exact-rational domain model for fair division of indivisible mixed manna.

All values are `fractions.Fraction`; no floating point is used anywhere.
Agents and items are 0-based internally.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

Rational = Fraction

RationalLike = Union[int, str, Fraction]


class IncompleteCertificateError(ValueError):
    """A certificate is missing the witness allocation for some agent."""


class BudgetExceededError(RuntimeError):
    """An exhaustive search exceeded its configured evaluation budget."""


def as_rational(x: RationalLike) -> Fraction:
    """Coerce an int, Fraction, or "p/q" string to an exact Fraction.

    Floats are rejected: the downstream ratio and LP tests are
    equality-sensitive.
    """
    if isinstance(x, bool):
        raise TypeError(f"cannot interpret {x!r} as an exact rational")
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


@dataclass(frozen=True)
class Instance:
    """A fair division instance: n agents, m items, exact valuation matrix.

    Entry ``values[i][t]`` is agent i's value for item t.  Values may be
    positive, negative, or zero (mixed manna).
    """

    values: tuple  # tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(as_rational(v) for v in row) for row in self.values)
        if not rows:
            raise ValueError("instance needs at least one agent")
        m = len(rows[0])
        if any(len(row) != m for row in rows):
            raise ValueError("valuation matrix is ragged")
        object.__setattr__(self, "values", rows)

    @property
    def num_agents(self) -> int:
        return len(self.values)

    @property
    def num_items(self) -> int:
        return len(self.values[0])

    def value(self, agent: int, item: int) -> Fraction:
        return self.values[agent][item]

    def all_items(self) -> frozenset:
        return frozenset(range(self.num_items))


@dataclass(frozen=True)
class Allocation:
    """An n-partition of the item set into per-agent bundles."""

    bundles: tuple  # tuple[frozenset[int], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "bundles", tuple(frozenset(b) for b in self.bundles)
        )

    @property
    def num_agents(self) -> int:
        return len(self.bundles)

    def holder(self, item: int) -> int:
        for i, b in enumerate(self.bundles):
            if item in b:
                return i
        raise KeyError(f"item {item} is not allocated")

    def reassign(self, moves: Mapping[int, int]) -> "Allocation":
        """Return a copy with each item in `moves` handed to the given agent."""
        new = [set(b) for b in self.bundles]
        for item, agent in moves.items():
            new[self.holder(item)].discard(item)
            new[agent].add(item)
        return Allocation(tuple(new))


@dataclass(frozen=True)
class EnvyGraph:
    """Directed strict-envy relation: edge (i, j) iff i envies j."""

    num_agents: int
    edges: frozenset  # frozenset[tuple[int, int]]

    def out_neighbors(self, i: int):
        return sorted(j for (a, j) in self.edges if a == i)

    def sinks(self):
        """Agents with no outgoing envy edge (envy-free agents)."""
        enviers = {a for (a, _) in self.edges}
        return [i for i in range(self.num_agents) if i not in enviers]

    def is_acyclic(self) -> bool:
        order = self.topological_order()
        return order is not None

    def topological_order(self):
        """Kahn topological order (enviers first), lowest index breaking ties.

        Returns None when the graph has a cycle.
        """
        n = self.num_agents
        indeg = [0] * n
        for (_, j) in self.edges:
            indeg[j] += 1
        order = []
        ready = sorted(i for i in range(n) if indeg[i] == 0)
        while ready:
            i = ready.pop(0)
            order.append(i)
            for j in self.out_neighbors(i):
                indeg[j] -= 1
                if indeg[j] == 0:
                    # keep `ready` sorted for determinism
                    lo = 0
                    while lo < len(ready) and ready[lo] < j:
                        lo += 1
                    ready.insert(lo, j)
        return order if len(order) == n else None


@dataclass(frozen=True)
class EfrCertificate:
    """Witness data showing an allocation is EFR-|realloc_set|.

    For every agent i, ``witnesses[i]`` must agree with ``base`` outside
    ``realloc_set`` and be envy-free for i.
    """

    base: Allocation
    realloc_set: frozenset
    witnesses: tuple  # tuple[Allocation, ...], indexed by agent

    def __post_init__(self):
        object.__setattr__(self, "realloc_set", frozenset(self.realloc_set))
        object.__setattr__(self, "witnesses", tuple(self.witnesses))


def validate_allocation(inst: Instance, alloc: Allocation) -> None:
    """Raise ValueError unless `alloc` is an n-partition of [m]."""
    if alloc.num_agents != inst.num_agents:
        raise ValueError(
            f"allocation has {alloc.num_agents} bundles for "
            f"{inst.num_agents} agents"
        )
    seen = set()
    for b in alloc.bundles:
        for t in b:
            if not (0 <= t < inst.num_items):
                raise ValueError(f"item index {t} out of range")
            if t in seen:
                raise ValueError(f"item {t} allocated twice")
            seen.add(t)
    if len(seen) != inst.num_items:
        missing = sorted(set(range(inst.num_items)) - seen)
        raise ValueError(f"items {missing} unallocated")


def bundle_value(inst: Instance, agent: int, bundle: Iterable[int]) -> Fraction:
    """Exact additive value of `bundle` for `agent`."""
    if not (0 <= agent < inst.num_agents):
        raise IndexError(f"agent index {agent} out of range")
    total = Fraction(0)
    row = inst.values[agent]
    for t in bundle:
        if not (0 <= t < inst.num_items):
            raise IndexError(f"item index {t} out of range")
        total += row[t]
    return total


def build_envy_graph(inst: Instance, alloc: Allocation) -> EnvyGraph:
    """Strict-envy graph of `alloc`: edge (i, j) iff v_i(A_i) < v_i(A_j)."""
    validate_allocation(inst, alloc)
    n = inst.num_agents
    own = [bundle_value(inst, i, alloc.bundles[i]) for i in range(n)]
    edges = set()
    for i in range(n):
        for j in range(n):
            if i != j and own[i] < bundle_value(inst, i, alloc.bundles[j]):
                edges.add((i, j))
    return EnvyGraph(n, frozenset(edges))


def is_envy_free_for(inst: Instance, alloc: Allocation, agent: int) -> bool:
    """True iff `agent` values its own bundle at least as much as every other."""
    validate_allocation(inst, alloc)
    own = bundle_value(inst, agent, alloc.bundles[agent])
    return all(
        own >= bundle_value(inst, agent, alloc.bundles[j])
        for j in range(inst.num_agents)
        if j != agent
    )


def is_envy_free(inst: Instance, alloc: Allocation) -> bool:
    return all(is_envy_free_for(inst, alloc, i) for i in range(inst.num_agents))


def is_ef1(inst: Instance, alloc: Allocation) -> bool:
    """Envy-freeness up to one item, for mixed manna.

    For every envying pair (i, j) some item t in A_i or A_j must satisfy
    v_i(A_i \\ {t}) >= v_i(A_j \\ {t}).
    """
    validate_allocation(inst, alloc)
    n = inst.num_agents
    for i in range(n):
        own = bundle_value(inst, i, alloc.bundles[i])
        for j in range(n):
            if i == j:
                continue
            other = bundle_value(inst, i, alloc.bundles[j])
            if own >= other:
                continue
            # removing i's worst chore or j's best good (for i) is optimal
            ok = False
            for t in alloc.bundles[i]:
                if own - inst.values[i][t] >= other:
                    ok = True
                    break
            if not ok:
                for t in alloc.bundles[j]:
                    if own >= other - inst.values[i][t]:
                        ok = True
                        break
            if not ok:
                return False
    return True


def validate_certificate(inst: Instance, cert: EfrCertificate) -> bool:
    """Check both certificate invariants.

    True implies ``cert.base`` is EFR-|cert.realloc_set|.  Raises
    IncompleteCertificateError when a witness is missing.
    """
    validate_allocation(inst, cert.base)
    n = inst.num_agents
    if len(cert.witnesses) != n:
        raise IncompleteCertificateError(
            f"certificate has {len(cert.witnesses)} witnesses for {n} agents"
        )
    outside = inst.all_items() - cert.realloc_set
    for i, witness in enumerate(cert.witnesses):
        try:
            validate_allocation(inst, witness)
        except ValueError:
            return False
        for t in outside:
            if cert.base.holder(t) != witness.holder(t):
                return False
        if not is_envy_free_for(inst, witness, i):
            return False
    return True
