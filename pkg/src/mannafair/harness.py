"""Instance generators and the on-disk JSON formats.

All files are JSON with a fixed key order so serialization is canonical
and diff-friendly.  Values are integers or "p/q" strings; agent and item
indices are 1-based on disk and 0-based in memory.
"""

from __future__ import annotations

import json
import random
from fractions import Fraction
from typing import Dict, Optional, Sequence

from .core import Allocation, EfrCertificate, Instance, as_rational
from .welfare import PerturbedInstance, PerturbParams

FORMAT_VERSION = 1


class ParseError(ValueError):
    """Malformed input file; the message names the offending field."""


# --- generators ---------------------------------------------------------------


def gen_identical_chores(n: int) -> Instance:
    """n agents and n-1 identical chores, each valued -1 by everyone."""
    if n < 2:
        raise ValueError("need at least 2 agents")
    return Instance(tuple(tuple(-1 for _ in range(n - 1)) for _ in range(n)))


def gen_paired_goods(n: int) -> Instance:
    """n agents (n even) and n/2 goods; agents 2k, 2k+1 value good k at 1."""
    if n < 2 or n % 2:
        raise ValueError("need an even number of agents, at least 2")
    m = n // 2
    rows = []
    for i in range(n):
        rows.append(tuple(1 if t == i // 2 else 0 for t in range(m)))
    return Instance(tuple(rows))


def gen_partition_reduction(values: Sequence[int]):
    """Identical-valuation chores instance encoding a Partition input.

    For k positive integers summing to 2T this builds k+3 agents and 2k+1
    chores: the first k valued -s_i and the rest valued -T.  The returned
    allocation gives all s-chores to agent 1, nothing to agent 2, and one
    -T chore to each remaining agent.  The allocation is EFR-k exactly
    when the integers admit an exact half-sum partition.
    """
    if not values:
        raise ValueError("need at least one integer")
    if any(v <= 0 for v in values):
        raise ValueError("values must be positive")
    total = sum(values)
    if total % 2:
        raise ValueError("values must have an even sum")
    k = len(values)
    half = total // 2
    row = tuple(-v for v in values) + tuple(-half for _ in range(k + 1))
    inst = Instance(tuple(row for _ in range(k + 3)))
    bundles = [frozenset(range(k)), frozenset()]
    for idx in range(k + 1):
        bundles.append(frozenset({k + idx}))
    return inst, Allocation(tuple(bundles)), k


def gen_random(
    n: int, m: int, value_range: int, chore_prob: Fraction, seed: int
) -> Instance:
    """Seeded random instance with values in +/-[1, value_range].

    Each value is drawn uniformly and independently negated with
    probability `chore_prob`.
    """
    if value_range < 1:
        raise ValueError("value_range must be positive")
    chore_prob = as_rational(chore_prob)
    if not 0 <= chore_prob <= 1:
        raise ValueError("chore_prob must lie in [0, 1]")
    rng = random.Random(seed)
    rows = []
    for _ in range(n):
        row = []
        for _ in range(m):
            v = rng.randint(1, value_range)
            # exact Bernoulli(chore_prob) from an integer draw
            if rng.randrange(chore_prob.denominator) < chore_prob.numerator:
                v = -v
            row.append(v)
        rows.append(tuple(row))
    return Instance(tuple(rows))


# --- serialization ------------------------------------------------------------


def _rational_out(v: Fraction):
    return int(v) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def _rational_in(raw, where: str) -> Fraction:
    try:
        return as_rational(raw)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{where}: bad rational {raw!r}") from exc


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def serialize_instance(inst: Instance, metadata: Optional[Dict] = None) -> str:
    doc = {
        "format_version": FORMAT_VERSION,
        "agents": inst.num_agents,
        "items": inst.num_items,
        "values": [[_rational_out(v) for v in row] for row in inst.values],
    }
    if metadata:
        doc["metadata"] = metadata
    return _dump(doc)


def parse_instance(text: str) -> Instance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}: {exc.msg}") from exc
    for key in ("format_version", "agents", "items", "values"):
        if key not in doc:
            raise ParseError(f"missing field {key!r}")
    values = doc["values"]
    if len(values) != doc["agents"]:
        raise ParseError("values: row count differs from agents")
    rows = []
    for i, row in enumerate(values):
        if len(row) != doc["items"]:
            raise ParseError(f"values[{i}]: length differs from items")
        rows.append(
            tuple(_rational_in(v, f"values[{i}][{t}]") for t, v in enumerate(row))
        )
    return Instance(tuple(rows))


def _bundles_out(alloc: Allocation):
    return [sorted(t + 1 for t in b) for b in alloc.bundles]


def _bundles_in(raw, num_agents: int, where: str) -> Allocation:
    if len(raw) != num_agents:
        raise ParseError(f"{where}: expected {num_agents} bundles")
    bundles = []
    for i, b in enumerate(raw):
        items = set()
        for t in b:
            if not isinstance(t, int) or t < 1:
                raise ParseError(f"{where}[{i}]: bad item id {t!r}")
            items.add(t - 1)
        bundles.append(frozenset(items))
    return Allocation(tuple(bundles))


def serialize_allocation(alloc: Allocation) -> str:
    return _dump(
        {"format_version": FORMAT_VERSION, "bundles": _bundles_out(alloc)}
    )


def parse_allocation(text: str, inst: Instance) -> Allocation:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}: {exc.msg}") from exc
    if "bundles" not in doc:
        raise ParseError("missing field 'bundles'")
    return _bundles_in(doc["bundles"], inst.num_agents, "bundles")


def serialize_certificate(cert: EfrCertificate) -> str:
    return _dump(
        {
            "format_version": FORMAT_VERSION,
            "base": _bundles_out(cert.base),
            "realloc_set": sorted(t + 1 for t in cert.realloc_set),
            "witnesses": [_bundles_out(w) for w in cert.witnesses],
        }
    )


def parse_certificate(text: str, inst: Instance) -> EfrCertificate:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}: {exc.msg}") from exc
    for key in ("base", "realloc_set", "witnesses"):
        if key not in doc:
            raise ParseError(f"missing field {key!r}")
    base = _bundles_in(doc["base"], inst.num_agents, "base")
    realloc = frozenset(t - 1 for t in doc["realloc_set"])
    witnesses = tuple(
        _bundles_in(w, inst.num_agents, f"witnesses[{i}]")
        for i, w in enumerate(doc["witnesses"])
    )
    return EfrCertificate(base, realloc, witnesses)


def serialize_perturbed(pert: PerturbedInstance) -> str:
    p = pert.params
    return _dump(
        {
            "format_version": FORMAT_VERSION,
            "base": json.loads(serialize_instance(pert.base)),
            "eps": [
                [_rational_out(e) for e in row] for row in pert.eps_matrix
            ],
            "params": {
                "lambda_lb": _rational_out(p.lambda_lb),
                "Lambda": _rational_out(p.Lambda),
                "omega_lb": _rational_out(p.omega_lb),
                "eta": _rational_out(p.eta),
                "epsilon": _rational_out(p.epsilon),
            },
        }
    )


def parse_perturbed(text: str) -> PerturbedInstance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}: {exc.msg}") from exc
    for key in ("base", "eps", "params"):
        if key not in doc:
            raise ParseError(f"missing field {key!r}")
    base = parse_instance(json.dumps(doc["base"]))
    eps = tuple(
        tuple(_rational_in(e, f"eps[{i}][{t}]") for t, e in enumerate(row))
        for i, row in enumerate(doc["eps"])
    )
    raw = doc["params"]
    params = PerturbParams(
        lambda_lb=_rational_in(raw["lambda_lb"], "params.lambda_lb"),
        Lambda=_rational_in(raw["Lambda"], "params.Lambda"),
        omega_lb=_rational_in(raw["omega_lb"], "params.omega_lb"),
        eta=_rational_in(raw["eta"], "params.eta"),
        epsilon=_rational_in(raw["epsilon"], "params.epsilon"),
    )
    return PerturbedInstance(base, eps, params)
