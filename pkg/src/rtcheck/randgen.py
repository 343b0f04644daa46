"""Random SUP requirement sets for property tests and scaling runs."""
from __future__ import annotations

import random

from .logic import Expr, Requirement, RequirementSet, Var, conj, disj, neg
from .sup import SupRequirement, compile_sup


def random_expr(rng: random.Random, props, max_literals: int = 2) -> Expr:
    """A literal, or a conjunction/disjunction of up to ``max_literals`` literals."""
    k = rng.randint(1, max_literals)
    lits = []
    for p in rng.sample(list(props), min(k, len(props))):
        lits.append(Var(p) if rng.random() < 0.6 else neg(Var(p)))
    if len(lits) == 1:
        return lits[0]
    return conj(*lits) if rng.random() < 0.7 else disj(*lits)


def _window(rng: random.Random, max_const: int) -> tuple[int, int]:
    lo = rng.randint(0, max_const)
    return lo, rng.randint(lo, max_const)


def random_sup(rng: random.Random, props, timed: bool = True, max_const: int = 6) -> SupRequirement:
    """A random SUP; Boolean ones have all windows ``[0, 0]``.

    Trigger and action phases use the same expression for start, hold and
    end with probability one half, which keeps most instances short.
    """
    tse = random_expr(rng, props)
    ase = random_expr(rng, props)
    if rng.random() < 0.5:
        tc = tee = tse
    else:
        tc, tee = random_expr(rng, props), random_expr(rng, props)
    if rng.random() < 0.5:
        ac = aee = ase
    else:
        ac, aee = random_expr(rng, props), random_expr(rng, props)
    if not timed:
        return SupRequirement(tse, tc, tee, ase, ac, aee)
    t = _window(rng, max_const) if rng.random() < 0.4 else (0, 0)
    l = _window(rng, max_const)
    a = _window(rng, max_const) if rng.random() < 0.6 else (0, 0)
    return SupRequirement(tse, tc, tee, ase, ac, aee, t[0], t[1], l[0], l[1], a[0], a[1])


def random_requirement_set(
    rng: random.Random,
    n_requirements: int,
    n_props: int,
    timed: int | None = None,
    max_const: int = 6,
) -> RequirementSet:
    """``timed`` requirements with random windows followed by Boolean ones (all timed if ``None``)."""
    props = tuple(f"p{i}" for i in range(n_props))
    timed = n_requirements if timed is None else timed
    reqs = []
    for i in range(n_requirements):
        r = random_sup(rng, props, timed=i < timed, max_const=max_const)
        name = f"R{i + 1}"
        reqs.append(Requirement(name, compile_sup(r, name), r))
    return RequirementSet(props, tuple(reqs))


def corpus(count: int = 200, seed: int = 2024, max_props: int = 3, max_const: int = 6):
    """Random sets of 2 or 3 timed SUPs over at most ``max_props`` propositions."""
    rng = random.Random(seed)
    for _ in range(count):
        yield random_requirement_set(rng, rng.randint(2, 3), rng.randint(1, max_props), max_const=max_const)
