"""Shared fixtures and a small seeded expression generator."""

from __future__ import annotations

import random

import pytest

from nlseverify.exprs import add, const, mul, pow_, var
from nlseverify.problem import load_problem
from nlseverify.reduction import build_canonical_transform, reduced_ode


@pytest.fixture(scope="session")
def problem():
    return load_problem()


@pytest.fixture(scope="session")
def printed_problem():
    return load_problem(printed=True)


@pytest.fixture(scope="session")
def system(problem):
    return problem.system


@pytest.fixture(scope="session")
def transform():
    return build_canonical_transform()


@pytest.fixture(scope="session")
def ode(transform, system):
    return reduced_ode(transform, system)


def random_expr(rng: random.Random, gens, depth: int):
    """Seeded polynomial expression over the given generators."""
    if depth == 0 or rng.random() < 0.3:
        if rng.random() < 0.25:
            return const(rng.randint(-3, 3))
        return var(gens[rng.randrange(len(gens))])
    roll = rng.random()
    a = random_expr(rng, gens, depth - 1)
    if roll < 0.45:
        return add(a, random_expr(rng, gens, depth - 1))
    if roll < 0.9:
        return mul(a, random_expr(rng, gens, depth - 1))
    return pow_(a, rng.randint(2, 3))
