"""Shared corpus builders for the test suite (all deterministic)."""

import numpy as np
import pytest

from fracmax import Exponent, build_space
from fracmax.generators import (cantor_space, line_space, log_holder_exponent,
                                power_weight, random_metric_space, eta_shift)


@pytest.fixture
def two_point():
    return build_space([[0.0, 1.0], [1.0, 0.0]], [1.0, 1.0])


@pytest.fixture
def three_line():
    xs = np.array([0.0, 0.5, 1.0])
    return build_space(np.abs(xs[:, None] - xs[None, :]), np.full(3, 1.0 / 3.0))


@pytest.fixture
def line8():
    return line_space(8)


def space_pool(seed=0):
    """Small mixed corpus: lines, a cantor-like set and snapped random metrics."""
    return [
        line_space(6),
        line_space(16),
        cantor_space(3),
        random_metric_space(10, seed=seed),
        random_metric_space(14, seed=seed + 1),
    ]


def random_exponent(space, rng, lo=1.2, hi=3.0):
    return Exponent(rng.uniform(lo, hi, space.n))


def random_weight(space, rng, lo=0.25, hi=4.0):
    return rng.uniform(lo, hi, space.n)


def corpus_cases(seed=0, n_cases=12):
    """(space, p, q, w, eta) tuples mixing constant, random and structured data."""
    rng = np.random.default_rng(seed)
    pool = space_pool(seed)
    cases = []
    for i in range(n_cases):
        space = pool[i % len(pool)]
        style = i % 4
        if style == 0:
            p = Exponent.constant(float(rng.uniform(1.3, 3.0)), space.n)
            eta = 0.0
        elif style == 1:
            p = random_exponent(space, rng)
            eta = 0.0
        elif style == 2:
            p = log_holder_exponent(space, float(rng.uniform(1.5, 2.5)),
                                    float(rng.uniform(0.1, 0.8)))
            eta = float(rng.uniform(0.0, 0.9 / p.p_plus))
        else:
            p = Exponent.constant(2.0, space.n)
            eta = 0.25
        q = eta_shift(p, eta)
        if i % 3 == 0:
            w = np.ones(space.n)
        elif i % 3 == 1:
            w = random_weight(space, rng)
        else:
            w = power_weight(space, float(rng.uniform(-0.3, 0.4)))
        cases.append((space, p, q, w, eta))
    return cases
