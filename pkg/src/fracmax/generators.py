"""Deterministic corpus generators: spaces, exponent families and weights."""

from __future__ import annotations

import numpy as np

from .exponents import Exponent
from .spaces import QuasiMetricSpace, ValidationError, build_space

SPACE_KINDS = ("line", "torus-grid", "cantor-like", "random-metric")


def line_space(n: int) -> QuasiMetricSpace:
    """n uniform atoms on [0, 1) with Euclidean distances, mass 1/n each."""
    if n < 1:
        raise ValidationError(f"need at least one point, got {n}")
    xs = np.arange(n) / n
    dist = np.abs(xs[:, None] - xs[None, :])
    return build_space(dist, np.full(n, 1.0 / n))


def torus_grid_space(n: int) -> QuasiMetricSpace:
    """Square grid on the flat 2-torus; n is rounded down to a perfect square."""
    m = max(1, int(np.sqrt(n)))
    xs = np.arange(m) / m
    gx, gy = np.meshgrid(xs, xs, indexing="ij")
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    delta = np.abs(pts[:, None, :] - pts[None, :, :])
    delta = np.minimum(delta, 1.0 - delta)
    dist = np.sqrt((delta ** 2).sum(axis=2))
    return build_space(dist, np.full(m * m, 1.0 / (m * m)))


def cantor_space(level: int) -> QuasiMetricSpace:
    """Left endpoints of the middle-thirds construction at a given depth.

    2**level points with Euclidean distances: a doubling, highly non-uniform
    point set exercising homogeneous-type generality.
    """
    if level < 0:
        raise ValidationError(f"level must be nonnegative, got {level}")
    xs = np.array([0.0])
    for k in range(1, level + 1):
        xs = np.concatenate([xs, xs + 2.0 / 3.0 ** k])
    xs = np.sort(xs)
    dist = np.abs(xs[:, None] - xs[None, :])
    n = len(xs)
    return build_space(dist, np.full(n, 1.0 / n))


def random_metric_space(n: int, seed: int = 0) -> QuasiMetricSpace:
    """Random symmetric distances snapped to a quasi-metric with constant <= 2.

    Violating entries are repeatedly lowered to twice the best two-leg path;
    the result is validated through the usual certification.
    """
    if n < 1:
        raise ValidationError(f"need at least one point, got {n}")
    rng = np.random.default_rng(seed)
    d = rng.uniform(0.05, 1.0, size=(n, n))
    d = np.triu(d, 1)
    d = d + d.T
    for _ in range(n + 1):
        two_leg = np.full_like(d, np.inf)
        for k in range(n):
            np.minimum(two_leg, d[:, k:k + 1] + d[k:k + 1, :], out=two_leg)
        np.fill_diagonal(two_leg, np.inf)
        snapped = np.minimum(d, 2.0 * two_leg)
        if (snapped == d).all():
            break
        d = snapped
    mass = rng.uniform(0.5, 1.5, size=n) / n
    space = build_space(d, mass)
    if space.a0 > 2.0 + 1e-9:
        raise ValidationError(f"snapping left quasi-triangle constant {space.a0} > 2")
    return space


def make_space(kind: str, n: int = 16, seed: int = 0, level: int | None = None) -> QuasiMetricSpace:
    if kind == "line":
        return line_space(n)
    if kind == "torus-grid":
        return torus_grid_space(n)
    if kind == "cantor-like":
        lv = level if level is not None else max(0, int(round(np.log2(max(n, 1)))))
        return cantor_space(lv)
    if kind == "random-metric":
        return random_metric_space(n, seed)
    raise ValidationError(f"unknown space kind {kind!r}; choose one of {SPACE_KINDS}")


def log_holder_exponent(space: QuasiMetricSpace, p_inf: float, amplitude: float,
                        base_point=0) -> Exponent:
    """p(x) = p_inf + amplitude / log(e + 1/max(d(x0, x), d_min))."""
    b = space.index_of(base_point)
    d_min = space.min_positive_distance() or 1.0
    d = np.maximum(space.dist[b], d_min)
    values = p_inf + amplitude / np.log(np.e + 1.0 / d)
    return Exponent(values, p_inf=float(p_inf))


def power_weight(space: QuasiMetricSpace, a: float, base_point=0) -> np.ndarray:
    """w(x) = max(d(x0, x), d_min)^a; the base atom uses the snapped distance."""
    b = space.index_of(base_point)
    d_min = space.min_positive_distance() or 1.0
    return np.maximum(space.dist[b], d_min) ** a


def eta_shift(p: Exponent, eta: float) -> Exponent:
    """The exponent q with 1/q = 1/p - eta, validated to stay in range."""
    if not (0.0 <= eta < 1.0):
        raise ValidationError(f"eta must lie in [0, 1), got {eta}")
    inv = 1.0 / p.values - eta
    if (inv <= 0.0).any():
        i = int(np.argmax(inv <= 0.0))
        raise ValidationError(
            f"eta = {eta} is too large for p({i}) = {p.values[i]}; 1/q would be nonpositive")
    p_inf = None if p.p_inf is None else 1.0 / (1.0 / p.p_inf - eta)
    return Exponent(1.0 / inv, p_inf=p_inf)
