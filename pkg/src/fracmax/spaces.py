"""Finite quasi-metric measure spaces and their ball geometry.

A space is a finite point set with a symmetric quasi-distance matrix and a
strictly positive atomic measure.  Balls use the strict convention
``B(x, r) = {y : d(x, y) < r}``, so the measure of ``B(x, r)`` is a step
function of ``r`` that jumps exactly at the realized distances from ``x``.
Every supremum over balls is therefore attained on the finite candidate set
of realized radii, which is what the enumeration below exploits.
"""

from __future__ import annotations

import weakref
from dataclasses import dataclass

import numpy as np


class ValidationError(ValueError):
    """Input data violates a structural precondition."""


@dataclass(frozen=True, eq=False)
class QuasiMetricSpace:
    """Finite point set with quasi-metric, atomic measure and certified constants.

    ``a0`` is the smallest constant with d(x,y) <= a0*(d(x,z)+d(z,y)) for all
    triples, ``c_mu`` the smallest constant with mu(B(x,2r)) <= c_mu*mu(B(x,r))
    over all realized radii.  Both are computed, never user supplied.
    """

    points: tuple
    dist: np.ndarray
    mass: np.ndarray
    a0: float
    c_mu: float

    @property
    def n(self) -> int:
        return len(self.points)

    def index_of(self, point) -> int:
        if isinstance(point, (int, np.integer)) and 0 <= int(point) < self.n:
            return int(point)
        try:
            return self.points.index(point)
        except ValueError:
            raise ValidationError(f"unknown point {point!r}") from None

    def diameter(self) -> float:
        return float(self.dist.max())

    def min_positive_distance(self) -> float:
        off = self.dist[~np.eye(self.n, dtype=bool)]
        return float(off.min()) if off.size else 0.0

    def total_mass(self) -> float:
        return float(self.mass.sum())


@dataclass(frozen=True)
class Ball:
    """A quasi-metric ball: member set {y : d(center, y) < radius}."""

    center: int
    radius: float
    members: tuple
    measure: float


def build_space(dist_matrix, mass, points=None) -> QuasiMetricSpace:
    """Validate raw data and certify the homogeneous-type constants.

    Raises :class:`ValidationError` naming the offending entry for an
    asymmetric matrix, nonzero diagonal, zero off-diagonal distance or
    nonpositive atom mass.
    """
    d = np.array(dist_matrix, dtype=float)
    m = np.array(mass, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ValidationError(f"distance matrix must be square, got shape {d.shape}")
    n = d.shape[0]
    if m.shape != (n,):
        raise ValidationError(f"mass must have length {n}, got shape {m.shape}")
    if not np.isfinite(d).all():
        i, j = np.argwhere(~np.isfinite(d))[0]
        raise ValidationError(f"non-finite distance at ({i}, {j})")
    if not np.isfinite(m).all():
        (i,) = np.argwhere(~np.isfinite(m))[0]
        raise ValidationError(f"non-finite mass at atom {i}")
    bad = np.argwhere(d != d.T)
    if bad.size:
        i, j = bad[0]
        raise ValidationError(f"asymmetric matrix: entry ({i}, {j})")
    diag = np.argwhere(np.diag(d) != 0.0)
    if diag.size:
        (i,) = diag[0]
        raise ValidationError(f"nonzero diagonal at ({i}, {i})")
    off = d + np.eye(n)  # mask the diagonal before the positivity check
    bad = np.argwhere(off <= 0.0)
    if bad.size:
        i, j = bad[0]
        raise ValidationError(f"nonpositive off-diagonal distance at ({i}, {j})")
    bad = np.argwhere(m <= 0.0)
    if bad.size:
        (i,) = bad[0]
        raise ValidationError(f"nonpositive mass at atom {i}")

    if points is None:
        points = tuple(range(n))
    else:
        points = tuple(points)
        if len(points) != n:
            raise ValidationError(f"{len(points)} point ids for {n} atoms")

    d.setflags(write=False)
    m.setflags(write=False)
    a0 = _quasi_triangle_constant(d)
    space = QuasiMetricSpace(points=points, dist=d, mass=m, a0=a0, c_mu=1.0)
    object.__setattr__(space, "c_mu", doubling_constant(space))
    return space


def _quasi_triangle_constant(d: np.ndarray) -> float:
    n = d.shape[0]
    if n < 2:
        return 1.0
    # min over z of d(x,z)+d(z,y), computed one slice at a time to stay O(n^2) memory
    minsum = np.full_like(d, np.inf)
    for k in range(n):
        s = d[:, k:k + 1] + d[k:k + 1, :]
        np.minimum(minsum, s, out=minsum)
    off = ~np.eye(n, dtype=bool)
    ratio = d[off] / minsum[off]
    return float(max(1.0, ratio.max()))


class _BallSystem:
    """Deduplicated enumeration of all realizable balls of a space.

    Holds a boolean membership matrix (one row per distinct ball) used by the
    batched norm and maximal kernels.  Rows are ordered by (center, radius) of
    the first occurrence of each member set.
    """

    def __init__(self, space: QuasiMetricSpace):
        n = space.n
        order = np.argsort(space.dist, axis=1, kind="stable")
        sorted_d = np.take_along_axis(space.dist, order, axis=1)
        self.order = order
        self.sorted_d = sorted_d
        self.csum = np.cumsum(space.mass[order], axis=1)

        super_radius = 2.0 * space.diameter() if n > 1 else 1.0
        raw = []
        masks = []
        seen = {}
        for c in range(n):
            radii = np.unique(space.dist[c])
            radii = radii[radii > 0.0]
            for r in list(radii) + [super_radius]:
                members = np.flatnonzero(space.dist[c] < r)
                key = members.tobytes()
                if key in seen:
                    continue
                seen[key] = len(raw)
                mask = np.zeros(n, dtype=bool)
                mask[members] = True
                masks.append(mask)
                raw.append((c, float(r), members))
        self.mask = np.array(masks)
        # measures go through the same matmul reduction as every ball sweep,
        # so independently enumerated sweeps reproduce values bit for bit
        self.measures = self.mask.astype(np.float64) @ space.mass
        self.balls = [Ball(center=c, radius=r,
                           members=tuple(int(i) for i in members),
                           measure=float(self.measures[i]))
                      for i, (c, r, members) in enumerate(raw)]

    def mu_at_radii(self, center: int, radii: np.ndarray, atoms_csum=None) -> np.ndarray:
        """mu(B(center, r)) for an array of radii, strict convention."""
        csum = self.csum if atoms_csum is None else atoms_csum
        k = np.searchsorted(self.sorted_d[center], radii, side="left")
        out = np.zeros(len(radii))
        pos = k > 0
        out[pos] = csum[center][k[pos] - 1]
        return out

    def mu_closed(self, center: int, radius: float, atoms_csum=None) -> float:
        """Mass of {y : d(center, y) <= radius}."""
        csum = self.csum if atoms_csum is None else atoms_csum
        k = int(np.searchsorted(self.sorted_d[center], radius, side="right"))
        return float(csum[center][k - 1]) if k > 0 else 0.0


_SYSTEMS: "weakref.WeakKeyDictionary[QuasiMetricSpace, _BallSystem]" = weakref.WeakKeyDictionary()


def ball_system(space: QuasiMetricSpace) -> _BallSystem:
    sys = _SYSTEMS.get(space)
    if sys is None:
        sys = _BallSystem(space)
        _SYSTEMS[space] = sys
    return sys


def ball(space: QuasiMetricSpace, center, radius: float) -> Ball:
    """The ball around ``center`` with the strict-inequality convention."""
    if radius < 0:
        raise ValidationError(f"negative radius {radius}")
    c = space.index_of(center)
    members = np.flatnonzero(space.dist[c] < radius)
    return Ball(
        center=c,
        radius=float(radius),
        members=tuple(int(i) for i in members),
        measure=float(space.mass[members].sum()),
    )


def enumerate_balls(space: QuasiMetricSpace) -> list:
    """One representative per distinct member set realizable as a ball.

    Candidate radii per center are the realized distances from that center
    plus one value above the diameter; since mu(B(x, r)) is a step function
    of r these attain every realizable member set.
    """
    return ball_system(space).balls


def doubling_constant(space: QuasiMetricSpace, atoms=None) -> float:
    """max over centers and realized radii of mu(B(x, 2r)) / mu(B(x, r))."""
    sys = ball_system(space)
    if atoms is None:
        csum = sys.csum
    else:
        atoms = np.asarray(atoms, dtype=float)
        csum = np.cumsum(atoms[sys.order], axis=1)
    best = 1.0
    for c in range(space.n):
        radii = np.unique(space.dist[c])
        radii = radii[radii > 0.0]
        if radii.size == 0:
            continue
        mu_r = sys.mu_at_radii(c, radii, csum)
        mu_2r = sys.mu_at_radii(c, 2.0 * radii, csum)
        best = max(best, float((mu_2r / mu_r).max()))
    return best


def lower_mass_bound_report(space: QuasiMetricSpace, atoms=None, seed: int = 0) -> float:
    """Largest C with mu(B(y,r))/mu(B(x,R)) >= C*(r/R)**log2(c_mu) for 0 < r < R.

    mu(B(x, R)) is constant on each interval between consecutive realized
    distances from x while (r/R)**a shrinks as R drops, so the infimum over
    real pairs is approached as R falls to an interval's left endpoint L with
    the interval's (closed-ball) mass; over r the minimum sits at realized
    distances of y up to and including L.  Small spaces are swept exactly; on
    larger ones the (x, L, y) triples are subsampled with a fixed seed, each
    still minimized exactly over (r, R).
    """
    sys = ball_system(space)
    if atoms is None:
        atoms = space.mass
        csum = sys.csum
        alpha = np.log2(space.c_mu)
    else:
        atoms = np.asarray(atoms, dtype=float)
        csum = np.cumsum(atoms[sys.order], axis=1)
        alpha = np.log2(doubling_constant(space, atoms))

    n = space.n
    if n == 1:
        return 1.0
    rng = np.random.default_rng(seed)
    centers = np.arange(n)
    if n > 32:
        centers = np.sort(rng.choice(n, size=32, replace=False))

    best = np.inf
    for x in centers:
        lefts = np.unique(space.dist[x])
        lefts = lefts[lefts > 0.0]
        if len(lefts) > 32:
            idx = np.unique(rng.choice(len(lefts), size=32, replace=False))
            lefts = lefts[idx]
        for L in lefts:
            mu_R = sys.mu_closed(x, L, csum)  # interval mass for R just above L
            ys = np.flatnonzero(space.dist[x] <= L)
            if ys.size > 16:
                ys = np.sort(rng.choice(ys, size=16, replace=False))
            for y in ys:
                ry = np.unique(space.dist[y])
                ry = ry[(ry > 0.0) & (ry <= L)]
                if L not in ry:
                    ry = np.append(ry, L)
                mu_r = sys.mu_at_radii(y, ry, csum)
                pos = mu_r > 0.0
                if pos.any():
                    vals = (mu_r[pos] / mu_R) / (ry[pos] / L) ** alpha
                    best = min(best, float(vals.min()))
    return 1.0 if best == np.inf else float(best)
