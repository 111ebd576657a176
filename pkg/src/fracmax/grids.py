"""Nested dyadic-style grids on a finite quasi-metric space.

Generation k carries the scale d0**k (d0 > 1): the coarsest generation k_max
is the whole space as one cube, the finest k_min (scale at or below the
minimal positive distance) is all singletons.  Each generation refines the
previous one parent by parent: a seeded greedy pass picks a maximal
d0**k-separated net among the parent's points (parent center first, so cube
centers persist to finer scales) and every point of the parent joins its
nearest net center, ties to the earlier-selected center.  Nesting therefore
holds by construction and the five structural grid properties are verified
from raw member sets by :func:`verify_grid`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .spaces import QuasiMetricSpace, ValidationError, ball_system


class GridConstructionError(RuntimeError):
    pass


@dataclass
class DyadicCube:
    id: int
    gen: int
    center: int
    members: np.ndarray
    parent: int | None = None
    children: tuple = ()

    @property
    def size(self) -> int:
        return len(self.members)


@dataclass
class DyadicGrid:
    space: QuasiMetricSpace
    d0: float
    seed: int
    k_min: int
    k_max: int
    cubes: list
    gens: dict
    point_cube: dict
    c_d: float = np.nan
    c_in: float = np.nan
    eps_child: float = np.nan

    @property
    def ks(self) -> list:
        return list(range(self.k_min, self.k_max + 1))

    def scale(self, k: int) -> float:
        return float(self.d0) ** k

    def generation(self, k: int) -> list:
        return [self.cubes[i] for i in self.gens[k]]

    @property
    def root(self) -> DyadicCube:
        return self.cubes[self.gens[self.k_max][0]]

    def masses(self, atoms=None) -> np.ndarray:
        atoms = self.space.mass if atoms is None else np.asarray(atoms, dtype=float)
        return np.array([atoms[c.members].sum() for c in self.cubes])


def build_grid(space: QuasiMetricSpace, d0: float = 2.0, seed: int = 0) -> DyadicGrid:
    """Construct a nested grid with seeded greedy nets, one net per parent."""
    if d0 <= 1.0:
        raise ValidationError(f"scale base must exceed 1, got {d0}")
    n = space.n
    rng = np.random.default_rng(seed)

    if n == 1:
        root = DyadicCube(id=0, gen=0, center=0, members=np.array([0]))
        grid = DyadicGrid(space=space, d0=d0, seed=seed, k_min=0, k_max=0,
                          cubes=[root], gens={0: (0,)},
                          point_cube={0: np.zeros(1, dtype=int)})
        _record_constants(grid)
        return grid

    diam = space.diameter()
    d_min = space.min_positive_distance()
    k_min = int(np.floor(np.log(d_min) / np.log(d0)))
    while d0 ** k_min > d_min:
        k_min -= 1
    k_max = int(np.ceil(np.log(diam) / np.log(d0)))
    while d0 ** k_max <= diam:
        k_max += 1
    k_max = max(k_max, k_min + 1)

    root_center = int(rng.permutation(n)[0])
    root = DyadicCube(id=0, gen=k_max, center=root_center, members=np.arange(n))
    cubes = [root]
    gens = {k_max: (0,)}
    point_cube = {k_max: np.zeros(n, dtype=int)}

    current = [root]
    for k in range(k_max - 1, k_min - 1, -1):
        scale = d0 ** k
        perm = rng.permutation(n)
        new_level = []
        locator = np.empty(n, dtype=int)
        for parent in current:
            pts = parent.members
            in_parent = np.zeros(n, dtype=bool)
            in_parent[pts] = True
            order = [parent.center] + [int(p) for p in perm if in_parent[p] and p != parent.center]
            selected = []
            for cand in order:
                if not selected or space.dist[cand, selected].min() >= scale:
                    selected.append(cand)
            sel = np.array(selected)
            choice = np.argmin(space.dist[np.ix_(pts, sel)], axis=1)
            kids = []
            for ci, center in enumerate(selected):
                members = pts[choice == ci]
                cube = DyadicCube(id=len(cubes), gen=k, center=int(center),
                                  members=members, parent=parent.id)
                cubes.append(cube)
                kids.append(cube)
                locator[members] = cube.id
            parent.children = tuple(c.id for c in kids)
            new_level.extend(kids)
        counts = np.zeros(n, dtype=int)
        for cube in new_level:
            counts[cube.members] += 1
        if not (counts == 1).all():
            raise GridConstructionError(f"generation {k} does not partition the space")
        gens[k] = tuple(c.id for c in new_level)
        point_cube[k] = locator
        current = new_level

    grid = DyadicGrid(space=space, d0=d0, seed=seed, k_min=k_min, k_max=k_max,
                      cubes=cubes, gens=gens, point_cube=point_cube)
    _record_constants(grid)
    return grid


def _record_constants(grid: DyadicGrid) -> None:
    space = grid.space
    c_d = 0.0
    c_in = np.inf
    eps = 1.0
    for cube in grid.cubes:
        scale = grid.scale(cube.gen)
        d_row = space.dist[cube.center]
        if cube.size > 1:
            c_d = max(c_d, float(d_row[cube.members].max()) / scale)
        if cube.size < space.n:
            outside = np.setdiff1d(np.arange(space.n), cube.members, assume_unique=True)
            c_in = min(c_in, float(d_row[outside].min()) / scale)
        if cube.parent is not None:
            ratio = space.mass[cube.members].sum() / space.mass[grid.cubes[cube.parent].members].sum()
            eps = min(eps, float(ratio))
    grid.c_d = c_d
    grid.c_in = 1.0 if c_in == np.inf else float(c_in)
    grid.eps_child = eps


def build_grid_family(space: QuasiMetricSpace, n_grids: int, seed: int = 0, d0: float = 2.0) -> list:
    """Independently seeded grids; distinct net orders play the role of translated grids."""
    if n_grids < 1:
        raise ValidationError(f"need at least one grid, got {n_grids}")
    children = np.random.SeedSequence(seed).spawn(n_grids)
    return [build_grid(space, d0=d0, seed=int(c.generate_state(1)[0])) for c in children]


def cube_at(grid: DyadicGrid, x, k: int) -> DyadicCube:
    """The unique generation-k cube containing the point x."""
    if k < grid.k_min or k > grid.k_max:
        raise ValidationError(f"generation {k} outside [{grid.k_min}, {grid.k_max}]")
    idx = grid.space.index_of(x)
    return grid.cubes[grid.point_cube[k][idx]]


@dataclass
class GridReport:
    properties: dict
    witnesses: dict
    c_d: float
    c_in: float
    eps_child: float

    @property
    def ok(self) -> bool:
        return all(self.properties.values())


def verify_grid(grid: DyadicGrid, space: QuasiMetricSpace | None = None) -> GridReport:
    """Exhaustively re-check the five structural properties from raw member sets.

    (1) any two cubes are nested or disjoint; (2) every generation partitions
    the space; (3) parent/child links are consistent and complete; (4) each
    child carries at least the recorded fraction of its parent's mass;
    (5) every cube sits between the recorded inner and outer balls around its
    center.  Failures are reported with witnesses, not raised.
    """
    space = grid.space if space is None else space
    n = space.n
    props = {}
    wit = {}

    masks = np.zeros((len(grid.cubes), n), dtype=bool)
    for i, cube in enumerate(grid.cubes):
        masks[i, cube.members] = True

    mf = masks.astype(np.float64)
    inter = mf @ mf.T
    sizes = masks.sum(axis=1)
    nested = (inter == 0) | (inter == sizes[:, None]) | (inter == sizes[None, :])
    props["nesting"] = bool(nested.all())
    if not props["nesting"]:
        i, j = np.argwhere(~nested)[0]
        wit["nesting"] = f"cubes {grid.cubes[i].id} and {grid.cubes[j].id} overlap partially"

    ok = True
    for k in grid.ks:
        ids = list(grid.gens[k])
        cover = masks[ids].sum(axis=0)
        if not (cover == 1).all():
            ok = False
            x = int(np.argmax(cover != 1))
            wit["partition"] = f"point {x} covered {int(cover[x])} times in generation {k}"
            break
    props["partition"] = ok

    ok = True
    for cube in grid.cubes:
        if cube.gen < grid.k_max:
            parent = grid.cubes[cube.parent] if cube.parent is not None else None
            if parent is None or parent.gen != cube.gen + 1 \
                    or not np.isin(cube.members, parent.members).all() \
                    or cube.id not in parent.children:
                ok = False
                wit["lineage"] = f"cube {cube.id} has a broken parent link"
                break
        if cube.gen > grid.k_min:
            kids = [grid.cubes[c] for c in cube.children]
            if not kids:
                ok = False
                wit["lineage"] = f"cube {cube.id} has no child"
                break
            union = np.sort(np.concatenate([c.members for c in kids]))
            if len(union) != cube.size or not (union == np.sort(cube.members)).all():
                ok = False
                wit["lineage"] = f"children of cube {cube.id} do not partition it"
                break
    props["lineage"] = ok

    eps = 1.0
    ok = True
    for cube in grid.cubes:
        if cube.parent is None:
            continue
        ratio = float(space.mass[cube.members].sum()
                      / space.mass[grid.cubes[cube.parent].members].sum())
        eps = min(eps, ratio)
    recorded_eps = grid.eps_child if np.isfinite(grid.eps_child) else eps
    if eps <= 0.0 or eps < recorded_eps * (1.0 - 1e-12):
        ok = False
        wit["child_mass"] = f"realized child-mass ratio {eps} below recorded {recorded_eps}"
    props["child_mass"] = ok

    c_d = 0.0
    c_in = np.inf
    ok = True
    rec_cd = grid.c_d if np.isfinite(grid.c_d) else None
    rec_cin = grid.c_in if np.isfinite(grid.c_in) else None
    for cube in grid.cubes:
        scale = grid.scale(cube.gen)
        d_row = space.dist[cube.center]
        r_out = float(d_row[cube.members].max())
        c_d = max(c_d, r_out / scale)
        if rec_cd is not None and r_out > rec_cd * scale * (1.0 + 1e-12):
            ok = False
            wit["sandwich"] = f"cube {cube.id} has a member outside the outer ball"
        if cube.size < n:
            outside = np.setdiff1d(np.arange(n), cube.members, assume_unique=True)
            r_in = float(d_row[outside].min())
            c_in = min(c_in, r_in / scale)
            bound = (rec_cin if rec_cin is not None else r_in / scale) * scale
            leak = d_row[outside] < bound * (1.0 - 1e-12)
            if leak.any():
                ok = False
                wit["sandwich"] = f"cube {cube.id} misses a point inside its inner ball"
    c_in = 1.0 if c_in == np.inf else c_in
    if c_in <= 0.0:
        ok = False
        wit["sandwich"] = "inner ball radius degenerated to zero"
    props["sandwich"] = ok

    return GridReport(properties=props, witnesses=wit, c_d=c_d, c_in=c_in, eps_child=eps)


def ball_cover_constant(space: QuasiMetricSpace, family) -> tuple:
    """Smallest K with: every ball is inside some family cube of mass <= K * mass(ball).

    Exhaustive over the deduplicated ball enumeration; returns (K, witness ball).
    """
    sys = ball_system(space)
    cubes = [c for grid in family for c in grid.cubes]
    cmask = np.zeros((len(cubes), space.n), dtype=bool)
    for i, c in enumerate(cubes):
        cmask[i, c.members] = True
    cmass = np.array([space.mass[c.members].sum() for c in cubes])

    outside = (~cmask).astype(np.float64)
    best = np.full(len(sys.balls), np.inf)
    chunk = max(1, 2_000_000 // max(1, len(cubes)))
    for start in range(0, len(sys.balls), chunk):
        sl = slice(start, min(start + chunk, len(sys.balls)))
        leaks = sys.mask[sl].astype(np.float64) @ outside.T
        contained = leaks == 0.0
        ratios = np.where(contained, cmass[None, :] / sys.measures[sl, None], np.inf)
        best[sl] = ratios.min(axis=1)
    worst = int(np.argmax(best))
    return float(best[worst]), sys.balls[worst]
