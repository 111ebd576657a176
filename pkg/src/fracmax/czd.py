"""Stopping-time decomposition of a weighted dyadic maximal function.

At a height lam the decomposition collects the maximal grid cubes whose
sigma-average of |f| exceeds lam; their union is exactly the superlevel set
of the weighted dyadic maximal function.  Stacked heights a**k with a above
the stopping constant yield cores (cube minus the next superlevel set) that
are pairwise disjoint and carry a fixed fraction of their cube's sigma-mass.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grids import DyadicGrid
from .maximal import weighted_dyadic_maximal
from .spaces import QuasiMetricSpace, ValidationError


@dataclass(frozen=True)
class CzConstant:
    value: float
    generic_bound: float

    def __float__(self) -> float:
        return self.value


@dataclass(frozen=True)
class CZDecomposition:
    grid: DyadicGrid
    eta: float
    sigma: np.ndarray
    f: np.ndarray
    c_cz: float
    lam: float | None = None
    cubes: tuple = ()
    root_selected: bool = False
    a: float | None = None
    k0: int | None = None
    levels: dict | None = None
    cores: dict | None = None

    @property
    def is_stack(self) -> bool:
        return self.a is not None


def _sigma_ok(sigma, n) -> np.ndarray:
    sigma = np.asarray(sigma, dtype=float)
    if (sigma <= 0.0).any() or not np.isfinite(sigma).all():
        i = int(np.argmax(~(np.isfinite(sigma) & (sigma > 0.0))))
        raise ValidationError(f"sigma must be positive and finite; atom {i} is {sigma[i]}")
    return sigma


def _cube_averages(grid: DyadicGrid, eta: float, sigma: np.ndarray, f: np.ndarray):
    satoms = sigma * grid.space.mass
    fs = np.abs(f) * satoms
    s_mass = np.array([satoms[c.members].sum() for c in grid.cubes])
    f_int = np.array([fs[c.members].sum() for c in grid.cubes])
    return s_mass, f_int, s_mass ** (eta - 1.0) * f_int


def _stopping_constant(grid: DyadicGrid, eta: float, satoms: np.ndarray) -> float:
    """Realized max of (sigma(parent)/sigma(child))^(1-eta) over the grid."""
    worst = 1.0
    for cube in grid.cubes:
        if cube.parent is None:
            continue
        ratio = satoms[grid.cubes[cube.parent].members].sum() / satoms[cube.members].sum()
        worst = max(worst, float(ratio))
    return worst ** (1.0 - eta)


def cz_constant(grid: DyadicGrid, space: QuasiMetricSpace, eta: float, sigma=None) -> CzConstant:
    """Largest parent-to-child sigma-mass jump, to the power 1 - eta.

    The realized value governs the stopping inequality exactly; the generic
    bound from the lower mass bound and doubling of the sigma measure is
    reported alongside for comparison.
    """
    if not (0.0 <= eta < 1.0):
        raise ValidationError(f"fractional order must lie in [0, 1), got {eta}")
    sigma = np.ones(space.n) if sigma is None else _sigma_ok(sigma, space.n)
    satoms = sigma * space.mass
    value = _stopping_constant(grid, eta, satoms)

    from .spaces import doubling_constant, lower_mass_bound_report
    c_dbl = doubling_constant(space, satoms)
    c_lmb = lower_mass_bound_report(space, satoms)
    ratio_scale = max(grid.c_d / max(grid.c_in, 1e-300), 1.0) * grid.d0
    generic = ((1.0 / c_lmb) * ratio_scale ** np.log2(max(c_dbl, 1.0))) ** (1.0 - eta)
    return CzConstant(value=float(value), generic_bound=float(generic))


def cz_decompose(grid: DyadicGrid, eta: float, sigma, f, lam: float) -> CZDecomposition:
    """Maximal cubes with sigma-average of |f| above lam, found by a top-down walk.

    If even the whole space exceeds lam the decomposition is the root alone,
    flagged ``root_selected`` (the upper stopping bound needs a parent).
    """
    if lam <= 0.0:
        raise ValidationError(f"height must be positive, got {lam}")
    if not (0.0 <= eta < 1.0):
        raise ValidationError(f"fractional order must lie in [0, 1), got {eta}")
    sigma = _sigma_ok(sigma, grid.space.n)
    f = np.asarray(f, dtype=float)
    _, _, avgs = _cube_averages(grid, eta, sigma, f)
    c_cz = _stopping_constant(grid, eta, sigma * grid.space.mass)

    selected = []
    root_selected = False
    roots = [grid.cubes[i] for i in grid.gens[grid.k_max]]
    stack = list(roots)
    while stack:
        cube = stack.pop()
        if avgs[cube.id] > lam:
            selected.append(cube.id)
            if cube.parent is None:
                root_selected = True
        else:
            stack.extend(grid.cubes[c] for c in cube.children)
    return CZDecomposition(grid=grid, eta=eta, sigma=sigma, f=f, c_cz=c_cz,
                           lam=float(lam), cubes=tuple(sorted(selected)),
                           root_selected=root_selected)


def cz_stack(grid: DyadicGrid, eta: float, sigma, f, a: float | None = None,
             k_range=None) -> CZDecomposition:
    """Decompositions at heights a**k stacked from the total-average height up.

    The base must exceed the stopping constant; the lowest level starts at
    ceil(log_a of the whole-space average), which keeps the root unselected
    at every height.  Cores subtract the next level's superlevel set.
    """
    sigma = _sigma_ok(sigma, grid.space.n)
    f = np.asarray(f, dtype=float)
    if not (0.0 <= eta < 1.0):
        raise ValidationError(f"fractional order must lie in [0, 1), got {eta}")
    c_cz = _stopping_constant(grid, eta, sigma * grid.space.mass)
    if a is None:
        a = 2.0 * c_cz
    if a <= c_cz:
        raise ValidationError(f"stack base {a} must exceed the stopping constant {c_cz}")

    s_mass, f_int, avgs = _cube_averages(grid, eta, sigma, f)
    root = grid.root
    lam0 = avgs[root.id]
    empty = CZDecomposition(grid=grid, eta=eta, sigma=sigma, f=f, c_cz=c_cz,
                            a=float(a), k0=None, levels={}, cores={})
    if lam0 <= 0.0:
        return empty

    mx = weighted_dyadic_maximal(grid, eta, sigma, f).values.max()
    k0 = int(np.ceil(np.log(lam0) / np.log(a)))
    while a ** k0 < lam0:
        k0 += 1
    if k_range is not None:
        ks = sorted(int(k) for k in k_range)
        if ks and ks[0] < k0:
            raise ValidationError(f"stack must start at or above level {k0}, got {ks[0]}")
    else:
        ks = []
        k = k0
        while a ** k < mx:
            ks.append(k)
            k += 1
    levels = {}
    for k in ks:
        dec = cz_decompose(grid, eta, sigma, f, a ** k)
        levels[k] = dec.cubes

    cores = {}
    satoms = sigma * grid.space.mass
    for k in sorted(levels):
        above = levels.get(k + 1, ())
        covered = np.zeros(grid.space.n, dtype=bool)
        for cid in above:
            covered[grid.cubes[cid].members] = True
        for cid in levels[k]:
            members = grid.cubes[cid].members
            cores[(k, cid)] = members[~covered[members]]
    return CZDecomposition(grid=grid, eta=eta, sigma=sigma, f=f, c_cz=c_cz,
                           a=float(a), k0=k0 if levels else None,
                           levels=levels, cores=cores)


@dataclass(frozen=True)
class CzReport:
    checks: dict
    witnesses: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())


def cz_verify(decomp: CZDecomposition) -> CzReport:
    """Re-derive every certified inequality of a decomposition from raw data."""
    if decomp.is_stack:
        return _verify_stack(decomp)
    checks, wit = _verify_single(decomp, decomp.lam, decomp.cubes, decomp.root_selected)
    return CzReport(checks=checks, witnesses=wit)


def _verify_single(decomp, lam, cube_ids, root_selected):
    grid = decomp.grid
    _, _, avgs = _cube_averages(grid, decomp.eta, decomp.sigma, decomp.f)
    mres = weighted_dyadic_maximal(grid, decomp.eta, decomp.sigma, decomp.f)
    checks = {}
    wit = {}

    covered = np.zeros(grid.space.n, dtype=bool)
    disjoint = True
    for cid in cube_ids:
        members = grid.cubes[cid].members
        if covered[members].any():
            disjoint = False
            wit["disjoint"] = f"cube {cid} overlaps an earlier selected cube"
        covered[members] = True
    checks["disjoint"] = disjoint

    level = mres.values > lam
    checks["cover"] = bool((covered == level).all())
    if not checks["cover"]:
        x = int(np.argmax(covered != level))
        wit["cover"] = f"point {x}: selected-union={bool(covered[x])} superlevel={bool(level[x])}"

    ok_low, ok_high, ok_max = True, True, True
    for cid in cube_ids:
        cube = grid.cubes[cid]
        if not avgs[cid] > lam:
            ok_low = False
            wit["stopping_lower"] = f"cube {cid} average {avgs[cid]} not above {lam}"
        if cube.parent is not None:
            if avgs[cid] > decomp.c_cz * lam * (1.0 + 1e-12):
                ok_high = False
                wit["stopping_upper"] = f"cube {cid} average {avgs[cid]} above C*lam"
            if avgs[cube.parent] > lam:
                ok_max = False
                wit["maximality"] = f"parent of cube {cid} also exceeds the height"
        elif not root_selected:
            ok_max = False
            wit["maximality"] = f"cube {cid} selected at the root without a flag"
    checks["stopping_lower"] = ok_low
    checks["stopping_upper"] = ok_high
    checks["maximality"] = ok_max
    return checks, wit


def _verify_stack(decomp):
    grid = decomp.grid
    checks = {"disjoint": True, "cover": True, "stopping_lower": True,
              "stopping_upper": True, "maximality": True,
              "cores_disjoint": True, "core_mass": True}
    wit = {}
    for k, cube_ids in sorted(decomp.levels.items()):
        sub, w = _verify_single(decomp, decomp.a ** k, cube_ids, False)
        for name, ok in sub.items():
            if not ok:
                checks[name] = False
                wit[f"{name}@{k}"] = w.get(name, "")

    seen = np.zeros(grid.space.n, dtype=bool)
    for key in sorted(decomp.cores):
        core = decomp.cores[key]
        if seen[core].any():
            checks["cores_disjoint"] = False
            wit["cores_disjoint"] = f"core {key} overlaps an earlier core"
        seen[core] = True

    satoms = decomp.sigma * grid.space.mass
    frac = 1.0 - (decomp.c_cz / decomp.a) ** (1.0 / (1.0 - decomp.eta))
    for (k, cid), core in sorted(decomp.cores.items()):
        s_cube = satoms[grid.cubes[cid].members].sum()
        s_core = satoms[core].sum()
        if s_core > s_cube * (1.0 + 1e-12) or s_core < frac * s_cube * (1.0 - 1e-9):
            checks["core_mass"] = False
            wit["core_mass"] = (f"core of cube {cid} at level {k} carries {s_core} "
                                f"of {s_cube}, below fraction {frac}")
    return CzReport(checks=checks, witnesses=wit)
