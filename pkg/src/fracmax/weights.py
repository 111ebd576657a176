"""The fractional variable weight constant, its specializations and diagnostics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exponents import Exponent, EtaRelationError, conjugate
from .maximal import TestFunction
from .norms import luxemburg_norm_rows
from .spaces import Ball, QuasiMetricSpace, ValidationError, ball_system, doubling_constant

EPS_GRID = (1.0, 0.5, 0.25, 0.125)
SUBSET_EXHAUSTIVE_LIMIT = 12
SUBSET_SAMPLES = 256


@dataclass(frozen=True)
class WeightRecord:
    """A weight with its two derived measures (per-point atoms, mass included)."""

    w: np.ndarray
    W_atoms: np.ndarray
    sigma_atoms: np.ndarray


@dataclass(frozen=True)
class AInftyReport:
    delta: float
    c1: float
    epsilon: float
    c2: float
    doubling_of_weight: float

    @property
    def finite(self) -> bool:
        return bool(np.isfinite([self.c1, self.c2, self.doubling_of_weight]).all())


@dataclass(frozen=True)
class ApqResult:
    value: float
    witness: Ball | object
    eta: float

    def __float__(self) -> float:
        return self.value


def _eta_of(p: Exponent, q: Exponent, tol: float = 1e-12) -> float:
    """eta = 1/p - 1/q with the convention 1/inf = 0, validated constant in [0, 1)."""
    rp = np.where(np.isinf(p.values), 0.0, 1.0 / p.values)
    rq = np.where(np.isinf(q.values), 0.0, 1.0 / q.values)
    diff = rp - rq
    dev = float(diff.max() - diff.min())
    if dev > tol:
        raise EtaRelationError(f"1/p - 1/q varies by {dev:.3e}", max_deviation=dev)
    eta = float(diff.mean())
    if eta < -tol or eta >= 1.0:
        raise EtaRelationError(f"eta = {eta} outside [0, 1)", max_deviation=dev)
    return max(eta, 0.0)


def _positive_weight(w, n) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.shape != (n,):
        raise ValidationError(f"weight must have shape ({n},), got {w.shape}")
    if not np.isfinite(w).all() or (w <= 0.0).any():
        i = int(np.argmax(~(np.isfinite(w) & (w > 0.0))))
        raise ValidationError(f"weight must be positive and finite; atom {i} is {w[i]}")
    return w


def apq_constant(space: QuasiMetricSpace, p: Exponent, q: Exponent, w,
                 tol: float = 1e-12) -> ApqResult:
    """sup over balls of mu(B)^(eta-1) ||w chi_B|| ||w^-1 chi_B|| with witness."""
    w = _positive_weight(w, space.n)
    eta = _eta_of(p, q)
    sys = ball_system(space)
    prods = _pair_norm_products(space, q, conjugate(p), w, sys.mask, tol)
    vals = sys.measures ** (eta - 1.0) * prods
    best = int(np.argmax(vals))
    return ApqResult(value=float(vals[best]), witness=sys.balls[best], eta=eta)


def apq_dyadic_constant(grid, p: Exponent, q: Exponent, w, tol: float = 1e-12) -> ApqResult:
    """Same product maximized over the grid's cubes instead of balls."""
    space = grid.space
    w = _positive_weight(w, space.n)
    eta = _eta_of(p, q)
    mask = np.zeros((len(grid.cubes), space.n), dtype=bool)
    for i, cube in enumerate(grid.cubes):
        mask[i, cube.members] = True
    measures = mask.astype(np.float64) @ space.mass
    prods = _pair_norm_products(space, q, conjugate(p), w, mask, tol)
    vals = measures ** (eta - 1.0) * prods
    best = int(np.argmax(vals))
    return ApqResult(value=float(vals[best]), witness=grid.cubes[best], eta=eta)


def _pair_norm_products(space, q, p_conj, w, mask, tol):
    inv = 1.0 / w
    out = np.empty(len(mask))
    chunk = max(1, 4_000_000 // max(1, space.n))
    for start in range(0, len(mask), chunk):
        sl = slice(start, min(start + chunk, len(mask)))
        m = mask[sl]
        a = luxemburg_norm_rows(space, q, m * w[None, :], tol)
        b = luxemburg_norm_rows(space, p_conj, m * inv[None, :], tol)
        out[sl] = a * b
    return out


def dual_constants(space: QuasiMetricSpace, p: Exponent, q: Exponent, w,
                   tol: float = 1e-12) -> tuple:
    """The weight constant of w and of 1/w for the conjugate exponent pair."""
    w = _positive_weight(w, space.n)
    primal = apq_constant(space, p, q, w, tol)
    dual = apq_constant(space, conjugate(q), conjugate(p), 1.0 / w, tol)
    return float(primal), float(dual)


def specialized_constants(space: QuasiMetricSpace, p: Exponent, q: Exponent, w,
                          tol: float = 1e-12) -> dict:
    """The parent constant next to its classical and self-pair specializations.

    For constant exponents the closed-form Muckenhoupt products are included;
    they agree with the parent constant by exponent algebra.
    """
    w = _positive_weight(w, space.n)
    parent = apq_constant(space, p, q, w, tol)
    out = {
        "apq": float(parent),
        "a_q_self": float(apq_constant(space, q, q, w, tol)),
        "a_pprime_dual_self": float(apq_constant(space, conjugate(p), conjugate(p), 1.0 / w, tol)),
    }
    p_const = p.p_minus == p.p_plus
    q_const = q.p_minus == q.p_plus
    if p_const and q_const:
        pc, qc = p.p_minus, q.p_minus
        sys = ball_system(space)
        mf = sys.mask.astype(np.float64)
        W = mf @ (w ** qc * space.mass)
        pp = pc / (pc - 1.0) if pc > 1.0 else np.inf
        eta = parent.eta
        if np.isfinite(pp):
            sig = mf @ (w ** (-pp) * space.mass)
            vals = sys.measures ** (eta - 1.0) * W ** (1.0 / qc) * sig ** (1.0 / pp)
        else:
            sup_inv = np.where(sys.mask, (1.0 / w)[None, :], 0.0).max(axis=1)
            vals = sys.measures ** (eta - 1.0) * W ** (1.0 / qc) * sup_inv
        out["classical_apq"] = float(vals.max())
        if pc == qc and pc > 1.0:
            mu = sys.measures
            ap = (W / mu) * (sig / mu) ** (pc - 1.0)
            out["classical_ap_of_power_measure"] = float(ap.max())
    return out


def derived_measures(space: QuasiMetricSpace, p: Exponent, q: Exponent, w) -> WeightRecord:
    """Atoms of W = w^q * mass and sigma = w^(-p') * mass (w^-1 where p = 1)."""
    w = _positive_weight(w, space.n)
    _eta_of(p, q)
    pp = conjugate(p).values
    with np.errstate(over="ignore"):  # extreme weights are caught just below
        W = w ** q.values * space.mass
        sigma = np.where(np.isinf(pp), 1.0 / w,
                         w ** -np.where(np.isinf(pp), 1.0, pp)) * space.mass
    for name, atoms in (("W", W), ("sigma", sigma)):
        if not np.isfinite(atoms).all() or (atoms <= 0.0).any():
            i = int(np.argmax(~(np.isfinite(atoms) & (atoms > 0.0))))
            raise ValidationError(f"{name}-atom at point {i} is {atoms[i]}; weight too extreme")
    return WeightRecord(w=w, W_atoms=W, sigma_atoms=sigma)


def _subsets_of(members: np.ndarray, rng) -> np.ndarray:
    """Nonempty subset masks of a ball: exhaustive when small, else seeded samples."""
    m = len(members)
    if m <= SUBSET_EXHAUSTIVE_LIMIT:
        codes = np.arange(1, 2 ** m, dtype=np.uint64)
        bits = (codes[:, None] >> np.arange(m, dtype=np.uint64)[None, :]) & 1
        return bits.astype(bool)
    picks = rng.random((SUBSET_SAMPLES, m)) < 0.5
    empty = ~picks.any(axis=1)
    picks[empty, rng.integers(0, m, size=int(empty.sum()))] = True
    return picks


def a_infty_diagnostics(space: QuasiMetricSpace, measure_atoms, seed: int = 0) -> AInftyReport:
    """Fit the two subset-ratio inequalities between a measure and the base measure.

    Over every enumerated ball B and subsets E of B, finds the smallest
    constants on the exponent grid with mu(E)/mu(B) <= C2 (m(E)/m(B))^eps and
    m(E)/m(B) <= C1 (mu(E)/mu(B))^delta, and the doubling constant of m.
    """
    atoms = np.asarray(measure_atoms, dtype=float)
    if (atoms <= 0.0).any():
        i = int(np.argmax(atoms <= 0.0))
        raise ValidationError(f"nonpositive measure atom at point {i}")
    rng = np.random.default_rng(seed)
    sys = ball_system(space)
    rmu, rom = [], []
    for b in sys.balls:
        members = np.asarray(b.members)
        subs = _subsets_of(members, rng)
        mu_e = subs @ space.mass[members]
        om_e = subs @ atoms[members]
        rmu.append(mu_e / b.measure)
        rom.append(om_e / atoms[members].sum())
    rmu = np.concatenate(rmu)
    rom = np.concatenate(rom)

    best_eps, best_c2 = EPS_GRID[0], np.inf
    best_delta, best_c1 = EPS_GRID[0], np.inf
    for e in EPS_GRID:
        c2 = float((rmu / rom ** e).max())
        if c2 < best_c2:
            best_eps, best_c2 = e, c2
        c1 = float((rom / rmu ** e).max())
        if c1 < best_c1:
            best_delta, best_c1 = e, c1
    return AInftyReport(delta=best_delta, c1=best_c1, epsilon=best_eps, c2=best_c2,
                        doubling_of_weight=doubling_constant(space, atoms))


def _solve_extremal_scale(masses, exponents, target: float = 1.0 / 3.0) -> float:
    """Root of sum(masses * t^-exponents) = target; strictly decreasing in t."""
    lo, hi = 1.0, 1.0

    def g(t):
        return float((masses * t ** -exponents).sum())

    for _ in range(200):
        if g(lo) > target:
            break
        lo /= 4.0
    for _ in range(200):
        if g(hi) < target:
            break
        hi *= 4.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) > target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-13 * hi:
            break
    return 0.5 * (lo + hi)


def extremal_test_functions(space: QuasiMetricSpace, p: Exponent, w, ball: Ball,
                            r_caps=(4.0, 16.0, None)) -> list:
    """Hardest inputs for the lower operator bound on a given ball.

    For each conjugate-exponent cap R: f = w^(-p') * t^(1-p') on the sub-ball
    where p' < R, with the scale t normalizing the localized modular to 1/3.
    Indicators of the ball, its closer half and its center round out the family.
    """
    if not ball.members:
        raise ValidationError("extremal functions need a nonempty ball")
    w = _positive_weight(w, space.n)
    pp = conjugate(p).values
    members = np.asarray(ball.members)
    out = []
    for cap in r_caps:
        label = "inf" if cap is None else f"{cap:g}"
        sub = members[np.isfinite(pp[members])] if cap is None else members[pp[members] < cap]
        if sub.size == 0:
            continue
        t = _solve_extremal_scale(space.mass[sub] * w[sub] ** -pp[sub], pp[sub])
        f = np.zeros(space.n)
        f[sub] = w[sub] ** -pp[sub] * t ** (1.0 - pp[sub])
        out.append(TestFunction(f"extremal_R{label}", f))

    chi = np.zeros(space.n)
    chi[members] = 1.0
    out.append(TestFunction("indicator_ball", chi))
    if len(members) > 1:
        by_dist = members[np.argsort(space.dist[ball.center][members], kind="stable")]
        half = np.zeros(space.n)
        half[by_dist[:max(1, len(members) // 2)]] = 1.0
        out.append(TestFunction("indicator_half", half))
    center = np.zeros(space.n)
    center[ball.center] = 1.0
    out.append(TestFunction("indicator_center", center))
    # drop duplicates (singleton balls make half/center coincide with the ball)
    uniq, seen = [], set()
    for tf in out:
        key = tf.values.tobytes()
        if key not in seen:
            seen.add(key)
            uniq.append(tf)
    return uniq
