"""Modular, Luxemburg norm and the weak-type quasi-norm.

The norm is located by bisection on the scale parameter: the modular of f/t
is non-increasing and continuous in t, so the infimum of {t : modular <= 1}
is its unique crossing point.  Bisection (rather than a derivative method) is
deliberate: with an inf-set present the modular is only piecewise smooth.
All callers share one batched kernel so that ball sweeps can solve thousands
of norms per numpy pass.
"""

from __future__ import annotations

import numpy as np

from .exponents import Exponent
from .spaces import QuasiMetricSpace, ValidationError

MAX_BISECT = 100


def modular(space: QuasiMetricSpace, p: Exponent, f) -> float:
    """Sum of |f|^p(x) * mass(x) over finite exponents plus sup |f| on the inf-set."""
    f = np.asarray(f, dtype=float)
    fin = ~p.inf_mask
    s = float(((np.abs(f[fin]) ** p.values[fin]) * space.mass[fin]).sum())
    if (~fin).any():
        s += float(np.abs(f[~fin]).max())
    return s


def luxemburg_norm(space: QuasiMetricSpace, p: Exponent, f, tol: float = 1e-12) -> float:
    return float(luxemburg_norm_rows(space, p, np.asarray(f, dtype=float)[None, :], tol)[0])


def luxemburg_norm_rows(space: QuasiMetricSpace, p: Exponent, rows, tol: float = 1e-12) -> np.ndarray:
    """Luxemburg norms of many functions at once (one per row).

    Starts from the bracket [max|f| * min(mass)^(1/p_minus) * guard,
    sum|f| mass + max|f|], widens geometrically until the modular straddles 1,
    then bisects to relative tolerance ``tol``.
    """
    if tol <= 0:
        raise ValidationError(f"tolerance must be positive, got {tol}")
    rows = np.abs(np.asarray(rows, dtype=float))
    if rows.ndim != 2 or rows.shape[1] != space.n:
        raise ValidationError(f"rows must be (m, {space.n}), got {rows.shape}")
    fin = ~p.inf_mask
    pv = p.values[fin]
    mv = space.mass[fin]
    sup_vals = rows[:, ~fin].max(axis=1) if (~fin).any() else np.zeros(len(rows))

    def rho(lam, active):
        t = rows[np.ix_(active, fin)] / lam[active, None]
        s = np.einsum("ij,j->i", t ** pv, mv)
        if (~fin).any():
            s += sup_vals[active] / lam[active]
        return s

    out = np.zeros(len(rows))
    peak = rows.max(axis=1)
    nonzero = peak > 0.0
    if not nonzero.any():
        return out

    p_min_fin = pv.min() if pv.size else 1.0
    lo = peak * (mv.min() ** (1.0 / p_min_fin) if mv.size else 1.0) * 1e-3
    hi = rows[:, fin] @ mv + peak
    lo = np.where(nonzero, np.minimum(lo, hi * 0.5), 1.0)
    hi = np.where(nonzero, hi, 1.0)

    with np.errstate(over="ignore", divide="ignore"):
        for _ in range(64):
            active = nonzero & (rho_safe(rho, lo, nonzero) < 1.0)
            if not active.any():
                break
            lo[active] /= 8.0
        for _ in range(64):
            active = nonzero & (rho_safe(rho, hi, nonzero) > 1.0)
            if not active.any():
                break
            hi[active] *= 8.0

        active = nonzero.copy()
        for _ in range(MAX_BISECT):
            mid = 0.5 * (lo + hi)
            val = np.ones(len(rows))
            val[active] = rho(mid, active)
            high = active & (val > 1.0)
            low = active & ~high
            lo[high] = mid[high]
            hi[low] = mid[low]
            active &= (hi - lo) > tol * np.maximum(hi, 1e-300)
            if not active.any():
                break
    out[nonzero] = 0.5 * (lo + hi)[nonzero]
    return out


def rho_safe(rho, lam, nonzero):
    res = np.full(len(lam), 1.0)
    res[nonzero] = rho(lam, nonzero)
    return np.where(np.isnan(res), np.inf, res)


def weighted_norm(space: QuasiMetricSpace, p: Exponent, w, f, tol: float = 1e-12) -> float:
    """Luxemburg norm of the pointwise product w*f; the weight must be positive."""
    w = np.asarray(w, dtype=float)
    if (w <= 0.0).any():
        i = int(np.argmax(w <= 0.0))
        raise ValidationError(f"nonpositive weight {w[i]} at point {i}")
    return luxemburg_norm(space, p, w * np.asarray(f, dtype=float), tol)


def weak_norm(space: QuasiMetricSpace, q: Exponent, w, g, tol: float = 1e-12) -> float:
    """sup over t > 0 of t * ||w * indicator{g > t}||.

    t -> t*||w chi_{g>t}|| is right-continuous and jumps only at values of g,
    so the supremum is the maximum over the distinct positive values v of g of
    v * ||w chi_{g >= v}|| (the limit from below at each jump).
    """
    g = np.asarray(g, dtype=float)
    if (g < 0.0).any():
        i = int(np.argmax(g < 0.0))
        raise ValidationError(f"weak norm needs a nonnegative function; g[{i}] = {g[i]}")
    w = np.asarray(w, dtype=float)
    if (w <= 0.0).any():
        i = int(np.argmax(w <= 0.0))
        raise ValidationError(f"nonpositive weight {w[i]} at point {i}")
    levels = np.unique(g[g > 0.0])
    if levels.size == 0:
        return 0.0
    rows = np.where(g[None, :] >= levels[:, None], w[None, :], 0.0)
    norms = luxemburg_norm_rows(space, q, rows, tol)
    return float((levels * norms).max())
