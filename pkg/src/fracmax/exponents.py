"""Variable exponents: conjugation, local ranges and log-Holder constants."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .spaces import QuasiMetricSpace, ValidationError


class EtaRelationError(ValueError):
    """1/p - 1/q is not a constant in [0, 1)."""

    def __init__(self, message, max_deviation=None):
        super().__init__(message)
        self.max_deviation = max_deviation


@dataclass(frozen=True, eq=False)
class Exponent:
    """Per-point exponent in [1, inf]; inf only arises as a conjugate of 1.

    ``p_inf`` is the declared reference value used by the decay-type
    log-Holder constant; on a finite space there is no asymptotic limit, so it
    defaults to the value at the base point when a report is computed.
    """

    values: np.ndarray
    p_inf: float | None = None
    _primal: "Exponent | None" = field(default=None, repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1:
            raise ValidationError(f"exponent values must be 1-d, got shape {v.shape}")
        if np.isnan(v).any():
            raise ValidationError("exponent values contain NaN")
        if (v < 1.0).any():
            i = int(np.argmax(v < 1.0))
            raise ValidationError(f"exponent value {v[i]} < 1 at point {i}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def constant(cls, value: float, n: int) -> "Exponent":
        return cls(np.full(n, float(value)), p_inf=float(value))

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def inf_mask(self) -> np.ndarray:
        return np.isinf(self.values)

    @property
    def inf_set(self) -> tuple:
        return tuple(int(i) for i in np.flatnonzero(self.inf_mask))

    @property
    def p_minus(self) -> float:
        finite = self.values[~self.inf_mask]
        return float(finite.min()) if finite.size else np.inf

    @property
    def p_plus(self) -> float:
        return float(self.values.max())

    @property
    def exponent_class(self) -> str | None:
        """Finest of the standard classes this exponent belongs to."""
        if self.p_minus > 1.0 and self.p_plus < np.inf:
            return "P"
        if self.p_minus >= 1.0 and self.p_plus < np.inf:
            return "P1"
        if self.p_minus > 0.0:
            return "P0"
        return None


@dataclass(frozen=True)
class LHReport:
    """Smallest constants validating the two log-Holder inequalities."""

    c0: float
    c_inf: float
    base_point: int


def conjugate(p: Exponent) -> Exponent:
    """Pointwise p' = p/(p-1), with 1 <-> inf; exact involution."""
    if p._primal is not None:
        return p._primal
    v = p.values
    out = np.empty_like(v)
    one = v == 1.0
    inf = np.isinf(v)
    rest = ~(one | inf)
    out[one] = np.inf
    out[inf] = 1.0
    out[rest] = v[rest] / (v[rest] - 1.0)
    p_inf = None
    if p.p_inf is not None:
        if p.p_inf == 1.0:
            p_inf = np.inf
        elif np.isinf(p.p_inf):
            p_inf = 1.0
        else:
            p_inf = p.p_inf / (p.p_inf - 1.0)
    return Exponent(out, p_inf=p_inf, _primal=p)


def range_on(p: Exponent, subset) -> tuple:
    """(min, max) of the exponent over a nonempty subset; inf counts as max."""
    idx = np.asarray(list(subset), dtype=int)
    if idx.size == 0:
        raise ValidationError("empty subset has no exponent range")
    sub = p.values[idx]
    return float(sub.min()), float(sub.max())


def lh_constants(p: Exponent, space: QuasiMetricSpace, base_point=0) -> LHReport:
    """Fit the sharpest oscillation and decay constants on the finite space.

    c0 bounds |p(x)-p(y)|*log(e+1/d(x,y)) over pairs with 0 < d(x,y) < 1/2
    (0 when no pair qualifies); c_inf bounds |p(x)-p_inf|*log(e+d(x0,x)).
    """
    if p.inf_mask.any():
        raise ValidationError("log-Holder constants require a finite-valued exponent")
    b = space.index_of(base_point)
    v = p.values
    d = space.dist
    close = (d > 0.0) & (d < 0.5)
    c0 = 0.0
    if close.any():
        diff = np.abs(v[:, None] - v[None, :])
        c0 = float((diff[close] * np.log(np.e + 1.0 / d[close])).max())
    p_inf = v[b] if p.p_inf is None else p.p_inf
    c_inf = float((np.abs(v - p_inf) * np.log(np.e + d[b])).max())
    return LHReport(c0=c0, c_inf=c_inf, base_point=b)


def check_eta_relation(p: Exponent, q: Exponent, tol: float = 1e-12) -> float:
    """Return the constant eta = 1/p - 1/q, validated to lie in [0, 1)."""
    if p.inf_mask.any() or q.inf_mask.any():
        raise EtaRelationError("eta relation requires finite exponents on both sides")
    if p.n != q.n:
        raise EtaRelationError(f"exponent lengths differ: {p.n} vs {q.n}")
    diff = 1.0 / p.values - 1.0 / q.values
    dev = float(diff.max() - diff.min())
    if dev > tol:
        raise EtaRelationError(
            f"1/p - 1/q varies by {dev:.3e} (> {tol:.0e}); not a fractional pair",
            max_deviation=dev,
        )
    eta = float(diff.mean())
    if eta < 0.0:
        if eta >= -tol:
            return 0.0
        raise EtaRelationError(f"eta = {eta} is negative", max_deviation=dev)
    if eta >= 1.0:
        raise EtaRelationError(f"eta = {eta} is not below 1", max_deviation=dev)
    return eta
