"""Concave scaling functions ("gauges") and certified comparisons against them.

A gauge is an increasing function u on [0, inf) with u(0) = 0 used in two
places: the coupled continued-fraction construction (where windows of the
form [2*u^-1(e^q), 3*u^-1(e^q)] must be hit exactly) and the subshift metric
rho(x, y) = exp(-u(k(x, y))).

Three kinds are provided:

* ``PowerGauge``      u(x) = c * x^nu, 0 < nu <= 1  (the honest section-6 shape)
* ``LogGauge``        u(t) = log(t)/d for t >= 1, u(t) = 0 below (subshift metric)
* ``PiecewiseLinearGauge``  a concave rational polyline with a concave power
  tail; this is the "user table" kind and is what the desk-scale torus profile
  uses.

All window verifications go through interval arithmetic (mpmath.iv) with
escalating precision, so every certificate comparison is exact-or-fails,
never a bare float comparison.
"""

from __future__ import annotations

from fractions import Fraction

import mpmath as mp
from mpmath import iv

from .errors import InputError, PrecisionError

_MAX_CERT_PREC = 120000  # bits; certificates for desk-scale towers fit well below


class _ivprec:
    """Set/restore the interval context precision (iv has no workprec)."""

    def __init__(self, prec: int):
        self.prec = prec

    def __enter__(self):
        self._old = iv.prec
        iv.prec = self.prec

    def __exit__(self, *exc):
        iv.prec = self._old
        return False


def certified_cmp(lhs_fn, rhs_fn, start_prec: int = 128):
    """Compare two exactly-defined reals via escalating interval precision.

    ``lhs_fn``/``rhs_fn`` take no arguments and must evaluate under the
    ambient ``iv.prec`` to enclosures of the quantities being compared.
    Returns -1, 0 is never returned (ties escalate), +1; raises
    PrecisionError if the enclosures never separate.
    """
    prec = start_prec
    while prec <= _MAX_CERT_PREC:
        with _ivprec(prec):
            a = lhs_fn()
            b = rhs_fn()
            if a.b < b.a:
                return -1
            if a.a > b.b:
                return 1
        prec *= 2
    raise PrecisionError(
        "interval enclosures did not separate below %d bits" % _MAX_CERT_PREC
    )


def certified_le(lhs_fn, rhs_fn, start_prec: int = 128) -> bool:
    return certified_cmp(lhs_fn, rhs_fn, start_prec) < 0


def _iv_from_fraction(x: Fraction):
    return iv.mpf(x.numerator) / iv.mpf(x.denominator)


def _to_mpf(x):
    if isinstance(x, Fraction):
        return mp.mpf(x.numerator) / mp.mpf(x.denominator)
    return mp.mpf(x)


class GaugeFunction:
    """Base class; subclasses implement the evaluation hooks."""

    kind = "abstract"

    # -- plain (mpf) evaluation ------------------------------------------------
    def value(self, x) -> mp.mpf:
        raise NotImplementedError

    def inverse(self, s) -> mp.mpf:
        raise NotImplementedError

    def log_inverse_exp(self, q) -> mp.mpf:
        """ln(u^-1(e^q)); stable even when e^q overflows floats."""
        raise NotImplementedError

    def inverse_exp(self, q) -> mp.mpf:
        return mp.exp(self.log_inverse_exp(q))

    def ratio_inverse(self, target) -> mp.mpf:
        """Approximate solution q of q/u(q) = target (the map is increasing).

        Generic log-domain bisection; subclasses override with closed forms.
        """
        target = _to_mpf(target)

        def log_ratio(t):
            q = mp.exp(t)
            return mp.log(q) - mp.log(self.value(q))

        goal = mp.log(target)
        lo, hi = mp.mpf(0), mp.mpf(1)
        while log_ratio(hi) < goal:
            hi *= 2
        for _ in range(mp.mp.prec + 10):
            mid = (lo + hi) / 2
            if log_ratio(mid) < goal:
                lo = mid
            else:
                hi = mid
        return mp.exp(hi)

    # -- interval evaluation (used by certificates) ----------------------------
    def iv_value(self, x):
        raise NotImplementedError

    def iv_inverse_exp(self, q):
        raise NotImplementedError

    # -- shared checks ---------------------------------------------------------
    def roundtrip_error(self, t) -> float:
        """Relative error of u^-1(u(t)) against t."""
        t = _to_mpf(t)
        back = self.inverse(self.value(t))
        return float(abs(back - t) / t)

    def section6_admissible(self, samples=(1, 2, 5, 10, 100, 10_000)) -> dict:
        """Check u(1) >= 1 and u(x) <= x^(3/4) on sample points >= 1."""
        u1_ok = self.value(1) >= 1
        power_ok = all(self.value(x) <= mp.mpf(x) ** mp.mpf(0.75) for x in samples)
        return {"u1_ge_1": bool(u1_ok), "below_x34": bool(power_ok),
                "admissible": bool(u1_ok and power_ok)}

    def concavity_report(self, samples) -> bool:
        """Difference-quotient concavity on a sorted sample grid."""
        pts = sorted(_to_mpf(s) for s in samples)
        slopes = [(self.value(b) - self.value(a)) / (b - a)
                  for a, b in zip(pts, pts[1:])]
        return all(s1 >= s2 - mp.mpf("1e-30") for s1, s2 in zip(slopes, slopes[1:]))


class PowerGauge(GaugeFunction):
    """u(x) = coefficient * x^exponent with 0 < exponent <= 1."""

    kind = "power"

    def __init__(self, exponent=Fraction(3, 4), coefficient=Fraction(1)):
        exponent = Fraction(exponent)
        coefficient = Fraction(coefficient)
        if not (0 < exponent <= 1):
            raise InputError("power gauge exponent must lie in (0, 1]")
        if coefficient <= 0:
            raise InputError("power gauge coefficient must be positive")
        self.exponent = exponent
        self.coefficient = coefficient

    def value(self, x):
        x = _to_mpf(x)
        return _to_mpf(self.coefficient) * x ** _to_mpf(self.exponent)

    def inverse(self, s):
        s = _to_mpf(s)
        return (s / _to_mpf(self.coefficient)) ** (1 / _to_mpf(self.exponent))

    def log_inverse_exp(self, q):
        q = _to_mpf(q)
        return (q - mp.log(_to_mpf(self.coefficient))) / _to_mpf(self.exponent)

    def ratio_inverse(self, target):
        # q^(1-nu)/c = target  =>  q = (c*target)^(1/(1-nu)); exponent 1 never
        # occurs here (the ratio would be constant and the window unreachable).
        nu = _to_mpf(self.exponent)
        if nu == 1:
            raise InputError("ratio q/u(q) is constant for exponent 1")
        return (_to_mpf(self.coefficient) * _to_mpf(target)) ** (1 / (1 - nu))

    def iv_value(self, x):
        xi = iv.mpf(x) if not isinstance(x, Fraction) else _iv_from_fraction(x)
        return _iv_from_fraction(self.coefficient) * xi ** _iv_from_fraction(self.exponent)

    def iv_inverse_exp(self, q):
        qi = iv.mpf(q)
        c = _iv_from_fraction(self.coefficient)
        nu = _iv_from_fraction(self.exponent)
        return iv.exp((qi - iv.log(c)) / nu)


class LogGauge(GaugeFunction):
    """u(t) = log(t)/d for t >= 1 and 0 below; the section-7 metric gauge."""

    kind = "log"

    def __init__(self, dimension=1):
        if not dimension > 0:
            raise InputError("log gauge dimension must be positive")
        self.dimension = Fraction(dimension)

    def value(self, x):
        x = _to_mpf(x)
        if x <= 1:
            return mp.mpf(0)
        return mp.log(x) / _to_mpf(self.dimension)

    def inverse(self, s):
        s = _to_mpf(s)
        if s <= 0:
            return mp.mpf(1)
        return mp.exp(s * _to_mpf(self.dimension))

    def log_inverse_exp(self, q):
        return mp.exp(_to_mpf(q)) * _to_mpf(self.dimension)

    def iv_value(self, x):
        xi = iv.mpf(x) if not isinstance(x, Fraction) else _iv_from_fraction(x)
        return iv.log(xi) / _iv_from_fraction(self.dimension)

    def iv_inverse_exp(self, q):
        return iv.exp(iv.exp(iv.mpf(q)) * _iv_from_fraction(self.dimension))

    # metric helpers used by the subshift module
    def distance(self, k: int) -> float:
        """exp(-u(k)) = k^(-1/d) for k >= 1, 1 for k = 0."""
        if k <= 1:
            return 1.0
        return float(mp.e ** (-self.value(k)))


class PiecewiseLinearGauge(GaugeFunction):
    """Concave rational polyline through (0,0) with a concave power tail.

    ``points`` are (x_i, y_i) pairs with strictly increasing x and y and
    strictly decreasing chord slopes; beyond the last point the gauge
    continues as y_last * (x/x_last)^tail_exponent, with the tail slope not
    exceeding the last segment slope (checked).
    """

    kind = "user-table"

    def __init__(self, points, tail_exponent=Fraction(1, 5)):
        pts = [(Fraction(x), Fraction(y)) for x, y in points]
        if not pts or pts[0][0] <= 0:
            raise InputError("need at least one breakpoint with x > 0")
        pts = [(Fraction(0), Fraction(0))] + pts
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        if any(b <= a for a, b in zip(xs, xs[1:])) or any(b <= a for a, b in zip(ys, ys[1:])):
            raise InputError("breakpoints must be strictly increasing in x and y")
        slopes = [(y2 - y1) / (x2 - x1)
                  for (x1, y1), (x2, y2) in zip(pts, pts[1:])]
        if any(s2 >= s1 for s1, s2 in zip(slopes, slopes[1:])):
            raise InputError("segment slopes must strictly decrease (concavity)")
        tail_exponent = Fraction(tail_exponent)
        if not (0 < tail_exponent < 1):
            raise InputError("tail exponent must lie in (0, 1)")
        x_last, y_last = pts[-1]
        if tail_exponent * y_last / x_last > slopes[-1]:
            raise InputError("power tail would break concavity at the last breakpoint")
        self.points = pts
        self.slopes = slopes
        self.tail_exponent = tail_exponent
        self.x_last = x_last
        self.y_last = y_last

    # exact evaluation on the polyline part
    def value_fraction(self, x) -> Fraction:
        x = Fraction(x)
        if x > self.x_last:
            raise InputError("x beyond the polyline; tail value is irrational")
        for (x1, y1), (x2, y2), s in zip(self.points, self.points[1:], self.slopes):
            if x <= x2:
                return y1 + (x - x1) * s
        raise AssertionError("unreachable")

    def value(self, x):
        xf = Fraction(x) if isinstance(x, (int, Fraction)) else None
        if xf is not None and xf <= self.x_last:
            return _to_mpf(self.value_fraction(xf))
        x = _to_mpf(x)
        if x <= _to_mpf(self.x_last):
            return _to_mpf(self.value_fraction(Fraction(str(x))))
        nu = _to_mpf(self.tail_exponent)
        return _to_mpf(self.y_last) * (x / _to_mpf(self.x_last)) ** nu

    def inverse(self, s):
        s = _to_mpf(s)
        if s <= _to_mpf(self.y_last):
            for (x1, y1), (x2, y2), sl in zip(self.points, self.points[1:], self.slopes):
                if s <= _to_mpf(y2):
                    return _to_mpf(x1) + (s - _to_mpf(y1)) / _to_mpf(sl)
        nu = _to_mpf(self.tail_exponent)
        return _to_mpf(self.x_last) * (s / _to_mpf(self.y_last)) ** (1 / nu)

    def log_inverse_exp(self, q):
        q = _to_mpf(q)
        log_y_last = mp.log(_to_mpf(self.y_last))
        if q <= log_y_last:
            return mp.log(self.inverse(mp.exp(q)))
        nu = _to_mpf(self.tail_exponent)
        return mp.log(_to_mpf(self.x_last)) + (q - log_y_last) / nu

    def ratio_inverse(self, target):
        target = _to_mpf(target)
        # polyline segments: q/(y1 + (q - x1) s) = target has the solution
        # q = target (y1 - x1 s) / (1 - target s) when it lands inside the segment
        for (x1, y1), (x2, y2), s in zip(self.points, self.points[1:], self.slopes):
            x1m, y1m, sm = _to_mpf(x1), _to_mpf(y1), _to_mpf(s)
            denom = 1 - target * sm
            if denom <= 0:
                continue
            q = target * (y1m - x1m * sm) / denom
            if _to_mpf(x1) <= q <= _to_mpf(x2):
                return q
        # power tail: q^(1-nu) x_last^nu / y_last = target
        nu = _to_mpf(self.tail_exponent)
        q = (target * _to_mpf(self.y_last) / _to_mpf(self.x_last) ** nu) ** (1 / (1 - nu))
        return q

    def iv_value(self, x):
        xf = Fraction(x) if isinstance(x, (int, Fraction)) else Fraction(str(x))
        if xf <= self.x_last:
            return _iv_from_fraction(self.value_fraction(xf))
        nu = _iv_from_fraction(self.tail_exponent)
        return (_iv_from_fraction(self.y_last)
                * (_iv_from_fraction(xf) / _iv_from_fraction(self.x_last)) ** nu)

    def iv_inverse_exp(self, q):
        qi = iv.mpf(q)
        y_last = _iv_from_fraction(self.y_last)
        # decide the branch with a plain comparison; q is an integer in all uses
        if mp.mpf(q) <= mp.log(_to_mpf(self.y_last)):
            eq = iv.exp(qi)
            for (x1, y1), (x2, y2), sl in zip(self.points, self.points[1:], self.slopes):
                if mp.exp(mp.mpf(q)) <= _to_mpf(y2):
                    return (_iv_from_fraction(x1)
                            + (eq - _iv_from_fraction(y1)) / _iv_from_fraction(sl))
        nu = _iv_from_fraction(self.tail_exponent)
        return _iv_from_fraction(self.x_last) * iv.exp((qi - iv.log(y_last)) / nu)


def toy_gauge() -> PiecewiseLinearGauge:
    """The pinned desk-scale gauge for the torus profile.

    Polyline (0,0) -> (1/4, 3) -> (50, 2991/400) -> (2000, 3771/400), then a
    x^(1/5) power tail.  Concave, increasing, u(1) > 1; it deliberately does
    NOT satisfy u(x) <= x^(3/4) (no gauge satisfying that stays desk-scale
    for three coupled levels), which the torus profile documents.
    """
    return PiecewiseLinearGauge(
        points=[(Fraction(1, 4), Fraction(3)),
                (Fraction(50), Fraction(2991, 400)),
                (Fraction(2000), Fraction(3771, 400))],
        tail_exponent=Fraction(1, 5),
    )
