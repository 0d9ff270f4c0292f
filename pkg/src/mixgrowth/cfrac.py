"""Exact continued fractions and the coupled denominator-ladder construction.

Everything here is exact: partial quotients and convergents are Python ints,
evaluation points are ``fractions.Fraction``, and the ladder certificates are
decided by escalating interval arithmetic, never by float comparison.

A "level" of the pair construction is one new denominator: levels alternate
q_{n0} (alpha), q'_{n0} (alpha'), q_{n0+1} (alpha), ...  Three levels is the
honest desk-scale maximum: the window for the next denominator is anchored at
exp(previous denominator), so level 4 needs integers with ~exp(q) digits and
fails the bit budget loudly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

import mpmath as mp
from mpmath import iv

from .errors import ConstructionError, InputError, PrecisionError, ResourceError
from .gauges import GaugeFunction, certified_cmp

DEFAULT_BIT_BUDGET = 8 * 2**20  # 1 MiB per denominator


class ContinuedFraction:
    """[0; a_1, a_2, ...] with exact convergents p_n/q_n.

    Immutable after construction; ``extend`` returns a new instance.
    """

    def __init__(self, quotients):
        quotients = [int(a) for a in quotients]
        if any(a < 1 for a in quotients):
            raise InputError("partial quotients must be positive integers")
        self.quotients = tuple(quotients)
        p = [1, 0]   # p_{-1}, p_0
        q = [0, 1]   # q_{-1}, q_0
        for a in quotients:
            p.append(a * p[-1] + p[-2])
            q.append(a * q[-1] + q[-2])
        # drop the index -1 seed column: index n -> list position n + 1
        self._p = p[1:]
        self._q = q[1:]

    # -- basic accessors --------------------------------------------------
    @property
    def depth(self) -> int:
        """Largest stored index N (quotient count)."""
        return len(self.quotients)

    def numerator(self, n: int) -> int:
        self._check_index(n)
        return self._p[n]

    def denominator(self, n: int) -> int:
        self._check_index(n)
        return self._q[n]

    def denominators(self, n: int) -> list:
        """q_0 .. q_n, exactly."""
        self._check_index(n)
        return list(self._q[: n + 1])

    def convergent(self, n: int) -> Fraction:
        self._check_index(n)
        return Fraction(self._p[n], self._q[n])

    def value(self) -> Fraction:
        """The deepest stored convergent p_N/q_N; how alpha is consumed."""
        return self.convergent(self.depth)

    def extend(self, *quotients) -> "ContinuedFraction":
        return ContinuedFraction(list(self.quotients) + list(quotients))

    def _check_index(self, n: int) -> None:
        if not 0 <= n <= self.depth:
            raise InputError(
                "index %d out of range; stored quotients give q_0..q_%d"
                % (n, self.depth)
            )

    # -- exact residuals ---------------------------------------------------
    def signed_residual(self, n: int) -> Fraction:
        """q_n * alpha - p_n evaluated at alpha = p_N/q_N, exactly."""
        N = self.depth
        if n > N:
            raise InputError("index beyond stored depth")
        return Fraction(self._q[n] * self._p[N] - self._p[n] * self._q[N], self._q[N])

    def determinant_identity_holds(self) -> bool:
        """p_n q_{n-1} - p_{n-1} q_n = (-1)^(n-1) for all stored n >= 1."""
        return all(
            self._p[n] * self._q[n - 1] - self._p[n - 1] * self._q[n] == (-1) ** (n - 1)
            for n in range(1, self.depth + 1)
        )

    def __repr__(self):
        qs = ",".join(str(a) for a in self.quotients[:6])
        if self.depth > 6:
            qs += ",..."
        return "ContinuedFraction([%s]; depth=%d)" % (qs, self.depth)


def distance_to_nearest_integer(x: Fraction) -> Fraction:
    """||x||: exact distance from a rational to the nearest integer."""
    x = Fraction(x)
    frac = x - math.floor(x)
    return min(frac, 1 - frac)


class GapCheck(NamedTuple):
    ok: bool
    lower: Fraction   # 1/(2 q_{n+1})
    value: Fraction   # ||q_n alpha||, alpha = p_N/q_N
    upper: Fraction   # 1/q_{n+1}


def check_denominator_gap(cf: ContinuedFraction, n: int) -> GapCheck:
    """Exact two-sided check 1/(2 q_{n+1}) < ||q_n alpha|| < 1/q_{n+1}.

    alpha is evaluated as the deepest convergent; the bound is only valid
    (and only checked) when the stored depth N satisfies N >= n + 2.
    """
    if n < 1:
        raise InputError("the gap bound is indexed by natural n >= 1")
    if cf.depth < n + 2:
        raise PrecisionError(
            "need convergent depth >= %d to evaluate the gap at n=%d (have %d)"
            % (n + 2, n, cf.depth)
        )
    value = distance_to_nearest_integer(cf.denominator(n) * cf.value())
    lower = Fraction(1, 2 * cf.denominator(n + 1))
    upper = Fraction(1, cf.denominator(n + 1))
    return GapCheck(lower < value < upper, lower, value, upper)


def exp_bound_check(x: Fraction, tol: float = 1e-12) -> bool:
    """4||x|| <= |e^(2 pi i x) - 1| <= 2 pi ||x||, floats, exact ||x||."""
    d = float(distance_to_nearest_integer(Fraction(x)))
    mid = 2.0 * math.sin(math.pi * d)
    return 4.0 * d <= mid + tol and mid <= 2.0 * math.pi * d + tol


# ----------------------------------------------------------------------------
# Coupled pair construction
# ----------------------------------------------------------------------------

@dataclass
class LevelRecord:
    n: int                  # continued-fraction index of the new denominator
    seq: str                # "alpha" or "alpha_prime"
    q: int                  # the new denominator
    quotient: int           # the partial quotient chosen
    q_ratio: float          # q_n / u(q_n), display value
    window_lo: float        # 2 u^-1(e^{prev}), display value
    window_hi: float        # 3 u^-1(e^{prev}), display value
    ok: bool                # both window inequalities certified

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "seq": self.seq,
            "q_n": str(self.q),
            "q_ratio": self.q_ratio,
            "window_lo": self.window_lo,
            "window_hi": self.window_hi,
            "ok": self.ok,
        }


@dataclass
class LiouvilleCertificate:
    gauge_kind: str
    n0: int
    levels: int
    section6_admissible: bool
    records: list = field(default_factory=list)

    @property
    def all_ok(self) -> bool:
        return all(r.ok for r in self.records)

    def to_json(self, indent=None) -> str:
        return json.dumps(
            {
                "gauge": self.gauge_kind,
                "n0": self.n0,
                "levels": self.levels,
                "section6_admissible": self.section6_admissible,
                "levels_certified": [r.to_dict() for r in self.records],
            },
            indent=indent,
        )


def _ratio_iv(gauge: GaugeFunction, q: int):
    return iv.mpf(q) / gauge.iv_value(q)


def _window_iv(gauge: GaugeFunction, q_prev: int, factor: int):
    return iv.mpf(factor) * gauge.iv_inverse_exp(q_prev)


def _cmp_floor(gauge, q, q_prev) -> int:
    """Sign of q/u(q) - 2*u^-1(e^{q_prev}), certified (never 0)."""
    return certified_cmp(lambda: _ratio_iv(gauge, q),
                         lambda: _window_iv(gauge, q_prev, 2))


def _cmp_ceiling(gauge, q, q_prev) -> int:
    """Sign of q/u(q) - 3*u^-1(e^{q_prev}), certified (never 0)."""
    return certified_cmp(lambda: _ratio_iv(gauge, q),
                         lambda: _window_iv(gauge, q_prev, 3))


def _approx_digits(x: mp.mpf) -> int:
    if x <= 0:
        return 1
    return int(mp.floor(x / mp.log(10))) + 1


def _minimal_quotient(gauge: GaugeFunction, q1: int, q2: int, q_prev: int,
                      bit_budget: int, level_name: str) -> int:
    """Smallest a >= 1 with (a*q1 + q2)/u(a*q1 + q2) at or above the window floor.

    q1, q2 are the two previous denominators of the sequence being extended.
    The candidate comes from the gauge's closed-form ratio inversion; its
    minimality is then certified by interval comparisons on the neighbours.
    """
    log_lo = mp.log(2) + gauge.log_inverse_exp(q_prev)  # ln of the window floor
    # the new denominator is >= u(1) * window floor >= window floor
    predicted_bits = float(log_lo / mp.log(2))
    if predicted_bits > bit_budget:
        raise ResourceError(
            "%s: predicted denominator needs ~%.3g bits, budget is %d"
            % (level_name, predicted_bits, bit_budget)
        )
    # pass 1: magnitude of the solution; pass 2: full-precision solve
    with mp.workdps(60):
        q_mag = gauge.ratio_inverse(2 * gauge.inverse_exp(q_prev))
        mag_bits = float(mp.log(q_mag, 2)) if q_mag > 1 else 1.0
    if mag_bits > bit_budget:
        raise ResourceError(
            "%s: denominator needs ~%.3g bits, budget is %d"
            % (level_name, mag_bits, bit_budget)
        )
    digits = max(60, int(mag_bits / 3.32) + 60)
    with mp.workdps(digits):
        target = mp.mpf(2) * gauge.inverse_exp(q_prev)
        q_star = gauge.ratio_inverse(target)
        a = int(mp.ceil((q_star - q2) / q1))
    a = max(a, 1)
    # certified walk to the exact greedy minimum (the float solve is off by
    # at most a few ulps, so this loop runs O(1) times)
    while a > 1 and _cmp_floor(gauge, (a - 1) * q1 + q2, q_prev) > 0:
        a -= 1
    while _cmp_floor(gauge, a * q1 + q2, q_prev) < 0:
        a += 1
    return a


def construct_liouville_pair(gauge: GaugeFunction, n0: int, levels: int,
                             seed_quotients=((), ()),
                             bit_budget: int = DEFAULT_BIT_BUDGET,
                             require_power_bound: bool = True):
    """Build (alpha, alpha') whose denominators satisfy the coupled windows.

    Level j = 1, 2, 3, ... adds one denominator, alternating between the two
    expansions starting with alpha at index n0.  The certificate carries, per
    level, q_n/u(q_n) and the window [2 u^-1(e^{q_prev}), 3 u^-1(e^{q_prev})],
    with both inequalities certified by interval arithmetic.

    Seeds carry no guarantee; they must pin the expansions exactly up to
    index n0 - 1.
    """
    if n0 < 1:
        raise InputError("n0 must be >= 1")
    if levels < 0:
        raise InputError("levels must be >= 0")
    seed_a, seed_b = (list(seed_quotients[0]), list(seed_quotients[1]))
    if len(seed_a) != n0 - 1 or len(seed_b) != n0 - 1:
        raise InputError(
            "seeds must supply exactly n0-1 = %d partial quotients each" % (n0 - 1)
        )
    admissible = gauge.section6_admissible()
    if require_power_bound and not admissible["admissible"]:
        raise InputError(
            "gauge fails the section-6 admissibility (u(1) >= 1, u <= x^(3/4)); "
            "pass require_power_bound=False for a documented desk-scale profile"
        )

    cf_a = ContinuedFraction(seed_a)
    cf_b = ContinuedFraction(seed_b)
    cert = LiouvilleCertificate(
        gauge_kind=gauge.kind, n0=n0, levels=levels,
        section6_admissible=admissible["admissible"],
    )
    for j in range(1, levels + 1):
        extending_alpha = (j % 2 == 1)
        cur, other = (cf_a, cf_b) if extending_alpha else (cf_b, cf_a)
        n = cur.depth + 1
        # Eq.-11 anchors: q_n is windowed by q'_{n-1}; q'_n is windowed by q_n.
        q_prev = other.denominator(n - 1) if extending_alpha else other.denominator(n)
        name = "level %d (%s, index n=%d)" % (j, "alpha" if extending_alpha else "alpha_prime", n)
        q1 = cur.denominator(cur.depth)            # q_{n-1}
        q2 = cur.denominator(cur.depth - 1) if cur.depth >= 1 else 0
        if cur.depth == 0:
            q1, q2 = 1, 0                          # q_0 = 1, virtual q_{-1} = 0
        a = _minimal_quotient(gauge, q1, q2, q_prev, bit_budget, name)
        q_new = a * q1 + q2
        if q_new.bit_length() > bit_budget:
            raise ResourceError("%s: denominator exceeds the bit budget" % name)
        if _cmp_floor(gauge, q_new, q_prev) < 0 or _cmp_ceiling(gauge, q_new, q_prev) > 0:
            raise ConstructionError(
                "%s: no partial quotient lands q_n/u(q_n) inside the window" % name
            )
        new_cf = cur.extend(a)
        if extending_alpha:
            cf_a = new_cf
        else:
            cf_b = new_cf
        with mp.workdps(40):
            ratio_disp = _display(mp.log(mp.mpf(q_new)) - mp.log(gauge.value(q_new)))
            lo_disp = _display(mp.log(2) + gauge.log_inverse_exp(q_prev))
            hi_disp = _display(mp.log(3) + gauge.log_inverse_exp(q_prev))
        cert.records.append(LevelRecord(
            n=n, seq="alpha" if extending_alpha else "alpha_prime",
            q=q_new, quotient=a, q_ratio=ratio_disp,
            window_lo=lo_disp, window_hi=hi_disp, ok=True,
        ))
    return cf_a, cf_b, cert


def _display(log_value: mp.mpf):
    """float when representable, else a scientific-notation string (JSON-safe)."""
    if log_value < 700:
        return float(mp.exp(log_value))
    log10 = log_value / mp.log(10)
    mantissa = float(mp.power(10, log10 - mp.floor(log10)))
    return "%.6ge%+d" % (mantissa, int(mp.floor(log10)))
