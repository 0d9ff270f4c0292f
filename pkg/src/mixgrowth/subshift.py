"""Substitution shifts and the Rudin-Shapiro system.

Sequences are numpy arrays: letter codes (uint8) for substitution fixed
points, signs (int8, values +-1) for the Rudin-Shapiro sequence.  The shift
space is only ever touched through finite coordinate windows; with the
metric rho(x, y) = exp(-u(k(x, y))) the windows form an ultrametric space
whose closed balls are "agree out to radius j" classes, so covering numbers
are exact class counts.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import CertificationError, InputError
from .gauges import GaugeFunction, LogGauge
from .metricspace import FiniteMetricSpace

RS_ALPHABET = "ABCD"
RS_RULES = {"A": "AB", "B": "AC", "C": "DB", "D": "DC"}
RS_PROJECTION = {"A": 1, "B": 1, "C": -1, "D": -1}


class Substitution:
    """A map letter -> nonempty word, acting on words by concatenation."""

    def __init__(self, rules: dict, alphabet=None):
        if alphabet is None:
            alphabet = sorted(rules)
        self.alphabet = tuple(alphabet)
        if len(set(self.alphabet)) != len(self.alphabet):
            raise InputError("alphabet letters must be distinct")
        for letter in self.alphabet:
            image = rules.get(letter)
            if not image:
                raise InputError("rule image for %r must be a nonempty word" % letter)
            if any(c not in self.alphabet for c in image):
                raise InputError("rule image %r uses letters outside the alphabet" % image)
        self.rules = {a: str(rules[a]) for a in self.alphabet}
        self._code = {a: i for i, a in enumerate(self.alphabet)}
        self._images = [np.array([self._code[c] for c in self.rules[a]], dtype=np.uint8)
                        for a in self.alphabet]

    @classmethod
    def from_rules_file(cls, path) -> "Substitution":
        """Parse lines of the form ``X -> YZ`` (blank lines and # comments ok)."""
        rules = {}
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                if "->" not in line:
                    raise InputError("bad rule line: %r" % line)
                left, right = (part.strip() for part in line.split("->", 1))
                if len(left) != 1:
                    raise InputError("rule left side must be a single letter: %r" % line)
                rules[left] = right
        return cls(rules)

    # -- word actions -----------------------------------------------------
    def encode(self, word: str) -> np.ndarray:
        try:
            return np.array([self._code[c] for c in word], dtype=np.uint8)
        except KeyError as exc:
            raise InputError("symbol %s outside the alphabet" % exc) from None

    def decode(self, codes) -> str:
        return "".join(self.alphabet[c] for c in codes)

    def apply_codes(self, codes: np.ndarray) -> np.ndarray:
        lengths = {len(img) for img in self._images}
        if len(lengths) == 1:
            width = lengths.pop()
            out = np.empty(len(codes) * width, dtype=np.uint8)
            for pos in range(width):
                table = np.array([img[pos] for img in self._images], dtype=np.uint8)
                out[pos::width] = table[codes]
            return out
        return np.concatenate([self._images[c] for c in codes]) if len(codes) else codes

    def iterate(self, start: str, steps: int) -> str:
        """zeta^steps(start), by concatenation of rule images."""
        if steps < 0:
            raise InputError("steps must be >= 0")
        codes = self.encode(start)
        for _ in range(steps):
            codes = self.apply_codes(codes)
        return self.decode(codes)

    # -- structural checks --------------------------------------------------
    def is_valid_seed(self, letter: str) -> bool:
        image = self.rules.get(letter, "")
        return len(image) >= 2 and image[0] == letter

    def is_primitive(self) -> bool:
        """Some power of the incidence matrix is strictly positive."""
        s = len(self.alphabet)
        inc = np.zeros((s, s), dtype=bool)
        for i, a in enumerate(self.alphabet):
            for c in self.rules[a]:
                inc[i, self._code[c]] = True
        reach = inc.copy()
        for _ in range(s * s):
            if reach.all():
                return True
            reach = reach @ inc
        return bool(reach.all())

    def fixed_point_prefix(self, length: int, seed: str = None) -> np.ndarray:
        """Prefix of the one-sided fixed point starting from ``seed``."""
        if seed is None:
            seed = next((a for a in self.alphabet if self.is_valid_seed(a)), None)
            if seed is None:
                raise InputError("substitution has no expansive seed letter")
        elif not self.is_valid_seed(seed):
            raise InputError("letter %r is not a valid expansion seed" % seed)
        codes = self.encode(seed)
        while len(codes) < length:
            codes = self.apply_codes(codes)
        return codes[:length]


def rudin_shapiro_substitution() -> Substitution:
    return Substitution(RS_RULES, alphabet=RS_ALPHABET)


def rudin_shapiro_prefix(n: int) -> np.ndarray:
    """First n terms of the +-1 sequence v_0=1, v_{2n}=v_n, v_{2n+1}=(-1)^n v_n."""
    if n < 1:
        raise InputError("n must be >= 1")
    v = np.array([1], dtype=np.int8)
    while len(v) < n:
        m = len(v)
        out = np.empty(2 * m, dtype=np.int8)
        out[0::2] = v
        signs = np.where(np.arange(m, dtype=np.int64) % 2 == 0, 1, -1).astype(np.int8)
        out[1::2] = signs * v
        v = out
    return v[:n]


class SymbolSequence:
    """A one-sided sequence with a growable cached prefix.

    Generators: a substitution fixed point, the Rudin-Shapiro recurrence, or
    a letter projection of a substitution fixed point.
    """

    def __init__(self, generator, name: str):
        self._generator = generator
        self.name = name
        self._cache = generator(1)

    @classmethod
    def fixed_point(cls, subst: Substitution, seed: str = None) -> "SymbolSequence":
        return cls(lambda n: subst.fixed_point_prefix(n, seed), "fixed-point")

    @classmethod
    def rudin_shapiro(cls) -> "SymbolSequence":
        return cls(rudin_shapiro_prefix, "rudin-shapiro")

    @classmethod
    def projected(cls, subst: Substitution, mapping: dict, seed: str = None) -> "SymbolSequence":
        table = np.array([mapping[a] for a in subst.alphabet], dtype=np.int8)

        def gen(n):
            return table[subst.fixed_point_prefix(n, seed)]

        return cls(gen, "projected")

    def prefix(self, n: int) -> np.ndarray:
        if n < 1:
            raise InputError("prefix length must be >= 1")
        if len(self._cache) < n:
            self._cache = self._generator(n)
        return self._cache[:n]


def language(seq: SymbolSequence, word_length: int, scan_length: int) -> dict:
    """Distinct factors of the prefix with occurrence counts.

    Keys are ``bytes`` of the raw symbol codes; counts are occurrence counts
    in the first ``scan_length`` symbols.
    """
    if scan_length < word_length:
        raise InputError("scan length must be >= word length")
    if word_length < 1:
        raise InputError("word length must be >= 1")
    prefix = seq.prefix(scan_length)
    windows = sliding_window_view(prefix, word_length)
    uniq, counts = np.unique(windows, axis=0, return_counts=True)
    return {row.tobytes(): int(c) for row, c in zip(uniq, counts)}


def complexity(seq: SymbolSequence, word_length: int, scan_length: int = None) -> int:
    """p_n: the number of distinct factors of the given length."""
    if scan_length is None:
        scan_length = 64 * word_length
    return len(language(seq, word_length, scan_length))


def word_frequency(seq: SymbolSequence, z, scan_length: int) -> float:
    """Occurrences of z in the length-N prefix divided by N."""
    z = np.asarray(z)
    if scan_length < len(z):
        raise InputError("scan length must be >= |z|")
    prefix = seq.prefix(scan_length)
    windows = sliding_window_view(prefix, len(z))
    hits = int((windows == z).all(axis=1).sum())
    return hits / scan_length


def _thread_count() -> int:
    raw = os.environ.get("MIXGROWTH_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def correlation(seq: SymbolSequence, lag: int, scan_length: int) -> float:
    """(1/N) sum_{n<N} v_n v_{n+k} with exact integer accumulation."""
    if lag < 0 or scan_length < 1:
        raise InputError("need lag >= 0 and scan length >= 1")
    prefix = seq.prefix(scan_length + lag).astype(np.int64)
    a = prefix[:scan_length]
    b = prefix[lag:lag + scan_length]
    threads = _thread_count()
    if threads == 1:
        total = int(np.dot(a, b))
    else:
        bounds = np.linspace(0, scan_length, threads + 1, dtype=int)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = pool.map(lambda se: int(np.dot(a[se[0]:se[1]], b[se[0]:se[1]])),
                             zip(bounds[:-1], bounds[1:]))
        total = sum(parts)
    return total / scan_length


# ---------------------------------------------------------------------------
# The metrized shift space on finite windows
# ---------------------------------------------------------------------------

@dataclass
class ShiftSpace:
    """All certified windows of half-width k with the gauge metric.

    ``windows`` has shape (p, 2k-1); column k-1 is coordinate 0.  The factor
    set is certified by doubling the scan length; distances are
    exp(-u(j)) with j the first |coordinate| where two windows differ, and
    windows agreeing everywhere sit at distance exp(-u(k)) (edge tie).
    """

    sequence: SymbolSequence
    gauge: GaugeFunction
    k: int
    windows: np.ndarray
    scan_used: int

    @classmethod
    def build(cls, seq: SymbolSequence, gauge: GaugeFunction, k: int,
              scan_factor: int = 64) -> "ShiftSpace":
        if k < 1:
            raise InputError("window radius k must be >= 1")
        width = 2 * k - 1
        scan = scan_factor * width
        first = np.unique(sliding_window_view(seq.prefix(scan), width), axis=0)
        second = np.unique(sliding_window_view(seq.prefix(2 * scan), width), axis=0)
        if len(first) != len(second):
            raise CertificationError(
                "factor count at length %d still grows with the scan (%d -> %d)"
                % (width, len(first), len(second)))
        return cls(sequence=seq, gauge=gauge, k=k, windows=second, scan_used=2 * scan)

    # -- distances ---------------------------------------------------------
    def distance_table(self) -> np.ndarray:
        """d[j] = exp(-u(j)) for j = 0..k (index k is the edge tie)."""
        return np.array([math.exp(-float(self.gauge.value(j)))
                         for j in range(self.k + 1)])

    def interleaved(self) -> np.ndarray:
        """Windows reordered center-out: coordinates 0, +1, -1, +2, -2, ..."""
        k, width = self.k, 2 * self.k - 1
        order = np.empty(width, dtype=int)
        order[0] = k - 1
        for j in range(1, k):
            order[2 * j - 1] = k - 1 + j
            order[2 * j] = k - 1 - j
        return np.ascontiguousarray(self.windows[:, order])

    def first_disagreement(self, inter: np.ndarray, i: int) -> np.ndarray:
        """Minimal |coordinate| where window i differs from every window."""
        diff = inter != inter[i]
        pos = diff.argmax(axis=1)
        j = (pos + 1) // 2
        j[~diff.any(axis=1)] = self.k
        return j

    def metric_space(self) -> FiniteMetricSpace:
        inter = self.interleaved()
        table = self.distance_table()

        def row(i):
            dists = table[self.first_disagreement(inter, i)]
            dists[i] = 0.0
            return dists

        return FiniteMetricSpace(len(self.windows), row_fn=row,
                                 metadata={"kind": "shift-window", "k": self.k})

    # -- exact covering counts (ultrametric ball classes) -------------------
    def class_count(self, j: int) -> int:
        """Number of 'agree out to |i| < j' classes; j = 0 collapses to 1."""
        if j <= 0:
            return 1
        j = min(j, self.k)
        c = self.k - 1
        block = self.windows[:, c - (j - 1): c + j]
        return len(np.unique(block, axis=0))

    def net_count(self, epsilon: float) -> int:
        """Exact minimal number of closed epsilon/2-balls (ultrametric)."""
        table = self.distance_table()
        radius = epsilon / 2.0
        inside = np.nonzero(table <= radius + 1e-15)[0]
        if len(inside) == 0:
            raise InputError("epsilon smaller than the finest certified scale")
        return self.class_count(int(inside[0]))

    def net_samples(self, j_values) -> list:
        """(epsilon_j, count) pairs with epsilon_j = 2 exp(-u(j)) (exact nets)."""
        table = self.distance_table()
        return [(2.0 * table[j], self.class_count(j)) for j in j_values]

    def condition_constant(self, j_values, d: float) -> float:
        """Fitted kappa with net sizes <= kappa * delta^(-d) on sampled scales."""
        table = self.distance_table()
        return max(self.class_count(j) * table[j] ** d for j in j_values)


def window_metric_space(seq: SymbolSequence, gauge: GaugeFunction, k: int,
                        scan_factor: int = 64) -> FiniteMetricSpace:
    """The finite metric space of certified (2k-1)-windows."""
    return ShiftSpace.build(seq, gauge, k, scan_factor).metric_space()


def shift_growth(space: ShiftSpace, n_max: int) -> list:
    """Rows (n, lower, upper): certified shift Lipschitz estimates.

    upper(n) = exp(u(n)) always; the lower estimate is the maximum of
    rho(shift^n x, shift^n y)/rho(x, y) over certified window pairs, realized
    whenever two windows agree strictly inside +-n and differ at +n.  Both
    columns are reported as running maxima.
    """
    if n_max >= space.k:
        raise InputError("n_max must stay below the window radius k")
    w = space.windows
    c = space.k - 1
    table = space.distance_table()
    rows = [(0, 1.0, 1.0)]
    best_lower = 1.0
    for n in range(1, n_max + 1):
        upper = math.exp(float(space.gauge.value(n)))
        # does some pair agree on |i| < n and differ at +n or -n?
        block = w[:, c - (n - 1): c + n]
        _, inverse = np.unique(block, axis=0, return_inverse=True)
        achieved = False
        for col in (c + n, c - n):
            per_class_min = {}
            values = w[:, col]
            for cls, val in zip(inverse, values):
                prev = per_class_min.get(cls)
                if prev is None:
                    per_class_min[cls] = val
                elif prev != val:
                    achieved = True
                    break
            if achieved:
                break
        lower = upper if achieved else 1.0
        best_lower = max(best_lower, lower)
        rows.append((n, best_lower, max(upper, rows[-1][2])))
    return rows


def generator_cross_check(n: int) -> bool:
    """Recurrence RS prefix == substitution fixed point after +-1 projection."""
    direct = rudin_shapiro_prefix(n)
    projected = SymbolSequence.projected(
        rudin_shapiro_substitution(), RS_PROJECTION, seed="A").prefix(n)
    return bool(np.array_equal(direct, projected))


def observable_lipschitz(space: ShiftSpace, values=None) -> float:
    """Measured Lipschitz constant of f(x) = x_0 on the window space.

    Two windows differing at coordinate 0 sit at distance exp(-u(0)); the
    quotient is |x_0 - y_0| / rho = 2 exp(u(0)) for +-1 sequences.
    """
    col = space.windows[:, space.k - 1]
    if values is not None:
        col = np.asarray(values)[col]
    spread = float(col.max() - col.min())
    return spread * math.exp(float(space.gauge.value(0)))
