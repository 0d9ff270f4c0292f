"""Finite metric spaces: nets, covering numbers, capacity functions, dimension.

Covering numbers follow the convention "minimal number of balls of radius
epsilon/2"; balls are closed (distance <= epsilon/2), which is what the
worked covering examples pin down.  The capacity functions tau and theta
invert the paper-style upper-bound surrogates for the covering numbers of
Lipschitz function/map spaces; exact covering is reserved for small
instances and for the brute-force oracle behind the Kolmogorov-Tihomirov
bound.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, ResourceError

DEFAULT_EXACT_BUDGET = 20
BISECT_REL_TOL = 1e-6
BISECT_MAX_ITER = 200


class FiniteMetricSpace:
    """Indexed point set with a symmetric distance oracle.

    Backed either by a dense matrix or by a row callable (index -> distances
    to all points); immutable once built, so instances are safe to share.
    """

    def __init__(self, n: int, matrix=None, row_fn=None, labels=None, metadata=None):
        if n < 1:
            raise InputError("a metric space needs at least one point")
        if (matrix is None) == (row_fn is None):
            raise InputError("provide exactly one of matrix= or row_fn=")
        if matrix is not None:
            matrix = np.asarray(matrix, dtype=float)
            if matrix.shape != (n, n):
                raise InputError("distance matrix must be n x n")
            if not np.allclose(matrix, matrix.T, atol=1e-12):
                raise InputError("distance matrix must be symmetric")
            if not np.allclose(np.diag(matrix), 0.0, atol=1e-15):
                raise InputError("distance matrix must vanish on the diagonal")
            if (matrix < 0).any():
                raise InputError("distances must be nonnegative")
        self.n = n
        self._matrix = matrix
        self._row_fn = row_fn
        self.labels = list(labels) if labels is not None else list(range(n))
        self.metadata = dict(metadata or {})

    # -- access ----------------------------------------------------------
    def row(self, i: int) -> np.ndarray:
        if self._matrix is not None:
            return self._matrix[i]
        return np.asarray(self._row_fn(i), dtype=float)

    def dist(self, i: int, j: int) -> float:
        return float(self.row(i)[j])

    def matrix(self) -> np.ndarray:
        if self._matrix is None:
            self._matrix = np.vstack([self.row(i) for i in range(self.n)])
        return self._matrix

    def diameter(self) -> float:
        return max(float(self.row(i).max()) for i in range(self.n))

    # -- constructors ------------------------------------------------------
    @classmethod
    def from_points(cls, coords, metadata=None):
        coords = np.asarray(coords, dtype=float)
        if coords.ndim == 1:
            coords = coords[:, None]
        diff = coords[:, None, :] - coords[None, :, :]
        return cls(len(coords), matrix=np.sqrt((diff ** 2).sum(-1)), metadata=metadata)

    @classmethod
    def from_csv(cls, path):
        matrix = np.loadtxt(path, delimiter=",", dtype=float)
        matrix = np.atleast_2d(matrix)
        return cls(matrix.shape[0], matrix=matrix)

    # -- sanity -----------------------------------------------------------
    def check_triangle(self, trials: int = 500, seed: int = 0) -> bool:
        rng = np.random.default_rng(seed)
        for _ in range(trials):
            i, j, k = rng.integers(0, self.n, size=3)
            if self.dist(i, j) > self.dist(i, k) + self.dist(k, j) + 1e-12:
                return False
        return True


@dataclass
class CoveringProfile:
    epsilon: float
    centers: list
    method: str

    @property
    def count(self) -> int:
        return len(self.centers)


def greedy_net(space: FiniteMetricSpace, epsilon: float) -> CoveringProfile:
    """Farthest-point-sampling net: every point within epsilon/2 of a center."""
    if space.n == 0:
        raise InputError("empty space")
    if epsilon <= 0:
        raise InputError("epsilon must be positive")
    radius = epsilon / 2.0
    centers = [0]
    mindist = space.row(0).copy()
    while True:
        far = int(mindist.argmax())
        if mindist[far] <= radius:
            break
        centers.append(far)
        np.minimum(mindist, space.row(far), out=mindist)
    return CoveringProfile(epsilon=epsilon, centers=centers, method="greedy")


def exact_covering_number(space: FiniteMetricSpace, epsilon: float,
                          budget: int = DEFAULT_EXACT_BUDGET) -> int:
    """Minimal number of closed epsilon/2-balls covering the space.

    Exhaustive branch-and-bound on ball bitmasks; refuses spaces larger than
    ``budget`` points (NP-hard in general, this is the toy-scale oracle).
    """
    if space.n > budget:
        raise ResourceError(
            "exact set cover capped at %d points (space has %d)" % (budget, space.n))
    radius = epsilon / 2.0
    n = space.n
    masks = []
    for i in range(n):
        row = space.row(i)
        mask = 0
        for j in range(n):
            if row[j] <= radius + 1e-15:
                mask |= 1 << j
        masks.append(mask)
    full = (1 << n) - 1
    # dedupe and drop dominated balls
    masks = sorted(set(masks), key=lambda m: -bin(m).count("1"))
    kept = []
    for m in masks:
        if not any(m | k == k for k in kept):
            kept.append(m)
    masks = kept

    # greedy upper bound
    def greedy_cover():
        uncovered, used = full, 0
        while uncovered:
            best = max(masks, key=lambda m: bin(m & uncovered).count("1"))
            uncovered &= ~best
            used += 1
        return used

    best_known = greedy_cover()

    def dfs(uncovered: int, used: int):
        nonlocal best_known
        if not uncovered:
            best_known = min(best_known, used)
            return
        if used + 1 >= best_known:
            return
        # most-constrained uncovered element
        elt = None
        elt_opts = None
        u = uncovered
        while u:
            j = (u & -u).bit_length() - 1
            opts = [m for m in masks if m >> j & 1]
            if elt_opts is None or len(opts) < len(elt_opts):
                elt, elt_opts = j, opts
                if len(opts) <= 1:
                    break
            u &= u - 1
        for m in sorted(elt_opts, key=lambda m: -bin(m & uncovered).count("1")):
            dfs(uncovered & ~m, used + 1)

    dfs(full, 0)
    return best_known


def kt_bound(n_y: int, n_a: int) -> int:
    """N_Y ** N_A exactly; the function-space covering bound."""
    if n_y < 1 or n_a < 1:
        raise InputError("covering numbers must be >= 1")
    return n_y ** n_a


def d_bound(R: float, epsilon: float, C: float, kappa: float, d: float) -> float:
    """log of the covering-number surrogate for {f : Lip <= R, |f| <= C}.

    Returns kappa * (epsilon/(4R))^(-d) * log(floor(4C/epsilon) + 1) for
    R > 0; at R = 0 the set is the constants in [-C, C] and the value is
    log(floor(2C/epsilon) + 1), which reproduces the pinned boundary value
    floor(C/0.7) + 1 at epsilon = 1.4.
    """
    if R < 0 or epsilon <= 0 or C < 0 or kappa <= 0 or d <= 0:
        raise InputError("need R >= 0, epsilon > 0, C >= 0, kappa > 0, d > 0")
    if C == 0:
        return 0.0
    if R == 0:
        return math.log(math.floor(2 * C / epsilon) + 1)
    return kappa * (epsilon / (4.0 * R)) ** (-d) * math.log(math.floor(4 * C / epsilon) + 1)


def _sup_bisect(predicate, description: str) -> float:
    """sup{R >= 0 : predicate(R)}; predicate monotone (true then false)."""
    if not predicate(0.0):
        raise InputError("%s: even R = 0 fails the defining inequality" % description)
    lo, hi = 0.0, 1.0
    grow = 0
    while predicate(hi):
        lo, hi = hi, hi * 2
        grow += 1
        if grow > 4000:
            raise InputError("%s: the defining inequality never fails (degenerate)"
                             % description)
    for _ in range(BISECT_MAX_ITER):
        mid = (lo + hi) / 2
        if predicate(mid):
            lo = mid
        else:
            hi = mid
        if hi - lo <= BISECT_REL_TOL * max(lo, 1e-300):
            break
    return lo


def tau(t: float, C: float, kappa: float = 1.0, d: float = 1.0) -> float:
    """sup{R >= 0 : D(R, 1.4, C) <= t} against the d_bound surrogate."""
    boundary = math.floor(C / 0.7) + 1
    if t < boundary:
        raise InputError("tau requires t >= floor(C/0.7)+1 = %d" % boundary)
    if math.floor(4 * C / 1.4) + 1 <= 1:
        raise InputError("surrogate degenerate for C < 0.35")
    log_t = math.log(t)
    return _sup_bisect(lambda R: d_bound(R, 1.4, C, kappa, d) <= log_t, "tau")


def theta(t: float, epsilon: float, kappa: float = 1.0, d: float = 1.0) -> float:
    """sup{R >= 0 : Delta(R, epsilon) <= t} against the Remark-2.2 surrogate.

    The surrogate is (kappa (eps/4)^-d)^(kappa (eps/(4R))^-d).
    """
    if not 0 < epsilon < 1:
        raise InputError("theta requires epsilon in (0, 1)")
    base = kappa * (epsilon / 4.0) ** (-d)
    if base <= 1:
        raise InputError("surrogate degenerate: kappa (eps/4)^-d <= 1")
    if t < base:
        raise InputError("theta requires t >= the N_epsilon surrogate %.6g" % base)
    log_t = math.log(t)
    log_base = math.log(base)

    def predicate(R: float) -> bool:
        if R == 0:
            return True
        return kappa * (epsilon / (4.0 * R)) ** (-d) * log_base <= log_t

    return _sup_bisect(predicate, "theta")


def holder_transform(space: FiniteMetricSpace, beta: float) -> FiniteMetricSpace:
    """The snowflaked space with distances rho^beta, 0 < beta <= 1."""
    if not 0 < beta <= 1:
        raise InputError("beta must lie in (0, 1]")
    if space._matrix is not None:
        out = FiniteMetricSpace(space.n, matrix=space.matrix() ** beta,
                                labels=space.labels,
                                metadata={**space.metadata, "holder_beta": beta})
    else:
        out = FiniteMetricSpace(space.n, row_fn=lambda i: space.row(i) ** beta,
                                labels=space.labels,
                                metadata={**space.metadata, "holder_beta": beta})
    if not out.check_triangle(trials=200):
        raise InputError("transformed distances violate the triangle inequality")
    return out


@dataclass
class DimensionFit:
    samples: list            # (epsilon, count) pairs
    slope: float
    intercept: float
    residual: float

    def to_json(self, indent=None) -> str:
        return json.dumps({
            "slope": self.slope, "intercept": self.intercept,
            "residual": self.residual,
            "samples": [[float(e), int(c)] for e, c in self.samples],
        }, indent=indent)

    @classmethod
    def from_samples(cls, samples) -> "DimensionFit":
        samples = [(float(e), int(c)) for e, c in samples]
        if len(samples) < 2:
            raise InputError("need at least two (epsilon, count) samples")
        x = np.log(1.0 / np.array([e for e, _ in samples]))
        y = np.log(np.array([c for _, c in samples], dtype=float))
        if np.ptp(x) < 1e-12:
            raise InputError("degenerate epsilon range")
        slope, intercept = np.polyfit(x, y, 1)
        resid = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
        return cls(samples=samples, slope=float(slope),
                   intercept=float(intercept), residual=resid)


def box_dimension(space: FiniteMetricSpace, epsilons,
                  counter=greedy_net) -> DimensionFit:
    """Least-squares slope of log N_epsilon against log 1/epsilon."""
    epsilons = sorted(float(e) for e in epsilons)
    if len(epsilons) < 3:
        raise InputError("need at least 3 epsilon samples")
    if epsilons[-1] / epsilons[0] < 10.0:
        raise InputError("epsilon samples must span at least one decade")
    samples = []
    for eps in epsilons:
        prof = counter(space, eps)
        count = prof.count if hasattr(prof, "count") else int(prof)
        samples.append((eps, count))
    return DimensionFit.from_samples(samples)


# ---------------------------------------------------------------------------
# Brute-force oracle for the Kolmogorov-Tihomirov bound
# ---------------------------------------------------------------------------

def lipschitz_grid_functions(base_dists, y_values, R: float) -> np.ndarray:
    """All maps from the base points into the value grid with Lip <= R.

    ``base_dists`` is the distance matrix of the base space A; returns an
    array of shape (num_functions, |A|) of function value rows.
    """
    base_dists = np.asarray(base_dists, float)
    npts = base_dists.shape[0]
    rows = []
    for combo in itertools.product(y_values, repeat=npts):
        ok = True
        for i in range(npts):
            for j in range(i + 1, npts):
                if abs(combo[i] - combo[j]) > R * base_dists[i, j] + 1e-12:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            rows.append(combo)
    if not rows:
        raise InputError("no Lipschitz functions on the given grid")
    return np.array(rows, dtype=float)


def sup_metric_space(value_rows) -> FiniteMetricSpace:
    """Finite function space under the uniform distance."""
    rows = np.asarray(value_rows, dtype=float)
    diff = np.abs(rows[:, None, :] - rows[None, :, :]).max(axis=2)
    return FiniteMetricSpace(rows.shape[0], matrix=diff)


def kt_oracle_check(base_dists, y_values, R: float, epsilon: float,
                    cover_budget: int = 4096) -> dict:
    """Brute-force covering of the discretized Lipschitz set vs. kt_bound.

    Returns the measured covering number, the two base covering numbers and
    the bound; 'ok' states measured <= bound.
    """
    funcs = lipschitz_grid_functions(base_dists, y_values, R)
    fn_space = sup_metric_space(funcs)
    measured = exact_covering_number(fn_space, epsilon, budget=cover_budget)
    y_space = FiniteMetricSpace.from_points(np.array(y_values, float))
    a_space = FiniteMetricSpace(len(base_dists), matrix=np.asarray(base_dists, float))
    n_y = exact_covering_number(y_space, epsilon / 4.0, budget=cover_budget)
    n_a = exact_covering_number(a_space, epsilon / (4.0 * R), budget=cover_budget)
    bound = kt_bound(n_y, n_a)
    return {"measured": measured, "n_y": n_y, "n_a": n_a,
            "bound": bound, "ok": measured <= bound,
            "num_functions": int(funcs.shape[0])}
