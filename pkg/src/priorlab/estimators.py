"""Estimators: the minimum-distance (Yatracos) selection over a finite
cover, the direct-access baseline, the sign-reduction estimator, and the
exact two-coin decision problem.

The minimum-distance machinery is shared between outcome space (the
skeleton estimator proper, fed by k = d samples per task) and concept
space (the direct-access baseline): both select the member minimizing the
maximum discrepancy against the empirical measure over the pairwise sets
{z : P_i(z) > P_j(z)}.  An exact-Fraction scoring path exists so the
selection and its guarantee can be checked with literal arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np

from .concepts import Concept, ConceptSpace, DataDistribution, d_subsets
from .errors import BudgetError
from .outcomes import EmpiricalOutcomeDistribution, OutcomeDistribution, exact_outcome_dist, tv
from .priors import CoverFamily, SmoothPriorParams, TabularPrior
from .sampling import TaskBatch


class _MinDistance:
    """Minimum-distance selection over N mass vectors on a finite support.

    Yatracos sets are the ordered-pair regions A_ij = {z : M_i(z) > M_j(z)};
    scores(mu) = max_ij |M(A_ij) - mu(A_ij)| and selection is the argmin,
    ties to the lowest member index.
    """

    def __init__(self, mass_matrix: np.ndarray, exact_rows: list[list[Fraction]] | None = None):
        self.M = np.asarray(mass_matrix, dtype=float)
        n, s = self.M.shape
        self.exact_rows = exact_rows
        self.pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
        self.A = np.zeros((len(self.pairs), s), dtype=bool)
        if exact_rows is not None:
            for p, (i, j) in enumerate(self.pairs):
                self.A[p] = [a > b for a, b in zip(exact_rows[i], exact_rows[j])]
            self.PA_exact = [
                [
                    sum((row[s] for s in np.flatnonzero(a)), start=Fraction(0))
                    for a in self.A
                ]
                for row in exact_rows
            ]
        else:
            # strict ">" with a tie guard: float tables of genuinely equal
            # masses can differ by rounding, which would flip set membership
            for p, (i, j) in enumerate(self.pairs):
                self.A[p] = self.M[i] > self.M[j] + 1e-12
            self.PA_exact = None
        self.PA = self.M @ self.A.T  # (members, pairs)

    @property
    def n_members(self) -> int:
        return self.M.shape[0]

    def scores(self, counts: np.ndarray, total: int) -> np.ndarray:
        if not self.pairs:
            return np.zeros(self.n_members)
        mu = (self.A @ counts) / total
        return np.abs(self.PA - mu[None, :]).max(axis=1)

    def select(self, counts: np.ndarray, total: int) -> tuple[int, np.ndarray]:
        s = self.scores(counts, total)
        return int(np.argmin(s)), s

    def select_exact(self, counts: np.ndarray, total: int):
        """Selection with Fraction scores (needs exact member tables)."""
        if self.PA_exact is None:
            raise ValueError("estimator was not built in exact mode")
        if not self.pairs:
            return 0, [Fraction(0)] * self.n_members
        mu = [Fraction(int(self.A[p] @ counts), total) for p in range(len(self.pairs))]
        scores = [
            max(abs(pa - m) for pa, m in zip(row, mu)) for row in self.PA_exact
        ]
        best = min(range(len(scores)), key=lambda i: (scores[i], i))
        return best, scores

    def deviation(self, counts: np.ndarray, total: int, truth_on_support: np.ndarray) -> float:
        """max over Yatracos sets of |mu_T(A) - Q(A)| for a truth vector Q
        restricted to this support (mass elsewhere never enters any set)."""
        if not self.pairs:
            return 0.0
        mu = (self.A @ counts) / total
        qa = self.A @ np.asarray(truth_on_support, dtype=float)
        return float(np.abs(mu - qa).max())

    def deviation_exact(self, counts: np.ndarray, total: int, truth_exact: list[Fraction]):
        if not self.pairs:
            return Fraction(0)
        mu = [Fraction(int(self.A[p] @ counts), total) for p in range(len(self.pairs))]
        qa = [
            sum((truth_exact[s] for s in np.flatnonzero(a)), start=Fraction(0))
            for a in self.A
        ]
        return max(abs(m - q) for m, q in zip(mu, qa))


@dataclass
class SkeletonReport:
    selected: int
    scores: list
    exact: bool


class SkeletonEstimator:
    """Minimum-distance selection among a cover's outcome distributions at
    k = d samples per task."""

    def __init__(
        self,
        cover: CoverFamily,
        dist: DataDistribution,
        d: int,
        exact: bool = False,
        budget: int = 10**7,
    ):
        if cover.size < 1:
            raise ValueError("cover must be nonempty")
        self.cover = cover
        self.d = d
        self.dist = dist
        self.outcome_dists = [
            exact_outcome_dist(p, dist, d, budget=budget, exact=exact) for p in cover.members
        ]
        support = sorted(set().union(*(od.table.keys() for od in self.outcome_dists)))
        self.support = support
        self.index = {z: i for i, z in enumerate(support)}
        M = np.zeros((cover.size, len(support)))
        for r, od in enumerate(self.outcome_dists):
            for z, p in od.table.items():
                M[r, self.index[z]] = p
        exact_rows = None
        if exact:
            exact_rows = [
                [od.exact.get(z, Fraction(0)) for z in support] for od in self.outcome_dists
            ]
        self._md = _MinDistance(M, exact_rows)
        self.is_exact = exact

    def counts_from_batch(self, batch: TaskBatch) -> tuple[np.ndarray, int]:
        counts = np.zeros(len(self.support), dtype=np.int64)
        for task in batch:
            idx = self.index.get((task.xs, task.ys))
            if idx is not None:
                counts[idx] += 1
        return counts, len(batch)

    def counts_from_arrays(self, xs: np.ndarray, ys: np.ndarray) -> tuple[np.ndarray, int]:
        counts = np.zeros(len(self.support), dtype=np.int64)
        for row_x, row_y in zip(xs, ys):
            idx = self.index.get((tuple(int(v) for v in row_x), tuple(int(v) for v in row_y)))
            if idx is not None:
                counts[idx] += 1
        return counts, xs.shape[0]

    def select_from_counts(self, counts: np.ndarray, total: int) -> tuple[int, SkeletonReport]:
        if self.is_exact:
            best, scores = self._md.select_exact(counts, total)
        else:
            best, scores = self._md.select(counts, total)
            scores = [float(s) for s in scores]
        return best, SkeletonReport(best, list(scores), self.is_exact)

    def truth_vectors(self, truth_dist: OutcomeDistribution):
        q = np.array([truth_dist.prob(z) for z in self.support])
        q_exact = None
        if self.is_exact and truth_dist.is_exact:
            q_exact = [truth_dist.exact.get(z, Fraction(0)) for z in self.support]
        return q, q_exact

    def max_deviation(self, counts, total, truth_dist: OutcomeDistribution):
        q, q_exact = self.truth_vectors(truth_dist)
        if q_exact is not None:
            return self._md.deviation_exact(counts, total, q_exact)
        return self._md.deviation(counts, total, q)

    def decomposition_check(self, counts, total, truth_dist: OutcomeDistribution):
        """The selection guarantee on one run:

            tv(P_selected, Q) <= 3 min_l tv(P_l, Q) + 2 max_A |mu_T(A) - Q(A)|.

        Returns (lhs, rhs, holds); in exact mode all three are computed in
        Fraction arithmetic, so `holds` is a literal statement.
        """
        selected, _ = self.select_from_counts(counts, total)
        dists = [tv(od, truth_dist) for od in self.outcome_dists]
        lhs = dists[selected]
        dev = self.max_deviation(counts, total, truth_dist)
        rhs = 3 * min(dists) + 2 * dev
        return lhs, rhs, lhs <= rhs


def skeleton_estimate(batch: TaskBatch, est: SkeletonEstimator) -> tuple[int, SkeletonReport]:
    """Select the cover member whose outcome law best matches the batch."""
    if len(batch) < 1:
        raise ValueError("empty batch")
    if batch.k != est.d:
        raise ValueError(f"batch has k={batch.k} samples per task, estimator expects d={est.d}")
    counts, total = est.counts_from_batch(batch)
    return est.select_from_counts(counts, total)


class DirectEstimator:
    """Direct-access baseline: minimum-distance selection straight on the
    empirical concept distribution (no sampling bottleneck)."""

    def __init__(self, cover: CoverFamily, exact: bool = False):
        if cover.size < 1:
            raise ValueError("cover must be nonempty")
        self.cover = cover
        self.space = cover.members[0].space
        M = np.stack([p.mass for p in cover.members])
        exact_rows = [list(p.exact) for p in cover.members] if exact else None
        self._md = _MinDistance(M, exact_rows)
        self.is_exact = exact

    def counts_from_concepts(self, concepts) -> tuple[np.ndarray, int]:
        counts = np.zeros(len(self.space), dtype=np.int64)
        for h in concepts:
            counts[self.space.index_of(h)] += 1
        return counts, int(counts.sum())

    def select(self, concepts) -> tuple[int, SkeletonReport]:
        counts, total = self.counts_from_concepts(concepts)
        if self.is_exact:
            best, scores = self._md.select_exact(counts, total)
        else:
            best, scores = self._md.select(counts, total)
            scores = [float(s) for s in scores]
        return best, SkeletonReport(best, list(scores), self.is_exact)


def direct_estimate(concepts, cover: CoverFamily) -> int:
    """Member index minimizing the Yatracos discrepancy against the
    empirical distribution of directly observed target concepts."""
    concepts = list(concepts)
    if not concepts:
        raise ValueError("no observed concepts")
    return DirectEstimator(cover).select(concepts)[0]


@dataclass(frozen=True)
class ReductionEstimate:
    """Signs read off a prior estimate via the full-subset threshold rule."""

    b_hat: tuple[int, ...]
    p_hat: tuple[float, ...]
    threshold: float


def reduce_to_signs(prior_estimate: TabularPrior, params: SmoothPriorParams) -> ReductionEstimate:
    """Recover the sign vector from any estimated prior table.

    For each d-subset X_i, look at the concept h_i positive exactly on X_i:
    mass above (1/2)^d / C(m,d) reveals the sign through the parity of d.
    The comparison is strict, so a mass exactly at the threshold falls to
    the else-branch; it is done in Fractions when the table is exact.
    """
    space = prior_estimate.space
    if space.m != params.m or space.d != params.d:
        raise ValueError("params built for a different concept space")
    m, d = params.m, params.d
    threshold = Fraction(1, 2**d * comb(m, d))
    parity_d = d % 2
    above_sign = 2 * parity_d - 1
    below_sign = 1 - 2 * parity_d
    b_hat = []
    for x_mask in d_subsets(m, d):
        if prior_estimate.is_exact:
            mass = prior_estimate.exact_mass_of(x_mask)
            above = mass > threshold
        else:
            above = prior_estimate.mass_of(x_mask) > float(threshold)
        b_hat.append(above_sign if above else below_sign)
    gamma = params.gamma_m
    p_hat = tuple((1.0 + gamma * b) / 2.0 for b in b_hat)
    return ReductionEstimate(tuple(b_hat), p_hat, float(threshold))


def majority_rule(bits, gamma: float) -> float:
    """Decide between coin biases (1 +- gamma)/2 from Bernoulli outcomes.

    Returns (1+gamma)/2 iff the empirical mean is >= 1/2 (ties and the
    empty case go to the high side)."""
    if not 0 < gamma < 1:
        raise ValueError("gamma must lie in (0, 1)")
    bits = list(bits)
    if not bits or sum(bits) >= len(bits) / 2:
        return (1 + gamma) / 2
    return (1 - gamma) / 2


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(str(x))
    return Fraction(x)


def exact_bayes_error(gamma, n: int) -> Fraction:
    """Exact Bayes error of the uniform two-point coin problem:
    (1/2) sum_x min(pmf_high(x), pmf_low(x)) over x = 0..n.

    This is the risk of the optimal rule; the majority rule attains it
    because its acceptance region is exactly where its pmf dominates.
    The sum runs over integer numerators with the common denominator
    (2q)^n (p_hi = a/2q, p_lo = b/2q), which keeps it exact and fast.
    """
    g = _as_fraction(gamma)
    if not 0 < g < 1:
        raise ValueError("gamma must lie in (0, 1)")
    if n < 0:
        raise ValueError("n must be >= 0")
    a = g.denominator + g.numerator  # 2q * p_hi
    b = g.denominator - g.numerator  # 2q * p_lo
    pow_a = [1] * (n + 1)
    pow_b = [1] * (n + 1)
    for i in range(1, n + 1):
        pow_a[i] = pow_a[i - 1] * a
        pow_b[i] = pow_b[i - 1] * b
    total = 0
    for x in range(n + 1):
        c = comb(n, x)
        hi = c * pow_a[x] * pow_b[n - x]
        lo = c * pow_b[x] * pow_a[n - x]
        total += min(hi, lo)
    return Fraction(total, 2 * (2 * g.denominator) ** n)


def majority_rule_error(gamma, n: int) -> Fraction:
    """Exact average error of the tie-to-high majority rule (equals the
    Bayes error; kept separate so tests can confirm the equality)."""
    g = _as_fraction(gamma)
    p_hi = (1 + g) / 2
    p_lo = (1 - g) / 2
    err = Fraction(0)
    for x in range(n + 1):
        c = comb(n, x)
        says_high = n == 0 or Fraction(x, n) >= Fraction(1, 2)
        if says_high:
            err += c * p_lo**x * (1 - p_lo) ** (n - x)  # said high, truth low
        else:
            err += c * p_hi**x * (1 - p_hi) ** (n - x)  # said low, truth high
    return err / 2


def coin_floor(gamma: float, n: int) -> float:
    """The decision-problem lower bound (1/32) exp(-128 gamma^2 n / 3)."""
    return math.exp(-128.0 * float(gamma) ** 2 * n / 3.0) / 32.0
