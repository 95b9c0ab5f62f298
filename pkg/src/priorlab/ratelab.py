"""Monte Carlo rate experiments: worst-case risk vs number of tasks, the
sign-reduction lower-bound testbed, the exact coin-bound table, and
log-log rate fitting.

Work is decomposed into independent cells keyed by (seed, T index, truth
index); each cell draws its randomness from its own stream, so results are
identical regardless of worker count, and rows are reduced in cell order
so output files are byte-stable for a fixed config.
"""

from __future__ import annotations

import concurrent.futures
import csv
import itertools
from dataclasses import dataclass, field, replace
from fractions import Fraction
from math import comb, exp

import numpy as np

from .concepts import DataDistribution, d_subsets, enumerate_concepts, uniform_distribution
from .estimators import (
    DirectEstimator,
    SkeletonEstimator,
    coin_floor,
    exact_bayes_error,
    reduce_to_signs,
)
from .priors import (
    SmoothPriorParams,
    cover_of_family,
    point_mass,
    parity_family,
    total_variation,
)
from .sampling import sample_arrays, stream

RATE_CSV_HEADER = (
    "experiment", "m", "d", "L", "alpha", "k", "T",
    "replicate", "truth_id", "selected_id", "tv_error",
)
ESTIMATION_CSV_HEADER = ("replicate", "T", "selected", "tv_to_truth", "max_yatracos_dev")
COIN_CSV_HEADER = ("gamma", "n", "bayes_error", "floor", "pass")

# stream purposes (spawn keys) so no two draws share a stream
_TRUTH_PICK = 90
_UPPER = 91
_LOWER = 92
_BASELINE = 93


def theory_upper_exponent(d: int, alpha: float) -> float:
    return alpha**2 / (2 * (d + 2 * alpha) * (alpha + 2 * (d + 1)))


def theory_lower_exponent(d: int, alpha: float) -> float:
    return alpha / (2 * (d + alpha))


@dataclass(frozen=True)
class ExperimentConfig:
    m: int = 3
    d: int = 2
    L: float = 1.0
    alpha: float = 1.0
    family: str = "parity"  # or "twopoint"
    T_grid: tuple[int, ...] = (100, 1000)
    replicates: int = 100
    seed: int = 0
    k: int | None = None  # samples per task; defaults to d
    truth_count: int = 8  # sampled true parameters (plus the two extremes)
    twopoint_weight: float = 0.05
    outcome_budget: int = 10**7

    def __post_init__(self):
        if self.family not in ("parity", "twopoint"):
            raise ValueError(f"unknown family {self.family!r}")
        if not self.T_grid or list(self.T_grid) != sorted(set(self.T_grid)):
            raise ValueError("T_grid must be strictly increasing")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if self.k is not None and self.k < self.d:
            raise ValueError("k must be at least d")

    @property
    def samples_per_task(self) -> int:
        return self.k if self.k is not None else self.d

    def key(self) -> tuple:
        return (
            self.m, self.d, self.L, self.alpha, self.family, self.seed,
            self.samples_per_task, self.truth_count, self.twopoint_weight,
            self.outcome_budget,
        )


@dataclass
class Setup:
    space: object
    dist: DataDistribution
    members: list
    params_list: list | None
    estimator: SkeletonEstimator
    truth_ids: list[int]
    tv_matrix: np.ndarray


_SETUP_CACHE: dict[tuple, Setup] = {}


def build_setup(config: ExperimentConfig) -> Setup:
    cached = _SETUP_CACHE.get(config.key())
    if cached is not None:
        return cached
    space = enumerate_concepts(config.m, config.d)
    if config.family == "parity":
        dist = uniform_distribution(config.m)
        params_list, members = parity_family(space, config.L, config.alpha)
        cover = cover_of_family(members, 0.0)
        # sampled truths plus the two extreme sign vectors
        rng = stream(config.seed, _TRUTH_PICK)
        picks = set(int(i) for i in rng.integers(0, len(members), size=config.truth_count))
        picks.add(0)
        picks.add(len(members) - 1)
        truth_ids = sorted(picks)
    else:
        w = config.twopoint_weight
        rest = (1.0 - 2 * w) / (config.m - 2)
        dist = DataDistribution((w, w) + (rest,) * (config.m - 2))
        members = [point_mass(space, 0b01), point_mass(space, 0b10)]
        params_list = None
        cover = cover_of_family(members, 0.0)
        truth_ids = [0, 1]
    est = SkeletonEstimator(cover, dist, config.samples_per_task, budget=config.outcome_budget)
    tvm = np.array(
        [[float(total_variation(a, b)) for b in cover.members] for a in cover.members]
    )
    setup = Setup(space, dist, members, params_list, est, truth_ids, tvm)
    _SETUP_CACHE[config.key()] = setup
    return setup


def _encode_codes(est: SkeletonEstimator, m: int) -> np.ndarray:
    """Integer code per support outcome, for vectorized batch counting."""
    k = est.d
    codes = []
    for xs, ys in est.support:
        xid = 0
        for x in xs:
            xid = xid * m + (x - 1)
        ybits = 0
        for y in ys:
            ybits = (ybits << 1) | (1 if y > 0 else 0)
        codes.append(xid * (1 << k) + ybits)
    return np.asarray(codes, dtype=np.int64)


def counts_from_arrays_fast(est: SkeletonEstimator, m: int, xs: np.ndarray, ys: np.ndarray):
    """Map sampled (xs, ys) arrays to support counts without Python tuples."""
    if not hasattr(est, "_codes"):
        codes = _encode_codes(est, m)
        order = np.argsort(codes, kind="stable")
        est._codes = codes[order]
        est._code_to_support = order
    k = est.d
    xid = np.zeros(len(xs), dtype=np.int64)
    for j in range(k):
        xid = xid * m + (xs[:, j] - 1)
    ybits = np.zeros(len(xs), dtype=np.int64)
    for j in range(k):
        ybits = (ybits << 1) | (ys[:, j] > 0)
    codes = xid * (1 << k) + ybits
    pos = np.searchsorted(est._codes, codes)
    pos = np.clip(pos, 0, len(est._codes) - 1)
    valid = est._codes[pos] == codes
    support_idx = est._code_to_support[pos[valid]]
    counts = np.bincount(support_idx, minlength=len(est.support)).astype(np.int64)
    return counts, len(xs)


def _source(setup: Setup, config: ExperimentConfig, truth_id: int):
    if setup.params_list is not None:
        return setup.params_list[truth_id]
    return setup.members[truth_id]


def _upper_cell(payload) -> list[tuple]:
    config_dict, T, T_idx, truth_id = payload
    config = ExperimentConfig(**config_dict)
    setup = build_setup(config)
    source = _source(setup, config, truth_id)
    est = setup.estimator
    k = config.samples_per_task
    truth_vec, _ = est.truth_vectors(est.outcome_dists[truth_id])
    rows = []
    for rep in range(config.replicates):
        rng = stream(config.seed, _UPPER, T_idx, truth_id, rep)
        xs, ys, _, _ = sample_arrays(source, setup.space, setup.dist, T, k, rng)
        counts, total = counts_from_arrays_fast(est, config.m, xs, ys)
        selected, _ = est.select_from_counts(counts, total)
        err = float(setup.tv_matrix[truth_id, selected])
        dev = float(est._md.deviation(counts, total, truth_vec))
        rows.append((
            "rates", config.m, config.d, config.L, config.alpha, k, T,
            rep, truth_id, selected, err, dev,
        ))
    return rows


def _pmap(fn, payloads, workers: int):
    if workers <= 1:
        return [fn(p) for p in payloads]
    with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, payloads))


@dataclass
class RateCurve:
    """Worst-case risk curve with the two theoretical rate exponents attached."""

    points: list[tuple[int, float, float]]  # (T, mean risk, std error)
    pooled_points: list[tuple[int, float, float]]  # truth-averaged variant
    theory_upper_exponent: float
    theory_lower_exponent: float
    fitted_slope: float | None = None
    fit_r2: float | None = None


@dataclass
class UpperResult:
    curve: RateCurve
    rows: list[tuple]  # the rates CSV schema
    report_rows: list[tuple]  # the estimation-report schema (with deviations)


def run_upper_experiment(config: ExperimentConfig, workers: int = 1) -> UpperResult:
    """Risk of the skeleton selection vs T.

    For each T: per-truth replicate means; the curve's risk is the max of
    those means over the truth set (worst case over a sampled parameter
    set), and a pooled (truth-averaged) variant rides along.
    """
    setup = build_setup(config)
    payloads = [
        (config.__dict__, T, T_idx, truth_id)
        for T_idx, T in enumerate(config.T_grid)
        for truth_id in setup.truth_ids
    ]
    all_rows = _pmap(_upper_cell, payloads, workers)
    full_rows = list(itertools.chain.from_iterable(all_rows))
    report_rows = [(r[7], r[6], r[9], r[10], r[11]) for r in full_rows]
    rows = [r[:11] for r in full_rows]
    points, pooled = [], []
    for T in config.T_grid:
        t_rows = [r for r in rows if r[6] == T]
        per_truth = {}
        for r in t_rows:
            per_truth.setdefault(r[8], []).append(r[10])
        means = {tid: float(np.mean(v)) for tid, v in per_truth.items()}
        worst_tid = max(means, key=lambda tid: (means[tid], tid))
        errs = np.asarray(per_truth[worst_tid])
        points.append((T, float(errs.mean()), float(errs.std(ddof=1) / np.sqrt(len(errs)))))
        pool = np.asarray([r[10] for r in t_rows])
        pooled.append((T, float(pool.mean()), float(pool.std(ddof=1) / np.sqrt(len(pool)))))
    curve = RateCurve(
        points,
        pooled,
        theory_upper_exponent(config.d, config.alpha),
        theory_lower_exponent(config.d, config.alpha),
    )
    try:
        fit = fit_rate_exponent(curve)
        curve.fitted_slope, curve.fit_r2 = fit.slope, fit.r2
    except ValueError:
        pass  # degenerate curves (zero risk) stay unfitted
    return UpperResult(curve, rows, report_rows)


@dataclass
class FitResult:
    slope: float
    intercept: float
    r2: float
    n_used: int


def fit_rate_exponent(curve: RateCurve) -> FitResult:
    """Least-squares slope of log(mean risk) on log T; needs >= 3 positive
    mean-risk grid points."""
    pts = [(T, mean) for T, mean, _ in curve.points if mean > 0]
    if len(pts) < 3:
        raise ValueError(f"need >= 3 positive-risk points, have {len(pts)}")
    x = np.log([p[0] for p in pts])
    y = np.log([p[1] for p in pts])
    A = np.vstack([x, np.ones_like(x)]).T
    (slope, intercept), res, *_ = np.linalg.lstsq(A, y, rcond=None)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    ss_res = float(res[0]) if len(res) else float(((A @ [slope, intercept] - y) ** 2).sum())
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return FitResult(float(slope), float(intercept), r2, len(pts))


def lower_bound_floor(config: ExperimentConfig, T: int) -> float:
    """(gamma_m / (32 * 2^d)) * exp(-43 (2/L)^(2d/a) d^(2d) gamma_m^(2+2d/a) T)."""
    d, L, alpha = config.d, config.L, config.alpha
    gamma = (L / 2.0) * (1.0 / config.m) ** alpha
    expo = -43.0 * (2.0 / L) ** (2 * d / alpha) * d ** (2 * d) * gamma ** (2 + 2 * d / alpha) * T
    return gamma / (32.0 * 2**d) * exp(expo)


@dataclass
class LowerResult:
    rows: list[tuple]
    per_T: dict[int, dict]  # T -> {mean, se, floor, pass, ...}
    ni_expected_per_task: float
    ni_mean: float
    ni_sigma: float
    ni_within_3sigma: bool


def _lower_cell(payload) -> list[tuple]:
    config_dict, T, T_idx = payload
    config = ExperimentConfig(**config_dict)
    setup = build_setup(config)
    space, dist, est = setup.space, setup.dist, setup.estimator
    n_signs = comb(config.m, config.d)
    subs = d_subsets(config.m, config.d)
    sub_index = {mask: i for i, mask in enumerate(subs)}
    gamma = setup.params_list[0].gamma_m
    scale = Fraction(1, 2 ** config.d * comb(config.m, config.d))
    rows = []
    for rep in range(config.replicates):
        rng = stream(config.seed, _LOWER, T_idx, rep)
        b = tuple(1 if v else -1 for v in rng.integers(0, 2, size=n_signs))
        truth_id = sum((1 if s > 0 else 0) << (n_signs - 1 - i) for i, s in enumerate(b))
        params = SmoothPriorParams(b, config.L, config.alpha, config.m, config.d)
        xs, ys, masks, (i_star, _) = sample_arrays(
            params, space, dist, T, config.d, rng
        )
        counts, total = counts_from_arrays_fast(est, config.m, xs, ys)
        selected, _ = est.select_from_counts(counts, total)
        red = reduce_to_signs(est.cover.members[selected], params)
        p_true = [(1.0 + gamma * s) / 2.0 for s in b]
        err = 0.5 * float(scale) * sum(
            abs(ph - pt) for ph, pt in zip(red.p_hat, p_true)
        )
        # N_i: tasks whose subset index is i AND whose d draws cover X_i
        x_masks = np.zeros(len(xs), dtype=np.int64)
        for j in range(config.d):
            x_masks |= 1 << (xs[:, j] - 1)
        sub_arr = np.asarray(subs)
        covered = x_masks == sub_arr[i_star]
        n_events = int(covered.sum())
        rows.append((
            "lowerbound", config.m, config.d, config.L, config.alpha, config.d,
            T, rep, truth_id, selected, err, n_events,
        ))
    return rows


def run_lower_experiment(config: ExperimentConfig, workers: int = 1) -> LowerResult:
    """Uniform-over-b average of the sign-reduction error, against the theoretical
    floor, plus the N_i event-count calibration."""
    if config.family != "parity":
        raise ValueError("the lower-bound testbed runs on the parity family")
    payloads = [(config.__dict__, T, T_idx) for T_idx, T in enumerate(config.T_grid)]
    all_rows = _pmap(_lower_cell, payloads, workers)
    rows = list(itertools.chain.from_iterable(all_rows))
    per_T = {}
    d = config.d
    for T in config.T_grid:
        errs = np.asarray([r[10] for r in rows if r[6] == T])
        mean, se = float(errs.mean()), float(errs.std(ddof=1) / np.sqrt(len(errs)))
        floor = lower_bound_floor(config, T)
        per_T[T] = {
            "mean": mean,
            "se": se,
            "floor": floor,
            # one-sided 95% lower confidence bound sits above the floor
            "pass": mean - 1.645 * se > floor,
        }
    # N_i calibration: a task lands in N_i when i* = i and its d draws cover
    # X_i, so summing the counts over i gives Bernoulli(C(m,d) * q) tasks.
    q = 1.0
    for j in range(d):
        q *= (d - j) / config.m
    n_subs = comb(config.m, d)
    q /= n_subs
    total_events = sum(r[11] for r in rows)
    total_tasks = sum(r[6] for r in rows)
    ni_mean = total_events / total_tasks / n_subs
    p_task = q * n_subs
    ni_sigma = float(np.sqrt(p_task * (1 - p_task) / total_tasks) / n_subs)
    return LowerResult(
        [r[:11] for r in rows],
        per_T,
        q,
        ni_mean,
        ni_sigma,
        abs(ni_mean - q) <= 3 * ni_sigma,
    )


@dataclass
class BaselineResult:
    rows: list[tuple]
    skeleton_mean: float
    direct_mean: float
    diff_se: float

    @property
    def ordered(self) -> bool:
        """Direct access is statistically easier: its risk should not exceed
        the skeleton's by more than two standard errors of the difference."""
        return self.direct_mean <= self.skeleton_mean + 2 * self.diff_se


def _baseline_cell(payload) -> list[tuple]:
    config_dict, T, T_idx, truth_id = payload
    config = ExperimentConfig(**config_dict)
    setup = build_setup(config)
    source = _source(setup, config, truth_id)
    direct = DirectEstimator(setup.estimator.cover)
    rows = []
    for rep in range(config.replicates):
        rng = stream(config.seed, _BASELINE, T_idx, truth_id, rep)
        xs, ys, masks, _ = sample_arrays(
            source, setup.space, setup.dist, T, config.samples_per_task, rng
        )
        counts, total = counts_from_arrays_fast(setup.estimator, config.m, xs, ys)
        sk_sel, _ = setup.estimator.select_from_counts(counts, total)
        concept_counts = np.bincount(
            [setup.space.index_of(int(msk)) for msk in masks], minlength=len(setup.space)
        )
        if direct.is_exact:
            di_sel, _ = direct._md.select_exact(concept_counts, T)
        else:
            di_sel, _ = direct._md.select(concept_counts, T)
        rows.append((
            "baseline", config.m, config.d, config.L, config.alpha,
            config.samples_per_task, T, rep, truth_id,
            sk_sel, float(setup.tv_matrix[truth_id, sk_sel]),
            di_sel, float(setup.tv_matrix[truth_id, di_sel]),
        ))
    return rows


def run_baseline_comparison(config: ExperimentConfig, T: int, workers: int = 1) -> BaselineResult:
    """Paired skeleton-vs-direct risks on identical task draws at one T."""
    setup = build_setup(config)
    payloads = [(config.__dict__, T, 0, tid) for tid in setup.truth_ids]
    rows = list(itertools.chain.from_iterable(_pmap(_baseline_cell, payloads, workers)))
    sk = np.asarray([r[10] for r in rows])
    di = np.asarray([r[12] for r in rows])
    diff = di - sk
    return BaselineResult(
        rows,
        float(sk.mean()),
        float(di.mean()),
        float(diff.std(ddof=1) / np.sqrt(len(diff))),
    )


def coin_bound_table(gammas, ns) -> list[tuple]:
    """Rows (gamma, n, exact Bayes error, floor, pass) over the grid.

    gamma = 1/2 is allowed: the two-point problem and its floor are still
    well defined there, and the acceptance grid ends at 1/2."""
    rows = []
    for gamma in gammas:
        g = Fraction(str(gamma)) if not isinstance(gamma, Fraction) else gamma
        if not 0 < g <= Fraction(1, 2):
            raise ValueError(f"gamma {gamma} outside (0, 1/2]")
        for n in ns:
            if n < 0:
                raise ValueError("n must be >= 0")
            err = float(exact_bayes_error(g, n))
            floor = coin_floor(float(g), n)
            rows.append((float(g), int(n), err, floor, err >= floor))
    return rows


def format_cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([format_cell(v) for v in row])
