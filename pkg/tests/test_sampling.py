import numpy as np
import pytest

from priorlab.concepts import enumerate_concepts, uniform_distribution
from priorlab.priors import (
    SmoothPriorParams,
    point_mass,
    reference_prior,
    smooth_prior,
    uniform_prior,
)
from priorlab.sampling import (
    TaskSample,
    export_batch,
    sample_arrays,
    sample_batch,
    sample_concept,
    sample_task_traced,
    stream,
)

SP32 = enumerate_concepts(3, 2)
D3 = uniform_distribution(3)
PARAMS = SmoothPriorParams((1, 1, 1), 1.0, 1.0, 3, 2)


def test_point_mass_always_returns_that_concept():
    sp = enumerate_concepts(3, 1)
    pm = point_mass(sp, 0b010)
    rng = np.random.default_rng(0)
    for _ in range(100):
        assert sample_concept(pm, rng).mask == 0b010


def test_sample_concept_frequencies_match_reference():
    # pi0 on (2,1) has masses (1/2, 1/4, 1/4); 10^5 draws within 4 sigma
    sp = enumerate_concepts(2, 1)
    pi0 = reference_prior(sp)
    rng = np.random.default_rng(123)
    n = 100_000
    counts = np.zeros(len(sp))
    for _ in range(n):
        counts[sp.index_of(sample_concept(pi0, rng))] += 1
    for i, p in enumerate([0.5, 0.25, 0.25]):
        sigma = np.sqrt(p * (1 - p) / n)
        assert abs(counts[i] / n - p) < 4 * sigma


def test_uniform_prior_chi_square():
    sp = enumerate_concepts(3, 2)
    unif = uniform_prior(sp)
    rng = np.random.default_rng(8)
    n = 70_000
    counts = np.zeros(len(sp))
    for _ in range(n):
        counts[sp.index_of(sample_concept(unif, rng))] += 1
    expected = n / len(sp)
    chi2 = float(((counts - expected) ** 2 / expected).sum())
    # chi-square with 6 dof: 99th percentile is 16.81
    assert chi2 < 16.81


def test_traced_task_labels_consistent_and_trace_present():
    rng = np.random.default_rng(5)
    for _ in range(200):
        task = sample_task_traced(PARAMS, SP32, D3, 4, rng)
        assert task.trace is not None
        i_star, c = task.trace
        assert 0 <= i_star < 3 and c in (0, 1)
        # labels must come from a single concept of C(3,2)
        consistent = [
            h for h in SP32
            if all(h.label(x) == y for x, y in zip(task.xs, task.ys))
        ]
        assert consistent


def test_traced_task_d1_degenerate_choice():
    # d = 1: parity 1 forces the singleton, parity 0 forces the empty set
    sp = enumerate_concepts(2, 1)
    params = SmoothPriorParams((1, -1), 0.5, 1.0, 2, 1)
    rng = np.random.default_rng(9)
    for _ in range(200):
        task = sample_task_traced(params, sp, uniform_distribution(2), 2, rng)
        i_star, c = task.trace
        positives = {x for x, y in zip(task.xs, task.ys) if y == 1}
        if c == 1:
            assert positives <= {i_star + 1}
        else:
            assert not positives


def test_traced_concept_law_matches_smooth_prior():
    # marginal law of the generated concept equals the explicit table
    pb = smooth_prior(PARAMS, SP32)
    rng = np.random.default_rng(21)
    n = 200_000
    xs, ys, masks, trace = sample_arrays(PARAMS, SP32, D3, n, 2, rng)
    counts = np.bincount(
        [SP32.index_of(int(m)) for m in masks], minlength=len(SP32)
    )
    for i, p in enumerate(pb.mass):
        sigma = np.sqrt(p * (1 - p) / n)
        assert abs(counts[i] / n - p) < 4 * sigma


def test_traced_parity_coin_rate():
    # gamma_m = 0.5 itself is rejected (the open-interval invariant), so the
    # coin-rate check P(C = 1) = (1 + gamma)/2 runs at the largest legal gamma
    with pytest.raises(ValueError):
        SmoothPriorParams((1, 1, 1), 3.0, 1.0, 3, 2)
    params = SmoothPriorParams((1, 1, 1), 2.9, 1.0, 3, 2)
    p1 = (1 + params.gamma_m) / 2
    rng = np.random.default_rng(2)
    n = 100_000
    _, _, _, (i_star, c) = sample_arrays(params, SP32, D3, n, 2, rng)
    sigma = np.sqrt(p1 * (1 - p1) / n)
    assert abs(c.mean() - p1) < 4 * sigma


def test_parity_sufficiency():
    # conditional on the d draws exactly covering X_i, the parity of the
    # +1 labels is Bernoulli((1 + gamma b_i)/2)
    params = SmoothPriorParams((1, -1, 1), 1.0, 1.0, 3, 2)
    rng = np.random.default_rng(31)
    n = 300_000
    xs, ys, masks, (i_star, c) = sample_arrays(params, SP32, D3, n, 2, rng)
    from priorlab.concepts import d_subsets

    subs = d_subsets(3, 2)
    for i, x_mask in enumerate(subs):
        covers = np.array(
            [
                (1 << (row[0] - 1)) | (1 << (row[1] - 1)) == x_mask
                for row in xs
            ]
        )
        sel = covers & (i_star == i)
        if sel.sum() < 100:
            continue
        parity = ((ys[sel] == 1).sum(axis=1) % 2).astype(float)
        p_i = (1 + params.gamma_m * params.b[i]) / 2
        sigma = np.sqrt(p_i * (1 - p_i) / sel.sum())
        assert abs(parity.mean() - p_i) < 4 * sigma


def test_event_frequency_matches_formula():
    # P(i* = i and the d draws enumerate X_i) = (d!/m^d) / C(m,d)
    params = SmoothPriorParams((1, 1, 1), 1.0, 1.0, 3, 2)
    rng = np.random.default_rng(17)
    n = 200_000
    xs, ys, masks, (i_star, c) = sample_arrays(params, SP32, D3, n, 2, rng)
    from priorlab.concepts import d_subsets

    subs = d_subsets(3, 2)
    p_event = (2 / 9) / 3  # d! / m^d / C(m, d) = 2/27
    for i, x_mask in enumerate(subs):
        covers = np.array(
            [(1 << (row[0] - 1)) | (1 << (row[1] - 1)) == x_mask for row in xs]
        )
        freq = (covers & (i_star == i)).mean()
        sigma = np.sqrt(p_event * (1 - p_event) / n)
        assert abs(freq - p_event) < 3 * sigma


def test_batch_determinism_and_isolation():
    b1 = sample_batch(PARAMS, SP32, D3, 20, 2, seed=99)
    b2 = sample_batch(PARAMS, SP32, D3, 20, 2, seed=99)
    assert b1.tasks == b2.tasks
    b3 = sample_batch(PARAMS, SP32, D3, 20, 2, seed=100)
    assert b1.tasks != b3.tasks
    # task t is reproducible in isolation from (seed, t)
    t7 = sample_task_traced(
        PARAMS, SP32, D3, 2, stream(99, 7, 0), x_rng=stream(99, 7, 1)
    )
    assert b1.tasks[7] == t7


def test_batch_rejects_bad_sizes():
    with pytest.raises(ValueError):
        sample_batch(PARAMS, SP32, D3, 0, 2, seed=1)
    with pytest.raises(ValueError):
        sample_batch(PARAMS, SP32, D3, 5, 0, seed=1)


def test_batch_works_with_plain_prior():
    pi0 = reference_prior(SP32)
    batch = sample_batch(pi0, SP32, D3, 10, 3, seed=4)
    assert len(batch) == 10
    assert all(t.trace is None for t in batch)
    assert all(t.k == 3 for t in batch)


def test_labels_realizable_in_class():
    batch = sample_batch(PARAMS, SP32, D3, 50, 3, seed=12)
    for task in batch:
        assert any(
            all(h.label(x) == y for x, y in zip(task.xs, task.ys)) for h in SP32
        )


def test_export_format():
    batch = sample_batch(PARAMS, SP32, D3, 3, 2, seed=5)
    text = export_batch(batch, 3, 2)
    lines = text.strip().split("\n")
    assert lines[0] == "# m=3\td=2\tk=2\tT=3\tseed=5"
    assert len(lines) == 1 + 3 * 2
    t, i, x, y = lines[1].split("\t")
    assert (t, i) == ("0", "0")
    assert int(x) in (1, 2, 3) and int(y) in (-1, 1)


def test_task_sample_validation():
    with pytest.raises(ValueError):
        TaskSample((1, 2), (1,))
    with pytest.raises(ValueError):
        TaskSample((1,), (0,))
