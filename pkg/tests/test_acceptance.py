"""Acceptance suite: one test per criterion, at the stated tolerances.

Criteria 5-8 share a single desk-scale batch experiment (100 paired
repetitions over the default 12000-point dataset) built once per
session; expect it to take several minutes on one core.  A per-criterion
PASS/FAIL summary is printed at the end of the pytest run.
"""

import os

import numpy as np
import pytest

from riskal import (
    DatasetConfig,
    ExperimentConfig,
    TransitionModel,
    emit,
    evpi,
    fit_supervised,
    generate,
    meu,
    meu_perfect_info,
    optimal_policy,
    predict_posterior,
    run_experiment,
    split,
)
from riskal.gmm import em_refine


@pytest.fixture(scope="session")
def full_experiment():
    config = ExperimentConfig(n_reps=100, master_seed=20260808)
    workers = min(4, os.cpu_count() or 1)
    return run_experiment(config, n_workers=workers)


def _final_median(report, variant, metric):
    return report.variants[variant].curves[metric]["median"][-1]


def test_criterion_01_evpi_oracle(tm, um):
    """EVPI equals the brute-force enumeration values."""
    uniform = evpi(np.full(4, 0.25), tm, um)
    assert uniform == pytest.approx(13.5375, abs=1e-9)
    for i in range(4):
        one_hot = np.zeros(4)
        one_hot[i] = 1.0
        assert evpi(one_hot, tm, um) == 0.0
    half = evpi(np.array([0.5, 0.5, 0.0, 0.0]), tm, um)
    assert half == pytest.approx(0.0, abs=1e-9)
    print(f"criterion 1: evpi(uniform)={uniform!r}, one-hots exactly 0, evpi(half)={half!r} -> PASS")


def test_criterion_02_evpi_nonnegative_meu_dominated(tm, um):
    """10^4 random simplices: evpi >= -1e-9 and perfect info dominates."""
    rng = np.random.default_rng(421)
    posteriors = rng.dirichlet(np.ones(4), size=10_000)
    values = evpi(posteriors, tm, um)
    _, meu_values = meu(posteriors, tm, um)
    perfect = meu_perfect_info(posteriors, tm, um)
    assert np.all(values >= -1e-9)
    assert np.all(perfect >= meu_values - 1e-9)
    print(f"criterion 2: min evpi={values.min():.3e}, min dominance gap={(perfect - meu_values).min():.3e} -> PASS")


def test_criterion_03_perfect_information_policy(tm, um):
    """Default utilities repair only the critical state."""
    policy = optimal_policy(tm, um)
    assert policy.tolist() == [0, 0, 0, 1]
    print(f"criterion 3: policy={policy.tolist()} -> PASS")


def test_criterion_04_em_ascent_and_supervised_fixed_point(prior):
    """50 random mixed problems: monotone objective, supervised fixed point."""
    rng = np.random.default_rng(1204)
    means = np.array([[0.0, 0.0], [3.0, 0.0], [6.0, 2.0], [8.0, 4.5]])
    worst_step = np.inf
    worst_gap = 0.0
    for _ in range(50):
        y = rng.integers(1, 5, size=200)
        x = rng.normal(size=(200, 2)) * rng.uniform(0.6, 1.8) + means[y - 1]
        n_l = int(rng.integers(4, 40))
        x_l, y_l, x_u = x[:n_l], y[:n_l], x[n_l:]
        state = fit_supervised(prior, x_l, y_l)

        _, _, trace = em_refine(state, x_l, y_l, x_u)
        if len(trace) > 1:
            worst_step = min(worst_step, float(np.diff(trace).min()))
            assert np.all(np.diff(trace) >= -1e-8)

        refined, _, _ = em_refine(state, x_l, y_l, np.zeros((0, 2)))
        gap = max(
            np.abs(refined.map_means - state.map_means).max(),
            np.abs(refined.map_covariances - state.map_covariances).max(),
            np.abs(refined.map_mixing - state.map_mixing).max(),
        )
        worst_gap = max(worst_gap, gap)
        assert gap < 1e-10
    print(f"criterion 4: worst ascent step={worst_step:.3e} (>= -1e-8), worst supervised gap={worst_gap:.3e} -> PASS")


def test_criterion_05_em_reduces_queries(full_experiment):
    """Paired query reduction: em strictly below plain, >= 70% of reps."""
    plain = np.asarray(full_experiment.variants["plain"].query_counts)
    em = np.asarray(full_experiment.variants["em"].query_counts)
    diff = plain - em
    frac_positive = float(np.mean(diff > 0))
    assert np.median(em) < np.median(plain)
    assert np.median(diff) > 0
    assert frac_positive >= 0.70
    print(
        f"criterion 5: median queries plain={np.median(plain):.1f} em={np.median(em):.1f}, "
        f"median paired diff={np.median(diff):.1f}, frac positive={frac_positive:.2f} -> PASS"
    )


def test_criterion_06_no_late_stage_degradation(full_experiment):
    """EM median decision-accuracy curve does not fall off at the end."""
    curve = np.asarray(full_experiment.variants["em"].curves["decision_accuracy"]["median"])
    final, peak = curve[-1], curve.max()
    assert final >= peak - 0.02
    print(f"criterion 6: em final median accuracy={final:.4f}, peak={peak:.4f} (within 0.02) -> PASS")


def test_criterion_07_end_of_run_performance(full_experiment):
    """Final aligned medians: em >= plain on both metrics."""
    acc_em = _final_median(full_experiment, "em", "decision_accuracy")
    acc_plain = _final_median(full_experiment, "plain", "decision_accuracy")
    f1_em = _final_median(full_experiment, "em", "macro_f1")
    f1_plain = _final_median(full_experiment, "plain", "macro_f1")
    assert acc_em >= acc_plain
    assert f1_em >= f1_plain
    print(
        f"criterion 7: decision accuracy em={acc_em:.4f} >= plain={acc_plain:.4f}; "
        f"macro f1 em={f1_em:.4f} >= plain={f1_plain:.4f} -> PASS"
    )


def test_criterion_08_early_query_redistribution(full_experiment):
    """EM concentrates a larger share of its queries in the first cycle."""
    means = {}
    for variant in ("plain", "em"):
        fractions = [
            f for f in full_experiment.variants[variant].first_cycle_fractions if f is not None
        ]
        assert fractions, f"variant {variant} made no queries in any rep"
        means[variant] = float(np.mean(fractions))
    assert means["em"] > means["plain"]
    print(
        f"criterion 8: mean first-cycle query fraction em={means['em']:.3f} > "
        f"plain={means['plain']:.3f} -> PASS"
    )


def test_criterion_09_determinism_across_runs_and_workers(tmp_path):
    """Byte-identical report.json across executions and worker counts."""
    config = ExperimentConfig(
        dataset=DatasetConfig(n_cycles=2, points_per_cycle=200, seed=0),
        n_reps=6,
        master_seed=31337,
        labeled_fraction=0.02,
    )
    blobs = []
    for i, workers in enumerate((1, 1, 4)):
        report = run_experiment(config, n_workers=workers)
        out = tmp_path / f"run{i}_w{workers}"
        emit(report, out, fmt="json")
        blobs.append((out / "report.json").read_bytes())
    assert blobs[0] == blobs[1] == blobs[2]
    print(f"criterion 9: report.json identical across 2 executions and workers {{1,4}} ({len(blobs[0])} bytes) -> PASS")


def test_criterion_10_validation_property_suite(prior, tm, um):
    """Row-stochasticity, posterior normalisation, PD covariances, split partition."""
    rng = np.random.default_rng(1010)

    # transition rows are validated at construction, never assumed
    for _ in range(200):
        p = rng.dirichlet(np.ones(4), size=(2, 4))
        TransitionModel(p=p)
    bad = tm.p.copy()
    bad[0, 0, 0] += 1e-6
    with pytest.raises(ValueError):
        TransitionModel(p=bad)

    # posterior rows normalised to 1e-12 under random fitted states
    worst_norm = 0.0
    means = np.array([[0.0, 0.0], [3.0, 0.0], [6.0, 2.0], [8.0, 4.5]])
    for _ in range(20):
        y = rng.integers(1, 5, size=50)
        x = rng.normal(size=(50, 2)) + means[y - 1]
        state = fit_supervised(prior, x, y)
        post = predict_posterior(state, rng.normal(size=(500, 2)) * 5)
        worst_norm = max(worst_norm, float(np.abs(post.sum(axis=1) - 1.0).max()))
    assert worst_norm <= 1e-12

    # 10^4 random update sequences keep every covariance PD
    checked = 0
    seq = 0
    while checked < 10_000:
        seq += 1
        seq_rng = np.random.default_rng(50_000 + seq)
        n = int(seq_rng.integers(20, 120))
        x = seq_rng.normal(size=(n, 2)) * seq_rng.uniform(0.01, 4.0)
        if seq % 3 == 0:
            x[::2] = x[0]  # duplicate-heavy sequence
        y = seq_rng.integers(1, 5, size=n)
        state = fit_supervised(prior, np.zeros((0, 2)), [])
        for m in range(1, n + 1):
            state = fit_supervised(prior, x[:m], y[:m])
            np.linalg.cholesky(state.map_covariances)
            checked += 1
        state, _, _ = em_refine(state, x[: n // 2], y[: n // 2], x[n // 2 :], max_iter=10)
        np.linalg.cholesky(state.map_covariances)
        checked += 1

    # split partitions: union complete, parts pairwise disjoint
    data = generate(DatasetConfig(n_cycles=2, points_per_cycle=100, seed=6))
    for seed in range(50):
        sp = split(data, 0.4, 0.03, seed=seed)
        parts = [{o.t for o in part} for part in (sp.labeled_seed, sp.unlabeled_stream, sp.test)]
        assert parts[0] | parts[1] | parts[2] == {o.t for o in data}
        assert sum(len(p) for p in parts) == len(data)

    print(
        f"criterion 10: CPT validation, posterior norm dev={worst_norm:.2e} (<=1e-12), "
        f"{checked} PD update checks, 50 split partitions -> PASS"
    )
