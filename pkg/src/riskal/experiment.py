"""Batch experiment harness: repeated paired runs, aggregation and emission.

Each repetition draws its own dataset and split from seeds derived
deterministically from ``(master_seed, rep)``, then executes every
requested variant on the identical split, so cross-variant comparisons
are paired.  Aggregates are keyed by repetition index and therefore
independent of worker count and scheduling.

Emitted artifacts are plot-ready: query-count histograms, per-stream-
index query frequencies, and median/interquartile metric curves aligned
on cumulative query count.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import partial
from pathlib import Path

import numpy as np

from .active_learning import LearnerConfig, run
from .dataset import DatasetConfig, generate, split, to_arrays
from .decision import TransitionModel, UtilityModel, default_transition_model, default_utility_model
from .gmm import ConjugatePrior, default_prior

VARIANTS = ("plain", "em")

# Metric curves are reported out to the largest query count still backed
# by raw (non-carried) values from at least this share of the runs.
_CURVE_SUPPORT_FRACTION = 0.25


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce one batch experiment."""

    dataset: DatasetConfig = field(default_factory=DatasetConfig)
    n_reps: int = 100
    master_seed: int = 0
    test_fraction: float = 0.5
    labeled_fraction: float = 0.002
    variants: tuple[str, ...] = VARIANTS
    learner: LearnerConfig = field(default_factory=LearnerConfig)
    tm: TransitionModel = field(default_factory=default_transition_model)
    um: UtilityModel = field(default_factory=default_utility_model)
    prior: ConjugatePrior | None = None

    def __post_init__(self):
        if self.n_reps < 1:
            raise ValueError(f"n_reps must be at least 1, got {self.n_reps}")
        variants = tuple(self.variants)
        if not variants:
            raise ValueError("variants must be non-empty")
        for v in variants:
            if v not in VARIANTS:
                raise ValueError(f"unknown variant {v!r}; choose from {VARIANTS}")
        if len(set(variants)) != len(variants):
            raise ValueError(f"duplicate variants in {variants}")
        if not 0.0 < self.test_fraction < 1.0:
            raise ValueError(f"test_fraction must be in (0, 1), got {self.test_fraction}")
        if not 0.0 < self.labeled_fraction < 1.0:
            raise ValueError(f"labeled_fraction must be in (0, 1), got {self.labeled_fraction}")
        object.__setattr__(self, "variants", variants)
        if self.prior is None:
            object.__setattr__(self, "prior", default_prior(self.dataset.dim))
        if self.prior.dim != self.dataset.dim:
            raise ValueError(f"prior dimension {self.prior.dim} != dataset dimension {self.dataset.dim}")

    def to_dict(self) -> dict:
        return {
            "n_reps": self.n_reps,
            "master_seed": self.master_seed,
            "variants": list(self.variants),
            "dataset": self.dataset.to_dict(),
            "split": {"test_fraction": self.test_fraction, "labeled_fraction": self.labeled_fraction},
            "learner": self.learner.to_dict(),
            "transition_model": self.tm.to_dict(),
            "utility_model": self.um.to_dict(),
            "prior": self.prior.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        kwargs = {}
        if "n_reps" in d:
            kwargs["n_reps"] = int(d["n_reps"])
        if "master_seed" in d:
            kwargs["master_seed"] = int(d["master_seed"])
        if "variants" in d:
            kwargs["variants"] = tuple(d["variants"])
        if "dataset" in d:
            kwargs["dataset"] = DatasetConfig.from_dict(d["dataset"])
        if "split" in d:
            kwargs["test_fraction"] = float(d["split"].get("test_fraction", 0.5))
            kwargs["labeled_fraction"] = float(d["split"].get("labeled_fraction", 0.002))
        if "learner" in d:
            kwargs["learner"] = LearnerConfig.from_dict(d["learner"])
        if "transition_model" in d:
            kwargs["tm"] = TransitionModel.from_dict(d["transition_model"])
        if "utility_model" in d:
            kwargs["um"] = UtilityModel.from_dict(d["utility_model"])
        if "prior" in d:
            kwargs["prior"] = ConjugatePrior.from_dict(d["prior"])
        return cls(**kwargs)


@dataclass
class VariantAggregate:
    """Aggregated outcomes of all repetitions for one variant."""

    query_counts: list[int]
    query_frequency_by_index: list[int]
    first_cycle_fractions: list[float | None]
    split_hashes: list[str]
    curves: dict[str, dict[str, list[float]]]

    def to_dict(self) -> dict:
        return {
            "query_counts": self.query_counts,
            "query_frequency_by_index": self.query_frequency_by_index,
            "first_cycle_fractions": self.first_cycle_fractions,
            "split_hashes": self.split_hashes,
            "curves": self.curves,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "VariantAggregate":
        return cls(
            query_counts=list(d["query_counts"]),
            query_frequency_by_index=list(d["query_frequency_by_index"]),
            first_cycle_fractions=list(d["first_cycle_fractions"]),
            split_hashes=list(d["split_hashes"]),
            curves=d["curves"],
        )


@dataclass
class AggregateReport:
    """Config echo plus per-variant aggregates; round-trips through JSON."""

    config: dict
    variants: dict[str, VariantAggregate]

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "variants": {name: agg.to_dict() for name, agg in self.variants.items()},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AggregateReport":
        return cls(
            config=d["config"],
            variants={name: VariantAggregate.from_dict(v) for name, v in d["variants"].items()},
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def _split_digest(sp) -> str:
    """Content hash of a split (time indices and labels of all three parts)."""
    h = hashlib.sha256()
    for part in (sp.labeled_seed, sp.unlabeled_stream, sp.test):
        t, _, y = to_arrays(part)
        h.update(t.astype(np.int64).tobytes())
        h.update(y.astype(np.int64).tobytes())
    return h.hexdigest()


def _run_rep(config: ExperimentConfig, rep: int) -> dict:
    """One repetition: fresh dataset and split, all variants on that split."""
    ss = np.random.SeedSequence(entropy=config.master_seed, spawn_key=(rep,))
    dataset_seed, split_seed, run_seed = (int(s) for s in ss.generate_state(3, np.uint64))
    try:
        data = generate(replace(config.dataset, seed=dataset_seed))
        sp = split(data, config.test_fraction, config.labeled_fraction, split_seed)
    except Exception as exc:
        raise RuntimeError(f"repetition {rep} failed during data preparation: {exc}") from exc
    digest = _split_digest(sp)
    t_stream, _, _ = to_arrays(sp.unlabeled_stream)

    out = {}
    for variant in config.variants:
        learner = replace(config.learner, em_enabled=(variant == "em"))
        try:
            result = run(sp, config.prior, config.tm, config.um, learner, seed=run_seed)
        except Exception as exc:
            raise RuntimeError(f"repetition {rep} variant '{variant}' failed: {exc}") from exc
        queried_t = t_stream[result.queried_positions]
        if result.query_count:
            first_cycle = float(np.mean(queried_t < config.dataset.points_per_cycle))
        else:
            first_cycle = None
        out[variant] = {
            "query_count": result.query_count,
            "queried_positions": list(result.queried_positions),
            "curves": result.metric_curves,
            "first_cycle_fraction": first_cycle,
            "split_sha256": digest,
            "stream_length": len(t_stream),
        }
    return out


def align_curves(run_curves: list[list[float]]) -> dict[str, list[float]]:
    """Median and interquartile range of per-run curves versus query count.

    Runs are aligned on integer query count; a run that stopped earlier
    contributes its final value (last observation carried forward).  The
    output extends to the largest query count at which at least 25% of
    runs still contribute raw values.
    """
    if not run_curves:
        raise ValueError("align_curves needs at least one run")
    n = len(run_curves)
    lengths = np.array([len(c) - 1 for c in run_curves])
    support = np.arange(lengths.max() + 1)
    raw_counts = (lengths[None, :] >= support[:, None]).sum(axis=1)
    q_max = int(support[raw_counts >= _CURVE_SUPPORT_FRACTION * n].max())

    values = np.array([[c[min(q, len(c) - 1)] for c in run_curves] for q in range(q_max + 1)])
    q25, median, q75 = np.percentile(values, [25.0, 50.0, 75.0], axis=1)
    return {
        "query_count": list(range(q_max + 1)),
        "q25": q25.tolist(),
        "median": median.tolist(),
        "q75": q75.tolist(),
    }


def _aggregate(config: ExperimentConfig, summaries: list[dict]) -> AggregateReport:
    variants: dict[str, VariantAggregate] = {}
    for variant in config.variants:
        reps = [s[variant] for s in summaries]
        stream_length = max(r["stream_length"] for r in reps)
        frequency = np.zeros(stream_length, dtype=int)
        for r in reps:
            frequency[r["queried_positions"]] += 1
        curves = {
            metric: align_curves([r["curves"][metric] for r in reps])
            for metric in ("decision_accuracy", "macro_f1")
        }
        variants[variant] = VariantAggregate(
            query_counts=[r["query_count"] for r in reps],
            query_frequency_by_index=frequency.tolist(),
            first_cycle_fractions=[r["first_cycle_fraction"] for r in reps],
            split_hashes=[r["split_sha256"] for r in reps],
            curves=curves,
        )
    return AggregateReport(config=config.to_dict(), variants=variants)


def run_experiment(config: ExperimentConfig, n_workers: int = 1) -> AggregateReport:
    """Run all repetitions and aggregate.

    The report depends only on ``config`` (in particular on
    ``master_seed``), never on ``n_workers`` or scheduling: repetitions
    are seeded independently and aggregated in repetition order.
    """
    reps = range(config.n_reps)
    if n_workers <= 1:
        summaries = [_run_rep(config, r) for r in reps]
    else:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            summaries = list(pool.map(partial(_run_rep, config), reps))
    return _aggregate(config, summaries)


def emit(report: AggregateReport, out_dir, fmt: str = "csv") -> list[Path]:
    """Write ``report.json`` (always) plus plot-ready CSVs when ``fmt='csv'``.

    Files: ``queries_hist.csv`` (variant,total_queries,count),
    ``queries_by_index.csv`` (variant,stream_index,query_frequency) and
    ``curves.csv`` (variant,query_count,metric,q25,median,q75).
    """
    if fmt not in ("csv", "json"):
        raise ValueError(f"format must be 'csv' or 'json', got {fmt!r}")
    if not report.variants:
        raise ValueError("report contains no variants; nothing to emit")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    report_path = out_dir / "report.json"
    report_path.write_text(report.to_json())
    written.append(report_path)
    if fmt == "json":
        return written

    hist_path = out_dir / "queries_hist.csv"
    with open(hist_path, "w") as fh:
        fh.write("variant,total_queries,count\n")
        for name, agg in report.variants.items():
            totals, counts = np.unique(np.asarray(agg.query_counts, dtype=int), return_counts=True)
            for total, count in zip(totals, counts):
                fh.write(f"{name},{total},{count}\n")
    written.append(hist_path)

    index_path = out_dir / "queries_by_index.csv"
    with open(index_path, "w") as fh:
        fh.write("variant,stream_index,query_frequency\n")
        for name, agg in report.variants.items():
            for i, freq in enumerate(agg.query_frequency_by_index):
                fh.write(f"{name},{i},{freq}\n")
    written.append(index_path)

    curves_path = out_dir / "curves.csv"
    with open(curves_path, "w") as fh:
        fh.write("variant,query_count,metric,q25,median,q75\n")
        for name, agg in report.variants.items():
            for metric, curve in agg.curves.items():
                for q, lo, med, hi in zip(curve["query_count"], curve["q25"], curve["median"], curve["q75"]):
                    fh.write(f"{name},{q},{metric},{lo!r},{med!r},{hi!r}\n")
    written.append(curves_path)
    return written
