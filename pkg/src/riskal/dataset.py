"""Synthetic deterioration-cycle dataset: generation, splitting and CSV IO.

Each cycle walks the structure through the four health states in order
(1 undamaged, 2 minor, 3 significant, 4 critical) and the features of
every observation are drawn from a per-class Gaussian.  Repeating the
cycle emulates degrade-and-repair behaviour over a monitoring campaign.

The published corpus behind this layout is not available, so the default
geometry is a stand-in chosen to reproduce its qualitative structure:
classes 3 and 4 overlap the most, which is where decision-relevant
uncertainty (and hence label querying) concentrates.  Everything is
configurable.

All randomness flows through explicitly seeded generators; there is no
global RNG state anywhere in the package.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

N_CLASSES = 4
LABELS = (1, 2, 3, 4)


@dataclass(frozen=True, eq=False)
class Observation:
    """One time-indexed feature vector with its hidden ground-truth label.

    ``y_true`` is carried alongside the features for oracle queries and
    evaluation; learners must not read it unless they have paid for it.
    """

    t: int
    x: np.ndarray
    y_true: int

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if x.ndim != 1 or not np.all(np.isfinite(x)):
            raise ValueError("x must be a finite 1-d vector")
        if self.y_true not in LABELS:
            raise ValueError(f"label must be in 1..4, got {self.y_true}")
        if self.t < 0:
            raise ValueError(f"time index must be non-negative, got {self.t}")
        object.__setattr__(self, "x", x)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Observation):
            return NotImplemented
        return (
            self.t == other.t
            and self.y_true == other.y_true
            and self.x.shape == other.x.shape
            and bool(np.all(self.x == other.x))
        )


def default_class_means() -> np.ndarray:
    return np.array([[0.0, 0.0], [3.0, 0.0], [6.0, 2.0], [8.0, 4.5]])


def default_class_covariances() -> np.ndarray:
    overlap = [[1.5, 0.3], [0.3, 1.5]]
    return np.array([np.eye(2), np.eye(2), overlap, overlap])


@dataclass(frozen=True, eq=False)
class DatasetConfig:
    """Geometry and size of the synthetic deterioration dataset."""

    n_cycles: int = 6
    points_per_cycle: int = 2000
    class_proportions: np.ndarray = field(default_factory=lambda: np.full(N_CLASSES, 0.25))
    class_means: np.ndarray = field(default_factory=default_class_means)
    class_covariances: np.ndarray = field(default_factory=default_class_covariances)
    seed: int = 0

    def __post_init__(self):
        if self.n_cycles < 1:
            raise ValueError(f"n_cycles must be positive, got {self.n_cycles}")
        if self.points_per_cycle < 1:
            raise ValueError(f"points_per_cycle must be positive, got {self.points_per_cycle}")
        props = np.asarray(self.class_proportions, dtype=float)
        if props.shape != (N_CLASSES,):
            raise ValueError(f"class_proportions must have length {N_CLASSES}")
        if np.any(props <= 0.0):
            raise ValueError("class_proportions must all be positive")
        if abs(props.sum() - 1.0) > 1e-12:
            raise ValueError(f"class_proportions must sum to 1 within 1e-12, got {props.sum()!r}")
        means = np.asarray(self.class_means, dtype=float)
        if means.ndim != 2 or means.shape[0] != N_CLASSES:
            raise ValueError(f"class_means must be {N_CLASSES} vectors of equal dimension")
        covs = np.asarray(self.class_covariances, dtype=float)
        d = means.shape[1]
        if covs.shape != (N_CLASSES, d, d):
            raise ValueError(f"class_covariances must have shape {(N_CLASSES, d, d)}, got {covs.shape}")
        for k, cov in enumerate(covs):
            if not np.allclose(cov, cov.T):
                raise ValueError(f"covariance for class {k + 1} is not symmetric")
            try:
                np.linalg.cholesky(cov)
            except np.linalg.LinAlgError:
                raise ValueError(f"covariance for class {k + 1} is not positive-definite") from None
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")
        object.__setattr__(self, "class_proportions", props)
        object.__setattr__(self, "class_means", means)
        object.__setattr__(self, "class_covariances", covs)
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def dim(self) -> int:
        return self.class_means.shape[1]

    @property
    def n_points(self) -> int:
        return self.n_cycles * self.points_per_cycle

    def to_dict(self) -> dict:
        return {
            "n_cycles": self.n_cycles,
            "points_per_cycle": self.points_per_cycle,
            "class_proportions": self.class_proportions.tolist(),
            "class_means": self.class_means.tolist(),
            "class_covariances": self.class_covariances.tolist(),
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DatasetConfig":
        kwargs = {}
        for key in ("n_cycles", "points_per_cycle", "seed"):
            if key in d:
                kwargs[key] = int(d[key])
        for key in ("class_proportions", "class_means", "class_covariances"):
            if key in d:
                kwargs[key] = np.asarray(d[key], dtype=float)
        return cls(**kwargs)


@dataclass(frozen=True)
class DatasetSplit:
    """Disjoint partition of a dataset for one active-learning repetition.

    ``labeled_seed`` keeps its labels visible, ``unlabeled_stream`` is
    consumed in temporal order with labels hidden until queried, and
    ``test`` is held out for evaluation only.
    """

    labeled_seed: list
    unlabeled_stream: list
    test: list


def _cycle_class_counts(config: DatasetConfig) -> np.ndarray:
    """Per-cycle class counts: round(points * proportion), remainder to class 1."""
    counts = np.rint(config.points_per_cycle * config.class_proportions).astype(int)
    counts[0] += config.points_per_cycle - counts.sum()
    if np.any(counts < 1):
        k = int(np.argmin(counts)) + 1
        raise ValueError(
            f"class {k} receives {counts.min()} points per cycle; "
            "every class needs at least one point in every cycle"
        )
    return counts


def generate(config: DatasetConfig) -> list[Observation]:
    """Generate the full deterioration stream described by ``config``.

    Within each cycle observations run class 1 through class 4 in
    blocks; features are Gaussian draws from the class distribution.
    The time index is global (0 .. n-1) and the output is byte-identical
    for identical configs.
    """
    counts = _cycle_class_counts(config)
    rng = np.random.default_rng(config.seed)
    chols = [np.linalg.cholesky(cov) for cov in config.class_covariances]

    observations: list[Observation] = []
    t = 0
    for _ in range(config.n_cycles):
        for k in range(N_CLASSES):
            z = rng.standard_normal((counts[k], config.dim))
            xs = z @ chols[k].T + config.class_means[k]
            for row in xs:
                observations.append(Observation(t=t, x=row, y_true=k + 1))
                t += 1
    return observations


def split(
    data: list[Observation],
    test_fraction: float,
    labeled_fraction: float,
    seed: int,
) -> DatasetSplit:
    """Partition ``data`` into test / labeled seed / unlabeled stream.

    The test set is a uniform random sample of size
    ``round(n * test_fraction)``; from the remaining training data a
    uniform sample of size ``max(1, round(n_train * labeled_fraction))``
    keeps its labels.  Everything else becomes the unlabeled stream, in
    the original temporal order.  There is deliberately no per-class
    representation guarantee.
    """
    if not 0.0 < test_fraction < 1.0:
        raise ValueError(f"test_fraction must be in (0, 1), got {test_fraction}")
    if not 0.0 < labeled_fraction < 1.0:
        raise ValueError(f"labeled_fraction must be in (0, 1), got {labeled_fraction}")
    n = len(data)
    n_test = round(n * test_fraction)
    if n_test == 0:
        raise ValueError(f"test_fraction={test_fraction} yields an empty test set for n={n}")
    if n_test == n:
        raise ValueError(f"test_fraction={test_fraction} leaves no training data for n={n}")

    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    test_idx = np.sort(perm[:n_test])
    train_idx = np.sort(perm[n_test:])

    n_labeled = max(1, round(len(train_idx) * labeled_fraction))
    labeled_pick = rng.choice(len(train_idx), size=n_labeled, replace=False)
    labeled_mask = np.zeros(len(train_idx), dtype=bool)
    labeled_mask[labeled_pick] = True
    labeled_idx = train_idx[labeled_mask]
    stream_idx = train_idx[~labeled_mask]

    return DatasetSplit(
        labeled_seed=[data[i] for i in labeled_idx],
        unlabeled_stream=[data[i] for i in stream_idx],
        test=[data[i] for i in test_idx],
    )


def to_arrays(observations: list[Observation]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Unpack observations into ``(t, X, y)`` arrays for vectorised code."""
    if not observations:
        dim = 0
        return np.zeros(0, dtype=int), np.zeros((0, dim)), np.zeros(0, dtype=int)
    t = np.array([o.t for o in observations], dtype=int)
    x = np.array([o.x for o in observations], dtype=float)
    y = np.array([o.y_true for o in observations], dtype=int)
    return t, x, y


def save_csv(data: list[Observation], path) -> None:
    """Write observations as CSV with header ``t,x1,...,xD,y``.

    Feature values are serialised at 17 significant digits, so a
    load/save round trip is bit-identical.
    """
    if not data:
        raise ValueError("cannot save an empty dataset")
    dim = data[0].x.shape[0]
    header = ["t"] + [f"x{i + 1}" for i in range(dim)] + ["y"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for obs in data:
            writer.writerow([obs.t] + [f"{v:.17g}" for v in obs.x] + [obs.y_true])


def load_csv(path) -> list[Observation]:
    """Read observations written by :func:`save_csv`.

    Malformed rows and labels outside 1..4 are reported with their
    1-based line number.
    """
    observations: list[Observation] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        if len(header) < 3 or header[0] != "t" or header[-1] != "y":
            raise ValueError(f"{path}: line 1: expected header t,x1,...,y, got {','.join(header)}")
        dim = len(header) - 2
        for lineno, row in enumerate(reader, start=2):
            if len(row) != dim + 2:
                raise ValueError(f"{path}: line {lineno}: expected {dim + 2} fields, got {len(row)}")
            try:
                t = int(row[0])
                x = np.array([float(v) for v in row[1:-1]])
                y = int(row[-1])
            except ValueError:
                raise ValueError(f"{path}: line {lineno}: unparsable value in {row!r}") from None
            if y not in LABELS:
                raise ValueError(f"{path}: line {lineno}: label {y} outside 1..4")
            try:
                observations.append(Observation(t=t, x=x, y_true=y))
            except ValueError as exc:
                raise ValueError(f"{path}: line {lineno}: {exc}") from None
    return observations
