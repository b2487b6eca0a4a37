"""Bayesian four-class Gaussian mixture classifier with MAP-EM refinement.

Each class carries a Normal-Inverse-Wishart prior over its mean and
covariance, and a Dirichlet prior covers the mixing proportions.
Supervised fitting is the conjugate update; classification plugs the
MAP parameters into the class densities (a deliberately cheap policy,
since the posterior must be evaluated for every streamed point).

Semi-supervised refinement runs MAP-EM on the penalised objective

    J(theta) = sum_labeled   log[ pi_y * N(x; mu_y, Sigma_y) ]
             + sum_unlabeled log[ sum_k pi_k * N(x; mu_k, Sigma_k) ]
             + log p(theta | prior)

with labeled responsibilities pinned one-hot at the ground truth, so a
handful of inspected points anchors the components while the unlabeled
pool pulls the fit toward the underlying distribution.

States are immutable values: every operation returns a new
:class:`ClassifierState`, so states can be shared freely across threads.
The module is written for tight online loops; density evaluation and the
EM steps are fully vectorised over points and classes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, multigammaln

N_CLASSES = 4

_LOG_2PI = np.log(2.0 * np.pi)


@dataclass(frozen=True, eq=False)
class ConjugatePrior:
    """Per-class Normal-Inverse-Wishart hyperparameters plus Dirichlet counts.

    Parameters
    ----------
    m0 : (4, d) array
        Prior means.
    kappa0 : (4,) array
        Strength of the prior mean (pseudo-observations).
    nu0 : (4,) array
        Inverse-Wishart degrees of freedom; each must exceed ``d - 1``.
    s0 : (4, d, d) array
        Prior scatter matrices (symmetric positive-definite).
    alpha : (4,) array
        Dirichlet pseudo-counts for the mixing proportions.
    """

    m0: np.ndarray
    kappa0: np.ndarray
    nu0: np.ndarray
    s0: np.ndarray
    alpha: np.ndarray
    # Normalisation constants of the prior density, precomputed because
    # the EM objective evaluates it every iteration.
    log_norm: np.ndarray = field(repr=False, compare=False, default=None)
    dir_log_norm: float = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        m0 = np.asarray(self.m0, dtype=float)
        if m0.ndim != 2 or m0.shape[0] != N_CLASSES:
            raise ValueError(f"m0 must be {N_CLASSES} vectors, got shape {m0.shape}")
        d = m0.shape[1]
        kappa0 = np.asarray(self.kappa0, dtype=float)
        nu0 = np.asarray(self.nu0, dtype=float)
        alpha = np.asarray(self.alpha, dtype=float)
        s0 = np.asarray(self.s0, dtype=float)
        if kappa0.shape != (N_CLASSES,) or np.any(kappa0 <= 0):
            raise ValueError("kappa0 must be 4 positive reals")
        if nu0.shape != (N_CLASSES,) or np.any(nu0 <= d - 1):
            raise ValueError(f"nu0 must be 4 reals greater than d - 1 = {d - 1}")
        if alpha.shape != (N_CLASSES,) or np.any(alpha <= 0):
            raise ValueError("alpha must be 4 positive reals")
        if s0.shape != (N_CLASSES, d, d):
            raise ValueError(f"s0 must have shape {(N_CLASSES, d, d)}, got {s0.shape}")
        log_det_s0 = np.empty(N_CLASSES)
        for k in range(N_CLASSES):
            if not np.allclose(s0[k], s0[k].T):
                raise ValueError(f"s0 for class {k + 1} is not symmetric")
            try:
                chol = np.linalg.cholesky(s0[k])
            except np.linalg.LinAlgError:
                raise ValueError(f"s0 for class {k + 1} is not positive-definite") from None
            log_det_s0[k] = 2.0 * np.log(np.diag(chol)).sum()
        object.__setattr__(self, "m0", m0)
        object.__setattr__(self, "kappa0", kappa0)
        object.__setattr__(self, "nu0", nu0)
        object.__setattr__(self, "s0", s0)
        object.__setattr__(self, "alpha", alpha)
        norm = (
            -0.5 * d * _LOG_2PI
            + 0.5 * d * np.log(kappa0)
            + 0.5 * nu0 * log_det_s0
            - 0.5 * nu0 * d * np.log(2.0)
            - np.array([multigammaln(0.5 * nu0[k], d) for k in range(N_CLASSES)])
        )
        object.__setattr__(self, "log_norm", norm)
        object.__setattr__(self, "dir_log_norm", float(gammaln(alpha.sum()) - gammaln(alpha).sum()))

    @property
    def dim(self) -> int:
        return self.m0.shape[1]

    def to_dict(self) -> dict:
        return {
            "m0": self.m0.tolist(),
            "kappa0": self.kappa0.tolist(),
            "nu0": self.nu0.tolist(),
            "s0": self.s0.tolist(),
            "alpha": self.alpha.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ConjugatePrior":
        return cls(
            m0=np.asarray(d["m0"], dtype=float),
            kappa0=np.asarray(d["kappa0"], dtype=float),
            nu0=np.asarray(d["nu0"], dtype=float),
            s0=np.asarray(d["s0"], dtype=float),
            alpha=np.asarray(d["alpha"], dtype=float),
        )


def default_prior(dim: int = 2) -> ConjugatePrior:
    """Weakly informative prior: zero means, unit scatter, flat mixing.

    ``nu0 = dim + 2`` is the smallest integer df giving a proper MAP
    covariance; ``kappa0 = 0.1`` lets a single observation move the mean
    most of the way to the data.
    """
    return ConjugatePrior(
        m0=np.zeros((N_CLASSES, dim)),
        kappa0=np.full(N_CLASSES, 0.1),
        nu0=np.full(N_CLASSES, float(dim + 2)),
        s0=np.tile(np.eye(dim), (N_CLASSES, 1, 1)),
        alpha=np.ones(N_CLASSES),
    )


@dataclass(frozen=True, eq=False)
class ClassifierState:
    """Sufficient statistics and MAP mixture parameters after an update.

    ``counts``/``means``/``scatters`` are the (possibly fractional)
    per-class statistics the state was built from; ``map_*`` are the
    plug-in parameters used for classification.  Treat instances as
    immutable values.
    """

    prior: ConjugatePrior
    counts: np.ndarray
    means: np.ndarray
    scatters: np.ndarray
    map_means: np.ndarray
    map_covariances: np.ndarray
    map_mixing: np.ndarray
    # Derived quantities every density evaluation needs, cached once.
    chol: np.ndarray = field(repr=False, compare=False, default=None)
    inv_chol: np.ndarray = field(repr=False, compare=False, default=None)
    log_det: np.ndarray = field(repr=False, compare=False, default=None)
    log_mixing: np.ndarray = field(repr=False, compare=False, default=None)
    precision: np.ndarray = field(repr=False, compare=False, default=None)
    lin: np.ndarray = field(repr=False, compare=False, default=None)
    quad_const: np.ndarray = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        mixing = np.asarray(self.map_mixing, dtype=float)
        if abs(mixing.sum() - 1.0) > 1e-12:
            raise ValueError(f"map_mixing must sum to 1 within 1e-12, got {mixing.sum()!r}")
        if np.any(mixing <= 0.0):
            raise ValueError("map_mixing components must all be positive")
        if np.any(np.asarray(self.counts) < 0):
            raise ValueError("counts must be non-negative")
        if self.chol is None:
            try:
                chol = np.linalg.cholesky(self.map_covariances)
            except np.linalg.LinAlgError:
                bad = _first_non_pd(self.map_covariances)
                raise ValueError(f"MAP covariance for class {bad + 1} is not positive-definite") from None
            d = self.map_means.shape[1]
            eye = np.broadcast_to(np.eye(d), (N_CLASSES, d, d))
            inv_chol = np.linalg.solve(chol, eye)
            precision = np.einsum("kdi,kdj->kij", inv_chol, inv_chol)
            lin = np.einsum("kij,kj->ki", precision, self.map_means)
            object.__setattr__(self, "chol", chol)
            object.__setattr__(self, "inv_chol", inv_chol)
            object.__setattr__(self, "log_det", 2.0 * np.log(np.diagonal(chol, axis1=1, axis2=2)).sum(axis=1))
            object.__setattr__(self, "log_mixing", np.log(mixing))
            object.__setattr__(self, "precision", precision)
            object.__setattr__(self, "lin", lin)
            object.__setattr__(self, "quad_const", np.einsum("ki,ki->k", lin, self.map_means))

    @property
    def dim(self) -> int:
        return self.map_means.shape[1]

    @property
    def total_count(self) -> float:
        """Total statistic mass: labeled points, plus soft responsibility
        mass after an EM refinement."""
        return float(self.counts.sum())

    def to_dict(self) -> dict:
        return {
            "prior": self.prior.to_dict(),
            "counts": self.counts.tolist(),
            "means": self.means.tolist(),
            "scatters": self.scatters.tolist(),
            "map_means": self.map_means.tolist(),
            "map_covariances": self.map_covariances.tolist(),
            "map_mixing": self.map_mixing.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ClassifierState":
        return cls(
            prior=ConjugatePrior.from_dict(d["prior"]),
            counts=np.asarray(d["counts"], dtype=float),
            means=np.asarray(d["means"], dtype=float),
            scatters=np.asarray(d["scatters"], dtype=float),
            map_means=np.asarray(d["map_means"], dtype=float),
            map_covariances=np.asarray(d["map_covariances"], dtype=float),
            map_mixing=np.asarray(d["map_mixing"], dtype=float),
        )


def _first_non_pd(covs: np.ndarray) -> int:
    for k in range(len(covs)):
        try:
            np.linalg.cholesky(covs[k])
        except np.linalg.LinAlgError:
            return k
    return -1


def _map_from_stats(
    prior: ConjugatePrior,
    counts: np.ndarray,
    means: np.ndarray,
    scatters: np.ndarray,
) -> ClassifierState:
    """Conjugate posterior update and MAP extraction from class statistics.

    For class k with n_k points, sample mean xbar_k and scatter C_k:

        kappa_n = kappa0 + n_k
        m_n     = (kappa0 * m0 + n_k * xbar_k) / kappa_n
        nu_n    = nu0 + n_k
        S_n     = S0 + C_k + kappa0 n_k / kappa_n (xbar_k - m0)(xbar_k - m0)^T

    MAP mean is m_n; MAP covariance is S_n / (nu_n + d + 2), the joint
    posterior mode.  Mixing uses the Dirichlet mode
    (alpha_k + n_k - 1) / (sum alpha + n - 4) whenever that is positive
    for every class, otherwise the normalised posterior mean, which
    keeps every component strictly positive (empty classes fall back to
    the prior rather than vanishing).
    """
    d = prior.dim
    kappa_n = prior.kappa0 + counts
    m_n = (prior.kappa0[:, None] * prior.m0 + counts[:, None] * means) / kappa_n[:, None]
    nu_n = prior.nu0 + counts
    dev = means - prior.m0
    shrink = (prior.kappa0 * counts / kappa_n)[:, None, None]
    s_n = prior.s0 + scatters + shrink * (dev[:, :, None] * dev[:, None, :])
    s_n = 0.5 * (s_n + s_n.swapaxes(1, 2))

    map_cov = s_n / (nu_n + d + 2)[:, None, None]
    post_alpha = prior.alpha + counts
    if np.all(post_alpha > 1.0):
        mixing = (post_alpha - 1.0) / (post_alpha.sum() - N_CLASSES)
    else:
        mixing = post_alpha / post_alpha.sum()

    return ClassifierState(
        prior=prior,
        counts=counts,
        means=means,
        scatters=scatters,
        map_means=m_n,
        map_covariances=map_cov,
        map_mixing=mixing,
    )


def _check_data(x: np.ndarray, dim: int, name: str = "x") -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != dim:
        raise ValueError(f"{name} must have dimension {dim}, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} contains non-finite values")
    return x


def _class_stats(x: np.ndarray, y: np.ndarray, dim: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Hard-label per-class counts, sample means and scatters."""
    counts = np.zeros(N_CLASSES)
    means = np.zeros((N_CLASSES, dim))
    scatters = np.zeros((N_CLASSES, dim, dim))
    for k in range(N_CLASSES):
        xk = x[y == k + 1]
        if len(xk) == 0:
            continue
        counts[k] = len(xk)
        means[k] = xk.mean(axis=0)
        dev = xk - means[k]
        scatters[k] = dev.T @ dev
    return counts, means, scatters


def fit_supervised(prior: ConjugatePrior, x, y) -> ClassifierState:
    """Conjugate MAP fit from labeled data alone.

    Parameters
    ----------
    x : (n, d) array
        Feature vectors (a single vector is also accepted).
    y : (n,) int array
        Labels in 1..4.  An empty dataset returns the pure-prior state.
    """
    y = np.atleast_1d(np.asarray(y, dtype=int))
    if len(y) == 0:
        d = prior.dim
        return _map_from_stats(prior, np.zeros(N_CLASSES), np.zeros((N_CLASSES, d)), np.zeros((N_CLASSES, d, d)))
    if np.any((y < 1) | (y > N_CLASSES)):
        raise ValueError("labels must be in 1..4")
    x = _check_data(x, prior.dim)
    if len(x) != len(y):
        raise ValueError(f"{len(x)} feature vectors but {len(y)} labels")
    return _map_from_stats(prior, *_class_stats(x, y, prior.dim))


def _second_moments(x: np.ndarray) -> np.ndarray:
    """Flattened outer products ``x x^T``, shape (n, d*d)."""
    n, d = x.shape
    return (x[:, :, None] * x[:, None, :]).reshape(n, d * d)


def _log_densities_raw(state: ClassifierState, x: np.ndarray, xx: np.ndarray | None = None) -> np.ndarray:
    # Mahalanobis via the expanded quadratic form so both terms are
    # single BLAS products; precomputed xx lets EM reuse the moments.
    d = state.dim
    if xx is None:
        xx = _second_moments(x)
    maha = xx @ state.precision.reshape(N_CLASSES, d * d).T - 2.0 * (x @ state.lin.T) + state.quad_const
    return -0.5 * (d * _LOG_2PI + state.log_det + maha)


def log_densities(state: ClassifierState, x) -> np.ndarray:
    """Per-class Gaussian log densities ``log N(x; mu_k, Sigma_k)``, shape (n, 4)."""
    return _log_densities_raw(state, _check_data(x, state.dim))


def _log_joint(state: ClassifierState, x: np.ndarray, xx: np.ndarray | None = None) -> np.ndarray:
    return _log_densities_raw(state, x, xx) + state.log_mixing


def _softmax_rows(log_p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Row-normalised exp plus the row log-sum-exp, stably."""
    m = log_p.max(axis=1, keepdims=True)
    shifted = np.exp(log_p - m)
    total = shifted.sum(axis=1, keepdims=True)
    return shifted / total, (m + np.log(total))[:, 0]


def predict_posterior(state: ClassifierState, x):
    """Class posterior ``p(y = k | x)`` under the MAP plug-in mixture.

    Computed in the log domain and normalised with log-sum-exp, so no
    component underflows for data in any reasonable range.  Accepts a
    single vector ``(d,)`` or a batch ``(n, d)``.
    """
    single = np.asarray(x).ndim == 1
    post, _ = _softmax_rows(_log_joint(state, _check_data(x, state.dim)))
    return post[0] if single else post


def _log_prior_density(state: ClassifierState) -> float:
    """Log density of the MAP parameters under the conjugate prior.

    Sum over classes of Normal-Inverse-Wishart log pdfs evaluated at
    (map_mean, map_cov), plus the Dirichlet log pdf of the mixing
    vector.  Fully normalised.
    """
    prior = state.prior
    d = state.dim
    dev = state.map_means - prior.m0
    sol = np.einsum("kde,ke->kd", state.inv_chol, dev)
    maha = np.einsum("kd,kd->k", sol, sol)
    # tr(S0 Sigma^-1) with Sigma^-1 = A^T A for A = chol(Sigma)^-1
    a_s0 = np.einsum("kde,kef->kdf", state.inv_chol, prior.s0)
    trace = np.einsum("kdf,kdf->k", a_s0, state.inv_chol)
    niw = (
        prior.log_norm
        - 0.5 * (prior.nu0 + d + 2) * state.log_det
        - 0.5 * prior.kappa0 * maha
        - 0.5 * trace
    )
    dirichlet = prior.dir_log_norm + ((prior.alpha - 1.0) * state.log_mixing).sum()
    return float(niw.sum() + dirichlet)


def _one_hot(y: np.ndarray) -> np.ndarray:
    h = np.zeros((len(y), N_CLASSES))
    h[np.arange(len(y)), y - 1] = 1.0
    return h


def _data_terms(
    state: ClassifierState,
    x_l,
    h_l,
    x_u,
    xx_l: np.ndarray | None = None,
    xx_u: np.ndarray | None = None,
) -> tuple[float, np.ndarray]:
    """Labeled/unlabeled log-likelihood terms plus unlabeled responsibilities."""
    ll = 0.0
    if len(x_l):
        ll += float((h_l * _log_joint(state, x_l, xx_l)).sum())
    if len(x_u):
        resp, log_norm = _softmax_rows(_log_joint(state, x_u, xx_u))
        ll += float(log_norm.sum())
    else:
        resp = np.zeros((0, N_CLASSES))
    return ll, resp


def penalized_log_posterior(state: ClassifierState, x_l, y_l, x_u) -> float:
    """The MAP-EM objective J at the state's parameters (pure function)."""
    x_l, h_l, x_u = _prep_em_data(state.prior, x_l, y_l, x_u)
    ll, _ = _data_terms(state, x_l, h_l, x_u)
    return ll + _log_prior_density(state)


def _prep_em_data(prior: ConjugatePrior, x_l, y_l, x_u):
    y_l = np.atleast_1d(np.asarray(y_l, dtype=int))
    if len(y_l):
        if np.any((y_l < 1) | (y_l > N_CLASSES)):
            raise ValueError("labels must be in 1..4")
        x_l = _check_data(x_l, prior.dim, "labeled x")
        if len(x_l) != len(y_l):
            raise ValueError(f"{len(x_l)} labeled vectors but {len(y_l)} labels")
    else:
        x_l = np.zeros((0, prior.dim))
    x_u = _check_data(x_u, prior.dim, "unlabeled x") if np.size(x_u) else np.zeros((0, prior.dim))
    return x_l, _one_hot(y_l), x_u


def em_refine(
    state: ClassifierState,
    x_l,
    y_l,
    x_u,
    tol: float = 1e-6,
    max_iter: int = 100,
) -> tuple[ClassifierState, int, np.ndarray]:
    """MAP-EM over labeled plus unlabeled data, warm-started from ``state``.

    The E-step assigns soft responsibilities to unlabeled points under
    the current parameters while labeled points stay one-hot at their
    ground truth; the M-step is the conjugate update with the resulting
    fractional counts.  Iterates until the relative change of the
    penalised objective drops below ``tol`` or ``max_iter`` is reached.

    Returns
    -------
    (state, n_iter, trace)
        The refined state, the number of parameter updates performed,
        and the objective values ``[J_0, ..., J_n]`` (non-decreasing up
        to floating-point noise, by the usual EM ascent argument).
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    if max_iter < 1:
        raise ValueError(f"max_iter must be at least 1, got {max_iter}")
    x_l, h_l, x_u = _prep_em_data(state.prior, x_l, y_l, x_u)
    d = state.dim

    # Labeled statistics are one-hot and never change across iterations;
    # second moments are reused by every E- and M-step.
    xx_l = _second_moments(x_l)
    xx_u = _second_moments(x_u)
    h_counts = h_l.sum(axis=0)
    h_sums = h_l.T @ x_l
    h_m2 = (h_l.T @ xx_l).reshape(N_CLASSES, d, d)

    trace = []
    current = state
    n_iter = 0
    while True:
        ll, resp = _data_terms(current, x_l, h_l, x_u, xx_l, xx_u)
        trace.append(ll + _log_prior_density(current))
        if n_iter >= 1 and abs(trace[-1] - trace[-2]) / (1.0 + abs(trace[-2])) < tol:
            break
        if n_iter >= max_iter:
            break
        counts = h_counts + resp.sum(axis=0)
        sums = h_sums + resp.T @ x_u
        m2 = h_m2 + (resp.T @ xx_u).reshape(N_CLASSES, d, d)
        means = np.divide(sums, counts[:, None], out=np.zeros((N_CLASSES, d)), where=counts[:, None] > 0)
        scatters = m2 - counts[:, None, None] * (means[:, :, None] * means[:, None, :])
        current = _map_from_stats(current.prior, counts, means, scatters)
        n_iter += 1
    return current, n_iter, np.array(trace)
