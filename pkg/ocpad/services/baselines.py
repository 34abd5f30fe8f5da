"""
One-class baselines on fixed-width feature vectors: a diagonal Gaussian
mixture fitted by EM and a nu one-class SVM with an RBF kernel solved by
SMO. Both emit higher-is-more-anomalous scores.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Literal, Optional, Sequence, Union

import numpy as np
from pydantic import ValidationError
from scipy.spatial.distance import cdist
from scipy.special import logsumexp

from ocpad.errors import ConvergenceError, DataContractError, FormatError, UsageError
from ocpad.models.baselines import FeatureScaler, GmmModel, OcSvmModel
from ocpad.schemas.baseline import BaselineDocument
from ocpad.utils.seeding import rng_for

logger = logging.getLogger(__name__)

VARIANCE_FLOOR = 1e-6
EMPTY_COMPONENT = 1e-8
KKT_TOLERANCE = 1e-4
# Substitute curvature for non-positive-definite pairs.
TAU = 1e-12

BaselineKind = Literal["gmm", "svm"]
Baseline = Union[GmmModel, OcSvmModel]


def _features(features: np.ndarray, min_rows: int) -> np.ndarray:
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[0] < min_rows or features.shape[1] < 1:
        raise DataContractError(f"need an (n >= {min_rows}, D) feature matrix, got shape {features.shape}")
    if not np.all(np.isfinite(features)):
        raise DataContractError("features contain non-finite values")
    return features


# Gaussian mixture

def _kmeans_pp(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Seeded k-means++ centers."""
    chosen = [int(rng.integers(len(x)))]
    d2 = ((x - x[chosen[0]]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total > 0:
            index = int(rng.choice(len(x), p=d2 / total))
        else:
            index = next(i for i in range(len(x)) if i not in chosen)
        chosen.append(index)
        d2 = np.minimum(d2, ((x - x[index]) ** 2).sum(axis=1))
    return x[chosen].copy()


def _component_log_density(x: np.ndarray, weights: np.ndarray, means: np.ndarray,
                           variances: np.ndarray) -> np.ndarray:
    """(n, K) matrix of log(pi_k) + log N(x | mu_k, diag(var_k))."""
    log_weights = np.log(weights) - np.log(weights.sum())
    log_norm = -0.5 * np.log(2 * np.pi * variances).sum(axis=1)
    sq = (((x[:, None, :] - means[None, :, :]) ** 2) / variances[None, :, :]).sum(axis=2)
    return log_weights[None, :] + log_norm[None, :] - 0.5 * sq


def gmm_log_likelihood(model: GmmModel, features: np.ndarray) -> np.ndarray:
    x = model.check(features)
    return logsumexp(_component_log_density(x, model.weights, model.means, model.variances), axis=1)


def gmm_fit(features: np.ndarray, components: int = 4, seed: int = 42,
            max_iter: int = 200, tol: float = 1e-6) -> GmmModel:
    """
    EM for a diagonal mixture. ``log_likelihoods`` holds the mean per-sample
    log-likelihood before the first update and after every accepted update;
    ``iterations`` counts updates that improved it by at least ``tol``.
    """
    x = _features(features, 1)
    n, dim = x.shape
    if components < 1:
        raise UsageError(f"components must be >= 1, got {components}")
    if n < components:
        raise DataContractError(f"{n} samples cannot fit {components} components")

    rng = rng_for(seed, "gmm:init")
    global_var = np.maximum(x.var(axis=0), VARIANCE_FLOOR)
    means = _kmeans_pp(x, components, rng)
    variances = np.tile(global_var, (components, 1))
    weights = np.full(components, 1.0 / components)

    log_density = _component_log_density(x, weights, means, variances)
    ll = float(logsumexp(log_density, axis=1).mean())
    trace = [ll]
    iterations = 0
    for _ in range(max_iter):
        per_sample = logsumexp(log_density, axis=1)
        resp = np.exp(log_density - per_sample[:, None])
        nk = resp.sum(axis=0)

        empty = np.flatnonzero(nk < EMPTY_COMPONENT)
        if empty.size:
            # Reseed at the worst-explained points, deterministically.
            worst = np.argsort(per_sample, kind="stable")
            for rank, k in enumerate(empty):
                means[k] = x[worst[rank]]
                variances[k] = global_var
                weights[k] = 1.0 / n
            weights /= weights.sum()
            logger.warning(f"Reseeded {empty.size} empty GMM component(s); restarting the likelihood trace")
            log_density = _component_log_density(x, weights, means, variances)
            ll = float(logsumexp(log_density, axis=1).mean())
            trace = [ll]
            continue

        new_means = (resp.T @ x) / nk[:, None]
        new_vars = np.empty_like(variances)
        for k in range(components):
            new_vars[k] = (resp[:, k:k + 1] * (x - new_means[k]) ** 2).sum(axis=0) / nk[k]
        new_vars = np.maximum(new_vars, VARIANCE_FLOOR)
        new_weights = nk / n

        new_density = _component_log_density(x, new_weights, new_means, new_vars)
        new_ll = float(logsumexp(new_density, axis=1).mean())
        if new_ll < ll:
            break
        means, variances, weights, log_density = new_means, new_vars, new_weights, new_density
        trace.append(new_ll)
        improvement, ll = new_ll - ll, new_ll
        if improvement < tol:
            break
        iterations += 1

    logger.info(f"Fitted {components}-component GMM on {n}x{dim} features "
                f"in {iterations} iterations (mean log-likelihood {ll:.4f})")
    return GmmModel(weights=weights, means=means, variances=variances,
                    log_likelihoods=trace, iterations=iterations)


def gmm_score(model: GmmModel, features: np.ndarray) -> np.ndarray:
    """Negative log-likelihood per row."""
    return -gmm_log_likelihood(model, features)


# One-class SVM

def rbf_kernel(a: np.ndarray, b: np.ndarray, gamma: float) -> np.ndarray:
    return np.exp(-gamma * cdist(a, b, "sqeuclidean"))


def default_gamma(features: np.ndarray) -> float:
    """1 / (D * variance of all feature values)."""
    var = float(np.asarray(features, dtype=np.float64).var())
    return 1.0 / (features.shape[1] * var) if var > 0 else 1.0


def _select_pair(alpha: np.ndarray, grad: np.ndarray, q: np.ndarray, upper: float):
    """
    Second-order working-set selection; returns (i, j, gap) with i = j = -1
    when no pair makes progress.
    """
    up = alpha < upper
    low = alpha > 0
    if not up.any() or not low.any():
        return -1, -1, 0.0
    minus_grad = -grad
    i = int(np.argmax(np.where(up, minus_grad, -np.inf)))
    g_max = minus_grad[i]
    g_min = float(np.min(minus_grad[low]))
    gap = g_max - g_min

    b = g_max + grad
    candidates = low & (b > 0)
    if not candidates.any():
        return -1, -1, gap
    a = q[i, i] + np.diag(q) - 2 * q[i]
    a = np.where(a > 0, a, TAU)
    objective = np.where(candidates, -(b * b) / a, np.inf)
    j = int(np.argmin(objective))
    return i, j, gap


def _rho(alpha: np.ndarray, grad: np.ndarray, upper: float) -> float:
    free = (alpha > 0) & (alpha < upper)
    if free.any():
        return float(grad[free].mean())
    at_zero = grad[alpha <= 0]
    at_upper = grad[alpha >= upper]
    ub = float(at_zero.min()) if at_zero.size else float(grad.max())
    lb = float(at_upper.max()) if at_upper.size else float(grad.min())
    return (ub + lb) / 2


def ocsvm_fit(features: np.ndarray, nu: float = 0.1, gamma: Optional[float] = None, seed: int = 42,
              tol: float = KKT_TOLERANCE, max_iter: int = 100_000) -> OcSvmModel:
    """
    Solve min 1/2 a'Qa s.t. sum(a) = 1, 0 <= a_i <= 1/(nu n) by SMO.
    """
    x = _features(features, 2)
    n = x.shape[0]
    if not 0 < nu <= 1:
        raise UsageError(f"nu must be in (0, 1], got {nu}")
    gamma = default_gamma(x) if gamma is None else gamma
    if gamma <= 0:
        raise UsageError(f"gamma must be > 0, got {gamma}")

    upper = 1.0 / (nu * n)
    q = rbf_kernel(x, x, gamma)

    # Fill the box in a seeded order until the unit mass is placed.
    alpha = np.zeros(n)
    remaining = 1.0
    for index in rng_for(seed, "ocsvm:init").permutation(n):
        if remaining <= 0:
            break
        alpha[index] = min(upper, remaining)
        remaining -= alpha[index]
    grad = q @ alpha

    gap, iterations = 0.0, 0
    while True:
        i, j, gap = _select_pair(alpha, grad, q, upper)
        if i < 0 or gap < tol:
            break
        if iterations >= max_iter:
            raise ConvergenceError(f"OC-SVM did not converge in {max_iter} iterations", gap)
        iterations += 1

        a = q[i, i] + q[j, j] - 2 * q[i, j]
        if a <= 0:
            a = TAU
        delta = (grad[j] - grad[i]) / a
        old_i, old_j = alpha[i], alpha[j]
        total = old_i + old_j
        alpha[i] = min(max(old_i + delta, 0.0), upper)
        alpha[j] = min(max(total - alpha[i], 0.0), upper)
        alpha[i] = total - alpha[j]
        grad += q[:, i] * (alpha[i] - old_i) + q[:, j] * (alpha[j] - old_j)

    rho = _rho(alpha, grad, upper)
    support = np.flatnonzero(alpha > 0)
    logger.info(f"Fitted OC-SVM (nu={nu}, gamma={gamma:.4g}) on {n} samples: "
                f"{support.size} support vectors, {iterations} iterations, gap {gap:.2e}")
    return OcSvmModel(nu=nu, gamma=gamma, support_vectors=x[support].copy(),
                      coefficients=alpha[support].copy(), rho=rho, iterations=iterations)


def ocsvm_decision(model: OcSvmModel, features: np.ndarray) -> np.ndarray:
    """Kernel expansion sum_i a_i k(sv_i, x)."""
    x = model.check(features)
    return rbf_kernel(x, model.support_vectors, model.gamma) @ model.coefficients


def ocsvm_score(model: OcSvmModel, features: np.ndarray) -> np.ndarray:
    """rho minus the kernel expansion; positive outside the boundary."""
    return model.rho - ocsvm_decision(model, features)


# Standardized wrapper and persistence

class OneClassBaseline:
    """
    A baseline classifier behind a feature scaler fitted on training data.
    """

    def __init__(self, model: Baseline):
        self.model = model

    @property
    def kind(self) -> BaselineKind:
        return "gmm" if isinstance(self.model, GmmModel) else "svm"

    @classmethod
    def fit(cls, kind: BaselineKind, features: np.ndarray, seed: int = 42, standardize: bool = True,
            components: int = 4, max_iter: int = 200, tol: float = 1e-6,
            nu: float = 0.1, gamma: Optional[float] = None) -> "OneClassBaseline":
        features = _features(features, 1)
        scaler = FeatureScaler.fit(features) if standardize else None
        x = scaler.transform(features) if scaler else features
        if kind == "gmm":
            model = gmm_fit(x, components=components, seed=seed, max_iter=max_iter, tol=tol)
        elif kind == "svm":
            model = ocsvm_fit(x, nu=nu, gamma=gamma, seed=seed)
        else:
            raise UsageError(f"unknown baseline {kind!r}")
        model.scaler = scaler
        return cls(model)

    def score(self, features: np.ndarray) -> np.ndarray:
        scaler = self.model.scaler
        x = scaler.transform(features) if scaler else features
        if self.kind == "gmm":
            return gmm_score(self.model, x)
        return ocsvm_score(self.model, x)

    def save(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        doc = BaselineDocument(model=self.model.to_document())
        path.write_text(doc.model_dump_json(indent=2) + "\n", encoding="utf-8")
        return path

    @classmethod
    def load(cls, path: Union[str, Path]) -> "OneClassBaseline":
        path = Path(path)
        if not path.is_file():
            raise DataContractError(f"baseline file not found: {path}")
        try:
            doc = BaselineDocument.model_validate_json(path.read_text(encoding="utf-8"))
        except ValidationError as exc:
            raise FormatError(f"{path}: invalid baseline document ({exc.error_count()} errors)") from exc
        if doc.model.kind == "gmm":
            return cls(GmmModel.from_document(doc.model))
        return cls(OcSvmModel.from_document(doc.model))


# Hyperparameter selection on held-out bona fide features

@dataclass(frozen=True)
class Selection:
    """
    The refitted winner of a validation sweep. ``criteria`` maps every
    candidate tried to its validation criterion, lower being better.
    """

    baseline: OneClassBaseline
    parameter: str
    value: float
    criteria: Dict[float, float]


def select_baseline(kind: BaselineKind, train_features: np.ndarray, val_features: np.ndarray, seed: int = 42,
                    standardize: bool = True, component_grid: Sequence[int] = (1, 2, 4, 8),
                    gamma_factors: Sequence[float] = (0.1, 0.3, 1.0, 3.0, 10.0), nu: float = 0.1,
                    max_iter: int = 200, tol: float = 1e-6) -> Selection:
    """
    Sweep one hyperparameter against bona fide validation features.

    GMM components minimize the mean validation negative log-likelihood;
    ties go to fewer components. OC-SVM gamma (a multiple of the default)
    minimizes the gap between the validation rejection rate and nu; ties
    go to the factor closest to 1.
    """
    train = _features(train_features, 1)
    val = _features(val_features, 1)
    if val.shape[1] != train.shape[1]:
        raise DataContractError(f"validation features have {val.shape[1]} dimensions, training {train.shape[1]}")

    fits: Dict[float, OneClassBaseline] = {}
    criteria: Dict[float, float] = {}
    if kind == "gmm":
        parameter = "components"
        candidates = sorted({int(k) for k in component_grid if 1 <= k <= train.shape[0]})
        for k in candidates:
            fits[k] = OneClassBaseline.fit("gmm", train, seed=seed, standardize=standardize,
                                           components=k, max_iter=max_iter, tol=tol)
            criteria[k] = float(fits[k].score(val).mean())
        tie_break = {k: float(k) for k in candidates}
    elif kind == "svm":
        parameter = "gamma"
        scaled = FeatureScaler.fit(train).transform(train) if standardize else train
        base = default_gamma(scaled)
        candidates = [base * f for f in sorted(set(gamma_factors)) if f > 0]
        for gamma in candidates:
            fits[gamma] = OneClassBaseline.fit("svm", train, seed=seed, standardize=standardize,
                                               nu=nu, gamma=gamma)
            criteria[gamma] = abs(float((fits[gamma].score(val) > 0).mean()) - nu)
        tie_break = {gamma: abs(np.log(gamma / base)) for gamma in candidates}
    else:
        raise UsageError(f"unknown baseline {kind!r}")
    if not candidates:
        raise UsageError(f"no usable {parameter} candidates for {train.shape[0]} training samples")

    best = min(candidates, key=lambda value: (criteria[value], tie_break[value]))
    logger.info(f"Selected {kind} {parameter}={best:.4g} on {val.shape[0]} validation samples "
                f"(criterion {criteria[best]:.4f} over {len(candidates)} candidates)")
    return Selection(baseline=fits[best], parameter=parameter, value=float(best), criteria=criteria)
