"""Conditional survival estimation on step curves.

Every model materializes its curves on a time grid (by default the pooled
observed times of its training set), so a fitted model for W maps to a row of
a probability matrix. Integrals against the cumulative hazard are therefore
finite sums over grid jumps.
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .exceptions import (
    ConfigurationError,
    DegenerateCurveError,
    DomainError,
    FitError,
)

logger = logging.getLogger(__name__)

PROB_FLOOR = 1e-12
ROLES = ('event', 'censoring')
CHUNK_ROWS = 4096
MIN_EFFECTIVE_SAMPLE = 5.0


# ---------------------------------------------------------------------------
# Step curves
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SurvivalCurve:
    """Right-continuous nonincreasing step function with S(t) = 1 before times[0]."""
    times: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float).reshape(-1)
        probs = np.asarray(self.probs, dtype=float).reshape(-1)
        if times.shape != probs.shape:
            raise DomainError(f"times and probs differ in length: {len(times)} vs {len(probs)}")
        if np.any(times < 0) or np.any(np.diff(times) <= 0):
            raise DomainError("curve times must be nonnegative and strictly increasing")
        if np.any(probs > 1) or np.any(probs < 0) or np.any(np.diff(probs) > 0):
            raise DomainError("curve probabilities must be nonincreasing within [0, 1]")
        object.__setattr__(self, 'times', times)
        object.__setattr__(self, 'probs', probs)

    def _lookup(self, t, side):
        if len(self.times) == 0:
            values = np.ones(np.shape(t))
        else:
            index = np.searchsorted(self.times, t, side=side) - 1
            values = np.where(index >= 0, self.probs[np.maximum(index, 0)], 1.0)
        return float(values) if np.ndim(values) == 0 else values

    def __call__(self, t):
        return self._lookup(t, 'right')

    def left_limit(self, t):
        """S(t-): the value just before t."""
        return self._lookup(t, 'left')

    @property
    def floor(self):
        return float(self.probs[-1]) if len(self.probs) else 1.0


@dataclass(frozen=True)
class QuantileResult:
    time: float
    saturated: bool

    def __float__(self):
        return self.time


def quantile(curve: SurvivalCurve, prob: float) -> QuantileResult:
    """Generalized inverse inf{t >= 0 : S(t) <= prob}.

    When the curve never reaches ``prob`` the last grid time is returned and
    the result is flagged as saturated.
    """
    if not 0 <= prob <= 1:
        raise DomainError(f"quantile level must lie in [0, 1], got {prob}")
    times, saturated = _row_quantiles(curve.times, curve.probs[None, :], np.array([prob]))
    return QuantileResult(float(times[0]), bool(saturated[0]))


def _row_quantiles(times, probs, levels):
    levels = np.asarray(levels, dtype=float)
    if len(times) == 0:
        return np.zeros(len(probs)), levels < 1
    above = (probs > levels[:, None]).sum(axis=1)
    saturated = above == len(times)
    result = times[np.minimum(above, len(times) - 1)]
    # S(t) = 1 for t < times[0], so level 1 is reached at t = 0.
    result = np.where(levels >= 1, 0.0, result)
    saturated = saturated & (levels < 1)
    return result, saturated


@dataclass(frozen=True)
class HazardIncrements:
    times: np.ndarray
    d_lambda: np.ndarray

    def reconstruct(self):
        """Product integral prod(1 - dLambda) at each jump time."""
        return np.cumprod(1.0 - self.d_lambda)

    def survival_at(self, t):
        index = np.searchsorted(self.times, t, side='right')
        values = np.concatenate([[1.0], self.reconstruct()])
        return values[index]


def _increments(probs):
    previous = np.concatenate([np.ones(probs.shape[:-1] + (1,)), probs[..., :-1]], axis=-1)
    return (previous - probs) / np.maximum(previous, PROB_FLOOR), previous


def hazard_increments(curve: SurvivalCurve) -> HazardIncrements:
    """Cumulative hazard jumps (S(t-) - S(t)) / S(t-) at the jumps of ``curve``."""
    d_lambda, previous = _increments(curve.probs)
    jumps = curve.probs < previous
    if np.any(jumps & (previous <= 0)):
        raise DegenerateCurveError("curve jumps down from a zero left limit")
    return HazardIncrements(times=curve.times[jumps], d_lambda=np.clip(d_lambda[jumps], 0.0, 1.0))


class CurveBatch:
    """Curves of many covariate vectors on one shared grid: probs has shape (m, K)."""

    def __init__(self, times, probs):
        self.times = np.asarray(times, dtype=float)
        self.probs = np.asarray(probs, dtype=float)

    def __len__(self):
        return self.probs.shape[0]

    def row(self, index) -> SurvivalCurve:
        return SurvivalCurve(self.times, self.probs[index])

    def _lookup(self, t, side):
        t = np.broadcast_to(np.asarray(t, dtype=float), (len(self),))
        index = np.searchsorted(self.times, t, side=side) - 1
        if len(self.times) == 0:
            return np.ones(len(self))
        values = self.probs[np.arange(len(self)), np.maximum(index, 0)]
        return np.where(index >= 0, values, 1.0)

    def evaluate(self, t):
        """Row-wise right-continuous S_i(t_i)."""
        return self._lookup(t, 'right')

    def on_grid(self, times):
        """Evaluate every row at a common set of times; shape (m, len(times))."""
        index = np.searchsorted(self.times, np.asarray(times, dtype=float), side='right') - 1
        if len(self.times) == 0:
            return np.ones((len(self), len(index)))
        values = self.probs[:, np.maximum(index, 0)]
        return np.where(index[None, :] >= 0, values, 1.0)

    def quantiles(self, levels):
        """Row-wise generalized inverse; returns (times, saturated)."""
        levels = np.broadcast_to(np.asarray(levels, dtype=float), (len(self),))
        if np.any((levels < 0) | (levels > 1)):
            raise DomainError("quantile levels must lie in [0, 1]")
        return _row_quantiles(self.times, self.probs, levels)

    def hazard_increments(self):
        d_lambda, _ = _increments(self.probs)
        return np.clip(d_lambda, 0.0, 1.0)


# ---------------------------------------------------------------------------
# Models
# ---------------------------------------------------------------------------

def role_indicator(dataset, role):
    if role not in ROLES:
        raise ConfigurationError(f"unknown model role '{role}'")
    delta = dataset.delta.astype(float)
    return delta if role == 'event' else 1.0 - delta


def pooled_grid(dataset):
    return np.unique(dataset.y)


def _as_matrix(W, p):
    W = np.asarray(W, dtype=float)
    if W.ndim == 1:
        W = W.reshape(1, -1) if p > 1 or W.size == 1 else W.reshape(-1, 1)
    if W.shape[1] != p:
        raise DomainError(f"expected {p} covariate(s), got {W.shape[1]}")
    return W


class ConditionalSurvivalModel:
    """Fitted map from a covariate vector to a SurvivalCurve."""
    kind = None

    def __init__(self, role, grid, p):
        self.role = role
        self.grid = np.asarray(grid, dtype=float)
        self.p = p

    def curves(self, W, grid=None) -> CurveBatch:
        W = _as_matrix(W, self.p)
        grid = self.grid if grid is None else np.asarray(grid, dtype=float)
        blocks = [self._probs(W[start:start + CHUNK_ROWS], grid) for start in range(0, len(W), CHUNK_ROWS)]
        probs = np.vstack(blocks) if blocks else np.empty((0, len(grid)))
        return CurveBatch(grid, probs)

    def curve(self, w, grid=None) -> SurvivalCurve:
        return self.curves(np.asarray(w, dtype=float).reshape(1, -1), grid).row(0)

    def _probs(self, W, grid):
        raise NotImplementedError

    def to_dict(self):
        return {'kind': self.kind, 'role': self.role, 'p': self.p, 'grid': self.grid.tolist()}

    def __repr__(self):
        return f"{type(self).__name__}(role={self.role}, p={self.p}, grid={len(self.grid)})"


class KaplanMeierModel(ConditionalSurvivalModel):
    kind = 'km'

    def __init__(self, role, grid, probs, p):
        super().__init__(role, grid, p)
        self.probs = np.asarray(probs, dtype=float)

    def _probs(self, W, grid):
        values = SurvivalCurve(self.grid, self.probs)(grid)
        return np.broadcast_to(values, (len(W), len(grid))).copy()

    def to_dict(self):
        return {**super().to_dict(), 'probs': self.probs.tolist()}

    @classmethod
    def from_dict(cls, data):
        return cls(data['role'], data['grid'], data['probs'], data['p'])


def product_limit(y, indicator, grid, weights=None):
    """Weighted product-limit estimate on ``grid``; weights has shape (m, n) or None."""
    order = np.argsort(y, kind='stable')
    y_sorted = y[order]
    group = np.searchsorted(grid, y_sorted)
    starts = np.flatnonzero(np.r_[True, np.diff(group) != 0])
    if weights is None:
        weights = np.ones((1, len(y)))
    weights = weights[:, order]
    totals = np.zeros((weights.shape[0], len(grid)))
    events = np.zeros_like(totals)
    totals[:, group[starts]] = np.add.reduceat(weights, starts, axis=1)
    events[:, group[starts]] = np.add.reduceat(weights * indicator[order], starts, axis=1)
    at_risk = np.cumsum(totals[:, ::-1], axis=1)[:, ::-1]
    with np.errstate(divide='ignore', invalid='ignore'):
        hazard = np.where(at_risk > 0, events / at_risk, 0.0)
    return np.cumprod(1.0 - np.clip(hazard, 0.0, 1.0), axis=1)


def fit_km(train, role) -> KaplanMeierModel:
    """Covariate-free product-limit curve."""
    indicator = role_indicator(train, role)
    grid = pooled_grid(train)
    probs = product_limit(train.y, indicator, grid)[0]
    logger.info(f"Fitted Kaplan-Meier {role} model on {len(train)} records ({int(indicator.sum())} events)")
    return KaplanMeierModel(role, grid, probs, train.p)


class BeranModel(ConditionalSurvivalModel):
    """Gaussian-kernel conditional product-limit estimator for one covariate."""
    kind = 'beran'

    def __init__(self, role, grid, w, y, indicator, bandwidth):
        super().__init__(role, grid, 1)
        self.w = np.asarray(w, dtype=float).reshape(-1)
        self.y = np.asarray(y, dtype=float)
        self.indicator = np.asarray(indicator, dtype=float)
        self.bandwidth = float(bandwidth)

    def kernel_weights(self, W):
        u = (W[:, :1] - self.w[None, :]) / self.bandwidth
        return np.exp(-0.5 * u * u)

    def _probs(self, W, grid):
        weights = self.kernel_weights(W)
        effective = weights.sum(axis=1)
        sparse = int(np.sum(effective < MIN_EFFECTIVE_SAMPLE))
        if sparse:
            logger.warning(
                f"Beran extrapolation: {sparse} query point(s) with effective sample < {MIN_EFFECTIVE_SAMPLE}"
            )
        probs = product_limit(self.y, self.indicator, self.grid, weights)
        if grid is self.grid or np.array_equal(grid, self.grid):
            return probs
        return CurveBatch(self.grid, probs).on_grid(grid)

    def to_dict(self):
        return {
            **super().to_dict(),
            'bandwidth': self.bandwidth,
            'train_w': self.w.tolist(),
            'train_y': self.y.tolist(),
            'train_indicator': self.indicator.tolist(),
        }

    @classmethod
    def from_dict(cls, data):
        return cls(data['role'], data['grid'], data['train_w'], data['train_y'],
                   data['train_indicator'], data['bandwidth'])


def default_bandwidth(w):
    """Rule of thumb 0.5 * sd(w) * n^(-1/5)."""
    spread = float(np.std(w, ddof=1)) if len(w) > 1 else 0.0
    if spread <= 0:
        spread = 1.0
    return 0.5 * spread * len(w) ** (-0.2)


def fit_beran(train, role, bandwidth: Optional[float] = None) -> BeranModel:
    if train.p != 1:
        raise ConfigurationError(f"Beran estimator needs exactly one covariate, got p={train.p}")
    if bandwidth is None:
        bandwidth = default_bandwidth(train.w[:, 0])
    if not bandwidth > 0:
        raise ConfigurationError(f"bandwidth must be positive, got {bandwidth}")
    indicator = role_indicator(train, role)
    logger.info(f"Fitted Beran {role} model on {len(train)} records, bandwidth={bandwidth:.4g}")
    return BeranModel(role, pooled_grid(train), train.w[:, 0], train.y, indicator, bandwidth)


# ---------------------------------------------------------------------------
# Cox proportional hazards
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CoxConfig:
    max_iter: int = 100
    tol: float = 1e-8
    max_halvings: int = 30
    baseline_form: str = 'product'


def _free_columns(X):
    return np.flatnonzero(np.ptp(X, axis=0) > 0) if X.size else np.array([], dtype=int)


class _RiskSets:
    """Sorted-time bookkeeping for Breslow partial likelihood sums."""

    def __init__(self, y, indicator):
        self.order = np.argsort(y, kind='stable')
        self.y = y[self.order]
        self.indicator = indicator[self.order]
        self.grid, self.starts = np.unique(self.y, return_index=True)
        self.events = np.add.reduceat(self.indicator, self.starts)

    def reverse_cumsum(self, values):
        return np.cumsum(values[::-1], axis=0)[::-1]


def breslow_increments(y, indicator, risk_scores):
    """Baseline hazard jumps d_k / sum_{y_i >= t_k} exp(x_i b) on the pooled grid."""
    sets = _RiskSets(np.asarray(y, dtype=float), np.asarray(indicator, dtype=float))
    at_risk = sets.reverse_cumsum(np.asarray(risk_scores, dtype=float)[sets.order])[sets.starts]
    return sets.grid, sets.events / at_risk


def _cox_terms(beta, X, sets):
    eta = X @ beta
    theta = np.exp(eta)
    r0 = sets.reverse_cumsum(theta)[sets.starts]
    r1 = sets.reverse_cumsum(theta[:, None] * X)[sets.starts]
    r2 = sets.reverse_cumsum(theta[:, None, None] * X[:, :, None] * X[:, None, :])[sets.starts]
    d = sets.events
    active = d > 0
    mean = r1[active] / r0[active, None]
    loglik = float(sets.indicator @ eta - d[active] @ np.log(r0[active]))
    score = sets.indicator @ X - d[active] @ mean
    second = r2[active] / r0[active, None, None] - mean[:, :, None] * mean[:, None, :]
    hessian = -np.einsum('k,kij->ij', d[active], second)
    return loglik, score, hessian


class CoxModel(ConditionalSurvivalModel):
    kind = 'cox'

    def __init__(self, role, grid, p, coefficients, center, baseline, baseline_form='product', diagnostics=None):
        super().__init__(role, grid, p)
        self.coefficients = np.asarray(coefficients, dtype=float)
        self.center = np.asarray(center, dtype=float)
        self.baseline = np.asarray(baseline, dtype=float)
        self.baseline_form = baseline_form
        self.diagnostics = diagnostics or {}

    def _probs(self, W, grid):
        risk = np.exp((W - self.center) @ self.coefficients)
        if self.baseline_form == 'exponential':
            probs = np.exp(-np.cumsum(self.baseline)[None, :] * risk[:, None])
        else:
            probs = np.cumprod(1.0 - np.minimum(1.0, self.baseline[None, :] * risk[:, None]), axis=1)
        if grid is self.grid or np.array_equal(grid, self.grid):
            return probs
        return CurveBatch(self.grid, probs).on_grid(grid)

    def to_dict(self):
        return {
            **super().to_dict(),
            'coefficients': self.coefficients.tolist(),
            'center': self.center.tolist(),
            'baseline_hazard': self.baseline.tolist(),
            'baseline_form': self.baseline_form,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(data['role'], data['grid'], data['p'], data['coefficients'], data['center'],
                   data['baseline_hazard'], data.get('baseline_form', 'product'))


def fit_cox(train, role, config: CoxConfig = CoxConfig()) -> CoxModel:
    """Breslow partial-likelihood Newton fit with step-halving."""
    indicator = role_indicator(train, role)
    n_events = int(indicator.sum())
    if n_events == 0:
        raise FitError(f"no {role} events to fit a Cox model", {'events': 0})
    if n_events < train.p + 2:
        raise FitError(f"Cox model needs at least p+2={train.p + 2} {role} events, got {n_events}",
                       {'events': n_events})
    if config.baseline_form not in ('product', 'exponential'):
        raise ConfigurationError(f"unknown Cox baseline form '{config.baseline_form}'")

    center = train.w.mean(axis=0)
    X_full = train.w - center
    free = _free_columns(X_full)
    X = X_full[:, free]
    sets = _RiskSets(train.y, indicator)
    X_sorted = X[sets.order]

    beta = np.zeros(len(free))
    iterations = 0
    max_score = 0.0
    if len(free):
        loglik, score, hessian = _cox_terms(beta, X_sorted, sets)
        while True:
            max_score = float(np.max(np.abs(score)))
            if max_score <= config.tol:
                break
            if iterations >= config.max_iter:
                raise FitError(
                    f"Cox Newton iteration did not converge in {config.max_iter} iterations",
                    {'iterations': iterations, 'max_score': max_score,
                     'beta': beta.tolist(), 'loglik': loglik},
                )
            try:
                step = np.linalg.solve(-hessian, score)
            except np.linalg.LinAlgError as e:
                raise FitError(f"singular information matrix: {e}",
                               {'iterations': iterations, 'beta': beta.tolist()}) from e
            for _ in range(config.max_halvings):
                candidate = beta + step
                new_loglik, new_score, new_hessian = _cox_terms(candidate, X_sorted, sets)
                if np.isfinite(new_loglik) and new_loglik >= loglik - 1e-12 * abs(loglik):
                    break
                step = step / 2
            else:
                raise FitError("step-halving failed to increase the partial likelihood",
                               {'iterations': iterations, 'max_score': max_score, 'beta': beta.tolist()})
            if np.max(np.abs(candidate - beta)) < 1e-14:
                beta, loglik, score, hessian = candidate, new_loglik, new_score, new_hessian
                max_score = float(np.max(np.abs(score)))
                break
            beta, loglik, score, hessian = candidate, new_loglik, new_score, new_hessian
            iterations += 1

    coefficients = np.zeros(train.p)
    coefficients[free] = beta
    risk = np.exp(X_full @ coefficients)
    grid, baseline = breslow_increments(train.y, indicator, risk)
    diagnostics = {'iterations': iterations, 'max_score': max_score, 'events': n_events}
    logger.info(f"Fitted Cox {role} model: beta={np.round(coefficients, 4).tolist()} after {iterations} iteration(s)")
    return CoxModel(role, grid, train.p, coefficients, center, baseline, config.baseline_form, diagnostics)


# ---------------------------------------------------------------------------
# Weibull accelerated failure time
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WeibullConfig:
    max_iter: int = 100
    tol: float = 1e-8
    max_halvings: int = 50
    grid: Optional[tuple] = None


def _weibull_terms(params, X, log_y, indicator):
    # Trial steps may overflow; the caller rejects non-finite candidates.
    with np.errstate(over='ignore', invalid='ignore'):
        gamma, log_scale = params[:-1], params[-1]
        inv_scale = np.exp(-log_scale)
        z = (log_y - X @ gamma) * inv_scale
        ez = np.exp(np.minimum(z, 700.0))
        loglik = float(np.sum(indicator * (z - log_scale) - ez))
        resid = indicator - ez
        grad_gamma = -(resid * inv_scale) @ X
        grad_scale = float(np.sum(-indicator - z * resid))
        hess_gg = -(X * (ez * inv_scale ** 2)[:, None]).T @ X
        cross = indicator - ez - z * ez
        hess_gs = (X * (cross * inv_scale)[:, None]).sum(axis=0)
        hess_ss = float(np.sum(z * cross))
        k = len(gamma)
        hessian = np.empty((k + 1, k + 1))
        hessian[:k, :k] = hess_gg
        hessian[:k, k] = hessian[k, :k] = hess_gs
        hessian[k, k] = hess_ss
        return loglik, np.r_[grad_gamma, grad_scale], hessian


class WeibullModel(ConditionalSurvivalModel):
    """log T = b0 + b'w + scale * eps with eps standard minimum-Gumbel."""
    kind = 'weibull'

    def __init__(self, role, grid, p, intercept, coefficients, scale, diagnostics=None):
        super().__init__(role, grid, p)
        self.intercept = float(intercept)
        self.coefficients = np.asarray(coefficients, dtype=float)
        self.scale = float(scale)
        self.diagnostics = diagnostics or {}

    @property
    def shape(self):
        return 1.0 / self.scale

    def characteristic_time(self, W):
        """lambda(w) = exp(b0 + b'w)."""
        W = _as_matrix(W, self.p)
        return np.exp(self.intercept + W @ self.coefficients)

    def survival_function(self, t, W):
        lam = self.characteristic_time(W)
        t = np.asarray(t, dtype=float)
        with np.errstate(divide='ignore'):
            return np.exp(-(t[None, :] / lam[:, None]) ** self.shape)

    def _probs(self, W, grid):
        return self.survival_function(grid, W)

    def to_dict(self):
        return {
            **super().to_dict(),
            'intercept': self.intercept,
            'coefficients': self.coefficients.tolist(),
            'scale': self.scale,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(data['role'], data['grid'], data['p'], data['intercept'], data['coefficients'], data['scale'])


def fit_weibull(train, role, config: WeibullConfig = WeibullConfig()) -> WeibullModel:
    """Right-censored maximum likelihood for the Weibull AFT model."""
    indicator = role_indicator(train, role)
    n_events = int(indicator.sum())
    if n_events == 0:
        raise FitError(f"no {role} events to fit a Weibull model", {'events': 0})
    if n_events < train.p + 2:
        raise FitError(f"Weibull model needs at least p+2={train.p + 2} {role} events, got {n_events}",
                       {'events': n_events})

    free = _free_columns(train.w)
    X = np.column_stack([np.ones(len(train)), train.w[:, free]])
    log_y = np.log(np.maximum(train.y, PROB_FLOOR))
    n = len(train)

    start, *_ = np.linalg.lstsq(X, log_y, rcond=None)
    spread = float(np.std(log_y - X @ start)) * np.sqrt(6.0) / np.pi
    params = np.r_[start, np.log(max(spread, 1e-3))]

    loglik, grad, hessian = _weibull_terms(params, X, log_y, indicator)
    iterations = 0
    while np.max(np.abs(grad)) / n > config.tol:
        if iterations >= config.max_iter:
            raise FitError(
                f"Weibull Newton iteration did not converge in {config.max_iter} iterations",
                {'iterations': iterations, 'max_score': float(np.max(np.abs(grad))), 'params': params.tolist()},
            )
        try:
            step = np.linalg.solve(-hessian, grad)
            if step @ grad <= 0:
                step = grad / n
        except np.linalg.LinAlgError:
            step = grad / n
        for _ in range(config.max_halvings):
            candidate = params + step
            new = _weibull_terms(candidate, X, log_y, indicator)
            if np.isfinite(new[0]) and new[0] >= loglik - 1e-12 * abs(loglik):
                break
            step = step / 2
        else:
            raise FitError("step-halving failed to increase the Weibull likelihood",
                           {'iterations': iterations, 'params': params.tolist()})
        converged_in_place = np.max(np.abs(candidate - params)) < 1e-14
        params = candidate
        loglik, grad, hessian = new
        iterations += 1
        if converged_in_place:
            break

    coefficients = np.zeros(train.p)
    coefficients[free] = params[1:-1]
    grid = pooled_grid(train) if config.grid is None else np.asarray(config.grid, dtype=float)
    model = WeibullModel(role, grid, train.p, params[0], coefficients, float(np.exp(params[-1])),
                         {'iterations': iterations, 'loglik': loglik, 'events': n_events})
    logger.info(f"Fitted Weibull {role} model: shape={model.shape:.4g} after {iterations} iteration(s)")
    return model


# ---------------------------------------------------------------------------
# Closed-form curves (simulation oracles and perturbed fixtures)
# ---------------------------------------------------------------------------

class AnalyticModel(ConditionalSurvivalModel):
    """Wraps a closed-form survival function (t_grid, W) -> probs."""
    kind = 'oracle'

    def __init__(self, role, grid, p, survival_fn: Callable, label=''):
        super().__init__(role, grid, p)
        self.survival_fn = survival_fn
        self.label = label

    def _probs(self, W, grid):
        return np.clip(self.survival_fn(grid, W), 0.0, 1.0)

    def to_dict(self):
        raise ConfigurationError("closed-form oracle models cannot be serialized")


MODEL_TYPES = {
    'km': KaplanMeierModel,
    'beran': BeranModel,
    'cox': CoxModel,
    'weibull': WeibullModel,
}


def model_from_dict(data) -> ConditionalSurvivalModel:
    kind = data.get('kind')
    if kind not in MODEL_TYPES:
        raise ConfigurationError(f"unknown model kind '{kind}'")
    return MODEL_TYPES[kind].from_dict(data)


@dataclass(frozen=True)
class FitOptions:
    bandwidth: Optional[float] = None
    cox: CoxConfig = field(default_factory=CoxConfig)
    weibull: WeibullConfig = field(default_factory=WeibullConfig)


def default_kind(role, p):
    """Nuisance family used when the configured kind is 'auto'."""
    if p == 1:
        return 'beran'
    return 'weibull' if role == 'event' else 'cox'


def fit_model(kind, train, role, options: FitOptions = FitOptions()) -> ConditionalSurvivalModel:
    if kind == 'auto':
        kind = default_kind(role, train.p)
    if kind == 'km':
        return fit_km(train, role)
    if kind == 'beran':
        return fit_beran(train, role, options.bandwidth)
    if kind == 'cox':
        return fit_cox(train, role, options.cox)
    if kind == 'weibull':
        return fit_weibull(train, role, options.weibull)
    raise ConfigurationError(f"unknown model kind '{kind}'")
