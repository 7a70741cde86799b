"""Synthetic settings, seeded random streams and Monte-Carlo coverage oracles."""
import dataclasses
import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.stats import norm

from .datamodel import Dataset
from .exceptions import ConfigurationError, DomainError
from .survmodels import AnalyticModel

logger = logging.getLogger(__name__)

DEFAULT_N_MC = 100_000
MIN_N_MC = 1000
COVARIATE_HIGH = 4.0


@dataclass(frozen=True)
class RngStream:
    """Independent random stream identified by (seed, stream id)."""
    seed: int
    stream: int = 0

    def generator(self, *substream):
        sequence = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream), *substream))
        return np.random.default_rng(sequence)

    def child(self, stream):
        return RngStream(self.seed, stream)


def _as_generator(rng):
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


# Location, scale and censoring functions; each maps W (m, p) to (m,).

def _mu_linear(W):
    return 0.632 * W[:, 0]


def _mu_step3(W):
    return np.where(W[:, 0] > 2, 3.0, W[:, 0])


def _mu_step2(W):
    return np.where(W[:, 0] > 2, 2.0, W[:, 0])


def _mu_step3_steep(W):
    return np.where(W[:, 0] > 2, 3.0, 1.5 * W[:, 0])


def _mu_sparse(W):
    return 0.126 * (W[:, 0] + np.sqrt(W[:, 2] * W[:, 4])) + 1.0


def _constant(value):
    def scale(W):
        return np.full(len(W), value)
    scale.__name__ = f"constant_{value}"
    return scale


def _sigma_heteroscedastic(W):
    return (W[:, 1] + 2.0) / 4.0


def _rate_fixed(W):
    return np.full(len(W), 0.1)


def _rate_linear(W):
    return 0.25 + (6.0 + W[:, 0]) / 100.0


def _rate_sparse(W):
    return W[:, 9] / 10.0 + 1.0 / 20.0


def _censor_lognormal_mu(W):
    return 2.0 + (2.0 - W[:, 0]) / 50.0


@dataclass(frozen=True)
class CensoringLaw:
    """Exponential (``param`` gives the rate or mean) or log-normal (``param`` gives log-mean, ``sd`` log-sd)."""
    kind: str
    param: Callable
    sd: float = 0.0


@dataclass(frozen=True)
class SettingSpec:
    id: int
    p: int
    mu: Callable
    sigma: Callable
    censoring: CensoringLaw
    exp_parameterization: str = 'rate'
    sigma_override: Optional[float] = None

    def location(self, W):
        return self.mu(W)

    def scale(self, W):
        if self.sigma_override is not None:
            return np.full(len(W), float(self.sigma_override))
        return self.sigma(W)

    def censoring_rate(self, W):
        theta = self.censoring.param(W)
        return theta if self.exp_parameterization == 'rate' else 1.0 / theta

    def with_sigma(self, value):
        return dataclasses.replace(self, sigma_override=value)


_SETTINGS = {
    1: dict(p=1, mu=_mu_linear, sigma=_constant(2.0), censoring=CensoringLaw('exponential', _rate_fixed)),
    2: dict(p=1, mu=_mu_step3, sigma=_constant(0.5), censoring=CensoringLaw('exponential', _rate_fixed)),
    3: dict(p=1, mu=_mu_step2, sigma=_constant(0.5), censoring=CensoringLaw('exponential', _rate_linear)),
    4: dict(p=1, mu=_mu_step3_steep, sigma=_constant(0.5),
            censoring=CensoringLaw('lognormal', _censor_lognormal_mu, sd=0.5)),
    5: dict(p=10, mu=_mu_sparse, sigma=_constant(1.0), censoring=CensoringLaw('exponential', _rate_sparse)),
    6: dict(p=10, mu=_mu_sparse, sigma=_sigma_heteroscedastic,
            censoring=CensoringLaw('exponential', _rate_sparse)),
}


def get_setting(setting_id, exp_parameterization='rate') -> SettingSpec:
    if setting_id not in _SETTINGS:
        raise ConfigurationError(f"unknown setting id {setting_id}; expected one of 1..6")
    if exp_parameterization not in ('rate', 'mean'):
        raise ConfigurationError(f"exp_parameterization must be 'rate' or 'mean', got {exp_parameterization!r}")
    return SettingSpec(id=setting_id, exp_parameterization=exp_parameterization, **_SETTINGS[setting_id])


def draw_covariates(setting, n, generator):
    return generator.uniform(0.0, COVARIATE_HIGH, size=(n, setting.p))


def draw_event_times(setting, W, generator):
    return np.exp(setting.location(W) + setting.scale(W) * generator.standard_normal(len(W)))


def draw_censoring_times(setting, W, generator):
    law = setting.censoring
    if law.kind == 'exponential':
        return generator.exponential(1.0 / setting.censoring_rate(W))
    return np.exp(law.param(W) + law.sd * generator.standard_normal(len(W)))


def generate(setting: SettingSpec, n: int, rng) -> Dataset:
    """n i.i.d. full records (W, T, C) with their observed projection."""
    if n < 1:
        raise DomainError(f"n must be at least 1, got {n}")
    generator = _as_generator(rng)
    W = draw_covariates(setting, n, generator)
    T = draw_event_times(setting, W, generator)
    C = draw_censoring_times(setting, W, generator)
    return Dataset.from_full(W, T, C)


def administrative_censor(dataset: Dataset, horizon: float) -> Dataset:
    """Coarsen latent data at a fixed horizon so that truth stays checkable."""
    if not horizon > 0:
        raise DomainError(f"horizon must be positive, got {horizon}")
    if not dataset.has_latent:
        raise DomainError("administrative censoring needs latent t and c columns")
    return Dataset.from_full(dataset.w, dataset.t, np.minimum(dataset.c, horizon))


def conditional_survival(setting, t, W, mu_shift=0.0, sigma_scale=1.0):
    """S0(t | w) on a grid: shape (len(W), len(t))."""
    t = np.asarray(t, dtype=float)
    W = np.asarray(W, dtype=float)
    mu = setting.location(W)[:, None] + mu_shift
    sigma = setting.scale(W)[:, None] * sigma_scale
    with np.errstate(divide='ignore', invalid='ignore'):
        log_t = np.log(t)[None, :]
        degenerate = (log_t < mu).astype(float)
        standardized = (log_t - mu) / np.where(sigma > 0, sigma, 1.0)
    survival = np.where(sigma > 0, norm.sf(standardized), degenerate)
    return np.where(t[None, :] <= 0, 1.0, survival)


def conditional_survival_rows(setting, t, W):
    """Row-wise S0(t_i | w_i) for paired arrays t (m,) and W (m, p)."""
    t = np.asarray(t, dtype=float)
    mu = setting.location(W)
    sigma = setting.scale(W)
    with np.errstate(divide='ignore', invalid='ignore'):
        log_t = np.log(t)
        standardized = (log_t - mu) / np.where(sigma > 0, sigma, 1.0)
    survival = np.where(sigma > 0, norm.sf(standardized), (log_t < mu).astype(float))
    return np.where(t <= 0, 1.0, survival)


def censoring_survival(setting, t, W, rate_scale=1.0, mu_shift=0.0, sigma_scale=1.0):
    """G0(t | w) on a grid: shape (len(W), len(t))."""
    t = np.asarray(t, dtype=float)
    W = np.asarray(W, dtype=float)
    law = setting.censoring
    if law.kind == 'exponential':
        rate = setting.censoring_rate(W)[:, None] * rate_scale
        return np.exp(-rate * np.maximum(t, 0.0)[None, :])
    with np.errstate(divide='ignore'):
        standardized = (np.log(t)[None, :] - law.param(W)[:, None] - mu_shift) / (law.sd * sigma_scale)
    return np.where(t[None, :] <= 0, 1.0, norm.sf(standardized))


def censoring_survival_rows(setting, t, W):
    """Row-wise G0(t_i | w_i) for paired arrays t (m,) and W (m, p)."""
    t = np.asarray(t, dtype=float)
    law = setting.censoring
    if law.kind == 'exponential':
        return np.exp(-setting.censoring_rate(W) * np.maximum(t, 0.0))
    with np.errstate(divide='ignore'):
        standardized = (np.log(t) - law.param(W)) / law.sd
    return np.where(t <= 0, 1.0, norm.sf(standardized))


def true_conditional_survival(setting: SettingSpec, t: float, w) -> float:
    """Closed-form Pr(T > t | W = w)."""
    if t < 0:
        raise DomainError(f"t must be nonnegative, got {t}")
    W = np.asarray(w, dtype=float).reshape(1, setting.p)
    return float(conditional_survival(setting, np.array([t]), W)[0, 0])


def true_coverage(setting: SettingSpec, lpb, n_mc: int = DEFAULT_N_MC, rng=0) -> float:
    """Fraction of n_mc fresh (W, T) draws with T > lpb(W)."""
    if n_mc < MIN_N_MC:
        raise DomainError(f"n_mc must be at least {MIN_N_MC}, got {n_mc}")
    generator = _as_generator(rng)
    W = draw_covariates(setting, n_mc, generator)
    T = draw_event_times(setting, W, generator)
    bounds = np.broadcast_to(np.asarray(lpb(W), dtype=float), (n_mc,))
    return float(np.mean(T > bounds))


def event_rate(setting: SettingSpec, n: int, rng) -> float:
    return float(generate(setting, n, rng).delta.mean())


def oracle_model(setting: SettingSpec, role, grid, mu_shift=0.0, sigma_scale=1.0, rate_scale=1.0):
    """True (or deliberately perturbed) S0 / G0 materialized on ``grid``."""
    if role == 'event':
        def survival(t, W):
            return conditional_survival(setting, t, W, mu_shift, sigma_scale)
    elif role == 'censoring':
        def survival(t, W):
            return censoring_survival(setting, t, W, rate_scale, mu_shift, sigma_scale)
    else:
        raise ConfigurationError(f"unknown model role '{role}'")
    label = f"setting{setting.id}:{role}:shift={mu_shift}:sigma*{sigma_scale}:rate*{rate_scale}"
    return AnalyticModel(role, np.asarray(grid, dtype=float), setting.p, survival, label)


def quantile_grid(setting: SettingSpec, size=2000, upper=0.9999, rng=0):
    """A time grid dense where T and C have mass, for materializing oracle curves."""
    generator = _as_generator(rng)
    sample = generate(setting, 20_000, generator)
    pooled = np.concatenate([sample.t, sample.c])
    levels = np.linspace(0.0, upper, size + 1)[1:]
    return np.unique(np.quantile(pooled, levels))
