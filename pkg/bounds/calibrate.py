"""Capped-quantile lower prediction bounds and selection of the tuning level tau."""
import dataclasses
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .datamodel import Dataset
from .exceptions import ConfigurationError, DomainError, NoSelectionError
from .onestep import CHUNK_ROWS, CoverageReport, EifTable, summarize, z_value

logger = logging.getLogger(__name__)

RULES = ('apac', 'marginal')
DEFAULT_ETA2 = 1e-3


def _check_levels(tau, eta2):
    if not 0 <= tau < 1:
        raise DomainError(f"tau must lie in [0, 1), got {tau}")
    if not 0 < eta2 < 1:
        raise DomainError(f"eta2 must lie in (0, 1), got {eta2}")


def capped_quantiles(s_curves, g_curves, taus, eta2):
    """LPB values for every tau at once: shape (len(taus), m).

    L_tau(w) = min(S^-1(1 - tau | w), G^-1(eta2 | w)); the cap does not depend on tau.
    """
    cap, saturated = g_curves.quantiles(eta2)
    if np.any(saturated):
        logger.debug(f"Censoring curve never reaches eta2={eta2} for {int(saturated.sum())} row(s); capped at grid end")
    bounds = np.empty((len(taus), len(s_curves)))
    for k, tau in enumerate(taus):
        quantiles, _ = s_curves.quantiles(1.0 - tau)
        bounds[k] = np.minimum(quantiles, cap)
    return bounds


@dataclass(frozen=True)
class LpbFunction:
    """w -> min(S^-1(1 - tau | w), G^-1(eta2 | w))."""
    tau: float
    eta2: float
    s_model: object = field(repr=False)
    g_model: object = field(repr=False)

    def __post_init__(self):
        _check_levels(self.tau, self.eta2)

    def __call__(self, W):
        W = np.asarray(W, dtype=float)
        if W.ndim == 1:
            W = W.reshape(1, -1) if W.size == self.s_model.p else W.reshape(-1, 1)
        parts = []
        for start in range(0, len(W), CHUNK_ROWS):
            block = W[start:start + CHUNK_ROWS]
            parts.append(capped_quantiles(self.s_model.curves(block), self.g_model.curves(block),
                                          [self.tau], self.eta2)[0])
        return np.concatenate(parts) if parts else np.empty(0)

    def to_dict(self):
        return {'tau': self.tau, 'eta2': self.eta2}


def make_lpb(s_model, g_model, tau, eta2=DEFAULT_ETA2) -> LpbFunction:
    if s_model.role != 'event' or g_model.role != 'censoring':
        raise ConfigurationError("make_lpb needs an event-role S model and a censoring-role G model")
    return LpbFunction(float(tau), float(eta2), s_model, g_model)


@dataclass(frozen=True)
class TauGrid:
    values: tuple

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        if not values:
            raise ConfigurationError("tau grid must not be empty")
        if any(not 0 <= v < 1 for v in values):
            raise ConfigurationError("tau grid values must lie in [0, 1)")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ConfigurationError("tau grid values must be strictly increasing")
        object.__setattr__(self, 'values', values)

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)


def default_grid(size=100, upper=0.99) -> TauGrid:
    """``size`` uniformly spaced levels on [0, upper]."""
    if size < 1:
        raise ConfigurationError(f"grid size must be at least 1, got {size}")
    if not 0 <= upper < 1:
        raise ConfigurationError(f"grid upper end must lie in [0, 1), got {upper}")
    if size == 1:
        return TauGrid((0.0,))
    return TauGrid(tuple(np.linspace(0.0, upper, size)))


def sweep(s_model, g_model, cal: Dataset, grid: TauGrid, beta=0.05, eta2=DEFAULT_ETA2) -> List[CoverageReport]:
    """One CoverageReport per grid tau, in grid order, from one set of fitted nuisances."""
    _check_levels(0.0, eta2)
    taus = list(grid)
    phi_rows = np.empty((len(taus), len(cal)))
    plug_rows = np.empty((len(taus), len(cal)))
    for start in range(0, len(cal), CHUNK_ROWS):
        stop = min(start + CHUNK_ROWS, len(cal))
        table = EifTable(s_model, g_model, cal.subset(np.arange(start, stop)))
        bounds = capped_quantiles(table.s_curves, table.g_curves, taus, eta2)
        for k in range(len(taus)):
            phi_rows[k, start:stop], plug_rows[k, start:stop] = table.phi(bounds[k])
    reports = [summarize(tau, phi_rows[k], plug_rows[k], beta) for k, tau in enumerate(taus)]
    logger.info(f"Swept {len(taus)} tau value(s) over {len(cal)} calibration record(s)")
    return reports


@dataclass(frozen=True)
class CalibrationResult:
    selected_tau: Optional[float]
    reports: tuple
    rule: str
    alpha: float
    beta: Optional[float]


def _check_alpha(alpha):
    if not 0 < alpha < 1:
        raise ConfigurationError(f"alpha must lie in (0, 1), got {alpha}")


def _prefix_max(reports, passes):
    selected = None
    for report, ok in zip(reports, passes):
        if not ok:
            break
        selected = report.tau
    return selected


def select_apac(reports, alpha, beta) -> CalibrationResult:
    """Largest tau whose Wald lower bound, and that of every smaller grid tau, is at least 1 - alpha."""
    _check_alpha(alpha)
    z = z_value(beta)
    ordered = [
        dataclasses.replace(r, clb=r.psi_hat - z * r.sigma_hat / math.sqrt(r.n_cal))
        for r in sorted(reports, key=lambda r: r.tau)
    ]
    selected = _prefix_max(ordered, [r.clb >= 1 - alpha for r in ordered])
    logger.info(f"APAC rule (alpha={alpha}, beta={beta}) selected tau={selected}")
    return CalibrationResult(selected, tuple(ordered), 'apac', alpha, beta)


def select_marginal(reports, alpha) -> CalibrationResult:
    """Largest tau whose one-step estimate, and that of every smaller grid tau, is at least 1 - alpha."""
    _check_alpha(alpha)
    ordered = sorted(reports, key=lambda r: r.tau)
    selected = _prefix_max(ordered, [r.psi_hat >= 1 - alpha for r in ordered])
    logger.info(f"Marginal rule (alpha={alpha}) selected tau={selected}")
    return CalibrationResult(selected, tuple(ordered), 'marginal', alpha, None)


def select(reports, rule, alpha, beta) -> CalibrationResult:
    if rule == 'apac':
        return select_apac(reports, alpha, beta)
    if rule == 'marginal':
        return select_marginal(reports, alpha)
    raise ConfigurationError(f"unknown selection rule '{rule}'; expected one of {', '.join(RULES)}")


def finalize(result: CalibrationResult, s_model, g_model, eta2=DEFAULT_ETA2, fallback_zero=True) -> LpbFunction:
    if result.selected_tau is not None:
        return make_lpb(s_model, g_model, result.selected_tau, eta2)
    if not fallback_zero:
        raise NoSelectionError(
            f"no grid tau satisfies the {result.rule} rule at alpha={result.alpha}",
            rule=result.rule,
            alpha=result.alpha,
        )
    logger.warning(
        f"No grid tau satisfies the {result.rule} rule at alpha={result.alpha}; "
        "falling back to the trivial bound L(w) = 0"
    )
    return make_lpb(s_model, g_model, 0.0, eta2)
