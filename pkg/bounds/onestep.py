"""Efficient influence function and the split one-step coverage estimator.

For an LPB L and nuisance curves S (event) and G (censoring),

    phi(o) = S(L(w)|w) * [1 - { 1{y <= L(w), delta = 1} / (S(y|w) G(y|w))
                                - sum_{t_j <= L(w) ^ y} dLambda_j / (S(t_j|w) G(t_j|w)) }]

where dLambda are the cumulative hazard jumps of S. The one-step estimate of
Pr(T > L(W)) is the calibration mean of phi.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import ndtri

from .datamodel import Dataset, ObservedRecord
from .exceptions import ConfigurationError, DomainError, NumericGuardError
from .simgen import (
    censoring_survival,
    censoring_survival_rows,
    conditional_survival,
    conditional_survival_rows,
    generate,
)
from .survmodels import PROB_FLOOR

logger = logging.getLogger(__name__)

CHUNK_ROWS = 4096


def z_value(beta):
    """(1 - beta)-quantile of the standard normal distribution."""
    if not 0 < beta < 1:
        raise ConfigurationError(f"beta must lie in (0, 1), got {beta}")
    return float(ndtri(1.0 - beta))


@dataclass(frozen=True)
class EifContext:
    s_model: object
    g_model: object
    lpb: object
    train_indices: Optional[frozenset] = None

    def __post_init__(self):
        if self.s_model.role != 'event':
            raise ConfigurationError(f"S model must have role 'event', got '{self.s_model.role}'")
        if self.g_model.role != 'censoring':
            raise ConfigurationError(f"G model must have role 'censoring', got '{self.g_model.role}'")

    def check_disjoint(self, cal_indices):
        if self.train_indices is None or cal_indices is None:
            return
        overlap = self.train_indices.intersection(int(i) for i in cal_indices)
        if overlap:
            raise DomainError(
                f"{len(overlap)} calibration record(s) were used to fit the nuisance models",
                overlap=sorted(overlap)[:10],
            )


@dataclass(frozen=True)
class CoverageReport:
    tau: float
    psi_hat: float
    plug_in: float
    sigma_hat: float
    clb: float
    n_cal: int


class EifTable:
    """Nuisance curves of a fixed record set, prepared once for many LPBs.

    Holds S and G at the records' covariates on the S grid, and the running
    sums of dLambda / (S G) so that phi for any L is a row lookup.
    """

    def __init__(self, s_model, g_model, records: Dataset):
        self.records = records
        s_curves = s_model.curves(records.w)
        g_curves = g_model.curves(records.w)
        self.s_curves = s_curves
        self.g_curves = g_curves
        self.times = s_curves.times
        self.rows = np.arange(len(records))

        g_on_grid = g_curves.on_grid(self.times)
        d_lambda = s_curves.hazard_increments()
        denominator = np.maximum(s_curves.probs * g_on_grid, PROB_FLOOR)
        self.running = np.cumsum(np.where(d_lambda > 0, d_lambda / denominator, 0.0), axis=1)

        self.s_at_y = s_curves.evaluate(records.y)
        self.g_at_y = g_curves.evaluate(records.y)

    def phi(self, bounds):
        """Return (phi, S(L(w)|w)) for per-record LPB values ``bounds``."""
        bounds = np.broadcast_to(np.asarray(bounds, dtype=float), (len(self.records),))
        y = self.records.y
        s_at_bound = self.s_curves.evaluate(bounds)

        hit = (y <= bounds) & (self.records.delta == 1)
        denominator = self.s_at_y * self.g_at_y
        unsafe = hit & (denominator < PROB_FLOOR) & (s_at_bound > 0)
        if np.any(unsafe):
            first = int(np.flatnonzero(unsafe)[0])
            raise NumericGuardError(
                f"S(y|w)G(y|w)={denominator[first]:.3g} below floor at an observed event; "
                "the censoring cap was bypassed",
                w=self.records.w[first].tolist(),
                u=float(y[first]),
            )
        indicator = np.where(hit, 1.0 / np.maximum(denominator, PROB_FLOOR), 0.0)

        upper = np.minimum(bounds, y)
        index = np.searchsorted(self.times, upper, side='right') - 1
        if len(self.times):
            integral = np.where(index >= 0, self.running[self.rows, np.maximum(index, 0)], 0.0)
        else:
            integral = np.zeros(len(y))
        return s_at_bound * (1.0 - (indicator - integral)), s_at_bound


def _chunks(dataset, size=CHUNK_ROWS):
    for start in range(0, len(dataset), size):
        yield dataset.subset(np.arange(start, min(start + size, len(dataset))))


def eif_values(s_model, g_model, records: Dataset, bounds):
    """phi and S(L|w) for every record, processed in bounded-memory chunks."""
    bounds = np.broadcast_to(np.asarray(bounds, dtype=float), (len(records),))
    phi_parts, plug_parts = [], []
    for offset, chunk in zip(range(0, len(records), CHUNK_ROWS), _chunks(records)):
        table = EifTable(s_model, g_model, chunk)
        phi_chunk, plug_chunk = table.phi(bounds[offset:offset + len(chunk)])
        phi_parts.append(phi_chunk)
        plug_parts.append(plug_chunk)
    return np.concatenate(phi_parts), np.concatenate(plug_parts)


def phi(ctx: EifContext, o: ObservedRecord) -> float:
    records = Dataset.from_records([o])
    bounds = ctx.lpb(records.w)
    values, _ = eif_values(ctx.s_model, ctx.g_model, records, bounds)
    return float(values[0])


def summarize(tau, phi_values, plug_values, beta) -> CoverageReport:
    """Mean of phi, plug-in mean and the Wald lower bound.

    The variance centers phi at the plug-in estimate. Sums are exactly
    rounded, so the report does not depend on record order.
    """
    n = len(phi_values)
    if n == 0:
        raise DomainError("calibration set is empty")
    psi_hat = math.fsum(phi_values) / n
    plug_in = math.fsum(plug_values) / n
    centered = np.asarray(phi_values) - plug_in
    sigma_hat = math.sqrt(math.fsum(centered * centered) / n)
    clb = psi_hat - z_value(beta) * sigma_hat / math.sqrt(n)
    return CoverageReport(tau=float(tau), psi_hat=psi_hat, plug_in=plug_in,
                          sigma_hat=sigma_hat, clb=clb, n_cal=n)


def one_step_correction(phi_values, plug_values):
    """Plug-in plus the calibration mean of D = phi - plug-in."""
    n = len(phi_values)
    plug_in = math.fsum(plug_values) / n
    return plug_in + math.fsum(np.asarray(phi_values) - plug_in) / n


def one_step(ctx: EifContext, cal, beta=0.05, cal_indices=None) -> CoverageReport:
    """Split one-step estimate of the coverage of ``ctx.lpb`` on calibration data."""
    if not isinstance(cal, Dataset):
        cal = Dataset.from_records(list(cal))
    ctx.check_disjoint(cal_indices)
    bounds = ctx.lpb(cal.w)
    phi_values, plug_values = eif_values(ctx.s_model, ctx.g_model, cal, bounds)
    return summarize(getattr(ctx.lpb, 'tau', float('nan')), phi_values, plug_values, beta)


@dataclass(frozen=True)
class RemainderCheck:
    lhs: float
    rhs: float
    lhs_se: float
    rhs_se: float

    @property
    def combined_se(self):
        return math.hypot(self.lhs_se, self.rhs_se)

    def __iter__(self):
        return iter((self.lhs, self.rhs))


def _remainder_terms(s_model, g_model, setting, chunk, bounds):
    W = chunk.w
    s_curves = s_model.curves(W)
    g_curves = g_model.curves(W)
    times = s_curves.times
    s_grid = np.maximum(s_curves.probs, PROB_FLOOR)
    g_grid = np.maximum(g_curves.on_grid(times), PROB_FLOOR)
    d_lambda = s_curves.hazard_increments()

    true_s = conditional_survival(setting, times, W)
    true_g = censoring_survival(setting, times, W)
    within = times[None, :] <= bounds[:, None]
    jump_part = np.sum(np.where(within & (d_lambda > 0),
                                true_s / s_grid * (true_g / g_grid - 1.0) * d_lambda, 0.0), axis=1)

    # Continuous part: E[1{T <= L} (G0/G - 1)(T) / S(T) | W] by the latent draws.
    t = chunk.t
    inside = t <= bounds
    ratio_g = censoring_survival_rows(setting, t, W) / np.maximum(g_curves.evaluate(t), PROB_FLOOR)
    hazard_part = np.where(inside, (ratio_g - 1.0) / np.maximum(s_curves.evaluate(t), PROB_FLOOR), 0.0)

    s_bound = s_curves.evaluate(bounds)
    rhs = s_bound * (jump_part - hazard_part)
    truth = conditional_survival_rows(setting, bounds, W)
    return rhs, truth


def remainder_identity(s_model, g_model, lpb, true_setting, n_mc=100_000, rng=0) -> RemainderCheck:
    """Monte-Carlo check of the exact remainder of the influence-function expansion.

    lhs = E0[phi(S, G; L)] - Psi(P0; L)
    rhs = E0[S(L|W) * int_(0, L] S0(u-)/S(u) (G0(u)/G(u) - 1) (Lambda - Lambda0)(du | W)]
    """
    sample = generate(true_setting, n_mc, rng)
    bounds = np.asarray(lpb(sample.w), dtype=float)
    phi_values, _ = eif_values(s_model, g_model, sample, bounds)

    rhs_parts, truth_parts = [], []
    for offset, chunk in zip(range(0, len(sample), CHUNK_ROWS), _chunks(sample)):
        rhs, truth = _remainder_terms(s_model, g_model, true_setting, chunk,
                                      bounds[offset:offset + len(chunk)])
        rhs_parts.append(rhs)
        truth_parts.append(truth)
    rhs_values = np.concatenate(rhs_parts)
    lhs_values = phi_values - np.concatenate(truth_parts)

    n = len(sample)
    check = RemainderCheck(
        lhs=math.fsum(lhs_values) / n,
        rhs=math.fsum(rhs_values) / n,
        lhs_se=float(np.std(lhs_values, ddof=1) / math.sqrt(n)),
        rhs_se=float(np.std(rhs_values, ddof=1) / math.sqrt(n)),
    )
    logger.info(f"Remainder check: lhs={check.lhs:.5f} rhs={check.rhs:.5f} se={check.combined_se:.5f}")
    return check
