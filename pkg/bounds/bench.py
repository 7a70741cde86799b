"""Replication harness: test-set metrics, Wilson intervals and proportion studies."""
import dataclasses
import logging
import math
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy.stats import norm

from .calibrate import DEFAULT_ETA2, default_grid, finalize, select, sweep
from .datamodel import Dataset, holdout_bootstrap
from .exceptions import ConfigurationError, DomainError, SchemaError, TcsurvError
from .simgen import DEFAULT_N_MC, RngStream, generate, get_setting, true_coverage
from .survmodels import FitOptions, fit_model

logger = logging.getLogger(__name__)

ACCESS_MODES = ('observed', 'full')
_FROM_LPB = object()


@dataclass(frozen=True)
class RunMetrics:
    empirical_coverage: float
    average_lpb: float
    true_coverage: Optional[float]
    selected_tau: Optional[float]
    n_train: int
    n_cal: int
    n_test: int
    seed: int
    replicate: int = 0


def evaluate(lpb, test, setting=None, n_mc=DEFAULT_N_MC, rng=0, *, selected_tau=_FROM_LPB,
             n_train=0, n_cal=0, seed=0, replicate=0) -> RunMetrics:
    """Empirical coverage and mean bound on held-out truth, plus the MC oracle when a setting is known."""
    if not isinstance(test, Dataset):
        records = list(test)
        test = Dataset.from_full([r.w for r in records], [r.t for r in records], [r.c for r in records])
    if test.t is None:
        raise SchemaError("evaluation needs test records with latent event times t")
    bounds = np.asarray(lpb(test.w), dtype=float)
    oracle = None if setting is None else true_coverage(setting, lpb, n_mc, rng)
    if selected_tau is _FROM_LPB:
        selected_tau = getattr(lpb, 'tau', None)
    return RunMetrics(
        empirical_coverage=float(np.mean(test.t > bounds)),
        average_lpb=float(np.mean(bounds)),
        true_coverage=oracle,
        selected_tau=selected_tau,
        n_train=n_train,
        n_cal=n_cal,
        n_test=len(test),
        seed=seed,
        replicate=replicate,
    )


def wilson_interval(successes, trials, level=0.95):
    """Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise DomainError(f"trials must be at least 1, got {trials}")
    if not 0 <= successes <= trials:
        raise DomainError(f"successes must lie in [0, {trials}], got {successes}")
    if not 0 < level < 1:
        raise DomainError(f"level must lie in (0, 1), got {level}")

    z = norm.ppf(1 - (1 - level) / 2)
    p_hat = successes / trials
    denominator = 1 + z ** 2 / trials
    center = (p_hat + z ** 2 / (2 * trials)) / denominator
    margin = (z / denominator) * math.sqrt(p_hat * (1 - p_hat) / trials + z ** 2 / (4 * trials ** 2))

    lower = 0.0 if successes == 0 else max(0.0, center - margin)
    upper = 1.0 if successes == trials else min(1.0, center + margin)
    return lower, upper


@dataclass(frozen=True)
class ReplicateTask:
    """Everything a worker process needs to run one replicate.

    With ``dataset`` set the replicate resamples that data instead of
    drawing from a setting.
    """
    setting_id: Optional[int]
    n: int
    replicate: int
    base_seed: int
    rule: str = 'apac'
    alpha: float = 0.1
    beta: float = 0.05
    eta2: float = DEFAULT_ETA2
    grid_size: int = 100
    grid_max: float = 0.99
    s_kind: str = 'auto'
    g_kind: str = 'auto'
    bandwidth: Optional[float] = None
    n_mc: int = DEFAULT_N_MC
    exp_parameterization: str = 'rate'
    censoring_access: str = 'observed'
    fallback_zero: bool = True
    dataset: Optional[Dataset] = field(default=None, repr=False, compare=False)


def run_replicate(task: ReplicateTask) -> dict:
    """Fit on n records, calibrate on the next n, evaluate on the last n.

    Synthetic replicates draw 3n fresh records. Data replicates bootstrap n
    records within each third of the dataset and have no oracle.

    Returns a RunMetrics dict, or an error dict when the replicate fails.
    """
    stream = RngStream(task.base_seed, task.replicate)
    try:
        if task.dataset is None:
            setting = get_setting(task.setting_id, task.exp_parameterization)
            data = generate(setting, 3 * task.n, stream.generator(task.n, 0))
            train, cal, test = (data.subset(np.arange(k * task.n, (k + 1) * task.n)) for k in range(3))
        else:
            setting = None
            train, cal, test = holdout_bootstrap(task.dataset, task.n, stream.generator(task.n, 0))

        options = FitOptions(bandwidth=task.bandwidth)
        censor_train = train.with_censoring_observed() if task.censoring_access == 'full' else train
        s_model = fit_model(task.s_kind, train, 'event', options)
        g_model = fit_model(task.g_kind, censor_train, 'censoring', options)

        reports = sweep(s_model, g_model, cal, default_grid(task.grid_size, task.grid_max), task.beta, task.eta2)
        result = select(reports, task.rule, task.alpha, task.beta)
        lpb = finalize(result, s_model, g_model, task.eta2, task.fallback_zero)
        metrics = evaluate(
            lpb, test, setting, task.n_mc, stream.generator(task.n, 1),
            selected_tau=result.selected_tau, n_train=len(train), n_cal=len(cal),
            seed=task.base_seed, replicate=task.replicate,
        )
        return dataclasses.asdict(metrics)
    except (TcsurvError, np.linalg.LinAlgError) as e:
        code = getattr(e, 'code', 'linalg_error')
        return {'replicate': task.replicate, 'seed': task.base_seed, 'error': code, 'message': str(e)}


def _run_tasks(tasks, jobs):
    if jobs <= 1 or len(tasks) <= 1:
        results = [run_replicate(task) for task in tasks]
    else:
        results = []
        with ProcessPoolExecutor(max_workers=jobs) as executor:
            futures = {executor.submit(run_replicate, task): task.replicate for task in tasks}
            for future in as_completed(futures):
                results.append(future.result())
    return sorted(results, key=lambda r: r['replicate'])


@dataclass(frozen=True)
class ProportionRow:
    setting: Optional[int]
    n: int
    reps: int
    failures: int
    successes: int
    proportion: Optional[float]
    wilson_lo: Optional[float]
    wilson_hi: Optional[float]
    mean_true_coverage: Optional[float]
    mean_empirical_coverage: Optional[float]
    mean_average_lpb: Optional[float]
    basis: Optional[str] = None


@dataclass
class ReplicationOutcome:
    row: ProportionRow
    metrics: List[RunMetrics]
    failures: List[dict]


def _mean(values):
    return math.fsum(values) / len(values) if values else None


def summarize_replicates(setting_id, n, results, alpha, level=0.95) -> ReplicationOutcome:
    """Proportion of replicates covering at 1 - alpha, with a Wilson interval.

    Coverage is the oracle coverage when the replicates have one, and the
    test-set empirical coverage otherwise.
    """
    failures = [r for r in results if 'error' in r]
    metrics = [RunMetrics(**r) for r in results if 'error' not in r]
    oracle = [m.true_coverage for m in metrics if m.true_coverage is not None]
    if oracle:
        covered, basis = oracle, 'true'
    elif metrics:
        covered, basis = [m.empirical_coverage for m in metrics], 'empirical'
    else:
        covered, basis = [], None
    successes = sum(1 for c in covered if c >= 1 - alpha)
    if covered:
        proportion = successes / len(covered)
        lo, hi = wilson_interval(successes, len(covered), level)
    else:
        proportion = lo = hi = None
    row = ProportionRow(
        setting=setting_id,
        n=n,
        reps=len(results),
        failures=len(failures),
        successes=successes,
        proportion=proportion,
        wilson_lo=lo,
        wilson_hi=hi,
        mean_true_coverage=_mean(oracle),
        mean_empirical_coverage=_mean([m.empirical_coverage for m in metrics]),
        mean_average_lpb=_mean([m.average_lpb for m in metrics]),
        basis=basis,
    )
    return ReplicationOutcome(row, metrics, failures)


def run_replications(setting, n, reps, rule='apac', alpha=0.1, beta=0.05, base_seed=0, jobs=1,
                     dataset=None, **task_options) -> ReplicationOutcome:
    """Run ``reps`` independent replicates at per-part size ``n``.

    ``setting`` is a setting id or SettingSpec. Pass ``setting=None`` and a
    ``dataset`` carrying latent t to resample that data instead. Replicate r
    draws from stream r of ``base_seed`` so results do not depend on ``jobs``.
    """
    if (setting is None) == (dataset is None):
        raise ConfigurationError("give exactly one of a setting or a dataset")
    if reps < 1:
        raise DomainError(f"reps must be at least 1, got {reps}")
    if n < 2:
        raise DomainError(f"per-part size n must be at least 2, got {n}")
    if dataset is not None and dataset.t is None:
        raise SchemaError("a data study needs a latent event time column t to measure coverage")
    setting_id = getattr(setting, 'id', setting)
    if hasattr(setting, 'exp_parameterization'):
        task_options.setdefault('exp_parameterization', setting.exp_parameterization)
    tasks = [
        ReplicateTask(setting_id=setting_id, n=n, replicate=r, base_seed=base_seed,
                      rule=rule, alpha=alpha, beta=beta, dataset=dataset, **task_options)
        for r in range(reps)
    ]
    source = f"setting {setting_id}" if dataset is None else f"{dataset!r}"
    logger.info(f"Running {reps} replicate(s) of {source} at n={n} with {jobs} worker(s)")
    outcome = summarize_replicates(setting_id, n, _run_tasks(tasks, jobs), alpha)
    for failure in outcome.failures:
        logger.warning(f"Replicate {failure['replicate']} failed: {failure['error']}: {failure['message']}")
    return outcome


@dataclass
class ProportionStudy:
    setting: Optional[int]
    n_list: list
    reps: int
    rule: str
    alpha: float
    beta: float
    rows: List[ProportionRow] = field(default_factory=list)
    metrics: List[RunMetrics] = field(default_factory=list)
    failures: List[dict] = field(default_factory=list)


def run_study(setting, n_list, reps, rule='apac', alpha=0.1, beta=0.05, base_seed=0, jobs=1,
              dataset=None, **task_options) -> ProportionStudy:
    """run_replications for every n, collecting one proportion row per n."""
    study = ProportionStudy(getattr(setting, 'id', setting), list(n_list), reps, rule, alpha, beta)
    for n in n_list:
        outcome = run_replications(setting, n, reps, rule, alpha, beta, base_seed, jobs,
                                   dataset=dataset, **task_options)
        study.rows.append(outcome.row)
        study.metrics.extend(outcome.metrics)
        study.failures.extend({**f, 'n': n} for f in outcome.failures)
    return study
