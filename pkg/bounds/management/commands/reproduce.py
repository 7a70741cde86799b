import json
import logging
from pathlib import Path

from bounds.bench import run_study
from bounds.datamodel import read_csv, write_csv
from bounds.exceptions import OutputError
from bounds.serializers import ProportionRowSerializer, ReplicateFailureSerializer, RunMetricsSerializer
from bounds.services import provenance, write_rows
from bounds.simgen import get_setting

from ._base import TcsurvCommand

logger = logging.getLogger(__name__)

PLOT_COLUMNS = ['n', 'proportion', 'wilson_lo', 'wilson_hi']


class Command(TcsurvCommand):
    help = ("Replication study on a synthetic setting or a CSV with latent t: per-replicate metrics, "
            "per-n proportions with Wilson bounds, plot data")
    config_keys = ('rule', 'alpha', 'beta', 'seed', 'jobs', 'grid_size', 'grid_max', 'eta2',
                   's_kind', 'g_kind', 'bandwidth', 'n_mc', 'exp_parameterization',
                   'censoring_access', 'fallback_zero')

    def add_command_arguments(self, parser):
        source = parser.add_mutually_exclusive_group(required=True)
        source.add_argument('--setting', type=int, help="setting id 1..6")
        source.add_argument('--in', dest='input',
                            help="CSV with w1..wp, y, delta and latent t; replicates bootstrap within thirds of it")
        parser.add_argument('--n', type=int, nargs='+', required=True,
                            help="per-part size(s); each replicate uses 3n records")
        parser.add_argument('--reps', type=int, default=100, help="replicates per n (default: 100)")
        parser.add_argument('--out', required=True, help="output directory")

    def handle(self, *args, **options):
        config = self.load_config(options)
        setting = dataset = None
        if options['input'] is not None:
            dataset = read_csv(options['input'])
        else:
            setting = get_setting(options['setting'], config['exp_parameterization'])
        out = Path(options['out'])
        try:
            out.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise OutputError(f"cannot create output directory {out}: {e}", path=out) from e

        study = run_study(
            setting, options['n'], options['reps'], config['rule'], config['alpha'], config['beta'],
            base_seed=config['seed'], jobs=config['jobs'],
            eta2=config['eta2'], grid_size=config['grid_size'], grid_max=config['grid_max'],
            s_kind=config['s_kind'], g_kind=config['g_kind'], bandwidth=config['bandwidth'],
            n_mc=config['n_mc'], censoring_access=config['censoring_access'],
            fallback_zero=config['fallback_zero'], dataset=dataset,
        )

        write_rows(study.metrics, RunMetricsSerializer, out / 'replicates.csv')
        write_rows(study.rows, ProportionRowSerializer, out / 'study.csv')
        plot_rows = [{key: getattr(row, key) for key in PLOT_COLUMNS} for row in study.rows]
        write_csv(plot_rows, out / 'plot_data.csv', columns=PLOT_COLUMNS)
        write_rows(study.failures, ReplicateFailureSerializer, out / 'failures.csv')

        run_info = provenance('reproduce', config, setting=options['setting'], input=options['input'],
                              n=list(options['n']), reps=options['reps'])
        try:
            (out / 'provenance.json').write_text(json.dumps(run_info, sort_keys=True, indent=2) + '\n', encoding='utf-8')
        except OSError as e:
            raise OutputError(f"cannot write provenance: {e}", path=out / 'provenance.json') from e
        for row in study.rows:
            logger.info(f"n={row.n}: proportion={row.proportion} wilson=({row.wilson_lo}, {row.wilson_hi}) "
                        f"failures={row.failures}")
