import logging

from bounds.bench import evaluate
from bounds.datamodel import ColumnSpec, read_csv
from bounds.exceptions import SchemaError
from bounds.serializers import RunMetricsSerializer
from bounds.services import load_bundle, write_rows
from bounds.simgen import RngStream, get_setting

from ._base import TcsurvCommand

logger = logging.getLogger(__name__)

ORACLE_STREAM = 1


class Command(TcsurvCommand):
    help = "Empirical coverage and average bound of a bundled LPB on test records with known t"
    config_keys = ('seed', 'n_mc', 'exp_parameterization')

    def add_command_arguments(self, parser):
        parser.add_argument('--bundle', required=True, help="model+LPB bundle written by calibrate")
        parser.add_argument('--in', dest='input', required=True, help="test CSV with w1..wp and latent t")
        parser.add_argument('--setting', type=int, default=None,
                            help="setting id for the Monte-Carlo true-coverage oracle (default: none)")
        parser.add_argument('--out', default='-', help="output CSV, '-' for stdout (default: -)")

    def handle(self, *args, **options):
        config = self.load_config(options)
        bundle = load_bundle(options['bundle'])
        if bundle.lpb is None:
            raise SchemaError(f"bundle {options['bundle']} has no calibrated LPB; run calibrate first")
        test = read_csv(options['input'], ColumnSpec(require_outcome=False))
        setting = None
        if options['setting'] is not None:
            setting = get_setting(options['setting'], config['exp_parameterization'])

        calibration = bundle.document.get('calibration') or {}
        metrics = evaluate(
            bundle.lpb, test, setting, config['n_mc'], RngStream(config['seed'], ORACLE_STREAM),
            selected_tau=calibration.get('selected_tau'), seed=config['seed'],
        )
        write_rows([metrics], RunMetricsSerializer, options['out'])
        logger.info(f"Empirical coverage {metrics.empirical_coverage:.4f} on {metrics.n_test} record(s)")
