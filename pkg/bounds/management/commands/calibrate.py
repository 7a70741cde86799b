import logging

from bounds.calibrate import default_grid, finalize, select, sweep
from bounds.datamodel import read_csv, split
from bounds.exceptions import ConfigurationError
from bounds.serializers import CoverageReportSerializer
from bounds.services import fit_nuisances, load_bundle, provenance, save_bundle, write_rows

from ._base import TcsurvCommand

logger = logging.getLogger(__name__)


class Command(TcsurvCommand):
    help = "Sweep the tau grid on the calibration split, select tau and write the model+LPB bundle"
    config_keys = ('rule', 'alpha', 'beta', 'grid_size', 'grid_max', 'eta2', 'c_prop', 'seed',
                   's_kind', 'g_kind', 'bandwidth', 'censoring_access', 'fallback_zero')

    def add_command_arguments(self, parser):
        parser.add_argument('--in', dest='input', required=True, help="input CSV with w1..wp, y, delta")
        parser.add_argument('--out', required=True, help="output model+LPB bundle (JSON)")
        parser.add_argument('--reports', default='-',
                            help="CSV of one coverage report per tau, '-' for stdout (default: -)")
        parser.add_argument('--bundle', default=None,
                            help="reuse the models of a fit bundle; its split seed and c_prop are used")

    def handle(self, *args, **options):
        config = self.load_config(options)
        dataset = read_csv(options['input'])

        if options['bundle']:
            bundle = load_bundle(options['bundle'])
            fitted = bundle.document['provenance']
            if fitted.get('n_records') not in (None, len(dataset)):
                raise ConfigurationError(
                    f"bundle was fitted on {fitted['n_records']} records, input has {len(dataset)}"
                )
            config['c_prop'] = fitted['config']['c_prop']
            config['seed'] = fitted['config']['seed']
            indices = split(dataset, config['c_prop'], config['seed'])
            s_model, g_model = bundle.s_model, bundle.g_model
        else:
            indices = split(dataset, config['c_prop'], config['seed'])
            s_model, g_model = fit_nuisances(dataset.subset(indices.train), config)

        cal = dataset.subset(indices.cal)
        grid = default_grid(config['grid_size'], config['grid_max'])
        reports = sweep(s_model, g_model, cal, grid, config['beta'], config['eta2'])
        result = select(reports, config['rule'], config['alpha'], config['beta'])
        lpb = finalize(result, s_model, g_model, config['eta2'], config['fallback_zero'])

        write_rows(result.reports, CoverageReportSerializer, options['reports'])
        calibration = {
            'rule': result.rule,
            'alpha': result.alpha,
            'beta': result.beta,
            'selected_tau': result.selected_tau,
            'fallback': result.selected_tau is None,
        }
        save_bundle(options['out'], s_model, g_model,
                    provenance('calibrate', config, n_records=len(dataset)), lpb, calibration)
        logger.info(f"Calibrated on {indices.n} record(s): rule={result.rule} tau={result.selected_tau}")
