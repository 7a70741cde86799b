import logging

from bounds.datamodel import write_csv
from bounds.simgen import RngStream, administrative_censor, generate, get_setting

from ._base import TcsurvCommand

logger = logging.getLogger(__name__)

SIMULATE_STREAM = 0


class Command(TcsurvCommand):
    help = "Draw n synthetic records (w1..wp, t, c, y, delta) from one of the six settings"
    config_keys = ('seed', 'exp_parameterization')

    def add_command_arguments(self, parser):
        parser.add_argument('--setting', type=int, required=True, help="setting id 1..6")
        parser.add_argument('--n', type=int, required=True, help="number of records")
        parser.add_argument('--out', required=True, help="output CSV path, '-' for stdout")
        parser.add_argument('--horizon', type=float, default=None,
                            help="administratively censor every record at this time (default: none)")

    def handle(self, *args, **options):
        config = self.load_config(options)
        setting = get_setting(options['setting'], config['exp_parameterization'])
        dataset = generate(setting, options['n'], RngStream(config['seed'], SIMULATE_STREAM))
        if options['horizon'] is not None:
            dataset = administrative_censor(dataset, options['horizon'])
        write_csv(dataset, options['out'])
        logger.info(f"Simulated {dataset!r} from setting {setting.id} with seed {config['seed']}")
