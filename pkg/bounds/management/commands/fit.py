import logging

from bounds.datamodel import read_csv, split
from bounds.services import fit_nuisances, provenance, save_bundle

from ._base import TcsurvCommand

logger = logging.getLogger(__name__)


class Command(TcsurvCommand):
    help = "Split a dataset and fit the event (S) and censoring (G) models on the training part"
    config_keys = ('c_prop', 'seed', 's_kind', 'g_kind', 'bandwidth', 'censoring_access')

    def add_command_arguments(self, parser):
        parser.add_argument('--in', dest='input', required=True, help="input CSV with w1..wp, y, delta")
        parser.add_argument('--out', required=True, help="output model bundle (JSON)")

    def handle(self, *args, **options):
        config = self.load_config(options)
        dataset = read_csv(options['input'])
        indices = split(dataset, config['c_prop'], config['seed'])
        s_model, g_model = fit_nuisances(dataset.subset(indices.train), config)

        save_bundle(options['out'], s_model, g_model, provenance('fit', config, n_records=len(dataset)))
        logger.info(f"Fitted {s_model!r} and {g_model!r} on {indices.m} training record(s)")
