import logging

import pandas as pd

from bounds.datamodel import ColumnSpec, read_csv, write_csv
from bounds.exceptions import SchemaError
from bounds.services import load_bundle

from ._base import TcsurvCommand

logger = logging.getLogger(__name__)


class Command(TcsurvCommand):
    help = "Evaluate the bundled LPB at every covariate row of a CSV"

    def add_command_arguments(self, parser):
        parser.add_argument('--bundle', required=True, help="model+LPB bundle written by calibrate")
        parser.add_argument('--in', dest='input', required=True, help="CSV with covariate columns w1..wp")
        parser.add_argument('--out', default='-', help="output CSV, '-' for stdout (default: -)")

    def handle(self, *args, **options):
        bundle = load_bundle(options['bundle'])
        if bundle.lpb is None:
            raise SchemaError(f"bundle {options['bundle']} has no calibrated LPB; run calibrate first")
        dataset = read_csv(options['input'], ColumnSpec(require_outcome=False))
        if dataset.p != bundle.s_model.p:
            raise SchemaError(f"input has {dataset.p} covariate(s), bundle expects {bundle.s_model.p}")

        frame = pd.DataFrame({f"w{k + 1}": dataset.w[:, k] for k in range(dataset.p)})
        frame['lpb'] = bundle.lpb(dataset.w)
        write_csv(frame, options['out'])
        logger.info(f"Predicted {len(frame)} lower bound(s) at tau={bundle.lpb.tau}")
