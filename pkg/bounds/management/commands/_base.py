from django.conf import settings
from django.core.management.base import BaseCommand

from bounds.serializers import MODEL_KINDS
from bounds.services import load_config

# config key -> (flag, type, help); every flag defaults to None so that unset
# flags leave the config file and built-in values in place.
CONFIG_FLAGS = {
    'alpha': ('--alpha', float, "target miscoverage level"),
    'beta': ('--beta', float, "confidence level of the Wald lower bound is 1 - beta"),
    'eta2': ('--eta2', float, "censoring-survival level of the LPB cap"),
    'grid_size': ('--grid', int, "number of tau values on [0, grid_max]"),
    'grid_max': ('--grid-max', float, "largest tau on the grid"),
    'c_prop': ('--c-prop', float, "fraction of records used for calibration"),
    's_kind': ('--s-kind', str, "event model kind"),
    'g_kind': ('--g-kind', str, "censoring model kind"),
    'bandwidth': ('--bandwidth', float, "Beran kernel bandwidth; unset uses the rule of thumb"),
    'seed': ('--seed', int, "base seed for every random stream"),
    'n_mc': ('--n-mc', int, "Monte-Carlo draws for the true-coverage oracle"),
    'jobs': ('--jobs', int, "worker processes (env TCSURV_JOBS)"),
    'exp_parameterization': ('--exp-parameterization', str, "exponential censoring parameter is a rate or a mean"),
    'censoring_access': ('--censoring-access', str, "fit G on observed (y, 1 - delta) or on latent c"),
    'rule': ('--rule', str, "tau selection rule"),
}

CHOICES = {
    's_kind': MODEL_KINDS,
    'g_kind': MODEL_KINDS,
    'exp_parameterization': ('rate', 'mean'),
    'censoring_access': ('observed', 'full'),
    'rule': ('apac', 'marginal'),
}


class TcsurvCommand(BaseCommand):
    """Shared flag handling: --config plus one flag per config key in ``config_keys``."""

    requires_system_checks = []
    config_keys = ()

    def add_arguments(self, parser):
        parser.add_argument('--config', help="JSON file overriding the built-in defaults; flags override the file")
        for key in self.config_keys:
            default = settings.TCSURV[key]
            if key == 'fallback_zero':
                parser.add_argument(
                    '--no-fallback', dest='fallback_zero', action='store_const', const=False, default=None,
                    help="fail with no_selection instead of falling back to L(w) = 0 (default: fall back)",
                )
                continue
            flag, kind, text = CONFIG_FLAGS[key]
            parser.add_argument(flag, dest=key, type=kind, default=None, choices=CHOICES.get(key),
                                help=f"{text} (default: {default})")
        self.add_command_arguments(parser)

    def add_command_arguments(self, parser):
        pass

    def load_config(self, options):
        overrides = {key: options.get(key) for key in self.config_keys}
        return load_config(overrides, options.get('config'))
