import os
from pathlib import Path
from dotenv import load_dotenv

load_dotenv()

BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = os.environ.get('SECRET_KEY', 'tcsurv-local-only')

DEBUG = os.environ.get('DEBUG', 'False').lower() == 'true'

INSTALLED_APPS = [
    # Third party apps
    'rest_framework',

    # Local apps
    'bounds',
]

# No persistence layer: datasets, bundles and results are plain files.
DATABASES = {}

# Internationalization
LANGUAGE_CODE = 'en-us'
TIME_ZONE = 'UTC'
USE_I18N = False
USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

REST_FRAMEWORK = {
    'DEFAULT_RENDERER_CLASSES': [
        'rest_framework.renderers.JSONRenderer',
    ],
    'UNAUTHENTICATED_USER': None,
}


def get_worker_count():
    """Extract worker count from TCSURV_JOBS environment variable"""
    jobs_value = os.environ.get('TCSURV_JOBS', '1')
    try:
        return max(1, int(jobs_value))
    except ValueError:
        return 1  # Default fallback


def get_base_seed():
    """Extract the base seed from TCSURV_SEED environment variable"""
    try:
        return int(os.environ.get('TCSURV_SEED', '0'))
    except ValueError:
        return 0


# Built-in defaults for every subcommand. A JSON config file passed with
# --config overrides these, and command-line flags override the file.
TCSURV = {
    'alpha': 0.1,
    'beta': 0.05,
    'eta2': 1e-3,
    'grid_size': 100,
    'grid_max': 0.99,
    'c_prop': 0.5,
    's_kind': 'auto',
    'g_kind': 'auto',
    'bandwidth': None,
    'seed': get_base_seed(),
    'n_mc': 100_000,
    'jobs': get_worker_count(),
    'exp_parameterization': 'rate',
    'censoring_access': 'observed',
    'fallback_zero': True,
    'rule': 'apac',
}

LOG_LEVEL = os.environ.get('TCSURV_LOG_LEVEL', 'INFO').upper()

# Logging configuration - JSON lines on stderr, stdout is reserved for data
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'json': {
            '()': 'pythonjsonlogger.jsonlogger.JsonFormatter',
            'format': '%(levelname)s %(asctime)s %(name)s %(message)s',
        },
    },
    'handlers': {
        'console': {
            'level': 'DEBUG',
            'class': 'logging.StreamHandler',
            'stream': 'ext://sys.stderr',
            'formatter': 'json',
        },
    },
    'root': {
        'handlers': ['console'],
        'level': 'WARNING',
    },
    'loggers': {
        'django': {
            'handlers': ['console'],
            'level': 'WARNING',
            'propagate': False,
        },
        'bounds': {
            'handlers': ['console'],
            'level': LOG_LEVEL,
            'propagate': False,
        },
    },
}
