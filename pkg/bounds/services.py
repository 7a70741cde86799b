"""Orchestration shared by the tcsurv subcommands."""
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from django.conf import settings

from . import __version__
from .calibrate import LpbFunction, make_lpb
from .datamodel import write_csv
from .exceptions import ConfigurationError, OutputError, SchemaError
from .serializers import BundleSerializer, CliConfigSerializer
from .survmodels import FitOptions, fit_model, model_from_dict

logger = logging.getLogger(__name__)


def load_config(overrides=None, config_path=None) -> dict:
    """Built-in defaults, then the JSON config file, then explicit flags."""
    config = dict(settings.TCSURV)
    if config_path:
        path = Path(config_path)
        if not path.exists():
            raise ConfigurationError(f"config file not found: {path}", path=str(path))
        try:
            file_values = json.loads(path.read_text(encoding='utf-8'))
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigurationError(f"cannot read config file {path}: {e}", path=str(path)) from e
        if not isinstance(file_values, dict):
            raise ConfigurationError(f"config file {path} must hold a JSON object")
        unknown = sorted(set(file_values) - set(config))
        if unknown:
            raise ConfigurationError(f"unknown config key(s): {', '.join(unknown)}", keys=unknown)
        config.update(file_values)
    for key, value in (overrides or {}).items():
        if value is not None and key in config:
            config[key] = value

    serializer = CliConfigSerializer(data=config)
    if not serializer.is_valid():
        raise ConfigurationError("invalid configuration", errors=serializer.errors)
    return dict(serializer.validated_data)


def fit_nuisances(train, config):
    """Fit the event model S and the censoring model G on training records only."""
    options = FitOptions(bandwidth=config.get('bandwidth'))
    censor_train = train
    if config.get('censoring_access') == 'full':
        if train.c is None:
            raise ConfigurationError("censoring_access 'full' needs a latent censoring column c")
        censor_train = train.with_censoring_observed()
    s_model = fit_model(config['s_kind'], train, 'event', options)
    g_model = fit_model(config['g_kind'], censor_train, 'censoring', options)
    return s_model, g_model


def provenance(command, config, **extra):
    return {'version': __version__, 'seed': config['seed'], 'command': command, 'config': config, **extra}


def save_bundle(path, s_model, g_model, run_info, lpb: Optional[LpbFunction] = None, calibration=None):
    document = {
        'provenance': run_info,
        's_model': s_model.to_dict(),
        'g_model': g_model.to_dict(),
        'lpb': lpb.to_dict() if lpb is not None else None,
        'calibration': calibration,
    }
    text = json.dumps(document, sort_keys=True, indent=2) + '\n'
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding='utf-8')
    except OSError as e:
        raise OutputError(f"cannot write bundle {path}: {e}", path=path) from e
    logger.info(f"Saved bundle to {path}")


@dataclass
class Bundle:
    s_model: object
    g_model: object
    lpb: Optional[LpbFunction]
    document: dict


def load_bundle(path) -> Bundle:
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"bundle not found: {path}", path=str(path))
    try:
        document = json.loads(path.read_text(encoding='utf-8'))
    except (OSError, json.JSONDecodeError) as e:
        raise SchemaError(f"cannot read bundle {path}: {e}") from e

    serializer = BundleSerializer(data=document)
    if not serializer.is_valid():
        raise SchemaError(f"invalid bundle {path}", errors=serializer.errors)
    data = serializer.validated_data
    s_model = model_from_dict(data['s_model'])
    g_model = model_from_dict(data['g_model'])
    lpb = None
    if data.get('lpb'):
        lpb = make_lpb(s_model, g_model, data['lpb']['tau'], data['lpb']['eta2'])
    return Bundle(s_model, g_model, lpb, document)


def write_rows(rows, serializer_class, path):
    """Emit rows through ``serializer_class`` as CSV; columns follow the serializer fields."""
    columns = list(serializer_class().fields)
    data = serializer_class(rows, many=True).data
    write_csv([dict(row) for row in data], path, columns=columns)
