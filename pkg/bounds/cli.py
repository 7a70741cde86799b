"""Entry point routing tcsurv subcommands to the bounds management commands."""
import json
import logging
import os
import sys

SUBCOMMANDS = ('simulate', 'fit', 'calibrate', 'predict', 'evaluate', 'reproduce')

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2

logger = logging.getLogger(__name__)


def _error_line(code, message, stream=None):
    stream = stream or sys.stderr
    stream.write(json.dumps({'error': code, 'message': message}) + '\n')
    stream.flush()


def dispatch(argv) -> int:
    """Run one subcommand; returns the process exit status."""
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'tcsurv_service.settings')
    import django
    from django.core.management import load_command_class
    from django.core.management.base import CommandError

    from .exceptions import TcsurvError

    argv = list(argv)
    if not argv or argv[0] not in SUBCOMMANDS:
        name = argv[0] if argv else ''
        _error_line('usage_error', f"unknown subcommand '{name}'; expected one of {', '.join(SUBCOMMANDS)}")
        return EXIT_USAGE

    django.setup()
    name = argv[0]
    command = load_command_class('bounds', name)
    parser = command.create_parser('tcsurv', name)
    try:
        options = parser.parse_args(argv[1:])
    except CommandError as e:
        parser.print_usage(sys.stderr)
        _error_line('usage_error', str(e))
        return EXIT_USAGE
    except SystemExit as e:
        # --help exits 0 after printing
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    cmd_options = vars(options)
    args = cmd_options.pop('args', ())
    try:
        command.execute(*args, **cmd_options)
    except TcsurvError as e:
        logger.error(f"{name} failed: {e.message}", extra={'error': e.code})
        _error_line(e.code, e.message)
        return e.exit_status
    except CommandError as e:
        _error_line('usage_error', str(e))
        return EXIT_USAGE
    return EXIT_OK
