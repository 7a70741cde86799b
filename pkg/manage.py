#!/usr/bin/env python
"""Command-line entry point for the tcsurv coverage service."""
import os
import sys


def main():
    """Run a tcsurv subcommand or a Django administrative task."""
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'tcsurv_service.settings')
    try:
        from django.core.management import execute_from_command_line
    except ImportError as exc:
        raise ImportError(
            "Couldn't import Django. Are you sure it's installed and "
            "available on your PYTHONPATH environment variable? Did you "
            "forget to activate a virtual environment?"
        ) from exc

    from bounds.cli import SUBCOMMANDS, dispatch

    if len(sys.argv) > 1 and sys.argv[1] in SUBCOMMANDS:
        sys.exit(dispatch(sys.argv[1:]))
    execute_from_command_line(sys.argv)


if __name__ == '__main__':
    main()
