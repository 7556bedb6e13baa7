#!/usr/bin/env python
"""Command-line utility for quantum deficit and monogamy reports."""

import os
import sys


def main():
    """Run a report command, e.g. ``python manage.py table1``."""
    os.environ.setdefault("DJANGO_SETTINGS_MODULE", "quantum_monogamy.settings")
    try:
        from django.core.management import execute_from_command_line
    except ImportError as exc:
        raise ImportError(
            "Couldn't import Django. Are you sure it's installed and "
            "available on your PYTHONPATH environment variable? Did you "
            "forget to run `uv sync`?"
        ) from exc
    execute_from_command_line(sys.argv)


if __name__ == "__main__":
    main()
