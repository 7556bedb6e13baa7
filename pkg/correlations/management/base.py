"""
Shared flags and error handling for the report commands.

Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""

import structlog
from django.core.exceptions import ValidationError
from django.core.management.base import BaseCommand, CommandError
from django_extensions.management.utils import signalcommand

from correlations.exceptions import NumericalError
from correlations.forms import FORMATS, RunConfigForm, error_lines
from correlations.linalg import LogBase
from correlations.reports import run, write
from quantum_monogamy import settings

logger = structlog.get_logger(__name__)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERICAL = 3


class ReportCommand(BaseCommand):
    report_name = None
    requires_system_checks = []

    def add_arguments(self, parser):
        parser.add_argument(
            "--base",
            choices=[member.value for member in LogBase],
            help=f"Logarithm base (default {settings.DEFAULT_BASE})",
        )
        parser.add_argument("--n-max", type=int, help="Largest power scanned")
        parser.add_argument("--out", help="Write results here instead of stdout")
        parser.add_argument("--format", choices=FORMATS)
        parser.add_argument("--workers", type=int, help="Process pool size")

    @signalcommand
    def handle(self, *args, **options):
        form = RunConfigForm({**options, "command": self.report_name})
        if not form.is_valid():
            messages = error_lines(form)
            logger.warning("invalid_arguments", report=self.report_name, errors=messages)
            raise CommandError("\n".join(messages), returncode=EXIT_INVALID)
        config = form.save()

        try:
            write(run(config), config, self.stdout)
        except ValidationError as e:
            logger.warning("invalid_input", report=self.report_name, errors=e.messages)
            raise CommandError("\n".join(e.messages), returncode=EXIT_INVALID) from e
        except NumericalError as e:
            logger.error(
                "numerical_failure",
                report=self.report_name,
                error=str(e),
                **{key: repr(value) for key, value in e.diagnostics.items()},
            )
            raise CommandError(
                f"numerical failure: {e}", returncode=EXIT_NUMERICAL
            ) from e
