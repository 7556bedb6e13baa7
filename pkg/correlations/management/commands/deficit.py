from correlations.management.base import ReportCommand


class Command(ReportCommand):
    help = "Deficits, monogamy gap, minimal power and residual tangle of one state"
    report_name = "deficit"

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument(
            "--state",
            required=True,
            help='JSON record or file: {"name": ...}, {"theta": ...} or {"amplitudes": ...}',
        )
