from correlations.management.base import ReportCommand


class Command(ReportCommand):
    help = "Mutual-information inequality checks over random or given pmfs"
    report_name = "classical_scan"

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--samples", type=int)
        parser.add_argument("--dims", help="Alphabet sizes, e.g. 2,3,2")
        parser.add_argument("--seed", type=int)
        parser.add_argument(
            "--pmf", help="coin, independent, xor, or a JSON nested list or file"
        )
