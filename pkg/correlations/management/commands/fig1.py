from correlations.management.base import ReportCommand


class Command(ReportCommand):
    help = "Sweep of cos(theta/2)|000> + sin(theta/2)|W> with its minimal power"
    report_name = "fig1"

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--theta-start", type=float)
        parser.add_argument("--theta-stop", type=float)
        parser.add_argument("--theta-step", type=float)
        parser.add_argument("--powers", help="Comma-separated powers, e.g. 1,2,3")
