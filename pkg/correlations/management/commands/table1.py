from correlations.management.base import ReportCommand


class Command(ReportCommand):
    help = "Power scans of the W and WWBAR states, n = 1..5"
    report_name = "table1"
