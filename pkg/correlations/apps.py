from django.apps import AppConfig


class CorrelationsConfig(AppConfig):
    name = "correlations"
    verbose_name = "Quantum deficit and classical correlations"
