from pathlib import Path

from django.conf import settings as django_settings

from quantum_monogamy import settings


def test_project_runs_without_a_database():
    assert django_settings.DATABASES == {}
    assert "correlations" in django_settings.INSTALLED_APPS
    assert django_settings.DJANGO_STRUCTLOG_COMMAND_LOGGING_ENABLED


def test_log_files_follow_log_dir():
    assert not hasattr(settings, "BASE_DIR")
    for name in ("json_file", "flat_line_file"):
        filename = Path(settings.LOGGING["handlers"][name]["filename"])
        assert filename.parent == settings.logs_dir
    assert settings.logs_dir.is_dir()
