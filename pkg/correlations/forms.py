import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from django import forms
from django.core.exceptions import NON_FIELD_ERRORS, ValidationError

from correlations.classical import JointPMF3, coin_pmf, independent_pmf, xor_pmf
from correlations.linalg import LogBase
from correlations.states import StateSpec
from quantum_monogamy import settings

REPORTS = ("table1", "fig1", "deficit", "classical_scan")
FORMATS = ("csv", "json", "table")
STATE_KEYS = ("name", "theta", "amplitudes")

NAMED_PMFS = {
    "coin": coin_pmf,
    "independent": independent_pmf,
    "xor": xor_pmf,
}


def _choices(values):
    return [(value, value) for value in values]


def error_lines(form):
    """Flatten ``form.errors`` into ``field: message`` lines."""
    return [
        error["message"] if field == NON_FIELD_ERRORS else f"{field}: {error['message']}"
        for field, errors in form.errors.get_json_data().items()
        for error in errors
    ]


def load_json_source(raw):
    """Parse ``raw`` as inline JSON, or as the contents of a file it names."""
    if isinstance(raw, (dict, list)):
        return raw
    text = str(raw).strip()
    if not text.startswith(("{", "[")):
        path = Path(text)
        if not path.is_file():
            raise ValidationError(
                f"No such file and not inline JSON: {text!r}", code="missing"
            )
        text = path.read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ValidationError(f"Invalid JSON: {e.msg}", code="invalid") from None


class JSONSourceField(forms.Field):
    """Inline JSON, or the path of a file holding it."""

    def to_python(self, value):
        if value in self.empty_values:
            return None
        return load_json_source(value)


class IntegerListField(forms.Field):
    """Comma-separated integers such as ``1,2,3``, or a sequence of them."""

    def to_python(self, value):
        if value in self.empty_values:
            return None
        if isinstance(value, str):
            value = [part for part in value.split(",") if part.strip()]
        try:
            return tuple(int(item) for item in value)
        except (TypeError, ValueError):
            raise ValidationError(
                f"Expected comma-separated integers, got {value!r}", code="invalid"
            ) from None


class StateSpecForm(forms.Form):
    """A state record with exactly one of ``name``, ``theta`` or ``amplitudes``."""

    name = forms.CharField(required=False)
    theta = forms.FloatField(required=False)
    amplitudes = forms.JSONField(required=False)

    def clean_name(self):
        return self.cleaned_data["name"] or None

    def clean_amplitudes(self):
        value = self.cleaned_data["amplitudes"]
        if value is None:
            return None
        if not isinstance(value, list):
            raise ValidationError("Amplitudes must be a list of [re, im] pairs")
        amplitudes = []
        for pair in value:
            if (
                not isinstance(pair, list)
                or len(pair) != 2
                or not all(isinstance(part, (int, float)) for part in pair)
            ):
                raise ValidationError(f"Amplitude {pair!r} is not a [re, im] pair")
            amplitudes.append(complex(pair[0], pair[1]))
        return tuple(amplitudes)

    def clean(self):
        cleaned_data = super().clean()
        if self.errors:
            return cleaned_data
        try:
            cleaned_data["state"] = StateSpec(
                **{key: cleaned_data.get(key) for key in STATE_KEYS}
            )
        except ValidationError as e:
            for field, errors in e.error_dict.items():
                self.add_error(field if field in self.fields else None, errors)
        return cleaned_data

    def save(self):
        if not self.is_valid():
            raise ValidationError(self.errors.as_data())
        return self.cleaned_data["state"]


class PMFForm(forms.Form):
    """A named pmf (coin, independent, xor), or a nested 3-index list."""

    pmf = forms.CharField()

    def clean_pmf(self):
        raw = self.cleaned_data["pmf"]
        if raw.lower() in NAMED_PMFS:
            return NAMED_PMFS[raw.lower()]()
        data = load_json_source(raw)
        try:
            array = np.asarray(data, dtype=float)
        except (TypeError, ValueError) as e:
            raise ValidationError(f"Cannot read a probability array: {e}") from None
        try:
            return JointPMF3(array)
        except ValidationError as e:
            raise ValidationError(e.messages) from None

    def save(self):
        if not self.is_valid():
            raise ValidationError(self.errors.as_data())
        return self.cleaned_data["pmf"]


@dataclass(frozen=True)
class RunConfig:
    command: str
    base: LogBase = LogBase.NATS
    n_max: int = settings.DEFAULT_N_MAX
    theta_start: float = settings.THETA_START
    theta_stop: float = settings.THETA_STOP
    theta_step: float = settings.THETA_STEP
    powers: tuple = settings.FIG1_POWERS
    samples: int = settings.CLASSICAL_SAMPLES
    dims: tuple = settings.CLASSICAL_DIMS
    seed: int = settings.DEFAULT_SEED
    out: Path | None = None
    format: str | None = None
    state: StateSpec | None = None
    pmf: JointPMF3 | None = None
    workers: int = settings.SWEEP_WORKERS


class RunConfigForm(forms.Form):
    """Options of one report command. Unset options fall back to settings."""

    command = forms.ChoiceField(choices=_choices(REPORTS))
    base = forms.ChoiceField(choices=_choices(member.value for member in LogBase))
    n_max = forms.IntegerField(min_value=1)
    theta_start = forms.FloatField()
    theta_stop = forms.FloatField()
    theta_step = forms.FloatField()
    powers = IntegerListField()
    samples = forms.IntegerField(min_value=1)
    dims = IntegerListField()
    seed = forms.IntegerField()
    out = forms.CharField(required=False)
    format = forms.ChoiceField(required=False, choices=_choices(FORMATS))
    state = JSONSourceField(required=False)
    pmf = forms.CharField(required=False)
    workers = forms.IntegerField(min_value=1)

    def __init__(self, data=None, *args, **kwargs):
        if data is not None:
            defaults = {
                "base": settings.DEFAULT_BASE,
                "n_max": settings.DEFAULT_N_MAX,
                "theta_start": settings.THETA_START,
                "theta_stop": settings.THETA_STOP,
                "theta_step": settings.THETA_STEP,
                "powers": settings.FIG1_POWERS,
                "samples": settings.CLASSICAL_SAMPLES,
                "dims": settings.CLASSICAL_DIMS,
                "seed": settings.DEFAULT_SEED,
                "workers": settings.SWEEP_WORKERS,
            }
            data = defaults | {
                key: value for key, value in data.items() if value is not None
            }
        super().__init__(data, *args, **kwargs)

    def clean_base(self):
        return LogBase(self.cleaned_data["base"])

    def clean_theta_start(self):
        value = self.cleaned_data["theta_start"]
        if not 0.0 < value <= math.pi:
            raise ValidationError("theta_start must lie in (0, pi]")
        return value

    def clean_theta_stop(self):
        value = self.cleaned_data["theta_stop"]
        if not 0.0 < value <= math.pi + 1e-12:
            raise ValidationError("theta_stop must lie in (0, pi]")
        return min(value, math.pi)

    def clean_theta_step(self):
        value = self.cleaned_data["theta_step"]
        if value <= 0.0:
            raise ValidationError("theta_step must be > 0")
        return value

    def clean_powers(self):
        powers = self.cleaned_data["powers"]
        if not powers or min(powers) < 1:
            raise ValidationError("Powers must be positive integers")
        return powers

    def clean_dims(self):
        dims = self.cleaned_data["dims"]
        if len(dims) != 3 or not all(2 <= d <= 4 for d in dims):
            raise ValidationError("dims must be three alphabet sizes, each in 2..4")
        return dims

    def clean_out(self):
        value = self.cleaned_data["out"]
        return Path(value) if value else None

    def clean_format(self):
        return self.cleaned_data["format"] or None

    def clean_state(self):
        record = self.cleaned_data["state"]
        if record is None:
            return None
        if not isinstance(record, dict):
            raise ValidationError("State must be a JSON object")
        unknown = sorted(set(record) - set(STATE_KEYS))
        if unknown:
            raise ValidationError(f"Unknown keys: {', '.join(unknown)}")
        form = StateSpecForm(record)
        if not form.is_valid():
            raise ValidationError(error_lines(form))
        return form.save()

    def clean_pmf(self):
        raw = self.cleaned_data["pmf"]
        if not raw:
            return None
        form = PMFForm({"pmf": raw})
        if not form.is_valid():
            raise ValidationError(error_lines(form))
        return form.save()

    def clean(self):
        cleaned_data = super().clean()
        start = cleaned_data.get("theta_start")
        stop = cleaned_data.get("theta_stop")
        if start is not None and stop is not None and start > stop:
            self.add_error("theta_start", "theta_start must not exceed theta_stop")
        if (
            cleaned_data.get("command") == "deficit"
            and cleaned_data.get("state") is None
            and "state" not in self.errors
        ):
            self.add_error("state", "The deficit report needs --state")
        return cleaned_data

    def save(self):
        if not self.is_valid():
            raise ValidationError(self.errors.as_data())
        return RunConfig(**{name: self.cleaned_data[name] for name in self.fields})
