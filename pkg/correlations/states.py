import itertools
import math
from dataclasses import dataclass
from enum import StrEnum

import numpy as np
import structlog
from django.core.exceptions import ValidationError

from correlations.linalg import outer, partial_trace
from quantum_monogamy import settings

logger = structlog.get_logger(__name__)

DIM = 8


class StateName(StrEnum):
    W = "W"
    WBAR = "WBAR"
    WWBAR = "WWBAR"
    GHZ = "GHZ"
    PRODUCT = "PRODUCT"


def _basis(*indices):
    vector = np.zeros(DIM, dtype=complex)
    vector[list(indices)] = 1.0
    return vector / math.sqrt(len(indices))


# |100>, |010>, |001> and their complements |011>, |101>, |110>
_W = _basis(4, 2, 1)
_WBAR = _basis(3, 5, 6)

NAMED_AMPLITUDES = {
    StateName.W: _W,
    StateName.WBAR: _WBAR,
    StateName.WWBAR: (_W + _WBAR) / math.sqrt(2.0),
    StateName.GHZ: _basis(0, 7),
    StateName.PRODUCT: _basis(0),
}


@dataclass(frozen=True)
class StateSpec:
    """Exactly one of a named state, a theta-family angle, or raw amplitudes."""

    name: StateName | None = None
    theta: float | None = None
    amplitudes: tuple[complex, ...] | None = None

    def __post_init__(self):
        self.clean()

    def clean(self):
        populated = [
            field
            for field in ("name", "theta", "amplitudes")
            if getattr(self, field) is not None
        ]
        if len(populated) != 1:
            raise ValidationError(
                {
                    "state": "Exactly one of name, theta or amplitudes is required, "
                    f"got {populated or 'none'}"
                }
            )
        if self.name is not None:
            try:
                object.__setattr__(self, "name", StateName(str(self.name).upper()))
            except ValueError:
                choices = ", ".join(member.value for member in StateName)
                raise ValidationError(
                    {"name": f"Unknown state {self.name!r}; expected one of {choices}"}
                ) from None
        if self.theta is not None:
            theta = float(self.theta)
            if not math.isfinite(theta) or theta <= 0.0 or theta > math.pi + 1e-12:
                raise ValidationError({"theta": f"Theta {theta!r} is outside (0, pi]"})
            object.__setattr__(self, "theta", min(theta, math.pi))
        if self.amplitudes is not None:
            amplitudes = tuple(complex(a) for a in self.amplitudes)
            if len(amplitudes) != DIM:
                raise ValidationError(
                    {"amplitudes": f"Expected {DIM} amplitudes, got {len(amplitudes)}"}
                )
            if not all(math.isfinite(abs(a)) for a in amplitudes):
                raise ValidationError({"amplitudes": "Amplitudes must be finite"})
            object.__setattr__(self, "amplitudes", amplitudes)

    @classmethod
    def named(cls, name):
        return cls(name=name)

    @classmethod
    def from_theta(cls, theta):
        return cls(theta=theta)

    @classmethod
    def from_amplitudes(cls, amplitudes):
        return cls(amplitudes=tuple(amplitudes))

    @property
    def label(self):
        if self.name is not None:
            return self.name.value
        if self.theta is not None:
            return f"theta={self.theta:.12g}"
        return "amplitudes"

    def to_record(self):
        if self.name is not None:
            return {"name": self.name.value}
        if self.theta is not None:
            return {"theta": self.theta}
        return {"amplitudes": [[a.real, a.imag] for a in self.amplitudes]}


@dataclass(frozen=True, eq=False)
class PureState:
    amplitudes: np.ndarray

    def __post_init__(self):
        amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if amplitudes.shape != (DIM,):
            raise ValidationError(
                {"amplitudes": f"Expected shape ({DIM},), got {amplitudes.shape}"}
            )
        norm = float(np.vdot(amplitudes, amplitudes).real)
        if abs(norm - 1.0) > settings.NORMALIZATION_TOL:
            raise ValidationError({"amplitudes": f"State has squared norm {norm!r}"})
        object.__setattr__(self, "amplitudes", amplitudes)

    def density(self):
        return outer(self.amplitudes)

    def is_symmetric(self, tol=1e-12):
        """Invariant under every permutation of the three qubits."""
        tensor = self.amplitudes.reshape(2, 2, 2)
        return all(
            np.allclose(tensor, tensor.transpose(order), atol=tol)
            for order in itertools.permutations(range(3))
        )


@dataclass(frozen=True, eq=False)
class MarginalSet:
    rho_a: np.ndarray
    rho_b: np.ndarray
    rho_c: np.ndarray
    rho_ab: np.ndarray
    rho_ac: np.ndarray
    rho_bc: np.ndarray
    rho_abc: np.ndarray


def _normalized(amplitudes):
    amplitudes = np.asarray(amplitudes, dtype=complex)
    squared_norm = float(np.vdot(amplitudes, amplitudes).real)
    if squared_norm == 0.0:
        raise ValidationError({"amplitudes": "All-zero amplitudes cannot be normalized"})
    deviation = abs(squared_norm - 1.0)
    if deviation > 1e-8:
        logger.warning("amplitudes_renormalized", squared_norm=squared_norm)
    return amplitudes / math.sqrt(squared_norm)


def build_state(spec):
    if spec.name is not None:
        return PureState(NAMED_AMPLITUDES[spec.name].copy())
    if spec.theta is not None:
        if spec.theta == math.pi:
            return PureState(_W.copy())
        half = spec.theta / 2.0
        amplitudes = math.sin(half) * _W
        amplitudes[0] = math.cos(half)
        return PureState(amplitudes)
    return PureState(_normalized(spec.amplitudes))


def apply_local_unitaries(psi, u_a, u_b, u_c):
    return PureState(np.kron(np.kron(u_a, u_b), u_c) @ psi.amplitudes)


def marginals(psi):
    rho = psi.density()
    return MarginalSet(
        rho_a=partial_trace(rho, "A"),
        rho_b=partial_trace(rho, "B"),
        rho_c=partial_trace(rho, "C"),
        rho_ab=partial_trace(rho, "AB"),
        rho_ac=partial_trace(rho, "AC"),
        rho_bc=partial_trace(rho, "BC"),
        rho_abc=rho,
    )
