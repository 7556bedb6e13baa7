"""
Quantum deficit of 3-qubit pure states.

The deficit of a bipartite state is its relative entropy to the decohered
counterpart, the state stripped of off-diagonal elements in the product of its
marginals' eigenbases. It reduces to

    D = sum(lambda log lambda) - sum(P log P)

with lambda the spectrum of the state and P its diagonal in that product basis.
"""

from dataclasses import dataclass

import numpy as np
import structlog
from django.core.exceptions import ValidationError
from scipy.special import xlogy

from correlations.exceptions import NumericalError
from correlations.linalg import (
    LogBase,
    eigh,
    partial_trace,
    spectral_entropy_term,
    validate_density,
)
from correlations.states import StateSpec, build_state, marginals
from quantum_monogamy import settings

logger = structlog.get_logger(__name__)


@dataclass(frozen=True, eq=False)
class DecoheredDiagonal:
    probabilities: np.ndarray
    # columns are the product eigenbasis vectors, in the order of probabilities
    basis: np.ndarray | None = None
    degenerate: bool = False

    def __post_init__(self):
        probabilities = np.asarray(self.probabilities, dtype=float)
        if probabilities.ndim != 1 or probabilities.size == 0:
            raise ValidationError(
                {"probabilities": "Decohered diagonal must be a non-empty 1-d array"}
            )
        lowest = float(probabilities.min())
        if lowest < -settings.DEFICIT_TOL:
            raise ValidationError(
                {
                    "probabilities": ValidationError(
                        "Negative probability %(lowest).3e",
                        code="negative",
                        params={"lowest": lowest},
                    )
                }
            )
        total = float(probabilities.sum())
        if abs(total - 1.0) > settings.NORMALIZATION_TOL:
            raise ValidationError(
                {"probabilities": f"Probabilities sum to {total!r}, expected 1"}
            )
        object.__setattr__(self, "probabilities", np.clip(probabilities, 0.0, 1.0))

    def __len__(self):
        return len(self.probabilities)

    def nonzero(self, tol=1e-12):
        """Probabilities above ``tol``, descending."""
        values = self.probabilities[self.probabilities > tol]
        return np.sort(values)[::-1]

    def decohered_matrix(self):
        """rho^d in the computational basis."""
        if self.basis is None:
            return np.diag(self.probabilities).astype(complex)
        return (self.basis * self.probabilities) @ self.basis.conj().T


@dataclass(frozen=True)
class DeficitReport:
    d_ab: float
    d_ac: float
    d_a_bc: float
    base: LogBase = LogBase.NATS
    state: StateSpec | None = None
    degenerate_marginal: bool = False

    def __post_init__(self):
        for field in ("d_ab", "d_ac", "d_a_bc"):
            value = float(getattr(self, field))
            if value < -settings.DEFICIT_TOL:
                raise NumericalError(f"Negative deficit {field}={value!r}")
            object.__setattr__(self, field, max(value, 0.0))
        object.__setattr__(self, "base", LogBase.coerce(self.base))

    @property
    def monogamy_gap(self):
        """D_A:BC - D_AB - D_AC; negative means the state is polygamous."""
        return self.d_a_bc - self.d_ab - self.d_ac

    @property
    def is_monogamous(self):
        return self.monogamy_gap >= -settings.MONOGAMY_TOL


def _max_deviation(left, right):
    return float(np.max(np.abs(np.asarray(left) - np.asarray(right))))


def _check_marginal(rho, keep, marginal, field):
    marginal = validate_density(marginal, field)
    reduced = partial_trace(rho, keep)
    if reduced.shape != marginal.shape:
        raise ValidationError(
            {field: f"Expected a {reduced.shape} marginal, got {marginal.shape}"}
        )
    deviation = _max_deviation(reduced, marginal)
    if deviation > settings.MARGINAL_CONSISTENCY_TOL:
        raise ValidationError(
            {
                field: ValidationError(
                    "Marginal is inconsistent: max deviation %(deviation).3e",
                    code="inconsistent",
                    params={"deviation": deviation},
                )
            }
        )
    return marginal


def diagonal_in_basis(rho, basis):
    """Diagonal elements <k|rho|k> for the columns |k> of ``basis``."""
    return np.real(np.einsum("ik,ij,jk->k", basis.conj(), rho, basis))


def decohere_pair(rho_pair, rho_left, rho_right):
    rho_pair = validate_density(rho_pair, "rho_pair")
    if rho_pair.shape != (4, 4):
        raise ValidationError({"rho_pair": "A qubit pair needs a 4x4 density matrix"})
    rho_left = _check_marginal(rho_pair, [0], rho_left, "rho_left")
    rho_right = _check_marginal(rho_pair, [1], rho_right, "rho_right")

    left, right = eigh(rho_left), eigh(rho_right)
    basis = np.kron(left.eigenvectors, right.eigenvectors)
    return DecoheredDiagonal(
        probabilities=diagonal_in_basis(rho_pair, basis),
        basis=basis,
        degenerate=left.has_degenerate_support() or right.has_degenerate_support(),
    )


def decohere_bipartition(rho_abc, rho_a, rho_bc):
    rho_abc = validate_density(rho_abc, "rho_abc")
    if rho_abc.shape != (8, 8):
        raise ValidationError({"rho_abc": "Three qubits need an 8x8 density matrix"})
    purity = float(np.real(np.trace(rho_abc @ rho_abc)))
    if purity < 1.0 - settings.PURITY_TOL:
        raise ValidationError(
            {
                "rho_abc": ValidationError(
                    "Only pure states are supported (purity %(purity).6f)",
                    code="mixed",
                    params={"purity": purity},
                )
            }
        )
    rho_a = _check_marginal(rho_abc, [0], rho_a, "rho_a")
    rho_bc = _check_marginal(rho_abc, [1, 2], rho_bc, "rho_bc")

    chi, eta = eigh(rho_a), eigh(rho_bc)
    basis = np.kron(chi.eigenvectors, eta.eigenvectors)
    return DecoheredDiagonal(
        probabilities=diagonal_in_basis(rho_abc, basis),
        basis=basis,
        degenerate=chi.has_degenerate_support() or eta.has_degenerate_support(),
    )


def quantum_deficit(spectrum, diag, base=LogBase.NATS):
    base = LogBase.coerce(base)
    if len(spectrum) != len(diag):
        raise ValidationError(
            {
                "diag": f"Spectrum has {len(spectrum)} entries but the decohered "
                f"diagonal has {len(diag)}"
            }
        )
    probabilities = diag.probabilities
    decohered_term = float(np.sum(xlogy(probabilities, probabilities))) * base.scale
    value = spectral_entropy_term(spectrum, base) - decohered_term
    if value < -settings.DEFICIT_TOL:
        logger.error("negative_deficit", value=value, base=base.value)
        raise NumericalError(f"Quantum deficit came out negative: {value!r}")
    return max(value, 0.0)


def deficit_report(spec, base=LogBase.NATS):
    base = LogBase.coerce(base)
    psi = build_state(spec)
    m = marginals(psi)

    pair_ab = decohere_pair(m.rho_ab, m.rho_a, m.rho_b)
    pair_ac = decohere_pair(m.rho_ac, m.rho_a, m.rho_c)
    bipartition = decohere_bipartition(m.rho_abc, m.rho_a, m.rho_bc)

    report = DeficitReport(
        d_ab=quantum_deficit(eigh(m.rho_ab).spectrum(), pair_ab, base),
        d_ac=quantum_deficit(eigh(m.rho_ac).spectrum(), pair_ac, base),
        d_a_bc=quantum_deficit(eigh(m.rho_abc).spectrum(), bipartition, base),
        base=base,
        state=spec,
        degenerate_marginal=(
            pair_ab.degenerate or pair_ac.degenerate or bipartition.degenerate
        ),
    )
    if report.degenerate_marginal:
        logger.warning(
            "degenerate_marginal",
            state=spec.label,
            detail="decohering basis fixed by canonical completion",
        )
    logger.debug(
        "deficit_report_computed",
        state=spec.label,
        base=base.value,
        d_ab=report.d_ab,
        d_ac=report.d_ac,
        d_a_bc=report.d_a_bc,
    )
    return report
