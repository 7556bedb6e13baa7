"""
Dense Hermitian linear algebra for few-qubit density matrices.

The eigensolver is a cyclic complex Jacobi iteration. Its output is fully
deterministic: eigenvalues are sorted descending, eigenvectors inside a
degenerate subspace are rebuilt from the canonical basis in index order, and
every eigenvector's phase is fixed so its largest component is real positive.

Qubit convention: basis state |abc> has index 4a + 2b + c, so qubit A is the
most significant bit.
"""

import math
from dataclasses import dataclass
from enum import StrEnum

import numpy as np
import structlog
from django.core.exceptions import ValidationError
from scipy.special import xlogy

from correlations.exceptions import NumericalError
from quantum_monogamy import settings

logger = structlog.get_logger(__name__)

QUBIT_LABELS = ("A", "B", "C")

# A canonical vector is accepted into a degenerate subspace basis only when its
# projection keeps at least this norm. Some vector always clears it, since the
# squared residuals over the canonical basis sum to the remaining subspace size.
_COMPLETION_MIN_NORM = 1e-3


class LogBase(StrEnum):
    NATS = "nats"
    BITS = "bits"

    @classmethod
    def coerce(cls, value):
        try:
            return cls(value)
        except ValueError:
            choices = ", ".join(member.value for member in cls)
            raise ValidationError(
                {"base": f"Unknown log base {value!r}; expected one of {choices}"}
            ) from None

    @property
    def scale(self):
        """Factor converting a natural-log quantity to this base."""
        return 1.0 if self is LogBase.NATS else 1.0 / math.log(2.0)


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self):
        return len(self.eigenvalues)

    def reconstruct(self):
        vectors = self.eigenvectors
        return (vectors * self.eigenvalues) @ vectors.conj().T

    def residuals(self, matrix):
        """Per-pair ||A v_k - lambda_k v_k||_2."""
        vectors = self.eigenvectors
        return np.linalg.norm(matrix @ vectors - vectors * self.eigenvalues, axis=0)

    def orthonormality_defect(self):
        gram = self.eigenvectors.conj().T @ self.eigenvectors
        return float(np.max(np.abs(gram - np.eye(self.dim))))

    def has_degenerate_support(self, tol=settings.DEGENERACY_TOL):
        """True when two eigenvalues above ``tol`` coincide within ``tol``.

        Degeneracy inside the null space is ignored; for pure-state marginals
        it never affects a decohered diagonal.
        """
        support = self.eigenvalues[self.eigenvalues > tol]
        return bool(np.any(np.abs(np.diff(support)) <= tol))

    def spectrum(self):
        return Spectrum(self.eigenvalues)


@dataclass(frozen=True, eq=False)
class Spectrum:
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or values.size == 0:
            raise ValidationError({"values": "Spectrum must be a non-empty 1-d array"})
        lowest = float(values.min())
        if lowest < -settings.SPECTRUM_NEGATIVE_TOL:
            raise ValidationError(
                {
                    "values": ValidationError(
                        "Negative eigenvalue %(lowest).3e beyond tolerance",
                        code="negative",
                        params={"lowest": lowest},
                    )
                }
            )
        total = float(values.sum())
        if abs(total - 1.0) > settings.NORMALIZATION_TOL:
            raise ValidationError(
                {
                    "values": ValidationError(
                        "Spectrum sums to %(total)r, expected 1",
                        code="not_normalized",
                        params={"total": total},
                    )
                }
            )
        object.__setattr__(self, "values", np.clip(values, 0.0, 1.0))

    def __len__(self):
        return len(self.values)


def outer(psi):
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def hermitian_deviation(matrix):
    return float(np.max(np.abs(matrix - matrix.conj().T)))


def _as_square(matrix, field="matrix"):
    matrix = np.array(matrix, dtype=complex)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.size == 0:
        raise ValidationError(
            {field: f"Expected a non-empty square matrix, got shape {matrix.shape}"}
        )
    return matrix


def _off_norm(matrix):
    return float(np.linalg.norm(matrix - np.diag(np.diag(matrix))))


def _rotate(matrix, vectors, p, q):
    """Apply one complex Jacobi rotation zeroing matrix[p, q] in place."""
    apq = matrix[p, q]
    magnitude = abs(apq)
    if magnitude == 0.0:
        return
    phase = apq / magnitude
    app, aqq = matrix[p, p].real, matrix[q, q].real
    tau = (aqq - app) / (2.0 * magnitude)
    t = (1.0 if tau >= 0.0 else -1.0) / (abs(tau) + math.hypot(1.0, tau))
    c = 1.0 / math.hypot(1.0, t)
    s = t * c
    # diag(1, conj(phase)) makes the pivot real, then a real rotation zeroes it
    rotation = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
    pivot = [p, q]
    matrix[:, pivot] = matrix[:, pivot] @ rotation
    matrix[pivot, :] = rotation.conj().T @ matrix[pivot, :]
    matrix[p, q] = matrix[q, p] = 0.0
    matrix[p, p] = matrix[p, p].real
    matrix[q, q] = matrix[q, q].real
    vectors[:, pivot] = vectors[:, pivot] @ rotation


def _canonical_subspace_basis(block):
    """Orthonormal basis of span(block) built from e_0, e_1, ... in order."""
    projector = block @ block.conj().T
    size = block.shape[1]
    basis = []
    for k in range(projector.shape[0]):
        candidate = projector[:, k].copy()
        # two Gram-Schmidt passes
        for _ in range(2):
            for vector in basis:
                candidate -= vector * (vector.conj() @ candidate)
        norm = np.linalg.norm(candidate)
        if norm > _COMPLETION_MIN_NORM:
            basis.append(candidate / norm)
        if len(basis) == size:
            break
    return np.column_stack(basis)


def _degenerate_clusters(eigenvalues):
    start = 0
    for index in range(1, len(eigenvalues) + 1):
        if (
            index == len(eigenvalues)
            or eigenvalues[index - 1] - eigenvalues[index] > settings.DEGENERACY_TOL
        ):
            if index - start > 1:
                yield start, index
            start = index


def _fix_phases(vectors):
    for k in range(vectors.shape[1]):
        magnitudes = np.abs(vectors[:, k])
        anchor = np.flatnonzero(magnitudes >= magnitudes.max() - 1e-9)[0]
        vectors[:, k] *= vectors[anchor, k].conjugate() / magnitudes[anchor]


def eigh(matrix):
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending."""
    work = _as_square(matrix)
    deviation = hermitian_deviation(work)
    if deviation > settings.HERMITIAN_TOL:
        raise ValidationError(
            {
                "matrix": ValidationError(
                    "Matrix is not Hermitian: max |m - m^H| = %(deviation).3e",
                    code="not_hermitian",
                    params={"deviation": deviation},
                )
            }
        )
    work = (work + work.conj().T) / 2.0
    dim = work.shape[0]
    vectors = np.eye(dim, dtype=complex)
    threshold = settings.JACOBI_OFF_TOL * max(1.0, float(np.linalg.norm(work)))

    sweeps = 0
    while _off_norm(work) > threshold:
        if sweeps == settings.JACOBI_MAX_SWEEPS:
            off_norm = _off_norm(work)
            logger.error(
                "eigensolver_not_converged", dim=dim, sweeps=sweeps, off_norm=off_norm
            )
            raise NumericalError(
                f"Jacobi eigensolver did not converge after {sweeps} sweeps",
                off_norm=off_norm,
            )
        for p in range(dim - 1):
            for q in range(p + 1, dim):
                _rotate(work, vectors, p, q)
        sweeps += 1

    eigenvalues = np.diag(work).real.copy()
    order = np.argsort(-eigenvalues, kind="stable")
    eigenvalues = eigenvalues[order]
    vectors = vectors[:, order]

    for start, stop in _degenerate_clusters(eigenvalues):
        vectors[:, start:stop] = _canonical_subspace_basis(vectors[:, start:stop])
    _fix_phases(vectors)

    logger.debug("eigh_converged", dim=dim, sweeps=sweeps)
    return EigenDecomposition(eigenvalues=eigenvalues, eigenvectors=vectors)


def qubit_count(matrix):
    dim = matrix.shape[0]
    n_qubits = dim.bit_length() - 1
    if dim < 2 or 2**n_qubits != dim:
        raise ValidationError(
            {"matrix": f"Dimension {dim} is not a power of two qubits"}
        )
    return n_qubits


def subsystem_indices(subsystems, n_qubits):
    """Normalize labels ('A', 'BC', [0, 2], ...) to sorted qubit indices."""
    if isinstance(subsystems, str):
        subsystems = list(subsystems)
    indices = set()
    for item in subsystems:
        if isinstance(item, str):
            label = item.upper()
            if label not in QUBIT_LABELS[:n_qubits]:
                raise ValidationError({"keep": f"Unknown subsystem {item!r}"})
            indices.add(QUBIT_LABELS.index(label))
        else:
            index = int(item)
            if not 0 <= index < n_qubits:
                raise ValidationError({"keep": f"Subsystem index {index} out of range"})
            indices.add(index)
    return sorted(indices)


def validate_density(rho, field="rho"):
    rho = _as_square(rho, field)
    qubit_count(rho)
    deviation = hermitian_deviation(rho)
    if deviation > settings.HERMITIAN_TOL:
        raise ValidationError(
            {field: f"Density matrix is not Hermitian (deviation {deviation:.3e})"}
        )
    trace = complex(np.trace(rho))
    if abs(trace - 1.0) > settings.NORMALIZATION_TOL:
        raise ValidationError({field: f"Density matrix has trace {trace!r}"})
    return rho


def partial_trace(rho, keep):
    """Reduce a multi-qubit density matrix to the qubits in ``keep``."""
    rho = validate_density(rho)
    n_qubits = qubit_count(rho)
    kept = subsystem_indices(keep, n_qubits)
    if not kept or len(kept) == n_qubits:
        raise ValidationError(
            {"keep": "Keep-set must be a non-empty proper subset of the qubits"}
        )
    tensor = rho.reshape((2,) * (2 * n_qubits))
    rows = list(range(n_qubits))
    # a traced qubit shares its row label with its column label
    cols = [k + n_qubits if k in kept else k for k in range(n_qubits)]
    out = kept + [k + n_qubits for k in kept]
    reduced = np.einsum(tensor, rows + cols, out)
    dim = 2 ** len(kept)
    return reduced.reshape(dim, dim)


def spectral_entropy_term(spectrum, base=LogBase.NATS):
    """Sum of lambda log lambda (non-positive), with 0 log 0 = 0."""
    base = LogBase.coerce(base)
    values = spectrum.values
    return min(float(np.sum(xlogy(values, values))) * base.scale, 0.0)


def von_neumann_entropy(rho, base=LogBase.NATS):
    return -spectral_entropy_term(eigh(rho).spectrum(), base)


def relative_entropy(rho, sigma, base=LogBase.NATS):
    """S(rho || sigma) = Tr rho log rho - Tr rho log sigma.

    Infinite when the support of rho is not contained in that of sigma.
    """
    base = LogBase.coerce(base)
    own = spectral_entropy_term(eigh(rho).spectrum(), base)
    target = eigh(sigma)
    weights = np.real(
        np.einsum("ik,ij,jk->k", target.eigenvectors.conj(), rho, target.eigenvectors)
    )
    weights = np.clip(weights, 0.0, None)
    levels = np.clip(target.eigenvalues, 0.0, None)
    outside = (levels <= settings.DEGENERACY_TOL) & (weights > settings.DEGENERACY_TOL)
    if np.any(outside):
        return math.inf
    safe_levels = np.where(levels > 0.0, levels, 1.0)
    cross = float(np.sum(xlogy(weights, safe_levels))) * base.scale
    return own - cross
