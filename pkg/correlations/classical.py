"""
Shannon-information engine for trivariate distributions P(X, Y, Z).

With Y as pivot, x = I(Y:XZ), y = I(Y:X), z = I(Y:Z). Strong subadditivity
and monotonicity under discarding a variable always hold; the co-information
y + z - x does not have a fixed sign, so "reversed monogamy" y + z >= x is a
diagnostic rather than a theorem (X, Z fair independent bits with Y = X xor Z
give y = z = 0 and x = 1 bit).
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial

import numpy as np
import structlog
from django.core.exceptions import ValidationError
from scipy.optimize import brentq
from scipy.special import xlogy

from correlations.exceptions import NumericalError
from correlations.linalg import LogBase
from quantum_monogamy import settings

logger = structlog.get_logger(__name__)

VARIABLES = ("X", "Y", "Z")
MI_TOL = 1e-12

CHECKS = (
    "strong_subadditivity",
    "four_term_bound",
    "reversed_monogamy",
    "discard_z",
    "discard_x",
)
# Checks that are theorems for every distribution
THEOREM_CHECKS = ("strong_subadditivity", "four_term_bound", "discard_z", "discard_x")


@dataclass(frozen=True, eq=False)
class JointPMF3:
    p: np.ndarray

    def __post_init__(self):
        p = np.array(self.p, dtype=float)
        if p.ndim != 3 or min(p.shape) < 1:
            raise ValidationError({"p": f"Expected a 3-index array, got shape {p.shape}"})
        lowest = float(p.min())
        if lowest < -1e-15:
            raise ValidationError({"p": f"Negative probability {lowest:.3e}"})
        total = float(p.sum())
        if abs(total - 1.0) > 1e-12:
            raise ValidationError({"p": f"Probabilities sum to {total!r}, expected 1"})
        object.__setattr__(self, "p", np.clip(p, 0.0, None))

    @property
    def dims(self):
        return self.p.shape

    def marginal(self, subset):
        axes = variable_axes(subset)
        dropped = tuple(axis for axis in range(3) if axis not in axes)
        return self.p.sum(axis=dropped)

    @classmethod
    def from_atoms(cls, dims, atoms):
        """Build from ``{(x, y, z): probability}``."""
        p = np.zeros(dims)
        for index, probability in atoms.items():
            p[index] = probability
        return cls(p)


@dataclass(frozen=True)
class MITriple:
    x: float
    y: float
    z: float
    h_xz: float
    base: LogBase = LogBase.NATS

    def __post_init__(self):
        for name in ("x", "y", "z", "h_xz"):
            value = float(getattr(self, name))
            if value < -MI_TOL:
                raise ValidationError({name: f"Mutual information {value!r} < 0"})
            object.__setattr__(self, name, max(value, 0.0))
        if self.y > self.x + MI_TOL or self.z > self.x + MI_TOL:
            raise ValidationError(
                {"x": f"Need y, z <= x, got x={self.x!r}, y={self.y!r}, z={self.z!r}"}
            )
        object.__setattr__(self, "base", LogBase.coerce(self.base))

    @property
    def co_information(self):
        return self.y + self.z - self.x


@dataclass(frozen=True)
class InequalityReport:
    slacks: dict
    # H(Z|X) - H(Z|XY), equal to x - y
    conditioning_gap: float
    tol: float = settings.SLACK_TOL

    @property
    def holds(self):
        return {name: slack >= -self.tol for name, slack in self.slacks.items()}

    @property
    def theorem_violations(self):
        return [name for name in THEOREM_CHECKS if not self.holds[name]]

    @property
    def co_information_negative(self):
        return not self.holds["reversed_monogamy"]


def variable_axes(subset):
    if isinstance(subset, str):
        subset = list(subset)
    axes = set()
    for item in subset:
        if isinstance(item, str):
            label = item.upper()
            if label not in VARIABLES:
                raise ValidationError({"subset": f"Unknown variable {item!r}"})
            axes.add(VARIABLES.index(label))
        else:
            axes.add(int(item))
    if not axes:
        raise ValidationError({"subset": "Variable subset must not be empty"})
    return tuple(sorted(axes))


def entropy(pmf, subset, base=LogBase.NATS):
    base = LogBase.coerce(base)
    marginal = pmf.marginal(subset)
    return max(-float(np.sum(xlogy(marginal, marginal))) * base.scale, 0.0)


def conditional_entropy(pmf, target, given=(), base=LogBase.NATS):
    """H(target | given); an empty ``given`` gives H(target)."""
    if not given:
        return entropy(pmf, target, base)
    joint = variable_axes(target) + variable_axes(given)
    return entropy(pmf, joint, base) - entropy(pmf, given, base)


def mutual_information(pmf, left, right, base=LogBase.NATS):
    left_axes, right_axes = variable_axes(left), variable_axes(right)
    if set(left_axes) & set(right_axes):
        raise ValidationError(
            {"right": f"Groups {left!r} and {right!r} must be disjoint"}
        )
    value = (
        entropy(pmf, left_axes, base)
        + entropy(pmf, right_axes, base)
        - entropy(pmf, left_axes + right_axes, base)
    )
    if value < -MI_TOL:
        raise NumericalError(f"Mutual information came out negative: {value!r}")
    return max(value, 0.0)


def mi_triple(pmf, base=LogBase.NATS):
    return MITriple(
        x=mutual_information(pmf, "Y", "XZ", base),
        y=mutual_information(pmf, "Y", "X", base),
        z=mutual_information(pmf, "Y", "Z", base),
        h_xz=mutual_information(pmf, "X", "Z", base),
        base=base,
    )


def verify_inequality_chain(pmf, base=LogBase.NATS):
    t = mi_triple(pmf, base)
    h = partial(entropy, pmf, base=base)
    slacks = {
        "strong_subadditivity": h("XY") + h("YZ") - h("XYZ") - h("Y"),
        "four_term_bound": t.x + t.h_xz - t.y - t.z,
        "reversed_monogamy": t.y + t.z - t.x,
        "discard_z": t.x - t.y,
        "discard_x": t.x - t.z,
    }
    gap = conditional_entropy(pmf, "Z", "X", base) - conditional_entropy(
        pmf, "Z", "XY", base
    )
    return InequalityReport(slacks=slacks, conditioning_gap=gap)


def min_mi_power(t, n_max=settings.DEFAULT_N_MAX, tol=settings.MONOGAMY_TOL):
    """Smallest n <= n_max with (y/x)^n + (z/x)^n <= 1 + tol, else None.

    y >= x next to a positive z (or the reverse) has no finite power.
    """
    if n_max < 1:
        raise ValidationError({"n_max": f"n_max must be >= 1, got {n_max}"})
    if t.x <= tol:
        return 1
    ratio_y, ratio_z = t.y / t.x, t.z / t.x
    if max(ratio_y, ratio_z) >= 1.0 and min(ratio_y, ratio_z) > tol:
        return None
    for n in range(1, n_max + 1):
        if ratio_y**n + ratio_z**n <= 1.0 + tol:
            return n
    return None


def crossing_power(t):
    """Real n where (y/x)^n + (z/x)^n = 1, by Brent root finding.

    0 when fewer than two ratios are positive, inf when one ratio is >= 1.
    """
    if t.x <= MI_TOL:
        return 0.0
    ratios = [r for r in (t.y / t.x, t.z / t.x) if r > MI_TOL]
    if len(ratios) < 2:
        return 0.0
    if max(ratios) >= 1.0 - MI_TOL:
        return math.inf

    def excess(n):
        return sum(r**n for r in ratios) - 1.0

    upper = 1.0
    while excess(upper) > 0.0:
        upper *= 2.0
    return brentq(excess, 0.0, upper, xtol=1e-12)


def sample_pmf(dims, seed):
    """Uniform point on the probability simplex via normalized Exp(1) draws."""
    dims = tuple(int(d) for d in dims)
    if len(dims) != 3 or not all(2 <= d <= 4 for d in dims):
        raise ValidationError({"dims": f"Each alphabet size must be in 2..4, got {dims}"})
    rng = np.random.default_rng(seed)
    draws = rng.exponential(scale=1.0, size=dims)
    return JointPMF3(draws / draws.sum())


def coin_pmf():
    """X = Y = Z, a single fair coin."""
    return JointPMF3.from_atoms((2, 2, 2), {(0, 0, 0): 0.5, (1, 1, 1): 0.5})


def independent_pmf(dims=(2, 2, 2)):
    return JointPMF3(np.full(dims, 1.0 / math.prod(dims)))


def xor_pmf():
    """X, Z independent fair bits and Y = X xor Z."""
    return JointPMF3.from_atoms(
        (2, 2, 2), {(x, x ^ z, z): 0.25 for x in range(2) for z in range(2)}
    )


@dataclass(frozen=True)
class ClassicalRow:
    seed: int | None
    triple: MITriple
    inequalities: InequalityReport
    min_n: int | None


@dataclass(frozen=True)
class ClassicalScan:
    dims: tuple
    seed: int
    base: LogBase
    rows: list = field(default_factory=list)

    def summary(self):
        violations = {
            name: sum(1 for row in self.rows if not row.inequalities.holds[name])
            for name in THEOREM_CHECKS
        }
        no_power = sum(1 for row in self.rows if row.min_n is None)
        return {
            "samples": len(self.rows),
            "dims": list(self.dims),
            "seed": self.seed,
            "base": self.base.value,
            "violations": violations,
            "total_violations": sum(violations.values()),
            "co_information_negative": sum(
                1 for row in self.rows if row.inequalities.co_information_negative
            ),
            "no_finite_power": no_power,
            "no_finite_power_fraction": no_power / len(self.rows) if self.rows else 0.0,
        }


def evaluate_pmf(pmf, base=LogBase.NATS, n_max=settings.DEFAULT_N_MAX, seed=None):
    triple = mi_triple(pmf, base)
    return ClassicalRow(
        seed=seed,
        triple=triple,
        inequalities=verify_inequality_chain(pmf, base),
        min_n=min_mi_power(triple, n_max),
    )


def _sampled_row(seed, dims, base, n_max):
    return evaluate_pmf(sample_pmf(dims, seed), base, n_max, seed=seed)


def classical_batch(
    samples,
    dims=settings.CLASSICAL_DIMS,
    seed=settings.DEFAULT_SEED,
    base=LogBase.NATS,
    n_max=settings.DEFAULT_N_MAX,
    workers=settings.SWEEP_WORKERS,
):
    """Evaluate ``samples`` random pmfs; instance i is drawn with seed + i."""
    if samples < 1:
        raise ValidationError({"samples": f"Need at least one sample, got {samples}"})
    base = LogBase.coerce(base)
    dims = tuple(int(d) for d in dims)
    seeds = [seed + index for index in range(samples)]
    row = partial(_sampled_row, dims=dims, base=base, n_max=n_max)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(row, seeds, chunksize=256))
    else:
        rows = [row(s) for s in seeds]

    scan = ClassicalScan(dims=dims, seed=seed, base=base, rows=rows)
    summary = scan.summary()
    log = logger.warning if summary["total_violations"] else logger.info
    log(
        "classical_scan_finished",
        samples=samples,
        dims=list(dims),
        total_violations=summary["total_violations"],
        no_finite_power=summary["no_finite_power"],
    )
    return scan
