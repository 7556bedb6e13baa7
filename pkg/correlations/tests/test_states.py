import math

import numpy as np
import pytest
from django.core.exceptions import ValidationError

from correlations.linalg import eigh
from correlations.states import (
    NAMED_AMPLITUDES,
    PureState,
    StateName,
    StateSpec,
    build_state,
    marginals,
)
from correlations.tests.conftest import SYMMETRIC_SPECS


@pytest.mark.parametrize("name", list(StateName))
def test_named_states_are_normalized(name):
    psi = build_state(StateSpec.named(name))
    assert np.vdot(psi.amplitudes, psi.amplitudes).real == pytest.approx(1.0)


def test_named_state_lookup_is_case_insensitive():
    assert StateSpec(name="wwbar").name is StateName.WWBAR


def test_w_marginals():
    m = marginals(build_state(StateSpec.named(StateName.W)))
    assert np.allclose(m.rho_a, np.diag([2 / 3, 1 / 3]))
    expected_ab = np.array(
        [[1, 0, 0, 0], [0, 1, 1, 0], [0, 1, 1, 0], [0, 0, 0, 0]]
    ) / 3.0
    assert np.allclose(m.rho_ab, expected_ab)
    assert np.allclose(m.rho_ab, m.rho_ac)
    assert np.allclose(eigh(m.rho_ab).eigenvalues, [2 / 3, 1 / 3, 0.0, 0.0])


def test_wwbar_single_qubit_marginal():
    m = marginals(build_state(StateSpec.named(StateName.WWBAR)))
    assert np.allclose(m.rho_a, np.array([[3, 2], [2, 3]]) / 6.0)
    assert np.allclose(eigh(m.rho_a).eigenvalues, [5 / 6, 1 / 6])


@pytest.mark.parametrize(
    "name", [StateName.W, StateName.WBAR, StateName.WWBAR, StateName.GHZ]
)
def test_symmetric_states(name):
    assert build_state(StateSpec.named(name)).is_symmetric()


@pytest.mark.parametrize("spec", SYMMETRIC_SPECS, ids=lambda spec: spec.label)
def test_symmetric_marginals_coincide(spec):
    m = marginals(build_state(spec))
    assert np.max(np.abs(m.rho_a - m.rho_b)) <= 1e-12
    assert np.max(np.abs(m.rho_a - m.rho_c)) <= 1e-12
    assert np.max(np.abs(m.rho_ab - m.rho_ac)) <= 1e-12
    assert np.max(np.abs(m.rho_ab - m.rho_bc)) <= 1e-12


def test_theta_family_endpoints():
    at_pi = build_state(StateSpec.from_theta(math.pi))
    assert np.array_equal(at_pi.amplitudes, NAMED_AMPLITUDES[StateName.W])
    near_zero = build_state(StateSpec.from_theta(1e-6))
    assert abs(near_zero.amplitudes[0]) == pytest.approx(1.0)
    half = build_state(StateSpec.from_theta(math.pi / 2))
    assert half.amplitudes[0] == pytest.approx(math.cos(math.pi / 4))
    assert half.amplitudes[4] == pytest.approx(math.sin(math.pi / 4) / math.sqrt(3))


def test_theta_slightly_above_pi_is_clamped():
    assert StateSpec.from_theta(math.pi + 1e-13).theta == math.pi


@pytest.mark.parametrize("theta", [0.0, -0.1, 3.2, float("nan")])
def test_theta_out_of_range(theta):
    with pytest.raises(ValidationError) as excinfo:
        StateSpec.from_theta(theta)
    assert "theta" in excinfo.value.message_dict


def test_spec_needs_exactly_one_variant():
    with pytest.raises(ValidationError):
        StateSpec()
    with pytest.raises(ValidationError):
        StateSpec(name="W", theta=1.0)


def test_unknown_name():
    with pytest.raises(ValidationError) as excinfo:
        StateSpec(name="bell")
    assert "name" in excinfo.value.message_dict


def test_amplitudes_are_renormalized():
    spec = StateSpec.from_amplitudes([2.0, 0, 0, 0, 0, 0, 0, 2.0])
    psi = build_state(spec)
    assert np.allclose(psi.amplitudes, NAMED_AMPLITUDES[StateName.GHZ])


def test_amplitudes_validation():
    with pytest.raises(ValidationError):
        StateSpec.from_amplitudes([1.0, 0.0])
    with pytest.raises(ValidationError):
        build_state(StateSpec.from_amplitudes([0.0] * 8))
    with pytest.raises(ValidationError):
        PureState(np.ones(8))


def test_spec_record_and_label():
    assert StateSpec.named("W").to_record() == {"name": "W"}
    assert StateSpec.from_theta(1.5).to_record() == {"theta": 1.5}
    assert StateSpec.from_theta(1.5).label == "theta=1.5"
    record = StateSpec.from_amplitudes([1j, 0, 0, 0, 0, 0, 0, 0]).to_record()
    assert record["amplitudes"][0] == [0.0, 1.0]
