import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import rk4
from qubitchain.chain import ChainConfig, build_effective_matrix
from qubitchain.dynamics import (
    analytic_amplitudes_resonant,
    default_times,
    evolve,
    find_plateaus,
    photon_emission_probability,
)
from qubitchain.errors import DefectiveBasisError, GridTooCoarseError
from qubitchain.modes import reduced_central_cubic_roots


def run(n, kd_pi, excited=1, times=None, method="auto"):
    cfg = ChainConfig.from_kd_pi(n, kd_pi, excited=excited)
    return evolve(build_effective_matrix(cfg), cfg.initial_state(), times, method=method)


def test_default_grid():
    t = default_times()
    assert t.size == 2000 and t[0] == 0 and t[-1] == 40


@pytest.mark.parametrize("method", ["modal", "ode"])
def test_single_qubit_exponential(method):
    traj = run(1, 0.5, method=method)
    np.testing.assert_allclose(traj.amplitudes[:, 0], np.exp(-traj.times / 2), atol=1e-10)
    np.testing.assert_allclose(traj.p_photon, 1 - np.exp(-traj.times), atol=1e-10)


def test_fixed_step_oracle_agrees():
    cfg = ChainConfig(4, kd=1.1, excited=2)
    m = build_effective_matrix(cfg)
    t = np.linspace(0, 10, 51)
    traj = evolve(m, cfg.initial_state(), t)
    assert np.max(np.abs(traj.amplitudes - rk4(m.entries, cfg.initial_state(), t))) < 1e-9


@pytest.mark.parametrize("excited", [1, 2, 3, 4, 5])
def test_full_wave_limits(excited):
    traj = run(5, 2.0, excited)
    final = traj.amplitudes[-1]
    expected = np.full(5, -0.2)
    expected[excited - 1] = 0.8
    np.testing.assert_allclose(final, expected, atol=1e-12)
    beta, p = analytic_amplitudes_resonant(5, excited, "even", traj.times)
    assert np.max(np.abs(traj.amplitudes - beta)) < 1e-8
    np.testing.assert_allclose(traj.p_photon, (1 - np.exp(-5 * traj.times)) / 5, atol=1e-8)


def test_half_wave_central_groups():
    traj = run(5, 1.0, 3)
    np.testing.assert_allclose(traj.amplitudes[-1], [-0.2, 0.2, 0.8, 0.2, -0.2], atol=1e-12)


def test_quarter_wave_central_mirror_and_three_modes():
    t = np.linspace(0, 30, 301)
    traj = run(5, 0.5, 3, t)
    b = traj.amplitudes
    assert np.max(np.abs(b[:, 0] - b[:, 4])) < 1e-10
    assert np.max(np.abs(b[:, 1] - b[:, 3])) < 1e-10
    # least-squares fit over the three cubic roots alone reproduces the trajectory
    basis = np.exp(np.outer(t, reduced_central_cubic_roots()))
    coef, *_ = np.linalg.lstsq(basis, b, rcond=None)
    assert np.max(np.abs(basis @ coef - b)) < 1e-9


def test_photon_probability_function_matches_field():
    traj = run(4, 0.3, 2)
    np.testing.assert_array_equal(photon_emission_probability(traj), traj.p_photon)
    assert abs(traj.p_photon[0]) < 1e-15


def test_analytic_initial_condition():
    for parity in ("even", "odd"):
        beta, p = analytic_amplitudes_resonant(6, 4, parity, 0.0)
        np.testing.assert_array_equal(beta, np.eye(6)[3])
        assert p == 0.0


def test_analytic_odd_matches_integration():
    t = np.linspace(0, 3, 31)
    traj = run(5, 1.0, 2, t, method="ode")
    beta, _ = analytic_amplitudes_resonant(5, 2, "odd", t)
    assert np.max(np.abs(traj.amplitudes[-1] - beta[-1])) < 1e-8


def test_analytic_rejects_bad_index():
    with pytest.raises(ValueError):
        analytic_amplitudes_resonant(3, 4, "even", 1.0)
    with pytest.raises(ValueError):
        analytic_amplitudes_resonant(3, 0, "odd", 1.0)


@pytest.mark.parametrize("n", [2, 3, 4, 7, 12])
def test_odd_groups_sum_to_zero(n):
    t = np.linspace(0, 10, 101)
    for excited in range(1, n + 1):
        traj = run(n, 3.0, excited, t)
        dist = np.abs(np.arange(1, n + 1) - excited)
        odd, even = dist % 2 == 1, (dist % 2 == 0) & (dist > 0)
        if odd.any() and even.any():
            # every odd-distance amplitude is the negative of every even-distance one
            b1 = traj.amplitudes[:, odd]
            b2 = traj.amplitudes[:, even]
            assert np.max(np.abs(b1[:, :1] + b2[:, :1])) < 1e-10
            assert np.max(np.abs(b1 - b1[:, :1])) < 1e-10


@pytest.mark.parametrize("n", [2, 3, 5, 8, 12])
@pytest.mark.parametrize("kd_pi,parity", [(1.0, "odd"), (2.0, "even"), (4.0, "even"), (3.0, "odd")])
def test_frozen_level(n, kd_pi, parity):
    t = np.linspace(0, 40, 801)
    excited = (n + 1) // 2
    traj = run(n, kd_pi, excited, t)
    limit, _ = analytic_amplitudes_resonant(n, excited, parity, 1e6)
    late = t >= 30 / n
    assert np.max(np.abs(np.abs(traj.amplitudes[late]) - np.abs(limit))) < 1e-6


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 12), st.floats(0.05, 0.95), st.integers(0, 1), st.data())
def test_methods_agree(n, frac, branch, data):
    kd = (frac + branch) * np.pi
    excited = data.draw(st.integers(1, n))
    cfg = ChainConfig(n, kd=kd, excited=excited)
    m = build_effective_matrix(cfg)
    a = evolve(m, cfg.initial_state(), method="modal")
    b = evolve(m, cfg.initial_state(), method="ode")
    assert np.max(np.abs(a.amplitudes - b.amplitudes)) < 1e-8


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 10), st.floats(0.01, 2 * np.pi), st.data())
def test_trajectory_invariants(n, kd, data):
    re = np.array(data.draw(st.lists(st.floats(-1, 1), min_size=n, max_size=n)))
    im = np.array(data.draw(st.lists(st.floats(-1, 1), min_size=n, max_size=n)))
    v = re + 1j * im
    if np.linalg.norm(v) < 1e-3:
        v = np.eye(n)[0].astype(complex)
    v = v / np.linalg.norm(v)
    traj = evolve(build_effective_matrix(ChainConfig(n, kd=kd, excited=v)), v)
    total = traj.probabilities.sum(axis=1)
    np.testing.assert_allclose(total + traj.p_photon, 1.0, atol=1e-12)
    assert np.all(np.diff(total) <= 1e-9)
    assert np.all(np.diff(traj.p_photon) >= -1e-9)
    assert np.all((traj.p_photon >= 0) & (traj.p_photon <= 1))
    assert abs(traj.p_photon[0]) < 1e-12


def test_rejects_bad_inputs():
    m = build_effective_matrix(ChainConfig(3, kd=0.4))
    with pytest.raises(ValueError):
        evolve(m, [1, 0], [0, 1])
    with pytest.raises(ValueError):
        evolve(m, [1, 1, 0], [0, 1])
    with pytest.raises(ValueError):
        evolve(m, [1, 0, 0], [0.5, 1])
    with pytest.raises(ValueError):
        evolve(m, [1, 0, 0], [0, 1, 1])
    with pytest.raises(ValueError):
        evolve(m, [1, 0, 0], [0, 1], method="euler")


def test_auto_falls_back_to_ode(monkeypatch):
    import qubitchain.dynamics as dyn

    def defective(*_args):
        raise DefectiveBasisError("forced")

    monkeypatch.setattr(dyn, "modal_expansion", defective)
    m = build_effective_matrix(ChainConfig(3, kd=0.4))
    traj = evolve(m, [1, 0, 0], np.linspace(0, 5, 11))
    assert traj.method == "ode"
    with pytest.raises(DefectiveBasisError):
        evolve(m, [1, 0, 0], np.linspace(0, 5, 11), method="modal")


# --- plateaus ----------------------------------------------------------------

THREE_QUBIT_PLATEAUS = [(6.363182, 6.823412), (10.665333, 12.406203)]
FIVE_QUBIT_PLATEAUS = [
    (5.522761, 5.842921),
    (10.745373, 11.185593),
    (15.947974, 16.528264),
    (21.130565, 21.890945),
    (26.273137, 27.293647),
    (31.395698, 32.756378),
    (36.458229, 38.27914),
]


def test_plateaus_three_qubits():
    traj = run(3, 0.5, 2)
    report = find_plateaus(traj.p_photon, traj.times)
    np.testing.assert_allclose(report.interior, THREE_QUBIT_PLATEAUS, atol=1e-5)
    assert report.final is not None and report.final[1] == 40.0
    # the first step sits where a qubit probability has a local extremum
    a, b = report.interior[0]
    window = (traj.times >= a) & (traj.times <= b)
    slopes = np.gradient(traj.probabilities, traj.times, axis=0)[window]
    assert np.any(np.sign(slopes[0]) != np.sign(slopes[-1]))


def test_plateaus_five_qubits():
    traj = run(5, 0.5, 3)
    report = find_plateaus(traj.p_photon, traj.times)
    np.testing.assert_allclose(report.interior, FIVE_QUBIT_PLATEAUS, atol=1e-5)
    assert report.final is None


def test_single_qubit_has_only_saturation():
    traj = run(1, 0.5)
    report = find_plateaus(traj.p_photon, traj.times)
    assert report.interior == []
    assert report.final is not None


def test_plateaus_reject_coarse_grid():
    t = np.linspace(0, 40, 101)
    with pytest.raises(GridTooCoarseError):
        find_plateaus(1 - np.exp(-t), t, min_width=0.2)
