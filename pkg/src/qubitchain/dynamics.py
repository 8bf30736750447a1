"""Time evolution of the qubit amplitudes and the emitted-photon probability."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp

from .chain import NORM_TOL, EffectiveMatrix
from .errors import DefectiveBasisError, GridTooCoarseError, IntegrationError
from .modes import characteristic_roots, modal_expansion

DEFAULT_T_MAX = 40.0
DEFAULT_SAMPLES = 2000
DEFAULT_RTOL = 1e-10
DEFAULT_ATOL = 1e-12

METHODS = ("auto", "modal", "ode")


def default_times(t_max: float = DEFAULT_T_MAX, samples: int = DEFAULT_SAMPLES) -> np.ndarray:
    return np.linspace(0.0, t_max, samples)


def photon_probability_from_amplitudes(amplitudes: np.ndarray) -> np.ndarray:
    return np.clip(1.0 - np.sum(np.abs(amplitudes) ** 2, axis=-1), 0.0, 1.0)


@dataclass(frozen=True, eq=False)
class AmplitudeTrajectory:
    times: np.ndarray
    amplitudes: np.ndarray  # (time, qubit)
    method: str = "modal"
    gamma: float = 1.0
    probabilities: np.ndarray = field(init=False)
    p_photon: np.ndarray = field(init=False)

    def __post_init__(self):
        probs = np.abs(self.amplitudes) ** 2
        object.__setattr__(self, "probabilities", probs)
        object.__setattr__(self, "p_photon", photon_probability_from_amplitudes(self.amplitudes))

    @property
    def n_qubits(self) -> int:
        return self.amplitudes.shape[1]


def _check_inputs(matrix: EffectiveMatrix, initial, times):
    initial = np.asarray(initial, dtype=complex)
    if initial.shape != (matrix.order,):
        raise ValueError(f"initial vector must have length {matrix.order}, got {initial.shape}")
    if abs(np.linalg.norm(initial) - 1.0) > NORM_TOL:
        raise ValueError("initial vector must have unit norm")
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0 or times[0] != 0.0:
        raise ValueError("times must be a 1-D grid starting at 0")
    if np.any(np.diff(times) <= 0):
        raise ValueError("times must be strictly increasing")
    return initial, times


def _evolve_modal(matrix, initial, times):
    expansion = modal_expansion(characteristic_roots(matrix), initial)
    return expansion.amplitudes(times)


def _evolve_ode(matrix, initial, times, rtol, atol):
    m = np.asarray(matrix.entries)
    if times.size == 1:
        return initial[None, :].copy()
    sol = solve_ivp(
        lambda _t, y: m @ y,
        (times[0], times[-1]),
        initial,
        method="RK45",
        t_eval=times,
        rtol=rtol,
        atol=atol,
    )
    if sol.status != 0:
        raise IntegrationError(f"adaptive integration failed: {sol.message}")
    return sol.y.T


def evolve(
    matrix: EffectiveMatrix,
    initial,
    times=None,
    method: str = "auto",
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
) -> AmplitudeTrajectory:
    """Propagate ``d beta / dt = M beta`` from ``initial`` over ``times``.

    ``method="modal"`` uses the eigendecomposition of ``M``, ``"ode"`` the
    adaptive Dormand-Prince 5(4) pair, and ``"auto"`` tries the modal
    route first and falls back to the integrator on a defective basis.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    if times is None:
        times = default_times()
    initial, times = _check_inputs(matrix, initial, times)

    if method == "ode":
        amps, used = _evolve_ode(matrix, initial, times, rtol, atol), "ode"
    else:
        try:
            amps, used = _evolve_modal(matrix, initial, times), "modal"
        except DefectiveBasisError:
            if method == "modal":
                raise
            amps, used = _evolve_ode(matrix, initial, times, rtol, atol), "ode"
    return AmplitudeTrajectory(times=times, amplitudes=amps, method=used, gamma=matrix.gamma)


def photon_emission_probability(traj: AmplitudeTrajectory) -> np.ndarray:
    """Integrated emission probability ``1 - sum_n |beta_n(t)|^2``."""
    return photon_probability_from_amplitudes(traj.amplitudes)


def analytic_amplitudes_resonant(
    n_qubits: int,
    excited: int,
    parity: str,
    t,
    gamma: float = 1.0,
) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form amplitudes for kd = 2 pi n (``"even"``) or (2n + 1) pi (``"odd"``).

    Returns ``(beta, p_photon)``; ``beta`` has shape ``(len(t), N)`` for array
    ``t`` and ``(N,)`` for scalar ``t``.
    """
    if n_qubits < 1:
        raise ValueError("n_qubits must be positive")
    if not 1 <= excited <= n_qubits:
        raise ValueError(f"excited index {excited} outside 1..{n_qubits}")
    if parity not in ("even", "odd"):
        raise ValueError("parity must be 'even' or 'odd'")
    scalar = np.ndim(t) == 0
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t < 0):
        raise ValueError("t must be non-negative")

    n = n_qubits
    decay = np.exp(-0.5 * gamma * n * t)[:, None] / n
    distance = np.abs(np.arange(1, n + 1) - excited)
    if parity == "even":
        sign = np.ones(n)
    else:
        sign = np.where(distance % 2 == 1, -1.0, 1.0)
    beta = sign * (-1.0 / n + decay) + np.zeros((t.size, n))
    beta[:, excited - 1] = (n - 1) / n + decay[:, 0]
    p_ph = (1.0 - np.exp(-gamma * n * t)) / n
    beta = beta.astype(complex)
    if scalar:
        return beta[0], p_ph[0]
    return beta, p_ph


@dataclass(frozen=True)
class PlateauReport:
    interior: list[tuple[float, float]]
    final: Optional[tuple[float, float]]

    def __len__(self):
        return len(self.interior)


def find_plateaus(
    p_photon,
    times,
    eps: float = 1e-3,
    min_width: float = 0.2,
) -> PlateauReport:
    """Locate maximal intervals where ``|dP/dt| < eps`` lasting at least ``min_width``.

    A flat stretch that runs to the end of the record is the saturation
    plateau and is reported separately as ``final``.
    """
    p = np.asarray(p_photon, dtype=float)
    t = np.asarray(times, dtype=float)
    if p.shape != t.shape or t.ndim != 1:
        raise ValueError("p_photon and times must be 1-D arrays of equal length")
    if t.size < 3:
        raise GridTooCoarseError("need at least 3 samples")
    if min_width / np.max(np.diff(t)) < 2:
        raise GridTooCoarseError(
            f"grid step {np.max(np.diff(t)):.3g} gives fewer than 3 points per min_width {min_width}"
        )

    flat = np.abs(np.gradient(p, t)) < eps
    edges = np.diff(np.concatenate(([0], flat.astype(np.int8), [0])))
    starts = np.flatnonzero(edges == 1)
    stops = np.flatnonzero(edges == -1) - 1

    interior, final = [], None
    for a, b in zip(starts, stops):
        if t[b] - t[a] < min_width:
            continue
        if b == t.size - 1:
            final = (float(t[a]), float(t[b]))
        else:
            interior.append((float(t[a]), float(t[b])))
    return PlateauReport(interior=interior, final=final)
