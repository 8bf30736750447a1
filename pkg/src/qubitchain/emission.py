"""Single-photon amplitude and spectral density of the emitted radiation.

The photon amplitude at detuning ``delta`` and observation time ``t`` is

    gamma(delta, t) = -i g sum_n exp(-i phi_n) int_0^t beta_n(t') exp(i delta t') dt'

with the coupling ``g`` set to 1 and the phases ``phi_n = k x_n`` frozen at
the resonant wave number. Two routes are provided: quadrature of a sampled
trajectory, and the closed form obtained from a modal expansion.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import find_peaks

from .chain import EffectiveMatrix
from .dynamics import AmplitudeTrajectory, evolve
from .errors import DefectiveBasisError, GridTooCoarseError
from .modes import ModalExpansion, characteristic_roots, modal_expansion

DEFAULT_DETUNINGS = (-3.0, 3.0, 2001)
DEFAULT_OBSERVATION_TIME = 100.0
POINTS_PER_RADIAN = 100  # quadrature step <= 0.01 / fastest rate
POLE_TOL = 1e-8
_CHUNK = 128


def default_detunings() -> np.ndarray:
    lo, hi, n = DEFAULT_DETUNINGS
    return np.linspace(lo, hi, n)


def max_quadrature_step(detunings, n_qubits: int, gamma: float = 1.0) -> float:
    fastest = max(float(np.max(np.abs(detunings), initial=0.0)), n_qubits * gamma)
    return 1.0 / (POINTS_PER_RADIAN * fastest)


def spectral_time_grid(t_obs: float, detunings, n_qubits: int, gamma: float = 1.0) -> np.ndarray:
    """Uniform grid on [0, t_obs] fine enough for ``photon_amplitude_numeric``."""
    if t_obs == 0:
        return np.zeros(1)
    h = max_quadrature_step(detunings, n_qubits, gamma)
    return np.linspace(0.0, t_obs, int(np.ceil(t_obs / h)) + 1)


def _endpoint_derivatives(f: np.ndarray, h: float) -> tuple[complex, complex]:
    # fourth-order one-sided differences
    c = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / (12.0 * h)
    return c @ f[:5], -(c @ f[::-1][:5])


def photon_amplitude_numeric(
    traj: AmplitudeTrajectory,
    positions,
    detunings,
    t: float | None = None,
    coupling: float = 1.0,
) -> np.ndarray:
    """Photon amplitude by quadrature over the sampled trajectory.

    Uses the composite trapezoid rule; on uniform grids the leading
    Euler-Maclaurin endpoint term is subtracted, which makes the rule
    fourth order.
    """
    detunings = np.atleast_1d(np.asarray(detunings, dtype=float))
    times = traj.times
    if t is None:
        t = float(times[-1])
    hits = np.flatnonzero(np.isclose(times, t, rtol=0, atol=1e-12 * max(1.0, abs(t))))
    if hits.size == 0:
        raise ValueError(f"observation time {t} is not a sample of the trajectory")
    k = int(hits[0])
    if k == 0:
        return np.zeros(detunings.size, dtype=complex)

    ts = times[: k + 1]
    steps = np.diff(ts)
    h_max = max_quadrature_step(detunings, traj.n_qubits, traj.gamma)
    if steps.max() > h_max * (1 + 1e-9):
        raise GridTooCoarseError(
            f"trajectory step {steps.max():.3g} exceeds {h_max:.3g} needed for |delta| <= "
            f"{np.max(np.abs(detunings)):.3g}"
        )

    phases = np.exp(-1j * np.asarray(positions, dtype=float))
    f = traj.amplitudes[: k + 1] @ phases
    w = np.zeros(ts.size)
    w[:-1] += 0.5 * steps
    w[1:] += 0.5 * steps
    wf = w * f

    uniform = ts.size >= 5 and np.ptp(steps) <= 1e-9 * steps.max()
    if uniform:
        h = steps.mean()
        da, db = _endpoint_derivatives(f, h)

    out = np.empty(detunings.size, dtype=complex)
    for lo in range(0, detunings.size, _CHUNK):
        d = detunings[lo : lo + _CHUNK]
        kernel = np.exp(1j * np.outer(d, ts))
        integral = kernel @ wf
        if uniform:
            fa = da + 1j * d * f[0]
            fb = (db + 1j * d * f[-1]) * kernel[:, -1]
            integral -= h * h / 12.0 * (fb - fa)
        out[lo : lo + _CHUNK] = integral
    return -1j * coupling * out


def modal_photon_weights(expansion: ModalExpansion, positions, coupling: float = 1.0) -> np.ndarray:
    """Per-mode weight ``g sum_n b_j^(n) exp(-i phi_n)`` entering the closed form."""
    phases = np.exp(-1j * np.asarray(positions, dtype=float))
    return coupling * (expansion.coefficients @ phases)


def photon_amplitude_modal(
    expansion: ModalExpansion,
    positions,
    detunings,
    t: float,
    coupling: float = 1.0,
    keep=None,
) -> np.ndarray:
    """Closed-form photon amplitude ``sum_j w_j (1 - exp(i x_j t)) / x_j``, ``x_j = delta - i lambda_j``.

    ``keep`` optionally masks the modes included in the sum.
    """
    detunings = np.atleast_1d(np.asarray(detunings, dtype=float))
    weights = modal_photon_weights(expansion, positions, coupling)
    roots = expansion.roots
    if keep is not None:
        keep = np.asarray(keep, dtype=bool)
        weights, roots = weights[keep], roots[keep]
    if t == 0 or roots.size == 0:
        return np.zeros(detunings.size, dtype=complex)

    x = detunings[:, None] - 1j * roots[None, :]
    near = np.abs(x) < POLE_TOL
    safe = np.where(near, 1.0, x)
    quotient = -np.expm1(1j * safe * t) / safe
    # removable singularity: series of (1 - exp(i x t)) / x about x = 0
    quotient = np.where(near, -1j * t + 0.5 * x * t * t, quotient)
    return quotient @ weights


def lorentzian_reference(n_qubits: int, detunings, gamma: float = 1.0) -> np.ndarray:
    """Spectral density ``1 / (delta^2 + (N Gamma / 2)^2)`` of width ``N Gamma``."""
    if n_qubits < 1:
        raise ValueError("n_qubits must be positive")
    d = np.asarray(detunings, dtype=float)
    return 1.0 / (d * d + (0.5 * n_qubits * gamma) ** 2)


@dataclass(frozen=True, eq=False)
class SpectrumResult:
    detunings: np.ndarray
    observation_time: float
    gamma_values: np.ndarray
    normalization: str = "raw"
    s_values: np.ndarray = field(init=False)

    def __post_init__(self):
        if self.normalization not in ("raw", "peak"):
            raise ValueError(f"unknown normalization {self.normalization!r}")
        s = self.s_raw
        if self.normalization == "peak":
            peak = s.max(initial=0.0)
            s = s / peak if peak > 0 else s
        object.__setattr__(self, "s_values", s)

    @property
    def s_raw(self) -> np.ndarray:
        return np.abs(self.gamma_values) ** 2

    def normalized(self, normalization: str = "peak") -> "SpectrumResult":
        return SpectrumResult(self.detunings, self.observation_time, self.gamma_values, normalization)


def emission_spectrum(
    matrix: EffectiveMatrix,
    positions,
    initial,
    detunings=None,
    t: float = DEFAULT_OBSERVATION_TIME,
    method: str = "auto",
    normalization: str = "raw",
    rtol: float = 1e-10,
    atol: float = 1e-12,
) -> SpectrumResult:
    """Spectral density at time ``t``.

    ``"modal"`` uses the closed form, ``"ode"`` integrates the trajectory and
    applies quadrature, ``"auto"`` prefers the closed form and falls back to
    quadrature when the eigenbasis is defective.
    """
    if detunings is None:
        detunings = default_detunings()
    detunings = np.asarray(detunings, dtype=float)
    gamma = None
    if method in ("auto", "modal"):
        try:
            expansion = modal_expansion(characteristic_roots(matrix), initial)
            gamma = photon_amplitude_modal(expansion, positions, detunings, t)
        except DefectiveBasisError:
            if method == "modal":
                raise
    elif method != "ode":
        raise ValueError(f"unknown method {method!r}")
    if gamma is None:
        times = spectral_time_grid(t, detunings, matrix.order, matrix.gamma)
        traj = evolve(matrix, initial, times, method="ode", rtol=rtol, atol=atol)
        gamma = photon_amplitude_numeric(traj, positions, detunings, t)
    return SpectrumResult(detunings, float(t), gamma, normalization)


@dataclass(frozen=True)
class SpectralPeak:
    position: float
    height: float
    hwhm: float


def _half_height_crossing(d: np.ndarray, s: np.ndarray, i: int, step: int) -> float:
    half = 0.5 * s[i]
    j = i
    while 0 <= j + step < s.size and s[j + step] >= half:
        j += step
    k = j + step
    if not 0 <= k < s.size:
        return float("nan")
    # linear interpolation between the last sample above and the first below
    frac = (s[j] - half) / (s[j] - s[k])
    return float(d[j] + frac * (d[k] - d[j]))


def spectral_peaks(detunings, s_values) -> list[SpectralPeak]:
    """Local maxima with half-widths at half maximum, tallest first.

    The half width is half the distance between the interpolated half-height
    crossings on either side; it is NaN when a crossing lies off the grid.
    """
    d = np.asarray(detunings, dtype=float)
    s = np.asarray(s_values, dtype=float)
    if d.size < 3 or s.max(initial=0.0) <= 0:
        return []
    # pad so a maximum sitting on a grid edge still counts
    idx, _ = find_peaks(np.concatenate(([-np.inf], s, [-np.inf])))
    peaks = []
    for i in idx - 1:
        left = _half_height_crossing(d, s, i, -1)
        right = _half_height_crossing(d, s, i, +1)
        peaks.append(SpectralPeak(float(d[i]), float(s[i]), 0.5 * (right - left)))
    return sorted(peaks, key=lambda p: -p.height)


def full_width_half_maximum(detunings, s_values) -> float:
    """FWHM of the tallest peak."""
    peaks = spectral_peaks(detunings, s_values)
    if not peaks:
        return float("nan")
    return 2.0 * peaks[0].hwhm
