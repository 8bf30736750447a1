"""Chain geometry and the effective non-Hermitian coupling matrix.

Amplitudes live in the rotating frame of the (common) qubit frequency, so
the matrix ``M`` below is the generator of ``d beta / dt = M beta``::

    M_nn = -Gamma / 2
    M_nm = -(Gamma / 2) * exp(i |phi_m - phi_n|),   phi_n = k x_n

Positions are stored as dimensionless phases ``k x_n``; for an equidistant
chain ``phi_n = (n - 1) kd``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .errors import InvalidConfigError

NORM_TOL = 1e-12


@dataclass(frozen=True)
class ChainConfig:
    """Parameters of a chain of identical qubits.

    ``excited`` is either the 1-based index of the initially excited qubit or
    a normalized complex amplitude vector of length ``n_qubits``.
    """

    n_qubits: int
    kd: float = np.pi / 2
    gamma: float = 1.0
    positions: Optional[Sequence[float]] = None
    excited: Union[int, Sequence[complex]] = 1

    def __post_init__(self):
        if int(self.n_qubits) != self.n_qubits or self.n_qubits < 1:
            raise InvalidConfigError(f"n_qubits must be a positive integer, got {self.n_qubits!r}")
        if not np.isfinite(self.gamma) or self.gamma <= 0:
            raise InvalidConfigError(f"gamma must be positive, got {self.gamma!r}")
        if self.positions is not None:
            pos = np.asarray(self.positions, dtype=float)
            if pos.shape != (self.n_qubits,):
                raise InvalidConfigError(
                    f"positions must have length {self.n_qubits}, got shape {pos.shape}"
                )
            if not np.all(np.isfinite(pos)) or np.any(np.diff(pos) <= 0):
                raise InvalidConfigError("positions must be finite and strictly increasing")
        elif not np.isfinite(self.kd):
            raise InvalidConfigError(f"kd must be finite, got {self.kd!r}")
        # validates the initial state eagerly
        self.initial_state()

    @classmethod
    def from_kd_pi(cls, n_qubits: int, kd_pi: float, **kwargs) -> "ChainConfig":
        """Build a config with ``kd`` given as a multiple of pi."""
        return cls(n_qubits=n_qubits, kd=kd_pi * np.pi, **kwargs)

    @property
    def phases(self) -> np.ndarray:
        """Phase coordinates ``k x_n`` of the qubits."""
        if self.positions is not None:
            return np.asarray(self.positions, dtype=float)
        return np.arange(self.n_qubits) * float(self.kd)

    def initial_state(self) -> np.ndarray:
        return initial_state(self.n_qubits, self.excited)


def initial_state(n_qubits: int, excited: Union[int, Sequence[complex]]) -> np.ndarray:
    """Complex initial amplitude vector from a 1-based index or explicit vector."""
    if isinstance(excited, (int, np.integer)):
        if not 1 <= excited <= n_qubits:
            raise InvalidConfigError(f"excited index {excited} outside 1..{n_qubits}")
        vec = np.zeros(n_qubits, dtype=complex)
        vec[excited - 1] = 1.0
        return vec
    vec = np.asarray(excited, dtype=complex)
    if vec.shape != (n_qubits,):
        raise InvalidConfigError(f"initial vector must have length {n_qubits}, got shape {vec.shape}")
    if abs(np.linalg.norm(vec) - 1.0) > NORM_TOL:
        raise InvalidConfigError(f"initial vector must have unit norm, got {np.linalg.norm(vec)!r}")
    return vec


@dataclass(frozen=True, eq=False)
class EffectiveMatrix:
    """Complex-symmetric generator of the amplitude dynamics."""

    entries: np.ndarray
    gamma: float = 1.0

    @property
    def order(self) -> int:
        return self.entries.shape[0]

    def __matmul__(self, other):
        return self.entries @ other


def _phase_factors(separations: np.ndarray) -> np.ndarray:
    """exp(i s), with cos/sin snapped to zero when within rounding of the angle.

    The snap makes chains with kd a multiple of pi/2 exactly real/imaginary.
    """
    tol = 8 * np.spacing(np.maximum(np.abs(separations), 1.0))
    c = np.cos(separations)
    s = np.sin(separations)
    c = np.where(np.abs(c) < tol, 0.0, c)
    s = np.where(np.abs(s) < tol, 0.0, s)
    return c + 1j * s


def _separations(config: ChainConfig) -> np.ndarray:
    phi = config.phases
    return np.abs(phi[:, None] - phi[None, :])


def build_effective_matrix(config: ChainConfig) -> EffectiveMatrix:
    """Assemble ``M`` for the given chain (general or equidistant positions)."""
    half = 0.5 * config.gamma
    m = -half * _phase_factors(_separations(config))
    np.fill_diagonal(m, -half)
    m.setflags(write=False)
    return EffectiveMatrix(entries=m, gamma=config.gamma)


def coherent_dissipative_rates(config: ChainConfig) -> tuple[np.ndarray, np.ndarray]:
    """Coherent exchange ``J`` and dissipative ``G`` rate matrices.

    ``J_mn = Gamma sin(k|x_m - x_n|) / 2`` and ``G_mn = Gamma cos(k|x_m - x_n|)``,
    so that off the diagonal ``M_nm = -(G_nm / 2 + i J_nm)``.
    """
    z = _phase_factors(_separations(config))
    return 0.5 * config.gamma * z.imag, config.gamma * z.real
