"""Characteristic roots, collective modes and their expansions.

The characteristic roots ``lambda_i`` are the eigenvalues of the amplitude
generator ``M``. Complex energies follow as ``E_bar = i lambda`` so that
``E_i = -Im lambda_i`` (detuning) and ``Gamma_i = -2 Re lambda_i`` (decay rate).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chain import EffectiveMatrix
from .errors import DefectiveBasisError, DegenerateSpectrumError, SolverError

DARK_TOL = 1e-8
RESIDUAL_TOL = 1e-9
CONDITION_LIMIT = 1e10
SIMPLE_SEPARATION = 1e-8

DARK = "dark"
SUBRADIANT = "subradiant"
SUPERRADIANT = "superradiant"


def classify_rate(rate: float, gamma: float = 1.0, tol: float = DARK_TOL) -> str:
    # a mode decaying at exactly Gamma (N = 1) is reported as superradiant
    if rate < tol * gamma:
        return DARK
    if rate < gamma * (1 - 1e-12):
        return SUBRADIANT
    return SUPERRADIANT


@dataclass(frozen=True, eq=False)
class ModeSet:
    """Sorted roots of ``M`` with their right eigenvectors (columns)."""

    roots: np.ndarray
    eigenvectors: np.ndarray
    gamma: float = 1.0

    @property
    def size(self) -> int:
        return len(self.roots)

    @property
    def complex_energies(self) -> np.ndarray:
        return 1j * self.roots

    @property
    def energies(self) -> np.ndarray:
        return -self.roots.imag

    @property
    def decay_rates(self) -> np.ndarray:
        return -2.0 * self.roots.real

    @property
    def classification(self) -> list[str]:
        return [classify_rate(r, self.gamma) for r in self.decay_rates]

    def subradiance_rank(self) -> np.ndarray:
        """1-based rank of each mode by ascending decay rate."""
        order = np.argsort(self.decay_rates, kind="stable")
        rank = np.empty(self.size, dtype=int)
        rank[order] = np.arange(1, self.size + 1)
        return rank


def _sort_order(roots: np.ndarray) -> np.ndarray:
    # conjugate partners differ in Re only by rounding; quantize before tie-break
    re = np.round(roots.real, 10)
    im = np.round(roots.imag, 10)
    return np.lexsort((im, re))


def characteristic_roots(matrix: EffectiveMatrix) -> ModeSet:
    """Eigen-decompose ``M``; roots sorted by ascending Re, then ascending Im."""
    m = np.asarray(matrix.entries)
    try:
        w, v = np.linalg.eig(m)
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"eigensolver did not converge: {exc}") from exc
    order = _sort_order(w)
    w = w[order]
    v = v[:, order]
    residual = np.linalg.norm(m @ v - v * w, axis=0)
    scale = np.linalg.norm(v, axis=0)
    if np.any(residual > RESIDUAL_TOL * scale):
        raise SolverError(f"eigenpair residual {residual.max():.3e} exceeds {RESIDUAL_TOL}")
    w.setflags(write=False)
    v.setflags(write=False)
    return ModeSet(roots=w, eigenvectors=v, gamma=matrix.gamma)


def dark_state_count(modes: ModeSet, tol: float = DARK_TOL) -> int:
    """Number of modes whose decay rate is below ``tol * Gamma``."""
    return int(np.count_nonzero(modes.decay_rates < tol * modes.gamma))


@dataclass(frozen=True, eq=False)
class ModalExpansion:
    """``beta_n(t) = sum_j b[j, n] exp(lambda_j t)``."""

    coefficients: np.ndarray  # (mode, qubit)
    roots: np.ndarray

    def amplitudes(self, times) -> np.ndarray:
        t = np.atleast_1d(np.asarray(times, dtype=float))
        return np.exp(np.outer(t, self.roots)) @ self.coefficients

    def mode_weights(self) -> np.ndarray:
        """Largest per-qubit magnitude carried by each mode."""
        return np.abs(self.coefficients).max(axis=1)


def modal_expansion(modes: ModeSet, initial) -> ModalExpansion:
    """Solve for the modal coefficients that reproduce ``initial`` at t = 0."""
    v = modes.eigenvectors
    cond = np.linalg.cond(v)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise DefectiveBasisError(
            f"eigenvector matrix condition number {cond:.3e} exceeds {CONDITION_LIMIT:.0e}"
        )
    initial = np.asarray(initial, dtype=complex)
    if initial.shape != (modes.size,):
        raise ValueError(f"initial vector must have length {modes.size}")
    c = np.linalg.solve(v, initial)
    return ModalExpansion(coefficients=(v * c).T, roots=modes.roots)


@dataclass(frozen=True, eq=False)
class CollectiveStateSet:
    """Bi-orthogonally normalized collective states and their amplitudes.

    ``alphas[:, i]`` is state ``i``; normalization uses the complex square
    ``sum_n alpha_n**2 = 1`` (no conjugation).
    """

    alphas: np.ndarray
    amplitudes: np.ndarray
    roots: np.ndarray

    def reconstruct(self, times) -> np.ndarray:
        """Amplitudes ``beta_n(t) = sum_i exp(-i E_bar_i t) A_i alpha_n^(i)``."""
        t = np.atleast_1d(np.asarray(times, dtype=float))
        energies = 1j * self.roots
        return (np.exp(-1j * np.outer(t, energies)) * self.amplitudes) @ self.alphas.T

    def mode_weights(self) -> np.ndarray:
        return np.abs(self.alphas * self.amplitudes).max(axis=0)


def collective_state_decomposition(modes: ModeSet, initial) -> CollectiveStateSet:
    """Decompose ``initial`` over the collective states of a simple spectrum."""
    roots = modes.roots
    if modes.size > 1:
        gaps = np.abs(roots[:, None] - roots[None, :])
        gaps[np.diag_indices_from(gaps)] = np.inf
        if gaps.min() <= SIMPLE_SEPARATION * modes.gamma:
            raise DegenerateSpectrumError(
                f"degenerate dark subspace: roots separated by {gaps.min():.3e}"
            )
    v = np.array(modes.eigenvectors, dtype=complex)
    sq = np.sum(v * v, axis=0)
    if np.any(np.abs(sq) < 1e-10):
        raise DegenerateSpectrumError("self-orthogonal eigenvector (exceptional point)")
    alphas = v / np.sqrt(sq)
    initial = np.asarray(initial, dtype=complex)
    amplitudes = np.linalg.solve(alphas, initial)
    return CollectiveStateSet(alphas=alphas, amplitudes=amplitudes, roots=roots)


def reduced_central_cubic_roots(gamma: float = 1.0) -> np.ndarray:
    """Roots of ``lambda (lambda + Gamma)(lambda + Gamma/2) + Gamma^3 / 2 = 0``.

    These are the modes excited when the central qubit of a five-qubit chain
    with kd = pi/2 starts excited.
    """
    coeffs = [1.0, 1.5 * gamma, 0.5 * gamma**2, 0.5 * gamma**3]
    roots = np.roots(coeffs).astype(complex)
    return roots[_sort_order(roots)]


def power_law_fit(x, y) -> tuple[float, float, float]:
    """Least-squares fit of ``log y = p log x + c``; returns (p, c, R^2)."""
    lx = np.log(np.asarray(x, dtype=float))
    ly = np.log(np.asarray(y, dtype=float))
    p, c = np.polyfit(lx, ly, 1)
    resid = ly - (p * lx + c)
    total = np.sum((ly - ly.mean()) ** 2)
    r2 = 1.0 - np.sum(resid**2) / total if total > 0 else 1.0
    return float(p), float(c), float(r2)
