"""Gate injection with faulty T-states: the resulting channel and its fidelity."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SQRT3 = np.sqrt(3.0)

# Ideal injected phase: the channel at zero error applies diag(1, e^{-i pi/6}).
IDEAL_PHASE = -np.pi / 6


@dataclass(frozen=True)
class InputState:
    """``cos(theta)|0> + e^{i phi} sin(theta)|1>``."""

    theta: float
    phi: float = 0.0

    def vector(self) -> np.ndarray:
        return np.array([np.cos(self.theta), np.exp(1j * self.phi) * np.sin(self.theta)])


def _check_eps(eps1, eps2):
    for e in (eps1, eps2):
        if not (0.0 <= e < 0.5):
            raise ValueError(f"error rate {e!r} outside [0, 1/2)")


def coefficient_a(eps1: float, eps2: float) -> complex:
    """Coherence factor of the channel; ``|a| = 1`` only at zero error."""
    num = 1 - 1j * SQRT3 + 1j * (2j + SQRT3) * eps2 + eps1 * (-2 + 1j * SQRT3 + 4 * eps2)
    den = -2 + eps1 + eps2 - 2 * eps1 * eps2
    if den == 0:
        raise ZeroDivisionError("channel coefficient undefined at these error rates")
    return num / den


def injection_channel(psi: InputState, eps1: float, eps2: float) -> np.ndarray:
    """Output density matrix for input ``psi`` and T-state errors ``eps1, eps2``."""
    _check_eps(eps1, eps2)
    a = coefficient_a(eps1, eps2)
    c, s = np.cos(psi.theta), np.sin(psi.theta)
    off = -1j * a * np.exp(-1j * psi.phi) * c * s
    return np.array([[c * c, off], [np.conj(off), s * s]], dtype=complex)


def ideal_output(psi: InputState) -> np.ndarray:
    """Projector onto ``diag(1, e^{i IDEAL_PHASE}) |psi>``."""
    v = np.array([1.0, np.exp(1j * IDEAL_PHASE)]) * psi.vector()
    return np.outer(v, v.conj())


def validate_density_matrix(rho, herm_tol=1e-12, eig_tol=1e-10) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise ValueError("expected a 2x2 density matrix")
    if np.max(np.abs(rho - rho.conj().T)) > herm_tol:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > herm_tol:
        raise ValueError("density matrix does not have unit trace")
    if np.min(np.linalg.eigvalsh(rho)) < -eig_tol:
        raise ValueError("density matrix is not positive semidefinite")
    return rho


def _det_or_zero(rho, tol=1e-14):
    # a pure state's determinant is pure round-off; its square root would not be
    d = float(np.real(np.linalg.det(rho)))
    return 0.0 if d < tol else d


def jozsa_fidelity(rho, sigma) -> float:
    """``(Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2`` via the qubit closed form."""
    rho = validate_density_matrix(rho)
    sigma = validate_density_matrix(sigma)
    overlap = np.real(np.trace(rho @ sigma))
    dets = _det_or_zero(rho) * _det_or_zero(sigma)
    return float(np.clip(overlap + 2.0 * np.sqrt(dets), 0.0, 1.0))


def channel_fidelity(theta: float, eps1: float, eps2: float) -> float:
    """Closed-form fidelity of the channel output with the ideal output."""
    _check_eps(eps1, eps2)
    s = eps1 + eps2
    return 1.0 - 0.75 * s / (2 - s + 2 * eps1 * eps2) * np.sin(2 * theta) ** 2


def matrix_route_fidelity(psi: InputState, eps1: float, eps2: float) -> float:
    return jozsa_fidelity(injection_channel(psi, eps1, eps2), ideal_output(psi))
