"""Closed-form distillation curves, thresholds and iteration counting."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from .su2core import T_CLIFFORD

DEFAULT_TARGET = 1e-15

#: sentinel for inputs at or above the code threshold
DIVERGENT = None


def _check_prob(eps, upper=1.0):
    if not (0.0 <= eps <= upper):
        raise ValueError(f"error rate {eps!r} outside [0, {upper}]")


def _five_qubit_terms(eps):
    q = 1.0 - eps
    num = eps**5 + 5 * eps**2 * q**3
    return num, num + 5 * eps**3 * q**2 + q**5


def five_qubit_output_error(eps: float) -> float:
    """Output error of one round of the five-qubit T-state protocol."""
    _check_prob(eps)
    num, den = _five_qubit_terms(eps)
    return num / den


def five_qubit_success_prob(eps: float) -> float:
    _check_prob(eps)
    return _five_qubit_terms(eps)[1] / 6.0


def fifteen_to_one_output_error(eps: float) -> float:
    """Output error of one round of 15-to-1 H-state distillation."""
    _check_prob(eps, 0.5)
    q = 1.0 - 2.0 * eps
    return (1 - 15 * q**7 + 15 * q**8 - q**15) / (2 * (1 + 15 * q**8))


FIVE_QUBIT_THRESHOLD = 0.5 * (1.0 - np.sqrt(3.0 / 7.0))


@lru_cache(maxsize=None)
def fifteen_to_one_threshold() -> float:
    """Smallest positive fixed point of the 15-to-1 map (about 0.14148)."""
    f = lambda e: fifteen_to_one_output_error(e) - e
    grid = np.linspace(1e-3, 0.49, 4000)
    vals = np.array([f(e) for e in grid])
    i = int(np.argmax(np.sign(vals[:-1]) != np.sign(vals[1:])))
    return brentq(f, grid[i], grid[i + 1], xtol=1e-15, rtol=1e-15)


class CodeKind(enum.Enum):
    FIVE_QUBIT_T = "five_qubit_t"
    FIFTEEN_TO_ONE_H = "fifteen_to_one_h"


@dataclass(frozen=True)
class DistillationCode:
    kind: CodeKind

    @property
    def arity(self) -> int:
        return 5 if self.kind is CodeKind.FIVE_QUBIT_T else 15

    @property
    def threshold_error(self) -> float:
        if self.kind is CodeKind.FIVE_QUBIT_T:
            return FIVE_QUBIT_THRESHOLD
        return fifteen_to_one_threshold()

    def output_error(self, eps: float) -> float:
        if self.kind is CodeKind.FIVE_QUBIT_T:
            return five_qubit_output_error(eps)
        return fifteen_to_one_output_error(eps)


FIVE_QUBIT_T = DistillationCode(CodeKind.FIVE_QUBIT_T)
FIFTEEN_TO_ONE_H = DistillationCode(CodeKind.FIFTEEN_TO_ONE_H)


@dataclass(frozen=True)
class IterationPlan:
    input_error: float
    target_error: float
    levels: int | None  # None means divergent
    trajectory: tuple = field(default=())
    arity: int = 5

    @property
    def divergent(self) -> bool:
        return self.levels is None

    @property
    def qubits_per_logical(self) -> int | None:
        return None if self.levels is None else self.arity**self.levels


def iterations_to_threshold(
    eps: float, target: float = DEFAULT_TARGET, code: DistillationCode = FIVE_QUBIT_T
) -> IterationPlan:
    """Number of recursive rounds needed to bring ``eps`` down to ``target``."""
    if not (0.0 < target < 1.0):
        raise ValueError("target must lie in (0, 1)")
    if eps < 0:
        raise ValueError("error rate must be non-negative")
    traj = [eps]
    if eps <= target:
        return IterationPlan(eps, target, 0, tuple(traj), code.arity)
    if eps >= code.threshold_error:
        return IterationPlan(eps, target, DIVERGENT, tuple(traj), code.arity)
    e = eps
    while e > target:
        e = code.output_error(e)
        traj.append(e)
    return IterationPlan(eps, target, len(traj) - 1, tuple(traj), code.arity)


def required_levels(eps: float, target: float = DEFAULT_TARGET, code=FIVE_QUBIT_T):
    return iterations_to_threshold(eps, target, code).levels


def invert_output_error(value: float, code: DistillationCode = FIVE_QUBIT_T) -> float:
    """Input error whose one-round output equals ``value`` (monotone branch)."""
    hi = code.threshold_error
    if not (0.0 <= value <= hi):
        raise ValueError("value outside the invertible range")
    if value == 0.0:
        return 0.0
    return brentq(lambda e: code.output_error(e) - value, 0.0, hi, xtol=1e-300, rtol=1e-15)


def transition_thresholds(
    code: DistillationCode = FIVE_QUBIT_T, target: float = DEFAULT_TARGET, count: int = 10
) -> list[float]:
    """Input errors at which the required level count steps from ``i-1`` to ``i``.

    The first entry is ``target`` itself; each later one is the preimage of the
    previous under one round.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    out = [target]
    for _ in range(count - 1):
        out.append(invert_output_error(out[-1], code))
    return out


def _is_density_matrix(rho, tol=1e-10) -> bool:
    if rho.shape != (2, 2):
        return False
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        return False
    if abs(np.trace(rho) - 1) > tol:
        return False
    return np.min(np.linalg.eigvalsh((rho + rho.conj().T) / 2)) >= -tol


def dephase(rho) -> np.ndarray:
    """Twirl over ``{I, T, T^dag}``; the output is diagonal in the T basis."""
    rho = np.asarray(rho, dtype=complex)
    if not _is_density_matrix(rho):
        raise ValueError("input is not a valid density matrix")
    t = T_CLIFFORD
    return (rho + t @ rho @ t.conj().T + t.conj().T @ rho @ t) / 3.0
