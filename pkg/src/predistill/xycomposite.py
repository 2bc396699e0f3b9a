"""Symmetric composite pulses for X-Y control under a global pulse-area error.

A sequence with half-length ``n`` is the palindrome

    theta_{phi1} pi_{phi2} ... pi_{phin} ... pi_{phi2} theta_{phi1}

(``2n - 1`` pulses). Every pulse area is scaled by ``1 + eps``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from math import factorial

import numpy as np
from scipy.optimize import brentq, least_squares

from .su2core import GateTarget, Convention, compose, frobenius_fidelity, rotation

TWO_PI = 2 * np.pi

#: norms of Taylor coefficients below this count as cancelled
CERT_TOL = 1e-6


class SynthesisError(RuntimeError):
    """Raised when a solver cannot produce a sequence."""


def wrap_phase(phi: float) -> float:
    """Map an angle to ``[0, 2 pi)``."""
    return float(np.mod(phi, TWO_PI))


def wrap_signed(phi: float) -> float:
    """Map an angle to ``(-pi, pi]``."""
    out = -np.mod(-phi + np.pi, TWO_PI) + np.pi
    return float(out)


@dataclass(frozen=True)
class SymmetricSequence:
    """Outer area ``theta`` and half-train phases ``phases = (phi1, ..., phin)``.

    ``n == 1`` is the degenerate single pulse ``theta_{phi1}``.
    """

    theta: float
    phases: tuple
    target: GateTarget | None = None
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "phases", tuple(float(p) for p in self.phases))
        if not self.phases:
            raise ValueError("a sequence needs at least one phase")

    @property
    def n(self) -> int:
        return len(self.phases)

    @property
    def pulse_count(self) -> int:
        return 2 * self.n - 1

    def pulses(self) -> list[tuple[float, float]]:
        """Expanded ``(area, phase)`` list, leftmost factor first."""
        if self.n == 1:
            return [(self.theta, self.phases[0])]
        inner = list(self.phases[1:]) + list(self.phases[-2:0:-1])
        return (
            [(self.theta, self.phases[0])]
            + [(np.pi, p) for p in inner]
            + [(self.theta, self.phases[0])]
        )

    def phase_offsets(self) -> tuple:
        """Phases relative to the target axis, wrapped to ``(-pi, pi]``."""
        ref = self.target.phi_star if self.target is not None else 0.0
        return tuple(wrap_signed(p - ref) for p in self.phases)


def single_pulse(target: GateTarget) -> SymmetricSequence:
    return SymmetricSequence(target.theta_star, (target.phi_star,), target, "single")


def apply_with_error(seq: SymmetricSequence, eps: float) -> np.ndarray:
    """Composite unitary with every area scaled by ``1 + eps``."""
    return compose(rotation(a * (1 + eps), p) for a, p in seq.pulses())


def taylor_coefficients(seq: SymmetricSequence, order: int) -> list[np.ndarray]:
    """Exact coefficients ``C_k`` of ``U(eps) = sum_k C_k eps^k`` up to ``order``.

    Each pulse contributes ``(a/2)^k / k!`` times the rotation matrix with its
    half-angle advanced by ``k pi / 2``; the product is a Cauchy convolution.
    """
    acc = [np.eye(2, dtype=complex)] + [np.zeros((2, 2), complex) for _ in range(order)]
    for a, p in seq.pulses():
        terms = [
            (a / 2) ** k / factorial(k) * rotation(a + k * np.pi, p) for k in range(order + 1)
        ]
        acc = [sum(acc[i] @ terms[k - i] for i in range(k + 1)) for k in range(order + 1)]
    return acc


# ---------------------------------------------------------------------------
# robustness certification
# ---------------------------------------------------------------------------

# central stencils: offsets and weights (before division by h^k)
_STENCILS = {
    1: ((-1, 1), (-0.5, 0.5)),
    2: ((-1, 0, 1), (1.0, -2.0, 1.0)),
    3: ((-2, -1, 1, 2), (-0.5, 1.0, -1.0, 0.5)),
    4: ((-2, -1, 0, 1, 2), (1.0, -4.0, 6.0, -4.0, 1.0)),
}

# Round-off grows like h^-k, so higher orders need wider steps.
_STEPS = {1: (1e-3, 5e-4), 2: (1e-3, 5e-4), 3: (1e-2, 5e-3), 4: (1e-2, 5e-3)}


@dataclass(frozen=True)
class RobustnessReport:
    orders: list = field(default_factory=list)  # [(k, norm of k-th Taylor coefficient)]
    verified_order: int = 0
    tolerance: float = CERT_TOL


def _central_difference(f, k, h):
    offsets, weights = _STENCILS[k]
    return sum(w * f(o * h) for o, w in zip(offsets, weights)) / h**k


def finite_difference_coefficient(f, k: int) -> np.ndarray:
    """Richardson-extrapolated estimate of ``f^(k)(0) / k!``."""
    h1, h2 = _STEPS[k]
    d1 = _central_difference(f, k, h1)
    d2 = _central_difference(f, k, h2)
    ratio = (h1 / h2) ** 2
    return (ratio * d2 - d1) / (ratio - 1) / factorial(k)


def certify(f, max_order: int = 4, tol: float = CERT_TOL) -> RobustnessReport:
    """Finite-difference robustness report for any ``eps -> U(eps)`` map."""
    if not 1 <= max_order <= 4:
        raise ValueError("max_order must be between 1 and 4")
    orders = []
    verified = 0
    still_flat = True
    for k in range(1, max_order + 1):
        norm = float(np.linalg.norm(finite_difference_coefficient(f, k), 2))
        orders.append((k, norm))
        if still_flat and norm < tol:
            verified = k
        else:
            still_flat = False
    return RobustnessReport(orders, verified, tol)


def derivative_report(seq: SymmetricSequence, max_order: int = 4) -> RobustnessReport:
    return certify(lambda e: apply_with_error(seq, e), max_order)


# ---------------------------------------------------------------------------
# three pulses
# ---------------------------------------------------------------------------

def _bracketed_roots(f, lo, hi, n=4001):
    grid = np.linspace(lo, hi, n)
    vals = np.array([f(x) for x in grid])
    roots = []
    for i in range(n - 1):
        if vals[i] == 0.0:
            roots.append(grid[i])
        elif vals[i] * vals[i + 1] < 0:
            roots.append(brentq(f, grid[i], grid[i + 1], xtol=1e-15, rtol=1e-15))
    return roots


def solve_three_pulse(target: GateTarget) -> list[SymmetricSequence]:
    """First-order robust three-pulse sequences for an equatorial target.

    Returns the two mirror branches ``phi2 - phi1 = +x`` and ``-x``; the
    positive one comes first.
    """
    if target.convention is not Convention.XY:
        raise ValueError("three-pulse synthesis needs an XY-convention target")
    ts, ps = target.theta_star, target.phi_star
    rhs = 2 / np.pi * np.cos(ts / 2)
    roots = _bracketed_roots(lambda t: np.sinc(t / np.pi) - rhs, 1e-9, TWO_PI)
    roots = [t for t in roots if t >= np.pi / 2]
    if not roots:
        raise SynthesisError("no three-pulse solution in branch")
    theta = roots[0]
    x_abs = np.arccos(np.clip(-np.pi / (2 * theta), -1, 1))
    out = []
    for x in (x_abs, -x_abs):
        e = np.sin(ts / 2) * np.exp(1j * ps) / (np.cos(theta) * np.cos(x) + 1j * np.sin(x))
        phi1 = np.angle(e)
        seq = SymmetricSequence(
            theta, (wrap_phase(phi1), wrap_phase(phi1 + x)), target, "three-pulse"
        )
        out.append(seq)
    return out


# ---------------------------------------------------------------------------
# five pulses
# ---------------------------------------------------------------------------

def _beta_of_alpha(alpha):
    # positive branch: beta = pi - arctan(sin a / (4 + 5 cos a))
    return np.pi - np.arctan(np.sin(alpha) / (4 + 5 * np.cos(alpha)))


def _theta_of(alpha, beta):
    return -np.pi / 2 * (1 + 2 * np.cos(alpha)) / np.cos(alpha + beta)


def alpha_condition(alpha, theta_star):
    """Self-consistency function whose zeros fix ``alpha``."""
    g = np.cos(alpha - np.arctan(np.sin(alpha) / (4 + 5 * np.cos(alpha))))
    return np.cos(theta_star / 2) + g * np.sin(np.pi / 2 * (1 + 2 * np.cos(alpha)) / g)


def five_pulse_residuals(alpha, beta, theta, phi1, theta_star, phi_star) -> np.ndarray:
    """Residuals of the five defining conditions (the complex one by modulus).

    The sign of the ``i sin(alpha + beta)`` term follows the rotation
    convention of :func:`~predistill.su2core.rotation`.
    """
    ab = alpha + beta
    r1 = np.cos(ab) * np.sin(theta) - np.cos(theta_star / 2)
    r2 = abs(
        -np.exp(1j * phi1) * (np.cos(theta) * np.cos(ab) - 1j * np.sin(ab))
        - np.exp(1j * phi_star) * np.sin(theta_star / 2)
    )
    r3 = np.pi + 2 * np.pi * np.cos(alpha) + 2 * theta * np.cos(ab)
    r4 = (
        4 * np.pi * theta
        + 4 * np.pi**2 * np.cos(beta)
        + 2 * np.pi**2 * np.cos(beta - alpha)
        + 8 * np.pi * theta * np.cos(alpha)
        + (3 * np.pi**2 + 4 * theta**2) * np.cos(ab)
    )
    r5 = 4 * np.sin(beta) + 2 * np.sin(beta - alpha) + 3 * np.sin(ab)
    return np.array([r1, r2, r3, r4, r5])


def five_pulse_from_alpha(alpha: float, target: GateTarget) -> SymmetricSequence:
    beta = _beta_of_alpha(alpha)
    theta = _theta_of(alpha, beta)
    # negative branch of the phi2 relation
    phi2 = target.phi_star - beta + np.arctan(np.tan(alpha + beta) / np.cos(theta))
    return SymmetricSequence(
        theta,
        (wrap_phase(phi2 + beta), wrap_phase(phi2), wrap_phase(phi2 + alpha)),
        target,
        "five-pulse",
    )


def solve_five_pulse(target: GateTarget, n_scan: int = 20001) -> list[SymmetricSequence]:
    """Second-order robust five-pulse sequences.

    The alpha condition is scanned over ``(-pi, pi]`` and each sign change is
    polished by bisection. Spurious sign changes (poles of the condition) and
    roots whose area leaves ``(0, 3 pi]`` are rejected by composing the
    sequence. Solutions with ``alpha > 0`` come first.
    """
    if target.convention is not Convention.XY:
        raise ValueError("five-pulse synthesis needs an XY-convention target")
    f = lambda a: alpha_condition(a, target.theta_star)
    grid = np.linspace(-np.pi, np.pi, n_scan)
    with np.errstate(all="ignore"):
        vals = f(grid)
    goal = target.matrix()
    found = []
    for i in range(n_scan - 1):
        v0, v1 = vals[i], vals[i + 1]
        if not (np.isfinite(v0) and np.isfinite(v1)) or v0 * v1 > 0:
            continue
        with np.errstate(all="ignore"):
            alpha = brentq(f, grid[i], grid[i + 1], xtol=1e-15, rtol=1e-15)
        if abs(f(alpha)) > 1e-9:
            continue
        seq = five_pulse_from_alpha(alpha, target)
        if not (0 < seq.theta <= 3 * np.pi):
            continue
        if np.max(np.abs(apply_with_error(seq, 0.0) - goal)) > 1e-9:
            continue
        coeffs = taylor_coefficients(seq, 2)
        if max(np.max(np.abs(c)) for c in coeffs[1:]) > 1e-9:
            continue
        found.append((alpha, seq))
    if not found:
        raise SynthesisError("no five-pulse solution")
    found.sort(key=lambda t: (t[0] <= 0, abs(t[0])))
    return [s for _, s in found]


# ---------------------------------------------------------------------------
# seven pulses
# ---------------------------------------------------------------------------

def _seven_residual(x, goal, order):
    seq = SymmetricSequence(x[0], x[1:])
    c = taylor_coefficients(seq, order)
    mats = [c[0] - goal] + c[1:]
    return np.concatenate([np.r_[m.real.ravel(), m.imag.ravel()] for m in mats])


def solve_seven_pulse(
    target: GateTarget,
    seed: SymmetricSequence | None = None,
    restarts: int = 50,
    rng_seed: int = 0,
) -> SymmetricSequence:
    """Third-order robust seven-pulse sequence by damped least squares.

    Solutions are not unique; the returned one is only guaranteed to pass the
    robustness certification.
    """
    if target.convention is not Convention.XY:
        raise ValueError("seven-pulse synthesis needs an XY-convention target")
    goal = target.matrix()
    rng = np.random.default_rng(rng_seed)
    starts = []
    if seed is not None:
        starts.append(np.r_[seed.theta, seed.phases])
    starts += [
        np.r_[rng.uniform(0.2, TWO_PI), rng.uniform(0, TWO_PI, 4)] for _ in range(restarts)
    ]
    best = np.inf
    for x0 in starts:
        sol = least_squares(
            _seven_residual, x0, args=(goal, 3), method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15
        )
        res = float(np.max(np.abs(sol.fun)))
        best = min(best, res)
        if res > 1e-12 or sol.x[0] <= 0:
            continue
        seq = SymmetricSequence(
            sol.x[0], tuple(wrap_phase(p) for p in sol.x[1:]), target, "seven-pulse"
        )
        if derivative_report(seq, 4).verified_order >= 3:
            return seq
    raise SynthesisError(f"seven-pulse optimizer stagnated (best residual {best:.3e})")


def solve(target: GateTarget, pulses: int, seed=None) -> SymmetricSequence:
    """Preferred sequence of the requested length (table branch)."""
    if pulses % 2 == 0:
        raise ValueError("symmetric scheme requires odd pulse count")
    if pulses == 1:
        return single_pulse(target)
    if pulses == 3:
        return solve_three_pulse(target)[0]
    if pulses == 5:
        return solve_five_pulse(target)[0]
    if pulses == 7:
        return solve_seven_pulse(target, seed)
    raise ValueError(f"no solver for {pulses} pulses")


# published seven-pulse starting points (radians)
SEVEN_PULSE_SEEDS = {
    "T": SymmetricSequence(1.78928, (3.4837, 4.23899, 1.15951, 0.894556)),
    "H": SymmetricSequence(1.72181, (2.76539, 3.39854, 0.30736, 0.08854)),
}


# ---------------------------------------------------------------------------
# tables
# ---------------------------------------------------------------------------

class TableKind(str, enum.Enum):
    THREE_PULSE = "three"
    FIVE_PULSE = "five"


def table_rows(kind: TableKind) -> list[tuple[float, tuple]]:
    """Rows ``(theta*/pi, (theta/pi, (phi_i - phi*)/pi ...))`` for ``theta* = k pi/10``."""
    kind = TableKind(kind)
    rows = []
    for k in range(1, 11):
        target = GateTarget(k * np.pi / 10, 0.0)
        if kind is TableKind.THREE_PULSE:
            seq = solve_three_pulse(target)[0]
        else:
            seq = solve_five_pulse(target)[0]
        params = (seq.theta / np.pi,) + tuple(p / np.pi for p in seq.phase_offsets())
        rows.append((k / 10, params))
    return rows


def format_table(rows) -> str:
    lines = []
    for ts, params in rows:
        head, rest = params[0], params[1:]
        lines.append(f"{ts:4.1f} | ({head:.5f} ; " + " , ".join(f"{p:.5f}" for p in rest) + ")")
    return "\n".join(lines)


def exact_match(seq: SymmetricSequence) -> float:
    """Frobenius fidelity of the error-free sequence to its target."""
    return frobenius_fidelity(apply_with_error(seq, 0.0), seq.target.matrix())
