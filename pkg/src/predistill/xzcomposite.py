"""Composite sequences for X-Z control with a fully correlated detuning error.

Segment ``k`` implements ``exp[i theta_k (cos phi_k X + sin phi_k Z) + i eps Z]``
and the sequence product puts segment 1 leftmost.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares, minimize

from .su2core import (
    T_TARGET_XZ,
    GateTarget,
    compose,
    phase_adjusted_frobenius_fidelity,
    su2_exp,
    su2_exp_derivative,
    xz_magic_frame,  # noqa: F401  (re-exported)
)
from .xycomposite import SynthesisError, certify

__all__ = [
    "XZSegment",
    "XZSequence",
    "xz_segment_unitary",
    "sequence_unitary",
    "sequence_derivative",
    "target_distance",
    "derivative_report",
    "two_segment_synthesis",
    "three_segment_robust_solve",
    "robust_residual",
    "single_segment_gap",
    "PRINTED_ROBUST_ROWS",
    "printed_sequence",
    "xz_magic_frame",
]


@dataclass(frozen=True)
class XZSegment:
    theta: float
    phi: float

    def generator(self, eps: float = 0.0) -> tuple:
        return (self.theta * np.cos(self.phi), 0.0, self.theta * np.sin(self.phi) + eps)


@dataclass(frozen=True)
class XZSequence:
    segments: tuple
    target: GateTarget = field(default=T_TARGET_XZ)

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))

    @classmethod
    def from_arrays(cls, thetas, phis, target=T_TARGET_XZ) -> "XZSequence":
        return cls(tuple(XZSegment(float(t), float(p)) for t, p in zip(thetas, phis)), target)

    @property
    def thetas(self) -> np.ndarray:
        return np.array([s.theta for s in self.segments])

    @property
    def phis(self) -> np.ndarray:
        return np.array([s.phi for s in self.segments])


def xz_segment_unitary(seg: XZSegment, eps: float = 0.0) -> np.ndarray:
    return su2_exp(seg.generator(eps))


def sequence_unitary(seq: XZSequence, eps: float = 0.0) -> np.ndarray:
    if not seq.segments:
        return np.eye(2, dtype=complex)
    return compose(xz_segment_unitary(s, eps) for s in seq.segments)


def sequence_derivative(seq: XZSequence) -> np.ndarray:
    """Exact ``dU/d eps`` at ``eps = 0`` by the product rule."""
    mats = [xz_segment_unitary(s) for s in seq.segments]
    out = np.zeros((2, 2), dtype=complex)
    for k, s in enumerate(seq.segments):
        d = su2_exp_derivative(s.generator(), (0.0, 0.0, 1.0))
        left = compose(mats[:k]) if k else np.eye(2)
        right = compose(mats[k + 1:]) if k + 1 < len(mats) else np.eye(2)
        out += left @ d @ right
    return out


def target_distance(seq: XZSequence, eps: float = 0.0) -> float:
    """Phase-optimized Frobenius distance ``1 - F`` to the sequence target."""
    return 1.0 - phase_adjusted_frobenius_fidelity(sequence_unitary(seq, eps), seq.target.matrix())


# ---------------------------------------------------------------------------
# two segments
# ---------------------------------------------------------------------------

def two_segment_synthesis(phi1: float) -> list[XZSequence]:
    """Exact two-segment T-gate sequences for a free first axis angle ``phi1``.

    The cot relations are used in denominator-cleared form, so every finite
    ``phi1`` is regular. Of the two sign branches only the upper one reproduces
    the gate; candidates are kept only if the composed product matches.
    """
    if not np.isfinite(phi1):
        raise ValueError("branch singularity at this phi1")
    s3 = 1.0 + np.sqrt(3.0)
    goal = T_TARGET_XZ.matrix()
    out = []
    for sign in (1.0, -1.0):
        x = s3 * np.cos(phi1) + sign * 2.0 * np.sin(phi1)
        y = s3 * np.sin(phi1) - sign * np.cos(phi1)
        if x == 0.0 and y == 0.0:
            raise ValueError("branch singularity at this phi1")
        phi2 = np.arctan2(y, x)
        theta1 = np.arctan2(1.0, -np.sin(phi1))
        theta2 = np.arctan2(1.0, np.sin(phi2))
        seq = XZSequence.from_arrays((theta1, theta2), (phi1, phi2))
        if 1.0 - phase_adjusted_frobenius_fidelity(sequence_unitary(seq), goal) < 1e-10:
            out.append(seq)
    if not out:
        raise SynthesisError("no two-segment branch reproduces the target")
    return out


# ---------------------------------------------------------------------------
# three-segment robust family
# ---------------------------------------------------------------------------

def _pack(m):
    return np.r_[m.real.ravel(), m.imag.ravel()]


def robust_residual(x, goal) -> np.ndarray:
    """Gate mismatch (after phase alignment) and first detuning derivative."""
    n = len(x) // 2
    seq = XZSequence.from_arrays(x[:n], x[n:])
    u = sequence_unitary(seq)
    ov = np.trace(goal.conj().T @ u)
    phase = abs(ov) / ov if abs(ov) > 1e-300 else 1.0
    return np.r_[_pack(phase * u - goal), _pack(phase * sequence_derivative(seq))]


def three_segment_robust_solve(
    seed: XZSequence, restarts: int = 50, rng_seed: int = 0, tol: float = 1e-9
) -> XZSequence:
    """Polish a three-segment seed onto the robust family.

    Returns the nearest converged solution; random jitters of the seed are
    tried when the seed itself does not converge.
    """
    if len(seed.segments) != 3:
        raise ValueError("seed must have 3 segments")
    goal = seed.target.matrix()
    x0 = np.r_[seed.thetas, seed.phis]
    rng = np.random.default_rng(rng_seed)
    best = np.inf
    for attempt in range(restarts + 1):
        start = x0 if attempt == 0 else x0 + rng.normal(scale=0.05 * attempt ** 0.5, size=6)
        sol = least_squares(
            robust_residual, start, args=(goal,), method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15
        )
        res = float(np.linalg.norm(sol.fun))
        best = min(best, res)
        if res <= tol:
            return XZSequence.from_arrays(sol.x[:3], sol.x[3:], seed.target)
    raise SynthesisError(f"robust solve did not converge (best residual {best:.3e})")


def derivative_report(seq: XZSequence, max_order: int = 2):
    return certify(lambda e: sequence_unitary(seq, e), max_order)


# printed representative solutions: (phi_1..3, theta_1..3)
PRINTED_ROBUST_ROWS = {
    "a": ((3.31558, -3.14159, -0.17399), (1.26121, -2.86242, -1.26121)),
    "b": ((0.49741, -0.06006, -0.41585), (3.25204, -1.56495, -1.35397)),
    "c": ((0.55004, -0.08606, -3.58545), (-3.02982, -1.56520, 1.35359)),
}


def printed_sequence(label: str) -> XZSequence:
    phis, thetas = PRINTED_ROBUST_ROWS[label]
    return XZSequence.from_arrays(thetas, phis)


def single_segment_gap(target: GateTarget = T_TARGET_XZ, n_grid: int = 121) -> float:
    """Smallest phase-optimized Frobenius distance reachable with one segment.

    Dense grid over ``theta in [-pi, pi]``, ``phi in [-pi, pi)`` followed by
    local refinement of the best few grid points.
    """
    goal = target.matrix()

    def dist(p):
        seg = XZSegment(p[0], p[1])
        return 1.0 - phase_adjusted_frobenius_fidelity(xz_segment_unitary(seg), goal)

    ts = np.linspace(-np.pi, np.pi, n_grid)
    ps = np.linspace(-np.pi, np.pi, n_grid, endpoint=False)
    vals = np.array([[dist((t, p)) for p in ps] for t in ts])
    order = np.argsort(vals, axis=None)[:10]
    best = float(vals.min())
    for idx in order:
        i, j = np.unravel_index(idx, vals.shape)
        r = minimize(dist, (ts[i], ps[j]), method="Nelder-Mead",
                     options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 4000})
        best = min(best, float(r.fun))
    return best
