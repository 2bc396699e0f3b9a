"""Single-qubit unitary algebra, magic-gate targets and gate-quality metrics.

Unitaries are plain ``(2, 2)`` complex numpy arrays. Products follow the
operator convention: the first factor in a list is the leftmost matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

SQRT3 = np.sqrt(3.0)

IDENTITY = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)

# cos^2(2 beta) = 1/3
MAGIC_BETA = 0.5 * np.arccos(1.0 / SQRT3)

#: Clifford gate whose eigenstates are the T-type magic states.
T_CLIFFORD = np.exp(1j * np.pi / 4) / np.sqrt(2) * np.array([[1, 1], [1j, -1j]])


class Convention(str, Enum):
    XY = "XY"
    XZ = "XZ"


def is_unitary(u: np.ndarray, tol: float = 1e-10) -> bool:
    u = np.asarray(u)
    return u.shape == (2, 2) and np.max(np.abs(u.conj().T @ u - IDENTITY)) <= tol


def as_unitary(u, tol: float = 1e-10) -> np.ndarray:
    """Return ``u`` as a complex (2, 2) array, raising if it is not unitary."""
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {u.shape}")
    err = np.max(np.abs(u.conj().T @ u - IDENTITY))
    if err > tol:
        raise ValueError(f"matrix is not unitary (|U'U - I|_max = {err:.3e})")
    if abs(abs(np.linalg.det(u)) - 1.0) > tol:
        raise ValueError("determinant does not have unit modulus")
    return u


# ---------------------------------------------------------------------------
# closed-form SU(2) exponentials
# ---------------------------------------------------------------------------

def _sinc(r):
    return np.sinc(r / np.pi)


def su2_exp(a) -> np.ndarray:
    """``exp(i a.sigma)`` for a real 3-vector ``a = (ax, ay, az)``."""
    ax, ay, az = (float(v) for v in a)
    r = np.sqrt(ax * ax + ay * ay + az * az)
    c, s = np.cos(r), _sinc(r)
    return np.array(
        [[c + 1j * s * az, s * (1j * ax + ay)], [s * (1j * ax - ay), c - 1j * s * az]]
    )


def su2_exp_derivative(a, da) -> np.ndarray:
    """Directional derivative of :func:`su2_exp` at ``a`` along ``da``."""
    a = np.asarray(a, dtype=float)
    da = np.asarray(da, dtype=float)
    r = np.linalg.norm(a)
    s = _sinc(r)
    if r < 1e-4:
        # (r cos r - sin r) / r^3
        ds_over_r = -1.0 / 3.0 + r * r / 30.0
    else:
        ds_over_r = (r * np.cos(r) - np.sin(r)) / r**3
    proj = float(a @ da)
    dc = -s * proj
    # d(s a) = (ds/dr)(a.da / r) a + s da
    v = ds_over_r * proj * a + s * da
    vx, vy, vz = v
    return np.array(
        [[dc + 1j * vz, 1j * vx + vy], [1j * vx - vy, dc - 1j * vz]]
    )


# ---------------------------------------------------------------------------
# gate parameterizations
# ---------------------------------------------------------------------------

def rotation(theta: float, phi: float) -> np.ndarray:
    """Equatorial rotation by ``theta`` about the axis at azimuth ``phi``."""
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array(
        [[c, -1j * np.exp(-1j * phi) * s], [-1j * np.exp(1j * phi) * s, c]]
    )


def rotation_with_detuning(theta: float, delta: float, phi: float) -> np.ndarray:
    """General single-qubit gate with an extra diagonal phase ``delta``."""
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array(
        [
            [np.exp(1j * delta) * c, -1j * np.exp(-1j * phi) * s],
            [-1j * np.exp(1j * phi) * s, np.exp(-1j * delta) * c],
        ]
    )


def compose(factors) -> np.ndarray:
    """Ordered product; ``factors[0]`` is the leftmost matrix."""
    factors = list(factors)
    if not factors:
        raise ValueError("empty product")
    out = np.asarray(factors[0], dtype=complex)
    for f in factors[1:]:
        out = out @ f
    return out


# ---------------------------------------------------------------------------
# targets and magic frames
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MagicFrame:
    """Orthonormal pair (ideal state, orthogonal error state)."""

    t0: np.ndarray
    t1: np.ndarray
    convention: Convention = Convention.XY

    def __post_init__(self):
        t0 = np.asarray(self.t0, dtype=complex)
        t1 = np.asarray(self.t1, dtype=complex)
        for name, v in (("t0", t0), ("t1", t1)):
            if abs(np.vdot(v, v) - 1) > 1e-12:
                raise ValueError(f"{name} is not normalized")
        if abs(np.vdot(t0, t1)) > 1e-12:
            raise ValueError("frame vectors are not orthogonal")
        object.__setattr__(self, "t0", t0)
        object.__setattr__(self, "t1", t1)

    @classmethod
    def from_gate(cls, gate, convention=Convention.XY) -> "MagicFrame":
        gate = np.asarray(gate, dtype=complex)
        return cls(gate[:, 0].copy(), gate[:, 1].copy(), Convention(convention))


def t_gate_xy() -> np.ndarray:
    b = MAGIC_BETA
    return np.array(
        [
            [np.cos(b), -np.exp(-1j * np.pi / 4) * np.sin(b)],
            [np.exp(1j * np.pi / 4) * np.sin(b), np.cos(b)],
        ]
    )


def t_gate_xz() -> np.ndarray:
    b = MAGIC_BETA
    return np.array(
        [
            [np.cos(b), np.exp(1j * np.pi / 4) * np.sin(b)],
            [-np.exp(-1j * np.pi / 4) * np.sin(b), np.cos(b)],
        ]
    )


def h_gate() -> np.ndarray:
    c, s = np.cos(np.pi / 8), np.sin(np.pi / 8)
    return np.array([[c, -s], [s, c]], dtype=complex)


def xy_magic_frame() -> MagicFrame:
    return MagicFrame.from_gate(t_gate_xy(), Convention.XY)


def h_magic_frame() -> MagicFrame:
    return MagicFrame.from_gate(h_gate(), Convention.XY)


@dataclass(frozen=True)
class GateTarget:
    """Target rotation ``rotation(theta_star, phi_star)`` or a fixed matrix.

    XZ-convention targets are not equatorial rotations, so they carry an
    explicit ``unitary`` instead.
    """

    theta_star: float
    phi_star: float
    convention: Convention = Convention.XY
    name: str = ""
    unitary: np.ndarray | None = None

    def matrix(self) -> np.ndarray:
        if self.unitary is not None:
            return np.asarray(self.unitary, dtype=complex)
        return rotation(self.theta_star, self.phi_star)

    def frame(self) -> MagicFrame:
        return MagicFrame.from_gate(self.matrix(), self.convention)

    def shifted(self, dphi: float) -> "GateTarget":
        return GateTarget(self.theta_star, self.phi_star + dphi, self.convention, self.name)


T_TARGET = GateTarget(2 * MAGIC_BETA, 3 * np.pi / 4, Convention.XY, "T")
H_TARGET = GateTarget(np.pi / 4, np.pi / 2, Convention.XY, "H")
# rotation angle/axis are not meaningful for the XZ target; the matrix is.
T_TARGET_XZ = GateTarget(2 * MAGIC_BETA, np.nan, Convention.XZ, "T", t_gate_xz())


def xz_magic_frame() -> MagicFrame:
    return MagicFrame.from_gate(t_gate_xz(), Convention.XZ)


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------

def frobenius_fidelity(g, target) -> float:
    """``1 - sqrt(Tr[(G - T)(G - T)^dag] / 4)``; 1 only for ``G == T``."""
    d = np.asarray(g) - np.asarray(target)
    return 1.0 - np.sqrt(np.real(np.trace(d @ d.conj().T)) / 4.0)


def phase_aligned(g, target) -> np.ndarray:
    """``g`` times the global phase that brings it closest to ``target``."""
    g = np.asarray(g, dtype=complex)
    ov = np.trace(np.asarray(target).conj().T @ g)
    if abs(ov) < 1e-300:
        return g
    return g * (abs(ov) / ov)


def phase_adjusted_frobenius_fidelity(g, target) -> float:
    """Frobenius fidelity after removing the optimal global phase."""
    return frobenius_fidelity(phase_aligned(g, target), target)


def trace_fidelity(g, target) -> float:
    """``1 - |Tr[G T^dag]| / 2``, zero for a perfect gate."""
    return 1.0 - 0.5 * abs(np.trace(np.asarray(g) @ np.asarray(target).conj().T))


def t_magic_error(g, frame: MagicFrame | None = None) -> float:
    """Population of the error state ``t1`` in ``G|0>``.

    Computed from the amplitude so that tiny errors keep full relative
    precision.
    """
    if frame is None:
        frame = xy_magic_frame()
    amp = np.vdot(frame.t1, np.asarray(g)[:, 0])
    return float(abs(amp) ** 2)


def magic_t_gate_fidelity(g, frame: MagicFrame | None = None) -> float:
    return 1.0 - np.sqrt(t_magic_error(g, frame))


def dephased_populations(theta: float, delta: float, phi: float) -> tuple[float, float]:
    """T-basis populations ``(p0, p1)`` of the twirled state ``U(theta, delta, phi)|0>``."""
    w = SQRT3 * np.sin(theta) * (np.cos(delta - phi) + np.sin(delta - phi))
    p0 = (3.0 + SQRT3 * np.cos(theta) - w) / 6.0
    p1 = (3.0 - SQRT3 * np.cos(theta) + w) / 6.0
    return float(p0), float(p1)


def min_dephased_error() -> tuple[float, float]:
    """Smallest twirled error reachable by a plain X rotation.

    At ``delta = phi = 0`` the error is ``(3 + sqrt3 (sin t - cos t)) / 6``,
    minimized where ``sin t - cos t = -sqrt2``, i.e. ``t = -pi/4``.
    """
    theta = -np.pi / 4
    return theta, dephased_populations(theta, 0.0, 0.0)[1]
