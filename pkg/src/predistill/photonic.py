"""Directional-coupler model: fitted coupling/detuning, width errors, grid rounding.

Widths are handled in nanometers and lengths in micrometers at the API
boundary; the fitted polynomials take micrometers and return 1/um.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.optimize import least_squares

from . import distill
from .su2core import (
    T_TARGET_XZ,
    GateTarget,
    compose,
    phase_adjusted_frobenius_fidelity,
    su2_exp,
    su2_exp_derivative,
    t_magic_error,
    xz_magic_frame,
)
from .sweep import SweepResult, evaluate_row
from .xycomposite import SynthesisError

WIDTH_RANGE_NM = (350.0, 450.0)

# Generator scale: a segment is exp[-i GENERATOR_SCALE z (Omega X - Delta Z)].
# With z in um, a scale of 1 is what makes the tabulated designs hit the gate.
GENERATOR_SCALE = 1.0

# ascending-power coefficients
_DELTA_W2 = (0.0, 3.94502808, -18.0203544, 27.94843595, -15.42295066)
_DELTA_W1 = (0.0, -3.94502818, 18.02035521, -27.94843797, 15.42295233)
_OMEGA_S = (0.38044405, -1.48138422, 2.51783632, -1.9993113, 0.60771393)


class ExtrapolationWarning(UserWarning):
    """Width outside the range covered by the fit."""


def _check_range(*widths_um):
    lo, hi = (w / 1000.0 for w in WIDTH_RANGE_NM)
    for w in widths_um:
        if not (lo - 1e-12 <= w <= hi + 1e-12):
            warnings.warn(
                f"width {w * 1000:.3f} nm outside fitted range {WIDTH_RANGE_NM}",
                ExtrapolationWarning,
                stacklevel=3,
            )


def delta_of_widths(w1: float, w2: float) -> float:
    """Detuning (1/um) for widths in um."""
    _check_range(w1, w2)
    return float(P.polyval(w2, _DELTA_W2) + P.polyval(w1, _DELTA_W1))


def omega_of_widths(w1: float, w2: float) -> float:
    """Coupling (1/um) for widths in um; depends only on ``w1 + w2``."""
    _check_range(w1, w2)
    return float(P.polyval(w1 + w2, _OMEGA_S))


def _d_delta_common(w1, w2):
    # derivative wrt a common shift of both widths, per um
    return float(P.polyval(w2, P.polyder(_DELTA_W2)) + P.polyval(w1, P.polyder(_DELTA_W1)))


def _d_omega_common(w1, w2):
    return 2.0 * float(P.polyval(w1 + w2, P.polyder(_OMEGA_S)))


@dataclass(frozen=True)
class CouplerSegment:
    w1: float  # nm
    w2: float  # nm
    z: float  # um

    def __post_init__(self):
        if self.z < 0:
            raise ValueError("segment length must be non-negative")


@dataclass(frozen=True)
class CouplerDesign:
    segments: tuple
    grid_nm: int = 1
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))

    def as_vector(self) -> np.ndarray:
        return np.array([v for s in self.segments for v in (s.w1, s.w2, s.z)], dtype=float)

    @classmethod
    def from_vector(cls, x, grid_nm=1, label="") -> "CouplerDesign":
        x = np.asarray(x, dtype=float).reshape(-1, 3)
        return cls(tuple(CouplerSegment(float(a), float(b), float(c)) for a, b, c in x),
                   grid_nm, label)

    def on_grid(self) -> bool:
        g = self.grid_nm
        for s in self.segments:
            for v in (s.w1 / g, s.w2 / g, s.z * 1000.0 / g):
                if abs(v - round(v)) > 1e-6:
                    return False
        return True

    @property
    def total_length(self) -> float:
        return float(sum(s.z for s in self.segments))


def _generator(seg: CouplerSegment, dw: float):
    w1 = (seg.w1 + dw) / 1000.0
    w2 = (seg.w2 + dw) / 1000.0
    k = GENERATOR_SCALE * seg.z
    # exp[-i k (Omega X - Delta Z)] = exp[i a.sigma] with a = (-k Omega, 0, k Delta)
    return (-k * omega_of_widths(w1, w2), 0.0, k * delta_of_widths(w1, w2))


def coupler_segment_unitary(seg: CouplerSegment, dw: float = 0.0) -> np.ndarray:
    return su2_exp(_generator(seg, dw))


def design_unitary(design: CouplerDesign, dw: float = 0.0) -> np.ndarray:
    if not design.segments:
        return np.eye(2, dtype=complex)
    return compose(coupler_segment_unitary(s, dw) for s in design.segments)


def design_width_derivative(design: CouplerDesign) -> np.ndarray:
    """Exact ``dU/d(dw)`` at ``dw = 0``, per nm."""
    segs = design.segments
    mats = [coupler_segment_unitary(s) for s in segs]
    out = np.zeros((2, 2), dtype=complex)
    for k, s in enumerate(segs):
        w1, w2 = s.w1 / 1000.0, s.w2 / 1000.0
        c = GENERATOR_SCALE * s.z / 1000.0
        da = (-c * _d_omega_common(w1, w2), 0.0, c * _d_delta_common(w1, w2))
        d = su2_exp_derivative(_generator(s, 0.0), da)
        left = compose(mats[:k]) if k else np.eye(2)
        right = compose(mats[k + 1:]) if k + 1 < len(mats) else np.eye(2)
        out += left @ d @ right
    return out


def design_fidelity(design: CouplerDesign, target: GateTarget = T_TARGET_XZ, dw=0.0) -> float:
    return phase_adjusted_frobenius_fidelity(design_unitary(design, dw), target.matrix())


def design_t_magic_error(design: CouplerDesign, dw: float = 0.0) -> float:
    return t_magic_error(design_unitary(design, dw), xz_magic_frame())


# ---------------------------------------------------------------------------
# synthesis
# ---------------------------------------------------------------------------

def _pack(m):
    return np.r_[m.real.ravel(), m.imag.ravel()]


def _aligned_residual(u, goal, extra=None):
    ov = np.trace(goal.conj().T @ u)
    phase = abs(ov) / ov if abs(ov) > 1e-300 else 1.0
    parts = [_pack(phase * u - goal)]
    if extra is not None:
        parts.append(_pack(phase * extra))
    return np.concatenate(parts)


def _quiet(fn):
    def wrapped(*a, **k):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ExtrapolationWarning)
            return fn(*a, **k)

    return wrapped


def _is_trivial(target: GateTarget) -> bool:
    m = target.matrix()
    return abs(abs(np.trace(m)) - 2.0) < 1e-12


@_quiet
def synthesize_two_segment(
    target: GateTarget = T_TARGET_XZ,
    w1_nm: float = 449.0,
    seed=(356.0, 23.8, 23.8),
    rounded: bool = True,
) -> CouplerDesign:
    """Mirrored two-segment design ``(w1, w2, z1), (w2, w1, z2)``.

    The outer width is held at ``w1_nm``; the remaining three parameters are
    solved exactly. With ``rounded`` the result is snapped to the grid with a
    length refit (see :func:`round_to_grid`).
    """
    if _is_trivial(target):
        raise ValueError("trivial target")
    goal = target.matrix()

    def res(x):
        w2, z1, z2 = x
        d = CouplerDesign((CouplerSegment(w1_nm, w2, z1), CouplerSegment(w2, w1_nm, z2)))
        return _aligned_residual(design_unitary(d), goal)

    sol = least_squares(res, np.asarray(seed, float), method="lm",
                        xtol=1e-15, ftol=1e-15, gtol=1e-15)
    w2, z1, z2 = sol.x
    design = CouplerDesign(
        (CouplerSegment(w1_nm, w2, z1), CouplerSegment(w2, w1_nm, z2)), label="two-segment"
    )
    if 1.0 - design_fidelity(design, target) > 1e-8:
        raise SynthesisError(f"two-segment solve failed (residual {np.linalg.norm(sol.fun):.3e})")
    if rounded:
        design = round_to_grid(design, target, refit_lengths=True)
    return design


@_quiet
def synthesize_four_segment_robust(
    target: GateTarget, seed: CouplerDesign, rounded: bool = True, tol: float = 1e-8
) -> CouplerDesign:
    """First-order width-robust four-segment design polished from ``seed``."""
    if len(seed.segments) != 4:
        raise ValueError("seed must have 4 segments")
    goal = target.matrix()

    def res(x):
        d = CouplerDesign.from_vector(x)
        return _aligned_residual(design_unitary(d), goal, design_width_derivative(d))

    # bounded trust region keeps lengths positive and widths inside the fit range
    lo = np.tile([WIDTH_RANGE_NM[0], WIDTH_RANGE_NM[0], 1e-3], 4)
    hi = np.tile([WIDTH_RANGE_NM[1], WIDTH_RANGE_NM[1], np.inf], 4)
    sol = least_squares(res, seed.as_vector(), method="trf", bounds=(lo, hi),
                        x_scale="jac", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=5000)
    r = float(np.linalg.norm(sol.fun))
    if r > tol:
        raise SynthesisError(f"robust coupler solve did not converge (residual {r:.3e})")
    design = CouplerDesign.from_vector(sol.x, seed.grid_nm, seed.label)
    if rounded:
        design = round_to_grid(design, target)
    return design


# ---------------------------------------------------------------------------
# fabrication grid
# ---------------------------------------------------------------------------

def _corners(values, step):
    lo = np.floor(np.asarray(values) / step + 1e-9) * step
    hi = np.ceil(np.asarray(values) / step - 1e-9) * step
    return list(zip(lo, hi))


def nearest_rounding(design: CouplerDesign) -> CouplerDesign:
    g = design.grid_nm
    x = design.as_vector().reshape(-1, 3)
    x[:, :2] = np.round(x[:, :2] / g) * g
    x[:, 2] = np.round(x[:, 2] * 1000 / g) * g / 1000
    return CouplerDesign.from_vector(x, g, design.label)


def _best_corner(widths, lengths_um, grid, target, label):
    """Exhaustive floor/ceil search for fixed continuous values."""
    w_opts = _corners(widths, grid)
    z_opts = _corners(np.asarray(lengths_um) * 1000.0, grid)
    n = len(lengths_um)
    best = None
    for combo in itertools.product(*(w_opts + z_opts)):
        ws, zs = combo[: 2 * n], combo[2 * n:]
        vec = np.column_stack([np.reshape(ws, (n, 2)), np.asarray(zs) / 1000.0])
        d = CouplerDesign.from_vector(vec, grid, label)
        key = (-design_fidelity(d, target), d.total_length)
        if best is None or key < best[0]:
            best = (key, d)
    return best


@_quiet
def round_to_grid(
    design: CouplerDesign, target: GateTarget = T_TARGET_XZ, refit_lengths: bool = False
) -> CouplerDesign:
    """Snap all widths and lengths to the grid, choosing the best floor/ceil mix.

    Every ``2^(3N)`` corner is scored by phase-optimized Frobenius fidelity at
    zero width error; ties go to the shorter device. With ``refit_lengths`` the
    widths are snapped first and the lengths re-optimized for each width
    corner before their own snapping.
    """
    grid = design.grid_nm
    x = design.as_vector().reshape(-1, 3)
    n = len(x)
    if not refit_lengths:
        return _best_corner(x[:, :2].ravel(), x[:, 2], grid, target, design.label)[1]

    goal = target.matrix()
    best = None
    for ws in itertools.product(*_corners(x[:, :2].ravel(), grid)):
        wmat = np.reshape(ws, (n, 2))

        def res(z):
            d = CouplerDesign.from_vector(np.column_stack([wmat, z]))
            return _aligned_residual(design_unitary(d), goal)

        z = least_squares(res, x[:, 2], method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15).x
        if np.any(z <= 0):
            continue
        cand = _best_corner(ws, z, grid, target, design.label)
        if best is None or cand[0] < best[0]:
            best = cand
    return best[1]


# ---------------------------------------------------------------------------
# sweeps and printed designs
# ---------------------------------------------------------------------------

@_quiet
def width_error_sweep(
    design: CouplerDesign,
    dw_range,
    target: GateTarget = T_TARGET_XZ,
    threshold: float = distill.DEFAULT_TARGET,
) -> SweepResult:
    frame = xz_magic_frame()
    goal = target.matrix()
    rows = [
        evaluate_row(dw, design_unitary(design, dw), goal, frame, distill.FIVE_QUBIT_T, threshold)
        for dw in dw_range
    ]
    return SweepResult(rows, {"platform": "photonic", "design": design.label})


def _design(label, rows):
    return CouplerDesign(tuple(CouplerSegment(*r) for r in rows), 1, label)


PRINTED_DESIGNS = {
    "two": _design("two", [(449, 356, 23.813), (356, 449, 23.813)]),
    "a": _design("a", [(449, 387, 23.220), (424, 448, 17.190), (450, 351, 21.152),
                       (353, 450, 36.094)]),
    "b": _design("b", [(448, 387, 23.822), (395, 422, 15.660), (449, 350, 21.215),
                       (355, 449, 37.081)]),
    "c": _design("c", [(450, 389, 22.675), (395, 407, 18.369), (449, 350, 20.343),
                       (359, 450, 39.073)]),
}


# ---------------------------------------------------------------------------
# design files
# ---------------------------------------------------------------------------

def format_design(design: CouplerDesign) -> str:
    lines = [f"# design {design.label}".rstrip(), f"# grid_nm {design.grid_nm}",
             "# w1_nm w2_nm z_um"]
    for s in design.segments:
        lines.append(f"{float(s.w1)!r} {float(s.w2)!r} {float(s.z)!r}")
    return "\n".join(lines) + "\n"


def parse_design(text: str) -> CouplerDesign:
    label, grid, rows = "", 1, []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if line.startswith("#"):
            parts = line[1:].split()
            if len(parts) == 2 and parts[0] == "design":
                label = parts[1]
            elif len(parts) == 2 and parts[0] == "grid_nm":
                grid = int(parts[1])
            continue
        if not line:
            continue
        fields = line.split("#", 1)[0].split()
        if len(fields) != 3:
            raise ValueError(f"line {lineno}: expected 'w1_nm w2_nm z_um'")
        rows.append(CouplerSegment(*(float(v) for v in fields)))
    return CouplerDesign(tuple(rows), grid, label)


def write_design(path, design: CouplerDesign) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_design(design))


def read_design(path) -> CouplerDesign:
    with open(path, encoding="utf-8") as fh:
        return parse_design(fh.read())

