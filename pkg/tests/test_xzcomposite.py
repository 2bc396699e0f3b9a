from math import factorial

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from predistill.su2core import (
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    T_TARGET_XZ,
    MagicFrame,
    t_gate_xy,
    t_gate_xz,
    t_magic_error,
    xz_magic_frame,
)
from predistill.xzcomposite import (
    XZSegment,
    XZSequence,
    derivative_report,
    printed_sequence,
    robust_residual,
    sequence_derivative,
    sequence_unitary,
    single_segment_gap,
    target_distance,
    three_segment_robust_solve,
    two_segment_synthesis,
    xz_segment_unitary,
)


def series_expm(m, terms=64):
    out = np.eye(2, dtype=complex)
    power = np.eye(2, dtype=complex)
    for k in range(1, terms):
        power = power @ m
        out = out + power / factorial(k)
    return out


def test_segment_identity_and_pure_z():
    assert np.allclose(xz_segment_unitary(XZSegment(0.0, 0.7)), np.eye(2))
    th, e = 0.9, 0.05
    u = xz_segment_unitary(XZSegment(th, np.pi / 2), e)
    assert np.allclose(u, np.diag([np.exp(1j * (th + e)), np.exp(-1j * (th + e))]), atol=1e-15)


def test_segment_matches_series_oracle():
    th, phi, e = 1.0, 0.3, 0.05
    gen = 1j * (th * np.cos(phi) * PAULI_X + (th * np.sin(phi) + e) * PAULI_Z)
    u = xz_segment_unitary(XZSegment(th, phi), e)
    assert np.max(np.abs(u - series_expm(gen))) < 1e-12


@given(st.floats(-4, 4), st.floats(-4, 4), st.floats(-0.5, 0.5))
@settings(max_examples=50)
def test_segment_unitary(th, phi, e):
    u = xz_segment_unitary(XZSegment(th, phi), e)
    assert np.max(np.abs(u.conj().T @ u - np.eye(2))) < 1e-12


def test_reflection_symmetry():
    # phi -> pi - phi flips the X component, i.e. conjugation by Z
    rng = np.random.default_rng(11)
    for _ in range(20):
        th = rng.uniform(-3, 3, 3)
        ph = rng.uniform(-3, 3, 3)
        e = rng.uniform(-0.1, 0.1)
        a = sequence_unitary(XZSequence.from_arrays(th, ph), e)
        b = sequence_unitary(XZSequence.from_arrays(th, np.pi - ph), e)
        assert np.max(np.abs(b - PAULI_Z @ a @ PAULI_Z)) < 1e-12


def test_empty_sequence_is_identity():
    assert np.allclose(sequence_unitary(XZSequence(())), np.eye(2))


def test_sequence_derivative_matches_difference():
    seq = printed_sequence("b")
    h = 1e-6
    fd = (sequence_unitary(seq, h) - sequence_unitary(seq, -h)) / (2 * h)
    assert np.max(np.abs(sequence_derivative(seq) - fd)) < 1e-8


def test_two_segment_example():
    sols = two_segment_synthesis(0.5)
    assert len(sols) == 1
    assert target_distance(sols[0]) < 1e-10


def test_two_segment_periodic():
    a = two_segment_synthesis(0.5)[0]
    b = two_segment_synthesis(0.5 + 2 * np.pi)[0]
    for sa, sb in zip(a.segments, b.segments):
        assert abs(sa.theta - sb.theta) < 1e-12
        assert abs((sa.phi - sb.phi + np.pi) % (2 * np.pi) - np.pi) < 1e-12


def test_two_segment_regular_at_zero():
    assert target_distance(two_segment_synthesis(0.0)[0]) < 1e-10


@given(st.floats(-np.pi, np.pi))
@settings(max_examples=40)
def test_two_segment_exact_everywhere(phi1):
    assert target_distance(two_segment_synthesis(phi1)[0]) < 1e-10


def test_two_segment_not_robust():
    rng = np.random.default_rng(5)
    for phi1 in rng.uniform(-np.pi, np.pi, 20):
        seq = two_segment_synthesis(phi1)[0]
        assert np.linalg.norm(sequence_derivative(seq), 2) > 1e-3


def test_two_segment_rejects_non_finite():
    with pytest.raises(ValueError, match="branch singularity"):
        two_segment_synthesis(np.nan)


@pytest.mark.parametrize("label", ["a", "b", "c"])
def test_printed_rows_repolish(label):
    seed = printed_sequence(label)
    x0 = np.r_[seed.thetas, seed.phis]
    assert target_distance(seed) < 1e-5
    sol = three_segment_robust_solve(seed)
    x = np.r_[sol.thetas, sol.phis]
    assert np.linalg.norm(robust_residual(x, t_gate_xz())) <= 1e-9
    assert np.max(np.abs(x - x0)) <= 1e-3
    rep = derivative_report(sol, 1)
    assert rep.orders[0][1] <= 1e-6


def test_robust_solution_scaling():
    sol = three_segment_robust_solve(printed_sequence("c"))
    es = np.geomspace(1e-3, 1e-2, 7)
    tm = np.array([t_magic_error(sequence_unitary(sol, e), xz_magic_frame()) for e in es])
    assert np.polyfit(np.log(es), np.log(tm), 1)[0] == pytest.approx(4, abs=0.1)
    assert np.max(tm / es**4) / np.min(tm / es**4) < 2


def test_robust_solve_from_jittered_seed():
    seed = printed_sequence("c")
    rng = np.random.default_rng(2)
    jitter = XZSequence.from_arrays(seed.thetas + rng.normal(0, 0.02, 3),
                                    seed.phis + rng.normal(0, 0.02, 3))
    sol = three_segment_robust_solve(jitter)
    assert np.linalg.norm(robust_residual(np.r_[sol.thetas, sol.phis], t_gate_xz())) <= 1e-9


def test_robust_solve_needs_three_segments():
    with pytest.raises(ValueError):
        three_segment_robust_solve(two_segment_synthesis(0.5)[0])


def test_single_segment_insufficient():
    assert single_segment_gap() >= 1e-2


def test_xz_frame():
    f = xz_magic_frame()
    assert abs(np.vdot(f.t0, f.t1)) < 1e-12
    assert np.max(np.abs(t_gate_xz()[:, 0] - f.t0)) < 1e-12
    assert T_TARGET_XZ.frame().t0 == pytest.approx(f.t0)


def _is_clifford(w):
    paulis = (PAULI_X, PAULI_Y, PAULI_Z)
    for p in paulis:
        q = w @ p @ w.conj().T
        if min(np.max(np.abs(q - s * r)) for r in paulis for s in (1, -1)) > 1e-10:
            return False
    return True


def test_frames_related_by_clifford():
    xy = MagicFrame.from_gate(t_gate_xy())
    xz = xz_magic_frame()
    a = np.column_stack([xy.t0, xy.t1])
    b = np.column_stack([xz.t0, xz.t1])
    found = []
    for k in range(8):
        w = b @ np.diag([1, np.exp(1j * k * np.pi / 4)]) @ a.conj().T
        assert np.max(np.abs(w.conj().T @ w - np.eye(2))) < 1e-12
        assert np.max(np.abs(w @ xy.t0 - xz.t0)) < 1e-12
        if _is_clifford(w):
            found.append(k)
    assert found
