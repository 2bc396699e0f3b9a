"""Tabulated error sweeps and their CSV/JSON serialization."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from . import distill
from .su2core import (
    MagicFrame,
    frobenius_fidelity,
    magic_t_gate_fidelity,
    phase_aligned,
    t_magic_error,
    trace_fidelity,
)

CSV_HEADER = ("error", "frobenius", "trace", "tmagic", "magicfid", "levels")
DIVERGENT_LABEL = "divergent"


@dataclass(frozen=True)
class SweepRow:
    error: float
    frobenius: float
    trace: float
    tmagic: float
    magicfid: float
    levels: int | None  # None means divergent

    def as_tuple(self) -> tuple:
        return (self.error, self.frobenius, self.trace, self.tmagic, self.magicfid, self.levels)


@dataclass
class SweepResult:
    rows: list
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.rows = sorted(self.rows, key=lambda r: r.error)

    def column(self, name: str) -> list:
        return [getattr(r, name) for r in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.rows:
            lv = DIVERGENT_LABEL if r.levels is None else r.levels
            w.writerow([repr(float(r.error)), repr(float(r.frobenius)), repr(float(r.trace)),
                        repr(float(r.tmagic)), repr(float(r.magicfid)), lv])
        return buf.getvalue()

    def to_json(self) -> str:
        rows = [
            dict(zip(CSV_HEADER, (float(r.error), float(r.frobenius), float(r.trace),
                                  float(r.tmagic), float(r.magicfid),
                                  DIVERGENT_LABEL if r.levels is None else r.levels)))
            for r in self.rows
        ]
        return json.dumps({"metadata": self.metadata, "rows": rows}, indent=2, sort_keys=True)


def evaluate_row(error, gate, target, frame: MagicFrame, code, threshold) -> SweepRow:
    """All quality metrics of ``gate`` against ``target`` at one error value.

    Frobenius fidelity is taken after removing the global phase, which is
    unobservable for every platform here.
    """
    tm = t_magic_error(gate, frame)
    plan = distill.iterations_to_threshold(tm, threshold, code)
    return SweepRow(
        float(error),
        float(frobenius_fidelity(phase_aligned(gate, target), target)),
        float(trace_fidelity(gate, target)),
        tm,
        float(magic_t_gate_fidelity(gate, frame)),
        plan.levels,
    )


def error_grid(lo: float, hi: float, step: float) -> np.ndarray:
    """Inclusive grid ``lo, lo + step, ..., hi`` without float drift."""
    if step <= 0:
        raise ValueError("step must be positive")
    if lo > hi:
        raise ValueError("min must not exceed max")
    n = int(np.floor((hi - lo) / step + 1e-9))
    return np.round(lo + step * np.arange(n + 1), 12)
