"""Command-line front end.

Subcommands: ``synthesize``, ``sweep``, ``tables``, ``distill``. Option defaults
can be supplied as a JSON object in the file named by ``PREDISTILL_CONFIG``;
explicit flags always win. Exit codes: 0 success, 1 numerical failure,
2 usage error.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import os
import sys
import tempfile
import warnings
from importlib import resources

import numpy as np

from . import __version__, distill, photonic, xycomposite, xzcomposite
from .su2core import H_TARGET, T_TARGET, T_TARGET_XZ, xz_magic_frame
from .sweep import SweepResult, error_grid, evaluate_row

CONFIG_ENV = "PREDISTILL_CONFIG"

EXIT_OK, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2

_DEFAULT_RANGES = {"xy": (0.0, 0.1, 0.005), "xz": (0.0, 0.1, 0.005), "photonic": (-5.0, 5.0, 0.1)}


def load_reference() -> dict:
    text = resources.files("predistill").joinpath("data/reference_tables.json").read_text()
    return json.loads(text)


def load_config(env=None) -> dict:
    env = os.environ if env is None else env
    path = env.get(CONFIG_ENV)
    if not path:
        return {}
    with open(path, encoding="utf-8") as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise ValueError(f"{CONFIG_ENV} must hold a JSON object")
    return cfg


def atomic_write(path: str, text: str) -> None:
    """Write ``text`` to ``path`` through a temp file in the same directory."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _xy_target(name):
    return T_TARGET if name == "t" else H_TARGET


def _code_for(name):
    return distill.FIVE_QUBIT_T if name == "t" else distill.FIFTEEN_TO_ONE_H


def _angle(label, value):
    return f"{label:>8s} = {value: .6f} rad = {value / np.pi: .6f} pi"


# ---------------------------------------------------------------------------
# synthesize
# ---------------------------------------------------------------------------

def _xy_sequence(args):
    target = _xy_target(args.target)
    seed = xycomposite.SEVEN_PULSE_SEEDS["T" if args.target == "t" else "H"]
    return xycomposite.solve(target, args.pulses, seed=seed if args.pulses == 7 else None)


def _xz_sequence(scheme: str, phi1: float = 0.5):
    if scheme == "two":
        return xzcomposite.two_segment_synthesis(phi1)[0]
    return xzcomposite.three_segment_robust_solve(xzcomposite.printed_sequence(scheme))


def _photonic_design(name: str):
    if name in photonic.PRINTED_DESIGNS:
        return photonic.PRINTED_DESIGNS[name]
    return photonic.read_design(name)


def cmd_synthesize(args, out=None) -> int:
    out = out or sys.stdout
    lines = []
    payload = None
    if args.platform == "xy":
        seq = _xy_sequence(args)
        lines.append(f"# XY {args.target.upper()} target, {seq.pulse_count} pulses")
        lines.append(_angle("theta", seq.theta))
        lines += [_angle(f"phi{i + 1}", p) for i, p in enumerate(seq.phases)]
        payload = {"platform": "xy", "target": args.target, "theta": seq.theta,
                   "phases": list(seq.phases)}
    elif args.platform == "xz":
        scheme = "two" if args.segments == 2 else args.seed
        seq = _xz_sequence(scheme, args.phi1)
        lines.append(f"# XZ T target, {len(seq.segments)} segments")
        for i, s in enumerate(seq.segments, 1):
            lines.append(_angle(f"theta{i}", s.theta))
            lines.append(_angle(f"phi{i}", s.phi))
        payload = {"platform": "xz", "thetas": list(map(float, seq.thetas)),
                   "phis": list(map(float, seq.phis))}
    else:
        if args.segments == 2:
            design = photonic.synthesize_two_segment(T_TARGET_XZ)
        else:
            seed = photonic.PRINTED_DESIGNS[args.seed]
            design = photonic.synthesize_four_segment_robust(T_TARGET_XZ, seed)
        lines.append(f"# photonic T target, {len(design.segments)} segments")
        lines.append(f"# {'w1 (nm)':>9s} {'w2 (nm)':>9s} {'z (um)':>9s}")
        for s in design.segments:
            lines.append(f"  {s.w1:9.0f} {s.w2:9.0f} {s.z:9.3f}")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", photonic.ExtrapolationWarning)
            lines.append(f"# t-magic error at dw=0: {photonic.design_t_magic_error(design):.3e}")
        if args.output:
            atomic_write(args.output, photonic.format_design(design))
    print("\n".join(lines), file=out)
    if args.output and payload is not None:
        atomic_write(args.output, json.dumps(payload, indent=2) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

def run_sweep(args) -> SweepResult:
    lo, hi, step = (
        v if v is not None else d
        for v, d in zip((args.min, args.max, args.step), _DEFAULT_RANGES[args.platform])
    )
    grid = error_grid(lo, hi, step)
    meta = {"platform": args.platform, "version": __version__, "threshold": args.threshold}
    if args.platform == "xy":
        target = _xy_target(args.target)
        seq = _xy_sequence(args)
        goal, frame, code = target.matrix(), target.frame(), _code_for(args.target)
        rows = [evaluate_row(e, xycomposite.apply_with_error(seq, e), goal, frame, code,
                             args.threshold) for e in grid]
        meta.update(target=args.target, design=f"pulses={args.pulses}")
        return SweepResult(rows, meta)
    if args.platform == "xz":
        seq = _xz_sequence(args.design or "a")
        goal, frame = T_TARGET_XZ.matrix(), xz_magic_frame()
        rows = [evaluate_row(e, xzcomposite.sequence_unitary(seq, e), goal, frame,
                             distill.FIVE_QUBIT_T, args.threshold) for e in grid]
        meta.update(target="t", design=args.design or "a")
        return SweepResult(rows, meta)
    design = _photonic_design(args.design or "c")
    result = photonic.width_error_sweep(design, grid, T_TARGET_XZ, args.threshold)
    result.metadata.update(meta, target="t", design=args.design or "c")
    return result


def cmd_sweep(args, out=None) -> int:
    out = out or sys.stdout
    result = run_sweep(args)
    body = result.to_csv() if args.format == "csv" else result.to_json()
    if not args.output:
        out.write(body)
        return EXIT_OK
    atomic_write(args.output, body)
    meta = dict(result.metadata, timestamp=_dt.datetime.now(_dt.timezone.utc).isoformat())
    atomic_write(args.output + ".meta.json", json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# tables
# ---------------------------------------------------------------------------

def _check_xy_table(kind, ref, out):
    rows = xycomposite.table_rows(kind)
    tol = ref["tolerance"]
    bad = []
    for (ts, params), (rts, rparams) in zip(rows, ref["rows"]):
        for j, (a, b) in enumerate(zip(params, rparams)):
            # phases compare modulo 2 (units of pi)
            d = abs(a - b) if j == 0 else abs((a - b + 1) % 2 - 1)
            if d > tol:
                bad.append(f"theta*={rts}: entry {j} = {a:.6f}, printed {b:.5f}")
    return rows, bad


def cmd_tables(args, out=None) -> int:
    out = out or sys.stdout
    ref = load_reference()
    bad = []
    which = args.which
    if which in ("T1", "T2"):
        kind = "three" if which == "T1" else "five"
        key = "three_pulse_table" if which == "T1" else "five_pulse_table"
        rows, bad = _check_xy_table(kind, ref[key], out)
        print(xycomposite.format_table(rows), file=out)
        if args.check:
            print(f"check: {len(rows) - len({b.split(':')[0] for b in bad})}/{len(rows)} rows "
                  "within tolerance", file=out)
    elif which == "XZ3":
        tab = ref["xz_robust_rows"]
        goal = T_TARGET_XZ.matrix()
        print("seq |     phi1     phi2     phi3 |   theta1   theta2   theta3 | residual", file=out)
        for name, vals in tab["rows"].items():
            phis, thetas = vals[:3], vals[3:]
            res = float(np.linalg.norm(xzcomposite.robust_residual(np.r_[thetas, phis], goal)))
            cells = " ".join(f"{v:8.5f}" for v in phis) + " | "
            cells += " ".join(f"{v:8.5f}" for v in thetas)
            print(f"({name}) | {cells} | {res:.2e}", file=out)
            if res > tab["residual_tolerance"]:
                bad.append(f"row {name}: residual {res:.3e}")
    else:
        tab = ref["coupler_designs"]
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", photonic.ExtrapolationWarning)
            for name in tab["designs"]:
                d = photonic.PRINTED_DESIGNS[name]
                tm = photonic.design_t_magic_error(d)
                print(f"design {name}: t-magic error {tm:.3e}", file=out)
                for s in d.segments:
                    print(f"  {s.w1:5.0f} {s.w2:5.0f} {s.z:8.3f}", file=out)
                if tm > 1e-4:
                    bad.append(f"design {name}: t-magic error {tm:.3e}")
            synth = photonic.synthesize_two_segment(T_TARGET_XZ)
        dev = np.abs(synth.as_vector() - np.asarray(tab["designs"]["two"], float).ravel())
        dev = dev * np.tile([1.0, 1.0, 1000.0], len(synth.segments))  # um -> nm for lengths
        print(f"synthesized two-segment max deviation: {dev.max():.3f} nm", file=out)
        if dev.max() > tab["tolerance_nm"] + 1e-9:
            bad.append(f"two-segment synthesis deviates by {dev.max():.3f} nm")
    if args.check and bad:
        for b in bad:
            print(f"MISMATCH {b}", file=sys.stderr)
        return EXIT_NUMERIC
    if args.check:
        print("check: pass", file=out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# distill
# ---------------------------------------------------------------------------

def cmd_distill(args, out=None) -> int:
    out = out or sys.stdout
    code = distill.FIVE_QUBIT_T if args.code == "five" else distill.FIFTEEN_TO_ONE_H
    plan = distill.iterations_to_threshold(args.eps, args.threshold, code)
    if plan.divergent:
        print(f"DIVERGENT (ε ≥ ε_c = {code.threshold_error:.6f})", file=out)
        return EXIT_OK
    print(f"levels: {plan.levels}", file=out)
    print(f"qubits per logical: {plan.qubits_per_logical}", file=out)
    for i, e in enumerate(plan.trajectory):
        print(f"  round {i}: {e:.6e}", file=out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser(config: dict | None = None) -> argparse.ArgumentParser:
    config = config or {}
    parser = argparse.ArgumentParser(prog="predistill", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synthesize", help="solve for a composite sequence or coupler design")
    p.add_argument("--platform", choices=("xy", "xz", "photonic"), default="xy")
    p.add_argument("--target", choices=("t", "h"), default="t")
    p.add_argument("--pulses", type=int, default=3, help="XY pulse count (odd)")
    p.add_argument("--segments", type=int, default=None, help="XZ: 2 or 3; photonic: 2 or 4")
    p.add_argument("--phi1", type=float, default=0.5, help="free angle of the XZ two-segment family")
    p.add_argument("--seed", choices=("a", "b", "c"), default="a",
                   help="tabulated seed for robust XZ/photonic solves")
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("sweep", help="tabulate quality metrics over an error range")
    p.add_argument("--platform", choices=("xy", "xz", "photonic"), default="xy")
    p.add_argument("--target", choices=("t", "h"), default="t")
    p.add_argument("--pulses", type=int, default=3)
    p.add_argument("--design", default=None,
                   help="xz: two|a|b|c; photonic: two|a|b|c or a design file")
    p.add_argument("--min", type=float, default=None)
    p.add_argument("--max", type=float, default=None)
    p.add_argument("--step", type=float, default=None)
    p.add_argument("--threshold", type=float, default=distill.DEFAULT_TARGET)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("tables", help="regenerate reference tables")
    p.add_argument("which", choices=("T1", "T2", "XZ3", "Coupler"))
    p.add_argument("--check", action="store_true", help="diff against the printed values")
    p.set_defaults(func=cmd_tables)

    p = sub.add_parser("distill", help="distillation levels needed for an input error")
    p.add_argument("eps", type=float)
    p.add_argument("--code", choices=("five", "fifteen"), default="five")
    p.add_argument("--threshold", type=float, default=distill.DEFAULT_TARGET)
    p.set_defaults(func=cmd_distill)

    if config:
        for action in sub.choices.values():
            known = {a.dest for a in action._actions}
            action.set_defaults(**{k: v for k, v in config.items() if k in known})
    return parser


def _validate(parser, args):
    if getattr(args, "pulses", None) is not None and args.command in ("synthesize", "sweep"):
        if args.platform == "xy":
            if args.pulses % 2 == 0:
                parser.error("symmetric scheme requires odd pulse count")
            if args.pulses not in (1, 3, 5, 7):
                parser.error("supported pulse counts are 1, 3, 5 and 7")
        elif args.target != "t":
            parser.error("XZ and photonic platforms only target the T gate")
    if args.command == "synthesize" and args.platform != "xy":
        allowed = (2, 3) if args.platform == "xz" else (2, 4)
        if args.segments is None:
            args.segments = allowed[-1]
        if args.segments not in allowed:
            parser.error(f"{args.platform} supports {allowed[0]} or {allowed[1]} segments")
    if args.command == "sweep":
        lo, hi, step = (
            v if v is not None else d
            for v, d in zip((args.min, args.max, args.step), _DEFAULT_RANGES[args.platform])
        )
        if step <= 0:
            parser.error("step must be positive")
        if lo > hi:
            parser.error("min must not exceed max")
        if args.platform == "xz" and args.design not in (None, "two", "a", "b", "c"):
            parser.error("xz design must be one of two, a, b, c")


def main(argv=None) -> int:
    try:
        config = load_config()
    except (OSError, ValueError) as exc:
        print(f"predistill: bad config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    parser = build_parser(config)
    try:
        args = parser.parse_args(argv)
        _validate(parser, args)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except xycomposite.SynthesisError as exc:
        print(f"predistill: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, OSError) as exc:
        print(f"predistill: {exc}", file=sys.stderr)
        return EXIT_USAGE if isinstance(exc, ValueError) else EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
