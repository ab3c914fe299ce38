"""Command-line pipeline: calibrate, simulate, optimize, sweep, spectrum,
robustness, encode, decode, reproduce-figures.

Every result file embeds a header with the tool version, a hash of the
resolved run configuration, and the seed, so identical configs reproduce
byte-identical artifacts.  Angles accept symbolic fractions of pi
("pi/2", "3pi/4") to avoid decimal drift in target definitions.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import re
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import (
    CalibrationError,
    DecodeError,
    DegenerateGateError,
    InvalidSpecError,
    NumericalFailureError,
    SearchSpaceError,
)
from .metrics import TargetGate, average_fidelity
from .open_system import SweepConfig, robustness_sweep
from .optimizer import SearchSpace, angle_sweep, search
from .propagator import project_computational, sequence_propagator
from .schedule import (
    ClockConfig,
    CompactEncoding,
    decode_compact,
    encode_compact,
    encoding_to_dict,
    expand_bits,
    schedule_from_dict,
    schedule_to_dict,
)
from .spectrum import leak_frequency, pulse_spectrum, spectrum_magnitude
from .transmon import (
    DEFAULT_ALPHA,
    DEFAULT_OMEGA_01,
    build_model,
    calibrate,
    model_from_dict,
    model_to_dict,
)

TWO_PI = 2.0 * math.pi

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3

_ANGLE_RE = re.compile(r"^\s*([0-9]*\.?[0-9]*)\s*\*?\s*pi\s*(?:/\s*([0-9]*\.?[0-9]+))?\s*$")


def parse_angle(text: str) -> float:
    """Parse an angle in radians; 'pi/2', '3pi/4', '0.5pi', or a plain float."""
    m = _ANGLE_RE.match(text)
    if m:
        coef = float(m.group(1)) if m.group(1) else 1.0
        div = float(m.group(2)) if m.group(2) else 1.0
        return coef * math.pi / div
    try:
        return float(text)
    except ValueError as exc:
        raise InvalidSpecError(f"cannot parse angle {text!r}") from exc


def parse_int_range(text: str) -> tuple[int, int]:
    lo, sep, hi = text.partition(":")
    if not sep:
        raise InvalidSpecError(f"expected lo:hi, got {text!r}")
    return int(lo), int(hi)


def parse_float_range(text: str) -> tuple[float, float]:
    lo, sep, hi = text.partition(":")
    if not sep:
        raise InvalidSpecError(f"expected lo:hi, got {text!r}")
    return float(lo), float(hi)


def read_config(path: str) -> dict[str, str]:
    """Plain-text key=value config; '#' starts a comment."""
    out: dict[str, str] = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise InvalidSpecError(f"malformed config line {raw!r}")
        out[key.strip()] = value.strip()
    return out


def _config_hash(config: dict) -> str:
    canon = json.dumps(config, sort_keys=True, default=str)
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:12]


def _header(config: dict, seed: int | None) -> dict:
    return {
        "tool": "sfqdrag",
        "version": __version__,
        "config_hash": _config_hash(config),
        "seed": seed,
        "config": config,
    }


def write_json(path: str, header: dict, payload: dict) -> None:
    doc = {"header": header}
    doc.update(payload)
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(json.dumps(doc, indent=2, sort_keys=False) + "\n", encoding="utf-8")


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


def write_csv(path: str, header: dict, columns: list[str], rows: list[dict]) -> None:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    lines = [
        f"# tool: sfqdrag {header['version']}",
        f"# config_hash: {header['config_hash']}",
        f"# seed: {header['seed']}",
        f"# config: {json.dumps(header['config'], sort_keys=True, default=str)}",
        ",".join(columns),
    ]
    for row in rows:
        lines.append(",".join(_fmt(row[c]) for c in columns))
    p.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _load_model(args):
    if getattr(args, "model", None):
        doc = json.loads(Path(args.model).read_text(encoding="utf-8"))
        return model_from_dict(doc.get("model", doc))
    spec = calibrate(DEFAULT_OMEGA_01, DEFAULT_ALPHA)
    return build_model(spec)


def _load_schedule(path: str, model):
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return schedule_from_dict(doc.get("schedule", doc), model.qubit_period)


def _threads(args) -> int:
    if getattr(args, "threads", None) is not None:
        return max(1, args.threads)
    return max(1, int(os.environ.get("SFQ_THREADS", "1")))


# --- subcommands -----------------------------------------------------------


def cmd_calibrate(args) -> int:
    config = {
        "subcommand": "calibrate",
        "f01_ghz": args.f01_ghz,
        "anharm_mhz": args.anharm_mhz,
        "dim": args.dim,
        "levels": args.levels,
    }
    spec = calibrate(
        TWO_PI * args.f01_ghz * 1e9,
        TWO_PI * args.anharm_mhz * 1e6,
        charge_dimension=args.dim,
        kept_levels=args.levels,
    )
    model = build_model(spec)
    payload = {
        "model": model_to_dict(model),
        "ej_over_ec": spec.ratio,
        "f01_ghz": model.omega_01 / TWO_PI / 1e9,
        "anharm_mhz": model.anharmonicity_exact / TWO_PI / 1e6,
    }
    write_json(args.out, _header(config, args.seed), payload)
    print(f"calibrated E_J/E_C = {spec.ratio:.3f} -> {args.out}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    model = _load_model(args)
    schedule = _load_schedule(args.schedule, model)
    config = {"subcommand": "simulate", "schedule": schedule_to_dict(schedule)}
    prop = sequence_propagator(model, schedule)
    gate = project_computational(prop, model)
    payload = {
        "u_q_real": gate.matrix.real.tolist(),
        "u_q_imag": gate.matrix.imag.tolist(),
        "total_time": prop.total_time,
        "unitarity_residual": prop.unitarity_defect(),
    }
    write_json(args.out, _header(config, args.seed), payload)
    print(f"simulated {len(expand_bits(schedule))} ticks -> {args.out}")
    return EXIT_OK


def _search_space(args, model) -> SearchSpace:
    clock = ClockConfig.for_model(model, args.clock)
    window = parse_int_range(args.train_window) if args.train_window else None
    prune = parse_float_range(args.prune_c) if args.prune_c else None
    return SearchSpace(
        clock=clock,
        ramp_cycles=args.ramp_cycles,
        kick_angle=args.kick_angle,
        train_window=window,
        drag_prune=prune,
        objective=args.objective,
    )


def cmd_optimize(args) -> int:
    model = _load_model(args)
    theta_t = parse_angle(args.target_angle)
    space = _search_space(args, model)
    config = {
        "subcommand": "optimize",
        "target_angle": theta_t,
        "clock": args.clock,
        "ramp_cycles": args.ramp_cycles,
        "kick_angle": args.kick_angle,
        "train_window": args.train_window,
        "objective": args.objective,
        "prune_c": args.prune_c,
    }
    result = search(model, TargetGate.y_rotation(theta_t), space, threads=_threads(args))
    encoding = encode_compact(result.best_schedule)
    payload = {
        "schedule": schedule_to_dict(result.best_schedule),
        "report": result.report.to_dict(),
        "candidates_evaluated": result.candidates_evaluated,
        "pruned_ramps": result.pruned_ramps,
        "prune_changed_winner": result.prune_changed_winner,
        "encoding": encoding_to_dict(encoding, result.best_schedule),
    }
    write_json(args.out, _header(config, args.seed), payload)
    print(
        f"best ramp {'|'.join(c.bits for c in result.best_schedule.on_ramp) or '-'} "
        f"N={result.best_schedule.train_length} "
        f"error={result.report.avg_error:.3e} -> {args.out}"
    )
    return EXIT_OK


_SWEEP_COLUMNS = ["angle", "cycles", "fidelity", "error", "L1",
                  "err_discrete", "err_phase", "N", "ramp", "bits"]


def _sweep_rows_to_csv(rows):
    return [
        {
            "angle": r["angle"],
            "cycles": r["cycles"],
            "fidelity": r["fidelity"],
            "error": r["error"],
            "L1": r["leakage"],
            "err_discrete": r["err_discrete"],
            "err_phase": r["err_phase"],
            "N": r["train_length"],
            "ramp": r["ramp"],
            "bits": r["bit_count"],
        }
        for r in rows
    ]


def cmd_sweep(args) -> int:
    model = _load_model(args)
    angles = [parse_angle(a) for a in args.angles.split(",")]
    cycles = [int(c) for c in args.cycles.split(",")]
    clock = ClockConfig.for_model(model, args.clock)
    space = SearchSpace(clock=clock, ramp_cycles=max(cycles), kick_angle=args.kick_angle)
    config = {
        "subcommand": "sweep",
        "angles": angles,
        "cycles": cycles,
        "clock": args.clock,
        "kick_angle": args.kick_angle,
    }
    rows = angle_sweep(model, space, angles, ramp_lengths=cycles, threads=_threads(args))
    write_csv(args.out, _header(config, args.seed), _SWEEP_COLUMNS, _sweep_rows_to_csv(rows))
    print(f"{len(rows)} rows -> {args.out}")
    return EXIT_OK


def cmd_spectrum(args) -> int:
    model = _load_model(args)
    schedule = _load_schedule(args.schedule, model)
    config = {"subcommand": "spectrum", "schedule": schedule_to_dict(schedule)}
    bits = expand_bits(schedule)
    table = pulse_spectrum(bits, schedule.clock, model=model)
    rows = [
        {"omega": float(w), "magnitude": float(m)}
        for w, m in zip(table.freq_grid, table.magnitude)
    ]
    header = _header(config, args.seed)
    write_csv(args.out, header, ["omega", "magnitude"], rows)

    bare = ("1" + "0" * (schedule.clock.multiplier - 1)) * schedule.kick_count
    mag_leak = spectrum_magnitude(bits, schedule.clock, table.leak_freq)
    bare_leak = spectrum_magnitude(bare, schedule.clock, table.leak_freq)
    summary = {
        "leak_freq": table.leak_freq,
        "magnitude_at_leak": mag_leak,
        "ratio_vs_train": (bare_leak / mag_leak) if mag_leak > 0 else float("inf"),
    }
    summary_path = args.summary or str(Path(args.out).with_suffix(".summary.json"))
    write_json(summary_path, header, summary)
    print(f"spectrum ({len(rows)} points) -> {args.out}; summary -> {summary_path}")
    return EXIT_OK


def cmd_encode(args) -> int:
    model = _load_model(args)
    schedule = _load_schedule(args.schedule, model)
    encoding = encode_compact(schedule)
    config = {"subcommand": "encode", "schedule": schedule_to_dict(schedule)}
    write_json(args.out, _header(config, args.seed), {"encoding": encoding_to_dict(encoding, schedule)})
    print(f"{encoding.bit_count} payload bits (hex {encoding.register_hex}) -> {args.out}")
    return EXIT_OK


def cmd_decode(args) -> int:
    model = _load_model(args)
    doc = json.loads(Path(args.encoding).read_text(encoding="utf-8"))
    enc_doc = doc.get("encoding", doc)
    multiplier = args.clock or int(enc_doc["clock_multiplier"])
    kick_angle = args.kick_angle if args.kick_angle is not None else float(enc_doc["kick_angle"])
    encoding = CompactEncoding.from_hex(enc_doc["register_hex"], int(enc_doc["total_bits"]))
    clock = ClockConfig.for_model(model, multiplier)
    schedule = decode_compact(encoding, clock, kick_angle)
    config = {"subcommand": "decode", "encoding": enc_doc}
    write_json(args.out, _header(config, args.seed), {"schedule": schedule_to_dict(schedule)})
    print(f"decoded N={schedule.train_length}, {len(schedule.on_ramp)} ramp cycles -> {args.out}")
    return EXIT_OK


def _sweep_config_from_file(cfg: dict[str, str]) -> tuple[SweepConfig, dict]:
    sweep = SweepConfig(
        n_samples=int(cfg.get("samples", "100")),
        sigma_omega=TWO_PI * 1e6 * float(cfg.get("sigma_omega_mhz", "0.5")),
        sigma_alpha=TWO_PI * 1e6 * float(cfg.get("sigma_alpha_mhz", "0.5")),
        sigma_jitter=1e-12 * float(cfg.get("sigma_jitter_ps", "1.0")),
        sigma_theta=float(cfg.get("sigma_theta", "0.001")),
        sigma_gamma=float(cfg.get("sigma_gamma", "1e4")),
        seed=int(cfg.get("seed", "0")),
    )
    options = {
        "clock": int(cfg.get("clock", "8")),
        "ramp_lengths": [int(x) for x in cfg.get("ramp_lengths", "0,3,5").split(",")],
        "target_angle": parse_angle(cfg.get("target_angle", "pi")),
        "kick_angle": float(cfg.get("kick_angle", "0.03")),
    }
    return sweep, options


def _optimized_schedules(model, clock_multiplier, ramp_lengths, target_angle,
                         kick_angle, threads):
    clock = ClockConfig.for_model(model, clock_multiplier)
    target = TargetGate.y_rotation(target_angle)
    schedules = {}
    for n in ramp_lengths:
        space = SearchSpace(clock=clock, ramp_cycles=n, kick_angle=kick_angle)
        schedules[n] = search(model, target, space, threads=threads).best_schedule
    return schedules


_ROBUST_COLUMNS = ["ramp_length", "sample", "delta_omega", "delta_alpha",
                   "jitter_sigma", "delta_theta", "gamma", "avg_fidelity", "leakage"]


def cmd_robustness(args) -> int:
    model = _load_model(args)
    cfg = read_config(args.config) if args.config else {}
    sweep, options = _sweep_config_from_file(cfg)
    config = {"subcommand": "robustness", "sweep": vars(sweep) | options}
    schedules = _optimized_schedules(
        model, options["clock"], options["ramp_lengths"],
        options["target_angle"], options["kick_angle"], _threads(args),
    )
    target = TargetGate.y_rotation(options["target_angle"])
    rows, summary = robustness_sweep(model, schedules, sweep, target=target)
    header = _header(config, sweep.seed)
    write_csv(args.out, header, _ROBUST_COLUMNS, rows)
    summary_path = args.summary or str(Path(args.out).with_suffix(".summary.json"))
    write_json(summary_path, header, {"summary": {str(k): v for k, v in summary.items()}})
    print(f"{len(rows)} samples -> {args.out}; summary -> {summary_path}")
    return EXIT_OK


def reproduce_figures(outdir: str, model, angles, samples: int, seed: int,
                      threads: int) -> list[str]:
    """Emit the CSV bundle behind the fidelity, error-budget, robustness,
    and spectrum figures."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    config = {
        "subcommand": "reproduce-figures",
        "angles": angles,
        "samples": samples,
    }
    header = _header(config, seed)

    # Fidelity vs target angle, 4x clock, ramp lengths 0..5.
    clock4 = ClockConfig.for_model(model, 4)
    space4 = SearchSpace(clock=clock4, ramp_cycles=5)
    rows = angle_sweep(model, space4, angles, ramp_lengths=list(range(6)), threads=threads)
    path = str(out / "fig3_angle_sweep.csv")
    write_csv(path, header, _SWEEP_COLUMNS, _sweep_rows_to_csv(rows))
    written.append(path)

    # Error budget for both clocks, ramp lengths {1, 3, 5}.
    fig4_rows = []
    for multiplier in (4, 8):
        clock = ClockConfig.for_model(model, multiplier)
        space = SearchSpace(clock=clock, ramp_cycles=5)
        for r in angle_sweep(model, space, angles, ramp_lengths=[1, 3, 5], threads=threads):
            fig4_rows.append({"clock": multiplier} | r)
    path = str(out / "fig4_error_analysis.csv")
    write_csv(
        path, header, ["clock"] + _SWEEP_COLUMNS,
        [{"clock": r["clock"]} | c for r, c in zip(fig4_rows, _sweep_rows_to_csv(fig4_rows))],
    )
    written.append(path)

    # Robustness samples, 8x clock.
    sweep = SweepConfig(
        n_samples=samples,
        sigma_omega=TWO_PI * 0.5e6,
        sigma_alpha=TWO_PI * 0.5e6,
        sigma_jitter=1e-12,
        sigma_theta=1e-3,
        sigma_gamma=1e4,
        seed=seed,
    )
    schedules = _optimized_schedules(model, 8, [0, 3, 5], math.pi, 0.03, threads)
    rows, _ = robustness_sweep(model, schedules, sweep)
    path = str(out / "fig5_robustness.csv")
    write_csv(path, header, _ROBUST_COLUMNS, rows)
    written.append(path)

    # Comb spectra of optimized pi gates, 4x clock, ramp lengths 0..4.
    target = TargetGate.y_rotation(math.pi)
    spec_rows = []
    for n in range(5):
        space = SearchSpace(clock=clock4, ramp_cycles=n)
        best = search(model, target, space, threads=threads).best_schedule
        table = pulse_spectrum(expand_bits(best), clock4, model=model)
        spec_rows += [
            {"cycles": n, "omega": float(w), "magnitude": float(m)}
            for w, m in zip(table.freq_grid, table.magnitude)
        ]
    path = str(out / "fig6_spectrum.csv")
    write_csv(path, header, ["cycles", "omega", "magnitude"], spec_rows)
    written.append(path)
    return written


def cmd_reproduce_figures(args) -> int:
    model = _load_model(args)
    if args.angles:
        angles = [parse_angle(a) for a in args.angles.split(",")]
    else:
        angles = [k * math.pi / 12 for k in range(1, 24)]
    written = reproduce_figures(
        args.outdir, model, angles, args.samples, args.seed or 0, _threads(args)
    )
    for path in written:
        print(f"wrote {path}")
    return EXIT_OK


# --- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sfqdrag",
        description="Binary SFQ pulse schedules for transmon single-qubit gates.",
    )
    parser.add_argument("--version", action="version", version=f"sfqdrag {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", help="cached model JSON (default: calibrate 5 GHz / 250 MHz)")
    common.add_argument("--seed", type=int, default=0, help="seed recorded in artifacts")
    common.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: $SFQ_THREADS or 1)")

    p = sub.add_parser("calibrate", parents=[common], help="fit (E_C, E_J) to spectrum targets")
    p.add_argument("--f01-ghz", type=float, default=5.0)
    p.add_argument("--anharm-mhz", type=float, default=250.0)
    p.add_argument("--dim", type=int, default=201)
    p.add_argument("--levels", type=int, default=7)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("simulate", parents=[common], help="propagate a schedule JSON")
    p.add_argument("--schedule", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("optimize", parents=[common], help="exhaustive ramp/train search")
    p.add_argument("--target-angle", required=True, help='radians or fractions like "pi/2"')
    p.add_argument("--clock", type=int, choices=(4, 8), default=4)
    p.add_argument("--ramp-cycles", type=int, default=4)
    p.add_argument("--kick-angle", type=float, default=0.03)
    p.add_argument("--train-window", help="inclusive lo:hi train lengths")
    p.add_argument("--objective", choices=("avg", "leakage", "phase"), default="avg")
    p.add_argument("--prune-c", help="derivative-coefficient band lo:hi enabling ramp pruning")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("sweep", parents=[common], help="angle sweep table (CSV)")
    p.add_argument("--angles", required=True, help="comma list, e.g. pi/4,pi/2,pi")
    p.add_argument("--cycles", default="0,1,2,3,4,5")
    p.add_argument("--clock", type=int, choices=(4, 8), default=4)
    p.add_argument("--kick-angle", type=float, default=0.03)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("spectrum", parents=[common], help="comb spectrum of a schedule")
    p.add_argument("--schedule", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--summary", help="summary JSON path (default: <out>.summary.json)")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("robustness", parents=[common], help="Lindblad robustness sweep")
    p.add_argument("--config", help="key=value sweep config file")
    p.add_argument("--out", required=True)
    p.add_argument("--summary", help="summary JSON path (default: <out>.summary.json)")
    p.set_defaults(func=cmd_robustness)

    p = sub.add_parser("encode", parents=[common], help="schedule JSON -> register image")
    p.add_argument("--schedule", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", parents=[common], help="register image -> schedule JSON")
    p.add_argument("--encoding", required=True)
    p.add_argument("--clock", type=int, choices=(4, 8), default=None)
    p.add_argument("--kick-angle", type=float, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("reproduce-figures", parents=[common],
                       help="emit the figure-data CSV bundle")
    p.add_argument("--outdir", required=True)
    p.add_argument("--angles", help="comma list overriding the default grid")
    p.add_argument("--samples", type=int, default=100)
    p.set_defaults(func=cmd_reproduce_figures)

    return parser


def run(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


def main(argv: list[str] | None = None) -> int:
    try:
        return run(argv)
    except (InvalidSpecError, DecodeError, SearchSpaceError, DegenerateGateError,
            FileNotFoundError, KeyError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (CalibrationError, NumericalFailureError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    raise SystemExit(main())
